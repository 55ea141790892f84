"""Timing of the compiled kernels against the numpy fallback."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..seeds import stage_rng

BENCH_HEADER = ("kernel", "size", "backend", "seconds", "agree")


@dataclass(frozen=True)
class BenchRow:
    kernel: str
    size: int
    backend: str
    seconds: float
    agree: bool

    def as_tuple(self) -> tuple:
        return (self.kernel, self.size, self.backend, f"{self.seconds:.6f}", self.agree)


def _best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _backends() -> list[str]:
    return ["cython", "python"] if kernels.BACKEND == "cython" else ["python"]


def run_bench(sizes=(50, 100, 200), seed: int = 0, repeat: int = 3) -> list[BenchRow]:
    rows = []
    rng = stage_rng(seed, 0)
    for n in sizes:
        cost = rng.integers(0, 1000, size=(n, n)).astype(np.int64)
        ref = None
        for be in _backends():
            sec, (r2c, _, _) = _best_of(lambda: kernels.hungarian(cost, be), repeat)
            total = int(cost[np.arange(n), r2c].sum())
            ref = total if ref is None else ref
            rows.append(BenchRow("hungarian-int64", n, be, sec, total == ref))

        metric = np.sqrt(rng.random((n, n)).astype(np.longdouble))
        ref = None
        for be in _backends():
            sec, (r2c, _, _) = _best_of(lambda: kernels.hungarian(metric, be), repeat)
            total = metric[np.arange(n), r2c].sum()
            ref = total if ref is None else ref
            rows.append(BenchRow("hungarian-longdouble", n, be, sec, bool(abs(total - ref) < 1e-12 * n)))

        words = rng.integers(0, 2**63, size=(4 * n, 2), dtype=np.uint64)
        ref = None
        for be in _backends():
            sec, g = _best_of(lambda: kernels.ortho_matrix(words, words, be), repeat)
            ref = g if ref is None else ref
            rows.append(BenchRow("ortho-matrix", 4 * n, be, sec, bool(np.array_equal(g, ref))))

        pts = rng.integers(-50, 50, size=(n, 16)).astype(np.int64)
        ref = None
        for be in _backends():
            sec, g = _best_of(lambda: kernels.sqdist_matrix(pts, pts, be), repeat)
            ref = g if ref is None else ref
            rows.append(BenchRow("sqdist-matrix", n, be, sec, bool(np.array_equal(g, ref))))
    return rows

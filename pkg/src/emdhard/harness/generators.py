"""Seeded instance families."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ParameterError
from ..numeric import as_fraction
from ..seeds import stage_rng
from ..vectors import PointSetPair

FAMILIES = (
    "uniform-binary",
    "planted-orthogonal",
    "planted-hitting",
    "clustered-integer",
    "complement-matched",
)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    d: int
    seed: int = 0
    density: Fraction = Fraction(1, 2)
    count: int = 1  # planted-orthogonal: pairs to plant
    bound: int | None = None  # clustered-integer: coordinate bound, default n
    n_right: int | None = None  # binary families: right side size, default n

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1 or self.d < 1:
            raise ParameterError("n and d must be positive")
        dens = as_fraction(self.density)
        if not 0 <= dens <= 1:
            raise ParameterError("density must lie in [0, 1]")
        object.__setattr__(self, "density", dens)
        if self.family == "planted-orthogonal" and not 0 <= self.count <= self.n:
            raise ParameterError("count must lie in [0, n]")
        if self.bound is not None and self.bound < 0:
            raise ParameterError("bound must be non-negative")
        if self.n_right is not None and self.n_right < self.n:
            raise ParameterError("n_right must be at least n")

    @property
    def right_size(self) -> int:
        return self.n if self.n_right is None else self.n_right


def _bits(rng: np.random.Generator, rows: int, d: int, density: Fraction) -> np.ndarray:
    return (rng.random((rows, d)) < float(density)).astype(np.int64)


def generate(spec: GeneratorSpec) -> PointSetPair:
    rng = stage_rng(spec.seed, 0)
    n, d, m = spec.n, spec.d, spec.right_size
    fam = spec.family
    if fam == "clustered-integer":
        bound = spec.n if spec.bound is None else spec.bound
        return _clustered(rng, n, d, bound)
    A = _bits(rng, n, d, spec.density)
    B = _bits(rng, m, d, spec.density)
    if fam == "planted-orthogonal":
        rows = rng.choice(n, size=spec.count, replace=False)
        cols = rng.choice(m, size=spec.count, replace=False)
        B[cols] = 1 - A[rows]
    elif fam == "planted-hitting":
        A[rng.integers(n)] = 1
        # the all-ones row hits every non-zero right vector
        for j in np.flatnonzero(B.sum(axis=1) == 0):
            B[j, rng.integers(d)] = 1
    elif fam == "complement-matched":
        B[rng.permutation(m)[:n]] = 1 - A
    return PointSetPair.from_lists(A.tolist(), B.tolist(), "binary")


def _clustered(rng: np.random.Generator, n: int, d: int, bound: int) -> PointSetPair:
    centers = rng.integers(0, bound + 1, size=(max(1, n // 3), d))
    spread = max(1, bound // 8)

    def side():
        pick = centers[rng.integers(len(centers), size=n)]
        noise = rng.integers(-spread, spread + 1, size=(n, d))
        return np.clip(pick + noise, 0, bound)

    return PointSetPair.from_lists(side().tolist(), side().tolist(), "integer")

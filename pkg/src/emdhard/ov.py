"""Orthogonal vectors, hitting set, Find-OV and orthogonal matching.

Brute-force oracles plus the randomized algorithms built on top of a
maximum-orthogonal-matching (MOM) solver or a promise Find-OV solver.
Every orthogonal pair an algorithm reports is re-checked against the input,
so soundness never depends on the randomness.

Solver protocols:

* MOM solver: ``pair -> sequence`` holding one right id (or None) per left
  vector; only pairs that are actually orthogonal are used.
* Find-OV solver: ``pair -> FindOvResult``.
* promise solver: ``(pair, k) -> sequence of (left id, right id)``; may raise
  ``PromiseViolation`` carrying the pairs it did find.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import InstanceShapeError, InvariantViolation, ParameterError, PromiseViolation
from .gadgets import MomSolver, duplicate
from .matching import max_cardinality_matching
from .numeric import RationalLike, as_fraction, ceil_log2, ceil_pow, ceil_sqrt
from .seeds import stage_rng
from .vectors import BinaryVector, PointSetPair, dot, pack_bits

DEFAULT_FLOOR = 64

PromiseSolver = Callable[[PointSetPair, int], Sequence[tuple[int, int]]]


def _require_binary(pair: PointSetPair) -> None:
    if pair.kind != "binary":
        raise InstanceShapeError("boolean problems need a binary instance")


def ortho_graph(pair: PointSetPair, backend: str | None = None) -> np.ndarray:
    """``G[i, j] = 1`` iff ``left[i] . right[j] == 0`` (uint8)."""
    _require_binary(pair)
    aw = pack_bits(pair.left, pair.dim)
    bw = pack_bits(pair.right, pair.dim)
    return kernels.ortho_matrix(aw, bw, backend)


class _Packed:
    """Packed words of both sides, for repeated partial orthogonality checks."""

    def __init__(self, pair: PointSetPair, backend: str | None = None):
        self.aw = pack_bits(pair.left, pair.dim)
        self.bw = pack_bits(pair.right, pair.dim)
        self.backend = backend

    def row(self, i: int, cols: np.ndarray | None = None) -> np.ndarray:
        b = self.bw if cols is None else self.bw[cols]
        return kernels.ortho_matrix(self.aw[i : i + 1], b, self.backend)[0].astype(bool)

    def col(self, j: int, rows: np.ndarray | None = None) -> np.ndarray:
        a = self.aw if rows is None else self.aw[rows]
        return kernels.ortho_matrix(a, self.bw[j : j + 1], self.backend)[:, 0].astype(bool)


# ---------------------------------------------------------------- oracles


def ov_oracle(pair: PointSetPair, backend: str | None = None) -> tuple[int, int] | None:
    """Lexicographically first orthogonal pair, or None."""
    g = ortho_graph(pair, backend)
    hits = np.argwhere(g)
    if len(hits) == 0:
        return None
    return int(hits[0, 0]), int(hits[0, 1])


def hs_oracle(pair: PointSetPair, backend: str | None = None) -> int | None:
    """First left vector with no orthogonal partner, or None."""
    g = ortho_graph(pair, backend)
    if pair.n_right == 0:
        return 0 if pair.n_left else None
    lonely = np.flatnonzero(~g.any(axis=1))
    return int(lonely[0]) if len(lonely) else None


@dataclass(frozen=True)
class FindOvResult:
    found: frozenset[int]
    witnesses: dict[int, int] = field(hash=False)
    missed_budget: int = 0

    def check(self, pair: PointSetPair) -> None:
        if set(self.witnesses) != set(self.found):
            raise InvariantViolation("every found id needs exactly one witness")
        for i, j in self.witnesses.items():
            if dot(pair.left[i], pair.right[j]) != 0:
                raise InvariantViolation(f"witness ({i}, {j}) is not orthogonal")

    def to_json_obj(self) -> dict:
        return {
            "found": sorted(self.found),
            "witnesses": {str(i): j for i, j in sorted(self.witnesses.items())},
            "missed_budget": self.missed_budget,
        }


def find_ov_oracle(pair: PointSetPair, backend: str | None = None) -> FindOvResult:
    g = ortho_graph(pair, backend)
    wit = {}
    for i in np.flatnonzero(g.any(axis=1)) if g.size else ():
        wit[int(i)] = int(np.argmax(g[i]))
    return FindOvResult(frozenset(wit), wit, 0)


def mom_oracle(pair: PointSetPair, backend: str | None = None) -> tuple[int, tuple[int, ...]]:
    """Maximum orthogonal matching size and a full injection realising it."""
    if pair.n_left > pair.n_right:
        raise InstanceShapeError("MOM needs |A| <= |B|")
    g = ortho_graph(pair, backend)
    adj = [np.flatnonzero(g[i]).tolist() for i in range(pair.n_left)]
    m = max_cardinality_matching(adj, pair.n_left, pair.n_right, backend)
    pi = dict(m.pairs)
    free = iter(j for j in range(pair.n_right) if j not in set(pi.values()))
    out = tuple(pi[i] if i in pi else next(free) for i in range(pair.n_left))
    return len(m.pairs), out


def mom_oracle_solver(pair: PointSetPair) -> tuple[int, ...]:
    return mom_oracle(pair)[1]


# ---------------------------------------------------------- sampling Find-OV


@dataclass(frozen=True)
class FindOvConfig:
    alpha: Fraction
    seed: int = 0
    brute_force_floor: int = DEFAULT_FLOOR
    missed_budget: int | None = None
    exact_estimates: bool = False  # replace sampled degree estimates by exact degrees

    def __post_init__(self):
        a = as_fraction(self.alpha)
        if not 0 < a < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class SamplingSizes:
    n: int
    step1_samples: int
    step1_threshold: int
    step2_samples: int
    step2_threshold: int
    copies: int

    @classmethod
    def of(cls, n: int, alpha: Fraction) -> "SamplingSizes":
        return cls(
            n=n,
            step1_samples=ceil_pow(n, 1 - alpha / 4),
            step1_threshold=ceil_pow(n, alpha / 2),
            step2_samples=ceil_pow(n, 1 - alpha / 2),
            step2_threshold=ceil_pow(n, alpha),
            copies=2 * ceil_pow(n, alpha),
        )


@dataclass
class PrefilterState:
    sizes: SamplingSizes
    witnesses: dict[int, int]
    step1: set[int]
    step2: set[int]
    large_b: list[int]
    remaining_a: list[int]
    remaining_b: list[int]


def _sample(rng: np.random.Generator, population: int, size: int) -> np.ndarray:
    if size >= population:
        return np.arange(population)
    return np.sort(rng.choice(population, size=size, replace=False))


def find_ov_prefilter(pair: PointSetPair, cfg: FindOvConfig, backend: str | None = None) -> PrefilterState:
    """Steps 1 and 2 of the sampling algorithm (high-degree vectors)."""
    _require_binary(pair)
    nA, nB = pair.n_left, pair.n_right
    n = max(nA, nB)
    sizes = SamplingSizes.of(n, cfg.alpha)
    packed = _Packed(pair, backend)
    wit: dict[int, int] = {}

    # step 1: left vectors with many orthogonal partners
    rng = stage_rng(cfg.seed, 1)
    step1 = set()
    for i in range(nA):
        if cfg.exact_estimates:
            cols = np.arange(nB)
        else:
            cols = _sample(rng, nB, sizes.step1_samples)
        if len(cols) == 0:
            continue
        hit = cols[packed.row(i, cols)]
        # estimate hits * nB / |sample| against the threshold, exactly
        if len(hit) and len(hit) * nB >= sizes.step1_threshold * len(cols):
            wit[i] = int(hit[0])
            step1.add(i)

    # step 2: right vectors with many orthogonal partners, scanned in full
    rng = stage_rng(cfg.seed, 2)
    step2, large = set(), []
    for j in range(nB):
        if cfg.exact_estimates:
            rows = np.arange(nA)
        else:
            rows = _sample(rng, nA, sizes.step2_samples)
        if len(rows) == 0:
            continue
        hits = int(packed.col(j, rows).sum())
        if hits * nA >= sizes.step2_threshold * len(rows):
            large.append(j)
            for i in np.flatnonzero(packed.col(j)):
                i = int(i)
                if i not in wit:
                    wit[i] = j
                    step2.add(i)
    large_set = set(large)
    return PrefilterState(
        sizes=sizes,
        witnesses=wit,
        step1=step1,
        step2=step2,
        large_b=large,
        remaining_a=[i for i in range(nA) if i not in wit],
        remaining_b=[j for j in range(nB) if j not in large_set],
    )


def find_ov_sampling(
    pair: PointSetPair, cfg: FindOvConfig, mom_solver: MomSolver = mom_oracle_solver, backend: str | None = None
) -> FindOvResult:
    """Find-OV with additive error from a MOM solver.

    Sizes use ``n = max(|A|, |B|)`` so that the routine also serves unequal
    sides (the phased hitting-set search passes fewer lefts than rights).
    """
    _require_binary(pair)
    n = max(pair.n_left, pair.n_right)
    budget = n // 2 if cfg.missed_budget is None else cfg.missed_budget
    if n <= cfg.brute_force_floor:
        return find_ov_oracle(pair, backend)
    st = find_ov_prefilter(pair, cfg, backend)
    wit = st.witnesses

    # step 3: low-degree remainder through a MOM solve against copies of B
    if st.remaining_a and st.remaining_b:
        right, parents = duplicate([pair.right[j] for j in st.remaining_b], st.sizes.copies)
        parents = [st.remaining_b[p] for p in parents]
        chunk = len(right)
        for s in range(0, len(st.remaining_a), chunk):
            ids = st.remaining_a[s : s + chunk]
            sub = pair.with_sides([pair.left[i] for i in ids], right)
            pi = mom_solver(sub)
            if len(pi) != len(ids):
                raise InvariantViolation("MOM solver returned the wrong number of assignments")
            for t, j in enumerate(pi):
                if j is None:
                    continue
                i, b = ids[t], parents[j]
                if dot(pair.left[i], pair.right[b]) == 0:
                    wit[i] = b
    return FindOvResult(frozenset(wit), dict(wit), budget)


# ------------------------------------------------------ phased hitting set


@dataclass(frozen=True)
class HsPhase:
    i: int
    remaining: int  # |R_i|
    found_copies: int  # |P|, duplicated ids reported
    found: int  # |P'|, originals removed
    verdict: str  # "pass", "fail" or "idle"


@dataclass(frozen=True)
class HsPhaseTrace:
    phases: tuple[HsPhase, ...]
    t: int
    hitting_exists: bool

    @property
    def verdict(self) -> str:
        return "hitting vector exists" if self.hitting_exists else "none"

    def to_json_obj(self) -> dict:
        return {
            "verdict": self.verdict,
            "t": self.t,
            "phases": [p.__dict__ for p in self.phases],
        }


def hitting_set_phased(
    pair: PointSetPair,
    find_ov_solver: Callable[[PointSetPair], FindOvResult] = find_ov_oracle,
) -> HsPhaseTrace:
    """Decide hitting set with ``ceil(log2 n) + 1`` Find-OV phases.

    Phase i hands ``2**(i-1)`` copies of every surviving left vector to the
    solver, so a solver that may miss up to n/2 vectors can only miss
    originals whose copies it skipped entirely.
    """
    _require_binary(pair)
    n = pair.n_left
    if n == 0:
        return HsPhaseTrace((), 0, False)
    t = ceil_log2(n) + 1
    R = list(range(n))
    phases = []
    for i in range(1, t + 1):
        if not R:
            phases.append(HsPhase(i, 0, 0, 0, "idle"))
            continue
        copies = 1 << (i - 1)
        left, parents = duplicate([pair.left[r] for r in R], copies)
        res = find_ov_solver(pair.with_sides(left, pair.right))
        for p, w in res.witnesses.items():
            if dot(left[p], pair.right[w]) != 0:
                raise InvariantViolation("Find-OV solver reported a non-orthogonal witness")
        gone = {R[parents[p]] for p in res.found}
        nxt = [r for r in R if r not in gone]
        failed = len(nxt) << i > n
        phases.append(HsPhase(i, len(R), len(res.found), len(gone), "fail" if failed else "pass"))
        R = nxt
        if failed:
            return HsPhaseTrace(tuple(phases), t, True)
    if R:
        raise InvariantViolation("phases ended with unresolved vectors")
    return HsPhaseTrace(tuple(phases), t, False)


# --------------------------------------------------- promise Find-OV routes


def find_ov_promise(pair: PointSetPair, k: int, backend: str | None = None) -> list[tuple[int, int]]:
    """First ``k`` orthogonal pairs in row-major order."""
    if k < 0:
        raise ParameterError("k must be non-negative")
    out: list[tuple[int, int]] = []
    if k == 0:
        return out
    packed = _Packed(pair, backend)
    for i in range(pair.n_left):
        for j in np.flatnonzero(packed.row(i)):
            out.append((i, int(j)))
            if len(out) == k:
                return out
    raise PromiseViolation(f"only {len(out)} orthogonal pairs, {k} requested", partial=tuple(out))


def _promise_call(solver: PromiseSolver, pair: PointSetPair, k: int) -> tuple[list[tuple[int, int]], bool]:
    """Run a promise solver; returns (pairs, complete)."""
    try:
        got = list(solver(pair, k))
    except PromiseViolation as exc:
        return list(exc.partial), False
    return got, len(got) >= k


def promise_copy_count(n: int, delta: RationalLike) -> int:
    delta = as_fraction(delta)
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    return ceil_pow(n, delta / (2 - delta), 2)


def ov_via_promise_findov(
    pair: PointSetPair, delta: RationalLike, promise_solver: PromiseSolver = find_ov_promise
) -> tuple[int, int] | None:
    _require_binary(pair)
    if pair.n_left != pair.n_right:
        raise InstanceShapeError("needs |A| = |B|")
    delta = as_fraction(delta)
    copies = promise_copy_count(pair.n_left, delta)
    left, lp = duplicate(pair.left, copies)
    right, rp = duplicate(pair.right, copies)
    k = ceil_pow(len(left), delta)
    got, _ = _promise_call(promise_solver, pair.with_sides(left, right), k)
    for i, j in got:
        if dot(left[i], right[j]) == 0:
            return lp[i], rp[j]
    return None


@dataclass(frozen=True)
class PromiseHsTrace:
    verdict: str  # "YES": no hitting vector, "NO": hitting vector found
    delegated: bool
    k: int = 0
    k_block: int = 0
    threshold: int = 0
    marked_step1: int = 0
    marked_step2: int = 0
    marked_step4: int = 0
    unmarked_after_step2: int = 0
    solver_calls: int = 0
    early_exit: bool = False

    def to_json_obj(self) -> dict:
        return dict(self.__dict__)


def _blocks(n: int, k: int) -> list[np.ndarray]:
    return [b for b in np.array_split(np.arange(n), k) if len(b)]


def hs_via_promise_findov(
    pair: PointSetPair,
    epsilon: RationalLike,
    seed: int = 0,
    promise_solver: PromiseSolver = find_ov_promise,
    brute_force_floor: int = DEFAULT_FLOOR,
) -> PromiseHsTrace:
    """Hitting set through repeated promise Find-OV calls on k x k blocks."""
    _require_binary(pair)
    if pair.n_left != pair.n_right:
        raise InstanceShapeError("needs |A| = |B|")
    eps = as_fraction(epsilon)
    alpha = eps / 7
    if not 0 < alpha < Fraction(1, 3):
        raise ParameterError("epsilon must lie in (0, 7/3)")
    n = pair.n_left
    if n <= brute_force_floor:
        return PromiseHsTrace("YES" if hs_oracle(pair) is None else "NO", True)

    d = pair.dim
    if any(b.popcount() == 0 for b in pair.right):
        return PromiseHsTrace("YES", False)
    ones = BinaryVector((1,) * d)
    work = list(pair.left)
    marked = [False] * n
    packed = _Packed(pair)

    def mark(i: int) -> None:
        marked[i] = True
        work[i] = ones

    # a zero left vector is orthogonal to everything
    for i, a in enumerate(pair.left):
        if a.popcount() == 0:
            mark(i)

    # step 1: sampled right vectors per left vector
    rng = stage_rng(seed, 1)
    s1 = ceil_pow(n, 1 - alpha)
    c1 = 0
    for i in range(n):
        if marked[i]:
            continue
        cols = _sample(rng, n, s1)
        if packed.row(i, cols).any():
            mark(i)
            c1 += 1

    # step 2: promise calls per block pair until one comes back short
    k = ceil_pow(n, Fraction(1, 3) - alpha)
    k_block = ceil_sqrt(Fraction(n, k))
    calls, c2 = 0, 0
    a_blocks, b_blocks = _blocks(n, k), _blocks(n, k)
    for ab in a_blocks:
        for bb in b_blocks:
            while True:
                sub = pair.with_sides([work[i] for i in ab], [pair.right[j] for j in bb])
                got, complete = _promise_call(promise_solver, sub, k_block)
                calls += 1
                for i, j in got:
                    gi = int(ab[i])
                    if dot(sub.left[i], sub.right[j]) != 0:
                        raise InvariantViolation("promise solver returned a non-orthogonal pair")
                    if not marked[gi]:
                        mark(gi)
                        c2 += 1
                if not complete or not got:
                    break

    # step 3: too many survivors means a hitting vector is likely
    threshold = 2 * k * k * k_block
    left_over = [i for i in range(n) if not marked[i]]
    base = dict(
        delegated=False, k=k, k_block=k_block, threshold=threshold,
        marked_step1=c1, marked_step2=c2, unmarked_after_step2=len(left_over), solver_calls=calls,
    )
    if len(left_over) > threshold:
        return PromiseHsTrace("NO", early_exit=True, **base)

    # step 4: exhaustive scan of the survivors
    c4 = 0
    for i in left_over:
        if packed.row(i).any():
            mark(i)
            c4 += 1
    verdict = "YES" if all(marked) else "NO"
    return PromiseHsTrace(verdict, marked_step4=c4, **base)

"""Exact bipartite matching solvers and the EMD family built on them.

Minimum-cost matchings use the Hungarian method (shortest augmenting paths
with potentials, O(n^3)).  Injections are solved by padding the left side
with zero-cost dummy rows, which are stripped from the result.

Metric (Euclidean) costs are square roots materialised in x86 extended
precision (``numpy.longdouble``, 64-bit mantissa).  Squared and explicit
integer costs stay exact: int64 when the magnitudes allow it, Python
integers otherwise.

Among all optimal matchings the solvers return the one whose pair sequence
(sorted by left id) is lexicographically smallest.  For metric costs,
"optimal" means within ``METRIC_TIE_RTOL`` of the optimum relative to the
largest edge cost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import perm
from typing import Any, Iterable, Literal, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import CapacityError, InstanceShapeError, InvariantViolation
from .vectors import PointSetPair, sq_dist

MatchingKind = Literal["bijection", "injection", "partial"]
OracleMode = Literal["euclidean", "squared-euclidean", "explicit-matrix", "factorized-low-rank"]

METRIC_TIE_RTOL = 1e-12
BRUTE_FORCE_MAX_LEFT = 9
BRUTE_FORCE_MAX_CANDIDATES = 362880  # 9!

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class Matching:
    """A set of (left_id, right_id) pairs sorted by left id.

    ``cost`` is an ``int`` for exact modes, a ``numpy.longdouble`` for
    Euclidean costs, and the number of pairs for ``kind='partial'``.
    """

    pairs: tuple[tuple[int, int], ...]
    cost: Any
    kind: MatchingKind
    n_left: int | None = None
    n_right: int | None = None

    def __post_init__(self):
        pairs = tuple(sorted((int(a), int(b)) for a, b in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        lefts = [a for a, _ in pairs]
        rights = [b for _, b in pairs]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise InvariantViolation("matching reuses a vertex")
        if self.kind not in ("bijection", "injection", "partial"):
            raise InstanceShapeError(f"unknown matching kind {self.kind!r}")
        if self.n_left is not None and self.kind != "partial" and len(pairs) != self.n_left:
            raise InvariantViolation("matching does not cover the left side")
        if self.kind == "bijection" and self.n_right is not None and len(pairs) != self.n_right:
            raise InvariantViolation("bijection does not cover the right side")

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def to_json_obj(self) -> dict:
        return {"cost": format_cost(self.cost), "pairs": [list(p) for p in self.pairs], "kind": self.kind}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Matching":
        try:
            pairs = tuple((int(a), int(b)) for a, b in obj["pairs"])
            cost = parse_cost(obj["cost"])
            kind = obj["kind"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceShapeError(f"malformed matching document: {exc}") from exc
        return cls(pairs, cost, kind)


def format_cost(cost) -> str:
    if isinstance(cost, (int, np.integer)):
        return str(int(cost))
    return np.format_float_positional(np.longdouble(cost), unique=True, trim="-")


def parse_cost(text: str):
    text = str(text)
    if text.lstrip("-").isdigit():
        return int(text)
    return np.longdouble(text)


def _to_longdouble(x) -> np.longdouble:
    if isinstance(x, (int, np.integer)) and abs(int(x)) >= 1 << 63:
        return np.longdouble(str(int(x)))
    return np.longdouble(x)


def sqrt_ld(x) -> np.longdouble:
    """Square root of an exact non-negative integer in extended precision."""
    return np.sqrt(_to_longdouble(x))


def squared_distance_matrix(pair: PointSetPair, backend: str | None = None) -> np.ndarray:
    """Exact ``|left| x |right|`` squared distances (int64 or object)."""
    left, right = pair.left_array(), pair.right_array()
    if pair.kind == "binary" and left.size and right.size:
        # 0/1 rows: BLAS dot products are exact far beyond any usable dim
        lf, rf = left.astype(np.float64), right.astype(np.float64)
        dots = (lf @ rf.T).astype(np.int64)
        return left.sum(axis=1)[:, None] + right.sum(axis=1)[None, :] - 2 * dots
    maxabs = 0
    for arr in (left, right):
        if arr.size:
            maxabs = max(maxabs, int(np.max(np.abs(arr))))
    if left.dtype == np.int64 and right.dtype == np.int64 and (2 * maxabs) ** 2 * pair.dim < _INT64_SAFE:
        return kernels.sqdist_matrix(left, right, backend)
    return kernels.sqdist_matrix(left.astype(object), right.astype(object), "python")


def _object_to_longdouble(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=np.longdouble)
    flat = out.reshape(-1)
    for k, x in enumerate(arr.reshape(-1)):
        flat[k] = _to_longdouble(x)
    return out


@dataclass(frozen=True)
class CostOracle:
    """Where edge costs come from.

    ``explicit-matrix`` payloads are integer (exact) or real (metric);
    ``factorized-low-rank`` payloads are integer pairs ``(U, V)`` with
    ``cost(i, j) = sum_r U[i][r] * V[j][r]``.
    """

    mode: OracleMode
    payload: Any

    @classmethod
    def euclidean(cls, pair: PointSetPair) -> "CostOracle":
        return cls("euclidean", pair)

    @classmethod
    def squared(cls, pair: PointSetPair) -> "CostOracle":
        return cls("squared-euclidean", pair)

    @classmethod
    def matrix(cls, m) -> "CostOracle":
        arr = np.asarray(m) if not isinstance(m, np.ndarray) else m
        if arr.ndim != 2:
            # ragged input ends up 1-D of lists
            raise InstanceShapeError("cost matrix must be rectangular")
        return cls("explicit-matrix", arr)

    @classmethod
    def factorized(cls, U, V) -> "CostOracle":
        U = _int_matrix(U)
        V = _int_matrix(V)
        if U.shape[1] != V.shape[1]:
            raise InstanceShapeError("factor ranks differ")
        return cls("factorized-low-rank", (U, V))

    @property
    def shape(self) -> tuple[int, int]:
        if self.mode in ("euclidean", "squared-euclidean"):
            return self.payload.n_left, self.payload.n_right
        if self.mode == "explicit-matrix":
            return self.payload.shape
        U, V = self.payload
        return U.shape[0], V.shape[0]

    @property
    def exact(self) -> bool:
        if self.mode == "euclidean":
            return False
        if self.mode == "explicit-matrix":
            return self.payload.dtype == object or np.issubdtype(self.payload.dtype, np.integer)
        return True

    def values(self, backend: str | None = None) -> np.ndarray:
        """Full cost matrix: int64/object when exact, longdouble otherwise."""
        if self.mode == "squared-euclidean":
            return squared_distance_matrix(self.payload, backend)
        if self.mode == "euclidean":
            sq = squared_distance_matrix(self.payload, backend)
            if sq.dtype == object:
                return np.sqrt(_object_to_longdouble(sq))
            return np.sqrt(sq.astype(np.longdouble))
        if self.mode == "explicit-matrix":
            m = self.payload
            if self.exact:
                return _narrow_ints(m)
            return m.astype(np.longdouble)
        U, V = self.payload
        return _narrow_ints(U.astype(object).dot(V.astype(object).T))

    def cost(self, i: int, j: int):
        if self.mode in ("euclidean", "squared-euclidean"):
            pair = self.payload
            sq = sq_dist(pair.left[i], pair.right[j])
            return sq if self.mode == "squared-euclidean" else sqrt_ld(sq)
        if self.mode == "explicit-matrix":
            x = self.payload[i, j]
            return int(x) if self.exact else np.longdouble(x)
        U, V = self.payload
        return sum(int(a) * int(b) for a, b in zip(U[i], V[j]))

    def total(self, pairs: Iterable[tuple[int, int]]):
        """Recompute a matching's cost from scratch."""
        costs = [self.cost(i, j) for i, j in pairs]
        if self.exact:
            return sum(int(c) for c in costs)
        return np.sum(np.array(costs, dtype=np.longdouble)) if costs else np.longdouble(0)


def _int_matrix(m) -> np.ndarray:
    rows = [list(r) for r in m]
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != arr.shape[1]:
            raise InstanceShapeError("factor matrix must be rectangular")
        arr[i, :] = [int(x) for x in r]
    return arr


def _narrow_ints(m: np.ndarray) -> np.ndarray:
    if m.dtype != object:
        return m.astype(np.int64)
    if m.size == 0 or max(abs(int(x)) for x in m.reshape(-1)) < _INT64_SAFE:
        return m.astype(np.int64)
    return m


def _check_kind(n_left: int, n_right: int, kind: str) -> None:
    if n_left == 0 or n_right == 0:
        raise InstanceShapeError("both sides must be non-empty")
    if kind == "bijection" and n_left != n_right:
        raise InstanceShapeError(f"bijection needs equal sides, got {n_left} and {n_right}")
    if kind == "injection" and n_left > n_right:
        raise InstanceShapeError(f"injection needs |left| <= |right|, got {n_left} > {n_right}")
    if kind not in ("bijection", "injection"):
        raise InstanceShapeError(f"unknown matching kind {kind!r}")


def min_cost_matching(
    oracle: CostOracle,
    kind: str = "bijection",
    canonical: bool = True,
    backend: str | None = None,
) -> Matching:
    """Minimum-cost bijection or injection from left to right.

    With ``canonical=False`` the lexicographic tie-breaking pass is skipped;
    the result is still optimal and deterministic.
    """
    n_left, n_right = oracle.shape
    _check_kind(n_left, n_right, kind)
    cost = oracle.values(backend)
    exact = oracle.exact
    if exact and cost.dtype == np.int64:
        bound = int(np.max(np.abs(cost))) if cost.size else 0
        if bound * (n_right + 2) * 4 >= _INT64_SAFE:
            cost = cost.astype(object)
    if n_left < n_right:
        pad = np.zeros((n_right - n_left, n_right), dtype=cost.dtype)
        if cost.dtype == object:
            pad[:] = 0
        square = np.vstack([cost, pad])
    else:
        square = cost
    row_to_col, u, v = kernels.hungarian(square, backend)
    if canonical:
        if exact:
            tol = 0
        else:
            tol = np.longdouble(METRIC_TIE_RTOL) * max(np.longdouble(1), np.max(np.abs(square)))
        tight = kernels.tight_matrix(square, u, v, tol, backend)
        if not all(tight[i, row_to_col[i]] for i in range(n_right)):
            raise InvariantViolation("Hungarian assignment is not tight under its own potentials")
        row_to_col = kernels.canonicalize(tight, row_to_col, backend)
    pairs = tuple((i, int(row_to_col[i])) for i in range(n_left))
    if exact:
        total = sum(int(cost[i, j]) for i, j in pairs)
    else:
        total = np.sum(np.array([cost[i, j] for i, j in pairs], dtype=np.longdouble))
    return Matching(pairs, total, kind, n_left, n_right)


def emd(pair: PointSetPair, canonical: bool = True, backend: str | None = None):
    """Earth mover distance between equal-size point sets."""
    if pair.n_left != pair.n_right:
        raise InstanceShapeError(f"EMD needs |A| = |B|, got {pair.n_left} and {pair.n_right}")
    m = min_cost_matching(CostOracle.euclidean(pair), "bijection", canonical, backend)
    return m.cost, m


def asymmetric_emd(pair: PointSetPair, canonical: bool = True, backend: str | None = None):
    """Minimum total Euclidean cost of an injection from left into right."""
    if pair.n_left > pair.n_right:
        raise InstanceShapeError(f"asymmetric EMD needs |A| <= |B|, got {pair.n_left} > {pair.n_right}")
    m = min_cost_matching(CostOracle.euclidean(pair), "injection", canonical, backend)
    return m.cost, m


def sqemd(pair: PointSetPair, canonical: bool = True, backend: str | None = None):
    """Minimum total squared Euclidean cost over bijections; exact integer."""
    if pair.n_left != pair.n_right:
        raise InstanceShapeError(f"SQEMD needs |A| = |B|, got {pair.n_left} and {pair.n_right}")
    m = min_cost_matching(CostOracle.squared(pair), "bijection", canonical, backend)
    return m.cost, m


def max_cardinality_matching(
    adjacency: Mapping[int, Iterable[int]] | Sequence[Iterable[int]],
    n_left: int | None = None,
    n_right: int | None = None,
    backend: str | None = None,
) -> Matching:
    """Maximum-cardinality matching (Hopcroft-Karp); ``cost`` is its size."""
    if isinstance(adjacency, Mapping):
        items = {int(k): sorted({int(x) for x in vs}) for k, vs in adjacency.items()}
    else:
        items = {i: sorted({int(x) for x in vs}) for i, vs in enumerate(adjacency)}
    if n_left is None:
        n_left = max(items, default=-1) + 1
    if n_right is None:
        n_right = max((x for vs in items.values() for x in vs), default=-1) + 1
    indptr = np.zeros(n_left + 1, dtype=np.int64)
    for i in range(n_left):
        indptr[i + 1] = indptr[i] + len(items.get(i, ()))
    indices = np.fromiter(
        (x for i in range(n_left) for x in items.get(i, ())), dtype=np.int64, count=int(indptr[-1])
    )
    return hopcroft_karp_csr(n_left, n_right, indptr, indices, backend)


def hopcroft_karp_csr(n_left, n_right, indptr, indices, backend: str | None = None) -> Matching:
    if n_left == 0 or n_right == 0:
        return Matching((), 0, "partial", n_left, n_right)
    match_l = kernels.hopcroft_karp(n_left, n_right, indptr, indices, backend)
    pairs = tuple((i, int(j)) for i, j in enumerate(match_l) if j >= 0)
    return Matching(pairs, len(pairs), "partial", n_left, n_right)


def brute_force_min_matching(oracle: CostOracle, kind: str = "bijection") -> Matching:
    """Exact optimum by enumerating every bijection/injection.

    Capped at ``|left| <= 9`` and at most 9! candidate maps.  Enumeration is
    in lexicographic order and only strict improvements replace the
    incumbent, so ties resolve to the lexicographically smallest map.
    """
    n_left, n_right = oracle.shape
    _check_kind(n_left, n_right, kind)
    if n_left > BRUTE_FORCE_MAX_LEFT or perm(n_right, n_left) > BRUTE_FORCE_MAX_CANDIDATES:
        raise CapacityError(
            f"brute force limited to |left| <= {BRUTE_FORCE_MAX_LEFT} and "
            f"{BRUTE_FORCE_MAX_CANDIDATES} candidates"
        )
    cost = oracle.values("python")
    exact = oracle.exact
    if exact:
        rows = [[int(x) for x in cost[i]] for i in range(n_left)]
    else:
        rows = [list(cost[i]) for i in range(n_left)]
        scale = max(np.longdouble(1), np.max(np.abs(cost)))
        slack = np.longdouble(METRIC_TIE_RTOL) * scale
    best = None
    best_map = None
    for cand in itertools.permutations(range(n_right), n_left):
        total = rows[0][cand[0]]
        for i in range(1, n_left):
            total = total + rows[i][cand[i]]
        if best is None or (total < best if exact else total < best - slack):
            best, best_map = total, cand
    pairs = tuple(enumerate(best_map))
    return Matching(pairs, best, kind, n_left, n_right)

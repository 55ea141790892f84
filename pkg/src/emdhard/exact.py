"""Closest pair -> EMD and closest pair -> low-rank assignment.

Construction, for input sets A, B of n integer vectors:

* every vector is parity-lifted, ``z -> (2z, 1)``, so squared norms are odd;
  the lifted dimension is ``d`` and the lifted coordinate bound is
  ``B = 2 * ceil(n**k)``;
* ``R = B*B*d`` is the common distance from every ``a'`` to ``u`` (and from
  every ``b'`` to ``v``), so ``adj_norm_sq = R**2``;
* ``adj_a = (adj0, s_1, ..., s_c)`` with ``adj0 = (|a|^2 + 1) / 2`` and the
  ``s_i`` a square decomposition of ``R**2 - adj0**2``, zero padded;
* ``u = 0^d (1 0^c) 0^(c+1) 0^d``, ``v = N^d 0^(c+1) (1 0^c) 0^d``,
  ``a' = 0^d adj_a 0^(c+1) a``, ``b' = N^d 0^(c+1) adj_b b``;
* the left side is the n vectors ``a'`` followed by n-1 copies of ``v``; the
  right side is the n vectors ``b'`` followed by n-1 copies of ``u``.

Then ``EMD = 2(n-1)R + min sqrt(N^2 d + 2R^2 + |a-b|^2)`` and
``SQEMD = 2(n-1)R^2 + N^2 d + 2R^2 + min |a-b|^2``, distances taken between
lifted vectors (twice the raw distance).

``N`` is ``ceil(n**(16k))`` in mode ``"paper"`` (the asymptotic constant).
Mode ``"desk"`` uses the smallest power of two with
``N^2 d > 4 (2n)^2 (R^2 + max lifted cross distance^2)``, which keeps the EMD
radicands inside the long double mantissa for small n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import InconsistencyError, InstanceShapeError, InvariantViolation, ParameterError
from .numeric import RationalLike, as_fraction, ceil_pow
from .squares import decompose_squares, parts_bound
from .vectors import IntVector, PointSetPair, parity_lift, sq_dist

Mode = Literal["paper", "desk"]

LIFT_SCALE = 2
RECOVERY_RTOL = 1e-12


@dataclass(frozen=True)
class ReducedExactInstance:
    pair: PointSetPair
    n: int
    d: int
    k: Fraction
    c: int
    N: int
    u: IntVector
    v: IntVector
    adj_norm_sq: int
    radius: int
    coord_bound: int
    mode: str

    @property
    def dim(self) -> int:
        return self.pair.dim

    @property
    def padding_cost(self) -> int:
        """``2(n-1)R``: total EMD cost of the 2(n-1) padding edges."""
        return 2 * (self.n - 1) * self.radius

    @property
    def cross_offset(self) -> int:
        """``N^2 d + 2R^2``: squared length of an original-original edge minus |a-b|^2."""
        return self.N * self.N * self.d + 2 * self.adj_norm_sq

    def expected_emd(self, lifted_sq: int) -> np.longdouble:
        return np.longdouble(self.padding_cost) + np.sqrt(
            np.longdouble(str(self.cross_offset + lifted_sq))
        )

    def expected_sqemd(self, lifted_sq: int) -> int:
        return 2 * (self.n - 1) * self.adj_norm_sq + self.cross_offset + lifted_sq

    def sidecar(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "k": str(self.k),
            "c": self.c,
            "N": self.N,
            "adj_norm_sq": self.adj_norm_sq,
            "radius": self.radius,
            "coord_bound": self.coord_bound,
            "mode": self.mode,
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), sort_keys=True)

    @classmethod
    def from_sidecar(cls, pair: PointSetPair, meta: dict) -> "ReducedExactInstance":
        d, c, N = int(meta["d"]), int(meta["c"]), int(meta["N"])
        u, v = _padding_vectors(d, c, N)
        return cls(
            pair=pair,
            n=int(meta["n"]),
            d=d,
            k=as_fraction(meta["k"]),
            c=c,
            N=N,
            u=u,
            v=v,
            adj_norm_sq=int(meta["adj_norm_sq"]),
            radius=int(meta["radius"]),
            coord_bound=int(meta["coord_bound"]),
            mode=meta.get("mode", "desk"),
        )


@dataclass(frozen=True)
class LowRankFactorization:
    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]
    r: int

    def matrix(self) -> np.ndarray:
        """``U @ V.T`` in exact integer arithmetic (object dtype)."""
        U = np.array(self.U, dtype=object)
        V = np.array(self.V, dtype=object)
        return U.dot(V.T)


def _padding_vectors(d: int, c: int, N: int) -> tuple[IntVector, IntVector]:
    e = (1,) + (0,) * c
    z = (0,) * (c + 1)
    u = IntVector((0,) * d + e + z + (0,) * d)
    v = IntVector((N,) * d + z + e + (0,) * d)
    return u, v


def desk_N(n: int, d: int, adj_norm_sq: int, max_cross_sq: int) -> int:
    need = 4 * (2 * n) ** 2 * (adj_norm_sq + max_cross_sq)
    N = 1
    while N * N * d <= need:
        N *= 2
    return N


def _adj_vector(norm_sq: int, target: int, c: int, rho: Fraction) -> tuple[int, ...]:
    if norm_sq % 2 != 1:
        raise InvariantViolation("lifted vectors must have odd squared norm")
    adj0 = (norm_sq + 1) // 2
    residual = target - adj0 * adj0
    if residual < 0:
        raise InvariantViolation("adj residual is negative")
    parts = decompose_squares(residual, rho).parts
    if len(parts) > c:
        raise InvariantViolation(f"square decomposition used {len(parts)} > c = {c} parts")
    return (adj0,) + parts + (0,) * (c - len(parts))


def build_exact_reduction(
    pair: PointSetPair,
    k: RationalLike = 1,
    mode: Mode = "desk",
    N: int | None = None,
) -> ReducedExactInstance:
    """Embed a closest-pair instance into an EMD instance of size 2n-1.

    Raw coordinates must lie in ``[0, ceil(n**k)]``.
    """
    k = as_fraction(k)
    if k <= 0:
        raise ParameterError("k must be positive")
    if mode not in ("paper", "desk"):
        raise ParameterError(f"unknown mode {mode!r}")
    n = pair.n_left
    if n != pair.n_right:
        raise InstanceShapeError("closest-pair reduction needs |A| = |B|")
    if n < 2:
        raise InstanceShapeError("closest-pair reduction needs n >= 2")
    bound = ceil_pow(n, k)
    for vec in pair.left + pair.right:
        if any(x < 0 or x > bound for x in vec.coords):
            raise InstanceShapeError(f"coordinates must lie in [0, {bound}] = [0, ceil(n^k)]")

    A = [parity_lift(a) for a in pair.left]
    B = [parity_lift(b) for b in pair.right]
    d = pair.dim + 1
    lifted_bound = LIFT_SCALE * bound
    radius = lifted_bound * lifted_bound * d
    target = radius * radius
    rho = Fraction(1, 16) / k
    c = parts_bound(rho)

    if N is None:
        if mode == "paper":
            N = ceil_pow(n, 16 * k)
        else:
            max_cross = max(sq_dist(a, b) for a in A for b in B)
            N = desk_N(n, d, target, max_cross)
    if not target * n * n < N * N * d:
        raise ParameterError(
            f"N = {N} too small: need (adj norm)^2 * n^2 < N^2 d for the matching gap"
        )

    u, v = _padding_vectors(d, c, N)
    zeros_c1 = (0,) * (c + 1)
    left = []
    for a in A:
        adj = _adj_vector(a.norm_sq(), target, c, rho)
        left.append(IntVector((0,) * d + adj + zeros_c1 + a.coords))
    right = []
    for b in B:
        adj = _adj_vector(b.norm_sq(), target, c, rho)
        right.append(IntVector((N,) * d + zeros_c1 + adj + b.coords))
    left += [v] * (n - 1)
    right += [u] * (n - 1)
    out = PointSetPair(tuple(left), tuple(right), 2 * d + 2 * c + 2, "integer")
    return ReducedExactInstance(
        pair=out,
        n=n,
        d=d,
        k=k,
        c=c,
        N=N,
        u=u,
        v=v,
        adj_norm_sq=target,
        radius=radius,
        coord_bound=bound,
        mode=mode,
    )


def recover_closest_pair(emd_value, inst: ReducedExactInstance, snap: bool = False) -> np.longdouble:
    """Closest-pair distance between lifted inputs, from an EMD value.

    Divide by ``LIFT_SCALE`` for the raw distance.  With ``snap=True`` the
    recovered squared distance is rounded to the nearest integer first; it
    is an integer by construction, and rounding removes the cancellation
    error that otherwise dominates when the true distance is 0.
    """
    x = np.longdouble(emd_value) - np.longdouble(inst.padding_cost)
    offset = np.longdouble(str(inst.cross_offset))
    tol = np.longdouble(RECOVERY_RTOL) * offset
    if x < 0:
        raise InconsistencyError(f"EMD value {emd_value} is below the padding cost {inst.padding_cost}")
    rad = x * x - offset
    if rad < -tol:
        raise InconsistencyError(f"negative radicand {rad}: EMD value inconsistent with the instance")
    if snap:
        rad = np.rint(rad)
    return np.sqrt(rad) if rad > 0 else np.longdouble(0)


def recover_closest_pair_sq(assign_cost: int, inst: ReducedExactInstance) -> int:
    """Exact squared closest-pair distance (lifted) from an SQEMD value."""
    out = int(assign_cost) - 2 * (inst.n - 1) * inst.adj_norm_sq - inst.cross_offset
    if out < 0:
        raise InconsistencyError(f"assignment cost {assign_cost} is below the padding floor")
    return out


def original_edges(matching, inst: ReducedExactInstance) -> list[tuple[int, int]]:
    """Pairs of a matching on the reduced instance joining two original points."""
    return [(i, j) for i, j in matching.pairs if i < inst.n and j < inst.n]


def build_lowrank_assignment(
    pair: PointSetPair, k: RationalLike = 1, mode: Mode = "desk", N: int | None = None
) -> tuple[LowRankFactorization, ReducedExactInstance]:
    """Factor the squared-distance matrix of the reduced instance.

    ``M[i][j] = -2 sum_t A'[i,t] B'[j,t] + |A'_i|^2 + |B'_j|^2``: one rank-1
    term per coordinate, one for the row norms and one for the column norms,
    ``r = 2d + 2c + 4`` in total.
    """
    inst = build_exact_reduction(pair, k, mode, N)
    U = tuple(tuple(-2 * x for x in a.coords) + (a.norm_sq(), 1) for a in inst.pair.left)
    V = tuple(tuple(b.coords) + (1, b.norm_sq()) for b in inst.pair.right)
    r = inst.pair.dim + 2
    return LowRankFactorization(U, V, r), inst

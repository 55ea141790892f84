"""Binary embeddings linking orthogonality to (asymmetric) EMD.

* ``negate_product`` turns inner products into ``d - a.b``.
* ``symmetrize`` reduces asymmetric EMD to EMD: both sides are mapped to
  ``(x, 1 - x)`` (every image has squared norm d) and the left side is padded
  with zero vectors, each at distance exactly ``sqrt(d)`` from every right
  vector.
* ``build_mom_gadget`` reduces maximum orthogonal matching to asymmetric
  EMD in dimension ``12d + 1``: orthogonal pairs sit at squared distance
  ``4d + 2``, other pairs at ``4d + 2 + 2 a.b``, and |A| copies of ``v``
  sit at exactly ``4d + 4`` from every left vector.

MOM gadget layout (coordinate ranges, half open)::

    product    [0, 3d)        phi_1(a) on the left, phi_2(b) on the right
    a-padding  [3d, 6d)       |a| + 2 leading ones on the left
    b-padding  [6d, 9d)       |b| + d leading ones on the right
    v-region   [9d, 12d + 1)  all ones in v
      a-indicator [9d, 10d - 1)   ones on the left, so that a''.v = d - 1
      b-indicator [12d, 12d + 1)  one on the right

All gadget vectors then have squared norm ``3d + 1``, left and right
vectors only overlap in the product region, and ``|a'' - v|^2 = 4d + 4``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import InconsistencyError, InstanceShapeError, InvariantViolation, ParameterError
from .matching import CostOracle, Matching, asymmetric_emd, emd, sqrt_ld
from .numeric import RationalLike, as_fraction, ceil_pow
from .vectors import BinaryVector, PointSetPair, dot, sq_dist

SYMMETRIZE_RTOL = 1e-9

# MOM solver protocol: pair -> one right id (or None) per left vector.
MomSolver = Callable[[PointSetPair], Sequence["int | None"]]


def _require_binary(pair: PointSetPair) -> None:
    if pair.kind != "binary":
        raise InstanceShapeError("this gadget needs a binary instance")


def negate_product(a: BinaryVector, side: Literal["left", "right"]) -> BinaryVector:
    """Expand each bit into three so that ``left(a) . right(b) = d - a.b``."""
    out = []
    if side == "left":
        for x in a.coords:
            out += (x, 1 - x, 1 - x)
    elif side == "right":
        for x in a.coords:
            out += (1 - x, x, 1 - x)
    else:
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}")
    return BinaryVector(tuple(out))


@dataclass(frozen=True)
class SymmetrizedInstance:
    pair: PointSetPair
    zero_pad_count: int
    parent_map: tuple[int | None, ...]  # left id -> source left id (None = zero pad)
    source: PointSetPair

    def sidecar(self) -> dict:
        return {
            "zero_pad_count": self.zero_pad_count,
            "parent_map": list(self.parent_map),
            "source": self.source.to_json_obj(),
        }

    @classmethod
    def from_sidecar(cls, pair: PointSetPair, meta: dict) -> "SymmetrizedInstance":
        return cls(
            pair,
            int(meta["zero_pad_count"]),
            tuple(meta["parent_map"]),
            PointSetPair.from_json_obj(meta["source"]),
        )


def _double(x: BinaryVector) -> BinaryVector:
    return BinaryVector(x.coords + tuple(1 - t for t in x.coords))


def symmetrize(pair: PointSetPair) -> SymmetrizedInstance:
    _require_binary(pair)
    if pair.n_left > pair.n_right:
        raise InstanceShapeError("symmetrize needs |A| <= |B|")
    pad = pair.n_right - pair.n_left
    zero = BinaryVector((0,) * (2 * pair.dim))
    cache: dict[BinaryVector, BinaryVector] = {}

    def image(x):
        if x not in cache:
            cache[x] = _double(x)
        return cache[x]

    left = [image(a) for a in pair.left] + [zero] * pad
    right = [image(b) for b in pair.right]
    out = PointSetPair(tuple(left), tuple(right), 2 * pair.dim, "binary")
    parents = tuple(range(pair.n_left)) + (None,) * pad
    return SymmetrizedInstance(out, pad, parents, pair)


@dataclass(frozen=True)
class SymmetrizeReport:
    total: np.longdouble
    projected_cost: np.longdouble
    expected_total: np.longdouble
    rel_error: float

    @property
    def ok(self) -> bool:
        return self.rel_error <= SYMMETRIZE_RTOL

    def to_json_obj(self) -> dict:
        return {
            "total": str(self.total),
            "projected_cost": str(self.projected_cost),
            "expected_total": str(self.expected_total),
            "rel_error": self.rel_error,
            "ok": self.ok,
        }


def decode_symmetrized(m: Matching, inst: SymmetrizedInstance) -> tuple[SymmetrizeReport, Matching]:
    """Strip zero pads and check the cost identity of the embedding."""
    if len(m.pairs) != inst.pair.n_left:
        raise InstanceShapeError("decode_symmetrized needs a bijection on the symmetrized instance")
    total = CostOracle.euclidean(inst.pair).total(m.pairs)
    projected = [(inst.parent_map[i], j) for i, j in m.pairs if inst.parent_map[i] is not None]
    src = CostOracle.euclidean(inst.source)
    proj_cost = src.total(projected)
    d = inst.source.dim
    expected = inst.zero_pad_count * sqrt_ld(d) + sqrt_ld(2) * proj_cost
    scale = max(abs(expected), np.longdouble(1))
    rel = float(abs(total - expected) / scale)
    report = SymmetrizeReport(total, proj_cost, expected, rel)
    if not report.ok:
        raise InconsistencyError(f"symmetrized cost identity violated (relative error {rel:.3g})")
    out = Matching(tuple(projected), proj_cost, "injection", inst.source.n_left, inst.source.n_right)
    return report, out


@dataclass(frozen=True)
class MomGadget:
    pair: PointSetPair
    d: int
    a_count: int
    v: BinaryVector
    layout: dict[str, tuple[int, int]]
    parent_map: tuple[int | None, ...]  # right id -> source right id (None = v copy)

    @property
    def dim(self) -> int:
        return 12 * self.d + 1

    @property
    def orthogonal_sq(self) -> int:
        return 4 * self.d + 2

    @property
    def v_sq(self) -> int:
        return 4 * self.d + 4

    @property
    def v_ids(self) -> range:
        b = len(self.parent_map) - self.a_count
        return range(b, b + self.a_count)

    def sidecar(self) -> dict:
        return {
            "d": self.d,
            "a_count": self.a_count,
            "layout": {k: list(v) for k, v in self.layout.items()},
            "parent_map": list(self.parent_map),
        }

    @classmethod
    def from_sidecar(cls, pair: PointSetPair, meta: dict) -> "MomGadget":
        d = int(meta["d"])
        return cls(
            pair,
            d,
            int(meta["a_count"]),
            _v_vector(d),
            {k: tuple(v) for k, v in meta["layout"].items()},
            tuple(meta["parent_map"]),
        )


def mom_layout(d: int) -> dict[str, tuple[int, int]]:
    return {
        "product": (0, 3 * d),
        "a-padding": (3 * d, 6 * d),
        "b-padding": (6 * d, 9 * d),
        "v-region": (9 * d, 12 * d + 1),
        "a-indicator": (9 * d, 10 * d - 1),
        "b-indicator": (12 * d, 12 * d + 1),
    }


def _v_vector(d: int) -> BinaryVector:
    return BinaryVector((0,) * (9 * d) + (1,) * (3 * d + 1))


def _gadget_left(a: BinaryVector, d: int) -> BinaryVector:
    w = a.popcount()
    pad = (1,) * (w + 2) + (0,) * (3 * d - w - 2)
    ind = (1,) * (d - 1) + (0,) * (2 * d + 2)
    return BinaryVector(negate_product(a, "left").coords + pad + (0,) * (3 * d) + ind)


def _gadget_right(b: BinaryVector, d: int) -> BinaryVector:
    w = b.popcount()
    pad = (1,) * (w + d) + (0,) * (2 * d - w)
    ind = (0,) * (3 * d) + (1,)
    return BinaryVector(negate_product(b, "right").coords + (0,) * (3 * d) + pad + ind)


def build_mom_gadget(pair: PointSetPair) -> MomGadget:
    _require_binary(pair)
    if pair.n_left > pair.n_right:
        raise InstanceShapeError("MOM gadget needs |A| <= |B|")
    d = pair.dim
    v = _v_vector(d)
    lc: dict[BinaryVector, BinaryVector] = {}
    rc: dict[BinaryVector, BinaryVector] = {}
    for a in pair.left:
        if a not in lc:
            lc[a] = _gadget_left(a, d)
    for b in pair.right:
        if b not in rc:
            rc[b] = _gadget_right(b, d)
    left = tuple(lc[a] for a in pair.left)
    right = tuple(rc[b] for b in pair.right) + (v,) * pair.n_left
    out = PointSetPair(left, right, 12 * d + 1, "binary")
    parents = tuple(range(pair.n_right)) + (None,) * pair.n_left
    return MomGadget(out, d, pair.n_left, v, mom_layout(d), parents)


@dataclass(frozen=True)
class MomDecoding:
    pi: tuple[int | None, ...]  # source left id -> source right id, None = matched to v
    orthogonal_count: int
    matching: Matching  # the repaired injection on the gadget

    def orthogonal_pairs(self, pair: PointSetPair) -> list[tuple[int, int]]:
        return [(i, j) for i, j in enumerate(self.pi) if j is not None and dot(pair.left[i], pair.right[j]) == 0]


def decode_mom(gadget: MomGadget, m: Matching, source: PointSetPair | None = None) -> MomDecoding:
    """Repair a gadget matching and count its orthogonal pairs.

    Every pair farther than ``4d + 4`` is moved to an unused copy of ``v``;
    pairs at exactly ``4d + 2`` are the orthogonal ones.
    """
    pairs = dict(m.pairs)
    if sorted(pairs) != list(range(gadget.a_count)):
        raise InstanceShapeError("decode_mom needs an injection covering the gadget's left side")
    used = set(pairs.values())
    free_v = [j for j in gadget.v_ids if j not in used]
    free_v.reverse()
    left, right = gadget.pair.left, gadget.pair.right
    count = 0
    for i in range(gadget.a_count):
        j = pairs[i]
        s = sq_dist(left[i], right[j])
        if s > gadget.v_sq:
            if not free_v:
                raise InvariantViolation("no free copy of v to repair the matching")
            pairs[i] = free_v.pop()
        elif s == gadget.orthogonal_sq:
            count += 1
            if source is not None and dot(source.left[i], source.right[gadget.parent_map[j]]) != 0:
                raise InvariantViolation("pair at the orthogonal distance is not orthogonal")
    pi = tuple(gadget.parent_map[pairs[i]] for i in range(gadget.a_count))
    fixed = Matching(tuple(pairs.items()), count, "injection", gadget.a_count, len(right))
    return MomDecoding(pi, count, fixed)


def mom_via_emd(
    pair: PointSetPair,
    route: Literal["symmetrized", "asymmetric"] = "symmetrized",
    canonical: bool = False,
    backend: str | None = None,
) -> MomDecoding:
    """Maximum orthogonal matching through the gadget and an exact EMD solve."""
    gadget = build_mom_gadget(pair)
    if route == "asymmetric":
        _, m = asymmetric_emd(gadget.pair, canonical, backend)
    elif route == "symmetrized":
        sym = symmetrize(gadget.pair)
        _, full = emd(sym.pair, canonical, backend)
        _, m = decode_symmetrized(full, sym)
    else:
        raise ParameterError(f"unknown route {route!r}")
    return decode_mom(gadget, m, pair)


def emd_mom_solver(route: str = "symmetrized", canonical: bool = False, backend: str | None = None) -> MomSolver:
    def solve(pair: PointSetPair):
        return mom_via_emd(pair, route, canonical, backend).pi

    return solve


def duplicate(vectors: Sequence, copies: int) -> tuple[list, list[int]]:
    """Each vector repeated ``copies`` times in a row; returns (items, parent ids)."""
    items, parents = [], []
    for i, x in enumerate(vectors):
        items += [x] * copies
        parents += [i] * copies
    return items, parents


def mom_copy_count(n: int, delta: RationalLike) -> int:
    delta = as_fraction(delta)
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    return ceil_pow(n, delta / (1 - delta), 2)


def mom_to_ov(pair: PointSetPair, delta: RationalLike, mom_solver: MomSolver):
    """Decide OV with a MOM solver by duplicating both sides.

    Returns an orthogonal ``(left id, right id)`` or None.
    """
    _require_binary(pair)
    if pair.n_left != pair.n_right:
        raise InstanceShapeError("mom_to_ov needs |A| = |B|")
    copies = mom_copy_count(pair.n_left, delta)
    left, lp = duplicate(pair.left, copies)
    right, rp = duplicate(pair.right, copies)
    dup = pair.with_sides(left, right)
    pi = mom_solver(dup)
    for i, j in enumerate(pi):
        if j is not None and dot(left[i], right[j]) == 0:
            return lp[i], rp[j]
    return None

"""Integer and binary vectors, point-set pairs and their JSON form.

Coordinates are Python integers whose absolute value must stay below
``2**127`` (``COORD_BITS``).  Any squared distance between two such vectors
in fewer than ``2**127`` dimensions then fits in 255 bits, and all squared
quantities are computed exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import ArithmeticCapacityError, InstanceShapeError

COORD_BITS = 127
COORD_LIMIT = 1 << COORD_BITS

Kind = Literal["binary", "integer"]


def _check_width(coords: Sequence[int]) -> None:
    for x in coords:
        if not -COORD_LIMIT < x < COORD_LIMIT:
            raise ArithmeticCapacityError(
                f"coordinate {x} needs more than {COORD_BITS} bits"
            )


@dataclass(frozen=True, slots=True)
class IntVector:
    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(x) for x in self.coords)
        if not coords:
            raise InstanceShapeError("vectors must have positive dimension")
        _check_width(coords)
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def norm_sq(self) -> int:
        return sum(x * x for x in self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


@dataclass(frozen=True, slots=True)
class BinaryVector(IntVector):
    """A 0/1 vector; ``mask`` packs it into an int (bit i = coordinate i)."""

    mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        IntVector.__post_init__(self)
        if any(x not in (0, 1) for x in self.coords):
            raise InstanceShapeError("binary vectors hold only 0 and 1")
        m = 0
        for i, x in enumerate(self.coords):
            if x:
                m |= 1 << i
        object.__setattr__(self, "mask", m)

    @property
    def bits(self) -> tuple[int, ...]:
        return self.coords

    @classmethod
    def from_mask(cls, mask: int, dim: int) -> "BinaryVector":
        return cls(tuple((mask >> i) & 1 for i in range(dim)))

    def popcount(self) -> int:
        return self.mask.bit_count()


def as_vector(v) -> IntVector:
    if isinstance(v, IntVector):
        return v
    return IntVector(tuple(v))


def _pair_coords(a, b) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ca = a.coords if isinstance(a, IntVector) else tuple(a)
    cb = b.coords if isinstance(b, IntVector) else tuple(b)
    if len(ca) != len(cb):
        raise InstanceShapeError(f"dimension mismatch: {len(ca)} vs {len(cb)}")
    return ca, cb


def dot(a, b) -> int:
    """Exact inner product."""
    if isinstance(a, BinaryVector) and isinstance(b, BinaryVector):
        if a.dim != b.dim:
            raise InstanceShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
        return (a.mask & b.mask).bit_count()
    ca, cb = _pair_coords(a, b)
    return sum(x * y for x, y in zip(ca, cb))


def sq_dist(a, b) -> int:
    """Exact squared Euclidean distance."""
    if isinstance(a, BinaryVector) and isinstance(b, BinaryVector):
        if a.dim != b.dim:
            raise InstanceShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
        return (a.mask ^ b.mask).bit_count()
    ca, cb = _pair_coords(a, b)
    return sum((x - y) * (x - y) for x, y in zip(ca, cb))


def parity_lift(a) -> IntVector:
    """Map ``z`` to ``(2*z_1, ..., 2*z_d, 1)``; the squared norm becomes odd."""
    coords = as_vector(a).coords
    lifted = tuple(2 * x for x in coords) + (1,)
    return IntVector(lifted)


@dataclass(frozen=True)
class PointSetPair:
    """An ordered pair of multisets; a vector's position is its id."""

    left: tuple[IntVector, ...]
    right: tuple[IntVector, ...]
    dim: int
    kind: Kind = "integer"

    def __post_init__(self):
        if self.kind not in ("binary", "integer"):
            raise InstanceShapeError(f"unknown instance kind {self.kind!r}")
        if self.dim < 1:
            raise InstanceShapeError("dimension must be positive")
        cls = BinaryVector if self.kind == "binary" else IntVector
        left = tuple(_coerce(v, cls) for v in self.left)
        right = tuple(_coerce(v, cls) for v in self.right)
        for v in left + right:
            if v.dim != self.dim:
                raise InstanceShapeError(
                    f"vector of dimension {v.dim} in a {self.dim}-dimensional instance"
                )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def from_lists(cls, left: Iterable, right: Iterable, kind: Kind | None = None):
        left = [tuple(v) for v in left]
        right = [tuple(v) for v in right]
        vecs = left + right
        if not vecs:
            raise InstanceShapeError("cannot infer dimension of an empty instance")
        if kind is None:
            kind = "binary" if all(x in (0, 1) for v in vecs for x in v) else "integer"
        return cls(tuple(left), tuple(right), len(vecs[0]), kind)

    @property
    def n_left(self) -> int:
        return len(self.left)

    @property
    def n_right(self) -> int:
        return len(self.right)

    def with_sides(self, left, right) -> "PointSetPair":
        return PointSetPair(tuple(left), tuple(right), self.dim, self.kind)

    # -- array views used by the kernels -------------------------------------

    def left_array(self) -> np.ndarray:
        return coords_array(self.left, self.dim)

    def right_array(self) -> np.ndarray:
        return coords_array(self.right, self.dim)

    # -- JSON ---------------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "left": [list(v.coords) for v in self.left],
            "right": [list(v.coords) for v in self.right],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PointSetPair":
        try:
            kind, dim = obj["kind"], obj["dim"]
            left, right = obj["left"], obj["right"]
        except (KeyError, TypeError) as exc:
            raise InstanceShapeError(f"malformed instance document: {exc}") from exc
        for v in list(left) + list(right):
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
                raise InstanceShapeError("instance coordinates must be integers")
        return cls(tuple(tuple(v) for v in left), tuple(tuple(v) for v in right), dim, kind)

    @classmethod
    def from_json(cls, text: str) -> "PointSetPair":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceShapeError(f"instance is not valid JSON: {exc}") from exc
        return cls.from_json_obj(obj)


def _coerce(v, cls):
    if type(v) is cls:
        return v
    coords = v.coords if isinstance(v, IntVector) else tuple(v)
    return cls(coords)


INT64_SAFE = 1 << 62


def coords_array(vectors: Sequence[IntVector], dim: int) -> np.ndarray:
    """Stack coordinates as int64 when every entry is small, else as objects."""
    rows = [v.coords for v in vectors]
    big = any(abs(x) >= (1 << 31) for r in rows for x in r)
    if big:
        arr = np.empty((len(rows), dim), dtype=object)
        for i, r in enumerate(rows):
            arr[i, :] = r
        return arr
    return np.array(rows, dtype=np.int64).reshape(len(rows), dim)


def pack_bits(vectors: Sequence[BinaryVector], dim: int) -> np.ndarray:
    """Pack binary vectors into an ``(n, ceil(dim/64))`` uint64 array."""
    words = max(1, -(-dim // 64))
    out = np.zeros((len(vectors), words), dtype=np.uint64)
    full = (1 << 64) - 1
    for i, v in enumerate(vectors):
        m = v.mask
        for w in range(words):
            out[i, w] = (m >> (64 * w)) & full
    return out

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from emdhard.errors import ArithmeticCapacityError, InstanceShapeError
from emdhard.vectors import (
    COORD_BITS,
    BinaryVector,
    IntVector,
    PointSetPair,
    dot,
    pack_bits,
    parity_lift,
    sq_dist,
)

ints = st.integers(-(10**6), 10**6)


def int_pairs(max_dim=8):
    return st.integers(1, max_dim).flatmap(
        lambda d: st.tuples(st.lists(ints, min_size=d, max_size=d), st.lists(ints, min_size=d, max_size=d))
    )


@pytest.mark.parametrize(
    "a, b, want",
    [((1, 0), (0, 1), 0), ((1, 1), (1, 1), 2), ((1, 0, 1), (1, 1, 1), 2)],
)
def test_dot_examples(a, b, want):
    assert dot(a, b) == want
    assert dot(BinaryVector(a), BinaryVector(b)) == want


@pytest.mark.parametrize(
    "a, b, want",
    [((0, 0), (3, 4), 25), ((5, -2), (5, -2), 0), ((1, 2, 3), (4, 6, 3), 25)],
)
def test_sq_dist_examples(a, b, want):
    assert sq_dist(IntVector(a), IntVector(b)) == want


@pytest.mark.parametrize(
    "a, lifted, norm",
    [((1, 1), (2, 2, 1), 9), ((0,), (0, 1), 1), ((3, 4), (6, 8, 1), 101)],
)
def test_parity_lift_examples(a, lifted, norm):
    out = parity_lift(IntVector(a))
    assert out.coords == lifted
    assert out.norm_sq() == norm
    assert norm % 2 == 1


def test_dimension_mismatch():
    with pytest.raises(InstanceShapeError):
        dot((1, 0), (1, 0, 1))
    with pytest.raises(InstanceShapeError):
        sq_dist(BinaryVector((1, 0)), BinaryVector((1, 0, 1)))


def test_width_limit():
    IntVector((2**COORD_BITS - 1,))
    with pytest.raises(ArithmeticCapacityError):
        IntVector((2**COORD_BITS,))
    with pytest.raises(ArithmeticCapacityError):
        parity_lift(IntVector((2**COORD_BITS - 1,)))


def test_binary_rejects_other_values():
    with pytest.raises(InstanceShapeError):
        BinaryVector((0, 2))


@given(int_pairs())
def test_polarization_identity(ab):
    a, b = IntVector(ab[0]), IntVector(ab[1])
    assert sq_dist(a, b) == a.norm_sq() + b.norm_sq() - 2 * dot(a, b)
    assert sq_dist(a, b) == sq_dist(b, a)
    assert dot(a, b) == dot(b, a)


@given(int_pairs())
def test_lift_scales_distances_by_four(ab):
    a, b = IntVector(ab[0]), IntVector(ab[1])
    assert sq_dist(parity_lift(a), parity_lift(b)) == 4 * sq_dist(a, b)
    assert parity_lift(a).norm_sq() == 4 * a.norm_sq() + 1


@given(st.integers(1, 200).flatmap(lambda d: st.tuples(*[st.lists(st.integers(0, 1), min_size=d, max_size=d)] * 2)))
def test_binary_fast_paths_match_generic(ab):
    a, b = ab
    assert dot(BinaryVector(a), BinaryVector(b)) == sum(x * y for x, y in zip(a, b))
    assert sq_dist(BinaryVector(a), BinaryVector(b)) == sum((x - y) ** 2 for x, y in zip(a, b))


def test_pack_bits_roundtrip():
    v = BinaryVector(tuple((i * 7) % 3 == 0 for i in range(130)))
    words = pack_bits([v], 130)
    assert words.shape == (1, 3)
    mask = sum(int(w) << (64 * k) for k, w in enumerate(words[0]))
    assert BinaryVector.from_mask(mask, 130) == v


def test_json_roundtrip_is_bit_exact():
    pair = PointSetPair.from_lists([[1, -2], [2**100, 0]], [[0, 0]])
    text = pair.to_json()
    again = PointSetPair.from_json(text)
    assert again == pair
    assert again.to_json() == text
    assert json.loads(text)["kind"] == "integer"


def test_json_rejects_bad_documents():
    with pytest.raises(InstanceShapeError):
        PointSetPair.from_json("{")
    with pytest.raises(InstanceShapeError):
        PointSetPair.from_json('{"kind": "integer", "dim": 2, "left": [[1.5, 0]], "right": []}')
    with pytest.raises(InstanceShapeError):
        PointSetPair.from_json('{"kind": "binary", "dim": 2, "left": [[1, 0, 1]], "right": []}')


def test_kind_inference_and_coercion():
    pair = PointSetPair.from_lists([[1, 0]], [[0, 1]])
    assert pair.kind == "binary"
    assert isinstance(pair.left[0], BinaryVector)

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emdhard.errors import CapacityError, InstanceShapeError
from emdhard.matching import (
    CostOracle,
    Matching,
    asymmetric_emd,
    brute_force_min_matching,
    emd,
    max_cardinality_matching,
    min_cost_matching,
    sqemd,
)
from emdhard.vectors import PointSetPair


def P(left, right):
    return PointSetPair.from_lists(left, right, "integer")


def enumerate_min(costs, n_right):
    """Independent oracle: every injection, lexicographic order, first optimum."""
    best, arg = None, None
    for p in itertools.permutations(range(n_right), len(costs)):
        t = sum(costs[i][p[i]] for i in range(len(costs)))
        if best is None or t < best:
            best, arg = t, p
    return best, arg


def test_matrix_example(backend):
    m = min_cost_matching(CostOracle.matrix([[1, 3], [2, 6]]), backend=backend)
    assert m.cost == 5
    assert m.pairs == ((0, 1), (1, 0))
    assert brute_force_min_matching(CostOracle.matrix([[1, 3], [2, 6]])).cost == 5


def test_emd_examples(backend):
    assert emd(P([[0, 0]], [[3, 4]]), backend=backend)[0] == 5
    assert emd(P([[1, 2], [3, 4]], [[3, 4], [1, 2]]), backend=backend)[0] == 0
    cost, m = emd(P([[0, 0], [10, 0]], [[1, 0], [9, 0]]), backend=backend)
    assert cost == 2
    assert m.pairs == ((0, 0), (1, 1))


def test_asymmetric_examples(backend):
    cost, m = asymmetric_emd(P([[0, 0]], [[3, 4], [0, 1]]), backend=backend)
    assert cost == 1 and m.pairs == ((0, 1),) and m.kind == "injection"
    cost, m = asymmetric_emd(P([[0, 0]], [[5, 0], [0, 5], [3, 4]]), backend=backend)
    assert cost == 5
    assert m.pairs == ((0, 0),)  # lexicographic tie-break
    assert asymmetric_emd(P([[1, 1]], [[1, 1]]), backend=backend)[0] == 0


def test_sqemd_examples(backend):
    assert sqemd(P([[0, 0]], [[3, 4]]), backend=backend)[0] == 25
    assert sqemd(P([[2, 2]], [[2, 2]]), backend=backend)[0] == 0
    cost, _ = sqemd(P([[0], [4]], [[1], [2]]), backend=backend)
    assert cost == 5 and isinstance(cost, int)


def test_shape_errors():
    with pytest.raises(InstanceShapeError):
        emd(P([[0]], [[1], [2]]))
    with pytest.raises(InstanceShapeError):
        asymmetric_emd(P([[0], [1]], [[1]]))
    with pytest.raises(InstanceShapeError):
        min_cost_matching(CostOracle.matrix(np.zeros((0, 0), dtype=np.int64)))


def test_max_cardinality_examples(backend):
    assert len(max_cardinality_matching([[0, 1], [0, 1]], backend=backend)) == 2
    assert len(max_cardinality_matching([[], []], 2, 2, backend=backend)) == 0
    assert len(max_cardinality_matching([[0, 1, 2], [], []], 3, 3, backend=backend)) == 1


def test_brute_force_cap():
    with pytest.raises(CapacityError):
        brute_force_min_matching(CostOracle.matrix(np.zeros((10, 10), dtype=np.int64)))
    one = brute_force_min_matching(CostOracle.matrix([[7]]))
    assert one.pairs == ((0, 0),) and one.cost == 7


@pytest.mark.parametrize("seed", range(60))
def test_oracle_equivalence(backend, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    A = rng.integers(0, 21, size=(n, 3)).tolist()
    B = rng.integers(0, 21, size=(n, 3)).tolist()
    pair = P(A, B)
    sq = [[sum((x - y) ** 2 for x, y in zip(a, b)) for b in B] for a in A]
    want, arg = enumerate_min(sq, n)
    cost, m = sqemd(pair, backend=backend)
    assert cost == want and m.pairs == tuple(enumerate(arg))
    eu = [[math.sqrt(x) for x in row] for row in sq]
    ecost, em = emd(pair, backend=backend)
    want_e, _ = enumerate_min(eu, n)
    assert abs(float(ecost) - want_e) <= 1e-9 * max(1.0, want_e)


@pytest.mark.parametrize("seed", range(30))
def test_injection_oracle(backend, seed):
    rng = np.random.default_rng(500 + seed)
    na = int(rng.integers(1, 5))
    nb = int(rng.integers(na, 7))
    M = rng.integers(0, 4, size=(na, nb))
    want, arg = enumerate_min(M.tolist(), nb)
    m = min_cost_matching(CostOracle.matrix(M), "injection", backend=backend)
    assert m.cost == want and m.pairs == tuple(enumerate(arg))


@pytest.mark.parametrize("seed", range(20))
def test_certificate_consistency(backend, seed):
    rng = np.random.default_rng(900 + seed)
    n = int(rng.integers(1, 9))
    pair = P(rng.integers(-5, 6, size=(n, 2)).tolist(), rng.integers(-5, 6, size=(n, 2)).tolist())
    cost, m = emd(pair, backend=backend)
    again = CostOracle.euclidean(pair).total(m.pairs)
    assert abs(cost - again) <= 1e-12 * max(1, abs(cost))
    scost, sm = sqemd(pair, backend=backend)
    assert scost == CostOracle.squared(pair).total(sm.pairs)


def test_factorized_oracle():
    U = [[1, 2], [0, 1]]
    V = [[3, 0], [1, 1], [0, 5]]
    o = CostOracle.factorized(U, V)
    assert o.shape == (2, 3)
    assert o.cost(0, 2) == 10
    m = min_cost_matching(o, "injection")
    assert m.cost == brute_force_min_matching(o, "injection").cost == 3


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(0, 9), min_size=2, max_size=2), min_size=n, max_size=n),
    st.lists(st.lists(st.integers(0, 9), min_size=2, max_size=2), min_size=n, max_size=n + 3),
    st.lists(st.integers(0, 9), min_size=2, max_size=2),
)))
def test_adding_right_point_never_increases_cost(data):
    A, B, extra = data
    before, _ = asymmetric_emd(P(A, B))
    after, _ = asymmetric_emd(P(A, B + [extra]))
    assert after <= before + 1e-12 * max(1, before)


def test_determinism():
    rng = np.random.default_rng(11)
    pair = P(rng.integers(0, 3, size=(12, 2)).tolist(), rng.integers(0, 3, size=(12, 2)).tolist())
    assert emd(pair) == emd(pair)
    assert sqemd(pair) == sqemd(pair)


def test_matching_json_roundtrip():
    m = Matching(((1, 0), (0, 2)), 10**40, "injection", 2, 3)
    obj = m.to_json_obj()
    assert obj["cost"] == str(10**40) and obj["pairs"] == [[0, 2], [1, 0]]
    back = Matching.from_json_obj(obj)
    assert back.pairs == m.pairs and back.cost == m.cost
    _, e = emd(P([[0, 0]], [[1, 1]]))
    assert Matching.from_json_obj(e.to_json_obj()).cost == e.cost


def test_matching_rejects_reuse():
    with pytest.raises(AssertionError):
        Matching(((0, 1), (1, 1)), 0, "injection")


def test_big_integer_costs_stay_exact():
    big = 10**25
    pair = P([[0], [big]], [[big + 1], [1]])
    cost, m = sqemd(pair)
    assert cost == 2 and m.pairs == ((0, 1), (1, 0))

from fractions import Fraction

import numpy as np
import pytest

from emdhard.errors import InstanceShapeError, InvariantViolation, ParameterError, PromiseViolation
from emdhard.gadgets import emd_mom_solver
from emdhard.matching import max_cardinality_matching
from emdhard.ov import (
    FindOvConfig,
    FindOvResult,
    SamplingSizes,
    find_ov_oracle,
    find_ov_prefilter,
    find_ov_promise,
    find_ov_sampling,
    hitting_set_phased,
    hs_oracle,
    hs_via_promise_findov,
    mom_oracle,
    ortho_graph,
    ov_oracle,
    ov_via_promise_findov,
    promise_copy_count,
)
from emdhard.harness.generators import GeneratorSpec, generate
from emdhard.numeric import ceil_log2, ceil_pow
from emdhard.vectors import PointSetPair, dot

HALF = Fraction(1, 2)


def binpair(left, right):
    return PointSetPair.from_lists(left, right, "binary")


def rand_binary(seed, na, nb, d, p=0.5):
    rng = np.random.default_rng(seed)
    return binpair((rng.random((na, d)) < p).astype(int).tolist(), (rng.random((nb, d)) < p).astype(int).tolist())


def scan_found(pair):
    """Row-by-row definition of S, independent of the packed kernels."""
    return {i for i, a in enumerate(pair.left) if any(dot(a, b) == 0 for b in pair.right)}


# ------------------------------------------------------------------ oracles

def test_ov_oracle_examples():
    assert ov_oracle(binpair([[1, 0]], [[0, 1]])) == (0, 0)
    assert ov_oracle(binpair([[1, 1], [1, 1]], [[1, 1], [1, 1]])) is None
    pair = generate(GeneratorSpec("planted-orthogonal", 20, 8, 3))
    i, j = ov_oracle(pair)
    assert dot(pair.left[i], pair.right[j]) == 0


def test_ov_oracle_is_lexicographically_first():
    pair = binpair([[1, 1], [1, 0], [0, 1]], [[1, 1], [0, 1], [1, 0]])
    assert ov_oracle(pair) == (1, 1)


def test_hs_oracle_examples():
    assert hs_oracle(binpair([[1, 1]], [[1, 0], [0, 1]])) == 0
    assert hs_oracle(binpair([[1, 0]], [[0, 1]])) is None
    assert hs_oracle(binpair([[1, 1], [1, 0]], [[1, 1], [0, 0]])) is None


def test_find_ov_oracle_examples():
    pair = binpair([[1, 0], [0, 1], [1, 1]], [[0, 0], [0, 0]])
    assert find_ov_oracle(pair).found == {0, 1, 2}
    assert find_ov_oracle(binpair([[1, 1]], [[1, 0], [0, 1]])).found == frozenset()


@pytest.mark.parametrize("seed", range(30))
def test_find_ov_oracle_matches_scan(seed, backend):
    pair = rand_binary(seed, 12, 9, 5, 0.4)
    res = find_ov_oracle(pair, backend)
    assert set(res.found) == scan_found(pair)
    res.check(pair)
    assert (ov_oracle(pair, backend) is None) == (not res.found)


def test_ortho_graph_backends_agree():
    pair = rand_binary(7, 40, 33, 70, 0.2)
    assert np.array_equal(ortho_graph(pair, "python"), ortho_graph(pair))


def test_mom_oracle_examples():
    assert mom_oracle(binpair([[1, 0], [0, 1]], [[0, 1], [1, 1]]))[0] == 1
    A = [[1, 0, 1], [0, 1, 1], [1, 1, 0]]
    m, pi = mom_oracle(binpair(A, [[1 - x for x in a] for a in A]))
    assert m == 3 and sorted(pi) == [0, 1, 2]
    m, pi = mom_oracle(binpair([[1]], [[1], [1]]))
    assert m == 0 and len(pi) == 1
    with pytest.raises(InstanceShapeError):
        mom_oracle(binpair([[1], [0]], [[1]]))


def test_witness_check_rejects_bad_witness():
    pair = binpair([[1, 0]], [[1, 0]])
    with pytest.raises(InvariantViolation):
        FindOvResult(frozenset({0}), {0: 0}).check(pair)


# -------------------------------------------------------- sampling Find-OV

def test_sampling_sizes():
    s = SamplingSizes.of(256, HALF)
    assert (s.step1_samples, s.step1_threshold) == (ceil_pow(256, Fraction(7, 8)), 4)
    assert (s.step2_samples, s.step2_threshold, s.copies) == (64, 16, 32)


def test_config_validation():
    for bad in (0, 1, Fraction(3, 2)):
        with pytest.raises(ParameterError):
            FindOvConfig(bad)


@pytest.mark.parametrize("seed", range(5))
def test_sampling_no_pairs(seed):
    pair = binpair([[1] * 4] * 100, [[1] * 4] * 100)
    assert find_ov_sampling(pair, FindOvConfig(HALF, seed)).found == frozenset()


def test_sampling_all_zero_right():
    pair = binpair(rand_binary(1, 100, 1, 6).left, [[0] * 6] * 100)
    cfg = FindOvConfig(HALF, 9)
    res = find_ov_sampling(pair, cfg)
    assert res.found == frozenset(range(100))
    assert find_ov_prefilter(pair, cfg).step1 == set(range(100))


def test_sampling_below_floor_delegates():
    pair = rand_binary(3, 30, 30, 6)
    assert find_ov_sampling(pair, FindOvConfig(HALF)).found == find_ov_oracle(pair).found


@pytest.mark.parametrize("seed", range(12))
def test_sampling_planted(seed, backend):
    pair = generate(GeneratorSpec("planted-orthogonal", 256, 32, seed, count=1 + 10 * seed))
    truth = find_ov_oracle(pair).found
    res = find_ov_sampling(pair, FindOvConfig(HALF, seed), backend=backend)
    res.check(pair)
    assert res.found <= truth
    assert len(truth) - len(res.found) <= res.missed_budget == 128


@pytest.mark.parametrize("seed", range(3))
def test_sampling_with_emd_mom_backend(seed):
    pair = generate(GeneratorSpec("planted-orthogonal", 80, 12, seed, count=20))
    truth = find_ov_oracle(pair).found
    res = find_ov_sampling(pair, FindOvConfig(Fraction(1, 4), seed), emd_mom_solver("symmetrized"))
    res.check(pair)
    assert res.found <= truth and len(truth) - len(res.found) <= 40


def test_sampling_determinism():
    pair = generate(GeneratorSpec("planted-orthogonal", 150, 16, 5, count=30))
    a = find_ov_sampling(pair, FindOvConfig(HALF, 42))
    b = find_ov_sampling(pair, FindOvConfig(HALF, 42))
    assert a.to_json_obj() == b.to_json_obj()


@pytest.mark.parametrize("seed", range(10))
def test_degree_bound_after_exact_prefilter(seed):
    n = 120
    pair = generate(GeneratorSpec("uniform-binary", n, 10, seed, density=Fraction(2, 5)))
    cfg = FindOvConfig(HALF, seed, exact_estimates=True)
    st = find_ov_prefilter(pair, cfg)
    g = ortho_graph(pair)
    cap = 2 * ceil_pow(n, HALF)
    for j in st.remaining_b:
        assert g[:, j].sum() < st.sizes.step2_threshold <= cap
    # the surviving orthogonal pairs inject into cap copies of each surviving b
    rem_b = st.remaining_b
    copies = st.sizes.copies
    need = [i for i in st.remaining_a if g[i, rem_b].any()]
    adj = [[t * copies + c for t, j in enumerate(rem_b) if g[i, j] for c in range(copies)] for i in need]
    m = max_cardinality_matching(adj, len(need), len(rem_b) * copies)
    assert len(m) == len(need)


# ------------------------------------------------------------ phased HS

def test_phased_zero_in_b():
    pair = binpair([[1, 0], [0, 1], [1, 1]], [[0, 0], [1, 1], [1, 0]])
    tr = hitting_set_phased(pair)
    assert tr.verdict == "none"
    assert tr.phases[0].verdict == "pass" and tr.phases[0].found == 3
    assert all(p.verdict == "idle" for p in tr.phases[1:])


def test_phased_all_ones_fails():
    tr = hitting_set_phased(binpair([[1, 1]], [[1, 1]]))
    assert tr.hitting_exists and tr.verdict == "hitting vector exists"
    assert tr.phases[-1].verdict == "fail"


@pytest.mark.parametrize("seed", range(80))
def test_phased_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    fam = ["uniform-binary", "planted-hitting", "complement-matched", "planted-orthogonal"][seed % 4]
    n = int(rng.integers(1, 257))
    pair = generate(GeneratorSpec(fam, n, int(rng.integers(4, 13)), seed, count=int(rng.integers(0, n + 1))))
    tr = hitting_set_phased(pair)
    assert tr.hitting_exists == (hs_oracle(pair) is not None)
    assert len(tr.phases) <= ceil_log2(n) + 1
    if not tr.hitting_exists:
        assert len(tr.phases) == tr.t == ceil_log2(n) + 1
        assert sum(p.found for p in tr.phases) == n
        left = n
        for p in tr.phases:
            left -= p.found
            assert left <= n >> p.i or p.verdict == "idle" or left * 2**p.i <= n


def test_phased_with_lossy_solver():
    """A solver missing up to half of the copies still gives the right verdict."""
    pair = generate(GeneratorSpec("complement-matched", 64, 10, 1))

    def lossy(sub):
        full = find_ov_oracle(sub)
        keep = sorted(full.found)[: max(len(full.found) - sub.n_left // 2, 0)]
        return FindOvResult(frozenset(keep), {i: full.witnesses[i] for i in keep}, sub.n_left // 2)

    tr = hitting_set_phased(pair, lossy)
    assert tr.verdict == "none"
    assert sum(p.found for p in tr.phases) == 64


def test_phased_rejects_unsound_solver():
    pair = binpair([[1, 0]], [[1, 0]])
    with pytest.raises(InvariantViolation):
        hitting_set_phased(pair, lambda sub: FindOvResult(frozenset({0}), {0: 0}))


# ------------------------------------------------------------ promise routes

def test_find_ov_promise_examples():
    pair = binpair([[1, 1], [1, 0]], [[1, 1], [0, 1]])
    assert find_ov_promise(pair, 1) == [(1, 1)]
    zeros = binpair([[1, 0], [0, 1], [1, 1]], [[0, 0]] * 3)
    got = find_ov_promise(zeros, 3)
    assert len(set(got)) == 3 and all(dot(zeros.left[i], zeros.right[j]) == 0 for i, j in got)
    with pytest.raises(PromiseViolation) as err:
        find_ov_promise(binpair([[1]], [[1]]), 1)
    assert err.value.partial == ()


def test_promise_copy_count():
    assert promise_copy_count(8, Fraction(2, 3)) == 6


def test_ov_via_promise_examples():
    assert ov_via_promise_findov(binpair([[1, 1]] * 4, [[1, 0]] * 4), HALF) is None
    pair = binpair([[1, 1, 0], [1, 1, 1], [1, 0, 1]], [[1, 1, 1], [0, 0, 1], [1, 1, 1]])
    assert ov_via_promise_findov(pair, HALF) == (0, 1)


@pytest.mark.parametrize("seed", range(40))
def test_ov_via_promise_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    fam = "planted-orthogonal" if seed % 2 else "uniform-binary"
    pair = generate(GeneratorSpec(fam, n, int(rng.integers(6, 14)), seed, count=1))
    got = ov_via_promise_findov(pair, HALF)
    assert (got is None) == (ov_oracle(pair) is None)
    if got is not None:
        assert dot(pair.left[got[0]], pair.right[got[1]]) == 0


def test_hs_promise_below_floor():
    pair = rand_binary(4, 20, 20, 5)
    tr = hs_via_promise_findov(pair, Fraction(7, 10))
    assert tr.delegated and tr.verdict == ("YES" if hs_oracle(pair) is None else "NO")


def test_hs_promise_zero_in_b():
    pair = generate(GeneratorSpec("uniform-binary", 100, 8, 1))
    right = list(pair.right)
    right[5] = right[5].__class__((0,) * 8)
    tr = hs_via_promise_findov(pair.with_sides(pair.left, right), Fraction(7, 10))
    assert tr.verdict == "YES" and not tr.delegated


@pytest.mark.parametrize("seed", range(12))
def test_hs_promise_every_a_covered(seed):
    pair = generate(GeneratorSpec("complement-matched", 80 + 14 * seed, 10, seed))
    assert hs_oracle(pair) is None
    tr = hs_via_promise_findov(pair, Fraction(7, 10), seed)
    assert tr.verdict == "YES" and not tr.delegated


@pytest.mark.parametrize("seed", range(6))
def test_hs_promise_planted_hitting(seed):
    pair = generate(GeneratorSpec("planted-hitting", 100 + 25 * seed, 10, seed))
    assert hs_oracle(pair) is not None
    assert hs_via_promise_findov(pair, Fraction(7, 10), seed).verdict == "NO"


def test_hs_promise_parameters():
    rng = np.random.default_rng(0)
    rows = rng.integers(1, 2**10, size=(2, 200))
    bits = [[[(int(x) >> t) & 1 for t in range(10)] for x in side] for side in rows]
    pair = binpair(*bits)
    tr = hs_via_promise_findov(pair, Fraction(7, 10))
    alpha = Fraction(1, 10)
    assert tr.k == ceil_pow(200, Fraction(1, 3) - alpha)
    assert tr.k_block ** 2 >= Fraction(200, tr.k) > (tr.k_block - 1) ** 2
    assert tr.threshold == 2 * tr.k * tr.k * tr.k_block
    assert tr.solver_calls >= 1


def test_hs_promise_partial_outputs_are_marked():
    """A solver that always comes back short still contributes its sound pairs."""
    pair = generate(GeneratorSpec("complement-matched", 90, 10, 2))

    def short(sub, k):
        got = find_ov_promise(sub, 1) if ortho_graph(sub).any() else []
        raise PromiseViolation("short", partial=tuple(got))

    tr = hs_via_promise_findov(pair, Fraction(7, 10), 0, short)
    assert tr.verdict == "YES"


def test_hs_promise_deterministic():
    pair = generate(GeneratorSpec("uniform-binary", 150, 9, 3))
    a = hs_via_promise_findov(pair, Fraction(7, 10), 11)
    assert a == hs_via_promise_findov(pair, Fraction(7, 10), 11)


def test_hs_promise_validation():
    with pytest.raises(ParameterError):
        hs_via_promise_findov(rand_binary(0, 4, 4, 3), Fraction(7, 2))
    with pytest.raises(InstanceShapeError):
        hs_via_promise_findov(rand_binary(0, 4, 5, 3), Fraction(7, 10))

"""Compiled and fallback kernels against each other and against enumeration."""

import itertools

import numpy as np
import pytest

from emdhard import kernels
from emdhard.vectors import BinaryVector, pack_bits


def brute_assignment(cost):
    n = cost.shape[0]
    best = None
    for p in itertools.permutations(range(n)):
        t = sum(cost[i, p[i]] for i in range(n))
        if best is None or t < best:
            best = t
    return best


@pytest.mark.parametrize("seed", range(40))
def test_hungarian_int_optimal(backend, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    cost = rng.integers(0, int(rng.choice([3, 50])), size=(n, n)).astype(np.int64)
    r2c, u, v = kernels.hungarian(cost, backend)
    assert sorted(r2c.tolist()) == list(range(n))
    assert cost[np.arange(n), r2c].sum() == brute_assignment(cost)


@pytest.mark.parametrize("seed", range(20))
def test_hungarian_longdouble_optimal(backend, seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(1, 7))
    cost = np.sqrt(rng.integers(0, 100, size=(n, n)).astype(np.longdouble))
    r2c, _, _ = kernels.hungarian(cost, backend)
    assert abs(cost[np.arange(n), r2c].sum() - brute_assignment(cost)) < 1e-15


def test_hungarian_object_dtype():
    big = 10**30
    cost = np.array([[big, 1], [2, big]], dtype=object)
    r2c, _, _ = kernels.hungarian(cost)
    assert r2c.tolist() == [1, 0]


@pytest.mark.parametrize("seed", range(20))
def test_canonical_is_lexmin(backend, seed):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(1, 7))
    cost = rng.integers(0, 3, size=(n, n)).astype(np.int64)
    r2c, u, v = kernels.hungarian(cost, backend)
    tight = kernels.tight_matrix(cost, u, v, 0, backend)
    canon = kernels.canonicalize(tight, r2c, backend)
    opt = brute_assignment(cost)
    want = min(p for p in itertools.permutations(range(n)) if sum(cost[i, p[i]] for i in range(n)) == opt)
    assert tuple(canon.tolist()) == want


def test_backends_agree_on_larger_inputs():
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(7)
    cost = rng.integers(0, 5, size=(60, 60)).astype(np.int64)
    outs = []
    for be in ("python", "cython"):
        r2c, u, v = kernels.hungarian(cost, be)
        tight = kernels.tight_matrix(cost, u, v, 0, be)
        outs.append(kernels.canonicalize(tight, r2c, be).tolist())
    assert outs[0] == outs[1]


def test_ortho_matrix(backend):
    rng = np.random.default_rng(3)
    A = [BinaryVector(tuple(int(x) for x in rng.random(70) < 0.1)) for _ in range(15)]
    B = [BinaryVector(tuple(int(x) for x in rng.random(70) < 0.1)) for _ in range(11)]
    g = kernels.ortho_matrix(pack_bits(A, 70), pack_bits(B, 70), backend)
    want = np.array([[int(sum(x * y for x, y in zip(a, b)) == 0) for b in B] for a in A])
    assert np.array_equal(g, want)


def test_sqdist_matrix(backend):
    rng = np.random.default_rng(4)
    a = rng.integers(-9, 9, size=(5, 3)).astype(np.int64)
    b = rng.integers(-9, 9, size=(4, 3)).astype(np.int64)
    want = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    assert np.array_equal(kernels.sqdist_matrix(a, b, backend), want)


@pytest.mark.parametrize("seed", range(15))
def test_hopcroft_karp_size(backend, seed):
    rng = np.random.default_rng(300 + seed)
    nl, nr = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    adj = rng.random((nl, nr)) < 0.35
    indptr = np.concatenate([[0], np.cumsum(adj.sum(axis=1))]).astype(np.int64)
    indices = np.concatenate([np.flatnonzero(r) for r in adj] + [np.zeros(0, int)]).astype(np.int64)
    ml = kernels.hopcroft_karp(nl, nr, indptr, indices, backend)
    used = [j for j in ml if j >= 0]
    assert len(used) == len(set(used))
    assert all(adj[i, j] for i, j in enumerate(ml) if j >= 0)
    best = 0
    for k in range(min(nl, nr), 0, -1):
        if any(all(adj[i, p[i]] for i in range(nl) if p[i] is not None) and sum(x is not None for x in p) == k
               for p in _partial_maps(nl, nr)):
            best = k
            break
    assert len(used) == best


def _partial_maps(nl, nr):
    choices = [None] + list(range(nr))
    for p in itertools.product(choices, repeat=nl):
        taken = [x for x in p if x is not None]
        if len(taken) == len(set(taken)):
            yield p


def test_pure_python_env_switch():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from emdhard import kernels; print(kernels.BACKEND)"],
        env={"EMDHARD_PURE_PYTHON": "1", "PATH": ""},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"

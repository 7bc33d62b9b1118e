import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.special import digamma

from cesysid.copula import (
    EPS_FLOOR,
    copula_entropy,
    empirical_copula,
    kth_neighbor_distances_exhaustive,
    kth_neighbor_distances_kdtree,
    knn_entropy,
)
from cesysid.errors import DimensionError, InvalidInputError, ParameterError

GAUSS_1D = 0.5 * math.log(2 * math.pi * math.e)


def brute_force_kth(points, k):
    """Pure-Python all-pairs oracle."""
    pts = [list(map(float, p)) for p in points]
    out = []
    for i, p in enumerate(pts):
        ds = sorted(max(abs(a - b) for a, b in zip(p, q)) for j, q in enumerate(pts) if j != i)
        out.append(ds[k - 1])
    return np.array(out)


def brute_force_entropy(points, k):
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    eps = np.maximum(brute_force_kth(pts, k), EPS_FLOOR)
    return float(digamma(n) - digamma(k) + d * math.fsum(np.log(2 * eps).tolist()) / n)


# --- rank transform -------------------------------------------------------

def test_rank_examples():
    np.testing.assert_array_equal(empirical_copula([3.1, -2.0, 10.0]).values[:, 0], [2 / 3, 1 / 3, 1.0])
    np.testing.assert_array_equal(empirical_copula([5, 5, 1]).values[:, 0], [1.0, 1.0, 1 / 3])


def test_rank_exp_invariance(rng):
    c = rng.normal(size=(300, 1))
    np.testing.assert_array_equal(empirical_copula(c).values, empirical_copula(np.exp(c)).values)


def test_rank_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        empirical_copula([[1.0, 2.0], [np.nan, 0.0]])


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 40), st.integers(1, 3)),
              elements=st.integers(-5, 5).map(float)))
def test_rank_column_structure(x):
    r = empirical_copula(x).values
    n = x.shape[0]
    assert np.all((r > 0) & (r <= 1))
    for j in range(x.shape[1]):
        counts = np.round(r[:, j] * n).astype(int)
        # literal indicator count, independently computed
        expect = [(x[:, j] <= x[t, j]).sum() for t in range(n)]
        np.testing.assert_array_equal(counts, expect)
        if len(set(x[:, j])) == n:
            assert sorted(counts) == list(range(1, n + 1))


# --- digamma backend -------------------------------------------------------

@pytest.mark.parametrize("x", [1, 2, 3, 4, 10, 64, 199, 500, 2999, 3000, 12345, 10**6])
def test_digamma_against_mpmath(x):
    assert abs(digamma(x) - float(mpmath.digamma(x))) <= 1e-10


# --- kNN entropy -----------------------------------------------------------

def test_uniform_square_entropy():
    pts = np.random.default_rng(0).uniform(size=(3000, 2))
    assert abs(knn_entropy(pts, 3) - 0.0) <= 0.05


def test_gaussian_1d_entropy():
    pts = np.random.default_rng(0).normal(size=(3000, 1))
    assert abs(knn_entropy(pts, 3) - GAUSS_1D) <= 0.05


def test_kdtree_matches_brute_force_200():
    pts = np.random.default_rng(1).normal(size=(200, 3))
    for k in (1, 3, 5):
        np.testing.assert_array_equal(kth_neighbor_distances_kdtree(pts, k), brute_force_kth(pts, k))
        assert knn_entropy(pts, k, "kdtree") == brute_force_entropy(pts, k)


def test_numpy_exhaustive_matches_brute_force(rng):
    pts = rng.uniform(size=(150, 2))
    np.testing.assert_array_equal(kth_neighbor_distances_exhaustive(pts, 3), brute_force_kth(pts, 3))


def test_duplicates_never_nan():
    pts = np.repeat(np.arange(10.0)[:, None], 5, axis=0)
    val = knn_entropy(pts, 3)
    assert np.isfinite(val)
    assert knn_entropy(pts, 3, "kdtree") == knn_entropy(pts, 3, "exhaustive")


def test_ties_on_rank_grid_agree():
    x = np.random.default_rng(5).integers(0, 6, size=(400, 2)).astype(float)
    u = empirical_copula(x).values
    assert knn_entropy(u, 3, "kdtree") == knn_entropy(u, 3, "exhaustive")


@pytest.mark.parametrize("k", [0, 10, 2.5])
def test_k_out_of_range(k):
    with pytest.raises(ParameterError):
        knn_entropy(np.zeros((10, 1)) + np.arange(10)[:, None], k)


# --- copula entropy --------------------------------------------------------

def test_independent_uniform_pair():
    data = np.random.default_rng(2).uniform(size=(3000, 2))
    est = copula_entropy(data, 3)
    assert est.mi_nats == -est.ce_nats
    assert abs(est.mi_nats) <= 0.05


def test_gaussian_pair_rho_half():
    rng = np.random.default_rng(3)
    data = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], size=3000)
    assert abs(copula_entropy(data, 3).mi_nats - (-0.5 * math.log(1 - 0.25))) <= 0.05


def test_cube_plus_constant_invariance(rng):
    data = rng.normal(size=(500, 2))
    changed = data.copy()
    changed[:, 1] = changed[:, 1] ** 3 + 7.0
    assert copula_entropy(data).ce_nats == copula_entropy(changed).ce_nats


def test_single_column_rejected():
    with pytest.raises(DimensionError):
        copula_entropy(np.arange(10.0))


def test_estimate_fields():
    est = copula_entropy(np.random.default_rng(0).normal(size=(100, 3)), 4)
    assert (est.k, est.n_samples, est.dims) == (4, 100, 3)
    assert est.as_dict()["units"] == "nats"


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4))
def test_column_permutation_symmetry(seed, d):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(120, d))
    perm = rng.permutation(d)
    assert copula_entropy(data).ce_nats == copula_entropy(data[:, perm]).ce_nats


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_row_shuffle_invariance(seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(150, 2))
    assert copula_entropy(data).ce_nats == copula_entropy(data[rng.permutation(150)]).ce_nats


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(0.1, 50), b=st.floats(-50, 50))
def test_monotone_maps_bit_identical(seed, a, b):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(100, 3))
    mapped = np.column_stack([a * data[:, 0] + b, np.exp(data[:, 1]), data[:, 2] ** 3 + b])
    assert copula_entropy(data).ce_nats == copula_entropy(mapped).ce_nats


@pytest.mark.slow
def test_independence_null_coverage():
    hits = 0
    for seed in range(100):
        data = np.random.default_rng(seed).normal(size=(3000, 2))
        hits += abs(copula_entropy(data, 3).mi_nats) <= 0.05
    assert hits >= 95


def test_corollary_decomposition():
    rng = np.random.default_rng(4)
    x = rng.multivariate_normal([0, 0], [[1, 0.6], [0.6, 1]], size=3000)
    joint = knn_entropy(x, 3)
    h1, h2 = knn_entropy(x[:, :1], 3), knn_entropy(x[:, 1:], 3)
    hc = copula_entropy(x, 3).ce_nats
    assert abs(joint - (h1 + h2 + hc)) <= 0.1

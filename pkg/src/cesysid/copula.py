"""Nonparametric copula entropy: rank transform plus kNN entropy.

All entropies are in nats. Distances use the Chebyshev (max) norm, whose
unit ball is the cube ``[-1, 1]^d`` of volume ``2^d``; the estimator is

    H = psi(T) - psi(k) + (d / T) * sum_i log(2 * eps_i)

with ``eps_i`` the distance from point ``i`` to its k-th nearest neighbour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .errors import DimensionError, InsufficientDataError, InvalidInputError, ParameterError

DEFAULT_K = 3
# Replaces zero neighbour distances (duplicate points) inside the log.
EPS_FLOOR = 1e-12
# Neighbour search falls back to exhaustive scanning outside this regime.
KDTREE_MAX_DIM = 8
KDTREE_MIN_POINTS = 64

_EXHAUSTIVE_BLOCK = 256


@dataclass(frozen=True)
class RankMatrix:
    """Pseudo-observations ``values[t, i] = #{s : x[s, i] <= x[t, i]} / T``."""

    values: np.ndarray

    @property
    def source_dims(self):
        return self.values.shape[1]

    @property
    def n_samples(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class CEEstimate:
    ce_nats: float
    k: int
    n_samples: int
    dims: int

    @property
    def mi_nats(self) -> float:
        return -self.ce_nats

    def as_dict(self):
        return {
            "ce_nats": self.ce_nats,
            "mi_nats": self.mi_nats,
            "k": self.k,
            "n_samples": self.n_samples,
            "dims": self.dims,
            "units": "nats",
        }


def _as_matrix(data, name="data"):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def rank_column(col):
    """Maximal-rank ECDF of a single column, as integers in ``1..T``."""
    col = np.asarray(col, dtype=float)
    return np.searchsorted(np.sort(col), col, side="right")


def empirical_copula(data) -> RankMatrix:
    """Per-column empirical CDF evaluated at each sample.

    Tied values all receive the largest rank of their group, which is what
    the indicator count ``sum_s 1[x_s <= x_t]`` gives literally.
    """
    arr = _as_matrix(data)
    n = arr.shape[0]
    if n < 2:
        raise InsufficientDataError(f"empirical copula needs T >= 2, got {n}")
    ranks = np.empty(arr.shape, dtype=float)
    for j in range(arr.shape[1]):
        ranks[:, j] = rank_column(arr[:, j])
    ranks /= n
    ranks.setflags(write=False)
    return RankMatrix(ranks)


def kth_neighbor_distances_exhaustive(points, k):
    """Chebyshev distance from every point to its k-th nearest other point, O(T^2)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    out = np.empty(n)
    for start in range(0, n, _EXHAUSTIVE_BLOCK):
        block = points[start:start + _EXHAUSTIVE_BLOCK]
        dist = np.abs(block[:, None, :] - points[None, :, :]).max(axis=2)
        rows = np.arange(block.shape[0])
        dist[rows, start + rows] = np.inf
        out[start:start + block.shape[0]] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return out


def kth_neighbor_distances_kdtree(points, k):
    points = np.asarray(points, dtype=float)
    tree = cKDTree(points)
    # Slot 0 of the sorted query is the point itself (distance 0), so slot k is
    # the k-th nearest other point even when duplicates reorder the indices.
    dist, _ = tree.query(points, k=k + 1, p=np.inf)
    return np.ascontiguousarray(dist[:, k])


def kth_neighbor_distances(points, k, method="auto"):
    points = np.asarray(points, dtype=float)
    if method == "auto":
        n, d = points.shape
        method = "exhaustive" if d > KDTREE_MAX_DIM or n < KDTREE_MIN_POINTS else "kdtree"
    if method == "kdtree":
        return kth_neighbor_distances_kdtree(points, k)
    if method == "exhaustive":
        return kth_neighbor_distances_exhaustive(points, k)
    raise ParameterError(f"unknown neighbour search method {method!r}")


def _entropy_from_distances(eps, k, d):
    n = eps.shape[0]
    eps = np.maximum(eps, EPS_FLOOR)
    # fsum is exactly rounded, so the result does not depend on row order.
    log_sum = math.fsum(np.log(2.0 * eps).tolist())
    return float(digamma(n) - digamma(k) + d * log_sum / n)


def _check_k(k, n):
    if int(k) != k or not 1 <= k <= n - 1:
        raise ParameterError(f"k must be an integer in [1, {n - 1}], got {k}")
    return int(k)


def knn_entropy(points, k=DEFAULT_K, method="auto") -> float:
    """Kozachenko-Leonenko differential entropy estimate (nats).

    Parameters
    ----------
    points : array_like, shape (T, d)
        Samples; a 1-d array is treated as ``d = 1``.
    k : int
        Neighbour order, ``1 <= k <= T - 1``.
    method : {"auto", "kdtree", "exhaustive"}
        Neighbour search backend. Both give identical distances.
    """
    pts = _as_matrix(points, "points")
    n, d = pts.shape
    if n < 2:
        raise InsufficientDataError(f"entropy estimation needs T >= 2, got {n}")
    k = _check_k(k, n)
    eps = kth_neighbor_distances(pts, k, method)
    return _entropy_from_distances(eps, k, d)


def copula_entropy(data, k=DEFAULT_K, method="auto") -> CEEstimate:
    """Estimate copula entropy of the columns of ``data``; MI is its negative."""
    arr = _as_matrix(data)
    n, d = arr.shape
    if d < 2:
        raise DimensionError(f"copula entropy needs at least 2 columns, got {d}")
    if n < 2:
        raise InsufficientDataError(f"copula entropy needs T >= 2, got {n}")
    k = _check_k(k, n)
    ranks = empirical_copula(arr)
    return CEEstimate(knn_entropy(ranks.values, k, method), k, n, d)


def copula_entropy_from_ranks(ranks, k=DEFAULT_K, method="auto") -> CEEstimate:
    """Like :func:`copula_entropy` but on precomputed pseudo-observations."""
    values = ranks.values if isinstance(ranks, RankMatrix) else np.asarray(ranks, dtype=float)
    n, d = values.shape
    return CEEstimate(knn_entropy(values, k, method), int(k), n, d)


def mutual_information(x, y, k=DEFAULT_K) -> float:
    """MI (nats) between two columns via copula entropy."""
    return copula_entropy(np.column_stack([x, y]), k).mi_nats

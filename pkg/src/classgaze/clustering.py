"""Density clustering of gaze windows with dynamic eps selection.

The eps threshold is tuned per window: sort each point's distance to its
floor(min_samples/3)-th nearest neighbour and take the curve's elbow (the
normalized-difference knee). Core points have at least ``min_samples``
neighbours within eps, counting themselves; clusters are the connected
components of core points under the <= eps relation, plus border points
attached to the lowest-indexed core that can reach them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DegenerateCurveError, EmptyDistributionError, InsufficientPointsError
from .metrics import GazeDistribution

logger = logging.getLogger(__name__)

NOISE = -1

# Above this many (distinct) points the O(N^2) distance matrix is replaced
# by a KD-tree pair query; both backends produce the same partition.
BRUTE_FORCE_MAX = 2000

# Fallbacks when the k-distance curve has no usable elbow.
FALLBACK_PERCENTILE = 90.0
FALLBACK_MIN_EPS = 1e-6

# Windows smaller than 2*min_samples get a scaled-down density requirement;
# the result is flagged so consumers know the defaults were substituted.
AUTO_SCALE_FLOOR = 5
AUTO_SCALE_DIVISOR = 6


@dataclass(frozen=True)
class ClusteringParams:
    """DBSCAN parameters; eps is either fixed or tuned from the data."""

    min_samples: int = 100
    eps_mode: Literal["dynamic", "fixed"] = "dynamic"
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.min_samples < 2:
            raise ValueError("min_samples must be >= 2")
        if self.eps_mode == "fixed":
            if self.eps is None or not self.eps > 0:
                raise ValueError("fixed eps_mode requires eps > 0")
        elif self.eps_mode != "dynamic":
            raise ValueError(f"unknown eps_mode: {self.eps_mode!r}")

    @property
    def kdist_k(self) -> int:
        """Neighbour rank used for the k-distance curve: floor(min_samples/3)."""
        return max(1, self.min_samples // 3)


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray              # per-point cluster id, NOISE = -1
    cluster_sizes: tuple[int, ...]  # descending
    noise_count: int
    eps_used: float
    kdist_curve: np.ndarray | None  # sorted k-distances (dynamic mode only)
    effective_min_samples: int
    auto_scaled: bool

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    @property
    def n_points(self) -> int:
        return int(self.labels.shape[0])


def effective_min_samples(n_points: int, min_samples: int) -> tuple[int, bool]:
    """Scale min_samples down on small windows; returns (value, was_scaled)."""
    if n_points >= 2 * min_samples:
        return min_samples, False
    return max(AUTO_SCALE_FLOOR, n_points // AUTO_SCALE_DIVISOR), True


def kdistance_curve(d: GazeDistribution, k: int) -> np.ndarray:
    """Sorted distances from each point to its k-th nearest other point.

    The result is non-decreasing; its elbow estimates a good eps.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = d.n
    if n <= k:
        raise InsufficientPointsError(f"need more than k={k} points, got {n}")
    xy = d.coordinates()
    if n <= BRUTE_FORCE_MAX:
        diff = xy[:, None, :] - xy[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        # row-wise k-th smallest, skipping the self-distance at rank 0
        kth = np.partition(sq, k, axis=1)[:, k]
        dists = np.sqrt(kth)
    else:
        tree = cKDTree(xy)
        dists = tree.query(xy, k=k + 1)[0][:, k]
    dists.sort()
    return dists


def find_elbow(curve: np.ndarray) -> tuple[int, float]:
    """Locate the knee of a sorted non-decreasing curve.

    Indices and values are min-max normalized to [0,1]; the elbow is the
    index maximizing (x_n - y_n), ties broken to the smallest index.
    Raises DegenerateCurveError for constant curves.
    """
    y = np.asarray(curve, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] < 3:
        raise ValueError("curve must be one-dimensional with length >= 3")
    lo, hi = float(y[0]), float(y[-1])
    if hi == lo:
        raise DegenerateCurveError("constant k-distance curve has no elbow")
    n = y.shape[0]
    x_n = np.arange(n, dtype=np.float64) / (n - 1)
    y_n = (y - lo) / (hi - lo)
    idx = int(np.argmax(x_n - y_n))
    return idx, float(y[idx])


def _fallback_eps(curve: np.ndarray) -> float:
    eps = float(np.percentile(curve, FALLBACK_PERCENTILE))
    return eps if eps > 0 else FALLBACK_MIN_EPS


def dynamic_eps(d: GazeDistribution, k: int) -> tuple[float, np.ndarray]:
    """Tune eps from the k-distance curve; falls back on degenerate curves."""
    curve = kdistance_curve(d, k)
    if curve.shape[0] < 3:
        return _fallback_eps(curve), curve
    try:
        _, eps = find_elbow(curve)
    except DegenerateCurveError:
        return _fallback_eps(curve), curve
    if eps <= 0:
        # leading zeros from stacked identical points can put the elbow at 0
        eps = _fallback_eps(curve)
    return eps, curve


def _pairs_within(xy: np.ndarray, eps: float) -> np.ndarray:
    """All index pairs (i < j) with euclidean distance <= eps, shape (m, 2)."""
    n = xy.shape[0]
    if n <= BRUTE_FORCE_MAX:
        diff = xy[:, None, :] - xy[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        mask = np.triu(sq <= eps * eps, k=1)
        i, j = np.nonzero(mask)
        return np.column_stack([i, j])
    tree = cKDTree(xy)
    pairs = tree.query_pairs(eps, output_type="ndarray")
    return pairs.reshape(-1, 2)


def dbscan(d: GazeDistribution, params: ClusteringParams) -> ClusteringResult:
    """Cluster one gaze window; never crashes on degenerate geometry.

    Identical coordinates are collapsed before the neighbour search (their
    mutual distance is zero, so they always share a fate) and the labels are
    broadcast back, which keeps frozen-gaze windows cheap.
    """
    n = d.n
    if n == 0:
        raise EmptyDistributionError("dbscan needs at least one point")
    ms, auto_scaled = effective_min_samples(n, params.min_samples)
    if auto_scaled:
        logger.debug("auto-scaled min_samples %d -> %d for n=%d", params.min_samples, ms, n)

    curve: np.ndarray | None = None
    if params.eps_mode == "fixed":
        assert params.eps is not None
        eps = params.eps
    else:
        k = max(1, ms // 3)
        eps, curve = dynamic_eps(d, k)

    xy = d.coordinates()
    uniq, inverse, weights = np.unique(xy, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    n_uniq = uniq.shape[0]
    # lowest original index of each distinct coordinate, for the border tie-break
    rep = np.full(n_uniq, n, dtype=np.int64)
    np.minimum.at(rep, inverse, np.arange(n, dtype=np.int64))

    pairs = _pairs_within(uniq, eps)
    counts = weights.astype(np.int64).copy()  # each point neighbours itself and its twins
    if pairs.size:
        np.add.at(counts, pairs[:, 0], weights[pairs[:, 1]])
        np.add.at(counts, pairs[:, 1], weights[pairs[:, 0]])
    core = counts >= ms

    labels_u = np.full(n_uniq, NOISE, dtype=np.int64)
    n_comp = 0
    if core.any():
        core_idx = np.nonzero(core)[0]
        core_pos = np.full(n_uniq, -1, dtype=np.int64)
        core_pos[core_idx] = np.arange(core_idx.shape[0])
        if pairs.size:
            cc_mask = core[pairs[:, 0]] & core[pairs[:, 1]]
            cc = pairs[cc_mask]
        else:
            cc = np.empty((0, 2), dtype=np.int64)
        m = core_idx.shape[0]
        rows = core_pos[cc[:, 0]]
        cols = core_pos[cc[:, 1]]
        adj = csr_matrix(
            (np.ones(rows.shape[0], dtype=np.int8), (rows, cols)), shape=(m, m)
        )
        n_comp, comp = connected_components(adj, directed=False)
        labels_u[core_idx] = comp

        if pairs.size:
            cb_mask = core[pairs[:, 0]] ^ core[pairs[:, 1]]
            cb = pairs[cb_mask]
            if cb.size:
                swap = core[cb[:, 1]]
                border = np.where(swap, cb[:, 0], cb[:, 1])
                anchor = np.where(swap, cb[:, 1], cb[:, 0])
                # attach each border point to the core with the lowest input index
                order = np.lexsort((rep[anchor], border))
                border, anchor = border[order], anchor[order]
                first = np.ones(border.shape[0], dtype=bool)
                first[1:] = border[1:] != border[:-1]
                labels_u[border[first]] = labels_u[anchor[first]]

        # renumber components by first appearance in input order
        min_rep = np.full(n_comp, n, dtype=np.int64)
        assigned = labels_u >= 0
        np.minimum.at(min_rep, labels_u[assigned], rep[assigned])
        remap = np.empty(n_comp, dtype=np.int64)
        remap[np.argsort(min_rep, kind="stable")] = np.arange(n_comp)
        labels_u[assigned] = remap[labels_u[assigned]]

    labels = labels_u[inverse]
    sizes = np.bincount(labels[labels >= 0], minlength=n_comp) if n_comp else np.array([], dtype=np.int64)
    noise_count = int((labels == NOISE).sum())
    return ClusteringResult(
        labels=labels,
        cluster_sizes=tuple(sorted((int(s) for s in sizes), reverse=True)),
        noise_count=noise_count,
        eps_used=float(eps),
        kdist_curve=curve,
        effective_min_samples=ms,
        auto_scaled=auto_scaled,
    )

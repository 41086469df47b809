"""Fixed spatial zones from two independent K-Means passes.

In-precinct samples and out-of-precinct samples are clustered separately
over the pooled positions of all users at all instants. Outside zone ids
follow the inside ids contiguously, and centroids never change once fitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .core import TraceSet, Venue, _frozen, inside_mask
from .errors import InfeasibleError

MAX_ITER = 300


@dataclass(frozen=True)
class Zoning:
    """Fitted centroids plus the per-user per-instant zone labels.

    Zone ids 0..len(inside_centroids)-1 are in-precinct; outside ids follow.
    """

    inside_centroids: np.ndarray
    outside_centroids: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inside_centroids", _frozen(np.array(self.inside_centroids, np.float64).reshape(-1, 2)))
        object.__setattr__(self, "outside_centroids", _frozen(np.array(self.outside_centroids, np.float64).reshape(-1, 2)))
        labels = np.array(self.labels, np.int64)
        if labels.ndim != 2:
            raise ValueError(f"labels must be (users, instants), got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.zone_count):
            raise ValueError("zone labels out of range")
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def inside_count(self) -> int:
        return self.inside_centroids.shape[0]

    @property
    def zone_count(self) -> int:
        return self.inside_centroids.shape[0] + self.outside_centroids.shape[0]

    def all_centroids(self) -> np.ndarray:
        return np.vstack([self.inside_centroids, self.outside_centroids])


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted draws after a uniform first pick."""
    n = points.shape[0]
    centroids = np.empty((k, 2), np.float64)
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(points, labels, dist2, centroids, counts):
    """Reseed each empty cluster at the farthest point (from its own centroid)
    among the largest cluster's members."""
    counts = counts.copy()
    d2 = dist2.copy()
    for j in np.flatnonzero(counts == 0):
        largest = int(np.argmax(counts))
        members = np.flatnonzero(labels == largest)
        if members.size == 0:
            continue
        far = members[int(np.argmax(d2[members]))]
        centroids[j] = points[far]
        counts[largest] -= 1
        d2[far] = -1.0  # a point seeds at most one empty cluster
    return centroids


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = MAX_ITER):
    """Lloyd iterations until the assignment is stable. Returns centroids,
    labels, and the within-cluster sum of squares after each assignment."""
    centroids = _kmeans_pp_init(points, k, rng)
    labels, dist2 = kern.nearest_labels(points, centroids)
    objective = [dist2.sum()]
    for _ in range(max_iter):
        sums, counts = kern.accumulate_points(points, labels, k)
        nonempty = counts > 0
        centroids = np.where(nonempty[:, None], sums / np.where(nonempty, counts, 1)[:, None], centroids)
        if not np.all(nonempty):
            centroids = _repair_empty(points, labels, dist2, centroids, counts)
        new_labels, dist2 = kern.nearest_labels(points, centroids)
        objective.append(dist2.sum())
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centroids, labels, np.array(objective)


def _require_distinct(points: np.ndarray, k: int, region: str) -> None:
    distinct = np.unique(points, axis=0).shape[0]
    if distinct < k:
        raise InfeasibleError(
            f"cannot form {k} {region} zones from {distinct} distinct {region} positions"
        )


def cluster(traces: TraceSet, venue: Venue, k_inside: int, k_outside: int, seed: int) -> Zoning:
    """Fit the zoning over all positions of all users at all instants.

    Runs one K-Means over in-precinct points and, when any point falls outside
    the precinct, an independent K-Means over the outside points. Every
    (user, instant) is labeled with its nearest centroid of its region class.
    """
    if k_inside < 1 or k_outside < 1:
        raise ValueError("k_inside and k_outside must be >= 1")
    points = traces.all_points()
    mask = inside_mask(points, venue)
    in_pts = np.ascontiguousarray(points[mask])
    out_pts = np.ascontiguousarray(points[~mask])
    _require_distinct(in_pts, k_inside, "in-precinct")

    rng = np.random.default_rng(seed)
    in_centroids, in_labels, _ = _lloyd(in_pts, k_inside, rng)

    flat = np.empty(points.shape[0], np.int64)
    flat[mask] = in_labels
    if out_pts.shape[0] > 0:
        _require_distinct(out_pts, k_outside, "outside")
        out_centroids, out_labels, _ = _lloyd(out_pts, k_outside, rng)
        flat[~mask] = k_inside + out_labels
    else:
        out_centroids = np.empty((0, 2), np.float64)
    labels = flat.reshape(traces.user_count, traces.instant_count)
    return Zoning(in_centroids, out_centroids, labels)


def assign(p, zoning: Zoning, venue: Venue) -> int:
    """Zone id of a position: nearest centroid within its region class,
    ties broken by the lowest zone id."""
    p = np.asarray(p, dtype=np.float64).reshape(1, 2)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"position must be finite, got {p}")
    if inside_mask(p, venue)[0]:
        labels, _ = kern.nearest_labels(p, zoning.inside_centroids)
        return int(labels[0])
    if zoning.outside_centroids.shape[0] == 0:
        raise InfeasibleError(f"position {p[0]} is outside the precinct but no outside zones exist")
    labels, _ = kern.nearest_labels(p, zoning.outside_centroids)
    return zoning.inside_count + int(labels[0])

import itertools

import numpy as np
import pytest

from tce.errors import InfeasibleError
from tce.zoning import Zoning, _lloyd, assign, cluster

from conftest import make_traces


def brute_force_best_partition(points, k):
    """Exhaustive search over all k^n labelings for the minimum
    within-cluster sum of squares; returns the partition as frozensets."""
    n = len(points)
    labelings = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int8)
    sq = (points**2).sum(axis=1)
    objective = np.zeros(len(labelings))
    for c in range(k):
        mask = labelings == c
        counts = mask.sum(axis=1)
        sums = mask @ points
        safe = np.maximum(counts, 1)
        # sum ||p - mu||^2 over members = sum ||p||^2 - n * ||mu||^2
        objective += mask @ sq - ((sums / safe[:, None]) ** 2).sum(axis=1) * counts
    best = labelings[int(np.argmin(objective))]
    return partition_of(best), float(objective.min())


def partition_of(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(i)
    return frozenset(frozenset(g) for g in groups.values())


class TestCluster:
    def test_exact_degenerate_clustering(self, festival_venue):
        # points at exactly k locations: centroids equal them, assignment exact
        spots = np.array([[5.0, 5.0], [40.0, 70.0], [25.0, 40.0]])
        positions = spots[np.array([[0, 1, 2], [2, 1, 0]])]  # 2 users x 3 instants
        traces = make_traces(positions)
        zoning = cluster(traces, festival_venue, k_inside=3, k_outside=1, seed=3)
        assert sorted(map(tuple, zoning.inside_centroids)) == sorted(map(tuple, spots))
        for u in range(2):
            for t in range(3):
                c = zoning.inside_centroids[zoning.labels[u, t]]
                assert np.array_equal(c, positions[u, t])

    def test_all_inside_gives_no_outside_zones(self, festival_venue):
        rng = np.random.default_rng(4)
        positions = rng.uniform(5, 45, size=(4, 5, 2))
        traces = make_traces(positions)
        zoning = cluster(traces, festival_venue, k_inside=2, k_outside=1, seed=0)
        assert zoning.outside_centroids.shape == (0, 2)
        assert zoning.labels.max() < zoning.inside_count

    def test_three_blobs_match_exhaustive_partition(self, festival_venue):
        # 12 points in 3 well-separated blobs; oracle enumerates all 3^12 labelings
        rng = np.random.default_rng(5)
        blobs = np.array([[8.0, 10.0], [40.0, 12.0], [25.0, 70.0]])
        points = np.concatenate([c + rng.uniform(-2, 2, size=(4, 2)) for c in blobs])
        expected, _ = brute_force_best_partition(points, 3)
        blob_partition = frozenset(
            frozenset(range(i * 4, i * 4 + 4)) for i in range(3)
        )
        assert expected == blob_partition
        traces = make_traces(points.reshape(6, 2, 2))
        zoning = cluster(traces, festival_venue, k_inside=3, k_outside=1, seed=9)
        assert partition_of(zoning.labels.ravel()) == blob_partition

    def test_region_purity(self, festival_venue):
        rng = np.random.default_rng(6)
        inside = rng.uniform(0, 50, size=(30, 2)) * [1, 1.6]
        outside = rng.uniform((50, 15), (60, 65), size=(10, 2))
        positions = np.concatenate([inside, outside]).reshape(8, 5, 2)
        traces = make_traces(positions)
        zoning = cluster(traces, festival_venue, k_inside=3, k_outside=2, seed=1)
        from tce.core import inside_mask

        mask = inside_mask(traces.all_points(), festival_venue)
        labels = zoning.labels.ravel()
        assert np.all(labels[mask] < zoning.inside_count)
        assert np.all(labels[~mask] >= zoning.inside_count)

    def test_same_position_same_label(self, festival_venue):
        rng = np.random.default_rng(7)
        pool = rng.uniform(0, 50, size=(6, 2)) * [1, 1.6]
        positions = pool[rng.integers(0, 6, size=(5, 4))]
        traces = make_traces(positions)
        zoning = cluster(traces, festival_venue, k_inside=3, k_outside=1, seed=2)
        seen = {}
        for u in range(5):
            for t in range(4):
                key = tuple(traces.positions[u, t])
                label = zoning.labels[u, t]
                assert seen.setdefault(key, label) == label

    def test_determinism(self, festival_venue):
        rng = np.random.default_rng(8)
        positions = rng.uniform(0, 50, size=(6, 8, 2)) * [1, 1.6]
        traces = make_traces(positions)
        a = cluster(traces, festival_venue, 4, 1, seed=77)
        b = cluster(traces, festival_venue, 4, 1, seed=77)
        assert a.inside_centroids.tobytes() == b.inside_centroids.tobytes()
        assert np.array_equal(a.labels, b.labels)

    def test_infeasible_when_too_few_distinct_points(self, festival_venue):
        positions = np.tile([[10.0, 10.0]], (3, 4, 1))
        traces = make_traces(positions)
        with pytest.raises(InfeasibleError):
            cluster(traces, festival_venue, k_inside=2, k_outside=1, seed=0)

    def test_centroid_within_member_bounding_box(self, festival_venue):
        rng = np.random.default_rng(9)
        positions = rng.uniform(0, 50, size=(10, 6, 2)) * [1, 1.6]
        traces = make_traces(positions)
        zoning = cluster(traces, festival_venue, 4, 1, seed=5)
        labels = zoning.labels.ravel()
        pts = traces.all_points()
        for z in range(zoning.inside_count):
            members = pts[labels == z]
            if len(members):
                assert np.all(zoning.inside_centroids[z] >= members.min(axis=0) - 1e-12)
                assert np.all(zoning.inside_centroids[z] <= members.max(axis=0) + 1e-12)


class TestLloyd:
    def test_empty_cluster_reseeded_at_farthest_member_of_largest(self):
        from tce.zoning import _repair_empty

        points = np.array([[0.0, 0.0], [1.0, 0.0], [8.0, 0.0], [2.0, 2.0]])
        labels = np.array([0, 0, 0, 1], np.int64)
        centroids = np.array([[1.0, 0.0], [2.0, 2.0], [99.0, 99.0]])
        dist2 = ((points - centroids[labels]) ** 2).sum(axis=1)
        counts = np.array([3, 1, 0], np.int64)
        repaired = _repair_empty(points, labels, dist2, centroids.copy(), counts)
        # cluster 2 is empty; cluster 0 is largest; its farthest member is (8,0)
        assert np.array_equal(repaired[2], [8.0, 0.0])
        assert np.array_equal(repaired[0], centroids[0])

    def test_two_empty_clusters_take_distinct_points(self):
        from tce.zoning import _repair_empty

        points = np.array([[0.0, 0.0], [1.0, 0.0], [8.0, 0.0], [6.0, 0.0]])
        labels = np.array([0, 0, 0, 0], np.int64)
        centroids = np.array([[1.0, 0.0], [50.0, 50.0], [60.0, 60.0]])
        dist2 = ((points - centroids[labels]) ** 2).sum(axis=1)
        counts = np.array([4, 0, 0], np.int64)
        repaired = _repair_empty(points, labels, dist2, centroids.copy(), counts)
        assert np.array_equal(repaired[1], [8.0, 0.0])
        assert np.array_equal(repaired[2], [6.0, 0.0])

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            points = rng.uniform(0, 10, size=(int(rng.integers(5, 40)), 2))
            k = int(rng.integers(1, 5))
            if np.unique(points, axis=0).shape[0] < k:
                continue
            _, _, objective = _lloyd(points, k, np.random.default_rng(0))
            assert np.all(np.diff(objective) <= 1e-9)


class TestAssign:
    def _zoning(self):
        inside = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
        outside = np.array([[55.0, 40.0]])
        return Zoning(inside, outside, np.zeros((1, 1), np.int64))

    def test_centroid_maps_to_itself(self, festival_venue):
        zoning = self._zoning()
        for z in range(4):
            assert assign(zoning.inside_centroids[z], zoning, festival_venue) == z

    def test_tie_breaks_to_lowest_id(self, festival_venue):
        # equidistant from centroids 1 (10,0) and 3 (10,10) -> id 1
        zoning = self._zoning()
        assert assign((10.0, 5.0), zoning, festival_venue) == 1

    def test_outside_point_uses_outside_zone(self, festival_venue):
        zoning = self._zoning()
        assert assign((52.0, 20.0), zoning, festival_venue) == 4

    def test_outside_point_without_outside_zones_errors(self, festival_venue):
        zoning = Zoning(np.array([[1.0, 1.0]]), np.empty((0, 2)), np.zeros((1, 1), np.int64))
        with pytest.raises(InfeasibleError):
            assign((55.0, 40.0), zoning, festival_venue)

    def test_matches_linear_scan(self, festival_venue):
        rng = np.random.default_rng(20)
        inside = rng.uniform(0, 50, size=(5, 2)) * [1, 1.6]
        outside = rng.uniform((50, 15), (60, 65), size=(2, 2))
        zoning = Zoning(inside, outside, np.zeros((1, 1), np.int64))
        for _ in range(500):
            if rng.random() < 0.7:
                p = rng.uniform((0, 0), (50, 80))
                cents, offset = inside, 0
            else:
                p = rng.uniform((50, 15), (60, 65))
                cents, offset = outside, 5
            d2 = ((cents - p) ** 2).sum(axis=1)
            expected = offset + int(np.flatnonzero(d2 == d2.min())[0])
            assert assign(p, zoning, festival_venue) == expected

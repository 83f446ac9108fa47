from itertools import combinations

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage

from oracles import davies_bouldin_oracle, silhouette_oracle
from trendshape.clustering import (
    FeatureMatrix,
    Method,
    davies_bouldin,
    elbow_curve,
    evaluate,
    kmeans,
    silhouette,
    ward_cluster,
)
from trendshape.errors import InvalidK, UndefinedScore


def fm(rows, labels=None):
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    labels = labels or tuple(f"r{i}" for i in range(len(rows)))
    return FeatureMatrix(labels=labels, rows=rows)


def partition_sets(labels):
    groups = {}
    for i, c in enumerate(labels):
        groups.setdefault(int(c), set()).add(i)
    return {frozenset(g) for g in groups.values()}


def best_two_partition_inertia(rows):
    """Enumerate every 2-partition and return the minimal k-means objective."""
    n = len(rows)
    best = np.inf
    best_parts = None
    for size in range(1, n // 2 + 1):
        for left in combinations(range(n), size):
            left = set(left)
            right = set(range(n)) - left
            inertia = 0.0
            for part in (left, right):
                pts = rows[sorted(part)]
                inertia += ((pts - pts.mean(axis=0)) ** 2).sum()
            if inertia < best - 1e-15:
                best = inertia
                best_parts = {frozenset(left), frozenset(right)}
    return best, best_parts


class TestKmeans:
    def test_k_equals_n(self):
        m = fm([[0.0], [5.0], [9.0]])
        res = kmeans(m, k=3, seed=0)
        assert res.inertia == pytest.approx(0.0)
        assert sorted(res.labels.tolist()) == [0, 1, 2]

    def test_k_equals_one(self):
        rows = np.array([[1.0, 0.0], [3.0, 0.0], [8.0, 0.0]])
        res = kmeans(fm(rows), k=1, seed=0)
        total_ss = ((rows - rows.mean(axis=0)) ** 2).sum()
        assert res.inertia == pytest.approx(total_ss)
        assert set(res.labels.tolist()) == {0}

    def test_two_triads_match_bruteforce(self):
        rng = np.random.default_rng(6)
        a = rng.normal(0, 0.1, size=(3, 2))
        b = rng.normal(10, 0.1, size=(3, 2)) + np.array([10.0, 0.0])
        rows = np.vstack([a, b])
        res = kmeans(fm(rows), k=2, seed=1)
        best, best_parts = best_two_partition_inertia(rows)
        assert res.inertia == pytest.approx(best, rel=1e-12)
        assert partition_sets(res.labels) == best_parts

    def test_inertia_history_nonincreasing(self):
        rng = np.random.default_rng(2)
        m = fm(rng.uniform(0, 10, size=(40, 4)))
        res = kmeans(m, k=5, seed=3)
        hist = np.array(res.inertia_history)
        assert np.all(np.diff(hist) <= 1e-9)
        assert res.inertia == hist[-1]

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        m = fm(rng.uniform(0, 10, size=(30, 3)))
        a = kmeans(m, k=4, seed=9)
        b = kmeans(m, k=4, seed=9)
        assert np.array_equal(a.labels, b.labels)
        assert a.inertia == b.inertia

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(12)
        rows = rng.uniform(0, 10, size=(16, 3))
        perm = rng.permutation(16)
        res_a = kmeans(fm(rows), k=3, seed=5)
        res_b = kmeans(fm(rows[perm]), k=3, seed=5)
        parts_a = partition_sets(res_a.labels)
        inv = np.argsort(perm)
        parts_b = {frozenset(int(perm[i]) for i in part) for part in partition_sets(res_b.labels)}
        assert res_a.inertia == pytest.approx(res_b.inertia, rel=1e-9)
        assert parts_a == parts_b

    def test_every_cluster_nonempty(self):
        rows = np.zeros((6, 2))  # all-duplicate rows force empty-cluster repair
        res = kmeans(fm(rows), k=3, seed=0)
        assert sorted(set(res.labels.tolist())) == [0, 1, 2]

    def test_invalid_k(self):
        m = fm([[0.0], [1.0]])
        with pytest.raises(InvalidK):
            kmeans(m, k=3, seed=0)
        with pytest.raises(InvalidK):
            kmeans(m, k=0, seed=0)


class TestElbow:
    def test_inertia_zero_at_n(self):
        rng = np.random.default_rng(3)
        m = fm(rng.uniform(0, 5, size=(8, 2)))
        curve = elbow_curve(m, range(1, 9), seed=0)
        assert curve.points[-1] == (8, pytest.approx(0.0))

    def test_nonincreasing(self):
        rng = np.random.default_rng(13)
        for trial in range(5):
            m = fm(rng.uniform(0, 10, size=(20, 3)))
            curve = elbow_curve(m, range(1, 10), seed=trial)
            inertias = [v for _, v in curve.points]
            assert all(a >= b - 1e-9 for a, b in zip(inertias, inertias[1:]))

    def test_six_blobs_knee(self):
        rng = np.random.default_rng(60)
        # equidistant centers (scaled simplex): inertia declines ~linearly to
        # k=6, then flatlines, so the second difference peaks exactly at 6
        centers = 100.0 * np.eye(6)
        rows = np.vstack([c + rng.normal(0, 0.5, size=(5, 6)) for c in centers])
        curve = elbow_curve(fm(rows), range(1, 11), seed=0)
        assert curve.knee == 6

    def test_out_of_range(self):
        m = fm([[0.0], [1.0]])
        with pytest.raises(InvalidK):
            elbow_curve(m, range(1, 9), seed=0)


class TestWard:
    def test_hand_computed_merge_sequence(self):
        m = fm([0.0, 0.1, 10.0, 10.1])
        res = ward_cluster(m, k=2)
        assert partition_sets(res.labels) == {frozenset({0, 1}), frozenset({2, 3})}
        heights = [h for _, _, h in res.merge_history]
        assert heights[0] == pytest.approx(0.005)
        assert heights[1] == pytest.approx(0.005)

    def test_exact_tie_breaks_on_smallest_pair(self):
        res = ward_cluster(fm([0.0, 1.0, 10.0, 11.0]), k=2)
        # both candidate merges cost exactly 0.5; the (0, 1) pair wins
        assert res.merge_history[0][:2] == (0, 1)
        assert res.merge_history[1][:2] == (2, 3)

    def test_k_equals_n(self):
        m = fm([[0.0], [2.0], [5.0]])
        res = ward_cluster(m, k=3)
        assert res.merge_history == ()
        assert sorted(res.labels.tolist()) == [0, 1, 2]

    def test_duplicates_merge_first_at_zero(self):
        m = fm([[5.0], [1.0], [5.0], [9.0]])
        res = ward_cluster(m, k=1)
        a, b, h = res.merge_history[0]
        assert (a, b) == (0, 2)
        assert h == 0.0

    def test_heights_nondecreasing_random(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            m = fm(rng.uniform(0, 10, size=(12, 3)))
            res = ward_cluster(m, k=1)
            heights = [h for _, _, h in res.merge_history]
            assert all(a <= b + 1e-12 for a, b in zip(heights, heights[1:]))

    def test_against_scipy_linkage(self):
        rng = np.random.default_rng(8)
        rows = rng.uniform(0, 10, size=(10, 4))
        res = ward_cluster(fm(rows), k=1)
        ref = linkage(rows, method="ward")
        mine = np.array([h for _, _, h in res.merge_history])
        # scipy reports sqrt(2 * variance-increase)
        np.testing.assert_allclose(np.sqrt(2.0 * mine), ref[:, 2], rtol=1e-9)
        # merge membership sequence agrees (same ids under the same convention)
        assert [tuple(sorted(m[:2])) for m in res.merge_history] == [
            (int(a), int(b)) for a, b in np.sort(ref[:, :2].astype(int), axis=1)
        ]

    def test_ward_label_convention(self):
        m = fm([[0.0], [10.0], [0.2], [10.2]])
        res = ward_cluster(m, k=2)
        # cluster containing row 0 gets id 0
        assert res.labels[0] == 0
        assert res.labels[1] == 1

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            ward_cluster(fm([[0.0], [1.0]]), k=5)


class TestSilhouette:
    def test_two_separated_pairs(self):
        rows = np.array([[0.0, 0.0], [0.0, 0.01], [100.0, 0.0], [100.0, 0.01]])
        s = silhouette(fm(rows), [0, 0, 1, 1])
        assert s > 0.99

    def test_all_identical_points(self):
        rows = np.zeros((4, 2))
        assert silhouette(fm(rows), [0, 0, 1, 1]) == 0.0

    def test_singletons_contribute_zero(self):
        rows = np.array([[0.0], [10.0], [10.1]])
        s = silhouette(fm(rows), [0, 1, 1])
        oracle = silhouette_oracle(rows, [0, 1, 1])
        assert s == pytest.approx(oracle, abs=1e-12)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            rows = rng.uniform(0, 10, size=(10, 3))
            labels = rng.integers(0, 3, size=10)
            if len(set(labels.tolist())) < 2:
                continue
            assert silhouette(fm(rows), labels) == pytest.approx(
                silhouette_oracle(rows, labels), abs=1e-12
            )

    def test_single_cluster_undefined(self):
        with pytest.raises(UndefinedScore):
            silhouette(fm([[0.0], [1.0]]), [0, 0])


class TestDaviesBouldin:
    def test_two_singletons(self):
        assert davies_bouldin(fm([[0.0], [4.0]]), [0, 1]) == 0.0

    def test_closed_form_half(self):
        rows = np.array([[-1.0], [1.0], [3.0], [5.0]])
        assert davies_bouldin(fm(rows), [0, 0, 1, 1]) == pytest.approx(0.5)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            rows = rng.uniform(0, 10, size=(12, 3))
            labels = rng.integers(0, 4, size=12)
            if len(set(labels.tolist())) < 2:
                continue
            assert davies_bouldin(fm(rows), labels) == pytest.approx(
                davies_bouldin_oracle(rows, labels), abs=1e-12
            )

    def test_coincident_centroids(self):
        rows = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
        with pytest.raises(UndefinedScore):
            davies_bouldin(fm(rows), [0, 0, 1, 1])

    def test_single_cluster_undefined(self):
        with pytest.raises(UndefinedScore):
            davies_bouldin(fm([[0.0], [1.0]]), [0, 0])


class TestScoreInvariances:
    def test_translation_and_scale(self):
        rng = np.random.default_rng(15)
        rows = rng.uniform(0, 10, size=(12, 3))
        labels = rng.integers(0, 3, size=12)
        if len(set(labels.tolist())) < 2:
            labels[0] = (labels[0] + 1) % 3
        base = evaluate(fm(rows), labels)
        shifted = evaluate(fm(rows + 42.0), labels)
        scaled = evaluate(fm(rows * 3.5), labels)
        assert base.silhouette == pytest.approx(shifted.silhouette, abs=1e-9)
        assert base.davies_bouldin == pytest.approx(shifted.davies_bouldin, abs=1e-9)
        assert base.silhouette == pytest.approx(scaled.silhouette, abs=1e-9)
        assert base.davies_bouldin == pytest.approx(scaled.davies_bouldin, abs=1e-9)

    def test_method_enum_recorded(self):
        m = fm([[0.0], [1.0], [5.0]])
        assert kmeans(m, 2, seed=0).method is Method.KMEANS
        assert ward_cluster(m, 2).method is Method.WARD

import math

import numpy as np
import pytest

from oracles import component_count, homology_oracle
from trendshape.dataset import SyntheticSpec, generate_synthetic
from trendshape.errors import EmbeddingError, EmptyInput, InvalidFiltration
from trendshape.topology import (
    Filtration,
    PersistenceDiagram,
    PointCloud,
    TdaParams,
    TdaStrategy,
    barcode,
    cloud_diameter,
    compute_diagrams,
    delay_embed,
    enclosing_radius,
    feature_matrix,
    landscape,
    persistent_homology,
    rips_filtration,
)
from test_dataset import series

SQRT2 = math.sqrt(2.0)


def cloud(points):
    return PointCloud(points=np.asarray(points, dtype=float), source_keyword="test")


def unit_square():
    return cloud([[0, 0], [1, 0], [0, 1], [1, 1]])


def diagrams_as_sets(dgms):
    return {
        d.dimension: (
            sorted(map(tuple, np.round(d.pairs, 9).tolist())),
            sorted(np.round(d.essential_births, 9).tolist()),
        )
        for d in dgms
    }


class TestDelayEmbed:
    def test_paper_defaults_count(self):
        ts = generate_synthetic(SyntheticSpec(noise_sigma=5.0), 262, seed=0)
        pc = delay_embed(ts, d=6, tau=3)
        assert pc.points.shape == (247, 6)

    def test_identity_embedding(self):
        ts = series("x", [4.0, 8.0, 15.0])
        pc = delay_embed(ts, d=1, tau=3)
        assert pc.points.tolist() == [[4.0], [8.0], [15.0]]

    def test_hand_unrolled(self):
        ts = series("x", [1.0, 2.0, 3.0, 4.0])
        pc = delay_embed(ts, d=2, tau=1)
        assert pc.points.tolist() == [[1, 2], [2, 3], [3, 4]]

    def test_uses_raw_values(self):
        ts = series("x", [10.0, 90.0, 10.0, 90.0])
        pc = delay_embed(ts, d=2, tau=1)
        assert pc.points.max() == 90.0

    def test_too_short(self):
        ts = series("x", [1.0] * 10)
        with pytest.raises(EmbeddingError):
            delay_embed(ts, d=6, tau=3)


class TestRipsFiltration:
    def test_two_points(self):
        f = rips_filtration(cloud([[0.0], [1.0]]), max_dimension=2, max_radius=2.0)
        assert f.n_vertices == 2
        assert f.edges.tolist() == [[0, 1]]
        assert f.edge_diameters.tolist() == [1.0]
        assert len(f.triangles) == 0

    def test_unit_square(self):
        f = rips_filtration(unit_square(), max_dimension=2, max_radius=2.0)
        assert len(f.edges) == 6
        assert sorted(f.edge_diameters.tolist()) == pytest.approx([1, 1, 1, 1, SQRT2, SQRT2])
        assert len(f.triangles) == 4
        assert f.triangle_diameters.tolist() == pytest.approx([SQRT2] * 4)

    def test_radius_cap_excludes_all_pairs(self):
        f = rips_filtration(unit_square(), max_dimension=2, max_radius=0.5)
        assert len(f.edges) == 0
        assert len(f.triangles) == 0

    def test_simplices_global_order(self):
        f = rips_filtration(unit_square(), max_dimension=2, max_radius=2.0)
        simplices = f.simplices
        keys = [(diam, len(v), v) for v, diam in simplices]
        assert keys == sorted(keys)
        positions = {v: i for i, (v, _) in enumerate(simplices)}
        for verts, _ in simplices:
            if len(verts) > 1:
                for drop in range(len(verts)):
                    face = tuple(x for i, x in enumerate(verts) if i != drop)
                    assert positions[face] < positions[verts]

    def test_max_dimension_one(self):
        f = rips_filtration(unit_square(), max_dimension=1, max_radius=2.0)
        assert len(f.triangles) == 0
        assert len(f.edges) == 6

    def test_enclosing_radius_default(self):
        sq = unit_square()
        assert enclosing_radius(sq) == pytest.approx(SQRT2)
        f = rips_filtration(sq)
        assert f.max_radius == pytest.approx(SQRT2)
        assert cloud_diameter(sq) == pytest.approx(SQRT2)

    def test_empty_cloud(self):
        with pytest.raises(EmptyInput):
            rips_filtration(cloud(np.empty((0, 2))))


class TestPersistentHomology:
    def test_unit_square_exact(self):
        dgms = persistent_homology(rips_filtration(unit_square(), 2, 2.0))
        h0, h1 = dgms
        assert sorted(map(tuple, h0.pairs.tolist())) == [(0.0, 1.0)] * 3
        assert h0.essential == 1
        assert [tuple(p) for p in h1.pairs.tolist()] == [(1.0, SQRT2)]
        assert h1.essential == 0

    def test_two_points(self):
        dgms = persistent_homology(rips_filtration(cloud([[0.0], [1.0]]), 2, 3.0))
        assert dgms[0].pairs.tolist() == [[0.0, 1.0]]
        assert dgms[0].essential == 1
        assert len(dgms[1].pairs) == 0

    def test_matches_bruteforce_oracle_small_clouds(self):
        rng = np.random.default_rng(100)
        for trial in range(150):
            m = int(rng.integers(2, 7))
            dim = int(rng.integers(1, 4))
            pts = rng.uniform(0, 10, size=(m, dim))
            r = float(rng.uniform(2, 25))
            got = diagrams_as_sets(
                persistent_homology(rips_filtration(cloud(pts), 2, r))
            )
            want = homology_oracle(pts, r, 2)
            for d in (0, 1):
                assert got[d][0] == [tuple(p) for p in np.round(
                    np.asarray(want[d][0]).reshape(-1, 2), 9).tolist()], f"dim {d} pairs, trial {trial}"
                assert got[d][1] == list(np.round(want[d][1], 9)), f"dim {d} essentials, trial {trial}"

    def test_matches_bruteforce_oracle_medium_clouds(self):
        # larger clouds exercise long reduction cascades and the
        # clearing/apparent-pair interplay much harder than 6 points do
        rng = np.random.default_rng(321)
        for m in (25, 32, 40):
            pts = rng.uniform(0, 10, size=(m, 3))
            r = float(rng.uniform(4, 9))
            got = diagrams_as_sets(persistent_homology(rips_filtration(cloud(pts), 2, r)))
            want = homology_oracle(pts, r, 2)
            for d in (0, 1):
                assert got[d][0] == [
                    tuple(p)
                    for p in np.round(np.asarray(want[d][0]).reshape(-1, 2), 9).tolist()
                ]
                assert got[d][1] == list(np.round(want[d][1], 9))

    def test_alive_h0_matches_union_find(self):
        rng = np.random.default_rng(200)
        for _ in range(5):
            pts = rng.uniform(0, 10, size=(20, 3))
            dia = cloud_diameter(cloud(pts))
            dgms = persistent_homology(rips_filtration(cloud(pts), 2, dia))
            h0 = dgms[0]
            for r in rng.uniform(0.0, dia, size=10):
                alive = h0.essential + int(np.count_nonzero(h0.pairs[:, 1] > r))
                assert alive == component_count(pts, r)

    def test_h0_accounts_for_every_vertex(self):
        rng = np.random.default_rng(33)
        pts = rng.uniform(0, 5, size=(25, 4))
        h0 = persistent_homology(rips_filtration(cloud(pts)))[0]
        assert len(h0.pairs) + h0.essential == 25

    def test_rips_monotonicity(self):
        rng = np.random.default_rng(44)
        for _ in range(10):
            pts = rng.uniform(0, 10, size=(15, 2))
            r1 = float(rng.uniform(2, 6))
            r2 = r1 + float(rng.uniform(1, 8))
            small = diagrams_as_sets(persistent_homology(rips_filtration(cloud(pts), 2, r1)))
            big = diagrams_as_sets(persistent_homology(rips_filtration(cloud(pts), 2, r2)))
            for d in (0, 1):
                remaining = list(big[d][0])
                for pair in small[d][0]:
                    assert pair in remaining
                    remaining.remove(pair)

    def test_stability_smoke(self):
        rng = np.random.default_rng(55)
        pts = rng.uniform(0, 10, size=(50, 3))
        eps = 1e-3
        noise = rng.normal(size=pts.shape)
        noise /= np.linalg.norm(noise, axis=1, keepdims=True)
        moved = pts + eps * noise
        cap = cloud_diameter(cloud(pts)) + 1.0
        a = persistent_homology(rips_filtration(cloud(pts), 2, cap))
        b = persistent_homology(rips_filtration(cloud(moved), 2, cap))
        for da, db in zip(a, b):
            assert len(da.pairs) == len(db.pairs)
            for col in (0, 1):
                assert np.max(np.abs(np.sort(da.pairs[:, col]) - np.sort(db.pairs[:, col]))) <= 2 * eps + 1e-12

    def test_circle_detection(self):
        rng = np.random.default_rng(77)
        theta = rng.uniform(0, 2 * np.pi, 100)
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
        pts += rng.normal(0, 0.05, size=pts.shape)
        h1 = persistent_homology(rips_filtration(cloud(pts)))[1]
        pers = np.sort(h1.persistences)[::-1]
        assert pers.size >= 1
        assert pers[0] >= 3.0 * (pers[1] if pers.size > 1 else 0.0)

    def test_face_ordering_violation(self):
        bad = Filtration(
            n_vertices=3,
            edges=np.array([[0, 1], [0, 2], [1, 2]]),
            edge_diameters=np.array([1.0, 1.0, 2.0]),
            triangles=np.array([[0, 1, 2]]),
            triangle_diameters=np.array([1.5]),  # below its (1,2) face
            max_dimension=2,
            max_radius=3.0,
        )
        with pytest.raises(InvalidFiltration):
            persistent_homology(bad)

    def test_missing_face(self):
        bad = Filtration(
            n_vertices=3,
            edges=np.array([[0, 1], [0, 2]]),
            edge_diameters=np.array([1.0, 1.0]),
            triangles=np.array([[0, 1, 2]]),
            triangle_diameters=np.array([2.0]),
            max_dimension=2,
            max_radius=3.0,
        )
        with pytest.raises(InvalidFiltration):
            persistent_homology(bad)


class TestBarcode:
    def test_single_pair(self):
        pd = PersistenceDiagram(1, np.array([[1.0, SQRT2]]), np.empty(0), max_radius=2.0)
        bars = barcode(pd)
        assert len(bars) == 1
        assert bars[0].birth == 1.0
        assert bars[0].death == pytest.approx(1.4142, abs=1e-4)
        assert not bars[0].open

    def test_empty(self):
        pd = PersistenceDiagram(1, np.empty((0, 2)), np.empty(0), max_radius=2.0)
        assert barcode(pd) == ()

    def test_essential_open_bar(self):
        pd = PersistenceDiagram(0, np.empty((0, 2)), np.zeros(1), max_radius=5.0)
        bars = barcode(pd)
        assert bars[0].birth == 0.0
        assert bars[0].death == 5.0
        assert bars[0].open

    def test_sorted_by_descending_persistence(self):
        pd = PersistenceDiagram(
            1, np.array([[0.0, 1.0], [0.0, 3.0], [1.0, 1.5]]), np.empty(0), 4.0
        )
        spans = [b.death - b.birth for b in barcode(pd)]
        assert spans == sorted(spans, reverse=True)


class TestLandscape:
    def test_single_tent_exact(self):
        pd = PersistenceDiagram(1, np.array([[0.0, 2.0]]), np.empty(0), 2.0)
        ls = landscape(pd, k_max=2, grid_size=3, t_max=2.0)
        assert ls.grid.tolist() == [0.0, 1.0, 2.0]
        assert ls.values[0].tolist() == [0.0, 1.0, 0.0]
        assert ls.values[1].tolist() == [0.0, 0.0, 0.0]

    def test_second_level(self):
        pd = PersistenceDiagram(
            1, np.array([[0.0, 2.0], [0.5, 1.5]]), np.empty(0), 2.0
        )
        ls = landscape(pd, k_max=2, grid_size=3, t_max=2.0)
        assert ls.values[0][1] == 1.0
        assert ls.values[1][1] == 0.5

    def test_empty_diagram(self):
        pd = PersistenceDiagram(1, np.empty((0, 2)), np.empty(0), 2.0)
        ls = landscape(pd, k_max=3, grid_size=10, t_max=2.0)
        assert np.all(ls.values == 0.0)

    def test_level_ordering_random(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            m = int(rng.integers(0, 12))
            births = rng.uniform(0, 5, m)
            deaths = births + rng.uniform(0.01, 5, m)
            pd = PersistenceDiagram(1, np.column_stack([births, deaths]), np.empty(0), 10.0)
            ls = landscape(pd, k_max=4, grid_size=25, t_max=10.0)
            assert np.all(ls.values >= 0.0)
            assert np.all(np.diff(ls.values, axis=0) <= 1e-12)

    def test_essential_classes_excluded(self):
        pd = PersistenceDiagram(0, np.empty((0, 2)), np.zeros(3), 2.0)
        ls = landscape(pd, k_max=2, grid_size=5, t_max=2.0)
        assert np.all(ls.values == 0.0)


class TestFeatureMatrix:
    def small_dataset(self, n=2, length=48):
        from trendshape.dataset import Dataset

        specs = [
            SyntheticSpec(keyword=f"s{i}", seasonal_amplitude=20.0, seasonal_period=12.0, noise_sigma=2.0)
            for i in range(n)
        ]
        return Dataset.from_series(
            [generate_synthetic(sp, length, seed=9 + i) for i, sp in enumerate(specs)]
        )

    PARAMS = TdaParams(embed_dim=3, embed_tau=2, k_max=5, grid_size=100)

    def test_h1_only_row_shape(self):
        d = self.small_dataset(n=2)
        m = feature_matrix(d, TdaStrategy.H1_ONLY, self.PARAMS)
        assert m.rows.shape == (2, 500)

    def test_filtered_concatenates(self):
        d = self.small_dataset(n=2)
        m = feature_matrix(d, TdaStrategy.H0_H1_FILTERED, self.PARAMS)
        assert m.rows.shape == (2, 1000)

    def test_identical_series_identical_rows(self):
        from trendshape.dataset import Dataset, TimeSeries

        base = generate_synthetic(
            SyntheticSpec(seasonal_amplitude=25.0, noise_sigma=3.0), 60, seed=4
        )
        twin = TimeSeries("copy", base.timestamps, base.values)
        d = Dataset.from_series([base, twin])
        m = feature_matrix(d, TdaStrategy.H1_ONLY, self.PARAMS)
        assert np.array_equal(m.rows[0], m.rows[1])

    def test_deterministic(self):
        d = self.small_dataset(n=3)
        a = feature_matrix(d, TdaStrategy.H0_H1_FILTERED, self.PARAMS)
        b = feature_matrix(d, TdaStrategy.H0_H1_FILTERED, self.PARAMS)
        assert np.array_equal(a.rows, b.rows)
        assert a.t_max == b.t_max

    def test_persistence_floor_drops_noise(self):
        d = self.small_dataset(n=2)
        dgms = compute_diagrams(d, self.PARAMS)
        from trendshape.topology import filter_by_persistence

        h0 = dgms[0][0]
        kept = filter_by_persistence(h0, 0.10)
        if len(h0.pairs):
            floor = 0.10 * h0.persistences.max()
            assert np.all(kept.persistences >= floor)
            assert len(kept.pairs) <= len(h0.pairs)

    def test_shared_grid(self):
        d = self.small_dataset(n=3)
        m = feature_matrix(d, TdaStrategy.H1_ONLY, self.PARAMS)
        deaths = [
            pd.pairs[:, 1].max()
            for group in compute_diagrams(d, self.PARAMS)
            for pd in group[1:]
            if len(pd.pairs)
        ]
        assert m.t_max == pytest.approx(max(deaths))

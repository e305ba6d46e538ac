import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import naive_rips_diagrams

from fpd.datagen import ShapeSpec, TransformSpec, generate, transform
from fpd.rips import (
    PointCloud,
    SimplexBudgetExceeded,
    UnionFind,
    build_rips,
    persistence,
    persistence_pairs,
    read_point_cloud,
    rips_diagrams,
    write_point_cloud,
)


def as_sorted(d):
    return sorted(map(tuple, d.points.tolist()))


def assert_same_pairs(got, want, tol=1e-12):
    assert len(got) == len(want), (got, want)
    for (b1, d1), (b2, d2) in zip(got, want):
        assert b1 == pytest.approx(b2, abs=tol)
        if math.isinf(d2):
            assert math.isinf(d1)
        else:
            assert d1 == pytest.approx(d2, abs=tol)


def test_union_find():
    uf = UnionFind(4)
    uf.union(0, 1)
    uf.union(2, 3)
    assert uf.find(0) == uf.find(1) and uf.find(0) != uf.find(2)
    uf.union(1, 3)
    assert len({uf.find(i) for i in range(4)}) == 1


def test_unit_square():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    h0, h1 = rips_diagrams(PointCloud(sq), max_degree=1)
    assert as_sorted(h0) == [(0, 1), (0, 1), (0, 1), (0, math.inf)]
    np.testing.assert_allclose(h1.points, [[1.0, math.sqrt(2)]], rtol=1e-15)


def test_two_points():
    h0 = rips_diagrams(PointCloud([[0, 0], [3, 4]]), max_degree=0)[0]
    assert as_sorted(h0) == [(0, 5.0), (0, math.inf)]


def test_single_point():
    h0, h1 = rips_diagrams(PointCloud([[1.0, 2.0]]), max_degree=1)
    assert as_sorted(h0) == [(0, math.inf)]
    assert len(h1) == 0


def test_filtration_order_and_faces():
    f = build_rips(PointCloud(np.random.default_rng(0).uniform(size=(7, 2))), max_dim=2)
    seen = {}
    prev = (-1.0, -1)
    for s, e in f.simplices:
        key = (e, len(s) - 1)
        assert key >= prev
        prev = key
        for v in s:
            if len(s) > 1:
                face = tuple(x for x in s if x != v)
                assert seen[face] <= e
        seen[s] = e
    assert len(f) == 7 + 21 + 35


def test_ring_has_one_dominant_hole():
    pc = generate(ShapeSpec("ring", 120, 0.01, seed=3))
    h1 = rips_diagrams(pc, max_degree=1)[1]
    pers = np.sort(h1.persistence)[::-1]
    assert pers[0] > 0.4
    assert pers[1] < 0.25 * pers[0]


def test_threshold_limits_deaths():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    h0, h1 = rips_diagrams(PointCloud(sq), max_degree=1, threshold=1.2)
    assert as_sorted(h0) == [(0, 1), (0, 1), (0, 1), (0, math.inf)]
    assert h1.points.tolist() == [[1.0, math.inf]]


def test_budget_exceeded():
    pc = PointCloud(np.random.default_rng(1).uniform(size=(40, 2)))
    with pytest.raises(SimplexBudgetExceeded):
        build_rips(pc, max_dim=2, max_simplices=500)


def test_degree_needs_higher_simplices():
    f = build_rips(PointCloud([[0, 0], [1, 0]]), max_dim=1)
    with pytest.raises(ValueError):
        persistence(f, 1)


def test_raw_pairs_include_zero_persistence():
    f = build_rips(PointCloud(np.random.default_rng(2).uniform(size=(8, 2))), max_dim=2)
    raw = persistence_pairs(f, 1)
    kept = persistence(f, 1)
    assert len(raw) >= len(kept)
    # every edge is paired or essential in degree 0 or 1
    n_edges = len(f.simplices_by_dim[1])
    h0_deaths = len(persistence_pairs(f, 0)) - 1
    assert h0_deaths + len(raw) == n_edges


@pytest.mark.parametrize("seed", range(12))
def test_matches_boundary_reduction_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    dim = int(rng.integers(2, 4))
    P = rng.uniform(size=(n, dim))
    max_degree = 2 if dim == 3 else 1
    got = rips_diagrams(PointCloud(P), max_degree=max_degree)
    want = naive_rips_diagrams(P, max_degree)
    for g, w in zip(got, want):
        assert_same_pairs(as_sorted(g), w)


@given(st.integers(3, 7), st.integers(0, 10_000), st.floats(0.3, 2.0))
def test_matches_oracle_with_threshold(n, seed, thr):
    P = np.random.default_rng(seed).uniform(size=(n, 2))
    got = rips_diagrams(PointCloud(P), max_degree=1, threshold=thr)
    want = naive_rips_diagrams(P, 1, threshold=thr)
    for g, w in zip(got, want):
        assert_same_pairs(as_sorted(g), w)


def test_oracle_on_lattice_cell_with_ties():
    # many equal distances: order of ties must not change the diagram
    P = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)] + [[0.5, 0.5, 0.5]], float)
    got = rips_diagrams(PointCloud(P), max_degree=2)
    want = naive_rips_diagrams(P, 2)
    for g, w in zip(got, want):
        assert_same_pairs(as_sorted(g), w)


@pytest.mark.parametrize("t", [
    TransformSpec("rotate", "z", 1.234),
    TransformSpec("rotate", "z", math.pi),
    TransformSpec("reflect", "x"),
    TransformSpec("translate", vector=(3.5, -2.0)),
])
def test_rigid_motion_invariance(t):
    pc = generate(ShapeSpec("figure_eight", 80, 0.01, seed=4))
    a = rips_diagrams(pc, max_degree=1)
    b = rips_diagrams(transform(pc, t), max_degree=1)
    for da, db in zip(a, b):
        assert len(da) == len(db)
        pa, pb = np.array(as_sorted(da)), np.array(as_sorted(db))
        fin = np.isfinite(pa)
        assert np.array_equal(fin, np.isfinite(pb))
        np.testing.assert_allclose(pa[fin], pb[fin], atol=1e-7)


def test_point_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(np.empty((0, 2)))
    with pytest.raises(ValueError):
        PointCloud([[0, np.nan]])


def test_point_cloud_io(tmp_path):
    pc = PointCloud(np.random.default_rng(0).normal(size=(10, 3)))
    write_point_cloud(pc, tmp_path / "p.csv")
    back = read_point_cloud(tmp_path / "p.csv")
    assert np.array_equal(back.points, pc.points)

    (tmp_path / "h.csv").write_text("x,y\n0,0\n1,2\n")
    assert read_point_cloud(tmp_path / "h.csv").points.tolist() == [[0, 0], [1, 2]]

    (tmp_path / "a.xyz").write_text("2\ncomment\nC 0 0 0\nFe 1 1 1\n")
    assert read_point_cloud(tmp_path / "a.xyz").points.tolist() == [[0, 0, 0], [1, 1, 1]]

    (tmp_path / "bad.csv").write_text("0,0\n1\n")
    with pytest.raises(ValueError):
        read_point_cloud(tmp_path / "bad.csv")

import csv
import json

import numpy as np
import pytest

from fpd.experiments import lattice_corpus, run_experiment


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_exemplar_outputs_and_reproducibility(tmp_path):
    a = run_experiment("exemplar", tmp_path / "a", n_points=60, max_iter=5)
    b = run_experiment("exemplar", tmp_path / "b", n_points=60, max_iter=5)
    table = read_csv(tmp_path / "a" / "memberships.csv")
    assert table[0] == ["diagram", "cluster_0", "cluster_1", "cluster_2"]
    assert len(table) == 10
    np.testing.assert_allclose(np.array(a.summary["memberships"]), np.array(b.summary["memberships"]), atol=1e-9)
    assert (tmp_path / "a" / "centres" / "centre_2.csv").exists()
    assert (tmp_path / "a" / "centres.svg").exists()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert set(rep["timings"]) >= {"ph", "distances", "matching", "means", "total"}


def test_small_convergence_grid(tmp_path):
    res = run_experiment("convergence", tmp_path, n_diagrams=(12,), n_points=(6, 9), seeds=(0, 1))
    assert res.summary["runs"] == 4
    grid = read_csv(tmp_path / "fcm_iterations.csv")
    assert grid[0] == ["diagrams\\points", "6", "9"] and len(grid) == 2
    assert (tmp_path / "wfm_iterations.svg").exists()


def test_distances_subset(tmp_path):
    res = run_experiment("distances", tmp_path, kinds=("w2", "sw"), n_points=50, max_iter=3, timing_repeats=1)
    assert set(res.summary["kinds"]) == {"w2", "sw"}
    rows = read_csv(tmp_path / "distances.csv")
    assert [r[0] for r in rows[1:]] == ["w2", "sw"]


def test_lattice_corpus_layout():
    clouds, names, ref = lattice_corpus("rotate", cells=1)
    assert names == ["bcc-1", "bcc-2", "bcc-3", "fcc-1", "fcc-2", "fcc-3"]
    assert ref == [0, 0, 0, 1, 1, 1]
    np.testing.assert_allclose(clouds[1].points[:, 1:], -clouds[0].points[:, 1:], atol=1e-12)
    clouds, _, _ = lattice_corpus("translate", cells=1, a=2.0)
    np.testing.assert_allclose(clouds[2].points[:, 2], clouds[0].points[:, 2] - 2.0)
    with pytest.raises(ValueError):
        lattice_corpus("shear")


def test_unknown_experiment(tmp_path):
    with pytest.raises(ValueError):
        run_experiment("nope", tmp_path)

import numpy as np
import pytest
from conftest import random_points
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_assignment, brute_augmented, brute_bottleneck

from fpd.diagram import PersistenceDiagram
from fpd.matching import (
    augment,
    augmented_cost,
    bottleneck_feasible,
    bottleneck_search,
    hungarian,
)


def test_augmented_matrix_matches_entrywise_oracle(rng):
    X, Y = random_points(rng, 3), random_points(rng, 2)
    np.testing.assert_allclose(augmented_cost(X, Y), brute_augmented(X, Y), rtol=1e-15)


def test_augment_layout():
    a = augment(PersistenceDiagram(1, [(0, 2)]), PersistenceDiagram(1, [(0, 4), (1, 2)]))
    assert (a.n1, a.n2, a.size) == (1, 2, 3)
    np.testing.assert_allclose(a.matrix, [[4, 1, 2], [8, 0.5, 0], [8, 0.5, 0]])


def test_hungarian_small_known():
    C = np.array([[4, 1, 3], [2, 0, 5], [3, 2, 2]], dtype=float)
    m = hungarian(C)
    assert m.cost == 5.0
    assert sorted(m.pairs.tolist()) == [0, 1, 2]


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_hungarian_equals_permutation_minimum(n, seed):
    C = np.random.default_rng(seed).uniform(0, 10, (n, n))
    assert hungarian(C).cost == pytest.approx(brute_assignment(C), rel=1e-12)


def test_hungarian_empty_and_validation():
    assert hungarian(np.zeros((0, 0))).cost == 0.0
    with pytest.raises(ValueError, match="square"):
        hungarian(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="finite"):
        hungarian(np.array([[np.inf]]))
    with pytest.raises(ValueError, match="non-negative"):
        hungarian(np.array([[-1.0]]))


def test_matching_partners():
    a = PersistenceDiagram(1, [(0, 2), (0, 0.1)])
    b = PersistenceDiagram(1, [(0, 2.2), (5, 9)])
    m = hungarian(augment(a, b))
    assert m.partner(0) == 0
    assert m.partner(1) == -1
    assert m.real_partners().tolist() == [0, -1]
    assert m.unmatched_columns().tolist() == [1]


def test_infinite_points_refused():
    a = PersistenceDiagram(0, [(0, np.inf)])
    with pytest.raises(ValueError, match="cap"):
        augment(a, a)


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 2**31))
def test_bottleneck_equals_exhaustive(n1, n2, seed):
    rng = np.random.default_rng(seed)
    X, Y = random_points(rng, n1), random_points(rng, n2)
    assert bottleneck_search(X, Y) == brute_bottleneck(X, Y)


def test_bottleneck_feasibility_threshold():
    X = np.array([[0.0, 2.0]])
    Y = np.array([[0.25, 2.25]])
    assert bottleneck_feasible(X, Y, 0.25)
    assert not bottleneck_feasible(X, Y, 0.2499)
    assert bottleneck_search(X, Y) == 0.25

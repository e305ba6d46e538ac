import math

import numpy as np
import pytest
from conftest import random_points
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_bottleneck, brute_w2
from scipy.integrate import dblquad

from fpd.diagram import PersistenceDiagram
from fpd.distances import (
    DistanceKind,
    bottleneck,
    heat_kernel,
    heat_kernel_distance,
    image_bounds,
    make_distance,
    parse_kind,
    persistence_image,
    pi_l2,
    sliced_wasserstein,
    wasserstein2,
)

KINDS = ["w2", "bottleneck", "sw", "pi", "heat"]


def D(*pts):
    return PersistenceDiagram(1, np.array(pts, dtype=float).reshape(-1, 2))


def test_w2_hand_values():
    # pairing costs 2^2 = 4; sending both to the diagonal costs 2 + 8
    assert wasserstein2(D((0, 2)), D((0, 4))) == 2.0
    assert wasserstein2(D((0, 1)), D()) == pytest.approx(math.sqrt(0.5))
    assert wasserstein2(D(), D()) == 0.0


def test_w2_prefers_diagonal_when_cheaper():
    # far-apart short bars: both to the diagonal (0.5 + 0.5) beats pairing (50)
    assert wasserstein2(D((0, 1)), D((5, 6))) == pytest.approx(1.0)


def test_bottleneck_hand_values():
    assert bottleneck(D((0, 2)), D((0, 4))) == 2.0
    assert bottleneck(D((0, 2)), D((0.1, 2.1))) == pytest.approx(0.1)
    assert bottleneck(D((0, 2)), D()) == 1.0


def test_sliced_wasserstein_single_point_closed_form():
    # one point (0, 2) against the empty diagram: the point and its diagonal
    # projection (1, 1) differ by (-1, 1), projected length |sin t - cos t|
    k = 50
    want = sum(abs(math.sin(t) - math.cos(t)) for t in (-math.pi / 2 + math.pi * i / k for i in range(k))) / k
    assert sliced_wasserstein(D((0, 2)), D(), k) == pytest.approx(want, rel=1e-12)


def test_sliced_wasserstein_lower_bounds_w1_scale():
    rng = np.random.default_rng(3)
    for _ in range(20):
        X, Y = D(*random_points(rng, 5)), D(*random_points(rng, 4))
        # each 1-D projection is 1-Lipschitz, so SW <= sqrt(2) * W1 <= sqrt(2 n) * W2
        n = len(X) + len(Y)
        assert sliced_wasserstein(X, Y) <= math.sqrt(2 * n) * wasserstein2(X, Y) + 1e-12


def test_persistence_image_pixel_matches_numerical_integral():
    d = D((0.2, 0.9))
    bounds = image_bounds([d, D((0.0, 0.5))], bandwidth=0.15)
    bmin, bmax, pmin, pmax, max_pers, bw = bounds
    res = 6
    img = persistence_image(d, res, bounds=bounds).reshape(res, res)
    xs, ys = np.linspace(bmin, bmax, res + 1), np.linspace(pmin, pmax, res + 1)
    b0, p0 = 0.2, 0.7
    w = p0 / max_pers

    def g(y, x):
        return w * math.exp(-((x - b0) ** 2 + (y - p0) ** 2) / (2 * bw ** 2)) / (2 * math.pi * bw ** 2)

    for i, j in [(0, 0), (2, 3), (4, 1), (5, 5)]:
        want, _ = dblquad(g, xs[j], xs[j + 1], ys[i], ys[i + 1], epsabs=1e-13)
        assert img[i, j] == pytest.approx(want, abs=1e-10)


def test_persistence_image_total_mass_inside_box():
    # a point well inside the box keeps all of its weighted mass
    d = D((0.3, 0.6))
    bounds = image_bounds([d, D((0.0, 2.0)), D((1.0, 1.2))], bandwidth=0.01)
    img = persistence_image(d, 40, bounds=bounds)
    assert img.sum() == pytest.approx(0.3 / 2.0, rel=1e-9)


def test_image_bounds_need_points():
    with pytest.raises(ValueError):
        image_bounds([D(), D()])


def test_heat_kernel_closed_form():
    t = 0.3
    x, y = np.array([0.1, 0.8]), np.array([0.3, 0.6])
    ybar = y[::-1]
    want = (math.exp(-np.sum((x - y) ** 2) / (8 * t)) - math.exp(-np.sum((x - ybar) ** 2) / (8 * t))) / (8 * math.pi * t)
    assert heat_kernel(D(x), D(y), t) == pytest.approx(want, rel=1e-14)
    assert heat_kernel(D(), D(y), t) == 0.0
    with pytest.raises(ValueError):
        heat_kernel(D(x), D(y), 0.0)


def test_heat_kernel_distance_zero_for_identical():
    d = D((0.1, 0.8), (0.2, 0.4))
    assert heat_kernel_distance(d, d, 0.05) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_metric_properties(kind):
    rng = np.random.default_rng(7)
    corpus = [D(*random_points(rng, int(rng.integers(0, 6)))) for _ in range(8)]
    corpus.append(D((0.1, 0.9)))
    dist = make_distance(kind, corpus=corpus)
    for a in corpus:
        assert dist(a, a) == pytest.approx(0.0, abs=1e-12)
    for i in range(len(corpus)):
        for j in range(len(corpus)):
            a, b = corpus[i], corpus[j]
            assert dist(a, b) >= 0
            assert dist(a, b) == pytest.approx(dist(b, a), abs=1e-12)
            for c in corpus[:4]:
                assert dist(a, b) <= dist(a, c) + dist(c, b) + 1e-9


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 2**31))
def test_w2_and_bottleneck_equal_exhaustive(n1, n2, seed):
    rng = np.random.default_rng(seed)
    X, Y = random_points(rng, n1), random_points(rng, n2)
    assert wasserstein2(D(*X), D(*Y)) == pytest.approx(brute_w2(X, Y), rel=1e-12, abs=1e-15)
    assert bottleneck(D(*X), D(*Y)) == brute_bottleneck(X, Y)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_bottleneck_at_most_w2(n, seed):
    # the largest pair cost in L-inf is at most its L2 cost, which is bounded by W2
    rng = np.random.default_rng(seed)
    X, Y = D(*random_points(rng, n)), D(*random_points(rng, n))
    assert bottleneck(X, Y) <= wasserstein2(X, Y) + 1e-12


def test_distance_kind_parsing():
    assert DistanceKind("w2").name == "wasserstein2"
    assert DistanceKind("sw").short == "sw"
    assert parse_kind("heat", t=0.5).params == {"t": 0.5}
    assert DistanceKind("pi", {"bandwidth": None}).params == {}
    with pytest.raises(ValueError):
        DistanceKind("cosine")
    with pytest.raises(ValueError):
        DistanceKind("sw", {"directions": 0})


def test_make_distance_pi_needs_corpus():
    with pytest.raises(ValueError):
        make_distance("pi")


def test_pi_l2_explicit_corpus():
    a, b = D((0.1, 0.5)), D((0.1, 0.9))
    assert pi_l2(a, b, corpus=[a, b]) > 0
    assert pi_l2(a, a, corpus=[a, b]) == 0.0


def test_distances_refuse_uncapped():
    inf = PersistenceDiagram(0, [(0, math.inf)])
    for kind in ["w2", "sw", "bottleneck"]:
        with pytest.raises(ValueError):
            make_distance(kind)(inf, inf)

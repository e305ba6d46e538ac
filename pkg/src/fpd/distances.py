"""Distances between persistence diagrams.

``wasserstein2`` and ``bottleneck`` are exact optimal-matching distances.
The sliced Wasserstein, persistence-image and heat-kernel distances are
cheaper surrogates; their corpus-dependent defaults are resolved by
:func:`make_distance`.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .diagram import PersistenceDiagram
from .matching import augment, bottleneck_search, hungarian

__all__ = [
    "DistanceKind",
    "wasserstein2",
    "bottleneck",
    "sliced_wasserstein",
    "persistence_image",
    "image_bounds",
    "pi_l2",
    "heat_kernel",
    "heat_kernel_distance",
    "make_distance",
    "parse_kind",
]

KIND_ALIASES = {
    "w2": "wasserstein2",
    "wasserstein2": "wasserstein2",
    "bottleneck": "bottleneck",
    "sw": "sliced_wasserstein",
    "sliced_wasserstein": "sliced_wasserstein",
    "pi": "persistence_image_l2",
    "persistence_image_l2": "persistence_image_l2",
    "heat": "heat_kernel",
    "heat_kernel": "heat_kernel",
}
SHORT_NAMES = {"wasserstein2": "w2", "bottleneck": "bottleneck", "sliced_wasserstein": "sw",
               "persistence_image_l2": "pi", "heat_kernel": "heat"}


@dataclass(frozen=True)
class DistanceKind:
    """A distance and its parameters; ``None`` parameters take corpus defaults."""

    name: str = "wasserstein2"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        name = KIND_ALIASES.get(self.name)
        if name is None:
            raise ValueError(f"unknown distance {self.name!r}; choose from {sorted(set(KIND_ALIASES))}")
        for k, v in self.params.items():
            if v is not None and not v > 0:
                raise ValueError(f"distance parameter {k} must be positive, got {v}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "params", {k: v for k, v in self.params.items() if v is not None})

    @property
    def short(self) -> str:
        return SHORT_NAMES[self.name]

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def parse_kind(name: str, **params) -> DistanceKind:
    return DistanceKind(name, params)


def _points(d) -> np.ndarray:
    if isinstance(d, PersistenceDiagram):
        d.require_finite("diagram distances")
        return d.points
    pts = np.asarray(d, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("diagram distances need capped diagrams")
    return pts


def wasserstein2(d1, d2) -> float:
    """2-Wasserstein distance with squared-L2 ground cost."""
    return math.sqrt(hungarian(augment(d1, d2)).cost)


def bottleneck(d1, d2) -> float:
    return bottleneck_search(d1, d2)


@functools.lru_cache(maxsize=16)
def _directions(k: int) -> np.ndarray:
    theta = -np.pi / 2 + np.pi * np.arange(k) / k
    dirs = np.stack([np.cos(theta), np.sin(theta)])
    dirs.setflags(write=False)
    return dirs


def sliced_wasserstein(d1, d2, directions: int = 50) -> float:
    """Average 1-D W1 over evenly spaced directions in [-pi/2, pi/2)."""
    if int(directions) < 1:
        raise ValueError("directions must be >= 1")
    X, Y = _points(d1), _points(d2)
    nx, ny = len(X), len(Y)
    if not nx + ny:
        return 0.0
    # row 0: X then diagonal projections of Y; row 1: Y then those of X
    S = np.empty((2, nx + ny, 2))
    S[0, :nx] = X
    S[1, :ny] = Y
    S[0, nx:] = ((Y[:, 0] + Y[:, 1]) / 2.0)[:, None]
    S[1, ny:] = ((X[:, 0] + X[:, 1]) / 2.0)[:, None]
    P = np.sort(S @ _directions(int(directions)), axis=1)
    return float(np.abs(P[0] - P[1]).sum() / P.shape[2])


def image_bounds(diagrams: Sequence, bandwidth: float | None = None):
    """Corpus box (bmin, bmax, pmin, pmax, max_persistence, bandwidth) in birth/persistence coordinates.

    The box is padded by one bandwidth on every side; ``bandwidth`` defaults
    to a tenth of the corpus persistence range.
    """
    pts = [_points(d) for d in diagrams]
    pts = [p for p in pts if len(p)]
    if not pts:
        raise ValueError("persistence images need a corpus with at least one off-diagonal point")
    P = np.concatenate(pts)
    b, pers = P[:, 0], P[:, 1] - P[:, 0]
    if bandwidth is None:
        bandwidth = _default_bandwidth(pers)
    pad = bandwidth
    return (float(b.min() - pad), float(b.max() + pad), float(pers.min() - pad),
            float(pers.max() + pad), float(pers.max()), float(bandwidth))


def _persistence_range(pers: np.ndarray) -> float:
    r = float(pers.max() - pers.min())
    if r <= 0:
        r = float(pers.max())
    return r if r > 0 else 1.0


def _default_bandwidth(pers: np.ndarray) -> float:
    return 0.1 * _persistence_range(pers)


def persistence_image(d, resolution: int = 20, bandwidth: float | None = None,
                      bounds=None) -> np.ndarray:
    """Flattened resolution x resolution persistence image.

    Each point contributes a Gaussian in (birth, persistence) coordinates,
    integrated exactly over every pixel and weighted by persistence divided
    by the corpus maximum persistence. ``bounds`` comes from
    :func:`image_bounds`; by default the diagram is its own corpus.
    """
    if int(resolution) < 1:
        raise ValueError("resolution must be >= 1")
    X = _points(d)
    if bounds is None:
        if not len(X):
            return np.zeros(resolution * resolution)
        bounds = image_bounds([X], bandwidth)
    bmin, bmax, pmin, pmax, max_pers, bw = bounds
    if bandwidth is not None:
        bw = bandwidth
    if not bw > 0:
        raise ValueError("bandwidth must be positive")
    img = np.zeros((resolution, resolution))
    if not len(X):
        return img.ravel()
    xs = np.linspace(bmin, bmax, resolution + 1)
    ys = np.linspace(pmin, pmax, resolution + 1)
    b = X[:, 0]
    pers = X[:, 1] - X[:, 0]
    w = pers / max_pers if max_pers > 0 else np.zeros_like(pers)
    cx = ndtr((xs[None, :] - b[:, None]) / bw)
    cy = ndtr((ys[None, :] - pers[:, None]) / bw)
    mx = np.diff(cx, axis=1)  # (n, res) mass per birth bin
    my = np.diff(cy, axis=1)  # (n, res) mass per persistence bin
    # rows index persistence, columns index birth
    img = np.einsum("n,ni,nj->ij", w, my, mx)
    return img.ravel()


def pi_l2(d1, d2, resolution: int = 20, bandwidth: float | None = None,
          corpus: Sequence | None = None, bounds=None) -> float:
    """Euclidean distance between persistence images on a shared grid."""
    if bounds is None:
        bounds = image_bounds(corpus if corpus is not None else [d1, d2], bandwidth)
    a = persistence_image(d1, resolution, bandwidth, bounds)
    b = persistence_image(d2, resolution, bandwidth, bounds)
    return float(np.linalg.norm(a - b))


def heat_kernel(d1, d2, t: float) -> float:
    """Persistence scale-space kernel between two diagrams."""
    if not t > 0:
        raise ValueError("t must be positive")
    X, Y = _points(d1), _points(d2)
    if not len(X) or not len(Y):
        return 0.0
    Ybar = Y[:, ::-1]
    d_direct = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
    d_mirror = ((X[:, None, :] - Ybar[None, :, :]) ** 2).sum(axis=2)
    s = np.exp(-d_direct / (8 * t)) - np.exp(-d_mirror / (8 * t))
    return float(s.sum() / (8 * np.pi * t))


def heat_kernel_distance(d1, d2, t: float) -> float:
    rad = heat_kernel(d1, d1, t) + heat_kernel(d2, d2, t) - 2 * heat_kernel(d1, d2, t)
    if rad < -1e-12:
        raise ArithmeticError(f"negative heat-kernel radicand {rad}")
    return math.sqrt(max(rad, 0.0))


def _corpus_persistence(corpus: Sequence) -> np.ndarray:
    pts = [_points(d) for d in corpus]
    pts = [p for p in pts if len(p)]
    if not pts:
        return np.array([1.0])
    P = np.concatenate(pts)
    return P[:, 1] - P[:, 0]


def make_distance(kind: DistanceKind | str = "wasserstein2",
                  corpus: Sequence | None = None) -> Callable[[object, object], float]:
    """Two-argument distance with corpus-dependent defaults filled in."""
    if isinstance(kind, str):
        kind = DistanceKind(kind)
    p = kind.params
    if kind.name == "wasserstein2":
        return wasserstein2
    if kind.name == "bottleneck":
        return bottleneck
    if kind.name == "sliced_wasserstein":
        directions = int(p.get("directions", 50))
        return lambda a, b: sliced_wasserstein(a, b, directions)
    if kind.name == "persistence_image_l2":
        if corpus is None:
            raise ValueError("persistence-image distance needs a corpus for its grid")
        resolution = int(p.get("resolution", 20))
        bounds = image_bounds(corpus, p.get("bandwidth"))
        return lambda a, b: pi_l2(a, b, resolution, bounds=bounds)
    if kind.name == "heat_kernel":
        t = p.get("t")
        if t is None:
            t = 0.1 * _persistence_range(_corpus_persistence(corpus or [])) ** 2
        return lambda a, b: heat_kernel_distance(a, b, t)
    raise AssertionError(kind.name)

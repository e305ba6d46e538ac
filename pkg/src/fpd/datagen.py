"""Seeded synthetic point clouds, lattices and rigid transforms."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .diagram import PersistenceDiagram
from .rips import PointCloud

__all__ = [
    "ShapeSpec",
    "TransformSpec",
    "generate",
    "transform",
    "parse_transform",
    "synth_lattice",
    "exemplar_specs",
    "random_diagram",
    "SHAPE_KINDS",
]

SHAPE_KINDS = ("noise", "ring", "figure_eight")
CENTRE = np.array([0.5, 0.5])
RING_RADIUS = 0.35
EIGHT_RADIUS = 0.24


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    n_points: int = 100
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape {self.kind!r}; choose from {SHAPE_KINDS}")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def _circle(rng, n: int, centre, radius: float) -> np.ndarray:
    theta = rng.uniform(0.0, 2 * math.pi, n)
    return np.column_stack([centre[0] + radius * np.cos(theta), centre[1] + radius * np.sin(theta)])


def generate(spec: ShapeSpec) -> PointCloud:
    """Points in the unit square: uniform noise, one ring, or two tangent rings."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_points
    if spec.kind == "noise":
        pts = rng.uniform(0.0, 1.0, (n, 2))
        return PointCloud(pts, label=f"noise-{spec.seed}")
    if spec.kind == "ring":
        pts = _circle(rng, n, CENTRE, RING_RADIUS)
    else:
        left = CENTRE - [EIGHT_RADIUS, 0.0]
        right = CENTRE + [EIGHT_RADIUS, 0.0]
        k = (n + 1) // 2
        pts = np.concatenate([_circle(rng, k, left, EIGHT_RADIUS), _circle(rng, n - k, right, EIGHT_RADIUS)])
    if spec.noise_sigma > 0:
        pts = pts + rng.normal(0.0, spec.noise_sigma, pts.shape)
    return PointCloud(pts, label=f"{spec.kind}-{spec.seed}")


def exemplar_specs(n_points: int = 100, noise_sigma: float = 0.01, seeds=(0, 1, 2)) -> list:
    """Three noise, three ring and three figure-eight specs, in that order."""
    return [ShapeSpec(kind, n_points, noise_sigma, s) for kind in SHAPE_KINDS for s in seeds]


@dataclass(frozen=True)
class TransformSpec:
    """Rigid motion: ``none``, ``rotate`` (axis, angle in radians), ``reflect`` (axis) or ``translate`` (vector)."""

    kind: str = "none"
    axis: str | None = None
    angle: float = 0.0
    vector: tuple = ()

    def __post_init__(self):
        if self.kind not in ("none", "rotate", "reflect", "translate"):
            raise ValueError(f"unknown transform {self.kind!r}")
        if self.kind in ("rotate", "reflect") and self.axis not in ("x", "y", "z"):
            raise ValueError("axis must be one of x, y, z")


_AXES = {"x": 0, "y": 1, "z": 2}


def _rotation(axis: str, angle: float, dim: int) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    if dim == 2:
        if axis != "z":
            raise ValueError("planar clouds only rotate about z")
        return np.array([[c, -s], [s, c]])
    if dim != 3:
        raise ValueError(f"rotations need 2-D or 3-D clouds, got {dim}-D")
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def transform(pc: PointCloud, t: TransformSpec) -> PointCloud:
    pts = np.array(pc.points)
    dim = pts.shape[1]
    if t.kind == "none":
        out = pts
    elif t.kind == "rotate":
        out = pts @ _rotation(t.axis, t.angle, dim).T
    elif t.kind == "reflect":
        ax = _AXES[t.axis]
        if ax >= dim:
            raise ValueError(f"cannot reflect a {dim}-D cloud in axis {t.axis}")
        out = pts.copy()
        out[:, ax] = -out[:, ax]
    else:
        v = np.asarray(t.vector, dtype=float)
        if v.shape != (dim,):
            raise ValueError(f"translation has {v.size} components, cloud is {dim}-D")
        out = pts + v
    return PointCloud(out, label=pc.label)


def parse_transform(kind: str, arg: str) -> TransformSpec:
    """Parse CLI forms ``z:180`` (degrees), ``x`` and ``1,0,0``."""
    if kind == "rotate":
        axis, _, deg = arg.partition(":")
        return TransformSpec("rotate", axis.strip(), math.radians(float(deg)))
    if kind == "reflect":
        return TransformSpec("reflect", arg.strip())
    if kind == "translate":
        return TransformSpec("translate", vector=tuple(float(v) for v in arg.split(",")))
    raise ValueError(f"unknown transform {kind!r}")


def synth_lattice(kind: str, cells_per_axis: int = 2, a: float = 1.0) -> PointCloud:
    """Cubic supercell of a BCC or FCC lattice with lattice constant ``a``.

    Shared corner and face sites are stored once.
    """
    if cells_per_axis < 1:
        raise ValueError("cells_per_axis must be >= 1")
    if not a > 0:
        raise ValueError("lattice constant must be positive")
    kind = kind.lower()
    n = cells_per_axis
    corners = [(i, j, k) for i, j, k in itertools.product(range(n + 1), repeat=3)]
    if kind == "bcc":
        extra = [(i + 0.5, j + 0.5, k + 0.5) for i, j, k in itertools.product(range(n), repeat=3)]
    elif kind == "fcc":
        extra = set()
        for i, j, k in itertools.product(range(n), repeat=3):
            for face in ((0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5)):
                for shift in (0, 1):
                    off = [i + face[0], j + face[1], k + face[2]]
                    zero_axis = face.index(0)
                    off[zero_axis] += shift
                    extra.add(tuple(off))
        extra = sorted(extra)
    else:
        raise ValueError(f"unknown lattice {kind!r}; use bcc or fcc")
    pts = a * np.array(corners + list(extra), dtype=float)
    return PointCloud(pts, label=f"{kind}-{n}")


FEATURE_PROTOTYPES = np.array([[0.1, 0.8], [0.3, 0.9], [0.5, 1.0]])


def random_diagram(n_points: int, n_features: int, rng, dim: int = 1,
                   feature_sigma: float = 0.05, noise_scale: float = 0.02) -> PersistenceDiagram:
    """Random diagram: ``n_features`` persistent points plus near-diagonal noise.

    Used by the convergence experiment. Feature ``i`` is a Gaussian jitter
    (``feature_sigma``) of a fixed prototype point; noise points have
    uniform births in [0, 1] and exponential persistence of mean
    ``noise_scale``.
    """
    if n_features > len(FEATURE_PROTOTYPES):
        raise ValueError(f"at most {len(FEATURE_PROTOTYPES)} features are supported")
    n_features = min(n_features, n_points)
    feat = FEATURE_PROTOTYPES[:n_features] + rng.normal(0.0, feature_sigma, (n_features, 2))
    k = n_points - n_features
    nb = rng.uniform(0.0, 1.0, k)
    npers = rng.exponential(noise_scale, k) + 1e-6
    pts = np.vstack([feat, np.column_stack([nb, nb + npers])])
    return PersistenceDiagram(dim, pts)

"""Optimal assignments between persistence diagrams.

Two diagrams with n1 and n2 off-diagonal points are matched through an
(n1+n2) x (n1+n2) augmented cost matrix: each side receives one diagonal
copy per point of the other side, so any point may be sent to the
diagonal and the bijections of the infinite-multiplicity definition are
realised finitely.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .diagram import PersistenceDiagram

__all__ = [
    "AugmentedCostMatrix",
    "Matching",
    "augment",
    "augmented_cost",
    "hungarian",
    "bottleneck_feasible",
    "linf_diagonal_cost",
    "matching_seconds",
]

# wall time spent inside the assignment solver, for per-phase reports
_SOLVER_SECONDS = [0.0]


def matching_seconds(reset: bool = False) -> float:
    t = _SOLVER_SECONDS[0]
    if reset:
        _SOLVER_SECONDS[0] = 0.0
    return t


@dataclass(frozen=True)
class AugmentedCostMatrix:
    """Squared-cost matrix; rows are n1 real points then n2 diagonal copies,
    columns are n2 real points then n1 diagonal copies."""

    matrix: np.ndarray
    n1: int
    n2: int

    @property
    def size(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class Matching:
    """A perfect matching: row ``i`` is paired with column ``pairs[i]``."""

    pairs: np.ndarray
    cost: float
    n1: int | None = None
    n2: int | None = None

    def partner(self, i: int) -> int:
        """Real partner index of real row ``i``, or -1 for the diagonal."""
        j = int(self.pairs[i])
        return j if self.n2 is None or j < self.n2 else -1

    def real_partners(self) -> np.ndarray:
        """Partner of each real row point (-1 for the diagonal)."""
        n1 = len(self.pairs) if self.n1 is None else self.n1
        p = np.array(self.pairs[:n1])
        if self.n2 is not None:
            p[p >= self.n2] = -1
        return p

    def unmatched_columns(self) -> np.ndarray:
        """Real column points sent to the diagonal."""
        if self.n1 is None or self.n2 is None:
            return np.empty(0, dtype=int)
        rows = np.flatnonzero(self.pairs < self.n2)
        used = self.pairs[rows[rows < self.n1]]
        mask = np.ones(self.n2, dtype=bool)
        mask[used] = False
        return np.flatnonzero(mask)

    def max_pair_cost(self, matrix: np.ndarray) -> float:
        return float(matrix[np.arange(len(self.pairs)), self.pairs].max()) if len(self.pairs) else 0.0


def _as_points(d) -> np.ndarray:
    if isinstance(d, PersistenceDiagram):
        d.require_finite("matching")
        return d.points
    pts = np.asarray(d, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("matching needs a capped diagram; cap infinite deaths first")
    return pts


def augmented_cost(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Augmented squared-L2 cost matrix between point arrays ``X`` and ``Y``."""
    n1, n2 = len(X), len(Y)
    C = np.zeros((n1 + n2, n1 + n2))
    if n1 and n2:
        diff = X[:, None, :] - Y[None, :, :]
        C[:n1, :n2] = np.einsum("ijk,ijk->ij", diff, diff)
    if n1:
        C[:n1, n2:] = (((X[:, 1] - X[:, 0]) ** 2) / 2.0)[:, None]
    if n2:
        C[n1:, :n2] = (((Y[:, 1] - Y[:, 0]) ** 2) / 2.0)[None, :]
    return C


def augment(d1, d2) -> AugmentedCostMatrix:
    X, Y = _as_points(d1), _as_points(d2)
    return AugmentedCostMatrix(augmented_cost(X, Y), len(X), len(Y))


def hungarian(c) -> Matching:
    """Minimum-cost perfect matching of a square, finite, non-negative matrix."""
    n1 = n2 = None
    if isinstance(c, AugmentedCostMatrix):
        n1, n2 = c.n1, c.n2
        c = c.matrix
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix must be finite")
    if (c < 0).any():
        raise ValueError("cost matrix must be non-negative")
    if c.shape[0] == 0:
        return Matching(np.empty(0, dtype=int), 0.0, n1, n2)
    t0 = time.perf_counter()
    rows, cols = linear_sum_assignment(c)
    _SOLVER_SECONDS[0] += time.perf_counter() - t0
    pairs = np.empty(len(rows), dtype=int)
    pairs[rows] = cols
    cost = math.fsum(c[np.arange(len(pairs)), pairs])
    return Matching(pairs, cost, n1, n2)


def linf_diagonal_cost(points: np.ndarray) -> np.ndarray:
    """L-infinity distance from each point to the diagonal."""
    return (points[:, 1] - points[:, 0]) / 2.0


def _linf_pair_costs(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if not len(X) or not len(Y):
        return np.zeros((len(X), len(Y)))
    return np.abs(X[:, None, :] - Y[None, :, :]).max(axis=2)


def _feasible(X, Y, P, dX, dY, eps) -> bool:
    n1, n2 = len(X), len(Y)
    size = n1 + n2
    if size == 0:
        return True
    A = np.zeros((size, size), dtype=bool)
    A[:n1, :n2] = P <= eps
    A[np.arange(n1), n2 + np.arange(n1)] = dX <= eps
    A[n1 + np.arange(n2), np.arange(n2)] = dY <= eps
    A[n1:, n2:] = True
    if not A.any(axis=1).all() or not A.any(axis=0).all():
        return False
    match = maximum_bipartite_matching(csr_matrix(A), perm_type="column")
    return bool((match >= 0).all())


def bottleneck_feasible(d1, d2, eps: float) -> bool:
    """Whether a perfect matching exists using only pairs of L-inf cost <= eps."""
    X, Y = _as_points(d1), _as_points(d2)
    return _feasible(X, Y, _linf_pair_costs(X, Y), linf_diagonal_cost(X), linf_diagonal_cost(Y), eps)


def bottleneck_search(d1, d2) -> float:
    """Exact bottleneck value: binary search over every candidate pair cost."""
    X, Y = _as_points(d1), _as_points(d2)
    P = _linf_pair_costs(X, Y)
    dX, dY = linf_diagonal_cost(X), linf_diagonal_cost(Y)
    cand = np.unique(np.concatenate([[0.0], P.ravel(), dX, dY]))
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(X, Y, P, dX, dY, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])

"""Weighted Fréchet means of persistence diagrams.

The mean is held as ``m`` slots, ``m`` being the largest diagram size, and
each slot is either an off-diagonal point or a copy of the diagonal
(stored as a NaN row). One iteration

1. optimally matches the current mean to every diagram, then
2. moves each slot to the weighted average of its partners, where a
   diagonal partner stands for the diagonal projection of the weighted
   average of the off-diagonal partners.

The loop stops when no matching changes. Diagram points the optimal
matching sends to the diagonal are offered to the mean's diagonal slots,
most persistent first, so the mean can grow new points; a diagonal slot
only turns into a point when that lowers the objective, which keeps the
objective non-increasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagram import PersistenceDiagram
from .distances import wasserstein2
from .matching import augment, hungarian

__all__ = [
    "WeightedMeanProblem",
    "MeanState",
    "weighted_frechet_mean",
    "frechet_value",
    "slot_update",
    "match_slots",
]


@dataclass
class WeightedMeanProblem:
    diagrams: list
    weights: np.ndarray

    def __post_init__(self):
        self.diagrams = list(self.diagrams)
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if len(self.weights) != len(self.diagrams):
            raise ValueError("one weight per diagram is required")
        if (self.weights < 0).any() or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite and non-negative")
        for d in self.diagrams:
            d.require_finite("the Fréchet mean")

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @property
    def m(self) -> int:
        act = self.active
        return max((len(self.diagrams[j]) for j in act), default=0)


@dataclass
class MeanState:
    mean: PersistenceDiagram
    matchings: list
    frechet_value: float
    iteration: int
    converged: bool
    history: list = field(default_factory=list)
    slots: np.ndarray | None = None


def frechet_value(mean: PersistenceDiagram, p: WeightedMeanProblem) -> float:
    """Weighted sum of squared 2-Wasserstein distances from ``mean``."""
    return math.fsum(w * wasserstein2(mean, d) ** 2 for w, d in zip(p.weights, p.diagrams) if w > 0)


def _diag_sq(X: np.ndarray) -> np.ndarray:
    return (X[..., 1] - X[..., 0]) ** 2 / 2.0


def match_slots(Y: np.ndarray, X: np.ndarray):
    """Optimal matching of slot array ``Y`` to points ``X``.

    Returns (partner per slot, -1 meaning the diagonal; matching cost).
    """
    real = np.flatnonzero(~np.isnan(Y[:, 0]))
    M = hungarian(augment(Y[real], X))
    partner = np.full(len(Y), -1, dtype=int)
    partner[real] = M.real_partners()
    free = np.flatnonzero(np.isnan(Y[:, 0]))
    lost = M.unmatched_columns()
    if len(free) and len(lost):
        pers = X[lost, 1] - X[lost, 0]
        lost = lost[np.argsort(-pers, kind="stable")]
        k = min(len(free), len(lost))
        partner[free[:k]] = lost[:k]
    return partner, M.cost


def slot_update(Y: np.ndarray, partners: np.ndarray, Xs: list, w: np.ndarray) -> np.ndarray:
    """One averaging step for every slot given fixed matchings.

    ``partners`` is (n, m): partner index of slot i in diagram j, or -1.
    """
    n, m = partners.shape
    G = np.full((n, m, 2), np.nan)
    for j, X in enumerate(Xs):
        hit = partners[j] >= 0
        G[j, hit] = X[partners[j, hit]]
    od = partners >= 0
    Wod = np.where(od, w[:, None], 0.0)  # (n, m)
    wsum_od = Wod.sum(axis=0)
    wtot = w.sum()
    Gz = np.where(od[..., None], G, 0.0)
    num = (Wod[..., None] * Gz).sum(axis=0)  # (m, 2)
    new = np.full((m, 2), np.nan)
    has = wsum_od > 0
    if not has.any():
        return new
    wmean = num[has] / wsum_od[has, None]
    mid = wmean.mean(axis=1)
    w_diag = np.column_stack([mid, mid])
    y = (num[has] + (wtot - wsum_od[has])[:, None] * w_diag) / wtot
    new[has] = y

    # diagonal slots only become points when that lowers their share of the objective
    was_diag = np.isnan(Y[:, 0]) & has
    if was_diag.any():
        idx = np.flatnonzero(was_diag)
        yy = new[idx]
        old_cost = (Wod[:, idx] * np.where(od[:, idx], _diag_sq(np.nan_to_num(G[:, idx])), 0.0)).sum(axis=0)
        sq = ((np.nan_to_num(G[:, idx]) - yy[None]) ** 2).sum(axis=2)
        new_cost = (Wod[:, idx] * np.where(od[:, idx], sq, 0.0)).sum(axis=0) \
            + (wtot - wsum_od[idx]) * _diag_sq(yy)
        reject = ~(new_cost < old_cost)
        new[idx[reject]] = np.nan
    on_diag = new[:, 1] <= new[:, 0]
    new[on_diag] = np.nan
    return new


def _to_diagram(Y: np.ndarray, dim: int) -> PersistenceDiagram:
    return PersistenceDiagram(dim, Y[~np.isnan(Y[:, 0])])


def weighted_frechet_mean(p: WeightedMeanProblem, init: PersistenceDiagram | None = None,
                          max_iter: int = 100, seed=None) -> MeanState:
    """Local minimiser of the weighted Fréchet function, started from ``init``.

    Without ``init`` the start is a copy of one input diagram drawn with
    probability proportional to its weight. Zero-weight diagrams are left
    out of the matching loop.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    active = p.active
    if not len(active):
        raise ValueError("at least one weight must be positive")
    dim = p.diagrams[active[0]].dim
    if init is None:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(p.weights), p=p.weights / p.weights.sum())
        init = p.diagrams[pick]
    init.require_finite("the Fréchet mean initialisation")
    Xs = [np.asarray(p.diagrams[j].points) for j in active]
    w = p.weights[active]
    m = max(p.m, len(init))
    Y = np.full((m, 2), np.nan)
    Y[:len(init)] = init.points

    history = []
    prev = None
    best = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        matched = [match_slots(Y, X) for X in Xs]
        partners = np.stack([pm for pm, _ in matched]) if matched else np.empty((0, m), int)
        F = math.fsum(wj * c for wj, (_, c) in zip(w, matched))
        history.append(F)
        if best is None or F <= best[0]:
            best = (F, Y.copy(), partners, it)
        if prev is not None and np.array_equal(partners, prev):
            converged = True
            best = (F, Y.copy(), partners, it)
            break
        prev = partners
        Y = slot_update(Y, partners, Xs, w)
    else:
        matched = [match_slots(Y, X) for X in Xs]
        partners = np.stack([pm for pm, _ in matched])
        F = math.fsum(wj * c for wj, (_, c) in zip(w, matched))
        if F <= best[0]:
            best = (F, Y.copy(), partners, it)

    F, Ybest, partners, _ = best
    full = [None] * len(p.diagrams)
    for row, j in enumerate(active):
        full[j] = partners[row]
    return MeanState(
        mean=_to_diagram(Ybest, dim),
        matchings=full,
        frechet_value=F,
        iteration=it,
        converged=converged,
        history=history,
        slots=Ybest,
    )

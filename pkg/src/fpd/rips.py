"""Vietoris-Rips filtrations and their persistence diagrams over Z/2.

Degree 0 is computed with union-find and the elder rule. Higher degrees
use column reduction of the coboundary matrix with clearing, which yields
the same persistence pairs as reducing the boundary matrix but touches
far fewer columns on Rips complexes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .diagram import PersistenceDiagram

__all__ = [
    "PointCloud",
    "Filtration",
    "SimplexBudgetExceeded",
    "UnionFind",
    "build_rips",
    "persistence",
    "persistence_pairs",
    "rips_diagrams",
    "read_point_cloud",
    "write_point_cloud",
]

DEFAULT_BUDGET = 5_000_000
# pairs whose persistence is below this fraction of the filtration scale are
# treated as zero-persistence (float ties after rigid motions)
ZERO_PERSISTENCE_RTOL = 1e-12


class SimplexBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        """Merge the sets of ``a`` and ``b``; return the new root."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return ra


@dataclass(frozen=True)
class Filtration:
    """Rips filtration stored per dimension as sorted simplex arrays.

    ``simplices_by_dim[k]`` is an (N_k, k+1) array of vertex indices, each
    row increasing, ordered by (scale, lexicographic vertex set);
    ``scales_by_dim[k]`` holds the matching appearance scales.
    """

    distances: np.ndarray
    simplices_by_dim: tuple
    scales_by_dim: tuple
    max_dim: int
    threshold: float

    @property
    def n_vertices(self) -> int:
        return len(self.distances)

    def __len__(self) -> int:
        return sum(len(s) for s in self.simplices_by_dim)

    @property
    def simplices(self) -> list:
        """All simplices as (vertex tuple, scale), ordered by (scale, dim, lex)."""
        out = []
        for k, (S, eps) in enumerate(zip(self.simplices_by_dim, self.scales_by_dim)):
            out.extend(((tuple(int(v) for v in s), float(e), k) for s, e in zip(S, eps)))
        out.sort(key=lambda t: (t[1], t[2], t[0]))
        return [(s, e) for s, e, _ in out]


def _sort_simplices(S: np.ndarray, eps: np.ndarray):
    keys = [S[:, t] for t in range(S.shape[1] - 1, -1, -1)] + [eps]
    order = np.lexsort(keys)
    return np.ascontiguousarray(S[order]), eps[order]


def build_rips(pc, max_dim: int = 2, threshold: float | None = None,
               max_simplices: int = DEFAULT_BUDGET) -> Filtration:
    """Rips filtration with simplices up to dimension ``max_dim``.

    ``threshold`` defaults to the cloud's diameter. Raises
    :class:`SimplexBudgetExceeded` once more than ``max_simplices``
    simplices would be stored.
    """
    if not isinstance(pc, PointCloud):
        pc = PointCloud(pc)
    if max_dim not in (1, 2, 3):
        raise ValueError("max_dim must be 1, 2 or 3")
    n = len(pc)
    D = squareform(pdist(pc.points)) if n > 1 else np.zeros((1, 1))
    if threshold is None:
        threshold = float(D.max())
    elif not threshold > 0:
        raise ValueError("threshold must be positive")
    threshold = float(threshold)

    count = n
    if count > max_simplices:
        raise SimplexBudgetExceeded(f"{count} vertices exceed the budget of {max_simplices} simplices")
    simplices = [np.arange(n).reshape(-1, 1)]
    scales = [np.zeros(n)]

    iu, ju = np.triu_indices(n, k=1)
    keep = D[iu, ju] <= threshold
    E = np.stack([iu[keep], ju[keep]], axis=1)
    count += len(E)
    if count > max_simplices:
        raise SimplexBudgetExceeded(f"more than {max_simplices} simplices (edges alone: {len(E)})")
    S, eps = _sort_simplices(E, D[E[:, 0], E[:, 1]])
    simplices.append(S)
    scales.append(eps)

    adj = D <= threshold
    np.fill_diagonal(adj, False)
    vid = np.arange(n)
    for k in range(2, max_dim + 1):
        prev, prev_eps = simplices[-1], scales[-1]
        new_s, new_e = [], []
        chunk = max(1, 2_000_000 // max(n, 1))
        for start in range(0, len(prev), chunk):
            P = prev[start:start + chunk]
            mask = vid[None, :] > P[:, -1:]
            for t in range(P.shape[1]):
                mask &= adj[P[:, t]]
            rows, cols = np.nonzero(mask)
            if not len(rows):
                continue
            count += len(rows)
            if count > max_simplices:
                raise SimplexBudgetExceeded(
                    f"more than {max_simplices} simplices at dimension {k}; lower the threshold")
            base = P[rows]
            e = prev_eps[start:start + chunk][rows]
            for t in range(base.shape[1]):
                e = np.maximum(e, D[base[:, t], cols])
            new_s.append(np.column_stack([base, cols]))
            new_e.append(e)
        if new_s:
            S, eps = _sort_simplices(np.concatenate(new_s), np.concatenate(new_e))
        else:
            S, eps = np.empty((0, k + 1), dtype=int), np.empty(0)
        simplices.append(S)
        scales.append(eps)

    return Filtration(D, tuple(simplices), tuple(scales), max_dim, threshold)


def _encode(S: np.ndarray, n: int) -> np.ndarray:
    """Integer key preserving lexicographic order of sorted vertex tuples."""
    key = np.zeros(len(S), dtype=np.int64)
    for t in range(S.shape[1]):
        key = key * n + S[:, t]
    return key


def _zero_pairs_h0(f: Filtration):
    """Elder-rule pairs for degree 0 plus the edges that merged components."""
    n = f.n_vertices
    uf = UnionFind(n)
    # component birth index: vertices all enter at scale 0, earlier index is elder
    oldest = list(range(n))
    pairs = []
    death_edges = []
    E, eps = f.simplices_by_dim[1], f.scales_by_dim[1]
    for idx in range(len(E)):
        a, b = int(E[idx, 0]), int(E[idx, 1])
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        old_a, old_b = oldest[ra], oldest[rb]
        young = max(old_a, old_b)
        pairs.append((float(f.scales_by_dim[0][young]), float(eps[idx])))
        death_edges.append(idx)
        r = uf.union(ra, rb)
        oldest[r] = min(old_a, old_b)
    roots = {uf.find(v) for v in range(n)}
    for r in sorted(roots, key=lambda r: oldest[r]):
        pairs.append((float(f.scales_by_dim[0][oldest[r]]), math.inf))
    return pairs, set(death_edges)


def _cohomology_pairs(f: Filtration, p: int, cleared: set):
    """Pairs of degree ``p`` >= 1 by reducing coboundary columns with clearing.

    Returns the pairs and the set of (p+1)-simplex indices that became pivots,
    which clear the next degree.
    """
    n = f.n_vertices
    S, eps = f.simplices_by_dim[p], f.scales_by_dim[p]
    T, teps = f.simplices_by_dim[p + 1], f.scales_by_dim[p + 1]
    tkeys = _encode(T, n)
    torder = np.argsort(tkeys, kind="stable")
    tsorted = tkeys[torder]
    adj = f.distances <= f.threshold
    np.fill_diagonal(adj, False)

    def coboundary(sigma: np.ndarray) -> np.ndarray:
        ok = adj[sigma[0]].copy()
        for v in sigma[1:]:
            ok &= adj[v]
        ext = np.flatnonzero(ok)
        if not len(ext):
            return ext
        tup = np.empty((len(ext), len(sigma) + 1), dtype=np.int64)
        tup[:, :-1] = sigma
        tup[:, -1] = ext
        tup.sort(axis=1)
        keys = _encode(tup, n)
        return np.sort(torder[np.searchsorted(tsorted, keys)])

    pivots: dict[int, np.ndarray] = {}
    pairs = []
    for idx in range(len(S) - 1, -1, -1):
        if idx in cleared:
            continue
        col = coboundary(S[idx])
        while len(col):
            piv = int(col[0])
            other = pivots.get(piv)
            if other is None:
                break
            col = np.setxor1d(col, other, assume_unique=True)
        if len(col):
            piv = int(col[0])
            pivots[piv] = col
            pairs.append((float(eps[idx]), float(teps[piv])))
        else:
            pairs.append((float(eps[idx]), math.inf))
    return pairs, set(pivots)


def persistence_pairs(f: Filtration, p: int) -> np.ndarray:
    """All (birth, death) pairs of degree ``p``, zero-persistence ones included."""
    return _all_pairs(f, p)[p]


def _all_pairs(f: Filtration, upto: int) -> list[np.ndarray]:
    if upto < 0 or upto >= f.max_dim:
        raise ValueError(f"degree {upto} needs simplices of dimension {upto + 1}; "
                         f"filtration stops at {f.max_dim}")
    pairs, cleared = _zero_pairs_h0(f)
    out = [np.array(pairs, dtype=float).reshape(-1, 2)]
    for p in range(1, upto + 1):
        pairs, cleared = _cohomology_pairs(f, p, cleared)
        out.append(np.array(pairs, dtype=float).reshape(-1, 2))
    return out


def _to_diagram(pairs: np.ndarray, p: int, scale: float) -> PersistenceDiagram:
    tol = ZERO_PERSISTENCE_RTOL * max(1.0, scale)
    keep = (pairs[:, 1] - pairs[:, 0]) > tol
    kept = pairs[keep]
    order = np.lexsort((kept[:, 1], kept[:, 0]))
    return PersistenceDiagram(p, kept[order])


def persistence(f: Filtration, p: int) -> PersistenceDiagram:
    """Degree-``p`` diagram of ``f`` with zero-persistence pairs dropped."""
    return _to_diagram(_all_pairs(f, p)[p], p, f.threshold)


def rips_diagrams(pc, max_degree: int = 1, threshold: float | None = None,
                  max_simplices: int = DEFAULT_BUDGET) -> list[PersistenceDiagram]:
    """Diagrams of degrees 0..max_degree from one filtration build."""
    f = build_rips(pc, max_degree + 1, threshold, max_simplices)
    return [_to_diagram(pr, p, f.threshold) for p, pr in enumerate(_all_pairs(f, max_degree))]


# --- point-cloud IO ---------------------------------------------------------


def read_point_cloud(path) -> PointCloud:
    """Read a CSV (one point per row, optional header) or ``.xyz`` file."""
    path = Path(path)
    if path.suffix.lower() == ".xyz":
        return _read_xyz(path)
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header
                raise ValueError(f"{path}: line {lineno}: non-numeric coordinate") from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}: line {lineno}: expected {len(rows[0])} coordinates")
    if not rows:
        raise ValueError(f"{path}: no points")
    return PointCloud(np.array(rows), label=path.stem)


def _read_xyz(path: Path) -> PointCloud:
    lines = path.read_text().splitlines()
    body = lines
    if lines and lines[0].strip().isdigit():
        body = lines[2:2 + int(lines[0].strip())]
    pts = []
    for lineno, line in enumerate(body, start=1):
        tok = line.split()
        if not tok:
            continue
        # leading element symbol is ignored
        coords = tok[1:4] if not _is_number(tok[0]) else tok[:3]
        try:
            pts.append([float(v) for v in coords])
        except ValueError:
            raise ValueError(f"{path}: bad coordinate line {line!r}") from None
    if not pts:
        raise ValueError(f"{path}: no atoms")
    return PointCloud(np.array(pts), label=path.stem)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_point_cloud(pc: PointCloud, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in pc.points:
            w.writerow([repr(float(v)) for v in row])

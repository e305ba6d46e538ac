"""Persistence diagrams: representation, capping and file IO.

A diagram stores only its off-diagonal points. The diagonal is never
materialised; algorithms treat it as a virtual partner whose cost for a
point is the point's distance to the diagonal.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "DiagramPoint",
    "PersistenceDiagram",
    "DiagramSet",
    "DiagramFormatError",
    "cap_infinities",
    "default_cap",
    "distance_to_diagonal",
    "read_diagram",
    "write_diagram",
]

SQRT2 = math.sqrt(2.0)


class DiagramFormatError(ValueError):
    """Raised for unreadable diagram files; carries the offending line."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class DiagramPoint(NamedTuple):
    birth: float
    death: float

    @property
    def persistence(self) -> float:
        return self.death - self.birth


def distance_to_diagonal(p) -> float | np.ndarray:
    """Euclidean distance from a point (or an (n, 2) array) to the diagonal."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        if not np.all(np.isfinite(arr)):
            raise ValueError("distance to diagonal is undefined for infinite points")
        return float((arr[1] - arr[0]) / SQRT2)
    return (arr[:, 1] - arr[:, 0]) / SQRT2


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite multiset of (birth, death) points of one homology degree.

    Points with zero persistence are identified with the diagonal and
    dropped on construction. The stored array is read-only.
    """

    dim: int
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    cap: float | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 0:
            raise ValueError(f"homology degree must be a non-negative integer, got {self.dim}")
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.size == 0:
            pts = np.empty((0, 2))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        if np.isnan(pts).any():
            raise ValueError("diagram points must not be NaN")
        if np.isinf(pts[:, 0]).any():
            raise ValueError("births must be finite")
        bad = pts[:, 0] > pts[:, 1]
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"point {i} has birth > death: {tuple(pts[i])}")
        pts = pts[pts[:, 1] != pts[:, 0]]
        if self.cap is not None:
            if np.isinf(pts[:, 1]).any():
                raise ValueError("a capped diagram cannot hold infinite deaths")
            if len(pts) and pts[:, 1].max() > self.cap:
                raise ValueError("deaths exceed the cap")
        pts.setflags(write=False)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return (DiagramPoint(float(b), float(d)) for b, d in self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.cap == other.cap
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __repr__(self) -> str:
        return f"PersistenceDiagram(dim={self.dim}, n={len(self)}, cap={self.cap})"

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def persistence(self) -> np.ndarray:
        return self.points[:, 1] - self.points[:, 0]

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.points)))

    def max_finite_death(self) -> float | None:
        d = self.deaths[np.isfinite(self.deaths)]
        return float(d.max()) if d.size else None

    def sorted(self) -> "PersistenceDiagram":
        """Copy with points in lexicographic (birth, death) order."""
        order = np.lexsort((self.deaths, self.births))
        return PersistenceDiagram(self.dim, self.points[order], self.cap)

    def require_finite(self, what: str = "this operation"):
        if not self.is_finite:
            raise ValueError(f"{what} needs a capped diagram; cap infinite deaths first")


@dataclass(frozen=True)
class DiagramSet:
    """Non-empty collection of diagrams sharing one homology degree."""

    diagrams: list
    names: list = None

    def __post_init__(self):
        diagrams = list(self.diagrams)
        if not diagrams:
            raise ValueError("a DiagramSet must not be empty")
        dims = {d.dim for d in diagrams}
        if len(dims) != 1:
            raise ValueError(f"diagrams mix homology degrees {sorted(dims)}")
        names = list(self.names) if self.names is not None else [f"D{i}" for i in range(len(diagrams))]
        if len(names) != len(diagrams):
            raise ValueError("one name per diagram is required")
        object.__setattr__(self, "diagrams", diagrams)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.diagrams)

    def __getitem__(self, i):
        return self.diagrams[i]

    def __iter__(self):
        return iter(self.diagrams)

    @property
    def dim(self) -> int:
        return self.diagrams[0].dim

    def max_finite_death(self) -> float | None:
        vals = [d.max_finite_death() for d in self.diagrams]
        vals = [v for v in vals if v is not None]
        return max(vals) if vals else None

    def capped(self, t: float | None = None) -> "DiagramSet":
        """Cap every diagram at ``t`` (default: :func:`default_cap`)."""
        if t is None:
            t = default_cap(self.diagrams)
        return DiagramSet([cap_infinities(d, t) for d in self.diagrams], self.names)


def default_cap(diagrams: Iterable[PersistenceDiagram]) -> float:
    """Twice the largest finite death across ``diagrams`` (1.0 if there is none)."""
    m = 0.0
    for d in diagrams:
        v = d.max_finite_death()
        if v is not None:
            m = max(m, v)
    return 2.0 * m if m > 0 else 1.0


def cap_infinities(d: PersistenceDiagram, t: float) -> PersistenceDiagram:
    """Replace infinite deaths by ``t``, which must exceed every finite death."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("cap must be finite")
    mfd = d.max_finite_death()
    if mfd is not None and t <= mfd:
        raise ValueError(f"cap {t} must exceed the largest finite death {mfd}")
    pts = np.array(d.points)
    inf = np.isinf(pts[:, 1])
    if (pts[inf, 0] >= t).any():
        raise ValueError(f"cap {t} does not exceed the birth of an infinite feature")
    pts[inf, 1] = t
    return PersistenceDiagram(d.dim, pts, cap=t)


# --- IO ---------------------------------------------------------------------


def _format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _parse_float(tok: str, line: int, path) -> float:
    try:
        return float(tok.strip())
    except ValueError:
        raise DiagramFormatError(f"not a number: {tok!r}", line, path) from None


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or "csv"
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise DiagramFormatError(f"unknown diagram format {fmt!r}", path=path)
    return fmt


def read_diagram(path, format: str | None = None, dim: int | None = None) -> PersistenceDiagram:
    """Read a diagram from CSV (``dim,birth,death`` rows) or JSON.

    A CSV file may hold several homology degrees; ``dim`` then selects one.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "json":
        return _read_json(path, dim)
    return _read_csv(path, dim)


def _read_csv(path: Path, want_dim: int | None) -> PersistenceDiagram:
    rows: dict[int, list] = {}
    noted_dim = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if row and row[0].lstrip().startswith("#"):
                key, _, val = ",".join(row).lstrip("# ").partition("=")
                if key.strip() == "dim" and val.strip().isdigit():
                    noted_dim = int(val)
                continue
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3:
                raise DiagramFormatError(f"expected 3 fields (dim,birth,death), got {len(row)}", lineno, path)
            if lineno == 1 and row[0].strip().lower() == "dim":
                continue
            try:
                p = int(row[0].strip())
            except ValueError:
                raise DiagramFormatError(f"bad homology degree {row[0]!r}", lineno, path) from None
            b = _parse_float(row[1], lineno, path)
            d = _parse_float(row[2], lineno, path)
            if p < 0:
                raise DiagramFormatError("negative homology degree", lineno, path)
            if math.isnan(b) or math.isnan(d) or math.isinf(b):
                raise DiagramFormatError("birth must be finite and values not NaN", lineno, path)
            if b > d:
                raise DiagramFormatError(f"birth {b} > death {d}", lineno, path)
            rows.setdefault(p, []).append((b, d))
    if want_dim is None:
        if len(rows) > 1:
            raise DiagramFormatError(f"file holds degrees {sorted(rows)}; select one with dim=", path=path)
        want_dim = next(iter(rows), noted_dim if noted_dim is not None else 0)
    return PersistenceDiagram(want_dim, np.array(rows.get(want_dim, []), dtype=float).reshape(-1, 2))


def _read_json(path: Path, want_dim: int | None) -> PersistenceDiagram:
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise DiagramFormatError(f"invalid JSON: {e.msg}", e.lineno, path) from None
    if not isinstance(obj, dict) or "points" not in obj:
        raise DiagramFormatError('expected an object with "dim" and "points"', 1, path)
    p = int(obj.get("dim", 0 if want_dim is None else want_dim))
    if want_dim is not None and p != want_dim:
        raise DiagramFormatError(f"file holds degree {p}, not {want_dim}", path=path)
    pts = []
    for i, pair in enumerate(obj["points"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise DiagramFormatError(f"point {i} is not a [birth, death] pair", path=path)
        b, d = (float(v) for v in pair)
        if b > d:
            raise DiagramFormatError(f"point {i}: birth {b} > death {d}", path=path)
        pts.append((b, d))
    cap = obj.get("cap")
    return PersistenceDiagram(p, np.array(pts, dtype=float).reshape(-1, 2), cap)


def write_diagram(d: PersistenceDiagram, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "json":
        obj = {"dim": d.dim, "points": [[_json_float(b), _json_float(x)] for b, x in d.points]}
        if d.cap is not None:
            obj["cap"] = d.cap
        path.write_text(json.dumps(obj))
        return
    with open(path, "w", newline="") as fh:
        fh.write("dim,birth,death\n")
        if not len(d.points):
            fh.write(f"# dim={d.dim}\n")
        for b, x in d.points:
            fh.write(f"{d.dim},{_format_float(b)},{_format_float(x)}\n")


def _json_float(x: float):
    return "inf" if math.isinf(x) else float(x)


def diagrams_from_arrays(arrays: Sequence, dim: int = 1) -> list[PersistenceDiagram]:
    return [PersistenceDiagram(dim, np.asarray(a, dtype=float).reshape(-1, 2)) for a in arrays]

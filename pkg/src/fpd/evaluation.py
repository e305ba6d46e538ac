"""Fuzzy Rand index between a fuzzy partition and a crisp reference."""
from __future__ import annotations

import math

import numpy as np

__all__ = ["fuzzy_rand", "crisp_rand", "read_labels"]


def fuzzy_rand(memberships, reference) -> float:
    """Fuzzy Rand index of an (n, c) membership matrix against reference labels.

    Pairwise equivalence in the fuzzy partition is one minus half the L1
    distance between membership rows; in the reference it is 1 for equal
    labels and 0 otherwise. The index is one minus the mean absolute
    disagreement over all pairs, so it lies in [0, 1] and reduces to the
    crisp Rand index for one-hot memberships.
    """
    R = np.asarray(memberships, dtype=float)
    labels = np.asarray(reference)
    if R.ndim != 2 or R.shape[0] != len(labels):
        raise ValueError(f"{R.shape[0] if R.ndim == 2 else '?'} membership rows "
                         f"but {len(labels)} reference labels")
    n = len(labels)
    if n < 2:
        return 1.0
    iu, ju = np.triu_indices(n, k=1)
    e_p = 1.0 - 0.5 * np.abs(R[iu] - R[ju]).sum(axis=1)
    e_q = (labels[iu] == labels[ju]).astype(float)
    # (pairs - disagreement) / pairs is exact when every disagreement is 0 or 1
    m = len(iu)
    return (m - math.fsum(np.abs(e_p - e_q))) / m


def crisp_rand(a, b) -> float:
    """Plain Rand index between two hard labelings."""
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        raise ValueError("labelings differ in length")
    n = len(a)
    if n < 2:
        return 1.0
    agree = 0
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            agree += (a[i] == a[j]) == (b[i] == b[j])
            total += 1
    return agree / total


def read_labels(path, names=None) -> list:
    """Labels from a file: one per line, or ``name,label`` rows matched to ``names``."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([t.strip() for t in line.split(",")])
    if rows and len(rows[0]) == 2 and not _is_int(rows[0][1]):
        rows = rows[1:]  # header
    if rows and all(len(r) == 2 for r in rows):
        table = {r[0]: int(r[1]) for r in rows}
        if names is None:
            return [int(r[1]) for r in rows]
        missing = [n for n in names if n not in table]
        if missing:
            raise ValueError(f"no label for {missing[:3]}")
        return [table[n] for n in names]
    if rows and not _is_int(rows[0][0]):
        rows = rows[1:]
    return [int(r[0]) for r in rows]


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False

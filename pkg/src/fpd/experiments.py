"""Code-defined reproduction presets: exemplar, convergence, distances, lattice.

Each preset writes CSV tables and SVG figures into an output directory and
returns an :class:`ExperimentResult` whose ``summary`` holds the numbers
the acceptance checks look at.
"""
from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plot
from .datagen import (
    TransformSpec,
    exemplar_specs,
    generate,
    random_diagram,
    synth_lattice,
    transform,
)
from .diagram import PersistenceDiagram, cap_infinities, default_cap, write_diagram
from .distances import DistanceKind, make_distance
from .evaluation import crisp_rand, fuzzy_rand
from .fcm import FcmConfig, cluster
from .matching import matching_seconds
from .rips import rips_diagrams

__all__ = [
    "ExperimentResult",
    "EXPERIMENTS",
    "exemplar",
    "convergence",
    "distances",
    "lattice",
    "run_experiment",
    "exemplar_corpus",
    "lattice_corpus",
    "LATTICE_TRANSFORMS",
    "DISTANCE_KINDS",
]

DISTANCE_KINDS = ("w2", "bottleneck", "sw", "pi", "heat")
LATTICE_TRANSFORMS = ("none", "rotate", "reflect", "translate")


@dataclass
class ExperimentResult:
    name: str
    outdir: Path
    summary: dict
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "summary": self.summary,
                "files": [str(f) for f in self.files], "timings": self.timings}


class _Phases:
    """Accumulates wall time per named phase."""

    def __init__(self):
        self.t = {"ph": 0.0, "distances": 0.0, "matching": 0.0, "means": 0.0}
        self.start = time.perf_counter()
        matching_seconds(reset=True)

    def add(self, name: str, seconds: float):
        self.t[name] = self.t.get(name, 0.0) + seconds

    def absorb(self, state):
        for k, v in state.timings.items():
            self.add(k, v)

    def done(self) -> dict:
        self.t["matching"] = matching_seconds(reset=True)
        self.t["total"] = time.perf_counter() - self.start
        return dict(self.t)


def _cap_all(diagrams: list) -> list:
    if all(d.is_finite for d in diagrams):
        return diagrams
    t = default_cap(diagrams)
    return [cap_infinities(d, t) for d in diagrams]


def _write_table(path: Path, header: list, rows: list) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in r])
    return path


def _membership_table(path: Path, names: list, R: np.ndarray) -> Path:
    header = ["diagram"] + [f"cluster_{k}" for k in range(R.shape[1])]
    return _write_table(path, header, [[n, *map(float, row)] for n, row in zip(names, R)])


def _grouping_ok(labels, reference) -> bool:
    return crisp_rand(labels, reference) == 1.0


def _winning(R: np.ndarray) -> np.ndarray:
    return R.max(axis=1)


def _ph(clouds, degree: int, phases: _Phases) -> list:
    t0 = time.perf_counter()
    out = [rips_diagrams(pc, max_degree=degree)[degree] for pc in clouds]
    phases.add("ph", time.perf_counter() - t0)
    return _cap_all(out)


def exemplar_corpus(n_points: int = 100, sigma: float = 0.01, data_seeds=(0, 1, 2),
                    phases: _Phases | None = None):
    """Nine 1-PH diagrams (noise, ring, figure-eight per seed), names and group labels."""
    phases = phases or _Phases()
    specs = exemplar_specs(n_points, sigma, tuple(data_seeds))
    clouds = [generate(s) for s in specs]
    diagrams = _ph(clouds, 1, phases)
    names = [pc.label for pc in clouds]
    groups = {"noise": 0, "ring": 1, "figure_eight": 2}
    reference = [groups[s.kind] for s in specs]
    return diagrams, names, reference


def exemplar(outdir, *, seed: int = 0, n_points: int = 100, sigma: float = 0.01,
             data_seeds=(0, 1, 2), c: int = 3, max_iter: int = 20,
             exponent: str = "j_minimizing", distance: str = "w2", threads: int = 1) -> ExperimentResult:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    phases = _Phases()
    diagrams, names, reference = exemplar_corpus(n_points, sigma, data_seeds, phases)
    cfg = FcmConfig(c=c, max_iter=max_iter, seed=seed, distance=DistanceKind(distance),
                    membership_exponent=exponent, threads=threads)
    state = cluster(diagrams, cfg)
    phases.absorb(state)

    files = []
    (out / "diagrams").mkdir(exist_ok=True)
    (out / "centres").mkdir(exist_ok=True)
    for name, d in zip(names, diagrams):
        write_diagram(d, out / "diagrams" / f"{name}.csv")
    for k, m in enumerate(state.centres):
        write_diagram(m, out / "centres" / f"centre_{k}.csv")
    files.append(_membership_table(out / "memberships.csv", names, state.memberships))
    files.append(_write_table(out / "labels.csv", ["diagram", "label"], list(zip(names, reference))))
    for fname, svg in (
        ("diagrams.svg", plot.diagram_svg(diagrams, names, "1-PH diagrams")),
        ("centres.svg", plot.diagram_svg(state.centres, [f"centre {k}" for k in range(c)], "cluster centres")),
        ("memberships.svg", plot.heatmap_svg(state.memberships, names,
                                             [f"cluster {k}" for k in range(c)], "memberships")),
    ):
        plot.write_svg(svg, out / fname)
        files.append(out / fname)

    all_pers = np.concatenate([d.persistence for d in diagrams if len(d)] or [np.zeros(0)])
    max_pers = float(all_pers.max()) if all_pers.size else 0.0
    significant = [int((m.persistence > 0.5 * max_pers).sum()) for m in state.centres]
    labels = state.labels()
    summary = {
        "names": names,
        "reference": reference,
        "labels": labels.tolist(),
        "memberships": state.memberships.tolist(),
        "grouping_correct": _grouping_ok(labels, reference),
        "min_winning_membership": float(_winning(state.memberships).min()),
        "centre_significant_points": significant,
        "corpus_max_persistence": max_pers,
        "fuzzy_rand": fuzzy_rand(state.memberships, reference),
        "cost_trace": state.cost_trace,
        "converged": state.converged,
        "converged_at": state.converged_at,
    }
    return _finish("exemplar", out, summary, files, phases)


def _convergence_corpus(n: int, m: int, seed: int) -> list:
    rng = np.random.default_rng([seed, n, m])
    return [random_diagram(m, j % 3, rng) for j in range(n)]


def convergence(outdir, *, n_diagrams=(25, 50, 75, 100), n_points=(10, 20, 30, 40, 50),
                seeds=(0, 1, 2), c: int = 3, max_iter: int = 20, exponent: str = "j_minimizing",
                threads: int = 1) -> ExperimentResult:
    """Iterations to reach cost stability over a grid of random corpora."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    phases = _Phases()
    runs = []
    for n in n_diagrams:
        for m in n_points:
            for s in seeds:
                diagrams = _convergence_corpus(n, m, s)
                cfg = FcmConfig(c=c, max_iter=max_iter, seed=s, membership_exponent=exponent,
                                stop_on_convergence=True, threads=threads)
                t0 = time.perf_counter()
                state = cluster(diagrams, cfg)
                dt = time.perf_counter() - t0
                phases.absorb(state)
                wfm = [i for row in state.frechet_iterations for i in row]
                runs.append({
                    "n_diagrams": n, "n_points": m, "seed": s,
                    "converged": state.converged_at is not None,
                    "fcm_iterations": state.converged_at if state.converged_at is not None else state.iteration,
                    "wfm_iterations": float(np.mean(wfm)) if wfm else 0.0,
                    "seconds": dt,
                })
    files = [_write_table(out / "runs.csv", list(runs[0]), [list(r.values()) for r in runs])]

    def grid(key):
        G = np.zeros((len(n_diagrams), len(n_points)))
        for i, n in enumerate(n_diagrams):
            for j, m in enumerate(n_points):
                G[i, j] = np.mean([r[key] for r in runs if r["n_diagrams"] == n and r["n_points"] == m])
        return G

    rows = [str(n) for n in n_diagrams]
    cols = [str(m) for m in n_points]
    for key, title in (("fcm_iterations", "FCM iterations"), ("wfm_iterations", "WFM iterations")):
        G = grid(key)
        files.append(_write_table(out / f"{key}.csv", ["diagrams\\points", *cols],
                                  [[r, *map(float, g)] for r, g in zip(rows, G)]))
        plot.write_svg(plot.heatmap_svg(G, rows, cols, title, fmt="{:.2f}"), out / f"{key}.svg")
        files.append(out / f"{key}.svg")

    iters = [r["fcm_iterations"] for r in runs]
    summary = {
        "runs": len(runs),
        "all_converged": all(r["converged"] for r in runs),
        "failures": [r for r in runs if not r["converged"]],
        "median_fcm_iterations": float(statistics.median(iters)),
        "max_fcm_iterations": int(max(iters)),
        "mean_wfm_iterations": float(np.mean([r["wfm_iterations"] for r in runs])),
    }
    return _finish("convergence", out, summary, files, phases)


def _per_pair_seconds(dist, diagrams, repeats: int) -> float:
    pairs = [(a, b) for i, a in enumerate(diagrams) for b in diagrams[i + 1:]]
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a, b in pairs:
            dist(a, b)
        best = min(best, (time.perf_counter() - t0) / len(pairs))
    return best


def distances(outdir, *, kinds=DISTANCE_KINDS, seed: int = 0, n_points: int = 100,
              sigma: float = 0.01, data_seeds=(0, 1, 2), c: int = 3, max_iter: int = 20,
              exponent: str = "j_minimizing", timing_repeats: int = 3,
              threads: int = 1) -> ExperimentResult:
    """Fuzzy Rand index and per-pair cost of each membership distance."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    phases = _Phases()
    diagrams, names, reference = exemplar_corpus(n_points, sigma, data_seeds, phases)
    rows = []
    per_kind = {}
    for k in kinds:
        kind = DistanceKind(k)
        cfg = FcmConfig(c=c, max_iter=max_iter, seed=seed, distance=kind,
                        membership_exponent=exponent, threads=threads)
        state = cluster(diagrams, cfg)
        phases.absorb(state)
        pair_s = _per_pair_seconds(make_distance(kind, corpus=diagrams), diagrams, timing_repeats)
        score = fuzzy_rand(state.memberships, reference)
        per_kind[kind.short] = {"fuzzy_rand": score, "per_pair_seconds": pair_s,
                                "labels": state.labels().tolist()}
        rows.append([kind.short, score, pair_s])
    files = [_write_table(out / "distances.csv", ["distance", "fuzzy_rand", "per_pair_seconds"], rows)]
    plot.write_svg(plot.heatmap_svg([[r[1] for r in rows]], ["fuzzy Rand"], [r[0] for r in rows],
                                    "fuzzy Rand by distance"), out / "distances.svg")
    files.append(out / "distances.svg")
    return _finish("distances", out, {"kinds": per_kind, "reference": reference}, files, phases)


def _copy_transforms(name: str, a: float) -> list:
    if name == "none":
        return [TransformSpec()] * 3
    if name == "rotate":
        return [TransformSpec(), TransformSpec("rotate", "x", np.pi), TransformSpec("rotate", "y", np.pi)]
    if name == "reflect":
        return [TransformSpec(), TransformSpec("reflect", "x"), TransformSpec("reflect", "y")]
    if name == "translate":
        return [TransformSpec(), TransformSpec("translate", vector=(0.0, 0.0, a)),
                TransformSpec("translate", vector=(0.0, 0.0, -a))]
    raise ValueError(f"unknown lattice transform {name!r}; choose from {LATTICE_TRANSFORMS}")


def lattice_corpus(transform_name: str, cells: int = 2, a: float = 1.0, kinds=("bcc", "fcc")):
    """Three copies of each lattice, the second and third moved by ``transform_name``."""
    clouds, names, reference = [], [], []
    for g, kind in enumerate(kinds):
        base = synth_lattice(kind, cells, a)
        for i, t in enumerate(_copy_transforms(transform_name, a)):
            clouds.append(transform(base, t))
            names.append(f"{kind}-{i + 1}")
            reference.append(g)
    return clouds, names, reference


def lattice(outdir, *, transforms=LATTICE_TRANSFORMS, cells: int = 2, a: float = 1.0,
            seed: int = 0, c: int = 2, max_iter: int = 5, exponent: str = "j_minimizing",
            threads: int = 1) -> ExperimentResult:
    """Cluster 2-PH of BCC and FCC copies under rigid motions."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    phases = _Phases()
    files = []
    per = {}
    for tname in transforms:
        clouds, names, reference = lattice_corpus(tname, cells, a)
        diagrams = _ph(clouds, 2, phases)
        cfg = FcmConfig(c=c, max_iter=max_iter, seed=seed, membership_exponent=exponent,
                        threads=threads)
        state = cluster(diagrams, cfg)
        phases.absorb(state)
        files.append(_membership_table(out / f"memberships_{tname}.csv", names, state.memberships))
        plot.write_svg(plot.heatmap_svg(state.memberships, names, [f"cluster {k}" for k in range(c)],
                                        f"memberships ({tname})"), out / f"memberships_{tname}.svg")
        files.append(out / f"memberships_{tname}.svg")
        per[tname] = {
            "names": names,
            "labels": state.labels().tolist(),
            "memberships": state.memberships.tolist(),
            "grouping_correct": _grouping_ok(state.labels(), reference),
            "min_winning_membership": float(_winning(state.memberships).min()),
            "diagram_sizes": [len(d) for d in diagrams],
            "converged": state.converged,
        }
    return _finish("lattice", out, {"transforms": per}, files, phases)


def _finish(name, out: Path, summary, files, phases: _Phases) -> ExperimentResult:
    res = ExperimentResult(name, out, summary, files, phases.done())
    report = out / "report.json"
    report.write_text(json.dumps(res.to_dict(), indent=2, default=_jsonable))
    res.files.append(report)
    return res


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (Path, PersistenceDiagram)):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


EXPERIMENTS = {
    "exemplar": exemplar,
    "convergence": convergence,
    "distances": distances,
    "lattice": lattice,
}


def run_experiment(name: str, outdir, **overrides) -> ExperimentResult:
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None
    return fn(outdir, **overrides)

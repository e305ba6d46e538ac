"""``fpd`` command line: persistence, distances, means, clustering and experiments.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
(only with ``--fail-on-nonconvergence``).
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, plot
from .datagen import SHAPE_KINDS, ShapeSpec, generate, parse_transform, synth_lattice, transform
from .diagram import (
    DiagramFormatError,
    DiagramSet,
    PersistenceDiagram,
    cap_infinities,
    default_cap,
    read_diagram,
    write_diagram,
)
from .distances import KIND_ALIASES, DistanceKind, make_distance
from .evaluation import fuzzy_rand, read_labels
from .experiments import EXPERIMENTS, run_experiment
from .fcm import ClusterState, FcmConfig, cluster, rank_by_centre
from .frechet import WeightedMeanProblem, weighted_frechet_mean
from .rips import SimplexBudgetExceeded, read_point_cloud, rips_diagrams, write_point_cloud

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 0, 1, 2, 3
DIAGRAM_SUFFIXES = (".csv", ".json")
CLOUD_SUFFIXES = (".csv", ".xyz", ".txt")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("FPD_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FPD_SEED must be an integer, got {env!r}") from None


def _collect(paths, suffixes) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(f for f in p.iterdir() if f.is_file() and f.suffix.lower() in suffixes))
        elif p.exists():
            files.append(p)
        else:
            raise DataError(f"{p}: no such file or directory")
    if not files:
        raise DataError("no inputs")
    return files


def _read_diagrams(paths, dim=None) -> tuple[list, list]:
    files = _collect(paths, DIAGRAM_SUFFIXES)
    diagrams = [read_diagram(f, dim=dim) for f in files]
    return diagrams, [f.stem for f in files]


def _capped(diagrams: list, cap: float | None) -> list:
    if all(d.is_finite for d in diagrams):
        return diagrams
    t = cap if cap is not None else default_cap(diagrams)
    return [cap_infinities(d, t) for d in diagrams]


def _distance_kind(args) -> DistanceKind:
    params = {k: getattr(args, k, None) for k in ("directions", "resolution", "bandwidth", "t")}
    return DistanceKind(args.distance, params)


def _output_file(path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


class Manifest:
    """Run record written next to every output artifact."""

    def __init__(self, args, argv):
        self.start = time.perf_counter()
        self.data = {
            "subcommand": args.command,
            "argv": list(argv),
            "flags": {k: _plain(v) for k, v in sorted(vars(args).items()) if k not in ("func", "command")},
            "seed": getattr(args, "seed", None),
            "inputs": [],
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "timings": {},
        }

    def inputs(self, paths):
        self.data["inputs"] = [str(p) for p in paths]

    def phase(self, name: str, seconds: float):
        self.data["timings"][name] = self.data["timings"].get(name, 0.0) + seconds

    def write(self, output: Path):
        self.data["timings"]["total"] = time.perf_counter() - self.start
        path = output / "manifest.json" if output.is_dir() else output.with_name(output.name + ".manifest.json")
        path.write_text(json.dumps(self.data, indent=2, default=_plain))
        return path


def _plain(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def cmd_compute_ph(args, man: Manifest) -> int:
    files = _collect(args.inputs, CLOUD_SUFFIXES)
    man.inputs(files)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    for f in files:
        pc = read_point_cloud(f)
        diagrams = rips_diagrams(pc, max_degree=args.max_dim, threshold=args.threshold,
                                 max_simplices=args.max_simplices)
        if not args.no_cap:
            t = args.cap if args.cap is not None else default_cap(diagrams)
            diagrams = [cap_infinities(d, t) if not d.is_finite else d for d in diagrams]
        for d in diagrams:
            write_diagram(d, out / f"{f.stem}_h{d.dim}.csv")
    man.phase("ph", time.perf_counter() - t0)
    man.write(out)
    return EXIT_OK


def cmd_dist(args, man: Manifest) -> int:
    a = read_diagram(args.a, dim=args.dim)
    b = read_diagram(args.b, dim=args.dim)
    if a.dim != b.dim:
        raise DataError(f"diagrams have different degrees ({a.dim} and {b.dim})")
    a, b = _capped([a, b], args.cap)
    kind = _distance_kind(args)
    d = make_distance(kind, corpus=[a, b])(a, b)
    print(fmt(d))
    return EXIT_OK


def cmd_mean(args, man: Manifest) -> int:
    diagrams, _ = _read_diagrams(args.diagrams, args.dim)
    man.inputs(args.diagrams)
    if args.weights is None:
        w = np.ones(len(diagrams))
    else:
        try:
            w = np.array([float(x) for x in args.weights.split(",")])
        except ValueError:
            raise UsageError(f"--weights must be comma-separated numbers, got {args.weights!r}") from None
        if len(w) != len(diagrams):
            raise UsageError(f"{len(w)} weights for {len(diagrams)} diagrams")
    diagrams = _capped(diagrams, args.cap)
    t0 = time.perf_counter()
    state = weighted_frechet_mean(WeightedMeanProblem(diagrams, w), max_iter=args.max_iter,
                                  seed=resolve_seed(args.seed))
    man.phase("means", time.perf_counter() - t0)
    out = _output_file(args.output)
    write_diagram(state.mean, out)
    man.write(out)
    print(f"frechet_value {fmt(state.frechet_value)} iterations {state.iteration} converged {state.converged}")
    if args.fail_on_nonconvergence and not state.converged:
        print("warning: Fréchet mean did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_cluster(args, man: Manifest) -> int:
    diagrams, names = _read_diagrams(args.inputs, args.dim)
    man.inputs(args.inputs)
    diagrams = _capped(diagrams, args.cap)
    cfg = FcmConfig(c=args.c, max_iter=args.max_iter, seed=resolve_seed(args.seed),
                    distance=_distance_kind(args), membership_exponent=args.exponent,
                    convergence_tol=args.tol, stop_on_convergence=args.stop_on_convergence,
                    threads=args.threads)
    state = cluster(DiagramSet(diagrams, names), cfg)
    for k, v in state.timings.items():
        man.phase(k, v)
    out = _output_file(args.output)
    out.write_text(json.dumps(state.to_dict(), indent=2))
    man.write(out)
    for name, row in zip(names, state.memberships):
        print(name, " ".join(fmt(v) for v in row))
    if args.fail_on_nonconvergence and not state.converged:
        print("warning: clustering cost did not stabilise", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _load_state(path) -> ClusterState:
    try:
        return ClusterState.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: not valid JSON ({e})") from None


def cmd_rank(args, man: Manifest) -> int:
    state = _load_state(args.state)
    query = read_diagram(args.query, dim=args.dim)
    cands, names = _read_diagrams(args.candidates, args.dim)
    pool = _capped([query, *cands], args.cap)
    kind = _distance_kind(args) if args.distance else None
    ranked = rank_by_centre(state, pool[0], DiagramSet(pool[1:], names), args.k, distance=kind)
    lines = [f"{name},{fmt(d)}" for name, d in ranked]
    print("\n".join(lines))
    if args.output:
        out = _output_file(args.output)
        out.write_text("candidate,distance\n" + "\n".join(lines) + "\n")
        man.inputs([args.state, args.query, *args.candidates])
        man.write(out)
    return EXIT_OK


def cmd_eval(args, man: Manifest) -> int:
    state = _load_state(args.state)
    labels = read_labels(args.labels, state.names or None)
    print(fmt(fuzzy_rand(state.memberships, labels)))
    return EXIT_OK


def cmd_gen(args, man: Manifest) -> int:
    pc = generate(ShapeSpec(args.kind, args.n, args.sigma, resolve_seed(args.seed)))
    out = _output_file(args.output)
    write_point_cloud(pc, out)
    man.write(out)
    return EXIT_OK


def cmd_gen_lattice(args, man: Manifest) -> int:
    pc = synth_lattice(args.kind, args.cells, args.a)
    out = _output_file(args.output)
    write_point_cloud(pc, out)
    man.write(out)
    return EXIT_OK


def cmd_transform(args, man: Manifest) -> int:
    chosen = [(k, getattr(args, k)) for k in ("rotate", "reflect", "translate") if getattr(args, k)]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --rotate, --reflect, --translate")
    try:
        spec = parse_transform(*chosen[0])
    except ValueError as e:
        raise UsageError(str(e)) from None
    pc = read_point_cloud(args.input)
    man.inputs([args.input])
    out = _output_file(args.output)
    write_point_cloud(transform(pc, spec), out)
    man.write(out)
    return EXIT_OK


def _int_list(s: str) -> tuple:
    try:
        return tuple(int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _str_list(s: str) -> tuple:
    return tuple(x.strip() for x in s.split(",") if x.strip())


_EXPERIMENT_FLAGS = {
    "exemplar": ("seed", "n_points", "sigma", "data_seeds", "c", "max_iter", "exponent", "distance", "threads"),
    "convergence": ("n_diagrams", "grid_points", "seeds", "c", "max_iter", "exponent", "threads"),
    "distances": ("kinds", "seed", "n_points", "sigma", "data_seeds", "c", "max_iter", "exponent", "threads"),
    "lattice": ("transforms", "cells", "a", "seed", "c", "max_iter", "exponent", "threads"),
}
_RENAME = {"grid_points": "n_points"}


def cmd_experiment(args, man: Manifest) -> int:
    overrides = {}
    for flag in _EXPERIMENT_FLAGS[args.name]:
        v = getattr(args, flag, None)
        if flag == "seed":
            v = resolve_seed(v)
        if v is not None:
            overrides[_RENAME.get(flag, flag)] = v
    unused = [f for f in ("n_diagrams", "grid_points", "seeds", "kinds", "transforms", "cells", "a",
                          "data_seeds", "n_points", "sigma", "distance")
              if getattr(args, f, None) is not None and f not in _EXPERIMENT_FLAGS[args.name]]
    if unused:
        raise UsageError(f"--{unused[0].replace('_', '-')} does not apply to the {args.name} experiment")
    out = Path(args.output)
    res = run_experiment(args.name, out, **overrides)
    for k, v in res.timings.items():
        if k != "total":
            man.phase(k, v)
    man.write(out)
    for f in res.files:
        print(f)
    if args.fail_on_nonconvergence and args.name == "convergence" and not res.summary["all_converged"]:
        print("warning: some runs did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_plot(args, man: Manifest) -> int:
    if args.kind == "diagram":
        ds = [read_diagram(p, dim=args.dim) for p in args.data]
        svg = plot.diagram_svg(ds, [Path(p).stem for p in args.data] if len(ds) > 1 else None, args.title)
    else:
        if len(args.data) != 1:
            raise UsageError("a heat map takes exactly one CSV table")
        V, rows, cols = plot.read_heatmap_csv(args.data[0])
        svg = plot.heatmap_svg(V, rows, cols, args.title)
    out = _output_file(args.output)
    plot.write_svg(svg, out)
    man.inputs(args.data)
    man.write(out)
    return EXIT_OK


def _add_distance_flags(p, default="w2"):
    p.add_argument("--distance", "--kind", dest="distance", default=default,
                   choices=sorted(KIND_ALIASES), help="membership distance (default: %(default)s)")
    p.add_argument("--directions", type=int, help="sliced Wasserstein directions (default 50)")
    p.add_argument("--resolution", type=int, help="persistence image grid size (default 20)")
    p.add_argument("--bandwidth", type=float, help="persistence image Gaussian width")
    p.add_argument("--t", type=float, help="heat kernel time")


def _add_diagram_flags(p):
    p.add_argument("--dim", type=int, help="homology degree to read from multi-degree files")
    p.add_argument("--cap", type=float, help="value substituted for infinite deaths "
                                             "(default: twice the largest finite death)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fpd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"fpd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute-ph", help="Vietoris-Rips persistence of point clouds")
    p.add_argument("inputs", nargs="+", help="point-cloud files or directories")
    p.add_argument("--max-dim", type=int, default=1, help="highest homology degree (default 1)")
    p.add_argument("--threshold", type=float, help="largest filtration scale (default: cloud diameter)")
    p.add_argument("--cap", type=float, help="value for infinite deaths (default: twice the largest finite death)")
    p.add_argument("--no-cap", action="store_true", help="keep infinite deaths as inf")
    p.add_argument("--max-simplices", type=int, default=5_000_000)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_compute_ph)

    p = sub.add_parser("dist", help="distance between two diagrams")
    p.add_argument("a")
    p.add_argument("b")
    _add_distance_flags(p)
    _add_diagram_flags(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("mean", help="weighted Fréchet mean of diagrams")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--weights", help="comma-separated weights, one per diagram (default: equal)")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--fail-on-nonconvergence", action="store_true")
    _add_diagram_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("cluster", help="fuzzy c-means clustering of diagrams")
    p.add_argument("inputs", nargs="+", help="diagram files or directories")
    p.add_argument("-c", type=int, default=3, help="number of clusters")
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--exponent", default="jmin", choices=["jmin", "literal", "j_minimizing", "paper_literal"])
    p.add_argument("--tol", type=float, default=0.005, help="relative cost change counted as converged")
    p.add_argument("--stop-on-convergence", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--fail-on-nonconvergence", action="store_true")
    _add_distance_flags(p)
    _add_diagram_flags(p)
    p.add_argument("-o", "--output", required=True, help="state JSON path")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rank", help="candidates nearest the centre closest to a query")
    p.add_argument("--state", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--candidates", nargs="+", required=True)
    p.add_argument("-k", type=int, default=3)
    _add_distance_flags(p, default=None)
    _add_diagram_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="fuzzy Rand index of a clustering")
    p.add_argument("--state", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="synthetic planar point cloud")
    p.add_argument("--kind", required=True, choices=SHAPE_KINDS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gen-lattice", help="BCC or FCC supercell")
    p.add_argument("--kind", required=True, choices=["bcc", "fcc"])
    p.add_argument("--cells", type=int, default=2)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_lattice)

    p = sub.add_parser("transform", help="rigid motion of a point cloud")
    p.add_argument("input")
    p.add_argument("--rotate", help="axis:degrees, e.g. z:180")
    p.add_argument("--reflect", help="axis, e.g. x")
    p.add_argument("--translate", help="vector, e.g. 1,0,0")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("experiment", help="run a reproduction preset")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("-c", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--exponent", choices=["jmin", "literal", "j_minimizing", "paper_literal"])
    p.add_argument("--threads", type=int)
    p.add_argument("--n-points", type=int, help="points per synthetic cloud")
    p.add_argument("--sigma", type=float)
    p.add_argument("--data-seeds", type=_int_list)
    p.add_argument("--distance", choices=sorted(KIND_ALIASES))
    p.add_argument("--n-diagrams", type=_int_list, help="convergence grid rows, e.g. 25,50")
    p.add_argument("--grid-points", type=_int_list, help="convergence grid columns, e.g. 10,20")
    p.add_argument("--seeds", type=_int_list, help="convergence repeats, e.g. 0,1,2")
    p.add_argument("--kinds", type=_str_list, help="distances to compare, e.g. w2,sw")
    p.add_argument("--transforms", type=_str_list, help="lattice transforms, e.g. none,rotate")
    p.add_argument("--cells", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--fail-on-nonconvergence", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="render a diagram or heat map as SVG")
    p.add_argument("data", nargs="+")
    p.add_argument("--kind", choices=["diagram", "heatmap"], default="diagram")
    p.add_argument("--title")
    p.add_argument("--dim", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        man = Manifest(args, argv)
        if "seed" in man.data["flags"]:
            man.data["seed"] = resolve_seed(args.seed)
        return args.func(args, man)
    except UsageError as e:
        print(f"fpd {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DiagramFormatError, SimplexBudgetExceeded, ValueError, ArithmeticError, OSError) as e:
        print(f"fpd {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

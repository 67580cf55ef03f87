"""Command-line interface wiring the bound / simulate / discard / fit /
validate / pipeline / report stages together.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or solver
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bound_curve, m0, write_curve_csv
from .config import RunConfig, default_config_text, load_config
from .driftsim import (
    EFFECTIVE_FACET,
    estimate_mu,
    facet_matrix,
    generate_trace,
    rotation_angle,
    write_trace_csv,
    write_trace_jsonl,
)
from .milp.simplex import SimplexNumericalError
from .pipeline import (
    HISTOGRAM_FILE,
    HYPOTHESIS_FILE,
    MODEL_FILE,
    SOLVE_FILE,
    VALIDATION_FILE,
    RunManifest,
    StageError,
    fit_geometry,
    load_trace,
    new_run_dir,
    planned_sample_count,
    resolve_runs_root,
    run_pipeline,
    stage_fit,
    stage_validate,
)
from .polytope import Polytope
from .preprocess import discard_redundant, project


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


def _add_config_arg(parser) -> None:
    parser.add_argument(
        "--config", metavar="FILE", help="run configuration (key = value lines)"
    )


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return RunConfig()


def cmd_bound(args) -> int:
    if args.curve:
        if not args.mu_pair:
            raise UsageError("--curve requires at least one --mu-pair LO:HI")
        pairs = []
        for text in args.mu_pair:
            lo, _, hi = text.partition(":")
            pairs.append((float(lo), float(hi)))
        lo, hi, count = args.epsilon_grid
        grid = np.geomspace(lo, hi, int(count)).tolist()
        rows = bound_curve(args.delta, pairs, args.vc_dim, grid)
        if args.out:
            with open(args.out, "w") as stream:
                write_curve_csv(rows, stream)
            print(f"wrote {len(rows)} curve rows to {args.out}")
        else:
            write_curve_csv(rows, sys.stdout)
        return 0
    result = m0(args.epsilon, args.delta, args.mu_min, args.mu_max, args.vc_dim)
    print(f"term 1 (slow drift, mu_min): {result.term_mu_min:.12g}")
    print(f"term 2 (fast drift, mu_max): {result.term_mu_max:.12g}")
    print(f"required samples m0 = {result.samples}")
    print(f"dominant term: {result.dominant.value}")
    print(f"accuracy guaranteed: 4*mu_max + epsilon = {4 * args.mu_max + args.epsilon:.6g}")
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args)
    m = args.samples or planned_sample_count(config)
    trace = generate_trace(config.aeb_params(), m)
    out = Path(args.out)
    with out.open("w") as stream:
        write_trace_jsonl(trace, stream)
    ones = int(trace.label.sum())
    print(f"wrote {m} samples to {out} (label 1: {ones}, label 0: {m - ones})")
    if args.csv:
        with open(args.csv, "w") as stream:
            write_trace_csv(trace, stream)
        print(f"wrote CSV copy to {args.csv}")
    if args.estimate_mu:
        est = estimate_mu(trace, n_mc=args.estimate_mu, seed=config.seed)
        print(
            f"estimated average target change mu = {est.mu_hat:.6f} "
            f"(configured band [{config.mu_min}, {config.mu_max}])"
        )
    return 0


def cmd_discard(args) -> int:
    trace = load_trace(args.trace)
    theta = rotation_angle(trace.params.mass0, trace.params.force0)
    direction = facet_matrix(theta)[EFFECTIVE_FACET]
    view = project(trace.points, trace.label, direction)
    kept, report = discard_redundant(view)
    with open(args.out, "w") as stream:
        report.dump(stream)
    frac = (report.total - report.kept) / report.total
    print(
        f"kept {report.kept} of {report.total} samples "
        f"({frac:.1%} discarded); wrote {args.out}"
    )
    return 0


def cmd_fit(args) -> int:
    config = _load_config(args)
    trace = load_trace(args.trace)
    geometry = fit_geometry(config)
    view = project(trace.points, trace.label, geometry.direction)
    kept, report = discard_redundant(view)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hypothesis, stats = stage_fit(config, out_dir, geometry, kept)
    print(
        f"fit complete via {stats['route']}: {stats['violations']:.0f} violations, "
        f"{stats['true_disagreements']} true disagreements on {report.kept} kept samples"
    )
    print(f"artifacts in {out_dir}: {MODEL_FILE}, {SOLVE_FILE}, {HYPOTHESIS_FILE}")
    return 0


def cmd_validate(args) -> int:
    config = _load_config(args)
    payload = json.loads(Path(args.hypothesis).read_text())
    hypothesis = Polytope.from_json_dict(payload)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    m = args.samples or planned_sample_count(config)
    report, stats = stage_validate(config, out_dir, hypothesis, m)
    print(
        f"validation over {report.runs} runs x {report.samples_per_run} samples: "
        f"mean disagreement {report.mean:.4f}, bound {report.bound_value:.4f}, "
        f"fraction exceeding {report.fraction_exceeding:.4f}"
    )
    print(f"artifacts in {out_dir}: {VALIDATION_FILE}, {HISTOGRAM_FILE}")
    return 0


def cmd_pipeline(args) -> int:
    config = _load_config(args)
    rundir = None
    if args.run_dir:
        rundir = Path(args.run_dir)
    else:
        rundir = new_run_dir(resolve_runs_root(args.out_root), config.seed)
    manifest, rundir = run_pipeline(config, rundir)
    print(f"pipeline complete: {rundir}")
    for stage in manifest.stages:
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in stage["stats"].items() if k != "seconds")
        print(f"  {stage['stage']}: {keys}")
    return 0


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def cmd_report(args) -> int:
    rundir = Path(args.run)
    manifest = RunManifest.read(rundir)
    print(f"run {rundir} (tool version {manifest.version}, seed {manifest.seed})")
    for stage in manifest.stages:
        print(f"stage {stage['stage']}:")
        for key, value in stage["stats"].items():
            print(f"  {key}: {_fmt(value)}")
        for label, name in stage["artifacts"].items():
            status = "ok" if (rundir / name).exists() else "MISSING"
            print(f"  artifact {label}: {name} [{status}]")
    validation = rundir / VALIDATION_FILE
    if validation.exists():
        data = json.loads(validation.read_text())
        print(
            f"summary: mean disagreement {data['mean']:.4f} vs bound {data['bound_value']:.4f}; "
            f"{data['fraction_exceeding']:.2%} of runs exceeded the bound"
        )
        print(f"note: {data['note']}")
    return 0


def cmd_init_config(args) -> int:
    text = default_config_text()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote default configuration to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="drifttrack", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="sample-size bound and its two-term breakdown")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--mu-min", type=float, default=0.0078)
    p.add_argument("--mu-max", type=float, default=0.02)
    p.add_argument("--vc-dim", type=int, default=1)
    p.add_argument("--curve", action="store_true", help="emit a CSV curve over epsilon")
    p.add_argument(
        "--mu-pair",
        action="append",
        metavar="LO:HI",
        help="mu_min:mu_max pair for --curve (repeatable)",
    )
    p.add_argument(
        "--epsilon-grid",
        nargs=3,
        type=float,
        default=(1e-3, 0.5, 40),
        metavar=("LO", "HI", "N"),
        help="geometric epsilon grid for --curve",
    )
    p.add_argument("--out", metavar="FILE", help="CSV destination (default stdout)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="generate a drifting-target trace")
    _add_config_arg(p)
    p.add_argument("--samples", type=int, default=0, help="override the sample count")
    p.add_argument("--out", required=True, metavar="FILE", help="trace JSONL destination")
    p.add_argument("--csv", metavar="FILE", help="also write a CSV copy")
    p.add_argument(
        "--estimate-mu",
        type=int,
        default=0,
        metavar="N_MC",
        help="Monte Carlo draws per step for a drift-rate estimate",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("discard", help="drop samples no optimal threshold can misclassify")
    p.add_argument("--trace", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE", help="JSON report destination")
    p.set_defaults(func=cmd_discard)

    p = sub.add_parser("fit", help="fit the minimal-disagreement hypothesis")
    _add_config_arg(p)
    p.add_argument("--trace", required=True, metavar="FILE")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("validate", help="Monte Carlo check of the accuracy guarantee")
    _add_config_arg(p)
    p.add_argument("--hypothesis", required=True, metavar="FILE")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--samples", type=int, default=0, help="drift-chain length override")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pipeline", help="run simulate -> discard -> fit -> validate")
    _add_config_arg(p)
    p.add_argument("--run-dir", metavar="DIR", help="exact run directory (for reproduction)")
    p.add_argument("--out-root", metavar="DIR", help="root for timestamped run directories")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="summarize a finished run directory")
    p.add_argument("--run", required=True, metavar="DIR")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("init-config", help="print or write the default configuration")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_init_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (SimplexNumericalError, RuntimeError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

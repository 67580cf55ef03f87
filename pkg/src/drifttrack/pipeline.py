"""Pipeline orchestration: simulate -> discard -> fit -> validate, with artifacts.

Every stage writes its output under a run directory with fixed filenames, so
a re-run with the same configuration and seed reproduces each numeric
artifact byte for byte (only timestamps inside the manifest differ).  The
fit stage solves the reduced single-facet program exactly: by a direct
threshold sweep at scale, or through the embedded branch-and-bound solver on
request; both routes answer the same optimization problem and are
cross-checked in the test suite.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import m0
from .config import RunConfig, dumps_config
from .driftsim import (
    EFFECTIVE_FACET,
    AebParams,
    DriftTrace,
    aeb_label,
    draw_measurements,
    facet_matrix,
    fresh_final_target,
    generate_trace,
    read_trace_jsonl,
    rotation_angle,
    write_trace_jsonl,
)
from .milp import (
    MilpModel,
    SolveLimits,
    SolveStatus,
    TieBreak,
    branch_and_bound,
    build_model,
    check_solution,
    export_lp,
    make_tiebreak_model,
)
from .polytope import BoxDomain, CoeffBox, Polytope
from .preprocess import (
    DiscardReport,
    ProjectionView,
    discard_redundant,
    project,
    threshold_oracle,
)
from .validate import ValidationReport, monte_carlo_validate, write_histogram_csv

RUNS_ENV_VAR = "DRIFTTRACK_RUNS"

TRACE_FILE = "trace.jsonl"
DISCARD_FILE = "discard.json"
MODEL_FILE = "model.lp"
SOLVE_FILE = "solve.json"
HYPOTHESIS_FILE = "hypothesis.json"
VALIDATION_FILE = "validation.json"
HISTOGRAM_FILE = "histogram.csv"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.txt"


class StageError(RuntimeError):
    """A pipeline stage failed; partial artifacts stay on disk."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunManifest:
    """Execution record: config, versions, and per-stage artifacts."""

    config_text: str
    version: str
    seed: int
    created_unix: float
    stages: list[dict] = field(default_factory=list)

    def add_stage(self, name: str, artifacts: dict[str, str], stats: dict) -> None:
        self.stages.append(
            {
                "stage": name,
                "finished_unix": time.time(),
                "artifacts": artifacts,
                "stats": stats,
            }
        )

    def to_json_dict(self) -> dict:
        return {
            "config": self.config_text,
            "version": self.version,
            "seed": self.seed,
            "created_unix": self.created_unix,
            "stages": self.stages,
        }

    def write(self, rundir: Path) -> None:
        path = rundir / MANIFEST_FILE
        with path.open("w") as stream:
            json.dump(self.to_json_dict(), stream, sort_keys=True, indent=2)
            stream.write("\n")

    @classmethod
    def read(cls, rundir: Path) -> "RunManifest":
        data = json.loads((Path(rundir) / MANIFEST_FILE).read_text())
        manifest = cls(
            config_text=data["config"],
            version=data["version"],
            seed=data["seed"],
            created_unix=data["created_unix"],
        )
        manifest.stages = data["stages"]
        return manifest


def resolve_runs_root(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(RUNS_ENV_VAR, "runs"))


def new_run_dir(root: Path, seed: int) -> Path:
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    base = root / f"{stamp}-{seed}"
    candidate = base
    suffix = 1
    while candidate.exists():
        suffix += 1
        candidate = Path(f"{base}-{suffix}")
    candidate.mkdir(parents=True)
    return candidate


def planned_sample_count(config: RunConfig) -> int:
    if config.samples > 0:
        return config.samples
    return m0(
        config.epsilon, config.delta, config.mu_min, config.mu_max, config.vc_dim
    ).samples


# ---------------------------------------------------------------------------
# Geometry shared by fit and validate
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FitGeometry:
    """Fixed facet system of the braking study and its reduced 1-D frame."""

    theta: float
    A: np.ndarray
    direction: np.ndarray
    domain: BoxDomain
    t_lo: float
    t_hi: float
    enclosing_b: np.ndarray  # offsets that keep the non-effective facets inactive


def fit_geometry(config: RunConfig) -> FitGeometry:
    params = config.aeb_params()
    theta = rotation_angle(params.mass0, params.force0)
    A = facet_matrix(theta)
    v2_lo = max(0.0, params.v2_mean - config.v2_sigma_span * params.v2_std)
    v2_hi = params.v2_mean + config.v2_sigma_span * params.v2_std
    domain = BoxDomain(
        lower=np.array([params.l_min, v2_lo]), upper=np.array([params.l_max, v2_hi])
    )
    corners = np.array(
        [
            [domain.lower[0], domain.lower[1]],
            [domain.lower[0], domain.upper[1]],
            [domain.upper[0], domain.lower[1]],
            [domain.upper[0], domain.upper[1]],
        ]
    )
    direction = A[EFFECTIVE_FACET]
    t_vals = corners @ direction
    margin = config.domain_margin
    enclosing = np.empty(A.shape[0])
    for j in range(A.shape[0]):
        enclosing[j] = -float((corners @ A[j]).max()) - margin
    return FitGeometry(
        theta=theta,
        A=A,
        direction=direction,
        domain=domain,
        t_lo=float(t_vals.min()),
        t_hi=float(t_vals.max()),
        enclosing_b=enclosing,
    )


def reduced_model(config: RunConfig, geometry: FitGeometry, view: ProjectionView) -> MilpModel:
    """The single-facet program over projections: label 1 iff t + b <= 0."""
    margin = config.domain_margin
    domain_1d = BoxDomain(lower=[geometry.t_lo], upper=[geometry.t_hi])
    coeffs = CoeffBox.for_fixed_rows(
        A=[[1.0]],
        b_lower=[-(geometry.t_hi + margin)],
        b_upper=[-(geometry.t_lo - margin)],
    )
    return build_model(
        points=view.t.reshape(-1, 1),
        labels=view.labels,
        n_f=1,
        domain=domain_1d,
        coeffs=coeffs,
        fixed_A=np.array([[1.0]]),
        rho=config.rho,
        tie_break=TieBreak(config.tie_break) if config.tie_break != "none" else TieBreak.NONE,
        bigm_margin=config.bigm_margin,
    )


def threshold_assignment(model: MilpModel, theta_star: float) -> dict[str, float]:
    """Feasible assignment of the reduced model encoding the threshold fit."""
    assignment: dict[str, float] = {"b_0": -theta_star}
    rho = model.rho
    t = model.points[:, 0]
    labels = model.labels
    for i in range(model.m):
        g = t[i] - theta_star
        if labels[i] == 1:
            s = max(0.0, g)
        else:
            s = max(0.0, rho - g)
            assignment[f"z_{i}_0"] = 0.0
        assignment[f"s_{i}_0"] = s
        assignment[f"v_{i}"] = 1.0 if s > 0.0 else 0.0
    return assignment


def _pick_threshold(
    intervals, tie_break: str, theta_min: float, theta_max: float
) -> tuple[float, str]:
    """Deterministic threshold inside the optimal set.

    offset_sum minimizes the volume surrogate, which for the reduced model
    means the smallest admissible threshold; none takes a midpoint of the
    first optimal interval.  Unbounded optimal intervals are clamped to the
    admissible offset range of the program, so this choice coincides with
    what the mixed-integer route returns on the same instance.
    """
    lo, hi = intervals[0]
    lo = max(lo, theta_min)
    hi = min(hi, theta_max)
    if tie_break == "offset_sum":
        return lo, "smallest admissible threshold in the optimal set"
    return 0.5 * (lo + hi), "midpoint of the first optimal interval"


def lift_hypothesis(geometry: FitGeometry, theta_star: float) -> Polytope:
    """Embed the fitted threshold as the effective facet of the full system."""
    b = geometry.enclosing_b.copy()
    b[EFFECTIVE_FACET] = -theta_star
    return Polytope(A=geometry.A.copy(), b=b)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_simulate(config: RunConfig, rundir: Path) -> tuple[DriftTrace, dict]:
    m = planned_sample_count(config)
    started = time.perf_counter()
    trace = generate_trace(config.aeb_params(), m)
    with (rundir / TRACE_FILE).open("w") as stream:
        write_trace_jsonl(trace, stream)
    stats = {
        "m": m,
        "label1": int(trace.label.sum()),
        "label0": int(m - trace.label.sum()),
        "seconds": time.perf_counter() - started,
    }
    return trace, stats


def stage_discard(
    config: RunConfig, rundir: Path, trace: DriftTrace, geometry: FitGeometry
) -> tuple[ProjectionView, DiscardReport, dict]:
    started = time.perf_counter()
    view = project(trace.points, trace.label, geometry.direction)
    kept, report = discard_redundant(view)
    with (rundir / DISCARD_FILE).open("w") as stream:
        report.dump(stream)
    stats = {
        "kept": report.kept,
        "discarded": report.total - report.kept,
        "fraction_discarded": (report.total - report.kept) / report.total,
        "seconds": time.perf_counter() - started,
    }
    return kept, report, stats


def stage_fit(
    config: RunConfig, rundir: Path, geometry: FitGeometry, kept: ProjectionView
) -> tuple[Polytope, dict]:
    started = time.perf_counter()
    model = reduced_model(config, geometry, kept)
    with (rundir / MODEL_FILE).open("w") as stream:
        stream.write(export_lp(model))

    route = config.fit_route
    if route == "auto":
        route = "threshold"  # single effective facet, fixed orientation

    oracle = threshold_oracle(kept)
    b_var = model.variables[model.var_index["b_0"]]
    theta_min, theta_max = -b_var.upper, -b_var.lower
    if route == "threshold":
        theta_star, tie_note = _pick_threshold(
            oracle.intervals, config.tie_break, theta_min, theta_max
        )
        assignment = threshold_assignment(model, theta_star)
        solver_stats = {"route": "threshold-sweep-exact"}
    else:
        limits = SolveLimits(
            time_limit=config.solver_time_limit or None,
            node_limit=config.solver_node_limit or None,
            gap=config.solver_gap,
        )
        stage1 = branch_and_bound(model, limits)
        if stage1.assignment is None:
            raise RuntimeError(f"stage-1 solve ended {stage1.status.value} without incumbent")
        assignment = stage1.assignment
        tie_note = "none"
        if config.tie_break == "offset_sum" and stage1.status is SolveStatus.OPTIMAL:
            stage2 = branch_and_bound(
                make_tiebreak_model(model, int(round(stage1.objective))), limits
            )
            if stage2.assignment is not None:
                assignment = stage2.assignment
                tie_note = "offset-sum second stage"
        theta_star = -assignment["b_0"]
        solver_stats = {
            "route": "branch-and-bound",
            "status": stage1.status.value,
            "nodes": stage1.nodes,
            "bound": stage1.bound,
        }

    audit = check_solution(model, assignment)
    if not audit.feasible:
        raise RuntimeError(
            f"fit produced an infeasible assignment: {audit.constraint_violations[:3]}"
        )
    hypothesis = lift_hypothesis(geometry, theta_star)
    with (rundir / HYPOTHESIS_FILE).open("w") as stream:
        payload = hypothesis.to_json_dict()
        payload["theta"] = geometry.theta
        payload["threshold"] = theta_star
        payload["effective_facet"] = EFFECTIVE_FACET + 1
        json.dump(payload, stream, sort_keys=True, indent=2)
        stream.write("\n")
    # timing stays out of solve.json so re-runs reproduce it byte for byte
    solve_record = {
        "violations": audit.sum_v,
        "true_disagreements": audit.true_disagreements,
        "oracle_count": oracle.count,
        "optimal_intervals": [[lo, hi] for lo, hi in oracle.intervals],
        "threshold": theta_star,
        "tie_break": config.tie_break,
        "tie_break_note": tie_note,
        "rho": config.rho,
        "tolerance_flagged": list(audit.tolerance_flags),
        **solver_stats,
    }
    with (rundir / SOLVE_FILE).open("w") as stream:
        json.dump(solve_record, stream, sort_keys=True, indent=2)
        stream.write("\n")
    stats = {
        "violations": audit.sum_v,
        "true_disagreements": audit.true_disagreements,
        "route": solve_record["route"],
        "seconds": time.perf_counter() - started,
    }
    return hypothesis, stats


def aeb_target_generator(params: AebParams, m: int):
    """Fresh drift endpoint plus fresh samples, per validation run."""

    def generate(rng: np.random.Generator, size: int):
        mass, force = fresh_final_target(params, m, rng)
        l, v2 = draw_measurements(params, rng, size)
        labels = aeb_label(l, v2, mass, force)
        return np.column_stack([l, v2]), labels

    return generate


def stage_validate(
    config: RunConfig, rundir: Path, hypothesis: Polytope, m: int
) -> tuple[ValidationReport, dict]:
    started = time.perf_counter()
    report = monte_carlo_validate(
        hypothesis=hypothesis,
        target_generator=aeb_target_generator(config.aeb_params(), m),
        runs=config.validation_runs,
        samples_per_run=config.validation_samples,
        bound_params=config.bound_params(),
        seed=config.seed,
        bins=config.histogram_bins,
    )
    with (rundir / VALIDATION_FILE).open("w") as stream:
        report.dump(stream)
    with (rundir / HISTOGRAM_FILE).open("w") as stream:
        write_histogram_csv(report, stream)
    stats = {
        "mean": report.mean,
        "max": report.max_value,
        "bound_value": report.bound_value,
        "fraction_exceeding": report.fraction_exceeding,
        "seconds": time.perf_counter() - started,
    }
    return report, stats


def run_pipeline(config: RunConfig, rundir: str | Path | None = None) -> tuple[RunManifest, Path]:
    """Execute all stages; on failure the manifest records the completed ones."""
    if rundir is None:
        rundir = new_run_dir(resolve_runs_root(), config.seed)
    else:
        rundir = Path(rundir)
        rundir.mkdir(parents=True, exist_ok=True)
    (rundir / CONFIG_FILE).write_text(dumps_config(config))
    manifest = RunManifest(
        config_text=dumps_config(config),
        version=__version__,
        seed=config.seed,
        created_unix=time.time(),
    )
    geometry = fit_geometry(config)
    current = "simulate"
    try:
        trace, stats = stage_simulate(config, rundir)
        manifest.add_stage("simulate", {"trace": TRACE_FILE}, stats)

        current = "discard"
        kept, _, stats = stage_discard(config, rundir, trace, geometry)
        manifest.add_stage("discard", {"report": DISCARD_FILE}, stats)

        current = "fit"
        hypothesis, stats = stage_fit(config, rundir, geometry, kept)
        manifest.add_stage(
            "fit",
            {"model": MODEL_FILE, "solve": SOLVE_FILE, "hypothesis": HYPOTHESIS_FILE},
            stats,
        )

        current = "validate"
        _, stats = stage_validate(config, rundir, hypothesis, trace.m)
        manifest.add_stage(
            "validate", {"report": VALIDATION_FILE, "histogram": HISTOGRAM_FILE}, stats
        )
    except Exception as err:
        manifest.write(rundir)
        raise StageError(current, err) from err
    manifest.write(rundir)
    return manifest, rundir


def load_trace(path: str | Path) -> DriftTrace:
    with Path(path).open() as stream:
        return read_trace_jsonl(stream)

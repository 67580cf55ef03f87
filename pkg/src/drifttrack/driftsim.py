"""Drifting-target trace generation for the emergency-braking case study.

The labeler declares a sample (l, v2) safe when the stopping distance
0.5 * v2 * mass / force fits inside the measured gap l.  Braking force decays
multiplicatively step to step, while the vehicle mass fluctuates around its
nominal value with a fresh factor each step, so the labeling boundary drifts
slowly upward over a trace.  Everything is SI internally; speeds enter the
configuration in (km/h)^2 and are converted exactly once.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import IO, Iterator

import numpy as np

KMH2_TO_SI = (1000.0 / 3600.0) ** 2  # (km/h)^2 -> m^2/s^2

# Facet indexing convention: the row parallel to the safety boundary is row 3
# (1-based), the only facet the threshold fit ever moves.
EFFECTIVE_FACET = 2  # 0-based index of that row


@dataclass(frozen=True)
class AebParams:
    """Configuration of the braking simulation, speed fields in (km/h)^2."""

    l_min: float = 40.0
    l_max: float = 120.0
    v2_mean_kmh2: float = 70.0**2
    v2_std_kmh2: float = 20.0**2
    mass0: float = 900.0
    force0: float = 2600.0
    omega_force_mean: float = 1.0 - 3e-7
    omega_force_std: float = 1e-6
    omega_mass_mean: float = 1.0
    omega_mass_std: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.l_min < self.l_max:
            raise ValueError("gap interval requires 0 <= l_min < l_max")
        if self.mass0 <= 0.0 or self.force0 <= 0.0:
            raise ValueError("mass0 and force0 must be positive")
        # zero is allowed so a drift-free (constant target) study is expressible
        if self.v2_std_kmh2 < 0.0 or self.omega_force_std < 0.0 or self.omega_mass_std < 0.0:
            raise ValueError("standard deviations must be nonnegative")
        if self.v2_mean_kmh2 < 0.0:
            raise ValueError("v2_mean_kmh2 must be nonnegative")

    @property
    def v2_mean(self) -> float:
        """Mean squared speed in m^2/s^2."""
        return self.v2_mean_kmh2 * KMH2_TO_SI

    @property
    def v2_std(self) -> float:
        """Standard deviation of squared speed in m^2/s^2."""
        return self.v2_std_kmh2 * KMH2_TO_SI

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "AebParams":
        return cls(**data)


@dataclass(frozen=True)
class LabeledSample:
    """One observation: time index, measurement x = (l, v2), and its label."""

    index: int
    x: tuple[float, float]
    label: int


def braking_distance(v2, mass, force):
    return 0.5 * np.asarray(v2, dtype=float) * mass / force


def aeb_label(l, v2, mass: float, force: float):
    """1 when 0.5 * v2 * mass / force <= l, elementwise over arrays.

    Scalar inputs give a plain int.
    """
    if force <= 0.0:
        raise ValueError(f"force must be positive, got {force!r}")
    if mass <= 0.0:
        raise ValueError(f"mass must be positive, got {mass!r}")
    v2 = np.asarray(v2, dtype=float)
    if np.any(v2 < 0.0):
        raise ValueError("squared speed must be nonnegative")
    out = (braking_distance(v2, mass, force) <= np.asarray(l, dtype=float)).astype(int)
    return int(out) if out.ndim == 0 else out


def rotation_angle(mass: float, force: float) -> float:
    """Tilt of the safety boundary in the (l, v2) plane: atan(mass / (2 force))."""
    return math.atan2(mass, 2.0 * force)


def facet_matrix(theta: float) -> np.ndarray:
    """The four box-facet normals rotated by theta, for points x = (l, v2).

    Row 3 (index 2) is (-cos theta, sin theta): the facet parallel to the
    safety boundary, satisfied on the safe (large-gap) side.
    """
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [c, -s],
            [s, c],
            [-c, s],
            [-s, -c],
        ]
    )


@dataclass(frozen=True, eq=False)
class DriftTrace:
    """A generated trace: per-step measurements, labels, and brake state.

    Arrays are aligned: entry i describes sample i+1 (1-based indices in
    exports).  ``mass`` and ``force`` carry one extra entry, the state of the
    (m+1)-th target that a hypothesis is asked to predict.
    """

    params: AebParams
    seed: int
    l: np.ndarray
    v2: np.ndarray
    label: np.ndarray
    mass: np.ndarray
    force: np.ndarray

    @property
    def m(self) -> int:
        return self.l.shape[0]

    @property
    def brake_ratio(self) -> np.ndarray:
        """Per-step mass/force, the quantity that fixes each step's labeler."""
        return self.mass[: self.m] / self.force[: self.m]

    @property
    def final_mass(self) -> float:
        return float(self.mass[self.m])

    @property
    def final_force(self) -> float:
        return float(self.force[self.m])

    @property
    def final_brake_ratio(self) -> float:
        return self.final_mass / self.final_force

    @property
    def points(self) -> np.ndarray:
        """(m, 2) array of measurements x_i = (l_i, v2_i)."""
        return np.column_stack([self.l, self.v2])

    def samples(self) -> Iterator[LabeledSample]:
        for i in range(self.m):
            yield LabeledSample(
                index=i + 1,
                x=(float(self.l[i]), float(self.v2[i])),
                label=int(self.label[i]),
            )

    def final_label(self, l, v2):
        """Labels assigned by the (m+1)-th target."""
        return aeb_label(l, v2, self.final_mass, self.final_force)


def _draw_v2(rng: np.random.Generator, mean: float, std: float, size: int) -> np.ndarray:
    """Normal draws truncated to v2 >= 0 by redrawing; negligible at the
    default parameters (mean is ~12 standard deviations above zero)."""
    v2 = rng.normal(mean, std, size=size)
    while True:
        bad = v2 < 0.0
        n_bad = int(bad.sum())
        if n_bad == 0:
            return v2
        v2[bad] = rng.normal(mean, std, size=n_bad)


def draw_measurements(
    params: AebParams, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Fresh (l, v2) samples from the fixed sampling distribution."""
    l = rng.uniform(params.l_min, params.l_max, size=size)
    v2 = _draw_v2(rng, params.v2_mean, params.v2_std, size)
    return l, v2


def generate_trace(params: AebParams, m: int) -> DriftTrace:
    """Draw m labeled samples while the braking state drifts underneath them.

    Deterministic for a given (params, seed): draws happen in fixed blocks,
    first the force factors, then the mass factors, then the gaps, then the
    squared speeds.  Sample i is labeled by its own step's (mass_i, force_i);
    the returned state arrays include the (m+1)-th target.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m!r}")
    rng = np.random.default_rng(params.seed)
    omega_force = rng.normal(params.omega_force_mean, params.omega_force_std, size=m)
    omega_mass = rng.normal(params.omega_mass_mean, params.omega_mass_std, size=m + 1)
    l, v2 = draw_measurements(params, rng, m)

    force = params.force0 * np.concatenate(([1.0], np.cumprod(omega_force)))
    mass = params.mass0 * omega_mass
    if np.any(force <= 0.0) or np.any(mass <= 0.0):
        raise ValueError("drift produced a nonpositive mass or force; check omega parameters")

    label = (braking_distance(v2, 1.0, 1.0) * (mass[:m] / force[:m]) <= l).astype(int)
    return DriftTrace(
        params=params, seed=params.seed, l=l, v2=v2, label=label, mass=mass, force=force
    )


def fresh_final_target(params: AebParams, m: int, rng: np.random.Generator) -> tuple[float, float]:
    """Redraw the drift process and return the (m+1)-th target's (mass, force)."""
    omega_force = rng.normal(params.omega_force_mean, params.omega_force_std, size=m)
    force = params.force0 * float(np.prod(omega_force))
    mass = params.mass0 * float(rng.normal(params.omega_mass_mean, params.omega_mass_std))
    if force <= 0.0 or mass <= 0.0:
        raise ValueError("drift produced a nonpositive mass or force; check omega parameters")
    return mass, force


@dataclass(frozen=True, eq=False)
class MuEstimate:
    """Monte Carlo estimate of the average target change over a trace."""

    mu_hat: float
    per_step: np.ndarray


def estimate_mu(trace: DriftTrace, n_mc: int, seed: int = 0, chunk: int = 8192) -> MuEstimate:
    """Estimate, for each step i, the probability that f_i and the final
    target disagree on a fresh sample, and average over the trace.

    Each chunk of steps gets an independent substream, so estimates do not
    depend on the chunk size a caller might parallelize with.
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be at least 1, got {n_mc!r}")
    params = trace.params
    ratios = trace.brake_ratio
    final_ratio = trace.final_brake_ratio
    m = trace.m
    per_step = np.empty(m)
    streams = np.random.SeedSequence(seed).spawn(math.ceil(m / chunk))
    for idx, lo in enumerate(range(0, m, chunk)):
        hi = min(lo + chunk, m)
        rng = np.random.default_rng(streams[idx])
        k = hi - lo
        l_flat, v2_flat = draw_measurements(params, rng, k * n_mc)
        l_mc = l_flat.reshape(k, n_mc)
        v2_mc = v2_flat.reshape(k, n_mc)
        dist = 0.5 * v2_mc
        labels_i = dist * ratios[lo:hi, None] <= l_mc
        labels_final = dist * final_ratio <= l_mc
        per_step[lo:hi] = (labels_i != labels_final).mean(axis=1)
    return MuEstimate(mu_hat=float(per_step.mean()), per_step=per_step)


TRACE_COLUMNS = ("i", "l", "v2", "label", "brake_ratio")


def write_trace_jsonl(trace: DriftTrace, stream: IO[str]) -> None:
    """One JSON object per sample, preceded by a header row with the config."""
    header = {
        "format": "aeb-trace",
        "m": trace.m,
        "seed": trace.seed,
        "params": trace.params.to_json_dict(),
        "final_mass": trace.final_mass,
        "final_force": trace.final_force,
    }
    stream.write(json.dumps(header, sort_keys=True))
    stream.write("\n")
    ratio = trace.brake_ratio
    for i in range(trace.m):
        row = {
            "i": i + 1,
            "l": float(trace.l[i]),
            "v2": float(trace.v2[i]),
            "label": int(trace.label[i]),
            "brake_ratio": float(ratio[i]),
        }
        stream.write(json.dumps(row, sort_keys=True))
        stream.write("\n")


def read_trace_jsonl(stream: IO[str]) -> DriftTrace:
    header = json.loads(stream.readline())
    if header.get("format") != "aeb-trace":
        raise ValueError("not a trace file: missing aeb-trace header")
    params = AebParams.from_json_dict(header["params"])
    m = int(header["m"])
    l = np.empty(m)
    v2 = np.empty(m)
    label = np.empty(m, dtype=int)
    ratio = np.empty(m)
    count = 0
    for line in stream:
        if not line.strip():
            continue
        row = json.loads(line)
        i = int(row["i"]) - 1
        l[i] = row["l"]
        v2[i] = row["v2"]
        label[i] = row["label"]
        ratio[i] = row["brake_ratio"]
        count += 1
    if count != m:
        raise ValueError(f"trace header promises {m} samples, file has {count}")
    # Rebuild per-step state from the stored ratios; the per-step split
    # between mass and force is not recoverable (nor needed), only the ratio
    # labels.  The final target keeps its exact stored split.
    force = np.ones(m + 1)
    force[m] = float(header["final_force"])
    mass = np.append(ratio, float(header["final_mass"]))
    return DriftTrace(
        params=params,
        seed=int(header["seed"]),
        l=l,
        v2=v2,
        label=label,
        mass=mass,
        force=force,
    )


def write_trace_csv(trace: DriftTrace, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    ratio = trace.brake_ratio
    for i in range(trace.m):
        writer.writerow(
            [
                i + 1,
                repr(float(trace.l[i])),
                repr(float(trace.v2[i])),
                int(trace.label[i]),
                repr(float(ratio[i])),
            ]
        )

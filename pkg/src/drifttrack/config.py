"""Run configuration: a flat key = value text file with a strict schema.

Unknown keys are rejected, every value is type-checked against the schema,
and load -> serialize -> load is the identity.  Defaults reproduce the
braking case study.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .bounds import BoundParams
from .driftsim import AebParams


@dataclass(frozen=True)
class RunConfig:
    # accuracy / confidence / drift bounds for the sample-size computation
    epsilon: float = 0.01
    delta: float = 1e-6
    mu_min: float = 0.0078
    mu_max: float = 0.02
    vc_dim: int = 1

    # braking simulation
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

    # sample count: 0 means "use the computed bound"
    samples: int = 0

    # hypothesis fit
    n_f: int = 4
    rho: float = 1e-6
    bigm_margin: float = 1.0
    tie_break: str = "offset_sum"  # offset_sum | none
    fit_route: str = "auto"  # auto | threshold | milp
    domain_margin: float = 1.0
    v2_sigma_span: float = 8.0  # half-width of the v2 domain box, in std units

    # embedded solver limits (milp route only)
    solver_time_limit: float = 0.0  # 0 disables the limit
    solver_node_limit: int = 0
    solver_gap: float = 0.0

    # validation
    validation_runs: int = 500
    validation_samples: int = 5000
    histogram_bins: int = 30

    seed: int = 0

    def __post_init__(self) -> None:
        if self.samples < 0:
            raise ValueError("samples must be 0 (use the bound) or positive")
        if self.tie_break not in ("offset_sum", "none"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.fit_route not in ("auto", "threshold", "milp"):
            raise ValueError(f"unknown fit_route {self.fit_route!r}")
        if self.n_f < 1:
            raise ValueError("n_f must be at least 1")
        if self.v2_sigma_span <= 0:
            raise ValueError("v2_sigma_span must be positive")
        # delegate range checks to the owning modules
        self.bound_params()
        self.aeb_params()

    def bound_params(self) -> BoundParams:
        return BoundParams(
            epsilon=self.epsilon,
            delta=self.delta,
            vc_dim=self.vc_dim,
            mu_min=self.mu_min,
            mu_max=self.mu_max,
        )

    def aeb_params(self) -> AebParams:
        return AebParams(
            l_min=self.l_min,
            l_max=self.l_max,
            v2_mean_kmh2=self.v2_mean_kmh2,
            v2_std_kmh2=self.v2_std_kmh2,
            mass0=self.mass0,
            force0=self.force0,
            omega_force_mean=self.omega_force_mean,
            omega_force_std=self.omega_force_std,
            omega_mass_mean=self.omega_mass_mean,
            omega_mass_std=self.omega_mass_std,
            seed=self.seed,
        )


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(name: str, text: str):
    kind = _FIELDS[name].type
    if kind == "int":
        return int(text)
    if kind == "float":
        value = float(text)
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {text!r}")
        return value
    return text


def loads_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _FIELDS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, value.strip())
        except ValueError as err:
            raise ValueError(f"config line {lineno}: {err}") from None
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    return loads_config(Path(path).read_text())


def dumps_config(config: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(RunConfig):
        value = getattr(config, f.name)
        text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def dump_config(config: RunConfig, stream: IO[str]) -> None:
    stream.write(dumps_config(config))


def default_config_text() -> str:
    """The default configuration in loadable form, for `drifttrack init-config`."""
    return dumps_config(RunConfig())

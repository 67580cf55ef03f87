"""Closed-form sample-size bounds and disagreement rates for tracking a drifting binary target.

All functions are pure and operate on scalars, so they are safe for
unrestricted concurrent use.  Sample sizes are returned as integer ceilings
of the real-valued bounds, since a sample count is an integer.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence


class DominantTerm(enum.Enum):
    """Which of the two sample-size terms decided the bound.

    MU_MIN is the slow-drift term: it depends only on the minimum target
    change and the confidence, not on the accuracy or the VC dimension.
    MU_MAX is the fast-drift term, which carries the accuracy and the VC
    dimension.
    """

    MU_MIN = "mu_min"
    MU_MAX = "mu_max"


def _check_unit_open(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


def _check_vc_dim(vc_dim: int) -> None:
    if not isinstance(vc_dim, int) or isinstance(vc_dim, bool) or vc_dim < 1:
        raise ValueError(f"vc_dim must be a positive integer, got {vc_dim!r}")


@dataclass(frozen=True)
class BoundParams:
    """Inputs shared by every sample-size formula.

    epsilon: accuracy level in (0, 1).
    delta: confidence level in (0, 1).
    vc_dim: VC dimension of the target/hypothesis class (user supplied).
    mu_min, mu_max: lower/upper bound on the average per-step probability
        that an old target disagrees with the final one.
    rho: empirical-error level for the fixed-target bound, in [0, 1).
    """

    epsilon: float
    delta: float
    vc_dim: int
    mu_min: float
    mu_max: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        _check_unit_open("epsilon", self.epsilon)
        _check_unit_open("delta", self.delta)
        _check_vc_dim(self.vc_dim)
        _check_unit_open("mu_min", self.mu_min)
        _check_unit_open("mu_max", self.mu_max)
        if self.mu_min > self.mu_max:
            raise ValueError(
                f"mu_min must not exceed mu_max, got {self.mu_min!r} > {self.mu_max!r}"
            )
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho!r}")

    @property
    def accuracy_bound(self) -> float:
        """Total guaranteed accuracy level 4*mu_max + epsilon."""
        return 4.0 * self.mu_max + self.epsilon


@dataclass(frozen=True)
class DisagreementReport:
    """Empirical disagreement as an exact ratio count/m."""

    count: int
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0 <= self.count <= self.m:
            raise ValueError(f"count must lie in [0, {self.m}], got {self.count}")

    @property
    def empirical(self) -> Fraction:
        return Fraction(self.count, self.m)

    def __float__(self) -> float:
        return self.count / self.m


@dataclass(frozen=True)
class M0Result:
    """Sample-size bound for the moving-target problem, with its breakdown."""

    samples: int
    dominant: DominantTerm
    term_mu_min: float
    term_mu_max: float


def hoeffding_tail(m: int, tau: float) -> float:
    """Upper bound exp(-2*tau^2/m) on P{sum Y_i - sum p_i > tau} for independent Bernoulli Y_i."""
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return math.exp(-2.0 * tau * tau / m)


def theorem1_bound(epsilon: float, delta: float, rho: float, vc_dim: int) -> int:
    """Samples needed so that empirical error <= rho implies true error <= rho + epsilon.

    Returns the smallest integer m with
        m >= (5*(rho+eps)/eps^2) * (ln(4/delta) + d*ln(40*(rho+eps)/eps^2)).
    """
    _check_unit_open("epsilon", epsilon)
    _check_unit_open("delta", delta)
    _check_vc_dim(vc_dim)
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    q = rho + epsilon
    value = (5.0 * q / epsilon**2) * (
        math.log(4.0 / delta) + vc_dim * math.log(40.0 * q / epsilon**2)
    )
    return math.ceil(value)


def constant_target_bound(epsilon: float, delta: float, vc_dim: int) -> int:
    """Fixed-target sample size: ceiling of (5/eps) * (ln(4/delta) + d*ln(40/eps)).

    Algebraically identical to ``theorem1_bound`` with rho = 0; the two must
    agree exactly as integers for all valid inputs.
    """
    _check_unit_open("epsilon", epsilon)
    _check_unit_open("delta", delta)
    _check_vc_dim(vc_dim)
    value = (5.0 / epsilon) * (
        math.log(4.0 / delta) + vc_dim * math.log(40.0 / epsilon)
    )
    return math.ceil(value)


def m0_terms(
    epsilon: float, delta: float, mu_min: float, mu_max: float, vc_dim: int
) -> tuple[float, float]:
    """Raw (un-ceiled) values of the two competing sample-size terms.

    The first term (1/(2*mu_min^2)) * ln(2/delta) controls the event that the
    observed drift overstates the true one; it carries no dependence on
    epsilon or the VC dimension.  The second term is the fixed-target bound
    at empirical level 4*mu_max with the confidence split in half.
    """
    _check_unit_open("epsilon", epsilon)
    _check_unit_open("delta", delta)
    _check_vc_dim(vc_dim)
    _check_unit_open("mu_max", mu_max)
    if not mu_min > 0.0:
        raise ValueError(
            f"mu_min must be positive (the slow-drift term diverges otherwise), got {mu_min!r}"
        )
    if mu_min > mu_max:
        raise ValueError(
            f"mu_min must not exceed mu_max, got {mu_min!r} > {mu_max!r}"
        )
    if not mu_max < 0.25:
        raise ValueError(
            f"mu_max < 1/4 is required for the moving-target bound, got {mu_max!r}"
        )
    term1 = math.log(2.0 / delta) / (2.0 * mu_min * mu_min)
    q = 4.0 * mu_max + epsilon
    term2 = (5.0 * q / epsilon**2) * (
        math.log(8.0 / delta) + vc_dim * math.log(40.0 * q / epsilon**2)
    )
    return term1, term2


def m0(
    epsilon: float, delta: float, mu_min: float, mu_max: float, vc_dim: int
) -> M0Result:
    """Sample size guaranteeing error at most 4*mu_max + epsilon with confidence 1 - delta.

    Takes the maximum of the two terms from :func:`m0_terms` and returns its
    integer ceiling together with the dominant term.  Ties go to MU_MIN.
    """
    term1, term2 = m0_terms(epsilon, delta, mu_min, mu_max, vc_dim)
    if term1 >= term2:
        dominant = DominantTerm.MU_MIN
        value = term1
    else:
        dominant = DominantTerm.MU_MAX
        value = term2
    return M0Result(
        samples=math.ceil(value),
        dominant=dominant,
        term_mu_min=term1,
        term_mu_max=term2,
    )


def empirical_disagreement(
    labels_a: Sequence[int], labels_b: Sequence[int]
) -> DisagreementReport:
    """Fraction of positions on which two equal-length {0,1} label vectors differ."""
    m = len(labels_a)
    if len(labels_b) != m:
        raise ValueError(
            f"label vectors must have equal length, got {m} and {len(labels_b)}"
        )
    if m == 0:
        raise ValueError("label vectors must be nonempty")
    count = sum(1 for a, b in zip(labels_a, labels_b) if int(a) != int(b))
    return DisagreementReport(count=count, m=m)


@dataclass(frozen=True)
class CurveRow:
    """One plot-ready point of the sample-size curve."""

    epsilon: float
    mu_min: float
    mu_max: float
    vc_dim: int
    delta: float
    m0: int
    dominant_term: DominantTerm


def bound_curve(
    delta: float,
    mu_pairs: Iterable[tuple[float, float]],
    vc_dim: int,
    epsilon_grid: Sequence[float],
) -> list[CurveRow]:
    """Evaluate the moving-target bound on a grid, one row per (mu pair, epsilon)."""
    rows: list[CurveRow] = []
    for mu_min, mu_max in mu_pairs:
        for eps in epsilon_grid:
            result = m0(eps, delta, mu_min, mu_max, vc_dim)
            rows.append(
                CurveRow(
                    epsilon=eps,
                    mu_min=mu_min,
                    mu_max=mu_max,
                    vc_dim=vc_dim,
                    delta=delta,
                    m0=result.samples,
                    dominant_term=result.dominant,
                )
            )
    return rows


CURVE_CSV_COLUMNS = (
    "epsilon",
    "mu_min",
    "mu_max",
    "vc_dim",
    "delta",
    "m0",
    "dominant_term",
)


def write_curve_csv(rows: Iterable[CurveRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CURVE_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                repr(row.epsilon),
                repr(row.mu_min),
                repr(row.mu_max),
                row.vc_dim,
                repr(row.delta),
                row.m0,
                row.dominant_term.value,
            ]
        )

"""Redundant-sample discarding for fixed-orientation halfplane fits.

When only one facet of the hypothesis polytope is free, every candidate
hypothesis is a threshold on the scalar projection t = a . x: label 1 exactly
when t <= theta.  Samples that no optimal threshold can ever misclassify are
dropped before the optimization, which shrinks the mixed-integer program
without changing its optimal disagreement count.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import IO

import numpy as np


@dataclass(frozen=True, eq=False)
class ProjectionView:
    """Samples reduced to their projections along one facet normal."""

    direction: np.ndarray
    t: np.ndarray
    labels: np.ndarray
    index: np.ndarray  # original sample positions, for reporting

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float).reshape(-1)
        labels = np.asarray(self.labels, dtype=int).reshape(-1)
        index = np.asarray(self.index, dtype=int).reshape(-1)
        if t.shape != labels.shape or t.shape != index.shape:
            raise ValueError("t, labels, and index must have equal length")
        if not np.all(np.isfinite(t)):
            raise ValueError("projections must be finite")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "index", index)

    @property
    def m(self) -> int:
        return self.t.shape[0]


def project(points: np.ndarray, labels: np.ndarray, direction: np.ndarray) -> ProjectionView:
    """Project samples onto a facet normal: t_i = direction . x_i."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    direction = np.asarray(direction, dtype=float).reshape(-1)
    if points.shape[1] != direction.shape[0]:
        raise ValueError(
            f"points have dimension {points.shape[1]}, direction has {direction.shape[0]}"
        )
    t = points @ direction
    return ProjectionView(
        direction=direction,
        t=t,
        labels=np.asarray(labels, dtype=int),
        index=np.arange(points.shape[0]),
    )


@dataclass(frozen=True)
class DiscardReport:
    """Counts and the retention band [theta_lo, theta_hi] of one discard pass."""

    total: int
    kept: int
    discarded_label1: int
    discarded_label0: int
    theta_lo: float
    theta_hi: float
    degenerate: bool
    total_unique: int
    kept_unique: int

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "discarded_I1": self.discarded_label1,
            "discarded_I0": self.discarded_label0,
            "theta_lo": self.theta_lo,
            "theta_hi": self.theta_hi,
            "degenerate": self.degenerate,
            "total_unique": self.total_unique,
            "kept_unique": self.kept_unique,
        }

    def dump(self, stream: IO[str]) -> None:
        json.dump(self.to_json_dict(), stream, sort_keys=True, indent=2)
        stream.write("\n")


def discard_redundant(view: ProjectionView) -> tuple[ProjectionView, DiscardReport]:
    """Drop samples no optimal threshold can misclassify.

    With label 1 meaning t <= theta, a 1-labeled sample below every 0-labeled
    projection is always classified correctly by some count-optimal
    threshold, and symmetrically for 0-labeled samples above every 1-labeled
    projection.  Ties at the band edges are kept.  The optimal disagreement
    count over thresholds is identical on the kept and the full sets.
    """
    t, labels = view.t, view.labels
    mask1 = labels == 1
    mask0 = labels == 0
    if not mask1.any() or not mask0.any():
        warnings.warn(
            "one-class data: keeping a single boundary witness", stacklevel=2
        )
        if mask1.any():
            keep = np.zeros(view.m, dtype=bool)
            keep[int(np.argmax(np.where(mask1, t, -np.inf)))] = True
            theta_lo, theta_hi = math.inf, float(t[keep][0])
        else:
            keep = np.zeros(view.m, dtype=bool)
            keep[int(np.argmin(np.where(mask0, t, np.inf)))] = True
            theta_lo, theta_hi = float(t[keep][0]), -math.inf
        degenerate = True
    else:
        theta_hi = float(t[mask1].max())
        theta_lo = float(t[mask0].min())
        keep = np.ones(view.m, dtype=bool)
        keep[mask1 & (t < theta_lo)] = False
        keep[mask0 & (t > theta_hi)] = False
        # The class extremes are the boundary witnesses; on separable data
        # the band rule alone would drop them (and everything else).
        keep[int(np.argmax(np.where(mask1, t, -np.inf)))] = True
        keep[int(np.argmin(np.where(mask0, t, np.inf)))] = True
        degenerate = False
    kept_view = ProjectionView(
        direction=view.direction,
        t=t[keep],
        labels=labels[keep],
        index=view.index[keep],
    )
    report = DiscardReport(
        total=view.m,
        kept=int(keep.sum()),
        discarded_label1=int((~keep & mask1).sum()),
        discarded_label0=int((~keep & mask0).sum()),
        theta_lo=theta_lo,
        theta_hi=theta_hi,
        degenerate=degenerate,
        total_unique=int(np.unique(t).shape[0]),
        kept_unique=int(np.unique(t[keep]).shape[0]),
    )
    return kept_view, report


@dataclass(frozen=True)
class ThresholdSolution:
    """Exact minimum disagreement count and every threshold interval attaining it.

    Intervals are half-open [lo, hi): any theta inside labels the samples
    identically.  The leading interval may start at -inf and the trailing one
    may end at +inf.
    """

    count: int
    intervals: tuple[tuple[float, float], ...]


def threshold_oracle(view: ProjectionView) -> ThresholdSolution:
    """Sweep all m+1 threshold positions and return the exact optimum.

    Candidate thresholds are the distinct projections (theta = t labels t as
    1) plus one position below everything; the count is piecewise constant
    between consecutive distinct projections.
    """
    if view.m < 1:
        raise ValueError("at least one sample is required")
    order = np.argsort(view.t, kind="stable")
    t_sorted = view.t[order]
    labels_sorted = view.labels[order]
    distinct, start_idx = np.unique(t_sorted, return_index=True)
    n1_total = int((labels_sorted == 1).sum())
    # errors(theta in [distinct[k], distinct[k+1])) =
    #   #(label 0 with t <= distinct[k]) + #(label 1 with t > distinct[k])
    cum0 = np.cumsum(labels_sorted == 0)
    cum1 = np.cumsum(labels_sorted == 1)
    end_idx = np.append(start_idx[1:], t_sorted.shape[0]) - 1
    counts = cum0[end_idx] + (n1_total - cum1[end_idx])
    best = int(min(n1_total, counts.min()))

    bounds = np.append(distinct, math.inf)
    intervals: list[tuple[float, float]] = []
    if n1_total == best:
        intervals.append((-math.inf, float(distinct[0])))
    for k in range(distinct.shape[0]):
        if counts[k] == best:
            lo, hi = float(distinct[k]), float(bounds[k + 1])
            if intervals and intervals[-1][1] == lo:
                intervals[-1] = (intervals[-1][0], hi)
            else:
                intervals.append((lo, hi))
    return ThresholdSolution(count=best, intervals=tuple(intervals))

"""Minimal-disagreement polytope fitting as a mixed-integer linear program.

For samples labeled 1 the facet inequalities are relaxed by nonnegative
slacks; for samples labeled 0 a binary per facet selects which inequality is
allowed to cut the point away, with big-M constants making the logic linear.
A binary v_i per sample turns nonzero slack into a counted disagreement, and
the objective minimizes the number of disagreements.  Strict inequalities are
implemented with a small tolerance, so the objective is an upper bound on
the true disagreement count (tight when no sample sits within the tolerance
of a facet).

Models are immutable after construction and safe to share read-only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..polytope import BigM, BoxDomain, CoeffBox, Polytope, big_m_bounds

DEFAULT_RHO = 1e-6


class TieBreak(enum.Enum):
    NONE = "none"
    OFFSET_SUM = "offset_sum"


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float
    upper: float
    is_binary: bool = False


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse row  sum(coeffs[k] * x_k) <= rhs."""

    name: str
    coeffs: dict[int, float]
    rhs: float


def dense_arrays(
    variables: list[Variable],
    constraints: list[LinearConstraint],
    objective: dict[int, float],
    cap: int = 5_000_000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[tuple[float, float]]]:
    """Dense (c, A, b, bounds) matrices for the embedded solver.

    Dense is a desk-scale representation by design; sizes where the tableau
    would not fit comfortably in memory are refused.
    """
    n = len(variables)
    m_rows = len(constraints)
    if n * m_rows > cap:
        raise ValueError(
            f"model is too large for the dense solver ({m_rows} rows x {n} columns); "
            "use the threshold route or export the model for an external solver"
        )
    c = np.zeros(n)
    for k, w in objective.items():
        c[k] = w
    A = np.zeros((m_rows, n))
    b = np.empty(m_rows)
    for r, con in enumerate(constraints):
        for k, w in con.coeffs.items():
            A[r, k] = w
        b[r] = con.rhs
    bounds = [(v.lower, v.upper) for v in variables]
    return c, A, b, bounds


@dataclass(frozen=True)
class IndexSets:
    """Sample indices split by label; together they partition range(m)."""

    label1: tuple[int, ...]
    label0: tuple[int, ...]

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "IndexSets":
        labels = np.asarray(labels, dtype=int)
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        return cls(
            label1=tuple(int(i) for i in np.where(labels == 1)[0]),
            label0=tuple(int(i) for i in np.where(labels == 0)[0]),
        )


@dataclass(eq=False)
class MilpModel:
    """Solver-neutral model: variables, <=-rows, objective, and provenance."""

    variables: list[Variable]
    constraints: list[LinearConstraint]
    objective: dict[int, float]
    objective_is_integral: bool
    points: np.ndarray
    labels: np.ndarray
    index_sets: IndexSets
    n_f: int
    rho: float
    fixed_A: np.ndarray | None
    big_m: BigM
    tie_break: TieBreak
    var_index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.var_index:
            self.var_index = {v.name: k for k, v in enumerate(self.variables)}

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_binary(self) -> int:
        return sum(1 for v in self.variables if v.is_binary)

    def binary_indices(self) -> np.ndarray:
        return np.array([k for k, v in enumerate(self.variables) if v.is_binary], dtype=int)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[tuple[float, float]]]:
        """Dense (c, A, b, bounds) view for the embedded solver."""
        return dense_arrays(self.variables, self.constraints, self.objective)

    def assignment_dict(self, x: np.ndarray) -> dict[str, float]:
        return {v.name: float(x[k]) for k, v in enumerate(self.variables)}


def build_model(
    points: np.ndarray,
    labels: np.ndarray,
    n_f: int,
    domain: BoxDomain,
    coeffs: CoeffBox,
    fixed_A: np.ndarray | None = None,
    rho: float = DEFAULT_RHO,
    tie_break: TieBreak = TieBreak.OFFSET_SUM,
    bigm_margin: float = 1.0,
) -> MilpModel:
    """Assemble the minimal-disagreement program for a labeled multisample.

    Row order is fixed: samples in input order, facets in index order inside
    each sample, so identical inputs produce identical constraint matrices.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.asarray(labels, dtype=int).reshape(-1)
    m, n = points.shape
    if m == 0:
        raise ValueError("at least one sample is required")
    if labels.shape[0] != m:
        raise ValueError("labels and points must have equal length")
    if n_f < 1:
        raise ValueError("facet budget must be at least 1")
    if rho < 0.0:
        raise ValueError("tolerance rho must be nonnegative")
    if domain.dim != n:
        raise ValueError(f"domain dimension {domain.dim} does not match points ({n})")
    if coeffs.n_facets != n_f or coeffs.dim != n:
        raise ValueError("coefficient box shape must be (n_f, n + 1)")
    if fixed_A is not None:
        fixed_A = np.atleast_2d(np.asarray(fixed_A, dtype=float))
        if fixed_A.shape != (n_f, n):
            raise ValueError(f"fixed facet matrix must be {n_f} x {n}")
        if not (
            np.allclose(coeffs.lower[:, :n], fixed_A)
            and np.allclose(coeffs.upper[:, :n], fixed_A)
        ):
            raise ValueError(
                "fixed-facet mode requires the coefficient box to be degenerate "
                "at the fixed rows (see CoeffBox.for_fixed_rows)"
            )
    elif not coeffs.strictly_contains_origin():
        raise ValueError(
            "free-facet mode requires every coefficient box to contain the origin "
            "strictly in its interior"
        )

    index_sets = IndexSets.from_labels(labels)
    in_label0 = labels == 0
    bm = big_m_bounds(domain, coeffs, margin=bigm_margin)
    sum_M = float(bm.upper.sum())
    sum_m_rho = float((bm.lower - rho).sum())

    variables: list[Variable] = []
    for j in range(n_f):
        if fixed_A is None:
            for k in range(n):
                variables.append(
                    Variable(f"a_{j}_{k}", float(coeffs.lower[j, k]), float(coeffs.upper[j, k]))
                )
        variables.append(
            Variable(f"b_{j}", float(coeffs.lower[j, n]), float(coeffs.upper[j, n]))
        )
    for i in range(m):
        cap = bm.upper if not in_label0[i] else rho - bm.lower
        for j in range(n_f):
            variables.append(Variable(f"s_{i}_{j}", 0.0, float(cap[j])))
    for i in index_sets.label0:
        for j in range(n_f):
            variables.append(Variable(f"z_{i}_{j}", 0.0, 1.0, is_binary=True))
    for i in range(m):
        variables.append(Variable(f"v_{i}", 0.0, 1.0, is_binary=True))

    vidx = {v.name: k for k, v in enumerate(variables)}

    def facet_terms(j: int, x: np.ndarray) -> tuple[dict[int, float], float]:
        """Coefficients and constant of a_j . x + b_j as a function of the variables."""
        coeffs_row: dict[int, float] = {}
        constant = 0.0
        if fixed_A is None:
            for k in range(n):
                if x[k] != 0.0:
                    coeffs_row[vidx[f"a_{j}_{k}"]] = float(x[k])
        else:
            constant = float(fixed_A[j] @ x)
        coeffs_row[vidx[f"b_{j}"]] = 1.0
        return coeffs_row, constant

    constraints: list[LinearConstraint] = []
    for i in range(m):
        x = points[i]
        if not in_label0[i]:
            # label 1: a_j x + b_j <= s_ij, and slack forces the flag.
            for j in range(n_f):
                row, const = facet_terms(j, x)
                row[vidx[f"s_{i}_{j}"]] = -1.0
                constraints.append(LinearConstraint(f"in_{i}_{j}", row, -const))
            flag = {vidx[f"s_{i}_{j}"]: 1.0 for j in range(n_f)}
            flag[vidx[f"v_{i}"]] = -sum_M
            constraints.append(LinearConstraint(f"flag1_{i}", flag, 0.0))
        else:
            # label 0: selected facet must cut the point away, within tolerance.
            for j in range(n_f):
                row, const = facet_terms(j, x)
                row[vidx[f"z_{i}_{j}"]] = float(bm.upper[j])
                constraints.append(
                    LinearConstraint(f"cap_{i}_{j}", row, float(bm.upper[j]) - const)
                )
            for j in range(n_f):
                row, const = facet_terms(j, x)
                neg = {k: -w for k, w in row.items()}
                neg[vidx[f"z_{i}_{j}"]] = float(bm.lower[j]) - rho
                neg[vidx[f"s_{i}_{j}"]] = -1.0
                constraints.append(LinearConstraint(f"out_{i}_{j}", neg, -rho + const))
            card = {vidx[f"z_{i}_{j}"]: 1.0 for j in range(n_f)}
            constraints.append(LinearConstraint(f"card_{i}", card, float(n_f - 1)))
            flag = {vidx[f"s_{i}_{j}"]: 1.0 for j in range(n_f)}
            flag[vidx[f"v_{i}"]] = sum_m_rho
            constraints.append(LinearConstraint(f"flag0_{i}", flag, 0.0))

    objective = {vidx[f"v_{i}"]: 1.0 for i in range(m)}
    return MilpModel(
        variables=variables,
        constraints=constraints,
        objective=objective,
        objective_is_integral=True,
        points=points,
        labels=labels,
        index_sets=index_sets,
        n_f=n_f,
        rho=rho,
        fixed_A=fixed_A,
        big_m=bm,
        tie_break=tie_break,
        var_index=vidx,
    )


def make_tiebreak_model(model: MilpModel, optimal_count: int) -> MilpModel:
    """Second-stage program: hold the disagreement count at its optimum and
    minimize the linear volume surrogate sum(-b_j)."""
    cap_row = {model.var_index[f"v_{i}"]: 1.0 for i in range(model.m)}
    constraints = list(model.constraints)
    constraints.append(LinearConstraint("tie_cap", cap_row, float(optimal_count)))
    objective = {model.var_index[f"b_{j}"]: -1.0 for j in range(model.n_f)}
    return MilpModel(
        variables=model.variables,
        constraints=constraints,
        objective=objective,
        objective_is_integral=False,
        points=model.points,
        labels=model.labels,
        index_sets=model.index_sets,
        n_f=model.n_f,
        rho=model.rho,
        fixed_A=model.fixed_A,
        big_m=model.big_m,
        tie_break=model.tie_break,
        var_index=model.var_index,
    )


def decode_hypothesis(model: MilpModel, assignment: Mapping[str, float]) -> Polytope:
    """Extract the facet system (A, b) from a solved assignment."""
    try:
        b = np.array([assignment[f"b_{j}"] for j in range(model.n_f)], dtype=float)
        if model.fixed_A is not None:
            A = model.fixed_A.copy()
        else:
            A = np.array(
                [
                    [assignment[f"a_{j}_{k}"] for k in range(model.dim)]
                    for j in range(model.n_f)
                ],
                dtype=float,
            )
    except KeyError as missing:
        raise ValueError(f"assignment is missing variable {missing}") from None
    return Polytope(A=A, b=b)


@dataclass(frozen=True, eq=False)
class SolutionCheck:
    """Feasibility audit of an assignment plus the decoded polytope's truth."""

    constraint_violations: tuple[tuple[str, float], ...]
    bound_violations: tuple[tuple[str, float], ...]
    integrality_violations: tuple[tuple[str, float], ...]
    sum_v: float
    true_disagreements: int
    tolerance_flags: tuple[int, ...]  # label-0 samples with slack but agreeing label
    low_norm_facets: tuple[int, ...]
    hypothesis: Polytope

    @property
    def feasible(self) -> bool:
        return not (
            self.constraint_violations
            or self.bound_violations
            or self.integrality_violations
        )


def check_solution(
    model: MilpModel, assignment: Mapping[str, float], feas_tol: float = 1e-7
) -> SolutionCheck:
    """Verify every row, bound, and binary of an assignment, then recount the
    decoded polytope's true disagreements against the samples.

    The slack-driven count sum(v_i) only upper-bounds the true count: a
    label-0 sample can carry slack purely to clear the strict-inequality
    tolerance while its label still agrees.  Those samples are flagged.
    """
    missing = [v.name for v in model.variables if v.name not in assignment]
    if missing:
        raise ValueError(f"assignment is missing {len(missing)} variables, e.g. {missing[0]}")
    x = np.array([assignment[v.name] for v in model.variables], dtype=float)

    con_viol = []
    for con in model.constraints:
        lhs = sum(w * x[k] for k, w in con.coeffs.items())
        excess = lhs - con.rhs
        if excess > feas_tol:
            con_viol.append((con.name, float(excess)))
    bound_viol = []
    int_viol = []
    for k, v in enumerate(model.variables):
        if x[k] < v.lower - feas_tol or x[k] > v.upper + feas_tol:
            bound_viol.append((v.name, float(max(v.lower - x[k], x[k] - v.upper))))
        if v.is_binary:
            frac = abs(x[k] - round(x[k]))
            if frac > 1e-6:
                int_viol.append((v.name, float(frac)))

    hypothesis = decode_hypothesis(model, assignment)
    # Optimal facets touch samples exactly, so recomputed margins carry
    # rounding noise; membership is judged at the feasibility tolerance
    # (meaningful while rho exceeds it, as the defaults do).
    margins = hypothesis.margins(model.points)
    predicted = np.all(margins <= feas_tol, axis=-1).astype(int)
    true_disagreements = int(np.sum(predicted != model.labels))
    sum_v = float(sum(assignment[f"v_{i}"] for i in range(model.m)))

    flags = []
    for i in model.index_sets.label0:
        slack = sum(assignment[f"s_{i}_{j}"] for j in range(model.n_f))
        if slack > feas_tol and predicted[i] == 0:
            flags.append(i)

    low_norm: list[int] = []
    if model.fixed_A is None:
        norms = np.abs(hypothesis.A).max(axis=1)
        low_norm = [int(j) for j in np.where(norms < 0.1)[0]]

    return SolutionCheck(
        constraint_violations=tuple(con_viol),
        bound_violations=tuple(bound_viol),
        integrality_violations=tuple(int_viol),
        sum_v=sum_v,
        true_disagreements=true_disagreements,
        tolerance_flags=tuple(flags),
        low_norm_facets=tuple(low_norm),
        hypothesis=hypothesis,
    )

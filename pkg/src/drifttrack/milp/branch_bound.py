"""Exact best-bound branch and bound over binary variables.

Each node solves the LP relaxation with tightened binary bounds; the open
set is ordered by relaxation value, branching picks the most fractional
binary (ties to the lowest index), and with an integral objective a node is
pruned as soon as its bound exceeds incumbent - 1 + tolerance.  Exploration
order is fully deterministic for a given model.  A solve owns its model view
exclusively while running; distinct solves may run concurrently.
"""

from __future__ import annotations

import enum
import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .simplex import LpStatus, solve_lp

FEASIBILITY_TOL = 1e-7
INTEGRALITY_TOL = 1e-6


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    GAP_LIMIT = "gap_limit"
    TIME_LIMIT = "time_limit"
    NODE_LIMIT = "node_limit"


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float | None = None
    node_limit: int | None = None
    gap: float = 0.0


@dataclass(frozen=True)
class BnbNode:
    """One open node: bound overrides on binaries plus its relaxation."""

    overrides: tuple[tuple[int, float], ...]  # (variable index, forced value)
    relaxation_value: float
    depth: int
    x: np.ndarray = field(repr=False, compare=False, default=None)


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: SolveStatus
    assignment: dict[str, float] | None
    objective: float | None
    bound: float
    nodes: int
    wall_time: float
    feasibility_tol: float = FEASIBILITY_TOL
    integrality_tol: float = INTEGRALITY_TOL


def branch_and_bound(model, limits: SolveLimits | None = None) -> SolveResult:
    """Solve a model with binary integer variables to proven optimality.

    ``model`` provides variables/constraints/objective plus ``to_arrays`` and
    ``binary_indices`` (a built disagreement model or a parsed LP document).
    """
    limits = limits or SolveLimits()
    start = time.perf_counter()
    c, A, b, bounds = model.to_arrays()
    binary = model.binary_indices()
    integral_obj = bool(getattr(model, "objective_is_integral", False))

    def relax(overrides: tuple[tuple[int, float], ...]):
        node_bounds = list(bounds)
        for k, val in overrides:
            node_bounds[k] = (val, val)
        return solve_lp(c, A, b, node_bounds)

    def elapsed() -> float:
        return time.perf_counter() - start

    nodes = 0
    root = relax(())
    nodes += 1
    if root.status is LpStatus.INFEASIBLE:
        return SolveResult(SolveStatus.INFEASIBLE, None, None, np.inf, nodes, elapsed())
    if root.status is LpStatus.UNBOUNDED:
        return SolveResult(SolveStatus.UNBOUNDED, None, None, -np.inf, nodes, elapsed())

    counter = 0
    heap: list[tuple[float, int, BnbNode]] = []
    heapq.heappush(heap, (root.value, counter, BnbNode((), root.value, 0, root.x)))

    incumbent_x: np.ndarray | None = None
    incumbent_val = np.inf

    def prune_cut() -> float:
        if incumbent_x is None:
            return np.inf
        if integral_obj:
            return incumbent_val - 1.0 + 1e-9
        return incumbent_val - 1e-9

    def finish(status: SolveStatus) -> SolveResult:
        open_bound = min((node.relaxation_value for _, _, node in heap), default=incumbent_val)
        bound = min(open_bound, incumbent_val)
        assignment = None
        objective = None
        if incumbent_x is not None:
            x = incumbent_x.copy()
            x[binary] = np.round(x[binary])
            assignment = model.assignment_dict(x)
            objective = float(incumbent_val)
            assert objective >= bound - 1e-6  # weak duality self-check
        return SolveResult(status, assignment, objective, float(bound), nodes, elapsed())

    while heap:
        if limits.time_limit is not None and elapsed() > limits.time_limit:
            return finish(SolveStatus.TIME_LIMIT)
        if limits.node_limit is not None and nodes >= limits.node_limit:
            return finish(SolveStatus.NODE_LIMIT)
        if limits.gap > 0.0 and incumbent_x is not None:
            open_bound = min(node.relaxation_value for _, _, node in heap)
            if incumbent_val - open_bound <= limits.gap * max(1.0, abs(incumbent_val)):
                return finish(SolveStatus.GAP_LIMIT)

        _, _, node = heapq.heappop(heap)
        if node.relaxation_value > prune_cut():
            continue

        frac = np.abs(node.x[binary] - np.round(node.x[binary])) if binary.size else np.empty(0)
        if frac.size == 0 or frac.max() == 0.0:
            if node.relaxation_value < incumbent_val:
                incumbent_val = node.relaxation_value
                incumbent_x = node.x
            continue
        if frac.max() <= INTEGRALITY_TOL:
            # Near-integral relaxations can be big-M artifacts (a binary at
            # 1e-8 "absorbing" slack), so certify by re-solving with every
            # binary pinned to its rounded value before trusting the node.
            # The certification solve is not a tree node.
            pinned = tuple((int(k), float(round(node.x[k]))) for k in binary)
            verified = relax(pinned)
            if verified.status is LpStatus.OPTIMAL:
                if verified.value < incumbent_val:
                    incumbent_val = verified.value
                    incumbent_x = verified.x
                if verified.value <= node.relaxation_value + 1e-7:
                    continue  # relaxation optimum attained integrally: subtree done
            if node.relaxation_value > prune_cut():
                continue

        # most fractional binary; exact ties resolve to the lowest index
        distance = np.minimum(frac, 1.0 - frac)
        branch_var = int(binary[int(np.argmax(distance))])
        for forced in (0.0, 1.0):
            overrides = node.overrides + ((branch_var, forced),)
            child = relax(overrides)
            nodes += 1
            if child.status is not LpStatus.OPTIMAL:
                continue
            value = max(child.value, node.relaxation_value)  # child can't beat parent
            if value > prune_cut():
                continue
            counter += 1
            heapq.heappush(
                heap, (value, counter, BnbNode(overrides, value, node.depth + 1, child.x))
            )

    if incumbent_x is None:
        return SolveResult(SolveStatus.INFEASIBLE, None, None, np.inf, nodes, elapsed())
    return finish(SolveStatus.OPTIMAL)

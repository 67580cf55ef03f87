"""Canonical LP-format text export and parser for model interchange.

The exporter writes a fixed canonical layout (signed coefficient, one space,
variable name; variables in model order; every variable listed in Bounds) so
export -> parse -> export reproduces the text byte for byte, and standard
MILP solvers can read the file to cross-check the embedded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import LinearConstraint, Variable, dense_arrays


@dataclass(eq=False)
class LpDocument:
    """A model as read back from LP text: structure only, no sample data."""

    variables: list[Variable]
    constraints: list[LinearConstraint]
    objective: dict[int, float]
    objective_name: str = "obj"
    objective_is_integral: bool = False
    var_index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.var_index:
            self.var_index = {v.name: k for k, v in enumerate(self.variables)}

    def to_arrays(self):
        return dense_arrays(self.variables, self.constraints, self.objective)

    def binary_indices(self) -> np.ndarray:
        return np.array(
            [k for k, v in enumerate(self.variables) if v.is_binary], dtype=int
        )

    def assignment_dict(self, x: np.ndarray) -> dict[str, float]:
        return {v.name: float(x[k]) for k, v in enumerate(self.variables)}


def _terms(coeffs: dict[int, float], names: list[str]) -> str:
    parts = []
    for k in sorted(coeffs):
        w = coeffs[k]
        if w == 0.0:
            continue
        sign = "-" if w < 0 else "+"
        parts.append(f"{sign} {abs(w)!r} {names[k]}")
    return " ".join(parts)


def export_lp(model) -> str:
    """Canonical LP text for anything with variables/constraints/objective."""
    names = [v.name for v in model.variables]
    obj_name = getattr(model, "objective_name", "obj")
    lines = ["Minimize"]
    terms = _terms(model.objective, names)
    lines.append(f" {obj_name}:" + (f" {terms}" if terms else ""))
    if model.constraints:
        lines.append("Subject To")
        for con in model.constraints:
            lines.append(f" {con.name}: {_terms(con.coeffs, names)} <= {con.rhs!r}")
    lines.append("Bounds")
    for v in model.variables:
        if math.isfinite(v.upper):
            lines.append(f" {v.lower!r} <= {v.name} <= {v.upper!r}")
        else:
            lines.append(f" {v.name} >= {v.lower!r}")
    binaries = [v.name for v in model.variables if v.is_binary]
    if binaries:
        lines.append("Binary")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpParseError(ValueError):
    pass


def _parse_terms(tokens: list[str], where: str) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    pos = 0
    while pos < len(tokens):
        sign = tokens[pos]
        if sign not in ("+", "-"):
            raise LpParseError(f"{where}: expected sign, got {sign!r}")
        try:
            mag = float(tokens[pos + 1])
        except (IndexError, ValueError):
            raise LpParseError(f"{where}: expected coefficient after {sign!r}") from None
        try:
            name = tokens[pos + 2]
        except IndexError:
            raise LpParseError(f"{where}: expected variable name") from None
        value = -mag if sign == "-" else mag
        coeffs[name] = coeffs.get(name, 0.0) + value
        pos += 3
    return coeffs


def parse_lp(text: str) -> LpDocument:
    """Read canonical LP text back into a document.

    Only the canonical subset emitted by :func:`export_lp` is accepted:
    minimization, named <= rows, explicit bounds for every variable, and a
    Binary section.
    """
    section = None
    objective_name = "obj"
    objective_terms: dict[str, float] = {}
    raw_constraints: list[tuple[str, dict[str, float], float]] = []
    bounds_order: list[str] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered == "minimize":
            section = "objective"
            continue
        if lowered == "subject to":
            section = "constraints"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered in ("binary", "binaries"):
            section = "binary"
            continue
        if lowered == "end":
            section = "end"
            continue
        if lowered == "maximize":
            raise LpParseError("only minimization problems are supported")

        if section == "objective":
            if ":" in line:
                objective_name, _, rest = line.partition(":")
                objective_name = objective_name.strip()
            else:
                rest = line
            tokens = rest.split()
            if tokens:
                objective_terms.update(_parse_terms(tokens, f"line {lineno}"))
        elif section == "constraints":
            name, sep, rest = line.partition(":")
            if not sep:
                raise LpParseError(f"line {lineno}: constraint rows must be named")
            tokens = rest.split()
            if len(tokens) < 2 or tokens[-2] != "<=":
                raise LpParseError(f"line {lineno}: only '<= rhs' rows are supported")
            rhs = float(tokens[-1])
            coeffs = _parse_terms(tokens[:-2], f"line {lineno}")
            raw_constraints.append((name.strip(), coeffs, rhs))
        elif section == "bounds":
            tokens = line.split()
            if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                name = tokens[2]
                lo, hi = float(tokens[0]), float(tokens[4])
            elif len(tokens) == 3 and tokens[1] == ">=":
                name = tokens[0]
                lo, hi = float(tokens[2]), math.inf
            else:
                raise LpParseError(f"line {lineno}: unsupported bounds syntax {line!r}")
            if name not in bounds:
                bounds_order.append(name)
            bounds[name] = (lo, hi)
        elif section == "binary":
            binaries.add(line.split()[0])
        elif section == "end":
            raise LpParseError(f"line {lineno}: content after End")
        else:
            raise LpParseError(f"line {lineno}: content before any section header")

    if section != "end":
        raise LpParseError("missing End marker")

    mentioned = set(objective_terms)
    for _, coeffs, _ in raw_constraints:
        mentioned.update(coeffs)
    unknown = mentioned - set(bounds)
    if unknown:
        raise LpParseError(
            f"variables used but never bounded: {sorted(unknown)[:3]} "
            "(canonical files list every variable in Bounds)"
        )

    variables = [
        Variable(name, bounds[name][0], bounds[name][1], is_binary=name in binaries)
        for name in bounds_order
    ]
    index = {v.name: k for k, v in enumerate(variables)}
    constraints = [
        LinearConstraint(name, {index[n]: w for n, w in coeffs.items()}, rhs)
        for name, coeffs, rhs in raw_constraints
    ]
    objective = {index[n]: w for n, w in objective_terms.items()}
    return LpDocument(
        variables=variables,
        constraints=constraints,
        objective=objective,
        objective_name=objective_name,
    )

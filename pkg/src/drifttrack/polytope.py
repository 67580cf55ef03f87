"""Halfspace-form convex polytopes, box domains, and exact big-M constants.

A polytope is stored as the facet system ``A x + b <= 0``; a point is inside
(labeled 1) exactly when every facet inequality holds.  Big-M constants are
the exact extrema of the bilinear form ``a . x + b`` over a box of points
and a box of coefficients, which is what turns the facet logic into linear
mixed-integer constraints.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

_GEOM_TOL = 1e-9


class VolumeMode(enum.Enum):
    EXACT_2D = "exact_2d"
    OFFSET_SUM = "offset_sum"


@dataclass(frozen=True, eq=False)
class Polytope:
    """Facet representation ``A x + b <= 0`` with at most ``n_facets`` rows."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(
                f"A has {A.shape[0]} rows but b has {b.shape[0]} entries"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_facets(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def margins(self, x: np.ndarray) -> np.ndarray:
        """Per-facet values a_j . x + b_j (nonpositive everywhere inside)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(
                f"point has dimension {x.shape[-1]}, polytope expects {self.dim}"
            )
        return x @ self.A.T + self.b

    def label(self, x: np.ndarray) -> int:
        """1 when x satisfies every facet inequality, else 0."""
        return int(np.all(self.margins(x) <= 0.0))

    def label_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized labels for an (n_points, dim) array."""
        points = np.asarray(points, dtype=float)
        return np.all(self.margins(points) <= 0.0, axis=-1).astype(int)

    def to_json_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Polytope":
        return cls(A=np.array(data["A"], dtype=float), b=np.array(data["b"], dtype=float))

    def dump(self, stream: IO[str]) -> None:
        json.dump(self.to_json_dict(), stream, sort_keys=True)

    @classmethod
    def load(cls, stream: IO[str]) -> "Polytope":
        return cls.from_json_dict(json.load(stream))


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned compact box, the sampling domain of the problem."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have equal length")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))


@dataclass(frozen=True, eq=False)
class CoeffBox:
    """Per-facet coefficient boxes for (a_j, b_j), each of length dim + 1.

    For a free facet system the box must contain the origin strictly in its
    interior, which is what makes the derived big-M constants straddle zero.
    Degenerate (one-point) intervals are allowed so that a fixed facet matrix
    can be expressed in the same type; the sign condition is then restored by
    the widening margin in :func:`big_m_bounds`.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.atleast_2d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_2d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape:
            raise ValueError("coefficient bounds must have matching shapes")
        if np.any(lower > upper):
            raise ValueError("coefficient box requires lower <= upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_facets(self) -> int:
        return self.lower.shape[0]

    @property
    def dim(self) -> int:
        return self.lower.shape[1] - 1

    def strictly_contains_origin(self) -> bool:
        return bool(np.all(self.lower < 0.0) and np.all(self.upper > 0.0))

    @classmethod
    def symmetric(cls, n_facets: int, dim: int, a_bound: float, b_bound: float) -> "CoeffBox":
        """Box [-a_bound, a_bound]^dim x [-b_bound, b_bound] for every facet."""
        if a_bound <= 0 or b_bound <= 0:
            raise ValueError("bounds must be positive")
        row = np.array([a_bound] * dim + [b_bound], dtype=float)
        upper = np.tile(row, (n_facets, 1))
        return cls(lower=-upper, upper=upper.copy())

    @classmethod
    def for_fixed_rows(cls, A: np.ndarray, b_lower: np.ndarray, b_upper: np.ndarray) -> "CoeffBox":
        """Degenerate a-part pinned at the rows of A; only the offsets vary."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b_lower = np.asarray(b_lower, dtype=float).reshape(-1)
        b_upper = np.asarray(b_upper, dtype=float).reshape(-1)
        if b_lower.shape[0] != A.shape[0] or b_upper.shape[0] != A.shape[0]:
            raise ValueError("offset bounds must have one entry per facet")
        lower = np.hstack([A, b_lower[:, None]])
        upper = np.hstack([A, b_upper[:, None]])
        return cls(lower=lower, upper=upper)


@dataclass(frozen=True, eq=False)
class BigM:
    """Per-facet bounds on a_j . x + b_j: lower[j] <= value <= upper[j], with upper > 0 > lower."""

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self) -> None:
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        if upper.shape != lower.shape:
            raise ValueError("upper and lower must have equal length")
        if np.any(upper <= 0.0) or np.any(lower >= 0.0):
            raise ValueError("big-M bounds require upper > 0 and lower < 0 per facet")
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)


def big_m_bounds(domain: BoxDomain, coeffs: CoeffBox, margin: float = 1.0) -> BigM:
    """Exact sup/inf of a . x + b over the point box times the coefficient box.

    The bilinear form attains its extrema at box corners, so each coordinate
    contributes the max/min of the four endpoint products; the offset
    contributes its own interval endpoint.  When the exact value fails the
    sign condition (upper > 0 > lower) it is replaced by +/- margin, which
    keeps the bound valid while restoring the sign.
    """
    if coeffs.dim != domain.dim:
        raise ValueError(
            f"coefficient box is for dimension {coeffs.dim}, domain has {domain.dim}"
        )
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    n_f, n = coeffs.n_facets, domain.dim
    upper = np.empty(n_f)
    lower = np.empty(n_f)
    for j in range(n_f):
        hi = coeffs.upper[j, n]
        lo = coeffs.lower[j, n]
        for k in range(n):
            la, ua = coeffs.lower[j, k], coeffs.upper[j, k]
            lx, ux = domain.lower[k], domain.upper[k]
            products = (la * lx, la * ux, ua * lx, ua * ux)
            hi += max(products)
            lo += min(products)
        upper[j] = hi if hi > 0.0 else margin
        lower[j] = lo if lo < 0.0 else -margin
    return BigM(upper=upper, lower=lower)


def _enumerate_vertices_2d(A: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    n_f = A.shape[0]
    points = []
    for i in range(n_f):
        for j in range(i + 1, n_f):
            M = A[[i, j], :]
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            scale = max(1.0, abs(M).max())
            if abs(det) <= tol * scale * scale:
                continue
            x = np.linalg.solve(M, -b[[i, j]])
            if np.all(A @ x + b <= tol * max(1.0, abs(x).max())):
                points.append(x)
    if not points:
        return np.empty((0, 2))
    pts = np.array(points)
    # dedupe within tolerance
    keep: list[np.ndarray] = []
    for p in pts:
        if not any(np.allclose(p, q, atol=1e-7, rtol=0.0) for q in keep):
            keep.append(p)
    return np.array(keep)


def _normals_positively_span_2d(A: np.ndarray) -> bool:
    norms = np.linalg.norm(A, axis=1)
    live = A[norms > _GEOM_TOL]
    if live.shape[0] < 3:
        return False
    angles = np.sort(np.arctan2(live[:, 1], live[:, 0]))
    gaps = np.diff(angles)
    wrap = angles[0] + 2.0 * math.pi - angles[-1]
    return max(gaps.max(initial=0.0), wrap) < math.pi - _GEOM_TOL


def _shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def volume_surrogate(p: Polytope, mode: VolumeMode = VolumeMode.OFFSET_SUM) -> float:
    """Volume figure used by the tie-break: exact area in 2-D, or sum of -b_j.

    OFFSET_SUM is the linear surrogate that a mixed-integer objective can
    carry; EXACT_2D enumerates the vertex set of the facet arrangement and
    applies the shoelace formula, and rejects unbounded polytopes.
    """
    if mode is VolumeMode.OFFSET_SUM:
        return float(-np.sum(p.b))
    if p.dim != 2:
        raise ValueError("exact volume is only implemented for dimension 2")
    A, b = p.A.copy(), p.b.copy()
    zero_rows = np.linalg.norm(A, axis=1) <= _GEOM_TOL
    if np.any(zero_rows):
        if np.any(b[zero_rows] > _GEOM_TOL):
            return 0.0  # 0.x + b <= 0 with b > 0: empty polytope
        A, b = A[~zero_rows], b[~zero_rows]
    if A.shape[0] == 0:
        raise ValueError("polytope is unbounded (no effective facets)")
    vertices = _enumerate_vertices_2d(A, b, _GEOM_TOL)
    spanning = _normals_positively_span_2d(A)
    if vertices.shape[0] == 0:
        if spanning:
            return 0.0  # bounded direction set but no feasible corner: empty
        raise ValueError("polytope is unbounded or empty; exact area undefined")
    if not spanning:
        raise ValueError("polytope is unbounded; exact area undefined")
    if vertices.shape[0] < 3:
        return 0.0
    center = vertices.mean(axis=0)
    order = np.argsort(np.arctan2(vertices[:, 1] - center[1], vertices[:, 0] - center[0]))
    return float(_shoelace(vertices[order]))

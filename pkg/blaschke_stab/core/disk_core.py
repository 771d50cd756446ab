"""Pseudo-hyperbolic geometry and weighted Blaschke products on the unit disk.

Every product of Moebius factors is accumulated as a sum of logarithms so that
tuples with hundreds of zeros neither underflow nor lose their exact zeros
(an exact zero is carried as ``-inf``).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from blaschke_stab.core.errors import DomainError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

DiskPoint = complex
LogMagnitude = float
ZeroTuple = Sequence[complex]

NODE_SEPARATION = 1e-12
NORMALIZATION_GRID = 4096
SUP_MIN_GRID = 1024
SUP_MAX_GRID = 1 << 20
REFINE_CANDIDATES = 8
REFINE_XATOL = 1e-12


def as_points(zeros: ZeroTuple | np.ndarray) -> np.ndarray:
    return np.asarray(zeros, dtype=complex).reshape(-1)


def _scalar_or_array(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def check_disk_point(z: complex, name: str = "z") -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"{name}={z!r} is not strictly inside the unit disk")
    return z


def check_radius(R: float, name: str = "R") -> float:
    R = float(R)
    if not 0.0 < R < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {R}")
    return R


@dataclass(frozen=True)
class BoundaryPoint:
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @property
    def point(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


class WeightKind(str, Enum):
    UNIT = "unit"
    BOUNDARY_POLY = "boundary_poly"


@dataclass(frozen=True)
class WeightFunction:
    """q(z) = c_q * prod(z - a_j) with sup-norm 1 on the disk; the unit weight has no vertices."""

    kind: WeightKind
    vertices: tuple[BoundaryPoint, ...] = ()
    norm_const: float = 1.0

    @classmethod
    def unit(cls) -> "WeightFunction":
        return cls(kind=WeightKind.UNIT)

    @classmethod
    def boundary_poly(cls, thetas: Iterable[float]) -> "WeightFunction":
        vertices = tuple(BoundaryPoint(t) for t in thetas)
        if not vertices:
            return cls.unit()
        points = np.array([v.point for v in vertices])
        peak = maximize_on_circle(
            lambda z: _vertex_log_abs(points, z), 1.0, NORMALIZATION_GRID
        )
        return cls(
            kind=WeightKind.BOUNDARY_POLY,
            vertices=vertices,
            norm_const=math.exp(-peak.log_value),
        )

    @property
    def vertex_points(self) -> np.ndarray:
        return np.array([v.point for v in self.vertices], dtype=complex)

    @property
    def vertex_thetas(self) -> list[float]:
        return [v.theta for v in self.vertices]

    def log_abs(self, z: complex | np.ndarray) -> float | np.ndarray:
        if self.kind is WeightKind.UNIT:
            return _scalar_or_array(np.zeros(np.shape(z)))
        value = math.log(self.norm_const) + _vertex_log_abs(self.vertex_points, z)
        return _scalar_or_array(value)

    def value(self, z: complex | np.ndarray) -> complex | np.ndarray:
        z_arr = np.asarray(z, dtype=complex)
        out = np.full(z_arr.shape, self.norm_const, dtype=complex)
        for a in self.vertex_points:
            out = out * (z_arr - a)
        return complex(out) if out.ndim == 0 else out


def _vertex_log_abs(points: np.ndarray, z: complex | np.ndarray) -> np.ndarray:
    z_arr = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z_arr[..., None] - points)).sum(axis=-1)


def mobius(a: complex, z: complex | np.ndarray) -> complex | np.ndarray:
    """Disk automorphism phi_a(z) = (z - a) / (1 - conj(a) z)."""
    a = check_disk_point(a, "a")
    z_arr = np.asarray(z, dtype=complex)
    out = (z_arr - a) / (1.0 - np.conj(a) * z_arr)
    return complex(out) if out.ndim == 0 else out


def pseudo_distance(z: complex | np.ndarray, w: complex | np.ndarray) -> float | np.ndarray:
    z_arr = np.asarray(z, dtype=complex)
    w_arr = np.asarray(w, dtype=complex)
    return _scalar_or_array(np.abs(z_arr - w_arr) / np.abs(1.0 - np.conj(w_arr) * z_arr))


def log_pseudo_distance(z: complex | np.ndarray, w: complex | np.ndarray) -> float | np.ndarray:
    """log d(z, w), through 1 - d^2 = (1-|z|^2)(1-|w|^2)/|1 - conj(w) z|^2 when d is near 1."""
    z_arr = np.asarray(z, dtype=complex)
    w_arr = np.asarray(w, dtype=complex)
    den = np.abs(1.0 - np.conj(w_arr) * z_arr)
    d = np.abs(z_arr - w_arr) / den
    az = np.abs(z_arr)
    aw = np.abs(w_arr)
    gap = (1.0 - az) * (1.0 + az) * (1.0 - aw) * (1.0 + aw) / (den * den)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(d > 0.5, 0.5 * np.log1p(-gap), np.log(d))
    return _scalar_or_array(out)


def blaschke_log_abs(zeros: ZeroTuple | np.ndarray, z: complex | np.ndarray) -> float | np.ndarray:
    pts = as_points(zeros)
    z_arr = np.asarray(z, dtype=complex)
    if pts.size == 0:
        return _scalar_or_array(np.zeros(z_arr.shape))
    terms = log_pseudo_distance(z_arr[..., None], pts)
    return _scalar_or_array(np.sum(terms, axis=-1))


def weighted_blaschke_log_abs(
    q: WeightFunction, zeros: ZeroTuple | np.ndarray, z: complex | np.ndarray
) -> float | np.ndarray:
    return _scalar_or_array(np.asarray(blaschke_log_abs(zeros, z)) + q.log_abs(z))


@dataclass(frozen=True)
class CircleMaximum:
    log_value: LogMagnitude
    theta: float
    radius: float

    @property
    def point(self) -> complex:
        return self.radius * complex(math.cos(self.theta), math.sin(self.theta))


def maximize_on_circle(
    fn: Callable[[np.ndarray | complex], np.ndarray | float],
    radius: float,
    n_grid: int,
    candidates: int = REFINE_CANDIDATES,
) -> CircleMaximum:
    """Maximise a smooth function of theta on |z| = radius: uniform grid, then bounded
    Brent/golden refinement around the best local maxima. Ties go to the smallest theta."""
    n_grid = int(n_grid)
    thetas = np.arange(n_grid) * (TWO_PI / n_grid)
    values = np.asarray(fn(radius * np.exp(1j * thetas)), dtype=float)

    best_idx = int(np.argmax(values))
    best = CircleMaximum(float(values[best_idx]), float(thetas[best_idx]), radius)
    if not math.isfinite(best.log_value):
        return best

    left = np.roll(values, 1)
    right = np.roll(values, -1)
    peaks = np.flatnonzero((values >= left) & (values >= right) & np.isfinite(values))
    # by value descending, index ascending
    order = np.lexsort((peaks, -values[peaks]))
    step = TWO_PI / n_grid

    for idx in peaks[order][:candidates]:
        centre = float(thetas[idx])
        res = minimize_scalar(
            lambda t: -float(fn(radius * complex(math.cos(t), math.sin(t)))),
            bounds=(centre - step, centre + step),
            method="bounded",
            options={"xatol": REFINE_XATOL},
        )
        value = -float(res.fun)
        if math.isfinite(value) and value > best.log_value:
            best = CircleMaximum(value, float(res.x) % TWO_PI, radius)
    return best


def _sup_grid_size(q: WeightFunction, pts: np.ndarray, R: float, density: int) -> int:
    slope = R * float(np.sum(2.0 / (1.0 - np.abs(pts) * R)))
    slope += R * len(q.vertices) / (1.0 - R)
    n = max(SUP_MIN_GRID, 64 * pts.size, int(math.ceil(8.0 * slope)))
    return min(n * max(int(density), 1), SUP_MAX_GRID)


def sup_on_circle(
    q: WeightFunction, zeros: ZeroTuple | np.ndarray, R: float, density: int = 1
) -> CircleMaximum:
    """sup over |z| <= R of log|B_q(zeros, z)|, attained on |z| = R by the maximum principle."""
    R = check_radius(R)
    pts = as_points(zeros)
    return maximize_on_circle(
        lambda z: weighted_blaschke_log_abs(q, pts, z),
        R,
        _sup_grid_size(q, pts, R, density),
    )


def prop22_bound(zeros: ZeroTuple | np.ndarray, z: complex, deleted: bool = False) -> LogMagnitude:
    pts = as_points(zeros)
    z = complex(z)
    value = -(1.0 - abs(z) ** 2) / 4.0 * float(np.sum(1.0 - np.abs(pts)))
    return value + math.log(2.0) if deleted else value


def alpha_star(R: float) -> float:
    """Largest alpha with max(R^alpha, r^alpha) >= (R+r)/(1+Rr) for every r in [0, 1]."""
    R = check_radius(R)
    return math.log(2.0 * R / (1.0 + R * R)) / math.log(R)


def jensen_lower(q: WeightFunction, zeros: ZeroTuple | np.ndarray, R: float) -> LogMagnitude:
    R = check_radius(R)
    pts = as_points(zeros)
    return float(q.log_abs(0.0)) + float(np.sum(np.log(np.maximum(R, np.abs(pts)))))


def deleted_product_check(
    q: WeightFunction, zeros: ZeroTuple | np.ndarray, k: int, R: float
) -> tuple[LogMagnitude, LogMagnitude]:
    """Both sides of sup|B(Z_{n,k})| <= (1/R) |q(0)|^-alpha sup|B_q(Z_n)|^alpha, as logs."""
    pts = as_points(zeros)
    alpha = alpha_star(R)
    lhs = sup_on_circle(WeightFunction.unit(), np.delete(pts, k), R).log_value
    rhs = (
        -math.log(R)
        - alpha * float(q.log_abs(0.0))
        + alpha * sup_on_circle(q, pts, R).log_value
    )
    return lhs, rhs


def validate_nodes(nodes: ZeroTuple | np.ndarray) -> np.ndarray:
    """Interpolation nodes must be inside the disk and pairwise separated."""
    pts = as_points(nodes)
    for i, z in enumerate(pts):
        check_disk_point(z, f"node[{i}]")
    if pts.size > 1:
        d = np.asarray(pseudo_distance(pts[:, None], pts[None, :]))
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        if d[i, j] < NODE_SEPARATION:
            raise DomainError(f"nodes {min(i, j)} and {max(i, j)} coincide (d={d[i, j]:.3e})")
    return pts

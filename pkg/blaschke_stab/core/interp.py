"""Linear recovery of H^p functions from their values at finitely many nodes."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
from typing import Callable, Sequence

import numpy as np

from blaschke_stab.core.disk_core import (
    NODE_SEPARATION,
    as_points,
    blaschke_log_abs,
    check_disk_point,
    log_pseudo_distance,
    mobius,
    validate_nodes,
)
from blaschke_stab.core.errors import DomainError, InterpolationError

logger = logging.getLogger(__name__)

_LOG_SEPARATION = math.log(NODE_SEPARATION)


@dataclass(frozen=True)
class HardyExponent:
    """Exponent p in [1, inf], stored as 1/p so that p = inf is the exact value 0."""

    inv_p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.inv_p <= 1.0:
            raise DomainError(f"p must lie in [1, inf], got 1/p = {self.inv_p}")

    @classmethod
    def parse(cls, raw: str | float) -> "HardyExponent":
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in {"inf", "infinity", "oo"}:
                return cls(0.0)
            try:
                raw = float(text)
            except ValueError as exc:
                raise DomainError(f"invalid exponent p: {raw!r}") from exc
        p = float(raw)
        if math.isinf(p) and p > 0:
            return cls(0.0)
        if not p >= 1.0:
            raise DomainError(f"p must be >= 1, got {p}")
        return cls(1.0 / p)

    @property
    def p(self) -> float:
        return math.inf if self.inv_p == 0.0 else 1.0 / self.inv_p

    @property
    def label(self) -> str:
        return "inf" if self.inv_p == 0.0 else f"{self.p:g}"

    @property
    def branch_exponent(self) -> float:
        """(2 - p) / p, equal to -1 at p = inf."""
        return 2.0 * self.inv_p - 1.0

    def point_evaluation_log(self, z: complex | np.ndarray) -> float | np.ndarray:
        """log (1 - |z|^2)^(-1/p), the norm of point evaluation at z."""
        a = np.abs(np.asarray(z, dtype=complex))
        value = -self.inv_p * np.log((1.0 - a) * (1.0 + a))
        return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class InterpScheme:
    nodes: tuple[complex, ...]
    exponent: HardyExponent

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(complex(z) for z in validate_nodes(self.nodes)))

    @cached_property
    def node_array(self) -> np.ndarray:
        return as_points(self.nodes)

    @cached_property
    def _deleted_at_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        # log|B_k(z_k)| and arg B_k(z_k) for every k
        z = self.node_array
        log_d = np.asarray(log_pseudo_distance(z[:, None], z[None, :]))
        arg = np.angle(z[:, None] - z[None, :]) - np.angle(1.0 - np.conj(z)[None, :] * z[:, None])
        np.fill_diagonal(log_d, 0.0)
        np.fill_diagonal(arg, 0.0)
        log_abs = log_d.sum(axis=1)
        if not np.all(np.isfinite(log_abs)):
            raise InterpolationError("deleted Blaschke product vanishes at a node")
        return log_abs, arg.sum(axis=1)


def _coefficient_rows(scheme: InterpScheme, zs: np.ndarray) -> np.ndarray:
    nodes = scheme.node_array
    z = zs[:, None]
    log_at_nodes, arg_at_nodes = scheme._deleted_at_nodes

    with np.errstate(divide="ignore", invalid="ignore"):
        log_d = np.asarray(log_pseudo_distance(z, nodes))
        arg = np.angle(z - nodes) - np.angle(1.0 - np.conj(nodes) * z)
        log_deleted = log_d.sum(axis=1, keepdims=True) - log_d
        arg_deleted = arg.sum(axis=1, keepdims=True) - arg
        ratio = np.exp(log_deleted - log_at_nodes + 1j * (arg_deleted - arg_at_nodes))

        z_abs = np.abs(z)
        n_abs = np.abs(nodes)
        lead = (1.0 - n_abs) * (1.0 + n_abs) / (1.0 - np.conj(nodes) * z)
        # Re(base) > 0 inside the disk, so the principal power is continuous
        base = (1.0 - np.conj(z) * nodes) / ((1.0 - z_abs) * (1.0 + z_abs))
        rows = lead * np.power(base, scheme.exponent.branch_exponent) * ratio

    near = log_d < _LOG_SEPARATION
    for i in np.flatnonzero(near.any(axis=1)):
        rows[i] = 0.0
        rows[i, int(np.argmin(log_d[i]))] = 1.0

    if not np.all(np.isfinite(rows)):
        raise InterpolationError("non-finite interpolation coefficient")
    return rows


def interp_coefficients(scheme: InterpScheme, z: complex) -> np.ndarray:
    z = check_disk_point(z)
    return _coefficient_rows(scheme, np.array([z]))[0]


SampleVector = Sequence[complex]


@dataclass(frozen=True)
class ReconstructionReport:
    point: complex
    estimate: complex
    error_bound: float
    coefficients: list[complex] = field(default_factory=list)


def _check_samples(scheme: InterpScheme, samples: SampleVector) -> np.ndarray:
    values = np.asarray(samples, dtype=complex).reshape(-1)
    if values.size != len(scheme.nodes):
        raise DomainError(f"expected {len(scheme.nodes)} samples, got {values.size}")
    return values


def _error_bounds(scheme: InterpScheme, zs: np.ndarray, norm_bound: float) -> np.ndarray:
    log_bound = scheme.exponent.point_evaluation_log(zs) + np.asarray(
        blaschke_log_abs(scheme.node_array, zs)
    )
    return norm_bound * np.exp(log_bound)


def reconstruct(
    scheme: InterpScheme, samples: SampleVector, z: complex, norm_bound: float = 1.0
) -> ReconstructionReport:
    values = _check_samples(scheme, samples)
    coefficients = interp_coefficients(scheme, z)
    z = complex(z)
    return ReconstructionReport(
        point=z,
        estimate=complex(np.dot(coefficients, values)),
        error_bound=float(_error_bounds(scheme, np.array([z]), norm_bound)[0]),
        coefficients=[complex(c) for c in coefficients],
    )


def residual_check(
    scheme: InterpScheme,
    samples: SampleVector,
    grid: Sequence[complex],
    truth: Sequence[complex],
    norm_bound: float = 1.0,
) -> float:
    """max over the grid of |truth - estimate| - error_bound; <= 0 means the bound held."""
    values = _check_samples(scheme, samples)
    zs = as_points(grid)
    expected = np.asarray(truth, dtype=complex).reshape(-1)
    if expected.size != zs.size:
        raise DomainError("grid and truth have different lengths")
    if zs.size == 0:
        return -math.inf
    if np.any(np.abs(zs) >= 1.0):
        raise DomainError("grid points must lie strictly inside the unit disk")
    estimates = _coefficient_rows(scheme, zs) @ values
    slack = np.abs(expected - estimates) - _error_bounds(scheme, zs, norm_bound)
    return float(np.max(slack))


def coefficient_bound_check(
    z: complex, node: complex, exponent: HardyExponent, R: float
) -> tuple[float, float]:
    """Both sides of (1-|z_k|^2)/|1 - conj(z_k) z| * |base|^((2-p)/p) <= 4/(1-R^2) for |z| <= R."""
    z = check_disk_point(z)
    node = check_disk_point(node, "node")
    if abs(z) > R:
        raise DomainError(f"|z| = {abs(z)} exceeds R = {R}")
    lead = (1.0 - abs(node) ** 2) / abs(1.0 - node.conjugate() * z)
    base = abs(1.0 - z.conjugate() * node) / (1.0 - abs(z) ** 2)
    return lead * base ** exponent.branch_exponent, 4.0 / (1.0 - R * R)


@dataclass(frozen=True)
class TestFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    h2_norm: float
    h1_norm: float

    __test__ = False

    def norm(self, exponent: HardyExponent) -> float:
        if exponent.inv_p == 0.0:
            return self.sup_norm
        if exponent.inv_p == 0.5:
            return self.h2_norm
        if exponent.inv_p == 1.0:
            return self.h1_norm
        # ||f||_p <= ||f||_inf for the normalised boundary measure
        return self.sup_norm

    def __call__(self, z: np.ndarray | complex) -> np.ndarray:
        return self.fn(np.asarray(z, dtype=complex))


_MOBIUS_CENTRE = 0.3 + 0.4j
_BLASCHKE_ZEROS = (0.5 + 0.0j, -0.3j, 0.2 + 0.6j)


def _finite_blaschke(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    for a in _BLASCHKE_ZEROS:
        out = out * mobius(a, z)
    return out


ANALYTIC_CORPUS: dict[str, TestFunction] = {
    f.name: f
    for f in (
        TestFunction("one", lambda z: np.ones_like(z), 1.0, 1.0, 1.0),
        TestFunction("z", lambda z: z, 1.0, 1.0, 1.0),
        TestFunction("z3", lambda z: z**3, 1.0, 1.0, 1.0),
        TestFunction("z5", lambda z: z**5, 1.0, 1.0, 1.0),
        TestFunction("half_shift", lambda z: (1.0 + z) / 2.0, 1.0, math.sqrt(0.5), 2.0 / math.pi),
        TestFunction(
            "half_shift_sq", lambda z: ((1.0 + z) / 2.0) ** 2, 1.0, math.sqrt(3.0 / 8.0), 0.5
        ),
        TestFunction("mobius", lambda z: mobius(_MOBIUS_CENTRE, z), 1.0, 1.0, 1.0),
        TestFunction("blaschke3", _finite_blaschke, 1.0, 1.0, 1.0),
    )
}


def corpus_function(name: str) -> TestFunction:
    try:
        return ANALYTIC_CORPUS[name]
    except KeyError as exc:
        known = ", ".join(sorted(ANALYTIC_CORPUS))
        raise DomainError(f"unknown function id {name!r} (known: {known})") from exc


def check_function(
    scheme: InterpScheme, function: TestFunction, grid: Sequence[complex]
) -> float:
    """residual_check of a corpus function with its analytic H^p norm."""
    samples = function(scheme.node_array)
    zs = as_points(grid)
    return residual_check(scheme, samples, zs, function(zs), function.norm(scheme.exponent))

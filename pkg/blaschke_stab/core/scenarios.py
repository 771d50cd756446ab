"""Canonical candidate sets: compact grids, Stolz angles, radial sequences, point files."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np
import orjson
from pydantic import ValidationError

from blaschke_stab.core.disk_core import (
    BoundaryPoint,
    WeightFunction,
    WeightKind,
    maximize_on_circle,
)
from blaschke_stab.core.errors import BudgetExceededError, DomainError, InvariantViolation, PointSetError
from blaschke_stab.core.potential import CandidateSet
from blaschke_stab.schemas import PointModel, PointSetFile, WeightModel

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 100_000
CONE_RTOL = 1e-9
MIN_FAN_ANGLE = 1e-6
MATERIALIZE_LIMIT = 50_000_000


class WeightRule(str, Enum):
    UNIT = "unit"
    AUTO_VERTICES = "auto_vertices"


class ScenarioKind(str, Enum):
    COMPACT_GRID = "compact"
    STOLZ = "stolz"
    RADIAL = "radial"
    FROM_FILE = "file"
    INLINE = "points"


@dataclass(frozen=True)
class StolzSpec:
    vertex: BoundaryPoint
    sigma: float
    count: int

    def __post_init__(self) -> None:
        if not self.sigma >= 1.0:
            raise DomainError(f"Stolz aperture sigma must be >= 1, got {self.sigma}")
        if self.count < 1:
            raise DomainError(f"Stolz count must be positive, got {self.count}")

    def contains(self, z: complex) -> bool:
        lhs = abs(1.0 - z.conjugate() * self.vertex.point)
        rhs = self.sigma * (1.0 - abs(z))
        return lhs <= rhs * (1.0 + CONE_RTOL)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind
    label: str = ""
    r: float = 0.25
    mesh: float = 0.05
    stolz: tuple[StolzSpec, ...] = ()
    radii: tuple[float, ...] | None = None
    count: int = 100
    angle: float = 0.0
    path: Path | None = None
    points: tuple[complex, ...] = ()
    weight: WeightRule = WeightRule.UNIT

    def build(self) -> CandidateSet:
        if self.kind is ScenarioKind.COMPACT_GRID:
            E = gen_compact_grid(self.r, self.mesh)
        elif self.kind is ScenarioKind.STOLZ:
            E = gen_stolz(self.stolz, self.weight)
        elif self.kind is ScenarioKind.RADIAL:
            E = gen_radial(self.radii, self.count, self.angle)
        elif self.kind is ScenarioKind.INLINE:
            E = CandidateSet(points=self.points, weight=WeightFunction.unit(), label=self.label or "points")
        else:
            if self.path is None:
                raise DomainError("file scenario needs a path")
            E = load_points(self.path)
        if self.label and self.label != E.label:
            E = CandidateSet(points=E.points, weight=E.weight, label=self.label)
        return E


def gen_compact_grid(r: float, mesh: float, max_points: int = MAX_GRID_POINTS) -> CandidateSet:
    """Square lattice of spacing mesh cut to |z| <= r, row-major (imaginary part outer)."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"grid radius must lie in (0, 1), got {r}")
    if not 0.0 < mesh < r:
        raise DomainError(f"mesh must lie in (0, r), got {mesh}")
    k = int(math.floor(r / mesh)) + 1
    if math.pi * (r / mesh + 1.0) ** 2 > 2 * max_points:
        raise BudgetExceededError(f"mesh {mesh} yields more than {max_points} grid points")

    steps = np.arange(-k, k + 1) * mesh
    re, im = np.meshgrid(steps, steps)
    z = (re + 1j * im).reshape(-1)
    z = z[np.abs(z) <= r]
    if z.size > max_points:
        raise BudgetExceededError(f"mesh {mesh} yields {z.size} > {max_points} grid points")
    return CandidateSet(
        points=tuple(complex(p) for p in z),
        weight=WeightFunction.unit(),
        label=f"compact(r={r:g},mesh={mesh:g})",
    )


def stolz_half_angle(rho: float, sigma: float) -> float:
    """Largest |psi| with rho*e^{i psi} inside the aperture-sigma cone at vertex 1."""
    if rho == 0.0:
        return math.pi
    c = (1.0 + rho * rho - sigma * sigma * (1.0 - rho) ** 2) / (2.0 * rho)
    return math.acos(min(1.0, max(-1.0, c)))


def _stolz_points(spec: StolzSpec) -> list[complex]:
    theta = spec.vertex.theta
    fan = 2 * math.ceil(spec.sigma) + 1
    out: list[complex] = [0j]
    for j in range(1, spec.count):
        rho = 1.0 - 1.0 / (j + 1)
        psi_max = stolz_half_angle(rho, spec.sigma)
        offsets = [0.0] if psi_max < MIN_FAN_ANGLE else np.linspace(-psi_max, psi_max, fan)
        for psi in offsets:
            out.append(rho * complex(math.cos(theta + psi), math.sin(theta + psi)))
    return out


def gen_stolz(specs: Sequence[StolzSpec], weight: WeightRule = WeightRule.AUTO_VERTICES) -> CandidateSet:
    if not specs:
        raise DomainError("at least one Stolz angle is required")
    seen: set[complex] = set()
    points: list[complex] = []
    for spec in specs:
        for z in _stolz_points(spec):
            if not spec.contains(z):
                raise InvariantViolation(f"generated point {z!r} left its Stolz angle")
            if z not in seen:
                seen.add(z)
                points.append(z)

    if weight is WeightRule.AUTO_VERTICES:
        thetas = list(dict.fromkeys(s.vertex.theta for s in specs))
        q = WeightFunction.boundary_poly(thetas)
    else:
        q = WeightFunction.unit()
    label = "stolz(" + ";".join(f"{s.vertex.theta:.6g},{s.sigma:g},{s.count}" for s in specs) + ")"
    return CandidateSet(points=tuple(points), weight=q, label=label)


@dataclass(frozen=True)
class HarmonicRay:
    """z_j = j/(j+1) e^{i angle} for j = 1..count, with exact masses 1/(j+1)."""

    count: int
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise DomainError("harmonic ray needs at least one point")
        if self.count > MATERIALIZE_LIMIT:
            raise BudgetExceededError(f"harmonic ray of {self.count} points is too long")

    @classmethod
    def for_blocks(cls, k_max: int, angle: float = 0.0) -> "HarmonicRay":
        """A ray long enough for k_max blocks of mass 1, 2, ..., k_max."""
        start = 1
        for k in range(1, k_max + 1):
            # sum_{j=a}^{b} 1/(j+1) ~ log((b+2)/(a+1))
            start = int(math.ceil((start + 1) * math.exp(k))) - 1
        return cls(count=int(start * 1.001) + 16, angle=angle)

    def indices(self, start: int = 1, stop: int | None = None) -> np.ndarray:
        stop = self.count if stop is None else stop
        return np.arange(start, stop + 1, dtype=np.float64)

    def masses(self) -> np.ndarray:
        return 1.0 / (self.indices() + 1.0)

    def points(self, start: int = 1, stop: int | None = None) -> np.ndarray:
        j = self.indices(start, stop)
        return (j / (j + 1.0)) * complex(math.cos(self.angle), math.sin(self.angle))


def gen_radial(
    radii: Sequence[float] | None = None, count: int = 100, angle: float = 0.0
) -> CandidateSet:
    """Radial sequence at a fixed angle; radii default to 1 - 1/(j+1), j = 1..count."""
    if radii is None:
        rs = HarmonicRay(count, angle).indices()
        rs = rs / (rs + 1.0)
        rule = "harmonic"
    else:
        rs = np.asarray(radii, dtype=float)
        if rs.size == 0 or np.any(rs < 0.0) or np.any(rs >= 1.0):
            raise DomainError("radial radii must lie in [0, 1)")
        if np.any(np.diff(rs) <= 0.0):
            raise DomainError("radial radii must be strictly increasing")
        rule = "custom"
    direction = complex(math.cos(angle), math.sin(angle))
    E = CandidateSet(
        points=tuple(complex(r * direction) for r in rs),
        weight=WeightFunction.unit(),
        label=f"radial({rule},n={rs.size},angle={angle:.6g})",
    )
    logger.debug("%s partial mass %.6f", E.label, partial_mass(E))
    return E


def partial_mass(E: CandidateSet) -> float:
    """sum of (1 - |z|) over E."""
    return math.fsum(1.0 - abs(z) for z in E.points)


def check_scenario(E: CandidateSet, spec: ScenarioSpec) -> list[str]:
    """Re-verify a generated set against its defining inequalities."""
    problems: list[str] = []
    if spec.kind is ScenarioKind.COMPACT_GRID:
        for i, z in enumerate(E.points):
            if abs(z) > spec.r:
                problems.append(f"point {i}: |z| = {abs(z)!r} > r = {spec.r}")
            for coord in (z.real, z.imag):
                if abs(coord / spec.mesh - round(coord / spec.mesh)) > 1e-9:
                    problems.append(f"point {i}: {z!r} is off the lattice")
                    break
    elif spec.kind is ScenarioKind.STOLZ:
        for i, z in enumerate(E.points):
            if not any(s.contains(z) for s in spec.stolz):
                problems.append(f"point {i}: {z!r} lies in no Stolz angle")
    elif spec.kind is ScenarioKind.RADIAL and spec.radii is None:
        direction = complex(math.cos(spec.angle), math.sin(spec.angle))
        for i, z in enumerate(E.points):
            j = i + 1
            if abs(z - (j / (j + 1)) * direction) > 1e-15:
                problems.append(f"point {i}: {z!r} is not {j}/{j + 1} on the ray")

    if E.weight.kind is WeightKind.BOUNDARY_POLY:
        peak = maximize_on_circle(E.weight.log_abs, 1.0, 8192).log_value
        if abs(peak) > 1e-9:
            problems.append(f"weight sup-norm is exp({peak:.3e}), not 1")
    return problems


def _format_real(x: float) -> str:
    return format(x, ".17g")


def save_points(E: CandidateSet, path: Path) -> Path:
    weight = WeightModel(
        kind=E.weight.kind.value,
        vertices_theta=E.weight.vertex_thetas,
    )
    payload = PointSetFile(
        label=E.label,
        weight=weight,
        points=[PointModel(re=_format_real(z.real), im=_format_real(z.imag)) for z in E.points],
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(payload.model_dump(mode="json"), option=orjson.OPT_INDENT_2))
    return path


def load_points(path: Path) -> CandidateSet:
    path = Path(path)
    try:
        raw = orjson.loads(path.read_bytes())
        data = PointSetFile.model_validate(raw)
    except FileNotFoundError as exc:
        raise PointSetError(f"point file {path} does not exist") from exc
    except (orjson.JSONDecodeError, ValidationError) as exc:
        raise PointSetError(f"malformed point file {path}: {exc}") from exc

    points: list[complex] = []
    seen: dict[complex, int] = {}
    for i, item in enumerate(data.points):
        try:
            z = complex(float(item.re), float(item.im))
        except ValueError as exc:
            raise PointSetError(f"unparsable coordinates {item.re!r}, {item.im!r}", index=i) from exc
        if not abs(z) < 1.0:
            raise PointSetError(f"|z| = {abs(z)!r} is not inside the unit disk", index=i)
        if z in seen:
            raise PointSetError(f"duplicates point {seen[z]}", index=i)
        seen[z] = i
        points.append(z)
    if not points:
        raise PointSetError(f"point file {path} has no points")

    if data.weight.kind == "boundary_poly":
        q = WeightFunction.boundary_poly(data.weight.vertices_theta)
    else:
        q = WeightFunction.unit()
    return CandidateSet(points=tuple(points), weight=q, label=data.label)


def spec_from_params(kind: str, params: dict, stolz_vertices: Sequence[float] = ()) -> ScenarioSpec:
    """Build a ScenarioSpec from pack/CLI parameters."""
    try:
        scenario_kind = ScenarioKind(kind)
    except ValueError as exc:
        raise DomainError(f"unknown scenario kind {kind!r}") from exc

    weight = WeightRule(params.get("weight", "auto_vertices" if scenario_kind is ScenarioKind.STOLZ else "unit"))
    if scenario_kind is ScenarioKind.STOLZ:
        sigma = float(params.get("sigma", 2.0))
        count = int(params.get("count", 12))
        thetas = list(stolz_vertices) or list(params.get("vertices_theta", [0.0]))
        stolz = tuple(StolzSpec(BoundaryPoint(t), sigma, count) for t in thetas)
        return ScenarioSpec(kind=scenario_kind, stolz=stolz, weight=weight, label=params.get("label", ""))
    if scenario_kind is ScenarioKind.RADIAL:
        radii = params.get("radii")
        return ScenarioSpec(
            kind=scenario_kind,
            radii=tuple(radii) if radii else None,
            count=int(params.get("count", 100)),
            angle=float(params.get("angle", 0.0)),
            label=params.get("label", ""),
        )
    if scenario_kind is ScenarioKind.INLINE:
        pts = tuple(complex(re, im) for re, im in params.get("points", []))
        return ScenarioSpec(kind=scenario_kind, points=pts, label=params.get("label", ""))
    if scenario_kind is ScenarioKind.FROM_FILE:
        if not params.get("path"):
            raise DomainError("file scenario needs a path")
        return ScenarioSpec(kind=scenario_kind, path=Path(params["path"]), label=params.get("label", ""))
    return ScenarioSpec(
        kind=scenario_kind,
        r=float(params.get("r", 0.25)),
        mesh=float(params.get("mesh", 0.05)),
        label=params.get("label", ""),
    )

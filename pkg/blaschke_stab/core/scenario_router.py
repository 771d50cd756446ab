from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Any

import orjson

from blaschke_stab.core.errors import DomainError
from blaschke_stab.core.scenarios import ScenarioKind, ScenarioSpec, spec_from_params

logger = logging.getLogger(__name__)

OVERRIDABLE = ("r", "mesh", "sigma", "count", "angle", "vertices_theta")


@dataclass(frozen=True)
class ResolvedScenario:
    name: str
    spec: ScenarioSpec
    params: dict[str, Any]
    defaults: dict[str, Any] = field(default_factory=dict)


class ScenarioRouter:
    """Maps `--scenario NAME|PATH` onto a bundled pack or a point-set file."""

    def __init__(self, packs_dir: Path) -> None:
        self.packs_dir = Path(packs_dir)

    def available_packs(self) -> list[str]:
        return sorted([p.stem for p in self.packs_dir.glob("*.json")])

    def load_pack(self, name: str) -> dict:
        pack_path = self.packs_dir / f"{name}.json"
        if not pack_path.exists():
            known = ", ".join(self.available_packs())
            raise DomainError(f"Unknown scenario pack: {name} (available: {known})")
        return orjson.loads(pack_path.read_bytes())

    def resolve(self, name_or_path: str, overrides: dict[str, Any] | None = None) -> ResolvedScenario:
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        unknown = set(overrides) - set(OVERRIDABLE)
        if unknown:
            raise DomainError(f"cannot override scenario parameters {sorted(unknown)}")

        normalized = name_or_path.strip()
        if normalized.lower() in self.available_packs():
            name = normalized.lower()
            pack = self.load_pack(name)
            kind = pack["kind"]
            params = {**pack.get("params", {}), **overrides}
            defaults = dict(pack.get("defaults", {}))
        elif Path(normalized).is_file():
            name = Path(normalized).stem
            kind = ScenarioKind.FROM_FILE.value
            if overrides:
                logger.warning("ignoring overrides %s for point file %s", sorted(overrides), normalized)
            params = {"path": normalized}
            defaults = {}
        else:
            try:
                kind = ScenarioKind(normalized.lower()).value
            except ValueError:
                known = ", ".join(self.available_packs())
                raise DomainError(
                    f"{name_or_path!r} is neither a scenario pack ({known}) nor a point file"
                ) from None
            name = kind
            params = dict(overrides)
            defaults = {}

        spec = spec_from_params(kind, params)
        logger.debug("scenario %s resolved to %s with %s", name_or_path, kind, params)
        return ResolvedScenario(name=name, spec=spec, params=params, defaults=defaults)

from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass
import io
import logging
import math
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import orjson
from pydantic import BaseModel

from blaschke_stab import __version__
from blaschke_stab.core import run_ledger
from blaschke_stab.core.bounds import (
    ArcSet,
    SearchBudget,
    StabilitySandwich,
    corollary_power_decay,
    eta_sequence,
    one_point,
    positive_measure_bound,
    sandwich,
)
from blaschke_stab.core.config import Settings
from blaschke_stab.core.errors import (
    DomainError,
    EnvelopeSupportError,
    InterpolationError,
    InvariantViolation,
)
from blaschke_stab.core.interp import (
    ANALYTIC_CORPUS,
    HardyExponent,
    InterpScheme,
    check_function,
    corpus_function,
)
from blaschke_stab.core.potential import (
    CandidateSet,
    FeketeRecord,
    PhiMap,
    ScanMode,
    check_scan_invariants,
    envelope_h,
    greedy_order,
    sequence_scan,
)
from blaschke_stab.core.run_ledger import RunLedger
from blaschke_stab.core.scenario_router import ResolvedScenario, ScenarioRouter
from blaschke_stab.core.scenarios import HarmonicRay, ScenarioKind, check_scenario, save_points
from blaschke_stab.schemas import (
    EtaBlockRow,
    FeketeRecordRow,
    HarmonicReport,
    InterpCheckRow,
    LedgerEvent,
    Provenance,
    RunConfig,
    SandwichRow,
    WeightSummary,
)
from blaschke_stab.storage.run_store import RunStore

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9
SANDWICH_SLACK = 1e-9
DEFAULT_EPS_POINTS = 10
DEFAULT_GRID = 200
DEFAULT_NODES = 10
GRID_RADIUS = 0.95
DEFAULT_EXPONENTS = ("1", "2", "inf")
MIN_FIT_RECORDS = 8
JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


@dataclass
class CommandContext:
    settings: Settings
    ledger: RunLedger
    router: ScenarioRouter
    out_dir: Path

    @classmethod
    def from_settings(cls, settings: Settings, out_dir: Path | None = None) -> "CommandContext":
        store = RunStore(settings.run_db_url)
        return cls(
            settings=settings,
            ledger=RunLedger(store),
            router=ScenarioRouter(settings.packs_dir),
            out_dir=Path(out_dir) if out_dir is not None else settings.output_dir,
        )


@dataclass
class _Run:
    """One command invocation: resolved scenario, config and ledger run id."""

    ctx: CommandContext
    command: str
    name: str
    config: RunConfig
    run_id: str
    scenario_label: str | None = None

    def event(self, event_type: str, data: dict[str, Any]) -> None:
        self.ctx.ledger.append(self.run_id, event_type, data)

    def provenance(self) -> Provenance:
        events = [LedgerEvent(**e) for e in self.ctx.ledger.timeline(self.run_id)]
        return Provenance(
            version=__version__,
            config=self.config,
            scenario_label=self.scenario_label,
            events=events,
        )


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _pairs(points: Sequence[complex]) -> list[list[float]]:
    return [_pair(complex(z)) for z in points]


def _finite_or_none(x: float | None) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


def _budget(ctx: CommandContext, args: argparse.Namespace, defaults: dict[str, Any]) -> SearchBudget:
    settings = ctx.settings
    nmax = args.nmax if getattr(args, "nmax", None) is not None else defaults.get("nmax", settings.scan_nmax)
    return SearchBudget(
        exhaustive_limit=args.budget if args.budget is not None else settings.brute_limit,
        max_enumeration=settings.max_enumeration,
        random_trials=settings.random_trials,
        scan_nmax=int(nmax),
        seed=args.seed if args.seed is not None else settings.seed,
    )


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "r": getattr(args, "r", None),
        "mesh": getattr(args, "mesh", None),
        "sigma": getattr(args, "sigma", None),
        "count": getattr(args, "count", None),
        "angle": getattr(args, "angle", None),
        "vertices_theta": getattr(args, "vertex", None) or None,
    }


def _begin(
    ctx: CommandContext,
    command: str,
    name: str,
    params: dict[str, Any],
    budget: SearchBudget,
    scenario: str | None,
) -> _Run:
    config = RunConfig(
        command=command,
        scenario=scenario,
        params=params,
        seed=budget.seed,
        brute_limit=budget.exhaustive_limit,
        max_enumeration=budget.max_enumeration,
        random_trials=budget.random_trials,
    )
    run_id = ctx.ledger.start(command, config.model_dump(mode="json"))
    return _Run(ctx=ctx, command=command, name=name, config=config, run_id=run_id)


def _build(run: _Run, resolved: ResolvedScenario) -> CandidateSet:
    E = resolved.spec.build()
    problems = check_scenario(E, resolved.spec)
    if problems:
        raise InvariantViolation(f"scenario {resolved.name} failed its post-generation check", problems)
    run.scenario_label = E.label
    run.event(
        run_ledger.SCENARIO_BUILT,
        {"label": E.label, "points": len(E), "weight": E.weight.kind.value},
    )
    return E


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, dict)):
        return orjson.dumps(value, option=orjson.OPT_SORT_KEYS).decode()
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def _write_outputs(
    run: _Run,
    rows: Sequence[BaseModel],
    extra: dict[str, Any] | None = None,
) -> tuple[Path, Path]:
    """{command}_{scenario}.json (provenance + rows) and the matching CSV table."""
    out_dir = run.ctx.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{run.command}_{run.name}"
    provenance = run.provenance().model_dump(mode="json")

    payload: dict[str, Any] = {"provenance": provenance, "rows": [r.model_dump(mode="json") for r in rows]}
    payload.update(extra or {})
    json_path = out_dir / f"{stem}.json"
    json_path.write_bytes(orjson.dumps(payload, option=JSON_OPTIONS) + b"\n")

    buffer = io.StringIO()
    buffer.write("# provenance: " + orjson.dumps(provenance, option=orjson.OPT_SORT_KEYS).decode() + "\n")
    if rows:
        columns = list(type(rows[0]).model_fields)
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(v) for k, v in row.model_dump().items()})
    csv_path = out_dir / f"{stem}.csv"
    csv_path.write_text(buffer.getvalue(), encoding="utf-8")

    run.ctx.ledger.append(run.run_id, run_ledger.OUTPUT_WRITTEN, {"json": str(json_path), "csv": str(csv_path)})
    logger.info("wrote %s and %s", json_path, csv_path)
    return json_path, csv_path


def _fail_if(run: _Run, violations: list[str], message: str, error=InvariantViolation) -> None:
    run.ctx.ledger.append(run.run_id, run_ledger.INVARIANT_CHECK, {"violations": violations})
    if violations:
        raise error(f"{message}: {len(violations)} violation(s)", violations)


def _scan(E: CandidateSet, budget: SearchBudget, mode: ScanMode, n_max: int) -> list[FeketeRecord]:
    return sequence_scan(
        E,
        n_max,
        mode,
        brute_limit=budget.exhaustive_limit,
        max_enumeration=budget.max_enumeration,
        check=False,
    )


def _record_row(rec: FeketeRecord) -> FeketeRecordRow:
    return FeketeRecordRow(
        n=rec.n,
        points=_pairs(rec.points),
        logV=rec.logV,
        mu=_finite_or_none(rec.mu),
        logM=_finite_or_none(rec.logM),
        method=rec.method.value,
    )


def cmd_scan(ctx: CommandContext, args: argparse.Namespace) -> None:
    resolved = ctx.router.resolve(args.scenario, _overrides(args))
    budget = _budget(ctx, args, resolved.defaults)
    mode = ScanMode(args.mode or resolved.defaults.get("mode", ScanMode.HEURISTIC.value))
    params = {**resolved.params, "nmax": budget.scan_nmax, "mode": mode.value}
    run = _begin(ctx, "scan", resolved.name, params, budget, args.scenario)
    E = _build(run, resolved)

    records = _scan(E, budget, mode, budget.scan_nmax)
    for rec in records:
        run.event(run_ledger.SCAN_RECORD, {"n": rec.n, "logM": _finite_or_none(rec.logM), "method": rec.method.value})
        if mode is ScanMode.EXACT and not rec.exact:
            run.event(run_ledger.BUDGET_DOWNGRADE, {"n": rec.n, "brute_limit": budget.exhaustive_limit})

    extra: dict[str, Any] = {}
    if len(records) >= MIN_FIT_RECORDS:
        try:
            extra["power_decay_fit"] = asdict(corollary_power_decay(records))
        except DomainError as exc:
            logger.info("power-law fit skipped: %s", exc)

    _write_outputs(run, [_record_row(r) for r in records], extra)
    if mode is ScanMode.EXACT:
        radius = resolved.spec.r if resolved.spec.kind is ScenarioKind.COMPACT_GRID else None
        _fail_if(run, check_scan_invariants(records, compact_radius=radius), f"scan of {E.label}")


def _weight_summary(E: CandidateSet) -> WeightSummary:
    return WeightSummary(
        kind=E.weight.kind.value,
        vertices=E.weight.vertex_thetas,
        norm_const=E.weight.norm_const,
    )


def _sandwich_row(s: StabilitySandwich, q: WeightSummary) -> SandwichRow:
    return SandwichRow(
        p=s.p.label,
        eps=s.eps,
        R=s.R,
        alpha=s.alpha,
        K=s.K,
        q=q,
        lower_log=s.lower_log,
        upper_log=s.upper_log,
        upper_certified_log=s.upper_certified_log,
        phi_eps=s.phi_eps,
        n0=s.n0,
        witness_lower=_pairs(s.witness_lower),
        witness_upper=_pairs(s.witness_upper),
        lower_exact=s.lower_exact,
        method=s.method,
        seed=s.seed,
    )


def _eps_values(raw: Sequence[str] | None) -> list[float] | None:
    if not raw:
        return None
    values: list[float] = []
    for chunk in raw:
        for token in chunk.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                values.append(float(token))
            except ValueError as exc:
                raise DomainError(f"invalid eps value {token!r}") from exc
    if any(not v > 0.0 for v in values):
        raise DomainError("eps values must be positive")
    return values


def cmd_sandwich(ctx: CommandContext, args: argparse.Namespace) -> None:
    resolved = ctx.router.resolve(args.scenario, _overrides(args))
    defaults = resolved.defaults
    budget = _budget(ctx, args, defaults)
    mode = ScanMode(args.mode or defaults.get("mode", ScanMode.HEURISTIC.value))
    R = float(args.R if args.R is not None else defaults.get("R", 0.5))
    p = HardyExponent.parse(args.p or defaults.get("p", "2"))
    explicit_eps = _eps_values(args.eps)

    params = {**resolved.params, "R": R, "p": p.label, "nmax": budget.scan_nmax, "mode": mode.value}
    params["eps"] = explicit_eps
    run = _begin(ctx, "sandwich", resolved.name, params, budget, args.scenario)
    E = _build(run, resolved)
    if len(E) < 2:
        raise DomainError(f"{E.label} needs at least two points for a decay envelope")

    records = _scan(E, budget, mode, min(budget.scan_nmax, len(E) - 1))
    phi_map = PhiMap(envelope_h(records))
    eps_list = explicit_eps or [
        float(e) for e in np.geomspace(phi_map.eps_min, phi_map.eps0, DEFAULT_EPS_POINTS)[1:-1]
    ]

    q = _weight_summary(E)
    rows: list[SandwichRow] = []
    violations: list[str] = []
    for eps in eps_list:
        try:
            if R == 0.0:
                s = one_point(E, eps, p, budget, records)
            else:
                s = sandwich(E, eps, R, p, budget, records)
        except EnvelopeSupportError as exc:
            logger.warning("eps=%g flagged: %s", eps, exc)
            run.event(run_ledger.ROW_FLAGGED, {"eps": eps, "reason": str(exc)})
            rows.append(SandwichRow(p=p.label, eps=eps, R=R, q=q, method="none", seed=budget.seed, flag=str(exc)))
            continue
        run.event(
            run_ledger.SANDWICH_ROW,
            {"eps": eps, "lower_log": s.lower_log, "upper_certified_log": s.upper_certified_log},
        )
        if not s.holds(SANDWICH_SLACK):
            violations.append(
                f"eps={eps:g}: lower {s.lower_log:.12g} above upper "
                f"{s.upper_certified_log:.12g} / {s.upper_log}"
            )
        rows.append(_sandwich_row(s, q))

    _write_outputs(run, rows)
    _fail_if(run, violations, f"sandwich on {E.label}")


def spiral_grid(m: int, radius: float = GRID_RADIUS) -> np.ndarray:
    """Golden-angle spiral of m points filling |z| <= radius."""
    if m < 1:
        raise DomainError("grid needs at least one point")
    k = np.arange(m, dtype=float)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    return radius * np.sqrt((k + 0.5) / m) * np.exp(1j * golden * k)


def cmd_interp_check(ctx: CommandContext, args: argparse.Namespace) -> None:
    resolved = ctx.router.resolve(args.scenario, _overrides(args))
    budget = _budget(ctx, args, resolved.defaults)
    exponents = [HardyExponent.parse(args.p)] if args.p else [HardyExponent.parse(x) for x in DEFAULT_EXPONENTS]
    functions = [corpus_function(args.function)] if args.function else list(ANALYTIC_CORPUS.values())
    m = args.grid or DEFAULT_GRID

    params = {
        **resolved.params,
        "functions": [f.name for f in functions],
        "p": [e.label for e in exponents],
        "grid": m,
        "nodes": args.nodes or DEFAULT_NODES,
    }
    run = _begin(ctx, "interp-check", resolved.name, params, budget, args.scenario)
    E = _build(run, resolved)
    n = min(args.nodes or DEFAULT_NODES, len(E))
    nodes = tuple(E.points[i] for i in greedy_order(E, n))
    grid = spiral_grid(m)

    rows: list[InterpCheckRow] = []
    failures: list[str] = []
    for exponent in exponents:
        scheme = InterpScheme(nodes, exponent)
        for function in functions:
            worst = check_function(scheme, function, grid)
            passed = worst <= RESIDUAL_TOLERANCE
            if not passed:
                failures.append(f"{function.name}, p={exponent.label}: violation {worst:.3e}")
            rows.append(
                InterpCheckRow(
                    function=function.name,
                    p=exponent.label,
                    nodes=n,
                    grid_points=m,
                    norm_bound=function.norm(exponent),
                    max_violation=worst,
                    passed=passed,
                )
            )

    _write_outputs(run, rows)
    _fail_if(run, failures, f"interpolation bound on {E.label}", error=InterpolationError)


def cmd_eta(ctx: CommandContext, args: argparse.Namespace) -> None:
    resolved = ctx.router.resolve(args.scenario, _overrides(args))
    budget = _budget(ctx, args, resolved.defaults)
    k_max = int(args.k_max or resolved.defaults.get("k_max", 3))
    function = corpus_function(args.function or "half_shift")
    spec = resolved.spec

    harmonic = spec.kind is ScenarioKind.RADIAL and spec.radii is None
    params = {**resolved.params, "k_max": k_max, "function": function.name}
    run = _begin(ctx, "eta", resolved.name, params, budget, args.scenario)
    if harmonic:
        count = resolved.params.get("count")
        ray = HarmonicRay(int(count), spec.angle) if count else HarmonicRay.for_blocks(k_max, spec.angle)
        run.scenario_label = f"harmonic_ray(n={ray.count},angle={ray.angle:.6g})"
        run.event(run_ledger.SCENARIO_BUILT, {"label": run.scenario_label, "points": ray.count, "weight": "unit"})
        seq = eta_sequence(ray, k_max, function)
    else:
        E = _build(run, resolved)
        seq = eta_sequence(E.array, k_max, function)

    rows = [
        EtaBlockRow(
            k=b.k,
            start=b.start,
            length=b.length,
            mass=b.mass,
            min_log_eta=b.min_log_eta,
            max_log_eta=b.max_log_eta,
            max_log_ratio=b.max_log_ratio,
        )
        for b in seq.blocks
    ]
    ratios = [b.max_log_ratio for b in seq.blocks]
    if any(later < earlier for earlier, later in zip(ratios, ratios[1:])):
        logger.warning("per-block max of |f|/eta is not monotone: %s", ratios)
    _write_outputs(run, rows)

    violations = [f"block {b.k}: mass {b.mass!r} < {b.k}" for b in seq.blocks if b.mass < b.k]
    violations += [f"block {b.k}: eta vanishes" for b in seq.blocks if not math.isfinite(b.min_log_eta)]
    _fail_if(run, violations, "eta blocks")


def _arc_pairs(raw: Sequence[str] | None) -> list[tuple[float, float]]:
    if not raw:
        raise DomainError("at least one --arc start,end is required")
    pairs: list[tuple[float, float]] = []
    for item in raw:
        parts = item.split(",")
        if len(parts) != 2:
            raise DomainError(f"arc {item!r} is not of the form start,end")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise DomainError(f"arc {item!r} has non-numeric endpoints") from exc
    return pairs


def cmd_harmonic(ctx: CommandContext, args: argparse.Namespace) -> None:
    pairs = _arc_pairs(args.arc)
    eps_values = _eps_values(args.eps)
    if not eps_values or len(eps_values) != 1:
        raise DomainError("harmonic needs exactly one --eps value")
    eps = eps_values[0]
    R = float(args.R if args.R is not None else 0.5)
    p = HardyExponent.parse(args.p or "2")
    budget = _budget(ctx, args, {})

    arcs = ArcSet.from_pairs(pairs)
    params = {"arcs": [list(a) for a in pairs], "eps": eps, "R": R, "p": p.label}
    run = _begin(ctx, "harmonic", "arcs", params, budget, None)
    bound = positive_measure_bound(arcs, eps, R, p)
    report = HarmonicReport(
        arcs=[list(a) for a in arcs.arcs],
        measure=arcs.measure,
        eps=eps,
        R=R,
        p=p.label,
        omega_min=bound.omega_min,
        omega_min_theta=bound.omega_min_theta,
        lower=bound.lower,
        upper=bound.upper,
    )
    _write_outputs(run, [report])
    violations = [] if bound.lower <= bound.upper * (1.0 + SANDWICH_SLACK) else [
        f"lower {bound.lower!r} above upper {bound.upper!r}"
    ]
    _fail_if(run, violations, "harmonic-measure bound")


def cmd_gen(ctx: CommandContext, args: argparse.Namespace) -> None:
    resolved = ctx.router.resolve(args.scenario, _overrides(args))
    budget = _budget(ctx, args, resolved.defaults)
    run = _begin(ctx, "gen", resolved.name, dict(resolved.params), budget, args.scenario)
    E = _build(run, resolved)
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    path = save_points(E, ctx.out_dir / f"gen_{resolved.name}.json")
    ctx.ledger.append(run.run_id, run_ledger.OUTPUT_WRITTEN, {"json": str(path)})
    logger.info("wrote %d points to %s", len(E), path)


COMMANDS: dict[str, Callable[[CommandContext, argparse.Namespace], None]] = {
    "scan": cmd_scan,
    "sandwich": cmd_sandwich,
    "interp-check": cmd_interp_check,
    "eta": cmd_eta,
    "harmonic": cmd_harmonic,
    "gen": cmd_gen,
}

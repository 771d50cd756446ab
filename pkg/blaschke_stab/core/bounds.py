"""Two-sided stability bounds for recovering H^p functions that are small on E.

lower: g(E, eps, R), the largest sup_{|z|<=R}|B_q(Z, z)| over tuples Z from E whose
weighted Blaschke product stays below eps on E.
upper: K |q(0)|^-alpha g(E, phi(eps), R)^alpha, plus a certified direct estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from blaschke_stab.core.disk_core import (
    TWO_PI,
    WeightFunction,
    ZeroTuple,
    alpha_star,
    as_points,
    blaschke_log_abs,
    check_disk_point,
    log_pseudo_distance,
    maximize_on_circle,
    sup_on_circle,
    weighted_blaschke_log_abs,
)
from blaschke_stab.core.errors import DomainError, InsufficientMassError, InvariantViolation
from blaschke_stab.core.interp import HardyExponent, InterpScheme, interp_coefficients
from blaschke_stab.core.potential import (
    CandidateSet,
    FeketeRecord,
    PhiMap,
    ScanMode,
    envelope_h,
    greedy_order,
    sequence_scan,
    solve_phi,
)
from blaschke_stab.core.scenarios import HarmonicRay

logger = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-12
ORIGIN_TOLERANCE = 1e-12
PROXY_GRID = 512
MAX_SWAP_PASSES = 8
SUBSET_CHUNK_BITS = 16


@dataclass(frozen=True)
class SearchBudget:
    exhaustive_limit: int = 100_000
    max_enumeration: int = 10_000_000
    random_trials: int = 24
    scan_nmax: int = 8
    seed: int = 20240917

    @classmethod
    def from_settings(cls, settings) -> "SearchBudget":
        return cls(
            exhaustive_limit=settings.brute_limit,
            max_enumeration=settings.max_enumeration,
            random_trials=settings.random_trials,
            scan_nmax=settings.scan_nmax,
            seed=settings.seed,
        )


@dataclass(frozen=True)
class GEstimate:
    eps: float
    R: float
    log_g: float
    witness: tuple[complex, ...]
    certified_feasible: bool
    exact: bool
    log_sup_on_E: float

    @property
    def method(self) -> str:
        return "exhaustive" if self.exact else "heuristic"


class _Objective:
    """log sup_{|z|<=R} |B_q(Z, z)|, or log|B_q(Z, 0)| when R = 0."""

    def __init__(self, E: CandidateSet, R: float) -> None:
        self.E = E
        self.R = R
        if R == 0.0:
            self.empty = float(E.weight.log_abs(0.0))
        else:
            self.empty = sup_on_circle(E.weight, [], R).log_value
        # per-point majorant of log sup|factor|, exact at R = 0
        a = np.abs(E.array)
        with np.errstate(divide="ignore"):
            self.factor_cap = np.log((R + a) / (1.0 + R * a))

    def exact(self, idx: Sequence[int]) -> float:
        pts = self.E.array[list(idx)] if len(idx) else np.empty(0, dtype=complex)
        if self.R == 0.0:
            return float(weighted_blaschke_log_abs(self.E.weight, pts, 0.0))
        return sup_on_circle(self.E.weight, pts, self.R).log_value

    @property
    def circle(self) -> tuple[np.ndarray, np.ndarray]:
        # proxy: log|q| and log d(z_j, .) on a coarse circle of radius R
        if self.R == 0.0:
            ring = np.zeros(1, dtype=complex)
        else:
            ring = self.R * np.exp(1j * np.arange(PROXY_GRID) * (TWO_PI / PROXY_GRID))
        log_q = np.asarray(self.E.weight.log_abs(ring), dtype=float).reshape(-1)
        table = np.asarray(log_pseudo_distance(self.E.array[:, None], ring[None, :]), dtype=float)
        return log_q, table


def _verify_feasible(E: CandidateSet, witness: np.ndarray, eps: float) -> tuple[bool, float]:
    values = np.asarray(weighted_blaschke_log_abs(E.weight, witness, E.array)).reshape(-1)
    top = float(values.max())
    return top <= math.log(eps) + FEASIBILITY_SLACK, top


def _estimate(E: CandidateSet, eps: float, R: float, idx: Sequence[int], value: float, exact: bool) -> GEstimate:
    witness = E.array[list(idx)] if len(idx) else np.empty(0, dtype=complex)
    feasible, top = _verify_feasible(E, witness, eps)
    return GEstimate(
        eps=eps,
        R=R,
        log_g=value,
        witness=tuple(complex(z) for z in witness),
        certified_feasible=feasible,
        exact=exact,
        log_sup_on_E=top,
    )


def _exhaustive(E: CandidateSet, log_eps: float, objective: _Objective) -> tuple[list[int], float]:
    n = len(E)
    low = min(n, SUBSET_CHUNK_BITS)
    size = 1 << low
    profiles = np.empty((size, n))
    caps = np.empty(size)
    profiles[0] = E.log_weight
    caps[0] = objective.empty
    for b in range(low):
        lo, hi = 1 << b, 1 << (b + 1)
        profiles[lo:hi] = profiles[:lo] + E.log_pair[b]
        caps[lo:hi] = caps[:lo] + objective.factor_cap[b]

    # masks are walked in chunks of 2**low; the high bits shift every row of the table
    best_mask, best = -1, -math.inf
    for high in range(1 << (n - low)):
        extra = [low + b for b in range(n - low) if high >> b & 1]
        chunk_caps = caps + float(objective.factor_cap[extra].sum()) if extra else caps
        if float(chunk_caps.max()) <= best:
            continue
        chunk = profiles + E.log_pair[extra].sum(axis=0) if extra else profiles
        feasible = np.flatnonzero(chunk.max(axis=1) <= log_eps)
        order = feasible[np.argsort(-chunk_caps[feasible], kind="stable")]
        for m in order:
            if chunk_caps[m] <= best:
                break
            mask = high << low | int(m)
            value = objective.exact([b for b in range(n) if mask >> b & 1])
            if value > best:
                best_mask, best = mask, value
    return [b for b in range(n) if best_mask >> b & 1], best


def _polish(E: CandidateSet, idx: list[int], log_eps: float, circle: tuple[np.ndarray, np.ndarray]) -> list[int]:
    log_q, table = circle

    def feasible(members: list[int]) -> bool:
        return float(E.profile(members).max()) <= log_eps

    # dropping a zero can only raise the objective
    pos = 0
    while pos < len(idx):
        trial = idx[:pos] + idx[pos + 1:]
        if feasible(trial):
            idx = trial
        else:
            pos += 1

    for _ in range(MAX_SWAP_PASSES):
        improved = False
        for pos in range(len(idx)):
            others = idx[:pos] + idx[pos + 1:]
            base = log_q + table[others].sum(axis=0)
            current = float((base + table[idx[pos]]).max())
            proxy = (base[None, :] + table).max(axis=1)
            ok = (E.profile(others)[None, :] + E.log_pair).max(axis=1) <= log_eps
            proxy[~ok] = -np.inf
            proxy[others] = -np.inf
            best = int(np.argmax(proxy))
            if proxy[best] > current + FEASIBILITY_SLACK:
                idx[pos] = best
                improved = True
        if not improved:
            break
    return idx


def g_estimate(
    E: CandidateSet,
    eps: float,
    R: float,
    budget: SearchBudget | None = None,
    records: Sequence[FeketeRecord] = (),
) -> GEstimate:
    """Best feasible tuple found for g(E, eps, R); R = 0 evaluates at the origin only."""
    budget = budget or SearchBudget()
    eps = float(eps)
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    R = float(R)
    if not 0.0 <= R < 1.0:
        raise DomainError(f"R must lie in [0, 1), got {R}")

    log_eps = math.log(eps)
    objective = _Objective(E, R)

    if float(E.log_weight.max()) <= log_eps:
        return _estimate(E, eps, R, [], objective.empty, exact=True)

    if len(E) < 63 and (1 << len(E)) <= budget.exhaustive_limit:
        idx, value = _exhaustive(E, log_eps, objective)
        return _estimate(E, eps, R, idx, value, exact=True)

    candidates: list[list[int]] = []
    order = greedy_order(E, len(E))
    profile = E.log_weight.copy()
    for n, j in enumerate(order, start=1):
        profile = profile + E.log_pair[j]
        if float(profile.max()) <= log_eps:
            candidates.append(order[:n])
            break
    for rec in records:
        if float(E.profile(rec.indices).max()) <= log_eps:
            candidates.append(list(rec.indices))

    rng = np.random.default_rng(budget.seed)
    circle = objective.circle
    for _ in range(budget.random_trials):
        perm = rng.permutation(len(E))
        profile = E.log_weight.copy()
        chosen: list[int] = []
        for j in perm:
            chosen.append(int(j))
            profile = profile + E.log_pair[j]
            if float(profile.max()) <= log_eps:
                break
        candidates.append(_polish(E, chosen, log_eps, circle))

    best_idx: list[int] = list(range(len(E)))
    best = objective.exact(best_idx)
    for idx in candidates:
        value = objective.exact(idx)
        if value > best:
            best_idx, best = idx, value
    logger.debug("g search on %s: %d candidate tuples, best log g %.6g", E.label, len(candidates), best)
    return _estimate(E, eps, R, best_idx, best, exact=False)


def stability_constant(p: HardyExponent, R: float) -> float:
    """K(p, R) = 8 / (R (1 - R^2)).

    Built from |c_{p,k}| <= 4/(1-R^2) |B_k(z)|/|B_k(z_k)|, the factor 1/R of the
    deleted-product bound and a factor 2 absorbing the point-evaluation tail
    (1-R^2)^(-1/p) <= 2/(1-R^2). The same K serves every p.
    """
    del p
    return 8.0 / (R * (1.0 - R * R))


def _unweighted_log_deleted(pts: np.ndarray) -> np.ndarray:
    pair = np.asarray(log_pseudo_distance(pts[:, None], pts[None, :]), dtype=float)
    np.fill_diagonal(pair, 0.0)
    return pair.sum(axis=1)


def direct_upper_bound(zeros: ZeroTuple, eps: float, R: float, p: HardyExponent) -> float:
    """log of (4/(1-R^2)) eps mu_0(Z) max_k sup|B(Z_{n,k})| + (1-R^2)^(-1/p) sup|B(Z)|.

    Valid for any distinct nodes Z from E: it bounds |f(z)|, |z| <= R, for every f with
    ||f||_p <= 1 and |f| <= eps on E.
    """
    pts = as_points(zeros)
    tail = -p.inv_p * math.log(1.0 - R * R) + sup_on_circle(WeightFunction.unit(), pts, R).log_value
    if pts.size == 0:
        return tail
    log_mu0 = float(logsumexp(-_unweighted_log_deleted(pts)))
    deleted_sup = max(
        sup_on_circle(WeightFunction.unit(), np.delete(pts, k), R).log_value for k in range(pts.size)
    )
    head = math.log(4.0 / (1.0 - R * R)) + math.log(eps) + log_mu0 + deleted_sup
    return float(np.logaddexp(head, tail))


def origin_upper_bound(zeros: ZeroTuple, eps: float, p: HardyExponent) -> float:
    """log of eps * sum|c_{p,k}(0)| + |B(Z, 0)|, exact at the origin."""
    pts = as_points(zeros)
    if pts.size == 0:
        return 0.0
    coefficients = interp_coefficients(InterpScheme(tuple(pts), p), 0.0)
    head = math.log(eps) + math.log(float(np.sum(np.abs(coefficients))))
    return float(np.logaddexp(head, blaschke_log_abs(pts, 0.0)))


@dataclass(frozen=True)
class StabilitySandwich:
    p: HardyExponent
    eps: float
    R: float
    weight: WeightFunction
    lower_log: float
    upper_log: float | None
    upper_certified_log: float
    alpha: float | None
    K: float | None
    phi_eps: float | None
    n0: int | None = None
    witness_lower: tuple[complex, ...] = ()
    witness_upper: tuple[complex, ...] = ()
    lower_exact: bool = False
    method: str = "heuristic"
    seed: int = 0

    def holds(self, slack: float = 1e-9) -> bool:
        return self.lower_log <= self.upper_certified_log + slack and (
            self.upper_log is None or self.lower_log <= self.upper_log + slack
        )


def _phi_map(E: CandidateSet, budget: SearchBudget, records: Sequence[FeketeRecord] | None) -> tuple[PhiMap | None, list[FeketeRecord]]:
    if records is None:
        n_max = min(budget.scan_nmax, len(E) - 1)
        if n_max < 1:
            return None, []
        records = sequence_scan(E, n_max, ScanMode.HEURISTIC)
    records = list(records)
    return PhiMap(envelope_h(records)), records


def sandwich(
    E: CandidateSet,
    eps: float,
    R: float,
    p: HardyExponent,
    budget: SearchBudget | None = None,
    records: Sequence[FeketeRecord] | None = None,
) -> StabilitySandwich:
    budget = budget or SearchBudget()
    alpha = alpha_star(R)
    phi_map, records = _phi_map(E, budget, records)
    if phi_map is None:
        raise DomainError(f"{E.label} has too few points for a decay envelope")
    phi = solve_phi(phi_map, eps)

    lower = g_estimate(E, eps, R, budget, records)
    if not lower.certified_feasible:
        raise InvariantViolation(f"lower witness for eps={eps:g} failed its feasibility check")
    at_phi = g_estimate(E, phi.phi, R, budget, records)
    log_q0 = float(E.weight.log_abs(0.0))
    K = stability_constant(p, R)
    upper_log = math.log(K) + alpha * (max(at_phi.log_g, lower.log_g) - log_q0)

    log_phi = math.log(phi.phi)
    n0 = next((rec for rec in sorted(records, key=lambda r: r.n) if rec.logM <= log_phi), None)
    tuples: list[tuple[complex, ...]] = [(), lower.witness, at_phi.witness]
    if n0 is not None:
        logger.debug("smallest n with M_n <= phi(eps): %d", n0.n)
        tuples.append(n0.points)
    tuples += [rec.points for rec in records]
    bounds = [direct_upper_bound(t, eps, R, p) for t in dict.fromkeys(tuples)]
    k = int(np.argmin(bounds))
    certified = float(bounds[k])

    return StabilitySandwich(
        p=p,
        eps=eps,
        R=R,
        weight=E.weight,
        lower_log=lower.log_g,
        upper_log=upper_log,
        upper_certified_log=certified,
        alpha=alpha,
        K=K,
        phi_eps=phi.phi,
        n0=None if n0 is None else n0.n,
        witness_lower=lower.witness,
        witness_upper=list(dict.fromkeys(tuples))[k],
        lower_exact=lower.exact and at_phi.exact,
        method=lower.method,
        seed=budget.seed,
    )


def one_point(
    E: CandidateSet,
    eps: float,
    p: HardyExponent,
    budget: SearchBudget | None = None,
    records: Sequence[FeketeRecord] | None = None,
) -> StabilitySandwich:
    """Sandwich for recovery at the single point 0."""
    budget = budget or SearchBudget()
    eps = float(eps)
    radii = np.abs(E.array)
    if float(radii.min()) < ORIGIN_TOLERANCE:
        value = math.log(min(eps, 1.0))
        return StabilitySandwich(
            p=p, eps=eps, R=0.0, weight=E.weight, lower_log=value, upper_log=value,
            upper_certified_log=value, alpha=None, K=None, phi_eps=None,
            lower_exact=True, method="origin", seed=budget.seed,
        )

    r_min = float(radii.min())
    phi_map, records = _phi_map(E, budget, records)
    lower = g_estimate(E, eps, 0.0, budget, records)
    log_q0 = float(E.weight.log_abs(0.0))

    upper_log = alpha = K = phi_eps = None
    if phi_map is not None and phi_map.supports(eps):
        phi = solve_phi(phi_map, eps)
        at_phi = g_estimate(E, phi.phi, 0.0, budget, records)
        alpha = alpha_star(r_min)
        K = stability_constant(p, r_min)
        phi_eps = phi.phi
        upper_log = math.log(K) + alpha * (max(at_phi.log_g, lower.log_g) - log_q0)

    tuples = list(dict.fromkeys([(), lower.witness, *(rec.points for rec in records)]))
    bounds = [origin_upper_bound(t, eps, p) for t in tuples]
    k = int(np.argmin(bounds))
    return StabilitySandwich(
        p=p,
        eps=eps,
        R=0.0,
        weight=E.weight,
        lower_log=lower.log_g,
        upper_log=upper_log,
        upper_certified_log=float(bounds[k]),
        alpha=alpha,
        K=K,
        phi_eps=phi_eps,
        witness_lower=lower.witness,
        witness_upper=tuples[k],
        lower_exact=lower.exact,
        method=lower.method,
        seed=budget.seed,
    )


@dataclass(frozen=True)
class PowerDecayFit:
    sigma: float
    log_C: float
    exponent: float
    C2: float
    points: int
    superpolynomial: bool
    phi_bound: float | None = None
    stolz_exponent: float | None = None


def corollary_power_decay(
    records: Sequence[FeketeRecord], eps: float | None = None, R: float | None = None
) -> PowerDecayFit:
    """Fit M_n ~ C n^-sigma on the tail half of a scan; diagnostic only."""
    ordered = [r for r in sorted(records, key=lambda r: r.n) if math.isfinite(r.logM)]
    tail = ordered[len(ordered) // 2:]
    if len(tail) < 4:
        raise DomainError(f"power-law fit needs at least 4 tail points, got {len(tail)}")
    log_n = np.log([r.n for r in tail])
    log_m = np.array([r.logM for r in tail])
    slope, intercept = np.polyfit(log_n, log_m, 1)
    sigma = float(-slope)
    exponent = sigma / (1.0 + sigma) if sigma > 0 else 0.0
    C = math.exp(intercept)
    C2 = C ** (1.0 / (1.0 + sigma)) * 2.0 ** exponent if sigma > -1.0 else math.inf
    last_slope = (log_m[-1] - log_m[-2]) / (log_n[-1] - log_n[-2])
    fit = PowerDecayFit(
        sigma=sigma,
        log_C=float(intercept),
        exponent=exponent,
        C2=C2,
        points=len(tail),
        superpolynomial=bool(last_slope < 1.25 * slope) if slope < 0 else False,
        phi_bound=C2 * eps ** exponent if eps is not None else None,
        stolz_exponent=alpha_star(R) * sigma if R is not None else None,
    )
    if fit.superpolynomial:
        logger.info("M_n decays faster than n^-%.3g; sigma is a lower estimate", sigma)
    return fit


@dataclass(frozen=True)
class EtaBlock:
    k: int
    start: int
    length: int
    mass: float
    log_eta: np.ndarray = field(repr=False, compare=False)
    max_log_ratio: float | None = None

    @property
    def min_log_eta(self) -> float:
        return float(self.log_eta.min())

    @property
    def max_log_eta(self) -> float:
        return float(self.log_eta.max())


@dataclass(frozen=True)
class EtaSequence:
    blocks: tuple[EtaBlock, ...]

    @property
    def starts(self) -> list[int]:
        return [b.start for b in self.blocks]

    def etas(self) -> np.ndarray:
        return np.exp(np.concatenate([b.log_eta for b in self.blocks]))


def _block_bounds(masses: np.ndarray, k_max: int) -> list[tuple[int, int, float]]:
    """Greedy blocks [a, b) with certified mass >= k; a, b are 0-based."""
    out: list[tuple[int, int, float]] = []
    a = 0
    for k in range(1, k_max + 1):
        if a >= masses.size:
            raise InsufficientMassError(k - 1, k_max)
        running = np.cumsum(masses[a:])
        b = a + int(np.searchsorted(running, k, side="left")) + 1
        b = min(b, masses.size)
        mass = math.fsum(masses[a:b])
        while mass < k and b < masses.size:
            b += 1
            mass = math.fsum(masses[a:b])
        if mass < k:
            raise InsufficientMassError(k - 1, k_max)
        while b - a > 1 and math.fsum(masses[a:b - 1]) >= k:
            b -= 1
            mass = math.fsum(masses[a:b])
        out.append((a, b, mass))
        a = b
    return out


def _generic_log_deleted(block: np.ndarray, chunk: int = 2048) -> np.ndarray:
    out = np.empty(block.size)
    for lo in range(0, block.size, chunk):
        rows = block[lo:lo + chunk]
        logs = np.asarray(log_pseudo_distance(rows[:, None], block[None, :]), dtype=float)
        logs[np.arange(rows.size), np.arange(lo, lo + rows.size)] = 0.0
        out[lo:lo + rows.size] = logs.sum(axis=1)
    return out


def _harmonic_log_deleted(first: int, last: int) -> np.ndarray:
    # on the ray d(z_i, z_j) = |i - j| / (i + j + 1)
    j = np.arange(first, last + 1, dtype=np.float64)
    numerator = gammaln(j - first + 1.0) + gammaln(last - j + 1.0)
    denominator = gammaln(last + j + 2.0) - gammaln(first + j + 1.0) - np.log(2.0 * j + 1.0)
    return numerator - denominator


def eta_sequence(
    seq: Sequence[complex] | np.ndarray | HarmonicRay,
    k_max: int,
    f: Callable[[np.ndarray], np.ndarray] | None = None,
) -> EtaSequence:
    """Split the sequence into blocks of mass >= k and set eta_j = |B(block_k minus z_j, z_j)| / m_k."""
    if k_max < 1:
        raise DomainError("k_max must be positive")
    ray = seq if isinstance(seq, HarmonicRay) else None
    if ray is not None:
        masses = ray.masses()
    else:
        pts = as_points(seq)
        for i, z in enumerate(pts):
            check_disk_point(z, f"seq[{i}]")
        masses = 1.0 - np.abs(pts)

    blocks: list[EtaBlock] = []
    for k, (a, b, mass) in enumerate(_block_bounds(masses, k_max), start=1):
        if ray is not None:
            block_points = ray.points(a + 1, b)
            log_deleted = _harmonic_log_deleted(a + 1, b)
        else:
            block_points = pts[a:b]
            log_deleted = _generic_log_deleted(block_points)
        log_eta = log_deleted - math.log(b - a)
        max_ratio = None
        if f is not None:
            with np.errstate(divide="ignore"):
                ratios = np.log(np.abs(f(block_points))) - log_eta
            max_ratio = float(ratios.max())
        blocks.append(EtaBlock(k=k, start=a + 1, length=b - a, mass=mass, log_eta=log_eta, max_log_ratio=max_ratio))
        logger.debug("eta block %d: start %d, length %d, mass %.6f", k, a + 1, b - a, mass)
    return EtaSequence(blocks=tuple(blocks))


@dataclass(frozen=True)
class ArcSet:
    """Finite union of closed arcs [start, start + length] on the unit circle."""

    arcs: tuple[tuple[float, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "ArcSet":
        spans: list[tuple[float, float]] = []
        for start, end in pairs:
            length = float(end) - float(start)
            if not length > 0.0:
                raise DomainError(f"arc ({start}, {end}) has non-positive length")
            if length >= TWO_PI:
                return cls(arcs=((0.0, TWO_PI),))
            s = float(start) % TWO_PI
            spans.append((s, s + length))
        if not spans:
            raise DomainError("arc set is empty")

        spans.sort()
        merged: list[list[float]] = []
        for s, e in spans:
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        # arcs running past 2pi may swallow arcs near 0
        while len(merged) > 1 and merged[-1][1] - TWO_PI >= merged[0][0]:
            first = merged.pop(0)
            merged[-1][1] = max(merged[-1][1], first[1] + TWO_PI)
        if any(e - s >= TWO_PI for s, e in merged):
            return cls(arcs=((0.0, TWO_PI),))
        return cls(arcs=tuple((s, e) for s, e in merged))

    @property
    def measure(self) -> float:
        return math.fsum(e - s for s, e in self.arcs)

    @property
    def full(self) -> bool:
        return self.measure >= TWO_PI


def _split(start: float, end: float) -> list[tuple[float, float]]:
    pieces = max(1, math.ceil((end - start) / (math.pi / 2.0)))
    edges = np.linspace(start, end, pieces + 1)
    return list(zip(edges[:-1], edges[1:]))


def harmonic_omega(arcs: ArcSet, z: complex | np.ndarray) -> float | np.ndarray:
    """Poisson integral of the arc indicator: (subtended angle)/pi - length/(2 pi) per arc."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) >= 1.0):
        raise DomainError("harmonic measure is evaluated strictly inside the disk")
    if arcs.full:
        out = np.ones(z_arr.shape)
    else:
        out = np.zeros(z_arr.shape)
        for start, end in arcs.arcs:
            for t1, t2 in _split(start, end):
                w1 = complex(math.cos(t1), math.sin(t1))
                w2 = complex(math.cos(t2), math.sin(t2))
                angle = np.mod(np.angle((w2 - z_arr) / (w1 - z_arr)), TWO_PI)
                out = out + angle / math.pi - (t2 - t1) / TWO_PI
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HarmonicBound:
    arcs: ArcSet
    eps: float
    R: float
    p: HardyExponent
    omega_min: float
    omega_min_theta: float
    lower: float
    upper: float


def positive_measure_bound(arcs: ArcSet, eps: float, R: float, p: HardyExponent) -> HarmonicBound:
    """eps <= C_p <= 2^(1/p) (1-R^2)^(-1/p) eps^(min omega over |z| <= R)."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 <= R < 1.0:
        raise DomainError(f"R must lie in [0, 1), got {R}")
    if R == 0.0:
        omega_min, theta = float(harmonic_omega(arcs, 0.0)), 0.0
    else:
        n_grid = max(1024, int(math.ceil(64.0 / (1.0 - R))))
        low = maximize_on_circle(lambda z: -np.asarray(harmonic_omega(arcs, z)), R, n_grid)
        omega_min, theta = -low.log_value, low.theta
    log_upper = p.inv_p * math.log(2.0) - p.inv_p * math.log(1.0 - R * R) + omega_min * math.log(eps)
    return HarmonicBound(
        arcs=arcs,
        eps=eps,
        R=R,
        p=p,
        omega_min=omega_min,
        omega_min_theta=theta,
        lower=eps,
        upper=math.exp(log_upper),
    )

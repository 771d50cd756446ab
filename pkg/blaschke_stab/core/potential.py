"""Discrete weighted potential theory on a finite candidate set E.

V(Z) = prod |q(z_j)| * prod_{j<k} d(z_j, z_k), mu(Z) = sum_j 1/|B_q(Z_{n,j}, z_j)|,
M(Z) = max_{z in E} |B_q(Z, z)|, the extremal values V_n, mu_n, M_n over E^n, the
non-increasing envelope h of M_n and the inverse map phi(eps).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import itertools
import logging
import math
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from blaschke_stab.core.disk_core import (
    WeightFunction,
    ZeroTuple,
    as_points,
    check_disk_point,
    log_pseudo_distance,
    weighted_blaschke_log_abs,
)
from blaschke_stab.core.errors import BudgetExceededError, DomainError, EnvelopeSupportError, InvariantViolation

logger = logging.getLogger(__name__)

EXCHANGE_GAIN = 1e-12
MAXIMIZER_RTOL = 1e-10
INVARIANT_SLACK = 1e-9
PAIR_MATRIX_LIMIT = 8000
BRUTE_CHUNK = 1 << 16


@dataclass(frozen=True)
class CandidateSet:
    points: tuple[complex, ...]
    weight: WeightFunction
    label: str = "E"

    def __post_init__(self) -> None:
        pts = tuple(complex(z) for z in self.points)
        if not pts:
            raise DomainError("candidate set is empty")
        for i, z in enumerate(pts):
            check_disk_point(z, f"point[{i}]")
        if len(set(pts)) != len(pts):
            raise DomainError(f"candidate set {self.label!r} contains duplicate points")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        return as_points(self.points)

    @cached_property
    def log_weight(self) -> np.ndarray:
        return np.asarray(self.weight.log_abs(self.array), dtype=float).reshape(-1)

    @cached_property
    def log_pair(self) -> np.ndarray:
        """log d(z_i, z_j) for all pairs; the diagonal is -inf."""
        if len(self) > PAIR_MATRIX_LIMIT:
            raise BudgetExceededError(
                f"{len(self)} candidates exceed the pair-matrix limit {PAIR_MATRIX_LIMIT}"
            )
        z = self.array
        out = np.asarray(log_pseudo_distance(z[:, None], z[None, :]), dtype=float)
        np.fill_diagonal(out, -np.inf)
        return out

    def profile(self, indices: Sequence[int]) -> np.ndarray:
        """log|B_q(Z, z)| at every z in E for the tuple Z = E[indices]."""
        idx = np.asarray(indices, dtype=np.intp)
        return self.log_weight + self.log_pair[idx].sum(axis=0)


class FeketeMethod(str, Enum):
    GREEDY = "greedy"
    EXCHANGE = "exchange"
    BRUTE = "brute"


class ScanMode(str, Enum):
    HEURISTIC = "heuristic"
    EXACT = "exact"


@dataclass(frozen=True)
class FeketeRecord:
    n: int
    indices: tuple[int, ...]
    points: tuple[complex, ...]
    logV: float
    mu: float
    logM: float
    witness: complex
    method: FeketeMethod

    @property
    def exact(self) -> bool:
        return self.method is FeketeMethod.BRUTE


def v_of(E: CandidateSet, zeros: ZeroTuple) -> float:
    pts = as_points(zeros)
    if pts.size == 0:
        return 0.0
    log_q = float(np.sum(E.weight.log_abs(pts)))
    pair = np.asarray(log_pseudo_distance(pts[:, None], pts[None, :]))
    return log_q + float(pair[np.triu_indices(pts.size, 1)].sum())


def _log_deleted(E: CandidateSet, pts: np.ndarray) -> np.ndarray:
    # log|B_q(Z_{n,j}, z_j)| for every j
    pair = np.asarray(log_pseudo_distance(pts[:, None], pts[None, :]), dtype=float)
    np.fill_diagonal(pair, 0.0)
    return np.asarray(E.weight.log_abs(pts), dtype=float).reshape(-1) + pair.sum(axis=1)


def _mu_from_log_deleted(log_deleted: np.ndarray) -> float:
    if log_deleted.size == 0:
        return 0.0
    if np.any(np.isneginf(log_deleted)):
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.exp(logsumexp(-log_deleted)))


def mu_of(E: CandidateSet, zeros: ZeroTuple) -> float:
    return _mu_from_log_deleted(_log_deleted(E, as_points(zeros)))


def m_of(E: CandidateSet, zeros: ZeroTuple) -> tuple[float, complex]:
    values = np.asarray(weighted_blaschke_log_abs(E.weight, as_points(zeros), E.array)).reshape(-1)
    k = int(np.argmax(values))
    return float(values[k]), E.points[k]


def make_record(E: CandidateSet, indices: Sequence[int], method: FeketeMethod) -> FeketeRecord:
    idx = tuple(int(i) for i in indices)
    pts = E.array[list(idx)] if idx else np.empty(0, dtype=complex)
    log_deleted = _log_deleted(E, pts)
    pair = E.log_pair[np.ix_(idx, idx)] if idx else np.empty((0, 0))
    logV = float(E.log_weight[list(idx)].sum()) + float(pair[np.triu_indices(len(idx), 1)].sum())
    profile = E.profile(idx)
    k = int(np.argmax(profile))
    return FeketeRecord(
        n=len(idx),
        indices=idx,
        points=tuple(E.points[i] for i in idx),
        logV=logV,
        mu=_mu_from_log_deleted(log_deleted),
        logM=float(profile[k]),
        witness=E.points[k],
        method=method,
    )


def _check_count(E: CandidateSet, n: int) -> int:
    n = int(n)
    if not 1 <= n <= len(E):
        raise DomainError(f"tuple size n={n} must lie in [1, {len(E)}]")
    return n


def greedy_order(E: CandidateSet, n: int) -> list[int]:
    """Leja-type order: each new point maximises |B_q(previous points, .)| over E."""
    n = _check_count(E, n)
    profile = E.log_weight.copy()
    chosen: list[int] = []
    for _ in range(n):
        j = int(np.argmax(profile))
        chosen.append(j)
        profile = profile + E.log_pair[j]
    return chosen


def fekete_greedy(E: CandidateSet, n: int) -> FeketeRecord:
    return make_record(E, greedy_order(E, n), FeketeMethod.GREEDY)


def _exchange_indices(E: CandidateSet, indices: Sequence[int]) -> list[int]:
    idx = [int(i) for i in indices]
    sweeps = 0
    improved = True
    while improved:
        improved = False
        sweeps += 1
        for pos in range(len(idx)):
            others = idx[:pos] + idx[pos + 1:]
            profile = E.profile(others)
            best = int(np.argmax(profile))
            if profile[best] > profile[idx[pos]] + EXCHANGE_GAIN:
                idx[pos] = best
                improved = True
                break
    logger.debug("exchange on %s converged after %d sweeps", E.label, sweeps)
    return idx


def fekete_exchange(E: CandidateSet, start: FeketeRecord) -> FeketeRecord:
    return make_record(E, _exchange_indices(E, start.indices), FeketeMethod.EXCHANGE)


def fekete_brute(E: CandidateSet, n: int, max_enumeration: int = 10_000_000) -> FeketeRecord:
    """Exact V_n over all n-subsets; mu_n and M_n are minimised over the maximisers."""
    n = _check_count(E, n)
    total = math.comb(len(E), n)
    if total > max_enumeration:
        raise BudgetExceededError(
            f"C({len(E)}, {n}) = {total} subsets exceed the enumeration limit {max_enumeration}"
        )

    pairs = list(itertools.combinations(range(n), 2))
    combos = itertools.combinations(range(len(E)), n)
    best = -math.inf
    kept: list[tuple[np.ndarray, np.ndarray]] = []
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, BRUTE_CHUNK)), dtype=np.intp
        )
        if flat.size == 0:
            break
        chunk = flat.reshape(-1, n)
        logV = E.log_weight[chunk].sum(axis=1)
        for a, b in pairs:
            logV = logV + E.log_pair[chunk[:, a], chunk[:, b]]
        best = max(best, float(logV.max()))
        keep = logV >= best - MAXIMIZER_RTOL * max(1.0, abs(best))
        kept.append((chunk[keep], logV[keep]))

    threshold = best - MAXIMIZER_RTOL * max(1.0, abs(best))
    maximizers = [row for rows, values in kept for row, v in zip(rows, values) if v >= threshold]
    records = [make_record(E, row, FeketeMethod.BRUTE) for row in maximizers]
    chosen = min(records, key=lambda r: r.logM)
    return FeketeRecord(
        n=n,
        indices=chosen.indices,
        points=chosen.points,
        logV=max(r.logV for r in records),
        mu=min(r.mu for r in records),
        logM=chosen.logM,
        witness=chosen.witness,
        method=FeketeMethod.BRUTE,
    )


def sequence_scan(
    E: CandidateSet,
    n_max: int,
    mode: ScanMode = ScanMode.HEURISTIC,
    brute_limit: int = 100_000,
    max_enumeration: int = 10_000_000,
    check: bool = True,
) -> list[FeketeRecord]:
    """Records for n = 1..n_max; exact mode raises on broken inequalities unless check is off."""
    n_max = _check_count(E, n_max)
    order = greedy_order(E, n_max)
    records: list[FeketeRecord] = []
    for n in range(1, n_max + 1):
        if mode is ScanMode.EXACT and math.comb(len(E), n) <= min(brute_limit, max_enumeration):
            records.append(fekete_brute(E, n, max_enumeration))
            continue
        if mode is ScanMode.EXACT:
            logger.info(
                "scan %s: C(%d, %d) exceeds brute limit %d, using greedy+exchange",
                E.label, len(E), n, brute_limit,
            )
        records.append(make_record(E, _exchange_indices(E, order[:n]), FeketeMethod.EXCHANGE))

    if mode is ScanMode.EXACT and check:
        violations = check_scan_invariants(records)
        if violations:
            raise InvariantViolation(f"scan of {E.label} broke {len(violations)} inequalities", violations)
    return records


def check_scan_invariants(
    records: Sequence[FeketeRecord], compact_radius: float | None = None
) -> list[str]:
    """Assertion-grade inequalities between brute-certified records; returns the failures."""
    by_n = {r.n: r for r in records if r.exact}
    violations: list[str] = []
    for n, rec in sorted(by_n.items()):
        if rec.logM > rec.logV / n + INVARIANT_SLACK:
            violations.append(f"n={n}: log M_n={rec.logM:.12g} > log V_n / n={rec.logV / n:.12g}")
        if compact_radius is not None:
            r = compact_radius
            cap = (n - 1) / 2.0 * math.log(2.0 * r / (1.0 + r * r))
            if rec.logV / n > cap + INVARIANT_SLACK:
                violations.append(f"n={n}: log V_n / n={rec.logV / n:.12g} above compact cap {cap:.12g}")
        nxt = by_n.get(n + 1)
        if nxt is None:
            continue
        product = nxt.mu * math.exp(rec.logM) if math.isfinite(rec.logM) else 0.0
        if product > n + 1 + INVARIANT_SLACK:
            violations.append(f"n={n}: mu_(n+1) * M_n = {product:.12g} > {n + 1}")
        if nxt.logV < rec.logV + rec.logM - INVARIANT_SLACK:
            violations.append(f"n={n}: log V_(n+1)={nxt.logV:.12g} < log V_n + log M_n")
    return violations


@dataclass(frozen=True)
class DecayEnvelope:
    """h(n) = max_{k >= n} M_k on integer knots 1..N, linear in between."""

    values: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.values)

    def __call__(self, x: float) -> float:
        if not 1.0 <= x <= self.size:
            raise EnvelopeSupportError(f"x={x} outside the envelope support [1, {self.size}]")
        return float(np.interp(x, np.arange(1, self.size + 1), self.values))


def envelope_h(records: Sequence[FeketeRecord]) -> DecayEnvelope:
    ordered = sorted(records, key=lambda r: r.n)
    if not ordered:
        raise DomainError("no records to build an envelope from")
    if [r.n for r in ordered] != list(range(1, len(ordered) + 1)):
        raise DomainError("records must cover n = 1..N contiguously")
    logM = np.array([r.logM for r in ordered])
    if np.any(np.isneginf(logM)):
        first = int(np.flatnonzero(np.isneginf(logM))[0]) + 1
        raise DomainError(f"M_{first} = 0: the tuple exhausts E, stop the scan earlier")
    suffix = np.maximum.accumulate(logM[::-1])[::-1]
    return DecayEnvelope(values=tuple(float(v) for v in np.exp(suffix)))


@dataclass(frozen=True)
class PhiSolution:
    eps: float
    x: float
    phi: float


@dataclass(frozen=True)
class PhiMap:
    envelope: DecayEnvelope

    @property
    def eps0(self) -> float:
        return self.envelope.values[0] / 2.0

    @property
    def eps_min(self) -> float:
        n = self.envelope.size
        return self.envelope.values[-1] / (n + 1)

    def supports(self, eps: float) -> bool:
        return self.eps_min <= eps < self.eps0


def solve_phi(phi_map: PhiMap, eps: float) -> PhiSolution:
    """Solve eps = h(x)/(x+1) on the envelope segment that brackets eps."""
    eps = float(eps)
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    if eps >= phi_map.eps0:
        raise EnvelopeSupportError(f"eps={eps:.6g} is not below eps0={phi_map.eps0:.6g}")
    if eps < phi_map.eps_min:
        raise EnvelopeSupportError(
            f"eps={eps:.6g} is below the computed support {phi_map.eps_min:.6g}; extend the scan"
        )
    h = phi_map.envelope.values
    for n in range(1, len(h)):
        lo, hi = h[n] / (n + 2), h[n - 1] / (n + 1)
        if lo <= eps <= hi:
            slope = h[n] - h[n - 1]
            x = (h[n - 1] - slope * n - eps) / (eps - slope)
            x = min(max(x, float(n)), float(n + 1))
            return PhiSolution(eps=eps, x=x, phi=phi_map.envelope(x))
    raise EnvelopeSupportError(f"no envelope segment brackets eps={eps:.6g}")


def phi_of_epsilon(phi_map: PhiMap, eps: float) -> float:
    return solve_phi(phi_map, eps).phi

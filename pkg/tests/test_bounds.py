import math

import numpy as np
import pytest

from blaschke_stab.core import bounds
from blaschke_stab.core.bounds import (
    ArcSet,
    SearchBudget,
    corollary_power_decay,
    direct_upper_bound,
    eta_sequence,
    g_estimate,
    harmonic_omega,
    one_point,
    origin_upper_bound,
    positive_measure_bound,
    sandwich,
    stability_constant,
)
from blaschke_stab.core.disk_core import (
    WeightFunction,
    alpha_star,
    blaschke_log_abs,
    sup_on_circle,
    weighted_blaschke_log_abs,
)
from blaschke_stab.core.errors import DomainError, EnvelopeSupportError, InsufficientMassError
from blaschke_stab.core.interp import (
    HardyExponent,
    InterpScheme,
    coefficient_bound_check,
    corpus_function,
    interp_coefficients,
    reconstruct,
)
from blaschke_stab.core.potential import (
    CandidateSet,
    FeketeMethod,
    FeketeRecord,
    PhiMap,
    ScanMode,
    envelope_h,
    sequence_scan,
)
from blaschke_stab.core.scenarios import BoundaryPoint, HarmonicRay, StolzSpec, gen_compact_grid, gen_stolz

P2 = HardyExponent.parse(2)
FAST = SearchBudget(random_trials=4, scan_nmax=6, seed=7)


def _unit(points, label="E"):
    return CandidateSet(points=tuple(points), weight=WeightFunction.unit(), label=label)


@pytest.fixture
def tiny():
    return _unit((0j, 0.5 + 0j, -0.5 + 0j), "tiny")


def test_g_estimate_single_candidate():
    est = g_estimate(_unit([0j]), 0.5, 0.7)
    assert est.log_g == pytest.approx(math.log(0.7), abs=1e-12)
    assert est.witness == (0j,)
    assert est.exact and est.certified_feasible


def test_g_estimate_vacuous_constraint(tiny):
    est = g_estimate(tiny, 1.0, 0.5)
    assert est.witness == ()
    assert est.log_g == 0.0
    assert est.exact


def test_g_estimate_exhaustive_on_tiny(tiny):
    est = g_estimate(tiny, 0.3, 0.6)
    assert est.exact and est.method == "exhaustive"
    assert sorted(est.witness, key=lambda z: z.real) == [-0.5, 0.5]
    assert est.log_g == pytest.approx(math.log(0.61 / 1.09), abs=1e-10)
    assert est.log_sup_on_E <= math.log(0.3)


def test_g_estimate_validates_inputs(tiny):
    with pytest.raises(DomainError):
        g_estimate(tiny, 0.0, 0.5)
    with pytest.raises(DomainError):
        g_estimate(tiny, 0.1, 1.0)


def test_g_is_monotone_in_eps_under_exhaustive_search():
    rng = np.random.default_rng(8)
    pts = 0.9 * np.sqrt(rng.random(10)) * np.exp(2j * np.pi * rng.random(10))
    E = CandidateSet(points=tuple(pts), weight=WeightFunction.boundary_poly([0.0]))
    values = []
    for eps in np.geomspace(1e-4, 0.5, 12):
        est = g_estimate(E, eps, 0.5)
        assert est.exact and est.certified_feasible
        values.append(est.log_g)
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_heuristic_g_estimate_is_certified_and_deterministic():
    E = gen_compact_grid(0.25, 0.05)
    budget = SearchBudget(exhaustive_limit=1000, random_trials=4, seed=11)
    first = g_estimate(E, 0.05, 0.5, budget)
    assert not first.exact and first.method == "heuristic"
    assert first.certified_feasible
    assert first.log_sup_on_E <= math.log(0.05) + 1e-12
    again = g_estimate(E, 0.05, 0.5, budget)
    assert again.witness == first.witness and again.log_g == first.log_g


def test_chunked_exhaustive_search_matches_a_single_table(monkeypatch):
    rng = np.random.default_rng(21)
    pts = 0.9 * np.sqrt(rng.random(9)) * np.exp(2j * np.pi * rng.random(9))
    E = CandidateSet(points=tuple(pts), weight=WeightFunction.boundary_poly([0.0]))
    whole = [g_estimate(E, eps, 0.5) for eps in (1e-3, 1e-2, 0.1)]
    monkeypatch.setattr(bounds, "SUBSET_CHUNK_BITS", 3)
    for eps, expected in zip((1e-3, 1e-2, 0.1), whole):
        est = g_estimate(E, eps, 0.5)
        assert est.exact and est.certified_feasible
        assert est.log_g == pytest.approx(expected.log_g, abs=1e-12)


def test_stability_constant():
    assert stability_constant(P2, 0.5) == pytest.approx(8.0 / (0.5 * 0.75))
    for R in (0.05, 0.5, 0.95):
        assert stability_constant(HardyExponent.parse("inf"), R) >= 1.0


@pytest.mark.parametrize("exponent", [HardyExponent.parse(1), P2, HardyExponent.parse("inf")], ids=["p1", "p2", "pinf"])
@pytest.mark.parametrize("name", ["half_shift", "blaschke3"])
def test_direct_upper_bound_dominates_small_functions(exponent, name):
    E = gen_stolz([StolzSpec(BoundaryPoint(0.0), 2.0, 4)])
    R, eps = 0.5, 0.02
    # eps * f has sup norm eps, so it is admissible data on E and has H^p norm <= 1
    f = corpus_function(name)
    assert float(np.max(np.abs(eps * f(E.array)))) <= eps
    records = sequence_scan(E, 4)
    ring = (R - 1e-12) * np.exp(2j * np.pi * (np.arange(96) + 0.5) / 96)
    log_tail = -exponent.inv_p * math.log(1.0 - R * R)

    for nodes in [rec.points for rec in records]:
        bound = direct_upper_bound(nodes, eps, R, exponent)
        scheme = InterpScheme(nodes, exponent)
        samples = eps * f(scheme.node_array)
        for z in ring:
            z = complex(z)
            value = abs(eps * complex(f(z)))
            rep = reconstruct(scheme, samples, z)
            assert value <= abs(rep.estimate) + rep.error_bound + 1e-12
            assert math.log(value) <= bound + 1e-12

            coefficients = np.abs(interp_coefficients(scheme, z))
            tail = math.exp(log_tail + blaschke_log_abs(nodes, z))
            assert eps * coefficients.sum() + tail <= math.exp(bound) * (1 + 1e-9)

            pieces = 0.0
            for k, node in enumerate(nodes):
                deleted = nodes[:k] + nodes[k + 1:]
                ratio = math.exp(blaschke_log_abs(deleted, z) - blaschke_log_abs(deleted, node))
                lhs, rhs = coefficient_bound_check(z, node, exponent, R)
                assert lhs <= rhs
                assert coefficients[k] == pytest.approx(lhs * ratio, rel=1e-9)
                pieces += rhs * ratio
            assert eps * pieces + tail <= math.exp(bound) * (1 + 1e-9)

    empty = direct_upper_bound((), 0.1, 0.5, P2)
    assert empty == pytest.approx(-0.5 * math.log(0.75), abs=1e-12)


def test_origin_upper_bound_single_node():
    assert origin_upper_bound((), 0.4, P2) == 0.0
    assert origin_upper_bound((0.5,), 0.4, P2) == pytest.approx(math.log(0.4 * 0.75 + 0.5))


def test_sandwich_on_tiny(tiny):
    s = sandwich(tiny, 0.15, 0.5, P2, FAST)
    assert s.holds()
    assert s.alpha == pytest.approx(alpha_star(0.5))
    assert s.K == pytest.approx(stability_constant(P2, 0.5))
    assert s.phi_eps == pytest.approx(0.375)
    assert s.lower_exact
    assert s.lower_log <= s.upper_log + 1e-9


def test_sandwich_records_the_first_tuple_below_phi(tiny):
    records = sequence_scan(tiny, 2, ScanMode.EXACT)
    s = sandwich(tiny, 0.15, 0.5, P2, FAST, records)
    below = [r for r in records if r.logM <= math.log(s.phi_eps)]
    assert below and s.n0 == below[0].n
    assert s.upper_certified_log <= direct_upper_bound(below[0].points, 0.15, 0.5, P2)


def test_sandwich_outside_the_envelope_support(tiny):
    with pytest.raises(EnvelopeSupportError):
        sandwich(tiny, 0.3, 0.5, P2, FAST)
    with pytest.raises(EnvelopeSupportError):
        sandwich(tiny, 0.01, 0.5, P2, FAST)


def test_sandwich_needs_two_points():
    with pytest.raises(DomainError):
        sandwich(_unit([0.2]), 0.1, 0.5, P2, FAST)


@pytest.mark.parametrize(
    "E",
    [
        gen_compact_grid(0.25, 0.05),
        gen_stolz([StolzSpec(BoundaryPoint(0.0), 2.0, 12)]),
    ],
    ids=["compact", "stolz"],
)
def test_sandwich_rows_hold_on_scenarios(E):
    R = 0.5
    records = sequence_scan(E, FAST.scan_nmax)
    phi_map = PhiMap(envelope_h(records))
    ring = R * np.exp(2j * np.pi * np.arange(4096) / 4096)
    for eps in np.geomspace(phi_map.eps_min, phi_map.eps0, 10)[1:-1]:
        s = sandwich(E, float(eps), R, P2, FAST, records)
        assert s.holds(), (eps, s.lower_log, s.upper_certified_log, s.upper_log)

        witness = np.array(s.witness_lower, dtype=complex)
        on_E = np.asarray(weighted_blaschke_log_abs(E.weight, witness, E.array))
        assert float(on_E.max()) <= math.log(eps) + 1e-9
        assert sup_on_circle(E.weight, witness, R).log_value == pytest.approx(s.lower_log, abs=1e-9)
        sampled = float(np.max(weighted_blaschke_log_abs(E.weight, witness, ring)))
        assert s.lower_log - 1e-3 <= sampled <= s.lower_log + 1e-9

        assert direct_upper_bound(s.witness_upper, eps, R, P2) == pytest.approx(s.upper_certified_log, abs=1e-12)
        expected_n0 = min((r.n for r in records if r.logM <= math.log(s.phi_eps)), default=None)
        assert s.n0 == expected_n0


def test_one_point_with_origin_in_E(tiny):
    s = one_point(tiny, 0.2, P2, FAST)
    assert s.lower_log == s.upper_log == s.upper_certified_log == pytest.approx(math.log(0.2))
    assert s.method == "origin" and s.R == 0.0


def test_one_point_without_origin():
    E = _unit([0.5])
    s = one_point(E, 0.4, P2, FAST)
    assert s.lower_log == pytest.approx(math.log(0.5))
    assert s.upper_log is None
    assert s.upper_certified_log == pytest.approx(math.log(0.8))
    assert s.holds()

    vacuous = one_point(E, 2.0, P2, FAST)
    assert vacuous.lower_log == 0.0


def _power_records(ns, sigma=2.0):
    return [
        FeketeRecord(
            n=n, indices=(), points=(), logV=0.0, mu=1.0, logM=-sigma * math.log(n), witness=0j,
            method=FeketeMethod.EXCHANGE,
        )
        for n in ns
    ]


def test_power_decay_fit_on_an_exact_power_law():
    fit = corollary_power_decay(_power_records(range(1, 9)), eps=0.01, R=0.5)
    assert fit.sigma == pytest.approx(2.0)
    assert fit.exponent == pytest.approx(2.0 / 3.0)
    assert fit.log_C == pytest.approx(0.0, abs=1e-12)
    assert fit.C2 == pytest.approx(2.0 ** (2.0 / 3.0))
    assert fit.phi_bound == pytest.approx(fit.C2 * 0.01 ** (2.0 / 3.0))
    assert fit.stolz_exponent == pytest.approx(alpha_star(0.5) * 2.0)
    assert not fit.superpolynomial
    with pytest.raises(DomainError):
        corollary_power_decay(_power_records(range(1, 7)))


def test_eta_blocks_on_the_harmonic_ray():
    seq = eta_sequence(HarmonicRay(100), 2)
    assert seq.starts == [1, 4]
    first = seq.blocks[0]
    assert first.length == 3
    assert first.mass == pytest.approx(1 / 2 + 1 / 3 + 1 / 4)
    assert all(b.mass >= b.k for b in seq.blocks)
    assert np.all(seq.etas() > 0)
    with pytest.raises(InsufficientMassError) as info:
        eta_sequence(HarmonicRay(100), 3)
    assert info.value.achieved_k == 2


def test_eta_fast_path_matches_generic_path():
    ray = HarmonicRay(100, angle=0.4)
    fast = eta_sequence(ray, 2)
    slow = eta_sequence(ray.points(), 2)
    assert fast.starts == slow.starts
    for a, b in zip(fast.blocks, slow.blocks):
        np.testing.assert_allclose(a.log_eta, b.log_eta, rtol=0, atol=1e-9)


def test_eta_blocks_with_unit_masses():
    seq = eta_sequence(np.zeros(10), 4)
    assert seq.starts == [1, 2, 4, 7]
    assert [b.length for b in seq.blocks] == [1, 2, 3, 4]


def test_eta_ratios_grow_across_blocks():
    f = lambda z: (1.0 + z) / 2.0  # noqa: E731
    seq = eta_sequence(HarmonicRay.for_blocks(5), 5, f)
    assert seq.starts == [1, 4, 33, 673, 36772]
    assert all(b.mass >= b.k for b in seq.blocks)
    mins = [b.min_log_eta for b in seq.blocks]
    ratios = [b.max_log_ratio for b in seq.blocks]
    assert all(a >= b for a, b in zip(mins, mins[1:]))
    assert all(a <= b for a, b in zip(ratios, ratios[1:]))


def test_arc_set_normalisation():
    assert ArcSet.from_pairs([(0.0, 1.0), (0.5, 2.0)]).arcs == ((0.0, 2.0),)
    wrapped = ArcSet.from_pairs([(6.0, 7.0), (0.5, 1.0)])
    assert len(wrapped.arcs) == 1
    assert wrapped.arcs[0][0] == 6.0
    assert wrapped.measure == pytest.approx(1.0 + 2 * math.pi - 6.0)
    assert ArcSet.from_pairs([(0.0, 2 * math.pi)]).full
    with pytest.raises(DomainError):
        ArcSet.from_pairs([(1.0, 0.5)])
    with pytest.raises(DomainError):
        ArcSet.from_pairs([])


def test_harmonic_measure_at_the_origin():
    full = ArcSet.from_pairs([(0.0, 2 * math.pi)])
    half = ArcSet.from_pairs([(0.0, math.pi)])
    quarter = ArcSet.from_pairs([(1.0, 1.0 + math.pi / 2)])
    assert harmonic_omega(full, 0.0) == 1.0
    assert harmonic_omega(half, 0.0) == pytest.approx(0.5, abs=1e-10)
    assert harmonic_omega(quarter, 0.0) == pytest.approx(0.25, abs=1e-10)


def test_harmonic_measure_is_additive_and_bounded():
    a = ArcSet.from_pairs([(0.2, 1.4)])
    b = ArcSet.from_pairs([(3.0, 5.5)])
    both = ArcSet.from_pairs([(0.2, 1.4), (3.0, 5.5)])
    rng = np.random.default_rng(0)
    z = 0.95 * np.sqrt(rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
    np.testing.assert_allclose(harmonic_omega(both, z), harmonic_omega(a, z) + harmonic_omega(b, z), atol=1e-10)
    values = harmonic_omega(both, z)
    assert np.all((values > 0.0) & (values < 1.0))
    with pytest.raises(DomainError):
        harmonic_omega(a, 1.0)


def test_positive_measure_bound_examples():
    full = ArcSet.from_pairs([(0.0, 2 * math.pi)])
    bound = positive_measure_bound(full, 0.1, 0.5, P2)
    assert bound.upper == pytest.approx(math.sqrt(2.0 / 0.75) * 0.1)
    assert bound.lower == 0.1

    half = ArcSet.from_pairs([(0.0, math.pi)])
    at_origin = positive_measure_bound(half, 0.1, 0.0, P2)
    assert at_origin.upper == pytest.approx(math.sqrt(2.0) * math.sqrt(0.1))

    bound = positive_measure_bound(half, 0.1, 0.5, P2)
    thetas = np.linspace(0.0, 2 * math.pi, 100_000, endpoint=False)
    oracle = float(np.min(harmonic_omega(half, 0.5 * np.exp(1j * thetas))))
    assert bound.omega_min == pytest.approx(oracle, abs=1e-8)
    assert bound.omega_min <= oracle + 1e-12

    with pytest.raises(DomainError):
        positive_measure_bound(half, 1.0, 0.5, P2)


def test_positive_measure_bound_is_monotone():
    arcs = [
        ArcSet.from_pairs([(0.0, 2 * math.pi)]),
        ArcSet.from_pairs([(0.0, math.pi)]),
        ArcSet.from_pairs([(0.0, math.pi / 2)]),
    ]
    for arc_set in arcs:
        by_R = [positive_measure_bound(arc_set, 0.1, R, P2).upper for R in (0.1, 0.3, 0.5, 0.7)]
        by_eps = [positive_measure_bound(arc_set, eps, 0.5, P2).upper for eps in (0.01, 0.1, 0.5)]
        assert all(a < b for a, b in zip(by_R, by_R[1:]))
        assert all(a < b for a, b in zip(by_eps, by_eps[1:]))

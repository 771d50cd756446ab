import math

import numpy as np
import orjson
import pytest

from blaschke_stab.core.config import DEFAULT_PACKS_DIR
from blaschke_stab.core.disk_core import BoundaryPoint, WeightKind
from blaschke_stab.core.errors import BudgetExceededError, DomainError, PointSetError
from blaschke_stab.core.scenario_router import ScenarioRouter
from blaschke_stab.core.scenarios import (
    HarmonicRay,
    ScenarioKind,
    ScenarioSpec,
    StolzSpec,
    check_scenario,
    gen_compact_grid,
    gen_radial,
    gen_stolz,
    load_points,
    partial_mass,
    save_points,
    spec_from_params,
)


def test_compact_grid_matches_a_lattice_count():
    r, mesh = 0.25, 0.1
    E = gen_compact_grid(r, mesh)
    oracle = [
        complex(i * mesh, j * mesh)
        for j in range(-3, 4)
        for i in range(-3, 4)
        if abs(complex(i * mesh, j * mesh)) <= r
    ]
    assert len(E) == len(oracle) == 21
    assert set(E.points) == set(oracle)
    assert E.weight.kind is WeightKind.UNIT
    assert check_scenario(E, ScenarioSpec(kind=ScenarioKind.COMPACT_GRID, r=r, mesh=mesh)) == []


def test_compact_grid_rejects_bad_parameters():
    with pytest.raises(DomainError):
        gen_compact_grid(1.0, 0.1)
    with pytest.raises(DomainError):
        gen_compact_grid(0.25, 0.3)
    with pytest.raises(BudgetExceededError):
        gen_compact_grid(0.9, 1e-3)


def test_check_scenario_catches_points_outside_the_radius():
    E = gen_compact_grid(0.25, 0.1)
    problems = check_scenario(E, ScenarioSpec(kind=ScenarioKind.COMPACT_GRID, r=0.15, mesh=0.1))
    assert problems and all("> r" in p for p in problems)


def test_stolz_points_stay_in_their_cone():
    spec = StolzSpec(BoundaryPoint(0.0), 2.0, 12)
    E = gen_stolz([spec])
    assert E.points[0] == 0j
    assert all(spec.contains(z) for z in E.points)
    assert E.weight.kind is WeightKind.BOUNDARY_POLY
    assert E.weight.norm_const == pytest.approx(0.5, rel=1e-9)
    assert partial_mass(E) >= 3.0
    assert check_scenario(E, ScenarioSpec(kind=ScenarioKind.STOLZ, stolz=(spec,))) == []


def test_antipodal_stolz_pair_shares_the_origin():
    specs = [StolzSpec(BoundaryPoint(0.0), 2.0, 8), StolzSpec(BoundaryPoint(math.pi), 2.0, 8)]
    E = gen_stolz(specs)
    assert E.points.count(0j) == 1
    assert math.exp(E.weight.log_abs(0.0)) == pytest.approx(0.5, rel=1e-9)
    assert any(z.real < 0 for z in E.points) and any(z.real > 0 for z in E.points)


def test_stolz_spec_validation():
    with pytest.raises(DomainError):
        StolzSpec(BoundaryPoint(0.0), 0.5, 4)
    with pytest.raises(DomainError):
        StolzSpec(BoundaryPoint(0.0), 2.0, 0)
    with pytest.raises(DomainError):
        gen_stolz([])


def test_harmonic_radial_sequence():
    E = gen_radial(count=3)
    assert E.points == pytest.approx((0.5, 2 / 3, 0.75))
    assert partial_mass(E) == pytest.approx(1 / 2 + 1 / 3 + 1 / 4)
    assert check_scenario(E, ScenarioSpec(kind=ScenarioKind.RADIAL, count=3)) == []

    tilted = gen_radial(count=2, angle=math.pi / 2)
    assert tilted.points[0] == pytest.approx(0.5j)


def test_custom_radii_are_validated():
    assert len(gen_radial(radii=[0.0, 0.3, 0.9])) == 3
    with pytest.raises(DomainError):
        gen_radial(radii=[0.5, 0.4])
    with pytest.raises(DomainError):
        gen_radial(radii=[0.2, 1.0])


def test_harmonic_ray():
    ray = HarmonicRay(3)
    np.testing.assert_allclose(ray.points(), [0.5, 2 / 3, 0.75])
    np.testing.assert_allclose(ray.masses(), [1 / 2, 1 / 3, 1 / 4])
    np.testing.assert_allclose(ray.points(2, 3), [2 / 3, 0.75])
    assert HarmonicRay.for_blocks(3).count >= 673
    with pytest.raises(DomainError):
        HarmonicRay(0)


def test_point_file_round_trip(tmp_path):
    E = gen_stolz([StolzSpec(BoundaryPoint(1.0), 3.0, 5)])
    path = save_points(E, tmp_path / "nested" / "stolz.json")
    loaded = load_points(path)
    assert loaded.points == E.points
    assert loaded.label == E.label
    assert loaded.weight.kind is WeightKind.BOUNDARY_POLY
    assert loaded.weight.vertex_thetas == pytest.approx(E.weight.vertex_thetas)


def _write(tmp_path, points, name="E.json"):
    path = tmp_path / name
    payload = {"label": "E", "points": [{"re": re, "im": im} for re, im in points]}
    path.write_bytes(orjson.dumps(payload))
    return path


def test_load_points_names_the_offending_index(tmp_path):
    with pytest.raises(PointSetError, match="point 1") as info:
        load_points(_write(tmp_path, [("0.1", "0"), ("1", "0")]))
    assert info.value.index == 1

    with pytest.raises(PointSetError) as info:
        load_points(_write(tmp_path, [("0.1", "0"), ("0.2", "0"), ("0.1", "0.0")]))
    assert info.value.index == 2

    with pytest.raises(PointSetError):
        load_points(_write(tmp_path, [("abc", "0")]))


def test_load_points_rejects_broken_files(tmp_path):
    with pytest.raises(PointSetError, match="does not exist"):
        load_points(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(PointSetError, match="malformed"):
        load_points(bad)
    with pytest.raises(PointSetError, match="no points"):
        load_points(_write(tmp_path, []))


def test_spec_from_params():
    inline = spec_from_params("points", {"label": "two", "points": [[0.0, 0.0], [0.5, 0.0]]}).build()
    assert inline.points == (0j, 0.5 + 0j) and inline.label == "two"

    stolz = spec_from_params("stolz", {"sigma": 2.0, "count": 4}, stolz_vertices=[math.pi])
    assert stolz.stolz[0].vertex.theta == pytest.approx(math.pi)

    with pytest.raises(DomainError):
        spec_from_params("annulus", {})
    with pytest.raises(DomainError):
        spec_from_params("file", {})


def test_router_lists_and_resolves_packs():
    router = ScenarioRouter(DEFAULT_PACKS_DIR)
    assert router.available_packs() == ["compact", "radial", "stolz", "stolz_pair", "tiny"]

    tiny = router.resolve("tiny")
    assert tiny.spec.kind is ScenarioKind.INLINE
    assert tiny.defaults["nmax"] == 2
    assert len(tiny.spec.build()) == 3

    compact = router.resolve(" Compact ", {"mesh": 0.1, "r": None})
    assert compact.name == "compact"
    assert compact.spec.mesh == 0.1 and compact.spec.r == 0.25

    pair = router.resolve("stolz", {"vertices_theta": [1.0, 2.0]})
    assert [s.vertex.theta for s in pair.spec.stolz] == [1.0, 2.0]


def test_router_rejects_unknown_inputs():
    router = ScenarioRouter(DEFAULT_PACKS_DIR)
    with pytest.raises(DomainError, match="neither a scenario pack"):
        router.resolve("annulus")
    with pytest.raises(DomainError, match="override"):
        router.resolve("compact", {"radius": 0.3})
    with pytest.raises(DomainError, match="Unknown scenario pack"):
        router.load_pack("annulus")


def test_router_resolves_point_files(tmp_path):
    path = save_points(gen_radial(count=4), tmp_path / "ray.json")
    resolved = ScenarioRouter(DEFAULT_PACKS_DIR).resolve(str(path), {"count": 9})
    assert resolved.name == "ray"
    assert resolved.spec.kind is ScenarioKind.FROM_FILE
    assert len(resolved.spec.build()) == 4

from fractions import Fraction

import pytest

from geometry.errors import PreconditionError
from harness.ct_harness import CTHarness
from harness.generators import InstanceGenerator
from harness.suites import family_sweep
from trees.ladder import LadderBuilder
from trees.tree_spaces import TreeGeometry

FREE_RADII = [2, 3, 4]
AUTOMORPHISM = "segment-automorphism,3,a=a;b=ba,1"


def within_factor(values, factor=2):
    """max <= factor * min, or every value at most factor when one of them is 0"""
    low, high = min(values), max(values)
    return high <= factor * low if low > 0 else high <= factor


@pytest.fixture(scope="module")
def free_sweep():
    return family_sweep([f"free-peripheral,{R}" for R in FREE_RADII], seed=0, jobs=1)


@pytest.fixture(scope="module")
def automorphism_geometry():
    geo = TreeGeometry(InstanceGenerator.generate(AUTOMORPHISM))
    p = CTHarness.default_reference_point(geo)
    params = CTHarness.resolve_params(geo, p=p)
    lam = CTHarness.reference_geodesic(geo, p)
    ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
    return geo, p, params, ladder


def test_sweep_covers_every_radius(free_sweep):
    assert [row["instance"] for row in free_sweep["rows"]] == [f"free-peripheral,{R}" for R in FREE_RADII]
    vertices = [row["vertices"] for row in free_sweep["rows"]]
    assert vertices == sorted(vertices) and len(set(vertices)) == len(vertices)
    for name in ("delta", "P1", "P3", "P4", "electro_ambient_K", "C0", "ladder_quasiconvexity"):
        entry = free_sweep["spread"][name]
        assert entry["min"] <= entry["max"]
        if entry["min"] > 0:
            assert entry["ratio"] == entry["max"] / entry["min"]
        else:
            assert entry["ratio"] is None


def test_glued_delta_stays_bounded_as_the_ball_grows(free_sweep):
    deltas = [row["delta"] for row in free_sweep["rows"]]
    assert within_factor(deltas), deltas


def test_electro_ambient_quality_stays_bounded(free_sweep):
    qualities = [row["electro_ambient_K"] for row in free_sweep["rows"]]
    assert all(K >= 1 for K in qualities)
    assert within_factor(qualities), qualities


@pytest.mark.parametrize("name", ["P1", "P3", "P4"])
def test_projection_constants_stay_bounded(free_sweep, name):
    values = [row[name] for row in free_sweep["rows"]]
    assert None not in values
    assert within_factor(values), values


def test_retraction_constant_over_several_geodesics(free_geometry):
    """C0 barely moves between ladders of different electric geodesics"""
    geo = free_geometry
    p = CTHarness.default_reference_point(geo)
    params = CTHarness.resolve_params(geo, p=p)
    admissible = CTHarness.enumerate_admissible(geo.coned(geo.root), p, 0, budget=5)
    assert len(admissible.geodesics) == 5
    values = []
    for lam in admissible.geodesics:
        ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
        values.append(LadderBuilder.measure_retraction_lipschitz(geo, ladder).value)
    assert within_factor(values), values


def test_retraction_constant_across_radii(free_sweep):
    values = [row["C0"] for row in free_sweep["rows"]]
    assert None not in values
    assert within_factor(values), values


def test_ladder_quasiconvexity_on_fifty_pairs(automorphism_geometry):
    geo, _, _, ladder = automorphism_geometry
    first = LadderBuilder.measure_ladder_quasiconvexity(geo, ladder, count=50)
    again = LadderBuilder.measure_ladder_quasiconvexity(geo, ladder, count=50)
    assert first.operation == "measure_ladder_quasiconvexity"
    assert 0 < first.samples <= 50
    assert first.value == again.value and first.witness == again.witness
    assert first.value >= 0


def test_automorphism_profile_keeps_its_shape(automorphism_geometry):
    geo, p, params, _ = automorphism_geometry
    profile = CTHarness.ct_profile(geo, p, [0, 1, 2], params=params)
    tested = [row for row in profile.rows if row.M is not None]
    assert tested
    for row in tested:
        assert row.bound == row.N / (params["C_ray"] + 1) - params["C1"]
        assert row.shape_ok, row
    assert profile.lower_envelope_monotone()


def test_depth_escape_sweep(automorphism_geometry):
    geo, p, params, ladder = automorphism_geometry
    root_graph = geo.tos.space(geo.root).graph
    n_root = min(root_graph.distance(x, p) for x in ladder.pieces[geo.root].lam_b)
    for n in range(int(n_root) + 1):
        escape = LadderBuilder.check_depth_escape(geo, ladder, p, n, params["C"])
        assert escape.threshold == Fraction(n) / (escape.C + 1)
        assert escape.passed, (n, escape.witness, escape.min_distance)
        assert escape.witness is None and escape.min_distance >= escape.threshold
        assert escape.C_rays >= params["C"]
    with pytest.raises(PreconditionError):
        LadderBuilder.check_depth_escape(geo, ladder, p, n_root + 1, params["C"])

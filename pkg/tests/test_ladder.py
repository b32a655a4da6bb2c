from fractions import Fraction

import pytest

from geometry.electric import Electrifier
from geometry.errors import DomainError, PreconditionError
from harness.ct_harness import CTHarness
from trees.ladder import LadderBuilder


@pytest.fixture(scope="module")
def identity_ladder(identity_segment_geometry):
    """Geodesic between the leaves 11 and 14 of the root copy, carried with D = C = 0"""
    geo = identity_segment_geometry
    lam = Electrifier.electric_geodesic_nb(geo.coned(geo.root), 11, 14)
    return LadderBuilder.build_ladder(geo, lam, 0, 0)


def test_identity_ladder_climbs_the_whole_segment(identity_segment_geometry, identity_ladder):
    geo, ladder = identity_segment_geometry, identity_ladder
    assert ladder.support == ["0", "1", "2"]
    assert [ladder.pieces[v].generation for v in ladder.support] == [1, 2, 3]
    for v in ladder.support:
        assert ladder.pieces[v].lam_hat.vertices == (11, 5, 2, 6, 14), v
    sub = ladder.pieces["0"].subpieces[0]
    assert (sub.p, sub.q, sub.separation) == (11, 14, 4)
    assert [len(level) for level in ladder.level_sets(geo.coned_tree)] == [5, 10, 15]
    assert ladder.skipped == []


def test_phi_map_follows_the_edge(identity_segment_geometry):
    tos = identity_segment_geometry.tos
    edge = tos.edge_between("0", "1")
    assert LadderBuilder.phi_map(tos, "1", edge, 9) == 9
    with pytest.raises(DomainError):
        LadderBuilder.phi_map(tos, "2", edge, 9)


def test_vertical_rays_climb_one_rung_at_a_time(identity_segment_geometry, identity_ladder):
    geo, ladder = identity_segment_geometry, identity_ladder
    total = geo.total
    ray = LadderBuilder.vertical_ray(geo, ladder, total.embed("2", 5))
    assert ray.path == ["2", "1", "0"]
    assert ray.displacements == [1, 1]
    assert ray.points[-1] == total.embed("0", 5)
    assert ray.steps_within(1)
    measurement = LadderBuilder.measure_ray_constant(total, ray)
    assert measurement.value == 1 and measurement.details["lower_ok"]
    with pytest.raises(DomainError):
        LadderBuilder.vertical_ray(geo, ladder, total.embed("2", 0))


def test_retraction_onto_the_ladder(identity_segment_geometry, identity_ladder):
    geo, ladder = identity_segment_geometry, identity_ladder
    total = geo.total
    assert LadderBuilder.retract(geo, ladder, total.embed("1", 6)) == total.embed("1", 6)
    assert LadderBuilder.retract(geo, ladder, total.embed("0", 0)) == total.embed("0", 2)
    sweep = LadderBuilder.measure_retraction_lipschitz(geo, ladder)
    assert sweep.value == 1
    assert sweep.cases[3]["pairs"] == 0 and sweep.offenders == []
    assert sweep.cases[2]["value"] == 1


def test_depth_escape(identity_segment_geometry, identity_ladder):
    """lambda^b stays 1 away from the root, so B^b clears the 1/2-ball"""
    geo, ladder = identity_segment_geometry, identity_ladder
    escape = LadderBuilder.check_depth_escape(geo, ladder, 0, 1)
    assert escape.passed
    assert escape.C == 1 and escape.n_X == 1 and escape.threshold == Fraction(1, 2)
    assert escape.min_distance == 1
    assert escape.ray_bound_failures == [] and escape.stuck_rays == []
    assert escape.witness is None
    assert geo.total.graph.distance(geo.total.embed(geo.root, 0), escape.closest) == escape.min_distance
    assert escape.total_threshold == Fraction(1, 2) and escape.total_form_ok
    with pytest.raises(PreconditionError) as info:
        LadderBuilder.check_depth_escape(geo, ladder, 0, 2)
    assert 2 in info.value.offenders


def test_configured_C_only_widens_the_ray_bound(identity_segment_geometry, identity_ladder):
    escape = LadderBuilder.check_depth_escape(identity_segment_geometry, identity_ladder, 0, 1, 3)
    assert escape.C == 1 and escape.C_rays == 3
    assert escape.threshold == Fraction(1, 2)
    assert escape.passed and escape.ray_bound_failures == []


def test_ladder_ray_constant(identity_segment_geometry, identity_ladder):
    measurement = LadderBuilder.measure_ladder_ray_constant(identity_segment_geometry, identity_ladder)
    assert measurement.value == 1
    assert measurement.operation == "measure_ladder_ray_constant"
    assert measurement.samples > 0


def test_subpiece_constants_vanish_on_identity_gluings(identity_segment_geometry, identity_ladder):
    near, projection = LadderBuilder.measure_subpiece_constants(identity_segment_geometry, identity_ladder)
    assert near.value == 0 and projection.value == 0
    assert near.samples == 2


def test_descent_stops_at_D(identity_segment_geometry):
    geo = identity_segment_geometry
    lam = Electrifier.electric_geodesic_nb(geo.coned(geo.root), 11, 14)
    ladder = LadderBuilder.build_ladder(geo, lam, 4, 0)
    assert ladder.support == ["0"]
    assert ladder.skipped[0]["reason"] == "pair within D"


def test_ladder_on_a_free_group_ball(free_geometry):
    geo = free_geometry
    p = CTHarness.default_reference_point(geo)
    params = CTHarness.resolve_params(geo, p=p)
    lam = CTHarness.reference_geodesic(geo, p)
    ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
    assert ladder.support == [geo.root]
    piece = ladder.pieces[geo.root]
    assert piece.lam_b[0] == lam.start and piece.lam_b[-1] == lam.end
    assert piece.mu.start == lam.start and piece.mu.end == lam.end
    assert len(piece.anchors) == len(piece.mu.vertices)
    with pytest.raises(DomainError):
        LadderBuilder.build_ladder(geo, geo.coned(geo.root).graph.path([0]), params["D"], params["C"])

from fractions import Fraction

import pytest

from conftest import fixture_path, path_graph
from geometry.electric import CONE_LENGTH, Electrifier, HoroFamily
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import GraphGeometry
from utils.file_handler import FileHandler


@pytest.fixture
def whole_path(path10):
    data = FileHandler.read_json(fixture_path("all.json"))
    return FileHandler.parse_family(data, path10, "all.json")


def test_coning_collapses_a_member(path10, whole_path):
    """Any two member vertices end up one cone edge pair apart"""
    cs = Electrifier.cone_off(path10, whole_path)
    assert cs.graph.n == 12
    assert cs.cone_vertex(0) == 11 and cs.is_cone(11)
    assert cs.graph.edge_length(0, 11) == CONE_LENGTH
    assert cs.graph.distance(0, 10) == 1
    assert cs.representative(11) == 0
    assert cs.off_member_vertices() == []


def test_family_validation():
    g = path_graph(10)
    overlapping = HoroFamily(g.space_id, {"A": [0, 1], "B": [1, 2]})
    assert any("overlap" in failure for failure in overlapping.validate(g))
    crowded = HoroFamily(g.space_id, {"A": [0, 1], "B": [3, 4]}, Fraction(3))
    with pytest.raises(InvariantViolation, match="below the declared separation"):
        crowded.check(g)
    separated = HoroFamily.separated(g, {"A": [0, 1], "B": [5, 6]})
    assert separated.separation == 4
    assert HoroFamily(g.space_id, {"A": [0]}).measured_separation(g) is None


def test_horoball_distance_over_a_long_segment():
    """Level-0 ends of an 8-long member meet at distance 6 in a depth-3 horoball"""
    g = path_graph(8)
    ball = Electrifier.build_horoball(g, range(9), 3)
    assert ball.graph.n == 9 * 4
    assert ball.vertex(0, 8) == 8 and ball.vertex(3, 0) == 27
    assert ball.graph.distance(ball.vertex(0, 0), ball.vertex(0, 8)) == 6
    assert ball.graph.distance(ball.vertex(0, 0), ball.vertex(3, 0)) == 3


def test_horoball_rejects_bad_input():
    g = path_graph(8)
    with pytest.raises(DomainError):
        Electrifier.build_horoball(g, [0, 8], 3)
    with pytest.raises(DomainError):
        Electrifier.build_horoball(g, range(9), 0)


def test_horoball_bound_holds_on_segments(path10, whole_path):
    for depth in (1, 2, 3, None):
        measurement = Electrifier.measure_horoball_bound(path10, whole_path, depth)
        assert measurement.details["violations"] == [], f"depth {depth}"
        assert measurement.samples == 1


def test_glued_space_levels(path10, whole_path):
    gs = Electrifier.glue_cones(path10, whole_path)
    assert gs.depth == 5
    assert gs.graph.n == 11 * 6
    assert gs.base_at(3) == 3 and gs.base_at(20) is None
    assert gs.member_at(20) == 0
    cs = Electrifier.cone_off(path10, whole_path)
    image = gs.to_coned_map(cs)
    assert image[4] == 4 and image[40] == cs.cone_vertex(0)


def test_remove_backtracking_splices_through_the_cone():
    g = path_graph(10)
    family = HoroFamily(g.space_id, {"H0": [2, 3], "H1": [7, 8]})
    cs = Electrifier.cone_off(g, family)
    walk = cs.graph.path([1, 2, 3, 4, 3, 4, 5])
    assert Electrifier.penetration_profile(walk, cs).backtracking
    fixed = Electrifier.remove_backtracking(cs, walk)
    assert fixed.vertices == (1, 2, cs.cone_vertex(0), 3, 4, 5)
    assert not Electrifier.penetration_profile(fixed, cs).backtracking


def test_electric_geodesics_do_not_backtrack():
    g = path_graph(10)
    family = HoroFamily(g.space_id, {"H0": [2, 3, 4], "H1": [7, 8]})
    cs = Electrifier.cone_off(g, family)
    for u in cs.off_member_vertices():
        for v in cs.off_member_vertices():
            path = Electrifier.electric_geodesic_nb(cs, u, v)
            assert not Electrifier.penetration_profile(path, cs).backtracking, (u, v)
            assert path.length == cs.graph.distance(u, v)
    with pytest.raises(DomainError):
        Electrifier.electric_geodesic_nb(cs, 0, cs.cone_vertex(1))


def test_electro_ambient_representative(path10, whole_path):
    """The cone detour is replaced by a horoball geodesic of length 7"""
    cs = Electrifier.cone_off(path10, whole_path)
    gs = Electrifier.glue_cones(path10, whole_path)
    lam = cs.graph.path([0, cs.cone_vertex(0), 10])
    visit = Electrifier.penetration_profile(lam, cs).by_member()["H0"]
    assert (visit.entry, visit.exit, visit.length) == (0, 10, 10)
    mu, anchors = Electrifier.electro_ambient_anchored(cs, gs, lam)
    assert mu.start == 0 and mu.end == 10
    assert mu.length == 7
    assert anchors[0] == 0 and anchors[-1] == 10
    assert set(anchors[1:-1]) <= {cs.cone_vertex(0)}
    assert mu.quality is not None and mu.quality >= 1


def test_similar_intersections_and_tracking():
    g = path_graph(10)
    family = HoroFamily(g.space_id, {"H0": [2, 3, 4], "H1": [7, 8]})
    cs = Electrifier.cone_off(g, family)
    gs = Electrifier.glue_cones(g, family)
    lam = Electrifier.electric_geodesic_nb(cs, 0, 10)
    assert Electrifier.check_similar_intersections(lam, lam, cs).value == 0
    host = cs.graph.path(g.geodesic(0, 10).vertices)
    measured = Electrifier.check_similar_intersections(lam, host, cs)
    assert measured.value == 0, measured.details
    assert Electrifier.measure_electric_tracking(cs, gs, 0, 10).value >= 0
    image = Electrifier.electric_projection_map(cs, gs, Electrifier.electro_ambient(cs, gs, lam))
    assert image[0] == 0 and image[10] == 10
    assert GraphGeometry.hausdorff_distance(cs.graph, lam.vertices, lam.vertices) == 0

import pytest

from conftest import fixture_path, path_graph
from geometry.electric import HoroFamily
from geometry.errors import InvariantViolation
from harness.generators import InstanceGenerator
from trees.tree_spaces import EdgeSpace, TreeBuilder, TreeGeometry, TreeOfSpaces, VertexSpace, vertex_key
from utils.file_handler import FileHandler


def path_segment(image_into_child) -> TreeOfSpaces:
    """Two copies of a 4-long path joined along an edge space of the same shape"""
    spaces = {}
    for v in ("0", "1"):
        g = path_graph(4, f"X{v}")
        spaces[v] = VertexSpace(v, g, HoroFamily.empty(g))
    e = path_graph(4, "E0")
    edge = EdgeSpace("e0", e, HoroFamily.empty(e), {"0": tuple(range(5)), "1": tuple(image_into_child)})
    return TreeOfSpaces("segment", "0", [("0", "1")], spaces, {"e0": edge})


def test_identity_segment_is_isometric(identity_segment_geometry):
    """Identity gluings are undistorted: K = 1 at eps 0"""
    report = TreeBuilder.validate(identity_segment_geometry.tos)
    assert report.ok, report.failures
    assert len(report.maps) == 4 and len(report.coned_maps) == 4
    for record in report.maps:
        assert (record.K_at_zero, record.eps_at_declared) == (1, 0), record
    assert report.locus_components == 0
    rows = report.properness["0"]
    assert all(row["N"] == row["M"] for row in rows), rows


def test_total_space_rungs():
    tos = FileHandler.parse_tree(FileHandler.read_json(fixture_path("segment.json")), "segment.json")
    total = TreeBuilder.assemble_total(tos)
    assert total.n == 10
    assert total.graph.distance(total.embed("0", 0), total.embed("1", 4)) == 5
    assert total.graph.distance(total.embed("0", 2), total.embed("1", 2)) == 1
    assert total.fiber_name(7) == "1" and total.local[7] == 2
    assert all(total.off_member(x) for x in total.graph.vertices)


def test_non_injective_and_distorted_maps_fail():
    report = TreeBuilder.validate(path_segment([0, 0, 2, 3, 4]))
    assert not report.ok
    assert any("not injective" in failure for failure in report.failures)

    report = TreeBuilder.validate(path_segment([0, 2, 1, 3, 4]))
    assert not report.ok
    distorted = next(m for m in report.maps if m.end == "1")
    assert distorted.injective and distorted.eps_at_declared == 1
    with pytest.raises(InvariantViolation):
        report.raise_for_failures()


def test_reversed_gluing_is_still_an_isometry():
    report = TreeBuilder.validate(path_segment([4, 3, 2, 1, 0]))
    assert report.ok, report.failures


def test_malformed_trees_are_rejected():
    g = path_graph(2, "X")
    spaces = {v: VertexSpace(v, g, HoroFamily.empty(g)) for v in ("0", "1")}
    with pytest.raises(InvariantViolation, match="has no edge space"):
        TreeOfSpaces("bare", "0", [("0", "1")], spaces, {})
    with pytest.raises(InvariantViolation, match="root 7 has no vertex space"):
        TreeOfSpaces("rootless", "7", [("0", "1")], spaces, {})
    e = path_graph(1, "E")
    short = EdgeSpace("e0", e, HoroFamily.empty(e), {"0": (0, 1), "1": (0,)})
    with pytest.raises(InvariantViolation, match="has 1 entries"):
        TreeOfSpaces("short", "0", [("0", "1")], spaces, {"e0": short})


def test_base_vertices_sort_numerically():
    assert sorted(["10", "9", "b", "a", "2"], key=vertex_key) == ["2", "9", "10", "a", "b"]


def test_free_segment_cone_locus_is_a_forest():
    """Every edge-member links two vertex-members, so components = nodes - links"""
    tos = InstanceGenerator.generate("segment-automorphism,3,a=a;b=ba,1")
    report = TreeBuilder.validate(tos)
    assert report.ok, report.failures
    members = sum(len(space.family) for space in tos.vertex_spaces.values())
    links = sum(len(edge.family) for edge in tos.edge_spaces.values())
    assert report.locus_components == members - links
    geo = TreeGeometry(tos)
    tc = geo.coned_tree
    assert tc.graph.n == geo.total.n + members
    for component in geo.locus.components:
        assert component.tree.n == len(component.nodes)
        assert len(component.base_vertices) == len(set(component.base_vertices))


def test_coned_tree_embeds_the_coned_vertex_spaces(free_geometry):
    geo = free_geometry
    embed = geo.coned_tree.embed(geo.root)
    cs = geo.coned(geo.root)
    assert len(embed) == cs.graph.n
    for x in range(cs.graph.n):
        assert geo.coned_tree.is_cone(int(embed[x])) == cs.is_cone(x)
    assert geo.coned_tree.graph.distance(int(embed[0]), int(embed[1])) == cs.graph.distance(0, 1)
    assert geo.locus.components[0].tree.n == 1


def test_coned_tree_without_members_is_the_total_space(identity_segment_geometry):
    geo = identity_segment_geometry
    tc = TreeBuilder.induced_coned_tree(geo.tos, geo.total, geo.locus)
    assert tc.graph.n == geo.total.n
    assert not any(tc.is_cone(x) for x in range(tc.graph.n))
    assert tc.graph.distance(0, geo.total.n - 1) == geo.total.graph.distance(0, geo.total.n - 1)

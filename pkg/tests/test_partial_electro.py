from fractions import Fraction

import pytest

from conftest import path_graph
from geometry.electric import Electrifier, HoroFamily
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import MetricGraph
from geometry.partial_electro import CylinderTarget, PartialElectrocution
from harness.generators import InstanceGenerator
from trees.tree_spaces import TreeBuilder, TreeGeometry


@pytest.fixture
def segments():
    g = path_graph(10)
    return g, HoroFamily(g.space_id, {"H0": [3, 4, 5, 6], "H1": [8, 9]})


def two_point_target(name: str) -> CylinderTarget:
    return CylinderTarget(MetricGraph(name, 2, [(0, 1, 1)]), {3: 0, 4: 0, 5: 1, 6: 1})


def test_point_targets_with_half_cylinders_are_coning(segments):
    """Collapsing each member to a point through half-length edges is exactly coning off"""
    g, family = segments
    cs = Electrifier.cone_off(g, family)
    pe = PartialElectrocution.partially_electrocute(g, family, PartialElectrocution.point_targets(g, family),
                                                    cylinder_length=Fraction(1, 2))
    assert pe.graph.n == cs.graph.n
    assert PartialElectrocution.compare_host_metrics(pe.graph, cs.graph, cs.graph.n).value == 0
    assert all(record.delta.value == 0 for record in pe.records)


def test_path_target_shortens_the_member(segments):
    g, family = segments
    targets = PartialElectrocution.point_targets(g, family)
    targets["H0"] = two_point_target("L0")
    pe = PartialElectrocution.partially_electrocute(g, family, targets, cylinder_length=Fraction(1, 2))
    assert pe.target_vertices("H0") == [11, 12]
    assert pe.member_at(12) == 0 and pe.base_at(12) is None
    assert PartialElectrocution.pel_geodesic(pe, 0, 7).length == 6
    record = pe.records[0]
    assert record.lipschitz.value >= 0
    with pytest.raises(DomainError):
        PartialElectrocution.pel_geodesic(pe, 0, 12)


def test_cylinder_validation(segments):
    g, family = segments
    with pytest.raises(InvariantViolation, match="missing target for member H1"):
        PartialElectrocution.partially_electrocute(g, family, {"H0": two_point_target("L0")})
    bad = {"H0": CylinderTarget(MetricGraph("L", 1, []), {3: 0, 4: 0, 5: 0}),
           "H1": CylinderTarget(MetricGraph("M", 1, []), {8: 0, 9: 3})}
    with pytest.raises(InvariantViolation) as info:
        PartialElectrocution.partially_electrocute(g, family, bad)
    assert len(info.value.failures) == 2, info.value.failures
    with pytest.raises(DomainError):
        PartialElectrocution.partially_electrocute(g, family, PartialElectrocution.point_targets(g, family), 0)


def test_tracking_between_glued_and_pel_geodesics(segments):
    g, family = segments
    gs = Electrifier.glue_cones(g, family)
    pe = PartialElectrocution.partially_electrocute(g, family, PartialElectrocution.point_targets(g, family))
    measurement = PartialElectrocution.verify_pel_tracking(pe, gs, 0, 10)
    assert measurement.value >= 0
    assert measurement.details["pel"][0] == 0 and measurement.details["pel"][-1] == 10
    assert not measurement.exhaustive
    assert 0 <= measurement.details["one_sided"] <= measurement.value
    with pytest.raises(DomainError):
        PartialElectrocution.verify_pel_tracking(pe, gs, 0, 4)


def test_electrocuting_unit_point_targets(segments):
    g, family = segments
    cs = Electrifier.cone_off(g, family)
    pe = PartialElectrocution.partially_electrocute(g, family, PartialElectrocution.point_targets(g, family))
    discrepancy = PartialElectrocution.measure_electrocution_discrepancy(pe, cs)
    assert discrepancy.exhaustive
    assert discrepancy.value <= 2


def test_coned_tree_is_an_electrocution_of_the_total_space():
    """TC(X) equals X electrocuted along its cone-subtrees with half-length cylinders"""
    geo = TreeGeometry(InstanceGenerator.generate("segment-automorphism,3,a=a;b=ba,1"))
    tc = geo.coned_tree
    pel = TreeBuilder.coned_tree_as_pel(geo.total, geo.locus)
    assert pel.graph.n == tc.graph.n
    assert PartialElectrocution.compare_host_metrics(pel.graph, tc.graph, tc.graph.n).value == 0

from fractions import Fraction
from itertools import product

import networkx as nx
import pytest

from conftest import cycle_graph, path_graph
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import GraphBuilder, GraphGeometry, MetricGraph
from harness.generators import InstanceGenerator


def random_graph(n: int, extra: int, seed: int) -> MetricGraph:
    return InstanceGenerator.generate(f"random-connected,{n},{extra}", seed).space("0").graph


def brute_force_delta(g: MetricGraph) -> Fraction:
    best = Fraction(0)
    for x, y, z, w in product(g.vertices, repeat=4):
        sums = sorted([g.distance(x, y) + g.distance(z, w),
                       g.distance(x, z) + g.distance(y, w),
                       g.distance(x, w) + g.distance(y, z)])
        best = max(best, (sums[2] - sums[1]) / 2)
    return best


@pytest.mark.parametrize("seed", range(50))
def test_distances_match_floyd_warshall(seed):
    """Exact distances agree with an independent all-pairs oracle"""
    g = random_graph(5 + seed % 30, seed % 7, seed)
    oracle = nx.floyd_warshall(g.nx_graph, weight="length")
    for u in g.vertices:
        for v in g.vertices:
            assert g.distance(u, v) == oracle[u][v], f"d({u}, {v}) differs on seed {seed}"


def test_geodesics_have_exact_length():
    """A geodesic is a path whose length is the distance between its ends"""
    g = random_graph(40, 15, 3)
    for u, v in [(0, 39), (5, 17), (12, 12), (38, 1)]:
        witness = g.geodesic(u, v)
        assert witness.start == u and witness.end == v
        assert g.path(witness.vertices).length == g.distance(u, v) == witness.length


def test_fractional_lengths(weighted_tree):
    assert weighted_tree.scale == 2
    assert weighted_tree.distance(3, 4) == 2
    assert weighted_tree.distance(3, 5) == Fraction(9, 2)
    assert weighted_tree.labels[0] == "root"


def test_geodesic_tie_break_prefers_smaller_ids():
    """Both ways round C6 have length 3; the one through 1 and 2 wins"""
    assert cycle_graph(6).geodesic(0, 3).vertices == (0, 1, 2, 3)


def test_invalid_graphs_are_rejected():
    with pytest.raises(InvariantViolation, match="not connected"):
        MetricGraph("split", 4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(InvariantViolation) as info:
        MetricGraph("bad", 3, [(0, 1, 0), (1, 1, 1), (1, 2, 1), (2, 1, 1)])
    assert len(info.value.failures) == 3, info.value.failures
    with pytest.raises(InvariantViolation):
        MetricGraph("empty", 0, [])


def test_unknown_vertex():
    with pytest.raises(DomainError):
        path_graph(3).distance(0, 7)


def test_trees_have_zero_delta():
    """Four-point delta vanishes on every tree, weighted or not"""
    specs = [f"tree-plain,{b},{d}" for b in (1, 2, 3) for d in (1, 2, 3)]
    graphs = [InstanceGenerator.generate(spec).space("0").graph for spec in specs]
    graphs += [random_graph(25, 0, seed) for seed in range(11)]
    for g in graphs:
        estimate = GraphGeometry.four_point_delta(g, "exhaustive")
        assert estimate.value == 0, f"{g.space_id} has delta {estimate.value}"
        assert estimate.exact


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_cycle_delta_matches_brute_force(n):
    g = cycle_graph(n)
    assert GraphGeometry.four_point_delta(g, "exhaustive").value == brute_force_delta(g)


def test_delta_is_at_most_the_diameter():
    for seed in range(5):
        g = random_graph(30, 20, seed)
        assert GraphGeometry.four_point_delta(g, "exhaustive").value <= g.diameter()


def test_sampled_delta_is_deterministic_lower_bound():
    g = random_graph(60, 40, 1)
    exact = GraphGeometry.four_point_delta(g, "exhaustive").value
    first = GraphGeometry.four_point_delta(g, "sampled", count=500, seed=9)
    second = GraphGeometry.four_point_delta(g, "sampled", count=500, seed=9)
    assert first.value == second.value
    assert first.value <= exact
    assert not first.exact


def test_delta_rejects_unknown_mode():
    with pytest.raises(DomainError):
        GraphGeometry.four_point_delta(path_graph(2), "fuzzy")


def test_quasigeodesic_certificate():
    """Walking out to 4 and back to 2 costs 4 on a zero-length subsegment"""
    g = path_graph(4)
    walk = g.path([0, 1, 2, 3, 4, 3, 2])
    assert GraphGeometry.certify_quasigeodesic(g, walk) == 4
    assert walk.quality == 4
    assert GraphGeometry.certify_quasigeodesic(g, g.geodesic(0, 4)) == 1


def test_projection_ties_and_hausdorff():
    g = path_graph(4)
    assert GraphGeometry.nearest_point_projection(g, 2, [0, 4]) == 0
    assert GraphGeometry.nearest_point_projection(g, 3, [0, 4]) == 4
    assert list(GraphGeometry.projection_map(g, [1, 3])) == [1, 1, 1, 3, 3]
    assert GraphGeometry.hausdorff_distance(g, [0, 1], [4]) == 4


def test_metric_sanity(path10):
    assert GraphGeometry.check_metric(path10).value == 0
    assert len(path10.pairs_within(1)) == 10
    assert len(path10.pairs_within(Fraction(1, 2))) == 0
    assert path10.eccentricity(5) == 5 and path10.diameter() == 10


def test_induced_subgraph_uses_its_own_metric():
    g = cycle_graph(6)
    sub, global_of = g.induced_subgraph([0, 1, 2, 3], "arc")
    assert global_of == [0, 1, 2, 3]
    assert sub.distance(0, 3) == 3
    with pytest.raises(DomainError):
        g.induced_subgraph([0, 3], "apart")


def test_builder_keeps_shorter_duplicates():
    builder = GraphBuilder("built")
    a, b = builder.add_vertex("a"), builder.add_vertex("b")
    builder.add_edge(a, b, 3)
    builder.add_edge(a, b, Fraction(1, 2), keep_shorter=True)
    g = builder.build()
    assert g.distance(a, b) == Fraction(1, 2)
    assert g.labels == {0: "a", 1: "b"}

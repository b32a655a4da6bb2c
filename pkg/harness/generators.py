"""
Seeded generators of trees of spaces

Instances are named by spec strings of the form "name,arg,arg,...", e.g.
"tree-plain,2,3" or "segment-automorphism,4,a=a;b=ba,1".
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

import numpy as np

from geometry.electric import HoroFamily
from geometry.errors import DomainError
from geometry.metric_graph import MetricGraph
from harness.free_group import FreeGroupBall, parse_word_map
from trees.tree_spaces import EdgeSpace, TreeOfSpaces, VertexSpace

logger = logging.getLogger(__name__)

RANDOM_LENGTHS = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


def _as_int(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise DomainError(f"{name} must be an integer, got {value!r}") from None


def _relabel(graph: MetricGraph, family: HoroFamily, space_id: str) -> Tuple[MetricGraph, HoroFamily]:
    copy = MetricGraph(space_id, graph.n, graph.edges(), graph.labels)
    return copy, HoroFamily(space_id, dict(family.members), family.separation)


class InstanceGenerator:
    """Named instance families, each deterministic in (spec, seed)"""

    @staticmethod
    def parse_spec(spec: str) -> Tuple[str, List[str]]:
        parts = [part.strip() for part in spec.split(",")]
        if not parts[0]:
            raise DomainError("Empty generator spec")
        return parts[0], parts[1:]

    @staticmethod
    def generate(spec: str, seed: int = 0) -> TreeOfSpaces:
        """
        Build the instance named by a spec string

        Args:
            spec: Generator name followed by its comma-separated arguments
            seed: Seed for randomized generators

        Returns:
            TreeOfSpaces whose instance id is the spec string

        Raises:
            DomainError: unknown generator or bad arguments
        """
        name, args = InstanceGenerator.parse_spec(spec)
        builders: Dict[str, Callable[..., TreeOfSpaces]] = {
            "free-peripheral": InstanceGenerator.free_peripheral,
            "tree-plain": InstanceGenerator.tree_plain,
            "segment-identity": InstanceGenerator.segment_identity,
            "segment-automorphism": InstanceGenerator.segment_automorphism,
            "random-connected": InstanceGenerator.random_connected,
        }
        if name not in builders:
            raise DomainError(f"Unknown generator {name!r}; known: {', '.join(sorted(builders))}")
        if name == "random-connected":
            tos = builders[name](*args, seed=seed)
        else:
            tos = builders[name](*args)
        logger.debug(f"Generated {tos.instance_id} with {len(tos.vertex_spaces)} vertex spaces")
        return tos

    @staticmethod
    def space(text: str, space_id: str) -> Tuple[MetricGraph, HoroFamily]:
        """
        A vertex space from a short description

        "tree:b:d" balanced tree, "path:n", "cycle:n", "free:R" free-group
        ball with its coset segments.
        """
        kind, *args = text.split(":")
        if kind == "tree" and len(args) == 2:
            b, d = _as_int(args[0], "branching"), _as_int(args[1], "depth")
            if b < 1 or d < 0:
                raise DomainError(f"Bad tree parameters {text!r}")
            n = sum(b ** k for k in range(d + 1))
            edges = [(i, b * i + c, 1) for i in range(n) for c in range(1, b + 1) if b * i + c < n]
            graph = MetricGraph(space_id, n, edges)
            return graph, HoroFamily.empty(graph)
        if kind == "path" and len(args) == 1:
            n = _as_int(args[0], "length")
            graph = MetricGraph(space_id, n + 1, [(i, i + 1, 1) for i in range(n)])
            return graph, HoroFamily.empty(graph)
        if kind == "cycle" and len(args) == 1:
            n = _as_int(args[0], "length")
            if n < 3:
                raise DomainError(f"A cycle needs at least 3 vertices, got {n}")
            graph = MetricGraph(space_id, n, [(i, (i + 1) % n, 1) for i in range(n)])
            return graph, HoroFamily.empty(graph)
        if kind == "free" and len(args) == 1:
            ball = FreeGroupBall(_as_int(args[0], "radius"), space_id)
            return ball.graph, ball.family
        raise DomainError(f"Unknown space description {text!r}")

    @staticmethod
    def single_vertex(instance_id: str, graph: MetricGraph, family: HoroFamily) -> TreeOfSpaces:
        return TreeOfSpaces(instance_id, "0", [], {"0": VertexSpace("0", graph, family)}, {})

    @staticmethod
    def free_peripheral(radius: str = "3") -> TreeOfSpaces:
        instance_id = f"free-peripheral,{radius}"
        ball = FreeGroupBall(_as_int(radius, "radius"), f"{instance_id}/X0")
        return InstanceGenerator.single_vertex(instance_id, ball.graph, ball.family)

    @staticmethod
    def tree_plain(branching: str = "2", depth: str = "3") -> TreeOfSpaces:
        instance_id = f"tree-plain,{branching},{depth}"
        graph, family = InstanceGenerator.space(f"tree:{branching}:{depth}", f"{instance_id}/X0")
        return InstanceGenerator.single_vertex(instance_id, graph, family)

    @staticmethod
    def segment_identity(base: str = "tree:2:3", length: str = "2") -> TreeOfSpaces:
        """Copies of one space over a path of the given length, glued by identities"""
        instance_id = f"segment-identity,{base},{length}"
        steps = _as_int(length, "length")
        if steps < 1:
            raise DomainError(f"Segment length must be positive, got {steps}")
        graph, family = InstanceGenerator.space(base, f"{instance_id}/Y")
        vertex_spaces = {}
        for v in range(steps + 1):
            g, f = _relabel(graph, family, f"{instance_id}/X{v}")
            vertex_spaces[str(v)] = VertexSpace(str(v), g, f)
        edge_spaces = {}
        identity = tuple(range(graph.n))
        for v in range(steps):
            name = f"e{v}"
            g, f = _relabel(graph, family, f"{instance_id}/{name}")
            edge_spaces[name] = EdgeSpace(name, g, f, {str(v): identity, str(v + 1): identity})
        return TreeOfSpaces(instance_id, "0", [(str(v), str(v + 1)) for v in range(steps)],
                            vertex_spaces, edge_spaces)

    @staticmethod
    def segment_automorphism(radius: str = "3", word_map: str = "a=a;b=ba", length: str = "1") -> TreeOfSpaces:
        """
        Free-group balls over a path, each edge glued by inclusion upstairs
        and by the automorphism downstairs

        Edge spaces are balls small enough that the automorphism keeps
        them inside the vertex ball.
        """
        instance_id = f"segment-automorphism,{radius},{word_map},{length}"
        R, steps = _as_int(radius, "radius"), _as_int(length, "length")
        if steps < 1:
            raise DomainError(f"Segment length must be positive, got {steps}")
        phi = parse_word_map(word_map)
        if phi["a"] != "a":
            raise DomainError(f"The automorphism must fix a to preserve the coset segments, got a -> {phi['a']}")
        L = max(len(phi["a"]), len(phi["b"]))
        balls = [FreeGroupBall(R, f"{instance_id}/X{v}") for v in range(steps + 1)]
        vertex_spaces = {str(v): VertexSpace(str(v), ball.graph, ball.family) for v, ball in enumerate(balls)}
        edge_spaces = {}
        for v in range(steps):
            name = f"e{v}"
            small = FreeGroupBall((R - 1) // L, f"{instance_id}/{name}")
            maps = {str(v): tuple(small.inclusion_into(balls[v])),
                    str(v + 1): tuple(small.map_into(balls[v + 1], phi))}
            edge_spaces[name] = EdgeSpace(name, small.graph, small.family, maps,
                                          declared_K=Fraction(2 * L), declared_eps=Fraction(2 * L))
        return TreeOfSpaces(instance_id, "0", [(str(v), str(v + 1)) for v in range(steps)],
                            vertex_spaces, edge_spaces)

    @staticmethod
    def random_connected(n: str = "30", extra: str = "10", seed: int = 0) -> TreeOfSpaces:
        """Random spanning tree plus extra chords, lengths drawn from halves up to 2"""
        instance_id = f"random-connected,{n},{extra}"
        size, chords = _as_int(n, "vertex count"), _as_int(extra, "extra edge count")
        if size < 1 or chords < 0:
            raise DomainError(f"Bad random graph parameters {n}, {extra}")
        rng = np.random.default_rng(seed)
        edges: Dict[Tuple[int, int], Fraction] = {}
        for v in range(1, size):
            u = int(rng.integers(0, v))
            edges[(u, v)] = RANDOM_LENGTHS[int(rng.integers(0, len(RANDOM_LENGTHS)))]
        possible = size * (size - 1) // 2
        while len(edges) < min(possible, size - 1 + chords):
            u, v = sorted(int(x) for x in rng.integers(0, size, size=2))
            if u != v and (u, v) not in edges:
                edges[(u, v)] = RANDOM_LENGTHS[int(rng.integers(0, len(RANDOM_LENGTHS)))]
        graph = MetricGraph(f"{instance_id}/X0", size, [(u, v, w) for (u, v), w in edges.items()])
        return InstanceGenerator.single_vertex(instance_id, graph, HoroFamily.empty(graph))

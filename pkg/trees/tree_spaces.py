"""
Trees of spaces, their total space, the induced tree of coned-off spaces and the cone locus
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import DENSITY_FLAG_THRESHOLD, MATRIX_LIMIT, SAMPLE_POOL_SIZE
from geometry.electric import ConedSpace, Electrifier, GluedSpace, HoroFamily
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import GraphBuilder, Length, MetricGraph, as_fraction, max_ratio
from geometry.partial_electro import CylinderTarget, PartialElectroSpace, PartialElectrocution

logger = logging.getLogger(__name__)


def vertex_key(name: str) -> Tuple:
    """Sort key putting numeric base-vertex names in numeric order"""
    return (0, int(name), "") if name.isdigit() else (1, 0, name)


@dataclass
class VertexSpace:
    name: str
    graph: MetricGraph
    family: HoroFamily


@dataclass
class EdgeSpace:
    """Edge space with its two inclusion maps, one image per edge-space vertex"""
    name: str
    graph: MetricGraph
    family: HoroFamily
    maps: Dict[str, Tuple[int, ...]]
    declared_K: Fraction = Fraction(1)
    declared_eps: Fraction = Fraction(0)
    _inverse: Dict[str, Dict[int, List[int]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.maps = {str(end): tuple(int(x) for x in image) for end, image in self.maps.items()}
        self.declared_K = as_fraction(self.declared_K)
        self.declared_eps = as_fraction(self.declared_eps)

    @property
    def ends(self) -> Tuple[str, ...]:
        return tuple(self.maps)

    def other(self, end: str) -> str:
        return next(v for v in self.maps if v != end)

    def image(self, end: str) -> Tuple[int, ...]:
        return self.maps[end]

    def preimage(self, end: str, p: int) -> List[int]:
        """Edge-space vertices sent to p, in increasing order"""
        if end not in self._inverse:
            inverse: Dict[int, List[int]] = {}
            for x, y in enumerate(self.maps[end]):
                inverse.setdefault(y, []).append(x)
            self._inverse[end] = inverse
        return self._inverse[end].get(int(p), [])


class TreeOfSpaces:
    """
    Finite base tree with a vertex space per vertex and an edge space per edge

    The tree is rooted at `root`; children are visited in base-vertex order.
    """

    def __init__(self, instance_id: str, root: str, tree_edges: Iterable[Tuple[str, str]],
                 vertex_spaces: Dict[str, VertexSpace], edge_spaces: Dict[str, EdgeSpace]):
        self.instance_id = instance_id
        self.root = str(root)
        self.vertex_spaces = {str(k): v for k, v in vertex_spaces.items()}
        self.edge_spaces = dict(edge_spaces)
        self.tree = nx.Graph()
        self.tree.add_nodes_from(self.vertex_spaces)
        self.tree.add_edges_from((str(a), str(b)) for a, b in tree_edges)

        failures = self._structure_failures()
        if failures:
            raise InvariantViolation(f"Tree of spaces {instance_id} is malformed", failures)

        self.parent: Dict[str, Optional[str]] = {self.root: None}
        self.children: Dict[str, List[str]] = {}
        self.order: List[str] = []
        frontier = [self.root]
        while frontier:
            v = frontier.pop(0)
            self.order.append(v)
            kids = sorted((w for w in self.tree.neighbors(v) if w != self.parent[v]), key=vertex_key)
            self.children[v] = kids
            for w in kids:
                self.parent[w] = v
            frontier.extend(kids)
        self.position = {v: i for i, v in enumerate(self.order)}

    def _structure_failures(self) -> List[str]:
        failures = []
        if self.root not in self.vertex_spaces:
            failures.append(f"root {self.root} has no vertex space")
        if set(self.tree.nodes) != set(self.vertex_spaces):
            failures.append("tree vertices and vertex spaces differ")
        if self.tree.number_of_nodes() == 0 or not nx.is_tree(self.tree):
            failures.append("base graph is not a tree")
        for name, space in self.vertex_spaces.items():
            failures.extend(f"X_{name}: {f}" for f in space.family.validate(space.graph))
        seen = set()
        for name, edge in self.edge_spaces.items():
            if len(edge.maps) != 2:
                failures.append(f"edge space {name} needs exactly two maps")
                continue
            a, b = edge.ends
            if not self.tree.has_edge(a, b):
                failures.append(f"edge space {name} joins {a} and {b}, which are not adjacent")
                continue
            seen.add(frozenset((a, b)))
            failures.extend(f"X_{name}: {f}" for f in edge.family.validate(edge.graph))
            for end in edge.ends:
                image = edge.maps[end]
                target = self.vertex_spaces[end].graph
                if len(image) != edge.graph.n:
                    failures.append(f"map of {name} into {end} has {len(image)} entries for {edge.graph.n} vertices")
                bad = [y for y in image if not target.has_vertex(y)]
                if bad:
                    failures.append(f"map of {name} into {end} leaves its target at {bad[:5]}")
        for a, b in self.tree.edges:
            if frozenset((a, b)) not in seen:
                failures.append(f"tree edge {a}-{b} has no edge space")
        if len(seen) != len(self.edge_spaces):
            failures.append("two edge spaces share a tree edge")
        return failures

    def space(self, v: str) -> VertexSpace:
        return self.vertex_spaces[v]

    def edge_between(self, v: str, w: str) -> EdgeSpace:
        for edge in self.edge_spaces.values():
            if set(edge.ends) == {v, w}:
                return edge
        raise DomainError(f"No edge space between {v} and {w}")

    def oriented_edges(self) -> List[Tuple[EdgeSpace, str, str]]:
        """(edge space, parent, child) in base-vertex order"""
        return [(self.edge_between(v, w), v, w) for v in self.order for w in self.children[v]]

    def depth_of(self, v: str) -> int:
        depth = 0
        while self.parent[v] is not None:
            v = self.parent[v]
            depth += 1
        return depth

    def path_to_root(self, v: str) -> List[str]:
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path


class TotalSpace:
    """Assembled total space X: all vertex spaces plus unit rungs"""

    def __init__(self, graph: MetricGraph, tos: TreeOfSpaces, offsets: Dict[str, int]):
        self.graph = graph
        self.tos = tos
        self.offsets = offsets
        self.fiber = np.zeros(graph.n, dtype=np.int64)
        self.local = np.zeros(graph.n, dtype=np.int64)
        self.member_of = np.full(graph.n, -1, dtype=np.int64)
        self.vertex_members: List[Tuple[str, int]] = []
        for v in tos.order:
            space = tos.space(v)
            span = slice(offsets[v], offsets[v] + space.graph.n)
            self.fiber[span] = tos.position[v]
            self.local[span] = np.arange(space.graph.n)
            for j, vertices in enumerate(space.family.members.values()):
                self.member_of[[offsets[v] + x for x in vertices]] = len(self.vertex_members)
                self.vertex_members.append((v, j))

    @property
    def n(self) -> int:
        return self.graph.n

    def embed(self, v: str, x: int) -> int:
        return self.offsets[v] + int(x)

    def fiber_name(self, x: int) -> str:
        return self.tos.order[int(self.fiber[x])]

    def fiber_vertices(self, v: str) -> range:
        return range(self.offsets[v], self.offsets[v] + self.tos.space(v).graph.n)

    def off_member(self, x: int) -> bool:
        return self.member_of[x] < 0


@dataclass
class ConeComponent:
    """A component of the cone locus with its maximal cone-subtree"""
    name: str
    nodes: List[Tuple[str, int]]
    tree: MetricGraph
    vertices: List[int]
    collapse: Dict[int, int]

    @property
    def base_vertices(self) -> List[str]:
        return [v for v, _ in self.nodes]


@dataclass
class ConeLocus:
    components: List[ConeComponent]
    node_index: Dict[Tuple[str, int], Tuple[int, int]]

    def family(self, total: TotalSpace) -> HoroFamily:
        """The maximal cone-subtrees as a family on the total space"""
        return HoroFamily.separated(total.graph, {c.name: c.vertices for c in self.components})

    def targets(self) -> Dict[str, CylinderTarget]:
        """Each cone-subtree's base tree as the target of its collapse map"""
        return {c.name: CylinderTarget(c.tree, dict(c.collapse)) for c in self.components}


class ConedTree:
    """
    Induced tree of coned-off spaces TC(X)

    Vertices of X keep their ids; one cone vertex per cone-locus node
    follows, in component order.
    """

    def __init__(self, graph: MetricGraph, total: TotalSpace, locus: ConeLocus, cone_id: Dict[Tuple[str, int], int]):
        self.graph = graph
        self.total = total
        self.locus = locus
        self.cone_id = cone_id
        tos = total.tos
        self.fiber = np.zeros(graph.n, dtype=np.int64)
        self.fiber[:total.n] = total.fiber
        self.local = np.zeros(graph.n, dtype=np.int64)
        self.local[:total.n] = total.local
        self._embed: Dict[str, np.ndarray] = {}
        for v in tos.order:
            space = tos.space(v)
            embed = np.zeros(space.graph.n + len(space.family), dtype=np.int64)
            embed[:space.graph.n] = np.arange(total.offsets[v], total.offsets[v] + space.graph.n)
            for j in range(len(space.family)):
                tc = cone_id[(v, j)]
                embed[space.graph.n + j] = tc
                self.fiber[tc] = tos.position[v]
                self.local[tc] = space.graph.n + j
            self._embed[v] = embed

    def embed(self, v: str) -> np.ndarray:
        """Coned-local ids of X^_v to TC ids"""
        return self._embed[v]

    def fiber_name(self, x: int) -> str:
        return self.total.tos.order[int(self.fiber[x])]

    def is_cone(self, x: int) -> bool:
        return x >= self.total.n

    def off_member(self, x: int) -> bool:
        return x < self.total.n and self.total.member_of[x] < 0


@dataclass
class MapReport:
    edge: str
    end: str
    injective: bool
    K_at_zero: Optional[Fraction]
    eps_at_declared: Optional[Fraction]
    declared_K: Fraction
    declared_eps: Fraction
    coned: bool = False
    exhaustive: bool = True

    @property
    def passed(self) -> bool:
        return self.injective and self.eps_at_declared is not None and self.eps_at_declared <= self.declared_eps


@dataclass
class ValidationReport:
    instance_id: str
    maps: List[MapReport] = field(default_factory=list)
    coned_maps: List[MapReport] = field(default_factory=list)
    condition5: List[str] = field(default_factory=list)
    density: List[Dict] = field(default_factory=list)
    properness: Dict[str, List[Dict]] = field(default_factory=dict)
    coned_properness: Dict[str, List[Dict]] = field(default_factory=dict)
    locus_components: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def raise_for_failures(self):
        if self.failures:
            raise InvariantViolation(f"Tree of spaces {self.instance_id} failed validation", self.failures)


def _pair_block(src: MetricGraph, dst: MetricGraph, image: Sequence[int], count: Optional[int], seed: int):
    domain = np.arange(src.n)
    image = np.asarray(image, dtype=np.int64)
    if count is None and src.n > MATRIX_LIMIT:
        count = SAMPLE_POOL_SIZE
    exhaustive = count is None or src.n <= count
    if not exhaustive:
        rng = np.random.default_rng(seed)
        domain = np.sort(rng.choice(src.n, size=count, replace=False))
    d_src = src.scaled_rows(domain.tolist())[:, domain]
    targets, inverse = np.unique(image[domain], return_inverse=True)
    d_dst = dst.scaled_rows(targets.tolist())[:, targets][inverse][:, inverse]
    upper = np.triu_indices(len(domain), k=1)
    return d_src[upper], d_dst[upper], exhaustive


class TreeBuilder:
    """Validation and assembly of trees of spaces"""

    @staticmethod
    def measure_qi(src: MetricGraph, dst: MetricGraph, image: Sequence[int], declared_K: Length,
                   count: Optional[int] = None, seed: int = 0) -> Tuple[bool, Optional[Fraction], Fraction, bool]:
        """
        Distortion of a vertex map

        Returns:
            (injective, least K with d/K <= d' <= K*d, least eps with
            d/K0 - eps <= d' <= K0*d + eps for the declared K0, exhaustive)
        """
        d_src, d_dst, exhaustive = _pair_block(src, dst, image, count, seed)
        injective = len(set(int(y) for y in image)) == len(image)
        K = as_fraction(declared_K)
        s, t = src.scale, dst.scale
        if d_src.size == 0:
            return injective, Fraction(1), Fraction(0), exhaustive
        k_zero = None
        if injective:
            num = np.concatenate([d_dst * s, d_src * t])
            den = np.concatenate([d_src * t, d_dst * s])
            k_zero = max(Fraction(1), max_ratio(num, den)[0])
        p, q = K.numerator, K.denominator
        over = int((q * d_dst * s - p * d_src * t).max())
        under = int((q * d_src * t - p * d_dst * s).max())
        eps = max(Fraction(0), Fraction(over, q * s * t), Fraction(under, p * s * t))
        return injective, k_zero, eps, exhaustive

    @staticmethod
    def properness_table(src: MetricGraph, dst: MetricGraph, image: Sequence[int],
                         count: Optional[int] = None, seed: int = 0) -> List[Dict]:
        """
        N(M) = largest source distance among pairs at most M apart in the target

        One row per integer M from 0 to the largest target distance seen.
        """
        d_src, d_dst, _ = _pair_block(src, dst, image, count, seed)
        if d_src.size == 0:
            return [{"M": 0, "N": Fraction(0)}]
        order = np.argsort(d_dst, kind="stable")
        reach = d_dst[order]
        envelope = np.maximum.accumulate(d_src[order])
        table = []
        for M in range(0, math.ceil(Fraction(int(reach[-1]), dst.scale)) + 1):
            index = int(np.searchsorted(reach, M * dst.scale, side="right")) - 1
            table.append({"M": M, "N": src.to_fraction(envelope[index]) if index >= 0 else Fraction(0)})
        return table

    @staticmethod
    def incidence(tos: TreeOfSpaces) -> Tuple[Dict[Tuple[str, str, int], int], List[str]]:
        """
        Vertex-member containing the image of each edge-member, plus condition 5 failures

        Keys are (edge name, end, edge-member index).
        """
        table: Dict[Tuple[str, str, int], int] = {}
        failures: List[str] = []
        for name, edge in tos.edge_spaces.items():
            for end in edge.ends:
                target = tos.space(end)
                owner = target.family.member_index()
                image = edge.image(end)
                used: Dict[int, str] = {}
                for j, (member, vertices) in enumerate(edge.family.members.items()):
                    holders = {owner.get(image[x]) for x in vertices}
                    if len(holders) != 1 or None in holders:
                        failures.append(f"{name}: member {member} does not map into a single member of X_{end}")
                        continue
                    alpha = holders.pop()
                    if alpha in used:
                        failures.append(f"{name}: members {used[alpha]} and {member} both map into "
                                        f"{target.family.names[alpha]} of X_{end}")
                    used[alpha] = member
                    table[(name, end, j)] = alpha
                edge_owner = edge.family.member_index()
                for alpha, (vname, vertices) in enumerate(target.family.members.items()):
                    inside = set(vertices)
                    pre = {x for x, y in enumerate(image) if y in inside}
                    if not pre:
                        continue
                    sources = {edge_owner.get(x) for x in pre}
                    if len(sources) != 1 or None in sources or \
                            pre != set(edge.family.vertices_of(next(iter(sources)))):
                        failures.append(f"{name}: preimage of {vname} in X_{end} is not exactly one member")
        return table, failures

    @staticmethod
    def validate(tos: TreeOfSpaces, count: Optional[int] = None, seed: int = 0) -> ValidationReport:
        """
        Measure every inclusion map and check the peripheral conditions

        Args:
            tos: Tree of spaces
            count: Sample this many vertices per scan instead of all pairs
            seed: Sampling seed

        Returns:
            ValidationReport with an itemized failure list
        """
        report = ValidationReport(tos.instance_id)
        for name, edge in tos.edge_spaces.items():
            for end in edge.ends:
                injective, k_zero, eps, exhaustive = TreeBuilder.measure_qi(
                    edge.graph, tos.space(end).graph, edge.image(end), edge.declared_K, count, seed)
                record = MapReport(name, end, injective, k_zero, eps, edge.declared_K, edge.declared_eps,
                                   exhaustive=exhaustive)
                report.maps.append(record)
                if not injective:
                    report.failures.append(f"{name}: map into {end} is not injective")
                elif not record.passed:
                    report.failures.append(f"{name}: map into {end} needs eps {eps} at K = {edge.declared_K}, "
                                           f"declared {edge.declared_eps}")

        table, condition5 = TreeBuilder.incidence(tos)
        report.condition5 = condition5
        report.failures.extend(condition5)

        for name, edge in tos.edge_spaces.items():
            for end in edge.ends:
                target = tos.space(end)
                image = edge.image(end)
                for j, vertices in enumerate(edge.family.members.values()):
                    alpha = table.get((name, end, j))
                    if alpha is None:
                        continue
                    row = target.graph.set_distance_row(image[x] for x in vertices)
                    density = target.graph.to_fraction(row[list(target.family.vertices_of(alpha))].max())
                    flagged = density > DENSITY_FLAG_THRESHOLD
                    report.density.append({"edge": name, "end": end, "member": edge.family.names[j],
                                           "target": target.family.names[alpha], "density": density,
                                           "flagged": flagged})
                    if flagged:
                        logger.warning(f"{name}: image of {edge.family.names[j]} is {density}-dense in "
                                       f"{target.family.names[alpha]}")

        if report.failures:
            return report

        geometry = TreeGeometry(tos)
        locus = geometry.locus
        report.locus_components = len(locus.components)
        total, coned_tree = geometry.total, geometry.coned_tree
        for v in tos.order:
            space = tos.space(v)
            report.properness[v] = TreeBuilder.properness_table(
                space.graph, total.graph, list(total.fiber_vertices(v)), count, seed)
            report.coned_properness[v] = TreeBuilder.properness_table(
                geometry.coned(v).graph, coned_tree.graph, coned_tree.embed(v), count, seed)

        for name, edge in tos.edge_spaces.items():
            coned_edge = Electrifier.cone_off(edge.graph, edge.family)
            for end in edge.ends:
                image = list(edge.image(end))
                n_v = tos.space(end).graph.n
                image += [n_v + table[(name, end, j)] for j in range(len(edge.family))]
                injective, k_zero, eps, exhaustive = TreeBuilder.measure_qi(
                    coned_edge.graph, geometry.coned(end).graph, image, edge.declared_K, count, seed)
                report.coned_maps.append(MapReport(name, end, injective, k_zero, eps, edge.declared_K,
                                                   edge.declared_eps, coned=True, exhaustive=exhaustive))
        logger.info(f"Validated {tos.instance_id}: {len(report.maps)} maps, "
                    f"{report.locus_components} cone-locus components")
        return report

    @staticmethod
    def assemble_total(tos: TreeOfSpaces) -> TotalSpace:
        """Disjoint union of the vertex spaces joined by one unit rung per edge-space vertex"""
        builder = GraphBuilder(f"{tos.instance_id}/X")
        offsets = {}
        for v in tos.order:
            graph = tos.space(v).graph
            offsets[v] = builder.copy_graph(graph)
            for x in range(graph.n):
                builder.labels[offsets[v] + x] = f"{v}:{graph.labels.get(x, x)}"
        for edge, parent, child in tos.oriented_edges():
            for x in range(edge.graph.n):
                builder.add_edge(offsets[parent] + edge.image(parent)[x], offsets[child] + edge.image(child)[x], 1)
        return TotalSpace(builder.build(), tos, offsets)

    @staticmethod
    def cone_locus(tos: TreeOfSpaces, total: TotalSpace) -> ConeLocus:
        """
        Components of the cone locus and their maximal cone-subtrees

        Raises:
            InvariantViolation: the locus has a cycle or the peripheral structure is not type-preserving
        """
        table, failures = TreeBuilder.incidence(tos)
        if failures:
            raise InvariantViolation(f"Cone locus of {tos.instance_id} is undefined", failures)
        locus = nx.Graph()
        locus.add_nodes_from(total.vertex_members)
        links = 0
        for edge, parent, child in tos.oriented_edges():
            for j in range(len(edge.family)):
                locus.add_edge((parent, table[(edge.name, parent, j)]), (child, table[(edge.name, child, j)]))
                links += 1
        if links != locus.number_of_edges() or not nx.is_forest(locus):
            raise InvariantViolation(f"Cone locus of {tos.instance_id} has a cycle")

        def key(node):
            return tos.position[node[0]], node[1]

        components = []
        node_index = {}
        for nodes in sorted((sorted(c, key=key) for c in nx.connected_components(locus)), key=lambda c: key(c[0])):
            name = f"C{len(components)}"
            local = {node: i for i, node in enumerate(nodes)}
            tree = MetricGraph(f"{tos.instance_id}/{name}", len(nodes),
                               [(local[a], local[b], 1) for a, b in locus.subgraph(nodes).edges],
                               {i: f"{v}/{tos.space(v).family.names[j]}" for i, (v, j) in enumerate(nodes)})
            collapse = {}
            for i, (v, j) in enumerate(nodes):
                node_index[(v, j)] = (len(components), i)
                for x in tos.space(v).family.vertices_of(j):
                    collapse[total.embed(v, x)] = i
            components.append(ConeComponent(name, nodes, tree, sorted(collapse), collapse))
        return ConeLocus(components, node_index)

    @staticmethod
    def induced_coned_tree(tos: TreeOfSpaces, total: TotalSpace, locus: ConeLocus) -> ConedTree:
        """
        TC(X): X with every vertex-member coned off and unit rungs between
        the cone points that an edge-member links
        """
        builder = GraphBuilder(f"{tos.instance_id}/TC")
        builder.copy_graph(total.graph)
        cone_id = {}
        for component in locus.components:
            for v, j in component.nodes:
                cone = builder.add_vertex(f"cone:{v}/{tos.space(v).family.names[j]}")
                cone_id[(v, j)] = cone
                for x in tos.space(v).family.vertices_of(j):
                    builder.add_edge(total.embed(v, x), cone, Fraction(1, 2))
        for component in locus.components:
            for a, b, length in component.tree.edges():
                builder.add_edge(cone_id[component.nodes[a]], cone_id[component.nodes[b]], length)
        return ConedTree(builder.build(), total, locus, cone_id)

    @staticmethod
    def coned_tree_as_pel(total: TotalSpace, locus: ConeLocus, cylinder_length: Length = Fraction(1, 2),
                          measure: bool = False) -> PartialElectroSpace:
        """Partial electrocution of X along the cone-subtrees, with their base trees as targets"""
        return PartialElectrocution.partially_electrocute(total.graph, locus.family(total), locus.targets(),
                                                          cylinder_length=cylinder_length, measure=measure)


class TreeGeometry:
    """Lazily built spaces of one tree of spaces, shared by the ladder and the harness"""

    def __init__(self, tos: TreeOfSpaces, depth: Optional[int] = None):
        self.tos = tos
        self.depth = depth
        self._coned: Dict[str, ConedSpace] = {}
        self._glued: Dict[str, GluedSpace] = {}

    @cached_property
    def total(self) -> TotalSpace:
        return TreeBuilder.assemble_total(self.tos)

    @cached_property
    def locus(self) -> ConeLocus:
        return TreeBuilder.cone_locus(self.tos, self.total)

    @cached_property
    def coned_tree(self) -> ConedTree:
        return TreeBuilder.induced_coned_tree(self.tos, self.total, self.locus)

    def coned(self, v: str) -> ConedSpace:
        if v not in self._coned:
            space = self.tos.space(v)
            self._coned[v] = Electrifier.cone_off(space.graph, space.family)
        return self._coned[v]

    def glued(self, v: str) -> GluedSpace:
        if v not in self._glued:
            space = self.tos.space(v)
            self._glued[v] = Electrifier.glue_cones(space.graph, space.family, self.depth)
        return self._glued[v]

    @property
    def root(self) -> str:
        return self.tos.root

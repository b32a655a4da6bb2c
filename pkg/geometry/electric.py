"""
Electrification, combinatorial horoballs and glued spaces
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import HOROBALL_SCAN_LIMIT, MATRIX_LIMIT
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import (
    GraphBuilder,
    GraphGeometry,
    Length,
    Measurement,
    MetricGraph,
    PathWitness,
    as_fraction,
)

logger = logging.getLogger(__name__)

CONE_LENGTH = Fraction(1, 2)


@dataclass
class HoroFamily:
    """Named, pairwise disjoint vertex subsets of a host graph"""
    host_id: str
    members: Dict[str, Tuple[int, ...]]
    separation: Fraction = Fraction(1)

    def __post_init__(self):
        self.members = {str(name): tuple(sorted(int(v) for v in vertices))
                        for name, vertices in self.members.items()}
        self.separation = as_fraction(self.separation)

    @classmethod
    def separated(cls, host: MetricGraph, members: Dict[str, Iterable[int]]) -> "HoroFamily":
        """Family whose declared separation is the measured one (1 for fewer than two members)"""
        family = cls(host.space_id, dict(members))
        measured = family.measured_separation(host)
        family.separation = measured if measured is not None else Fraction(1)
        return family

    @classmethod
    def empty(cls, host: MetricGraph) -> "HoroFamily":
        return cls(host.space_id, {})

    @property
    def names(self) -> List[str]:
        return list(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def member_index(self) -> Dict[int, int]:
        return {v: i for i, vertices in enumerate(self.members.values()) for v in vertices}

    def vertices_of(self, index: int) -> Tuple[int, ...]:
        return list(self.members.values())[index]

    def measured_separation(self, host: MetricGraph) -> Optional[Fraction]:
        """Least host distance between two different members"""
        groups = [vertices for vertices in self.members.values() if vertices]
        if len(groups) < 2:
            return None
        best = None
        for i, vertices in enumerate(groups[:-1]):
            row = host.set_distance_row(vertices)
            rest = [v for other in groups[i + 1:] for v in other]
            value = int(row[rest].min())
            best = value if best is None else min(best, value)
        return host.to_fraction(best)

    def validate(self, host: MetricGraph) -> List[str]:
        failures = []
        if self.host_id != host.space_id:
            failures.append(f"family belongs to {self.host_id}, not {host.space_id}")
        if self.separation <= 0:
            failures.append(f"separation must be positive, got {self.separation}")
        owner: Dict[int, str] = {}
        for name, vertices in self.members.items():
            if not vertices:
                failures.append(f"member {name} is empty")
            for v in vertices:
                if not host.has_vertex(v):
                    failures.append(f"member {name} uses unknown vertex {v}")
                elif v in owner:
                    failures.append(f"members {owner[v]} and {name} overlap at {v}")
                else:
                    owner[v] = name
        if not failures:
            measured = self.measured_separation(host)
            if measured is not None and measured < self.separation:
                failures.append(f"members are {measured} apart, below the declared separation {self.separation}")
        return failures

    def check(self, host: MetricGraph):
        failures = self.validate(host)
        if failures:
            raise InvariantViolation(f"Family on {host.space_id} is invalid", failures)


class PeripheralSpace:
    """
    A graph together with the peripheral family of the host it extends

    `member_at` tells which family member a vertex belongs to (host member
    vertices, cone points, horoball levels and cylinder targets all count),
    `base_at` returns the host vertex a vertex is, if any.
    """

    def __init__(self, graph: MetricGraph, host: MetricGraph, family: HoroFamily,
                 member_of: np.ndarray, base_of: np.ndarray):
        self.graph = graph
        self.host = host
        self.family = family
        self._member_of = member_of
        self._base_of = base_of
        self._names = family.names
        self._intrinsic: Dict[int, Tuple[MetricGraph, Dict[int, int]]] = {}

    @staticmethod
    def _host_member_array(host: MetricGraph, family: HoroFamily, size: int) -> np.ndarray:
        member_of = np.full(size, -1, dtype=np.int64)
        for v, i in family.member_index().items():
            member_of[v] = i
        return member_of

    def member_at(self, v: int) -> Optional[int]:
        index = int(self._member_of[v])
        return None if index < 0 else index

    def member_name(self, index: int) -> str:
        return self._names[index]

    def base_at(self, v: int) -> Optional[int]:
        base = int(self._base_of[v])
        return None if base < 0 else base

    def off_member(self, v: int) -> bool:
        return self.base_at(v) is not None and self.member_at(v) is None

    def off_member_vertices(self) -> List[int]:
        return [v for v in range(self.host.n) if self._member_of[v] < 0]

    def intrinsic(self, index: int) -> Tuple[MetricGraph, Dict[int, int]]:
        """Induced-subgraph metric of a member and its host-to-local id map"""
        if index not in self._intrinsic:
            name = self._names[index]
            graph, global_of = self.host.induced_subgraph(self.family.vertices_of(index),
                                                          f"{self.host.space_id}/{name}")
            self._intrinsic[index] = (graph, {g: i for i, g in enumerate(global_of)})
        return self._intrinsic[index]

    def traversal_length(self, index: int, a: int, b: int) -> Fraction:
        """Intrinsic distance between two host vertices of a member, host distance if it is disconnected"""
        try:
            graph, local_of = self.intrinsic(index)
        except DomainError:
            logger.debug(f"Member {self._names[index]} is disconnected; using the host metric")
            return self.host.distance(a, b)
        return graph.distance(local_of[a], local_of[b])


class PeripheralView(PeripheralSpace):
    """The host itself, read through its family"""

    def __init__(self, host: MetricGraph, family: HoroFamily):
        member_of = self._host_member_array(host, family, host.n)
        super().__init__(host, host, family, member_of, np.arange(host.n))


class ConedSpace(PeripheralSpace):
    """Host plus one cone vertex per member, joined to it by half-length edges"""

    def __init__(self, graph: MetricGraph, host: MetricGraph, family: HoroFamily):
        member_of = self._host_member_array(host, family, graph.n)
        member_of[host.n:] = np.arange(len(family))
        base_of = np.full(graph.n, -1, dtype=np.int64)
        base_of[:host.n] = np.arange(host.n)
        super().__init__(graph, host, family, member_of, base_of)

    def cone_vertex(self, index: int) -> int:
        return self.host.n + index

    def is_cone(self, v: int) -> bool:
        return v >= self.host.n

    def representative(self, v: int) -> int:
        """v itself for host vertices, the smallest member vertex for a cone vertex"""
        if self.is_cone(v):
            return self.family.vertices_of(self.member_at(v))[0]
        return v


@dataclass
class Horoball:
    """Combinatorial horoball over one member; local id of (level k, member vertex i) is k*m + i"""
    graph: MetricGraph
    global_of: List[int]
    depth: int

    @property
    def size(self) -> int:
        return len(self.global_of)

    def vertex(self, level: int, host_vertex: int) -> int:
        return level * self.size + self.global_of.index(host_vertex)


class GluedSpace(PeripheralSpace):
    """Host with a combinatorial horoball attached along every member"""

    def __init__(self, graph: MetricGraph, host: MetricGraph, family: HoroFamily, depth: int,
                 level: np.ndarray, copy_of: np.ndarray, member_of: np.ndarray, ids: List[np.ndarray]):
        base_of = np.where(level == 0, np.arange(graph.n), -1)
        super().__init__(graph, host, family, member_of, base_of)
        self.depth = depth
        self.level = level
        self.copy_of = copy_of
        self._ids = ids
        self._horoballs: Dict[int, Horoball] = {}

    def horoball(self, index: int) -> Horoball:
        if index not in self._horoballs:
            intrinsic, local_of = self.intrinsic(index)
            global_of = sorted(local_of, key=local_of.get)
            graph = Electrifier._horoball_graph(intrinsic, self.depth, f"{self.graph.space_id}/{self.member_name(index)}")
            self._horoballs[index] = Horoball(graph, global_of, self.depth)
        return self._horoballs[index]

    def horoball_vertices(self, index: int) -> List[int]:
        return sorted(int(v) for v in self._ids[index].ravel())

    def horoball_geodesic(self, index: int, a: int, b: int) -> List[int]:
        """Geodesic inside the horoball of a member between two of its host vertices"""
        ball = self.horoball(index)
        path = ball.graph.geodesic(ball.vertex(0, a), ball.vertex(0, b))
        flat = self._ids[index].ravel()
        return [int(flat[v]) for v in path.vertices]

    def to_coned_map(self, cs: ConedSpace) -> np.ndarray:
        """Level-0 vertices stay put, higher levels go to the cone vertex of their member"""
        out = np.arange(self.graph.n, dtype=np.int64)
        raised = self.level > 0
        out[raised] = self.host.n + self._member_of[raised]
        return out

    def to_coned(self, v: int, cs: ConedSpace) -> int:
        return v if self.level[v] == 0 else cs.cone_vertex(self.member_at(v))


@dataclass
class Visit:
    member: str
    member_index: int
    entry: Optional[int]
    exit: Optional[int]
    length: Fraction
    start: int
    end: int

    def to_dict(self) -> Dict:
        return {"member": self.member, "entry": self.entry, "exit": self.exit, "length": self.length,
                "start": self.start, "end": self.end}


@dataclass
class PenetrationProfile:
    space_id: str
    visits: List[Visit] = field(default_factory=list)
    backtracking: bool = False

    def by_member(self) -> Dict[str, Visit]:
        return {visit.member: visit for visit in self.visits}


def _runs(space: PeripheralSpace, vertices: Sequence[int]) -> List[Tuple[int, int, int]]:
    runs = []
    for position, v in enumerate(vertices):
        member = space.member_at(v)
        if member is None:
            continue
        if runs and runs[-1][0] == member and runs[-1][2] == position - 1:
            runs[-1] = (member, runs[-1][1], position)
        else:
            runs.append((member, position, position))
    return runs


class Electrifier:
    """Coning, horoball gluing and the electric path operations built on them"""

    @staticmethod
    def cone_off(host: MetricGraph, fam: HoroFamily) -> ConedSpace:
        """
        Electric space: one cone vertex per member, joined to each of its vertices by an edge of length 1/2

        Args:
            host: Host graph
            fam: Peripheral family on the host

        Returns:
            ConedSpace whose first host.n ids are the host vertices
        """
        fam.check(host)
        builder = GraphBuilder(f"{host.space_id}/coned")
        builder.copy_graph(host)
        for name, vertices in fam.members.items():
            cone = builder.add_vertex(f"cone:{name}")
            for v in vertices:
                builder.add_edge(v, cone, CONE_LENGTH)
        logger.debug(f"Coned {host.space_id} along {len(fam)} members")
        return ConedSpace(builder.build(), host, fam)

    @staticmethod
    def default_depth(diameters: Iterable[Fraction]) -> int:
        """Depth whose top level joins every pair of a member: ceil(log2(max diameter)) + 1"""
        largest = max(diameters, default=Fraction(0))
        k = 0
        while 2 ** k < largest:
            k += 1
        return k + 1

    @staticmethod
    def _horizontal_pairs(intrinsic: MetricGraph, depth: int) -> List[Tuple[int, int, int]]:
        if intrinsic.n == 1:
            return []
        if intrinsic.n > MATRIX_LIMIT:
            logger.warning(f"Horoball over {intrinsic.n} vertices of {intrinsic.space_id}")
        D = intrinsic.matrix()
        upper = np.triu_indices(intrinsic.n, k=1)
        values = D[upper]
        pairs = []
        for k in range(depth + 1):
            close = np.flatnonzero(values <= (2 ** k) * intrinsic.scale)
            pairs.extend((int(upper[0][i]), int(upper[1][i]), k) for i in close)
        return pairs

    @staticmethod
    def _horoball_graph(intrinsic: MetricGraph, depth: int, space_id: str) -> MetricGraph:
        m = intrinsic.n
        builder = GraphBuilder(space_id)
        for k in range(depth + 1):
            for i in range(m):
                builder.add_vertex(f"{i}@{k}")
        builder.copy_graph(intrinsic, offset=0)
        for a, b, k in Electrifier._horizontal_pairs(intrinsic, depth):
            builder.add_edge(k * m + a, k * m + b, 1, keep_shorter=True)
        for k in range(1, depth + 1):
            for i in range(m):
                builder.add_edge((k - 1) * m + i, k * m + i, 1)
        return builder.build()

    @staticmethod
    def build_horoball(host: MetricGraph, member: Iterable[int], depth: int, name: str = "H") -> Horoball:
        """
        Combinatorial horoball over a member

        Level k holds a copy of every member vertex; consecutive copies of a
        vertex are joined by unit edges, and two copies at level k are joined
        by a unit edge when their intrinsic distance is at most 2**k. Level 0
        also keeps the member's own edges.

        Raises:
            DomainError: empty or disconnected member, depth below 1
        """
        if depth < 1:
            raise DomainError(f"Horoball depth must be at least 1, got {depth}")
        intrinsic, global_of = host.induced_subgraph(member, f"{host.space_id}/{name}")
        graph = Electrifier._horoball_graph(intrinsic, depth, f"{host.space_id}/{name}/horoball")
        return Horoball(graph, global_of, depth)

    @staticmethod
    def glue_cones(host: MetricGraph, fam: HoroFamily, depth: Optional[int] = None) -> GluedSpace:
        """
        Glued space: host with a horoball attached along each member

        Args:
            host: Host graph
            fam: Peripheral family
            depth: Horoball depth; defaults to the largest member diameter rule

        Returns:
            GluedSpace whose first host.n ids are the host vertices (level 0)
        """
        fam.check(host)
        view = PeripheralView(host, fam)
        intrinsic = [view.intrinsic(i) for i in range(len(fam))]
        if depth is None:
            depth = Electrifier.default_depth(graph.diameter() for graph, _ in intrinsic)
        if depth < 1:
            raise DomainError(f"Horoball depth must be at least 1, got {depth}")

        builder = GraphBuilder(f"{host.space_id}/glued")
        builder.copy_graph(host)
        level = [0] * host.n
        copy_of = list(range(host.n))
        member_of = list(PeripheralSpace._host_member_array(host, fam, host.n))
        ids: List[np.ndarray] = []
        for index, (name, (graph, local_of)) in enumerate(zip(fam.names, intrinsic)):
            global_of = sorted(local_of, key=local_of.get)
            block = np.zeros((depth + 1, graph.n), dtype=np.int64)
            block[0] = global_of
            for k in range(1, depth + 1):
                for i, g in enumerate(global_of):
                    block[k, i] = builder.add_vertex(f"{name}:{g}@{k}")
                    level.append(k)
                    copy_of.append(g)
                    member_of.append(index)
                    builder.add_edge(int(block[k - 1, i]), int(block[k, i]), 1)
            for a, b, k in Electrifier._horizontal_pairs(graph, depth):
                builder.add_edge(int(block[k, a]), int(block[k, b]), 1, keep_shorter=True)
            ids.append(block)
        logger.debug(f"Glued {len(fam)} horoballs of depth {depth} onto {host.space_id}")
        return GluedSpace(builder.build(), host, fam, depth, np.asarray(level), np.asarray(copy_of),
                          np.asarray(member_of, dtype=np.int64), ids)

    @staticmethod
    def remove_backtracking(cs: ConedSpace, path: PathWitness) -> PathWitness:
        """Splice first entry to last exit of every recurring member through its cone vertex"""
        vertices = list(path.vertices)
        while True:
            seen, recurring = set(), None
            for member, _, _ in _runs(cs, vertices):
                if member in seen:
                    recurring = member
                    break
                seen.add(member)
            if recurring is None:
                break
            positions = [i for i, v in enumerate(vertices) if cs.member_at(v) == recurring]
            first, last = positions[0], positions[-1]
            x, y = vertices[first], vertices[last]
            middle = [x] if x == y else [x, cs.cone_vertex(recurring), y]
            vertices = vertices[:first] + middle + vertices[last + 1:]
        return cs.graph.path(vertices)

    @staticmethod
    def electric_geodesic_nb(cs: ConedSpace, u: int, v: int) -> PathWitness:
        """Electric geodesic between ordinary vertices with no member revisited"""
        for w in (u, v):
            cs.graph.check_vertex(w)
            if cs.is_cone(w):
                raise DomainError(f"Vertex {w} is a cone vertex of {cs.graph.space_id}")
        path = Electrifier.remove_backtracking(cs, cs.graph.geodesic(u, v))
        GraphGeometry.certify_quasigeodesic(cs.graph, path)
        return path

    @staticmethod
    def penetration_profile(p: PathWitness, space: PeripheralSpace) -> PenetrationProfile:
        """
        Member visits of a path, in order

        Entry and exit are the first and last host vertices of each maximal
        run inside a member; the length is their intrinsic distance.
        """
        visits = []
        for member, start, end in _runs(space, p.vertices):
            bases = [space.base_at(w) for w in p.vertices[start:end + 1] if space.base_at(w) is not None]
            entry, exit_ = (bases[0], bases[-1]) if bases else (None, None)
            length = space.traversal_length(member, entry, exit_) if bases else Fraction(0)
            visits.append(Visit(space.member_name(member), member, entry, exit_, length, start, end))
        names = [visit.member for visit in visits]
        return PenetrationProfile(space.graph.space_id, visits, len(names) != len(set(names)))

    @staticmethod
    def check_similar_intersections(p1: PathWitness, p2: PathWitness, space: PeripheralSpace) -> Measurement:
        """Least B for which the two paths have similar intersection patterns"""
        if (p1.start, p1.end) != (p2.start, p2.end):
            raise DomainError("Similar intersection patterns need paths with common endpoints")
        first = Electrifier.penetration_profile(p1, space)
        second = Electrifier.penetration_profile(p2, space)
        if first.backtracking or second.backtracking:
            raise DomainError("Similar intersection patterns are defined for paths without backtracking")
        a, b = first.by_member(), second.by_member()
        best, witness, details = Fraction(0), (), {}
        for name in sorted(set(a) | set(b)):
            if name in a and name in b:
                index = a[name].member_index
                bound = max(space.traversal_length(index, a[name].entry, b[name].entry),
                            space.traversal_length(index, a[name].exit, b[name].exit))
            else:
                bound = (a.get(name) or b.get(name)).length
            details[name] = bound
            if bound > best:
                best, witness = bound, (name,)
        return Measurement(best, "check_similar_intersections", witness=witness, samples=len(details),
                           details=details)

    @staticmethod
    def electro_ambient_anchored(cs: ConedSpace, gs: GluedSpace,
                                 ep: PathWitness) -> Tuple[PathWitness, Tuple[int, ...]]:
        """
        Electro-ambient representative together with its anchors on ep

        Each cone detour x, ..., cone, ..., y is replaced by a horoball
        geodesic from x to y. The anchor of a vertex of the result is the
        vertex of ep it stands for: itself outside detours, the cone vertex
        strictly inside one.
        """
        ep = cs.graph.path(ep.vertices)
        for w in (ep.start, ep.end):
            if cs.is_cone(w):
                raise DomainError(f"Electro-ambient paths need ordinary endpoints, got cone vertex {w}")
        profile = Electrifier.penetration_profile(ep, cs)
        if profile.backtracking:
            raise DomainError("Electro-ambient representative of a backtracking path")
        vertices: List[int] = []
        anchors: List[int] = []
        cursor = 0
        for visit in profile.visits:
            cone = cs.cone_vertex(visit.member_index)
            run = ep.vertices[visit.start:visit.end + 1]
            if cone not in run:
                continue
            bases = [visit.start + i for i, w in enumerate(run) if not cs.is_cone(w)]
            i, j = bases[0], bases[-1]
            vertices.extend(ep.vertices[cursor:i])
            anchors.extend(ep.vertices[cursor:i])
            detour = gs.horoball_geodesic(visit.member_index, ep.vertices[i], ep.vertices[j])
            vertices.extend(detour)
            anchors.extend([ep.vertices[i]] + [cone] * (len(detour) - 2) + [ep.vertices[j]]
                           if len(detour) > 1 else [ep.vertices[i]])
            cursor = j + 1
        vertices.extend(ep.vertices[cursor:])
        anchors.extend(ep.vertices[cursor:])
        path = gs.graph.path(vertices)
        GraphGeometry.certify_quasigeodesic(gs.graph, path)
        return path, tuple(anchors)

    @staticmethod
    def electro_ambient(cs: ConedSpace, gs: GluedSpace, ep: PathWitness) -> PathWitness:
        return Electrifier.electro_ambient_anchored(cs, gs, ep)[0]

    @staticmethod
    def electric_projection(cs: ConedSpace, gs: GluedSpace, y: int, mu_hat: PathWitness,
                            mu: Optional[PathWitness] = None, representative: Optional[int] = None) -> int:
        """
        Electric projection of y onto the electro-ambient representative of mu_hat

        A cone vertex is projected through a member vertex: `representative`
        when given, the smallest member vertex otherwise.
        """
        if mu is None:
            mu = Electrifier.electro_ambient(cs, gs, mu_hat)
        cs.graph.check_vertex(y)
        if cs.is_cone(y):
            y = representative if representative is not None else cs.representative(y)
        return GraphGeometry.nearest_point_projection(gs.graph, y, mu)

    @staticmethod
    def electric_projection_map(cs: ConedSpace, gs: GluedSpace, mu: PathWitness) -> np.ndarray:
        """Electric projection of every coned vertex, read back in the coned space"""
        projection = GraphGeometry.projection_map(gs.graph, mu)
        representatives = np.array([cs.representative(v) for v in range(cs.graph.n)], dtype=np.int64)
        return gs.to_coned_map(cs)[projection[representatives]]

    @staticmethod
    def measure_representative_discrepancy(cs: ConedSpace, gs: GluedSpace, mu_hat: PathWitness) -> Measurement:
        """Spread, in the coned metric, of the projections of all members' vertices"""
        mu = Electrifier.electro_ambient(cs, gs, mu_hat)
        image = gs.to_coned_map(cs)[GraphGeometry.projection_map(gs.graph, mu)]
        best, witness = 0, ()
        for vertices in cs.family.members.values():
            if len(vertices) < 2:
                continue
            targets = image[list(vertices)]
            unique = np.unique(targets)
            spread = cs.graph.scaled_rows(unique.tolist())[:, unique]
            value = int(spread.max())
            if value > best:
                a, b = np.unravel_index(int(np.argmax(spread)), spread.shape)
                za = vertices[int(np.flatnonzero(targets == unique[a])[0])]
                zb = vertices[int(np.flatnonzero(targets == unique[b])[0])]
                best, witness = value, (za, zb)
        return Measurement(cs.graph.to_fraction(best), "measure_representative_discrepancy", witness=witness,
                           samples=len(cs.family))

    @staticmethod
    def measure_electric_projection_lipschitz(cs: ConedSpace, gs: GluedSpace, mu_hat: PathWitness,
                                              count: Optional[int] = None, seed: int = 0) -> Measurement:
        mu = Electrifier.electro_ambient(cs, gs, mu_hat)
        image = Electrifier.electric_projection_map(cs, gs, mu)
        return GraphGeometry.map_lipschitz(cs.graph, cs.graph, np.arange(cs.graph.n), image, count=count,
                                           seed=seed, operation="measure_electric_projection_lipschitz")

    @staticmethod
    def measure_electric_tracking(cs: ConedSpace, gs: GluedSpace, u: int, v: int) -> Measurement:
        """Coned-metric Hausdorff distance between the electric geodesic and the glued geodesic"""
        electric = Electrifier.electric_geodesic_nb(cs, u, v)
        glued = gs.graph.geodesic(u, v)
        image = gs.to_coned_map(cs)[list(glued.vertices)]
        value = GraphGeometry.hausdorff_distance(cs.graph, electric.vertices, image.tolist())
        return Measurement(value, "measure_electric_tracking", witness=(u, v), samples=1)

    @staticmethod
    def measure_horoball_bound(host: MetricGraph, fam: HoroFamily, depth: Optional[int] = None) -> Measurement:
        """
        Level-0 horoball distances against 1 <= d <= 2*depth + ceil(d_H / 2**depth)

        Only members up to the scan limit are checked. The value is the
        largest level-0 horoball distance seen; violations are listed in details.
        """
        view = PeripheralView(host, fam)
        if depth is None:
            depth = Electrifier.default_depth(view.intrinsic(i)[0].diameter() for i in range(len(fam)))
        largest, violations, scanned = Fraction(0), [], 0
        for index, (name, vertices) in enumerate(fam.members.items()):
            if len(vertices) > HOROBALL_SCAN_LIMIT or len(vertices) < 2:
                continue
            scanned += 1
            intrinsic, _ = view.intrinsic(index)
            ball = Electrifier.build_horoball(host, vertices, depth, name)
            level0 = list(range(ball.size))
            d_ball = ball.graph.scaled_rows(level0)[:, level0]
            d_member = intrinsic.matrix()
            for a in range(ball.size):
                for b in range(a + 1, ball.size):
                    value = ball.graph.to_fraction(d_ball[a, b])
                    hops = -(-intrinsic.to_fraction(d_member[a, b]) // 2 ** depth)
                    largest = max(largest, value)
                    if not 1 <= value <= 2 * depth + hops:
                        violations.append((name, vertices[a], vertices[b], value))
        return Measurement(largest, "measure_horoball_bound", samples=scanned,
                           details={"depth": depth, "violations": violations})

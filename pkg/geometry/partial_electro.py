"""
Partially electrocuted spaces built from metric mapping cylinders
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from config import PAIR_SAMPLE_COUNT
from geometry.electric import ConedSpace, Electrifier, GluedSpace, HoroFamily, PeripheralSpace
from geometry.errors import DomainError, InvariantViolation
from geometry.metric_graph import (
    DeltaEstimate,
    GraphBuilder,
    GraphGeometry,
    Length,
    Measurement,
    MetricGraph,
    PathWitness,
    as_fraction,
)

logger = logging.getLogger(__name__)


@dataclass
class CylinderTarget:
    """Target graph L of one member and the vertex map g: member -> L"""
    graph: MetricGraph
    g: Dict[int, int]


@dataclass
class TargetRecord:
    name: str
    offset: int
    lipschitz: Measurement
    delta: DeltaEstimate


class PartialElectroSpace(PeripheralSpace):
    """
    Host with the mapping cylinder of every g: H -> L glued in

    Host vertices keep their ids; the vertices of each target follow at
    its recorded offset. Targets count as part of their member.
    """

    def __init__(self, graph: MetricGraph, host: MetricGraph, family: HoroFamily,
                 targets: Dict[str, CylinderTarget], records: List[TargetRecord], cylinder_length: Fraction):
        member_of = self._host_member_array(host, family, graph.n)
        for index, record in enumerate(records):
            member_of[record.offset:record.offset + targets[record.name].graph.n] = index
        base_of = np.full(graph.n, -1, dtype=np.int64)
        base_of[:host.n] = np.arange(host.n)
        super().__init__(graph, host, family, member_of, base_of)
        self.targets = targets
        self.records = records
        self.cylinder_length = cylinder_length

    def target_vertices(self, name: str) -> List[int]:
        record = next(r for r in self.records if r.name == name)
        return list(range(record.offset, record.offset + self.targets[name].graph.n))

    def target_family(self) -> HoroFamily:
        """The targets, as a family on the assembled graph"""
        return HoroFamily.separated(self.graph, {r.name: self.target_vertices(r.name) for r in self.records})


class PartialElectrocution:
    """Assembly and tracking diagnostics of partially electrocuted spaces"""

    @staticmethod
    def partially_electrocute(host: MetricGraph, fam: HoroFamily, targets: Dict[str, CylinderTarget],
                              cylinder_length: Length = 1, measure: bool = True) -> PartialElectroSpace:
        """
        Glue the mapping cylinder of each g into the host

        Args:
            host: Host graph
            fam: Family whose members are the cylinder sources
            targets: Member name -> CylinderTarget
            cylinder_length: Length of every x -- g(x) edge
            measure: Record the coarse-Lipschitz constant and four-point delta of every target

        Returns:
            PartialElectroSpace
        """
        fam.check(host)
        cylinder_length = as_fraction(cylinder_length)
        if cylinder_length <= 0:
            raise DomainError(f"Cylinder edges need positive length, got {cylinder_length}")
        failures = []
        for name in fam.names:
            if name not in targets:
                failures.append(f"missing target for member {name}")
        for name in targets:
            if name not in fam.members:
                failures.append(f"target {name} has no member")
        for name, vertices in fam.members.items():
            target = targets.get(name)
            if target is None:
                continue
            for v in vertices:
                if v not in target.g:
                    failures.append(f"g[{name}] is undefined at {v}")
                elif not target.graph.has_vertex(target.g[v]):
                    failures.append(f"g[{name}]({v}) = {target.g[v]} lies outside its target")
            extra = set(target.g) - set(vertices)
            if extra:
                failures.append(f"g[{name}] is defined off the member at {sorted(extra)}")
        if failures:
            raise InvariantViolation(f"Partial electrocution of {host.space_id} is invalid", failures)

        builder = GraphBuilder(f"{host.space_id}/pel")
        builder.copy_graph(host)
        records = []
        for name, vertices in fam.members.items():
            target = targets[name]
            offset = builder.copy_graph(target.graph)
            for k in range(target.graph.n):
                builder.labels.setdefault(offset + k, f"{name}:{k}")
            for v in vertices:
                builder.add_edge(v, offset + target.g[v], cylinder_length)
            if measure:
                lipschitz = GraphGeometry.map_lipschitz(host, target.graph, list(vertices),
                                                        [target.g[v] for v in vertices],
                                                        operation="cylinder_map_lipschitz")
                delta = GraphGeometry.four_point_delta(target.graph, mode="auto")
            else:
                lipschitz = Measurement(Fraction(0), "cylinder_map_lipschitz", samples=0, exhaustive=False)
                delta = DeltaEstimate(Fraction(0), "skipped", False, "not measured", target.graph.space_id)
            records.append(TargetRecord(name, offset, lipschitz, delta))
        logger.debug(f"Glued {len(records)} mapping cylinders into {host.space_id}")
        return PartialElectroSpace(builder.build(), host, fam, dict(targets), records, cylinder_length)

    @staticmethod
    def point_targets(host: MetricGraph, fam: HoroFamily) -> Dict[str, CylinderTarget]:
        """Every member collapsed to a single point"""
        return {name: CylinderTarget(MetricGraph(f"{host.space_id}/{name}/point", 1, []),
                                     {v: 0 for v in vertices})
                for name, vertices in fam.members.items()}

    @staticmethod
    def pel_geodesic(pe: PartialElectroSpace, u: int, v: int) -> PathWitness:
        for w in (u, v):
            if not pe.host.has_vertex(w):
                raise DomainError(f"Vertex {w} is not a host vertex of {pe.graph.space_id}")
        return pe.graph.geodesic(u, v)

    @staticmethod
    def verify_pel_tracking(pe: PartialElectroSpace, gs: GluedSpace, u: int, v: int) -> Measurement:
        """
        Upper bound on the tracking constant between the glued-space geodesic
        and the pel-geodesic

        The value is the Hausdorff distance, in the partially electrocuted
        metric, between the off-member host vertices of the two paths. The
        smallest C for which each path stays C-close to the other outside
        the members it meets is at most this; details["one_sided"] holds the
        distance from the glued path to the pel path alone.
        """
        for w in (u, v):
            if not pe.host.has_vertex(w):
                raise DomainError(f"Vertex {w} is not a host vertex of {pe.graph.space_id}")
            if pe.member_at(w) is not None:
                raise DomainError(f"Vertex {w} lies inside member {pe.member_name(pe.member_at(w))}")
        glued = gs.graph.geodesic(u, v)
        pel = PartialElectrocution.pel_geodesic(pe, u, v)
        outside_glued = [w for w in glued.vertices if gs.off_member(w)]
        outside_pel = [w for w in pel.vertices if pe.off_member(w)]
        value = GraphGeometry.hausdorff_distance(pe.graph, outside_glued, outside_pel)
        near_pel = pe.graph.set_distance_row(outside_pel)
        one_sided = pe.graph.to_fraction(near_pel[outside_glued].max())
        return Measurement(value, "verify_pel_tracking", witness=(u, v), samples=1, exhaustive=False,
                           details={"glued": glued.vertices, "pel": pel.vertices, "one_sided": one_sided})

    @staticmethod
    def electrocute_targets(pe: PartialElectroSpace) -> ConedSpace:
        """Cone off every target inside the partially electrocuted space"""
        return Electrifier.cone_off(pe.graph, pe.target_family())

    @staticmethod
    def measure_electrocution_discrepancy(pe: PartialElectroSpace, cs: ConedSpace,
                                          count: Optional[int] = PAIR_SAMPLE_COUNT, seed: int = 0) -> Measurement:
        """
        Largest |d(x, y) - d_e(x, y)| over host pairs, with d taken after
        coning off the targets and d_e the electric metric of `cs`
        """
        coned = PartialElectrocution.electrocute_targets(pe)
        return PartialElectrocution.compare_host_metrics(coned.graph, cs.graph, pe.host.n, count, seed,
                                                         "measure_electrocution_discrepancy")

    @staticmethod
    def compare_host_metrics(first: MetricGraph, second: MetricGraph, n: int, count: Optional[int] = None,
                             seed: int = 0, operation: str = "compare_host_metrics") -> Measurement:
        """Largest |d_first - d_second| over pairs of the shared vertices 0..n-1"""
        exhaustive = count is None or n * (n - 1) // 2 <= count
        if exhaustive:
            sources = list(range(n))
            a = first.scaled_rows(sources)[:, :n]
            b = second.scaled_rows(sources)[:, :n]
            samples = n * (n - 1) // 2
        else:
            rng = np.random.default_rng(seed)
            pairs = rng.integers(0, n, size=(count, 2))
            sources = sorted(set(pairs[:, 0].tolist()))
            index = {s: i for i, s in enumerate(sources)}
            rows = [index[s] for s in pairs[:, 0].tolist()]
            a = first.scaled_rows(sources)[rows, pairs[:, 1]][:, None]
            b = second.scaled_rows(sources)[rows, pairs[:, 1]][:, None]
            samples = count
        scale = first.scale * second.scale
        gap = np.abs(a * second.scale - b * first.scale)
        flat = int(np.argmax(gap))
        value = Fraction(int(gap.ravel()[flat]), scale)
        if exhaustive:
            witness = tuple(int(i) for i in np.unravel_index(flat, gap.shape))
        else:
            witness = (int(pairs[flat, 0]), int(pairs[flat, 1]))
        return Measurement(value, operation, witness=witness, samples=samples, exhaustive=exhaustive)

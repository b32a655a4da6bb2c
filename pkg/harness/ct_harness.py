"""
Cannon-Thurston profile of a tree of spaces

For each radius N the harness collects electric geodesics of the coned
root space whose off-member part avoids the N-ball about p, runs each one
through the ladder and the induced tree of coned-off spaces, and records
how close the off-member part of the TC geodesic comes to p in X.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import DEFAULT_BUDGET, SHOW_PROGRESS
from geometry.electric import ConedSpace, Electrifier, PeripheralView
from geometry.errors import DomainError
from geometry.metric_graph import GraphGeometry, Length, MetricGraph, PathWitness, as_fraction
from geometry.params import GeometryParams
from trees.ladder import DepthEscape, Ladder, LadderBuilder
from trees.tree_spaces import TreeGeometry

logger = logging.getLogger(__name__)

TESTED_CLASS = "electric geodesics"


@dataclass
class AdmissibleSet:
    N: Fraction
    geodesics: List[PathWitness]
    exhaustive: bool
    pairs_tested: int
    diagnostic: Optional[str] = None


@dataclass
class LambdaSummary:
    """Everything the profile needs about one admissible geodesic, independent of N"""
    endpoints: Tuple[int, int]
    beta: PathWitness
    beta_b: List[int]
    distance: Fraction
    witness: int
    ladder: Optional[Ladder] = None
    escape: Optional[DepthEscape] = None
    beta_gap: Optional[Fraction] = None


@dataclass
class CTRow:
    N: Fraction
    M: Optional[Fraction]
    lambda_endpoints: Optional[Tuple[int, int]]
    witness_vertex: Optional[int]
    admissible: int
    exhaustive: bool
    effective_radius: Optional[Fraction] = None
    bound: Optional[Fraction] = None
    shape_ok: Optional[bool] = None
    diagnostic: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "N": self.N, "M": self.M,
            "lambda_endpoints": list(self.lambda_endpoints) if self.lambda_endpoints else None,
            "witness_vertex": self.witness_vertex, "admissible": self.admissible,
            "exhaustive": self.exhaustive, "effective_radius": self.effective_radius,
            "bound": self.bound, "shape_ok": self.shape_ok, "diagnostic": self.diagnostic,
        }


@dataclass
class CTProfile:
    instance_id: str
    v0: str
    p: int
    p_X: int
    rows: List[CTRow]
    params: Dict[str, Dict]
    depth: Optional[int]
    D: Optional[Fraction]
    C: Optional[Fraction]
    tested_class: str = TESTED_CLASS
    summaries: Dict[Tuple[int, int], LambdaSummary] = field(default_factory=dict, repr=False)

    @property
    def mode(self) -> str:
        """Exhaustive rows give the true minimum; sampled rows only an upper bound on it"""
        return "exhaustive" if all(row.exhaustive for row in self.rows) else "sampled"

    def lower_envelope_monotone(self) -> bool:
        """True when replacing M(N) by min over N' >= N of M(N') changes nothing"""
        values = [row.M for row in self.rows if row.M is not None]
        return all(a <= b for a, b in zip(values, values[1:]))

    def csv_rows(self) -> List[Dict]:
        return [{
            "N": row.N, "M": row.M,
            "lambda_endpoints": f"{row.lambda_endpoints[0]}-{row.lambda_endpoints[1]}" if row.lambda_endpoints else "",
            "witness_vertex": row.witness_vertex if row.witness_vertex is not None else "",
        } for row in self.rows]

    def to_dict(self) -> Dict:
        return {
            "instance_id": self.instance_id, "v0": self.v0, "p": self.p, "p_X": self.p_X,
            "mode": self.mode, "tested_class": self.tested_class,
            "depth": self.depth, "D": self.D, "C": self.C, "params": self.params,
            "rows": [row.to_dict() for row in self.rows],
        }


class CTHarness:
    """Admissible geodesics, the M(N) profile and the parameter resolution behind it"""

    @staticmethod
    def default_reference_point(geo: TreeGeometry) -> int:
        """Smallest off-member vertex of the root space"""
        view = PeripheralView(geo.tos.space(geo.root).graph, geo.tos.space(geo.root).family)
        outside = view.off_member_vertices()
        if not outside:
            raise DomainError(f"Root space of {geo.tos.instance_id} has no vertex outside the members")
        return outside[0]

    @staticmethod
    def reference_geodesic(geo: TreeGeometry, p: int) -> Optional[PathWitness]:
        """Electric geodesic from p to the farthest off-member root vertex (smallest id on ties)"""
        cs = geo.coned(geo.root)
        outside = cs.off_member_vertices()
        row = cs.host.scaled_row(p)
        far = max(outside, key=lambda x: (int(row[x]), -x))
        if far == p:
            return None
        return Electrifier.electric_geodesic_nb(cs, p, far)

    @staticmethod
    def outer_sphere(host: MetricGraph, row: np.ndarray, endpoints: Sequence[int]) -> List[int]:
        """Endpoints with no other endpoint within distance 1 that lies farther from p"""
        candidates = set(endpoints)
        inner = set()
        for u, v in host.pairs_within(1):
            if u in candidates and v in candidates and row[u] != row[v]:
                inner.add(u if row[u] < row[v] else v)
        return [x for x in endpoints if x not in inner]

    @staticmethod
    def enumerate_admissible(cs: ConedSpace, p: int, N: Length, budget: int = DEFAULT_BUDGET, seed: int = 0,
                             cache: Optional[Dict[Tuple[int, int], PathWitness]] = None) -> AdmissibleSet:
        """
        Electric geodesics whose off-member vertices all stay at least N from p

        Endpoints range over off-member vertices at host distance >= N from p.
        All endpoint pairs are tried when there are at most `budget` of them.
        Otherwise pairs are drawn from the outer sphere of the endpoints (see
        `outer_sphere`): all of its pairs when they fit the budget, else a
        seeded sample of `budget` distinct pairs.

        Args:
            cs: Coned root space
            p: Reference vertex outside every member
            N: Radius
            budget: Largest number of endpoint pairs to try
            seed: Sampling seed
            cache: Electric geodesics by endpoint pair, shared across radii

        Returns:
            AdmissibleSet; empty with a diagnostic when N reaches the eccentricity of p
        """
        host = cs.host
        host.check_vertex(p)
        if not cs.off_member(p):
            raise DomainError(f"Reference point {p} lies inside member {cs.member_name(cs.member_at(p))}")
        if budget < 1:
            raise DomainError(f"Budget must be at least 1, got {budget}")
        N = as_fraction(N)
        row = host.scaled_row(p)
        eccentricity = host.to_fraction(row.max())
        if N >= eccentricity:
            diagnostic = f"N = {N} reaches the eccentricity {eccentricity} of {p}"
            logger.warning(diagnostic)
            return AdmissibleSet(N, [], True, 0, diagnostic)
        limit = N * host.scale
        endpoints = [x for x in cs.off_member_vertices() if int(row[x]) >= limit]
        total = len(endpoints) * (len(endpoints) - 1) // 2
        if total <= budget:
            pairs = list(combinations(endpoints, 2))
            exhaustive = True
        else:
            sphere = CTHarness.outer_sphere(host, row, endpoints)
            pool = sphere if len(sphere) >= 2 else endpoints
            if len(pool) * (len(pool) - 1) // 2 <= budget:
                pairs = list(combinations(pool, 2))
            else:
                rng = np.random.default_rng(seed)
                chosen = set()
                while len(chosen) < budget:
                    i, j = sorted(int(k) for k in rng.integers(0, len(pool), size=2))
                    if i != j:
                        chosen.add((pool[i], pool[j]))
                pairs = sorted(chosen)
            exhaustive = False
        cache = {} if cache is None else cache
        admissible = []
        for a, b in pairs:
            if (a, b) not in cache:
                cache[(a, b)] = Electrifier.electric_geodesic_nb(cs, a, b)
            lam = cache[(a, b)]
            if all(int(row[w]) >= limit for w in lam.vertices if cs.off_member(w)):
                admissible.append(lam)
        diagnostic = None if admissible else f"no admissible geodesic at N = {N}"
        if diagnostic:
            logger.warning(diagnostic)
        return AdmissibleSet(N, admissible, exhaustive, len(pairs), diagnostic)

    @staticmethod
    def summarize(geo: TreeGeometry, lam: PathWitness, p: int, params: Optional[GeometryParams]) -> LambdaSummary:
        """TC geodesic, closest approach to p and, given D and C, the ladder bound for one geodesic"""
        tos, total, tc = geo.tos, geo.total, geo.coned_tree
        embed = tc.embed(tos.root)
        beta = tc.graph.geodesic(int(embed[lam.start]), int(embed[lam.end]))
        beta_b = [w for w in beta.vertices if tc.off_member(w)]
        p_X = total.embed(tos.root, p)
        row = total.graph.scaled_row(p_X)
        best = min(beta_b, key=lambda w: (int(row[w]), w))
        summary = LambdaSummary((lam.start, lam.end), beta, beta_b, total.graph.to_fraction(row[best]), best)
        if params is not None and "D" in params and "C" in params:
            ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
            root_graph = tos.space(tos.root).graph
            n_root = min(root_graph.distance(x, p) for x in ladder.pieces[tos.root].lam_b)
            summary.ladder = ladder
            summary.escape = LadderBuilder.check_depth_escape(geo, ladder, p, n_root, params["C"])
            near = total.graph.set_distance_row(ladder.off_member_set(total))
            summary.beta_gap = total.graph.to_fraction(near[beta_b].max())
        return summary

    @staticmethod
    def shape_constants(geo: TreeGeometry, p: int, params: Optional[GeometryParams],
                        summaries: Iterable[LambdaSummary]) -> Optional[Tuple[Fraction, Fraction]]:
        """
        Instance-level (C_ray, C1) for the shape M(N) >= N/(C_ray + 1) - C1

        C_ray is the largest ray constant over the reference ladder and every
        ladder built for the profile; C1 is the instance's projection-detour
        constant. Both are recorded in params. None without D and C.
        """
        if params is None or "D" not in params or "C" not in params:
            return None
        iid = geo.tos.instance_id
        values = [s.escape.C for s in summaries if s.escape is not None]
        if "C_ray" not in params:
            lam = CTHarness.reference_geodesic(geo, p)
            if lam is not None:
                ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
                values.append(LadderBuilder.measure_ladder_ray_constant(geo, ladder).value)
        params.record("C_ray", max(values, default=Fraction(1)), iid, "measure_ladder_ray_constant")
        return params["C_ray"], params["C1"]

    @staticmethod
    def ct_profile(geo: TreeGeometry, p: Optional[int], N_values: Sequence[Length], budget: int = DEFAULT_BUDGET,
                   params: Optional[GeometryParams] = None, seed: int = 0) -> CTProfile:
        """
        M(N) for each tested radius

        M(N) is the least d_X(x, p) over off-member vertices x of the TC
        geodesics between endpoints of admissible geodesics. Ties are broken
        by the endpoint pair, then by the witness vertex. When params carry
        D and C each geodesic is also run through the ladder, and the row
        checks M(N) >= N/(C_ray + 1) - C1 with the instance constants of shape_constants.

        Args:
            geo: Spaces of a validated tree of spaces
            p: Reference vertex of the root space outside every member; None for the default
            N_values: Radii to test
            budget: Endpoint-pair budget per radius
            params: Resolved constants; without D and C the shape check is skipped
            seed: Sampling seed

        Returns:
            CTProfile with rows sorted by N
        """
        tos = geo.tos
        if p is None:
            p = CTHarness.default_reference_point(geo)
        cs = geo.coned(tos.root)
        cache: Dict[Tuple[int, int], PathWitness] = {}
        summaries: Dict[Tuple[int, int], LambdaSummary] = {}
        measured: List[Tuple[Fraction, AdmissibleSet, List[LambdaSummary]]] = []
        for N in tqdm(sorted({as_fraction(n) for n in N_values}), disable=not SHOW_PROGRESS,
                      desc=f"ct profile {tos.instance_id}"):
            admissible = CTHarness.enumerate_admissible(cs, p, N, budget, seed, cache)
            tested = []
            for lam in admissible.geodesics:
                key = (lam.start, lam.end)
                if key not in summaries:
                    summaries[key] = CTHarness.summarize(geo, lam, p, params)
                tested.append(summaries[key])
            measured.append((N, admissible, tested))

        shape = CTHarness.shape_constants(geo, p, params, summaries.values())
        rows = []
        for N, admissible, tested in measured:
            if not tested:
                rows.append(CTRow(N, None, None, None, 0, admissible.exhaustive, diagnostic=admissible.diagnostic))
                continue
            best = min(tested, key=lambda s: (s.distance, s.endpoints, s.witness))
            row = CTRow(N, best.distance, best.endpoints, best.witness, len(tested), admissible.exhaustive)
            if shape is not None:
                C_ray, C1 = shape
                row.bound = N / (C_ray + 1) - C1
                row.effective_radius = min(s.escape.n_X for s in tested)
                row.shape_ok = row.M >= row.bound
                if not row.shape_ok:
                    logger.warning(f"M({N}) = {row.M} falls below {N}/({C_ray}+1) - {C1} = {row.bound}")
            rows.append(row)
        profile = CTProfile(tos.instance_id, tos.root, p, geo.total.embed(tos.root, p), rows,
                            params.snapshot() if params is not None else {}, geo.depth,
                            params.get("D") if params is not None else None,
                            params.get("C") if params is not None else None,
                            summaries=summaries)
        logger.info(f"CT profile of {tos.instance_id}: {len(rows)} radii, {len(summaries)} geodesics, {profile.mode}")
        return profile

    @staticmethod
    def verify_row(geo: TreeGeometry, profile: CTProfile, row: CTRow) -> bool:
        """Recompute a row's witness from scratch"""
        if row.M is None:
            return row.lambda_endpoints is None
        tos, total, tc = geo.tos, geo.total, geo.coned_tree
        cs = geo.coned(tos.root)
        a, b = row.lambda_endpoints
        lam = Electrifier.electric_geodesic_nb(cs, a, b)
        if any(cs.host.distance(w, profile.p) < row.N for w in lam.vertices if cs.off_member(w)):
            return False
        embed = tc.embed(tos.root)
        beta = tc.graph.geodesic(int(embed[a]), int(embed[b]))
        if row.witness_vertex not in beta.vertices or not tc.off_member(row.witness_vertex):
            return False
        distances = [total.graph.distance(w, profile.p_X) for w in beta.vertices if tc.off_member(w)]
        return total.graph.distance(row.witness_vertex, profile.p_X) == row.M == min(distances)

    @staticmethod
    def resolve_params(geo: TreeGeometry, params: Optional[GeometryParams] = None, p: Optional[int] = None,
                       seed: int = 0) -> GeometryParams:
        """
        Fill in every constant the ladder and the profile need

        Configured entries are kept. delta is measured on the glued root
        space and D defaults to 4*delta + 1. C1 and the projection constants
        are measured against a reference geodesic from p to the farthest
        off-member root vertex, C2 as the quasiconvexity of edge images in
        the glued vertex spaces.
        """
        params = params or GeometryParams()
        tos = geo.tos
        iid = tos.instance_id
        root = tos.root
        cs, gs = geo.coned(root), geo.glued(root)
        if "delta" not in params:
            estimate = GraphGeometry.four_point_delta(gs.graph, "auto", seed=seed)
            params.record("delta", estimate.value, iid, f"four_point_delta:{estimate.mode}")
        D = params.resolve_D(iid)

        C2 = Fraction(0)
        for edge, parent, child in tos.oriented_edges():
            for end in (parent, child):
                image = sorted(set(edge.image(end)))
                measured = GraphGeometry.measure_quasiconvexity(geo.glued(end).graph, image, seed=seed)
                C2 = max(C2, measured.value)
        params.record("C2", C2, iid, "measure_quasiconvexity:edge images")

        p = CTHarness.default_reference_point(geo) if p is None else p
        lam = CTHarness.reference_geodesic(geo, p)
        if lam is None:
            params.record("C1", 0, iid, "measure_projection_detour:single point")
            return params
        mu = Electrifier.electro_ambient(cs, gs, lam)
        params.record("C1", GraphGeometry.measure_projection_detour(gs.graph, mu, D, seed=seed).value, iid,
                      "measure_projection_detour")
        params.record("P1", GraphGeometry.measure_projection_lipschitz(gs.graph, mu, seed=seed).value, iid,
                      "measure_projection_lipschitz")
        params.record("P3", Electrifier.measure_representative_discrepancy(cs, gs, lam).value, iid,
                      "measure_representative_discrepancy")
        params.record("P4", Electrifier.measure_electric_projection_lipschitz(cs, gs, lam, seed=seed).value, iid,
                      "measure_electric_projection_lipschitz")
        host_path = Electrifier.remove_backtracking(cs, cs.graph.path(cs.host.geodesic(lam.start, lam.end).vertices))
        params.record("B", Electrifier.check_similar_intersections(lam, host_path, cs).value, iid,
                      "check_similar_intersections")
        return params

    @staticmethod
    def record_ladder_constants(geo: TreeGeometry, ladder: Ladder, params: GeometryParams):
        """Retraction case constants, subpiece constants and their maximum P"""
        iid = geo.tos.instance_id
        sweep = LadderBuilder.measure_retraction_lipschitz(geo, ladder)
        for case, name in ((1, "K0"), (2, "K1"), (3, "K2")):
            params.record(name, sweep.cases[case]["value"], iid, f"measure_retraction_lipschitz:case{case}")
        params.record("C0", sweep.value, iid, "measure_retraction_lipschitz")
        P6, P7 = LadderBuilder.measure_subpiece_constants(geo, ladder)
        params.record("P6", P6.value, iid, P6.operation)
        params.record("P7", P7.value, iid, P7.operation)
        measured = [params[name] for name in ("P1", "P2", "P3", "P4", "P5", "P6", "P7") if name in params]
        params.derive("P", max(measured), "max(P1..P7)", iid)
        return sweep

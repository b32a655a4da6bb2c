"""
Hyperbolic ladders, the ladder retraction and vertical quasigeodesic rays
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from tqdm import tqdm

from config import SHOW_PROGRESS
from geometry.electric import Electrifier
from geometry.errors import DomainError, PreconditionError
from geometry.metric_graph import INF_INT, GraphGeometry, Length, Measurement, PathWitness, as_fraction, max_ratio
from trees.tree_spaces import ConedTree, EdgeSpace, TotalSpace, TreeGeometry, TreeOfSpaces

logger = logging.getLogger(__name__)


@dataclass
class Subpiece:
    """Step-1 record for one child edge: the selected pair and where it flows"""
    edge: str
    parent: str
    child: str
    p: int
    q: int
    mu_hat: PathWitness
    mu: PathWitness
    separation: Fraction
    child_p: int
    child_q: int
    child_geodesic: PathWitness

    def to_dict(self) -> Dict:
        return {
            "edge": self.edge, "parent": self.parent, "child": self.child,
            "p": self.p, "q": self.q, "mu_hat": list(self.mu_hat.vertices),
            "separation": self.separation, "child_p": self.child_p, "child_q": self.child_q,
        }


@dataclass
class LadderPiece:
    vertex: str
    generation: int
    lam_hat: PathWitness
    mu: PathWitness
    anchors: Tuple[int, ...]
    lam_b: Tuple[int, ...]
    subpieces: List[Subpiece] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "vertex": self.vertex, "generation": self.generation,
            "lambda_hat": list(self.lam_hat.vertices), "mu": list(self.mu.vertices),
            "lambda_b": list(self.lam_b), "subpieces": [s.to_dict() for s in self.subpieces],
        }


@dataclass
class Ladder:
    instance_id: str
    lam_hat: PathWitness
    D: Fraction
    C: Fraction
    pieces: Dict[str, LadderPiece] = field(default_factory=dict)
    skipped: List[Dict] = field(default_factory=list)

    @property
    def support(self) -> List[str]:
        return list(self.pieces)

    def vertex_set(self, tc: ConedTree) -> List[int]:
        """B as TC ids"""
        return sorted({int(tc.embed(v)[x]) for v, piece in self.pieces.items() for x in piece.lam_hat.vertices})

    def off_member_set(self, total: TotalSpace) -> List[int]:
        """B^b as X ids"""
        return sorted({total.embed(v, x) for v, piece in self.pieces.items() for x in piece.lam_b})

    def level_sets(self, tc: ConedTree) -> List[Set[int]]:
        """Cumulative B^1, B^2, ... by generation"""
        levels: List[Set[int]] = []
        for m in range(1, max(p.generation for p in self.pieces.values()) + 1):
            current = set(levels[-1]) if levels else set()
            for v, piece in self.pieces.items():
                if piece.generation == m:
                    current.update(int(tc.embed(v)[x]) for x in piece.lam_hat.vertices)
            levels.append(current)
        return levels

    def to_dict(self) -> Dict:
        return {
            "instance_id": self.instance_id, "D": self.D, "C": self.C,
            "lambda_hat": list(self.lam_hat.vertices), "support": self.support,
            "pieces": {v: piece.to_dict() for v, piece in self.pieces.items()},
            "skipped": self.skipped,
        }


@dataclass
class RetractionSweep:
    value: Fraction
    cases: Dict[int, Dict]
    offenders: List[Tuple[int, int, int, int]]
    pairs: int


@dataclass
class VerticalRay:
    start: int
    path: List[str]
    points: List[int]
    displacements: List[Fraction]
    stuck: Optional[str] = None

    def steps_within(self, C: Fraction) -> bool:
        return all(1 <= d <= C for d in self.displacements)


@dataclass
class DepthEscape:
    """
    passed: every point of B^b is at least n/(C+1) from p, C the measured ray constant
    witness: first point below that threshold, None when passed
    closest: point of B^b nearest to p
    total_*: the same check against n_X/(C+1), n_X the root radius measured in X
    C_rays: larger of the configured and measured C, used for the per-depth bound
    """
    passed: bool
    n: Fraction
    n_X: Fraction
    C: Fraction
    threshold: Fraction
    min_distance: Optional[Fraction]
    closest: Optional[int]
    witness: Optional[int]
    total_threshold: Fraction
    total_form_ok: bool
    total_witness: Optional[int]
    C_rays: Fraction
    ray_bound_failures: List[int]
    stuck_rays: List[int]


class Retraction:
    """Ladder retraction of TC(X) onto B, tabulated fiber by fiber"""

    def __init__(self, geo: TreeGeometry, ladder: Ladder):
        self.tc = geo.coned_tree
        self.tos = geo.tos
        self.support = set(ladder.pieces)
        self._fiberwise: Dict[str, np.ndarray] = {}
        for v, piece in ladder.pieces.items():
            cs, gs = geo.coned(v), geo.glued(v)
            projection = GraphGeometry.projection_map(gs.graph, piece.mu)
            position: Dict[int, int] = {}
            for i, w in enumerate(piece.mu.vertices):
                position.setdefault(w, i)
            embed = self.tc.embed(v)
            self._fiberwise[v] = np.array(
                [embed[piece.anchors[position[int(projection[cs.representative(x)])]]] for x in range(cs.graph.n)],
                dtype=np.int64)
        positions = [self.tos.position[v] for v in self.support]
        self._inside = np.isin(self.tc.fiber, positions)

    def in_support(self, x: int) -> bool:
        return bool(self._inside[x])

    def nearest_support(self, x: int) -> int:
        """Closest TC vertex over a support fiber, smallest id on ties"""
        if self._inside[x]:
            return x
        row = np.where(self._inside, self.tc.graph.scaled_row(x), INF_INT)
        return int(np.argmin(row))

    def __call__(self, x: int) -> int:
        x1 = self.nearest_support(int(x))
        return int(self._fiberwise[self.tc.fiber_name(x1)][self.tc.local[x1]])


class LadderBuilder:
    """Ladder construction and its quantitative checks"""

    @staticmethod
    def phi_map(tos: TreeOfSpaces, v: str, edge: EdgeSpace, p: int) -> int:
        """
        Carry p across the edge: f_{e,v}(x) for the smallest x with f_{e,v-}(x) = p

        v- is the other end of the edge.
        """
        if v not in edge.ends:
            raise DomainError(f"Edge {edge.name} does not meet {v}")
        source = edge.other(v)
        preimage = edge.preimage(source, p)
        if not preimage:
            raise DomainError(f"Vertex {p} of X_{source} is not in the image of {edge.name}")
        return edge.image(v)[preimage[0]]

    @staticmethod
    def build_ladder(geo: TreeGeometry, lam_hat: PathWitness, D: Length, C: Length) -> Ladder:
        """
        Flow an electric geodesic of the coned root space through the tree

        At every ladder vertex and child edge, the candidates are the edge
        image points within C of the electro-ambient representative (glued
        metric). The farthest candidate pair, lexicographically smallest on
        ties, is carried across when its coned distance exceeds D.

        Args:
            geo: Spaces of the tree of spaces
            lam_hat: Path in the coned root space
            D: Descent threshold
            C: Candidate neighborhood radius

        Returns:
            Ladder
        """
        tos = geo.tos
        D, C = as_fraction(D), as_fraction(C)
        root_space = geo.coned(tos.root)
        lam_hat = root_space.graph.path(lam_hat.vertices)
        for w in (lam_hat.start, lam_hat.end):
            if not root_space.off_member(w):
                raise DomainError(f"Ladder geodesics must start and end outside members, got {w}")
        ladder = Ladder(tos.instance_id, lam_hat, D, C)
        queue: List[Tuple[str, PathWitness, int]] = [(tos.root, lam_hat, 1)]
        while queue:
            v, lam_v, generation = queue.pop(0)
            cs, gs = geo.coned(v), geo.glued(v)
            mu, anchors = Electrifier.electro_ambient_anchored(cs, gs, lam_v)
            lam_b = tuple(dict.fromkeys(w for w in lam_v.vertices if cs.off_member(w)))
            piece = LadderPiece(v, generation, lam_v, mu, anchors, lam_b)
            ladder.pieces[v] = piece
            near = gs.graph.set_distance_row(mu.vertices)
            radius = C * gs.graph.scale
            for w in tos.children[v]:
                edge = tos.edge_between(v, w)
                candidates = [z for z in sorted(set(edge.image(v))) if near[z] <= radius]
                if not candidates:
                    ladder.skipped.append({"vertex": v, "child": w, "reason": "no image point near mu"})
                    continue
                block = gs.graph.scaled_rows(candidates)[:, candidates]
                block = np.where(np.triu(np.ones(block.shape, dtype=bool)), block, -1)
                i, j = divmod(int(np.argmax(block)), len(candidates))
                p, q = candidates[i], candidates[j]
                separation = cs.graph.distance(p, q)
                if separation <= D:
                    ladder.skipped.append({"vertex": v, "child": w, "reason": "pair within D",
                                           "separation": separation})
                    continue
                mu_hat = Electrifier.electric_geodesic_nb(cs, p, q)
                child_p = LadderBuilder.phi_map(tos, w, edge, p)
                child_q = LadderBuilder.phi_map(tos, w, edge, q)
                child_geodesic = Electrifier.electric_geodesic_nb(geo.coned(w), child_p, child_q)
                piece.subpieces.append(Subpiece(edge.name, v, w, p, q, mu_hat,
                                                Electrifier.electro_ambient(cs, gs, mu_hat), separation,
                                                child_p, child_q, child_geodesic))
                queue.append((w, child_geodesic, generation + 1))
        logger.debug(f"Ladder over {len(ladder.pieces)} tree vertices on {tos.instance_id}")
        return ladder

    @staticmethod
    def retract(geo: TreeGeometry, ladder: Ladder, x: int, retraction: Optional[Retraction] = None) -> int:
        """Image of a TC vertex under the ladder retraction"""
        geo.coned_tree.graph.check_vertex(x)
        return (retraction or Retraction(geo, ladder))(x)

    @staticmethod
    def measure_retraction_lipschitz(geo: TreeGeometry, ladder: Ladder) -> RetractionSweep:
        """
        Largest d(R(x), R(y)) over TC pairs with d(x, y) <= 1

        Case 1: same support fiber, case 2: different support fibers,
        case 3: at least one point outside the support. Case-3 pairs whose
        nearest support points land in different fibers are listed as offenders.
        """
        tc = geo.coned_tree
        retraction = Retraction(geo, ladder)
        pairs = tc.graph.pairs_within(1)
        image = np.array([retraction(x) for x in range(tc.graph.n)], dtype=np.int64)
        targets = np.unique(image)
        rows = tc.graph.scaled_rows(targets.tolist())
        row_of = {int(t): i for i, t in enumerate(targets)}
        cases = {case: {"value": Fraction(0), "witness": None, "pairs": 0} for case in (1, 2, 3)}
        offenders = []
        best = 0
        for x, y in tqdm(pairs, disable=not SHOW_PROGRESS, desc="retraction sweep"):
            if retraction.in_support(x) and retraction.in_support(y):
                case = 1 if tc.fiber[x] == tc.fiber[y] else 2
            else:
                case = 3
                x1, y1 = retraction.nearest_support(x), retraction.nearest_support(y)
                if tc.fiber[x1] != tc.fiber[y1]:
                    offenders.append((x, y, x1, y1))
            value = int(rows[row_of[int(image[x])]][image[y]])
            record = cases[case]
            record["pairs"] += 1
            if record["witness"] is None or value > tc.graph.scaled(record["value"]):
                record["value"], record["witness"] = tc.graph.to_fraction(value), (x, y)
            best = max(best, value)
        if offenders:
            logger.warning(f"{len(offenders)} case-3 pairs reach different support fibers")
        return RetractionSweep(tc.graph.to_fraction(best), cases, offenders, len(pairs))

    @staticmethod
    def vertical_ray(geo: TreeGeometry, ladder: Ladder, x: int) -> VerticalRay:
        """
        Coarse section of the ladder from x towards the root

        Each step moves to the nearest edge-image point, crosses the edge,
        moves to the nearest off-member point of the subpiece's
        electro-ambient path, then to the nearest point of lambda^b upstairs.
        """
        tos, total = geo.tos, geo.total
        total.graph.check_vertex(x)
        if not total.off_member(x):
            raise DomainError(f"Vertex {x} of X lies inside a member")
        v = total.fiber_name(x)
        current = int(total.local[x])
        piece = ladder.pieces.get(v)
        if piece is None or current not in piece.lam_b:
            raise DomainError(f"Vertex {x} is not on lambda^b of the ladder")
        path = tos.path_to_root(v)
        ray = VerticalRay(x, [v], [x], [])
        for child, parent in zip(path, path[1:]):
            edge = tos.edge_between(parent, child)
            sub = next(s for s in ladder.pieces[parent].subpieces if s.child == child)
            z = GraphGeometry.nearest_point_projection(tos.space(child).graph, current, set(edge.image(child)))
            across = LadderBuilder.phi_map(tos, parent, edge, z)
            glued = geo.glued(parent)
            outside = [t for t in sub.mu.vertices if glued.off_member(t)]
            parent_graph = tos.space(parent).graph
            landing = GraphGeometry.nearest_point_projection(parent_graph, across, outside) if outside else across
            lam_b = ladder.pieces[parent].lam_b
            if not lam_b:
                ray.stuck = f"lambda^b is empty at {parent}"
                logger.warning(f"Vertical ray from {x} is stuck: {ray.stuck}")
                break
            current = GraphGeometry.nearest_point_projection(parent_graph, landing, lam_b)
            point = total.embed(parent, current)
            ray.displacements.append(total.graph.distance(ray.points[-1], point))
            ray.points.append(point)
            ray.path.append(parent)
        return ray

    @staticmethod
    def measure_ray_constant(total: TotalSpace, ray: VerticalRay) -> Measurement:
        """Least C with d_S <= d_X <= C*d_S over all pairs of ray points; details carry the lower-bound check"""
        points = ray.points
        if len(points) < 2:
            return Measurement(Fraction(1), "measure_ray_constant", samples=0, details={"lower_ok": True})
        rows = total.graph.scaled_rows(points)[:, points]
        upper = np.triu_indices(len(points), k=1)
        steps = (upper[1] - upper[0]).astype(np.int64)
        value, flat = max_ratio(rows[upper], steps * total.graph.scale)
        lower_ok = bool((rows[upper] >= steps * total.graph.scale).all())
        return Measurement(max(Fraction(1), value), "measure_ray_constant",
                           witness=(points[upper[0][flat]], points[upper[1][flat]]),
                           samples=len(steps), details={"lower_ok": lower_ok})

    @staticmethod
    def measure_ladder_ray_constant(geo: TreeGeometry, ladder: Ladder) -> Measurement:
        """Largest ray constant over the vertical rays of every off-member point of B"""
        best = Measurement(Fraction(1), "measure_ladder_ray_constant", samples=0)
        for x in ladder.off_member_set(geo.total):
            ray = LadderBuilder.vertical_ray(geo, ladder, x)
            if ray.stuck:
                continue
            measured = LadderBuilder.measure_ray_constant(geo.total, ray)
            best.samples += 1
            if measured.value > best.value:
                best.value, best.witness = measured.value, measured.witness
        return best

    @staticmethod
    def check_depth_escape(geo: TreeGeometry, ladder: Ladder, p: int, n: Length,
                           C: Optional[Length] = None) -> DepthEscape:
        """
        Distance from p of the whole of B^b, given that lambda^b at the root avoids the n-ball

        Precondition: every root point of lambda^b is at least n from p in the
        root vertex space. The check passes when every point of B^b is at
        least n/(C+1) from p in X, C the ray constant measured on this ladder.
        Reported alongside: the form n_X/(C+1), n_X the root radius measured
        in X, and the per-depth bound max(m, n_X - m*C') with C' the larger
        of the configured and measured constants.

        Raises:
            PreconditionError: lambda^b at the root meets the n-ball about p
        """
        tos, total = geo.tos, geo.total
        n = as_fraction(n)
        root_graph = tos.space(tos.root).graph
        root_graph.check_vertex(p)
        lam_b0 = ladder.pieces[tos.root].lam_b
        offenders = [x for x in lam_b0 if root_graph.distance(x, p) < n]
        if offenders:
            raise PreconditionError(f"lambda^b at the root meets the {n}-ball about {p}", offenders)

        p_X = total.embed(tos.root, p)
        row = total.graph.scaled_row(p_X)
        points = ladder.off_member_set(total)
        rays = {x: LadderBuilder.vertical_ray(geo, ladder, x) for x in points}
        stuck = [x for x, ray in rays.items() if ray.stuck]
        measured = max((LadderBuilder.measure_ray_constant(total, ray).value
                        for ray in rays.values() if not ray.stuck), default=Fraction(1))
        C_rays = max(as_fraction(C), measured) if C is not None else measured
        n_X = min(total.graph.to_fraction(row[total.embed(tos.root, x)]) for x in lam_b0) if lam_b0 else n
        threshold = n / (measured + 1)
        total_threshold = n_X / (measured + 1)

        witness, total_witness, closest, ray_failures = None, None, None, []
        for x in points:
            d = total.graph.to_fraction(row[x])
            if closest is None or d < closest[0]:
                closest = (d, x)
            if d < threshold and witness is None:
                witness = x
            if d < total_threshold and total_witness is None:
                total_witness = x
            m = tos.depth_of(total.fiber_name(x))
            if x not in stuck and d < max(m, n_X - m * C_rays):
                ray_failures.append(x)
        if witness is not None:
            logger.warning(f"Depth escape fails at {witness}: below {threshold}")
        return DepthEscape(witness is None, n, n_X, measured, threshold,
                           closest[0] if closest else None, closest[1] if closest else None, witness,
                           total_threshold, total_witness is None, total_witness, C_rays, ray_failures, stuck)

    @staticmethod
    def measure_subpiece_constants(geo: TreeGeometry, ladder: Ladder) -> Tuple[Measurement, Measurement]:
        """
        Glued-metric constants of every subpiece

        First: largest d(r, mu_2) over edge-image points r within C of mu_1.
        Second: largest d(pi_1(z), pi_2(z)) over edge-image points z.
        mu_1 is the representative at the ladder vertex, mu_2 the subpiece's.
        """
        tos = geo.tos
        near_best, near_witness, proj_best, proj_witness, scanned = Fraction(0), (), Fraction(0), (), 0
        for v, piece in ladder.pieces.items():
            gs = geo.glued(v)
            near_mu1 = gs.graph.set_distance_row(piece.mu.vertices)
            pi1 = GraphGeometry.projection_map(gs.graph, piece.mu)
            for sub in piece.subpieces:
                scanned += 1
                image = sorted(set(tos.edge_between(v, sub.child).image(v)))
                near_mu2 = gs.graph.set_distance_row(sub.mu.vertices)
                pi2 = GraphGeometry.projection_map(gs.graph, sub.mu)
                for r in image:
                    if near_mu1[r] <= ladder.C * gs.graph.scale:
                        value = gs.graph.to_fraction(near_mu2[r])
                        if value > near_best:
                            near_best, near_witness = value, (v, sub.child, r)
                    value = gs.graph.distance(int(pi1[r]), int(pi2[r]))
                    if value > proj_best:
                        proj_best, proj_witness = value, (v, sub.child, r)
        return (Measurement(near_best, "measure_subpiece_constants:P6", near_witness, scanned),
                Measurement(proj_best, "measure_subpiece_constants:P7", proj_witness, scanned))

    @staticmethod
    def measure_ladder_quasiconvexity(geo: TreeGeometry, ladder: Ladder, count: int = 50,
                                      seed: int = 0) -> Measurement:
        """How far TC geodesics between sampled ladder points stray from the ladder"""
        tc = geo.coned_tree
        measurement = GraphGeometry.measure_quasiconvexity(tc.graph, ladder.vertex_set(tc), count, seed)
        measurement.operation = "measure_ladder_quasiconvexity"
        return measurement

"""
Invariant suites run at the end of an experiment, and family sweeps
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from config import PAIR_SAMPLE_COUNT
from geometry.electric import Electrifier
from geometry.metric_graph import GraphGeometry
from geometry.params import GeometryParams
from geometry.partial_electro import PartialElectrocution
from harness.ct_harness import CTHarness, CTProfile
from harness.generators import InstanceGenerator
from trees.ladder import Ladder, LadderBuilder
from trees.tree_spaces import TreeBuilder, TreeGeometry
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)

SUITES = ("metric", "hyperbolicity", "electric", "partial_electro", "tree", "ladder", "rays", "ct")
ELECTRIC_SAMPLE = 20


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: Dict = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"name": self.name, "passed": self.passed, "details": self.details, "failures": self.failures}


@dataclass
class SuiteContext:
    """What the suites inspect: the spaces, the resolved constants, a reference ladder and the profile"""
    geo: TreeGeometry
    params: GeometryParams
    p: int
    ladder: Optional[Ladder] = None
    profile: Optional[CTProfile] = None
    seed: int = 0


def _off_member_pairs(geo: TreeGeometry, v: str, count: int, seed: int) -> List[Tuple[int, int]]:
    outside = geo.coned(v).off_member_vertices()
    pairs = [(a, b) for i, a in enumerate(outside) for b in outside[i + 1:]]
    if len(pairs) <= count:
        return pairs
    rng = np.random.default_rng(seed)
    return [pairs[i] for i in sorted(rng.choice(len(pairs), size=count, replace=False).tolist())]


class InvariantSuites:
    """Each suite returns a SuiteResult; `run` executes the selected ones in a fixed order"""

    @staticmethod
    def run(context: SuiteContext, names: Iterable[str] = SUITES) -> List[SuiteResult]:
        runners: Dict[str, Callable[[SuiteContext], SuiteResult]] = {
            "metric": InvariantSuites.metric,
            "hyperbolicity": InvariantSuites.hyperbolicity,
            "electric": InvariantSuites.electric,
            "partial_electro": InvariantSuites.partial_electro,
            "tree": InvariantSuites.tree,
            "ladder": InvariantSuites.ladder,
            "rays": InvariantSuites.rays,
            "ct": InvariantSuites.ct,
        }
        selected = set(names)
        results = []
        for name in SUITES:
            if name not in selected:
                continue
            result = runners[name](context)
            logger.info(f"Suite {name}: {'pass' if result.passed else 'FAIL'}")
            for failure in result.failures:
                logger.info(f"  {failure}")
            results.append(result)
        return results

    @staticmethod
    def metric(context: SuiteContext) -> SuiteResult:
        """Triangle inequality on every assembled space, and geodesic witnesses of exact length"""
        geo, seed = context.geo, context.seed
        graphs = [geo.tos.space(v).graph for v in geo.tos.order] + [geo.total.graph, geo.coned_tree.graph]
        result = SuiteResult("metric", True)
        rng = np.random.default_rng(seed)
        for graph in graphs:
            excess = GraphGeometry.check_metric(graph, seed=seed)
            result.details[graph.space_id] = excess.value
            if excess.value != 0:
                result.failures.append(f"{graph.space_id}: triangle excess {excess.value} at {excess.witness}")
            for u, v in rng.integers(0, graph.n, size=(5, 2)).tolist():
                path = graph.geodesic(u, v)
                if path.length != graph.distance(u, v) or GraphGeometry.certify_quasigeodesic(graph, path) != 1:
                    result.failures.append(f"{graph.space_id}: geodesic {u}-{v} is not exact")
        result.passed = not result.failures
        return result

    @staticmethod
    def hyperbolicity(context: SuiteContext) -> SuiteResult:
        """Four-point constants of the vertex spaces: zero on trees, never above the diameter"""
        geo, seed = context.geo, context.seed
        result = SuiteResult("hyperbolicity", True)
        for v in geo.tos.order:
            graph = geo.tos.space(v).graph
            estimate = GraphGeometry.four_point_delta(graph, "auto", seed=seed)
            result.details[graph.space_id] = {"delta": estimate.value, "mode": estimate.mode}
            if len(graph.edges()) == graph.n - 1 and estimate.value != 0:
                result.failures.append(f"{graph.space_id}: tree with delta {estimate.value}")
            if estimate.value > graph.diameter():
                result.failures.append(f"{graph.space_id}: delta {estimate.value} exceeds the diameter")
        if "delta" in context.params:
            result.details["glued_root"] = context.params["delta"]
        result.passed = not result.failures
        return result

    @staticmethod
    def electric(context: SuiteContext) -> SuiteResult:
        """Horoball distance bound, backtracking-free electric geodesics and their electro-ambient quality"""
        geo, seed = context.geo, context.seed
        result = SuiteResult("electric", True)
        for v in geo.tos.order:
            space = geo.tos.space(v)
            if not len(space.family):
                continue
            cs, gs = geo.coned(v), geo.glued(v)
            bound = Electrifier.measure_horoball_bound(space.graph, space.family, gs.depth)
            for violation in bound.details["violations"]:
                result.failures.append(f"X_{v}: horoball distance out of bounds {violation}")
            quality, tracking = Fraction(1), Fraction(0)
            for a, b in _off_member_pairs(geo, v, ELECTRIC_SAMPLE, seed):
                lam = Electrifier.electric_geodesic_nb(cs, a, b)
                if Electrifier.penetration_profile(lam, cs).backtracking:
                    result.failures.append(f"X_{v}: electric geodesic {a}-{b} backtracks")
                    continue
                quality = max(quality, Electrifier.electro_ambient(cs, gs, lam).quality)
                tracking = max(tracking, Electrifier.measure_electric_tracking(cs, gs, a, b).value)
            result.details[v] = {"horoball_max": bound.value, "electro_ambient_K": quality,
                                 "electric_tracking": tracking, "depth": gs.depth}
        result.passed = not result.failures
        return result

    @staticmethod
    def partial_electro(context: SuiteContext) -> SuiteResult:
        """
        Point targets with half-length cylinders reproduce coning, and the
        cone-subtree electrocution of X reproduces TC(X)
        """
        geo, seed = context.geo, context.seed
        result = SuiteResult("partial_electro", True)
        root = geo.tos.space(geo.root)
        cs = geo.coned(geo.root)
        points = PartialElectrocution.partially_electrocute(
            root.graph, root.family, PartialElectrocution.point_targets(root.graph, root.family),
            cylinder_length=Fraction(1, 2), measure=False)
        coning = PartialElectrocution.compare_host_metrics(points.graph, cs.graph, cs.graph.n,
                                                           PAIR_SAMPLE_COUNT, seed)
        result.details["point_targets_vs_coning"] = coning.value
        if coning.value != 0:
            result.failures.append(f"point targets differ from coning by {coning.value} at {coning.witness}")

        tc = geo.coned_tree
        pel = TreeBuilder.coned_tree_as_pel(geo.total, geo.locus)
        assembly = PartialElectrocution.compare_host_metrics(pel.graph, tc.graph, tc.graph.n,
                                                             PAIR_SAMPLE_COUNT, seed)
        result.details["coned_tree_vs_electrocution"] = assembly.value
        if assembly.value != 0:
            result.failures.append(f"TC(X) differs from its electrocution by {assembly.value} at {assembly.witness}")

        unit = TreeBuilder.coned_tree_as_pel(geo.total, geo.locus, cylinder_length=1)
        result.details["unit_cylinders_vs_coned_tree"] = PartialElectrocution.compare_host_metrics(
            unit.graph, tc.graph, geo.total.n, PAIR_SAMPLE_COUNT, seed).value
        if len(root.family):
            unit_points = PartialElectrocution.partially_electrocute(
                root.graph, root.family, PartialElectrocution.point_targets(root.graph, root.family), measure=False)
            result.details["electrocution_discrepancy"] = PartialElectrocution.measure_electrocution_discrepancy(
                unit_points, cs, seed=seed).value
        result.passed = not result.failures
        return result

    @staticmethod
    def tree(context: SuiteContext) -> SuiteResult:
        report = TreeBuilder.validate(context.geo.tos, seed=context.seed)
        details = {
            "maps": {f"{m.edge}->{m.end}": {"K": m.K_at_zero, "eps": m.eps_at_declared} for m in report.maps},
            "locus_components": report.locus_components,
            "flagged_density": sum(1 for d in report.density if d["flagged"]),
        }
        return SuiteResult("tree", report.ok, details, list(report.failures))

    @staticmethod
    def ladder(context: SuiteContext) -> SuiteResult:
        """Support is a subtree at the root, levels grow, subpieces clear D, the retraction is coarse Lipschitz"""
        result = SuiteResult("ladder", True)
        ladder, geo = context.ladder, context.geo
        if ladder is None:
            result.details["skipped"] = "no reference geodesic"
            return result
        tos, tc = geo.tos, geo.coned_tree
        for v in ladder.support:
            parent = tos.parent[v]
            if parent is not None and parent not in ladder.pieces:
                result.failures.append(f"support vertex {v} hangs below {parent}, which is outside the support")
            for sub in ladder.pieces[v].subpieces:
                if sub.separation <= ladder.D:
                    result.failures.append(f"subpiece {v}->{sub.child} has separation {sub.separation} <= D")
        levels = ladder.level_sets(tc)
        if any(not a <= b for a, b in zip(levels, levels[1:])):
            result.failures.append("ladder levels do not grow")
        params = context.params
        if "C0" not in params:
            CTHarness.record_ladder_constants(geo, ladder, params)
        hull = LadderBuilder.measure_ladder_quasiconvexity(geo, ladder, seed=context.seed)
        result.details = {
            "support": ladder.support, "levels": [len(level) for level in levels],
            "C0": params.get("C0"), "K0": params.get("K0"), "K1": params.get("K1"), "K2": params.get("K2"),
            "P6": params.get("P6"), "P7": params.get("P7"), "quasiconvexity": hull.value,
        }
        result.passed = not result.failures
        return result

    @staticmethod
    def rays(context: SuiteContext) -> SuiteResult:
        """Vertical rays step between 1 and C, and B^b escapes every tested ball"""
        result = SuiteResult("rays", True)
        ladder, geo = context.ladder, context.geo
        if ladder is None:
            result.details["skipped"] = "no reference geodesic"
            return result
        tos, total = geo.tos, geo.total
        root_graph = tos.space(tos.root).graph
        n_root = min(root_graph.distance(x, context.p) for x in ladder.pieces[tos.root].lam_b)
        C = context.params.get("C")
        tested = []
        for n in sorted({Fraction(k) for k in range(0, math.floor(n_root) + 1)} | {n_root}):
            escape = LadderBuilder.check_depth_escape(geo, ladder, context.p, n, C)
            tested.append({"n": n, "threshold": escape.threshold, "min_distance": escape.min_distance,
                           "passed": escape.passed, "closest": escape.closest,
                           "total_threshold": escape.total_threshold, "total_form_ok": escape.total_form_ok})
            if not escape.passed:
                result.failures.append(f"B^b meets the {escape.threshold}-ball about p at {escape.witness} (n = {n})")
            if escape.ray_bound_failures:
                result.failures.append(f"points below max(m, n_X - m*C) at n = {n}: {escape.ray_bound_failures[:5]}")
        last = escape
        for x in ladder.off_member_set(total):
            ray = LadderBuilder.vertical_ray(geo, ladder, x)
            if not ray.stuck and not ray.steps_within(last.C_rays):
                result.failures.append(f"ray from {x} has a step outside [1, {last.C_rays}]: {ray.displacements}")
        result.details = {"C": last.C, "C_rays": last.C_rays, "n_X": last.n_X, "stuck": last.stuck_rays, "escape": tested}
        result.passed = not result.failures
        return result

    @staticmethod
    def ct(context: SuiteContext) -> SuiteResult:
        """Rows re-verify, the exhaustive envelope is monotone and M(N) clears the ladder bound"""
        result = SuiteResult("ct", True)
        profile, geo = context.profile, context.geo
        if profile is None:
            result.details["skipped"] = "no profile"
            return result
        for row in profile.rows:
            if not CTHarness.verify_row(geo, profile, row):
                result.failures.append(f"row N = {row.N} does not re-verify")
            if row.shape_ok is False:
                result.failures.append(f"M({row.N}) = {row.M} is below {row.bound}")
        monotone = profile.lower_envelope_monotone()
        if profile.mode == "exhaustive" and not monotone:
            result.failures.append("exhaustive lower envelope is not monotone")
        result.details = {"mode": profile.mode, "monotone": monotone, "rows": len(profile.rows)}
        result.passed = not result.failures
        return result


def measure_instance(job: Tuple[str, int]) -> Dict:
    """Family-sweep constants of one generated instance"""
    spec, seed = job
    geo = TreeGeometry(InstanceGenerator.generate(spec, seed))
    p = CTHarness.default_reference_point(geo)
    params = CTHarness.resolve_params(geo, p=p, seed=seed)
    row = {"instance": spec, "vertices": geo.total.n, "delta": params["delta"], "C": params["C"]}
    for name in ("P1", "P3", "P4", "B"):
        row[name] = params.get(name)
    cs, gs = geo.coned(geo.root), geo.glued(geo.root)
    quality = Fraction(1)
    for a, b in _off_member_pairs(geo, geo.root, ELECTRIC_SAMPLE, seed):
        quality = max(quality, Electrifier.electro_ambient(cs, gs, Electrifier.electric_geodesic_nb(cs, a, b)).quality)
    row["electro_ambient_K"] = quality
    lam = CTHarness.reference_geodesic(geo, p)
    if lam is not None:
        ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
        row["C0"] = CTHarness.record_ladder_constants(geo, ladder, params).value
        row["ladder_quasiconvexity"] = LadderBuilder.measure_ladder_quasiconvexity(geo, ladder, seed=seed).value
    return row


def family_sweep(specs: Iterable[str], seed: int = 0, jobs: int = 1) -> Dict:
    """
    Measure the same constants across a family of instances

    Returns:
        {"rows": per-instance constants, "spread": max/min of each constant over the family}
    """
    rows = parallel_map(measure_instance, [(spec, seed) for spec in specs], jobs=jobs, desc="family sweep")
    spread = {}
    for name in ("delta", "P1", "P3", "P4", "electro_ambient_K", "C0", "ladder_quasiconvexity"):
        values = [row[name] for row in rows if row.get(name) is not None]
        if values:
            low, high = min(values), max(values)
            spread[name] = {"min": low, "max": high, "ratio": high / low if low else None}
    return {"rows": rows, "spread": spread}

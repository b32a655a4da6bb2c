"""
Finite weighted graphs as geodesic metric spaces

Edge lengths are exact rationals. Every graph keeps an integer scale (the
least common multiple of its length denominators) and runs its shortest-path
searches on the scaled integer weights, so distances come back exact.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from cachetools import LRUCache
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from tqdm import tqdm

from config import (
    EXHAUSTIVE_DELTA_LIMIT,
    MATRIX_LIMIT,
    ROW_CACHE_SIZE,
    SAMPLE_POOL_SIZE,
    SAMPLED_DELTA_COUNT,
    SHOW_PROGRESS,
)
from geometry.errors import DomainError, InvariantViolation

logger = logging.getLogger(__name__)

INF_INT = np.iinfo(np.int64).max // 4

Length = Union[Fraction, int, str]


def as_fraction(value: Length) -> Fraction:
    """Coerce an int, Fraction or "num/den" string to a Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise DomainError(f"Floating lengths are not exact: {value!r}")
    return Fraction(value)


def _to_int(row: np.ndarray) -> np.ndarray:
    out = np.full(row.shape, INF_INT, dtype=np.int64)
    finite = np.isfinite(row)
    out[finite] = np.rint(row[finite]).astype(np.int64)
    return out


def max_ratio(num: np.ndarray, den: np.ndarray) -> Tuple[Optional[Fraction], int]:
    """
    Exact maximum of num/den over flattened integer arrays

    Floats only shortlist the candidates; the winner is decided in Fractions,
    ties going to the smallest flat index.
    """
    num = np.asarray(num).ravel()
    den = np.asarray(den).ravel()
    if num.size == 0:
        return None, -1
    ratio = num / den
    top = ratio.max()
    shortlist = np.flatnonzero(ratio >= top - abs(top) * 1e-9 - 1e-12)
    best_index = int(shortlist[0])
    best = Fraction(int(num[best_index]), int(den[best_index]))
    for index in shortlist[1:]:
        value = Fraction(int(num[index]), int(den[index]))
        if value > best:
            best, best_index = value, int(index)
    return best, best_index


@dataclass
class PathWitness:
    """A vertex path in a named space, with its exact length"""
    space_id: str
    vertices: Tuple[int, ...]
    length: Fraction
    quality: Optional[Fraction] = None

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> Dict:
        return {
            "space_id": self.space_id,
            "vertices": list(self.vertices),
            "length": self.length,
            "quality": self.quality,
        }


@dataclass
class DeltaEstimate:
    """Four-point hyperbolicity estimate and how it was obtained"""
    value: Fraction
    mode: str
    exact: bool
    description: str
    space_id: str
    definition: str = "four-point"


@dataclass
class Measurement:
    """A measured constant together with the witness that attains it"""
    value: Fraction
    operation: str
    witness: Tuple = ()
    samples: int = 0
    exhaustive: bool = True
    details: Dict = field(default_factory=dict)


class MetricGraph:
    """Connected, undirected graph with positive rational edge lengths"""

    def __init__(self, space_id: str, num_vertices: int,
                 edges: Iterable[Tuple[int, int, Length]],
                 labels: Optional[Dict[int, str]] = None):
        """
        Build and validate a metric graph

        Args:
            space_id: Name of the space
            num_vertices: Vertices are the dense ids 0..num_vertices-1
            edges: (u, v, length) triples
            labels: Optional per-vertex labels
        """
        self.space_id = space_id
        self.n = int(num_vertices)
        self.labels: Dict[int, str] = dict(labels or {})

        failures: List[str] = []
        if self.n < 1:
            raise InvariantViolation(f"Graph {space_id} is invalid", ["graph has no vertices"])

        lengths: Dict[Tuple[int, int], Fraction] = {}
        for u, v, raw in edges:
            u, v = int(u), int(v)
            length = as_fraction(raw)
            if not (0 <= u < self.n and 0 <= v < self.n):
                failures.append(f"edge ({u}, {v}) uses an unknown vertex")
                continue
            if u == v:
                failures.append(f"self-loop at {u}")
                continue
            if length <= 0:
                failures.append(f"edge ({u}, {v}) has non-positive length {length}")
                continue
            key = (min(u, v), max(u, v))
            if key in lengths:
                failures.append(f"duplicate edge {key}")
                continue
            lengths[key] = length
        for vertex in self.labels:
            if not 0 <= vertex < self.n:
                failures.append(f"label on unknown vertex {vertex}")

        self._lengths = lengths
        self.nx_graph = nx.Graph()
        self.nx_graph.add_nodes_from(range(self.n))
        self.nx_graph.add_edges_from((u, v, {"length": length}) for (u, v), length in lengths.items())
        if not failures and not nx.is_connected(self.nx_graph):
            failures.append("graph is not connected")
        if failures:
            raise InvariantViolation(f"Graph {space_id} is invalid", failures)

        self.scale = math.lcm(*(length.denominator for length in lengths.values())) if lengths else 1
        self._nbrs: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
        rows, cols, data = [], [], []
        for (u, v), length in lengths.items():
            weight = int(length * self.scale)
            self._nbrs[u].append((v, weight))
            self._nbrs[v].append((u, weight))
            rows += [u, v]
            cols += [v, u]
            data += [float(weight), float(weight)]
        for adjacency in self._nbrs:
            adjacency.sort()
        self._csr = csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        self._rows: LRUCache = LRUCache(maxsize=ROW_CACHE_SIZE)
        self._set_rows: LRUCache = LRUCache(maxsize=ROW_CACHE_SIZE)
        self._matrix: Optional[np.ndarray] = None

    def __repr__(self) -> str:
        return f"MetricGraph({self.space_id!r}, n={self.n}, edges={len(self._lengths)})"

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_rows"] = LRUCache(maxsize=ROW_CACHE_SIZE)
        state["_set_rows"] = LRUCache(maxsize=ROW_CACHE_SIZE)
        state["_matrix"] = None
        return state

    # ------------------------------------------------------------------
    # structure
    # ------------------------------------------------------------------

    @property
    def vertices(self) -> range:
        return range(self.n)

    def has_vertex(self, v) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= int(v) < self.n

    def check_vertex(self, v) -> int:
        if not self.has_vertex(v):
            raise DomainError(f"Unknown vertex {v!r} in {self.space_id}")
        return int(v)

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [(u, v, length) for (u, v), length in sorted(self._lengths.items())]

    def edge_length(self, u: int, v: int) -> Optional[Fraction]:
        return self._lengths.get((min(u, v), max(u, v)))

    def neighbors(self, v: int) -> List[int]:
        return [w for w, _ in self._nbrs[v]]

    def scaled(self, value: Length) -> int:
        """Express an exact length in this graph's integer units (rounding down)"""
        return math.floor(as_fraction(value) * self.scale)

    def to_fraction(self, scaled_value) -> Fraction:
        return Fraction(int(scaled_value), self.scale)

    # ------------------------------------------------------------------
    # distances
    # ------------------------------------------------------------------

    def scaled_row(self, u: int) -> np.ndarray:
        """Scaled distances from u to every vertex"""
        u = self.check_vertex(u)
        row = self._rows.get(u)
        if row is None:
            row = _to_int(dijkstra(self._csr, directed=True, indices=u))
            row.setflags(write=False)
            self._rows[u] = row
        return row

    def scaled_rows(self, sources: Sequence[int]) -> np.ndarray:
        """Scaled distance rows, one per source, stacked in the given order"""
        sources = [self.check_vertex(s) for s in sources]
        if not sources:
            return np.zeros((0, self.n), dtype=np.int64)
        if self._matrix is None and 2 * len(set(sources)) > self.n and self.n <= MATRIX_LIMIT:
            self.matrix()
        if self._matrix is not None:
            return self._matrix[sources]
        local = {s: self._rows[s] for s in set(sources) if s in self._rows}
        missing = sorted(set(sources) - local.keys())
        if missing:
            block = _to_int(np.atleast_2d(dijkstra(self._csr, directed=True, indices=missing)))
            for s, row in zip(missing, block):
                row.setflags(write=False)
                local[s] = row
                self._rows[s] = row
        return np.vstack([local[s] for s in sources])

    def set_distance_row(self, sources: Iterable[int]) -> np.ndarray:
        """Scaled distance from the nearest vertex of `sources` to every vertex"""
        key = tuple(sorted({self.check_vertex(s) for s in sources}))
        if not key:
            raise DomainError(f"Empty source set in {self.space_id}")
        row = self._set_rows.get(key)
        if row is None:
            row = _to_int(dijkstra(self._csr, directed=True, indices=list(key), min_only=True))
            row.setflags(write=False)
            self._set_rows[key] = row
        return row

    def matrix(self) -> np.ndarray:
        """Dense scaled all-pairs matrix"""
        if self._matrix is None:
            if self.n > MATRIX_LIMIT:
                logger.warning(f"Materializing a {self.n}x{self.n} distance matrix for {self.space_id}")
            self._matrix = _to_int(dijkstra(self._csr, directed=True))
            self._matrix.setflags(write=False)
        return self._matrix

    def distance(self, u: int, v: int) -> Fraction:
        v = self.check_vertex(v)
        return self.to_fraction(self.scaled_row(u)[v])

    def eccentricity(self, v: int) -> Fraction:
        return self.to_fraction(self.scaled_row(v).max())

    def diameter(self) -> Fraction:
        if self.n <= MATRIX_LIMIT:
            return self.to_fraction(self.matrix().max())
        return max(self.eccentricity(v) for v in self.vertices)

    def pairs_within(self, radius: Length, chunk: int = 256) -> List[Tuple[int, int]]:
        """All pairs u < v with d(u, v) <= radius"""
        limit = as_fraction(radius) * self.scale
        pairs: List[Tuple[int, int]] = []
        for start in range(0, self.n, chunk):
            sources = list(range(start, min(self.n, start + chunk)))
            block = np.atleast_2d(dijkstra(self._csr, directed=True, indices=sources,
                                           limit=float(limit) + 0.5))
            for s, row in zip(sources, block):
                close = np.flatnonzero(np.isfinite(row))
                pairs.extend((s, int(t)) for t in close if t > s and row[t] <= limit)
        return pairs

    # ------------------------------------------------------------------
    # paths
    # ------------------------------------------------------------------

    def path(self, vertices: Sequence[int]) -> PathWitness:
        """Validate a vertex sequence as a path and measure it"""
        vertices = tuple(self.check_vertex(v) for v in vertices)
        if not vertices:
            raise DomainError(f"Empty path in {self.space_id}")
        length = Fraction(0)
        for a, b in zip(vertices, vertices[1:]):
            step = self.edge_length(a, b)
            if step is None:
                raise DomainError(f"Vertices {a} and {b} are not adjacent in {self.space_id}")
            length += step
        return PathWitness(self.space_id, vertices, length)

    def geodesic(self, u: int, v: int) -> PathWitness:
        """
        Shortest path from u to v

        Walking back from v, each step goes to the smallest-id neighbor that
        lies on some shortest path from u.
        """
        u = self.check_vertex(u)
        v = self.check_vertex(v)
        row = self.scaled_row(u)
        sequence = [v]
        current = v
        while current != u:
            for w, weight in self._nbrs[current]:
                if row[w] + weight == row[current]:
                    current = w
                    break
            sequence.append(current)
        sequence.reverse()
        return PathWitness(self.space_id, tuple(sequence), self.to_fraction(row[v]))

    def induced_subgraph(self, vertices: Iterable[int], space_id: str) -> Tuple["MetricGraph", List[int]]:
        """
        Subgraph induced on `vertices`, with its own path metric

        Returns:
            The subgraph (dense local ids, in increasing global order) and the
            local-to-global id list
        """
        global_of = sorted({self.check_vertex(v) for v in vertices})
        if not global_of:
            raise DomainError(f"Empty vertex set for induced subgraph of {self.space_id}")
        local_of = {g: i for i, g in enumerate(global_of)}
        edges = [(local_of[a], local_of[b], length) for (a, b), length in self._lengths.items()
                 if a in local_of and b in local_of]
        labels = {local_of[g]: self.labels[g] for g in global_of if g in self.labels}
        try:
            return MetricGraph(space_id, len(global_of), edges, labels), global_of
        except InvariantViolation as e:
            raise DomainError(f"Vertex set induces a disconnected subgraph of {self.space_id}: {e}")


class GraphBuilder:
    """Accumulates vertices and edges, then freezes them into a MetricGraph"""

    def __init__(self, space_id: str):
        self.space_id = space_id
        self.count = 0
        self.labels: Dict[int, str] = {}
        self.lengths: Dict[Tuple[int, int], Fraction] = {}

    def add_vertex(self, label: Optional[str] = None) -> int:
        vertex = self.count
        self.count += 1
        if label is not None:
            self.labels[vertex] = label
        return vertex

    def copy_graph(self, graph: MetricGraph, offset: Optional[int] = None) -> int:
        """Copy `graph` in; returns the id offset of its vertices"""
        if offset is None:
            offset = self.count
            self.count += graph.n
        for v, label in graph.labels.items():
            self.labels[offset + v] = label
        for u, v, length in graph.edges():
            self.add_edge(offset + u, offset + v, length)
        return offset

    def add_edge(self, u: int, v: int, length: Length, keep_shorter: bool = False):
        key = (min(u, v), max(u, v))
        length = as_fraction(length)
        if key in self.lengths:
            if not keep_shorter:
                raise InvariantViolation(f"Graph {self.space_id} is invalid", [f"duplicate edge {key}"])
            length = min(length, self.lengths[key])
        self.lengths[key] = length

    def build(self) -> MetricGraph:
        edges = [(u, v, length) for (u, v), length in self.lengths.items()]
        return MetricGraph(self.space_id, self.count, edges, self.labels)


class GraphGeometry:
    """Hyperbolicity, quasigeodesic and projection computations on metric graphs"""

    @staticmethod
    def four_point_delta(g: MetricGraph, mode: str = "exhaustive", count: Optional[int] = None,
                         seed: int = 0) -> DeltaEstimate:
        """
        Gromov four-point constant of a graph

        Args:
            g: Graph to scan
            mode: "exhaustive", "sampled" or "auto"
            count: Number of sampled 4-tuples (sampled mode)
            seed: Sampling seed

        Returns:
            Exact maximum defect in exhaustive mode, a lower bound otherwise
        """
        if mode == "auto":
            mode = "exhaustive" if g.n <= EXHAUSTIVE_DELTA_LIMIT else "sampled"
        if mode == "exhaustive":
            if g.n > EXHAUSTIVE_DELTA_LIMIT:
                logger.warning(f"Exhaustive four-point scan on {g.n} vertices of {g.space_id}")
            D = g.matrix()
            best = 0
            pairs = ((i, j) for i in range(g.n) for j in range(i + 1, g.n - 1))
            for i, j in tqdm(pairs, total=max(0, (g.n - 1) * (g.n - 2) // 2), disable=not SHOW_PROGRESS,
                             desc=f"delta {g.space_id}"):
                block = D[j + 1:, j + 1:]
                di = D[i, j + 1:]
                dj = D[j, j + 1:]
                s1 = D[i, j] + block
                s2 = di[:, None] + dj[None, :]
                s3 = dj[:, None] + di[None, :]
                hi = np.maximum(np.maximum(s1, s2), s3)
                lo = np.minimum(np.minimum(s1, s2), s3)
                defect = int((2 * hi + lo - s1 - s2 - s3).max())
                best = max(best, defect)
            return DeltaEstimate(Fraction(best, 2 * g.scale), "exhaustive", True,
                                 f"all 4-tuples of {g.n} vertices", g.space_id)
        if mode != "sampled":
            raise DomainError(f"Unknown four-point mode: {mode}")
        count = SAMPLED_DELTA_COUNT if count is None else int(count)
        if count <= 0:
            raise DomainError("Sampled four-point scan needs a positive count")
        rng = np.random.default_rng(seed)
        pool = np.sort(rng.choice(g.n, size=min(g.n, SAMPLE_POOL_SIZE), replace=False))
        sub = g.scaled_rows(pool.tolist())[:, pool]
        quads = rng.integers(0, len(pool), size=(count, 4))
        a, b, c, d = quads.T
        s1 = sub[a, b] + sub[c, d]
        s2 = sub[a, c] + sub[b, d]
        s3 = sub[a, d] + sub[b, c]
        hi = np.maximum(np.maximum(s1, s2), s3)
        lo = np.minimum(np.minimum(s1, s2), s3)
        best = int((2 * hi + lo - s1 - s2 - s3).max())
        return DeltaEstimate(Fraction(best, 2 * g.scale), "sampled", False,
                             f"sampled {count} 4-tuples from a {len(pool)}-vertex pool, seed {seed}",
                             g.space_id)

    @staticmethod
    def certify_quasigeodesic(g: MetricGraph, p: PathWitness) -> Fraction:
        """
        Least K >= 1 with length(sub) <= K*d(ends) + K over every vertex subsegment

        The result is also stored in p.quality.
        """
        g.path(p.vertices)
        vertices = list(p.vertices)
        if len(vertices) == 1:
            p.quality = Fraction(1)
            return p.quality
        steps = [int(g.edge_length(a, b) * g.scale) for a, b in zip(vertices, vertices[1:])]
        cumulative = np.concatenate([[0], np.cumsum(steps)]).astype(np.int64)
        rows = g.scaled_rows(vertices)[:, vertices]
        upper = np.triu_indices(len(vertices), k=1)
        spans = (cumulative[None, :] - cumulative[:, None])[upper]
        best, _ = max_ratio(spans, rows[upper] + g.scale)
        p.quality = max(Fraction(1), best)
        return p.quality

    @staticmethod
    def nearest_point_projection(g: MetricGraph, x: int, target: Union[PathWitness, Iterable[int]]) -> int:
        """Vertex of `target` closest to x; ties go to the smallest id"""
        candidates = GraphGeometry._target_vertices(target)
        row = g.scaled_row(x)
        return candidates[int(np.argmin(row[candidates]))]

    @staticmethod
    def projection_map(g: MetricGraph, target: Union[PathWitness, Iterable[int]]) -> np.ndarray:
        """Nearest-point projection of every vertex onto `target`"""
        candidates = GraphGeometry._target_vertices(target)
        rows = g.scaled_rows(candidates)
        return np.asarray(candidates, dtype=np.int64)[np.argmin(rows, axis=0)]

    @staticmethod
    def hausdorff_distance(g: MetricGraph, A: Iterable[int], B: Iterable[int]) -> Fraction:
        A = sorted({g.check_vertex(a) for a in A})
        B = sorted({g.check_vertex(b) for b in B})
        if not A or not B:
            raise DomainError("Hausdorff distance needs two nonempty sets")
        block = g.scaled_rows(A)[:, B]
        return g.to_fraction(max(block.min(axis=1).max(), block.min(axis=0).max()))

    @staticmethod
    def check_metric(g: MetricGraph, count: int = 2000, seed: int = 0) -> Measurement:
        """
        Symmetry and triangle-inequality check

        Full scan up to the exhaustive limit, sampled triples above it. The
        returned value is the largest triangle excess found (0 when sound).
        """
        if g.n <= EXHAUSTIVE_DELTA_LIMIT:
            D = g.matrix()
            excess = int(np.abs(D - D.T).max())
            for v in range(g.n):
                excess = max(excess, int((D - (D[:, v][:, None] + D[v, :][None, :])).max()))
            return Measurement(g.to_fraction(excess), "check_metric", samples=g.n ** 3)
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, g.n, size=(count, 3))
        rows = {v: g.scaled_row(v) for v in np.unique(triples[:, :2]).tolist()}
        excess = 0
        for u, v, w in triples.tolist():
            excess = max(excess, int(rows[u][w] - rows[u][v] - rows[v][w]), int(abs(rows[u][v] - rows[v][u])))
        return Measurement(g.to_fraction(excess), "check_metric", samples=count, exhaustive=False)

    @staticmethod
    def measure_projection_lipschitz(g: MetricGraph, target: Union[PathWitness, Iterable[int]],
                                     count: Optional[int] = None, seed: int = 0) -> Measurement:
        """
        Least P with d(pi(x), pi(y)) <= P*d(x, y) + P for nearest-point projection pi

        All pairs when the graph fits a dense matrix and no count is given,
        otherwise every pair of a seeded vertex pool.
        """
        image = GraphGeometry.projection_map(g, target)
        return GraphGeometry.map_lipschitz(g, g, np.arange(g.n), image, count=count, seed=seed,
                                           operation="measure_projection_lipschitz")

    @staticmethod
    def map_lipschitz(src: MetricGraph, dst: MetricGraph, domain: Sequence[int], image: Sequence[int],
                      count: Optional[int] = None, seed: int = 0,
                      operation: str = "map_lipschitz") -> Measurement:
        """
        Least P with d_dst(f(x), f(y)) <= P*d_src(x, y) + P over pairs of the domain

        Args:
            src: Source graph
            dst: Target graph
            domain: Source vertices
            image: f(domain[i]) for each i
            count: Restrict to a seeded sample of this many domain vertices
            seed: Sampling seed
            operation: Name recorded on the measurement
        """
        domain = np.asarray(domain, dtype=np.int64)
        image = np.asarray(image, dtype=np.int64)
        if count is None and len(domain) > MATRIX_LIMIT:
            count = SAMPLE_POOL_SIZE
        exhaustive = count is None or len(domain) <= count
        if not exhaustive:
            rng = np.random.default_rng(seed)
            pick = np.sort(rng.choice(len(domain), size=count, replace=False))
            domain, image = domain[pick], image[pick]
        if len(domain) < 2:
            return Measurement(Fraction(0), operation, samples=0, exhaustive=exhaustive)
        d_src = src.scaled_rows(domain.tolist())[:, domain]
        targets, inverse = np.unique(image, return_inverse=True)
        d_dst = dst.scaled_rows(targets.tolist())[:, targets][inverse][:, inverse]
        upper = np.triu_indices(len(domain), k=1)
        best, flat = max_ratio(d_dst[upper] * src.scale, (d_src[upper] + src.scale) * dst.scale)
        x, y = int(domain[upper[0][flat]]), int(domain[upper[1][flat]])
        return Measurement(best, operation, witness=(x, y), samples=len(upper[0]), exhaustive=exhaustive)

    @staticmethod
    def measure_projection_detour(g: MetricGraph, target: PathWitness, D: Length, count: int = 200,
                        seed: int = 0) -> Measurement:
        """
        Tracking constant for the projection detour

        For sampled pairs whose projections onto `target` are at least D
        apart, measures how far the detour x -> pi(x) -> pi(y) -> y strays from
        the geodesic [x, y].
        """
        threshold = as_fraction(D) * g.scale
        candidates = GraphGeometry._target_vertices(target)
        image = GraphGeometry.projection_map(g, candidates)
        first = {}
        for i, v in enumerate(target.vertices):
            first.setdefault(v, i)
        rng = np.random.default_rng(seed)
        pairs = rng.integers(0, g.n, size=(count, 2))
        best, witness, used = 0, (), 0
        for x, y in pairs.tolist():
            if x == y:
                continue
            px, py = int(image[x]), int(image[y])
            if g.scaled_row(px)[py] < threshold:
                continue
            used += 1
            i, j = sorted((first[px], first[py]))
            middle = list(target.vertices[i:j + 1])
            detour = list(g.geodesic(x, px).vertices) + middle + list(g.geodesic(py, y).vertices)
            row = g.set_distance_row(g.geodesic(x, y).vertices)
            deviation = int(row[detour].max())
            if deviation > best:
                best, witness = deviation, (x, y)
        return Measurement(g.to_fraction(best), "measure_projection_detour", witness=witness, samples=used,
                           exhaustive=False, details={"D": as_fraction(D)})

    @staticmethod
    def measure_quasiconvexity(g: MetricGraph, subset: Iterable[int], count: int = 200,
                               seed: int = 0) -> Measurement:
        """How far geodesics between points of `subset` leave it"""
        subset = sorted({g.check_vertex(v) for v in subset})
        if not subset:
            raise DomainError("Quasiconvexity of an empty set")
        row = g.set_distance_row(subset)
        total = len(subset) * (len(subset) - 1) // 2
        if total <= count:
            pairs = [(a, b) for i, a in enumerate(subset) for b in subset[i + 1:]]
            exhaustive = True
        else:
            rng = np.random.default_rng(seed)
            picks = rng.integers(0, len(subset), size=(count, 2))
            pairs = [(subset[a], subset[b]) for a, b in picks.tolist() if a != b]
            exhaustive = False
        best, witness = 0, ()
        for a, b in pairs:
            deviation = int(row[list(g.geodesic(a, b).vertices)].max())
            if deviation > best:
                best, witness = deviation, (a, b)
        return Measurement(g.to_fraction(best), "measure_quasiconvexity", witness=witness,
                           samples=len(pairs), exhaustive=exhaustive)

    @staticmethod
    def _target_vertices(target) -> List[int]:
        vertices = target.vertices if isinstance(target, PathWitness) else target
        candidates = sorted({int(v) for v in vertices})
        if not candidates:
            raise DomainError("Projection onto an empty target")
        return candidates

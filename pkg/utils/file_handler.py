"""
Reading and writing graphs, families, trees of spaces and reports
"""
import os
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import orjson
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from geometry.electric import HoroFamily
from geometry.errors import ParseError
from geometry.metric_graph import MetricGraph
from geometry.partial_electro import CylinderTarget
from trees.tree_spaces import EdgeSpace, TreeOfSpaces, VertexSpace

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2
PROFILE_COLUMNS = ["N", "M", "lambda_endpoints", "witness_vertex"]

LengthValue = Union[int, str]
Name = Union[int, str]


class GraphModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    space_id: str = "G"
    vertices: Union[int, List[int]]
    edges: List[Tuple[int, int, LengthValue]] = Field(default_factory=list)
    labels: Dict[int, str] = Field(default_factory=dict)


class FamilyModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    host: Optional[str] = None
    members: Dict[str, List[int]] = Field(default_factory=dict)
    separation: LengthValue = 1


class TargetModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    graph: GraphModel
    g: Dict[int, int]


class VertexSpaceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    graph: GraphModel
    family: Optional[FamilyModel] = None


class EdgeSpaceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    graph: GraphModel
    family: Optional[FamilyModel] = None
    maps: Dict[str, Union[List[int], Dict[int, int]]]
    declared_K: LengthValue = 1
    declared_eps: LengthValue = 0


class TreeModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance_id: str = "input"
    root: Name
    edges: List[Tuple[Name, Name]] = Field(default_factory=list)
    vertex_spaces: Dict[str, VertexSpaceModel]
    edge_spaces: Dict[str, EdgeSpaceModel] = Field(default_factory=dict)


def _validate(model, data: Any, where: str):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise ParseError(error["msg"], f"{where}:{location}" if location else where) from exc


def _length(value: LengthValue, where: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"Bad length {value!r}", where) from None


def to_jsonable(obj: Any) -> Any:
    """Fractions become "num/den" strings, numpy scalars plain numbers, keys strings"""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if is_dataclass(obj):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset, range)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x) for x in items]
    return str(obj)


class FileHandler:
    """JSON and CSV codecs for the command line and the report store"""

    @staticmethod
    def read_json(path: str) -> Any:
        """
        Load a JSON document

        Args:
            path: Path to file

        Returns:
            Parsed document

        Raises:
            ParseError: missing file or malformed JSON, located by line and column
        """
        if not os.path.exists(path):
            raise ParseError(f"No such file: {path}", path)
        with open(path, "rb") as f:
            raw = f.read()
        try:
            return orjson.loads(raw)
        except orjson.JSONDecodeError as exc:
            raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc

    @staticmethod
    def dumps(obj: Any) -> bytes:
        """Deterministic JSON bytes: sorted keys, two-space indent, trailing newline"""
        return orjson.dumps(to_jsonable(obj), option=JSON_OPTIONS) + b"\n"

    @staticmethod
    def write_bytes(path: str, data: bytes):
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "wb") as f:
            f.write(data)

    @staticmethod
    def parse_graph(data: Any, where: str = "graph") -> MetricGraph:
        """
        Build a metric graph from its JSON form

        Args:
            data: {"space_id", "vertices": count or dense id list, "edges": [[u, v, length]], "labels"}
            where: Location prefix for errors

        Returns:
            MetricGraph
        """
        model = _validate(GraphModel, data, where)
        if isinstance(model.vertices, int):
            n = model.vertices
        else:
            n = len(model.vertices)
            if sorted(model.vertices) != list(range(n)):
                raise ParseError("vertex ids must be 0..n-1", f"{where}:vertices")
        edges = [(u, v, _length(w, f"{where}:edges.{i}.2")) for i, (u, v, w) in enumerate(model.edges)]
        return MetricGraph(model.space_id, n, edges, model.labels)

    @staticmethod
    def parse_family(data: Optional[Any], graph: MetricGraph, where: str = "family") -> HoroFamily:
        if data is None:
            return HoroFamily.empty(graph)
        model = _validate(FamilyModel, data, where)
        if model.host is not None and model.host != graph.space_id:
            raise ParseError(f"family is declared on {model.host}, not {graph.space_id}", f"{where}:host")
        return HoroFamily(graph.space_id, model.members, _length(model.separation, f"{where}:separation"))

    @staticmethod
    def parse_targets(data: Any, where: str = "targets") -> Dict[str, CylinderTarget]:
        if not isinstance(data, dict):
            raise ParseError("targets must be an object keyed by member name", where)
        targets = {}
        for name, entry in data.items():
            model = _validate(TargetModel, entry, f"{where}:{name}")
            graph = FileHandler.parse_graph(model.graph.model_dump(), f"{where}:{name}.graph")
            targets[name] = CylinderTarget(graph, dict(model.g))
        return targets

    @staticmethod
    def parse_tree(data: Any, where: str = "tree") -> TreeOfSpaces:
        """
        Build a tree of spaces from its JSON form

        Edge-space maps are keyed by the base vertex they land in and given
        either as a list (image of vertex i at position i) or as an object.
        """
        model = _validate(TreeModel, data, where)
        vertex_spaces = {}
        for name, space in model.vertex_spaces.items():
            graph = FileHandler.parse_graph(space.graph.model_dump(), f"{where}:vertex_spaces.{name}.graph")
            family = FileHandler.parse_family(space.family.model_dump() if space.family else None, graph,
                                              f"{where}:vertex_spaces.{name}.family")
            vertex_spaces[name] = VertexSpace(name, graph, family)
        edge_spaces = {}
        for name, edge in model.edge_spaces.items():
            location = f"{where}:edge_spaces.{name}"
            graph = FileHandler.parse_graph(edge.graph.model_dump(), f"{location}.graph")
            family = FileHandler.parse_family(edge.family.model_dump() if edge.family else None, graph,
                                              f"{location}.family")
            maps = {}
            for end, image in edge.maps.items():
                if isinstance(image, dict):
                    if sorted(image) != list(range(graph.n)):
                        raise ParseError("map must cover every edge-space vertex", f"{location}.maps.{end}")
                    image = [image[x] for x in range(graph.n)]
                maps[end] = tuple(image)
            edge_spaces[name] = EdgeSpace(name, graph, family, maps,
                                          _length(edge.declared_K, f"{location}.declared_K"),
                                          _length(edge.declared_eps, f"{location}.declared_eps"))
        return TreeOfSpaces(model.instance_id, str(model.root), [(str(a), str(b)) for a, b in model.edges],
                            vertex_spaces, edge_spaces)

    @staticmethod
    def graph_to_dict(graph: MetricGraph) -> Dict:
        return {"space_id": graph.space_id, "vertices": graph.n,
                "edges": [[u, v, length] for u, v, length in graph.edges()],
                "labels": dict(graph.labels)}

    @staticmethod
    def family_to_dict(family: HoroFamily) -> Dict:
        return {"host": family.host_id, "members": {k: list(v) for k, v in family.members.items()},
                "separation": family.separation}

    @staticmethod
    def tree_to_dict(tos: TreeOfSpaces) -> Dict:
        """Inverse of parse_tree"""
        return {
            "instance_id": tos.instance_id,
            "root": tos.root,
            "edges": [[v, w] for v in tos.order for w in tos.children[v]],
            "vertex_spaces": {name: {"graph": FileHandler.graph_to_dict(space.graph),
                                     "family": FileHandler.family_to_dict(space.family)}
                              for name, space in tos.vertex_spaces.items()},
            "edge_spaces": {name: {"graph": FileHandler.graph_to_dict(edge.graph),
                                   "family": FileHandler.family_to_dict(edge.family),
                                   "maps": {end: list(image) for end, image in edge.maps.items()},
                                   "declared_K": edge.declared_K, "declared_eps": edge.declared_eps}
                            for name, edge in tos.edge_spaces.items()},
        }

    @staticmethod
    def frame(rows: List[Dict], columns: Optional[List[str]] = None) -> pd.DataFrame:
        """Rows as a string-valued frame with a fixed column order"""
        frame = pd.DataFrame([{k: to_jsonable(v) for k, v in row.items()} for row in rows], columns=columns)
        return frame.astype(object).where(frame.notna(), "")

    @staticmethod
    def csv_bytes(rows: List[Dict], columns: Optional[List[str]] = None) -> bytes:
        return FileHandler.frame(rows, columns).to_csv(index=False, lineterminator="\n").encode()

    @staticmethod
    def profile_csv(profile) -> bytes:
        """CT profile as N,M,lambda_endpoints,witness_vertex"""
        return FileHandler.csv_bytes(profile.csv_rows(), PROFILE_COLUMNS)

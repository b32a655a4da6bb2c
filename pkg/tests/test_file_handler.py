from fractions import Fraction

import orjson
import pytest

from conftest import fixture_path
from geometry.errors import InvariantViolation, ParseError
from utils.file_handler import FileHandler, to_jsonable


def test_lengths_are_exact(weighted_tree):
    assert weighted_tree.space_id == "tree"
    assert weighted_tree.labels[0] == "root"
    assert weighted_tree.distance(1, 3) == Fraction(1, 2)
    data = orjson.loads(FileHandler.dumps(FileHandler.graph_to_dict(weighted_tree)))
    assert [1, 3, "1/2"] in data["edges"]


@pytest.mark.parametrize("data, location", [
    ({"vertices": 3, "edges": [[0, 1, "x"]]}, "g:edges.0.2"),
    ({"vertices": 3, "edges": [[0, 1, 1], [1, 2, "1/0"]]}, "g:edges.1.2"),
    ({"vertices": [0, 2], "edges": []}, "g:vertices"),
    ({"vertices": 3, "colour": "red"}, "g:colour"),
    ({"edges": []}, "g:vertices"),
])
def test_graph_errors_are_located(data, location):
    with pytest.raises(ParseError) as info:
        FileHandler.parse_graph(data, "g")
    assert info.value.location == location


def test_invalid_lengths_reach_the_graph():
    with pytest.raises(InvariantViolation):
        FileHandler.parse_graph({"vertices": 2, "edges": [[0, 1, 0]]}, "g")


def test_malformed_json_reports_line_and_column(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": 3,\n "edges": [[0, 1, 1],, ]}')
    with pytest.raises(ParseError) as info:
        FileHandler.read_json(str(bad))
    path, line, column = info.value.location.rsplit(":", 2)
    assert path == str(bad) and line == "2" and int(column) > 1
    with pytest.raises(ParseError, match="No such file"):
        FileHandler.read_json(str(tmp_path / "missing.json"))


def test_family_must_match_its_host(path10):
    family = FileHandler.parse_family(FileHandler.read_json(fixture_path("all.json")), path10)
    assert family.members["H0"] == tuple(range(11))
    with pytest.raises(ParseError) as info:
        FileHandler.parse_family({"host": "other", "members": {}}, path10, "fam")
    assert info.value.location == "fam:host"
    assert len(FileHandler.parse_family(None, path10)) == 0


def test_tree_maps_may_be_lists_or_objects():
    tos = FileHandler.parse_tree(FileHandler.read_json(fixture_path("segment.json")), "segment.json")
    assert tos.edge_spaces["e0"].maps == {"0": (0, 1, 2, 3, 4), "1": (0, 1, 2, 3, 4)}
    data = FileHandler.read_json(fixture_path("segment.json"))
    data["edge_spaces"]["e0"]["maps"]["1"] = {"0": 0, "1": 1}
    with pytest.raises(ParseError) as info:
        FileHandler.parse_tree(data, "segment.json")
    assert info.value.location == "segment.json:edge_spaces.e0.maps.1"


def test_nested_errors_carry_the_full_path():
    data = FileHandler.read_json(fixture_path("segment.json"))
    data["vertex_spaces"]["1"]["graph"]["edges"][2][2] = "half"
    with pytest.raises(ParseError) as info:
        FileHandler.parse_tree(data, "t")
    assert info.value.location == "t:vertex_spaces.1.graph:edges.2.2"


def test_jsonable_values():
    assert to_jsonable({1: Fraction(3, 2), "s": {2, 1}, "t": (Fraction(4), None)}) == \
        {"1": "3/2", "s": [1, 2], "t": ["4", None]}


def test_csv_keeps_column_order_and_blanks():
    data = FileHandler.csv_bytes([{"M": Fraction(1, 2), "N": 1}, {"N": 2, "M": None}], ["N", "M"])
    assert data.decode().splitlines() == ["N,M", "1,1/2", "2,"]

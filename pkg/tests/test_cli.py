from fractions import Fraction

import orjson
import pytest
from typer.testing import CliRunner

from app import app
from conftest import fixture_path
from harness.ct_harness import CTHarness
from harness.generators import InstanceGenerator
from trees.tree_spaces import TreeGeometry
from utils.file_handler import FileHandler

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, ["--log-level", "warning", *args])


def test_delta_of_a_tree_is_zero():
    result = invoke("delta", "--in", fixture_path("tree.json"))
    assert result.exit_code == 0, result.output
    payload = orjson.loads(result.stdout)
    assert Fraction(str(payload["delta"])) == 0
    assert payload["mode"] == "exhaustive" and payload["exact"]


def test_cone_then_delta(tmp_path):
    coned = tmp_path / "coned.json"
    result = invoke("cone", "--in", fixture_path("path10.json"), "--family", fixture_path("all.json"),
                    "--out", str(coned))
    assert result.exit_code == 0, result.output
    graph = FileHandler.parse_graph(FileHandler.read_json(str(coned)), str(coned))
    assert graph.n == 12 and graph.distance(0, 10) == 1

    result = invoke("delta", "--in", str(coned))
    assert result.exit_code == 0, result.output
    assert Fraction(str(orjson.loads(result.stdout)["delta"])) <= 1


def test_cone_as_csv_lists_edges():
    result = invoke("cone", "--in", fixture_path("path10.json"), "--family", fixture_path("all.json"),
                    "--format", "csv")
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "u,v,length"
    assert len(lines) == 1 + 10 + 11


def test_ct_profile_csv_matches_the_library():
    result = invoke("ct-profile", "--gen", "tree-plain,2,3", "--N", "0..2", "--format", "csv")
    assert result.exit_code == 0, result.output
    geo = TreeGeometry(InstanceGenerator.generate("tree-plain,2,3"))
    profile = CTHarness.ct_profile(geo, None, [0, 1, 2])
    assert result.stdout == FileHandler.profile_csv(profile).decode()
    assert result.stdout.splitlines()[0] == "N,M,lambda_endpoints,witness_vertex"


def test_tree_command_reports_distorted_gluings(tmp_path):
    data = FileHandler.read_json(fixture_path("segment.json"))
    data["edge_spaces"]["e0"]["maps"]["1"] = [0, 2, 1, 3, 4]
    bad = tmp_path / "distorted.json"
    bad.write_bytes(orjson.dumps(data))
    assert invoke("tree", "--in", fixture_path("segment.json")).exit_code == 0
    result = invoke("tree", "--in", str(bad))
    assert result.exit_code == 1


def test_run_writes_deterministic_reports(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = invoke("run", "--gen", "tree-plain,2,2", "--N", "0..2", "--out", str(out),
                        "--suite", "metric", "--suite", "ct")
        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out.iterdir()) == ["profile.csv", "report.json", "timings.json"]
        report = FileHandler.read_json(str(out / "report.json"))
        outputs.append(((out / "profile.csv").read_bytes(), report))
    assert outputs[0] == outputs[1]
    assert outputs[0][1]["passed"]
    assert [suite["name"] for suite in outputs[0][1]["suites"]] == ["metric", "ct"]


@pytest.mark.parametrize("args", [
    ["delta"],
    ["delta", "--in", "missing.json"],
    ["ct-profile", "--gen", "no-such-generator"],
    ["ct-profile", "--gen", "tree-plain,2,2", "--in", "x.json"],
    ["ct-profile", "--gen", "tree-plain,2,2", "--N", "3..x"],
    ["run", "--gen", "tree-plain,2,2", "--suite", "nonsense"],
    ["ladder", "--gen", "tree-plain,2,2", "--lambda", "1"],
    ["ladder", "--gen", "tree-plain,2,2", "--D", "x"],
    ["ladder", "--gen", "tree-plain,2,2", "--C", "1/0"],
    ["ct-profile", "--gen", "tree-plain,2,2", "--C", "-1"],
])
def test_bad_input_exits_with_two(args, tmp_path):
    result = invoke(*args, *(["--out", str(tmp_path / "out")] if args[0] == "run" else []))
    assert result.exit_code == 2, result.output


def test_malformed_json_exits_with_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": 3,\n "edges": [[0, 1, 1],, ]}')
    result = invoke("delta", "--in", str(bad))
    assert result.exit_code == 2

import os

import pytest

from geometry.metric_graph import MetricGraph
from harness.generators import InstanceGenerator
from trees.tree_spaces import TreeGeometry
from utils.file_handler import FileHandler

TEST_FILES = os.path.join(os.path.dirname(os.path.dirname(__file__)), "test_files")


def fixture_path(name: str) -> str:
    return os.path.join(TEST_FILES, name)


def path_graph(n: int, space_id: str = "path") -> MetricGraph:
    """Unit path on n + 1 vertices"""
    return MetricGraph(space_id, n + 1, [(i, i + 1, 1) for i in range(n)])


def cycle_graph(n: int, space_id: str = "cycle") -> MetricGraph:
    return MetricGraph(space_id, n, [(i, (i + 1) % n, 1) for i in range(n)])


@pytest.fixture
def path10():
    return FileHandler.parse_graph(FileHandler.read_json(fixture_path("path10.json")), "path10.json")


@pytest.fixture
def weighted_tree():
    return FileHandler.parse_graph(FileHandler.read_json(fixture_path("tree.json")), "tree.json")


@pytest.fixture(scope="session")
def plain_tree_geometry():
    return TreeGeometry(InstanceGenerator.generate("tree-plain,2,3"))


@pytest.fixture(scope="session")
def identity_segment_geometry():
    return TreeGeometry(InstanceGenerator.generate("segment-identity,tree:2:3,2"))


@pytest.fixture(scope="session")
def free_geometry():
    return TreeGeometry(InstanceGenerator.generate("free-peripheral,2"))

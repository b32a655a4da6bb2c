from fractions import Fraction

import orjson
import pytest

from geometry.errors import DomainError
from harness.free_group import (FreeGroupBall, apply_map, coset_representative, invert, parse_word_map,
                                reduce_word)
from harness.generators import InstanceGenerator
from trees.tree_spaces import TreeBuilder
from utils.file_handler import FileHandler


def test_word_arithmetic():
    assert invert("ab") == "BA"
    assert reduce_word("aAbBab") == "ab"
    assert coset_representative("baA") == "b"
    phi = parse_word_map("a=a;b=ba")
    assert phi == {"a": "a", "b": "ba"}
    assert apply_map(phi, "B") == "AB"
    assert apply_map(phi, "bB") == ""


@pytest.mark.parametrize("text", ["a=a", "a=a;b", "a=a;b=bc", "c=a;b=b"])
def test_malformed_word_maps(text):
    with pytest.raises(DomainError):
        parse_word_map(text)


def test_radius_one_ball():
    """Five elements, two subdivided b-edges, three coset segments"""
    ball = FreeGroupBall(1, "F1")
    assert ball.words == ["", "a", "A", "b", "B"]
    assert ball.graph.n == 7
    assert ball.midpoint_id("") == 5 and ball.midpoint_id("B") == 6
    assert ball.graph.distance(ball.element_id("b"), ball.element_id("B")) == 2
    assert ball.graph.distance(ball.element_id("a"), ball.midpoint_id("")) == Fraction(3, 2)
    assert ball.family.members == {"H[e]": (0, 1, 2), "H[b]": (3,), "H[B]": (4,)}
    assert ball.family.measured_separation(ball.graph) == 1
    assert ball.is_midpoint(5) and ball.word_of(5) is None
    with pytest.raises(DomainError):
        ball.element_id("bb")


def test_ball_sizes_and_family():
    for radius in range(4):
        ball = FreeGroupBall(radius, f"F{radius}")
        assert len(ball.words) == 2 * 3 ** radius - 1
        assert ball.graph.n == len(ball.words) + len(ball.midpoints)
        assert ball.family.validate(ball.graph) == []
        covered = sorted(v for vertices in ball.family.members.values() for v in vertices)
        assert covered == list(range(len(ball.words)))


def test_automorphism_image_stays_injective():
    small, big = FreeGroupBall(1, "E"), FreeGroupBall(3, "X")
    image = small.map_into(big, parse_word_map("a=a;b=ba"))
    assert len(image) == small.graph.n
    assert len(set(image)) == len(image)
    assert image[small.element_id("b")] == big.element_id("ba")
    assert image[small.midpoint_id("")] == big.midpoint_id("")
    assert small.inclusion_into(big)[small.element_id("B")] == big.element_id("B")


@pytest.mark.parametrize("spec", [
    "tree-plain,2,3",
    "free-peripheral,2",
    "segment-identity,path:4,2",
    "segment-identity,cycle:5,1",
    "segment-automorphism,3,a=a;b=ba,1",
    "random-connected,20,5",
])
def test_generated_instances_validate(spec):
    tos = InstanceGenerator.generate(spec, seed=4)
    assert tos.instance_id == spec
    report = TreeBuilder.validate(tos)
    assert report.ok, f"{spec}: {report.failures}"


def test_generation_is_deterministic():
    first = FileHandler.dumps(FileHandler.tree_to_dict(InstanceGenerator.generate("random-connected,30,10", 7)))
    second = FileHandler.dumps(FileHandler.tree_to_dict(InstanceGenerator.generate("random-connected,30,10", 7)))
    other = FileHandler.dumps(FileHandler.tree_to_dict(InstanceGenerator.generate("random-connected,30,10", 8)))
    assert first == second
    assert first != other


@pytest.mark.parametrize("spec", [
    "",
    "no-such-generator",
    "tree-plain,two,3",
    "segment-identity,tree:2:3,0",
    "segment-identity,blob:3,2",
    "segment-automorphism,3,a=ab;b=b,1",
    "segment-identity,cycle:2,1",
])
def test_bad_generator_specs(spec):
    with pytest.raises(DomainError):
        InstanceGenerator.generate(spec)


def test_generated_instance_round_trips_through_json():
    tos = InstanceGenerator.generate("segment-identity,path:3,1")
    again = FileHandler.parse_tree(orjson.loads(FileHandler.dumps(FileHandler.tree_to_dict(tos))))
    assert FileHandler.tree_to_dict(again) == FileHandler.tree_to_dict(tos)

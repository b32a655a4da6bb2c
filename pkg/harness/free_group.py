"""
Balls in the Cayley graph of the free group F(a, b)

Words are reduced strings over a, A, b, B (capitals are inverses). Every
b-edge is subdivided by a midpoint vertex, so the maximal <a>-coset
segments are separated by distance 1 and the midpoints lie outside them.
"""
from fractions import Fraction
from typing import Dict, List, Optional

from geometry.electric import HoroFamily
from geometry.errors import DomainError
from geometry.metric_graph import MetricGraph

LETTERS = ("a", "A", "b", "B")
HALF = Fraction(1, 2)


def invert(word: str) -> str:
    return "".join(letter.swapcase() for letter in reversed(word))


def multiply(word: str, letter: str) -> str:
    if word and word[-1] == letter.swapcase():
        return word[:-1]
    return word + letter


def reduce_word(word: str) -> str:
    out = ""
    for letter in word:
        out = multiply(out, letter)
    return out


def apply_map(phi: Dict[str, str], word: str) -> str:
    """Image of a word under the endomorphism given on a and b"""
    return reduce_word("".join(phi[c] if c.islower() else invert(phi[c.lower()]) for c in word))


def parse_word_map(text: str) -> Dict[str, str]:
    """Parse "a=a;b=ba" into {"a": "a", "b": "ba"}"""
    phi = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise DomainError(f"Malformed generator image {part!r}")
        letter, image = (s.strip() for s in part.split("=", 1))
        if letter not in ("a", "b") or any(c not in LETTERS for c in image):
            raise DomainError(f"Malformed generator image {part!r}")
        phi[letter] = reduce_word(image)
    if set(phi) != {"a", "b"}:
        raise DomainError(f"Word map must give images of a and b: {text!r}")
    return phi


def coset_representative(word: str) -> str:
    """Shortest element of the coset word<a>"""
    return word.rstrip("aA")


class FreeGroupBall:
    """Radius-R ball of F(a, b) with subdivided b-edges, and its <a>-coset segments"""

    def __init__(self, radius: int, space_id: str):
        if radius < 0:
            raise DomainError(f"Ball radius must be non-negative, got {radius}")
        self.radius = radius
        self.words: List[str] = [""]
        level = [""]
        for _ in range(radius):
            level = [w + c for w in level for c in LETTERS if not (w and w[-1] == c.swapcase())]
            self.words.extend(level)
        self.index: Dict[str, int] = {w: i for i, w in enumerate(self.words)}

        self.midpoints: Dict[str, int] = {}
        for w in self.words:
            if multiply(w, "b") in self.index:
                self.midpoints[w] = len(self.words) + len(self.midpoints)
        self._midpoint_word = {i: w for w, i in self.midpoints.items()}

        edges = []
        # {x, xa} determines x, so each a-edge is listed once
        for w in self.words:
            wa = multiply(w, "a")
            if wa in self.index:
                edges.append((self.index[w], self.index[wa], 1))
        for w, m in self.midpoints.items():
            edges.append((self.index[w], m, HALF))
            edges.append((m, self.index[multiply(w, "b")], HALF))
        labels = {i: w or "e" for i, w in enumerate(self.words)}
        labels.update({m: f"{w or 'e'}|b" for w, m in self.midpoints.items()})
        self.graph = MetricGraph(space_id, len(self.words) + len(self.midpoints), edges, labels)

        members: Dict[str, List[int]] = {}
        for i, w in enumerate(self.words):
            members.setdefault(f"H[{coset_representative(w) or 'e'}]", []).append(i)
        self.family = HoroFamily(space_id, members, Fraction(1))

    def element_id(self, word: str) -> int:
        word = reduce_word(word)
        if word not in self.index:
            raise DomainError(f"Element {word or 'e'} lies outside the radius-{self.radius} ball")
        return self.index[word]

    def midpoint_id(self, word: str) -> int:
        """Midpoint of the edge from word to word*b"""
        word = reduce_word(word)
        if word not in self.midpoints:
            raise DomainError(f"Edge {word or 'e'}--{word or 'e'}b lies outside the radius-{self.radius} ball")
        return self.midpoints[word]

    def word_of(self, vertex: int) -> Optional[str]:
        return self.words[vertex] if vertex < len(self.words) else None

    def is_midpoint(self, vertex: int) -> bool:
        return vertex in self._midpoint_word

    def map_into(self, other: "FreeGroupBall", phi: Dict[str, str]) -> List[int]:
        """
        Vertex map induced by phi into another ball

        A midpoint goes to the midpoint of the first b-edge on the path
        spelled by phi(b) from the image of its lower end.
        """
        image = [other.element_id(apply_map(phi, w)) for w in self.words]
        for w in self.midpoints:
            current = apply_map(phi, w)
            for letter in phi["b"]:
                if letter == "b":
                    image.append(other.midpoint_id(current))
                    break
                if letter == "B":
                    image.append(other.midpoint_id(multiply(current, "B")))
                    break
                current = multiply(current, letter)
            else:
                raise DomainError(f"Image of b, {phi['b']!r}, has no b-letter")
        return image

    def inclusion_into(self, other: "FreeGroupBall") -> List[int]:
        return self.map_into(other, {"a": "a", "b": "b"})

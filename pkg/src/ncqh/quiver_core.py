"""Quiver combinatorics: presentations, doubling, vertex gluing and the JSON file format."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_RESERVED_RE = re.compile(r"^(e|g|E|d|D)(_|$)")


class QuiverError(ValueError):
    """Invalid quiver presentation."""


class QuiverSyntaxError(QuiverError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Arrow:
    name: str
    tail: int
    head: int


@dataclass(frozen=True)
class QuiverPresentation:
    vertices: tuple[int, ...]
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices))))
        if len(self.vertices) and any(not isinstance(v, int) or v < 1 for v in self.vertices):
            raise QuiverError("vertex labels must be positive integers")
        seen = set()
        for a in self.arrows:
            if not isinstance(a.name, str) or not _NAME_RE.match(a.name):
                raise QuiverError(f"invalid arrow name {a.name!r}")
            if _RESERVED_RE.match(a.name):
                raise QuiverError(f"arrow name {a.name!r} collides with a reserved symbol")
            if a.name in seen:
                raise QuiverError(f"duplicate arrow name {a.name!r}")
            seen.add(a.name)
            for v in (a.tail, a.head):
                if v not in self.vertices:
                    raise QuiverError(f"arrow {a.name!r} references missing vertex {v}")

    @classmethod
    def build(cls, vertices, arrows) -> "QuiverPresentation":
        """``arrows`` is an iterable of ``(name, tail, head)`` triples, in arrow order."""
        return cls(tuple(vertices), tuple(Arrow(*a) for a in arrows))

    def arrow(self, name: str) -> Arrow:
        for a in self.arrows:
            if a.name == name:
                return a
        raise KeyError(name)


@dataclass(frozen=True)
class DoubleArrow:
    name: str
    tail: int
    head: int
    sign: int  # +1 for arrows of the original quiver

    @property
    def reverse_name(self) -> str:
        return self.name[:-1] if self.name.endswith("*") else self.name + "*"


@dataclass(frozen=True)
class DoubleQuiver:
    """The double of a quiver.

    ``arrows`` lists every arrow followed directly by its reverse
    (a1, a1*, a2, a2*, ...); this is also the total order used by the
    quiver structures (sums over pairs and the product defining the moment map).
    """

    base: QuiverPresentation
    arrows: tuple[DoubleArrow, ...] = field(init=False)

    def __post_init__(self):
        arrows = []
        for a in self.base.arrows:
            arrows.append(DoubleArrow(a.name, a.tail, a.head, 1))
            arrows.append(DoubleArrow(a.name + "*", a.head, a.tail, -1))
        object.__setattr__(self, "arrows", tuple(arrows))

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.base.vertices

    def arrow(self, name: str) -> DoubleArrow:
        for a in self.arrows:
            if a.name == name:
                return a
        raise KeyError(name)

    def reverse(self, name: str) -> DoubleArrow:
        return self.arrow(self.arrow(name).reverse_name)


def double(q: QuiverPresentation) -> DoubleQuiver:
    return DoubleQuiver(q)


@dataclass(frozen=True)
class VertexGluing:
    source: QuiverPresentation
    glued: QuiverPresentation
    vertex_map: dict


def fuse_vertices(q: QuiverPresentation, v: int, w: int) -> VertexGluing:
    """Glue vertex ``w`` onto ``v``; the smaller label survives."""
    if v == w:
        raise QuiverError("cannot fuse a vertex with itself")
    for x in (v, w):
        if x not in q.vertices:
            raise QuiverError(f"missing vertex {x}")
    keep = min(v, w)
    vmap = {x: (keep if x in (v, w) else x) for x in q.vertices}
    glued = QuiverPresentation(
        tuple(sorted(set(vmap.values()))),
        tuple(Arrow(a.name, vmap[a.tail], vmap[a.head]) for a in q.arrows),
    )
    return VertexGluing(q, glued, vmap)


# ---------------------------------------------------------------- file format


def _pos(text: str, index: int) -> tuple[int, int]:
    line = text.count("\n", 0, index) + 1
    col = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, col


def parse_quiver(text: str) -> QuiverPresentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QuiverSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise QuiverSyntaxError("top-level value must be an object", 1, 1)
    unknown = set(doc) - {"vertices", "arrows", "order"}
    if unknown:
        raise QuiverError(f"unknown keys: {sorted(unknown)}")
    vertices = doc.get("vertices")
    arrows = doc.get("arrows", [])
    if not isinstance(vertices, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in vertices):
        raise QuiverError("'vertices' must be a list of integers")
    if len(set(vertices)) != len(vertices):
        raise QuiverError("duplicate vertex label")
    if not isinstance(arrows, list):
        raise QuiverError("'arrows' must be a list")
    parsed = []
    for i, a in enumerate(arrows):
        if not isinstance(a, dict) or set(a) != {"name", "tail", "head"}:
            raise QuiverError(f"arrow #{i} must have exactly the keys name, tail, head")
        parsed.append(Arrow(a["name"], a["tail"], a["head"]))
    names = [a.name for a in parsed]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise QuiverError(f"duplicate arrow name {dup[0]!r}")
    if "order" in doc:
        order = doc["order"]
        if not isinstance(order, list) or sorted(order) != sorted(names):
            raise QuiverError("'order' must be a permutation of the arrow names")
        by_name = {a.name: a for a in parsed}
        parsed = [by_name[n] for n in order]
    return QuiverPresentation(tuple(vertices), tuple(parsed))


def serialize_quiver(q: QuiverPresentation) -> str:
    doc = {
        "vertices": list(q.vertices),
        "arrows": [{"name": a.name, "tail": a.tail, "head": a.head} for a in q.arrows],
    }
    return json.dumps(doc, indent=2) + "\n"


BASIC = QuiverPresentation.build([1, 2], [("a", 1, 2)])
LOOP = QuiverPresentation.build([1], [("a", 1, 1)])

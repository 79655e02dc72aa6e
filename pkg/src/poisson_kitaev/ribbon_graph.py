"""Doubly ciliated ribbon graphs and their combinatorial moves.

A ribbon graph is a finite directed graph with a cyclic order of edge ends
around every vertex; fixing a starting point (a *cilium*) makes the order
linear.  A doubly ciliated graph additionally fixes, for every face, one of
the cyclic rotations of its face path.  Conventions, locked once and used
everywhere:

* edge ends at a vertex are listed counterclockwise, the cilium sitting
  before entry 0 of the list;
* face paths run clockwise; a step ``(e, +1)`` traverses the right side of
  ``e`` along its orientation, ``(e, -1)`` traverses the left side against
  it; the cilium sits before step 0.

Thickening every edge into a rectangle produces four generators per edge:
the sides ``r(e)``, ``l(e)`` (oriented towards ``t(e)``) and the ends
``f(e)`` at ``t(e)``, ``b(e)`` at ``s(e)`` (oriented towards the face left
of ``e``).  Paths (words in these generators) are the carriers of holonomy.
The endpoint of every generator is a *corner*: the gap between two cyclically
consecutive edge ends at a vertex, gap 0 being the ciliated one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import (
    Disconnected,
    InvalidPath,
    InvalidSite,
    MoveReplayError,
    NonIntegerGenus,
    NotAFacePath,
    PoissonKitaevError,
    PreconditionViolated,
    UncoveredEdgeSide,
    UnknownFace,
    UnknownReference,
    UnknownVertex,
)


class EdgeEnd(NamedTuple):
    edge: str
    end: str  # "s" (the end at the source, b(e)) or "t" (at the target, f(e))


class FaceStep(NamedTuple):
    edge: str
    sign: int  # +1: traverse r(e) with the edge, -1: traverse l(e) against it


class Edge(NamedTuple):
    id: str
    source: str
    target: str


class Corner(NamedTuple):
    """Node of the thickened graph: gap ``gap`` at vertex ``vertex``.

    Gap k sits between ends k-1 and k of the vertex order; gap 0 carries
    the cilium.
    """

    vertex: str
    gap: int


@dataclass(frozen=True)
class Vertex:
    id: str
    ends: tuple[EdgeEnd, ...]


@dataclass(frozen=True)
class Face:
    id: str
    steps: tuple[FaceStep, ...]


# a thickened-graph generator with exponent: (kind, edge, +1/-1)
Letter = tuple[str, str, int]

_KINDS = ("r", "l", "f", "b")


@dataclass(frozen=True)
class Path:
    """Freely reduced word in the thickened-graph generators.

    Letters are stored leftmost first; the holonomy of a path multiplies
    the generator holonomies in exactly this order (leftmost letter is the
    leftmost factor), so the rightmost letter is the first one traversed.
    """

    word: tuple[Letter, ...] = ()

    def __post_init__(self):
        for kind, edge, exp in self.word:
            if kind not in _KINDS or exp not in (1, -1):
                raise InvalidPath(f"bad letter {(kind, edge, exp)}")

    def __mul__(self, other: "Path") -> "Path":
        """Composition ``self * other``: ``other`` is traversed first."""
        return Path(_reduce_word(self.word + other.word))

    def inverse(self) -> "Path":
        return Path(tuple((k, e, -x) for (k, e, x) in reversed(self.word)))

    def reduced(self) -> "Path":
        return Path(_reduce_word(self.word))

    def is_empty(self) -> bool:
        return not self.word

    def to_json(self) -> list:
        return [[k, e, x] for (k, e, x) in self.word]

    @staticmethod
    def from_json(data: Sequence) -> "Path":
        return Path(tuple((k, e, int(x)) for (k, e, x) in data))


def _reduce_word(word: Sequence[Letter]) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for letter in word:
        if out and out[-1][:2] == letter[:2] and out[-1][2] == -letter[2]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


class RibbonGraph:
    """Immutable doubly ciliated ribbon graph.

    The constructor checks referential integrity, that the vertex orders
    partition the edge ends, that the declared faces cover every edge side
    exactly once and re-trace (up to rotation) to maximal-right-turn cycles,
    and that the graph is connected.  Moves build new graphs.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge],
                 faces: Iterable[Face]):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.faces = tuple(faces)
        self.vertex_by_id = {v.id: v for v in self.vertices}
        self.edge_by_id = {e.id: e for e in self.edges}
        self.face_by_id = {f.id: f for f in self.faces}
        if len(self.vertex_by_id) != len(self.vertices):
            raise UnknownReference("duplicate vertex id")
        if len(self.edge_by_id) != len(self.edges):
            raise UnknownReference("duplicate edge id")
        if len(self.face_by_id) != len(self.faces):
            raise UnknownReference("duplicate face id")

        # where every edge end / edge side sits
        self.end_location: dict[EdgeEnd, tuple[str, int]] = {}
        for v in self.vertices:
            if not v.ends:
                raise UnknownReference(f"vertex {v.id!r} has no edge ends")
            for pos, end in enumerate(v.ends):
                if end.edge not in self.edge_by_id:
                    raise UnknownReference(f"vertex {v.id!r} lists unknown edge {end.edge!r}")
                if end in self.end_location:
                    raise UnknownReference(f"edge end {end} listed twice")
                self.end_location[end] = (v.id, pos)
        for e in self.edges:
            if e.source not in self.vertex_by_id or e.target not in self.vertex_by_id:
                raise UnknownReference(f"edge {e.id!r} has unknown endpoint")
            for which, vid in (("s", e.source), ("t", e.target)):
                loc = self.end_location.get(EdgeEnd(e.id, which))
                if loc is None:
                    raise UnknownReference(f"end ({e.id!r}, {which!r}) missing from vertex orders")
                if loc[0] != vid:
                    raise UnknownReference(
                        f"end ({e.id!r}, {which!r}) listed at {loc[0]!r}, not at {vid!r}")
        if len(self.end_location) != 2 * len(self.edges):
            raise UnknownReference("vertex orders list ends of unknown edges")

        self.side_location: dict[tuple[str, int], tuple[str, int]] = {}
        for f in self.faces:
            if not f.steps:
                raise NotAFacePath(f"face {f.id!r} has an empty path")
            for pos, step in enumerate(f.steps):
                if step.edge not in self.edge_by_id:
                    raise UnknownReference(f"face {f.id!r} lists unknown edge {step.edge!r}")
                key = (step.edge, step.sign)
                if key in self.side_location:
                    raise UncoveredEdgeSide(f"edge side {key} covered twice")
                self.side_location[key] = (f.id, pos)
        if len(self.side_location) != 2 * len(self.edges):
            missing = [(e.id, s) for e in self.edges for s in (1, -1)
                       if (e.id, s) not in self.side_location]
            raise UncoveredEdgeSide(f"edge sides not covered by any face: {missing}")

        self._check_face_paths()
        self._check_connected()

    # --- basic queries -------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        try:
            return self.vertex_by_id[vid]
        except KeyError:
            raise UnknownVertex(vid) from None

    def face(self, fid: str) -> Face:
        try:
            return self.face_by_id[fid]
        except KeyError:
            raise UnknownFace(fid) from None

    def edge(self, eid: str) -> Edge:
        try:
            return self.edge_by_id[eid]
        except KeyError:
            raise UnknownReference(eid) from None

    def valence(self, vid: str) -> int:
        return len(self.vertex(vid).ends)

    def right_face(self, eid: str) -> str:
        return self.side_location[(self.edge(eid).id, 1)][0]

    def left_face(self, eid: str) -> str:
        return self.side_location[(self.edge(eid).id, -1)][0]

    def is_loop(self, eid: str) -> bool:
        e = self.edge(eid)
        return e.source == e.target

    def next_end(self, end: EdgeEnd) -> EdgeEnd:
        """The edge end directly after ``end`` in the cyclic vertex order."""
        vid, pos = self.end_location[end]
        ends = self.vertex_by_id[vid].ends
        return ends[(pos + 1) % len(ends)]

    # --- thickened-graph corners ---------------------------------------

    def generator_endpoints(self, kind: str, eid: str) -> tuple[Corner, Corner]:
        """Source and target corner of the generator ``kind(e)``."""
        e = self.edge(eid)
        vs, js = self.end_location[EdgeEnd(eid, "s")]
        vt, jt = self.end_location[EdgeEnd(eid, "t")]
        ms, mt = self.valence(vs), self.valence(vt)
        sr = Corner(vs, js)                 # corner before b(e)
        sl = Corner(vs, (js + 1) % ms)      # corner after b(e)
        tr = Corner(vt, (jt + 1) % mt)      # corner after f(e)
        tl = Corner(vt, jt)                 # corner before f(e)
        if kind == "r":
            return sr, tr
        if kind == "l":
            return sl, tl
        if kind == "f":
            return tr, tl
        if kind == "b":
            return sr, sl
        raise InvalidPath(f"unknown generator kind {kind!r}")

    def path_endpoints(self, path: Path) -> Optional[tuple[Corner, Corner]]:
        """(source, target) of a path; ``None`` for the empty word.

        Raises InvalidPath when consecutive letters do not chain.
        """
        if path.is_empty():
            return None
        target = None
        source = None
        prev_src = None
        for kind, eid, exp in path.word:
            a, b = self.generator_endpoints(kind, eid)
            if exp == -1:
                a, b = b, a
            if prev_src is not None and prev_src != b:
                raise InvalidPath(
                    f"letters do not compose at {(kind, eid, exp)}: {prev_src} != {b}")
            if target is None:
                target = b
            prev_src = a
            source = a
        return source, target

    # --- validation helpers ---------------------------------------------

    def _check_face_paths(self):
        declared = {}
        for f in self.faces:
            declared[f.id] = _canonical_cycle(f.steps)
        traced = {}
        for cyc in trace_faces(self.vertices, self.edges):
            traced.setdefault(_canonical_cycle(cyc), 0)
            traced[_canonical_cycle(cyc)] += 1
        for fid, canon in declared.items():
            if traced.get(canon, 0) <= 0:
                raise NotAFacePath(
                    f"face {fid!r} is not a rotation of a maximal-right-turn cycle")
            traced[canon] -= 1
        # side coverage was checked exactly, so every traced cycle got claimed

    def _check_connected(self):
        if not self.edges:
            raise Disconnected("graph has no edges")
        adj: dict[str, set[str]] = {v.id: set() for v in self.vertices}
        for e in self.edges:
            adj[e.source].add(e.target)
            adj[e.target].add(e.source)
        seen = {self.edges[0].source}
        stack = [self.edges[0].source]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != set(adj):
            raise Disconnected(f"unreached vertices: {sorted(set(adj) - seen)}")

    # --- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        """Canonical description: top-level lists sorted by id (the orders
        that carry meaning are the per-vertex and per-face ones)."""
        return {
            "vertices": [{"id": v.id, "ends": [[e.edge, e.end] for e in v.ends]}
                         for v in sorted(self.vertices, key=lambda v: v.id)],
            "edges": [{"id": e.id, "source": e.source, "target": e.target}
                      for e in sorted(self.edges, key=lambda e: e.id)],
            "faces": [{"id": f.id,
                       "path": [[s.edge, "+" if s.sign > 0 else "-"] for s in f.steps]}
                      for f in sorted(self.faces, key=lambda f: f.id)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _canonical_cycle(steps: Sequence[FaceStep]) -> tuple:
    steps = tuple(FaceStep(e, s) for e, s in steps)
    rotations = [steps[i:] + steps[:i] for i in range(len(steps))]
    return min(rotations)


def validate_graph(desc: dict) -> RibbonGraph:
    """Build a RibbonGraph from its JSON description (see README schema)."""
    try:
        vertices = [Vertex(str(v["id"]),
                           tuple(EdgeEnd(str(e), str(w)) for e, w in v["ends"]))
                    for v in desc["vertices"]]
        edges = [Edge(str(e["id"]), str(e["source"]), str(e["target"]))
                 for e in desc["edges"]]
        faces = [Face(str(f["id"]),
                      tuple(FaceStep(str(e), 1 if w == "+" else -1) for e, w in f["path"]))
                 for f in desc["faces"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise UnknownReference(f"malformed graph description: {exc}") from exc
    for v in vertices:
        for end in v.ends:
            if end.end not in ("s", "t"):
                raise UnknownReference(f"bad edge-end marker {end.end!r}")
    return RibbonGraph(vertices, edges, faces)


def load_graph(path: str) -> RibbonGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_graph(json.load(fh))


# --- face tracing ---------------------------------------------------------


def trace_faces(vertices: Iterable[Vertex], edges: Iterable[Edge]) -> list[tuple[FaceStep, ...]]:
    """All maximal-right-turn cycles of the vertex data, each edge side once.

    A step ``(e, +1)`` ends at ``t(e)`` entering through the end ``f(e)``;
    the cycle continues through the next end in the cyclic order.
    """
    vertices = tuple(vertices)
    edges = tuple(edges)
    end_location: dict[EdgeEnd, tuple[str, int]] = {}
    order = {v.id: v.ends for v in vertices}
    for v in vertices:
        for pos, end in enumerate(v.ends):
            end_location[end] = (v.id, pos)

    def successor(step: FaceStep) -> FaceStep:
        eid, sign = step
        enter = EdgeEnd(eid, "t" if sign > 0 else "s")
        vid, pos = end_location[enter]
        ends = order[vid]
        nxt = ends[(pos + 1) % len(ends)]
        return FaceStep(nxt.edge, 1 if nxt.end == "s" else -1)

    cycles = []
    todo = {(e.id, s) for e in edges for s in (1, -1)}
    while todo:
        start = FaceStep(*min(todo))
        cyc = [start]
        todo.discard(tuple(start))
        step = successor(start)
        while tuple(step) != tuple(start):
            cyc.append(step)
            todo.discard(tuple(step))
            step = successor(step)
        cycles.append(tuple(cyc))
    return cycles


# --- vertex / face paths, sites -------------------------------------------


def _end_letter(end: EdgeEnd) -> Letter:
    # f(e) enters the vertex path with exponent +1, b(e) with -1
    return ("f", end.edge, 1) if end.end == "t" else ("b", end.edge, -1)


def _side_letter(step: FaceStep) -> Letter:
    return ("r", step.edge, 1) if step.sign > 0 else ("l", step.edge, -1)


def vertex_path(graph: RibbonGraph, vid: str, k: Optional[int] = None) -> Path:
    """Partial vertex path through the first ``k`` ends (all by default).

    The word reads end 0 leftmost; the full path is a loop at the cilium
    corner of the vertex.
    """
    ends = graph.vertex(vid).ends
    if k is None:
        k = len(ends)
    if not 0 <= k <= len(ends):
        raise UnknownVertex(f"partial path count {k} out of range at {vid!r}")
    return Path(tuple(_end_letter(ends[j]) for j in range(k)))


def face_path(graph: RibbonGraph, fid: str, k: Optional[int] = None) -> Path:
    """Partial face path through the first ``k`` sides (all by default).

    Side 0 is traversed first, hence appears rightmost in the word.
    """
    steps = graph.face(fid).steps
    if k is None:
        k = len(steps)
    if not 0 <= k <= len(steps):
        raise UnknownFace(f"partial path count {k} out of range at {fid!r}")
    return Path(tuple(_side_letter(steps[j]) for j in reversed(range(k))))


def associated_face(graph: RibbonGraph, vid: str) -> str:
    """Face attached to the first edge end of ``vid`` (left for f, right for b)."""
    first = graph.vertex(vid).ends[0]
    if first.end == "s":
        return graph.right_face(first.edge)
    return graph.left_face(first.edge)


def associated_vertex(graph: RibbonGraph, fid: str) -> str:
    first = graph.face(fid).steps[0]
    e = graph.edge(first.edge)
    return e.source if first.sign > 0 else e.target


def is_site(graph: RibbonGraph, vid: str, fid: str) -> bool:
    """True iff the cilia of ``vid`` and ``fid`` meet at the same corner."""
    graph.vertex(vid), graph.face(fid)
    if associated_vertex(graph, fid) != vid or associated_face(graph, vid) != fid:
        return False
    first_end = graph.vertex(vid).ends[0]
    first_side = graph.face(fid).steps[0]
    if first_end.edge != first_side.edge:
        return False
    return ((first_end.end == "s" and first_side.sign > 0)
            or (first_end.end == "t" and first_side.sign < 0))


def is_paired(graph: RibbonGraph) -> bool:
    for e in graph.edges:
        if e.source == e.target:
            return False
        if graph.left_face(e.id) == graph.right_face(e.id):
            return False
    for v in graph.vertices:
        if not is_site(graph, v.id, associated_face(graph, v.id)):
            return False
    for f in graph.faces:
        if not is_site(graph, associated_vertex(graph, f.id), f.id):
            return False
    return True


def detect_sites(graph: RibbonGraph) -> list[tuple[str, str]]:
    """Pairwise disjoint sites, greedily in vertex-id order."""
    out = []
    used_f: set[str] = set()
    for v in sorted(graph.vertex_by_id):
        f = associated_face(graph, v)
        if f not in used_f and is_site(graph, v, f):
            out.append((v, f))
            used_f.add(f)
    return out


def surface_signature(graph: RibbonGraph, annulus_faces: Iterable[str]) -> tuple[int, int]:
    """(genus, boundary_count) of the surface with annuli on the given faces.

    Disks are glued to all other faces; chi = V - E + #disks = 2 - 2g - b.
    """
    annuli = set(annulus_faces)
    for fid in annuli:
        graph.face(fid)
    b = len(annuli)
    chi = len(graph.vertices) - len(graph.edges) + (len(graph.faces) - b)
    twice_genus = 2 - b - chi
    if twice_genus < 0 or twice_genus % 2:
        raise NonIntegerGenus(f"chi={chi}, boundary={b} gives 2g={twice_genus}")
    return twice_genus // 2, b


# --- combinatorial moves ---------------------------------------------------


@dataclass(frozen=True)
class MoveRecord:
    """Replayable description of one combinatorial move."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}

    @staticmethod
    def from_json(data: dict) -> "MoveRecord":
        params = {k: v for k, v in data.items() if k != "kind"}
        return MoveRecord(str(data["kind"]), params)


def _replace_end(ends: Sequence[EdgeEnd], old: EdgeEnd,
                 new: Sequence[EdgeEnd]) -> tuple[EdgeEnd, ...]:
    out: list[EdgeEnd] = []
    for end in ends:
        if end == old:
            out.extend(new)
        else:
            out.append(end)
    return tuple(out)


def _replace_step(steps: Sequence[FaceStep], old: FaceStep,
                  new: Sequence[FaceStep]) -> tuple[FaceStep, ...]:
    out: list[FaceStep] = []
    for step in steps:
        if step == old:
            out.extend(new)
        else:
            out.append(step)
    return tuple(out)


def _fresh(base: str, taken: set) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def reverse_edge(graph: RibbonGraph, eid: str) -> tuple[RibbonGraph, MoveRecord]:
    """Flip the orientation of ``eid``; vertex orders and face cilia stay put."""
    e = graph.edge(eid)
    swap = {EdgeEnd(eid, "s"): [EdgeEnd(eid, "t")], EdgeEnd(eid, "t"): [EdgeEnd(eid, "s")]}
    vertices = [Vertex(v.id, tuple(swap[end][0] if end in swap else end for end in v.ends))
                for v in graph.vertices]
    edges = [Edge(eid, e.target, e.source) if x.id == eid else x for x in graph.edges]
    faces = [Face(f.id, tuple(FaceStep(s.edge, -s.sign) if s.edge == eid else s
                              for s in f.steps))
             for f in graph.faces]
    return RibbonGraph(vertices, edges, faces), MoveRecord("reverse", {"edge": eid})


def split_edge(graph: RibbonGraph, eid: str,
               new_vertex: Optional[str] = None,
               new_edges: Optional[tuple[str, str]] = None) -> tuple[RibbonGraph, MoveRecord]:
    """Insert a bivalent vertex on ``eid``, ordered f(e1) < b(e2)."""
    e = graph.edge(eid)
    vm = new_vertex or _fresh(f"cut:{eid}", set(graph.vertex_by_id))
    taken = set(graph.edge_by_id)
    e1 = (new_edges or (None, None))[0] or _fresh(f"{eid}.1", taken)
    taken.add(e1)
    e2 = (new_edges or (None, None))[1] or _fresh(f"{eid}.2", taken)

    vertices = [Vertex(v.id, _replace_end(_replace_end(v.ends,
                                                       EdgeEnd(eid, "s"), [EdgeEnd(e1, "s")]),
                                          EdgeEnd(eid, "t"), [EdgeEnd(e2, "t")]))
                for v in graph.vertices]
    vertices.append(Vertex(vm, (EdgeEnd(e1, "t"), EdgeEnd(e2, "s"))))
    edges = [Edge(e1, e.source, vm) if x.id == eid else x for x in graph.edges]
    edges.append(Edge(e2, vm, e.target))
    faces = [Face(f.id, _replace_step(_replace_step(f.steps,
                                                    FaceStep(eid, 1),
                                                    [FaceStep(e1, 1), FaceStep(e2, 1)]),
                                      FaceStep(eid, -1),
                                      [FaceStep(e2, -1), FaceStep(e1, -1)]))
             for f in graph.faces]
    rec = MoveRecord("split_edge", {"edge": eid, "new_vertex": vm, "new_edges": [e1, e2]})
    return RibbonGraph(vertices, edges, faces), rec


def glue_bivalent(graph: RibbonGraph, vm: str,
                  new_edge: Optional[str] = None) -> tuple[RibbonGraph, MoveRecord]:
    """Remove a bivalent vertex, gluing its two edges into one.

    Requires ends ordered f(e1) < b(e2) at ``vm`` (hence t(e1)=vm=s(e2)),
    two distinct edges, and no face whose cilium sits at ``vm``.
    """
    v = graph.vertex(vm)
    if len(v.ends) != 2:
        raise PreconditionViolated(f"vertex {vm!r} is not bivalent")
    a, b = v.ends
    if not (a.end == "t" and b.end == "s"):
        raise PreconditionViolated(
            f"ends at {vm!r} must be ordered f(e1) < b(e2), got {a}, {b}")
    e1, e2 = a.edge, b.edge
    if e1 == e2:
        raise PreconditionViolated(f"edges at {vm!r} must be distinct")
    for f in graph.faces:
        if associated_vertex(graph, f.id) == vm:
            raise PreconditionViolated(
                f"face {f.id!r} has its cilium at {vm!r}; shift it first")
    src, tgt = graph.edge(e1).source, graph.edge(e2).target
    ep = new_edge or _fresh(f"{e1}+{e2}", set(graph.edge_by_id))

    vertices = [Vertex(w.id, _replace_end(_replace_end(w.ends,
                                                       EdgeEnd(e1, "s"), [EdgeEnd(ep, "s")]),
                                          EdgeEnd(e2, "t"), [EdgeEnd(ep, "t")]))
                for w in graph.vertices if w.id != vm]
    edges = [x for x in graph.edges if x.id not in (e1, e2)]
    edges.append(Edge(ep, src, tgt))

    faces = []
    for f in graph.faces:
        steps = list(f.steps)
        out: list[FaceStep] = []
        i = 0
        while i < len(steps):
            if (i + 1 < len(steps) and steps[i] == FaceStep(e1, 1)
                    and steps[i + 1] == FaceStep(e2, 1)):
                out.append(FaceStep(ep, 1))
                i += 2
            elif (i + 1 < len(steps) and steps[i] == FaceStep(e2, -1)
                    and steps[i + 1] == FaceStep(e1, -1)):
                out.append(FaceStep(ep, -1))
                i += 2
            else:
                if steps[i].edge in (e1, e2):
                    raise PreconditionViolated(
                        f"side {tuple(steps[i])} of face {f.id!r} is not glueable "
                        f"(pair split by the cilium)")
                out.append(steps[i])
                i += 1
        faces.append(Face(f.id, tuple(out)))
    rec = MoveRecord("glue_bivalent", {"vertex": vm, "glued": [e1, e2], "new_edge": ep})
    return RibbonGraph(vertices, edges, faces), rec


def double_edge(graph: RibbonGraph, eid: str,
                new_edges: Optional[tuple[str, str]] = None,
                new_face: Optional[str] = None) -> tuple[RibbonGraph, MoveRecord]:
    """Replace ``eid`` by two parallel edges with a bigon face between them.

    e1 keeps the left side of the old edge, e2 the right side; the new face
    runs r(e1) then l(e2) backwards.
    """
    e = graph.edge(eid)
    taken = set(graph.edge_by_id)
    e1 = (new_edges or (None, None))[0] or _fresh(f"{eid}.a", taken)
    taken.add(e1)
    e2 = (new_edges or (None, None))[1] or _fresh(f"{eid}.b", taken)
    fm = new_face or _fresh(f"bigon:{eid}", set(graph.face_by_id))

    vertices = [Vertex(v.id, _replace_end(_replace_end(v.ends,
                                                       EdgeEnd(eid, "s"),
                                                       [EdgeEnd(e2, "s"), EdgeEnd(e1, "s")]),
                                          EdgeEnd(eid, "t"),
                                          [EdgeEnd(e1, "t"), EdgeEnd(e2, "t")]))
                for v in graph.vertices]
    edges = [x for x in graph.edges if x.id != eid]
    edges.extend([Edge(e1, e.source, e.target), Edge(e2, e.source, e.target)])
    faces = [Face(f.id, _replace_step(_replace_step(f.steps,
                                                    FaceStep(eid, 1), [FaceStep(e2, 1)]),
                                      FaceStep(eid, -1), [FaceStep(e1, -1)]))
             for f in graph.faces]
    faces.append(Face(fm, (FaceStep(e1, 1), FaceStep(e2, -1))))
    rec = MoveRecord("double_edge", {"edge": eid, "new_edges": [e1, e2], "new_face": fm})
    return RibbonGraph(vertices, edges, faces), rec


def glue_two_edge_face(graph: RibbonGraph, fm: str,
                       new_edge: Optional[str] = None) -> tuple[RibbonGraph, MoveRecord]:
    """Collapse a bigon face, gluing its two parallel edges into one.

    Requires the face path r(e1) then l(e2) backwards (sides r(e1) < l(e2))
    and no vertex whose associated face is the bigon.
    """
    f = graph.face(fm)
    if len(f.steps) != 2:
        raise PreconditionViolated(f"face {fm!r} is not a bigon")
    s1, s2 = f.steps
    if not (s1.sign == 1 and s2.sign == -1):
        raise PreconditionViolated(
            f"face {fm!r} must run r(e1) then l(e2) backwards, got {s1}, {s2}")
    e1, e2 = s1.edge, s2.edge
    if e1 == e2:
        raise PreconditionViolated(f"bigon {fm!r} must have two distinct edges")
    a1, a2 = graph.edge(e1), graph.edge(e2)
    if a1.source != a2.source or a1.target != a2.target:
        raise PreconditionViolated(f"edges of bigon {fm!r} are not parallel")
    for v in graph.vertices:
        if associated_face(graph, v.id) == fm:
            raise PreconditionViolated(
                f"vertex {v.id!r} has its cilium at the bigon {fm!r}; shift it first")
    ep = new_edge or _fresh(f"{e1}+{e2}", set(graph.edge_by_id))

    vertices = []
    for v in graph.vertices:
        ends = list(v.ends)
        out: list[EdgeEnd] = []
        i = 0
        while i < len(ends):
            if (i + 1 < len(ends) and ends[i] == EdgeEnd(e2, "s")
                    and ends[i + 1] == EdgeEnd(e1, "s")):
                out.append(EdgeEnd(ep, "s"))
                i += 2
            elif (i + 1 < len(ends) and ends[i] == EdgeEnd(e1, "t")
                    and ends[i + 1] == EdgeEnd(e2, "t")):
                out.append(EdgeEnd(ep, "t"))
                i += 2
            else:
                if ends[i].edge in (e1, e2):
                    raise PreconditionViolated(
                        f"end {tuple(ends[i])} at {v.id!r} is not glueable "
                        f"(pair split by the cilium)")
                out.append(ends[i])
                i += 1
        vertices.append(Vertex(v.id, tuple(out)))
    edges = [x for x in graph.edges if x.id not in (e1, e2)]
    edges.append(Edge(ep, a1.source, a1.target))
    faces = [Face(g.id, _replace_step(_replace_step(g.steps,
                                                    FaceStep(e2, 1), [FaceStep(ep, 1)]),
                                      FaceStep(e1, -1), [FaceStep(ep, -1)]))
             for g in graph.faces if g.id != fm]
    rec = MoveRecord("glue_face", {"face": fm, "glued": [e1, e2], "new_edge": ep})
    return RibbonGraph(vertices, edges, faces), rec


def erase_edge(graph: RibbonGraph, eid: str) -> tuple[RibbonGraph, MoveRecord]:
    """Remove ``eid``, merging the face on its left into the one on its right.

    The merged face keeps the id and cilium of the right face.
    """
    fr, fl = graph.right_face(eid), graph.left_face(eid)
    if fr == fl:
        raise PreconditionViolated(
            f"faces left and right of {eid!r} coincide; cannot erase")
    right, left = graph.face(fr), graph.face(fl)
    i = right.steps.index(FaceStep(eid, 1))
    j = left.steps.index(FaceStep(eid, -1))
    merged = right.steps[:i] + left.steps[j + 1:] + left.steps[:j] + right.steps[i + 1:]
    vertices = []
    for v in graph.vertices:
        ends = tuple(end for end in v.ends if end.edge != eid)
        if not ends:
            raise PreconditionViolated(f"erasing {eid!r} would isolate vertex {v.id!r}")
        vertices.append(Vertex(v.id, ends))
    edges = [x for x in graph.edges if x.id != eid]
    faces = [Face(fr, merged) if g.id == fr else g
             for g in graph.faces if g.id != fl]
    rec = MoveRecord("erase", {"edge": eid, "merged_face": fr, "dropped_face": fl})
    return RibbonGraph(vertices, edges, faces), rec


def shift_cilium(graph: RibbonGraph, kind: str, ident: str,
                 steps: int) -> tuple[RibbonGraph, MoveRecord]:
    """Rotate the linear order at a vertex or face by ``steps`` positions."""
    if kind == "vertex":
        v = graph.vertex(ident)
        k = steps % len(v.ends)
        vertices = [Vertex(w.id, w.ends[k:] + w.ends[:k]) if w.id == ident else w
                    for w in graph.vertices]
        out = RibbonGraph(vertices, graph.edges, graph.faces)
    elif kind == "face":
        f = graph.face(ident)
        k = steps % len(f.steps)
        faces = [Face(g.id, g.steps[k:] + g.steps[:k]) if g.id == ident else g
                 for g in graph.faces]
        out = RibbonGraph(graph.vertices, graph.edges, faces)
    else:
        raise PreconditionViolated(f"shift_cilium kind must be vertex/face, got {kind!r}")
    return out, MoveRecord("shift_cilium", {"which": kind, "id": ident, "steps": steps})


def pair_graph(graph: RibbonGraph,
               sites: Sequence[tuple[str, str]]) -> tuple[RibbonGraph, list[MoveRecord]]:
    """Transform into a paired graph keeping the given disjoint sites intact.

    Four passes: split loops, double edges with equal left/right faces, give
    every other vertex a bigon partner face, give every other face a bivalent
    partner vertex.  Returns the move list for replaying the phase-space map.
    """
    if not sites:
        raise InvalidSite("need at least one site to keep")
    vs = [v for v, _ in sites]
    fs = [f for _, f in sites]
    if len(set(vs)) != len(vs) or len(set(fs)) != len(fs):
        raise InvalidSite("selected sites must be pairwise disjoint")
    for v, f in sites:
        if not is_site(graph, v, f):
            raise InvalidSite(f"({v!r}, {f!r}) is not a site")

    moves: list[MoveRecord] = []

    def apply(move_result):
        new_graph, rec = move_result
        moves.append(rec)
        return new_graph

    g = graph
    # 1. split every loop
    for eid in sorted(e.id for e in g.edges):
        if g.is_loop(eid):
            g = apply(split_edge(g, eid))
    # 2. double each edge whose two sides lie on the same face
    for eid in sorted(e.id for e in g.edges):
        if g.left_face(eid) == g.right_face(eid):
            g = apply(double_edge(g, eid))
    # 3. partner face for every unselected vertex
    step3_faces: set[str] = set()
    for vid in sorted(v.id for v in g.vertices):
        if vid in vs:
            continue
        first = g.vertex(vid).ends[0]
        g2, rec = double_edge(g, first.edge)
        moves.append(rec)
        g = g2
        fm = rec.params["new_face"]
        step3_faces.add(fm)
        g = apply(shift_cilium(g, "vertex", vid, 1))
        if first.end == "t":
            g = apply(shift_cilium(g, "face", fm, 1))
        if not is_site(g, vid, fm):  # construction guarantees this
            raise InvalidSite(f"internal: ({vid!r}, {fm!r}) failed to become a site")
    # 4. partner vertex for every remaining unselected face (incl. step-2 bigons)
    for fid in sorted(f.id for f in g.faces):
        if fid in fs or fid in step3_faces:
            continue
        first = g.face(fid).steps[0]
        g2, rec = split_edge(g, first.edge)
        moves.append(rec)
        g = g2
        vm = rec.params["new_vertex"]
        g = apply(shift_cilium(g, "face", fid, 1))
        if first.sign > 0:
            g = apply(shift_cilium(g, "vertex", vm, 1))
        if not is_site(g, vm, fid):
            raise InvalidSite(f"internal: ({vm!r}, {fid!r}) failed to become a site")

    if not is_paired(g):
        raise InvalidSite("internal: pairing passes did not produce a paired graph")
    for v, f in sites:
        if not is_site(g, v, f):
            raise InvalidSite(f"internal: selected site ({v!r}, {f!r}) destroyed")
    return g, moves


def apply_move(graph: RibbonGraph, rec: MoveRecord) -> RibbonGraph:
    """Replay one recorded move on ``graph``."""
    try:
        if rec.kind == "reverse":
            return reverse_edge(graph, rec.params["edge"])[0]
        if rec.kind == "split_edge":
            return split_edge(graph, rec.params["edge"], rec.params.get("new_vertex"),
                              tuple(rec.params.get("new_edges") or (None, None)))[0]
        if rec.kind == "glue_bivalent":
            return glue_bivalent(graph, rec.params["vertex"], rec.params.get("new_edge"))[0]
        if rec.kind == "double_edge":
            return double_edge(graph, rec.params["edge"],
                               tuple(rec.params.get("new_edges") or (None, None)),
                               rec.params.get("new_face"))[0]
        if rec.kind == "glue_face":
            return glue_two_edge_face(graph, rec.params["face"], rec.params.get("new_edge"))[0]
        if rec.kind == "erase":
            return erase_edge(graph, rec.params["edge"])[0]
        if rec.kind == "shift_cilium":
            return shift_cilium(graph, rec.params["which"], rec.params["id"],
                                int(rec.params["steps"]))[0]
        if rec.kind == "pair":
            return pair_graph(graph, [tuple(s) for s in rec.params["sites"]])[0]
    except MoveReplayError:
        raise
    except PoissonKitaevError as exc:
        raise MoveReplayError(f"move {rec.kind} failed: {exc}") from exc
    raise MoveReplayError(f"unknown move kind {rec.kind!r}")


def inverse_move(rec: MoveRecord) -> MoveRecord:
    """The move undoing ``rec`` (used when replaying a move list backwards)."""
    if rec.kind == "reverse":
        return rec
    if rec.kind == "split_edge":
        return MoveRecord("glue_bivalent", {"vertex": rec.params["new_vertex"],
                                            "glued": list(rec.params["new_edges"]),
                                            "new_edge": rec.params["edge"]})
    if rec.kind == "glue_bivalent":
        return MoveRecord("split_edge", {"edge": rec.params["new_edge"],
                                         "new_vertex": rec.params["vertex"],
                                         "new_edges": list(rec.params["glued"])})
    if rec.kind == "double_edge":
        return MoveRecord("glue_face", {"face": rec.params["new_face"],
                                        "glued": list(rec.params["new_edges"]),
                                        "new_edge": rec.params["edge"]})
    if rec.kind == "glue_face":
        return MoveRecord("double_edge", {"edge": rec.params["new_edge"],
                                          "new_edges": list(rec.params["glued"]),
                                          "new_face": rec.params["face"]})
    if rec.kind == "shift_cilium":
        return MoveRecord("shift_cilium", {"which": rec.params["which"],
                                           "id": rec.params["id"],
                                           "steps": -int(rec.params["steps"])})
    raise MoveReplayError(f"move kind {rec.kind!r} has no inverse")

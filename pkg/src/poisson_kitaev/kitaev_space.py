"""The product phase space with one Heisenberg-double copy per edge.

A point assigns a group element to every edge.  The holonomy functor sends
the four thickened-graph generators of an edge decorated with d to

    r(e) -> pi_+(d)        l(e) -> pi_+(d^-1)^-1
    f(e) -> pi_-(d)        b(e) -> pi_-(d^-1)^-1

and words to products, leftmost letter leftmost factor.  Vertex holonomies
land in G_-, face holonomies in G_+; a point is flat at a vertex/face when
the corresponding holonomy is trivial.  Gauge actions of G_+ at vertices and
G_- at faces are the dressing-type compositions below; at a site they merge
into an action of the whole group.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional

import numpy as np

from . import ribbon_graph as rg
from .double_group import DoubleGroupBackend, make_backend
from .errors import (
    InvalidPath,
    NoFreeSite,
    NotASite,
    PoissonKitaevError,
    UnknownReference,
)

# a point is a dict edge-id -> backend element; treated as immutable
Point = dict


def identity_point(backend: DoubleGroupBackend, graph: rg.RibbonGraph) -> Point:
    return {e.id: backend.identity() for e in graph.edges}


def random_point(backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                 rng: np.random.Generator, radius: float = 0.5) -> Point:
    return {e.id: backend.random_element(rng, radius) for e in graph.edges}


def point_distance(backend: DoubleGroupBackend, a: Point, b: Point) -> float:
    if set(a) != set(b):
        raise UnknownReference("points cover different edge sets")
    return max(backend.distance(a[e], b[e]) for e in a)


def save_point(backend: DoubleGroupBackend, point: Point, path: str):
    data = {"backend": backend.name,
            "edges": {e: backend.to_floats(g) for e, g in sorted(point.items())}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)


def load_point(path: str, backend: Optional[DoubleGroupBackend] = None
               ) -> tuple[DoubleGroupBackend, Point]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    backend = backend or make_backend(data["backend"])
    if data.get("backend") and data["backend"] != backend.name:
        raise UnknownReference(
            f"point file is for backend {data['backend']!r}, not {backend.name!r}")
    point = {e: backend.from_floats(v) for e, v in data["edges"].items()}
    return backend, point


# --- holonomy -----------------------------------------------------------


def generator_value(backend: DoubleGroupBackend, kind: str, d):
    if kind == "r":
        return backend.pi_plus(d)
    if kind == "f":
        return backend.pi_minus(d)
    if kind == "l":
        return backend.inv(backend.pi_plus(backend.inv(d)))
    if kind == "b":
        return backend.inv(backend.pi_minus(backend.inv(d)))
    raise InvalidPath(f"unknown generator kind {kind!r}")


def hol(backend: DoubleGroupBackend, graph: rg.RibbonGraph, path: rg.Path,
        point: Point) -> object:
    """Holonomy of a path at a point; empty words give the identity."""
    graph.path_endpoints(path)  # validates chaining
    out = backend.identity()
    for kind, eid, exp in path.word:
        if eid not in point:
            raise InvalidPath(f"path visits edge {eid!r} missing from the point")
        val = generator_value(backend, kind, point[eid])
        if exp == -1:
            val = backend.inv(val)
        out = backend.mul(out, val)
    return out


def vertex_holonomy(backend, graph, vid: str, point: Point):
    return hol(backend, graph, rg.vertex_path(graph, vid), point)


def face_holonomy(backend, graph, fid: str, point: Point):
    return hol(backend, graph, rg.face_path(graph, fid), point)


def site_holonomy(backend, graph, site: tuple[str, str], point: Point):
    vid, fid = site
    if not rg.is_site(graph, vid, fid):
        raise NotASite(f"({vid!r}, {fid!r})")
    return backend.mul(vertex_holonomy(backend, graph, vid, point),
                       face_holonomy(backend, graph, fid, point))


def holonomy_defect(backend, graph, label: str, point: Point) -> float:
    """Distance of the vertex/face holonomy at ``label`` from the identity."""
    if label in graph.vertex_by_id:
        h = vertex_holonomy(backend, graph, label, point)
    elif label in graph.face_by_id:
        h = face_holonomy(backend, graph, label, point)
    else:
        raise UnknownReference(label)
    return backend.dist_to_identity(h)


def is_flat(backend, graph, point: Point, labels: Iterable[str],
            tol: float = 1e-9) -> bool:
    return all(holonomy_defect(backend, graph, l, point) < tol for l in labels)


# --- gauge actions --------------------------------------------------------


def vertex_action(backend, graph, vid: str, alpha, point: Point,
                  check: bool = True) -> Point:
    """Action of alpha in G_+ at a vertex.

    The per-end maps are applied last end first; the partial vertex
    holonomy entering each step is evaluated at the point that step
    receives (this matters only at loops).
    """
    if check:
        backend.require_plus(alpha)
    ends = graph.vertex(vid).ends
    out = dict(point)
    for k in range(len(ends), 0, -1):
        c_k = hol(backend, graph, rg.vertex_path(graph, vid, k - 1), out)
        factor = backend.pi_plus(backend.mul(alpha, c_k))
        eid, which = ends[k - 1]
        if which == "t":
            out[eid] = backend.mul(factor, out[eid])
        else:
            out[eid] = backend.mul(out[eid], backend.inv(factor))
    return out


def face_action(backend, graph, fid: str, x, point: Point,
                check: bool = True) -> Point:
    """Action of x in G_- at a face, mirror of the vertex action."""
    if check:
        backend.require_minus(x)
    steps = graph.face(fid).steps
    x_inv = backend.inv(x)
    out = dict(point)
    for k in range(len(steps), 0, -1):
        d_k = hol(backend, graph, rg.face_path(graph, fid, k - 1), out)
        factor = backend.pi_minus(backend.mul(d_k, x_inv))
        eid, sign = steps[k - 1]
        if sign > 0:
            out[eid] = backend.mul(out[eid], factor)
        else:
            out[eid] = backend.mul(backend.inv(factor), out[eid])
    return out


def site_action(backend, graph, site: tuple[str, str], g, point: Point) -> Point:
    """Action of the full group at a site: the G_- part acts at the face
    after the G_+ part acted at the vertex."""
    vid, fid = site
    if not rg.is_site(graph, vid, fid):
        raise NotASite(f"({vid!r}, {fid!r})")
    gm, gp = backend.factorize(g)
    return face_action(backend, graph, fid, gm,
                       vertex_action(backend, graph, vid, gp, point, check=False),
                       check=False)


def reverse_edge_point_map(backend, eid: str, point: Point) -> Point:
    """Point transport for edge reversal: invert the decoration at ``eid``."""
    out = dict(point)
    out[eid] = backend.inv(out[eid])
    return out


# --- flat sampling ----------------------------------------------------------


def sample_flat(backend, graph, labels: Iterable[str],
                rng: np.random.Generator, radius: float = 0.5,
                tol: float = 1e-9) -> Point:
    """Random point flat at every vertex/face in ``labels``.

    Free coordinates are exp of small random algebra vectors; one edge per
    constrained vertex (face) donates its G_- (G_+) factor, solved exactly
    in reverse discovery order.  Needs a vertex and adjacent face outside
    ``labels`` to anchor the sweep.
    """
    labels = set(labels)
    for l in labels:
        if l not in graph.vertex_by_id and l not in graph.face_by_id:
            raise UnknownReference(l)
    point = random_point(backend, graph, rng, radius)
    if not labels:
        return point

    plan = _flatness_plan(graph, labels)

    # working decorations in the plan's per-edge orientation
    work = {}
    for e in graph.edges:
        work[e.id] = backend.inv(point[e.id]) if plan.flipped[e.id] else point[e.id]

    for kind, label, eid in reversed(plan.solves):
        if kind == "vertex":
            path = rg.vertex_path(graph, label)
            target_kind = "f"
        else:
            path = rg.face_path(graph, label)
            target_kind = "r"
        # split the holonomy word at the factor carrying the unknown
        flip = plan.flipped[eid]
        left = backend.identity()
        right = backend.identity()
        seen = False
        for wkind, weid, wexp in path.word:
            # the unknown factor: pi_-(delta) enters a vertex word as the f- or
            # b-letter of e depending on the working orientation; likewise r/l
            is_unknown = (weid == eid) and _letter_matches(wkind, wexp, target_kind, flip)
            if is_unknown:
                if seen:
                    raise NoFreeSite(
                        f"constraint at {label!r} meets edge {eid!r} twice")
                seen = True
                continue
            val = _oriented_generator_value(backend, wkind, wexp, work[weid],
                                            plan.flipped[weid])
            if not seen:
                left = backend.mul(left, val)
            else:
                right = backend.mul(right, val)
        if not seen:
            raise NoFreeSite(f"internal: unknown factor not found at {label!r}")
        solved = backend.mul(backend.inv(left), backend.inv(right))
        gm, gp = backend.factorize(work[eid])
        if kind == "vertex":
            work[eid] = backend.mul(backend.require_minus(solved, 1e-6), gp)
        else:
            work[eid] = backend.mul(gm, backend.require_plus(solved, 1e-6))

    out = {}
    for e in graph.edges:
        out[e.id] = backend.inv(work[e.id]) if plan.flipped[e.id] else work[e.id]
    if not is_flat(backend, graph, out, labels, tol):
        raise PoissonKitaevError("flat sampling failed to satisfy the constraints")
    return out


def _letter_matches(kind: str, exp: int, target: str, flipped: bool) -> bool:
    """Does this vertex/face-path letter hold the working f- or r-factor?

    With the edge flipped, its f-letter appears in paths as a b-letter of the
    stored orientation and vice versa; same for r and l.
    """
    swap = {"f": "b", "b": "f", "r": "l", "l": "r"}
    effective = swap[kind] if flipped else kind
    return effective == target


def _oriented_generator_value(backend, kind: str, exp: int, delta, flipped: bool):
    """Value of a stored-orientation generator given the working decoration."""
    swap = {"f": "b", "b": "f", "r": "l", "l": "r"}
    k = swap[kind] if flipped else kind
    val = generator_value(backend, k, delta)
    if (kind in ("f", "b", "r", "l")) and flipped:
        # reversing an edge maps r -> l^-1, l -> r^-1, f -> b^-1, b -> f^-1
        val = backend.inv(val)
    if exp == -1:
        val = backend.inv(val)
    return val


class _FlatPlan:
    def __init__(self, flipped, solves):
        self.flipped = flipped          # edge id -> bool (working orientation)
        self.solves = solves            # list of ("vertex"|"face", label, edge)


def _flatness_plan(graph: rg.RibbonGraph, labels: set) -> _FlatPlan:
    """Discovery order and per-constraint designated edges.

    Walks the graph so that every processed edge starts (in its working
    orientation) at a visited vertex with the face on its left already
    visited.  A newly reached vertex or right-hand face carrying a
    constraint is then solvable through that edge's incoming end / right
    side, which the constraint word meets exactly once.
    """
    anchor = None
    for v in sorted(graph.vertex_by_id):
        if v in labels:
            continue
        for f in sorted(graph.face_by_id):
            if f in labels:
                continue
            if any(v in (graph.edge(s.edge).source, graph.edge(s.edge).target)
                   for s in graph.face(f).steps):
                anchor = (v, f)
                break
        if anchor:
            break
    if anchor is None:
        raise NoFreeSite("every vertex/adjacent-face pair carries a constraint")

    v0, f0 = anchor
    flipped = {e.id: False for e in graph.edges}
    done_v = {v0}
    done_f = {f0}
    done_e: set[str] = set()
    solves: list[tuple[str, str, str]] = []

    def oriented(eid):
        e = graph.edge(eid)
        if flipped[eid]:
            return e.target, e.source, graph.right_face(eid), graph.left_face(eid)
        return e.source, e.target, graph.left_face(eid), graph.right_face(eid)

    def process(eid):
        done_e.add(eid)
        _, tgt, _, fr = oriented(eid)
        if tgt not in done_v:
            done_v.add(tgt)
            if tgt in labels:
                solves.append(("vertex", tgt, eid))
        if fr not in done_f:
            done_f.add(fr)
            if fr in labels:
                solves.append(("face", fr, eid))

    # anchor edge: the face path of f0 enters v0 through some side; orienting
    # that edge out of v0 puts f0 on its left
    start = None
    for s in graph.face(f0).steps:
        e = graph.edge(s.edge)
        if s.sign < 0 and e.source == v0:
            start = (e.id, False)
            break
        if s.sign > 0 and e.target == v0:
            start = (e.id, True)
            break
    if start is None:
        raise NoFreeSite(f"face {f0!r} is not adjacent to vertex {v0!r}")
    eid, flip = start
    flipped[eid] = flip
    process(eid)

    while len(done_e) < len(graph.edges):
        progress = False
        for e in graph.edges:
            if e.id in done_e:
                continue
            for flip in (False, True):
                flipped[e.id] = flip
                src, _, fl, _ = oriented(e.id)
                if src in done_v and fl in done_f:
                    process(e.id)
                    progress = True
                    break
            else:
                flipped[e.id] = False
            if progress:
                break
        if not progress:
            # cannot happen on a connected validated graph
            raise NoFreeSite("could not order the flatness constraints")
    return _FlatPlan(flipped, solves)

"""Phase-space maps that travel with combinatorial graph moves.

Gluing a bivalent vertex (a bigon face) pushes points forward by the
holonomy of the merged edge; the inverse splitting inserts the factorized
part that makes the created vertex (face) flat.  A recorded move list is a
replayable script: ``transport_point`` follows it forwards, and the pairing
map of ``pair_graph`` is undone by replaying the inverted list backwards.
"""

from __future__ import annotations

from typing import Optional, Sequence

from . import kitaev_space as ks
from . import ribbon_graph as rg
from .double_group import DoubleGroupBackend
from .errors import MoveReplayError, NotFlatAtVertex


def glue_vertex_map(backend: DoubleGroupBackend, graph: rg.RibbonGraph, vm: str,
                    point: ks.Point) -> tuple[rg.RibbonGraph, ks.Point, rg.MoveRecord]:
    """Point map for removing the bivalent vertex ``vm``.

    The merged edge carries d2 pi_+(d1), the holonomy along the top side of
    both rectangles and the far end of the second.
    """
    new_graph, rec = rg.glue_bivalent(graph, vm)
    e1, e2 = rec.params["glued"]
    new_point = {e: g for e, g in point.items() if e not in (e1, e2)}
    new_point[rec.params["new_edge"]] = backend.mul(
        point[e2], backend.pi_plus(point[e1]))
    return new_graph, new_point, rec


def glue_face_map(backend: DoubleGroupBackend, graph: rg.RibbonGraph, fm: str,
                  point: ks.Point) -> tuple[rg.RibbonGraph, ks.Point, rg.MoveRecord]:
    """Point map for collapsing the bigon ``fm``: the new edge carries
    pi_-(d1) d2."""
    new_graph, rec = rg.glue_two_edge_face(graph, fm)
    e1, e2 = rec.params["glued"]
    new_point = {e: g for e, g in point.items() if e not in (e1, e2)}
    new_point[rec.params["new_edge"]] = backend.mul(
        backend.pi_minus(point[e1]), point[e2])
    return new_graph, new_point, rec


def split_vertex_map(backend: DoubleGroupBackend, graph: rg.RibbonGraph, eid: str,
                     point: ks.Point) -> tuple[rg.RibbonGraph, ks.Point, rg.MoveRecord]:
    """Insert a flat bivalent vertex on ``eid``: e1 keeps the decoration,
    e2 takes its G_- factor.  Right inverse of the vertex gluing."""
    new_graph, rec = rg.split_edge(graph, eid)
    e1, e2 = rec.params["new_edges"]
    new_point = {e: g for e, g in point.items() if e != eid}
    new_point[e1] = point[eid]
    new_point[e2] = backend.pi_minus(point[eid])
    return new_graph, new_point, rec


def split_face_map(backend: DoubleGroupBackend, graph: rg.RibbonGraph, eid: str,
                   point: ks.Point) -> tuple[rg.RibbonGraph, ks.Point, rg.MoveRecord]:
    """Double ``eid`` with a flat bigon: e1 keeps the decoration, e2 takes
    its G_+ factor.  Right inverse of the face gluing."""
    new_graph, rec = rg.double_edge(graph, eid)
    e1, e2 = rec.params["new_edges"]
    new_point = {e: g for e, g in point.items() if e != eid}
    new_point[e1] = point[eid]
    new_point[e2] = backend.pi_plus(point[eid])
    return new_graph, new_point, rec


def transport_point(backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                    rec: rg.MoveRecord, point: ks.Point) -> ks.Point:
    """Push a point through one recorded move (graph replay is separate).

    Shifting a cilium leaves points alone; erasing forgets the edge.
    """
    kind = rec.kind
    if kind == "reverse":
        return ks.reverse_edge_point_map(backend, rec.params["edge"], point)
    if kind == "shift_cilium":
        return dict(point)
    if kind == "erase":
        return {e: g for e, g in point.items() if e != rec.params["edge"]}
    if kind == "split_edge":
        e1, e2 = rec.params["new_edges"]
        out = {e: g for e, g in point.items() if e != rec.params["edge"]}
        out[e1] = point[rec.params["edge"]]
        out[e2] = backend.pi_minus(point[rec.params["edge"]])
        return out
    if kind == "double_edge":
        e1, e2 = rec.params["new_edges"]
        out = {e: g for e, g in point.items() if e != rec.params["edge"]}
        out[e1] = point[rec.params["edge"]]
        out[e2] = backend.pi_plus(point[rec.params["edge"]])
        return out
    if kind == "glue_bivalent":
        e1, e2 = rec.params["glued"]
        out = {e: g for e, g in point.items() if e not in (e1, e2)}
        out[rec.params["new_edge"]] = backend.mul(point[e2], backend.pi_plus(point[e1]))
        return out
    if kind == "glue_face":
        e1, e2 = rec.params["glued"]
        out = {e: g for e, g in point.items() if e not in (e1, e2)}
        out[rec.params["new_edge"]] = backend.mul(backend.pi_minus(point[e1]), point[e2])
        return out
    raise MoveReplayError(f"no point transport for move kind {kind!r}")


def replay(backend: DoubleGroupBackend, graph: rg.RibbonGraph,
           moves: Sequence[rg.MoveRecord],
           point: Optional[ks.Point] = None
           ) -> tuple[rg.RibbonGraph, Optional[ks.Point]]:
    """Replay a move script, transporting an optional point along."""
    for i, rec in enumerate(moves):
        try:
            new_graph = rg.apply_move(graph, rec)
            if point is not None:
                point = transport_point(backend, graph, rec, point)
            graph = new_graph
        except MoveReplayError as exc:
            raise MoveReplayError(f"step {i}: {exc}") from exc
    return graph, point


def pair_graph_map(backend: DoubleGroupBackend, paired_graph: rg.RibbonGraph,
                   moves: Sequence[rg.MoveRecord], point: ks.Point) -> ks.Point:
    """Map a point on the paired graph back to the original graph.

    Replays the inverses of the pairing moves in reverse order (splits
    become gluings, cilium shifts are undone first so the gluing
    preconditions hold).
    """
    graph = paired_graph
    for rec in reversed(moves):
        inv = rg.inverse_move(rec)
        new_graph = rg.apply_move(graph, inv)
        point = transport_point(backend, graph, inv, point)
        graph = new_graph
    return point


def cilium_shift_residual(backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                          label: str, elem, point: ks.Point,
                          flat_tol: float = 1e-9) -> float:
    """Residual of the one-step cilium-shift relation for gauge actions.

    For a point flat at the vertex v, acting after rotating the order by one
    equals acting with a corrected element:

        alpha >'_v p = pi_+(alpha Hol(p_1(v))(p)^-1) >_v p

    and dually at a face, with correction pi_-((x Hol(p_1(f))(p))^-1)^-1.
    Raises NotFlatAtVertex when the flatness hypothesis fails.
    """
    if ks.holonomy_defect(backend, graph, label, point) >= flat_tol:
        raise NotFlatAtVertex(f"point is not flat at {label!r}")
    shifted, _ = rg.shift_cilium(
        graph, "vertex" if label in graph.vertex_by_id else "face", label, 1)
    if label in graph.vertex_by_id:
        backend.require_plus(elem)
        h1 = ks.hol(backend, graph, rg.vertex_path(graph, label, 1), point)
        corrected = backend.pi_plus(backend.mul(elem, backend.inv(h1)))
        lhs = ks.vertex_action(backend, shifted, label, elem, point)
        rhs = ks.vertex_action(backend, graph, label, corrected, point)
    else:
        backend.require_minus(elem)
        h1 = ks.hol(backend, graph, rg.face_path(graph, label, 1), point)
        corrected = backend.inv(backend.pi_minus(backend.inv(backend.mul(elem, h1))))
        lhs = ks.face_action(backend, shifted, label, elem, point)
        rhs = ks.face_action(backend, graph, label, corrected, point)
    return ks.point_distance(backend, lhs, rhs)

"""Fock-Rosly spaces: one copy of the group per edge, coupled bracket.

The same edge-decoration dictionaries serve as points.  The bivector couples
edges meeting at a vertex through the classical r-matrix; in the
right-trivialized frame every edge end contributes the column map

    -I      if the end points into the vertex,
    Ad_d    if it points out (d the edge decoration),

and the block between ends i, j of a vertex is -M_i (R_a + s_ij R_s) M_j^T
with s_ij the order sign.  The holonomy functor forgets edge ends and reads
edge sides as the raw decoration, so face holonomies are ordinary products
of decorations and vertex paths are invisible.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import kitaev_space as ks
from . import ribbon_graph as rg
from .double_group import DoubleGroupBackend, r_antisymmetric, r_symmetric
from .errors import InvalidPath, NoUniqueSolution, PreconditionViolated

Point = dict


def fr_bivector(backend: DoubleGroupBackend, R: np.ndarray, graph: rg.RibbonGraph,
                point: Point) -> np.ndarray:
    """Global coupled bivector, edge blocks ordered as ``graph.edges``."""
    d = backend.dim
    Ra, Rs = r_antisymmetric(R), r_symmetric(R)
    index = {e.id: i for i, e in enumerate(graph.edges)}
    W = np.zeros((d * len(graph.edges), d * len(graph.edges)))
    for v in graph.vertices:
        mats = []
        for end in v.ends:
            if end.end == "t":
                mats.append((index[end.edge], -np.eye(d)))
            else:
                mats.append((index[end.edge], backend.adjoint_matrix(point[end.edge])))
        for i, (ei, Mi) in enumerate(mats):
            for j, (ej, Mj) in enumerate(mats):
                s = 0 if i == j else (1 if i > j else -1)
                block = -Mi @ (Ra + s * Rs) @ Mj.T
                W[ei * d:(ei + 1) * d, ej * d:(ej + 1) * d] += block
    return W


def fr_vertex_action(backend: DoubleGroupBackend, graph: rg.RibbonGraph, vid: str,
                     g, point: Point) -> Point:
    """Gauge action at a vertex: conjugation on loops, left (right inverse)
    multiplication on incoming (outgoing) edges."""
    graph.vertex(vid)
    gi = backend.inv(g)
    out = dict(point)
    for e in graph.edges:
        if e.source == vid and e.target == vid:
            out[e.id] = backend.mul(backend.mul(g, out[e.id]), gi)
        elif e.target == vid:
            out[e.id] = backend.mul(g, out[e.id])
        elif e.source == vid:
            out[e.id] = backend.mul(out[e.id], gi)
    return out


def hol_fr(backend: DoubleGroupBackend, graph: rg.RibbonGraph, path: rg.Path,
           point: Point):
    """Holonomy functor: both edge sides read the decoration, ends read 1."""
    graph.path_endpoints(path)
    out = backend.identity()
    for kind, eid, exp in path.word:
        if kind in ("f", "b"):
            continue
        if eid not in point:
            raise InvalidPath(f"path visits edge {eid!r} missing from the point")
        val = point[eid]
        if exp == -1:
            val = backend.inv(val)
        out = backend.mul(out, val)
    return out


def fr_face_holonomy(backend, graph, fid: str, point: Point):
    return hol_fr(backend, graph, rg.face_path(graph, fid), point)


def fr_holonomy_defect(backend, graph, fid: str, point: Point) -> float:
    return backend.dist_to_identity(fr_face_holonomy(backend, graph, fid, point))


def fr_is_flat(backend, graph, point: Point, faces: Iterable[str],
               tol: float = 1e-9) -> bool:
    return all(fr_holonomy_defect(backend, graph, f, point) < tol for f in faces)


# --- graph-move maps -------------------------------------------------------


def fr_reverse_edge(backend, eid: str, point: Point) -> Point:
    out = dict(point)
    out[eid] = backend.inv(out[eid])
    return out


def fr_glue_edges(backend, graph, vm: str, point: Point
                  ) -> tuple[rg.RibbonGraph, Point, rg.MoveRecord]:
    """Contract a bivalent vertex; the merged edge carries d2 d1."""
    new_graph, rec = rg.glue_bivalent(graph, vm)
    e1, e2 = rec.params["glued"]
    out = {e: g for e, g in point.items() if e not in (e1, e2)}
    out[rec.params["new_edge"]] = backend.mul(point[e2], point[e1])
    return new_graph, out, rec


def fr_erase_edge(backend, graph, eid: str, point: Point
                  ) -> tuple[rg.RibbonGraph, Point, rg.MoveRecord]:
    new_graph, rec = rg.erase_edge(graph, eid)
    out = {e: g for e, g in point.items() if e != eid}
    return new_graph, out, rec


def fr_flat_section(backend, graph: rg.RibbonGraph, eid: str, flat_face: str,
                    reduced_point: Point) -> Point:
    """Right inverse of erasing ``eid``: reinsert the unique decoration that
    trivializes the face holonomy at ``flat_face``.

    ``graph`` is the graph before erasing; the face path must meet ``eid``
    exactly once, which holds whenever the faces on its two sides differ.
    """
    steps = graph.face(flat_face).steps
    hits = [s for s in steps if s.edge == eid]
    if len(hits) != 1:
        raise NoUniqueSolution(
            f"face {flat_face!r} meets edge {eid!r} {len(hits)} times")
    path = rg.face_path(graph, flat_face)
    left = backend.identity()
    right = backend.identity()
    seen = False
    sign = hits[0].sign
    for kind, weid, exp in path.word:
        if weid == eid:
            seen = True
            continue
        val = reduced_point[weid]
        if exp == -1:
            val = backend.inv(val)
        if not seen:
            left = backend.mul(left, val)
        else:
            right = backend.mul(right, val)
    solved = backend.mul(backend.inv(left), backend.inv(right))
    out = dict(reduced_point)
    # the face path traverses eid as r(e) (exponent +) or l(e)^-1 (inverse)
    out[eid] = solved if sign > 0 else backend.inv(solved)
    return out


# --- moduli-style reduction -------------------------------------------------


class FlatReduction:
    """Iterated erase-edge reduction removing a set of flat faces.

    For each face in ``flat_faces`` (in the given order) one adjacent edge
    with distinct side faces is erased, merging the flat face away.  The
    forward map drops decorations; the section rebuilds them from flatness,
    one face at a time in reverse.
    """

    def __init__(self, backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                 flat_faces: Sequence[str]):
        self.backend = backend
        self.graphs = [graph]
        self.erased: list[tuple[str, str]] = []  # (edge, flat face)
        g = graph
        for fid in flat_faces:
            eid = None
            for s in g.face(fid).steps:
                if g.left_face(s.edge) != g.right_face(s.edge):
                    eid = s.edge
                    break
            if eid is None:
                raise PreconditionViolated(
                    f"no erasable edge on face {fid!r} (all sides repeat)")
            # erase keeps the right face; make sure the flat face is dropped
            if g.right_face(eid) == fid:
                g, _ = rg.reverse_edge(g, eid)
                self.graphs[-1] = g  # reversal is its own point map below
                self.erased.append((eid, "reverse"))
            g, _ = rg.erase_edge(g, eid)
            self.erased.append((eid, fid))
            self.graphs.append(g)

    @property
    def reduced_graph(self) -> rg.RibbonGraph:
        return self.graphs[-1]

    def forward(self, point: Point) -> Point:
        out = dict(point)
        for eid, tag in self.erased:
            if tag == "reverse":
                out[eid] = self.backend.inv(out[eid])
            else:
                out.pop(eid)
        return out

    def section(self, reduced_point: Point) -> Point:
        out = dict(reduced_point)
        gi = len(self.graphs) - 1
        for eid, tag in reversed(self.erased):
            if tag == "reverse":
                out[eid] = self.backend.inv(out[eid])
                continue
            gi -= 1
            out = fr_flat_section(self.backend, self.graphs[gi], eid, tag, out)
        return out

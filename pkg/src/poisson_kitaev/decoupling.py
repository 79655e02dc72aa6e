"""The decoupling isomorphism between the product space and its coupled twin.

On a paired graph, each edge e from v_s to v_t determines a thickened-graph
path from the cilium corner of v_s to the cilium corner of v_t:

    p(e) = p_f(e) o f(e) o r(e) o p_b(e),

where p_b(e) inverts the partial vertex path of v_s up to b(e) and p_f(e) is
the partial vertex path of v_t up to f(e).  Sending every decoration to the
holonomy along p(e) maps the product of Heisenberg doubles onto the coupled
space; the inverse conjugates each decoration by the G_- parts of the partial
face holonomies on its two sides.
"""

from __future__ import annotations

from . import fock_rosly as fr
from . import kitaev_space as ks
from . import ribbon_graph as rg
from .double_group import DoubleGroupBackend
from .errors import NotPaired


def edge_transport_path(graph: rg.RibbonGraph, eid: str) -> rg.Path:
    """The path p(e) from the cilium corner of s(e) to that of t(e).

    Defined on any doubly ciliated graph; consecutive transport paths chain,
    so words in them lift closed edge loops to closed thickened paths.
    """
    e = graph.edge(eid)
    js = graph.end_location[rg.EdgeEnd(eid, "s")][1]
    jt = graph.end_location[rg.EdgeEnd(eid, "t")][1]
    p_b = rg.vertex_path(graph, e.source, js).inverse()
    p_f = rg.vertex_path(graph, e.target, jt)
    return rg.Path(p_f.word + (("f", eid, 1), ("r", eid, 1)) + p_b.word)


class Decoupling:
    """Precompiled forward/backward maps for one paired graph."""

    def __init__(self, backend: DoubleGroupBackend, graph: rg.RibbonGraph):
        if not rg.is_paired(graph):
            raise NotPaired("the decoupling map needs a paired graph")
        self.backend = backend
        self.graph = graph
        self.edge_paths: dict[str, rg.Path] = {}
        self.side_paths: dict[str, tuple[rg.Path, rg.Path]] = {}
        for e in graph.edges:
            self.edge_paths[e.id] = edge_transport_path(graph, e.id)
            fl, kl = graph.side_location[(e.id, -1)]
            frid, kr = graph.side_location[(e.id, 1)]
            self.side_paths[e.id] = (rg.face_path(graph, fl, kl),
                                     rg.face_path(graph, frid, kr))

    def phi(self, point: ks.Point) -> fr.Point:
        """Product space to coupled space: edge e carries Hol(p(e))."""
        b, g = self.backend, self.graph
        return {e: ks.hol(b, g, path, point) for e, path in self.edge_paths.items()}

    def psi(self, point: fr.Point) -> ks.Point:
        """Coupled space back to the product space.

        Edge e receives  pi_-(H_l)^-1 d_e pi_-(H_r)  with H_l, H_r the
        coupled holonomies of the partial face paths left and right of e.
        """
        b, g = self.backend, self.graph
        out = {}
        for e, (p_l, p_r) in self.side_paths.items():
            hl = b.pi_minus(fr.hol_fr(b, g, p_l, point))
            hr = b.pi_minus(fr.hol_fr(b, g, p_r, point))
            out[e] = b.mul(b.mul(b.inv(hl), point[e]), hr)
        return out


def phi(backend: DoubleGroupBackend, graph: rg.RibbonGraph, point: ks.Point) -> fr.Point:
    return Decoupling(backend, graph).phi(point)


def psi(backend: DoubleGroupBackend, graph: rg.RibbonGraph, point: fr.Point) -> ks.Point:
    return Decoupling(backend, graph).psi(point)

"""Small reference graphs used by tests, docs and the verification CLI.

Cilia are placed so that each graph carries at least one site; `*_site`
helpers return a canonical one.
"""

from __future__ import annotations

from .ribbon_graph import Edge, EdgeEnd, Face, FaceStep, RibbonGraph, Vertex


def single_edge() -> RibbonGraph:
    """One edge v1 -> v2; a single face runs r(e) then l(e) backwards."""
    return RibbonGraph(
        vertices=[Vertex("v1", (EdgeEnd("e", "s"),)),
                  Vertex("v2", (EdgeEnd("e", "t"),))],
        edges=[Edge("e", "v1", "v2")],
        faces=[Face("f", (FaceStep("e", 1), FaceStep("e", -1)))],
    )


def loop_graph() -> RibbonGraph:
    """One loop at one vertex on the sphere; two one-sided faces.

    (v, fr) is a site: first end b(e), first side r(e).
    """
    return RibbonGraph(
        vertices=[Vertex("v", (EdgeEnd("e", "s"), EdgeEnd("e", "t")))],
        edges=[Edge("e", "v", "v")],
        faces=[Face("fr", (FaceStep("e", 1),)),
               Face("fl", (FaceStep("e", -1),))],
    )


def loop_site() -> tuple[str, str]:
    return ("v", "fr")


def square() -> RibbonGraph:
    """The 4-cycle on the sphere; two faces, one site at (v1, fin).

    Cilia of v2..v4 point at the outer face so that gauge actions at them
    leave the inner-face holonomy alone.
    """
    vertices = [
        Vertex("v1", (EdgeEnd("e4", "t"), EdgeEnd("e1", "s"))),
        Vertex("v2", (EdgeEnd("e2", "s"), EdgeEnd("e1", "t"))),
        Vertex("v3", (EdgeEnd("e3", "s"), EdgeEnd("e2", "t"))),
        Vertex("v4", (EdgeEnd("e4", "s"), EdgeEnd("e3", "t"))),
    ]
    edges = [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v3"),
             Edge("e3", "v3", "v4"), Edge("e4", "v4", "v1")]
    faces = [
        Face("fout", (FaceStep("e1", 1), FaceStep("e2", 1),
                      FaceStep("e3", 1), FaceStep("e4", 1))),
        Face("fin", (FaceStep("e4", -1), FaceStep("e3", -1),
                     FaceStep("e2", -1), FaceStep("e1", -1))),
    ]
    return RibbonGraph(vertices, edges, faces)


def square_site() -> tuple[str, str]:
    return ("v1", "fin")


def theta() -> RibbonGraph:
    """Two vertices joined by three parallel edges; three bigon faces.

    (v1, f31) is a site: first end b(e1), first side r(e1).
    """
    vertices = [
        Vertex("v1", (EdgeEnd("e1", "s"), EdgeEnd("e2", "s"), EdgeEnd("e3", "s"))),
        Vertex("v2", (EdgeEnd("e3", "t"), EdgeEnd("e2", "t"), EdgeEnd("e1", "t"))),
    ]
    edges = [Edge("e1", "v1", "v2"), Edge("e2", "v1", "v2"), Edge("e3", "v1", "v2")]
    faces = [
        Face("f31", (FaceStep("e1", 1), FaceStep("e3", -1))),
        Face("f12", (FaceStep("e2", 1), FaceStep("e1", -1))),
        Face("f23", (FaceStep("e3", 1), FaceStep("e2", -1))),
    ]
    return RibbonGraph(vertices, edges, faces)


def theta_site() -> tuple[str, str]:
    return ("v1", "f31")


def genus_one() -> RibbonGraph:
    """One vertex, two interleaved loops: the torus with one boundary face.

    (v, f) is a site; the single face path reads r(a), l(b), l(a), r(b).
    """
    vertices = [Vertex("v", (EdgeEnd("a", "s"), EdgeEnd("b", "s"),
                             EdgeEnd("a", "t"), EdgeEnd("b", "t")))]
    edges = [Edge("a", "v", "v"), Edge("b", "v", "v")]
    faces = [Face("f", (FaceStep("a", 1), FaceStep("b", -1),
                        FaceStep("a", -1), FaceStep("b", 1)))]
    return RibbonGraph(vertices, edges, faces)


def genus_one_site() -> tuple[str, str]:
    return ("v", "f")


BUILDERS = {
    "single_edge": single_edge,
    "loop": loop_graph,
    "square": square,
    "theta": theta,
    "genus_one": genus_one,
}

SITES = {
    "single_edge": None,
    "loop": loop_site(),
    "square": square_site(),
    "theta": theta_site(),
    "genus_one": genus_one_site(),
}

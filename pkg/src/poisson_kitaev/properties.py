"""Named property catalog: every structural claim as a runnable residual check.

Each entry draws seeded samples, computes a max residual, and reports it
against a backend-dependent tolerance (exact-oracle backends get the tight
one).  Checks whose hypotheses a graph cannot satisfy are reported as
skipped, never as passed.  All randomness flows from numpy's PCG64 seeded
per check, so reports are reproducible bit for bit.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import brackets as bk
from . import fock_rosly as fr
from . import graph_moves as gm
from . import kitaev_space as ks
from . import ribbon_graph as rg
from .decoupling import Decoupling
from .double_group import DoubleGroupBackend
from .errors import HypothesisUnmet, NotClosed
from .fields import ClassFunction, GroupCoordinate, HolonomyCoordinate
from .brackets import CallableField


# --- sampling helpers -------------------------------------------------------


def check_rng(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))


def flat_setup(graph: rg.RibbonGraph) -> tuple[tuple[str, str], list[str]]:
    """The canonical kept site and the flatness label set (everything else)."""
    sites = rg.detect_sites(graph)
    if not sites:
        raise HypothesisUnmet("graph has no site")
    v0, f0 = sites[0]
    labels = sorted(v for v in graph.vertex_by_id if v != v0)
    labels += sorted(f for f in graph.face_by_id if f != f0)
    return (v0, f0), labels


def spanning_tree_loops(graph: rg.RibbonGraph, base: str) -> list[list[tuple[str, int]]]:
    """Fundamental loops at ``base``: tree path out, non-tree edge, tree path back.

    Loops are traversal-ordered lists of (edge, +-1).
    """
    parent: dict[str, Optional[tuple[str, int]]] = {base: None}
    order = [base]
    queue = [base]
    while queue:
        w = queue.pop(0)
        for e in graph.edges:
            if e.source == w and e.target not in parent:
                parent[e.target] = (e.id, 1)
                order.append(e.target)
                queue.append(e.target)
            if e.target == w and e.source not in parent:
                parent[e.source] = (e.id, -1)
                order.append(e.source)
                queue.append(e.source)

    def path_from_base(w: str) -> list[tuple[str, int]]:
        out = []
        while parent[w] is not None:
            eid, sgn = parent[w]
            out.append((eid, sgn))
            e = graph.edge(eid)
            w = e.source if sgn > 0 else e.target
        out.reverse()
        return out

    tree_edges = {p[0] for p in parent.values() if p is not None}
    loops = []
    for e in graph.edges:
        if e.id in tree_edges:
            continue
        back = [(eid, -sgn) for eid, sgn in reversed(path_from_base(e.target))]
        loops.append(path_from_base(e.source) + [(e.id, 1)] + back)
    return loops


def lift_loop(graph: rg.RibbonGraph, loop: Sequence[tuple[str, int]]) -> rg.Path:
    """Thickened-graph path whose coupled holonomy is the Wilson loop and
    whose product-space holonomy is its decoupled lift.

    Concatenates the per-edge transport paths p(e); they chain at cilium
    corners, so any edge loop lifts to a closed thickened path.
    """
    from .decoupling import edge_transport_path
    path = rg.Path()
    for eid, sgn in loop:
        p = edge_transport_path(graph, eid)
        path = (p if sgn > 0 else p.inverse()) * path
    return path


def class_function_factory(graph: rg.RibbonGraph, base_site: tuple[str, str],
                           loop_paths: Sequence[rg.Path]) -> list[ClassFunction]:
    """Invariant fields from loops closed at the site's cilium corner."""
    vid, fid = base_site
    if not rg.is_site(graph, vid, fid):
        raise NotClosed(f"({vid!r}, {fid!r}) is not a site")
    corner = rg.Corner(vid, 0)
    out = []
    for p in loop_paths:
        ends = graph.path_endpoints(p)
        if ends is not None and (ends[0] != corner or ends[1] != corner):
            raise NotClosed(f"path does not close at the cilium corner {corner}")
        out.append(ClassFunction(p, "re_trace"))
        out.append(ClassFunction(p, "abs_trace_sq"))
    return out


def wilson_class_fields(graph: rg.RibbonGraph, base_vertex: str,
                        rng: np.random.Generator, count: int = 8,
                        base_site: Optional[tuple[str, str]] = None
                        ) -> list[ClassFunction]:
    """``count`` invariant fields from random words in the fundamental loops."""
    gens = spanning_tree_loops(graph, base_vertex)
    if not gens:
        raise HypothesisUnmet("graph is a tree: no loops to build invariants from")
    paths = []
    want = (count + 1) // 2
    while len(paths) < want:
        k = int(rng.integers(1, min(3, len(gens)) + 1))
        word: list[tuple[str, int]] = []
        for _ in range(k):
            gen = gens[int(rng.integers(len(gens)))]
            if rng.uniform() < 0.5:
                gen = [(e, -s) for e, s in reversed(gen)]
            word = word + list(gen)
        paths.append(lift_loop(graph, word))
    site = base_site or (base_vertex, rg.associated_face(graph, base_vertex))
    if rg.is_site(graph, *site):
        fields = class_function_factory(graph, site, paths)
    else:
        fields = []
        for p in paths:
            fields.append(ClassFunction(p, "re_trace"))
            fields.append(ClassFunction(p, "abs_trace_sq"))
    return fields[:count]


def site_trace_fields(graph: rg.RibbonGraph,
                      sites: Sequence[tuple[str, str]]) -> list[ClassFunction]:
    """Traces of the combined vertex+face holonomy of each site."""
    out = []
    for vid, fid in sites:
        loop = rg.vertex_path(graph, vid) * rg.face_path(graph, fid)
        out.append(ClassFunction(loop, "re_trace"))
        out.append(ClassFunction(loop, "abs_trace_sq"))
    return out


def flat_samples(backend, graph, labels, rng, count) -> list[ks.Point]:
    return [ks.sample_flat(backend, graph, labels, rng) for _ in range(count)]


# --- the catalog -------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    statement: str
    backend: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    skipped: bool = False
    skip_reason: str = ""
    runtime_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "backend": self.backend,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "runtime_ms": self.runtime_ms,
        }


@dataclass
class CatalogEntry:
    fn: Callable
    statement: str
    tol_sl2c: float
    tol_exact: float


def _tolerance(entry: CatalogEntry, backend: DoubleGroupBackend) -> float:
    return entry.tol_sl2c if backend.name == "sl2c" else entry.tol_exact


# individual checks; each returns (max_residual, effective_samples)


def _chk_action_poisson_v(backend, graph, n, rng, h):
    K = bk.KEngine(backend, graph, h)
    sub = bk.SubgroupEngine(backend, "plus", h)
    worst, used = 0.0, 0
    for v in sorted(graph.vertex_by_id):
        P = bk.ProductEngine(sub, K)
        fn = lambda arg, v=v: ks.vertex_action(backend, graph, v, arg[0], arg[1], check=False)
        pts = [P.random_point(rng) for _ in range(n)]
        worst = max(worst, bk.poisson_map_residual(P, K, fn, pts))
        used += n
    return worst, used


def _chk_action_poisson_f(backend, graph, n, rng, h):
    K = bk.KEngine(backend, graph, h)
    sub = bk.SubgroupEngine(backend, "minus", h)
    worst, used = 0.0, 0
    for f in sorted(graph.face_by_id):
        P = bk.ProductEngine(sub, K)
        fn = lambda arg, f=f: ks.face_action(backend, graph, f, arg[0], arg[1], check=False)
        pts = [P.random_point(rng) for _ in range(n)]
        worst = max(worst, bk.poisson_map_residual(P, K, fn, pts))
        used += n
    return worst, used


def _chk_site_action_poisson(backend, graph, n, rng, h):
    sites = rg.detect_sites(graph)
    if not sites:
        raise HypothesisUnmet("graph has no site")
    K = bk.KEngine(backend, graph, h)
    G = bk.GroupEngine(backend, "sklyanin", h)
    P = bk.ProductEngine(G, K)
    site = sites[0]
    fn = lambda arg: ks.site_action(backend, graph, site, arg[0], arg[1])
    pts = [P.random_point(rng) for _ in range(n)]
    return bk.poisson_map_residual(P, K, fn, pts), n


def _chk_fr_action_poisson(backend, graph, n, rng, h):
    FR = bk.FREngine(backend, graph, h)
    G = bk.GroupEngine(backend, "sklyanin", h)
    worst, used = 0.0, 0
    for v in sorted(graph.vertex_by_id):
        P = bk.ProductEngine(G, FR)
        fn = lambda arg, v=v: fr.fr_vertex_action(backend, graph, v, arg[0], arg[1])
        pts = [P.random_point(rng) for _ in range(n)]
        worst = max(worst, bk.poisson_map_residual(P, FR, fn, pts))
        used += n
    return worst, used


def _ops_commute(backend, graph, n, rng, h, pairs, paths):
    K = bk.KEngine(backend, graph, h)
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        W = K.bivector(p)
        jac = {lab: bk.path_coordinate_jacobian(K, paths[lab], p)
               for lab in {x for pr in pairs for x in pr}}
        for a, b in pairs:
            worst = max(worst, float(np.max(np.abs(jac[a] @ W @ jac[b].T))))
    return worst, n


def _chk_vertex_ops_commute(backend, graph, n, rng, h):
    vids = sorted(graph.vertex_by_id)
    if len(vids) < 2:
        raise HypothesisUnmet("needs two distinct vertices")
    pairs = [(a, b) for i, a in enumerate(vids) for b in vids[i + 1:]]
    paths = {v: rg.vertex_path(graph, v) for v in vids}
    return _ops_commute(backend, graph, n, rng, h, pairs, paths)


def _chk_face_ops_commute(backend, graph, n, rng, h):
    fids = sorted(graph.face_by_id)
    if len(fids) < 2:
        raise HypothesisUnmet("needs two distinct faces")
    pairs = [(a, b) for i, a in enumerate(fids) for b in fids[i + 1:]]
    paths = {f: rg.face_path(graph, f) for f in fids}
    return _ops_commute(backend, graph, n, rng, h, pairs, paths)


def _chk_mixed_ops_commute(backend, graph, n, rng, h):
    pairs = []
    for v in sorted(graph.vertex_by_id):
        for f in sorted(graph.face_by_id):
            if rg.associated_vertex(graph, f) != v and rg.associated_face(graph, v) != f:
                pairs.append((v, f))
    if not pairs:
        raise HypothesisUnmet("every vertex/face pair is associated")
    paths = {v: rg.vertex_path(graph, v) for v in graph.vertex_by_id}
    paths.update({f: rg.face_path(graph, f) for f in graph.face_by_id})
    return _ops_commute(backend, graph, n, rng, h, pairs, paths)


def _chk_site_operator_poisson(backend, graph, n, rng, h):
    sites = rg.detect_sites(graph)
    if not sites:
        raise HypothesisUnmet("graph has no site")
    site = sites[0]
    K = bk.KEngine(backend, graph, h)
    G = bk.GroupEngine(backend, "dual_star", h)
    loop = rg.vertex_path(graph, site[0]) * rg.face_path(graph, site[1])
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        J = bk.path_pushforward_jacobian(K, loop, p)
        target = G.bivector(ks.site_holonomy(backend, graph, site, p))
        worst = max(worst, float(np.max(np.abs(J @ K.bivector(p) @ J.T - target))))
    return worst, n


def _chk_reidemeister_segments(backend, graph, n, rng, h):
    configs = []
    for v in graph.vertices:
        m = len(v.ends)
        for j in range(m):
            a, b = v.ends[j], v.ends[(j + 1) % m]
            if a.end == "t" and b.end == "s" and a.edge != b.edge:
                configs.append((a.edge, b.edge))
    if not configs:
        raise HypothesisUnmet("no incoming-then-outgoing corner in any vertex order")
    K = bk.KEngine(backend, graph, h)
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        W = K.bivector(p)
        for e1, e2 in configs:
            p1 = rg.Path((("r", e2, 1), ("r", e1, 1)))
            p2 = rg.Path((("f", e1, 1), ("b", e2, -1)))
            J1 = bk.path_coordinate_jacobian(K, p1, p)
            J2 = bk.path_coordinate_jacobian(K, p2, p)
            worst = max(worst, float(np.max(np.abs(J1 @ W @ J2.T))))
    return worst, n


def _chk_opposite_sides_commute(backend, graph, n, rng, h):
    K = bk.KEngine(backend, graph, h)
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        W = K.bivector(p)
        for e in graph.edges:
            for k1, k2 in (("f", "b"), ("r", "l")):
                J1 = bk.path_coordinate_jacobian(K, rg.Path(((k1, e.id, 1),)), p)
                J2 = bk.path_coordinate_jacobian(K, rg.Path(((k2, e.id, 1),)), p)
                worst = max(worst, float(np.max(np.abs(J1 @ W @ J2.T))))
    return worst, n


def _group_dirderiv(backend, gfn, u, a, side, step):
    v = np.zeros(backend.dim)
    v[a] = step
    if side == "right":
        plus, minus = backend.mul(backend.exp(v), u), backend.mul(backend.exp(-v), u)
    else:
        plus, minus = backend.mul(u, backend.exp(v)), backend.mul(u, backend.exp(-v))
    return (gfn(plus) - gfn(minus)) / (2 * step)


def _hamiltonian_field_check(backend, graph, n, rng, h, kind):
    """Hamiltonian field of an operator vs the r-contracted action field.

    Vertex:  {g o Hol^v, -} = sum <dg, TR r_(1)> V_v(r_(2));
    face:    {g o Hol^f, -} = sum <dg, TL r_(2)> V_f(r_(1)).
    """
    K = bk.KEngine(backend, graph, h)
    R = K.R
    labels = sorted(graph.vertex_by_id if kind == "vertex" else graph.face_by_id)
    gfns = [lambda u: backend.class_invariant("re_trace", u),
            lambda u: float(backend.elem_coords(u)[0])]
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        W = K.bivector(p)
        for lab in labels:
            if kind == "vertex":
                path = rg.vertex_path(graph, lab)
                u0 = ks.hol(backend, graph, path, p)
                act = lambda elem: ks.vertex_action(backend, graph, lab, elem, p, check=False)
                gen_range = range(backend.dim_minus, backend.dim)
            else:
                path = rg.face_path(graph, lab)
                u0 = ks.hol(backend, graph, path, p)
                act = lambda elem: ks.face_action(backend, graph, lab, elem, p, check=False)
                gen_range = range(0, backend.dim_minus)
            V = np.zeros((K.dim, backend.dim))
            for bidx in gen_range:
                v = np.zeros(backend.dim)
                v[bidx] = h
                plus = K.displacement(act(backend.exp(v)), p)
                minus = K.displacement(act(backend.exp(-v)), p)
                V[:, bidx] = -(plus - minus) / (2 * h)
            for gi, gfn in enumerate(gfns):
                if gi == 0:
                    a_field = ClassFunction(path, "re_trace")
                else:
                    a_field = HolonomyCoordinate(path, 0)
                lhs = W.T @ K.field_gradient(a_field, p)
                rhs = np.zeros(K.dim)
                if kind == "vertex":
                    Dg = np.array([_group_dirderiv(backend, gfn, u0, a, "right", h)
                                   for a in range(backend.dim)])
                    for a in range(backend.dim):
                        for b in range(backend.dim):
                            if R[a, b]:
                                rhs += R[a, b] * Dg[a] * V[:, b]
                else:
                    Dg = np.array([_group_dirderiv(backend, gfn, u0, b, "left", h)
                                   for b in range(backend.dim)])
                    for a in range(backend.dim):
                        for b in range(backend.dim):
                            if R[a, b]:
                                rhs += R[a, b] * Dg[b] * V[:, a]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst, n


def _chk_hamiltonian_field_vertex(backend, graph, n, rng, h):
    return _hamiltonian_field_check(backend, graph, n, rng, h, "vertex")


def _chk_hamiltonian_field_face(backend, graph, n, rng, h):
    return _hamiltonian_field_check(backend, graph, n, rng, h, "face")


def _action_orbit_admissible(graph, kind, lab, site) -> bool:
    """Can the gauge action at ``lab`` leave the site trace of ``site``
    invariant along flat orbits?

    True when some cilium rotation of ``lab`` detaches it from the site (the
    orbits through flat points do not depend on the rotation); always true
    for the site's own members.
    """
    v, f = site
    if kind == "vertex":
        if lab == v:
            return True
        faces = {graph.right_face(end.edge) if end.end == "s" else graph.left_face(end.edge)
                 for end in graph.vertex(lab).ends}
        return faces != {f}
    if lab == f:
        return True
    verts = {graph.edge(s.edge).source if s.sign > 0 else graph.edge(s.edge).target
             for s in graph.face(lab).steps}
    return verts != {v}


def _invariant_fields_and_points(backend, graph, n, rng):
    """A family of invariant fields plus matching sample points.

    Paired graphs: lifted Wilson traces at the kept site, arbitrary points
    (global invariants).  Otherwise: site-holonomy traces, points flat away
    from the site, valid when every gauge action admits a detached cilium
    rotation.
    """
    site, labels = flat_setup(graph)
    if rg.is_paired(graph):
        fields = wilson_class_fields(graph, site[0], rng, 8, base_site=site)
        pts = [ks.random_point(backend, graph, rng) for _ in range(n)]
    else:
        for v in graph.vertex_by_id:
            if not _action_orbit_admissible(graph, "vertex", v, site):
                raise HypothesisUnmet(f"vertex {v!r} cannot detach from the site")
        for f in graph.face_by_id:
            if not _action_orbit_admissible(graph, "face", f, site):
                raise HypothesisUnmet(f"face {f!r} cannot detach from the site")
        fields = site_trace_fields(graph, [site])
        pts = flat_samples(backend, graph, labels, rng, n)
    return site, labels, fields, pts


def _chk_invariant_commutes_with_ops(backend, graph, n, rng, h):
    site, labels, fields, pts = _invariant_fields_and_points(backend, graph, n, rng)
    K = bk.KEngine(backend, graph, h)
    op_labels = [("vertex", v) for v in sorted(graph.vertex_by_id)]
    op_labels += [("face", f) for f in sorted(graph.face_by_id)]
    worst = 0.0
    for p in pts:
        W = K.bivector(p)
        grads = [K.field_gradient(fd, p) for fd in fields]
        for kind, lab in op_labels:
            path = rg.vertex_path(graph, lab) if kind == "vertex" else rg.face_path(graph, lab)
            J = bk.path_coordinate_jacobian(K, path, p)
            for gvec in grads:
                worst = max(worst, float(np.max(np.abs(J @ (W @ gvec)))))
    return worst, len(pts)


def _chk_bracket_well_defined_on_flat(backend, graph, n, rng, h):
    site, labels, fields, _ = _invariant_fields_and_points(backend, graph, 1, rng)
    pts = flat_samples(backend, graph, labels, rng, n)
    K = bk.KEngine(backend, graph, h)
    # any two functions agreeing on the flat subspace differ by one vanishing
    # there; holonomy coordinates of the flat labels span those differences
    # to first order, so their brackets with invariant fields must vanish
    ms = []
    for lab in labels[:2]:
        path = (rg.vertex_path(graph, lab) if lab in graph.vertex_by_id
                else rg.face_path(graph, lab))
        ms += [HolonomyCoordinate(path, i) for i in (0, 2)]
    worst = 0.0
    for p in pts:
        Gm = bk.gradient_matrix(K, ms, p)
        Gh = bk.gradient_matrix(K, fields, p)
        worst = max(worst, float(np.max(np.abs(Gm @ K.bivector(p) @ Gh.T))))
    return worst, len(pts)


def _chk_invariant_subalgebra_closed(backend, graph, n, rng, h):
    site, labels, fields, _ = _invariant_fields_and_points(backend, graph, 1, rng)
    pts = flat_samples(backend, graph, labels, rng, n)
    K = bk.KEngine(backend, graph, h)
    worst = 0.0
    for p in pts:
        B0 = bk.bracket_table(K, fields, p)
        moved = ks.site_action(backend, graph, site, backend.random_element(rng), p)
        B1 = bk.bracket_table(K, fields, moved)
        worst = max(worst, float(np.max(np.abs(B1 - B0))))
        if labels:
            lab = labels[0]
            if lab in graph.vertex_by_id:
                moved2 = ks.vertex_action(backend, graph, lab,
                                          backend.random_in_plus(rng), p, check=False)
            else:
                moved2 = ks.face_action(backend, graph, lab,
                                        backend.random_in_minus(rng), p, check=False)
            B2 = bk.bracket_table(K, fields, moved2)
            worst = max(worst, float(np.max(np.abs(B2 - B0))))
    return worst, len(pts)


def _chk_moduli_reduction_brackets(backend, graph, n, rng, h):
    if not rg.is_paired(graph):
        sites = rg.detect_sites(graph)
        if not sites:
            raise HypothesisUnmet("graph has no site to keep")
        graph, _ = rg.pair_graph(graph, [sites[0]])
    site, labels = flat_setup(graph)
    flat_faces = [l for l in labels if l in graph.face_by_id]
    if not flat_faces:
        raise HypothesisUnmet("no flat faces to reduce away")
    reduction = fr.FlatReduction(backend, graph, flat_faces)
    dec = Decoupling(backend, graph)
    FR_up = bk.FREngine(backend, graph, h)
    FR_down = bk.FREngine(backend, reduction.reduced_graph, h)
    fields = wilson_class_fields(graph, site[0], rng, 8, base_site=site)
    down_fields = [CallableField(lambda q, fd=fd: FR_up.eval_field(fd, reduction.section(q)))
                   for fd in fields]
    worst = 0.0
    for _ in range(n):
        gamma = dec.phi(ks.sample_flat(backend, graph, labels, rng))
        B_up = bk.bracket_table(FR_up, fields, gamma)
        B_down = bk.bracket_table(FR_down, down_fields, reduction.forward(gamma))
        worst = max(worst, float(np.max(np.abs(B_up - B_down))))
    return worst, n


def _chk_glue_vertex_poisson(backend, graph, n, rng, h):
    e0 = sorted(graph.edge_by_id)[0]
    split, _ = rg.split_edge(graph, e0)
    vm = [v.id for v in split.vertices if v.id not in graph.vertex_by_id][0]
    glued, rec = rg.glue_bivalent(split, vm)
    src = bk.KEngine(backend, split, h)
    dst = bk.KEngine(backend, glued, h)

    def fn(p):
        e1, e2 = rec.params["glued"]
        out = {e: v for e, v in p.items() if e not in (e1, e2)}
        out[rec.params["new_edge"]] = backend.mul(p[e2], backend.pi_plus(p[e1]))
        return out

    pts = [src.random_point(rng) for _ in range(n)]
    return bk.poisson_map_residual(src, dst, fn, pts), n


def _chk_glue_face_poisson(backend, graph, n, rng, h):
    e0 = sorted(graph.edge_by_id)[0]
    doubled, drec = rg.double_edge(graph, e0)
    fm = drec.params["new_face"]
    glued, rec = rg.glue_two_edge_face(doubled, fm)
    src = bk.KEngine(backend, doubled, h)
    dst = bk.KEngine(backend, glued, h)

    def fn(p):
        e1, e2 = rec.params["glued"]
        out = {e: v for e, v in p.items() if e not in (e1, e2)}
        out[rec.params["new_edge"]] = backend.mul(backend.pi_minus(p[e1]), p[e2])
        return out

    pts = [src.random_point(rng) for _ in range(n)]
    return bk.poisson_map_residual(src, dst, fn, pts), n


def _chk_phi_poisson(backend, graph, n, rng, h):
    if not rg.is_paired(graph):
        sites = rg.detect_sites(graph)
        if not sites:
            raise HypothesisUnmet("graph has no site to pair around")
        graph, _ = rg.pair_graph(graph, [sites[0]])
    dec = Decoupling(backend, graph)
    K = bk.KEngine(backend, graph, h)
    FR = bk.FREngine(backend, graph, h)
    worst = 0.0
    for _ in range(n):
        p = K.random_point(rng)
        J = bk.decoupling_jacobian(K, dec, p)
        res = J @ K.bivector(p) @ J.T - FR.bivector(dec.phi(p))
        worst = max(worst, float(np.max(np.abs(res))))
    return worst, n


def _chk_jacobi_heisenberg(backend, graph, n, rng, h):
    G = bk.GroupEngine(backend, "heisenberg", h)
    coords = [GroupCoordinate(i) for i in range(min(6, len(backend.elem_coords(backend.identity()))))]
    worst = 0.0
    for _ in range(n):
        g = G.random_point(rng)
        worst = max(worst, bk.jacobi_residual(G, g, coords, outer_h=1e-4))
    return worst, n


CATALOG: dict[str, CatalogEntry] = {
    "action_poisson_v": CatalogEntry(
        _chk_action_poisson_v,
        "vertex gauge actions of G_+ are Poisson maps on the product space",
        1e-5, 1e-9),
    "action_poisson_f": CatalogEntry(
        _chk_action_poisson_f,
        "face gauge actions of G_- are Poisson maps on the product space",
        1e-5, 1e-9),
    "site_action_poisson": CatalogEntry(
        _chk_site_action_poisson,
        "the combined site action of the full group is a Poisson map",
        1e-5, 1e-9),
    "fr_action_poisson": CatalogEntry(
        _chk_fr_action_poisson,
        "coupled-space vertex gauge actions are Poisson maps",
        1e-5, 1e-9),
    "vertex_ops_commute": CatalogEntry(
        _chk_vertex_ops_commute,
        "operators of distinct vertices Poisson-commute",
        1e-5, 1e-9),
    "face_ops_commute": CatalogEntry(
        _chk_face_ops_commute,
        "operators of distinct faces Poisson-commute",
        1e-5, 1e-9),
    "mixed_ops_commute": CatalogEntry(
        _chk_mixed_ops_commute,
        "vertex and face operators of non-associated pairs Poisson-commute",
        1e-5, 1e-9),
    "site_operator_poisson": CatalogEntry(
        _chk_site_operator_poisson,
        "the site holonomy is Poisson onto the dual-group bivector",
        1e-5, 1e-9),
    "reidemeister_segments": CatalogEntry(
        _chk_reidemeister_segments,
        "holonomies of crossing face/vertex path segments Poisson-commute",
        1e-5, 1e-9),
    "opposite_sides_commute": CatalogEntry(
        _chk_opposite_sides_commute,
        "holonomies of opposite edge ends or edge sides Poisson-commute",
        1e-5, 1e-9),
    "hamiltonian_field_vertex": CatalogEntry(
        _chk_hamiltonian_field_vertex,
        "vertex-operator Hamiltonian fields equal r-contracted action fields",
        1e-4, 1e-8),
    "hamiltonian_field_face": CatalogEntry(
        _chk_hamiltonian_field_face,
        "face-operator Hamiltonian fields equal r-contracted action fields",
        1e-4, 1e-8),
    "invariant_commutes_with_ops": CatalogEntry(
        _chk_invariant_commutes_with_ops,
        "invariant functions Poisson-commute with all vertex/face operators",
        1e-5, 1e-9),
    "bracket_well_defined_on_flat": CatalogEntry(
        _chk_bracket_well_defined_on_flat,
        "brackets with functions vanishing on the flat subspace vanish there",
        1e-5, 1e-9),
    "invariant_subalgebra_closed": CatalogEntry(
        _chk_invariant_subalgebra_closed,
        "brackets of invariant functions are again invariant on flat points",
        1e-5, 1e-9),
    "moduli_reduction_brackets": CatalogEntry(
        _chk_moduli_reduction_brackets,
        "invariant brackets survive erasing flat faces and resolving back",
        1e-5, 1e-9),
    "glue_vertex_poisson": CatalogEntry(
        _chk_glue_vertex_poisson,
        "gluing two edges along a bivalent vertex is a Poisson map",
        1e-5, 1e-9),
    "glue_face_poisson": CatalogEntry(
        _chk_glue_face_poisson,
        "collapsing a bigon face is a Poisson map",
        1e-5, 1e-9),
    "phi_poisson": CatalogEntry(
        _chk_phi_poisson,
        "the decoupling map onto the coupled space is a Poisson map",
        1e-5, 1e-9),
    "jacobi_heisenberg": CatalogEntry(
        _chk_jacobi_heisenberg,
        "the Heisenberg-double bivector satisfies the Jacobi identity",
        1e-4, 1e-9),
}


def run_property(name: str, backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                 samples: int = 25, seed: int = 0, h: float = 1e-5,
                 tol: Optional[float] = None) -> CheckResult:
    if name not in CATALOG:
        raise KeyError(f"unknown property {name!r}")
    entry = CATALOG[name]
    tolerance = tol if tol is not None else _tolerance(entry, backend)
    rng = check_rng(seed, name)
    start = time.perf_counter()
    try:
        residual, used = entry.fn(backend, graph, samples, rng, h)
    except HypothesisUnmet as exc:
        return CheckResult(name, entry.statement, backend.name, 0, float("nan"),
                           tolerance, passed=False, skipped=True,
                           skip_reason=str(exc),
                           runtime_ms=1000 * (time.perf_counter() - start))
    return CheckResult(name, entry.statement, backend.name, used, residual,
                       tolerance, passed=residual < tolerance,
                       runtime_ms=1000 * (time.perf_counter() - start))


def run_suite(names: Sequence[str], backend: DoubleGroupBackend,
              graph: rg.RibbonGraph, samples: int = 25, seed: int = 0,
              h: float = 1e-5, tol: Optional[float] = None) -> list[CheckResult]:
    return [run_property(n, backend, graph, samples=samples, seed=seed, h=h, tol=tol)
            for n in names]

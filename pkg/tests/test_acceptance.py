"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Sample counts and tolerances are pinned here; run with ``pytest -s`` to see
the per-criterion summary lines.
"""

import numpy as np
import pytest

from poisson_kitaev import brackets as bk
from poisson_kitaev import double_group as dg
from poisson_kitaev import fock_rosly as fr
from poisson_kitaev import graph_moves as gm
from poisson_kitaev import kitaev_space as ks
from poisson_kitaev import properties as pr
from poisson_kitaev import reference_graphs as ref
from poisson_kitaev import ribbon_graph as rg
from poisson_kitaev.decoupling import Decoupling
from poisson_kitaev.errors import PreconditionViolated

SL2C = dg.SL2CBackend()
ABELIAN = dg.AbelianBackend(2)
SEED = 20240817


def report(num, label, residual, tol, ok=None):
    ok = (residual < tol) if ok is None else ok
    print(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {label}: "
          f"max residual {residual:.3e} vs tolerance {tol:.1e}")
    assert ok, f"criterion {num} failed: {label}: {residual} >= {tol}"


def rng_for(tag):
    return pr.check_rng(SEED, tag)


def flat_labels(graph, site):
    return ([v for v in sorted(graph.vertex_by_id) if v != site[0]]
            + [f for f in sorted(graph.face_by_id) if f != site[1]])


def paired(name):
    return rg.pair_graph(ref.BUILDERS[name](), [ref.SITES[name]])[0]


def test_criterion_01_factorization():
    rng = rng_for("c1")
    b = SL2C
    worst = 0.0
    for _ in range(10_000):
        g = b.random_element(rng)
        gm_, gp_ = b.factorize(g)
        worst = max(worst, b.distance(b.mul(gm_, gp_), g))
    report(1, "refactorization over 1e4 elements", worst, 1e-10)
    worst = 0.0
    for _ in range(1_000):
        x = b.random_in_minus(rng)
        alpha = b.random_in_plus(rng)
        gm_, gp_ = b.factorize(b.mul(x, alpha))
        worst = max(worst, max(b.distance(gm_, x), b.distance(gp_, alpha)))
    report(1, "uniqueness on subgroup products", worst, 1e-12)


def test_criterion_02_computation_rules():
    for b, tol in ((SL2C, 1e-10), (ABELIAN, 1e-14)):
        rng = rng_for("c2" + b.name)
        worst = 0.0
        for _ in range(1_000):
            worst = max(worst, dg.projection_rules_residual(
                b, b.random_element(rng), b.random_element(rng),
                b.random_in_minus(rng), b.random_in_plus(rng)))
        report(2, f"projection rules ({b.name})", worst, tol,
               ok=(worst < tol if b.name == "sl2c" else worst <= tol))


def test_criterion_03_r_matrix():
    R = dg.build_r_matrix(SL2C)
    report(3, "classical Yang-Baxter residual (sl2c)", dg.cybe_residual(SL2C, R), 1e-12)
    Rab = dg.build_r_matrix(ABELIAN)
    report(3, "classical Yang-Baxter residual (abelian)",
           dg.cybe_residual(ABELIAN, Rab), 1e-300, ok=dg.cybe_residual(ABELIAN, Rab) == 0.0)
    rng = rng_for("c3")
    Rs = dg.r_symmetric(R)
    worst = 0.0
    for _ in range(1_000):
        A = SL2C.adjoint_matrix(SL2C.random_element(rng))
        worst = max(worst, float(np.max(np.abs(A @ Rs @ A.T - Rs))))
    report(3, "Ad-invariance of the symmetric part", worst, 1e-10)
    zeros_ok = (np.count_nonzero(R[:, :3]) == 0 and np.count_nonzero(R[3:, :]) == 0)
    report(3, "r-matrix block-structure zeros exact", 0.0, 1.0, ok=zeros_ok)


def test_criterion_04_action_laws():
    b = SL2C
    rng = rng_for("c4")
    graphs = {"single_edge": ref.single_edge(), "square": ref.square(),
              "theta": ref.theta()}
    worst = mixed_worst = 0.0
    for g in graphs.values():
        for _ in range(100):
            p = ks.random_point(b, g, rng)
            a1, a2 = b.random_in_plus(rng), b.random_in_plus(rng)
            x1, x2 = b.random_in_minus(rng), b.random_in_minus(rng)
            v = sorted(g.vertex_by_id)[0]
            f = sorted(g.face_by_id)[0]
            lhs = ks.vertex_action(b, g, v, a1, ks.vertex_action(b, g, v, a2, p))
            worst = max(worst, ks.point_distance(
                b, lhs, ks.vertex_action(b, g, v, b.mul(a1, a2), p)))
            lhs = ks.face_action(b, g, f, x1, ks.face_action(b, g, f, x2, p))
            worst = max(worst, ks.point_distance(
                b, lhs, ks.face_action(b, g, f, b.mul(x1, x2), p)))
            sites = rg.detect_sites(g)
            if sites:
                site = sites[0]
                g1, g2 = b.random_element(rng), b.random_element(rng)
                lhs = ks.site_action(b, g, site, g1, ks.site_action(b, g, site, g2, p))
                worst = max(worst, ks.point_distance(
                    b, lhs, ks.site_action(b, g, site, b.mul(g1, g2), p)))
                ax = b.mul(a1, x1)
                lhs = ks.vertex_action(b, g, site[0], a1,
                                       ks.face_action(b, g, site[1], x1, p))
                rhs = ks.face_action(b, g, site[1], b.pi_minus(ax),
                                     ks.vertex_action(b, g, site[0], b.pi_plus(ax), p))
                mixed_worst = max(mixed_worst, ks.point_distance(b, lhs, rhs))
    report(4, "vertex/face/site action group laws (3 graphs x 100 points)",
           worst, 1e-10)
    report(4, "mixed vertex-face recombination identity", mixed_worst, 1e-10)


def test_criterion_05_holonomy_relations():
    b = SL2C
    rng = rng_for("c5")
    g = ref.square()
    site = ref.square_site()
    worst_i = worst_ii = worst_iii = 0.0
    for _ in range(100):
        p = ks.random_point(b, g, rng)
        alpha, x = b.random_in_plus(rng), b.random_in_minus(rng)
        q = ks.vertex_action(b, g, "v3", alpha, p)
        worst_i = max(worst_i, b.distance(ks.vertex_holonomy(b, g, "v1", q),
                                          ks.vertex_holonomy(b, g, "v1", p)))
        q = ks.face_action(b, g, "fout", x, p)
        worst_i = max(worst_i, b.distance(ks.face_holonomy(b, g, "fin", q),
                                          ks.face_holonomy(b, g, "fin", p)))
        # non-associated mixed pair: v2 with fin
        q = ks.face_action(b, g, "fin", x, p)
        worst_ii = max(worst_ii, b.distance(ks.vertex_holonomy(b, g, "v2", q),
                                            ks.vertex_holonomy(b, g, "v2", p)))
        q = ks.vertex_action(b, g, "v2", alpha, p)
        worst_ii = max(worst_ii, b.distance(ks.face_holonomy(b, g, "fin", q),
                                            ks.face_holonomy(b, g, "fin", p)))
        q = ks.face_action(b, g, site[1], x, ks.vertex_action(b, g, site[0], alpha, p))
        xa = b.mul(x, alpha)
        expect = b.mul(b.mul(xa, ks.site_holonomy(b, g, site, p)), b.inv(xa))
        worst_iii = max(worst_iii, b.distance(ks.site_holonomy(b, g, site, q), expect))
    report(5, "holonomies ignore other vertex/face actions", worst_i, 1e-10)
    report(5, "holonomies ignore non-associated mixed actions", worst_ii, 1e-10)
    report(5, "site holonomy conjugation identity", worst_iii, 1e-10)
    labels = flat_labels(g, site)
    worst = 0.0
    for _ in range(100):
        p = ks.sample_flat(b, g, labels, rng)
        for v in g.vertex_by_id:
            q = ks.vertex_action(b, g, v, b.random_in_plus(rng), p, check=False)
            worst = max(worst, max(ks.holonomy_defect(b, g, l, q) for l in labels))
        for f in g.face_by_id:
            q = ks.face_action(b, g, f, b.random_in_minus(rng), p, check=False)
            worst = max(worst, max(ks.holonomy_defect(b, g, l, q) for l in labels))
    report(5, "flat subspace stability under all actions (100 flat samples)",
           worst, 1e-9)


def test_criterion_06_graph_moves():
    b = SL2C
    rng = rng_for("c6")
    g = ref.square()
    worst_id = worst_hol = worst_act = worst_flat = 0.0
    for _ in range(50):
        p = ks.random_point(b, g, rng)
        g2, p2, rec = gm.split_vertex_map(b, g, "e1", p)
        vm = rec.params["new_vertex"]
        _, p3, rec2 = gm.glue_vertex_map(b, g2, vm, p2)
        ne = rec2.params["new_edge"]
        worst_id = max(worst_id, max(
            b.distance(p3[ne if e == "e1" else e], p[e]) for e in p))
        g2f, p2f, recf = gm.split_face_map(b, g, "e2", p)
        fm = recf.params["new_face"]
        _, p3f, rec2f = gm.glue_face_map(b, g2f, fm, p2f)
        nef = rec2f.params["new_edge"]
        worst_id = max(worst_id, max(
            b.distance(p3f[nef if e == "e2" else e], p[e]) for e in p))

        pf = ks.sample_flat(b, g2, [vm], rng)
        g3, q, _ = gm.glue_vertex_map(b, g2, vm, pf)
        for v in g3.vertex_by_id:
            worst_hol = max(worst_hol, b.distance(ks.vertex_holonomy(b, g3, v, q),
                                                  ks.vertex_holonomy(b, g2, v, pf)))
        for f in g3.face_by_id:
            worst_hol = max(worst_hol, b.distance(ks.face_holonomy(b, g3, f, q),
                                                  ks.face_holonomy(b, g2, f, pf)))
        alpha = b.random_in_plus(rng)
        _, lhs, _ = gm.glue_vertex_map(b, g2, vm, ks.vertex_action(b, g2, "v3", alpha, pf))
        worst_act = max(worst_act, ks.point_distance(
            b, lhs, ks.vertex_action(b, g3, "v3", alpha, q)))
        pfl = ks.sample_flat(b, g2, [vm, "v2", "fout"], rng)
        _, qfl, _ = gm.glue_vertex_map(b, g2, vm, pfl)
        worst_flat = max(worst_flat, max(ks.holonomy_defect(b, g3, l, qfl)
                                         for l in ("v2", "fout")))
    report(6, "glue after split is the identity", worst_id, 1e-10)
    report(6, "glue maps preserve holonomies on flat points", worst_hol, 1e-10)
    report(6, "glue maps intertwine surviving actions", worst_act, 1e-10)
    report(6, "glue maps transport flat subspaces", worst_flat, 1e-10)
    for b2, tol in ((SL2C, 1e-5), (ABELIAN, 1e-9)):
        rv = pr.run_property("glue_vertex_poisson", b2, g, samples=20, seed=SEED)
        rf = pr.run_property("glue_face_poisson", b2, g, samples=20, seed=SEED)
        report(6, f"glue maps are Poisson ({b2.name})",
               max(rv.max_residual, rf.max_residual), tol)


def test_criterion_07_actions_poisson():
    g = ref.square()
    for b, tol in ((SL2C, 1e-5), (ABELIAN, 1e-9)):
        rv = pr.run_property("action_poisson_v", b, g, samples=50, seed=SEED)
        rf = pr.run_property("action_poisson_f", b, g, samples=50, seed=SEED)
        report(7, f"vertex/face actions Poisson, 50 samples each ({b.name})",
               max(rv.max_residual, rf.max_residual), tol)


def test_criterion_08_commutation_suite():
    g = ref.square()
    names = ["vertex_ops_commute", "face_ops_commute", "mixed_ops_commute",
             "reidemeister_segments", "opposite_sides_commute"]
    for b, tol in ((SL2C, 1e-5), (ABELIAN, 1e-9)):
        worst = 0.0
        for name in names:
            r = pr.run_property(name, b, g, samples=25, seed=SEED)
            assert not r.skipped
            worst = max(worst, r.max_residual)
        report(8, f"operator commutation suite ({b.name})", worst, tol)
    r = pr.run_property("site_operator_poisson", SL2C, g, samples=25, seed=SEED)
    report(8, "site operator Poisson onto the dual-group bivector",
           r.max_residual, 1e-5)


def test_criterion_09_hamiltonian_fields():
    g = ref.square()
    for b, tol in ((SL2C, 1e-4), (ABELIAN, 1e-8)):
        rv = pr.run_property("hamiltonian_field_vertex", b, g, samples=50, seed=SEED)
        rf = pr.run_property("hamiltonian_field_face", b, g, samples=50, seed=SEED)
        report(9, f"operator Hamiltonian fields vs action fields ({b.name})",
               max(rv.max_residual, rf.max_residual), tol)


def test_criterion_10_decoupling_isomorphism():
    for name in ("square", "loop"):
        g = paired(name)
        for b, tol in ((SL2C, 1e-5), (ABELIAN, 1e-9)):
            r = pr.run_property("phi_poisson", b, g, samples=100, seed=SEED)
            report(10, f"decoupling map Poisson on paired {name} ({b.name})",
                   r.max_residual, tol)
        b = SL2C
        rng = rng_for("c10" + name)
        dec = Decoupling(b, g)
        worst_rt = worst_eq = worst_hol = 0.0
        for _ in range(100):
            p = ks.random_point(b, g, rng)
            image = dec.phi(p)
            worst_rt = max(worst_rt, ks.point_distance(b, dec.psi(image), p))
            q = {e: b.random_element(rng) for e in image}
            worst_rt = max(worst_rt, ks.point_distance(b, dec.phi(dec.psi(q)), q))
            gg = b.random_element(rng)
            for site in rg.detect_sites(g):
                lhs = fr.fr_vertex_action(b, g, site[0], gg, image)
                rhs = dec.phi(ks.site_action(b, g, site, gg, p))
                worst_eq = max(worst_eq, ks.point_distance(b, lhs, rhs))
                loop = rg.vertex_path(g, site[0]) * rg.face_path(g, site[1])
                worst_hol = max(worst_hol, b.distance(
                    fr.hol_fr(b, g, loop, image), ks.hol(b, g, loop, p)))
        report(10, f"roundtrips both ways on paired {name}", worst_rt, 1e-10)
        report(10, f"site-action equivariance on paired {name}", worst_eq, 1e-10)
        report(10, f"site-holonomy intertwining on paired {name}", worst_hol, 1e-10)


def test_criterion_11_moduli_properties():
    g = paired("square")
    r = pr.run_property("invariant_subalgebra_closed", SL2C, g, samples=50, seed=SEED)
    report(11, "invariant brackets stable under gauge actions (paired square)",
           r.max_residual, 1e-5)
    for b, tol in ((SL2C, 1e-5), (ABELIAN, 1e-9)):
        r = pr.run_property("moduli_reduction_brackets", b, g, samples=50, seed=SEED)
        report(11, f"brackets survive the flat-face reduction ({b.name})",
               r.max_residual, tol)
    # sharp instance: nonabelian fundamental group, nonzero brackets; pick
    # the two core cycles by their nontrivial flat holonomy (most fundamental
    # loops of the paired graph circle contractible bigons)
    g1 = paired("genus_one")
    site, labels = pr.flat_setup(g1)
    rng = rng_for("c11sharp")
    FR = bk.FREngine(SL2C, g1)
    gamma = Decoupling(SL2C, g1).phi(ks.sample_flat(SL2C, g1, labels, rng))
    core = []
    for loop in pr.spanning_tree_loops(g1, site[0]):
        lifted = pr.lift_loop(g1, loop)
        if SL2C.dist_to_identity(fr.hol_fr(SL2C, g1, lifted, gamma)) > 0.05:
            core.append(lifted)
    assert len(core) >= 2, "flat holonomy should be nontrivial on two cycles"
    fields = pr.class_function_factory(g1, site, core[:2] + [core[0] * core[1]])
    nonzero = float(np.max(np.abs(bk.bracket_table(FR, fields, gamma))))
    report(11, "genus-one invariant brackets are nonzero (sharpness)",
           nonzero, 0.01, ok=nonzero > 0.01)
    for name in ("invariant_subalgebra_closed", "moduli_reduction_brackets"):
        r = pr.run_property(name, SL2C, g1, samples=10, seed=SEED)
        report(11, f"{name} on the paired genus-one graph", r.max_residual, 1e-5)


def test_criterion_12_jacobi():
    from poisson_kitaev.fields import GroupCoordinate
    G = bk.GroupEngine(SL2C, "heisenberg")
    fields = [GroupCoordinate(i) for i in range(6)]
    rng = rng_for("c12")
    worst = 0.0
    for _ in range(100):
        worst = max(worst, bk.jacobi_residual(G, G.random_point(rng), fields,
                                              outer_h=1e-4))
    report(12, "Jacobi identity of the Heisenberg bivector (100 points)",
           worst, 1e-4)


def _transport_marked(rec, marked):
    marked = set(marked)
    if rec.kind == "erase":
        assert rec.params["dropped_face"] not in marked
    if rec.kind == "glue_face":
        assert rec.params["face"] not in marked
    return marked


def test_criterion_13_topology():
    failures = []
    for name, build in ref.BUILDERS.items():
        g = build()
        site = ref.SITES[name] or rg.detect_sites(g)[0]
        marked = {site[1]}
        base = rg.surface_signature(g, marked)
        moved = []
        for e in g.edges:
            moved.append(rg.reverse_edge(g, e.id))
            moved.append(rg.split_edge(g, e.id))
            moved.append(rg.double_edge(g, e.id))
            if (g.left_face(e.id) != g.right_face(e.id)
                    and g.left_face(e.id) not in marked):
                try:
                    moved.append(rg.erase_edge(g, e.id))
                except PreconditionViolated:
                    pass  # erasing would isolate a vertex or disconnect
        for v in g.vertex_by_id:
            moved.append(rg.shift_cilium(g, "vertex", v, 1))
        for f in g.face_by_id:
            moved.append(rg.shift_cilium(g, "face", f, 1))
        paired_g, _ = rg.pair_graph(g, [site])
        moved.append((paired_g, rg.MoveRecord("pair", {"sites": [list(site)]})))
        for new_graph, rec in moved:
            sig = rg.surface_signature(new_graph, _transport_marked(rec, marked))
            if sig != base:
                failures.append((name, rec.kind, sig, base))
    ok = not failures
    print(f"criterion 13: {'PASS' if ok else 'FAIL'}  surface signature invariant "
          f"under all moves and pairing on all reference graphs"
          + ("" if ok else f": {failures}"))
    assert ok


def test_criterion_14_fd_convergence():
    g = ref.square()
    representatives = ["glue_vertex_poisson", "action_poisson_v",
                       "site_operator_poisson", "hamiltonian_field_vertex",
                       "phi_poisson"]
    h0 = 2e-3
    all_ok = True
    for name in representatives:
        coarse = pr.run_property(name, SL2C, g, samples=3, seed=SEED, h=h0,
                                 tol=np.inf).max_residual
        fine = pr.run_property(name, SL2C, g, samples=3, seed=SEED, h=h0 / 2,
                               tol=np.inf).max_residual
        ratio = fine / coarse
        ok = ratio <= 0.3
        all_ok &= ok
        print(f"criterion 14: {'PASS' if ok else 'FAIL'}  {name}: residual({h0 / 2:g})"
              f"/residual({h0:g}) = {ratio:.3f} <= 0.3")
    from poisson_kitaev.fields import GroupCoordinate
    G = bk.GroupEngine(SL2C, "heisenberg")
    fields = [GroupCoordinate(i) for i in range(6)]
    rng = rng_for("c14")
    gpt = G.random_point(rng)
    coarse = bk.jacobi_residual(G, gpt, fields, outer_h=h0)
    fine = bk.jacobi_residual(G, gpt, fields, outer_h=h0 / 2)
    ratio = fine / coarse
    ok = ratio <= 0.3
    all_ok &= ok
    print(f"criterion 14: {'PASS' if ok else 'FAIL'}  jacobi_heisenberg: "
          f"ratio = {ratio:.3f} <= 0.3")
    assert all_ok

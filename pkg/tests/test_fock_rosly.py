import numpy as np
import pytest

from poisson_kitaev import fock_rosly as fr
from poisson_kitaev import kitaev_space as ks
from poisson_kitaev import reference_graphs as ref
from poisson_kitaev import ribbon_graph as rg
from poisson_kitaev.double_group import build_r_matrix, r_antisymmetric
from poisson_kitaev.errors import NoUniqueSolution, PreconditionViolated


def fr_random(backend, graph, rng):
    return {e.id: backend.random_element(rng) for e in graph.edges}


class TestBivector:
    def test_abelian_closed_form_blocks(self, abelian, rng):
        # two edges out of one shared vertex: diagonal blocks are the constant
        # Heisenberg bivector, the coupling block is the transposed r-matrix
        g = rg.RibbonGraph(
            vertices=[rg.Vertex("w", (rg.EdgeEnd("e1", "s"), rg.EdgeEnd("e2", "s"))),
                      rg.Vertex("u1", (rg.EdgeEnd("e1", "t"),)),
                      rg.Vertex("u2", (rg.EdgeEnd("e2", "t"),))],
            edges=[rg.Edge("e1", "w", "u1"), rg.Edge("e2", "w", "u2")],
            faces=[rg.Face("f", (rg.FaceStep("e1", 1), rg.FaceStep("e1", -1),
                                 rg.FaceStep("e2", 1), rg.FaceStep("e2", -1)))],
        )
        R = build_r_matrix(abelian)
        W = fr.fr_bivector(abelian, R, g, fr_random(abelian, g, rng))
        d = abelian.dim
        WH = -2 * r_antisymmetric(R)
        assert np.allclose(W[:d, :d], WH) and np.allclose(W[d:, d:], WH)
        assert np.allclose(W[:d, d:], R.T)
        assert np.allclose(W[d:, :d], -R)

    def test_diagonal_blocks_are_heisenberg(self, backend, square, rng):
        R = build_r_matrix(backend)
        p = fr_random(backend, square, rng)
        W = fr.fr_bivector(backend, R, square, p)
        d = backend.dim
        from poisson_kitaev.double_group import bivector_wH
        for i, e in enumerate(square.edges):
            blk = W[i * d:(i + 1) * d, i * d:(i + 1) * d]
            assert np.max(np.abs(blk - bivector_wH(backend, R, p[e.id]))) < 1e-12

    def test_antisymmetric_and_local(self, backend, theta, rng):
        R = build_r_matrix(backend)
        p = fr_random(backend, theta, rng)
        W = fr.fr_bivector(backend, R, theta, p)
        assert np.max(np.abs(W + W.T)) < 1e-12

    def test_disjoint_edges_decouple(self, backend, rng):
        # path of three edges: the ends never meet, so the (e1, e3) block is 0
        g = rg.RibbonGraph(
            vertices=[rg.Vertex("a", (rg.EdgeEnd("e1", "s"),)),
                      rg.Vertex("b", (rg.EdgeEnd("e1", "t"), rg.EdgeEnd("e2", "s"))),
                      rg.Vertex("c", (rg.EdgeEnd("e2", "t"), rg.EdgeEnd("e3", "s"))),
                      rg.Vertex("d", (rg.EdgeEnd("e3", "t"),))],
            edges=[rg.Edge("e1", "a", "b"), rg.Edge("e2", "b", "c"),
                   rg.Edge("e3", "c", "d")],
            faces=[rg.Face("f", (rg.FaceStep("e1", 1), rg.FaceStep("e2", 1),
                                 rg.FaceStep("e3", 1), rg.FaceStep("e3", -1),
                                 rg.FaceStep("e2", -1), rg.FaceStep("e1", -1)))],
        )
        R = build_r_matrix(backend)
        W = fr.fr_bivector(backend, R, g, fr_random(backend, g, rng))
        d = backend.dim
        assert np.max(np.abs(W[0:d, 2 * d:3 * d])) == 0.0


class TestActions:
    def test_group_law_exact(self, backend, theta, rng):
        p = fr_random(backend, theta, rng)
        g1, g2 = backend.random_element(rng), backend.random_element(rng)
        lhs = fr.fr_vertex_action(backend, theta, "v1", g1,
                                  fr.fr_vertex_action(backend, theta, "v1", g2, p))
        rhs = fr.fr_vertex_action(backend, theta, "v1", backend.mul(g1, g2), p)
        assert ks.point_distance(backend, lhs, rhs) < 1e-12

    def test_disjoint_vertices_commute(self, backend, square, rng):
        p = fr_random(backend, square, rng)
        g1, g2 = backend.random_element(rng), backend.random_element(rng)
        lhs = fr.fr_vertex_action(backend, square, "v1", g1,
                                  fr.fr_vertex_action(backend, square, "v3", g2, p))
        rhs = fr.fr_vertex_action(backend, square, "v3", g2,
                                  fr.fr_vertex_action(backend, square, "v1", g1, p))
        assert ks.point_distance(backend, lhs, rhs) < 1e-12

    def test_loop_conjugation(self, backend, genus_one, rng):
        p = fr_random(backend, genus_one, rng)
        g = backend.random_element(rng)
        q = fr.fr_vertex_action(backend, genus_one, "v", g, p)
        expect = backend.mul(backend.mul(g, p["a"]), backend.inv(g))
        assert backend.distance(q["a"], expect) < 1e-12


class TestHolonomy:
    def test_empty_and_identity(self, backend, square, rng):
        p = fr_random(backend, square, rng)
        assert backend.dist_to_identity(fr.hol_fr(backend, square, rg.Path(), p)) == 0
        one = {e: backend.identity() for e in p}
        assert fr.fr_holonomy_defect(backend, square, "fout", one) == 0.0

    def test_vertex_paths_invisible(self, backend, square, rng):
        p = fr_random(backend, square, rng)
        site = ref.square_site()
        combined = rg.vertex_path(square, site[0]) * rg.face_path(square, site[1])
        assert backend.distance(
            fr.hol_fr(backend, square, combined, p),
            fr.hol_fr(backend, square, rg.face_path(square, site[1]), p)) < 1e-13


class TestMoves:
    def test_glue_of_trivial_second_factor(self, backend, square, rng):
        g2, _ = rg.split_edge(square, "e1")
        p = {e.id: backend.identity() for e in g2.edges}
        val = backend.random_element(rng)
        p["e1.1"] = val
        _, q, rec = fr.fr_glue_edges(backend, g2, "cut:e1", p)
        assert backend.distance(q[rec.params["new_edge"]], val) < 1e-14

    def test_move_equivariance_exact(self, backend, square, rng):
        g2, _ = rg.split_edge(square, "e1")
        p = fr_random(backend, g2, rng)
        g = backend.random_element(rng)
        # erase and reverse commute with every vertex action; gluing commutes
        # with the actions at the surviving vertices
        _, lhs, _ = fr.fr_erase_edge(backend, g2, "e2",
                                     fr.fr_vertex_action(backend, g2, "v3", g, p))
        g3, rhs_base, _ = fr.fr_erase_edge(backend, g2, "e2", p)
        rhs = fr.fr_vertex_action(backend, g3, "v3", g, rhs_base)
        assert ks.point_distance(backend, lhs, rhs) < 1e-12
        _, lhs2, rec = fr.fr_glue_edges(backend, g2, "cut:e1",
                                        fr.fr_vertex_action(backend, g2, "v3", g, p))
        g4, rhs2_base, _ = fr.fr_glue_edges(backend, g2, "cut:e1", p)
        rhs2 = fr.fr_vertex_action(backend, g4, "v3", g, rhs2_base)
        assert ks.point_distance(backend, lhs2, rhs2) < 1e-12

    def test_reverse(self, backend, square, rng):
        p = fr_random(backend, square, rng)
        q = fr.fr_reverse_edge(backend, "e1", p)
        assert backend.distance(q["e1"], backend.inv(p["e1"])) == 0.0


class TestFlatSection:
    def test_identity_extension(self, backend, theta):
        red = fr.FlatReduction(backend, theta, ["f31"])
        one_red = {e.id: backend.identity() for e in red.reduced_graph.edges}
        lift = red.section(one_red)
        assert all(backend.dist_to_identity(v) < 1e-14 for v in lift.values())

    def test_section_properties(self, backend, theta, rng):
        red = fr.FlatReduction(backend, theta, ["f31"])
        worst_flat = worst_rt = worst_eq = worst_hol = 0.0
        for _ in range(10):
            pred = fr_random(backend, red.reduced_graph, rng)
            lift = red.section(pred)
            worst_flat = max(worst_flat, fr.fr_holonomy_defect(backend, theta, "f31", lift))
            back = red.forward(lift)
            worst_rt = max(worst_rt, ks.point_distance(backend, back, pred))
            g = backend.random_element(rng)
            lhs = red.section(fr.fr_vertex_action(backend, red.reduced_graph, "v1", g, pred))
            rhs = fr.fr_vertex_action(backend, theta, "v1", g, lift)
            worst_eq = max(worst_eq, ks.point_distance(backend, lhs, rhs))
            for f in red.reduced_graph.face_by_id:
                worst_hol = max(worst_hol, backend.distance(
                    fr.fr_face_holonomy(backend, red.reduced_graph, f, pred),
                    fr.fr_face_holonomy(backend, theta, f, lift)))
        assert worst_flat < 1e-10
        assert worst_rt < 1e-12
        assert worst_eq < 1e-10
        assert worst_hol < 1e-10

    def test_section_after_erase_fixes_flat_points(self, backend, theta, rng):
        red = fr.FlatReduction(backend, theta, ["f31"])
        pred = fr_random(backend, red.reduced_graph, rng)
        lift = red.section(pred)
        again = red.section(red.forward(lift))
        assert ks.point_distance(backend, again, lift) < 1e-12

    def test_no_unique_solution_detected(self, backend, single_edge, rng):
        with pytest.raises(NoUniqueSolution):
            fr.fr_flat_section(backend, single_edge, "e", "f", {})

    def test_unerasable_face_rejected(self, backend, single_edge):
        with pytest.raises(PreconditionViolated):
            fr.FlatReduction(backend, single_edge, ["f"])

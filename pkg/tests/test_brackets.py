import numpy as np
import pytest

from poisson_kitaev import brackets as bk
from poisson_kitaev import kitaev_space as ks
from poisson_kitaev import reference_graphs as ref
from poisson_kitaev import ribbon_graph as rg
from poisson_kitaev.double_group import r_antisymmetric
from poisson_kitaev.errors import DimensionMismatch
from poisson_kitaev.fields import (
    ClassFunction,
    EdgeCoordinate,
    FlatnessDefect,
    GroupCoordinate,
    HolonomyCoordinate,
)


class TestBracketBasics:
    def test_self_bracket_vanishes(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        p = K.random_point(rng)
        f = EdgeCoordinate("e1", 0)
        assert abs(bk.bracket(K, f, f, p)) < 1e-14

    def test_antisymmetry(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        p = K.random_point(rng)
        f1, f2 = EdgeCoordinate("e1", 0), EdgeCoordinate("e1", 3)
        assert abs(bk.bracket(K, f1, f2, p) + bk.bracket(K, f2, f1, p)) < 1e-12

    def test_abelian_coordinate_brackets_closed_form(self, abelian, square, rng):
        # constant bivector: {x_i, x_j} = -2 (R_a)_{ij} on every edge
        K = bk.KEngine(abelian, square)
        p = K.random_point(rng)
        Ra = r_antisymmetric(K.R)
        for i in range(abelian.dim):
            for j in range(abelian.dim):
                got = bk.bracket(K, EdgeCoordinate("e2", i), EdgeCoordinate("e2", j), p)
                assert abs(got - (-2 * Ra[i, j])) < 1e-12
        # coordinates of distinct edges commute on the product space
        assert abs(bk.bracket(K, EdgeCoordinate("e1", 0), EdgeCoordinate("e2", 1), p)) == 0

    def test_dimension_mismatch(self, backend, square, rng):
        G = bk.GroupEngine(backend)
        with pytest.raises(DimensionMismatch):
            G.eval_field(EdgeCoordinate("e1", 0), backend.identity())


class TestJacobians:
    def test_identity_map(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        p = K.random_point(rng)
        J = bk.map_jacobian(K, K, lambda q: q, p)
        assert np.max(np.abs(J - np.eye(K.dim))) < 1e-8

    def test_group_inversion_at_identity(self, backend):
        G = bk.GroupEngine(backend)
        J = bk.map_jacobian(G, G, backend.inv, backend.identity())
        assert np.max(np.abs(J + np.eye(G.dim))) < 1e-8

    def test_chain_rule(self, backend, rng):
        G = bk.GroupEngine(backend)
        a = backend.random_element(rng)
        b = backend.random_element(rng)
        phi = lambda g: backend.mul(a, g)
        psi = lambda g: backend.mul(g, b)
        base = backend.random_element(rng)
        J_comp = bk.map_jacobian(G, G, lambda g: phi(psi(g)), base)
        J_phi = bk.map_jacobian(G, G, phi, psi(base))
        J_psi = bk.map_jacobian(G, G, psi, base)
        assert np.max(np.abs(J_comp - J_phi @ J_psi)) < 1e-6

    def test_poisson_residual_identity_map(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        pts = [K.random_point(rng) for _ in range(3)]
        assert bk.poisson_map_residual(K, K, lambda q: q, pts) < 1e-10


class TestWordDifferentials:
    @pytest.mark.parametrize("engine_cls", [bk.KEngine, bk.FREngine])
    def test_gradients_match_plain_fd(self, backend, square, rng, engine_cls):
        eng = engine_cls(backend, square)
        p = eng.random_point(rng)
        site = ref.square_site()
        loop = rg.vertex_path(square, site[0]) * rg.face_path(square, site[1])
        for field in (ClassFunction(loop, "re_trace"),
                      ClassFunction(loop, "abs_trace_sq"),
                      HolonomyCoordinate(loop, 1)):
            fast = eng.field_gradient(field, p)
            slow = np.array([
                (eng.eval_field(field, eng.perturb(p, i, eng.h))
                 - eng.eval_field(field, eng.perturb(p, i, -eng.h))) / (2 * eng.h)
                for i in range(eng.dim)])
            assert np.max(np.abs(fast - slow)) < 1e-9

    def test_path_jacobians_match_function_jacobian(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        p = K.random_point(rng)
        path = rg.face_path(square, "fout")
        fast = bk.path_coordinate_jacobian(K, path, p)
        slow = bk.function_jacobian(
            K, lambda q: backend.elem_coords(K.hol(path, q)), p)
        assert np.max(np.abs(fast - slow)) < 1e-9

    def test_pushforward_jacobian_consistent(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        G = bk.GroupEngine(backend)
        p = K.random_point(rng)
        path = rg.vertex_path(square, "v2")
        fast = bk.path_pushforward_jacobian(K, path, p)
        slow = bk.map_jacobian(K, G, lambda q: K.hol(path, q), p)
        assert np.max(np.abs(fast - slow)) < 1e-8


class TestJacobi:
    def test_constant_bivector_exact(self, abelian, rng):
        G = bk.GroupEngine(abelian, "heisenberg")
        fields = [GroupCoordinate(i) for i in range(4)]
        assert bk.jacobi_residual(G, G.random_point(rng), fields, outer_h=1e-4) < 1e-12

    def test_heisenberg_on_matrix_backend(self, sl2c, rng):
        G = bk.GroupEngine(sl2c, "heisenberg")
        fields = [GroupCoordinate(i) for i in range(6)]
        worst = 0.0
        for _ in range(10):
            worst = max(worst, bk.jacobi_residual(G, G.random_point(rng), fields,
                                                  outer_h=1e-4))
        assert worst < 1e-4

    def test_product_space_jacobi(self, sl2c, square, rng):
        K = bk.KEngine(sl2c, square)
        fields = [EdgeCoordinate("e1", 0), EdgeCoordinate("e1", 2),
                  EdgeCoordinate("e1", 5), EdgeCoordinate("e2", 1)]
        assert bk.jacobi_residual(K, K.random_point(rng), fields, outer_h=1e-4) < 1e-4


class TestSubgroupEngines:
    def test_subgroup_points_stay_inside(self, backend, rng):
        for side, member in (("plus", backend.is_in_plus),
                             ("minus", backend.is_in_minus)):
            S = bk.SubgroupEngine(backend, side)
            g = S.random_point(rng)
            assert member(g, 1e-9)
            assert member(S.perturb(g, 0, 1e-3), 1e-9)

    def test_multiplicative_bivector_tangent_to_subgroups(self, backend, rng):
        # the complement blocks of the restricted bivector vanish on members
        from poisson_kitaev.double_group import bivector_w
        R = bk.canonical_r(backend)
        dm = backend.dim_minus
        for _ in range(20):
            alpha = backend.random_in_plus(rng)
            W = bivector_w(backend, R, alpha)
            assert np.max(np.abs(W[:dm, :])) < 1e-10
            x = backend.random_in_minus(rng)
            W = bivector_w(backend, R, x)
            assert np.max(np.abs(W[dm:, :])) < 1e-10

    def test_flat_defect_field(self, backend, square, rng):
        K = bk.KEngine(backend, square)
        one = ks.identity_point(backend, square)
        assert K.eval_field(FlatnessDefect("v1"), one) == 0.0
        p = K.random_point(rng)
        assert K.eval_field(FlatnessDefect("v1"), p) >= 0.0

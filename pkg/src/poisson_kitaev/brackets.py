"""Bracket engines: bivectors, gradients, pushforwards, Jacobi residuals.

An engine owns a phase space (product space, coupled space, the group, one
of its subgroups, or a product of these), its Poisson bivector in the
right-trivialized frame, and evaluation of scalar fields.  Derivatives are
central differences in the frame directions (step ``h``); edge and group
coordinates also have closed-form frame derivatives, which the nested
checks (Jacobi, Hamiltonian fields) exploit to keep one finite-difference
layer out of the noise budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import fock_rosly as fr
from . import kitaev_space as ks
from . import ribbon_graph as rg
from .double_group import (
    DoubleGroupBackend,
    bivector_w,
    bivector_wGstar,
    bivector_wH,
    build_r_matrix,
)
from .errors import DimensionMismatch
from .fields import (
    ClassFunction,
    EdgeCoordinate,
    FlatnessDefect,
    GroupCoordinate,
    HolonomyCoordinate,
)


@dataclass(frozen=True)
class CallableField:
    """Opaque scalar field evaluated by a closure (no exact gradient)."""

    fn: Callable

    def __hash__(self):
        return id(self.fn)


def canonical_r(backend: DoubleGroupBackend) -> np.ndarray:
    R = getattr(backend, "_canonical_r", None)
    if R is None:
        R = build_r_matrix(backend)
        backend._canonical_r = R
    return R


class Engine:
    """Interface shared by all engines; ``h`` is the central-difference step."""

    h: float = 1e-5
    dim: int

    def bivector(self, point) -> np.ndarray:
        raise NotImplementedError

    def perturb(self, point, i: int, step: float):
        raise NotImplementedError

    def displacement(self, q, base) -> np.ndarray:
        """Right-chart coordinates of q relative to base."""
        raise NotImplementedError

    def eval_field(self, field, point) -> float:
        raise NotImplementedError

    def exact_gradient(self, field, point) -> Optional[np.ndarray]:
        return None

    def random_point(self, rng: np.random.Generator, radius: float = 0.5):
        raise NotImplementedError

    def field_gradient(self, field, point) -> np.ndarray:
        exact = self.exact_gradient(field, point)
        if exact is not None:
            return exact
        out = np.empty(self.dim)
        for i in range(self.dim):
            fp = self.eval_field(field, self.perturb(point, i, self.h))
            fm = self.eval_field(field, self.perturb(point, i, -self.h))
            out[i] = (fp - fm) / (2 * self.h)
        return out


class _EdgeSpaceEngine(Engine):
    """Common machinery for the product and coupled spaces (points are
    edge-decoration dicts)."""

    def __init__(self, backend: DoubleGroupBackend, graph: rg.RibbonGraph,
                 h: float = 1e-5):
        self.backend = backend
        self.graph = graph
        self.h = h
        self.edge_ids = [e.id for e in graph.edges]
        self.edge_index = {e: i for i, e in enumerate(self.edge_ids)}
        self.R = canonical_r(backend)
        self.dim = backend.dim * len(self.edge_ids)
        self._exp_cache = {}

    def frame(self, i: int) -> tuple[str, int]:
        d = self.backend.dim
        return self.edge_ids[i // d], i % d

    def _exp_step(self, a: int, step: float):
        key = (a, step)
        cached = self._exp_cache.get(key)
        if cached is None:
            v = np.zeros(self.backend.dim)
            v[a] = step
            cached = self.backend.exp(v)
            self._exp_cache[key] = cached
        return cached

    def perturb(self, point, i, step):
        eid, a = self.frame(i)
        out = dict(point)
        out[eid] = self.backend.mul(self._exp_step(a, step), out[eid])
        return out

    def displacement(self, q, base):
        b = self.backend
        out = np.empty(self.dim)
        d = b.dim
        for i, eid in enumerate(self.edge_ids):
            out[i * d:(i + 1) * d] = b.log_near_identity(
                b.mul(q[eid], b.inv(base[eid])))
        return out

    def random_point(self, rng, radius: float = 0.5):
        return ks.random_point(self.backend, self.graph, rng, radius)

    def hol(self, path: rg.Path, point):
        raise NotImplementedError

    def eval_field(self, field, point) -> float:
        b = self.backend
        if isinstance(field, EdgeCoordinate):
            return float(b.elem_coords(point[field.edge])[field.index])
        if isinstance(field, HolonomyCoordinate):
            return float(b.elem_coords(self.hol(field.path, point))[field.index])
        if isinstance(field, ClassFunction):
            return b.class_invariant(field.invariant, self.hol(field.path, point))
        if isinstance(field, FlatnessDefect):
            return self.flat_defect(field.label, point)
        if isinstance(field, CallableField):
            return float(field.fn(point))
        raise DimensionMismatch(f"field {field!r} not supported on {type(self).__name__}")

    def flat_defect(self, label, point) -> float:
        raise NotImplementedError

    def exact_gradient(self, field, point):
        b = self.backend
        d = b.dim
        if isinstance(field, EdgeCoordinate):
            out = np.zeros(self.dim)
            i = self.edge_index[field.edge]
            g = point[field.edge]
            for a in range(d):
                out[i * d + a] = b.elem_coords_tangent(g, a)[field.index]
            return out
        if isinstance(field, HolonomyCoordinate):
            data = _WordData(self, field.path, point)
            out = np.zeros(self.dim)
            for eid, a, dhol in data.differentials(point):
                out[self.edge_index[eid] * d + a] = b.elem_coords(dhol)[field.index]
            return out
        if isinstance(field, ClassFunction) and field.path is not None:
            data = _WordData(self, field.path, point)
            out = np.zeros(self.dim)
            for eid, a, dhol in data.differentials(point):
                out[self.edge_index[eid] * d + a] = b.class_invariant_differential(
                    field.invariant, data.hol, dhol)
            return out
        return None

    def letter_value(self, kind: str, exp: int, element):
        raise NotImplementedError

    def letter_depends(self, kind: str) -> bool:
        return True


class _WordData:
    """Cached factor/prefix/suffix products of one holonomy word at a point.

    ``differentials`` yields the variation of the full word product for every
    frame direction that touches it: the varied factor is re-evaluated by a
    central difference, the rest enter through the cached segment products.
    """

    def __init__(self, engine: "_EdgeSpaceEngine", path: rg.Path, point):
        b = engine.backend
        self.engine = engine
        self.word = path.word
        n = len(self.word)
        self.factors = []
        self.positions: dict[str, list[int]] = {}
        for k, (kind, eid, exp) in enumerate(self.word):
            self.factors.append(engine.letter_value(kind, exp, point[eid]))
            if engine.letter_depends(kind):
                self.positions.setdefault(eid, []).append(k)
        self.prefix = [b.identity()]
        for k in range(n):
            self.prefix.append(b.mul(self.prefix[-1], self.factors[k]))
        self.suffix = [b.identity()] * (n + 1)
        for k in range(n - 1, -1, -1):
            self.suffix[k] = b.mul(self.factors[k], self.suffix[k + 1])
        self.hol = self.prefix[n]

    def differentials(self, point):
        """Yield (edge, frame index, d hol) over all touching directions."""
        engine = self.engine
        b = engine.backend
        h = engine.h
        for eid, ks_ in self.positions.items():
            g = point[eid]
            for a in range(b.dim):
                plus_el = b.mul(engine._exp_step(a, h), g)
                minus_el = b.mul(engine._exp_step(a, -h), g)
                dF_memo = {}
                dhol = None
                for k in ks_:
                    kind, _, exp = self.word[k]
                    dF = dF_memo.get((kind, exp))
                    if dF is None:
                        dF = (engine.letter_value(kind, exp, plus_el)
                              - engine.letter_value(kind, exp, minus_el)) / (2 * h)
                        dF_memo[(kind, exp)] = dF
                    term = b.sandwich(self.prefix[k], dF, self.suffix[k + 1])
                    dhol = term if dhol is None else dhol + term
                yield eid, a, dhol


def path_coordinate_jacobian(engine: "_EdgeSpaceEngine", path: rg.Path,
                             point) -> np.ndarray:
    """Frame Jacobian of the flat coordinates of Hol(path)."""
    b = engine.backend
    d = b.dim
    cdim = b.elem_coords(b.identity()).size
    J = np.zeros((cdim, engine.dim))
    data = _WordData(engine, path, point)
    for eid, a, dhol in data.differentials(point):
        J[:, engine.edge_index[eid] * d + a] = b.elem_coords(dhol)
    return J


def path_pushforward_jacobian(engine: "_EdgeSpaceEngine", path: rg.Path,
                              point) -> np.ndarray:
    """Frame Jacobian of Hol(path) into the right chart at its value."""
    b = engine.backend
    d = b.dim
    J = np.zeros((b.dim, engine.dim))
    data = _WordData(engine, path, point)
    for eid, a, dhol in data.differentials(point):
        J[:, engine.edge_index[eid] * d + a] = b.right_chart_differential(data.hol, dhol)
    return J


def decoupling_jacobian(engine: "_EdgeSpaceEngine", dec, point) -> np.ndarray:
    """Frame Jacobian of the decoupling map, rows grouped by target edge."""
    d = engine.backend.dim
    J = np.zeros((engine.dim, engine.dim))
    for eid, path in dec.edge_paths.items():
        i = engine.edge_index[eid]
        J[i * d:(i + 1) * d, :] = path_pushforward_jacobian(engine, path, point)
    return J


class KEngine(_EdgeSpaceEngine):
    """Product of Heisenberg doubles; the bivector is block diagonal."""

    def bivector(self, point):
        b = self.backend
        d = b.dim
        W = np.zeros((self.dim, self.dim))
        for i, eid in enumerate(self.edge_ids):
            W[i * d:(i + 1) * d, i * d:(i + 1) * d] = bivector_wH(b, self.R, point[eid])
        return W

    def hol(self, path, point):
        return ks.hol(self.backend, self.graph, path, point)

    def letter_value(self, kind, exp, element):
        val = ks.generator_value(self.backend, kind, element)
        return self.backend.inv(val) if exp == -1 else val

    def flat_defect(self, label, point):
        b = self.backend
        if label in self.graph.vertex_by_id:
            h = ks.vertex_holonomy(b, self.graph, label, point)
        else:
            h = ks.face_holonomy(b, self.graph, label, point)
        delta = b.elem_coords(h) - b.elem_coords(b.identity())
        return float(delta @ delta)


class FREngine(_EdgeSpaceEngine):
    """Coupled space: same points, vertex-coupled bivector, side-only holonomy."""

    def bivector(self, point):
        return fr.fr_bivector(self.backend, self.R, self.graph, point)

    def hol(self, path, point):
        return fr.hol_fr(self.backend, self.graph, path, point)

    def letter_value(self, kind, exp, element):
        if kind in ("f", "b"):
            return self.backend.identity()
        return self.backend.inv(element) if exp == -1 else element

    def letter_depends(self, kind):
        return kind in ("r", "l")

    def flat_defect(self, label, point):
        b = self.backend
        h = fr.fr_face_holonomy(b, self.graph, label, point)
        delta = b.elem_coords(h) - b.elem_coords(b.identity())
        return float(delta @ delta)


class GroupEngine(Engine):
    """The group itself with one of its three standard bivectors."""

    KINDS = ("sklyanin", "heisenberg", "dual_star")

    def __init__(self, backend: DoubleGroupBackend, kind: str = "heisenberg",
                 h: float = 1e-5):
        if kind not in self.KINDS:
            raise DimensionMismatch(f"unknown group bivector {kind!r}")
        self.backend = backend
        self.kind = kind
        self.h = h
        self.R = canonical_r(backend)
        self.dim = backend.dim

    def bivector(self, g):
        if self.kind == "sklyanin":
            return bivector_w(self.backend, self.R, g)
        if self.kind == "heisenberg":
            return bivector_wH(self.backend, self.R, g)
        return bivector_wGstar(self.backend, self.R, g)

    def perturb(self, g, i, step):
        v = np.zeros(self.dim)
        v[i] = step
        return self.backend.mul(self.backend.exp(v), g)

    def displacement(self, q, base):
        return self.backend.log_near_identity(
            self.backend.mul(q, self.backend.inv(base)))

    def random_point(self, rng, radius: float = 0.5):
        return self.backend.random_element(rng, radius)

    def eval_field(self, field, g) -> float:
        if isinstance(field, GroupCoordinate):
            return float(self.backend.elem_coords(g)[field.index])
        if isinstance(field, ClassFunction) and field.path is None:
            return self.backend.class_invariant(field.invariant, g)
        if isinstance(field, CallableField):
            return float(field.fn(g))
        raise DimensionMismatch(f"field {field!r} not supported on a group engine")

    def exact_gradient(self, field, g):
        if not isinstance(field, GroupCoordinate):
            return None
        out = np.empty(self.dim)
        for a in range(self.dim):
            out[a] = self.backend.elem_coords_tangent(g, a)[field.index]
        return out


class SubgroupEngine(Engine):
    """G_- or G_+ as a Poisson-Lie subgroup (restricted multiplicative
    bivector, frame from the subalgebra basis)."""

    def __init__(self, backend: DoubleGroupBackend, side: str, h: float = 1e-5):
        if side not in ("minus", "plus"):
            raise DimensionMismatch(f"side must be minus/plus, got {side!r}")
        self.backend = backend
        self.side = side
        self.h = h
        self.R = canonical_r(backend)
        dm = backend.dim_minus
        self.offset = 0 if side == "minus" else dm
        self.dim = dm if side == "minus" else backend.dim_plus

    def _slice(self):
        return slice(self.offset, self.offset + self.dim)

    def bivector(self, g):
        W = bivector_w(self.backend, self.R, g)
        return W[self._slice(), self._slice()]

    def perturb(self, g, i, step):
        v = np.zeros(self.backend.dim)
        v[self.offset + i] = step
        return self.backend.mul(self.backend.exp(v), g)

    def displacement(self, q, base):
        full = self.backend.log_near_identity(
            self.backend.mul(q, self.backend.inv(base)))
        return full[self._slice()]

    def random_point(self, rng, radius: float = 0.5):
        if self.side == "minus":
            return self.backend.random_in_minus(rng, radius)
        return self.backend.random_in_plus(rng, radius)

    def eval_field(self, field, g) -> float:
        if isinstance(field, GroupCoordinate):
            return float(self.backend.elem_coords(g)[field.index])
        if isinstance(field, CallableField):
            return float(field.fn(g))
        raise DimensionMismatch(f"field {field!r} not supported on a subgroup engine")


class ProductEngine(Engine):
    """Product Poisson structure of several engines; points are tuples."""

    def __init__(self, *factors: Engine):
        self.factors = factors
        self.h = factors[0].h
        self.dim = sum(f.dim for f in factors)
        self.offsets = np.cumsum([0] + [f.dim for f in factors])

    def _locate(self, i):
        for k, f in enumerate(self.factors):
            if i < self.offsets[k + 1]:
                return k, i - self.offsets[k]
        raise DimensionMismatch(f"direction {i} out of range")

    def bivector(self, point):
        W = np.zeros((self.dim, self.dim))
        for k, f in enumerate(self.factors):
            sl = slice(self.offsets[k], self.offsets[k + 1])
            W[sl, sl] = f.bivector(point[k])
        return W

    def perturb(self, point, i, step):
        k, j = self._locate(i)
        out = list(point)
        out[k] = self.factors[k].perturb(point[k], j, step)
        return tuple(out)

    def displacement(self, q, base):
        return np.concatenate([f.displacement(q[k], base[k])
                               for k, f in enumerate(self.factors)])

    def random_point(self, rng, radius: float = 0.5):
        return tuple(f.random_point(rng, radius) for f in self.factors)


# --- calculus over engines --------------------------------------------------


def bracket(engine: Engine, f1, f2, point) -> float:
    g1 = engine.field_gradient(f1, point)
    g2 = engine.field_gradient(f2, point)
    return float(g1 @ engine.bivector(point) @ g2)


def gradient_matrix(engine: Engine, fields: Sequence, point) -> np.ndarray:
    return np.stack([engine.field_gradient(f, point) for f in fields])


def bracket_table(engine: Engine, fields: Sequence, point) -> np.ndarray:
    """All pairwise brackets of ``fields`` at ``point``."""
    G = gradient_matrix(engine, fields, point)
    return G @ engine.bivector(point) @ G.T


def map_jacobian(src: Engine, dst: Engine, fn: Callable, point,
                 h: Optional[float] = None) -> np.ndarray:
    """Pushforward matrix of ``fn`` at ``point`` in right-trivialized frames."""
    h = h or src.h
    base = fn(point)
    J = np.empty((dst.dim, src.dim))
    for i in range(src.dim):
        plus = dst.displacement(fn(src.perturb(point, i, h)), base)
        minus = dst.displacement(fn(src.perturb(point, i, -h)), base)
        J[:, i] = (plus - minus) / (2 * h)
    return J


def poisson_map_residual(src: Engine, dst: Engine, fn: Callable, points,
                         h: Optional[float] = None) -> float:
    """max over samples of | J W_src J^T - W_dst(fn(p)) | entrywise."""
    worst = 0.0
    for p in points:
        J = map_jacobian(src, dst, fn, p, h)
        R = J @ src.bivector(p) @ J.T - dst.bivector(fn(p))
        worst = max(worst, float(np.max(np.abs(R))))
    return worst


def function_jacobian(engine: Engine, vecfn: Callable, point,
                      h: Optional[float] = None) -> np.ndarray:
    """Frame gradients of a vector-valued function (rows = components)."""
    h = h or engine.h
    base = np.asarray(vecfn(point), dtype=float)
    J = np.empty((base.size, engine.dim))
    for i in range(engine.dim):
        plus = np.asarray(vecfn(engine.perturb(point, i, h)), dtype=float)
        minus = np.asarray(vecfn(engine.perturb(point, i, -h)), dtype=float)
        J[:, i] = (plus - minus) / (2 * h)
    return J


def hamiltonian_vector(engine: Engine, field, point) -> np.ndarray:
    """Frame components of the derivation {field, -}."""
    return engine.bivector(point).T @ engine.field_gradient(field, point)


def jacobi_residual(engine: Engine, point, fields: Sequence,
                    outer_h: Optional[float] = None) -> float:
    """Max Jacobiator over triples of the given fields.

    Inner brackets use exact gradients where available; the outer layer
    differentiates the whole bracket table at once by central differences
    with step ``outer_h``.
    """
    outer = outer_h or engine.h
    n = len(fields)
    dU = np.empty((engine.dim, n, n))
    for t in range(engine.dim):
        up = bracket_table(engine, fields, engine.perturb(point, t, outer))
        down = bracket_table(engine, fields, engine.perturb(point, t, -outer))
        dU[t] = (up - down) / (2 * outer)
    G0 = gradient_matrix(engine, fields, point)
    X = G0 @ engine.bivector(point)  # X[a] . grad u = {f_a, u}
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                total = (X[i] @ dU[:, j, k] + X[j] @ dU[:, k, i]
                         + X[k] @ dU[:, i, j])
                worst = max(worst, abs(float(total)))
    return worst

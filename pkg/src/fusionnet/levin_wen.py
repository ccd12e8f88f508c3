"""Levin-Wen string-net models on a square vertex lattice.

Vertices sit at integer points ``(i, j)``. A bulk vertex carries
``H_v = C(a1 b1 -> b2 a2)`` where ``a1``/``a2`` are the left/right horizontal
legs and ``b1``/``b2`` the bottom/top vertical legs. With module data the
column ``i = 0`` is a boundary column whose vertices carry
``H_v = M(m1 -> m2 <| c)``: blue legs ``m1`` (bottom) and ``m2`` (top) and a
black leg ``c`` pointing right.

Every leg has its own label, so neighbouring vertices share an edge only
after the edge projector ``A_l`` enforces matching labels. Local spaces are
orthonormal for the skein inner product; region states are compared with
skein modules through the evaluation map, which composes the vertex
morphisms of a rectangle row by row ("staircase" order).

The module also contains a stabilizer backend for the toric code, used as an
independent check of the ``Vec(Z/2)`` case.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra_net import BlockAlgebra, block_commutant
from .category_core import CategoryError, FusionCategoryData, ModuleCategoryData, global_dim, w_bubble
from .homspace import Calculus, Morphism
from .reports import int_item, item

__all__ = [
    "ResourceError",
    "LocalSpace",
    "SparseOperator",
    "build_local_spaces",
    "LWLattice",
    "LWRegion",
    "SkeinMap",
    "gluing_operator",
    "surrounds",
    "BoundaryExtraction",
    "extract_boundary_algebra",
    "lto1_check",
    "lto_suite",
    "PauliModel",
    "pauli_backend",
    "pauli_lto_suite",
    "pauli_standard_cases",
    "pauli_expected_boundary_dim",
    "lw_pauli_comparison",
    "gamma_homomorphism_residuals",
]

NULL_CUTOFF = 1e-9
FULL_LIMIT = 300_000
MAX_REGION_VERTICES = 9

Vertex = tuple[int, int]

BULK, BOUNDARY = "bulk", "boundary"
LEFT = {BULK: "a1"}
RIGHT = {BULK: "a2", BOUNDARY: "c"}
BOTTOM = {BULK: "b1", BOUNDARY: "m1"}
TOP = {BULK: "b2", BOUNDARY: "m2"}


class ResourceError(CategoryError):
    """Raised when a request exceeds the desk-scale guard."""


# ----------------------------------------------------------------------
# local spaces
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LocalSpace:
    """Orthonormal basis of one vertex space.

    Bulk states are ``(a1, b1, b2, a2, r)`` standing for
    ``scale * v^r_{b2 a2} (v^r_{a1 b1})^dag``; boundary states are
    ``(m1, c, m2)`` standing for ``scale * v^{m1}_{m2 c}``. ``scale`` makes
    each vector a unit vector for the skein inner product.
    """

    kind: str
    legs: tuple[str, ...]
    states: tuple[tuple[int, ...], ...]
    scale: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.states)

    def labels(self, leg: str) -> np.ndarray:
        k = self.legs.index(leg)
        return np.array([s[k] for s in self.states], dtype=np.int64)

    def index(self, state: tuple[int, ...]) -> int:
        return self._lookup()[state]

    def _lookup(self) -> dict:
        d = self.__dict__.get("_idx")
        if d is None:
            d = {s: i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_idx", d)
        return d


def _check_module_trace(mod: ModuleCategoryData, tol: float = 1e-9) -> None:
    d, m = mod.cat.dims, mod.trace_dims
    for x in range(mod.rank):
        for a in range(mod.cat.rank):
            rhs = sum(mod.action[x, a, y] * m[y] for y in range(mod.rank))
            if abs(m[x] * d[a] - rhs) > tol * max(1.0, rhs):
                raise CategoryError("module trace is not normalized (d_m d_a != sum d_n)")
    if any(abs(b - 1.0) > tol for b in w_bubble(mod, range(mod.rank))):
        raise CategoryError("module trace is not normalized (W-loop != 1)")


def build_local_spaces(cat: FusionCategoryData, module: ModuleCategoryData | None = None) -> dict[str, LocalSpace]:
    """Bulk space ``C(X^2 -> X^2)`` and, with a module, ``M(W -> W <| X)``.

    Here ``X`` and ``W`` are the sums of all simples.
    """
    d = cat.dims
    k = cat.rank
    states, scale = [], []
    for a1, b1, b2, a2 in itertools.product(range(k), repeat=4):
        for r in cat.ring.channels(a1, b1):
            if cat.N[b2, a2, r]:
                states.append((a1, b1, b2, a2, r))
                scale.append((d[a1] * d[b1] * d[b2] * d[a2]) ** 0.25 / np.sqrt(d[r]))
    out = {BULK: LocalSpace(BULK, ("a1", "b1", "b2", "a2"), tuple(states), np.array(scale))}
    if module is not None:
        _check_module_trace(module)
        md = module.trace_dims
        states, scale = [], []
        for m1, c, m2 in itertools.product(range(module.rank), range(k), range(module.rank)):
            if module.action[m2, c, m1]:
                states.append((m1, c, m2))
                scale.append((d[c] * md[m1] * md[m2]) ** 0.25 / np.sqrt(md[m1]))
        out[BOUNDARY] = LocalSpace(BOUNDARY, ("m1", "c", "m2"), tuple(states), np.array(scale))
    return out


@dataclass
class SparseOperator:
    """Sparse operator on a region basis with its vertex support."""

    matrix: sp.csr_matrix
    support: tuple[Vertex, ...]
    basis: str

    @property
    def dag(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T.tocsr(), self.support, self.basis)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator((self.matrix @ other.matrix).tocsr(),
                              tuple(sorted(set(self.support) | set(other.support))), self.basis)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _spnorm(m) -> float:
    if sp.issparse(m):
        return float(np.abs(m.data).max()) if m.nnz else 0.0
    return float(np.abs(m).max()) if m.size else 0.0


# ----------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------

class LWLattice:
    """Rectangular lattice of ``width x height`` vertices.

    With ``module`` the column ``i = 0`` consists of boundary vertices.
    """

    def __init__(self, cat: FusionCategoryData, width: int, height: int,
                 module: ModuleCategoryData | None = None, calc: Calculus | None = None):
        if width < 1 or height < 1:
            raise CategoryError("empty lattice")
        if module is not None and width < 2:
            raise CategoryError("a boundary lattice needs a bulk column")
        self.cat = cat
        self.module = module
        self.width = width
        self.height = height
        self.calc = calc or Calculus(cat, module=module)
        self.spaces = build_local_spaces(cat, module)
        self.D = global_dim(cat)
        self._plaq_cache: dict[str, sp.csr_matrix] = {}

    def kind(self, v: Vertex) -> str:
        return BOUNDARY if (self.module is not None and v[0] == 0) else BULK

    def space(self, v: Vertex) -> LocalSpace:
        return self.spaces[self.kind(v)]

    def contains(self, v: Vertex) -> bool:
        return 0 <= v[0] < self.width and 0 <= v[1] < self.height

    def vertices(self) -> list[Vertex]:
        return [(i, j) for j in range(self.height) for i in range(self.width)]

    def edges(self, vertices: Iterable[Vertex] | None = None) -> list[tuple[Vertex, str, Vertex, str]]:
        """Edges ``(v, leg_v, w, leg_w)`` with both ends in ``vertices``."""
        vs = set(self.vertices() if vertices is None else vertices)
        out = []
        for v in sorted(vs, key=lambda t: (t[1], t[0])):
            r = (v[0] + 1, v[1])
            if r in vs:
                out.append((v, RIGHT[self.kind(v)], r, LEFT[self.kind(r)]))
            u = (v[0], v[1] + 1)
            if u in vs:
                out.append((v, TOP[self.kind(v)], u, BOTTOM[self.kind(u)]))
        return out

    def plaquettes(self, vertices: Iterable[Vertex] | None = None) -> list[tuple[Vertex, Vertex, Vertex, Vertex]]:
        """Plaquettes ``(BL, BR, TL, TR)`` with all corners in ``vertices``."""
        vs = set(self.vertices() if vertices is None else vertices)
        out = []
        for (i, j) in sorted(vs, key=lambda t: (t[1], t[0])):
            c = ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1))
            if all(x in vs for x in c):
                out.append(c)
        return out

    def region(self, vertices: Iterable[Vertex], max_vertices: int = MAX_REGION_VERTICES) -> "LWRegion":
        return LWRegion(self, vertices, max_vertices)

    # ------------------------------------------------------------------
    # plaquette operator on the four corners
    # ------------------------------------------------------------------
    def plaquette_local(self, kind: str) -> sp.csr_matrix:
        """``B_p`` on ``H_BL (x) H_BR (x) H_TL (x) H_TR`` (mixed radix, BL slowest).

        The loop ``c`` (weight ``d_c / D``) is created by ``coev_c`` next to
        the bottom-left corner, fused into the four plaquette edges with the
        resolution ``id_{x (x) c} = sum_y v^y (v^y)^dag`` and closed with
        ``ev_c`` at the top-right corner. Zero on label-mismatched inputs.
        """
        hit = self._plaq_cache.get(kind)
        if hit is not None:
            return hit
        left_kind = BOUNDARY if kind == BOUNDARY else BULK
        spL = self.spaces[left_kind]
        spB = self.spaces[BULK]
        dims = (spL.dim, spB.dim, spL.dim, spB.dim)
        strides = (dims[1] * dims[2] * dims[3], dims[2] * dims[3], dims[3], 1)
        res = _CornerResolver(self, left_kind)
        rows, cols, vals = [], [], []
        lab = {k: {leg: s.labels(leg) for leg in s.legs} for k, s in self.spaces.items()}
        bl_b2 = lab[left_kind][TOP[left_kind]]
        bl_a2 = lab[left_kind][RIGHT[left_kind]]
        tl_b1 = lab[left_kind][BOTTOM[left_kind]]
        tl_a2 = lab[left_kind][RIGHT[left_kind]]
        for iBL in range(spL.dim):
            for iTL in np.nonzero(tl_b1 == bl_b2[iBL])[0]:
                for iBR in np.nonzero(lab[BULK]["a1"] == bl_a2[iBL])[0]:
                    for iTR in np.nonzero((lab[BULK]["a1"] == tl_a2[iTL])
                                          & (lab[BULK]["b1"] == lab[BULK]["b2"][iBR]))[0]:
                        col = iBL * strides[0] + iBR * strides[1] + iTL * strides[2] + iTR
                        out = res.apply(int(iBL), int(iBR), int(iTL), int(iTR))
                        for (jBL, jBR, jTL, jTR), amp in out.items():
                            if abs(amp) > 1e-14:
                                rows.append(jBL * strides[0] + jBR * strides[1] + jTL * strides[2] + jTR)
                                cols.append(col)
                                vals.append(amp)
        n = int(np.prod(dims))
        m = sp.coo_matrix((np.array(vals, dtype=complex), (np.array(rows, dtype=np.int64),
                                                           np.array(cols, dtype=np.int64))),
                          shape=(n, n)).tocsr()
        m.sum_duplicates()
        self._plaq_cache[kind] = m
        return m


class _CornerResolver:
    """Loop insertion resolved corner by corner through the homspace engine."""

    def __init__(self, lat: LWLattice, left_kind: str):
        self.lat = lat
        self.calc = lat.calc
        self.cat = lat.cat
        self.left_kind = left_kind
        self.spL = lat.spaces[left_kind]
        self.spB = lat.spaces[BULK]
        self.cache: dict = {}

    # morphisms of basis states
    def _bulk(self, i: int) -> Morphism:
        a1, b1, b2, a2, r = self.spB.states[i]
        v = self.calc.vertex
        return (v((b2,), (a2,), r) @ v((a1,), (b1,), r).dag) * self.spB.scale[i]

    def _bdry(self, i: int) -> Morphism:
        m1, c, m2 = self.spL.states[i]
        return self.calc.vertex((m2,), (c,), m1, head=True) * self.spL.scale[i]

    def _left(self, i: int) -> Morphism:
        return self._bdry(i) if self.left_kind == BOUNDARY else self._bulk(i)

    def _decompose(self, f: Morphism, space: LocalSpace) -> dict[int, complex]:
        out = {}
        if space.kind == BULK:
            p, q = f.dom[0][0], f.dom[1][0]
            s, t = f.cod[0][0], f.cod[1][0]
            for r, blk in f.blocks.items():
                if blk.size and abs(blk[0, 0]) > 1e-15:
                    k = space.index((p, q, s, t, r))
                    out[k] = blk[0, 0] / space.scale[k]
        else:
            m1 = f.dom[0][0]
            m2, c = f.cod[0][0], f.cod[1][0]
            blk = f.blocks.get(m1)
            if blk is not None and blk.size and abs(blk[0, 0]) > 1e-15:
                k = space.index((m1, c, m2))
                out[k] = blk[0, 0] / space.scale[k]
        return out

    def _bl(self, i: int, c: int) -> dict:
        key = ("BL", i, c)
        if key in self.cache:
            return self.cache[key]
        calc, cat = self.calc, self.cat
        cb = cat.dual[c]
        out: dict = {}
        if self.left_kind == BULK:
            a1, b1, b2, a2, _ = self.spB.states[i]
            step = calc.extend(calc.coev((c,)), left=((b2,),), right=((a2,),)) @ self._bulk(i)
            for y in cat.ring.channels(b2, c):
                for z in cat.ring.channels(cb, a2):
                    fin = calc.tensor(calc.vertex((b2,), (c,), y).dag, calc.vertex((cb,), (a2,), z).dag) @ step
                    out[(y, z)] = self._decompose(fin, self.spB)
        else:
            m1, c0, m2 = self.spL.states[i]
            idm = calc.identity(((m2,),), head=True)
            step = calc.tensor(calc.tensor(idm, calc.coev((c,))), calc.identity(((c0,),))) @ self._bdry(i)
            for y in self.lat.module.channels(m2, c):
                for z in cat.ring.channels(cb, c0):
                    fin = calc.tensor(calc.vertex((m2,), (c,), y, head=True).dag,
                                      calc.vertex((cb,), (c0,), z).dag) @ step
                    out[(y, z)] = self._decompose(fin, self.spL)
        self.cache[key] = out
        return out

    def _tl(self, i: int, c: int, y: int) -> dict:
        key = ("TL", i, c, y)
        if key in self.cache:
            return self.cache[key]
        calc, cat = self.calc, self.cat
        out: dict = {}
        if self.left_kind == BULK:
            a1, b1, b2, a2, _ = self.spB.states[i]
            pre = calc.extend(calc.vertex((b1,), (c,), y), left=((a1,),))
            mid = calc.extend(self._bulk(i), right=((c,),)) @ pre
            for w in cat.ring.channels(a2, c):
                fin = calc.extend(calc.vertex((a2,), (c,), w).dag, left=((b2,),)) @ mid
                out[w] = self._decompose(fin, self.spB)
        else:
            m1, a, m2 = self.spL.states[i]
            pre = calc.vertex((m1,), (c,), y, head=True)
            mid = calc.tensor(self._bdry(i), calc.identity(((c,),))) @ pre
            idm = calc.identity(((m2,),), head=True)
            for w in cat.ring.channels(a, c):
                fin = calc.tensor(idm, calc.vertex((a,), (c,), w).dag) @ mid
                out[w] = self._decompose(fin, self.spL)
        self.cache[key] = out
        return out

    def _br(self, i: int, c: int, z: int) -> dict:
        key = ("BR", i, c, z)
        if key in self.cache:
            return self.cache[key]
        calc, cat = self.calc, self.cat
        cb = cat.dual[c]
        a1, b1, b2, a2, _ = self.spB.states[i]
        pre = calc.extend(calc.vertex((cb,), (a1,), z), right=((b1,),))
        mid = calc.extend(self._bulk(i), left=((cb,),)) @ pre
        out = {}
        for u in cat.ring.channels(cb, b2):
            fin = calc.extend(calc.vertex((cb,), (b2,), u).dag, right=((a2,),)) @ mid
            out[u] = self._decompose(fin, self.spB)
        self.cache[key] = out
        return out

    def _tr(self, i: int, c: int, w: int, u: int) -> dict:
        key = ("TR", i, c, w, u)
        if key in self.cache:
            return self.cache[key]
        calc, cat = self.calc, self.cat
        cb = cat.dual[c]
        a1, b1, b2, a2, _ = self.spB.states[i]
        if not (cat.N[a1, c, w] and cat.N[cb, b1, u]):
            self.cache[key] = {}
            return {}
        split = calc.tensor(calc.vertex((a1,), (c,), w), calc.vertex((cb,), (b1,), u))
        close = calc.extend(calc.ev((c,)), left=((a1,),), right=((b1,),))
        fin = self._bulk(i) @ close @ split
        out = self._decompose(fin, self.spB)
        self.cache[key] = out
        return out

    def apply(self, iBL: int, iBR: int, iTL: int, iTR: int) -> dict:
        cat = self.cat
        D = self.lat.D
        out: dict = {}
        for c in range(cat.rank):
            wc = cat.dims[c] / D
            for (y, z), bl in self._bl(iBL, c).items():
                if not bl:
                    continue
                tl_all = self._tl(iTL, c, y)
                br_all = self._br(iBR, c, z)
                for w, tl in tl_all.items():
                    if not tl:
                        continue
                    for u, br in br_all.items():
                        if not br:
                            continue
                        tr = self._tr(iTR, c, w, u)
                        for (jBL, x1), (jTL, x2), (jBR, x3), (jTR, x4) in itertools.product(
                                bl.items(), tl.items(), br.items(), tr.items()):
                            key = (jBL, jBR, jTL, jTR)
                            out[key] = out.get(key, 0.0) + wc * x1 * x2 * x3 * x4
        return out


# ----------------------------------------------------------------------
# regions
# ----------------------------------------------------------------------

class LWRegion:
    """Finite set of lattice vertices with its tensor-product basis.

    Vertices are ordered row-major; a basis vector is a tuple of local state
    indices. Two bases are used: ``"full"`` (every tuple) and ``"matched"``
    (tuples whose internal edges carry matching labels, the image of the
    edge projectors).
    """

    def __init__(self, lattice: LWLattice, vertices: Iterable[Vertex], max_vertices: int = MAX_REGION_VERTICES):
        vs = sorted(set(vertices), key=lambda t: (t[1], t[0]))
        if not vs:
            raise CategoryError("empty region")
        if len(vs) > max_vertices:
            raise ResourceError(f"region of {len(vs)} vertices exceeds the guard of {max_vertices}")
        for v in vs:
            if not lattice.contains(v):
                raise CategoryError(f"vertex {v} outside the lattice")
        self.lattice = lattice
        self.order = vs
        self.pos = {v: k for k, v in enumerate(vs)}
        self.dims = np.array([lattice.space(v).dim for v in vs], dtype=np.int64)
        self.strides = np.array([int(np.prod(self.dims[k + 1:])) for k in range(len(vs))], dtype=np.int64)
        self.full_dim = int(np.prod(self.dims))
        self.edges = lattice.edges(vs)
        self.plaquettes = lattice.plaquettes(vs)
        nlegs = sum(len(lattice.space(v).legs) for v in vs)
        self.n_boundary_legs = nlegs - 2 * len(self.edges)
        self._matched: np.ndarray | None = None
        self._skein: SkeinMap | None = None

    # bases -------------------------------------------------------------
    def _label(self, k: int, leg: str) -> np.ndarray:
        return self.lattice.space(self.order[k]).labels(leg)

    def matched(self) -> np.ndarray:
        """Configurations (rows of local indices) with all internal edges matched."""
        if self._matched is not None:
            return self._matched
        conf = np.zeros((1, 0), dtype=np.int64)
        for k, v in enumerate(self.order):
            n = self.dims[k]
            new = np.repeat(conf, n, axis=0)
            loc = np.tile(np.arange(n, dtype=np.int64), conf.shape[0])
            mask = np.ones(len(loc), dtype=bool)
            for (a, la, b, lb) in self.edges:
                if b == v and a in self.pos and self.pos[a] < k:
                    mask &= self._label(self.pos[a], la)[new[:, self.pos[a]]] == self._label(k, lb)[loc]
            conf = np.concatenate([new[mask], loc[mask, None]], axis=1)
        self._matched = conf
        return conf

    def full_configs(self) -> np.ndarray:
        if self.full_dim > FULL_LIMIT:
            raise ResourceError(f"full basis of dimension {self.full_dim} exceeds {FULL_LIMIT}")
        grids = np.indices(tuple(self.dims)).reshape(len(self.order), -1).T
        return grids.astype(np.int64)

    def configs(self, basis: str) -> np.ndarray:
        if basis == "full":
            return self.full_configs()
        if basis == "matched":
            return self.matched()
        raise CategoryError(f"unknown basis {basis!r}")

    def flat(self, conf: np.ndarray) -> np.ndarray:
        return conf @ self.strides

    def _lookup(self, basis: str):
        conf = self.configs(basis)
        flat = self.flat(conf)
        order = np.argsort(flat)
        return flat[order], order

    # operators ---------------------------------------------------------
    def edge_projector(self, edge, basis: str = "full") -> SparseOperator:
        a, la, b, lb = edge
        conf = self.configs(basis)
        diag = (self._label(self.pos[a], la)[conf[:, self.pos[a]]]
                == self._label(self.pos[b], lb)[conf[:, self.pos[b]]]).astype(complex)
        return SparseOperator(sp.diags(diag).tocsr(), (a, b), basis)

    def local_operator(self, local: sp.csr_matrix, support: Sequence[Vertex], basis: str = "full") -> SparseOperator:
        """Embed an operator on ``H_support`` (mixed radix in the given order)."""
        conf = self.configs(basis)
        ks = [self.pos[v] for v in support]
        ldims = self.dims[ks]
        lstr = np.array([int(np.prod(ldims[i + 1:])) for i in range(len(ks))], dtype=np.int64)
        cidx = conf[:, ks] @ lstr
        Lt = local.T.tocsr()
        starts, ends = Lt.indptr[cidx], Lt.indptr[cidx + 1]
        counts = ends - starts
        src = np.repeat(np.arange(len(conf)), counts)
        ptr = np.concatenate([np.arange(s, e) for s, e in zip(starts, ends)]) if len(conf) else np.zeros(0, int)
        ptr = ptr.astype(np.int64)
        out_local = Lt.indices[ptr]
        vals = Lt.data[ptr]
        new = conf[src].copy()
        rem = out_local.copy()
        for i, k in enumerate(ks):
            new[:, k] = rem // lstr[i]
            rem = rem % lstr[i]
        keys, order = self._lookup(basis)
        fl = self.flat(new)
        loc = np.searchsorted(keys, fl)
        loc = np.clip(loc, 0, max(len(keys) - 1, 0))
        ok = keys[loc] == fl if len(keys) else np.zeros(len(fl), bool)
        rows = order[loc[ok]]
        m = sp.coo_matrix((vals[ok], (rows, src[ok])), shape=(len(conf), len(conf))).tocsr()
        m.sum_duplicates()
        return SparseOperator(m, tuple(support), basis)

    def plaquette_operator(self, p: tuple[Vertex, Vertex, Vertex, Vertex], basis: str = "full") -> SparseOperator:
        if not all(v in self.pos for v in p):
            raise CategoryError("plaquette not inside the region")
        local = self.lattice.plaquette_local(self.lattice.kind(p[0]))
        return self.local_operator(local, p, basis)

    def region_projector(self, basis: str = "full") -> SparseOperator:
        n = len(self.configs(basis))
        P = sp.identity(n, dtype=complex, format="csr")
        for e in self.edges:
            P = P @ self.edge_projector(e, basis).matrix
        for p in self.plaquettes:
            P = P @ self.plaquette_operator(p, basis).matrix
        return SparseOperator(P.tocsr(), tuple(self.order), basis)

    # skein identification ---------------------------------------------
    def skein(self) -> "SkeinMap":
        if self._skein is None:
            self._skein = SkeinMap(self)
        return self._skein


def _is_rectangle(vs: Sequence[Vertex]) -> tuple[int, int, int, int]:
    xs = [v[0] for v in vs]
    ys = [v[1] for v in vs]
    x0, x1, y0, y1 = min(xs), max(xs) + 1, min(ys), max(ys) + 1
    if len(set(vs)) != (x1 - x0) * (y1 - y0):
        raise CategoryError("region is not a rectangle")
    return x0, y0, x1, y1


class SkeinMap:
    """Scaled evaluation ``E = D^{-#p/2} eval`` from matched states to skein space.

    The skein space is ``Hom(X^dom -> X^cod)`` (module version with a head),
    where ``dom`` lists the left legs (top to bottom) then the bottom legs
    (left to right) and ``cod`` the top legs (left to right) then the right
    legs (top to bottom). Coordinates are taken in the orthonormal basis
    for the skein inner product, so ``E E^dag = 1`` and ``E^dag E = p^B``.
    """

    def __init__(self, region: LWRegion):
        lat = region.lattice
        self.region = region
        x0, y0, x1, y1 = _is_rectangle(region.order)
        self.box = (x0, y0, x1, y1)
        self.head = lat.kind((x0, y0)) == BOUNDARY
        dom_ids, cod_ids = [], []
        if not self.head:
            dom_ids += [((x0, j), "a1") for j in range(y1 - 1, y0 - 1, -1)]
        dom_ids += [((i, y0), BOTTOM[lat.kind((i, y0))]) for i in range(x0, x1)]
        cod_ids += [((i, y1 - 1), TOP[lat.kind((i, y1 - 1))]) for i in range(x0, x1)]
        cod_ids += [((x1 - 1, j), RIGHT[lat.kind((x1 - 1, j))]) for j in range(y1 - 1, y0 - 1, -1)]
        self.dom_ids, self.cod_ids = dom_ids, cod_ids
        X = tuple(range(lat.cat.rank))
        W = tuple(range(lat.module.rank)) if self.head else None
        self.domX = tuple((W if (self.head and k == 0) else X) for k in range(len(dom_ids)))
        self.codX = tuple((W if (self.head and k == 0) else X) for k in range(len(cod_ids)))
        self.n_top = x1 - x0
        self._program = self._build_program()
        self._layout()
        self.E = self._build()

    def _build_program(self):
        lat = self.region.lattice
        x0, y0, x1, y1 = self.box
        front = list(self.dom_ids)
        prog = []
        for j in range(y0, y1):
            for i in range(x0, x1):
                v = (i, j)
                kind = lat.kind(v)
                bottom = ((i, y0), BOTTOM[kind]) if j == y0 else ((i, j - 1), TOP[lat.kind((i, j - 1))])
                if kind == BOUNDARY:
                    s = front.index(bottom)
                    if s != 0:
                        raise CategoryError("boundary vertex away from the head slot")
                    front[0:1] = [(v, "m2"), (v, "c")]
                else:
                    left = ((x0, j), "a1") if i == x0 else ((i - 1, j), RIGHT[lat.kind((i - 1, j))])
                    s = front.index(left)
                    if front[s + 1] != bottom:
                        raise CategoryError("staircase order broken")
                    front[s:s + 2] = [(v, "b2"), (v, "a2")]
                prog.append((self.region.pos[v], kind, s))
        if front != self.cod_ids:
            raise CategoryError("staircase did not reach the codomain")
        return prog

    def _layout(self):
        calc = self.region.lattice.calc
        cd = calc.counts(self.domX, self.head)
        cc = calc.counts(self.codX, self.head)
        self.roots = sorted(r for r in cd if r in cc)
        self.offsets = {}
        off = 0
        for r in self.roots:
            self.offsets[r] = off
            off += cd[r] * cc[r]
        self.dim = off
        self.ndom = cd
        self.idx_dom = calc.tree_index(self.domX, self.head)
        self.idx_cod = calc.tree_index(self.codX, self.head)

    def _leg_dim(self, lab: int, slot: int) -> float:
        lat = self.region.lattice
        if self.head and slot == 0:
            return lat.module.trace_dims[lab]
        return lat.cat.dims[lab]

    def _fmove(self, a: int, b: int, c: int, d: int, head: bool):
        lat = self.region.lattice
        if head:
            return lat.module.lmatrix(a, b, c, d)
        return lat.cat.fmatrix(a, b, c, d)

    def _evaluate(self, conf: np.ndarray) -> dict:
        """Tree coefficients ``{(dom_leaves, dom_labels, cod_leaves, cod_labels): c}``."""
        lat = self.region.lattice
        region = self.region
        spaces = [lat.space(v) for v in region.order]
        dom_leaves = []
        for (v, leg) in self.dom_ids:
            k = region.pos[v]
            st = spaces[k].states[conf[k]]
            dom_leaves.append(st[spaces[k].legs.index(leg)])
        dom_leaves = tuple(dom_leaves)
        single = tuple((x,) for x in dom_leaves)
        head = self.head
        terms = {}
        for r, ts in lat.calc.trees(single, head).items():
            for _, labs in ts:
                terms[(labs, labs)] = 1.0 + 0j
        leaves = list(dom_leaves)
        for k, kind, s in self._program:
            sp_ = spaces[k]
            st = sp_.states[conf[k]]
            kap = sp_.scale[conf[k]]
            new = {}
            if kind == BOUNDARY:
                m1, c, m2 = st
                for (dl, fl), val in terms.items():
                    new[(dl, (m2, m1) + fl[1:])] = val * kap
                leaves[0:1] = [m2, c]
            else:
                a1, b1, b2, a2, r = st
                if s == 0 and not head:
                    for (dl, fl), val in terms.items():
                        if fl[1] == r:
                            key = (dl, (b2, r) + fl[2:])
                            new[key] = new.get(key, 0) + val * kap
                else:
                    for (dl, fl), val in terms.items():
                        ep, ei, en = fl[s - 1], fl[s], fl[s + 1]
                        es, fs, M = self._fmove(ep, a1, b1, en, head)
                        if ei not in es or r not in fs:
                            continue
                        f1 = M[es.index(ei), fs.index(r)]
                        if f1 == 0:
                            continue
                        es2, fs2, M2 = self._fmove(ep, b2, a2, en, head)
                        if r not in fs2:
                            continue
                        col = fs2.index(r)
                        for row, e2 in enumerate(es2):
                            f2 = np.conj(M2[row, col])
                            if f2 == 0:
                                continue
                            key = (dl, fl[:s] + (e2,) + fl[s + 1:])
                            new[key] = new.get(key, 0) + val * kap * f1 * f2
                leaves[s:s + 2] = [b2, a2]
            terms = new
        cod_leaves = tuple(leaves)
        return {(dom_leaves, dl, cod_leaves, fl): v for (dl, fl), v in terms.items()}

    def _build(self) -> sp.csr_matrix:
        region = self.region
        lat = region.lattice
        conf = region.matched()
        pref = lat.D ** (-len(region.plaquettes) / 2.0)
        rdims = lat.calc.root_dims(self.head)
        rows, cols, vals = [], [], []
        for col, c in enumerate(conf):
            for (dleaves, dl, cleaves, cl), v in self._evaluate(c).items():
                if abs(v) < 1e-15:
                    continue
                r = dl[-1]
                i_dom = self.idx_dom[r][(dleaves, dl)]
                i_cod = self.idx_cod[r][(cleaves, cl)]
                legs = 1.0
                for s, x in enumerate(dleaves):
                    legs *= self._leg_dim(x, s)
                for s, x in enumerate(cleaves):
                    legs *= self._leg_dim(x, s)
                rows.append(self.offsets[r] + i_cod * self.ndom[r] + i_dom)
                cols.append(col)
                vals.append(v * np.sqrt(rdims[r]) * legs ** -0.25 * pref)
        m = sp.coo_matrix((np.array(vals, dtype=complex), (np.array(rows, dtype=np.int64),
                                                           np.array(cols, dtype=np.int64))),
                          shape=(self.dim, len(conf))).tocsr()
        m.sum_duplicates()
        return m

    def oracle_dim(self) -> int:
        """``dim Hom(X^dom -> X^cod)`` from the homspace engine."""
        return self.region.lattice.calc.hom_dim(self.domX, self.codX, self.head)

    def lemma_residual(self, basis_projector: sp.csr_matrix | None = None) -> dict[str, float]:
        """Residuals of ``E E^dag = 1`` and ``E^dag E = prod B_p`` on matched states."""
        E = self.E
        co = _spnorm(E @ E.conj().T - sp.identity(self.dim, format="csr"))
        if basis_projector is None:
            P = sp.identity(E.shape[1], dtype=complex, format="csr")
            for p in self.region.plaquettes:
                P = P @ self.region.plaquette_operator(p, "matched").matrix
        else:
            P = basis_projector
        lem = _spnorm(E.conj().T @ E - P)
        return {"coisometry": co, "lemma": lem}

    def gluing_skein(self, phi: Morphism) -> np.ndarray:
        """Gluing ``phi`` on the top legs, in skein coordinates.

        Conjugating the plain-trace action ``f -> (phi (x) id) f`` by the unitary
        that rescales every label sector by ``prod d^{-1/4}`` gives the skein
        action; in the orthonormal skein coordinates it is the block matrix
        ``Phi_r (x) 1`` of the extended morphism, and it carries the
        ``(prod d_b / d_a)^{1/4}`` factors on the glued legs implicitly.
        """
        calc = self.region.lattice.calc
        top = self.codX[:self.n_top]
        if phi.dom != top or phi.cod != top or phi.head != self.head:
            raise CategoryError("phi does not live on the top legs of the region")
        Phi = calc.extend(phi, right=self.codX[self.n_top:])
        blocks = []
        for r in self.roots:
            blocks.append(np.kron(Phi.blocks[r], np.eye(self.ndom[r])))
        return sp.block_diag(blocks, format="csr").toarray() if blocks else np.zeros((0, 0))


def gluing_operator(region: LWRegion, phi: Morphism, basis: str = "full") -> np.ndarray:
    """``Gamma_phi`` on ``H_region``: ``E^dag Gamma^sk_phi E`` (zero off ``im p_region``)."""
    sk = region.skein()
    G = sk.gluing_skein(phi)
    E = sk.E.toarray()
    on_matched = E.conj().T @ G @ E
    if basis == "matched":
        return on_matched
    keys, order = region._lookup("full")
    idx = region.flat(region.matched())
    out = np.zeros((region.full_dim, region.full_dim), dtype=complex)
    out[np.ix_(idx, idx)] = on_matched
    return out


# ----------------------------------------------------------------------
# geometry predicates
# ----------------------------------------------------------------------

def surrounds(lam: Sequence[Vertex], delta: Sequence[Vertex], s: int = 1, open_side: str | None = None,
              boundary: bool = False) -> bool:
    """``Lambda << Delta`` (``open_side=None``) or ``Lambda ⋐ Delta`` with the cut on ``open_side``.

    Rectangles in vertex units. ``Delta`` must contain ``Lambda`` grown by
    ``s`` on every side except the open one (where the two boxes are flush)
    and, with ``boundary``, the left side, where both touch column 0.
    """
    lx0, ly0, lx1, ly1 = _is_rectangle(list(lam))
    dx0, dy0, dx1, dy1 = _is_rectangle(list(delta))
    need = {"left": dx0 <= lx0 - s, "right": dx1 >= lx1 + s, "bottom": dy0 <= ly0 - s, "top": dy1 >= ly1 + s}
    flush = {"left": dx0 == lx0, "right": dx1 == lx1, "bottom": dy0 == ly0, "top": dy1 == ly1}
    if boundary:
        if lx0 != 0 or dx0 != 0:
            return False
        need["left"] = True
    if open_side is not None:
        if not flush[open_side]:
            return False
        need[open_side] = True
    return all(need.values())


# ----------------------------------------------------------------------
# boundary algebra extraction
# ----------------------------------------------------------------------

def _flatten(mats: Sequence[sp.spmatrix]) -> sp.csr_matrix:
    """Rows = flattened operators."""
    if not mats:
        return sp.csr_matrix((0, 0))
    n = mats[0].shape[0] * mats[0].shape[1]
    cols, data, ridx = [], [], []
    for i, m in enumerate(mats):
        c = sp.coo_matrix(m)
        cols.append(c.row.astype(np.int64) * m.shape[1] + c.col)
        data.append(c.data)
        ridx.append(np.full(len(c.data), i))
    return sp.csr_matrix((np.concatenate(data), (np.concatenate(ridx), np.concatenate(cols))),
                         shape=(len(mats), n))


def _gram_rank(G: np.ndarray, tol: float = NULL_CUTOFF) -> int:
    if G.size == 0:
        return 0
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    top = max(w.max(), 1e-300)
    return int(np.sum(w > tol * top))


def _span_residual(Ma: sp.csr_matrix, Mb: sp.csr_matrix) -> float:
    """Largest relative distance of a row of ``Mb`` from the row span of ``Ma``.

    Coefficients come from the Gram system; the residual vector itself is
    formed explicitly so that the result is not a square root of roundoff.
    """
    if Mb.shape[0] == 0:
        return 0.0
    if Ma.shape[0] == 0:
        return 1.0
    Gaa = (Ma.conj() @ Ma.T).toarray()
    Gab = (Ma.conj() @ Mb.T).toarray()
    w, V = np.linalg.eigh((Gaa + Gaa.conj().T) / 2)
    keep = w > NULL_CUTOFF * max(w.max(), 1e-300)
    C = (V[:, keep] / w[keep]) @ V[:, keep].conj().T @ Gab
    R = Mb - sp.csr_matrix(C.T) @ Ma
    rn = np.sqrt(np.asarray(abs(R).power(2).sum(axis=1)).ravel())
    bn = np.sqrt(np.asarray(abs(Mb).power(2).sum(axis=1)).ravel())
    return float(np.max(rn / np.maximum(bn, 1e-300)))


@dataclass
class BoundaryExtraction:
    """Result of extracting ``B(Lambda ⋐ Delta)`` from projector conditions."""

    dim_lower: int
    dim_upper: int
    dim_gamma: int
    oracle_dim: int
    gamma_residual: float
    containment_residual: float
    algebra: BlockAlgebra
    samples: int
    items: list = field(default_factory=list)


class _Compressor:
    """``x -> E_Delta (x (x) 1) E_Delta^dag`` for operators ``x`` on ``H_Lambda``."""

    def __init__(self, lam: LWRegion, delta: LWRegion):
        self.lam, self.delta = lam, delta
        conf = delta.matched()
        kl = [delta.pos[v] for v in lam.order]
        kr = [k for k in range(len(delta.order)) if delta.order[k] not in lam.pos]
        lam_flat = conf[:, kl] @ lam.strides
        rest = conf[:, kr]
        _, group = np.unique(rest, axis=0, return_inverse=True)
        group = np.asarray(group).ravel()
        order = np.argsort(group, kind="stable")
        bounds = np.searchsorted(group[order], np.arange(group.max() + 2))
        R, C, LR, LC = [], [], [], []
        for g in range(group.max() + 1):
            members = order[bounds[g]:bounds[g + 1]]
            a, b = np.meshgrid(members, members, indexing="ij")
            R.append(a.ravel())
            C.append(b.ravel())
            LR.append(lam_flat[a.ravel()])
            LC.append(lam_flat[b.ravel()])
        self.R, self.C = np.concatenate(R), np.concatenate(C)
        self.LR, self.LC = np.concatenate(LR), np.concatenate(LC)
        self.n = len(conf)
        self.E = delta.skein().E
        self.Eh = self.E.conj().T.tocsr()

    def __call__(self, x: np.ndarray) -> sp.csr_matrix:
        vals = x[self.LR, self.LC]
        keep = vals != 0
        X = sp.csr_matrix((vals[keep], (self.R[keep], self.C[keep])), shape=(self.n, self.n))
        return (self.E @ X @ self.Eh).tocsr()


def _slices(local: sp.csr_matrix, dims: Sequence[int], inside: Sequence[bool]) -> list[np.ndarray]:
    """Operators ``<o'| L |o>`` on the ``inside`` factors for all outside index pairs."""
    dims = list(dims)
    ins = [k for k, f in enumerate(inside) if f]
    outs = [k for k, f in enumerate(inside) if not f]
    din = int(np.prod([dims[k] for k in ins]))
    c = sp.coo_matrix(local)

    def split(idx):
        digits = np.zeros((len(idx), len(dims)), dtype=np.int64)
        rem = idx.astype(np.int64)
        for k in range(len(dims) - 1, -1, -1):
            digits[:, k] = rem % dims[k]
            rem = rem // dims[k]
        a = np.zeros(len(idx), dtype=np.int64)
        for k in ins:
            a = a * dims[k] + digits[:, k]
        b = np.zeros(len(idx), dtype=np.int64)
        for k in outs:
            b = b * dims[k] + digits[:, k]
        return a, b

    ri, ro = split(c.row)
    ci, co = split(c.col)
    groups: dict = {}
    for a, b, x, y, v in zip(ri, ci, ro, co, c.data):
        groups.setdefault((int(x), int(y)), []).append((a, b, v))
    out = []
    for lst in groups.values():
        m = np.zeros((din, din), dtype=complex)
        for a, b, v in lst:
            m[a, b] += v
        out.append(m)
    return out


def _reduce_span(mats: Sequence[np.ndarray], tol: float = 1e-12) -> list[np.ndarray]:
    if not mats:
        return []
    n = mats[0].shape[0]
    A = np.array([m.ravel() for m in mats])
    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > tol * max(s.max(), 1e-300)
    return [v.reshape(n, n) for v in Vh[keep]]


def _embed(lam: LWRegion, op: np.ndarray, support: Sequence[Vertex]) -> np.ndarray:
    """``op`` on the listed Lambda vertices tensored with identities, on ``H_Lambda``."""
    ks = [lam.pos[v] for v in support]
    others = [k for k in range(len(lam.order)) if k not in ks]
    dims = list(lam.dims)
    perm = ks + others
    do = int(np.prod([dims[k] for k in others])) if others else 1
    big = np.kron(op, np.eye(do))
    shape = [dims[k] for k in perm]
    n = len(perm)
    T = big.reshape(shape + shape)
    inv = np.argsort(perm)
    T = T.transpose(list(inv) + [n + i for i in inv])
    return T.reshape(lam.full_dim, lam.full_dim)


def _local_terms_touching(lattice: LWLattice, lam: LWRegion, delta: LWRegion) -> list[np.ndarray]:
    """Slices on ``H_Lambda`` of the edge and plaquette terms of Delta that straddle Lambda."""
    gens: list[np.ndarray] = []
    for (a, la, b, lb) in delta.edges:
        ina, inb = a in lam.pos, b in lam.pos
        if ina == inb:
            continue
        v, leg = (a, la) if ina else (b, lb)
        labs = lattice.space(v).labels(leg)
        for c in np.unique(labs):
            gens.append(_embed(lam, np.diag((labs == c).astype(complex)), [v]))
    for p in delta.plaquettes:
        inside = [v in lam.pos for v in p]
        if all(inside) or not any(inside):
            continue
        local = lattice.plaquette_local(lattice.kind(p[0]))
        dims = [lattice.space(v).dim for v in p]
        sl = _reduce_span(_slices(local, dims, inside))
        sup = [v for v, f in zip(p, inside) if f]
        gens.extend(_embed(lam, m, sup) for m in sl)
    return gens


def extract_boundary_algebra(lattice: LWLattice, lam_vertices: Sequence[Vertex], delta_vertices: Sequence[Vertex],
                             rng: np.random.Generator | None = None, tol: float = 1e-9,
                             check_geometry: bool = True) -> BoundaryExtraction:
    """Extract ``B(Lambda ⋐ Delta)`` for a cut along the top side of Lambda.

    Two bounds pin the algebra without a choice of gluing data:

    * lower: ``X_loc p_Delta`` with ``X_loc`` the elements of
      ``p_Lambda A(Lambda) p_Lambda`` commuting with every edge and plaquette
      term of Delta that touches Lambda (such ``x`` commute with every
      admissible ``p_Delta'``);
    * upper: ``p_Delta A(Lambda) p_Delta``, whose dimension is found from
      seeded random elements (the sample is doubled until it exceeds the
      rank).

    Both are computed in skein coordinates of Delta. When they agree the
    algebra equals both, and it is compared with ``span{Gamma_phi p_Delta}``.
    """
    rng = rng or np.random.default_rng(0xC0FFEE)
    bdry = lattice.module is not None and min(v[0] for v in lam_vertices) == 0
    if check_geometry and not surrounds(lam_vertices, delta_vertices, 1, "top", boundary=bdry):
        raise CategoryError("geometry violates Lambda ⋐ Delta with s = 1 and a top cut")
    lam = lattice.region(lam_vertices)
    delta = lattice.region(delta_vertices)
    comp = _Compressor(lam, delta)
    Pl = gluing_operator(lam, lattice.calc.identity(lam.skein().codX[:lam.skein().n_top], lam.skein().head))
    n = lam.full_dim

    # lower bound
    gens = _local_terms_touching(lattice, lam, delta) + [Pl]
    basis = block_commutant(gens, n, rng)
    lower = []
    for row in basis:
        x = Pl @ row.reshape(n, n) @ Pl
        if np.abs(x).max() > 1e-12:
            lower.append(comp(x))

    # upper bound by random sampling
    k = 16
    while True:
        upper = []
        for _ in range(k):
            G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            upper.append(comp(Pl @ G @ Pl))
        Mu = _flatten(upper)
        ru = _gram_rank((Mu @ Mu.conj().T).toarray())
        if ru < k or k >= n * n:
            break
        k *= 2

    # gluing operators
    sk = lam.skein()
    top = sk.codX[:sk.n_top]
    phis = lattice.calc.basis(top, top, sk.head)
    gam = [comp(gluing_operator(lam, phi)) for phi in phis]

    Ml, Mu, Mg = _flatten(lower), _flatten(upper), _flatten(gam)
    rank = lambda M: _gram_rank((M @ M.conj().T).toarray())
    rl, ru, rg = rank(Ml), rank(Mu), rank(Mg)
    contain = max(_span_residual(Mu, Ml), _span_residual(Mu, Mg))
    gres = max(_span_residual(Ml, Mg), _span_residual(Mg, Ml)) if rl and rg else 1.0
    oracle = lattice.calc.hom_dim(top, top, sk.head)
    alg = BlockAlgebra(lattice.calc, top, sk.head, name="boundary")
    items = [
        int_item("lower_equals_upper", ru, rl),
        int_item("gamma_span_dim", oracle, rg),
        int_item("extracted_dim", oracle, rl),
        item("gamma_span_equals_extracted", gres, tol),
        item("bounds_nested", contain, tol),
    ]
    return BoundaryExtraction(rl, ru, rg, oracle, gres, contain, alg, k, items)


def gamma_homomorphism_residuals(region: LWRegion, rng: np.random.Generator) -> dict[str, float]:
    """``Gamma_{phi psi} = Gamma_phi Gamma_psi``, ``Gamma_{phi^dag} = Gamma_phi^dag``, ``Gamma_1 = p``."""
    calc = region.lattice.calc
    sk = region.skein()
    top = sk.codX[:sk.n_top]
    phi = calc.random(top, top, rng, sk.head)
    psi = calc.random(top, top, rng, sk.head)
    g = lambda f: gluing_operator(region, f)
    p = region.region_projector("full").toarray()
    return {
        "multiplicative": float(np.abs(g(phi @ psi) - g(phi) @ g(psi)).max()),
        "star": float(np.abs(g(phi.dag) - g(phi).conj().T).max()),
        "unital": float(np.abs(g(calc.identity(top, sk.head)) - p).max()),
    }


# ----------------------------------------------------------------------
# LTO checks for the categorical model
# ----------------------------------------------------------------------

def lto1_check(lattice: LWLattice, lam_vertices: Sequence[Vertex], delta_vertices: Sequence[Vertex],
               rng: np.random.Generator | None = None, tol: float = 1e-9, boundary: bool = False) -> list[dict]:
    """``p_Delta a p_Delta = psi(a) p_Delta`` over a spanning set of ``A(Lambda)``.

    Matrix units for at most two vertices, otherwise ``4 dim`` seeded random
    elements. ``psi(a) = tr(p a p) / tr(p)``.
    """
    rng = rng or np.random.default_rng(0xC0FFEE)
    ok_geom = surrounds(lam_vertices, delta_vertices, 1, None, boundary=boundary)
    lam = lattice.region(lam_vertices)
    delta = lattice.region(delta_vertices)
    comp = _Compressor(lam, delta)
    n = lam.full_dim
    if len(lam.order) <= 2:
        spanning = []
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                spanning.append(e)
        mode = "matrix_units"
    else:
        spanning = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(4 * n)]
        mode = "random"
    S = delta.skein().dim
    worst = 0.0
    for a in spanning:
        Y = comp(a)
        psi = Y.diagonal().sum() / S
        worst = max(worst, _spnorm(Y - psi * sp.identity(S, format="csr")))
    name = "dLTO1" if boundary else "LTO1"
    return [
        int_item(f"{name}_geometry", True, ok_geom),
        item(name, worst, tol, expected=0.0, actual={"spanning_set": len(spanning), "mode": mode}),
    ]


def lto_suite(lattice: LWLattice, lam_vertices: Sequence[Vertex], delta_vertices: Sequence[Vertex],
              axioms: Sequence[str] = ("LTO1", "LTO2"), rng: np.random.Generator | None = None,
              tol: float = 1e-9) -> list[dict]:
    """Categorical LTO checks (``LTO1``/``dLTO1`` and ``LTO2``/``dLTO2``)."""
    rng = rng or np.random.default_rng(0xC0FFEE)
    bdry = lattice.module is not None and min(v[0] for v in lam_vertices) == 0
    out = []
    for ax in axioms:
        base = ax.lstrip("d")
        if base == "LTO1":
            out += lto1_check(lattice, lam_vertices, delta_vertices, rng, tol, boundary=bdry)
        elif base == "LTO2":
            ex = extract_boundary_algebra(lattice, lam_vertices, delta_vertices, rng, tol)
            prefix = "dLTO2" if bdry else "LTO2"
            out.append(int_item(f"{prefix}_subspace_equality", ex.dim_upper, ex.dim_lower))
            out += [dict(it, name=f"{prefix}_{it['name']}") for it in ex.items]
        else:
            raise CategoryError(f"axiom {ax} is only available in the Pauli backend")
    return out


# ----------------------------------------------------------------------
# Pauli backend
# ----------------------------------------------------------------------

def _gf2_rref(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    A = (np.asarray(A, dtype=np.uint8) & 1).copy()
    rows, cols = A.shape
    piv = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + nz[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        hit = np.nonzero(A[:, c])[0]
        hit = hit[hit != r]
        A[hit] ^= A[r]
        piv.append(c)
        r += 1
    return A[:r], piv


def gf2_rank(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    return len(_gf2_rref(A)[1])


def gf2_nullspace(A: np.ndarray, n: int) -> np.ndarray:
    """Basis (rows) of ``{x in GF(2)^n : A x = 0}``."""
    if A.size == 0:
        return np.eye(n, dtype=np.uint8)
    R, piv = _gf2_rref(A)
    free = [c for c in range(n) if c not in piv]
    out = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        out[i, f] = 1
        for row, pc in enumerate(piv):
            out[i, pc] = R[row, f]
    return out


def _stack(*blocks: np.ndarray, n: int) -> np.ndarray:
    bs = [b for b in blocks if b is not None and len(b)]
    return np.concatenate(bs, axis=0) if bs else np.zeros((0, n), dtype=np.uint8)


@dataclass
class PauliModel:
    """Toric code with qubits on edges of a ``width x height`` vertex grid.

    Boundary options for the left side: ``None`` (all edges present, the left
    column is only a truncation), ``"smooth"`` (boundary stars with three
    edges) or ``"rough"`` (no vertical edges and no stars in column 0; the
    adjacent plaquettes have three edges). ``A_s`` is the product of ``X``
    and ``B_p`` the product of ``Z`` around a plaquette.
    """

    width: int
    height: int
    boundary: str | None = None
    edges: list = field(init=False)
    index: dict = field(init=False)

    def __post_init__(self):
        if self.boundary not in (None, "smooth", "rough"):
            raise CategoryError(f"unsupported boundary type {self.boundary!r}")
        es = []
        for j in range(self.height):
            for i in range(self.width):
                if i + 1 < self.width:
                    es.append(((i, j), (i + 1, j)))
                if j + 1 < self.height and not (self.boundary == "rough" and i == 0):
                    es.append(((i, j), (i, j + 1)))
        self.edges = es
        self.index = {e: k for k, e in enumerate(es)}

    @property
    def n(self) -> int:
        return len(self.edges)

    def incident(self, v: Vertex) -> list[int]:
        return [k for k, (a, b) in enumerate(self.edges) if v in (a, b)]

    def is_truncation(self, v: Vertex) -> bool:
        i, j = v
        left = i == 0 and self.boundary is None
        return left or i == self.width - 1 or j == 0 or j == self.height - 1

    def star_vertices(self) -> list[Vertex]:
        out = []
        for j in range(self.height):
            for i in range(self.width):
                if self.boundary == "rough" and i == 0:
                    continue
                if not self.is_truncation((i, j)):
                    out.append((i, j))
        return out

    def plaquette_edges(self, p: Vertex) -> list[int]:
        i, j = p
        cand = [((i, j), (i + 1, j)), ((i, j + 1), (i + 1, j + 1)),
                ((i, j), (i, j + 1)), ((i + 1, j), (i + 1, j + 1))]
        return [self.index[e] for e in cand if e in self.index]

    def plaquettes(self) -> list[Vertex]:
        return [(i, j) for j in range(self.height - 1) for i in range(self.width - 1)]

    def _vec(self, xs: Iterable[int] = (), zs: Iterable[int] = ()) -> np.ndarray:
        v = np.zeros(2 * self.n, dtype=np.uint8)
        for k in xs:
            v[k] ^= 1
        for k in zs:
            v[self.n + k] ^= 1
        return v

    def star(self, v: Vertex) -> np.ndarray:
        return self._vec(xs=self.incident(v))

    def plaquette(self, p: Vertex) -> np.ndarray:
        return self._vec(zs=self.plaquette_edges(p))

    # regions --------------------------------------------------------------
    def vertex_region(self, vertices: Iterable[Vertex]) -> frozenset[int]:
        vs = set(vertices)
        return frozenset(k for k, (a, b) in enumerate(self.edges) if a in vs or b in vs)

    def plaquette_region(self, x0: int, y0: int, x1: int, y1: int) -> frozenset[int]:
        out = set()
        for j in range(y0, y1):
            for i in range(x0, x1):
                out.update(self.plaquette_edges((i, j)))
        return frozenset(out)

    def stabilizers(self, region: frozenset[int], drop: Iterable[Vertex] = ()) -> np.ndarray:
        """Stars and plaquettes whose edges all lie in ``region``."""
        gens = []
        drop = set(drop)
        for v in self.star_vertices():
            if v in drop:
                continue
            inc = self.incident(v)
            if inc and set(inc) <= region:
                gens.append(self.star(v))
        for p in self.plaquettes():
            pe = self.plaquette_edges(p)
            if len(pe) >= 3 and set(pe) <= region:
                gens.append(self.plaquette(p))
        return _stack(*[g[None, :] for g in gens], n=2 * self.n)

    def commutes(self, P: np.ndarray, S: np.ndarray) -> np.ndarray:
        """Symplectic products of the rows of P with the rows of S."""
        n = self.n
        return ((P[:, :n].astype(np.int64) @ S[:, n:].T + P[:, n:].astype(np.int64) @ S[:, :n].T) & 1).astype(np.uint8)

    def restrict(self, region: frozenset[int]) -> list[int]:
        r = sorted(region)
        return r + [self.n + k for k in r]

    def centralizer_in(self, region: frozenset[int], S: np.ndarray) -> np.ndarray:
        """Basis of Paulis supported on ``region`` commuting with every row of ``S``."""
        cols = self.restrict(region)
        if len(S) == 0:
            sub = np.eye(len(cols), dtype=np.uint8)
        else:
            n = self.n
            # constraint rows: (z_s | x_s) restricted to region coordinates
            sw = np.concatenate([S[:, n:], S[:, :n]], axis=1)[:, cols]
            sub = gf2_nullspace(sw, len(cols))
        out = np.zeros((len(sub), 2 * self.n), dtype=np.uint8)
        out[:, cols] = sub
        return out

    def group_in(self, region: frozenset[int], S: np.ndarray) -> np.ndarray:
        """Basis of the stabilizer group elements supported on ``region``."""
        if len(S) == 0:
            return np.zeros((0, 2 * self.n), dtype=np.uint8)
        outside = [c for c in range(2 * self.n) if c not in set(self.restrict(region))]
        combos = gf2_nullspace(S[:, outside].T, len(S)) if outside else np.eye(len(S), dtype=np.uint8)
        return ((combos.astype(np.int64) @ S) & 1).astype(np.uint8)

    def in_span(self, P: np.ndarray, S: np.ndarray) -> bool:
        if len(S) == 0:
            return not P.any()
        return gf2_rank(np.vstack([S, P[None, :]])) == gf2_rank(S)

    def psi(self, P: np.ndarray, S: np.ndarray) -> float:
        """``tr(p P p) / tr(p)`` for the Hermitian Pauli with bits ``P``."""
        if not P.any():
            return 1.0
        if self.commutes(P[None, :], S).any() or not self.in_span(P, S):
            return 0.0
        n = self.n
        overlap = int(np.sum(P[:n] & P[n:]))
        # canonical form i^{x.z} X^x Z^z against the generator product X^x Z^z
        return float((-1) ** (overlap // 2))


def pauli_backend(spec: dict) -> PauliModel:
    """Build a toric-code ``PauliModel`` from ``{"w", "h", "boundary"}``."""
    return PauliModel(int(spec["w"]), int(spec["h"]), spec.get("boundary"))


def _pack(rows: np.ndarray) -> np.ndarray:
    w = (np.uint64(1) << np.arange(rows.shape[1], dtype=np.uint64))
    return (rows.astype(np.uint64) * w).sum(axis=1).astype(np.uint64)


def _pauli_lto1(model: PauliModel, lam: frozenset[int], delta: frozenset[int], drop=(),
                name: str = "LTO1", exhaustive_max: int = 12) -> list[dict]:
    """``p P p = psi(P) p`` for every Pauli ``P`` on Lambda.

    Equivalent to: every Pauli on Lambda commuting with the stabilizers of
    Delta lies in their group. Decided by GF(2) subspace dimensions. For
    ``|Lambda| <= exhaustive_max`` edges all ``4^|Lambda|`` Paulis are also
    enumerated (bit-packed) and the commuting ones counted against the
    group size, an independent route to the same verdict.
    """
    S = model.stabilizers(delta, drop)
    A = model.centralizer_in(lam, S)
    K = model.group_in(lam, S)
    rk = gf2_rank(K)
    viol = gf2_rank(_stack(A, K, n=2 * model.n)) - rk
    res = 1.0 if viol else 0.0
    nl = len(lam)
    checked = None
    if nl <= exhaustive_max:
        cols = model.restrict(lam)
        n = model.n
        # symplectic partner of each stabilizer, restricted to Lambda coordinates
        sw = np.concatenate([S[:, n:], S[:, :n]], axis=1)[:, cols] if len(S) else np.zeros((0, 2 * nl), np.uint8)
        masks = _pack(sw) if len(sw) else np.zeros(0, np.uint64)
        masks = masks[masks != 0]
        count = 0
        chunk = 1 << 20
        for start in range(0, 4 ** nl, chunk):
            P = np.arange(start, min(start + chunk, 4 ** nl), dtype=np.uint64)
            ok = np.ones(len(P), dtype=bool)
            for m in masks:
                ok &= (np.bitwise_count(P & m) & 1) == 0
            count += int(ok.sum())
        checked = 4 ** nl
        if float(count != 2 ** rk) != res:
            raise AssertionError("exhaustive and subspace LTO1 verdicts disagree")
    return [item(name, res, 1e-12, expected=0.0,
                 actual={"spanning_set": 4 ** nl, "exhaustive": checked, "violating_dims": int(viol)})]


def pauli_expected_boundary_dim(boundary: str | None, k: int) -> int:
    """``dim B`` for a cut through ``k`` bulk edges, from the Vec(Z/2) hom-space oracle.

    Bulk: ``End(X^k)``; rough boundary: ``End_M(W <| X^k)`` for ``M = Vec``;
    smooth boundary: the same for the regular module.
    """
    from .category_core import builtin_catalog

    cat, _ = builtin_catalog("vec_z2")
    X = (0, 1)
    if boundary is None:
        return Calculus(cat).hom_dim((X,) * k, (X,) * k)
    mod = builtin_catalog("module:vec_over_z2" if boundary == "rough" else "module:regular:vec_z2")
    W = tuple(range(mod.rank))
    word = (W,) + (X,) * k
    return Calculus(cat, module=mod).hom_dim(word, word, head=True)


def pauli_standard_cases(model: PauliModel, drop_boundary_star: bool = False) -> dict:
    """Default geometries for the stabilizer LTO suite, s = 1.

    Vertex regions (all incident edges) place Lambda away from the
    truncation rim, or against column 0 when the model has a boundary; the
    cut for LTO2-4 is the top truncation row. Plaquette regions cover
    ``Lambda`` = 1 plaquette in 3x3 and 2x2 plaquettes in 4x4 when they fit.
    """
    W, H = model.width, model.height
    bd = model.boundary is not None
    if H < 5 or W < (4 if bd else 5):
        raise CategoryError("lattice too small for the standard LTO geometries")
    pre = "d" if bd else ""
    k = 2 if (bd or W >= 6) else 1
    x0 = 0 if bd else (W - k) // 2
    lo = 0 if bd else 1

    def vr(xa, ya, xb, yb):
        xa, xb = max(xa, lo if not bd else 0), min(xb, W - 1)
        return model.vertex_region([(i, j) for j in range(ya, yb) for i in range(xa, xb)])

    g = 0 if bd else 1
    top = H - 2
    mid = H // 2
    xa, xb = x0 - g, x0 + k + 1

    def family(ya, yb):
        out = [vr(xa, ya, xb + 1, yb), vr(xa, ya - 1, xb, yb), vr(xa, ya - 1, xb + 1, yb)]
        if not bd:
            out += [vr(xa - 1, ya, xb, yb), vr(xa - 1, ya - 1, xb + 1, yb)]
        return out

    cases = {
        f"{pre}LTO1": {"lam": vr(x0, mid, x0 + k, mid + 1), "delta": vr(xa, mid - 1, xb, mid + 2)},
        f"{pre}LTO2": {"lam": vr(x0, top, x0 + k, top + 1), "delta": vr(xa, top - 1, xb, top + 1),
                       "family": family(top - 1, top + 1),
                       "expected_dim": pauli_expected_boundary_dim(model.boundary, k - 1 if bd else k)},
        f"{pre}LTO3": {"lam_small": vr(x0, top, x0 + k, top + 1), "lam": vr(x0, top - 1, x0 + k, top + 1),
                       "delta": vr(xa, top - 2, xb, top + 1),
                       "family_small": family(top - 2, top + 1), "family": family(top - 2, top + 1)},
        f"{pre}LTO4": {"lam": vr(x0, top, x0 + k, top + 1), "delta": vr(xa, top - 1, xb, top + 1),
                       "delta2": vr(xa - g, top - 2, xb + 1, top + 1), "family": family(top - 1, top + 1)},
    }
    for size, inner, name in ((3, 1, "single_plaquette"), (4, 2, "plaquettes")):
        px = 0 if bd else (W - 1 - size) // 2
        py = (H - 1 - size) // 2
        if px + size <= W - 1 and py + size <= H - 1 and px >= 0 and py >= 0:
            lx = px if bd else px + 1
            cases[f"{pre}LTO1_{name}"] = {"lam": model.plaquette_region(lx, py + 1, lx + inner, py + 1 + inner),
                                          "delta": model.plaquette_region(px, py, px + size, py + size)}
    if drop_boundary_star:
        if not bd:
            raise CategoryError("the dropped-star mutant needs a boundary")
        cases[f"{pre}LTO1"]["drop"] = [(0 if model.boundary == "smooth" else 1, mid)]
    return cases


def _pauli_boundary_space(model: PauliModel, lam: frozenset[int], delta: frozenset[int],
                          family: Sequence[frozenset[int]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    S = model.stabilizers(delta)
    A = model.centralizer_in(lam, S)
    allS = _stack(S, *[model.stabilizers(d) for d in family], n=2 * model.n)
    B = model.centralizer_in(lam, allS)
    K = model.group_in(lam, S)
    return A, B, K


def pauli_lto_suite(model: PauliModel, cases: dict, tol: float = 1e-12) -> list[dict]:
    """LTO checks on the stabilizer model.

    ``cases`` maps axiom names to geometry records of edge sets:

    * ``LTO1``: ``{"lam", "delta", "drop"?}``
    * ``LTO2``: ``{"lam", "delta", "family"}``; the boundary algebra is
      ``span{P p_Delta}`` over Paulis on Lambda commuting with every
      stabilizer of Delta and of the grown regions in ``family``
    * ``LTO3``: ``{"lam_small", "lam", "delta", "family_small", "family"}``
    * ``LTO4``: ``{"lam", "delta", "delta2", "family"}``
    """
    out = []
    for name, g in cases.items():
        base = name.lstrip("d").split("_")[0]
        if base == "LTO1":
            out += _pauli_lto1(model, g["lam"], g["delta"], g.get("drop", ()), name)
        elif base == "LTO2":
            A, B, K = _pauli_boundary_space(model, g["lam"], g["delta"], g["family"])
            ra = gf2_rank(_stack(A, K, n=2 * model.n))
            rb = gf2_rank(_stack(B, K, n=2 * model.n))
            rk = gf2_rank(K)
            out.append(int_item(f"{name}_subspace_equality", ra, rb))
            out.append(int_item(f"{name}_dim", g.get("expected_dim"), 2 ** (rb - rk)))
        elif base == "LTO3":
            _, B1, _ = _pauli_boundary_space(model, g["lam_small"], g["delta"], g["family_small"])
            _, B2, K2 = _pauli_boundary_space(model, g["lam"], g["delta"], g["family"])
            r1 = gf2_rank(_stack(B1, K2, n=2 * model.n))
            r2 = gf2_rank(_stack(B2, K2, n=2 * model.n))
            r12 = gf2_rank(_stack(B1, B2, K2, n=2 * model.n))
            out.append(int_item(f"{name}_equal_algebras", [r2, r2], [r1, r12]))
        elif base == "LTO4":
            _, B, _ = _pauli_boundary_space(model, g["lam"], g["delta"], g["family"])
            S1 = model.stabilizers(g["delta"])
            S2 = model.stabilizers(g["delta2"])
            bad = 0
            # kernel of x p_Delta -> x p_Delta2 inside B: elements of B in <S2> but not <S1>
            G2 = model.group_in(g["lam"], S2)
            inter = _intersect(B, G2, 2 * model.n)
            for P in inter:
                if not model.in_span(P, S1):
                    bad += 1
            out.append(int_item(f"{name}_injective", 0, bad))
        else:
            raise CategoryError(f"unknown axiom {name}")
    return out


def _intersect(U: np.ndarray, V: np.ndarray, n: int) -> np.ndarray:
    """Basis of the intersection of two GF(2) row spaces."""
    if len(U) == 0 or len(V) == 0:
        return np.zeros((0, n), dtype=np.uint8)
    M = np.concatenate([U, V], axis=0).T
    null = gf2_nullspace(M, len(U) + len(V))
    vecs = (null[:, :len(U)].astype(np.int64) @ U) & 1
    if len(vecs) == 0:
        return vecs.astype(np.uint8)
    R, _ = _gf2_rref(vecs)
    return R.astype(np.uint8)


# ----------------------------------------------------------------------
# categorical vs stabilizer comparison
# ----------------------------------------------------------------------

def lw_pauli_comparison(lattice: LWLattice, vertices: Sequence[Vertex]) -> dict:
    """Compare Vec(Z/2) ``B_p`` with ``(1 + prod Z)/2`` on a vertex region.

    Matched states are labelled by edge labels (``g`` is read as the
    ``-1`` eigenvalue of ``X``), so ``Z`` flips labels. Returns the largest
    entry difference over all plaquettes and the two projector ranks.
    """
    cat = lattice.cat
    if cat.rank != 2 or not np.allclose(cat.dims, 1.0):
        raise CategoryError("the stabilizer comparison needs Vec(Z/2)")
    region = lattice.region(vertices)
    conf = region.matched()
    nconf = len(conf)
    keys, order = region._lookup("matched")
    worst = 0.0
    for p in region.plaquettes:
        B = region.plaquette_operator(p, "matched").matrix.toarray()
        BL, BR, TL, TR = p
        flips = [(BL, TOP), (TL, BOTTOM), (BL, RIGHT), (BR, LEFT),
                 (TL, RIGHT), (TR, LEFT), (BR, TOP), (TR, BOTTOM)]
        target = np.zeros((nconf, nconf))
        for col, c in enumerate(conf):
            target[col, col] += 0.5
            new = c.copy()
            legs_of: dict = {}
            for v, legmap in flips:
                legs_of.setdefault(v, []).append(legmap[lattice.kind(v)])
            for v, legs in legs_of.items():
                k = region.pos[v]
                spc = lattice.space(v)
                st = list(spc.states[new[k]])
                for leg in legs:
                    st[spc.legs.index(leg)] ^= 1
                if spc.kind == BULK:
                    st[4] = st[0] ^ st[1]
                new[k] = spc.index(tuple(st))
            fl = int(region.flat(new[None, :])[0])
            row = order[np.searchsorted(keys, fl)]
            target[row, col] += 0.5
        worst = max(worst, float(np.abs(B - target).max()))
    model = PauliModel(max(v[0] for v in vertices) + 3, max(v[1] for v in vertices) + 3)
    shift = [(v[0] + 1, v[1] + 1) for v in vertices]
    reg = model.vertex_region(shift)
    S = model.stabilizers(reg)
    pauli_rank = 2 ** (len(reg) - gf2_rank(S))
    lw_rank = int(round(region.region_projector("matched").matrix.diagonal().sum().real))
    return {"bp_residual": worst, "lw_rank": lw_rank, "pauli_rank": pauli_rank}

"""Tube algebra, Drinfeld center simples, Mueger centralizers and DHR braidings.

Tube basis elements are ``x = v^r_{c b} (v^r_{a c})^dag`` in ``C(a c -> c b)``
indexed by ``(a, b, c, r)``. The product ``x * y`` of ``x`` in ``C(a c -> c b)``
and ``y`` in ``C(b d -> d e)`` is

    sum_f (v^f_{cd}^dag (x) id_e)(id_c (x) y)(x (x) id_d)(id_a (x) v^f_{cd})

which is zero unless the inner labels match. A center object ``(Z, e)``
represents it on ``V = (+)_a Hom(a, Z)`` through
``rho(x) eta = ptr_c[e(c)^dag (id_c (x) eta) x]`` with the unnormalized
pivotal partial trace.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra_net import (
    CenterObject,
    ChainFamily,
    DHRTruncation,
    canonical_state,
    include_element,
    localized_basis,
)
from .category_core import BraidingData, CategoryError, FusionCategoryData
from .homspace import Calculus, Morphism
from .reports import int_item, item

__all__ = [
    "TubeAlgebra",
    "CenterSimple",
    "tube_algebra",
    "tube_irreps",
    "center_object",
    "half_braiding_residual",
    "derive_toric_center",
    "compare_with_builtin_toric",
    "muger_centralizer",
    "muger_center",
    "image_center_object",
    "EnrichedChain",
    "enriched_dhr_truncation",
    "partition_of_unity",
    "DHRBraiding",
    "dhr_braiding",
    "braided_functor_check",
    "unit_center_object",
    "trivial_enrichment_check",
]

NULL_CUTOFF = 1e-9


@dataclass
class TubeAlgebra:
    """Structure constants ``mult[i, j, k]`` with ``x_i * x_j = sum_k mult[i, j, k] x_k``."""

    calc: Calculus
    basis: list[tuple[int, int, int, int]]
    mult: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    def unit(self) -> np.ndarray:
        u = np.zeros(self.dim, dtype=complex)
        for i, (a, b, c, r) in enumerate(self.basis):
            if c == 0:
                u[i] = 1.0
        return u

    def idempotent(self, a: int) -> np.ndarray:
        u = np.zeros(self.dim, dtype=complex)
        u[self.basis.index((a, a, 0, a))] = 1.0
        return u

    def product(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.mult)

    def left_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``y -> x * y``."""
        return np.einsum("i,ijk->kj", x, self.mult)

    def right_matrix(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("j,ijk->ki", x, self.mult)

    def associativity_residual(self) -> float:
        lhs = np.einsum("ijm,mkl->ijkl", self.mult, self.mult)
        rhs = np.einsum("jkm,iml->ijkl", self.mult, self.mult)
        return float(np.abs(lhs - rhs).max()) if self.dim else 0.0

    def center(self) -> np.ndarray:
        """Basis (rows) of the center."""
        n = self.dim
        rows = [self.left_matrix(np.eye(n)[i]) - self.right_matrix(np.eye(n)[i]) for i in range(n)]
        # z central iff sum_k z_k (L(x_k) - R(x_k)) = 0 on every basis element
        M = np.concatenate([np.stack([rows[k][:, j] for k in range(n)], axis=1) for j in range(n)], axis=0)
        _, s, Vh = np.linalg.svd(M)
        rank = int(np.sum(s > NULL_CUTOFF * max(s.max(), 1.0)))
        return Vh[rank:].conj()


def _tube_element(calc: Calculus, a: int, b: int, c: int, r: int) -> Morphism:
    v_out = calc.vertex((c,), (b,), r)
    v_in = calc.vertex((a,), (c,), r)
    return v_out @ v_in.dag


def tube_algebra(cat: FusionCategoryData, calc: Calculus | None = None) -> TubeAlgebra:
    """Tube algebra ``(+)_{a,b,c} C(a c -> c b)`` of a multiplicity-free category."""
    calc = calc or Calculus(cat)
    k = cat.rank
    N = cat.N
    if N.max() > 1:
        raise CategoryError("tube algebra needs a multiplicity-free category")
    basis = []
    for a, b, c in itertools.product(range(k), repeat=3):
        for r in range(k):
            if N[a, c, r] and N[c, b, r]:
                basis.append((a, b, c, r))
    index = {t: i for i, t in enumerate(basis)}
    elems = [_tube_element(calc, *t) for t in basis]
    n = len(basis)
    mult = np.zeros((n, n, n), dtype=complex)
    for i, (a, b, c, _) in enumerate(basis):
        x = elems[i]
        for j, (b2, e, d, _) in enumerate(basis):
            if b2 != b:
                continue
            y = elems[j]
            xd = calc.tensor(x, calc.identity(((d,),)))
            cy = calc.tensor(calc.identity(((c,),)), y)
            for f in cat.ring.channels(c, d):
                v = calc.vertex((c,), (d,), f)
                top = calc.tensor(v.dag, calc.identity(((e,),)))
                bot = calc.tensor(calc.identity(((a,),)), v)
                out = top @ cy @ xd @ bot
                for rr, blk in out.blocks.items():
                    if blk.size and abs(blk[0, 0]) > 1e-14:
                        mult[i, j, index[(a, e, f, rr)]] += blk[0, 0]
    return TubeAlgebra(calc, basis, mult)


@dataclass
class CenterSimple:
    """Irreducible tube representation with its reconstructed half-braiding.

    ``E[(c, r)]`` is the matrix of ``e(c)`` on fusion channel r, with columns
    indexed by ``a`` in ``Z (x) c -> r`` and rows by ``b`` in ``c (x) Z -> r``
    (both listed in the order of ``Z``).
    """

    underlying: tuple[int, ...]
    block_dim: int
    dim: float
    E: dict[tuple[int, int], np.ndarray]
    label: str = ""


def _central_idempotents(tube: TubeAlgebra, rng: np.random.Generator) -> list[np.ndarray]:
    Zb = tube.center()
    z = rng.standard_normal(Zb.shape[0]) @ Zb
    # multiplication by z on the (commutative) center
    Lz = np.stack([np.linalg.lstsq(Zb.T, tube.product(z, Zb[i]), rcond=None)[0] for i in range(Zb.shape[0])], axis=1)
    vals = np.linalg.eigvals(Lz)
    ids = []
    one = tube.unit()
    for i, lam in enumerate(vals):
        e = one.copy()
        for j, mu in enumerate(vals):
            if j != i:
                e = tube.product(e, (z - mu * one) / (lam - mu))
        ids.append(e)
    return ids


def tube_irreps(tube: TubeAlgebra, rng: np.random.Generator | None = None) -> list[CenterSimple]:
    """Decompose the tube algebra and rebuild each irrep as a center simple.

    Block dims come from ``dim e_i T = m_i^2``; the multiplicity of a in the
    underlying object is ``sqrt(dim e_i p_a T p_a)``. Half-braidings are
    recovered from the irrep matrices in a basis adapted to the ``p_a``,
    then the diagonal gauge is fixed by the linear condition that makes
    every ``e(c)`` unitary.
    """
    rng = rng or np.random.default_rng(0)
    calc = tube.calc
    cat = calc.cat
    dims = cat.dims
    k = cat.rank
    out = []
    for e in _central_idempotents(tube, rng):
        Le = tube.left_matrix(e)
        m = int(round(np.sqrt(np.linalg.matrix_rank(Le, tol=1e-8))))
        mult = {}
        for a in range(k):
            pa = tube.idempotent(a)
            sub = tube.left_matrix(tube.product(e, pa)) @ tube.right_matrix(pa)
            na = int(round(np.sqrt(np.linalg.matrix_rank(sub, tol=1e-8))))
            if na:
                mult[a] = na
        if any(v > 1 for v in mult.values()):
            raise CategoryError("center simple with a repeated underlying summand is not supported")
        Z = tuple(sorted(mult))
        dim = float(sum(dims[a] for a in Z))
        # left ideal V = T p_{a0} e with basis vectors w_b in p_b V
        a0 = Z[0]
        gen = tube.product(tube.idempotent(a0), e)
        W = {}
        for b in Z:
            cols = tube.left_matrix(tube.idempotent(b)) @ tube.right_matrix(gen)
            U, s, _ = np.linalg.svd(cols)
            W[b] = U[:, 0]
        Wm = np.stack([W[b] for b in Z], axis=1)
        pos = {b: i for i, b in enumerate(Z)}
        E_raw: dict[tuple[int, int], np.ndarray] = {}
        for i, (a, b, c, r) in enumerate(tube.basis):
            if a not in pos or b not in pos:
                continue
            img = tube.product(np.eye(tube.dim)[i], W[b])
            coeff = np.linalg.lstsq(Wm, img, rcond=None)[0]
            rho_ab = coeff[pos[a]]
            chans_in = [x for x in Z if cat.N[x, c, r]]
            chans_out = [x for x in Z if cat.N[c, x, r]]
            M = E_raw.setdefault((c, r), np.zeros((len(chans_out), len(chans_in)), dtype=complex))
            M[chans_out.index(b), chans_in.index(a)] = np.conj(rho_ab) * dims[a] / dims[r]
        E = _unitarize(E_raw, Z, cat)
        out.append(CenterSimple(Z, m, dim, E))
    out.sort(key=lambda s: (s.dim, s.underlying, _charge_key(s)))
    return out


def _charge_key(s: CenterSimple) -> tuple:
    return tuple(np.round(np.angle(v[0, 0]), 6) for _, v in sorted(s.E.items()) if v.size == 1)


def _unitarize(E_raw: dict, Z: tuple, cat: FusionCategoryData) -> dict:
    """Positive diagonal rescaling making every block unitary.

    With ``E = D_out E_raw D_in^{-1}`` and ``q = |D|^{-2}``, unitarity reads
    ``E_raw diag(q_in) E_raw^dag = diag(q_out)``, linear in q.
    """
    pos = {b: i for i, b in enumerate(Z)}
    rows = []
    for (c, r), M in E_raw.items():
        ins = [x for x in Z if cat.N[x, c, r]]
        outs = [x for x in Z if cat.N[c, x, r]]
        for i, bi in enumerate(outs):
            for j, bj in enumerate(outs):
                row = np.zeros(len(Z), dtype=complex)
                for t, a in enumerate(ins):
                    row[pos[a]] += M[i, t] * np.conj(M[j, t])
                if i == j:
                    row[pos[bi]] -= 1.0
                rows.append(row)
    A = np.array(rows) if rows else np.zeros((0, len(Z)))
    _, s, Vh = np.linalg.svd(A) if A.size else (None, np.zeros(0), np.eye(len(Z)))
    rank = int(np.sum(s > 1e-8 * max(s.max(), 1.0))) if s.size else 0
    null = Vh[rank:].conj().T
    if null.shape[1] != 1:
        raise CategoryError("could not fix the half-braiding gauge")
    q = null[:, 0]
    q = q / q[np.argmax(np.abs(q))]
    if np.any(q.real <= 0) or np.abs(q.imag).max() > 1e-8:
        raise CategoryError("half-braiding gauge is not positive")
    h = 1.0 / np.sqrt(q.real)
    out = {}
    for (c, r), M in E_raw.items():
        ins = [x for x in Z if cat.N[x, c, r]]
        outs = [x for x in Z if cat.N[c, x, r]]
        Dout = np.diag([h[pos[b]] for b in outs])
        Din = np.diag([1.0 / h[pos[a]] for a in ins])
        out[(c, r)] = Dout @ M @ Din
    return out


def center_object(calc: Calculus, z: CenterSimple) -> CenterObject:
    """Package a center simple as half-braiding morphisms over ``calc``."""
    Z = z.underlying
    hb = {}
    for c in range(calc.cat.rank):
        m = calc.zeros((Z, (c,)), ((c,), Z))
        idx_in = calc.tree_index((Z, (c,)))
        idx_out = calc.tree_index(((c,), Z))
        for r, blk in m.blocks.items():
            ins = [x for x in Z if calc.cat.N[x, c, r]]
            outs = [x for x in Z if calc.cat.N[c, x, r]]
            M = z.E[(c, r)]
            for i, b in enumerate(outs):
                for j, a in enumerate(ins):
                    blk[idx_out[r][((0, Z.index(b)), (c, r))], idx_in[r][((Z.index(a), 0), (a, r))]] = M[i, j]
        hb[c] = m
    return CenterObject(calc, Z, hb, z.label)


def half_braiding_residual(obj: CenterObject) -> dict[str, float]:
    """Unitarity and monoidality residuals of a half-braiding.

    Monoidality is checked on every vertex:
    ``(id_c (x) e(d))(e(c) (x) id_d)(id_Z (x) v^f_{cd}) = (v^f_{cd} (x) id_Z) e(f)``.
    """
    calc = obj.calc
    k = calc.cat.rank
    Z = obj.Z
    uni = 0.0
    mon = 0.0
    for c in range(k):
        e = obj.half_braiding[c]
        uni = max(uni, (e.dag @ e).dist(calc.identity((Z, (c,)))))
    for c, d in itertools.product(range(k), repeat=2):
        ec = calc.tensor(obj.half_braiding[c], calc.identity(((d,),)))
        ed = calc.tensor(calc.identity(((c,),)), obj.half_braiding[d])
        for f in calc.cat.ring.channels(c, d):
            v = calc.vertex((c,), (d,), f)
            lhs = ed @ ec @ calc.tensor(calc.identity((Z,)), v)
            rhs = calc.tensor(v, calc.identity((Z,))) @ obj.half_braiding[f]
            mon = max(mon, lhs.dist(rhs))
    return {"unitarity": uni, "monoidality": mon}


# ----------------------------------------------------------------------
# toric center from Vec(Z/2)
# ----------------------------------------------------------------------

def derive_toric_center(cat: FusionCategoryData, calc: Calculus | None = None) -> dict[str, CenterObject]:
    """Center simples of Vec(Z/2) labelled by charge and flux.

    Flux is the underlying simple; charge is read off the half-braiding
    with the generator (sign -1 means charge 1). Labels follow
    ``1=(0,0), e=(1,0), m=(0,1), f=(1,1)`` for (charge, flux).
    """
    calc = calc or Calculus(cat)
    if cat.rank != 2:
        raise CategoryError("toric center derivation expects Vec(Z/2)")
    out = {}
    names = {(0, 0): "1", (1, 0): "e", (0, 1): "m", (1, 1): "f"}
    for s in tube_irreps(tube_algebra(cat, calc)):
        flux = s.underlying[0]
        val = s.E[(1, cat.N[flux, 1].argmax())][0, 0]
        charge = 0 if val.real > 0 else 1
        s.label = names[(charge, flux)]
        out[s.label] = center_object(calc, s)
    return out


def compare_with_builtin_toric(derived: dict[str, CenterObject], toric: FusionCategoryData,
                               braiding: BraidingData) -> dict[str, float]:
    """Residuals between derived center data and the builtin toric center.

    Compares the fusion of underlying fluxes and charges, and the braiding
    ``c_{z,w} = e_z(F(w))`` against the builtin R-symbols.
    """
    ids = list(toric.ring.ids)
    qg = {"1": (0, 0), "e": (1, 0), "m": (0, 1), "f": (1, 1)}
    r_res = 0.0
    fusion_bad = 0
    for zl, z in derived.items():
        for wl, w in derived.items():
            flux_w = w.Z[0]
            beta = z.half_braiding[flux_w]
            val = complex(list(beta.blocks.values())[0][0, 0]) if any(b.size for b in beta.blocks.values()) else 0j
            # channel of z (x) w in the builtin
            a, b = ids.index(zl), ids.index(wl)
            prod = ((qg[zl][0] + qg[wl][0]) % 2, (qg[zl][1] + qg[wl][1]) % 2)
            cname = [k for k, v in qg.items() if v == prod][0]
            c = ids.index(cname)
            if toric.N[a, b, c] != 1:
                fusion_bad += 1
            r_res = max(r_res, abs(val - braiding.r(a, b, c)))
    return {"r_symbols": r_res, "fusion": float(fusion_bad)}


# ----------------------------------------------------------------------
# Mueger centralizers
# ----------------------------------------------------------------------

def muger_centralizer(cat: FusionCategoryData, braiding: BraidingData, S: Sequence[int],
                      tol: float = 1e-10) -> list[int]:
    """Simples with trivial monodromy against every member of ``S`` on every channel."""
    out = []
    for z in range(cat.rank):
        ok = True
        for s in S:
            for r in cat.ring.channels(s, z):
                if abs(braiding.monodromy(s, z, r) - 1.0) > tol:
                    ok = False
        if ok:
            out.append(z)
    return out


def muger_center(cat: FusionCategoryData, braiding: BraidingData, tol: float = 1e-10) -> list[int]:
    return muger_centralizer(cat, braiding, range(cat.rank), tol)


# ----------------------------------------------------------------------
# enriched chains and DHR
# ----------------------------------------------------------------------

def image_center_object(calc: Calculus, z: int, center: FusionCategoryData,
                        derived: dict[str, CenterObject]) -> CenterObject:
    """Center object over ``calc`` for simple ``z`` of the builtin toric center."""
    return derived[center.ring.ids[z]]


@dataclass
class EnrichedChain:
    """Boundary sites carrying ``X`` followed by bulk sites carrying ``Phi(A)``.

    ``phi_objs`` holds the center objects of the image of A's simples; the
    bulk object is their direct sum. With an empty list the chain is the plain
    fusion chain of ``X``.
    """

    calc: Calculus
    X: tuple
    phi_objs: list[CenterObject]

    @property
    def bulk(self) -> tuple:
        return tuple(s for o in self.phi_objs for s in o.Z)

    def word(self, nb: int, nk: int) -> tuple:
        return (self.X,) * nb + ((self.bulk,) * nk if self.phi_objs else ())

    def bulk_half_braiding(self, Y: tuple) -> Morphism:
        """``e_{Phi(A)}(Y) : (Phi(A), Y) -> (Y, Phi(A))`` assembled summand by summand."""
        calc = self.calc
        B = self.bulk
        out = calc.zeros((B, Y), (Y, B))
        k = 0
        for o in self.phi_objs:
            for j, s in enumerate(o.Z):
                inc = _summand_inclusion(calc, B, (s,), k + j)
                single = _restrict_center(o, j)
                e = single.over(Y)
                out = out + calc.tensor(calc.identity((Y,)), inc) @ e @ calc.tensor(inc.dag, calc.identity((Y,)))
            k += len(o.Z)
        return out

    def algebra_dim(self, nb: int, nk: int) -> int:
        w = self.word(nb, nk)
        return self.calc.hom_dim(w, w)

    def include(self, x: Morphism, nb: int, nk: int, nb2: int, nk2: int) -> Morphism:
        """Inclusion adding boundary and bulk sites; new boundary strands pass the bulk by half-braiding."""
        calc = self.calc
        y = calc.extend(x, right=(self.X,) * (nb2 - nb) + ((self.bulk,) * (nk2 - nk) if self.phi_objs else ()))
        if nb2 == nb or nk == 0:
            return y
        # word now X^nb B^nk X^(nb2-nb) B^(nk2-nk); move the new X's left past B^nk
        u = self._move_left(nb, nk, nb2 - nb, nk2 - nk)
        return u @ y @ u.dag

    def _move_left(self, nb: int, nk: int, dx: int, dk: int) -> Morphism:
        calc = self.calc
        B, X = self.bulk, self.X
        word = (X,) * nb + (B,) * nk + (X,) * dx + (B,) * dk
        u = calc.identity(word)
        cur = list(word)
        for t in range(dx):
            # strand at position nb+nk+t moves left to position nb+t
            for p in range(nb + nk + t - 1, nb + t - 1, -1):
                step = calc.extend(self.bulk_half_braiding(X), left=tuple(cur[:p]), right=tuple(cur[p + 2:]))
                u = step @ u
                cur[p], cur[p + 1] = cur[p + 1], cur[p]
        return u

    def state(self, x: Morphism) -> complex:
        calc = self.calc
        word = x.dom
        m = calc.zeros((), word)
        idx = calc.tree_index(word)
        pos = tuple(obj.index(0) for obj in word)
        m.blocks[0][idx[0][(pos, (0,) * len(word))], 0] = 1.0
        return complex((m.dag @ x @ m).blocks[0][0, 0])


def _summand_inclusion(calc: Calculus, B: tuple, S: tuple, k: int) -> Morphism:
    m = calc.zeros((S,), (B,))
    s = S[0]
    m.blocks[s][calc.tree_index((B,))[s][((k,), (s,))], 0] = 1.0
    return m


def _restrict_center(o: CenterObject, j: int) -> CenterObject:
    """Summand j of a center object whose underlying summands are each invariant."""
    if len(o.Z) == 1:
        return o
    raise CategoryError("bulk image summands must be simple")


def enriched_dhr_truncation(chain: EnrichedChain, z: CenterObject, nb: int, nk: int,
                            centralizer: Sequence[str] | None = None) -> DHRTruncation:
    """``Y^z = Hom(X^nb B^nk -> X^nb B^nk (x) Z)`` for z centralizing the image of A."""
    if centralizer is not None and z.name not in centralizer:
        raise CategoryError(f"{z.name!r} does not centralize the image")
    fam = ChainFamily(chain.calc, chain.X)
    word = chain.word(nb, nk)
    return DHRTruncation(fam, nb + nk, z, word, word + (z.Z,))


def path_independence_residual(chain: EnrichedChain, z: CenterObject, eta: Morphism, nb: int, nk: int) -> float:
    """Compare two ways of carrying ``z`` past a new bulk site.

    Over: ``e_z(B)``. Under: ``e_B(Z)^{-1}``. They agree when z centralizes
    the image of A.
    """
    calc = chain.calc
    word = chain.word(nb, nk)
    B = chain.bulk
    grown = calc.extend(eta, right=(B,))
    over = calc.extend(z.over(B), left=word)
    under = calc.extend(chain.bulk_half_braiding(z.Z).dag, left=word)
    return (over @ grown).dist(under @ grown)


def partition_of_unity(calc: Calculus, X: tuple, z: CenterObject) -> list[Morphism]:
    """Isometries ``b_j : X -> X (x) Z`` with ``sum b_j b_j^dag = 1``."""
    from .algebra_net import summand_isometries
    return summand_isometries(calc, X, X, z.Z)


@dataclass
class DHRBraiding:
    """Swap ``u : Y^w [x] Y^z -> Y^z [x] Y^w`` realized on ``Hom(word, word w z)``."""

    K: Morphism
    k: int
    l: int


def dhr_braiding(Yw: DHRTruncation, Yz: DHRTruncation, k: int, l: int,
                 bases: tuple[list[Morphism], list[Morphism]] | None = None) -> DHRBraiding:
    """Basis-swap braiding ``b_i [x] c_j a_ij -> c_j [x] b_i a_ij``.

    With ``Y^w [x] Y^z`` realized as ``Hom(word, word w z)`` via
    ``eta [x] xi -> (eta (x) id_z) xi``, the swap acts by composition with
    ``K = sum_ij (c_j (x) id_w) b_i c_j^dag (b_i^dag (x) id_z)``.
    """
    if abs(l - k) < 2:
        raise CategoryError("localization sites must be at least two apart")
    calc = Yw.calc
    B, C = bases if bases is not None else (localized_basis(Yw, k), localized_basis(Yz, l))
    w, z = Yw.datum.Z, Yz.datum.Z
    K = None
    for b in B:
        bz = calc.tensor(b.dag, calc.identity((z,)))
        for c in C:
            cw = calc.tensor(c, calc.identity((w,)))
            term = cw @ b @ c.dag @ bz
            K = term if K is None else K + term
    return DHRBraiding(K, k, l)


def _mix(basis: list[Morphism], rng: np.random.Generator) -> list[Morphism]:
    """Another projective basis ``b'_j = sum_k U_jk b_k`` with U a random unitary."""
    n = len(basis)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    out = []
    for j in range(n):
        acc = basis[0] * U[j, 0]
        for t in range(1, n):
            acc = acc + basis[t] * U[j, t]
        out.append(acc)
    return out


def braided_functor_check(Yw: DHRTruncation, Yz: DHRTruncation, k: int, l: int,
                          rng: np.random.Generator, tolerance: float = 1e-9,
                          alt_bases: tuple[list[Morphism], list[Morphism]] | None = None) -> list[dict]:
    """Unitarity, bimodularity, basis independence and agreement with ``id (x) e_w(Z)``."""
    calc = Yw.calc
    u = dhr_braiding(Yw, Yz, k, l)
    word = Yw.dom
    w, z = Yw.datum, Yz.datum
    K = u.K
    tag = f"dhr[{w.name},{z.name}]"
    items = [item(f"{tag}.unitary", (K.dag @ K).dist(calc.identity(word + (w.Z, z.Z))), tolerance)]
    a = calc.random(word, word, rng)
    lhs = K @ calc.extend(a, right=(w.Z, z.Z))
    rhs = calc.extend(a, right=(z.Z, w.Z)) @ K
    items.append(item(f"{tag}.bimodular", lhs.dist(rhs), tolerance))
    if alt_bases is None:
        alt_bases = (_mix(localized_basis(Yw, k), rng), _mix(localized_basis(Yz, l), rng))
    u2 = dhr_braiding(Yw, Yz, k, l, alt_bases)
    items.append(item(f"{tag}.basis_independent", K.dist(u2.K), tolerance))
    target = calc.extend(w.over_word((z.Z,)), left=word)
    items.append(item(f"{tag}.matches_braiding", K.dist(target), tolerance))
    return items


def unit_center_object(calc: Calculus) -> CenterObject:
    """The tensor unit of the center, with identity half-braidings."""
    hb = {}
    for x in range(calc.cat.rank):
        m = calc.zeros(((0,), (x,)), ((x,), (0,)))
        for r, blk in m.blocks.items():
            m.blocks[r] = np.eye(*blk.shape, dtype=blk.dtype)
        hb[x] = m
    return CenterObject(calc, (0,), hb, name="1")


def trivial_enrichment_check(calc: Calculus, X: tuple, nb: int, nk: int, rng: np.random.Generator,
                             tolerance: float = 1e-10) -> list[dict]:
    """Enrichment by Vec must reproduce the fusion chain of ``X``.

    Compares algebra dimensions, canonical states and the inclusion adding a
    boundary site, with bulk sites carrying the unit.
    """
    chain = EnrichedChain(calc, X, [unit_center_object(calc)])
    fam = ChainFamily(calc, X)
    unit = ((0,),) * nk
    tag = f"trivial_enrichment[{nb}+{nk}]"
    items = [int_item(f"{tag}.algebra_dim", fam.algebra(nb).dim, chain.algebra_dim(nb, nk))]
    word = fam.word(nb)
    x = calc.random(word, word, rng)
    y = calc.extend(x, right=unit)
    items.append(item(f"{tag}.state", abs(chain.state(y) - canonical_state(x, fam)), tolerance))
    big = calc.extend(include_element(x, fam, nb, nb + 1), right=unit)
    moved = chain.include(y, nb, nk, nb + 1, nk)
    items.append(item(f"{tag}.inclusion", moved.dist(big), tolerance))
    return items

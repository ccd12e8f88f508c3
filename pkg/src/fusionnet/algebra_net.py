"""Fusion spin chains, fusion module chains and their local algebras.

Level ``n`` of the chain over a generator ``X`` is ``End(X^n)``. Its module
variant is ``End_M(W <| X^(n-1))``: the boundary site carrying ``W`` counts as
a site. Elements are :class:`~fusionnet.homspace.Morphism` values, so a local
operator on sites ``[i, j)`` is ``id (x) f (x) id``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .category_core import CategoryError, FusionCategoryData, ModuleCategoryData, w_bubble
from .homspace import Calculus, Morphism
from .reports import int_item, item

__all__ = [
    "BlockAlgebra",
    "OperatorSpace",
    "ChainFamily",
    "chain_algebra",
    "module_chain_algebra",
    "include_element",
    "canonical_state",
    "conditional_expectation",
    "commutant",
    "block_commutant",
    "haag_check",
    "CenterObject",
    "FunctorDatum",
    "DHRTruncation",
    "dhr_truncation",
    "localized_basis",
]

NULL_CUTOFF = 1e-9


# ----------------------------------------------------------------------
# algebras and operator spaces
# ----------------------------------------------------------------------

@dataclass
class BlockAlgebra:
    """``End(word)`` as a direct sum of full matrix blocks, one per root."""

    calc: Calculus
    word: tuple
    head: bool = False
    name: str = ""
    family: "ChainFamily | None" = None
    level: int | None = None

    @property
    def sectors(self) -> list[tuple[int, int]]:
        return sorted(self.calc.counts(self.word, self.head).items())

    @property
    def dim(self) -> int:
        return sum(n * n for _, n in self.sectors)

    @property
    def center_dim(self) -> int:
        return len(self.sectors)

    def identity(self) -> Morphism:
        return self.calc.identity(self.word, self.head)

    def zeros(self) -> Morphism:
        return self.calc.zeros(self.word, self.word, self.head)

    def random(self, rng: np.random.Generator) -> Morphism:
        return self.calc.random(self.word, self.word, rng, self.head)

    def from_vector(self, v: np.ndarray) -> Morphism:
        return self.calc.from_vector(self.word, self.word, v, self.head)

    def trace_weights(self) -> np.ndarray:
        """Per-coordinate weights of the trace form ``sum_r d_r tr(x_r^dag y_r)``."""
        d = self.calc.root_dims(self.head)
        return np.concatenate([np.full(n * n, d[r]) for r, n in self.sectors]) if self.sectors else np.zeros(0)

    def trace(self, x: Morphism) -> complex:
        return self.calc.trace(x)

    def full_space(self) -> "OperatorSpace":
        return OperatorSpace(self, np.eye(self.dim, dtype=complex))


class OperatorSpace:
    """Linear subspace of a block algebra, stored by an orthonormal basis.

    Orthonormality refers to the trace form of the ambient algebra.
    """

    def __init__(self, ambient: BlockAlgebra, vectors: np.ndarray, orthonormalize: bool = True):
        self.ambient = ambient
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if vectors.size == 0:
            vectors = np.zeros((0, ambient.dim), dtype=complex)
        if orthonormalize and vectors.shape[0]:
            w = np.sqrt(ambient.trace_weights())
            M = (vectors * w[None, :]).T
            U, s, _ = np.linalg.svd(M, full_matrices=False)
            keep = s > NULL_CUTOFF * max(1.0, s.max() if s.size else 1.0)
            vectors = (U[:, keep] / w[:, None]).T
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def elements(self) -> list[Morphism]:
        return [self.ambient.from_vector(v) for v in self.vectors]

    def residual(self, x: Morphism) -> float:
        """Trace-norm distance of ``x`` from the space, relative to ``|x|``."""
        w = self.ambient.trace_weights()
        v = x.vector()
        coeff = (self.vectors.conj() * w[None, :]) @ v
        r = v - self.vectors.T @ coeff
        nv = np.sqrt(np.sum(w * np.abs(v) ** 2))
        return float(np.sqrt(np.sum(w * np.abs(r) ** 2)) / max(nv, 1e-300))

    def contains_space(self, other: "OperatorSpace") -> float:
        return max((self.residual(x) for x in other.elements()), default=0.0)


# ----------------------------------------------------------------------
# chains
# ----------------------------------------------------------------------

@dataclass
class ChainFamily:
    """Generator data of a fusion (module) chain.

    Parameters
    ----------
    calc : Calculus
    X : tuple
        Generator object.
    W : tuple, optional
        Module object on the boundary site (module chains only).
    alternating : bool
        Use the words ``X, X*, X, ...``.
    """

    calc: Calculus
    X: tuple
    W: tuple | None = None
    alternating: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def head(self) -> bool:
        return self.W is not None

    def site_obj(self, k: int) -> tuple:
        """Object at bulk site k (0-based among bulk sites)."""
        if self.alternating and k % 2 == 1:
            return self.calc.dual_obj(self.X)
        return self.X

    def word(self, n: int) -> tuple:
        if self.head:
            if n < 1:
                raise CategoryError("module chain needs the boundary site")
            return (self.W,) + tuple(self.site_obj(k) for k in range(n - 1))
        return tuple(self.site_obj(k) for k in range(n))

    def algebra(self, n: int) -> BlockAlgebra:
        hit = self._cache.get(n)
        if hit is None:
            hit = BlockAlgebra(self.calc, self.word(n), self.head, f"level{n}", self, n)
            self._cache[n] = hit
        return hit

    def local(self, n: int, start: int, f: Morphism) -> Morphism:
        """Place ``f`` on sites ``start..`` of level n (identity elsewhere)."""
        word = self.word(n)
        k = len(f.dom)
        if f.head:
            if start != 0:
                raise CategoryError("module operator must start at the boundary site")
            return self.calc.extend(f, right=word[k:])
        left, right = word[:start], word[start + k:]
        if self.head:
            if start == 0:
                raise CategoryError("bulk operator cannot occupy the boundary site")
            out = self.calc.tensor(self.calc.identity(left, head=True), f)
            return self.calc.extend(out, right=right)
        return self.calc.extend(f, left, right)

    def local_random(self, n: int, start: int, length: int, rng: np.random.Generator) -> Morphism:
        word = self.word(n)
        sub = word[start:start + length]
        head = self.head and start == 0
        return self.local(n, start, self.calc.random(sub, sub, rng, head))

    def unit_isometry(self, n_bulk: int) -> Morphism:
        """``i_X^(n)`` for bulk sites only: ``1 -> X^n`` onto the unit summands."""
        word = tuple(self.site_obj(k) for k in range(n_bulk))
        m = self.calc.zeros((), word)
        idx = self.calc.tree_index(word)
        pos = []
        for obj in word:
            if 0 not in obj:
                raise CategoryError("generator has no unit summand")
            pos.append(obj.index(0))
        if n_bulk:
            m.blocks[0][idx[0][(tuple(pos), (0,) * n_bulk)], 0] = 1.0
        return m


def chain_algebra(cat: FusionCategoryData, X: Sequence[int], n: int, calc: Calculus | None = None) -> BlockAlgebra:
    """``End(X^n)`` for a generator ``X`` given by its simple summands."""
    calc = calc or Calculus(cat)
    return ChainFamily(calc, tuple(X)).algebra(n)


def module_chain_algebra(mod: ModuleCategoryData, W: Sequence[int], cat: FusionCategoryData | None,
                         X: Sequence[int], n: int, alternating: bool = False,
                         calc: Calculus | None = None, check_normalized: bool = True) -> BlockAlgebra:
    """``End_M(W <| X^(n-1))``; with ``alternating`` the bulk word is ``X X* X ...``.

    The module trace must already be normalized so the W-loop equals one.
    """
    if check_normalized:
        mult: dict[int, int] = {}
        for m in W:
            mult[m] = mult.get(m, 0) + 1
        if any(abs(b - 1.0) > 1e-9 for b in w_bubble(mod, mult)):
            raise CategoryError("module trace is not normalized (W-loop != 1)")
    calc = calc or Calculus(mod.cat, module=mod)
    return ChainFamily(calc, tuple(X), tuple(W), alternating).algebra(n)


def include_element(x: Morphism, family: ChainFamily, n: int, m: int, left: int = 0) -> Morphism:
    """Embed level n into level m by identities on the right (and ``left`` sites on the left)."""
    if m < n + left:
        raise CategoryError("target level too small")
    calc = family.calc
    if family.head:
        if left:
            raise CategoryError("module chains only grow to the right")
        return calc.extend(x, right=family.word(m)[n:])
    word = family.word(m)
    return calc.extend(x, left=word[:left], right=word[left + n:])


def canonical_state(x: Morphism, family: ChainFamily) -> complex:
    """Compression by the unit isometry on every bulk site.

    Module chains are further normalized by ``Tr(id_W)``, so ``psi(1) = 1``.
    """
    calc = family.calc
    nb = len(x.dom) - (1 if family.head else 0)
    i = family.unit_isometry(nb)
    if family.head:
        iw = calc.tensor(calc.identity((family.W,), head=True), i)
        y = iw.dag @ x @ iw
        return calc.trace(y) / calc.trace(calc.identity((family.W,), head=True))
    y = i.dag @ x @ i
    return complex(y.blocks[0][0, 0])


def conditional_expectation(x: Morphism, family: ChainFamily, m: int, k: int) -> Morphism:
    """Expectation of a level-m element onto the last k sites.

    ``E(x) = (i^(m-k) (x) id)^dag x (i^(m-k) (x) id)``, an element of level k
    of the plain chain.
    """
    if family.head:
        raise CategoryError("expectation is defined on the plain chain")
    calc = family.calc
    word = family.word(m)
    i = family.unit_isometry(m - k)
    j = calc.extend(i, right=word[m - k:])
    return j.dag @ x @ j


# ----------------------------------------------------------------------
# commutants
# ----------------------------------------------------------------------

def _clusters(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(vals)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if vals[b] - vals[a] > tol:
            groups.append(np.array(cur))
            cur = [b]
        else:
            cur.append(b)
    groups.append(np.array(cur))
    return groups


def block_commutant(gens: Sequence[np.ndarray], n: int, rng: np.random.Generator | None = None,
                    cutoff: float = NULL_CUTOFF) -> np.ndarray:
    """Basis (rows = flattened n x n matrices) of the commutant of ``gens``.

    The commutant lies inside the commutant of a generic hermitian
    combination ``h`` of the generators; that superset is block diagonal in
    the eigenbasis of ``h`` (clusters are taken loosely, so it stays a
    superset). The remaining conditions are imposed through the PSD form
    ``sum_g ||[x, g]||^2`` restricted to the superset.
    """
    rng = rng or np.random.default_rng(0)
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    gens = [np.asarray(g, dtype=complex) for g in gens]
    gens = gens + [g.conj().T for g in gens]
    if not gens:
        return np.eye(n * n, dtype=complex)
    h = np.zeros((n, n), dtype=complex)
    for g in gens:
        h += rng.standard_normal() * g
    h = h + h.conj().T
    scale = max(np.abs(h).max(), 1e-300)
    vals, V = np.linalg.eigh(h / scale)
    groups = _clusters(vals, 1e-7)
    sizes = [len(g) for g in groups]
    offs = np.concatenate([[0], np.cumsum([s * s for s in sizes])])
    tot = int(offs[-1])
    Q = np.zeros((tot, tot), dtype=complex)
    Vg = [V[:, g] for g in groups]
    for g in gens:
        gt = V.conj().T @ g @ V
        for a, ga in enumerate(groups):
            ma = sizes[a]
            for b, gb in enumerate(groups):
                mb = sizes[b]
                G = gt[np.ix_(ga, gb)]
                if not np.any(np.abs(G) > 1e-15):
                    continue
                A1 = np.kron(np.eye(ma), G.T)   # x_a -> vec(x_a G)
                A2 = np.kron(G, np.eye(mb))     # x_b -> vec(G x_b)
                sa = slice(offs[a], offs[a + 1])
                sb = slice(offs[b], offs[b + 1])
                if a == b:
                    A = A1 - A2
                    Q[sa, sa] += A.conj().T @ A
                else:
                    Q[sa, sa] += A1.conj().T @ A1
                    Q[sb, sb] += A2.conj().T @ A2
                    Q[sa, sb] -= A1.conj().T @ A2
                    Q[sb, sa] -= A2.conj().T @ A1
    gscale = max(max(np.abs(g).max() for g in gens), 1e-300)
    w, Z = np.linalg.eigh(Q / gscale ** 2)
    null = Z[:, w < cutoff]
    out = np.zeros((null.shape[1], n * n), dtype=complex)
    for j in range(null.shape[1]):
        x = np.zeros((n, n), dtype=complex)
        for a, ga in enumerate(groups):
            xa = null[offs[a]:offs[a + 1], j].reshape(sizes[a], sizes[a])
            x += Vg[a] @ xa @ Vg[a].conj().T
        out[j] = x.ravel()
    return out


def commutant(generators: Sequence[Morphism], ambient: BlockAlgebra,
              rng: np.random.Generator | None = None) -> OperatorSpace:
    """Commutant inside ``ambient`` of the *-algebra generated by ``generators``.

    Generators are closed under adjoints before solving, which is the
    relevant notion for the centralizers of subalgebras.
    """
    rng = rng or np.random.default_rng(0)
    sectors = ambient.sectors
    rows = []
    offset = 0
    for r, n in sectors:
        sub = block_commutant([g.blocks[r] for g in generators], n, rng)
        full = np.zeros((sub.shape[0], ambient.dim), dtype=complex)
        full[:, offset:offset + n * n] = sub
        rows.append(full)
        offset += n * n
    vecs = np.vstack(rows) if rows else np.zeros((0, ambient.dim))
    return OperatorSpace(ambient, vecs)


def _null_of_constraints(basis: list[Morphism], maps: list[Callable[[Morphism], np.ndarray]],
                         cutoff: float = NULL_CUTOFF) -> np.ndarray:
    """Coefficient vectors c with ``sum_i c_i map(basis_i) = 0`` for every map.

    Constraints are accumulated as the R factor of a running QR, so memory
    stays at ``len(basis)^2``.
    """
    k = len(basis)
    R = np.zeros((0, k), dtype=complex)
    for fmap in maps:
        cols = np.stack([fmap(b) for b in basis], axis=1)
        stacked = np.vstack([R, cols])
        R = np.linalg.qr(stacked, mode="r")
        R = R[:k]
    if R.shape[0] == 0:
        return np.eye(k, dtype=complex)
    _, s, Vh = np.linalg.svd(R, full_matrices=True)
    smax = max(s.max(), 1e-300) if s.size else 1.0
    rank = int(np.sum(s > cutoff * smax))
    return Vh[rank:].conj().T


def haag_check(family: ChainFamily, start: int, length: int, n: int,
               rng: np.random.Generator | None = None, tolerance: float = 1e-9) -> list[dict]:
    """Finite-level Haag duality for the interval ``[start, start + length)``.

    The relative commutant of the complement is computed inside level n,
    with the complement padded by one extra site beyond each unbounded end
    of the truncation (the left end of a module chain is a true boundary).
    The result is compared with the interval algebra by dimension and
    mutual containment.
    """
    rng = rng or np.random.default_rng(0)
    calc = family.calc
    amb = family.algebra(n)
    word = family.word(n)
    if start < 0 or start + length > n or length < 1:
        raise CategoryError("interval outside the truncation")
    if family.head and start != 0:
        raise CategoryError("boundary Haag check needs an interval containing the boundary site")
    # generators of the unpadded complement at level n
    gens: list[Morphism] = []
    left_len = start
    right_start, right_len = start + length, n - start - length
    for _ in range(2):
        if left_len:
            gens.append(family.local_random(n, 0, left_len, rng))
        if right_len:
            gens.append(family.local_random(n, right_start, right_len, rng))
    comm = commutant(gens, amb, rng) if gens else amb.full_space()
    basis = comm.elements()
    maps = []
    # right padding: x (x) id_X must commute with End of sites right_start..n at level n+1
    big = family.algebra(n + 1)
    for _ in range(2):
        g = family.local_random(n + 1, right_start, n + 1 - right_start, rng)
        maps.append(lambda b, g=g: (g @ include_element(b, family, n, n + 1)
                                    - include_element(b, family, n, n + 1) @ g).vector())
    if not family.head:
        # left padding: id_X (x) x must commute with End of sites 0..start at level n+1
        for _ in range(2):
            g = family.local_random(n + 1, 0, start + 1, rng)
            maps.append(lambda b, g=g: (g @ include_element(b, family, n, n + 1, left=1)
                                        - include_element(b, family, n, n + 1, left=1) @ g).vector())
    del big
    coeffs = _null_of_constraints(basis, maps)
    vecs = (coeffs.T @ np.stack([b.vector() for b in basis])) if basis else np.zeros((0, amb.dim))
    Z = OperatorSpace(amb, vecs)
    # interval algebra at level n
    sub = word[start:start + length]
    head = family.head
    loc = [family.local(n, start, m) for m in calc.basis(sub, sub, head)]
    local_space = OperatorSpace(amb, np.stack([x.vector() for x in loc]))
    expected = calc.hom_dim(sub, sub, head)
    res = max(Z.contains_space(local_space), local_space.contains_space(Z))
    tag = f"haag[{start}:{start + length}]@n={n}"
    return [int_item(f"{tag}.dim", expected, Z.dim),
            item(f"{tag}.containment", res, tolerance)]


# ----------------------------------------------------------------------
# DHR truncations
# ----------------------------------------------------------------------

@dataclass
class CenterObject:
    """Object of the Drinfeld center: underlying object plus half-braidings.

    ``half_braiding[x]`` is a unitary ``((Z,), (x,)) -> ((x,), (Z,))`` for each
    simple x, where ``Z`` is the underlying object.
    """

    calc: Calculus
    Z: tuple
    half_braiding: dict[int, Morphism]
    name: str = ""

    def over(self, Y: tuple) -> Morphism:
        """``e_z(Y) : (Z, Y) -> (Y, Z)`` for a single (possibly reducible) object."""
        calc = self.calc
        out = calc.zeros((self.Z, Y), (Y, self.Z))
        for i, y in enumerate(Y):
            inc = _inclusion(calc, Y, i)
            e = self.half_braiding[y]
            term = calc.tensor(inc, calc.identity((self.Z,))) @ e @ calc.tensor(calc.identity((self.Z,)), inc.dag)
            out = out + term
        return out

    def over_word(self, word: tuple) -> Morphism:
        """``e_z`` past a whole word, ``(Z,) + word -> word + (Z,)``."""
        calc = self.calc
        if not word:
            return calc.identity((self.Z,))
        out = calc.extend(self.over(word[0]), right=word[1:])
        for k in range(1, len(word)):
            step = calc.extend(self.over(word[k]), left=word[:k], right=word[k + 1:])
            out = step @ out
        return out


def _inclusion(calc: Calculus, Y: tuple, i: int) -> Morphism:
    """Inclusion ``((Y[i],),) -> ((Y,),)`` of one summand."""
    y = Y[i]
    m = calc.zeros(((y,),), (Y,))
    m.blocks[y][calc.tree_index((Y,))[y][((i,), (y,))], 0] = 1.0
    return m


@dataclass
class FunctorDatum:
    """Module endofunctor of the regular module: identity or ``g (x) -``."""

    kind: str = "identity"
    simple: int = 0


@dataclass
class DHRTruncation:
    """Level-n truncation ``Y_n = Hom(word, word (x) Z)`` (or ``Hom(word, g word)``).

    Left action ``a . eta = (a (x) id) eta``, right action ``eta . a = eta a``,
    inner product ``<eta|xi> = eta^dag xi``.
    """

    family: ChainFamily
    n: int
    datum: object
    dom: tuple
    cod: tuple

    @property
    def calc(self) -> Calculus:
        return self.family.calc

    def space_dim(self) -> int:
        return self.calc.hom_dim(self.dom, self.cod, self.family.head)

    def lift(self, a: Morphism) -> Morphism:
        """Image of an algebra element acting on the codomain."""
        calc = self.calc
        if isinstance(self.datum, CenterObject):
            return calc.extend(a, right=(self.datum.Z,))
        if self.datum.kind == "identity":
            return a
        return calc.tensor(calc.identity(((self.datum.simple,),)), a)

    def left(self, a: Morphism, eta: Morphism) -> Morphism:
        return self.lift(a) @ eta

    def right(self, eta: Morphism, a: Morphism) -> Morphism:
        return eta @ a

    def inner(self, eta: Morphism, xi: Morphism) -> Morphism:
        return eta.dag @ xi

    def random(self, rng: np.random.Generator) -> Morphism:
        return self.calc.random(self.dom, self.cod, rng, self.family.head)


def dhr_truncation(family: ChainFamily, datum, n: int) -> DHRTruncation:
    """Build ``Y_n`` for a center object (plain chain) or a functor datum (regular module chain)."""
    word = family.word(n)
    if isinstance(datum, CenterObject):
        if family.head:
            raise CategoryError("center objects act on the plain chain")
        return DHRTruncation(family, n, datum, word, word + (datum.Z,))
    if isinstance(datum, FunctorDatum):
        if family.head:
            raise CategoryError("functor data act on the regular module chain (plain words)")
        if datum.kind == "identity":
            return DHRTruncation(family, n, datum, word, word)
        if datum.kind == "left":
            return DHRTruncation(family, n, datum, word, ((datum.simple,),) + word)
    raise CategoryError("unsupported DHR datum")


def localized_basis(trunc: DHRTruncation, site: int) -> list[Morphism]:
    """Projective basis of ``Y_n`` localized at one site.

    For a center object the basis comes from the summand isometries
    ``b_j : X -> X (x) Z`` at ``site``, transported to the right end by the
    half-braiding. For ``g (x) -`` the isometries act at the first site.
    Returns an empty list when the partition of unity cannot be completed.
    """
    calc = trunc.calc
    fam = trunc.family
    word = fam.word(trunc.n)
    if isinstance(trunc.datum, CenterObject):
        z = trunc.datum
        obj = word[site]
        bs = summand_isometries(calc, obj, obj, z.Z)
        out = []
        for b in bs:
            placed = calc.extend(b, left=word[:site], right=word[site + 1:])
            move = calc.extend(z.over_word(word[site + 1:]), left=word[:site + 1])
            out.append(move @ placed)
        return out
    if trunc.datum.kind == "identity":
        return [calc.identity(word)]
    if site != 0:
        raise CategoryError("left multiplication is localized at the first site")
    g = (trunc.datum.simple,)
    obj = word[0]
    out = []
    for b in summand_isometries_left(calc, obj, g):
        out.append(calc.extend(b, right=word[1:]))
    return out


def summand_isometries(calc: Calculus, src: tuple, tgt: tuple, Z: tuple) -> list[Morphism]:
    """Partial isometries ``(src,) -> (tgt, Z)``, one per summand of ``tgt (x) Z``.

    Each summand ``t (x) z -> r`` is matched with the first copy of ``r`` in
    ``src``; the family satisfies ``sum b b^dag = 1`` iff every channel occurs
    in ``src``.
    """
    out = []
    idx = calc.tree_index((tgt, Z))
    for r, trees in calc.trees((tgt, Z)).items():
        if r not in src:
            continue
        i = src.index(r)
        for t in trees:
            m = calc.zeros(((src),), (tgt, Z))
            m.blocks[r][idx[r][t], calc.tree_index((src,))[r][((i,), (r,))]] = 1.0
            out.append(m)
    return out


def summand_isometries_left(calc: Calculus, obj: tuple, g: tuple) -> list[Morphism]:
    """Partial isometries ``(obj,) -> (g, obj)`` covering ``g (x) obj``."""
    out = []
    idx = calc.tree_index((g, obj))
    for r, trees in calc.trees((g, obj)).items():
        if r not in obj:
            continue
        i = obj.index(r)
        for t in trees:
            m = calc.zeros(((obj),), (g, obj))
            m.blocks[r][idx[r][t], calc.tree_index((obj,))[r][((i,), (r,))]] = 1.0
            out.append(m)
    return out

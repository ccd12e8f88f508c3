"""Morphism calculus in left-associated fusion-tree bases.

A *word* is a tuple of objects and an object is a tuple of simple indices
(its simple summands, repetition allowed), so ``X = 1 + tau`` is ``(0, 1)``.
A module word carries a module object in slot 0 (``head=True``) and category
objects after it.

Splitting vertices are isometries, which makes every tree basis orthonormal
for the form ``<s|t> = Tr(s^dag t) / d_root``; dagger is therefore the plain
conjugate transpose of each root block.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .category_core import (BraidingData, CategoryError, FusionCategoryData,
                            ModuleCategoryData)

__all__ = [
    "FusionTree",
    "Morphism",
    "Calculus",
    "LadderMorphism",
    "ladder_compose",
    "ladder_tensor",
]

Obj = tuple
Word = tuple


@dataclass(frozen=True)
class FusionTree:
    """Left-associated splitting tree.

    ``leaves`` are the simple labels on the legs, ``internal`` the running
    fused labels ``e_1 .. e_{n-2}`` (first leaf and root excluded).
    """

    root: int
    leaves: tuple[int, ...]
    internal: tuple[int, ...]


class _LRU(OrderedDict):
    def __init__(self, size: int):
        super().__init__()
        self.size = size

    def get(self, key, default=None):
        if key in self:
            self.move_to_end(key)
            return self[key]
        return default

    def put(self, key, value):
        self[key] = value
        self.move_to_end(key)
        while len(self) > self.size:
            self.popitem(last=False)


class Morphism:
    """Block matrix between the tree bases of ``dom`` and ``cod``.

    ``blocks[r]`` has shape ``(#cod trees at r, #dom trees at r)``; every root
    shared by both words has a block.
    """

    __slots__ = ("calc", "dom", "cod", "head", "blocks")

    def __init__(self, calc: "Calculus", dom: Word, cod: Word, blocks: dict[int, np.ndarray], head: bool = False):
        self.calc = calc
        self.dom = dom
        self.cod = cod
        self.head = head
        self.blocks = blocks

    # -- algebra -------------------------------------------------------
    def __matmul__(self, other: "Morphism") -> "Morphism":
        return self.calc.compose(self, other)

    def __add__(self, other: "Morphism") -> "Morphism":
        self._same_shape(other)
        return Morphism(self.calc, self.dom, self.cod,
                        {r: b + other.blocks[r] for r, b in self.blocks.items()}, self.head)

    def __sub__(self, other: "Morphism") -> "Morphism":
        return self + (-1.0) * other

    def __mul__(self, s: complex) -> "Morphism":
        return Morphism(self.calc, self.dom, self.cod, {r: s * b for r, b in self.blocks.items()}, self.head)

    __rmul__ = __mul__

    def __neg__(self) -> "Morphism":
        return (-1.0) * self

    @property
    def dag(self) -> "Morphism":
        return Morphism(self.calc, self.cod, self.dom, {r: b.conj().T for r, b in self.blocks.items()}, self.head)

    def _same_shape(self, other: "Morphism") -> None:
        if self.dom != other.dom or self.cod != other.cod or self.head != other.head:
            raise CategoryError("shape mismatch")

    # -- numerics ------------------------------------------------------
    def norm(self) -> float:
        """Frobenius norm of the block matrix (operator-agnostic size)."""
        return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks.values())))

    def opnorm(self) -> float:
        return max((np.linalg.norm(b, 2) for b in self.blocks.values() if b.size), default=0.0)

    def dist(self, other: "Morphism") -> float:
        self._same_shape(other)
        return max((float(np.abs(b - other.blocks[r]).max()) for r, b in self.blocks.items() if b.size), default=0.0)

    def vector(self) -> np.ndarray:
        """Concatenated block entries (roots ascending, row-major)."""
        if not self.blocks:
            return np.zeros(0, dtype=complex)
        return np.concatenate([self.blocks[r].ravel() for r in sorted(self.blocks)])

    def copy(self) -> "Morphism":
        return Morphism(self.calc, self.dom, self.cod, {r: b.copy() for r, b in self.blocks.items()}, self.head)

    def __repr__(self) -> str:
        shapes = {r: b.shape for r, b in self.blocks.items()}
        return f"Morphism({self.dom} -> {self.cod}, blocks={shapes})"


class Calculus:
    """Tree bases and basic morphisms for one category (and optional module).

    Parameters
    ----------
    cat : FusionCategoryData
    braiding : BraidingData, optional
        Needed for crossings.
    module : ModuleCategoryData, optional
        Needed for module words.
    """

    def __init__(self, cat: FusionCategoryData, braiding: BraidingData | None = None,
                 module: ModuleCategoryData | None = None, cache_size: int = 256):
        self.cat = cat
        self.braiding = braiding
        self.module = module
        self._trees: dict = {}
        self._index: dict = {}
        self._U = _LRU(cache_size)
        self._phase: np.ndarray | None = None

    # ------------------------------------------------------------------
    # trees
    # ------------------------------------------------------------------
    def _channels(self, x: int, s: int, head: bool) -> tuple[int, ...]:
        if head:
            return self.module.channels(x, s)
        return self.cat.ring.channels(x, s)

    def _admissible(self, a: int, c: int, r: int, head: bool) -> bool:
        if head:
            return bool(self.module.action[a, c, r])
        return bool(self.cat.N[a, c, r])

    def trees(self, word: Word, head: bool = False) -> dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]]:
        """Trees of ``word`` grouped by root.

        Each tree is ``(positions, labels)``: ``positions[k]`` is the summand
        chosen in slot k and ``labels[k]`` the fused label after slot k.
        """
        key = (word, head)
        hit = self._trees.get(key)
        if hit is not None:
            return hit
        if not word:
            if head:
                raise CategoryError("module word needs a head")
            out = {0: [((), ())]}
        elif len(word) == 1:
            out: dict[int, list] = {}
            for i, s in enumerate(word[0]):
                out.setdefault(s, []).append(((i,), (s,)))
        else:
            prev = self.trees(word[:-1], head)
            obj = word[-1]
            out = {}
            for x in sorted(prev):
                for i, s in enumerate(obj):
                    for r in self._channels(x, s, head):
                        out.setdefault(r, []).extend((pos + (i,), lab + (r,)) for pos, lab in prev[x])
        for r in out:
            out[r].sort(key=lambda t: (t[1], t[0]))
        out = dict(sorted(out.items()))
        self._trees[key] = out
        return out

    def tree_index(self, word: Word, head: bool = False) -> dict[int, dict]:
        key = (word, head)
        hit = self._index.get(key)
        if hit is None:
            hit = {r: {t: i for i, t in enumerate(ts)} for r, ts in self.trees(word, head).items()}
            self._index[key] = hit
        return hit

    def tree_basis(self, word: Word, root: int, head: bool = False) -> list[FusionTree]:
        """Deterministic list of trees of ``word`` with the given root."""
        out = []
        for pos, lab in self.trees(word, head).get(root, []):
            leaves = tuple(word[k][p] for k, p in enumerate(pos))
            out.append(FusionTree(root, leaves, lab[1:-1] if len(lab) > 1 else ()))
        return out

    def counts(self, word: Word, head: bool = False) -> dict[int, int]:
        return {r: len(ts) for r, ts in self.trees(word, head).items()}

    def hom_dim(self, a: Word, b: Word, head: bool = False) -> int:
        ca, cb = self.counts(a, head), self.counts(b, head)
        return sum(n * cb.get(r, 0) for r, n in ca.items())

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    def zeros(self, dom: Word, cod: Word, head: bool = False) -> Morphism:
        ca, cb = self.counts(dom, head), self.counts(cod, head)
        return Morphism(self, dom, cod, {r: np.zeros((cb[r], ca[r]), dtype=complex)
                                         for r in ca if r in cb}, head)

    def identity(self, word: Word, head: bool = False) -> Morphism:
        return Morphism(self, word, word, {r: np.eye(n, dtype=complex)
                                           for r, n in self.counts(word, head).items()}, head)

    def random(self, dom: Word, cod: Word, rng: np.random.Generator, head: bool = False) -> Morphism:
        m = self.zeros(dom, cod, head)
        for r, b in m.blocks.items():
            b[:] = rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape)
        return m

    def from_vector(self, dom: Word, cod: Word, vec: np.ndarray, head: bool = False) -> Morphism:
        m = self.zeros(dom, cod, head)
        k = 0
        for r in sorted(m.blocks):
            b = m.blocks[r]
            b[:] = np.asarray(vec[k:k + b.size]).reshape(b.shape)
            k += b.size
        return m

    def basis(self, dom: Word, cod: Word, head: bool = False) -> list[Morphism]:
        """Matrix-unit basis of Hom(dom, cod) in vector order."""
        n = self.hom_dim(dom, cod, head)
        return [self.from_vector(dom, cod, np.eye(n)[i], head) for i in range(n)]

    def vertex(self, left: Obj, right: Obj, root: int, head: bool = False) -> Morphism:
        """Isometric splitting vertex ``(root,) -> (left, right)``.

        ``left`` and ``right`` are single-simple objects.
        """
        dom = ((root,),)
        cod = (left, right)
        m = self.zeros(dom, cod, head)
        if root not in m.blocks:
            raise CategoryError("inadmissible vertex")
        m.blocks[root][:] = 1.0
        return m

    # ------------------------------------------------------------------
    # composition, dagger, tensor
    # ------------------------------------------------------------------
    def compose(self, g: Morphism, f: Morphism) -> Morphism:
        if f.cod != g.dom or f.head != g.head:
            raise CategoryError("shape mismatch in compose")
        blocks = {}
        for r, fb in f.blocks.items():
            gb = g.blocks.get(r)
            if gb is not None:
                blocks[r] = gb @ fb
        cod_counts = self.counts(g.cod, g.head)
        for r, n in self.counts(f.dom, f.head).items():
            if r in cod_counts and r not in blocks:
                blocks[r] = np.zeros((cod_counts[r], n), dtype=complex)
        return Morphism(self, f.dom, g.cod, blocks, f.head)

    def dagger(self, f: Morphism) -> Morphism:
        return f.dag

    def _pair_layout(self, A: Word, C: Word, head: bool):
        """Column layout of product pairs ``(ta, a, tc, c)`` at each root."""
        ta = self.counts(A, head)
        tc = self.counts(C, False)
        layout: dict[int, list] = {}
        for a in sorted(ta):
            for c in sorted(tc):
                rs = (self.module.channels(a, c) if head else self.cat.ring.channels(a, c))
                for r in rs:
                    layout.setdefault(r, []).append((a, c))
        offsets: dict[int, dict] = {}
        sizes: dict[int, int] = {}
        for r, groups in layout.items():
            off = 0
            offsets[r] = {}
            for a, c in groups:
                offsets[r][(a, c)] = off
                off += ta[a] * tc[c]
            sizes[r] = off
        return offsets, sizes

    def _fsym(self, a: int, b: int, c: int, d: int, e: int, f: int, head: bool) -> complex:
        if head:
            xs, ys, M = self.module.lmatrix(a, b, c, d)
            if e in xs and f in ys:
                return M[xs.index(e), ys.index(f)]
            return 0.0
        return self.cat.fsym(a, b, c, d, e, f)

    def change_of_basis(self, A: Word, C: Word, head: bool = False) -> dict[int, sp.csr_matrix]:
        """``U[r][t, p]``: tree t of ``A + C`` in terms of pair trees p.

        A tree of the concatenated word equals ``sum_p U[t, p] (v_{ac}^r)(ta (x) tc)``.
        All ``U[r]`` are unitary.
        """
        key = (A, C, head)
        hit = self._U.get(key)
        if hit is not None:
            return hit
        AC = A + C
        offsets, sizes = self._pair_layout(A, C, head)
        rows_counts = self.counts(AC, head)
        if not C:
            U = {}
            for r, n in rows_counts.items():
                U[r] = sp.identity(n, dtype=complex, format="csr")
            self._U.put(key, U)
            return U
        Cp, obj = C[:-1], C[-1]
        Up = self.change_of_basis(A, Cp, head)
        offp, _ = self._pair_layout(A, Cp, head)
        ta_counts = self.counts(A, head)
        treesAC = self.tree_index(AC, head)
        treesACp = self.trees(A + Cp, head)
        treesCp = self.trees(Cp, False)
        idxC = self.tree_index(C, False)
        tcp_counts = self.counts(Cp, False)
        data: dict[int, tuple[list, list, list]] = {r: ([], [], []) for r in rows_counts}
        for x, tlist in treesACp.items():
            Ux = Up[x].tocoo()
            for i, s in enumerate(obj):
                for r in self._channels(x, s, head):
                    rows = np.array([treesAC[r][(pos + (i,), lab + (r,))] for pos, lab in tlist])
                    # translate columns group by group
                    col_map_cache: dict = {}
                    for (a, cp), off in offp[x].items():
                        nta, ntcp = ta_counts[a], tcp_counts[cp]
                        for c in self.cat.ring.channels(cp, s):
                            if not self._admissible(a, c, r, head):
                                continue
                            fval = self._fsym(a, cp, s, r, x, c, head)
                            if fval == 0:
                                continue
                            ck = (a, cp, c)
                            if ck not in col_map_cache:
                                tcidx = np.array([idxC[c][(pos + (i,), lab + (c,))]
                                                  for pos, lab in treesCp[cp]], dtype=np.int64)
                                ntc = len(idxC[c])
                                newcols = offsets[r][(a, c)] + (np.arange(nta)[:, None] * ntc + tcidx[None, :]).ravel()
                                col_map_cache[ck] = newcols
                            newcols = col_map_cache[ck]
                            mask = (Ux.col >= off) & (Ux.col < off + nta * ntcp)
                            if not mask.any():
                                continue
                            d = data[r]
                            d[0].append(rows[Ux.row[mask]])
                            d[1].append(newcols[Ux.col[mask] - off])
                            d[2].append(Ux.data[mask] * fval)
        U = {}
        for r, n in rows_counts.items():
            rr, cc, vv = data[r]
            if rr:
                m = sp.coo_matrix((np.concatenate(vv), (np.concatenate(rr), np.concatenate(cc))),
                                  shape=(n, sizes[r])).tocsr()
                m.sum_duplicates()
            else:
                m = sp.csr_matrix((n, sizes.get(r, 0)), dtype=complex)
            U[r] = m
        self._U.put(key, U)
        return U

    def tensor(self, f: Morphism, g: Morphism) -> Morphism:
        """``f (x) g`` re-expressed in the left-associated basis."""
        if g.head:
            raise CategoryError("right tensor factor cannot carry a module head")
        head = f.head
        A, B, C, D = f.dom, f.cod, g.dom, g.cod
        UAC = self.change_of_basis(A, C, head)
        UBD = self.change_of_basis(B, D, head)
        offAC, _ = self._pair_layout(A, C, head)
        offBD, _ = self._pair_layout(B, D, head)
        cA, cB = self.counts(A, head), self.counts(B, head)
        cC, cD = self.counts(C), self.counts(D)
        out = self.zeros(A + C, B + D, head)
        for r, blk in out.blocks.items():
            if r not in UAC or r not in UBD:
                continue
            for (a, c), oac in offAC[r].items():
                if (a, c) not in offBD[r]:
                    continue
                fa = f.blocks.get(a)
                gc = g.blocks.get(c)
                if fa is None or gc is None or not fa.size or not gc.size:
                    continue
                obd = offBD[r][(a, c)]
                K = np.kron(fa, gc)
                left = UBD[r][:, obd:obd + cB[a] * cD[c]]
                right = UAC[r][:, oac:oac + cA[a] * cC[c]]
                # out += conj(left) K right^T
                tmp = (right @ K.T).T  # K right^T
                blk += left.conj() @ tmp
        return out

    def tensor_many(self, *fs: Morphism) -> Morphism:
        out = fs[0]
        for g in fs[1:]:
            out = self.tensor(out, g)
        return out

    def extend(self, f: Morphism, left: Word = (), right: Word = ()) -> Morphism:
        """``id_left (x) f (x) id_right`` (left must be empty for module words)."""
        out = f
        if left:
            if f.head:
                raise CategoryError("cannot pad a module word on the left")
            out = self.tensor(self.identity(left), out)
        if right:
            out = self.tensor(out, self.identity(right))
        return out

    # ------------------------------------------------------------------
    # braiding, duality, recoupling
    # ------------------------------------------------------------------
    def braid(self, P: Obj, Q: Obj, sign: int = 1) -> Morphism:
        """Crossing ``(P, Q) -> (Q, P)``; ``sign=+1`` is beta_{P,Q}, ``-1`` its inverse partner."""
        if self.braiding is None:
            raise CategoryError("no braiding data")
        dom, cod = (P, Q), (Q, P)
        m = self.zeros(dom, cod)
        idx = self.tree_index(cod)
        for r, ts in self.trees(dom).items():
            for col, (pos, lab) in enumerate(ts):
                i, j = pos
                a, b = P[i], Q[j]
                row = idx[r][((j, i), (b, r))]
                if sign > 0:
                    val = self.braiding.r(a, b, r)
                else:
                    val = np.conj(self.braiding.r(b, a, r))
                m.blocks[r][row, col] = val
        return m

    def dual_obj(self, P: Obj) -> Obj:
        return tuple(self.cat.dual[s] for s in P)

    def _phases(self) -> np.ndarray:
        """Phases ``z_a`` in ``coev_a = z_a sqrt(d_a) v^1_{a a*}`` making snakes trivial."""
        if self._phase is not None:
            return self._phase
        k = self.cat.rank
        z = np.ones(k, dtype=complex)
        self._phase = z
        for a in range(k):
            ad = self.cat.dual[a]
            if ad < a:
                continue
            s = self._snake_scalar(a)
            if ad == a:
                if abs(s - 1.0) > 1e-9:
                    raise CategoryError(f"simple {self.cat.ring.ids[a]} has nontrivial Frobenius-Schur phase {s}")
            else:
                z[ad] = np.conj(s) / abs(s)
        self._phase = z
        return z

    def _snake_scalar(self, a: int) -> complex:
        P = (a,)
        Pd = self.dual_obj(P)
        up = self.extend(self.coev(Pd, _raw=True), left=(P,))          # P -> P Pd P
        down = self.extend(self.coev(P, _raw=True).dag, right=(P,))   # P Pd P -> P
        return complex((down @ up).blocks[a][0, 0])

    def coev(self, P: Obj, _raw: bool = False) -> Morphism:
        """``coev_P : 1 -> P (x) P*`` with loop value ``d_P``."""
        z = np.ones(self.cat.rank) if _raw else self._phases()
        Pd = self.dual_obj(P)
        m = self.zeros((), (P, Pd))
        idx = self.tree_index((P, Pd))
        if 0 not in m.blocks:
            return m
        for i, s in enumerate(P):
            m.blocks[0][idx[0][((i, i), (s, 0))], 0] = z[s] * np.sqrt(self.cat.dims[s])
        return m

    def ev(self, P: Obj) -> Morphism:
        """``ev : P (x) P* -> 1``, the dagger of ``coev_P``."""
        return self.coev(P).dag

    def fuse_map(self, P: Obj, Q: Obj) -> tuple[Morphism, Obj]:
        """Unitary ``(P, Q) -> (M,)`` merging two slots into one object."""
        merged = []
        src = []
        for i, a in enumerate(P):
            for j, b in enumerate(Q):
                for y in self.cat.ring.channels(a, b):
                    merged.append(y)
                    src.append((i, j))
        M = tuple(merged)
        m = self.zeros((P, Q), (M,))
        idx = self.tree_index((P, Q))
        for k, (y, (i, j)) in enumerate(zip(M, src)):
            row = self.tree_index((M,))[y][((k,), (y,))]
            m.blocks[y][row, idx[y][((i, j), (P[i], y))]] = 1.0
        return m, M

    def recouple(self, f: Morphism, move: tuple) -> Morphism:
        """Postcompose ``f`` with an elementary move on its codomain.

        Moves
        -----
        ``("F", i)``
            fuse slots i, i+1 into one object (unitary).
        ``("R", i, sign)``
            crossing of slots i and i+1, slot i passing over for ``sign=+1``.
        ``("cup", i, P)``
            insert ``P, P*`` before slot i.
        ``("cap", i)``
            evaluate slots i, i+1 (slot i+1 must be the dual of slot i).
        """
        cod = f.cod
        n = len(cod)
        kind = move[0]
        lo = 1 if f.head else 0
        if kind == "F":
            i = move[1]
            if not (lo <= i < n - 1):
                raise CategoryError("F move out of range")
            fm, _ = self.fuse_map(cod[i], cod[i + 1])
            op = self._pad(fm, cod[:i], cod[i + 2:], f.head)
        elif kind == "R":
            i, sign = move[1], move[2]
            if not (lo <= i < n - 1):
                raise CategoryError("crossing out of range")
            op = self._pad(self.braid(cod[i], cod[i + 1], sign), cod[:i], cod[i + 2:], f.head)
        elif kind == "cup":
            i, P = move[1], tuple(move[2])
            if not (lo <= i <= n):
                raise CategoryError("cup out of range")
            op = self._pad(self.coev(P), cod[:i], cod[i:], f.head)
        elif kind == "cap":
            i = move[1]
            if not (lo <= i < n - 1) or cod[i + 1] != self.dual_obj(cod[i]):
                raise CategoryError("cap needs a dual pair")
            op = self._pad(self.ev(cod[i]), cod[:i], cod[i + 2:], f.head)
        else:
            raise CategoryError(f"unknown move {kind!r}")
        return op @ f

    def _pad(self, g: Morphism, left: Word, right: Word, head: bool) -> Morphism:
        if head:
            if not left:
                raise CategoryError("move touches the module slot")
            out = self.tensor(self.identity(left, head=True), g)
            return self.extend(out, right=right)
        return self.extend(g, left, right)

    # ------------------------------------------------------------------
    # traces and inner products
    # ------------------------------------------------------------------
    def root_dims(self, head: bool) -> np.ndarray:
        return self.module.trace_dims if head else self.cat.dims

    def trace(self, f: Morphism) -> complex:
        """Categorical (or module) trace ``sum_r d_r tr f_r``."""
        if f.dom != f.cod:
            raise CategoryError("trace needs an endomorphism")
        d = self.root_dims(f.head)
        return complex(sum(d[r] * np.trace(b) for r, b in f.blocks.items()))

    def leg_weights(self, word: Word, head: bool = False) -> dict[int, np.ndarray]:
        """``prod_legs d^{-1/2}`` for every tree, grouped by root."""
        out = {}
        cd = self.cat.dims
        md = self.module.trace_dims if head else None
        for r, ts in self.trees(word, head).items():
            w = np.ones(len(ts))
            for k, (pos, _) in enumerate(ts):
                val = 1.0
                for slot, p in enumerate(pos):
                    s = word[slot][p]
                    val *= md[s] if (head and slot == 0) else cd[s]
                w[k] = val ** -0.5
            out[r] = w
        return out

    def skein_inner_product(self, f: Morphism, g: Morphism) -> complex:
        """``(prod of leg dims)^{-1/2} Tr(f^dag g)`` summed leg label by leg label."""
        f._same_shape(g)
        d = self.root_dims(f.head)
        wA = self.leg_weights(f.dom, f.head)
        wB = self.leg_weights(f.cod, f.head)
        tot = 0j
        for r, fb in f.blocks.items():
            if fb.size:
                tot += d[r] * np.sum(np.conj(fb) * g.blocks[r] * wB[r][:, None] * wA[r][None, :])
        return complex(tot)

    def skein_gram(self, word: Word, head: bool = False) -> np.ndarray:
        """Gram matrix of the tree basis of ``Hom(1, word)`` (or ``Hom(head, word)``)."""
        dom = () if not head else (word[0],)
        basis = self.basis(dom, word, head)
        n = len(basis)
        G = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                G[i, j] = self.skein_inner_product(basis[i], basis[j])
        return G


# ----------------------------------------------------------------------
# ladder category
# ----------------------------------------------------------------------

@dataclass
class LadderMorphism:
    """Finite sum over rung labels of pairs of rail morphisms.

    ``terms[a] = [(left, right, coeff), ...]`` with ``left : x1 -> y1 (x) Phi(a)``
    and ``right : Phi(a) (x) x2 -> y2`` in the target category. Rung labels
    are simples of the enriching category; ``phi[a]`` is the simple they
    map to.
    """

    terms: dict[int, list[tuple[Morphism, Morphism, complex]]]

    def evaluate(self, calc: Calculus) -> Morphism:
        """Close the rungs: ``sum (id_y1 (x) right) (left (x) id_x2)``."""
        out = None
        for a, lst in self.terms.items():
            for left, right, c in lst:
                y1 = left.cod[:-1]
                x2 = right.dom[1:]
                m = calc.extend(right, left=y1) @ calc.extend(left, right=x2)
                out = c * m if out is None else out + c * m
        return out


def ladder_compose(calc: Calculus, phi: Sequence[int], fuse: FusionCategoryData,
                   upper: LadderMorphism, lower: LadderMorphism) -> LadderMorphism:
    """Stack ``upper`` on ``lower`` and resolve the two rungs into one.

    Both rungs are fused with the identity ``id_{b (x) a} = sum_c v v^dag``
    in isometric normalization; with trace-normalized vertices this is the
    ``sqrt(d_c / (d_a d_b))`` relation.
    """
    out: dict[int, list] = {}
    for a, lows in lower.terms.items():
        for b, ups in upper.terms.items():
            for c in fuse.ring.channels(b, a):
                pa, pb = (phi[a],), (phi[b],)
                if not calc.cat.N[phi[b], phi[a], phi[c]]:
                    raise CategoryError("rung labels do not fuse in the image")
                v = calc.vertex(pb, pa, phi[c])                          # (c) -> (b, a)
                for l1, r1, c1 in lows:
                    for l2, r2, c2 in ups:
                        # left rail: x1 -> y1 Phi(a) -> y1' Phi(b) Phi(a) -> y1' Phi(c)
                        y1 = l1.cod[:-1]
                        step = calc.extend(l2, right=(pa,)) @ l1
                        y1p = l2.cod[:-1]
                        left = calc.extend(v.dag, left=y1p) @ step
                        del y1
                        # right rail: Phi(c) x2 -> Phi(b) Phi(a) x2 -> Phi(b) y2 -> y2'
                        x2 = r1.dom[1:]
                        right = r2 @ calc.extend(r1, left=(pb,)) @ calc.extend(v, right=x2)
                        out.setdefault(c, []).append((left, right, c1 * c2))
    return LadderMorphism(out)


def ladder_tensor(calc: Calculus, phi: Sequence[int], fuse: FusionCategoryData,
                  half_braiding, outer: LadderMorphism, inner: LadderMorphism) -> LadderMorphism:
    """Nest ``inner`` inside ``outer``: rails ``(x1 x1', x2' x2)``.

    The outer rung crosses the inner left rail with the half-braiding
    ``e_{Phi(a), y}`` supplied as ``half_braiding(a, Y) -> Morphism (Phi(a), Y) -> (Y, Phi(a))``.
    """
    out: dict[int, list] = {}
    for a, outs in outer.terms.items():
        for b, ins in inner.terms.items():
            for c in fuse.ring.channels(a, b):
                pa, pb = (phi[a],), (phi[b],)
                v = calc.vertex(pa, pb, phi[c])        # (c) -> (a, b)
                for lo, ro, co in outs:
                    for li, ri, ci in ins:
                        y1 = lo.cod[:-1]
                        y1i = li.cod[:-1]
                        # x1 x1' -> y1 Phi(a) y1' Phi(b) -> y1 y1' Phi(a) Phi(b) -> y1 y1' Phi(c)
                        step = calc.tensor(lo, li)
                        cross = calc.extend(calc.extend(half_braiding(a, y1i), left=y1), right=(pb,))
                        left = calc.extend(v.dag, left=y1 + y1i) @ cross @ step
                        # Phi(c) x2' x2 -> Phi(a) Phi(b) x2' x2 -> Phi(a) y2' x2 -> y2' ... via inner then outer
                        x2i = ri.dom[1:]
                        x2 = ro.dom[1:]
                        y2i = ri.cod
                        inner_r = calc.extend(calc.extend(ri, left=(pa,)), right=x2)
                        back = calc.extend(half_braiding(a, y2i), right=x2)
                        outer_r = calc.extend(ro, left=y2i)
                        right = outer_r @ back @ inner_r @ calc.extend(v, right=x2i + x2)
                        out.setdefault(c, []).append((left, right, co * ci))
    return LadderMorphism(out)

"""Two-dimensional braided categorical nets.

A region is a finite set of sites ``(x, y)``. Its object is the tensor product
of the site objects in a chosen linear order; two orders are related by a
braid in which, at every crossing, the strand of the site with the larger
``(y, x)`` key passes over. Since over/under is decided by a fixed total order
on strands, the braids form a layered (contractible) family and the unitaries
satisfy the cocycle identity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra_net import BlockAlgebra
from .category_core import CategoryError
from .homspace import Calculus, Morphism

if TYPE_CHECKING:
    from .center_dhr import EnrichedChain

__all__ = [
    "Site",
    "rectangle",
    "linearize_region",
    "braid_between_orderings",
    "BraidedNet",
    "SectorSpace",
    "cone_decomposition",
    "cocycle_check",
    "enriched_net_algebra",
]

Site = tuple[int, int]


def rectangle(x0: int, y0: int, x1: int, y1: int) -> list[Site]:
    """Sites with ``x0 <= x < x1`` and ``y0 <= y < y1``."""
    return [(x, y) for y in range(y0, y1) for x in range(x0, x1)]


def _key(s: Site) -> tuple[int, int]:
    return (s[1], s[0])


def linearize_region(region: Iterable[Site]) -> list[Site]:
    """Row-major order: ascending y, then ascending x."""
    return sorted(set(region), key=_key)


def braid_between_orderings(ord1: Sequence[Site], ord2: Sequence[Site]) -> list[tuple[int, int]]:
    """Braid word taking ``ord1`` to ``ord2`` by bubble sort.

    Each generator ``(i, sign)`` swaps slots i and i+1; ``sign = +1`` when the
    strand in slot i has the larger key (it passes over), else ``-1``.
    """
    if sorted(ord1, key=_key) != sorted(ord2, key=_key) or len(set(ord1)) != len(ord1):
        raise CategoryError("orderings of different regions")
    target = {s: i for i, s in enumerate(ord2)}
    cur = list(ord1)
    word = []
    n = len(cur)
    for sweep in range(n):
        swapped = False
        for i in range(n - 1 - sweep):
            if target[cur[i]] > target[cur[i + 1]]:
                word.append((i, 1 if _key(cur[i]) > _key(cur[i + 1]) else -1))
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
                swapped = True
        if not swapped:
            break
    return word


@dataclass
class SectorSpace:
    """``K_x(region) = Hom(x -> X^region)`` with inner product ``tr(f^dag g)``."""

    x: int
    word: tuple
    calc: Calculus

    @property
    def dim(self) -> int:
        return self.calc.counts(self.word).get(self.x, 0)

    def onb(self) -> list[Morphism]:
        """Orthonormal basis for ``tr(f^dag g)``: trees scaled by ``d_x^{-1/2}``."""
        dom = (((self.x,),))
        out = []
        s = self.calc.cat.dims[self.x] ** -0.5
        for m in self.calc.basis(dom, self.word):
            out.append(m * s)
        return out

    def inner(self, f: Morphism, g: Morphism) -> complex:
        return self.calc.trace(f.dag @ g)

    def gram(self) -> np.ndarray:
        B = self.onb()
        return np.array([[self.inner(f, g) for g in B] for f in B])

    def matrix_units(self) -> list[list[Morphism]]:
        """``e_{fg} = d_x f g^dag`` for the orthonormal basis."""
        d = self.calc.cat.dims[self.x]
        B = self.onb()
        return [[(f @ g.dag) * d for g in B] for f in B]


@dataclass
class BraidedNet:
    """Net ``region -> End(X^region)`` over a braided category.

    ``assignment`` maps sites to objects; unassigned sites carry ``X``.
    """

    calc: Calculus
    X: tuple
    assignment: Mapping[Site, tuple] = field(default_factory=dict)
    _gen_cache: dict = field(default_factory=dict, repr=False)

    def obj(self, s: Site) -> tuple:
        return tuple(self.assignment.get(s, self.X))

    def word(self, order: Sequence[Site]) -> tuple:
        return tuple(self.obj(s) for s in order)

    def algebra(self, region: Iterable[Site]) -> BlockAlgebra:
        order = linearize_region(region)
        return BlockAlgebra(self.calc, self.word(order), name=f"net{len(order)}")

    def generator(self, word: tuple, i: int, sign: int) -> Morphism:
        return self._sparse_generator(word, i, sign)[0]

    def _sparse_generator(self, word: tuple, i: int, sign: int):
        key = (word, i, sign)
        hit = self._gen_cache.get(key)
        if hit is None:
            b = self.calc.braid(word[i], word[i + 1], sign)
            g = self.calc.extend(b, word[:i], word[i + 2:])
            hit = (g, {r: sp.csr_matrix(blk) for r, blk in g.blocks.items()})
            self._gen_cache[key] = hit
        return hit

    def braid_unitary(self, ord1: Sequence[Site], ord2: Sequence[Site]) -> Morphism:
        """Unitary ``X^ord1 -> X^ord2`` of the canonical braid."""
        cur = list(ord1)
        word = self.word(cur)
        u = self.calc.identity(word)
        blocks = u.blocks
        for i, sign in braid_between_orderings(ord1, ord2):
            _, sparse = self._sparse_generator(word, i, sign)
            blocks = {r: np.asarray(sparse[r] @ blk) for r, blk in blocks.items()}
            cur[i], cur[i + 1] = cur[i + 1], cur[i]
            word = self.word(cur)
        return Morphism(self.calc, u.dom, word, blocks)

    def include_region(self, x: Morphism, small: Iterable[Site], big: Iterable[Site]) -> Morphism:
        """Embed ``x`` on ``small`` into ``big``: tensor identities, then reorder by braiding."""
        s = linearize_region(small)
        b = linearize_region(big)
        if not set(s) <= set(b):
            raise CategoryError("region is not contained in the target")
        rest = [t for t in b if t not in set(s)]
        first = s + rest
        y = self.calc.extend(x, right=self.word(rest))
        u = self.braid_unitary(first, b)
        return u @ y @ u.dag

    def unit_isometry(self, order: Sequence[Site]) -> Morphism:
        word = self.word(order)
        m = self.calc.zeros((), word)
        if not word:
            m.blocks[0][0, 0] = 1.0
            return m
        pos = []
        for obj in word:
            if 0 not in obj:
                raise CategoryError("site object has no unit summand")
            pos.append(obj.index(0))
        m.blocks[0][self.calc.tree_index(word)[0][(tuple(pos), (0,) * len(word))], 0] = 1.0
        return m

    def state(self, x: Morphism, region: Iterable[Site]) -> complex:
        """``psi(x) = (i^region)^dag x i^region`` in row-major order."""
        i = self.unit_isometry(linearize_region(region))
        return complex((i.dag @ x @ i).blocks[0][0, 0])

    def sector_space(self, x: int, region: Iterable[Site]) -> SectorSpace:
        return SectorSpace(x, self.word(linearize_region(region)), self.calc)

    def supported_sectors(self, region: Iterable[Site]) -> list[int]:
        return sorted(r for r, n in self.calc.counts(self.word(linearize_region(region))).items() if n)


def cone_decomposition(net: BraidedNet, big: Iterable[Site], small: Iterable[Site]) -> dict:
    """Sector table ``x -> (dim K_x(small), dim K_{x*}(big \\ small))``.

    Consistency: ``sum_x dim K_x(small) dim K_{x*}(rest) = dim K_1(big)``.
    """
    b = linearize_region(big)
    s = linearize_region(small)
    if not set(s) <= set(b):
        raise CategoryError("sub-region not contained in region")
    rest = [t for t in b if t not in set(s)]
    calc = net.calc
    cs = calc.counts(net.word(s)) if s else {0: 1}
    cr = calc.counts(net.word(rest)) if rest else {0: 1}
    dual = calc.cat.dual
    rows = []
    total = 0
    for x in range(calc.cat.rank):
        a = cs.get(x, 0)
        c = cr.get(dual[x], 0)
        if a or c:
            rows.append({"x": x, "dim_small": a, "dim_rest": c})
        total += a * c
    unit = calc.counts(net.word(b)).get(0, 0) if b else 1
    return {"rows": rows, "sum": total, "unit_multiplicity": unit,
            "supported": sum(1 for r in rows if r["dim_small"] > 0)}


def cocycle_check(net: BraidedNet, region: Iterable[Site], rng: np.random.Generator,
                  n_random: int = 50, exhaustive_max: int = 4) -> dict:
    """Cocycle residuals ``|u(1->3) - u(2->3) u(1->2)|`` for ordering triples.

    Up to ``exhaustive_max`` sites every triple is checked. Beyond that the
    identity ``u(s->t) = U_t U_s^dag`` with ``U_s = u(c->s)`` is verified for
    every ordering s and every adjacent transposition t of s; since every
    word is a product of such steps this covers all triples. A sample of
    random triples is checked directly as well.
    """
    order = linearize_region(region)
    n = len(order)
    perms = [list(p) for p in itertools.permutations(order)]
    worst = 0.0
    checked = 0
    if n <= exhaustive_max:
        U = {}
        for i, p in enumerate(perms):
            for j, q in enumerate(perms):
                U[(i, j)] = net.braid_unitary(p, q)
        for i, j, k in itertools.product(range(len(perms)), repeat=3):
            lhs = U[(i, k)]
            rhs = U[(j, k)] @ U[(i, j)]
            worst = max(worst, lhs.dist(rhs))
            checked += 1
        return {"residual": worst, "triples": checked, "mode": "exhaustive"}
    base = order
    for p in perms:
        Up = net.braid_unitary(base, p)
        for i in range(n - 1):
            q = list(p)
            q[i], q[i + 1] = q[i + 1], q[i]
            Uq = net.braid_unitary(base, q)
            step = net.braid_unitary(p, q)
            worst = max(worst, Uq.dist(step @ Up))
            checked += 1
    for _ in range(n_random):
        a, b, c = (perms[int(t)] for t in rng.integers(len(perms), size=3))
        lhs = net.braid_unitary(a, c)
        rhs = net.braid_unitary(b, c) @ net.braid_unitary(a, b)
        worst = max(worst, lhs.dist(rhs))
        checked += 1
    return {"residual": worst, "triples": checked, "mode": "adjacent+random"}


def enriched_net_algebra(region: Iterable[Site], chain: "EnrichedChain", boundary_row: int = 0) -> BlockAlgebra:
    """``End(X^{boundary sites} (x) Phi(A)^{bulk sites})`` for a region meeting a boundary line.

    Sites on ``boundary_row`` carry the boundary generator ``X`` and come
    first (ordered along the line); the remaining sites carry the image
    ``Phi(A)`` of the bulk generator. With trivial enrichment the bulk sites
    carry the unit and drop out.
    """
    sites = linearize_region(region)
    nb = sum(1 for s in sites if s[1] == boundary_row)
    nk = len(sites) - nb
    if any(s[1] < boundary_row for s in sites):
        raise CategoryError("region crosses the boundary line")
    word = chain.word(nb, nk)
    return BlockAlgebra(chain.calc, word, name=f"enriched{nb}+{nk}")

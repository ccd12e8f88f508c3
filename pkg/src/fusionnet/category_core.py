"""Static categorical data: fusion rings, F/R-symbols, module categories.

Everything here is multiplicity free. Simples are indexed ``0..k-1`` with the
unit at index 0. F-symbols use the convention

    ((a b)_e c)_d = sum_f F[a,b,c,d][e,f] (a (b c)_f)_d

and R-symbols the convention ``beta_{a,b} v^c_{ab} = R[a,b,c] v^c_{ba}``,
where ``v^c_{ab}`` is an isometric splitting vertex ``c -> a (x) b``.
Module categories are right module categories with mixed associator
``((m a)_x b)_n = sum_y L[m,a,b,n][x,y] (m (a b)_y)_n``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

__all__ = [
    "CategoryError",
    "SimpleLabel",
    "FusionRing",
    "FusionCategoryData",
    "BraidingData",
    "ModuleCategoryData",
    "CentralFunctorData",
    "quantum_dims",
    "global_dim",
    "pentagon_residual",
    "hexagon_residuals",
    "f_unitarity_residual",
    "pivotal_residual",
    "mixed_pentagon_residual",
    "validate_axioms",
    "load_category",
    "load_module",
    "category_to_document",
    "builtin_catalog",
    "normalize_module_trace",
    "w_bubble",
    "deligne_product",
]

PHI = (1.0 + np.sqrt(5.0)) / 2.0


class CategoryError(ValueError):
    """Raised for malformed or inconsistent categorical data."""


@dataclass(frozen=True)
class SimpleLabel:
    id: str
    is_unit_summand: bool = False


@dataclass(frozen=True)
class FusionRing:
    """Based ring with fusion tensor ``N[a, b, c]`` = mult. of c in a (x) b.

    Parameters
    ----------
    simples : tuple of SimpleLabel
        Index 0 must be the unit.
    N : ndarray of int, shape (k, k, k)
    dual : tuple of int
        Involution ``a -> a*``.
    """

    simples: tuple[SimpleLabel, ...]
    N: np.ndarray
    dual: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.simples)

    @property
    def unit(self) -> int:
        return 0

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.simples)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        try:
            return self.ids.index(label)
        except ValueError as exc:
            raise CategoryError(f"unknown simple {label!r}") from exc

    def channels(self, a: int, b: int) -> tuple[int, ...]:
        return self._channels[a][b]

    @cached_property
    def _channels(self) -> list[list[tuple[int, ...]]]:
        k = self.rank
        return [[tuple(int(c) for c in np.nonzero(self.N[a, b])[0]) for b in range(k)]
                for a in range(k)]

    def fusion_matrix(self, a: int) -> np.ndarray:
        """Left multiplication matrix ``M[b, c] = N[a, b, c]``."""
        return np.asarray(self.N[a], dtype=float)

    def is_multiplicity_free(self) -> bool:
        return bool(np.all(self.N <= 1))

    def check(self) -> None:
        """Raise ``CategoryError`` if a ring axiom fails."""
        N = self.N
        k = self.rank
        if not self.simples[0].is_unit_summand:
            raise CategoryError("simple 0 must be the unit")
        eye = np.eye(k, dtype=int)
        if not (np.array_equal(N[0], eye) and np.array_equal(N[:, 0, :], eye)):
            raise CategoryError("unit axiom violated")
        d = self.dual
        if sorted(d) != list(range(k)) or any(d[d[a]] != a for a in range(k)):
            raise CategoryError("dual is not an involution")
        for a in range(k):
            if N[a, d[a], 0] < 1:
                raise CategoryError(f"unit not contained in {self.ids[a]} (x) dual")
        lhs = np.einsum("abe,ecd->abcd", N, N)
        rhs = np.einsum("bcf,afd->abcd", N, N)
        if not np.array_equal(lhs, rhs):
            raise CategoryError("fusion ring is not associative")


@dataclass
class FusionCategoryData:
    """Fusion ring together with F-symbols.

    ``F`` maps ``(a, b, c, d, e, f)`` to a complex number. Tuples with a unit
    leg are identity in the chosen gauge and need not be stored; missing
    ``1 x 1`` F-matrices default to 1.
    """

    name: str
    ring: FusionRing
    F: dict[tuple[int, ...], complex]
    dims_override: np.ndarray | None = None
    _fcache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return self.ring.rank

    @property
    def N(self) -> np.ndarray:
        return self.ring.N

    @property
    def dual(self) -> tuple[int, ...]:
        return self.ring.dual

    @cached_property
    def dims(self) -> np.ndarray:
        if self.dims_override is not None:
            return np.asarray(self.dims_override, dtype=float)
        return quantum_dims(self.ring)

    @property
    def global_dim(self) -> float:
        return global_dim(self)

    def fmatrix(self, a: int, b: int, c: int, d: int) -> tuple[tuple[int, ...], tuple[int, ...], np.ndarray]:
        """Return ``(es, fs, M)`` with ``M[i, j] = F[a,b,c,d][es[i], fs[j]]``."""
        key = (a, b, c, d)
        hit = self._fcache.get(key)
        if hit is not None:
            return hit
        N = self.N
        es = tuple(e for e in self.ring.channels(a, b) if N[e, c, d])
        fs = tuple(f for f in self.ring.channels(b, c) if N[a, f, d])
        M = np.zeros((len(es), len(fs)), dtype=complex)
        if 0 in (a, b, c) and es:
            # unit leg: both bases are labelled by the same single channel
            M[:] = np.eye(len(es))
        else:
            found = False
            for i, e in enumerate(es):
                for j, f in enumerate(fs):
                    val = self.F.get((a, b, c, d, e, f))
                    if val is not None:
                        M[i, j] = val
                        found = True
            if not found and es:
                if len(es) == 1 and len(fs) == 1:
                    M[0, 0] = 1.0
                else:
                    raise CategoryError(
                        f"missing F-matrix for {[self.ring.ids[x] for x in key]}")
        if len(es) != len(fs):
            raise CategoryError("F-matrix is not square")
        out = (es, fs, M)
        self._fcache[key] = out
        return out

    def fsym(self, a: int, b: int, c: int, d: int, e: int, f: int) -> complex:
        es, fs, M = self.fmatrix(a, b, c, d)
        try:
            return M[es.index(e), fs.index(f)]
        except ValueError:
            return 0.0

    def perturbed(self, key: tuple[int, ...], factor: complex = -1.0) -> "FusionCategoryData":
        """Copy with one explicit F entry multiplied by ``factor``."""
        F = dict(self.F)
        if key not in F:
            F[key] = self.fsym(*key)
        F[key] = F[key] * factor
        return FusionCategoryData(self.name + "*", self.ring, F, self.dims_override)


@dataclass
class BraidingData:
    """R-symbols ``R[(a, b, c)]`` for a multiplicity-free braided category."""

    R: dict[tuple[int, int, int], complex]

    def r(self, a: int, b: int, c: int) -> complex:
        return self.R.get((a, b, c), 1.0 if (a == 0 or b == 0) else 0.0)

    def monodromy(self, a: int, b: int, c: int) -> complex:
        """Scalar of the double braiding ``beta_{b,a} beta_{a,b}`` on channel c."""
        return self.r(a, b, c) * self.r(b, a, c)


@dataclass
class ModuleCategoryData:
    """Right module category over a fusion category.

    ``action[m, a, n]`` is the multiplicity of n in m <| a, ``L`` holds the mixed
    associator, ``trace_dims`` the module trace ``d_m``.
    """

    name: str
    cat: FusionCategoryData
    simples: tuple[str, ...]
    action: np.ndarray
    L: dict[tuple[int, ...], complex]
    trace_dims: np.ndarray
    _lcache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return len(self.simples)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        return self.simples.index(label)

    def channels(self, m: int, a: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.nonzero(self.action[m, a])[0])

    def lmatrix(self, m: int, a: int, b: int, n: int) -> tuple[tuple[int, ...], tuple[int, ...], np.ndarray]:
        key = (m, a, b, n)
        hit = self._lcache.get(key)
        if hit is not None:
            return hit
        A = self.action
        xs = tuple(x for x in self.channels(m, a) if A[x, b, n])
        ys = tuple(y for y in self.cat.ring.channels(a, b) if A[m, y, n])
        M = np.zeros((len(xs), len(ys)), dtype=complex)
        if (a == 0 or b == 0) and xs:
            M[:] = np.eye(len(xs))
        else:
            found = False
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    val = self.L.get((m, a, b, n, x, y))
                    if val is not None:
                        M[i, j] = val
                        found = True
            if not found and xs:
                if len(xs) == 1 and len(ys) == 1:
                    M[0, 0] = 1.0
                else:
                    raise CategoryError("missing L-matrix")
        if len(xs) != len(ys):
            raise CategoryError("L-matrix is not square")
        out = (xs, ys, M)
        self._lcache[key] = out
        return out

    def components(self) -> list[list[int]]:
        """Indecomposable summands as lists of module simples."""
        k = self.rank
        adj = (self.action.sum(axis=1) > 0)
        seen: set[int] = set()
        comps = []
        for start in range(k):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                m = stack.pop()
                comp.append(m)
                for n in range(k):
                    if (adj[m, n] or adj[n, m]) and n not in seen:
                        seen.add(n)
                        stack.append(n)
            comps.append(sorted(comp))
        return comps

    def with_trace_dims(self, dims: np.ndarray) -> "ModuleCategoryData":
        return ModuleCategoryData(self.name, self.cat, self.simples, self.action,
                                  self.L, np.asarray(dims, dtype=float))


@dataclass
class CentralFunctorData:
    """Braided central functor from a braided category A into Z(X).

    ``phi[a]`` is the simple of X that the simple a of A maps to (only
    functors sending simples to simples are supported). ``half_braiding[a][x]``
    is the scalar ``e_{Phi(a), x}`` on each fusion channel, i.e. a dict
    ``{(x, c): value}`` with ``c`` a channel of ``Phi(a) (x) x``.
    """

    name: str
    source: FusionCategoryData
    source_braiding: BraidingData
    target: FusionCategoryData
    phi: tuple[int, ...]
    half_braiding: dict[int, dict[tuple[int, int], complex]]

    def e(self, a: int, x: int, c: int) -> complex:
        return self.half_braiding[a].get((x, c), 0.0)


# ----------------------------------------------------------------------
# dimensions
# ----------------------------------------------------------------------

def quantum_dims(ring: FusionRing) -> np.ndarray:
    """Perron-Frobenius dimensions of a connected fusion ring.

    The fusion matrix of the sum of all simples is primitive, so its top
    eigenvector is the unique positive character.
    """
    lhs = np.einsum("abe,ecd->abcd", ring.N, ring.N)
    rhs = np.einsum("bcf,afd->abcd", ring.N, ring.N)
    if not np.array_equal(lhs, rhs):
        raise CategoryError("fusion ring is not associative")
    M = ring.N.sum(axis=0).astype(float)  # M[b, c] = sum_a N[a, b, c]
    w, v = np.linalg.eig(M.T)
    top = int(np.argmax(w.real))
    vec = np.abs(v[:, top].real)
    return vec / vec[0]


def global_dim(cat: FusionCategoryData) -> float:
    """``D = sum_a d_a^2``."""
    return float(np.sum(cat.dims ** 2))


# ----------------------------------------------------------------------
# residuals
# ----------------------------------------------------------------------

def pentagon_residual(cat: FusionCategoryData) -> float:
    """Largest pentagon defect over all admissible labels."""
    N = cat.N
    k = cat.rank
    F = cat.fsym
    ch = cat.ring.channels
    worst = 0.0
    for a, b, c, d in itertools.product(range(k), repeat=4):
        for f in ch(a, b):
            for g in ch(f, c):
                for e in ch(g, d):
                    for l in ch(c, d):
                        for kk in ch(b, l):
                            if not N[a, kk, e]:
                                continue
                            lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, kk)
                            rhs = 0j
                            for h in ch(b, c):
                                if N[a, h, g] and N[h, d, kk]:
                                    rhs += F(a, b, c, g, f, h) * F(a, h, d, e, g, kk) * F(b, c, d, kk, h, l)
                            worst = max(worst, abs(lhs - rhs))
    return worst


def hexagon_residuals(cat: FusionCategoryData, braiding: BraidingData) -> tuple[float, float]:
    """Defects of the two hexagon equations (second uses the inverse braiding)."""
    N = cat.N
    k = cat.rank
    F = cat.fsym
    ch = cat.ring.channels
    out = []
    for inverse in (False, True):
        if inverse:
            def R(x, y, z):
                return np.conj(braiding.r(y, x, z))
        else:
            R = braiding.r
        worst = 0.0
        for a, b, c in itertools.product(range(k), repeat=3):
            for d in range(k):
                fs = [f for f in ch(b, c) if N[a, f, d]]
                hs = [h for h in ch(b, c) if N[h, a, d]]
                es = [e for e in ch(a, b) if N[e, c, d]]
                gs = [g for g in ch(a, c) if N[b, g, d]]
                for f in fs:
                    for h in hs:
                        lhs = R(a, f, d) if h == f else 0.0
                        rhs = 0j
                        for e in es:
                            for g in gs:
                                rhs += (np.conj(F(a, b, c, d, e, f)) * R(a, b, e)
                                        * F(b, a, c, d, e, g) * R(a, c, g) * np.conj(F(b, c, a, d, h, g)))
                        worst = max(worst, abs(lhs - rhs))
        out.append(worst)
    return out[0], out[1]


def f_unitarity_residual(cat: FusionCategoryData) -> float:
    k = cat.rank
    worst = 0.0
    for a, b, c, d in itertools.product(range(k), repeat=4):
        es, fs, M = cat.fmatrix(a, b, c, d)
        if es:
            worst = max(worst, float(np.abs(M @ M.conj().T - np.eye(len(es))).max()))
    return worst


def pivotal_residual(cat: FusionCategoryData) -> float:
    """Dual/pivotal consistency.

    Checks ``d_a = d_{a*}`` and that ``d_a F[a,a*,a,a][1,1]`` has modulus one
    (the Frobenius-Schur phase is well defined).
    """
    worst = 0.0
    d = cat.dims
    for a in range(cat.rank):
        ad = cat.dual[a]
        worst = max(worst, abs(d[a] - d[ad]))
        worst = max(worst, abs(abs(d[a] * cat.fsym(a, ad, a, a, 0, 0)) - 1.0))
    return worst


def mixed_pentagon_residual(mod: ModuleCategoryData) -> float:
    """Pentagon defect with the first leg in the module."""
    cat = mod.cat
    N = cat.N
    A = mod.action
    ch = cat.ring.channels
    F = cat.fsym

    def L(m, a, b, n, x, y):
        xs, ys, M = mod.lmatrix(m, a, b, n)
        if x in xs and y in ys:
            return M[xs.index(x), ys.index(y)]
        return 0.0

    worst = 0.0
    k, km = cat.rank, mod.rank
    for m in range(km):
        for a, b, c in itertools.product(range(k), repeat=3):
            for x in mod.channels(m, a):
                for y in mod.channels(x, b):
                    for n in mod.channels(y, c):
                        for l in ch(b, c):
                            for kk in ch(a, l):
                                if not A[m, kk, n]:
                                    continue
                                lhs = L(x, b, c, n, y, l) * L(m, a, l, n, x, kk)
                                rhs = 0j
                                for h in ch(a, b):
                                    if A[m, h, y] and N[h, c, kk]:
                                        rhs += L(m, a, b, y, x, h) * L(m, h, c, n, y, kk) * F(a, b, c, kk, h, l)
                                worst = max(worst, abs(lhs - rhs))
    return worst


def validate_axioms(cat: FusionCategoryData, braiding: BraidingData | None = None,
                    tolerance: float = 1e-10) -> list[dict[str, Any]]:
    """Residual report for a category (and optional braiding).

    Failures are report items, never exceptions.
    """
    from .reports import item

    items = [
        item("category.pentagon", pentagon_residual(cat), tolerance),
        item("category.f_unitarity", f_unitarity_residual(cat), tolerance),
        item("category.pivotal", pivotal_residual(cat), tolerance),
    ]
    d = cat.dims
    char = max((abs(d[a] * d[b] - np.dot(cat.N[a, b], d))
                for a in range(cat.rank) for b in range(cat.rank)), default=0.0)
    items.append(item("category.dims_character", float(char), tolerance))
    if braiding is not None:
        h1, h2 = hexagon_residuals(cat, braiding)
        items.append(item("category.hexagon", h1, tolerance))
        items.append(item("category.hexagon_inverse", h2, tolerance))
        unit = max((abs(abs(v) - 1.0) for v in braiding.R.values()), default=0.0)
        items.append(item("category.r_unit_modulus", unit, tolerance))
    return items


# ----------------------------------------------------------------------
# documents
# ----------------------------------------------------------------------

def _complex(entry: Mapping[str, Any]) -> complex:
    return complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))


def _read_doc(source: str | Path | Mapping[str, Any]) -> dict[str, Any]:
    if isinstance(source, Mapping):
        return dict(source)
    text = Path(source).read_text() if Path(str(source)).exists() else str(source)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CategoryError(f"schema violation: {exc}") from exc


def load_category(source: str | Path | Mapping[str, Any]) -> tuple[FusionCategoryData, BraidingData | None]:
    """Load a category document (JSON text, path or parsed mapping)."""
    doc = _read_doc(source)
    for key in ("name", "simples", "fusion"):
        if key not in doc:
            raise CategoryError(f"schema violation: missing {key!r}")
    raw = doc["simples"]
    ids = [s["id"] if isinstance(s, Mapping) else str(s) for s in raw]
    units = [bool(s.get("unit", False)) if isinstance(s, Mapping) else False for s in raw]
    if len(set(ids)) != len(ids):
        raise CategoryError("schema violation: duplicate simple ids")
    if not any(units):
        units[0] = True
    u = units.index(True)
    if sum(units) > 1:
        raise CategoryError("multifusion data (several unit summands) is not supported")
    order = [u] + [i for i in range(len(ids)) if i != u]
    ids = [ids[i] for i in order]
    pos = {s: i for i, s in enumerate(ids)}
    k = len(ids)

    def ix(label: Any) -> int:
        try:
            return pos[str(label)]
        except KeyError as exc:
            raise CategoryError(f"schema violation: unknown simple {label!r}") from exc

    N = np.zeros((k, k, k), dtype=int)
    for entry in doc["fusion"]:
        N[ix(entry["a"]), ix(entry["b"]), ix(entry["c"])] = int(entry.get("n", 1))
    # the unit acts trivially whether or not it was spelled out
    for a in range(k):
        if N[0, a].sum() == 0:
            N[0, a, a] = 1
        if N[a, 0].sum() == 0:
            N[a, 0, a] = 1
    if np.any(N > 1):
        raise CategoryError("fusion multiplicity > 1 is not supported by the symbol engine")
    dual_doc = doc.get("dual")
    if dual_doc is None:
        dual = [next(b for b in range(k) if N[a, b, 0]) if N[a, :, 0].any() else a for a in range(k)]
    elif isinstance(dual_doc, Mapping):
        dual = [ix(dual_doc[s]) for s in ids]
    else:
        dual = [ix(dual_doc[i]) for i in order]
    ring = FusionRing(tuple(SimpleLabel(s, i == 0) for i, s in enumerate(ids)), N, tuple(dual))
    ring.check()
    F: dict[tuple[int, ...], complex] = {}
    for entry in doc.get("F", []):
        key = tuple(ix(entry[x]) for x in "abcdef")
        a, b, c, d, e, f = key
        if not (N[a, b, e] and N[e, c, d] and N[b, c, f] and N[a, f, d]):
            if abs(_complex(entry)) > 0:
                raise CategoryError(f"inadmissible F entry {[ids[i] for i in key]}")
            continue
        F[key] = _complex(entry)
    dims = None
    if doc.get("dims"):
        dims = np.ones(k)
        for entry in doc["dims"]:
            dims[ix(entry["id"])] = float(entry["value"])
    cat = FusionCategoryData(str(doc["name"]), ring, F, dims)
    braiding = None
    if doc.get("R"):
        R: dict[tuple[int, int, int], complex] = {}
        for entry in doc["R"]:
            a, b, c = ix(entry["a"]), ix(entry["b"]), ix(entry["c"])
            if not N[a, b, c]:
                if abs(_complex(entry)) > 0:
                    raise CategoryError("inadmissible R entry")
                continue
            R[(a, b, c)] = _complex(entry)
        for a in range(k):
            for b in range(k):
                for c in ring.channels(a, b):
                    if (a == 0 or b == 0) and (a, b, c) not in R:
                        R[(a, b, c)] = 1.0
        braiding = BraidingData(R)
    return cat, braiding


def category_to_document(cat: FusionCategoryData, braiding: BraidingData | None = None) -> dict[str, Any]:
    """Inverse of ``load_category`` (F entries for every nontrivial tuple)."""
    ids = cat.ring.ids
    k = cat.rank
    doc: dict[str, Any] = {
        "name": cat.name,
        "simples": [{"id": s, "unit": i == 0} for i, s in enumerate(ids)],
        "dual": {ids[a]: ids[cat.dual[a]] for a in range(k)},
        "fusion": [{"a": ids[a], "b": ids[b], "c": ids[c], "n": int(cat.N[a, b, c])}
                   for a, b, c in itertools.product(range(k), repeat=3) if cat.N[a, b, c]],
        "F": [],
    }
    for a, b, c, d in itertools.product(range(k), repeat=4):
        es, fs, M = cat.fmatrix(a, b, c, d)
        for i, e in enumerate(es):
            for j, f in enumerate(fs):
                if abs(M[i, j]) > 0:
                    doc["F"].append({"a": ids[a], "b": ids[b], "c": ids[c], "d": ids[d],
                                     "e": ids[e], "f": ids[f],
                                     "re": float(M[i, j].real), "im": float(M[i, j].imag)})
    if braiding is not None:
        doc["R"] = [{"a": ids[a], "b": ids[b], "c": ids[c], "re": float(np.real(v)), "im": float(np.imag(v))}
                    for (a, b, c), v in sorted(braiding.R.items())]
    return doc


def load_module(source: str | Path | Mapping[str, Any], cat: FusionCategoryData) -> ModuleCategoryData:
    """Load a module document ``{module_simples, action, L, trace_dims?}``."""
    doc = _read_doc(source)
    if "module_simples" not in doc or "action" not in doc:
        raise CategoryError("schema violation: module document needs module_simples and action")
    ms = [str(m["id"]) if isinstance(m, Mapping) else str(m) for m in doc["module_simples"]]
    km, k = len(ms), cat.rank
    mpos = {m: i for i, m in enumerate(ms)}
    cix = cat.ring.index
    A = np.zeros((km, k, km), dtype=int)
    for entry in doc["action"]:
        A[mpos[str(entry["m"])], cix(entry["a"]), mpos[str(entry["n"])]] = int(entry.get("mult", 1))
    if np.any(A > 1):
        raise CategoryError("module multiplicity > 1 is not supported")
    for m in range(km):
        if A[m, 0].sum() == 0:
            A[m, 0, m] = 1
    if not np.array_equal(A[:, 0, :], np.eye(km, dtype=int)):
        raise CategoryError("unit axiom violated")
    L: dict[tuple[int, ...], complex] = {}
    for entry in doc.get("L", []):
        key = (mpos[str(entry["m"])], cix(entry["a"]), cix(entry["b"]), mpos[str(entry["n"])],
               mpos[str(entry["x"])], cix(entry["y"]))
        L[key] = _complex(entry)
    dims = np.ones(km)
    for entry in doc.get("trace_dims", []) or []:
        dims[mpos[str(entry["id"])]] = float(entry["value"])
    mod = ModuleCategoryData(str(doc.get("name", "module")), cat, tuple(ms), A, L, dims)
    _check_module_ring(mod)
    return mod


def _check_module_ring(mod: ModuleCategoryData) -> None:
    A, N = mod.action, mod.cat.N
    lhs = np.einsum("max,xbn->mabn", A, A)
    rhs = np.einsum("aby,myn->mabn", N, A)
    if not np.array_equal(lhs, rhs):
        raise CategoryError("module action is not associative")
    if np.any(mod.trace_dims <= 0):
        raise CategoryError("module trace dims must be positive")


# ----------------------------------------------------------------------
# module trace normalization
# ----------------------------------------------------------------------

def _pf_shape(mod: ModuleCategoryData, comp: list[int]) -> np.ndarray:
    """Positive eigenvector of the action of the sum of all simples on one component."""
    cat = mod.cat
    M = np.einsum("man,a->mn", mod.action.astype(float), cat.dims)[np.ix_(comp, comp)]
    w, v = np.linalg.eig(M)
    top = int(np.argmax(w.real))
    vec = np.abs(v[:, top].real)
    return vec / vec.max()


def normalize_module_trace(mod: ModuleCategoryData, W: Mapping[int | str, int] | Iterable[int | str]) -> ModuleCategoryData:
    """Rescale module trace dims so that the closed W-loop equals one.

    The W-loop in the category of module endofunctors has value
    ``dim [W, W] / Tr(id_W)`` where ``dim [W, W] = sum_c d_c dim M(W <| c, W)``.
    On each indecomposable component the trace is fixed up to a scalar by the
    Perron-Frobenius shape of the action; the scalar is chosen so that the
    W-loop restricted to that component is one.

    Parameters
    ----------
    W : mapping module simple -> multiplicity, or iterable of module simples.
    """
    mult = _as_multiplicity(mod, W)
    cat = mod.cat
    dims = np.array(mod.trace_dims, dtype=float)
    for comp in mod.components():
        wm = np.array([mult.get(m, 0) for m in comp], dtype=float)
        if wm.sum() == 0:
            raise CategoryError("W misses an indecomposable summand of the module")
        shape = _pf_shape(mod, comp)
        # dim [W, W] restricted to this component
        inner = 0.0
        for i, m in enumerate(comp):
            for j, n in enumerate(comp):
                if wm[i] and wm[j]:
                    inner += wm[i] * wm[j] * float(np.dot(cat.dims, mod.action[m, :, n]))
        scale = inner / float(np.dot(wm, shape))
        dims[comp] = shape * scale
    return mod.with_trace_dims(dims)


def w_bubble(mod: ModuleCategoryData, W: Mapping[int | str, int] | Iterable[int | str]) -> list[float]:
    """Value of the closed W-loop on each indecomposable component."""
    mult = _as_multiplicity(mod, W)
    cat = mod.cat
    out = []
    for comp in mod.components():
        inner = sum(mult.get(m, 0) * mult.get(n, 0) * float(np.dot(cat.dims, mod.action[m, :, n]))
                    for m in comp for n in comp)
        trace = sum(mult.get(m, 0) * mod.trace_dims[m] for m in comp)
        out.append(inner / trace)
    return out


def _as_multiplicity(mod: ModuleCategoryData, W) -> dict[int, int]:
    if isinstance(W, Mapping):
        return {mod.index(m): int(v) for m, v in W.items()}
    out: dict[int, int] = {}
    for m in W:
        out[mod.index(m)] = out.get(mod.index(m), 0) + 1
    return out


# ----------------------------------------------------------------------
# builtins
# ----------------------------------------------------------------------

def _ring(ids: list[str], table: dict[tuple[int, int], list[int]], dual: list[int]) -> FusionRing:
    k = len(ids)
    N = np.zeros((k, k, k), dtype=int)
    for (a, b), cs in table.items():
        for c in cs:
            N[a, b, c] = 1
    ring = FusionRing(tuple(SimpleLabel(s, i == 0) for i, s in enumerate(ids)), N, tuple(dual))
    ring.check()
    return ring


def _vec_zn(n: int) -> tuple[FusionCategoryData, BraidingData]:
    ids = ["1", "g"] + [f"g{p}" for p in range(2, n)] if n > 1 else ["1"]
    table = {(a, b): [(a + b) % n] for a in range(n) for b in range(n)}
    ring = _ring(ids, table, [(-a) % n for a in range(n)])
    R = {(a, b, (a + b) % n): 1.0 + 0j for a in range(n) for b in range(n)}
    return FusionCategoryData(f"vec_z{n}", ring, {}), BraidingData(R)


def _fibonacci() -> tuple[FusionCategoryData, BraidingData]:
    ring = _ring(["1", "tau"], {(0, 0): [0], (0, 1): [1], (1, 0): [1], (1, 1): [0, 1]}, [0, 1])
    s = 1.0 / np.sqrt(PHI)
    F = {(1, 1, 1, 1, 0, 0): 1 / PHI, (1, 1, 1, 1, 0, 1): s,
         (1, 1, 1, 1, 1, 0): s, (1, 1, 1, 1, 1, 1): -1 / PHI}
    R = {(1, 1, 0): np.exp(-4j * np.pi / 5), (1, 1, 1): np.exp(3j * np.pi / 5)}
    return FusionCategoryData("fibonacci", ring, F), BraidingData(_fill_unit_r(ring, R))


def _ising() -> tuple[FusionCategoryData, BraidingData]:
    # 0 = 1, 1 = sigma, 2 = psi
    table = {(0, 0): [0], (0, 1): [1], (0, 2): [2], (1, 0): [1], (2, 0): [2],
             (1, 1): [0, 2], (1, 2): [1], (2, 1): [1], (2, 2): [0]}
    ring = _ring(["1", "sigma", "psi"], table, [0, 1, 2])
    h = 1 / np.sqrt(2)
    F = {(1, 1, 1, 1, 0, 0): h, (1, 1, 1, 1, 0, 2): h, (1, 1, 1, 1, 2, 0): h, (1, 1, 1, 1, 2, 2): -h,
         (1, 2, 1, 2, 1, 1): -1.0, (2, 1, 2, 1, 1, 1): -1.0}
    R = {(1, 1, 0): np.exp(-1j * np.pi / 8), (1, 1, 2): np.exp(3j * np.pi / 8),
         (1, 2, 1): -1j, (2, 1, 1): -1j, (2, 2, 0): -1.0}
    return FusionCategoryData("ising", ring, F), BraidingData(_fill_unit_r(ring, R))


def _fill_unit_r(ring: FusionRing, R: dict) -> dict:
    out = dict(R)
    for a in range(ring.rank):
        for b in range(ring.rank):
            for c in ring.channels(a, b):
                if a == 0 or b == 0:
                    out[(a, b, c)] = 1.0 + 0j
    return out


def _toric_center() -> tuple[FusionCategoryData, BraidingData]:
    # labels carry (charge q, flux g): 1=(0,0), e=(1,0), m=(0,1), f=(1,1)
    qg = [(0, 0), (1, 0), (0, 1), (1, 1)]
    ids = ["1", "e", "m", "f"]

    def mul(a, b):
        return qg.index(((qg[a][0] + qg[b][0]) % 2, (qg[a][1] + qg[b][1]) % 2))

    ring = _ring(ids, {(a, b): [mul(a, b)] for a in range(4) for b in range(4)}, [0, 1, 2, 3])
    R = {(a, b, mul(a, b)): complex((-1) ** (qg[a][0] * qg[b][1])) for a in range(4) for b in range(4)}
    return FusionCategoryData("toric_center", ring, {}), BraidingData(R)


def deligne_product(c1: FusionCategoryData, b1: BraidingData, c2: FusionCategoryData,
                    b2: BraidingData, name: str) -> tuple[FusionCategoryData, BraidingData]:
    """Deligne product of two braided categories (labels are pairs)."""
    k1, k2 = c1.rank, c2.rank
    pairs = [(x, y) for x in range(k1) for y in range(k2)]
    ids = [f"({c1.ring.ids[x]},{c2.ring.ids[y]})" for x, y in pairs]
    pos = {p: i for i, p in enumerate(pairs)}
    k = len(pairs)
    N = np.zeros((k, k, k), dtype=int)
    for (i, (a1, a2)), (j, (y1, y2)) in itertools.product(enumerate(pairs), repeat=2):
        for c1_ in c1.ring.channels(a1, y1):
            for c2_ in c2.ring.channels(a2, y2):
                N[i, j, pos[(c1_, c2_)]] = 1
    dual = [pos[(c1.dual[a1], c2.dual[a2])] for a1, a2 in pairs]
    ring = FusionRing(tuple(SimpleLabel(s, i == 0) for i, s in enumerate(ids)), N, tuple(dual))
    ring.check()
    F: dict[tuple[int, ...], complex] = {}
    for idx in itertools.product(range(k), repeat=6):
        a, b, c, d, e, f = (pairs[i] for i in idx)
        if not (N[idx[0], idx[1], idx[4]] and N[idx[4], idx[2], idx[3]]
                and N[idx[1], idx[2], idx[5]] and N[idx[0], idx[5], idx[3]]):
            continue
        F[idx] = (c1.fsym(a[0], b[0], c[0], d[0], e[0], f[0])
                  * c2.fsym(a[1], b[1], c[1], d[1], e[1], f[1]))
    R = {}
    for i, j in itertools.product(range(k), repeat=2):
        for c in ring.channels(i, j):
            (a1, a2), (y1, y2), (x1, x2) = pairs[i], pairs[j], pairs[c]
            R[(i, j, c)] = b1.r(a1, y1, x1) * b2.r(a2, y2, x2)
    return FusionCategoryData(name, ring, F), BraidingData(R)


def _reverse(b: BraidingData) -> BraidingData:
    """Reverse braiding ``beta^rev_{a,b} = beta_{b,a}^{-1}``."""
    return BraidingData({(a, bb, c): np.conj(b.r(bb, a, c)) for (a, bb, c) in b.R})


def _regular_module(cat: FusionCategoryData) -> ModuleCategoryData:
    k = cat.rank
    L: dict[tuple[int, ...], complex] = {}
    for m, a, b, n in itertools.product(range(k), repeat=4):
        xs, ys, M = cat.fmatrix(m, a, b, n)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                L[(m, a, b, n, x, y)] = M[i, j]
    return ModuleCategoryData(f"module:regular:{cat.name}", cat, cat.ring.ids,
                              cat.N.copy(), L, np.array(cat.dims, dtype=float))


def _vec_module(cat: FusionCategoryData) -> ModuleCategoryData:
    if not np.allclose(cat.dims, 1.0):
        raise CategoryError("Vec is a module only over pointed categories here")
    A = np.ones((1, cat.rank, 1), dtype=int)
    return ModuleCategoryData(f"module:vec_over_{cat.name.replace('vec_', '')}", cat, ("*",), A, {}, np.ones(1))


def builtin_catalog(name: str) -> Any:
    """Return builtin data by name.

    Categories come back as ``(FusionCategoryData, BraidingData | None)``,
    modules as ``ModuleCategoryData`` and central functors as
    ``CentralFunctorData``.

    Recognized names: ``vec_zN``, ``fibonacci``, ``ising``, ``toric_center``,
    ``fib_center``, ``module:vec_over_zN``, ``module:regular:<category>``,
    ``central:trivial`` and ``central:vec_z2_to_toric``.
    """
    if name.startswith("vec_z") and name[5:].isdigit():
        return _vec_zn(int(name[5:]))
    if name == "fibonacci":
        return _fibonacci()
    if name == "ising":
        return _ising()
    if name == "toric_center":
        return _toric_center()
    if name == "fib_center":
        c, b = _fibonacci()
        return deligne_product(c, b, c, _reverse(b), "fib_center")
    if name.startswith("module:vec_over_z") and name[17:].isdigit():
        cat, _ = _vec_zn(int(name[17:]))
        return _vec_module(cat)
    if name.startswith("module:regular:"):
        cat, _ = builtin_catalog(name[len("module:regular:"):])
        return _regular_module(cat)
    if name == "central:trivial":
        vec, bvec = _vec_zn(1)
        tc, _ = _toric_center()
        return CentralFunctorData(name, vec, bvec, tc, (0,), {0: {(x, x): 1.0 for x in range(tc.rank)}})
    if name == "central:vec_z2_to_toric":
        # Rep side: g -> m, whose half-braiding with x in Z(Vec Z2) is its R-symbol
        src, bsrc = _vec_zn(2)
        tc, btc = _toric_center()
        phi = (0, 2)
        hb = {a: {(x, c): btc.r(phi[a], x, c) for x in range(tc.rank) for c in tc.ring.channels(phi[a], x)}
              for a in range(2)}
        return CentralFunctorData(name, src, bsrc, tc, phi, hb)
    raise CategoryError(f"unknown builtin {name!r}")

from __future__ import annotations

import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionnet.category_core import CategoryError, builtin_catalog, normalize_module_trace
from fusionnet.homspace import Calculus
from fusionnet.levin_wen import (
    LWLattice,
    PauliModel,
    ResourceError,
    build_local_spaces,
    extract_boundary_algebra,
    gamma_homomorphism_residuals,
    gluing_operator,
    lto_suite,
    lw_pauli_comparison,
    pauli_backend,
    pauli_expected_boundary_dim,
    pauli_lto_suite,
    pauli_standard_cases,
    surrounds,
)

SQUARE = [(0, 0), (1, 0), (0, 1), (1, 1)]


def _norm(m) -> float:
    m = m.toarray() if sp.issparse(m) else np.asarray(m)
    return float(np.abs(m).max()) if m.size else 0.0


def _unit_multiplicity(cat, n: int) -> int:
    """Multiplicity of 1 in X^n with X the sum of all simples, by fusion-matrix powers."""
    NX = cat.N.sum(axis=0).T
    return int(np.linalg.matrix_power(NX, n)[0, 0])


@pytest.fixture(scope="module")
def vec():
    return builtin_catalog("vec_z2")[0]


@pytest.fixture(scope="module")
def fib():
    return builtin_catalog("fibonacci")[0]


@pytest.fixture(scope="module")
def square(vec):
    lat = LWLattice(vec, 2, 2)
    return lat, lat.region(SQUARE)


def _vec_quadruple_count(cat) -> int:
    k = cat.rank
    return sum(1 for a1, b1, b2, a2 in itertools.product(range(k), repeat=4)
               for r in range(k) if cat.N[a1, b1, r] and cat.N[b2, a2, r])


def test_local_space_dims(vec, fib):
    assert build_local_spaces(vec)["bulk"].dim == 8 == _vec_quadruple_count(vec)
    rough = normalize_module_trace(builtin_catalog("module:vec_over_z2"), [0])
    assert build_local_spaces(vec, rough)["boundary"].dim == 2
    regular = normalize_module_trace(builtin_catalog("module:regular:vec_z2"), [0, 1])
    assert build_local_spaces(vec, regular)["boundary"].dim == 4
    X = (0, 1)
    oracle = Calculus(fib).hom_dim((X, X), (X, X))
    assert build_local_spaces(fib)["bulk"].dim == oracle == _vec_quadruple_count(fib) == 13


def test_unnormalized_module_rejected(vec):
    reg = builtin_catalog("module:regular:vec_z2").with_trace_dims(np.array([3.0, 3.0]))
    with pytest.raises(CategoryError, match="normalized"):
        build_local_spaces(vec, reg)


def test_local_vectors_are_orthonormal(fib):
    # the scale makes every basis vector a unit vector for the skein product
    spc = build_local_spaces(fib)["bulk"]
    d = fib.dims
    for (a1, b1, b2, a2, r), s in zip(spc.states, spc.scale):
        assert s == pytest.approx((d[a1] * d[b1] * d[b2] * d[a2]) ** 0.25 / d[r] ** 0.5)


def test_square_patch_projectors(square):
    lat, reg = square
    assert reg.full_dim == 4096 and reg.n_boundary_legs == 8
    terms = [reg.edge_projector(e).matrix for e in reg.edges]
    terms += [reg.plaquette_operator(p).matrix for p in reg.plaquettes]
    for t in terms:
        assert _norm(t - t.conj().T) < 1e-10
        assert _norm(t @ t - t) < 1e-10
    for s, t in itertools.combinations(terms, 2):
        assert _norm(s @ t - t @ s) < 1e-10
    P = reg.region_projector().matrix
    assert round(P.diagonal().sum().real) == 2 ** (reg.n_boundary_legs - 1) == _unit_multiplicity(lat.cat, 8)


def test_single_plaquette_spectrum(square):
    _, reg = square
    B = reg.plaquette_operator(reg.plaquettes[0], "matched").matrix.toarray()
    ev = np.linalg.eigvalsh(B)
    assert np.all(np.minimum(np.abs(ev), np.abs(ev - 1)) < 1e-10)
    assert np.trace(B).real == pytest.approx(B.shape[0] / 2)


def test_two_plaquettes_commute(vec):
    lat = LWLattice(vec, 3, 2)
    reg = lat.region(lat.vertices())
    B1, B2 = (reg.plaquette_operator(p, "matched").matrix for p in reg.plaquettes)
    assert _norm(B1 @ B2 - B2 @ B1) < 1e-10


def test_skein_identification(square):
    _, reg = square
    sk = reg.skein()
    assert sk.dim == sk.oracle_dim() == 128
    res = sk.lemma_residual()
    assert max(res.values()) < 1e-9


@pytest.mark.parametrize("shape,legs", [((1, 1), 4), ((2, 1), 6)])
def test_fibonacci_region_rank(fib, shape, legs):
    lat = LWLattice(fib, *shape)
    reg = lat.region(lat.vertices())
    rank = round(reg.region_projector().matrix.diagonal().sum().real)
    X = (0, 1)
    assert rank == Calculus(fib).hom_dim((), (X,) * legs) == _unit_multiplicity(fib, legs)
    assert rank == reg.skein().dim


def test_fibonacci_plaquette_projector(fib):
    lat = LWLattice(fib, 2, 2)
    reg = lat.region(SQUARE)
    B = reg.plaquette_operator(reg.plaquettes[0], "matched").matrix
    assert _norm(B @ B - B) < 1e-10 and _norm(B - B.conj().T) < 1e-10
    assert round(B.diagonal().sum().real) == reg.skein().dim == _unit_multiplicity(fib, 8)


def test_boundary_region_rank(vec):
    for name, W in (("module:vec_over_z2", [0]), ("module:regular:vec_z2", [0, 1])):
        mod = normalize_module_trace(builtin_catalog(name), W)
        lat = LWLattice(vec, 2, 2, module=mod)
        reg = lat.region(SQUARE)
        P = reg.region_projector().matrix
        assert _norm(P @ P - P) < 1e-10
        sk = reg.skein()
        assert round(P.diagonal().sum().real) == sk.dim == sk.oracle_dim()
        assert max(sk.lemma_residual().values()) < 1e-9


def test_projector_monotone(vec):
    lat = LWLattice(vec, 3, 2)
    delta = lat.region(lat.vertices())
    small = [(0, 0), (1, 0), (0, 1), (1, 1)]
    P_lam = sp.identity(len(delta.matched()), dtype=complex, format="csr")
    for p in lat.plaquettes(small):
        P_lam = P_lam @ delta.plaquette_operator(p, "matched").matrix
    P_delta = delta.region_projector("matched").matrix
    assert _norm(P_lam @ P_delta - P_delta) < 1e-10


def test_resource_guard(vec):
    lat = LWLattice(vec, 4, 3)
    with pytest.raises(ResourceError):
        lat.region(lat.vertices())
    with pytest.raises(CategoryError):
        lat.region([(9, 9)])


def test_gluing_is_star_homomorphism(square):
    _, reg = square
    res = gamma_homomorphism_residuals(reg, np.random.default_rng(0))
    assert max(res.values()) < 1e-9


def test_gluing_identity_is_projector(square):
    lat, reg = square
    sk = reg.skein()
    top = sk.codX[:sk.n_top]
    G = gluing_operator(reg, lat.calc.identity(top, sk.head))
    assert _norm(G - reg.region_projector().toarray()) < 1e-10


def test_surrounds_predicate():
    lam = [(1, 1)]
    full = [(i, j) for i in range(3) for j in range(3)]
    assert surrounds(lam, full)
    assert not surrounds(lam, [(i, j) for i in range(3) for j in range(2)])
    assert surrounds([(1, 1)], [(i, j) for i in range(3) for j in range(2)], open_side="top")
    assert surrounds([(0, 1)], [(i, j) for i in range(2) for j in range(3)], boundary=True)


def test_boundary_extraction_bulk(vec):
    lat = LWLattice(vec, 4, 2)
    lam = [(1, 1), (2, 1)]
    ex = extract_boundary_algebra(lat, lam, lat.vertices(), np.random.default_rng(1))
    X = (0, 1)
    assert ex.dim_lower == ex.dim_upper == ex.dim_gamma == 8 == Calculus(vec).hom_dim((X, X), (X, X))
    assert ex.gamma_residual < 1e-9 and ex.containment_residual < 1e-9


def test_boundary_extraction_corner(vec):
    mod = normalize_module_trace(builtin_catalog("module:vec_over_z2"), [0])
    lat = LWLattice(vec, 3, 2, module=mod)
    ex = extract_boundary_algebra(lat, [(0, 1), (1, 1)], lat.vertices(), np.random.default_rng(2))
    W = (0,)
    oracle = Calculus(vec, module=mod).hom_dim((W, (0, 1)), (W, (0, 1)), head=True)
    assert ex.dim_lower == ex.dim_upper == ex.dim_gamma == 4 == oracle
    assert ex.gamma_residual < 1e-9


def test_extraction_rejects_geometry(vec):
    lat = LWLattice(vec, 4, 2)
    with pytest.raises(CategoryError):
        extract_boundary_algebra(lat, [(0, 1), (1, 1)], lat.vertices())


def test_categorical_lto1(vec):
    lat = LWLattice(vec, 3, 3)
    items = lto_suite(lat, [(1, 1)], lat.vertices(), axioms=("LTO1",))
    assert all(it["status"] == "PASS" for it in items)
    # without a surrounding collar the compression is not a scalar
    bad = LWLattice(vec, 2, 2)
    items = lto_suite(bad, [(0, 0)], SQUARE, axioms=("LTO1",))
    assert any(it["status"] == "FAIL" for it in items)


def test_categorical_lto_unknown_axiom(vec):
    lat = LWLattice(vec, 3, 3)
    with pytest.raises(CategoryError):
        lto_suite(lat, [(1, 1)], lat.vertices(), axioms=("LTO3",))


def test_backend_comparison(vec):
    out = lw_pauli_comparison(LWLattice(vec, 2, 2), SQUARE)
    assert out["bp_residual"] < 1e-12
    assert out["lw_rank"] == out["pauli_rank"] == 128
    with pytest.raises(CategoryError):
        lw_pauli_comparison(LWLattice(builtin_catalog("fibonacci")[0], 2, 2), SQUARE)


# ----------------------------------------------------------------------
# Pauli backend
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def toric5():
    return PauliModel(5, 5)


def test_pauli_psi_examples(toric5):
    m = toric5
    region = m.vertex_region([(2, 2)])
    S = m.stabilizers(m.vertex_region([(i, j) for i in range(1, 4) for j in range(1, 4)]))
    e = sorted(region)[0]
    assert m.psi(m._vec(xs=[e]), S) == 0.0
    assert m.psi(m._vec(zs=[e]), S) == 0.0
    assert m.psi(m._vec(), S) == 1.0
    assert m.psi(m.star((2, 2)), S) == 1.0
    assert m.psi(m.plaquette((1, 1)), S) == 1.0


def test_pauli_stabilizers_commute(toric5):
    S = toric5.stabilizers(frozenset(range(toric5.n)))
    assert not toric5.commutes(S, S).any()


@pytest.mark.parametrize("boundary", [None, "smooth", "rough"])
def test_pauli_lto_suite(boundary):
    model = pauli_backend({"w": 5, "h": 5, "boundary": boundary})
    items = pauli_lto_suite(model, pauli_standard_cases(model))
    assert items and all(it["status"] == "PASS" for it in items), [i for i in items if i["status"] != "PASS"]


@pytest.mark.parametrize("boundary", ["smooth", "rough"])
def test_dropped_boundary_star_fails(boundary):
    model = PauliModel(5, 5, boundary)
    cases = pauli_standard_cases(model, drop_boundary_star=True)
    lto1 = pauli_lto_suite(model, {"dLTO1": cases["dLTO1"]})
    assert lto1[0]["status"] == "FAIL"


def test_pauli_small_lattice_and_bad_boundary():
    with pytest.raises(CategoryError):
        pauli_standard_cases(PauliModel(3, 3))
    with pytest.raises(CategoryError):
        PauliModel(5, 5, "zigzag")
    with pytest.raises(CategoryError):
        pauli_standard_cases(PauliModel(5, 5), drop_boundary_star=True)


def test_pauli_boundary_dims_match_chain():
    X = (0, 1)
    vec = builtin_catalog("vec_z2")[0]
    assert pauli_expected_boundary_dim(None, 2) == 8 == 2 ** (2 * 2 - 1)
    assert pauli_expected_boundary_dim(None, 1) == Calculus(vec).hom_dim((X,), (X,)) == 2
    assert pauli_expected_boundary_dim("rough", 1) == 4


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_pauli_psi_is_zero_off_stabilizer_group(seed):
    m = PauliModel(5, 5)
    rng = np.random.default_rng(seed)
    delta = m.vertex_region([(i, j) for i in range(1, 4) for j in range(1, 4)])
    S = m.stabilizers(delta)
    P = np.zeros(2 * m.n, dtype=np.uint8)
    edges = sorted(m.vertex_region([(2, 2)]))
    P[rng.choice(edges, size=2, replace=False)] = 1
    P[m.n + rng.choice(edges)] ^= 1
    # a Pauli anticommuting with some stabilizer has vanishing expectation
    if m.commutes(P[None, :], S).any():
        assert m.psi(P, S) == 0.0
    else:
        assert m.psi(P, S) in (-1.0, 0.0, 1.0)

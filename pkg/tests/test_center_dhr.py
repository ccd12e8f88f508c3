from __future__ import annotations

import numpy as np
import pytest

from fusionnet.algebra_net import ChainFamily, dhr_truncation
from fusionnet.category_core import BraidingData, CategoryError, builtin_catalog
from fusionnet.center_dhr import (
    EnrichedChain,
    braided_functor_check,
    center_object,
    compare_with_builtin_toric,
    derive_toric_center,
    dhr_braiding,
    enriched_dhr_truncation,
    half_braiding_residual,
    muger_center,
    muger_centralizer,
    partition_of_unity,
    trivial_enrichment_check,
    tube_algebra,
    tube_irreps,
    unit_center_object,
)
from fusionnet.homspace import Calculus

PHI = (1 + 5 ** 0.5) / 2


def _tube_dim_oracle(cat):
    """dim of the tube algebra = sum over a, b, c of dim Hom(a c -> c b)."""
    N = cat.N
    k = cat.rank
    return int(sum(N[a, c, r] * N[c, b, r] for a in range(k) for b in range(k)
                   for c in range(k) for r in range(k)))


@pytest.mark.parametrize("name,dim", [("vec_z2", 4), ("fibonacci", 7), ("vec_z3", 9)])
def test_tube_dimension(name, dim):
    cat, _ = builtin_catalog(name)
    tube = tube_algebra(cat)
    assert tube.dim == dim == _tube_dim_oracle(cat)
    assert tube.associativity_residual() < 1e-12
    u = tube.unit()
    rng = np.random.default_rng(0)
    x = rng.standard_normal(tube.dim)
    np.testing.assert_allclose(tube.product(u, x), x, atol=1e-12)
    np.testing.assert_allclose(tube.product(x, u), x, atol=1e-12)


def test_vec_z2_tube_is_commutative():
    cat, _ = builtin_catalog("vec_z2")
    tube = tube_algebra(cat)
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, tube.dim))
    np.testing.assert_allclose(tube.product(x, y), tube.product(y, x), atol=1e-12)


@pytest.mark.parametrize("name", ["vec_z2", "fibonacci", "vec_z3"])
def test_tube_irreps_total_dimension(name):
    cat, _ = builtin_catalog(name)
    tube = tube_algebra(cat)
    irreps = tube_irreps(tube, np.random.default_rng(2))
    assert sum(s.block_dim ** 2 for s in irreps) == tube.dim
    assert sum(s.dim ** 2 for s in irreps) == pytest.approx(cat.global_dim ** 2, abs=1e-9)
    calc = Calculus(cat)
    for s in irreps:
        res = half_braiding_residual(center_object(calc, s))
        assert max(res.values()) < 1e-9


def test_fibonacci_center():
    cat, _ = builtin_catalog("fibonacci")
    irreps = tube_irreps(tube_algebra(cat), np.random.default_rng(3))
    assert sorted(s.block_dim for s in irreps) == [1, 1, 1, 2]
    np.testing.assert_allclose(sorted(s.dim for s in irreps), [1, PHI, PHI, PHI ** 2], atol=1e-9)


def test_vec_z2_center_is_toric():
    cat, _ = builtin_catalog("vec_z2")
    irreps = tube_irreps(tube_algebra(cat), np.random.default_rng(4))
    assert len(irreps) == 4 and all(s.block_dim == 1 for s in irreps)
    np.testing.assert_allclose([s.dim for s in irreps], 1, atol=1e-12)
    calc = Calculus(cat)
    derived = derive_toric_center(cat, calc)
    assert sorted(derived) == ["1", "e", "f", "m"]
    toric, tb = builtin_catalog("toric_center")
    res = compare_with_builtin_toric(derived, toric, tb)
    assert max(res.values()) < 1e-10


def test_muger():
    toric, tb = builtin_catalog("toric_center")
    assert muger_center(toric, tb) == [0]
    assert muger_centralizer(toric, tb, [1]) == [0, 1]
    vec, vb = builtin_catalog("vec_z2")
    assert muger_center(vec, vb) == [0, 1]
    fib_c, fib_b = builtin_catalog("fib_center")
    assert muger_center(fib_c, fib_b) == [0]


def test_muger_symmetric_override():
    vec, _ = builtin_catalog("vec_z2")
    trivial = BraidingData({(a, b, c): 1.0 for a in range(2) for b in range(2) for c in range(2) if vec.N[a, b, c]})
    assert muger_center(vec, trivial) == [0, 1]


@pytest.fixture(scope="module")
def toric_chain():
    cat, _ = builtin_catalog("vec_z2")
    calc = Calculus(cat)
    derived = derive_toric_center(cat, calc)
    fam = ChainFamily(calc, (0, 1))
    Y = {k: dhr_truncation(fam, v, 4) for k, v in derived.items()}
    return calc, derived, fam, Y


def test_partition_of_unity(toric_chain):
    calc, derived, _, _ = toric_chain
    X = (0, 1)
    for name, z in derived.items():
        bs = partition_of_unity(calc, X, z)
        assert len(bs) == 2
        total = sum((b @ b.dag for b in bs), calc.zeros((X, z.Z), (X, z.Z)))
        assert total.dist(calc.identity((X, z.Z))) < 1e-12
    one = unit_center_object(calc)
    assert len(partition_of_unity(calc, (0,), one)) == 1


@pytest.mark.parametrize("w", ["1", "e", "m", "f"])
@pytest.mark.parametrize("z", ["1", "e", "m", "f"])
def test_dhr_braiding_matches_center(toric_chain, w, z):
    _, _, _, Y = toric_chain
    items = braided_functor_check(Y[w], Y[z], 0, 2, np.random.default_rng(5))
    assert all(it["status"] == "PASS" for it in items), items


def test_em_monodromy(toric_chain):
    calc, _, _, Y = toric_chain
    K1 = dhr_braiding(Y["e"], Y["m"], 0, 2).K
    K2 = dhr_braiding(Y["m"], Y["e"], 0, 2).K
    mono = K2 @ K1
    assert (mono + calc.identity(mono.dom)).opnorm() < 1e-9


def test_dhr_braiding_needs_separated_sites(toric_chain):
    _, _, _, Y = toric_chain
    with pytest.raises(CategoryError):
        dhr_braiding(Y["e"], Y["m"], 0, 1)


@pytest.mark.parametrize("name", ["vec_z2", "fibonacci"])
def test_trivial_enrichment(name):
    cat, _ = builtin_catalog(name)
    calc = Calculus(cat)
    for nb, nk in ((1, 1), (2, 2)):
        items = trivial_enrichment_check(calc, (0, 1), nb, nk, np.random.default_rng(6))
        assert all(it["status"] == "PASS" for it in items), items


def test_enriched_identity_central_dim(toric_chain):
    calc, derived, _, _ = toric_chain
    # A = X = Vec(Z/2), Phi the identity central functor: image of g is the flux m
    chain = EnrichedChain(calc, (0, 1), [derived["1"], derived["m"]])
    assert chain.algebra_dim(1, 1) == 8
    Y = enriched_dhr_truncation(chain, derived["m"], 1, 1, centralizer=["1", "m"])
    assert Y.space_dim() == calc.hom_dim(chain.word(1, 1), chain.word(1, 1) + (derived["m"].Z,))
    with pytest.raises(CategoryError):
        enriched_dhr_truncation(chain, derived["e"], 1, 1, centralizer=["1", "m"])

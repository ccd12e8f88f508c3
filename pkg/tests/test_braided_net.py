from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionnet.braided_net import (
    BraidedNet,
    braid_between_orderings,
    cocycle_check,
    cone_decomposition,
    enriched_net_algebra,
    linearize_region,
    rectangle,
)
from fusionnet.category_core import CategoryError, builtin_catalog
from fusionnet.center_dhr import EnrichedChain, derive_toric_center, unit_center_object
from fusionnet.homspace import Calculus


@pytest.fixture(scope="module")
def toric():
    cat, br = builtin_catalog("toric_center")
    return Calculus(cat, br)


@pytest.fixture(scope="module")
def net(toric):
    return BraidedNet(toric, (0, 1, 2, 3))


def test_linearization():
    assert linearize_region(rectangle(0, 0, 2, 2)) == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert linearize_region([(3, 4)]) == [(3, 4)]
    L = [(0, 1), (0, 0), (1, 0)]
    assert linearize_region(L) == linearize_region(reversed(L)) == [(0, 0), (1, 0), (0, 1)]


def test_braid_words():
    order = [(0, 0), (0, 1)]
    assert braid_between_orderings(order, order) == []
    # the later row passes over
    assert braid_between_orderings(order, order[::-1]) == [(0, -1)]
    assert braid_between_orderings(order[::-1], order) == [(0, 1)]
    with pytest.raises(CategoryError):
        braid_between_orderings(order, [(0, 0), (5, 5)])


def test_net_algebra_dims(net, toric):
    alg = net.algebra(rectangle(0, 0, 2, 1))
    assert alg.dim == 64 and alg.center_dim == 4
    lag = BraidedNet(toric, (0, 1))
    a1 = lag.algebra([(0, 0)])
    assert a1.dim == 2 and a1.center_dim == 2
    assert net.algebra([]).dim == 1


@pytest.mark.parametrize("w,h", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_center_dim_four(net, w, h):
    assert net.algebra(rectangle(0, 0, w, h)).center_dim == 4


@pytest.mark.parametrize("left,right", [
    ([(0, 0), (1, 0)], [(0, 1), (1, 1)]),
    ([(0, 0)], [(1, 1)]),
    ([(1, 0)], [(0, 1)]),
])
def test_row_separated_regions_commute(net, left, right):
    rng = np.random.default_rng(0)
    big = rectangle(0, 0, 2, 2)
    x = net.algebra(left).random(rng)
    y = net.algebra(right).random(rng)
    ix = net.include_region(x, left, big)
    iy = net.include_region(y, right, big)
    assert (ix @ iy).dist(iy @ ix) < 1e-9


def test_inclusion_unit_and_state(net):
    rng = np.random.default_rng(0)
    big = rectangle(0, 0, 2, 2)
    left = [(0, 0), (0, 1)]
    x = net.algebra(left).random(rng)
    ix = net.include_region(x, left, big)
    one = net.include_region(net.algebra(left).identity(), left, big)
    assert one.dist(net.algebra(big).identity()) < 1e-12
    assert abs(net.state(ix, big) - net.state(x, left)) < 1e-10


def test_sector_spaces(net, toric):
    reg = [(0, 0), (1, 0)]
    for x in range(4):
        K = net.sector_space(x, reg)
        assert K.dim == 4
        np.testing.assert_allclose(K.gram(), np.eye(4), atol=1e-12)
    K = net.sector_space(1, reg)
    B = K.onb()
    d = toric.cat.dims[1]
    for i, j in itertools.product(range(len(B)), repeat=2):
        val = (B[i].dag @ B[j]).blocks[1][0, 0]
        assert val == pytest.approx((i == j) / d, abs=1e-12)


def test_cone_decomposition(net, toric):
    tab = cone_decomposition(net, rectangle(0, 0, 2, 2), [(0, 0), (0, 1)])
    assert tab["sum"] == tab["unit_multiplicity"] == 64
    full = cone_decomposition(net, rectangle(0, 0, 2, 2), rectangle(0, 0, 2, 2))
    assert all(r["dim_rest"] == (1 if r["x"] == 0 else 0) for r in full["rows"])
    lag = BraidedNet(toric, (0, 1))
    tab = cone_decomposition(lag, rectangle(0, 0, 2, 1), [(0, 0)])
    assert len(tab["rows"]) == 2 and tab["sum"] == tab["unit_multiplicity"]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_cocycle_random_triples(toric, seed):
    rng = np.random.default_rng(seed)
    net = BraidedNet(toric, (1, 2))
    reg = rectangle(0, 0, 2, 3)
    perms = list(itertools.permutations(linearize_region(reg)))
    a, b, c = (list(perms[int(i)]) for i in rng.integers(len(perms), size=3))
    lhs = net.braid_unitary(a, c)
    rhs = net.braid_unitary(b, c) @ net.braid_unitary(a, b)
    assert lhs.dist(rhs) < 1e-9


def test_cocycle_exhaustive(net):
    out = cocycle_check(net, rectangle(0, 0, 2, 2), np.random.default_rng(1))
    assert out["mode"] == "exhaustive" and out["triples"] == 24 ** 3
    assert out["residual"] < 1e-9


def test_enriched_net_algebra(toric):
    vec, _ = builtin_catalog("vec_z2")
    calc = Calculus(vec)
    derived = derive_toric_center(vec, calc)
    chain = EnrichedChain(calc, (0, 1), [derived["1"], derived["m"]])
    assert enriched_net_algebra([(0, 0), (0, 1)], chain).dim == 8
    trivial = EnrichedChain(calc, (0, 1), [unit_center_object(calc)])
    assert enriched_net_algebra(rectangle(0, 0, 2, 2), trivial).dim == 8
    with pytest.raises(CategoryError):
        enriched_net_algebra([(0, -1)], chain)

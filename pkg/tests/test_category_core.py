from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionnet.category_core import (
    CategoryError,
    builtin_catalog,
    category_to_document,
    global_dim,
    hexagon_residuals,
    load_category,
    load_module,
    mixed_pentagon_residual,
    normalize_module_trace,
    pentagon_residual,
    quantum_dims,
    validate_axioms,
    w_bubble,
)

PHI = (1 + 5 ** 0.5) / 2
CATEGORIES = ["vec_z2", "vec_z3", "fibonacci", "ising", "toric_center"]


def _perron(cat):
    """Independent oracle: d_a is the top eigenvalue of the fusion matrix N_a."""
    return np.array([max(np.linalg.eigvals(cat.N[a].astype(float)).real) for a in range(cat.rank)])


def test_vec_z2_document_loads_with_trivial_f():
    doc = {"name": "z2", "simples": ["1", "g"],
           "fusion": [{"a": "g", "b": "g", "c": "1"}]}
    cat, br = load_category(json.dumps(doc))
    assert cat.rank == 2 and br is None
    assert cat.N[1, 1, 0] == 1
    assert all(cat.fsym(*key) == 1 for key in [(1, 1, 1, 1, 0, 0)])
    assert pentagon_residual(cat) == 0


def test_fibonacci_f_matrix_is_golden():
    cat, _ = builtin_catalog("fibonacci")
    es, fs, M = cat.fmatrix(1, 1, 1, 1)
    assert es == fs == (0, 1)
    # gauge invariant content: magnitudes and spectrum of a real unitary involution
    np.testing.assert_allclose(np.abs(M), [[1 / PHI, PHI ** -0.5], [PHI ** -0.5, 1 / PHI]], atol=1e-12)
    np.testing.assert_allclose(sorted(np.linalg.eigvals(M).real), [-1, 1], atol=1e-12)


def test_unit_axiom_violation_rejected():
    doc = {"name": "bad", "simples": ["1", "a", "b"],
           "fusion": [{"a": "a", "b": "1", "c": "b"}, {"a": "a", "b": "1", "c": "a"}]}
    with pytest.raises(CategoryError, match="unit"):
        load_category(doc)


def test_inadmissible_f_entry_rejected():
    doc = {"name": "z2", "simples": ["1", "g"], "fusion": [{"a": "g", "b": "g", "c": "1"}],
           "F": [{"a": "g", "b": "g", "c": "g", "d": "1", "e": "g", "f": "g", "re": 1.0, "im": 0.0}]}
    with pytest.raises(CategoryError, match="inadmissible"):
        load_category(doc)


def test_missing_schema_key():
    with pytest.raises(CategoryError, match="schema"):
        load_category({"name": "x", "simples": ["1"]})


@pytest.mark.parametrize("name", CATEGORIES)
def test_builtin_categories_validate(name):
    cat, br = builtin_catalog(name)
    items = validate_axioms(cat, br, 1e-10)
    assert all(it["status"] == "PASS" for it in items), items


@pytest.mark.parametrize("name", CATEGORIES)
def test_document_round_trip(name):
    cat, br = builtin_catalog(name)
    cat2, br2 = load_category(category_to_document(cat, br))
    assert np.array_equal(cat.N, cat2.N)
    assert pentagon_residual(cat2) < 1e-10
    assert max(hexagon_residuals(cat2, br2)) < 1e-10


def test_negated_fibonacci_entry_fails():
    cat, br = builtin_catalog("fibonacci")
    bad = cat.perturbed((1, 1, 1, 1, 1, 1))
    assert pentagon_residual(bad) > 0.1
    assert any(it["status"] == "FAIL" for it in validate_axioms(bad, br, 1e-10))


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]))
def test_negating_any_fibonacci_entry_fails(ij):
    cat, br = builtin_catalog("fibonacci")
    es, fs, _ = cat.fmatrix(1, 1, 1, 1)
    key = (1, 1, 1, 1, es[ij[0]], fs[ij[1]])
    assert any(it["status"] == "FAIL" for it in validate_axioms(cat.perturbed(key), br, 1e-10))


@pytest.mark.parametrize("name", CATEGORIES)
def test_dims_match_perron_frobenius(name):
    cat, _ = builtin_catalog(name)
    np.testing.assert_allclose(cat.dims, _perron(cat), atol=1e-12)
    np.testing.assert_allclose(quantum_dims(cat.ring), _perron(cat), atol=1e-12)


def test_named_dims():
    fib, _ = builtin_catalog("fibonacci")
    ising, _ = builtin_catalog("ising")
    assert fib.dims[1] == pytest.approx(PHI)
    assert ising.dims[ising.ring.ids.index("sigma")] == pytest.approx(2 ** 0.5)
    assert global_dim(builtin_catalog("vec_z2")[0]) == pytest.approx(2)
    assert global_dim(fib) == pytest.approx(1 + PHI ** 2)
    assert global_dim(builtin_catalog("toric_center")[0]) == pytest.approx(4)


def test_toric_center_catalog():
    cat, br = builtin_catalog("toric_center")
    assert cat.ring.ids == ("1", "e", "m", "f")
    np.testing.assert_allclose(cat.dims, 1)
    e, m = 1, 2
    f = int(np.argmax(cat.N[e, m]))
    assert br.monodromy(e, m, f) == pytest.approx(-1)


def test_unknown_builtin():
    with pytest.raises(CategoryError):
        builtin_catalog("nope")


def test_module_normalization_vec_over_z2():
    mod = builtin_catalog("module:vec_over_z2")
    assert mixed_pentagon_residual(mod) < 1e-12
    norm = normalize_module_trace(mod, [0])
    np.testing.assert_allclose(w_bubble(norm, [0]), [1.0])


def test_module_normalization_regular():
    fib, _ = builtin_catalog("fibonacci")
    mod = builtin_catalog("module:regular:fibonacci")
    assert mixed_pentagon_residual(mod) < 1e-10
    for W in ([0, 1], [1], [0]):
        norm = normalize_module_trace(mod, W)
        np.testing.assert_allclose(w_bubble(norm, W), [1.0], atol=1e-12)
        # the trace shape is the Perron-Frobenius one, i.e. proportional to d
        ratio = norm.trace_dims / fib.dims
        np.testing.assert_allclose(ratio, ratio[0], atol=1e-12)


def test_module_document_unit_axiom():
    cat, _ = builtin_catalog("vec_z2")
    doc = {"module_simples": ["*"], "action": [{"m": "*", "a": "g", "n": "*"}]}
    assert load_module(doc, cat).rank == 1
    bad = {"module_simples": ["p", "q"], "action": [{"m": "p", "a": "1", "n": "q"}]}
    with pytest.raises(CategoryError, match="unit"):
        load_module(bad, cat)

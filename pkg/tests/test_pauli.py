import numpy as np
import pytest
from hypothesis import given, strategies as st

from noisegeo.pauli import (PauliString, commutation_table, commutes, embed, error_axes, error_vector_operator,
                            expand_in_pauli_basis, from_pauli_coefficients, n_qubits_of, pauli_basis, pauli_labels,
                            pauli_matrix, pauli_mul, pauli_sum)

labels = st.integers(1, 3).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))
pairs = st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n)))


def test_index_order_is_base4_with_leftmost_most_significant():
    assert pauli_labels(1) == ("I", "X", "Y", "Z")
    assert pauli_labels(2)[:5] == ("II", "IX", "IY", "IZ", "XI")
    assert PauliString("XY").index == 1 * 4 + 2
    assert PauliString.from_index(7, 2).label == "XZ"


def test_error_axes_drop_identity():
    assert len(error_axes(2)) == 15
    assert "II" not in error_axes(2)


def test_basis_is_orthonormal_under_normalized_trace():
    b = pauli_basis(2)
    gram = np.einsum("iab,jba->ij", b, b) / 4
    np.testing.assert_allclose(gram, np.eye(16), atol=1e-15)


@given(pairs)
def test_product_matches_matrices(pair):
    a, b = pair
    phase, c = pauli_mul(a, b)
    np.testing.assert_allclose(pauli_matrix(a) @ pauli_matrix(b), phase * c.matrix(), atol=1e-14)


@given(pairs)
def test_commutation_matches_matrices(pair):
    a, b = pair
    ma, mb = pauli_matrix(a), pauli_matrix(b)
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


def test_commutation_table_symmetric():
    t = commutation_table(2)
    assert t.shape == (16, 16)
    assert np.array_equal(t, t.T)
    assert t[0].all()


@given(st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_expansion_roundtrip(n, seed):
    r = np.random.default_rng(seed)
    d = 2**n
    m = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    c = expand_in_pauli_basis(m)
    np.testing.assert_allclose(from_pauli_coefficients(c, n), m, atol=1e-12)


def test_error_vector_operator_places_components():
    v = np.zeros(15)
    v[error_axes(2).index("ZZ")] = 0.3
    np.testing.assert_allclose(error_vector_operator(v, 2), 0.3 * pauli_matrix("ZZ"))


def test_pauli_sum_and_embed():
    np.testing.assert_allclose(pauli_sum({"XX": 1, "YY": 1}), pauli_matrix("XX") + pauli_matrix("YY"))
    np.testing.assert_allclose(embed(pauli_matrix("X"), 1, 2), pauli_matrix("IX"))


def test_validation():
    with pytest.raises(ValueError):
        PauliString("XQ")
    with pytest.raises(ValueError):
        n_qubits_of(np.eye(3))
    with pytest.raises(ValueError):
        pauli_mul("X", "XX")


@given(labels)
def test_weight_counts_non_identity_sites(label):
    assert PauliString(label).weight == sum(c != "I" for c in label)

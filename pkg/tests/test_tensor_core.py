import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary_lab.tensor_core import (ContractionError, MatrixView, as_matrix, as_tensor,
                                       contract, dagger, from_matrix, partial_trace, realign,
                                       svd_values, unitarity_residual)
from biunitary_lab.catalog import haar_unitary

dims = st.lists(st.integers(1, 3), min_size=2, max_size=4)


@given(dims, st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_matrix_view_round_trip(shape, r):
    rng = np.random.default_rng(r.randint(0, 2 ** 31))
    t = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    axes = list(range(len(shape)))
    r.shuffle(axes)
    k = r.randint(1, len(shape) - 1)
    view = MatrixView(t, tuple(axes[:k]), tuple(axes[k:]))
    m = as_matrix(view)
    assert m.shape[0] == int(np.prod([shape[i] for i in axes[:k]]))
    np.testing.assert_array_equal(from_matrix(m, view), t)


def test_view_rejects_overlap():
    with pytest.raises(ValueError, match="overlap"):
        MatrixView(np.zeros((2, 2)), (0,), (0,))
    with pytest.raises(ValueError):
        MatrixView(np.zeros((2, 2, 2)), (0,), (1,))


def test_as_tensor_checks():
    with pytest.raises(ValueError):
        as_tensor(np.zeros(6), (4, 2))
    with pytest.raises(ValueError):
        as_tensor([np.nan, 1])
    assert as_tensor(np.arange(4), (2, 2)).dtype == complex


def test_contract_matches_einsum(rng):
    a = rng.normal(size=(2, 3, 4))
    b = rng.normal(size=(4, 3, 5))
    c = contract(a, b, [(1, 1), (2, 0)])
    np.testing.assert_allclose(c, np.einsum("ijk,kjl->il", a, b))
    with pytest.raises(ContractionError, match="mismatched"):
        contract(a, b, [(0, 0)])
    assert contract(np.ones(2), np.ones(3), []).shape == (2, 3)


def test_unitarity_residual(rng):
    u = haar_unitary(6, rng)
    assert unitarity_residual(u) < 1e-13
    assert unitarity_residual(2 * u) > 1
    with pytest.raises(ValueError):
        unitarity_residual(np.ones((2, 3)))


def test_dagger_is_involution(rng):
    t = rng.normal(size=(2, 3, 2, 3)) + 1j * rng.normal(size=(2, 3, 2, 3))
    view = MatrixView(t, (0, 1), (2, 3))
    d = dagger(t, view)
    np.testing.assert_allclose(as_matrix(MatrixView(d, (0, 1), (2, 3))), as_matrix(view).conj().T)
    np.testing.assert_allclose(dagger(d, view), t)


def test_realign_of_product_has_rank_one(rng):
    a, b = haar_unitary(2, rng), haar_unitary(3, rng)
    g = np.kron(a, b).reshape(2, 3, 2, 3)
    s = svd_values(realign(g))
    assert np.sum(s > 1e-10) == 1
    # squared Schmidt values add up to the Frobenius norm squared
    assert np.isclose(np.sum(s ** 2), 6)


def test_partial_trace(rng):
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi /= np.linalg.norm(psi)
    rho = partial_trace(psi, [2, 3, 2], [0, 2])
    assert rho.shape == (4, 4)
    assert np.isclose(np.trace(rho), 1)
    np.testing.assert_allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho).min() > -1e-12

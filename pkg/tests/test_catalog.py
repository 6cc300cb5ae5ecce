import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary_lab import catalog as cat
from biunitary_lab.hierarchy import check_dual_unitary

seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7])
def test_fourier_is_chm(q):
    rep = cat.verify_chm(cat.fourier_chm(q))
    assert rep.passed
    assert rep.residuals["unitarity"] < 1e-13


@pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 7))
def test_qubit_pair(phi):
    h0, h1 = cat.qubit_chm_pair(phi)
    assert cat.verify_chm(h0).passed and cat.verify_chm(h1).passed
    np.testing.assert_allclose(np.abs(h1), 1)


def test_verify_chm_flags():
    rep = cat.verify_chm(np.eye(2))
    assert not rep.passed
    assert rep.residuals["modulus"] == 1
    rep = cat.verify_chm(np.ones((2, 2)))
    assert rep.flags["modulus"] and not rep.flags["unitarity"]


@given(st.integers(2, 5), seeds)
@settings(max_examples=25, deadline=None)
def test_random_chm(q, seed):
    assert cat.verify_chm(cat.random_chm(q, seed)).passed


@given(st.integers(2, 4), seeds)
@settings(max_examples=20, deadline=None)
def test_du_from_chm_is_dual_unitary(q, seed):
    rng = np.random.default_rng(seed)
    g = cat.du_from_chm(*[cat.random_chm(q, rng) for _ in range(4)])
    assert check_dual_unitary(g).passed


def test_du_from_chm_refuses_non_chm():
    with pytest.raises(cat.InvalidInput) as e:
        cat.du_from_chm(np.eye(2), cat.fourier_chm(2), cat.fourier_chm(2), cat.fourier_chm(2))
    assert "modulus" in e.value.residuals


def test_gate2_layout():
    g = cat.cnot_gate()
    # control on the left: |10> -> |11>
    assert g.tensor[1, 1, 1, 0] == 1
    np.testing.assert_array_equal(g.matrix, np.eye(4)[[0, 1, 3, 2]])
    m = g.mirrored()
    assert m.tensor[1, 1, 0, 1] == 1
    np.testing.assert_allclose(g.dag().matrix @ g.matrix, np.eye(4))


def test_gate2_mixed_dims():
    g = cat.haar_gate(2, 3, 5)
    assert (g.d_left, g.d_right) == (2, 3)
    assert g.tensor.shape == (2, 3, 2, 3)
    with pytest.raises(ValueError):
        cat.Gate2.from_matrix(np.eye(5), 2)


def test_haar_is_seeded():
    np.testing.assert_array_equal(cat.haar_unitary(4, 7), cat.haar_unitary(4, 7))
    assert not np.allclose(cat.haar_unitary(4, 7), cat.haar_unitary(4, 8))


def test_diagonal_gate_needs_phases():
    h0, _ = cat.qubit_chm_pair(0.0)
    np.testing.assert_allclose(cat.diagonal_gate(h0).matrix, np.diag([1, 1, 1, -1]))
    with pytest.raises(cat.InvalidInput):
        cat.diagonal_gate(np.ones((2, 2)))


@pytest.mark.parametrize("q", [2, 3])
def test_phased_swap_and_random_du(q, rng):
    assert check_dual_unitary(cat.phased_swap_gate(q, rng)).passed
    assert check_dual_unitary(cat.random_du_gate(q, rng)).passed


@pytest.mark.parametrize("q", [2, 3, 4])
def test_duirf_crosses(q, rng):
    assert cat.verify_duirf(cat.phased_shift_cross(q)).passed
    assert cat.verify_duirf(cat.random_phased_cross(q, rng)).passed
    assert not cat.verify_duirf(rng.normal(size=(q, q, q, q))).passed


@pytest.mark.parametrize("q", [2, 3, 5])
def test_weyl_ueb(q, rng):
    w = cat.weyl_ueb(q)
    assert cat.verify_ueb(w).passed
    d = cat.dressed_ueb(w, cat.haar_unitary(q, rng), cat.haar_unitary(q, rng))
    assert cat.verify_ueb(d).passed


def test_clock_shift_commutation():
    x, z = cat.clock_shift(3)
    w = np.exp(2j * np.pi / 3)
    np.testing.assert_allclose(z @ x, w * x @ z)


def test_cyclic_qls_q2():
    qls = cat.cyclic_qls(2)
    rep = cat.verify_qls(qls)
    assert rep.passed
    assert rep.info["reshuffle_is_qls"]
    # classical Latin square entries are basis vectors
    assert set(np.round(np.abs(qls).ravel(), 12)) <= {0.0, 1.0}


def test_rotated_qls():
    rep = cat.verify_qls(cat.rotated_qubit_qls(np.pi / 5))
    assert rep.passed


def test_bad_qls():
    qls = cat.cyclic_qls(2).copy()
    qls[0, 1] = qls[0, 0]
    assert not cat.verify_qls(qls).passed


@pytest.mark.parametrize("q", [2, 3])
def test_solvable_states(q, rng):
    assert cat.verify_solvable(cat.solvable_bell_state(q)).passed
    us = [cat.haar_unitary(q, rng) for _ in range(q)]
    assert cat.verify_solvable(cat.solvable_cross_family(q, us)).passed


def test_unsolvable_vertex():
    v = cat.SolvableVertex("bond", np.diag([1.0, 0.0]))
    assert not cat.verify_solvable(v).passed

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary_lab import catalog as cat
from biunitary_lab import compose as comp
from biunitary_lab import hierarchy as hier

seeds = st.integers(0, 2 ** 32 - 1)


def du2(g):
    return hier.check_du2(g).passed


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_kagome_from_du_gates(seed):
    rng = np.random.default_rng(seed)
    g = comp.kagome_du2_unshaded(*[cat.random_du_gate(2, rng) for _ in range(3)], 2, 2)
    assert hier.time_residual(g) < 1e-10
    assert du2(g)


def test_kagome_mixed_dims(rng):
    g = comp.kagome_du2_unshaded(comp.swap_like_du(3, 2, rng), cat.random_du_gate(3, rng),
                                 comp.swap_like_du(2, 3, rng), 2, 3)
    assert g.d == 6
    assert du2(g)
    assert hier.schmidt_analyze(g).rank == 9


def test_swap_like_du_is_dual_unitary(rng):
    u = comp.swap_like_du(2, 3, rng)
    assert hier.unitarity_residual(u) < 1e-12
    # reading the map sideways is unitary as well
    t = u.reshape(3, 2, 2, 3)
    assert hier.unitarity_residual(t.transpose(1, 3, 0, 2).reshape(6, 6)) < 1e-12


def test_kagome_swap_levels():
    g = comp.kagome_swap(2)
    assert du2(g) and hier.check_du3(g).passed


def test_kagome_guard():
    with pytest.raises(comp.GuardError):
        comp.kagome_matrix(np.eye(4096), np.eye(4096), np.eye(4096), 64, 64)


def test_kagome_triunitary_refuses_cnot():
    with pytest.raises(cat.InvalidInput):
        comp.kagome_triunitary(cat.cnot_gate(), cat.swap_gate(2), cat.swap_gate(2))


def test_kagome_triunitary(rng):
    t = comp.kagome_triunitary(*[cat.random_du_gate(2, rng) for _ in range(3)])
    assert hier.check_triunitary(t).passed


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_honeycomb(seed):
    rng = np.random.default_rng(seed)
    g = comp.chm_honeycomb_gate(*[cat.random_chm(2, rng) for _ in range(3)])
    assert du2(g)
    assert not hier.check_dual_unitary(g).passed


def test_honeycomb_q3(rng):
    assert du2(comp.chm_honeycomb_gate(*[cat.random_chm(3, rng) for _ in range(3)]))


def test_triangular_family(rng):
    fam = comp.chm_triangular_gate(*[cat.random_chm(2, rng) for _ in range(4)])
    assert all(du2(g) for g in fam.gates())
    rep = comp.chm_tri_identities(fam)
    assert rep.passed
    assert set(rep.residuals) == {"control_unitarity", "control_horizontal"}


def test_ueb_constructions(rng):
    w = cat.weyl_ueb(2)
    v2 = cat.dressed_ueb(w, cat.haar_unitary(2, rng), cat.haar_unitary(2, rng))
    assert du2(comp.ueb_du2_gate(w, v2, w))
    assert hier.check_triunitary(comp.ueb_trigate(w, w, w)).passed


def test_ueb_refuses_non_ueb(rng):
    with pytest.raises(cat.InvalidInput):
        comp.ueb_du2_gate(rng.normal(size=(4, 2, 2)), cat.weyl_ueb(2), cat.weyl_ueb(2))


@pytest.mark.parametrize("q", [2, 3])
def test_qls_blocks(q):
    qls = cat.cyclic_qls(q)
    assert du2(comp.qls_controlled_gate(qls))
    assert du2(comp.qls_du2_block(qls, cat.fourier_chm(q)))


def test_qls_block_rotated():
    assert du2(comp.qls_du2_block(cat.rotated_qubit_qls(np.pi / 5), cat.fourier_chm(2)))


def test_tuirf_from_crosses_refuses(rng):
    with pytest.raises(cat.InvalidInput):
        comp.tuirf_from_crosses(rng.normal(size=(2, 2, 2, 2)), cat.phased_shift_cross(2),
                                cat.phased_shift_cross(2))


def test_nested_kagome():
    up = comp.nested_kagome("+", seed=0)
    s = hier.schmidt_analyze(up)
    assert (s.d, s.rank) == (16, 4)
    assert np.isclose(s.v_E, 0.25)
    deep = comp.nested_kagome("++", seed=0)
    s2 = hier.schmidt_analyze(deep)
    assert (s2.d, s2.rank) == (256, 4)
    assert np.isclose(s2.v_E, 0.125)


def test_nested_structural_values_match_dense():
    up = comp.nested_kagome("+", seed=3)
    dense = np.sort(hier.svd_values(hier.realign(up.dense().tensor)))[::-1]
    structural = np.sort(np.asarray(up.schmidt_values()))[::-1]
    np.testing.assert_allclose(dense[:len(structural)], structural, atol=1e-9)
    assert du2(up.dense())


def test_nested_dense_guard():
    with pytest.raises(comp.GuardError):
        comp.nested_kagome("++", seed=0).dense()


def test_multilayer_chm_kinds(rng):
    h0, h1 = cat.qubit_chm_pair(0.3)
    np.testing.assert_allclose(comp.multilayer_chm("tensor", h0, h1).matrix, np.kron(h0, h1))
    j = np.array([h0, h1])
    assert comp.multilayer_chm("hs", j, j).q1 == 2
    assert comp.multilayer_chm("dita", h0, j).matrix.shape == (4, 4)
    with pytest.raises(ValueError):
        comp.multilayer_chm("hs", h0, h1)
    with pytest.raises(ValueError):
        comp.multilayer_chm("bogus", h0, h1)


def test_multilayer_du(rng):
    g = comp.multilayer_du_gate(*[comp.random_hs_chm(2, 2, rng) for _ in range(4)])
    assert hier.check_dual_unitary(g).passed


@pytest.mark.parametrize("variant,rank", [(1, 8), (2, 4), (3, 2)])
def test_multilayer_du2_variants(variant, rank, rng):
    h = comp.random_hs_chm(2, 2, rng)
    k = cat.random_chm(2, rng)
    if variant == 1:
        g = comp.multilayer_du2_gate(1, h, k, kt=cat.random_chm(2, rng))
    else:
        g = comp.multilayer_du2_gate(variant, h, k, h2=comp.random_hs_chm(2, 2, rng))
    assert du2(g)
    assert hier.schmidt_analyze(g).rank == rank


@pytest.mark.parametrize("variant", ["DUxDiag", "DU2xDiag"])
def test_multilayer_du3(variant, rng):
    g = comp.multilayer_du3_gate(variant, comp.random_hs_chm(2, 2, rng), cat.random_chm(2, rng))
    assert hier.check_du3(g).passed
    assert not du2(g)
    assert comp.control_identity_residual(g, 2, 2) < 1e-12
    assert comp.layer_schmidt_rank(g, 2, 2) >= 1


@pytest.mark.parametrize("q,ranks", [(2, [1, 2, 4]), (3, [1, 3, 9]), (4, [1, 2, 4, 8, 16]),
                                     (6, [1, 2, 3, 4, 6, 9, 12, 18, 36])])
def test_allowed_velocities(q, ranks):
    got = comp.allowed_velocities(q)
    assert [r for r, _ in got] == ranks
    for r, v in got:
        assert np.isclose(v, np.log(r) / np.log(q * q))


@given(st.integers(2, 30))
def test_allowed_velocity_bounds(q):
    got = comp.allowed_velocities(q)
    assert got[0][0] == 1 and got[-1][0] == q * q
    assert all(0 <= v <= 1 for _, v in got)

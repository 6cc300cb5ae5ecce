import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary_lab import catalog as cat
from biunitary_lab import compose as comp
from biunitary_lab import hierarchy as hier

seeds = st.integers(0, 2 ** 32 - 1)


def levels(g):
    rep = hier.hierarchy_report(g, ("U", "DU", "DU2", "DU3"))
    f = rep.flags
    return f["U"], f["DU_space"], f["DU2_left"] and f["DU2_right"], f["DU3_left"] and f["DU3_right"]


def test_swap_all_levels():
    assert levels(cat.swap_gate(2)) == (True, True, True, True)
    assert levels(cat.swap_gate(3)) == (True, True, True, True)


def test_cnot_is_du2_not_du():
    assert levels(cat.cnot_gate()) == (True, False, True, True)


def test_cz_levels():
    # CZ is DU3 but its DU2 residual is order one, see the decisions ledger
    rep = hier.check_du2(cat.cz_gate())
    assert not rep.passed
    assert hier.check_du3(cat.cz_gate()).passed


def test_identity_gate():
    u, du, du2, du3 = levels(cat.identity_gate(2))
    assert u and not du


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_du_implies_du2_and_du3(seed):
    g = cat.random_du_gate(2, seed)
    assert levels(g) == (True, True, True, True)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_du2_implies_du3(seed):
    rng = np.random.default_rng(seed)
    g = comp.chm_honeycomb_gate(*[cat.random_chm(2, rng) for _ in range(3)])
    assert hier.check_du2(g).passed
    assert hier.check_du3(g).passed


@pytest.mark.parametrize("seed", range(5))
def test_haar_fails(seed):
    u, du, du2, du3 = levels(cat.haar_gate(2, 2, seed))
    assert u and not (du or du2 or du3)


def test_phi_chain_shape_and_guard():
    g = cat.swap_gate(2).tensor
    assert hier.phi_chain(g, 2).shape == (2, 4, 2, 4)
    with pytest.raises(hier.GuardError):
        hier.du_k_residual(cat.swap_gate(8), 9)


def test_residuals_are_local_invariant(rng):
    # single-site dressing preserves DU2
    g = cat.cnot_gate()
    a, b = cat.haar_unitary(2, rng), cat.haar_unitary(2, rng)
    dressed = cat.Gate2.from_matrix(np.kron(a, b) @ g.matrix @ np.kron(b, a).conj().T, 2)
    assert hier.check_du2(dressed).passed


def test_schmidt_swap_and_cnot():
    s = hier.schmidt_analyze(cat.swap_gate(2))
    assert s.rank == 4 and s.flat and np.isclose(s.v_E, 1)
    c = hier.schmidt_analyze(cat.cnot_gate())
    assert c.rank == 2 and c.flat and np.isclose(c.v_E, 0.5)
    np.testing.assert_allclose(np.sum(hier.schmidt_values(cat.cnot_gate()) ** 2), 4)


def test_schmidt_report_json():
    doc = hier.schmidt_analyze(cat.cnot_gate()).to_json()
    assert doc["rank"] == 2 and doc["d"] == 2


def test_triunitary_swap_triangle():
    t = comp.kagome_triunitary(cat.swap_gate(2), cat.swap_gate(2), cat.swap_gate(2))
    assert hier.check_triunitary(t).passed


def test_triunitary_fails_for_random_unitary():
    u = cat.haar_unitary(8, 3).reshape([2] * 6)
    rep = hier.check_triunitary(u)
    assert rep.flags["U"] and not rep.passed


def test_tuirf_crosses(rng):
    t = comp.tuirf_from_crosses(*[cat.random_phased_cross(2, rng) for _ in range(3)])
    assert hier.check_tuirf(t).passed
    assert not hier.check_tuirf(rng.normal(size=(2,) * 6)).passed


def test_pauli_basis():
    b = hier.pauli_basis(2)
    assert len(b) == 3
    for p in b:
        assert abs(np.trace(p)) < 1e-12
        np.testing.assert_allclose(p @ p.conj().T, np.eye(2), atol=1e-12)
    assert len(hier.pauli_basis(3)) == 8


def test_soliton_scan_swap_kagome():
    sols = hier.soliton_scan(comp.kagome_swap(2), factors=((2, 2), (2, 2)))
    assert len(sols) == 12
    assert sorted(s.displacement for s in sols) == [-1] * 3 + [0] * 6 + [1] * 3


def test_soliton_scan_haar_kagome():
    g = comp.kagome_du2_unshaded(*[cat.haar_gate(2, 2, k) for k in range(3)], 2, 2)
    assert hier.soliton_scan(g, factors=((2, 2), (2, 2))) == []

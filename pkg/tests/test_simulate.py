import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary_lab import catalog as cat
from biunitary_lab import compose as comp
from biunitary_lab import hierarchy as hier
from biunitary_lab import simulate as sim

LOG2 = np.log(2)


def honeycomb(seed=0):
    rng = np.random.default_rng(seed)
    return comp.chm_honeycomb_gate(*[cat.random_chm(2, rng) for _ in range(3)])


def test_chain_spec_checks():
    with pytest.raises(ValueError):
        sim.ChainSpec(7, 2)
    with pytest.raises(ValueError):
        sim.ChainSpec(8, 2, boundary="twisted")
    with pytest.raises(ValueError):
        sim.ChainSpec(8, 3, cat.swap_gate(2))
    assert sim.ChainSpec(6, 2).bonds(1) == [(1, 2), (3, 4), (5, 0)]
    assert sim.ChainSpec(6, 2, boundary="open").bonds(1) == [(1, 2), (3, 4)]


def test_state_guard():
    with pytest.raises(sim.GuardError):
        sim.ChainSpec(12, 4).check_state_guard()


@given(st.integers(0, 2 ** 31))
@settings(max_examples=5, deadline=None)
def test_norm_and_entropy_bounds(seed):
    g = cat.haar_gate(2, 2, seed)
    spec = sim.ChainSpec(10, 2, g, boundary="periodic")
    rep = sim.quench(spec, cat.solvable_bell_state(2), 3, [0, 1, 2, 3])
    assert rep.norm_drift < 1e-12
    for n in (1, 2, 3):
        assert all(-1e-12 <= s <= 4 * LOG2 + 1e-12 for s in rep.entropies[n])


def test_renyi_from_probs():
    p = np.full(8, 1 / 8)
    for n in (1, 2, 3):
        assert np.isclose(sim.renyi_from_probs(p, n), 3 * LOG2)
    assert sim.renyi_from_probs(np.array([1.0, 0.0]), 2) == pytest.approx(0)


def test_honeycomb_quench_velocity():
    spec = sim.ChainSpec(16, 2, honeycomb(), boundary="open")
    rep = sim.quench(spec, cat.solvable_bell_state(2), 3, list(range(8)))
    for n in (2, 3):
        np.testing.assert_allclose(np.diff(rep.entropies[n]), LOG2, atol=1e-10)
    assert rep.slope() == pytest.approx([LOG2] * 3, abs=1e-10)


def test_quench_refuses_bad_state():
    spec = sim.ChainSpec(8, 2, honeycomb())
    with pytest.raises(cat.InvalidInput):
        sim.quench(spec, cat.SolvableVertex("bond", np.diag([1.0, 0.0])), 1)


def test_thermalization_exact():
    rng = np.random.default_rng(0)
    g = comp.kagome_du2_unshaded(*[cat.phased_swap_gate(2, rng) for _ in range(3)], 2, 2)
    spec = sim.ChainSpec(10, 4, g, boundary="open")
    dist, step = sim.thermalization_check(spec, cat.solvable_bell_state(2), [3, 4, 5, 6], 2,
                                          placement="site")
    assert step == 2
    assert dist[1] > 1e-3


def test_operator_causality():
    g = cat.haar_gate(2, 2, 11)
    spec = sim.ChainSpec(None, 2, g)
    x = 0
    for t in range(3):
        op = sim.evolve_operator(spec, hier.pauli_basis(2)[2], x, t)
        lo, hi = op.start, op.start + op.n - 1
        assert x - 2 * t - 1 <= lo and hi <= x + 2 * t + 1


def test_correlator_at_t0():
    spec = sim.ChainSpec(8, 2, cat.swap_gate(2))
    p = hier.pauli_basis(2)
    grid = sim.correlation_grid(spec, p[0], p[0], 0, x=2)
    assert grid.values[0, 2] == pytest.approx(1)
    assert np.abs(np.delete(grid.values[0], 2)).max() < 1e-14


def test_honeycomb_correlations_on_rays():
    g = honeycomb(3)
    spec = sim.ChainSpec(8, 2, g)
    p = hier.pauli_basis(2)
    for x in (2, 3):
        grid = sim.correlation_grid(spec, p[2], p[2], 3, x=x)
        assert sim.max_offray(grid, 8) < 1e-10


@pytest.mark.parametrize("name", ["cnot", "du", "honeycomb"])
def test_channels_match_brute_force(name):
    rng = np.random.default_rng(4)
    u, v = cat.haar_unitary(2, rng), cat.haar_unitary(2, rng)
    # dressing compatible with the brickwork: v on a site is undone by v^dag on the next layer
    cnot = np.kron(u, v) @ cat.cnot_gate().matrix @ np.kron(v.conj().T, u.conj().T)
    gates = {"cnot": cat.Gate2.from_matrix(cnot, 2),
             "du": cat.random_du_gate(2, rng), "honeycomb": honeycomb(5)}
    g = gates[name]
    spec = sim.ChainSpec(None, 2, g)
    p = hier.pauli_basis(2)
    worst = 0.0
    for x in (0, 1):
        for s in p:
            for r in p:
                grid = sim.correlation_grid(spec, s, r, 2, x=x)
                for t in range(3):
                    for ray, y in sim.ray_sites(x, t).items():
                        b = grid.values[t, grid.ys.index(y)]
                        worst = max(worst, abs(b - sim.channel_correlator(g, s, r, t, ray, x % 2)))
    assert worst < 1e-10


def test_channels_are_unital():
    chans = sim.one_site_channels(honeycomb(1))
    assert set(chans) == {"right", "left", "stay_left", "stay_right"}
    for m in chans.values():
        np.testing.assert_allclose(m(np.eye(2)), np.eye(2), atol=1e-12)


def test_ray_sites():
    assert sim.ray_sites(2, 0) == {"left": 2, "center": 2, "right": 2}
    assert sim.ray_sites(2, 1) == {"left": 1, "center": 2, "right": 4}
    assert sim.ray_sites(3, 1) == {"left": 1, "center": 3, "right": 4}
    assert sim.ray_sites(0, 2, 8)["left"] == 5


def test_soliton_transport_swap_kagome():
    g = comp.kagome_swap(2)
    spec = sim.ChainSpec(12, 4, g)
    sols = hier.soliton_scan(g, factors=((2, 2), (2, 2)))
    for s in sols:
        site, fac = s.source
        res = sim.soliton_transport(spec, s.operator, 4 + site, fac - 2 * site, (2, 2), 3)
        assert res["soliton"]
        assert max(res["residuals"]) < 1e-10


def test_non_soliton_spreads():
    g = comp.kagome_du2_unshaded(*[cat.haar_gate(2, 2, k) for k in range(3)], 2, 2)
    spec = sim.ChainSpec(12, 4, g)
    res = sim.soliton_transport(spec, hier.pauli_basis(2)[0], 4, 0, (2, 2), 1)
    assert not res["soliton"]


def test_tuirf_quench_entropy():
    rng = np.random.default_rng(2)
    t = comp.tuirf_from_crosses(*[cat.random_phased_cross(2, rng) for _ in range(3)])
    rep = sim.tuirf_quench(t, 16, 3)
    for n in (1, 2, 3):
        np.testing.assert_allclose(rep.entropies[n], [(2 * k + 1) * LOG2 for k in range(4)],
                                   atol=1e-9)
    assert rep.norm_drift < 1e-12


def test_tuirf_guard():
    t = comp.tuirf_from_crosses(*[cat.phased_shift_cross(3)] * 3)
    with pytest.raises(sim.GuardError):
        sim.tuirf_quench(t, 16, 1)


@pytest.mark.parametrize("variant,v", [("DUxDiag", 0.5), ("DU2xDiag", 0.25)])
def test_du3_control(variant, v):
    rng = np.random.default_rng(9)
    g = comp.multilayer_du3_gate(variant, comp.random_hs_chm(2, 2, rng), cat.random_chm(2, rng))
    r = sim.du3_control_dynamics(g, 2, 2, [1, 0, 0, 1, 1, 0], t_max=3)
    assert max(abs(x) for x in r["inter_layer_S2"]) < 1e-10
    assert min(r["top_fidelity"]) > 1 - 1e-10
    np.testing.assert_allclose(r["v_E"], v, atol=1e-10)


def test_n_threads(monkeypatch):
    monkeypatch.setenv("BIUNITARY_LAB_THREADS", "3")
    assert sim.n_threads() == 3
    monkeypatch.setenv("BIUNITARY_LAB_THREADS", "x")
    assert sim.n_threads() == 1

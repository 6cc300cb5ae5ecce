"""Acceptance battery: ten numbered criteria, each a function returning a Result.

Tolerances follow the criteria; ``tol`` replaces the 1e-10 machine-precision
threshold so the battery can be tightened from the command line.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import DEFAULT_TOL
from . import catalog as cat
from . import compose as comp
from . import hierarchy as hier
from . import simulate as sim


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number} ({self.name})"


def _check(details, key, ok):
    details.setdefault("checks", {})[key] = bool(ok)
    return bool(ok)


def _all(details):
    return all(details.get("checks", {}).values())


# ---------------------------------------------------------------- 1

def reference_hs(phi):
    e = np.exp(1j * phi)
    return np.array([[1, 1, e, 1],
                     [e, -e, 1, -1 / e],
                     [1, 1, -e, -1],
                     [1, -1, -1 / e, e ** -2]])


def reference_dita(phi):
    e = np.exp(1j * phi)
    return np.array([[1, 1, e, 1],
                     [1, -1, 1, -1 / e],
                     [1, 1, -e, -1],
                     [1, -1, -1, 1 / e]])


def crit_chm(tol=DEFAULT_TOL, seed=0):
    det = {}
    worst = 0.0
    h0, _ = cat.qubit_chm_pair(0.0)
    mats = [h0] + [cat.qubit_chm_pair(p)[1] for p in np.linspace(0, 2 * np.pi, 20, endpoint=False)]
    mats += [cat.fourier_chm(q) for q in range(2, 6)]
    match = 0.0
    for phi in (0.0, 0.7, np.pi / 2):
        h0, h1 = cat.qubit_chm_pair(phi)
        j = np.array([h0, h1])
        tp = comp.multilayer_chm("tensor", h0, h1).matrix
        hs = comp.multilayer_chm("hs", j, j).matrix
        di = comp.multilayer_chm("dita", h0, j).matrix
        mats += [tp, hs, di]
        match = max(match, np.abs(tp - np.kron(h0, h1)).max(),
                    np.abs(hs - reference_hs(phi)).max(), np.abs(di - reference_dita(phi)).max())
    for m in mats:
        worst = max(worst, max(cat.verify_chm(m, tol).residuals.values()))
    det["worst_residual"] = worst
    det["reference_mismatch"] = float(match)
    _check(det, "all_chm", worst < tol)
    _check(det, "reference_entries", match < 1e-12)
    return _all(det), det


# ---------------------------------------------------------------- 2

def crit_hierarchy(tol=DEFAULT_TOL, seed=0):
    det = {}
    conds = ("DU", "DU2", "DU3")

    def rep(g):
        return {c: max(v for k, v in hier.hierarchy_report(g, [c], tol).residuals.items() if k != "U")
                for c in conds}

    sw, cn, cz = rep(cat.swap_gate(2)), rep(cat.cnot_gate()), rep(cat.cz_gate())
    det["SWAP"], det["CNOT"], det["CZ"] = sw, cn, cz
    _check(det, "swap_all", all(sw[c] < tol for c in conds))
    _check(det, "cnot_fails_du", cn["DU"] > tol)
    _check(det, "cnot_du2_du3", cn["DU2"] < tol and cn["DU3"] < tol)
    _check(det, "cz_du2", cz["DU2"] < tol)
    _check(det, "cz_du3", cz["DU3"] < tol)
    rng = np.random.default_rng(seed)
    low = min(min(rep(cat.haar_gate(2, 2, rng)).values()) for _ in range(20))
    det["haar_min_residual"] = low
    _check(det, "haar_fail_all", low > 1e-2)
    return _all(det), det


# ---------------------------------------------------------------- 3

def q2_constructions(seed=0):
    """Every DU2 construction at q = 2, keyed by name."""
    rng = np.random.default_rng(seed)
    du = [cat.random_du_gate(2, rng) for _ in range(3)]
    hs = [cat.random_chm(2, rng) for _ in range(4)]
    w = cat.weyl_ueb(2)
    out = {
        "kagome_du2_unshaded": comp.kagome_du2_unshaded(*du, 2, 2),
        "chm_honeycomb_gate": comp.chm_honeycomb_gate(*hs[:3]),
        "ueb_du2_gate": comp.ueb_du2_gate(w, cat.dressed_ueb(w, cat.haar_unitary(2, rng),
                                                             cat.haar_unitary(2, rng)), w),
        "qls_du2_block": comp.qls_du2_block(cat.cyclic_qls(2), cat.fourier_chm(2)),
    }
    for c, g in enumerate(comp.chm_triangular_gate(*hs).gates()):
        out[f"chm_triangular_gate[c={c}]"] = g
    hsm = [comp.random_hs_chm(2, 2, rng) for _ in range(2)]
    out["multilayer_du2_v1"] = comp.multilayer_du2_gate(1, hsm[0], cat.random_chm(2, rng),
                                                        kt=cat.random_chm(2, rng))
    out["multilayer_du2_v2"] = comp.multilayer_du2_gate(2, hsm[0], cat.random_chm(2, rng), h2=hsm[1])
    out["multilayer_du2_v3"] = comp.multilayer_du2_gate(3, hsm[0], cat.random_chm(2, rng), h2=hsm[1])
    return out


def crit_kagome(tol=DEFAULT_TOL, seed=0):
    det = {}
    rng = np.random.default_rng(seed)
    for name, g in q2_constructions(seed).items():
        r = hier.check_du2(g, tol)
        det[name] = max(r.residuals.values())
        _check(det, name, r.passed)
    fam = comp.chm_triangular_gate(*[cat.random_chm(2, rng) for _ in range(4)])
    ids = comp.chm_tri_identities(fam, tol)
    _check(det, "chm_triangular_identities", ids.passed)
    t = comp.tuirf_from_crosses(*[cat.random_phased_cross(2, rng) for _ in range(3)])
    r = hier.check_tuirf(t, tol)
    det["tuirf"] = max(r.residuals.values())
    _check(det, "tuirf", r.passed)
    tri = comp.kagome_triunitary(*[cat.random_du_gate(2, rng) for _ in range(3)])
    r = hier.check_triunitary(tri, tol)
    det["kagome_triunitary"] = max(r.residuals.values())
    _check(det, "kagome_triunitary", r.passed)
    w = cat.weyl_ueb(2)
    r = hier.check_triunitary(comp.ueb_trigate(w, w, w), tol)
    det["ueb_trigate"] = max(r.residuals.values())
    _check(det, "ueb_trigate", r.passed)
    return _all(det), det


# ---------------------------------------------------------------- 4

def crit_velocity(tol=DEFAULT_TOL, seed=0):
    det = {}
    rng = np.random.default_rng(seed)
    cases = []
    du = [cat.random_du_gate(2, rng) for _ in range(3)]
    cases.append(("kagome q=2", comp.kagome_du2_unshaded(*du, 2, 2), 0.5))
    mixed = comp.kagome_du2_unshaded(comp.swap_like_du(3, 2, rng), cat.random_du_gate(3, rng),
                                     comp.swap_like_du(2, 3, rng), 2, 3)
    cases.append(("kagome q1=2 q2=3", mixed, np.log(9) / np.log(36)))
    cases.append(("U_+", comp.nested_kagome("+", seed=seed), 0.25))
    cases.append(("U_-", comp.nested_kagome("-", seed=seed), 0.25))
    cases.append(("depth 2", comp.nested_kagome("++", seed=seed), 0.125))
    ml = q2_constructions(seed)
    for v, want in ((1, 0.75), (2, 0.5), (3, 0.25)):
        cases.append((f"multilayer v{v}", ml[f"multilayer_du2_v{v}"], want))
    for name, g, want in cases:
        s = hier.schmidt_analyze(g)
        det[name] = {"R": s.rank, "v_E": s.v_E, "expected": want, "flat": s.flat}
        _check(det, name, abs(s.v_E - want) < 1e-12 and s.flat)
    return _all(det), det


# ---------------------------------------------------------------- 5

def crit_correlations(tol=DEFAULT_TOL, seed=0):
    det = {}
    rng = np.random.default_rng(seed)
    g = comp.chm_honeycomb_gate(*[cat.random_chm(2, rng) for _ in range(3)])
    spec = sim.ChainSpec(8, 2, g)
    paulis = hier.pauli_basis(2)
    off, chan = 0.0, 0.0
    for x in (2, 3):
        for s in paulis:
            for r in paulis:
                grid = sim.correlation_grid(spec, s, r, 3, x=x)
                off = max(off, sim.max_offray(grid, 8))
                for t in range(4):
                    for ray, y in sim.ray_sites(x, t, 8).items():
                        b = grid.values[t, grid.ys.index(y)]
                        c = sim.channel_correlator(g, s, r, t, ray, x % 2)
                        chan = max(chan, abs(b - c))
    det["max_offray"] = off
    det["channel_vs_brute"] = chan
    _check(det, "offray", off < tol)
    _check(det, "channel", chan < tol)
    return _all(det), det


# ---------------------------------------------------------------- 6

def thermal_gate(seed=0):
    rng = np.random.default_rng(seed)
    return comp.kagome_du2_unshaded(*[cat.phased_swap_gate(2, rng) for _ in range(3)], 2, 2)


def crit_thermalization(tol=DEFAULT_TOL, seed=0):
    det = {}
    g = thermal_gate(seed)
    spec = sim.ChainSpec(10, 4, g, boundary="open")
    bell = cat.solvable_bell_state(2)
    for ell, region in ((1, [3, 4]), (2, [3, 4, 5, 6])):
        dist, _ = sim.thermalization_check(spec, bell, region, ell, placement="site", tol=tol)
        det[f"l={ell}"] = dist
        _check(det, f"exact at t={ell}", dist[ell] < tol)
        _check(det, f"not yet at t={ell - 1}", dist[ell - 1] > 1e-3)
    return _all(det), det


# ---------------------------------------------------------------- 7

def crit_tuirf(tol=DEFAULT_TOL, seed=0):
    det = {}
    rng = np.random.default_rng(seed)
    t = comp.tuirf_from_crosses(*[cat.random_phased_cross(2, rng) for _ in range(3)])
    rep = sim.tuirf_quench(t, 16, 3)
    err = 0.0
    for n in (2, 3):
        for tt in (1, 2, 3):
            err = max(err, abs(rep.entropies[n][tt] - (2 * tt + 1) * np.log(2)))
    spread = max(abs(rep.entropies[2][tt] - rep.entropies[n][tt]) for n in (1, 3) for tt in range(4))
    det["max_error"] = err
    det["renyi_spread"] = spread
    _check(det, "entropy", err < 1e-8)
    _check(det, "flat", spread < 1e-8)
    return _all(det), det


# ---------------------------------------------------------------- 8

def crit_solitons(tol=DEFAULT_TOL, seed=0):
    det = {}
    g = comp.kagome_swap(2)
    sols = hier.soliton_scan(g, factors=((2, 2), (2, 2)), tol=tol)
    paulis = hier.pauli_basis(2)
    counts = []
    for s in paulis:
        mine = [x for x in sols if np.allclose(x.operator, s)]
        kinds = sorted(x.displacement for x in mine)
        counts.append(kinds)
    det["per_pauli_displacements"] = counts
    _check(det, "four_per_pauli", all(k == [-1, 0, 0, 1] for k in counts))
    spec = sim.ChainSpec(12, 4, g)
    worst = 0.0
    for sol in sols:
        site, fac = sol.source
        x = 4 + site
        res = sim.soliton_transport(spec, sol.operator, x, fac - 2 * site, (2, 2), 3, tol)
        worst = max(worst, max(res["residuals"]))
    det["transport_residual"] = worst
    _check(det, "transport", worst < tol)
    haar = comp.kagome_du2_unshaded(*[cat.haar_gate(2, 2, seed + k) for k in range(3)], 2, 2)
    n = len(hier.soliton_scan(haar, factors=((2, 2), (2, 2)), tol=tol))
    det["haar_solitons"] = n
    _check(det, "haar_none", n == 0)
    return _all(det), det


# ---------------------------------------------------------------- 9

def crit_du3(tol=DEFAULT_TOL, seed=0):
    det = {}
    rng = np.random.default_rng(seed)
    want = {"DUxDiag": 0.5, "DU2xDiag": 0.25}
    for v in ("DUxDiag", "DU2xDiag"):
        g = comp.multilayer_du3_gate(v, comp.random_hs_chm(2, 2, rng), cat.random_chm(2, rng))
        _check(det, f"{v} du3", hier.check_du3(g, tol).passed)
        _check(det, f"{v} not du2", not hier.check_du2(g, tol).passed)
        r = sim.du3_control_dynamics(g, 2, 2, [0, 1, 1, 0, 1, 0], t_max=3)
        det[v] = {"v_E": r["v_E"], "inter_layer_S2": max(abs(x) for x in r["inter_layer_S2"]),
                  "control_identity": r["control_identity"]}
        _check(det, f"{v} control identity", r["control_identity"] < tol)
        _check(det, f"{v} no inter-layer entanglement", max(abs(x) for x in r["inter_layer_S2"]) < tol)
        _check(det, f"{v} top stationary", min(r["top_fidelity"]) > 1 - tol)
        _check(det, f"{v} slope", all(abs(x - want[v]) < 0.05 * want[v] for x in r["v_E"]))
    return _all(det), det


# ---------------------------------------------------------------- 10

EXPECTED_RANKS = {2: [1, 2, 4], 3: [1, 3, 9], 4: [1, 2, 4, 8, 16],
                  6: [1, 2, 3, 4, 6, 9, 12, 18, 36]}


def crit_conjecture(tol=DEFAULT_TOL, seed=0):
    det = {}
    for q, ranks in EXPECTED_RANKS.items():
        got = comp.allowed_velocities(q)
        ok = [r for r, _ in got] == ranks and all(
            abs(v - np.log(r) / np.log(q * q)) < 1e-12 for r, v in got)
        _check(det, f"set q={q}", ok)
    gates = dict(q2_constructions(seed))
    rng = np.random.default_rng(seed)
    gates["kagome q1=2 q2=3"] = comp.kagome_du2_unshaded(
        comp.swap_like_du(3, 2, rng), cat.random_du_gate(3, rng), comp.swap_like_du(2, 3, rng), 2, 3)
    gates["U_+"] = comp.nested_kagome("+", seed=seed)
    gates["depth 2"] = comp.nested_kagome("++", seed=seed)
    gates["cnot"] = cat.cnot_gate()
    for name, g in gates.items():
        s = hier.schmidt_analyze(g)
        allowed = comp.allowed_velocities(s.d)
        member = any(r == s.rank and abs(v - s.v_E) < 1e-12 for r, v in allowed)
        det[name] = {"q": s.d, "R": s.rank, "v_E": s.v_E}
        _check(det, name, member)
    return _all(det), det


CRITERIA = [
    (1, "chm", crit_chm),
    (2, "hierarchy", crit_hierarchy),
    (3, "kagome", crit_kagome),
    (4, "velocity", crit_velocity),
    (5, "correlations", crit_correlations),
    (6, "thermalization", crit_thermalization),
    (7, "tuirf", crit_tuirf),
    (8, "solitons", crit_solitons),
    (9, "du3", crit_du3),
    (10, "conjecture", crit_conjecture),
]


def run(filter_name=None, tol=DEFAULT_TOL, seed=0):
    out = []
    for num, name, fn in CRITERIA:
        if filter_name and filter_name not in name and filter_name != str(num):
            continue
        t0 = time.perf_counter()
        ok, det = fn(tol=tol, seed=seed)
        out.append(Result(num, name, ok, det, time.perf_counter() - t0))
    return out

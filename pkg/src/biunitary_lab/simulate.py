"""Exact finite-chain dynamics for brickwork and TUIRF circuits.

Brickwork convention: one time step is layer A on bonds (0,1), (2,3), ...
followed by layer B on bonds (1,2), (3,4), ... (on a ring the last B bond is
(L-1, 0)). Operators evolve as sigma(t) = U(t) sigma U(t)^dag and the
correlator is C(x, y, t) = tr[sigma_x(t) rho_y] / d^L.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .catalog import Gate2, SolvableVertex, _require, verify_solvable
from .hierarchy import single_factor_part

MAX_STATE = 2 ** 20
MAX_OPERATOR = 2 ** 24


class GuardError(RuntimeError):
    pass


def n_threads():
    """Thread cap for grid evaluation, from BIUNITARY_LAB_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("BIUNITARY_LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ChainSpec:
    L: int | None  # None: infinite chain (operator evolution only)
    d: int
    gate: Gate2 | None = None
    t_max: int = 3
    boundary: str = "periodic"

    def __post_init__(self):
        if self.L is not None:
            if self.L % 2:
                raise ValueError("brickwork chains need an even number of sites")
            if self.boundary not in ("periodic", "open"):
                raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.gate is not None and self.gate.d != self.d:
            raise ValueError(f"gate dimension {self.gate.d} does not match d={self.d}")

    def check_state_guard(self):
        if self.L is None or self.d ** self.L > MAX_STATE:
            raise GuardError(f"state dimension d^L exceeds {MAX_STATE}")

    def bonds(self, layer):
        """Bonds (i, i+1) of half-layer 0 (A) or 1 (B)."""
        if self.L is None:
            raise ValueError("bond list of an infinite chain")
        out = []
        for i in range(layer, self.L, 2):
            j = i + 1
            if j == self.L:
                if self.boundary != "periodic":
                    continue
                j = 0
            out.append((i, j))
        return out


# ---------------------------------------------------------------- states

def apply_two_site(psi, L, d, u4, i, j):
    """Apply a (d,d,d,d) gate tensor to sites i (left) and j (right) of psi (shape (d,)*L)."""
    out = np.tensordot(u4, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def brickwork_step(spec: ChainSpec, psi):
    u4 = spec.gate.tensor
    for layer in (0, 1):
        for i, j in spec.bonds(layer):
            psi = apply_two_site(psi, spec.L, spec.d, u4, i, j)
    return psi


def solvable_product_state(spec: ChainSpec, vertex: SolvableVertex, offset=1):
    """Bond states on sites (offset + 2k, offset + 2k + 1), normalized.

    With offset 1 the first layer acts across the pairs. On a ring the last
    pair wraps around; on an open chain the two end sites share that pair.
    """
    spec.check_state_guard()
    w = _bond_payload(vertex, spec.d)
    L = spec.L
    psi = np.ones((), dtype=complex)
    for _ in range(L // 2):
        psi = np.multiply.outer(psi, w)
    psi = psi / np.linalg.norm(psi)
    return np.moveaxis(psi, list(range(L)), [(k + offset) % L for k in range(L)])


def solvable_site_state(spec: ChainSpec, vertex: SolvableVertex):
    """Each site holds two sub-wires joined by the bond state (site dimension q*q)."""
    spec.check_state_guard()
    q = int(round(np.sqrt(spec.d)))
    if q * q != spec.d:
        raise ValueError("site-internal bond states need a square site dimension")
    w = _bond_payload(vertex, q).reshape(spec.d)
    w = w / np.linalg.norm(w)
    psi = np.ones((), dtype=complex)
    for _ in range(spec.L):
        psi = np.multiply.outer(psi, w)
    return psi


def _bond_payload(vertex, dim):
    if vertex.kind != "bond":
        raise ValueError("brickwork quenches use bond-type solvable states")
    w = np.asarray(vertex.payload, dtype=complex)
    if w.shape != (dim, dim):
        raise ValueError(f"bond state of size {w.shape} where {dim} x {dim} is needed")
    return w


def _region_matrix(psi, L, region):
    region = list(region)
    rest = [k for k in range(L) if k not in region]
    m = np.transpose(psi, region + rest)
    return m.reshape(psi.shape[0] ** len(region), -1)


def renyi_from_probs(p, n):
    p = p[p > 1e-15]
    if n == 1:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p ** n)) / (1 - n))


def region_spectrum(psi, L, region):
    s = np.linalg.svd(_region_matrix(psi, L, region), compute_uv=False)
    return s ** 2


def reduced_density(psi, L, region):
    m = _region_matrix(psi, L, region)
    return m @ m.conj().T


@dataclass
class QuenchReport:
    region: list
    entropies: dict  # n -> list over t (n = 1 is von Neumann)
    rho_A_distance: list
    norm_drift: float
    info: dict = field(default_factory=dict)

    def slope(self, n=2, ts=(1, 2, 3)):
        s = self.entropies[n]
        return [s[t] - s[t - 1] for t in ts if t < len(s)]


def _analyse(psi, L, region, d):
    p = region_spectrum(psi, L, region)
    ent = {n: renyi_from_probs(p, n) for n in (1, 2, 3)}
    rho = reduced_density(psi, L, region)
    dist = float(np.linalg.norm(rho - np.eye(rho.shape[0]) / rho.shape[0]))
    return ent, dist


def quench(spec: ChainSpec, initial: SolvableVertex, t_max=None, region=None, offset=1,
           placement="bond", tol=1e-10) -> QuenchReport:
    """Evolve a solvable product state and record entropies of ``region``.

    placement "bond" pairs neighbouring sites; "site" pairs the two sub-wires
    inside every site.
    """
    _require(verify_solvable(initial, tol), "initial state")
    spec.check_state_guard()
    t_max = spec.t_max if t_max is None else t_max
    L = spec.L
    region = list(range(L // 2)) if region is None else list(region)
    if placement == "bond":
        psi = solvable_product_state(spec, initial, offset)
    elif placement == "site":
        psi = solvable_site_state(spec, initial)
    else:
        raise ValueError(f"unknown placement {placement!r}")
    ents = {1: [], 2: [], 3: []}
    dists = []
    drift = 0.0
    for t in range(t_max + 1):
        if t:
            psi = brickwork_step(spec, psi)
        e, dist = _analyse(psi, L, region, spec.d)
        for n in ents:
            ents[n].append(e[n])
        dists.append(dist)
        drift = max(drift, abs(np.linalg.norm(psi) - 1))
    return QuenchReport(region, ents, dists, drift)


def thermalization_check(spec: ChainSpec, initial: SolvableVertex, region, t_max=None,
                         offset=1, placement="bond", tol=1e-10):
    """Distance of rho_A(t) from the maximally mixed state, per t, and the first exact step.

    For infinite-chain behaviour use an open chain that contains the backward
    light cone of the region.
    """
    rep = quench(spec, initial, t_max, region, offset, placement, tol)
    step = next((t for t, x in enumerate(rep.rho_A_distance) if x < tol), None)
    return rep.rho_A_distance, step


# ---------------------------------------------------------------- operators

@dataclass
class LocalOperator:
    """Operator supported on consecutive sites [start, start + n); identity elsewhere.

    Tensor legs are (out_1..out_n, in_1..in_n). On a ring, positions are taken mod L.
    """
    start: int
    tensor: np.ndarray

    @property
    def n(self):
        return self.tensor.ndim // 2

    def sites(self, L=None):
        s = [self.start + k for k in range(self.n)]
        return [x % L for x in s] if L else s

    def matrix(self):
        dim = int(np.prod(self.tensor.shape[:self.n]))
        return self.tensor.reshape(dim, dim)


def _pad(op: LocalOperator, left, right, d):
    t = op.tensor
    n = op.n
    eye = np.eye(d)
    for _ in range(left):
        t = np.multiply.outer(eye, t)  # (o, i, O..., I...)
        t = np.moveaxis(t, 1, n + 1)
        n += 1
    for _ in range(right):
        t = np.multiply.outer(t, eye)
        t = np.moveaxis(t, 2 * n, n)
        n += 1
    return LocalOperator(op.start - left, t)


def _trim(op: LocalOperator, d, tol=1e-12):
    """Drop identity factors at both edges."""
    while op.n > 1:
        n = op.n
        t = op.tensor
        red = np.trace(t, axis1=0, axis2=n) / d
        if np.linalg.norm(t - np.moveaxis(np.multiply.outer(np.eye(d), red), 1, n)) < tol:
            op = LocalOperator(op.start + 1, red)
            continue
        red = np.trace(t, axis1=n - 1, axis2=2 * n - 1) / d
        full = np.moveaxis(np.multiply.outer(red, np.eye(d)), 2 * n - 2, n - 1)
        if np.linalg.norm(t - full) < tol:
            op = LocalOperator(op.start, red)
            continue
        break
    return op


def _apply_bond(op: LocalOperator, u4, i):
    """U_{i,i+1} op U^dag, with i given relative to the chain and inside op's support."""
    n = op.n
    a = i - op.start
    t = np.tensordot(u4, op.tensor, axes=([2, 3], [a, a + 1]))
    t = np.moveaxis(t, [0, 1], [a, a + 1])
    t = np.tensordot(t, u4.conj(), axes=([n + a, n + a + 1], [2, 3]))
    return LocalOperator(op.start, np.moveaxis(t, [2 * n - 2, 2 * n - 1], [n + a, n + a + 1]))


def half_layer_operator(op: LocalOperator, u4, layer, d, L=None, trim=True):
    """Apply every bond of the half-layer that touches the support. For a ring
    the support may not exceed L sites; wrapping is handled by position mod L."""
    lo = op.start
    hi = op.start + op.n - 1
    first = lo if (lo - layer) % 2 == 0 else lo - 1
    last = hi - 1 if (hi - 1 - layer) % 2 == 0 else hi
    left, right = lo - first, last + 1 - hi
    if L is not None and op.n + left + right > L:
        return _ring_full(op, u4, layer, d, L)
    if (d ** (op.n + left + right)) ** 2 > MAX_OPERATOR:
        raise GuardError("operator support exceeds the memory guard")
    op = _pad(op, left, right, d)
    for i in range(first, last + 1, 2):
        op = _apply_bond(op, u4, i)
    return _trim(op, d) if trim else op


def _ring_full(op, u4, layer, d, L):
    """Fall back to the whole ring once the support wraps around."""
    if (d ** L) ** 2 > MAX_OPERATOR:
        raise GuardError("operator on the full ring exceeds the memory guard")
    if op.n < L:
        op = _pad(op, 0, L - op.n, d)
    # reorder so that position 0 is the first leg
    shift = op.start % L
    t = op.tensor
    perm = [(k - shift) % L for k in range(L)]
    t = np.transpose(t, perm + [p + L for p in perm])
    op = LocalOperator(0, t)
    for i in range(layer, L, 2):
        j = (i + 1) % L
        if j == 0:
            t = op.tensor
            t = np.tensordot(u4, t, axes=([2, 3], [i, 0]))
            t = np.moveaxis(t, [0, 1], [i, 0])
            t = np.tensordot(t, u4.conj(), axes=([L + i, L], [2, 3]))
            t = np.moveaxis(t, [2 * L - 2, 2 * L - 1], [L + i, L])
            op = LocalOperator(0, t)
        else:
            op = _apply_bond(op, u4, i)
    op.ring = True
    return op


def evolve_operator(spec: ChainSpec, sigma, x, t, trim=True):
    """Heisenberg evolution of a one-site operator, restricted to its causal cone."""
    op = LocalOperator(x, np.asarray(sigma, dtype=complex))
    u4 = spec.gate.tensor
    for _ in range(t):
        for layer in (0, 1):
            op = half_layer_operator(op, u4, layer, spec.d, spec.L, trim=trim and not getattr(op, "ring", False))
    return op


def correlator(op: LocalOperator, rho, y, d, L=None):
    """tr[op rho_y] / d^n with op already normalized to its support."""
    sites = op.sites(L)
    y = y % L if L else y
    if y not in sites:
        return complex(np.trace(op.matrix()) / d ** op.n * np.trace(rho) / d)
    k = sites.index(y)
    n = op.n
    t = np.moveaxis(op.tensor, [k, n + k], [0, 1])
    t = np.tensordot(t, rho, axes=([0, 1], [1, 0]))
    m = t.reshape(d ** (n - 1), d ** (n - 1)) if n > 1 else t
    return complex(np.trace(np.atleast_2d(m)) / d ** n)


@dataclass
class CorrelationGrid:
    x: int
    ys: list
    values: np.ndarray  # (t_max + 1, len(ys))

    def rows(self):
        for t in range(self.values.shape[0]):
            for k, y in enumerate(self.ys):
                v = self.values[t, k]
                yield t, self.x, y, float(v.real), float(v.imag)


def correlation_grid(spec: ChainSpec, sigma, rho, t_max=None, x=0) -> CorrelationGrid:
    """Brute-force C(x, y, t) for every y on the chain (or in the cone for an infinite chain)."""
    t_max = spec.t_max if t_max is None else t_max
    d = spec.d
    if spec.L is None:
        ys = list(range(x - 2 * t_max - 1, x + 2 * t_max + 2))
    else:
        ys = list(range(spec.L))
    vals = np.zeros((t_max + 1, len(ys)), dtype=complex)
    op = LocalOperator(x, np.asarray(sigma, dtype=complex))
    for t in range(t_max + 1):
        if t:
            for layer in (0, 1):
                op = half_layer_operator(op, spec.gate.tensor, layer, d, spec.L,
                                         trim=not getattr(op, "ring", False))
        for k, y in enumerate(ys):
            vals[t, k] = correlator(op, rho, y, d, spec.L)
    return CorrelationGrid(x, ys, vals)


def ray_sites(x, t, L=None):
    """Positions (left, centre, right) reached after t steps from site x."""
    if x % 2 == 0:
        pos = {"left": x - 2 * t + 1, "center": x, "right": x + 2 * t}
    else:
        pos = {"left": x - 2 * t, "center": x, "right": x + 2 * t - 1}
    if t == 0:
        pos = {"left": x, "center": x, "right": x}
    return {k: (v % L if L else v) for k, v in pos.items()}


def max_offray(grid: CorrelationGrid, L=None):
    worst = 0.0
    for t in range(grid.values.shape[0]):
        on = set(ray_sites(grid.x, t, L).values())
        for k, y in enumerate(grid.ys):
            if (y % L if L else y) not in on:
                worst = max(worst, abs(grid.values[t, k]))
    return worst


def one_site_channels(gate: Gate2):
    """The four one-site channels of a gate, each unital and trace preserving."""
    u = gate.matrix
    d = gate.d
    eye = np.eye(d)

    def conj(x):
        return u @ x @ u.conj().T

    def tr_left(y):
        return np.einsum("abac->bc", y.reshape(d, d, d, d)) / d

    def tr_right(y):
        return np.einsum("abcb->ac", y.reshape(d, d, d, d)) / d

    return {
        "right": lambda x: tr_left(conj(np.kron(x, eye))),
        "left": lambda x: tr_right(conj(np.kron(eye, x))),
        "stay_left": lambda x: tr_right(conj(np.kron(x, eye))),
        "stay_right": lambda x: tr_left(conj(np.kron(eye, x))),
    }


def channel_path(ray, t, parity):
    """Sequence of one-site channels along a ray for a start site of given parity."""
    if t == 0:
        return []
    if parity == 0:
        return {"right": ["right"] * (2 * t),
                "center": ["stay_left", "stay_right"] * t,
                "left": ["stay_left"] + ["left"] * (2 * t - 1)}[ray]
    return {"right": ["stay_right"] + ["right"] * (2 * t - 1),
            "center": ["stay_right", "stay_left"] * t,
            "left": ["left"] * (2 * t)}[ray]


def channel_correlator(gate: Gate2, sigma, rho, t, ray="right", parity=0):
    """On-ray correlator from repeated one-site channels."""
    if ray not in ("left", "center", "right"):
        raise ValueError(f"unknown ray {ray!r}")
    ch = one_site_channels(gate)
    x = np.asarray(sigma, dtype=complex)
    for name in channel_path(ray, t, parity):
        x = ch[name](x)
    return complex(np.trace(x @ np.asarray(rho)) / gate.d)


# ---------------------------------------------------------------- solitons

def soliton_transport(spec: ChainSpec, operator, x, factor, factors, t, tol=1e-10):
    """Evolve an operator living on one tensor factor of site x.

    The prediction follows the operator gate by gate, requiring it to stay on
    a single factor; it is compared with the full light-cone evolution after
    every layer. ``factors`` lists the factor dimensions of a site.
    Returns dict with positions, residuals, supports and whether it stayed a soliton.
    """
    d = spec.d
    factors = tuple(factors)
    flat2 = factors + factors
    u = spec.gate.matrix
    op = LocalOperator(x, _embed_site(operator, factor, factors))
    cur = (x, factor, np.asarray(operator, dtype=complex))
    positions, residuals, supports = [x], [], [1]
    alive = True
    for _ in range(t):
        for layer in (0, 1):
            op = half_layer_operator(op, spec.gate.tensor, layer, d, spec.L)
            if alive:
                pos, f, s = cur
                left = pos if (pos - layer) % 2 == 0 else pos - 1
                slot = pos - left
                k = slot * len(factors) + f
                from .hierarchy import embed
                img = u @ embed(s, k, flat2) @ u.conj().T
                hit = None
                for tgt in range(len(flat2)):
                    if flat2[tgt] != flat2[k]:
                        continue
                    s2 = single_factor_part(img, tgt, flat2, tol)
                    if s2 is not None and np.linalg.norm(s2) > tol:
                        hit = (left + tgt // len(factors), tgt % len(factors), s2)
                        break
                if hit is None:
                    alive = False
                else:
                    cur = hit
                    if spec.L:
                        cur = (cur[0] % spec.L, cur[1], cur[2])
        supports.append(op.n)
        if alive:
            pos, f, s = cur
            positions.append(pos)
            want = LocalOperator(pos, _embed_site(s, f, factors))
            residuals.append(_op_distance(op, want, d, spec.L))
        else:
            positions.append(None)
            residuals.append(np.inf)
    return {"positions": positions, "residuals": residuals, "supports": supports,
            "soliton": alive and max(residuals, default=0) < tol}


def _embed_site(s, f, factors):
    from .hierarchy import embed
    d = int(np.prod(factors))
    return embed(s, f, factors).reshape(d, d)


def _op_distance(a: LocalOperator, b: LocalOperator, d, L):
    if L:
        b = LocalOperator(b.start + L * round((a.start - b.start) / L), b.tensor)
    lo = min(a.start, b.start)
    hi = max(a.start + a.n, b.start + b.n)
    if L and hi - lo > L:
        raise ValueError("operators too wide to compare on this ring")
    pa = _pad(a, a.start - lo, hi - a.start - a.n, d)
    pb = _pad(b, b.start - lo, hi - b.start - b.n, d)
    return float(np.linalg.norm(pa.tensor - pb.tensor) / np.sqrt(d ** pa.n))


# ---------------------------------------------------------------- TUIRF chain

def tuirf_apply(psi, T, i):
    """G_{i,i+1} controlled by faces i-1 and i+2 on a chain of faces (shape (q,)*L)."""
    L = psi.ndim
    q = T.shape[0]
    p = psi.reshape(q ** (i - 1), q, q, q, q, q ** (L - i - 3))
    out = np.einsum("abcdef,xaefdy->xabcdy", T, p, optimize=True)
    return out.reshape((q,) * L)


def tuirf_step(psi, T):
    """One time step: pairs (2m, 2m+1) with m even, then m odd; open ends."""
    L = psi.ndim
    for par in (0, 1):
        for m in range(L):
            i = 2 * m
            if m % 2 != par or i - 1 < 0 or i + 2 > L - 1:
                continue
            psi = tuirf_apply(psi, T, i)
    return psi


def tuirf_initial_state(q, L, vertex: SolvableVertex | None = None):
    """Even faces share one value (GHZ-type); odd faces are uniform, weighted by the cross W."""
    if q ** L > MAX_STATE:
        raise GuardError(f"state dimension q^L exceeds {MAX_STATE}")
    w = np.ones((q, q)) if vertex is None else np.asarray(vertex.payload)
    if w.ndim != 2:
        w = np.ones((q, q))
    psi = np.zeros((q,) * L, dtype=complex)
    evens = list(range(0, L, 2))
    odds = list(range(1, L, 2))
    for v in range(q):
        for bits in np.ndindex(*([q] * len(odds))):
            idx = [0] * L
            for e in evens:
                idx[e] = v
            for o, b in zip(odds, bits):
                idx[o] = b
            psi[tuple(idx)] = 1
    return psi / np.linalg.norm(psi)


def tuirf_quench(tgate, L, t_max=3, cut=None):
    """Half-chain Renyi entropies for the TUIRF circuit on an open chain of faces."""
    T = tgate.tensor if hasattr(tgate, "tensor") else np.asarray(tgate)
    q = T.shape[0]
    cut = L // 2 if cut is None else cut
    psi = tuirf_initial_state(q, L)
    ents = {1: [], 2: [], 3: []}
    drift = 0.0
    for t in range(t_max + 1):
        if t:
            psi = tuirf_step(psi, T)
        p = np.linalg.svd(psi.reshape(q ** cut, -1), compute_uv=False) ** 2
        for n in ents:
            ents[n].append(renyi_from_probs(p, n))
        drift = max(drift, abs(np.linalg.norm(psi) - 1))
    return QuenchReport(list(range(cut)), ents, [], drift)


# ---------------------------------------------------------------- DU3 control

def _layer_major(psi, L, p, u):
    """Reorder a chain of composite sites (p, u) into (bottom sites..., top sites...)."""
    t = psi.reshape([p, u] * L)
    order = [2 * k for k in range(L)] + [2 * k + 1 for k in range(L)]
    return t.transpose(order).reshape(p ** L, u ** L)


def du3_control_dynamics(gate: Gate2, p, u, top, t_max=3, L=None, bottom_L=16,
                         bottom_vertex=None):
    """Multilayer DU3 gate with the top (unprimed) layer in a basis state.

    Full simulation on an open chain of L composite sites: inter-layer S^(2)
    and top-layer fidelity. The bottom-layer entropy slope is measured on a
    longer open chain of bottom sites alone, evolved with the controlled gates
    U^{kl}, which the control identity makes exact.
    """
    from .catalog import solvable_bell_state
    from .compose import control_identity_residual, controlled_bottom_gate
    top = list(top)
    L = len(top) if L is None else L
    if len(top) != L:
        raise ValueError("need one top-layer basis value per site")
    d = p * u
    spec = ChainSpec(L, d, gate, boundary="open")
    spec.check_state_guard()
    vb = solvable_bell_state(p) if bottom_vertex is None else bottom_vertex
    bottom = solvable_product_state(ChainSpec(L, p, boundary="open"), vb)
    topv = np.zeros((u,) * L)
    topv[tuple(top)] = 1
    # composite ordering (b_1, t_1, b_2, t_2, ...)
    psi = np.multiply.outer(bottom, topv)
    psi = psi.transpose([x for k in range(L) for x in (k, L + k)]).reshape((d,) * L)
    inter, fid = [], []
    for t in range(t_max + 1):
        if t:
            psi = brickwork_step(spec, psi)
        m = _layer_major(psi, L, p, u)
        s = np.linalg.svd(m, compute_uv=False) ** 2
        inter.append(renyi_from_probs(s, 2))
        rho_top = m.T @ m.conj()
        fid.append(float(abs(rho_top[np.ravel_multi_index(top, (u,) * L),
                                     np.ravel_multi_index(top, (u,) * L)])))
    # bottom-only chain
    Lb = bottom_L
    if p ** Lb > MAX_STATE:
        raise GuardError(f"bottom chain dimension exceeds {MAX_STATE}")
    topb = [top[k % L] for k in range(Lb)]
    bspec = ChainSpec(Lb, p, boundary="open")
    b = solvable_product_state(bspec, vb)
    gates = {}
    ent = []
    for t in range(t_max + 1):
        if t:
            for layer in (0, 1):
                for i, j in bspec.bonds(layer):
                    key = (topb[i], topb[j])
                    if key not in gates:
                        gates[key] = controlled_bottom_gate(gate, p, u, key).reshape(p, p, p, p)
                    b = apply_two_site(b, Lb, p, gates[key], i, j)
        pr = region_spectrum(b, Lb, list(range(Lb // 2)))
        ent.append(renyi_from_probs(pr, 2))
    slopes = [ent[t] - ent[t - 1] for t in range(1, t_max + 1)]
    # one cut in the middle of an open chain; velocity in units of the composite site
    v_e = [x / (2 * np.log(d)) for x in slopes]
    return {"inter_layer_S2": inter, "top_fidelity": fid, "bottom_S2": ent,
            "bottom_slopes": slopes, "v_E": v_e,
            "control_identity": control_identity_residual(gate, p, u)}

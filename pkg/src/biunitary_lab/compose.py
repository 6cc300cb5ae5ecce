"""Composite gates built from biunitary blocks.

Kagome unit cell. The two sites carry sub-wires (a, b) and (c, d). The
two-site gate is
    U_K = U2_{bc} . (U1_{ab} (x) U3_{cd}),
so U1 and U3 act first and the central gate U2 joins the inner sub-wires.
With mixed dimensions, U1 maps (q2, q1) -> (q1, q2), U3 maps (q1, q2) -> (q2, q1)
and U2 acts on q2 (x) q2. Inputs are ordered left (q2, q1), right (q1, q2);
outputs left (q1, q2), right (q2, q1). The next brickwork layer then sees the
input ordering it expects. With U1 = U2 = U3 = SWAP the sub-wires travel
a -> c, b -> a, c -> d, d -> b.

Gates whose legs change dimension are passed as plain matrices
(rows: outputs, cols: inputs, factors in the orders above).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import DEFAULT_TOL
from .catalog import (Gate2, InvalidInput, _require, haar_unitary, random_chm,
                      verify_chm, verify_duirf, verify_qls, verify_ueb)
from .hierarchy import check_dual_unitary, check_du2, schmidt_values
from .tensor_core import unitarity_residual

MAX_MATRIX_DIM = 4096


class GuardError(RuntimeError):
    pass


def _mat(u):
    return u.matrix if hasattr(u, "matrix") else np.asarray(u, dtype=complex)


def swap_like_du(qa: int, qb: int, rng) -> np.ndarray:
    """Dual-unitary map C^qa (x) C^qb -> C^qb (x) C^qa: local unitaries around a phased SWAP."""
    rng = np.random.default_rng(rng)
    perm = np.zeros((qb * qa, qa * qb))
    for i in range(qa):
        for j in range(qb):
            perm[j * qa + i, i * qb + j] = 1
    phases = np.exp(2j * np.pi * rng.random(qa * qb))
    pre = np.kron(haar_unitary(qa, rng), haar_unitary(qb, rng))
    post = np.kron(haar_unitary(qb, rng), haar_unitary(qa, rng))
    return post @ perm @ np.diag(phases) @ pre


def _guard(d):
    if d * d > MAX_MATRIX_DIM:
        raise GuardError(f"gate matrix dimension {d * d} exceeds the guard {MAX_MATRIX_DIM}")


def kagome_matrix(u1, u2, u3, q1, q2, transposed=False):
    _guard(q1 * q2)
    m1, m2, m3 = _mat(u1), _mat(u2), _mat(u3)
    if m1.shape != (q1 * q2,) * 2 or m3.shape != (q1 * q2,) * 2 or m2.shape != (q2 * q2,) * 2:
        raise ValueError(f"dimension mismatch for q1={q1}, q2={q2}: "
                         f"{m1.shape}, {m2.shape}, {m3.shape}")
    if not transposed:
        outer = np.kron(m1, m3)
        mid = np.kron(np.kron(np.eye(q1), m2), np.eye(q1))
        return mid @ outer
    # U2 first on the inner wires, then U1 and U3; needs q1 == q2
    if q1 != q2:
        raise ValueError("transposed Kagome cell needs equal sub-wire dimensions")
    mid = np.kron(np.kron(np.eye(q1), m2), np.eye(q1))
    return np.kron(m1, m3) @ mid


def kagome_du2_unshaded(u1, u2, u3, q1=None, q2=None) -> Gate2:
    if q1 is None:
        q1 = q2 = _mat(u2).shape[0] if q2 is None else q2
        q1 = q2 = int(round(np.sqrt(q1)))
    q2 = q1 if q2 is None else q2
    d = q1 * q2
    _guard(d)
    return Gate2.from_matrix(kagome_matrix(u1, u2, u3, q1, q2), d)


def kagome_swap(q: int) -> Gate2:
    from .catalog import swap_gate
    s = swap_gate(q)
    return kagome_du2_unshaded(s, s, s, q, q)


# ---------------------------------------------------------------- three-site gates

@dataclass(frozen=True)
class TriGate:
    q: int
    tensor: np.ndarray  # (o1, o2, o3, i1, i2, i3)

    @property
    def matrix(self):
        n = self.q ** 3
        return self.tensor.reshape(n, n)


def triangle_gate(u1, u2, u3) -> TriGate:
    """U3 on sites (1,2) . U2 on (2,3) . U1 on (1,2); no precondition."""
    m1, m2, m3 = _mat(u1), _mat(u2), _mat(u3)
    q = int(round(np.sqrt(m1.shape[0])))
    eye = np.eye(q)
    m = np.kron(m3, eye) @ np.kron(eye, m2) @ np.kron(m1, eye)
    return TriGate(q, m.reshape([q] * 6))


def kagome_triunitary(u1, u2, u3, tol=DEFAULT_TOL) -> TriGate:
    for i, u in enumerate((u1, u2, u3), 1):
        g = u if isinstance(u, Gate2) else Gate2.from_matrix(u, int(round(np.sqrt(_mat(u).shape[0]))))
        rep = check_dual_unitary(g, tol)
        if not rep.passed:
            k, v = rep.worst()
            raise InvalidInput(f"U{i} is not dual-unitary ({k} residual {v:.3e})", rep.residuals)
    return triangle_gate(u1, u2, u3)


# ---------------------------------------------------------------- CHM shadings

def chm_honeycomb_gate(h1, h2, h3, tol=DEFAULT_TOL) -> Gate2:
    """U = D_{H2} . (H1/sqrt q (x) H3/sqrt q), with D_{ab,ab} = (H2)_ab."""
    hs = [np.asarray(h, dtype=complex) for h in (h1, h2, h3)]
    for i, h in enumerate(hs, 1):
        _require(verify_chm(h, tol), f"H{i}")
    q = hs[0].shape[0]
    m = np.diag(hs[1].reshape(-1)) @ np.kron(hs[0], hs[2]) / q
    return Gate2.from_matrix(m, q)


@dataclass(frozen=True)
class ControlledFamily:
    """Two-site gates indexed by a control value: tensor[c] has gate axes."""
    q: int
    tensor: np.ndarray

    def gate(self, c) -> Gate2:
        return Gate2(self.q, self.q, self.tensor[c])

    def gates(self):
        return [self.gate(c) for c in range(self.tensor.shape[0])]


def chm_triangular_gate(h1, h2, h3, h4, tol=DEFAULT_TOL) -> ControlledFamily:
    """U^(c)_{ab,a'b'} = (H1)_{ca} (H2)_{ab} (H3)_{aa'} (H4)_{bb'} / q.

    The control c lives on a shaded triangle and enters through a row of H1.
    Each member is a diagonal CHM gate after one-site CHM gates, hence DU2.
    """
    hs = [np.asarray(h, dtype=complex) for h in (h1, h2, h3, h4)]
    for i, h in enumerate(hs, 1):
        _require(verify_chm(h, tol), f"H{i}")
    q = hs[0].shape[0]
    t = np.einsum("ca,ab,ax,by->cabxy", *hs) / q
    return ControlledFamily(q, t)


def chm_tri_identities(fam: ControlledFamily, tol=DEFAULT_TOL):
    """Residuals of the two defining identities of the controlled block.

    control_unitarity: every member U^(c) is unitary.
    control_horizontal: for fixed (out-right, in-left, in-right), the map
    from the control c to out-left a, scaled by sqrt(q), is unitary.
    """
    from .report import Report
    t = fam.tensor
    q = fam.q
    nc = t.shape[0]
    uni = max(unitarity_residual(t[c].reshape(q * q, q * q)) for c in range(nc))
    hor = 0.0
    for b in range(q):
        for x in range(q):
            for y in range(q):
                hor = max(hor, unitarity_residual(np.sqrt(q) * t[:, :, b, x, y]))
    return Report({"control_unitarity": uni, "control_horizontal": hor}, tol)


# ---------------------------------------------------------------- UEB shading

def ueb_du2_gate(v1, v2, v3, tol=DEFAULT_TOL) -> Gate2:
    """Right-pointing triangles shaded. One site is a pair of wires (q*q),
    the other the shaded triangle label s (q*q).

    U[s_out, (c,d); (a,b), s_in] = (V1_{s_out})_{ab} (V2_{s_out} V3_{s_in})_{cd} / q
    """
    vs = [np.asarray(v, dtype=complex) for v in (v1, v2, v3)]
    for i, v in enumerate(vs, 1):
        _require(verify_ueb(v, tol), f"UEB {i}")
    q = vs[0].shape[1]
    n = q * q
    w = np.einsum("scx,txd->sctd", vs[1], vs[2])
    t = np.einsum("sab,sctd->scdabt", vs[0], w) / q
    return Gate2(n, n, t.reshape(n, n, n, n))


def ueb_trigate(v1, v2, v3, tol=DEFAULT_TOL) -> TriGate:
    """Triangle cell with its shaded label s summed:
    T[o1,o2,o3,i1,i2,i3] = sum_s (V1_s)_{i1 i2} (V2_s)_{o3 i3} (V3_s)_{o1 o2} / q"""
    vs = [np.asarray(v, dtype=complex) for v in (v1, v2, v3)]
    for i, v in enumerate(vs, 1):
        _require(verify_ueb(v, tol), f"UEB {i}")
    q = vs[0].shape[1]
    t = np.einsum("sij,sok,suv->uvoijk", *vs) / q
    return TriGate(q, t)


# ---------------------------------------------------------------- QLS shading

def qls_controlled_gate(qls, tol=DEFAULT_TOL) -> Gate2:
    """U_{ab,cd} = delta_ac (Q_ab)_d."""
    qls = np.asarray(qls, dtype=complex)
    _require(verify_qls(qls, tol), "QLS")
    q = qls.shape[0]
    t = np.zeros((q,) * 4, dtype=complex)
    for a in range(q):
        t[a, :, a, :] = qls[a]
    return Gate2(q, q, t)


def qls_du2_block(qls, h1, h2=None, h3=None, tol=DEFAULT_TOL) -> Gate2:
    """Doubled unit cell: the QLS-controlled gate followed by a honeycomb CHM cell.

    Passes DU2 for the cyclic QLS with Fourier CHMs (q = 2, 3) and for the
    rotated qubit QLS; dressed QLSs or dephased CHMs can break it, so check
    the result with check_du2.
    """
    h2 = h1 if h2 is None else h2
    h3 = h1 if h3 is None else h3
    uq = qls_controlled_gate(qls, tol)
    uh = chm_honeycomb_gate(h1, h2, h3, tol)
    return Gate2.from_matrix(uh.matrix @ uq.matrix, uq.d)


# ---------------------------------------------------------------- fully shaded

@dataclass(frozen=True)
class TuirfGate:
    q: int
    tensor: np.ndarray  # T[a,b,c,d,e,f] = (G_ad)_{bc,ef}


def tuirf_from_crosses(f_tl, f_r, f_bl, tol=DEFAULT_TOL) -> TuirfGate:
    """Three crosses on the corners of a right-pointing triangle, whose label t is summed.

    Faces around the triangle, clockwise from the left: a, b, c, d, f, e.
    Top-left cross: controls a, c; maps t -> b.
    Right cross: controls t, d; maps f -> c.
    Bottom-left cross: controls a, f; maps e -> t.
    """
    fs = [np.asarray(f, dtype=complex) for f in (f_tl, f_r, f_bl)]
    for i, f in enumerate(fs, 1):
        _require(verify_duirf(f, tol), f"cross {i}")
    return TuirfGate(fs[0].shape[0], tuirf_tensor(*fs))


def tuirf_tensor(f_tl, f_r, f_bl):
    return np.einsum("acbt,tdcf,afte->abcdef", f_tl, f_r, f_bl, optimize=True)


# ---------------------------------------------------------------- nesting

@dataclass
class NestedKagome:
    """Kagome cell whose constituents may themselves be Kagome cells.

    Kept unevaluated so the Schmidt spectrum can be read off structurally:
    U1 and U3 are local to one site each and U2 acts on one sub-wire per
    site, so lambda(U) = sqrt(d_a d_d) * lambda(U2), with d_a = d_d the
    untouched sub-wire dimension.
    """
    u1: object
    u2: object
    u3: object
    q: int  # sub-wire dimension
    transposed: bool = False
    depth: int = 1

    @property
    def d_left(self):
        return self.q * self.q

    d_right = d_left

    @property
    def d(self):
        return self.q * self.q

    def dense(self) -> Gate2:
        _guard(self.d)
        ms = [u.dense() if isinstance(u, NestedKagome) else u for u in (self.u1, self.u2, self.u3)]
        return Gate2.from_matrix(kagome_matrix(*ms, self.q, self.q, self.transposed), self.d)

    @property
    def matrix(self):
        return self.dense().matrix

    @property
    def tensor(self):
        return self.dense().tensor

    def schmidt_values(self):
        inner = schmidt_values(self.u2)
        out = np.zeros(self.d ** 2)
        out[:len(inner)] = self.q * np.sort(inner)[::-1]
        return out


def nested_kagome(signs, base=None, q=2, seed=0):
    """U_+ nests the cell with itself, U_- nests it with its transposed form.

    ``signs`` lists one '+' or '-' per nesting level. ``base`` is a triple of
    dual-unitary gates (default: seeded random ones at dimension q).
    """
    if base is None:
        from .catalog import random_du_gate
        rng = np.random.default_rng(seed)
        base = [random_du_gate(q, rng) for _ in range(3)]
    cell = NestedKagome(*base, q=q, depth=0)
    cur = cell
    for s in signs:
        if s not in "+-":
            raise ValueError(f"nesting sign must be '+' or '-', got {s!r}")
        cur = NestedKagome(cur, cur, cur, q=cur.d, transposed=(s == "-"), depth=cur.depth + 1)
    return cur


# ---------------------------------------------------------------- multilayer CHMs

@dataclass
class MultilayerChm:
    q1: int
    q2: int
    kind: str
    components: dict
    matrix: np.ndarray = field(repr=False, default=None)


def multilayer_chm(kind, j, k, tol=DEFAULT_TOL) -> MultilayerChm:
    """Composite index (a, b) with a in the q1 layer and b in the q2 layer.

    tensor:  H_{ab,cd} = J_ac K_bd
    hs:      H_{ab,cd} = J^b_ac K^c_bd   (J: q2 matrices q1 x q1, K: q1 matrices q2 x q2)
    dita:    H_{ab,cd} = J_ac K^c_bd     (J: q1 x q1, K: q1 matrices q2 x q2)
    """
    kind = kind.lower()
    if kind in ("tensor", "tp", "tensorproduct"):
        j = np.asarray(j, dtype=complex)
        k = np.asarray(k, dtype=complex)
        q1, q2 = j.shape[0], k.shape[0]
        h = np.einsum("ac,bd->abcd", j, k)
        kind = "tensor"
    elif kind in ("hs", "hosoyasuzuki"):
        j = np.asarray(j, dtype=complex)
        k = np.asarray(k, dtype=complex)
        q1, q2 = j.shape[1], k.shape[1]
        if j.shape != (q2, q1, q1) or k.shape != (q1, q2, q2):
            raise ValueError(f"HS needs q2={q2} J matrices of size {q1} and q1={q1} K matrices "
                             f"of size {q2}; got {j.shape}, {k.shape}")
        h = np.einsum("bac,cbd->abcd", j, k)
        kind = "hs"
    elif kind == "dita":
        j = np.asarray(j, dtype=complex)
        k = np.asarray(k, dtype=complex)
        q1, q2 = j.shape[0], k.shape[1]
        if k.shape != (q1, q2, q2):
            raise ValueError(f"Dita needs q1={q1} K matrices of size {q2}; got {k.shape}")
        h = np.einsum("ac,cbd->abcd", j, k)
    else:
        raise ValueError(f"unknown multilayer kind {kind!r}")
    m = h.reshape(q1 * q2, q1 * q2)
    _require(verify_chm(m, tol), f"{kind} multilayer CHM")
    return MultilayerChm(q1, q2, kind, {"J": j, "K": k}, m)


def random_hs_chm(q1, q2, rng) -> MultilayerChm:
    rng = np.random.default_rng(rng)
    j = np.array([random_chm(q1, rng) for _ in range(q2)])
    k = np.array([random_chm(q2, rng) for _ in range(q1)])
    return multilayer_chm("hs", j, k)


def _hmat(h):
    return h.matrix if isinstance(h, MultilayerChm) else np.asarray(h, dtype=complex)


def _layers(h, p=None):
    if isinstance(h, MultilayerChm):
        return h.q1, h.q2
    n = np.asarray(h).shape[0]
    if p is None:
        raise ValueError("plain matrices need explicit layer dimensions")
    return p, n // p


def multilayer_du_gate(h1, h2, h3, h4, tol=DEFAULT_TOL) -> Gate2:
    """U_{AB,CD} = H1_AB H2_BD H3_DC H4_CA / (q1 q2) with composite site labels A = (a', a)."""
    from .catalog import du_from_chm
    ms = [_hmat(h) for h in (h1, h2, h3, h4)]
    if len({m.shape for m in ms}) != 1:
        raise ValueError("multilayer DU gate needs four CHMs of equal dimension")
    return du_from_chm(*ms, tol=tol)


def layer_schmidt_rank(g, p, u, cutoff=1e-8) -> int:
    """Operator-Schmidt rank across the layer bipartition (primed layer p | unprimed u)."""
    t = np.asarray(g.tensor if hasattr(g, "tensor") else g).reshape(p, u, p, u, p, u, p, u)
    m = t.transpose(0, 2, 4, 6, 1, 3, 5, 7).reshape(p ** 4, u ** 4)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > cutoff * s[0]))


def multilayer_du2_gate(variant, h, k, h2=None, kt=None, tol=DEFAULT_TOL) -> Gate2:
    """Composite site label A = (a', a), primed layer first.

    1: H_{a'a,b'b} K_{b'd'} K_{d'c'} K_{c'a'} Kt_{bd} Kt_{ac} / (q1 q2)
       primed layer q1 (K), unprimed q2 (Kt).
    2: H_{a'a,c'c} H2_{b'b,d'd} K_{ab} K_{cd} / (q1 q2)
       primed layer q2, unprimed q1 (K).
    3: K_{ab} H2_{b'b,d'd} H_{a'a,c'c} / (q1 q2)
       primed layer q2, unprimed q1 (K).
    """
    k = np.asarray(k, dtype=complex)
    _require(verify_chm(k, tol), "K")
    hm = _hmat(h)
    _require(verify_chm(hm, tol), "H")
    n = hm.shape[0]
    if variant == 1:
        kt = np.asarray(kt, dtype=complex)
        _require(verify_chm(kt, tol), "Kt")
        p, u = k.shape[0], kt.shape[0]
        if p * u != n:
            raise ValueError("layer dimensions do not match H")
        hh = hm.reshape(p, u, p, u)
        t = np.einsum("AaBb,BD,DC,CA,bd,ac->AaBbCcDd", hh, k, k, k, kt, kt) / n
    elif variant in (2, 3):
        h2m = hm if h2 is None else _hmat(h2)
        _require(verify_chm(h2m, tol), "H2")
        u = k.shape[0]
        p = n // u
        if p * u != n:
            raise ValueError("layer dimensions do not match H")
        a = hm.reshape(p, u, p, u)
        b = h2m.reshape(p, u, p, u)
        if variant == 2:
            t = np.einsum("AaCc,BbDd,ab,cd->AaBbCcDd", a, b, k, k) / n
        else:
            t = np.einsum("ab,BbDd,AaCc->AaBbCcDd", k, b, a) / n
    else:
        raise ValueError(f"unknown DU2 variant {variant!r}")
    return Gate2(n, n, t.reshape(n, n, n, n))


def multilayer_du3_gate(variant, h, k, tol=DEFAULT_TOL) -> Gate2:
    """Bottom (primed) layer q1 carries K; the top (unprimed) layer q2 is a control.

    DUxDiag:  H_{a'a,b'b} d_ac d_bd K_{b'd'} K_{d'c'} K_{c'a'} / q1
    DU2xDiag: H_{a'a,b'b} d_ac d_bd K_{a'c'} K_{b'd'} / q1
    """
    k = np.asarray(k, dtype=complex)
    _require(verify_chm(k, tol), "K")
    hm = _hmat(h)
    _require(verify_chm(hm, tol), "H")
    p = k.shape[0]
    n = hm.shape[0]
    u = n // p
    hh = hm.reshape(p, u, p, u)
    eye = np.eye(u)
    v = variant.lower()
    if v == "duxdiag":
        t = np.einsum("AaBb,ac,bd,BD,DC,CA->AaBbCcDd", hh, eye, eye, k, k, k) / p
    elif v == "du2xdiag":
        t = np.einsum("AaBb,ac,bd,AC,BD->AaBbCcDd", hh, eye, eye, k, k) / p
    else:
        raise ValueError(f"unknown DU3 variant {variant!r}")
    return Gate2(n, n, t.reshape(n, n, n, n))


def controlled_bottom_gate(g, p, u, kl) -> np.ndarray:
    """U^{kl} on the bottom layer: U restricted to top-layer basis inputs (k, l)."""
    kk, ll = kl
    t = np.asarray(g.tensor).reshape(p, u, p, u, p, u, p, u)
    return t[:, kk, :, ll, :, kk, :, ll].reshape(p * p, p * p)


def control_identity_residual(g, p, u) -> float:
    """max over (k, l) of || U(|ij> (x) |kl>) - (U^{kl}|ij>) (x) |kl> ||, in layer-major order."""
    t = np.asarray(g.tensor).reshape(p, u, p, u, p, u, p, u)
    # layer-major: rows (a', b', a, b), cols (c', d', c, d)
    m = t.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(p * p * u * u, p * p * u * u)
    worst = 0.0
    for kk in range(u):
        for ll in range(u):
            top = np.zeros(u * u)
            top[kk * u + ll] = 1
            ukl = controlled_bottom_gate(g, p, u, (kk, ll))
            want = np.kron(ukl, top[:, None])
            got = m[:, [col * u * u + kk * u + ll for col in range(p * p)]]
            worst = max(worst, float(np.linalg.norm(got - want)), unitarity_residual(ukl))
    return worst


# ---------------------------------------------------------------- velocities

def allowed_velocities(q: int):
    """(R, v_E) pairs with R = prod q_i^{nu_i}, nu_i in {0,1,2}, over the prime
    factors q_i of q counted with multiplicity; v_E = log R / log q^2."""
    from itertools import product

    from sympy import factorint
    if q < 2:
        raise ValueError("allowed_velocities needs q >= 2")
    primes = [pr for pr, e in factorint(q).items() for _ in range(e)]
    ranks = set()
    for nus in product((0, 1, 2), repeat=len(primes)):
        ranks.add(int(np.prod([pr ** nu for pr, nu in zip(primes, nus)])))
    return [(r, float(np.log(r) / np.log(q * q))) for r in sorted(ranks)]

"""Biunitary primitives: complex Hadamard matrices, dual-unitary gates,
quantum crosses, unitary error bases, quantum Latin squares, diagonal gates
and solvable vertices. Each generator has a matching verifier that reports
residuals rather than a bare boolean.

Plain arrays are used for the primitives:
  CHM              (q, q)
  quantum cross    (q, q, q, q) with F[a, b, c, d] = (F_ab)_cd
  UEB              (q*q, q, q), member V_s = ueb[s]
  QLS              (q, q, q) with Q[a, b] the state Q_ab
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import DEFAULT_TOL
from .report import Report
from .tensor_core import gate_matrix, unitarity_residual


class InvalidInput(ValueError):
    """A constructor input failed its verifier."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals or {}


@dataclass(frozen=True)
class Gate2:
    d_left: int
    d_right: int
    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        want = (self.d_left, self.d_right, self.d_left, self.d_right)
        if t.shape != want:
            t = t.reshape(want)
        object.__setattr__(self, "tensor", t)

    @classmethod
    def from_matrix(cls, m, d_left, d_right=None):
        d_right = d_left if d_right is None else d_right
        return cls(d_left, d_right, np.asarray(m, dtype=complex).reshape(d_left, d_right, d_left, d_right))

    @property
    def matrix(self):
        return gate_matrix(self.tensor)

    @property
    def d(self):
        if self.d_left != self.d_right:
            raise ValueError("gate has unequal local dimensions")
        return self.d_left

    def mirrored(self):
        """SWAP . U . SWAP, the left/right reflection of the gate."""
        return Gate2(self.d_right, self.d_left, self.tensor.transpose(1, 0, 3, 2))

    def dag(self):
        return Gate2(self.d_left, self.d_right, self.tensor.transpose(2, 3, 0, 1).conj())


# ---------------------------------------------------------------- CHMs

def fourier_chm(q: int) -> np.ndarray:
    if q < 2:
        raise ValueError("fourier_chm needs q >= 2")
    k = np.arange(q)
    return np.exp(2j * np.pi * np.outer(k, k) / q)


def qubit_chm_pair(phi: float):
    """The 2x2 pair H0, H1(phi) used for the layered examples."""
    h0 = np.array([[1, 1], [1, -1]], dtype=complex)
    h1 = np.array([[np.exp(1j * phi), 1], [1, -np.exp(-1j * phi)]], dtype=complex)
    return h0, h1


def verify_chm(h, tol=DEFAULT_TOL) -> Report:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"CHM must be square, got shape {h.shape}")
    q = h.shape[0]
    mod = float(np.max(np.abs(np.abs(h) - 1)))
    eye = np.eye(q)
    uni = float(max(np.linalg.norm(h.conj().T @ h - q * eye), np.linalg.norm(h @ h.conj().T - q * eye)))
    return Report({"modulus": mod, "unitarity": uni}, tol)


def _require(rep: Report, what: str):
    if not rep.passed:
        k, v = rep.worst()
        raise InvalidInput(f"{what} fails verification: {k} residual {v:.3e}", rep.residuals)


def random_chm(q: int, rng) -> np.ndarray:
    """Fourier matrix dressed with random diagonal phases and a random permutation."""
    rng = np.random.default_rng(rng)
    f = fourier_chm(q)
    left = np.exp(2j * np.pi * rng.random(q))
    right = np.exp(2j * np.pi * rng.random(q))
    perm = rng.permutation(q)
    return (left[:, None] * f * right[None, :])[perm]


# ---------------------------------------------------------------- gates

def du_from_chm(k1, k2, k3, k4, tol=DEFAULT_TOL) -> Gate2:
    """U_{ab,cd} = K1_ab K2_bd K3_dc K4_ca / q."""
    ks = [np.asarray(k, dtype=complex) for k in (k1, k2, k3, k4)]
    q = ks[0].shape[0]
    if any(k.shape != (q, q) for k in ks):
        raise ValueError("du_from_chm needs four CHMs of equal dimension")
    for i, k in enumerate(ks, 1):
        _require(verify_chm(k, tol), f"K{i}")
    t = np.einsum("ab,bd,dc,ca->abcd", *ks) / q
    return Gate2(q, q, t)


def haar_unitary(n: int, seed) -> np.ndarray:
    return unitary_group.rvs(n, random_state=np.random.default_rng(seed))


def haar_gate(d_left: int, d_right: int, seed) -> Gate2:
    if min(d_left, d_right) < 2:
        raise ValueError("haar_gate needs dimensions >= 2")
    return Gate2.from_matrix(haar_unitary(d_left * d_right, seed), d_left, d_right)


def swap_gate(q: int) -> Gate2:
    return Gate2(q, q, np.einsum("ad,bc->abcd", np.eye(q), np.eye(q)))


def identity_gate(q: int) -> Gate2:
    return Gate2(q, q, np.einsum("ac,bd->abcd", np.eye(q), np.eye(q)))


def cnot_gate() -> Gate2:
    m = np.eye(4)[[0, 1, 3, 2]]
    return Gate2.from_matrix(m, 2)


def diagonal_gate(h, tol=DEFAULT_TOL) -> Gate2:
    """D_{ab,cd} = delta_ac delta_bd H_ab."""
    h = np.asarray(h, dtype=complex)
    _require(verify_chm(h, tol), "H")
    q = h.shape[0]
    return Gate2.from_matrix(np.diag(h.reshape(-1)), q)


def cz_gate() -> Gate2:
    return diagonal_gate(qubit_chm_pair(0.0)[0])


def phased_swap_gate(q: int, rng) -> Gate2:
    """SWAP after a random diagonal phase gate; dual-unitary for any phases."""
    rng = np.random.default_rng(rng)
    phases = np.exp(2j * np.pi * rng.random(q * q))
    return Gate2.from_matrix(swap_gate(q).matrix * phases[None, :], q)


def random_du_gate(q: int, rng) -> Gate2:
    """Dual-unitary gate from four random-phase CHMs."""
    rng = np.random.default_rng(rng)
    return du_from_chm(*(random_chm(q, rng) for _ in range(4)))


# ---------------------------------------------------------------- quantum crosses

def phased_shift_cross(q: int, phases=None) -> np.ndarray:
    """(F_ab)_cd = exp(i g(a,b,c,d)) delta_{c, d+a-b mod q}.

    ``phases`` may be a callable g(a, b, c, d) or a (q, q, q, q) array of
    phase factors (not angles); None means all zero.
    """
    f = np.zeros((q,) * 4, dtype=complex)
    for a, b, d in itertools.product(range(q), repeat=3):
        c = (d + a - b) % q
        if phases is None:
            ph = 1.0
        elif callable(phases):
            ph = np.exp(1j * phases(a, b, c, d))
        else:
            ph = np.asarray(phases)[a, b, c, d]
        f[a, b, c, d] = ph
    return f


def random_phased_cross(q: int, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return phased_shift_cross(q, np.exp(2j * np.pi * rng.random((q,) * 4)))


def verify_duirf(f, tol=DEFAULT_TOL) -> Report:
    f = np.asarray(f, dtype=complex)
    if f.ndim != 4 or len(set(f.shape)) != 1:
        raise ValueError(f"quantum cross must have shape (q,q,q,q), got {f.shape}")
    q = f.shape[0]
    vert = max(unitarity_residual(f[a, b]) for a in range(q) for b in range(q))
    horiz = max(unitarity_residual(f[:, :, c, d]) for c in range(q) for d in range(q))
    return Report({"vertical": vert, "horizontal": horiz}, tol)


# ---------------------------------------------------------------- UEBs

def clock_shift(q: int):
    x = np.roll(np.eye(q), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(q) / q))
    return x, z


def weyl_ueb(q: int) -> np.ndarray:
    if q < 2:
        raise ValueError("weyl_ueb needs q >= 2")
    x, z = clock_shift(q)
    mp = np.linalg.matrix_power
    return np.array([mp(x, j) @ mp(z, k) for j in range(q) for k in range(q)], dtype=complex)


def dressed_ueb(ueb, left, right) -> np.ndarray:
    """{A V_s B}: still a UEB for unitary A, B."""
    return np.einsum("ij,sjk,kl->sil", left, ueb, right)


def verify_ueb(ueb, tol=DEFAULT_TOL) -> Report:
    v = np.asarray(ueb, dtype=complex)
    n, q, q2 = v.shape
    if q != q2 or n != q * q:
        raise ValueError(f"UEB must have shape (q*q, q, q), got {v.shape}")
    uni = max(unitarity_residual(m) for m in v)
    gram = np.einsum("sij,tij->st", v.conj(), v)
    orth = float(np.linalg.norm(gram - q * np.eye(n)))
    return Report({"unitarity": uni, "orthogonality": orth}, tol)


# ---------------------------------------------------------------- QLS

def cyclic_qls(q: int) -> np.ndarray:
    if q < 2:
        raise ValueError("cyclic_qls needs q >= 2")
    qls = np.zeros((q, q, q), dtype=complex)
    for a, b in itertools.product(range(q), repeat=2):
        qls[a, b, (a + b) % q] = 1
    return qls


def qls_reshuffle(qls) -> np.ndarray:
    """(Q~_ab)_c = (Q_ac)_b."""
    return np.asarray(qls).transpose(0, 2, 1)


def _qls_residuals(qls):
    q = qls.shape[0]
    # rows {Q_ab}_b and columns {Q_ab}_a stacked as matrices of states
    rows = max(unitarity_residual(qls[a]) for a in range(q))
    cols = max(unitarity_residual(qls[:, b]) for b in range(q))
    return rows, cols


def verify_qls(qls, tol=DEFAULT_TOL) -> Report:
    qls = np.asarray(qls, dtype=complex)
    if qls.ndim != 3 or len(set(qls.shape)) != 1:
        raise ValueError(f"QLS must have shape (q,q,q), got {qls.shape}")
    rows, cols = _qls_residuals(qls)
    trows, tcols = _qls_residuals(qls_reshuffle(qls))
    rep = Report({"rows": rows, "columns": cols}, tol)
    rep.info["reshuffle_residual"] = max(trows, tcols)
    rep.info["reshuffle_is_qls"] = bool(max(trows, tcols) < tol)
    return rep


def rotated_qubit_qls(theta: float) -> np.ndarray:
    """q=2 QLS built from a rotated basis; its reshuffle is a QLS only for
    theta a multiple of pi/2."""
    v = np.array([np.cos(theta), np.sin(theta)])
    w = np.array([-np.sin(theta), np.cos(theta)])
    return np.array([[v, w], [w, v]], dtype=complex)


# ---------------------------------------------------------------- solvable vertices

@dataclass(frozen=True)
class SolvableVertex:
    kind: str  # "bond" or "cross"
    payload: np.ndarray

    @property
    def q(self):
        return self.payload.shape[-1]


def solvable_bell_state(q: int) -> SolvableVertex:
    return SolvableVertex("bond", np.eye(q, dtype=complex) / np.sqrt(q))


def solvable_cross_family(q: int, unitaries=None) -> SolvableVertex:
    if unitaries is None:
        unitaries = [np.eye(q)] * q
    w = np.asarray(unitaries, dtype=complex)
    if w.shape != (q, q, q):
        raise ValueError(f"cross family needs q={q} matrices of size {q}x{q}, got {w.shape}")
    return SolvableVertex("cross", w)


def verify_solvable(v: SolvableVertex, tol=DEFAULT_TOL) -> Report:
    p = np.asarray(v.payload)
    if v.kind == "bond":
        q = p.shape[0]
        # the bond state, read sideways as a q x q map, must be sqrt(q)^-1 times a unitary
        return Report({"horizontal": unitarity_residual(np.sqrt(q) * p)}, tol)
    if v.kind == "cross":
        return Report({"horizontal": max(unitarity_residual(w) for w in p)}, tol)
    raise ValueError(f"unknown solvable vertex kind {v.kind!r}")

"""Solvability checks (unitary, DU, DU2, DU3, triunitary, TUIRF),
operator-Schmidt analysis and soliton search.

DU_k ("right" side). Put k+1 sites in a row and let
V = G(1,2) G(2,3) ... G(k,k+1), where G(k,k+1) acts first. Define the map
    Phi_k(X) = Tr_{out 2..k+1}[ V (X (x) 1_{k+1}) V^dag ]
from operators X on input sites 1..k to operators on output site 1.
The condition is Phi_k(X) = Phi_{k-1}(Tr_k X), with Phi_0(Y) = Tr(Y) 1.
k=1 is the space-direction unitarity of a dual-unitary gate. The "left"
condition is the same statement for the mirrored gate SWAP.U.SWAP.
Residuals are Frobenius distances between the two sides as tensors
(o1, i1..ik; o1', i1'..ik'), divided by the norm of the right-hand side.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import DEFAULT_TOL
from .catalog import Gate2
from .report import Report
from .tensor_core import realign, svd_values, unitarity_residual

MAX_CHAIN_ENTRIES = 2 ** 24


class GuardError(RuntimeError):
    """Requested computation exceeds the desk-memory guard."""


def _tensor(g):
    return g.tensor if hasattr(g, "tensor") else np.asarray(g, dtype=complex)


def _gate(g) -> Gate2:
    if isinstance(g, Gate2):
        return g
    if hasattr(g, "dense"):
        return g.dense()
    t = np.asarray(g, dtype=complex)
    return Gate2(t.shape[0], t.shape[1], t)


def phi_chain(g: np.ndarray, k: int) -> np.ndarray:
    """Phi_k as a tensor of shape (d, d**k, d, d**k)."""
    d = g.shape[0]
    if d ** (2 * (k + 1)) > MAX_CHAIN_ENTRIES:
        raise GuardError(f"DU{k} check at d={d} needs {d ** (2 * (k + 1))} entries; guard is {MAX_CHAIN_ENTRIES}")
    gc = g.conj()
    # innermost gate: trace its right output and right input
    env = np.einsum("moix,pojx->mipj", g, gc).reshape(d, d, d, d)
    for _ in range(k - 1):
        n = env.shape[1]
        out = np.empty((d, d * n, d, d * n), dtype=complex)
        for m in range(d):
            blk = np.einsum("oix,xIyJ,pojy->iIpjJ", g[m], env, gc, optimize=True)
            out[m] = blk.reshape(d * n, d, d * n)
        env = out
    return env


def du_k_residual(g, k: int) -> float:
    t = _tensor(g)
    d = t.shape[0]
    if t.shape != (d, d, d, d):
        raise ValueError("DU_k checks need equal local dimensions")
    lhs = phi_chain(t, k)
    if k == 1:
        rhs = np.einsum("ab,ij->aibj", np.eye(d), np.eye(d))
        return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    prev = phi_chain(t, k - 1)
    n = prev.shape[1]
    l6 = lhs.reshape(d, n, d, d, n, d)
    for i in range(d):
        l6[:, :, i, :, :, i] -= prev
    # ||prev (x) 1_d|| = sqrt(d) ||prev||
    return float(np.linalg.norm(l6) / (np.sqrt(d) * np.linalg.norm(prev)))


def time_residual(g) -> float:
    t = _tensor(g)
    n = t.shape[0] * t.shape[1]
    return unitarity_residual(t.reshape(n, n))


def space_residual(g) -> float:
    t = _tensor(g)
    dl, dr = t.shape[0], t.shape[1]
    if dl != dr:
        raise ValueError("space-direction unitarity needs equal local dimensions")
    # rows (out-left, in-left), cols (out-right, in-right); the other
    # reshuffle is the transpose and has the same residual
    return unitarity_residual(realign(t))


def check_dual_unitary(g, tol=DEFAULT_TOL) -> Report:
    g = _gate(g)
    return Report({"U": time_residual(g), "DU_space": space_residual(g)}, tol)


def check_du2(g, tol=DEFAULT_TOL) -> Report:
    g = _gate(g)
    return Report({"U": time_residual(g),
                   "DU2_left": du_k_residual(g.mirrored(), 2),
                   "DU2_right": du_k_residual(g, 2)}, tol)


def check_du3(g, tol=DEFAULT_TOL) -> Report:
    g = _gate(g)
    return Report({"U": time_residual(g),
                   "DU3_left": du_k_residual(g.mirrored(), 3),
                   "DU3_right": du_k_residual(g, 3)}, tol)


def hierarchy_report(g, conditions=("U", "DU", "DU2", "DU3"), tol=DEFAULT_TOL) -> Report:
    g = _gate(g)
    res = {}
    if "U" in conditions:
        res["U"] = time_residual(g)
    if "DU" in conditions:
        res["DU_space"] = space_residual(g)
    for k, name in ((2, "DU2"), (3, "DU3")):
        if name in conditions:
            res[f"{name}_left"] = du_k_residual(g.mirrored(), k)
            res[f"{name}_right"] = du_k_residual(g, k)
    return Report(res, tol)


# ---------------------------------------------------------------- three-site gates

def check_triunitary(gate, tol=DEFAULT_TOL) -> Report:
    """Tensor T(o1,o2,o3,i1,i2,i3); time direction plus the two directions
    rotated by +-60 degrees on the triangular cell."""
    t = _tensor(gate)
    q = t.shape[0]
    if t.ndim == 2:
        q = round(t.shape[0] ** (1 / 3))
        t = t.reshape([q] * 6)
    if t.shape != (q,) * 6:
        raise ValueError(f"three-site gate must have six equal legs, got {t.shape}")
    n = q ** 3
    plus = t.transpose(2, 1, 5, 3, 4, 0).reshape(n, n)   # (o3,o2,i3) <- (i1,i2,o1)
    minus = t.transpose(3, 1, 0, 2, 4, 5).reshape(n, n)  # (i1,o2,o1) <- (o3,i2,i3)
    return Report({"U": unitarity_residual(t.reshape(n, n)),
                   "TRI_plus": unitarity_residual(plus),
                   "TRI_minus": unitarity_residual(minus)}, tol)


def check_tuirf(gate, tol=DEFAULT_TOL) -> Report:
    """T[a,b,c,d,e,f] = (G_ad)_{bc,ef}; faces clockwise from the left are
    a, b, c, d, f, e. Checks G_ad, (G_bf)_{cd,ae} and (G_ec)_{ab,fd}."""
    t = _tensor(gate)
    q = t.shape[0]
    if t.shape != (q,) * 6:
        raise ValueError(f"TUIRF tensor must have six equal legs, got {t.shape}")

    def worst(p):
        return max(unitarity_residual(p[x, y].reshape(q * q, q * q))
                   for x in range(q) for y in range(q))

    return Report({"G_ad": worst(t.transpose(0, 3, 1, 2, 4, 5)),
                   "G_bf": worst(t.transpose(1, 5, 2, 3, 0, 4)),
                   "G_ec": worst(t.transpose(4, 2, 0, 1, 5, 3))}, tol)


# ---------------------------------------------------------------- Schmidt data

@dataclass
class SchmidtReport:
    lambdas: np.ndarray
    rank: int
    flat: bool
    v_E: float
    d: int
    info: dict = field(default_factory=dict)

    def to_json(self):
        return {"lambdas": [format(float(x), ".17g") for x in self.lambdas],
                "rank": self.rank, "flat": self.flat,
                "v_E": format(self.v_E, ".17g"), "d": self.d}


def schmidt_values(g) -> np.ndarray:
    if hasattr(g, "schmidt_values"):
        return g.schmidt_values()
    return svd_values(realign(_tensor(g)))


def schmidt_analyze(g, cutoff=1e-8, flat_tol=1e-8) -> SchmidtReport:
    lam = np.sort(np.asarray(schmidt_values(g)))[::-1]
    kept = lam[lam > cutoff * lam[0]]
    r = len(kept)
    flat = bool((kept[0] - kept[-1]) / kept[0] < flat_tol)
    dl, dr = (g.d_left, g.d_right) if hasattr(g, "d_left") else _tensor(g).shape[:2]
    v = float(np.log(r) / np.log(dl * dr))
    return SchmidtReport(kept, r, flat, v, int(dl) if dl == dr else int(dl * dr))


# ---------------------------------------------------------------- solitons

def pauli_basis(q: int):
    """Traceless one-site operator basis: Paulis for q=2, clock-shift products otherwise."""
    if q == 2:
        return [np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]]),
                np.array([[1, 0], [0, -1]], complex)]
    x = np.roll(np.eye(q), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(q) / q))
    mp = np.linalg.matrix_power
    return [mp(x, j) @ mp(z, k) for j in range(q) for k in range(q) if (j, k) != (0, 0)]


@dataclass
class Soliton:
    operator: np.ndarray
    source: tuple      # (site, factor)
    target: tuple
    displacement: int  # +1 right, -1 left, 0 localized (sites per half layer)
    phase: complex
    image: np.ndarray = None


def embed(op, pos, factors):
    """Operator on the flattened factor list; pos indexes that list."""
    mats = [np.eye(f) for f in factors]
    mats[pos] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def single_factor_part(o, pos, factors, tol):
    """If o = 1 (x) s (x) 1 with s on factor ``pos``, return s, else None."""
    n = len(factors)
    t = o.reshape(list(factors) * 2)
    others = [i for i in range(n) if i != pos]
    dim_rest = int(np.prod([factors[i] for i in others]))
    s = np.einsum(t, list(range(n)) + [i if i != pos else n + pos for i in range(n)],
                  [pos, n + pos]) / dim_rest
    if np.linalg.norm(o - embed(s, pos, factors)) < tol * max(1.0, np.linalg.norm(o)):
        return s
    return None


def soliton_scan(gate, factors=None, basis=None, tol=1e-10):
    """One-site operators mapped by U (.) U^dag onto a single tensor factor.

    ``factors`` = (left_factor_dims, right_factor_dims); default one factor per site.
    """
    g = _gate(gate)
    if factors is None:
        factors = ((g.d_left,), (g.d_right,))
    left, right = tuple(factors[0]), tuple(factors[1])
    flat = left + right
    site_of = [0] * len(left) + [1] * len(right)
    u = g.matrix
    found = []
    for pos, f in enumerate(flat):
        ops = basis(f) if basis else pauli_basis(f)
        for s in ops:
            img = u @ embed(s, pos, flat) @ u.conj().T
            for tgt in range(len(flat)):
                if flat[tgt] != f:
                    continue
                s2 = single_factor_part(img, tgt, flat, tol)
                if s2 is None or np.linalg.norm(s2) < tol:
                    continue
                c = np.vdot(s, s2) / np.vdot(s, s)
                phase = c if np.linalg.norm(s2 - c * s) < tol else None
                found.append(Soliton(s, (site_of[pos], pos), (site_of[tgt], tgt),
                                     site_of[tgt] - site_of[pos], phase, s2))
                break
    return found

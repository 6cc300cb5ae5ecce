"""Dense complex tensor helpers.

Gate tensors use the axis order (out-left, out-right, in-left, in-right),
with time running upward: the matrix form of a two-site gate has the two
output legs as row index and the two input legs as column index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ContractionError(ValueError):
    pass


def as_tensor(data, shape=None) -> np.ndarray:
    """Complex ndarray view of ``data``; checks entry count and finiteness."""
    arr = np.asarray(data, dtype=complex)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s <= 0 for s in shape):
            raise ValueError(f"non-positive dimension in shape {shape}")
        if int(np.prod(shape)) != arr.size:
            raise ValueError(f"shape {shape} needs {int(np.prod(shape))} entries, got {arr.size}")
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor has non-finite entries")
    return arr


@dataclass(frozen=True)
class MatrixView:
    tensor: np.ndarray
    row_axes: tuple
    col_axes: tuple

    def __post_init__(self):
        rows, cols = tuple(self.row_axes), tuple(self.col_axes)
        object.__setattr__(self, "row_axes", rows)
        object.__setattr__(self, "col_axes", cols)
        if set(rows) & set(cols):
            raise ValueError(f"row and column axes overlap: {sorted(set(rows) & set(cols))}")
        if sorted(rows + cols) != list(range(np.ndim(self.tensor))):
            raise ValueError("row_axes and col_axes must partition the tensor axes")


def contract(a, b, pairs: Sequence[tuple]) -> np.ndarray:
    """Sum over the paired axes; free axes of ``a`` come first, then those of ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for ia, ib in pairs:
        if a.shape[ia] != b.shape[ib]:
            raise ContractionError(
                f"axis pair ({ia}, {ib}) has mismatched dimensions {a.shape[ia]} != {b.shape[ib]}")
    if not pairs:
        return np.multiply.outer(a, b)
    ax_a, ax_b = zip(*pairs)
    return np.tensordot(a, b, axes=(list(ax_a), list(ax_b)))


def as_matrix(view: MatrixView) -> np.ndarray:
    t = np.asarray(view.tensor)
    nr = int(np.prod([t.shape[i] for i in view.row_axes]))
    return np.transpose(t, view.row_axes + view.col_axes).reshape(nr, -1)


def from_matrix(m, view: MatrixView) -> np.ndarray:
    """Inverse of :func:`as_matrix`: put a matrix back into the layout of ``view.tensor``."""
    t = np.asarray(view.tensor)
    order = view.row_axes + view.col_axes
    arr = np.asarray(m).reshape([t.shape[i] for i in order])
    return np.transpose(arr, np.argsort(order))


def unitarity_residual(m) -> float:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"unitarity residual needs a square matrix, got shape {m.shape}")
    eye = np.eye(m.shape[0])
    mh = m.conj().T
    return float(max(np.linalg.norm(mh @ m - eye), np.linalg.norm(m @ mh - eye)))


def svd_values(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("svd_values expects a matrix")
    return np.linalg.svd(m, compute_uv=False)


def dagger(t, view: MatrixView) -> np.ndarray:
    # conjugate transpose swaps the roles of the row and column axis groups
    m = as_matrix(MatrixView(t, view.row_axes, view.col_axes)).conj().T
    t = np.asarray(t)
    rows, cols = view.row_axes, view.col_axes
    if [t.shape[i] for i in rows] != [t.shape[i] for i in cols]:
        raise ValueError("dagger needs matching row and column dimensions")
    return from_matrix(m, MatrixView(t, rows, cols))


def gate_matrix(g) -> np.ndarray:
    """Square matrix of a 4-index gate tensor (rows: outputs, cols: inputs)."""
    g = np.asarray(g)
    n = g.shape[0] * g.shape[1]
    return g.reshape(n, n)


def realign(g) -> np.ndarray:
    """Operator-Schmidt realignment: rows (out-left, in-left), cols (out-right, in-right)."""
    g = np.asarray(g)
    dl, dr = g.shape[0], g.shape[1]
    return g.transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)


def partial_trace(psi, dims, keep) -> np.ndarray:
    """Reduced density matrix of a pure state on the subsystems in ``keep``."""
    dims = list(dims)
    keep = sorted(keep)
    rest = [i for i in range(len(dims)) if i not in keep]
    t = np.asarray(psi).reshape(dims).transpose(keep + rest)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    m = t.reshape(dk, -1)
    return m @ m.conj().T

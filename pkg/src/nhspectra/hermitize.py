"""Hermitian dilation of a tridiagonal matrix and its block-tridiagonal form.

The dilation ``[[0, H], [H^+, 0]]`` has eigenvalues ``+-sigma_n`` where
``sigma_n`` are the singular values of H.  Interleaving the two halves of
the basis turns it into a block-tridiagonal matrix with sparse 2x2 blocks.

Naming note: some texts call the eigenvalues of ``H^+ H`` themselves sigma;
here ``sigma`` always means their non-negative square roots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, InconsistentDimensions
from .model import TridiagonalOperator

DENSE_CAP = 1000


def _blocks(values, count, name):
    arr = np.asarray(values, dtype=complex)
    if arr.size == 0 and count == 0:
        return np.zeros((0, 2, 2), dtype=complex)
    arr = arr.reshape(-1, 2, 2)
    if arr.shape[0] != count:
        raise InconsistentDimensions(f"{name} has {arr.shape[0]} blocks, expected {count}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(eq=False)
class BlockTridiagonal:
    """Block-tridiagonal matrix with 2x2 blocks.

    ``A[k]`` is the k-th diagonal block, ``B[k]`` couples block k to k+1
    (above the diagonal) and ``C[k]`` couples block k+1 to k (below it), so
    ``C[k]`` plays the role of C_{k+2} in 1-based notation.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        self.A = _blocks(self.A, np.asarray(self.A).size // 4, "A")
        n = self.A.shape[0]
        if n == 0:
            raise InconsistentDimensions("need at least one block")
        self.B = _blocks(self.B, n - 1, "B")
        self.C = _blocks(self.C, n - 1, "C")

    @property
    def nblocks(self) -> int:
        return self.A.shape[0]

    def hermitian_as_whole(self, tol=0.0) -> bool:
        herm_diag = np.all(np.abs(self.A - self.A.conj().transpose(0, 2, 1)) <= tol)
        return bool(herm_diag and np.all(np.abs(self.C - self.B.conj().transpose(0, 2, 1)) <= tol))

    def to_dense(self) -> np.ndarray:
        n = self.nblocks
        m = np.zeros((2 * n, 2 * n), dtype=complex)
        for k in range(n):
            m[2 * k:2 * k + 2, 2 * k:2 * k + 2] = self.A[k]
        for k in range(n - 1):
            m[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = self.B[k]
            m[2 * k + 2:2 * k + 4, 2 * k:2 * k + 2] = self.C[k]
        return m

    def max_norm(self) -> float:
        return float(max(np.abs(self.A).max(), np.abs(self.B).max(initial=0.0),
                         np.abs(self.C).max(initial=0.0)))


def hermitized_pencil(H: TridiagonalOperator) -> np.ndarray:
    """The Hermitian 2N x 2N dilation [[0, H], [H^+, 0]]."""
    n = H.dim
    dense = H.to_dense()
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = dense
    out[n:, :n] = dense.conj().T
    return out


def interleave_permutation(n: int) -> np.ndarray:
    """Index map from the block-tridiagonal basis to the dilation basis.

    Zero-based: ``perm[2k] = k`` and ``perm[2k+1] = n + k``, so that
    ``block[i, j] == dilation[perm[i], perm[j]]``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = n + np.arange(n)
    return perm


def block_tridiagonalize(H: TridiagonalOperator) -> BlockTridiagonal:
    a, b, c = H.diag, H.upper, H.lower
    n = H.dim
    A = np.zeros((n, 2, 2), dtype=complex)
    A[:, 0, 1] = a
    A[:, 1, 0] = a.conj()
    B = np.zeros((n - 1, 2, 2), dtype=complex)
    B[:, 0, 1] = b
    B[:, 1, 0] = c.conj()
    C = B.conj().transpose(0, 2, 1).copy()
    return BlockTridiagonal(A, B, C)


def singular_values_direct(H: TridiagonalOperator) -> np.ndarray:
    """Singular values of H from a dense solver, descending.

    These are the square roots of the eigenvalues of H^+ H.  They are taken
    from a dense SVD rather than from ``eigvalsh(H^+ H)``, because forming
    the product squares the condition number and leaves O(sqrt(eps)) noise
    on vanishing singular values.  Values below ``1e-12 * max|H_ij|`` are
    reported as exactly zero.
    """
    if H.dim > DENSE_CAP:
        raise DimensionTooLarge(f"dense oracle limited to N <= {DENSE_CAP}, got {H.dim}")
    sigma = np.linalg.svd(H.to_dense(), compute_uv=False)
    sigma[sigma < 1e-12 * H.max_norm()] = 0.0
    return sigma

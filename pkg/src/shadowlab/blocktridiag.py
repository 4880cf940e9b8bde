"""Direct solver for symmetric positive-definite block-tridiagonal systems.

The discrete shadowing problems reduce to systems of this shape, with a few
thousand block rows of size 3.  At that scale a sequential block Cholesky
elimination (block Thomas algorithm) is fast, exactly reproducible, and needs
no tuning, so no iterative machinery is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite

__all__ = ["BlockTridiagonalSystem", "solve_block_tridiagonal"]


@dataclass(frozen=True)
class BlockTridiagonalSystem:
    """Symmetric block-tridiagonal system ``A x = b``.

    ``diag[i]`` is the i-th diagonal block (symmetric, ``n x n``) and
    ``offdiag[i]`` the sub-diagonal block coupling row ``i+1`` to row ``i``;
    the super-diagonal is its transpose.  ``rhs`` stacks the right-hand-side
    blocks as rows.
    """

    diag: np.ndarray      # (m, n, n)
    offdiag: np.ndarray   # (m-1, n, n)
    rhs: np.ndarray       # (m, n)

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        off = np.asarray(self.offdiag, dtype=float)
        rhs = np.asarray(self.rhs, dtype=float)
        m, n = rhs.shape if rhs.ndim == 2 else (0, 0)
        if diag.shape != (m, n, n) or m < 1:
            raise ValueError(
                f"diag shape {diag.shape} inconsistent with rhs shape {rhs.shape}"
            )
        if off.shape != (max(m - 1, 0), n, n):
            raise ValueError(
                f"offdiag shape {off.shape}, expected ({m - 1}, {n}, {n})"
            )
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n_blocks(self) -> int:
        return self.rhs.shape[0]

    @property
    def block_dim(self) -> int:
        return self.rhs.shape[1]

    def to_dense(self) -> np.ndarray:
        """Assemble the dense matrix; intended for tests and debugging."""
        m, n = self.n_blocks, self.block_dim
        dense = np.zeros((m * n, m * n))
        for i in range(m):
            dense[i * n:(i + 1) * n, i * n:(i + 1) * n] = self.diag[i]
        for i in range(m - 1):
            dense[(i + 1) * n:(i + 2) * n, i * n:(i + 1) * n] = self.offdiag[i]
            dense[i * n:(i + 1) * n, (i + 1) * n:(i + 2) * n] = self.offdiag[i].T
        return dense


def solve_block_tridiagonal(sys: BlockTridiagonalSystem) -> np.ndarray:
    """Solve ``A x = b`` by block Cholesky elimination, returning ``(m, n)``.

    Each Schur-complement pivot block is factored with a Cholesky
    decomposition; a factorization failure raises
    :class:`NotPositiveDefinite`, which signals rank-deficient constraints or
    an assembly bug upstream.
    """
    diag, offdiag, rhs = sys.diag, sys.offdiag, sys.rhs
    m, n = sys.n_blocks, sys.block_dim

    # forward elimination: pivot = diag[i] - offdiag[i-1] pivot^{-1} offdiag[i-1]^T
    inv_chol = np.empty((m, n, n))       # inverse Cholesky factor of each pivot
    coupling = np.empty((max(m - 1, 0), n, n))
    half = np.empty((m, n))              # rhs after the half solve L^{-1} y
    pivot = diag[0]
    for i in range(m):
        try:
            chol = np.linalg.cholesky(pivot)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                f"pivot block {i} of {m} is not positive definite"
            ) from None
        linv = np.linalg.inv(chol)
        inv_chol[i] = linv
        if i == 0:
            half[0] = linv @ rhs[0]
        else:
            half[i] = linv @ (rhs[i] - coupling[i - 1].T @ half[i - 1])
        if i < m - 1:
            k = linv @ offdiag[i].T
            coupling[i] = k
            pivot = diag[i + 1] - k.T @ k

    # back substitution
    x = np.empty((m, n))
    x[m - 1] = inv_chol[m - 1].T @ half[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = inv_chol[i].T @ (half[i] - coupling[i] @ x[i + 1])
    return x

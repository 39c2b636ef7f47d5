"""Dense complex/real matrix primitives.

Unitarity checks, deterministic completion of partially specified unitaries,
PSD principal square roots, and the stochastic-to-unitary embedding template
used to turn row-stochastic transition matrices into unitary ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STRUCT_TOL = 1e-10
RECON_TOL = 1e-9


class CompletionError(ValueError):
    """Raised when a partial matrix cannot be completed to a unitary."""


class NotPsdError(ValueError):
    """Raised when a matrix expected to be PSD has a negative eigenvalue."""


def is_unitary(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """True iff max-norm of (M†M - I) is at most tol.

    Raises ValueError for non-square input.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"unitarity requires a square matrix, got shape {m.shape}")
    gram = m.conj().T @ m
    return float(np.abs(gram - np.eye(m.shape[0])).max()) <= tol


def is_row_stochastic(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """True iff all entries are real, in [0, 1], and every row sums to 1 within tol."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"stochasticity check requires a square matrix, got shape {a.shape}")
    if np.iscomplexobj(a):
        if np.abs(a.imag).max() > tol:
            return False
        a = a.real
    if a.min() < -tol or a.max() > 1 + tol:
        return False
    return float(np.abs(a.sum(axis=1) - 1.0).max()) <= tol


@dataclass
class PartialMatrix:
    """A dim x dim complex matrix with only some columns specified.

    ``columns`` maps column index -> full column vector of length ``dim``.
    """

    dim: int
    columns: dict[int, np.ndarray] = field(default_factory=dict)

    def set_column(self, index: int, column) -> None:
        col = np.asarray(column, dtype=complex).reshape(-1)
        if col.shape != (self.dim,):
            raise ValueError(f"column {index} has length {col.shape[0]}, expected {self.dim}")
        if index in self.columns:
            raise ValueError(f"column {index} specified twice")
        if not (0 <= index < self.dim):
            raise ValueError(f"column index {index} out of range for dim {self.dim}")
        self.columns[index] = col

    def set_entries(self, index: int, entries: dict[int, complex]) -> None:
        """Specify a column from a sparse {row: amplitude} map."""
        col = np.zeros(self.dim, dtype=complex)
        for row, amp in entries.items():
            col[row] = amp
        self.set_column(index, col)


def complete_unitary(partial: PartialMatrix, tol: float = STRUCT_TOL) -> np.ndarray:
    """Extend the specified columns of ``partial`` to a full unitary matrix.

    The specified columns must be pairwise orthonormal within tol and are
    reproduced bit-exactly in the output.  Unspecified columns are filled by
    Gram-Schmidt against the growing column set, seeded with standard basis
    vectors taken in index order; seeds whose projection residual falls below
    tol are skipped.  The procedure is deterministic.
    """
    dim = partial.dim
    specified = sorted(partial.columns)
    for pos, i in enumerate(specified):
        ci = partial.columns[i]
        ni = np.linalg.norm(ci)
        if abs(ni - 1.0) > tol:
            raise CompletionError(f"column {i} has norm {ni!r}, not 1 within {tol}")
        for j in specified[pos + 1:]:
            ip = abs(np.vdot(ci, partial.columns[j]))
            if ip > tol:
                raise CompletionError(
                    f"columns {i} and {j} are not orthogonal (|<i|j>| = {ip:.3e} > {tol})"
                )

    out = np.zeros((dim, dim), dtype=complex)
    basis: list[np.ndarray] = []
    for i in specified:
        out[:, i] = partial.columns[i]
        basis.append(partial.columns[i])

    seed = 0
    for j in range(dim):
        if j in partial.columns:
            continue
        while True:
            if seed >= dim:
                raise CompletionError("ran out of seed vectors during completion")
            v = np.zeros(dim, dtype=complex)
            v[seed] = 1.0
            seed += 1
            # two Gram-Schmidt passes keep orthogonality near machine precision
            for _ in range(2):
                for b in basis:
                    v = v - np.vdot(b, v) * b
            res = np.linalg.norm(v)
            if res > tol:
                v = v / res
                break
        out[:, j] = v
        basis.append(v)
    return out


def psd_principal_sqrt(m: np.ndarray, tol: float = RECON_TOL) -> np.ndarray:
    """Principal square root B of a real symmetric PSD matrix, B @ B.T = M.

    Eigenvalues below -tol raise NotPsdError; small negative eigenvalues in
    [-tol, 0) are clamped to zero.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.abs(m - m.T).max() > tol:
        raise ValueError("matrix is not symmetric")
    evals, evecs = np.linalg.eigh(m)
    if evals.min() < -tol:
        raise NotPsdError(f"eigenvalue {evals.min():.3e} below -{tol}")
    root = np.sqrt(np.clip(evals, 0.0, None))
    return (evecs * root) @ evecs.T


def embed_stochastic(a: np.ndarray, tol: float = STRUCT_TOL) -> tuple[np.ndarray, float]:
    """Embed a row-stochastic n x n matrix A into a 2n x 2n unitary U.

    The top rows of U are (1/l)(A | B) with B @ B.T = l^2 I - A @ A.T and
    l = sqrt(n); the bottom rows complete U to a unitary by orthonormal
    extension.  Returns (U, l).  The scale l depends only on the dimension,
    so matrices of equal size share it.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not is_row_stochastic(a, tol):
        raise ValueError("matrix is not row-stochastic within tolerance")
    n = a.shape[0]
    scale = float(np.sqrt(n))
    gram = scale**2 * np.eye(n) - a @ a.T
    b = psd_principal_sqrt(gram, RECON_TOL)
    top = np.hstack([a, b]) / scale

    partial = PartialMatrix(2 * n)
    for i in range(n):
        partial.set_column(i, top[i, :].conj())
    completed = complete_unitary(partial, max(tol, 1e-12))
    u = completed.conj().T
    return u, scale

"""Dense complex linear-algebra primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` in numpy's
default row-major storage. ``vec`` stacks *columns* (Fortran order), which is
the convention the stacked observation model relies on.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgumentError, SolverError

#: Singular values below ``RANK_TOL * s_max`` count as zero.
RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-9


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite 2-D complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D matrix, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return A


def vec(M) -> np.ndarray:
    """Column-stack ``M`` into a vector."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != rows * cols:
        raise InvalidArgumentError(
            f"cannot reshape vector of length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A), np.asarray(B))


def numerical_rank(M, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _require_full_column_rank(A: np.ndarray, name: str, tol: float) -> None:
    r = numerical_rank(A, tol)
    if r < A.shape[1]:
        raise SolverError(f"matrix {name} is rank deficient "
                          f"(rank {r} < {A.shape[1]} columns)",
                          matrix=name, rank=r, cols=A.shape[1])


def gram_inverse(A, name: str = "A", tol: float = RANK_TOL) -> np.ndarray:
    """``(A^H A)^{-1}`` for a full-column-rank ``A``."""
    A = as_matrix(A)
    _require_full_column_rank(A, name, tol)
    gram = A.conj().T @ A
    inv = sla.inv(gram)
    return 0.5 * (inv + inv.conj().T)


def orth_complement_projector(A, name: str = "A", tol: float = RANK_TOL,
                              gram_inv: np.ndarray | None = None) -> np.ndarray:
    """Projector onto the orthogonal complement of ``range(A)``.

    Returns ``I - A (A^H A)^{-1} A^H``. ``gram_inv`` may be passed when the
    caller already holds ``(A^H A)^{-1}``.
    """
    A = as_matrix(A)
    if gram_inv is None:
        gram_inv = gram_inverse(A, name, tol)
    P = np.eye(A.shape[0], dtype=complex) - A @ gram_inv @ A.conj().T
    return 0.5 * (P + P.conj().T)


def hermitian_eig(H, tol: float = HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns
    -------
    (w, V) : (ndarray, ndarray)
        Real eigenvalues sorted in descending order and the matching
        orthonormal eigenvectors as columns, so ``H = V diag(w) V^H``.
    """
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise InvalidArgumentError("matrix is not square")
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * scale:
        raise InvalidArgumentError("matrix is not Hermitian")
    w, V = np.linalg.eigh(H)
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def ls_solve(A, b, tol: float = RANK_TOL) -> np.ndarray:
    """Least-squares solution of ``A x ~ b`` via a thin QR of ``A``.

    ``b`` may be a vector or a matrix of right-hand sides (one per column).
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != A.shape[0]:
        raise InvalidArgumentError("A and b have incompatible row counts")
    Q, R = np.linalg.qr(A, mode="reduced")
    d = np.abs(np.diag(R))
    if d.size and (d.min() <= tol * d.max() or d.max() == 0.0):
        _require_full_column_rank(A, "A", tol)
    return sla.solve_triangular(R, Q.conj().T @ b)

"""Least-squares kernels and quadrature used by the solvers."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import InvalidArgumentError, RankDeficiencyError

RANK_RTOL = 1e-10


def _check_system(A, b):
    A = np.asarray(A)
    b = np.asarray(b)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise InvalidArgumentError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise InvalidArgumentError(f"right-hand side shape {b.shape} does not match {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InvalidArgumentError("non-finite entries in least-squares system")
    return A, b


def _qr_solve(A, b):
    # column-pivoted QR; |R_kk| is non-increasing so the rank test is a prefix
    Q, R, perm = la.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        raise RankDeficiencyError(0, A.shape[1])
    rank = int(np.count_nonzero(diag > RANK_RTOL * diag[0]))
    if rank < A.shape[1]:
        raise RankDeficiencyError(rank, A.shape[1])
    y = la.solve_triangular(R, Q.conj().T @ b)
    out = np.empty_like(y)
    out[perm] = y
    return out


def lstsq_complex(A, b) -> np.ndarray:
    """Minimise ||b - A f||_2 over complex f by pivoted QR.

    Raises :class:`RankDeficiencyError` when a pivot falls below
    ``RANK_RTOL`` times the largest one, or when ``A`` has more columns
    than rows.
    """
    A, b = _check_system(A, b)
    M, P = A.shape
    if M < P:
        raise RankDeficiencyError(M, P, f"underdetermined system: {M} rows < {P} columns")
    return _qr_solve(A.astype(complex), b.astype(complex))


def lstsq_real_constrained(A, b) -> np.ndarray:
    """Minimise ||b - A eta||_2 over *real* eta.

    Real and imaginary parts are stacked into a 2M x P real problem, which
    is the exact minimiser over the real subspace.
    """
    A, b = _check_system(A, b)
    A = A.astype(complex)
    b = b.astype(complex)
    As = np.vstack([A.real, A.imag])
    bs = np.concatenate([b.real, b.imag])
    if As.shape[0] < As.shape[1]:
        raise RankDeficiencyError(As.shape[0], As.shape[1])
    return _qr_solve(As, bs)


def trapezoid(values, abscissae) -> float:
    """Composite trapezoidal rule over ordered abscissae."""
    y = np.asarray(values, dtype=float)
    x = np.asarray(abscissae, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise InvalidArgumentError("trapezoid needs at least 2 samples")
    if x.shape != y.shape:
        raise InvalidArgumentError("values and abscissae differ in length")
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))

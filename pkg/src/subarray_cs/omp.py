"""OMP-SS: greedy recovery of the subarray difference vector.

The dictionary is A = Phi Psi, so a nonzero at column j of the sparse
vector starts a new subarray at element j. Supports are stored 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import InfeasibleError, InvalidArgumentError
from .numerics import lstsq_complex

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class OmpStep:
    index: int
    residual_norm: float
    xi: float | None = None


@dataclass
class OmpTrace:
    steps: list[OmpStep] = field(default_factory=list)

    @property
    def residual_norms(self) -> list[float]:
        return [s.residual_norm for s in self.steps]


@dataclass(frozen=True, eq=False)
class SparseSolution:
    support: tuple[int, ...]
    coeffs: np.ndarray
    residual_norm: float
    N: int

    @property
    def K(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.N, dtype=complex)
        x[list(self.support)] = self.coeffs
        return x

    def excitations(self) -> np.ndarray:
        return np.cumsum(self.dense())


def _select(z: np.ndarray, taken: list[int], allow_reselect: bool) -> int:
    mag = np.abs(z)
    if not allow_reselect and taken:
        mag = mag.copy()
        mag[taken] = -np.inf
    best = mag.max()
    # lowest index among near-ties
    return int(np.flatnonzero(mag >= best - TIE_RTOL * abs(best))[0])


def omp_iterations(A: np.ndarray, fbar: np.ndarray, *, normalize_columns: bool = False,
                   allow_reselect: bool = False) -> Iterator[tuple[int, SparseSolution]]:
    """Yield ``(chosen index, iterate)`` after each support update.

    Correlations use the raw columns of ``A`` unless ``normalize_columns``
    is set. With ``allow_reselect`` an index already in the support may be
    chosen again, which leaves the iterate unchanged.
    """
    A = np.asarray(A, dtype=complex)
    fbar = np.asarray(fbar, dtype=complex)
    M, N = A.shape
    if fbar.shape != (M,):
        raise InvalidArgumentError(f"target length {fbar.size} does not match {M} dictionary rows")
    atoms = A / np.linalg.norm(A, axis=0) if normalize_columns else A
    support: list[int] = []
    residual = fbar.copy()
    coeffs = np.zeros(0, dtype=complex)
    while True:
        z = atoms.conj().T @ residual
        if len(support) == N and not allow_reselect:
            return
        j = _select(z, support, allow_reselect)
        if j not in support:
            support.append(j)
            coeffs = lstsq_complex(A[:, support], fbar)
            residual = fbar - A[:, support] @ coeffs
        yield j, SparseSolution(tuple(support), coeffs.copy(), float(np.linalg.norm(residual)), N)


def omp_mode1(A: np.ndarray, fbar, K: int, **opts) -> tuple[SparseSolution, OmpTrace]:
    """Run exactly ``K`` OMP iterations."""
    N = np.shape(A)[1]
    if int(K) != K or not 1 <= K <= N:
        raise InvalidArgumentError(f"K must be an integer in [1, {N}], got {K!r}")
    trace = OmpTrace()
    sol = None
    for t, (j, sol) in enumerate(omp_iterations(A, fbar, **opts), start=1):
        trace.steps.append(OmpStep(j, sol.residual_norm))
        if t >= K:
            break
    return sol, trace


def omp_mode2(A: np.ndarray, fbar, *, epsilon: float | None = None,
              xi_target: float | None = None,
              xi_of: Callable[[np.ndarray], float] | None = None,
              max_iter: int | None = None, **opts) -> tuple[SparseSolution, OmpTrace]:
    """Iterate until the residual norm is <= ``epsilon`` or xi <= ``xi_target``.

    ``xi_of`` maps an excitation vector to the matching error and is
    required with ``xi_target``. Raises :class:`InfeasibleError` when the
    full support (or ``max_iter``) is reached without meeting the threshold.
    """
    if (epsilon is None) == (xi_target is None):
        raise InvalidArgumentError("give exactly one of epsilon or xi_target")
    threshold = epsilon if epsilon is not None else xi_target
    if not threshold > 0:
        raise InvalidArgumentError(f"threshold must be positive, got {threshold!r}")
    if xi_target is not None and xi_of is None:
        raise InvalidArgumentError("xi_target needs an xi evaluator")
    N = np.shape(A)[1]
    limit = N if max_iter is None else min(max_iter, N)
    trace = OmpTrace()
    best = None
    best_err = np.inf
    for t, (j, sol) in enumerate(omp_iterations(A, fbar, **opts), start=1):
        if epsilon is not None:
            err = sol.residual_norm
            trace.steps.append(OmpStep(j, sol.residual_norm))
        else:
            err = xi_of(sol.excitations())
            trace.steps.append(OmpStep(j, sol.residual_norm, err))
        if err < best_err:
            best, best_err = sol, err
        if err <= threshold:
            return sol, trace
        if t >= limit:
            break
    raise InfeasibleError(
        f"threshold {threshold:g} not reached; best {best_err:.4g} with K={best.K if best else 0}",
        best=(best, trace), best_residual=best_err)

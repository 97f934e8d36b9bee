"""Array geometry, angle grids and the dictionary matrices of the sparse model.

Positions are in wavelengths throughout (lambda == 1), angles in radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

HALF_PI = np.pi / 2


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Strictly increasing observation angles in [-pi/2, pi/2].

    ``degrees`` is kept when the grid was built from degree values so that
    files written from it reproduce their input text exactly.
    """

    thetas: np.ndarray
    degrees: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.thetas, dtype=float).copy()
        if t.ndim != 1 or t.size < 2:
            raise InvalidArgumentError("angle grid needs at least 2 samples")
        if not np.all(np.diff(t) > 0):
            raise InvalidArgumentError("angle grid must be strictly increasing")
        tol = 1e-12
        if t[0] < -HALF_PI - tol or t[-1] > HALF_PI + tol:
            raise InvalidArgumentError("angles must lie within [-pi/2, pi/2]")
        t.setflags(write=False)
        object.__setattr__(self, "thetas", t)
        if self.degrees is not None:
            deg = np.asarray(self.degrees, dtype=float).copy()
            if deg.shape != t.shape:
                raise InvalidArgumentError("degree labels do not match the grid")
            deg.setflags(write=False)
            object.__setattr__(self, "degrees", deg)

    @classmethod
    def from_degrees(cls, degrees) -> AngleGrid:
        deg = np.asarray(degrees, dtype=float)
        return cls(np.radians(deg), degrees=deg)

    @classmethod
    def uniform(cls, M: int, lo: float = -HALF_PI, hi: float = HALF_PI) -> AngleGrid:
        return cls(np.linspace(lo, hi, M))

    @classmethod
    def uniform_degrees(cls, step_deg: float, lo_deg: float = 0.0, hi_deg: float = 90.0) -> AngleGrid:
        n = int(round((hi_deg - lo_deg) / step_deg))
        deg = lo_deg + step_deg * np.arange(n + 1)
        deg[-1] = min(deg[-1], hi_deg)
        return cls.from_degrees(deg)

    @property
    def deg(self) -> np.ndarray:
        return self.degrees if self.degrees is not None else np.degrees(self.thetas)

    def __len__(self) -> int:
        return self.thetas.size

    def __eq__(self, other) -> bool:
        return isinstance(other, AngleGrid) and np.array_equal(self.thetas, other.thetas)

    def __hash__(self):
        return hash(self.thetas.tobytes())


def default_solver_grid(N: int) -> AngleGrid:
    """Uniform grid of 4N+1 angles over the full visible range."""
    return AngleGrid.uniform(4 * N + 1)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Sorted element positions (wavelengths)."""

    positions: np.ndarray
    d_min: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.positions, dtype=float).copy()
        if d.ndim != 1 or d.size < 1:
            raise InvalidArgumentError("geometry needs at least one element")
        if not np.all(np.isfinite(d)):
            raise InvalidArgumentError("positions must be finite")
        gaps = np.diff(d)
        if np.any(gaps <= 0):
            raise InvalidArgumentError("positions must be strictly increasing")
        if gaps.size and gaps.min() < self.d_min * (1 - 1e-12):
            raise InvalidArgumentError(
                f"spacing {gaps.min():.6g} below minimum {self.d_min:.6g}")
        d.setflags(write=False)
        object.__setattr__(self, "positions", d)

    @property
    def N(self) -> int:
        return self.positions.size

    def __len__(self) -> int:
        return self.positions.size

    def __eq__(self, other) -> bool:
        return isinstance(other, ArrayGeometry) and np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash(self.positions.tobytes())


def uniform_geometry(N: int, spacing: float = 0.5) -> ArrayGeometry:
    """``N`` elements at ``spacing`` wavelengths, centred on the origin."""
    if int(N) != N or N < 2:
        raise InvalidArgumentError(f"N must be an integer >= 2, got {N!r}")
    if not spacing > 0:
        raise InvalidArgumentError(f"spacing must be positive, got {spacing!r}")
    n = np.arange(1, int(N) + 1)
    return ArrayGeometry((n - (N + 1) / 2) * spacing)


def _positions(geom) -> np.ndarray:
    if isinstance(geom, ArrayGeometry):
        return geom.positions
    return np.atleast_1d(np.asarray(geom, dtype=float))


def _thetas(grid) -> np.ndarray:
    if isinstance(grid, AngleGrid):
        return grid.thetas
    return np.atleast_1d(np.asarray(grid, dtype=float))


def steering_matrix(geom, grid) -> np.ndarray:
    """M x N matrix with entries exp(j 2 pi d_n sin(theta_m))."""
    d = _positions(geom)
    s = np.sin(_thetas(grid))
    return np.exp(2j * np.pi * np.outer(s, d))


def basis_expand(x) -> np.ndarray:
    """Apply the lower-triangular all-ones basis: w_n = sum_{k<=n} x_k."""
    return np.cumsum(np.asarray(x, dtype=complex))


def basis_difference(w) -> np.ndarray:
    """Inverse of :func:`basis_expand` (first element, then successive differences)."""
    w = np.asarray(w, dtype=complex)
    return np.diff(w, prepend=0)


def basis_columns(N: int, support) -> np.ndarray:
    """Dense N x K block of basis columns picked by ``support`` (0-based)."""
    support = np.asarray(support, dtype=int)
    return (np.arange(N)[:, None] >= support[None, :]).astype(float)


def dictionary(phi: np.ndarray) -> np.ndarray:
    """A = Phi Psi; column j is the sum of steering columns j..N-1."""
    return np.cumsum(phi[:, ::-1], axis=1)[:, ::-1]


def evaluate_pattern(geom, w, grid) -> np.ndarray:
    """Array factor sum_n w_n exp(j 2 pi d_n sin(theta)) on ``grid``."""
    d = _positions(geom)
    w = np.asarray(w, dtype=complex)
    if w.shape != d.shape:
        raise InvalidArgumentError(
            f"excitation length {w.size} does not match {d.size} elements")
    return steering_matrix(d, grid) @ w

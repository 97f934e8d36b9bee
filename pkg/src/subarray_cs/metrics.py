"""Figures of merit: matching error, subarray rate, sidelobe level, layout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .model import HALF_PI, AngleGrid, basis_expand, steering_matrix
from .numerics import trapezoid

DEFAULT_METRIC_STEP_DEG = 0.05
DEFAULT_SCAN_STEP_DEG = 0.01


@dataclass(frozen=True)
class MetricsReport:
    xi: float
    chi: float
    sll_db: float
    mainlobe_peak_deg: float


@dataclass(frozen=True)
class Subarray:
    first: int  # 1-based, inclusive
    last: int
    weight: complex

    @property
    def size(self) -> int:
        return self.last - self.first + 1


@dataclass(frozen=True)
class SubarrayLayout:
    runs: tuple[Subarray, ...]

    @property
    def K(self) -> int:
        return len(self.runs)

    @property
    def sizes(self) -> list[int]:
        return [r.size for r in self.runs]


def metric_grid(step_deg: float = DEFAULT_METRIC_STEP_DEG) -> AngleGrid:
    """Uniform grid over [0, 90] degrees used for the matching error."""
    if not step_deg > 0:
        raise InvalidArgumentError("metric step must be positive")
    return AngleGrid.uniform_degrees(step_deg, 0.0, 90.0)


def _half_space(thetas):
    return (thetas >= -1e-12) & (thetas <= HALF_PI + 1e-12)


def xi_metric(desired, achieved, grid: AngleGrid | None = None, *,
              denominator: str = "desired") -> float:
    """Normalised integrated squared error over [0, pi/2].

    ``desired`` is a DesiredPattern (its grid is used) or a raw vector with
    ``grid`` supplied. ``denominator="achieved"`` normalises by the achieved
    pattern energy instead of the desired one.
    """
    if grid is None:
        grid = desired.grid
        desired = desired.values
    fbar = np.asarray(desired, dtype=complex)
    f = np.asarray(achieved, dtype=complex)
    if fbar.shape != (len(grid),) or f.shape != fbar.shape:
        raise InvalidArgumentError("patterns and grid differ in length")
    keep = _half_space(grid.thetas)
    t = grid.thetas[keep]
    num = trapezoid(np.abs(fbar[keep] - f[keep]) ** 2, t)
    if denominator == "desired":
        den = trapezoid(np.abs(fbar[keep]) ** 2, t)
    elif denominator == "achieved":
        den = trapezoid(np.abs(f[keep]) ** 2, t)
    else:
        raise InvalidArgumentError(f"unknown xi denominator {denominator!r}")
    if den <= 0:
        if denominator == "achieved":
            return float("inf")
        raise InvalidArgumentError("desired pattern has zero energy on [0, pi/2]")
    return num / den


class XiEvaluator:
    """Matching error of (positions, excitations) against a fixed target."""

    def __init__(self, desired, denominator: str = "desired"):
        self.grid = desired.grid
        self.desired = desired.values
        self.denominator = denominator
        keep = _half_space(self.grid.thetas)
        if np.count_nonzero(keep) < 2:
            raise InvalidArgumentError("metric grid has fewer than 2 samples in [0, pi/2]")

    def pattern(self, positions, w) -> np.ndarray:
        return steering_matrix(positions, self.grid) @ np.asarray(w, dtype=complex)

    def __call__(self, positions, w) -> float:
        return xi_metric(self.desired, self.pattern(positions, w), self.grid,
                         denominator=self.denominator)


def chi_metric(K: int, N: int) -> float:
    if int(K) != K or int(N) != N or not 1 <= K <= N:
        raise InvalidArgumentError(f"need 1 <= K <= N, got K={K!r}, N={N!r}")
    return K / N


def _pattern_magnitude(positions, w, deg):
    s = np.sin(np.radians(deg))
    w = np.asarray(w, dtype=complex)
    out = np.empty(deg.size)
    # chunked so large N x dense scans stay within a few MB
    step = max(1, 2_000_000 // max(1, len(positions)))
    for i in range(0, deg.size, step):
        out[i:i + step] = np.abs(np.exp(2j * np.pi * np.outer(s[i:i + step], positions)) @ w)
    return out


def measure_sll(geom, w, scan_step_deg: float = DEFAULT_SCAN_STEP_DEG) -> tuple[float, float]:
    """Peak sidelobe level (dB) and main-lobe direction (deg) from a dense scan.

    The main lobe spans the global peak out to the first local minimum on
    each side. Returns ``-inf`` when nothing lies outside the main lobe.
    """
    positions = geom.positions if hasattr(geom, "positions") else np.asarray(geom, dtype=float)
    w = np.asarray(w, dtype=complex)
    if not np.any(w != 0):
        raise InvalidArgumentError("excitations are all zero")
    n = int(round(180.0 / scan_step_deg))
    deg = np.linspace(-90.0, 90.0, n + 1)
    mag = _pattern_magnitude(positions, w, deg)
    peak = int(np.argmax(mag))
    lo = peak
    while lo > 0 and mag[lo - 1] <= mag[lo]:
        lo -= 1
    hi = peak
    while hi < mag.size - 1 and mag[hi + 1] <= mag[hi]:
        hi += 1
    outside = np.concatenate([mag[:lo], mag[hi + 1:]])
    if outside.size == 0 or mag[peak] == 0:
        return float("-inf"), float(deg[peak])
    side = outside.max()
    if side <= 0:
        return float("-inf"), float(deg[peak])
    return float(20 * np.log10(side / mag[peak])), float(deg[peak])


def layout_from_weights(w, merge_tol: float = 1e-9) -> SubarrayLayout:
    """Group maximal runs of equal consecutive weights (1-based indices)."""
    w = np.asarray(w, dtype=complex)
    scale = np.max(np.abs(w)) if w.size else 0.0
    tol = merge_tol * scale
    runs = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or abs(w[i] - w[i - 1]) > tol:
            runs.append(Subarray(start + 1, i, complex(w[start])))
            start = i
    return SubarrayLayout(tuple(runs))


def extract_layout(solution, N: int, merge_tol: float = 1e-9) -> SubarrayLayout:
    """Subarray runs implied by a sparse solution's support and coefficients."""
    x = np.zeros(N, dtype=complex)
    x[np.asarray(solution.support, dtype=int)] = solution.coeffs
    return layout_from_weights(basis_expand(x), merge_tol)

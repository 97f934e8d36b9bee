"""Reference desired patterns: Dolph-Chebyshev, Taylor, or imported from CSV."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, PatternFileError, PatternGenerationError
from .model import AngleGrid, evaluate_pattern, uniform_geometry

FAMILIES = ("chebyshev", "taylor", "file")


@dataclass(frozen=True)
class PatternSpec:
    family: str
    N: int | None = None
    sll_db: float | None = None
    nbar: int = 5
    path: str | None = None
    # False accepts Taylor tapers whose weights rise toward the edges
    strict: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown pattern family {self.family!r}")
        if self.family == "file":
            if not self.path:
                raise InvalidArgumentError("file patterns need a path")
            return
        if self.N is None or int(self.N) != self.N or self.N < 2:
            raise InvalidArgumentError(f"N must be an integer >= 2, got {self.N!r}")
        if self.sll_db is None or not self.sll_db > 0:
            raise InvalidArgumentError(f"sll_db must be positive, got {self.sll_db!r}")
        if self.family == "taylor" and (int(self.nbar) != self.nbar or self.nbar < 1):
            raise InvalidArgumentError(f"nbar must be an integer >= 1, got {self.nbar!r}")


@dataclass(frozen=True, eq=False)
class DesiredPattern:
    grid: AngleGrid
    values: np.ndarray
    # set when a magnitude-only file was imported with zero phase
    phase_assumed: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).copy()
        if v.shape != (len(self.grid),):
            raise InvalidArgumentError(
                f"{v.size} pattern samples for a grid of {len(self.grid)} angles")
        if not np.any(v != 0):
            raise InvalidArgumentError("desired pattern is identically zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def restrict(self, lo: float, hi: float) -> DesiredPattern:
        """Samples whose angle lies in [lo, hi] radians."""
        t = self.grid.thetas
        keep = (t >= lo - 1e-12) & (t <= hi + 1e-12)
        deg = None if self.grid.degrees is None else self.grid.degrees[keep]
        return DesiredPattern(AngleGrid(t[keep], degrees=deg), self.values[keep],
                              self.phase_assumed)


def _cheb_poly(n: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inner = np.abs(x) <= 1
    out[inner] = np.cos(n * np.arccos(x[inner]))
    big = x > 1
    out[big] = np.cosh(n * np.arccosh(x[big]))
    small = x < -1
    out[small] = (-1) ** n * np.cosh(n * np.arccosh(-x[small]))
    return out


def chebyshev_excitations(N: int, sll_db: float) -> np.ndarray:
    """Dolph-Chebyshev weights with equi-ripple sidelobes at ``-sll_db``.

    The array polynomial T_{N-1}(x0 cos(psi/2)) is sampled at N equally
    spaced phases psi_k and inverted by a direct DFT over the centred
    element indices. Weights are normalised to a unit maximum.
    """
    if int(N) != N or N < 2:
        raise InvalidArgumentError(f"N must be an integer >= 2, got {N!r}")
    if not sll_db > 0:
        raise InvalidArgumentError(f"sll_db must be positive, got {sll_db!r}")
    N = int(N)
    ratio = 10.0 ** (sll_db / 20.0)
    order = N - 1
    x0 = np.cosh(np.arccosh(ratio) / order)
    psi = 2 * np.pi * np.arange(N) / N
    af = _cheb_poly(order, x0 * np.cos(psi / 2))
    idx = np.arange(N) - (N - 1) / 2
    w = (np.exp(-1j * np.outer(idx, psi)) @ af).real / N
    w = 0.5 * (w + w[::-1])
    return w / np.max(np.abs(w))


def taylor_excitations(N: int, sll_db: float, nbar: int = 5, strict: bool = True) -> np.ndarray:
    """Taylor n-bar line-source taper sampled at the element centres.

    With ``strict`` a taper that is not monotonically decreasing from the
    centre outward (``nbar`` too large for the sidelobe level) raises
    :class:`PatternGenerationError`.
    """
    if int(N) != N or N < 2:
        raise InvalidArgumentError(f"N must be an integer >= 2, got {N!r}")
    if int(nbar) != nbar or nbar < 1:
        raise InvalidArgumentError(f"nbar must be an integer >= 1, got {nbar!r}")
    if not sll_db > 0:
        raise InvalidArgumentError(f"sll_db must be positive, got {sll_db!r}")
    N, nbar = int(N), int(nbar)
    ratio = 10.0 ** (sll_db / 20.0)
    A = np.arccosh(ratio) / np.pi
    sigma2 = nbar**2 / (A**2 + (nbar - 0.5) ** 2)
    ms = np.arange(1, nbar)
    coeffs = np.empty(ms.size)
    for i, m in enumerate(ms):
        num = np.prod(1 - m**2 / (sigma2 * (A**2 + (ms - 0.5) ** 2)))
        others = ms[ms != m]
        den = 2 * np.prod(1 - m**2 / others**2)
        coeffs[i] = (-1) ** (m + 1) * num / den
    x = (np.arange(N) - N / 2 + 0.5) / N
    w = 1 + 2 * np.cos(2 * np.pi * np.outer(x, ms)) @ coeffs
    w = 0.5 * (w + w[::-1])
    half = w[N // 2:]
    if np.any(w <= 0) or (strict and np.any(np.diff(half) > 1e-12 * np.max(w))):
        raise PatternGenerationError(
            f"nbar={nbar} is too large for a {sll_db} dB Taylor taper (non-monotonic weights)")
    return w / np.max(w)


def generator_weights(spec: PatternSpec) -> np.ndarray:
    if spec.family == "chebyshev":
        return chebyshev_excitations(spec.N, spec.sll_db)
    if spec.family == "taylor":
        return taylor_excitations(spec.N, spec.sll_db, spec.nbar, spec.strict)
    raise InvalidArgumentError("file patterns have no generator weights")


def make_desired(spec: PatternSpec, grid: AngleGrid | None = None) -> DesiredPattern:
    """Evaluate the reference pattern of a half-wavelength uniform array on ``grid``.

    File patterns are returned on their own grid; passing a different
    ``grid`` for them is an error.
    """
    if spec.family == "file":
        pattern = read_pattern_csv(spec.path)
        if grid is not None and grid != pattern.grid:
            raise InvalidArgumentError("file pattern grid differs from the requested grid")
        return pattern
    if grid is None:
        raise InvalidArgumentError("generated patterns need an angle grid")
    w = generator_weights(spec)
    values = evaluate_pattern(uniform_geometry(spec.N, 0.5), w, grid)
    return DesiredPattern(grid, values)


def format_float(v: float) -> str:
    return repr(float(v))


def pattern_csv_text(grid: AngleGrid, values) -> str:
    buf = io.StringIO()
    buf.write("theta_deg,re,im\n")
    for t, v in zip(grid.deg, np.asarray(values, dtype=complex)):
        buf.write(f"{format_float(t)},{format_float(v.real)},{format_float(v.imag)}\n")
    return buf.getvalue()


def write_pattern_csv(path, grid: AngleGrid, values) -> None:
    Path(path).write_text(pattern_csv_text(grid, values), encoding="utf-8")


def read_pattern_csv(path) -> DesiredPattern:
    """Load a ``theta_deg,re,im`` or ``theta_deg,mag_db`` CSV."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PatternFileError(f"cannot read pattern file {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise PatternFileError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise PatternFileError(f"{path}: non-numeric entry ({exc})") from exc
    if data.size == 0:
        raise PatternFileError(f"{path}: no samples")
    if header == ["theta_deg", "re", "im"] and data.shape[1] == 3:
        values = data[:, 1] + 1j * data[:, 2]
        assumed = False
    elif header == ["theta_deg", "mag_db"] and data.shape[1] == 2:
        warnings.warn(f"{path}: magnitude-only pattern, assuming zero phase", stacklevel=2)
        values = 10.0 ** (data[:, 1] / 20.0) + 0j
        assumed = True
    else:
        raise PatternFileError(
            f"{path}: expected header 'theta_deg,re,im' or 'theta_deg,mag_db', got {','.join(header)!r}")
    try:
        grid = AngleGrid.from_degrees(data[:, 0])
        return DesiredPattern(grid, values, phase_assumed=assumed)
    except InvalidArgumentError as exc:
        raise PatternFileError(f"{path}: {exc}") from exc

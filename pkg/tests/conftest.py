import numpy as np
import pytest
from scipy.signal import find_peaks

from subarray_cs.patterns import PatternSpec
from subarray_cs.synthesis import SolverConfig, build_problem

CHEB20 = PatternSpec("chebyshev", 20, 20.0)
CHEB100 = PatternSpec("chebyshev", 100, 30.0)
TAYLOR128 = PatternSpec("taylor", 128, 50.0, 5)


def inv3(m):
    """Cofactor inverse of a 3x3 matrix (oracle, independent of LAPACK)."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    cof = np.array([
        [e * i - f * h, -(d * i - f * g), d * h - e * g],
        [-(b * i - c * h), a * i - c * g, -(a * h - b * g)],
        [b * f - c * e, -(a * f - c * d), a * e - b * d],
    ])
    det = a * cof[0, 0] + b * cof[0, 1] + c * cof[0, 2]
    return cof.T / det


def normal_equations(A, b):
    A = np.asarray(A, dtype=complex)
    return inv3(A.conj().T @ A) @ (A.conj().T @ b)


def scan_sidelobes_db(positions, w, step_deg=0.01):
    """Sidelobe peaks (dB below the global peak) from a find_peaks scan."""
    deg = np.arange(-90.0, 90.0 + step_deg / 2, step_deg)
    F = np.abs(np.exp(2j * np.pi * np.outer(np.sin(np.radians(deg)), positions)) @ w)
    peaks, _ = find_peaks(F)
    main = int(np.argmax(F))
    side = peaks[peaks != main]
    return 20 * np.log10(F[side] / F[main]), deg[side]


@pytest.fixture(scope="session")
def cheb20_problem():
    return build_problem(CHEB20, SolverConfig(mode=1, K=1))

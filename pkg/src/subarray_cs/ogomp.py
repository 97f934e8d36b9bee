"""OGOMP-SS: OMP-SS alternated with off-grid refinement of element positions.

Each refinement iteration linearises the array factor in a multiplicative
position perturbation d_i -> d_i (1 + eta_i), solves a real least-squares
problem for eta, moves the elements and re-solves the subarray excitations
on the frozen support.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, InvalidArgumentError, RankDeficiencyError, RefinementError
from .model import ArrayGeometry, basis_expand, dictionary, steering_matrix
from .numerics import lstsq_complex, lstsq_real_constrained
from .omp import OmpStep, OmpTrace, SparseSolution, omp_iterations

log = logging.getLogger(__name__)

MAX_HALVINGS = 30


@dataclass(frozen=True)
class RefinementConfig:
    Q: int = 10
    eta_max: float = 0.05
    d_min: float = 0.25
    symmetry: str = "off"
    # False applies the raw least-squares eta with no cap, backtracking or acceptance test
    damped: bool = True
    carry_positions: bool = False

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 0:
            raise InvalidArgumentError(f"Q must be a non-negative integer, got {self.Q!r}")
        if not self.eta_max > 0:
            raise InvalidArgumentError(f"eta_max must be positive, got {self.eta_max!r}")
        if not self.d_min >= 0:
            raise InvalidArgumentError(f"d_min must be non-negative, got {self.d_min!r}")
        if self.symmetry not in ("off", "mirror"):
            raise InvalidArgumentError(f"symmetry must be 'off' or 'mirror', got {self.symmetry!r}")


@dataclass(eq=False)
class PerturbationStep:
    G: np.ndarray
    y: np.ndarray
    eta: np.ndarray          # least-squares solution, zeros on excluded elements
    applied: np.ndarray      # eta after the cap and the step scale
    scale: float = 1.0
    accepted: bool = False


def build_perturbation_system(phi, geom, w, fbar, grid):
    """Linearised position-perturbation system ``(G, y)``.

    Column i of G is w_i d_i d/dd_i exp(j 2 pi d_i sin theta) and
    y = fbar - Phi w.
    """
    d = geom.positions if isinstance(geom, ArrayGeometry) else np.asarray(geom, dtype=float)
    w = np.asarray(w, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    thetas = grid.thetas if hasattr(grid, "thetas") else np.asarray(grid, dtype=float)
    if phi.shape != (thetas.size, d.size) or w.shape != d.shape:
        raise InvalidArgumentError("perturbation system dimensions are inconsistent")
    y = np.asarray(fbar, dtype=complex) - phi @ w
    G = phi * (2j * np.pi * np.sin(thetas))[:, None] * (w * d)[None, :]
    return G, y


def _pairs(N: int):
    return [(i, N - 1 - i) for i in range(N // 2)]


def _solve_eta(G, y, d, w, symmetry):
    N = d.size
    eta = np.zeros(N)
    if not np.any(y != 0):
        return eta
    movable = (w != 0) & (d != 0)
    if symmetry == "mirror":
        cols, groups = [], []
        for i, k in _pairs(N):
            if movable[i] or movable[k]:
                cols.append(G[:, i] + G[:, k])
                groups.append((i, k))
        if not cols:
            return eta
        sol = lstsq_real_constrained(np.column_stack(cols), y)
        for (i, k), v in zip(groups, sol):
            eta[i] = eta[k] = v
        return eta
    idx = np.flatnonzero(movable)
    if idx.size == 0:
        return eta
    eta[idx] = lstsq_real_constrained(G[:, idx], y)
    return eta


def _feasible(d, d_min):
    gaps = np.diff(d)
    return bool(np.all(gaps > 0) and (gaps.size == 0 or gaps.min() >= d_min))


def refine_positions_once(phi, geom: ArrayGeometry, w, fbar, grid, cfg: RefinementConfig):
    """One linearised position update.

    Returns the moved geometry and its :class:`PerturbationStep`. With
    damping, |eta_i| is capped at ``cfg.eta_max`` and the step is halved
    until the positions stay sorted with spacing >= ``cfg.d_min``.
    """
    d = geom.positions
    w = np.asarray(w, dtype=complex)
    G, y = build_perturbation_system(phi, d, w, fbar, grid)
    try:
        eta = _solve_eta(G, y, d, w, cfg.symmetry)
    except RankDeficiencyError as exc:
        raise RefinementError(f"position update failed: {exc}") from exc
    step = PerturbationStep(G, y, eta, eta.copy())
    if not cfg.damped:
        new = d + eta * d
        if not _feasible(new, 0.0):
            raise RefinementError("undamped position update reorders the elements")
        return ArrayGeometry(new), step
    capped = np.clip(eta, -cfg.eta_max, cfg.eta_max)
    scale = 1.0
    for _ in range(MAX_HALVINGS + 1):
        new = d + (scale * capped) * d
        if _feasible(new, cfg.d_min):
            break
        scale *= 0.5
    else:
        scale = 0.0
        new = d.copy()
    step.applied = scale * capped
    step.scale = scale
    return ArrayGeometry(new, d_min=cfg.d_min if scale > 0 else 0.0), step


def resolve_excitations(phi_new, support, fbar) -> np.ndarray:
    """Least-squares subarray coefficients on a fixed support."""
    A = dictionary(np.asarray(phi_new, dtype=complex))
    return lstsq_complex(A[:, list(support)], np.asarray(fbar, dtype=complex))


@dataclass
class RefinementRecord:
    q: int
    xi: float
    residual_norm: float
    eta_norm: float
    scale: float
    accepted: bool


@dataclass
class OgompResult:
    geometry: ArrayGeometry
    solution: SparseSolution
    xi: float
    trace: list[RefinementRecord] = field(default_factory=list)
    omp_trace: OmpTrace | None = None
    warnings: list[str] = field(default_factory=list)
    h_history: list[tuple[int, float]] = field(default_factory=list)

    @property
    def excitations(self) -> np.ndarray:
        return self.solution.excitations()

    @property
    def K(self) -> int:
        return self.solution.K


def _residual(phi, support, coeffs, fbar, N):
    x = np.zeros(N, dtype=complex)
    x[list(support)] = coeffs
    return float(np.linalg.norm(fbar - phi @ basis_expand(x)))


def refine(problem, geom: ArrayGeometry, solution: SparseSolution, cfg: RefinementConfig,
           xi_target: float | None = None) -> OgompResult:
    """Alternate position updates and coefficient re-solves for up to ``cfg.Q`` rounds.

    Stops early when ``xi_target`` is met, when a step cannot reduce the
    solver-grid residual (damped mode), or when the position update fails.
    """
    grid, fbar, N = problem.solver_grid, problem.fbar, problem.N
    support = solution.support
    coeffs = solution.coeffs
    phi = steering_matrix(geom, grid)
    res = solution.residual_norm
    xi = problem.xi(geom.positions, solution.excitations())
    out = OgompResult(geom, solution, xi)
    out.trace.append(RefinementRecord(0, xi, res, 0.0, 0.0, True))
    for q in range(1, cfg.Q + 1):
        if xi_target is not None and xi <= xi_target:
            break
        w = basis_expand(SparseSolution(support, coeffs, res, N).dense())
        try:
            new_geom, step = refine_positions_once(phi, geom, w, fbar, grid, cfg)
        except RefinementError as exc:
            out.warnings.append(f"refinement stopped at iteration {q}: {exc}")
            log.warning(out.warnings[-1])
            break
        d = geom.positions
        applied, scale = step.applied, step.scale
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            if not np.any(applied != 0):
                break
            cand = new_geom if scale == step.scale else ArrayGeometry(d + applied * d)
            phi_c = steering_matrix(cand, grid)
            try:
                coeffs_c = resolve_excitations(phi_c, support, fbar)
            except RankDeficiencyError as exc:
                out.warnings.append(f"re-solve failed at iteration {q}: {exc}")
                break
            res_c = _residual(phi_c, support, coeffs_c, fbar, N)
            if not cfg.damped or res_c <= res:
                accepted = True
                break
            applied, scale = 0.5 * applied, 0.5 * scale
        eta_norm = float(np.max(np.abs(applied), initial=0.0))
        if not accepted:
            # no admissible step reduces the fit: keep the current iterate
            out.trace.append(RefinementRecord(q, xi, res, eta_norm, 0.0, False))
            break
        step.applied, step.scale, step.accepted = applied, scale, True
        geom, phi, coeffs, res = cand, phi_c, coeffs_c, res_c
        sol = SparseSolution(support, coeffs, res, N)
        xi = problem.xi(geom.positions, sol.excitations())
        out.geometry, out.solution, out.xi = geom, sol, xi
        out.trace.append(RefinementRecord(q, xi, res, eta_norm, scale, True))
    return out


def ogomp_mode1(problem, K: int, cfg: RefinementConfig, omp_opts: dict | None = None) -> OgompResult:
    """OMP-SS with sparsity K on the uniform grid, then ``cfg.Q`` refinement rounds."""
    N = problem.N
    if int(K) != K or not 1 <= K <= N:
        raise InvalidArgumentError(f"K must be an integer in [1, {N}], got {K!r}")
    geom = problem.initial_geometry
    A = dictionary(steering_matrix(geom, problem.solver_grid))
    trace = OmpTrace()
    sol = None
    for t, (j, sol) in enumerate(omp_iterations(A, problem.fbar, **(omp_opts or {})), start=1):
        trace.steps.append(OmpStep(j, sol.residual_norm))
        if t >= K:
            break
    out = refine(problem, geom, sol, cfg)
    out.omp_trace = trace
    return out


def ogomp_mode2(problem, xi_target: float, cfg: RefinementConfig,
                omp_opts: dict | None = None) -> OgompResult:
    """Smallest sparsity h whose refined solution reaches ``xi_target``.

    Each h restarts OMP-SS on the uniform geometry unless
    ``cfg.carry_positions`` is set, in which case the previous h's refined
    positions seed the next dictionary.
    """
    if not xi_target > 0:
        raise InvalidArgumentError(f"xi_target must be positive, got {xi_target!r}")
    N = problem.N
    omp_opts = omp_opts or {}
    history = []
    best = None
    geom = problem.initial_geometry
    path = None
    if not cfg.carry_positions:
        A = dictionary(steering_matrix(geom, problem.solver_grid))
        path = omp_iterations(A, problem.fbar, **omp_opts)
    trace = OmpTrace()
    for h in range(1, N + 1):
        if cfg.carry_positions:
            A = dictionary(steering_matrix(geom, problem.solver_grid))
            sol = None
            for t, (j, sol) in enumerate(omp_iterations(A, problem.fbar, **omp_opts), start=1):
                if t >= h:
                    break
        else:
            j, sol = next(path)
            trace.steps.append(OmpStep(j, sol.residual_norm))
        out = refine(problem, geom, sol, cfg, xi_target=xi_target)
        history.append((h, out.xi))
        if best is None or out.xi < best.xi:
            best = out
        if out.xi <= xi_target:
            out.h_history = history
            out.omp_trace = trace
            return out
        if cfg.carry_positions:
            geom = out.geometry
    best.h_history = history
    raise InfeasibleError(f"xi target {xi_target:g} not reached up to h={N}; best xi {best.xi:.4g}",
                          best=best, best_residual=best.xi)

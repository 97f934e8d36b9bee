"""End-to-end synthesis: target setup, solver dispatch and result assembly."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InfeasibleError, InvalidArgumentError
from .metrics import (DEFAULT_METRIC_STEP_DEG, MetricsReport, SubarrayLayout, XiEvaluator,
                      chi_metric, layout_from_weights, measure_sll, metric_grid)
from .model import HALF_PI, AngleGrid, ArrayGeometry, default_solver_grid, uniform_geometry
from .ogomp import OgompResult, RefinementConfig, ogomp_mode1, ogomp_mode2
from .omp import OmpTrace, SparseSolution, omp_mode1, omp_mode2
from .model import dictionary, steering_matrix
from .patterns import DesiredPattern, PatternSpec, make_desired


@dataclass(frozen=True)
class SolverConfig:
    solver: str = "ogomp"
    mode: int = 1
    K: int | None = None
    xi_target: float | None = None
    epsilon: float | None = None
    Q: int = 10
    eta_max: float = 0.05
    d_min: float = 0.25
    symmetry: str = "off"
    solver_M: int | None = None
    metric_step_deg: float = DEFAULT_METRIC_STEP_DEG
    sll_scan_step_deg: float = 0.01
    normalize_columns: bool = False
    allow_reselect: bool = False
    xi_denominator: str = "desired"
    damped: bool = True
    carry_positions: bool = False
    spacing: float = 0.5

    def __post_init__(self):
        if self.solver not in ("omp", "ogomp"):
            raise InvalidArgumentError(f"solver must be 'omp' or 'ogomp', got {self.solver!r}")
        if self.mode not in (1, 2):
            raise InvalidArgumentError(f"mode must be 1 or 2, got {self.mode!r}")
        if self.mode == 1 and self.K is None:
            raise InvalidArgumentError("mode 1 needs K")
        if self.mode == 2:
            if (self.xi_target is None) == (self.epsilon is None):
                raise InvalidArgumentError("mode 2 needs exactly one of xi_target or epsilon")
            if self.solver == "ogomp" and self.epsilon is not None:
                raise InvalidArgumentError("OGOMP-SS mode 2 terminates on xi_target only")
        if self.xi_denominator not in ("desired", "achieved"):
            raise InvalidArgumentError(f"unknown xi denominator {self.xi_denominator!r}")
        self.refinement()

    def paper_literal(self) -> SolverConfig:
        """Achieved-pattern xi denominator, OMP re-selection, undamped eta."""
        return replace(self, allow_reselect=True, xi_denominator="achieved", damped=False)

    def refinement(self) -> RefinementConfig:
        return RefinementConfig(Q=self.Q, eta_max=self.eta_max, d_min=self.d_min,
                                symmetry=self.symmetry, damped=self.damped,
                                carry_positions=self.carry_positions)

    def omp_options(self) -> dict:
        return {"normalize_columns": self.normalize_columns,
                "allow_reselect": self.allow_reselect}

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class Problem:
    """Target samples on the solver grid and on the metric grid."""

    N: int
    solver_grid: AngleGrid
    fbar: np.ndarray
    desired_metric: DesiredPattern
    initial_geometry: ArrayGeometry
    xi_denominator: str = "desired"
    _evaluator: XiEvaluator = field(init=False, repr=False)

    def __post_init__(self):
        self.fbar = np.asarray(self.fbar, dtype=complex)
        if self.fbar.shape != (len(self.solver_grid),):
            raise InvalidArgumentError("target samples do not match the solver grid")
        if self.initial_geometry.N != self.N:
            raise InvalidArgumentError("initial geometry size differs from N")
        self._evaluator = XiEvaluator(self.desired_metric, self.xi_denominator)

    def xi(self, positions, w) -> float:
        return self._evaluator(positions, w)

    def achieved_metric(self, positions, w) -> np.ndarray:
        return self._evaluator.pattern(positions, w)


def build_problem(spec: PatternSpec, config: SolverConfig, N: int | None = None) -> Problem:
    """Sample the target for a pattern spec.

    Generated patterns use a uniform solver grid of ``solver_M`` (default
    4N+1) angles and a separate metric grid. File patterns are solved on
    their own grid and scored on its [0, 90] degree part; ``N`` is required.
    """
    if spec.family == "file":
        if N is None:
            raise InvalidArgumentError("file patterns need an explicit element count N")
        desired = make_desired(spec)
        solver_grid = desired.grid
        fbar = desired.values
        desired_metric = desired.restrict(0.0, HALF_PI)
    else:
        N = spec.N
        solver_grid = (AngleGrid.uniform(config.solver_M) if config.solver_M
                       else default_solver_grid(N))
        fbar = make_desired(spec, solver_grid).values
        desired_metric = make_desired(spec, metric_grid(config.metric_step_deg))
    return Problem(N, solver_grid, fbar, desired_metric, uniform_geometry(N, config.spacing),
                   config.xi_denominator)


@dataclass(eq=False)
class SynthesisResult:
    config: SolverConfig
    pattern: PatternSpec
    geometry: ArrayGeometry
    solution: SparseSolution
    layout: SubarrayLayout
    metrics: MetricsReport
    trace: list[dict]
    warnings: list[str] = field(default_factory=list)
    infeasible: bool = False

    @property
    def excitations(self) -> np.ndarray:
        return self.solution.excitations()

    @property
    def K(self) -> int:
        return self.solution.K

    @property
    def N(self) -> int:
        return self.geometry.N


def _omp_trace_rows(trace: OmpTrace) -> list[dict]:
    return [{"kind": "omp", "t": t, "index": s.index, "residual_norm": s.residual_norm,
             **({"xi": s.xi} if s.xi is not None else {})}
            for t, s in enumerate(trace.steps, start=1)]


def _refine_trace_rows(res: OgompResult) -> list[dict]:
    rows = []
    for h, xi in res.h_history:
        rows.append({"kind": "sparsity", "h": h, "xi": xi})
    for r in res.trace:
        rows.append({"kind": "refine", "q": r.q, "xi": r.xi, "residual_norm": r.residual_norm,
                     "eta_max_abs": r.eta_norm, "scale": r.scale, "accepted": r.accepted})
    return rows


def _assemble(spec, config, problem, geom, sol, xi, trace, warnings, infeasible):
    w = sol.excitations()
    sll, peak = measure_sll(geom, w, config.sll_scan_step_deg)
    metrics = MetricsReport(xi=float(xi), chi=chi_metric(sol.K, problem.N),
                            sll_db=sll, mainlobe_peak_deg=peak)
    return SynthesisResult(config, spec, geom, sol, layout_from_weights(w), metrics, trace,
                           list(warnings), infeasible)


def synthesize(spec: PatternSpec, config: SolverConfig, N: int | None = None,
               problem: Problem | None = None) -> SynthesisResult:
    """Run the configured solver and mode.

    An unreachable mode-2 threshold raises :class:`InfeasibleError` whose
    ``best`` attribute is the best :class:`SynthesisResult` found, flagged
    ``infeasible``.
    """
    problem = problem or build_problem(spec, config, N)
    geom0 = problem.initial_geometry
    if config.solver == "omp":
        A = dictionary(steering_matrix(geom0, problem.solver_grid))
        opts = config.omp_options()
        if config.mode == 1:
            sol, trace = omp_mode1(A, problem.fbar, config.K, **opts)
        else:
            try:
                sol, trace = omp_mode2(A, problem.fbar, epsilon=config.epsilon,
                                       xi_target=config.xi_target,
                                       xi_of=lambda w: problem.xi(geom0.positions, w), **opts)
            except InfeasibleError as exc:
                sol, trace = exc.best
                exc.best = _assemble(spec, config, problem, geom0, sol,
                                     problem.xi(geom0.positions, sol.excitations()),
                                     _omp_trace_rows(trace), [str(exc)], True)
                raise
        xi = problem.xi(geom0.positions, sol.excitations())
        return _assemble(spec, config, problem, geom0, sol, xi, _omp_trace_rows(trace), [], False)

    cfg = config.refinement()
    if config.mode == 1:
        res = ogomp_mode1(problem, config.K, cfg, config.omp_options())
    else:
        try:
            res = ogomp_mode2(problem, config.xi_target, cfg, config.omp_options())
        except InfeasibleError as exc:
            best = exc.best
            rows = _refine_trace_rows(best)
            exc.best = _assemble(spec, config, problem, best.geometry, best.solution, best.xi,
                                 rows, best.warnings + [str(exc)], True)
            raise
    rows = (_omp_trace_rows(res.omp_trace) if res.omp_trace else []) + _refine_trace_rows(res)
    return _assemble(spec, config, problem, res.geometry, res.solution, res.xi, rows,
                     res.warnings, False)

"""Command-line front end: ``pattern``, ``synth``, ``sweep`` and ``eval``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import (InfeasibleError, InvalidArgumentError, PatternFileError,
                     PatternGenerationError, RankDeficiencyError, RefinementError,
                     ResultFormatError, SubarrayError)
from .metrics import measure_sll, metric_grid
from .model import uniform_geometry
from .patterns import PatternSpec, generator_weights, make_desired, pattern_csv_text
from .results import check_drift, dumps_result, load_document
from .synthesis import SolverConfig, build_problem, synthesize

EXIT_OK = 0
EXIT_DRIFT = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_SOLVER = 5

SWEEP_AXES = ("K", "xi_target", "Q", "sll_db")


class ConfigError(Exception):
    pass


def _pattern_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("desired pattern")
    g.add_argument("--family", choices=("chebyshev", "taylor", "file"), default="chebyshev")
    g.add_argument("--N", type=int, help="element count")
    g.add_argument("--sll", type=float, dest="sll_db", help="sidelobe suppression in dB (positive)")
    g.add_argument("--nbar", type=int, default=5, help="Taylor n-bar")
    g.add_argument("--pattern-file", help="CSV with theta_deg,re,im (family=file)")
    g.add_argument("--allow-nonmonotonic", action="store_true",
                   help="accept Taylor tapers that rise toward the edges")
    g.add_argument("--metric-step", type=float, default=0.05, dest="metric_step_deg",
                   help="metric grid step in degrees over [0, 90]")


def _solver_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--solver", choices=("omp", "ogomp"), default="ogomp")
    g.add_argument("--mode", type=int, choices=(1, 2), default=1)
    g.add_argument("--K", type=int, help="subarray count (mode 1)")
    g.add_argument("--xi-target", type=float, help="matching-error threshold (mode 2)")
    g.add_argument("--epsilon", type=float,
                   help="raw residual-norm threshold (mode 2, OMP-SS only)")
    g.add_argument("--Q", type=int, default=10, help="refinement iterations")
    g.add_argument("--eta-max", type=float, default=0.05)
    g.add_argument("--d-min", type=float, default=0.25, help="minimum spacing in wavelengths")
    g.add_argument("--symmetry", choices=("off", "mirror"), default="off")
    g.add_argument("--solver-M", type=int, help="solver grid size (default 4N+1)")
    g.add_argument("--normalize-columns", action="store_true",
                   help="correlate against unit-norm dictionary columns")
    g.add_argument("--carry-positions", action="store_true",
                   help="mode 2: seed each sparsity with the previous refined positions")
    g.add_argument("--paper-literal", action="store_true",
                   help="achieved-pattern xi denominator, OMP re-selection, undamped steps")


def _spec_from(args) -> PatternSpec:
    if args.family == "file":
        if not args.pattern_file:
            raise ConfigError("--pattern-file is required for family=file")
        return PatternSpec("file", N=args.N, path=args.pattern_file)
    if args.N is None or args.sll_db is None:
        raise ConfigError("--N and --sll are required for generated patterns")
    return PatternSpec(args.family, args.N, args.sll_db, args.nbar,
                       strict=not args.allow_nonmonotonic)


def _config_from(args) -> SolverConfig:
    cfg = SolverConfig(solver=args.solver, mode=args.mode, K=args.K, xi_target=args.xi_target,
                       epsilon=args.epsilon, Q=args.Q, eta_max=args.eta_max, d_min=args.d_min,
                       symmetry=args.symmetry, solver_M=args.solver_M,
                       metric_step_deg=args.metric_step_deg,
                       normalize_columns=args.normalize_columns,
                       carry_positions=args.carry_positions)
    return cfg.paper_literal() if args.paper_literal else cfg


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def cmd_pattern(args) -> int:
    spec = _spec_from(args)
    if spec.family == "file":
        desired = make_desired(spec)
        sll = float("nan")
    else:
        desired = make_desired(spec, metric_grid(args.metric_step_deg))
        sll, _ = measure_sll(uniform_geometry(spec.N), generator_weights(spec))
    text = pattern_csv_text(desired.grid, desired.values)
    Path(args.output).write_text(text, encoding="utf-8")
    print(f"sll_db {_fmt(sll)} rows {len(desired.grid)}")
    return EXIT_OK


def _write_outputs(result, out_dir: Path, runtime_ms: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "result.json").write_text(dumps_result(result), encoding="utf-8")
    problem = build_problem(result.pattern, result.config, result.N)
    achieved = problem.achieved_metric(result.geometry.positions, result.excitations)
    (out_dir / "achieved_pattern.csv").write_text(
        pattern_csv_text(problem.desired_metric.grid, achieved), encoding="utf-8")
    # wall-clock data lives apart so result.json stays byte-reproducible
    (out_dir / "run_meta.json").write_text(
        json.dumps({"runtime_ms": runtime_ms}, indent=1) + "\n", encoding="utf-8")


def _summary(result, runtime_ms: float) -> str:
    m = result.metrics
    return (f"{result.config.solver} {result.config.mode} {result.K} {_fmt(m.chi)} "
            f"{_fmt(m.xi)} {_fmt(m.sll_db)} {runtime_ms:.0f}")


def cmd_synth(args) -> int:
    spec = _spec_from(args)
    config = _config_from(args)
    out_dir = Path(args.out)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        result = synthesize(spec, config, N=args.N)
    except InfeasibleError as exc:
        result = exc.best
        code = EXIT_INFEASIBLE
        print(f"infeasible: {exc}", file=sys.stderr)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    _write_outputs(result, out_dir, runtime_ms)
    print(_summary(result, runtime_ms))
    return code


def _sweep_row(payload):
    spec, config, N, axis, value = payload
    try:
        if axis == "sll_db":
            spec = replace(spec, sll_db=float(value))
        elif axis in ("K", "Q"):
            config = replace(config, **{axis: int(value)})
        else:
            config = replace(config, xi_target=float(value))
        t0 = time.perf_counter()
        status = "ok"
        try:
            result = synthesize(spec, config, N=N)
        except InfeasibleError as exc:
            result, status = exc.best, "infeasible"
        ms = (time.perf_counter() - t0) * 1e3
        m = result.metrics
        return [value, repr(m.chi), repr(m.xi), repr(m.sll_db), f"{ms:.1f}", status]
    except SubarrayError as exc:
        return [value, "", "", "", "", f"error: {exc}".replace(",", ";")]


def sweep_table(spec, config, N, axis, values, jobs: int = 1, timing: bool = True) -> str:
    """CSV text with one synthesis per value, in input order."""
    payloads = [(spec, config, N, axis, v) for v in values]
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, payloads))
    else:
        rows = [_sweep_row(p) for p in payloads]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["value", "chi", "xi", "sll_db", "runtime_ms", "status"])
    for row in rows:
        if not timing:
            row[4] = ""
        writer.writerow(row)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    spec = _spec_from(args)
    axis = args.axis
    values = [v for v in (args.values or "").split(",") if v.strip()]
    for v in values:
        try:
            int(v) if axis in ("K", "Q") else float(v)
        except ValueError:
            raise ConfigError(f"value {v!r} is not valid for axis {axis}") from None
    base = _config_from_sweep(args, axis, values)
    text = sweep_table(spec, base, args.N, axis, [v.strip() for v in values], args.jobs,
                       timing=not args.no_timing)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _config_from_sweep(args, axis, values):
    # the swept field must be present for the config to validate
    if axis == "K" and args.K is None:
        args.K = int(values[0]) if values else 1
    if axis == "xi_target" and args.xi_target is None:
        args.xi_target = float(values[0]) if values else 1.0
    return _config_from(args)


def cmd_eval(args) -> int:
    path = Path(args.result)
    doc = load_document(path)
    report, failures = check_drift(doc, base_dir=path.parent)
    stored = doc["metrics"]
    print(f"xi {_fmt(report.xi)} (stored {_fmt(stored['xi'])})")
    print(f"chi {_fmt(report.chi)} sll_db {_fmt(report.sll_db)} "
          f"mainlobe_peak_deg {_fmt(report.mainlobe_peak_deg)}")
    layout = doc.get("layout", [])
    print(f"layout K={len(layout)} sizes {' '.join(str(r['size']) for r in layout)}")
    if failures:
        print("drift: fail " + " ".join(failures))
        return EXIT_DRIFT
    print("drift: pass")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subarray-cs",
                                     description="Subarray synthesis by OMP-SS / OGOMP-SS")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", help="write a desired-pattern CSV")
    _pattern_args(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("synth", help="run one synthesis")
    _pattern_args(p)
    _solver_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    _pattern_args(p)
    _solver_args(p)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", default="", help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="recompute and drift-check a result file")
    p.add_argument("result")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError, PatternGenerationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PatternFileError, ResultFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RankDeficiencyError, RefinementError, SubarrayError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

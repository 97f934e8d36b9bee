"""JSON result documents and drift checking."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .errors import ResultFormatError
from .metrics import MetricsReport, Subarray, SubarrayLayout, measure_sll
from .model import ArrayGeometry
from .omp import SparseSolution
from .patterns import PatternSpec
from .synthesis import SolverConfig, SynthesisResult, build_problem

FORMAT = "subarray-cs/result-v1"
DRIFT_TOL = 1e-8


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float)]


def _cplx(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": _floats(a.real), "im": _floats(a.imag)}


def result_to_dict(result: SynthesisResult) -> dict:
    w = result.excitations
    peak = np.max(np.abs(w))
    return {
        "format": FORMAT,
        "config": result.config.to_dict(),
        "pattern": asdict(result.pattern),
        "N": result.N,
        "K": result.K,
        "geometry": {"positions": _floats(result.geometry.positions)},
        "excitations": {**_cplx(w), "magnitude_normalized": _floats(np.abs(w) / peak)},
        # 1-based element index at which each subarray starts
        "support": [int(j) + 1 for j in result.solution.support],
        "coeffs": _cplx(result.solution.coeffs),
        "residual_norm": float(result.solution.residual_norm),
        "layout": [{"first": r.first, "last": r.last, "size": r.size,
                    "re": float(r.weight.real), "im": float(r.weight.imag)}
                   for r in result.layout.runs],
        "metrics": asdict(result.metrics),
        "trace": result.trace,
        "warnings": list(result.warnings),
        "infeasible": bool(result.infeasible),
    }


def dumps_result(result: SynthesisResult) -> str:
    return json.dumps(result_to_dict(result), indent=1, sort_keys=True) + "\n"


def save_result(result: SynthesisResult, path) -> None:
    Path(path).write_text(dumps_result(result), encoding="utf-8")


def _get(doc, path: str):
    cur = doc
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ResultFormatError(f"missing field '{path}'")
        cur = cur[part]
    return cur


def _vector(doc, path: str, n: int | None = None) -> np.ndarray:
    raw = _get(doc, path)
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) for v in raw):
        raise ResultFormatError(f"field '{path}' must be a list of numbers")
    if n is not None and len(raw) != n:
        raise ResultFormatError(f"field '{path}' has {len(raw)} entries, expected {n}")
    return np.asarray(raw, dtype=float)


def result_from_dict(doc: dict) -> SynthesisResult:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ResultFormatError(f"not a {FORMAT} document")
    N = _get(doc, "N")
    if not isinstance(N, int) or N < 1:
        raise ResultFormatError("field 'N' must be a positive integer")
    try:
        config = SolverConfig(**_get(doc, "config"))
        pattern = PatternSpec(**_get(doc, "pattern"))
        geometry = ArrayGeometry(_vector(doc, "geometry.positions", N))
    except (TypeError, ValueError) as exc:
        raise ResultFormatError(f"invalid config, pattern or geometry: {exc}") from exc
    support = _get(doc, "support")
    if not isinstance(support, list) or not all(isinstance(j, int) and 1 <= j <= N for j in support):
        raise ResultFormatError("field 'support' must list element indices in 1..N")
    K = len(support)
    coeffs = _vector(doc, "coeffs.re", K) + 1j * _vector(doc, "coeffs.im", K)
    solution = SparseSolution(tuple(j - 1 for j in support), coeffs,
                              float(_get(doc, "residual_norm")), N)
    runs = []
    for i, r in enumerate(_get(doc, "layout")):
        try:
            runs.append(Subarray(int(r["first"]), int(r["last"]), complex(r["re"], r["im"])))
        except (KeyError, TypeError) as exc:
            raise ResultFormatError(f"malformed 'layout[{i}]': {exc}") from exc
    m = _get(doc, "metrics")
    try:
        metrics = MetricsReport(**{f.name: float(m[f.name]) for f in fields(MetricsReport)})
    except (KeyError, TypeError, ValueError) as exc:
        raise ResultFormatError(f"malformed 'metrics': {exc}") from exc
    return SynthesisResult(config, pattern, geometry, solution, SubarrayLayout(tuple(runs)),
                           metrics, list(_get(doc, "trace")), list(_get(doc, "warnings")),
                           bool(_get(doc, "infeasible")))


def load_result(path) -> SynthesisResult:
    return result_from_dict(load_document(path))


def load_document(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ResultFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResultFormatError(f"{path}: invalid JSON ({exc})") from exc


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(b))


def check_drift(doc: dict, tol: float = DRIFT_TOL, base_dir=None) -> tuple[MetricsReport, list[str]]:
    """Recompute the metrics of a stored result.

    Returns the recomputed report and a list of failures, each naming the
    offending field path. An empty list means no drift.
    """
    result = result_from_dict(doc)
    failures = []
    N = result.N
    w_stored = _vector(doc, "excitations.re", N) + 1j * _vector(doc, "excitations.im", N)
    w = result.solution.excitations()
    scale = max(1.0, float(np.max(np.abs(w))))
    for part, a, b in (("re", w_stored.real, w.real), ("im", w_stored.imag, w.imag)):
        bad = np.flatnonzero(np.abs(a - b) > tol * scale)
        failures += [f"excitations.{part}[{i}]" for i in bad]
    pattern = result.pattern
    if (pattern.family == "file" and base_dir is not None and not Path(pattern.path).exists()
            and (Path(base_dir) / pattern.path).exists()):
        pattern = PatternSpec("file", path=str(Path(base_dir) / pattern.path))
    problem = build_problem(pattern, result.config, N)
    xi = problem.xi(result.geometry.positions, w_stored)
    sll, peak = measure_sll(result.geometry, w_stored, result.config.sll_scan_step_deg)
    report = MetricsReport(xi=xi, chi=result.K / N, sll_db=sll, mainlobe_peak_deg=peak)
    stored = result.metrics
    if not _close(xi, stored.xi, tol):
        failures.append("metrics.xi")
    if not _close(report.chi, stored.chi, tol):
        failures.append("metrics.chi")
    if not _close(sll, stored.sll_db, tol):
        failures.append("metrics.sll_db")
    return report, failures

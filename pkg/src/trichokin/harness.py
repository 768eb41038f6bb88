"""Scenario execution, sweeps, summaries and file output."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .analysis import lyapunov_Z, predict_limits, trajectory_integrals
from .integrator import IntegrationError, Trajectory, integrate
from .kinetics import DomainError, hypothesis_warnings, validate_hypotheses
from .scenarios import Scenario, SweepSpec

log = logging.getLogger(__name__)

CLOSURE_RTOL = 5e-3


class ScenarioRunError(RuntimeError):
    def __init__(self, scenario: str, cause: Exception):
        super().__init__(f"scenario {scenario!r}: {cause}")
        self.scenario = scenario
        self.cause = cause


@dataclass(frozen=True)
class RunSummary:
    name: str
    s_star: float
    p_star: float
    X_final: float
    B_final: float
    B_max: float
    s_max: float
    t_final: float
    t_converged: float | None  # None when the horizon ended before steady state
    steady_state_reached: bool
    p_star_predicted: float | None
    closure_rel_err: float | None
    lambda_: float
    s_star_upper_bound: float | None
    int_B: float
    int_B_predicted: float | None
    int_muB: float
    int_muB_predicted: float | None
    bound_ok: bool
    in_attractor: bool
    closure_ok: bool
    hypothesis_warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        d = {("lambda" if k == "lambda_" else k): v for k, v in asdict(self).items()}
        d["hypothesis_warnings"] = list(self.hypothesis_warnings)
        # JSON has no infinity: an unbounded attractor interval becomes null
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    trajectory: Trajectory
    summary: RunSummary


def summarize(scenario: Scenario, traj: Trajectory) -> RunSummary:
    params = scenario.params
    final = traj.final
    int_B, int_muB = trajectory_integrals(traj, params)
    try:
        pred = predict_limits(scenario.initial, params, final.s)
    except DomainError as exc:
        log.warning("%s: limit predictions unavailable (%s)", scenario.name, exc)
        pred = None
    lam = pred.lambda_ if pred is not None else math.nan
    bound = pred.s_star_upper_bound if pred is not None else None
    closure = None
    if pred is not None:
        closure = abs(pred.p_star - final.P) / max(abs(final.P), 1e-300)
        if final.P == 0 and pred.p_star == 0:
            closure = 0.0
    return RunSummary(
        name=scenario.name,
        s_star=final.s,
        p_star=final.P,
        X_final=final.X,
        B_final=final.B,
        B_max=float(np.max(traj.B)),
        s_max=float(np.max(traj.s)),
        t_final=float(traj.t_final),
        t_converged=float(traj.t_final) if traj.steady_state_reached else None,
        steady_state_reached=traj.steady_state_reached,
        p_star_predicted=pred.p_star if pred else None,
        closure_rel_err=closure,
        lambda_=lam,
        s_star_upper_bound=bound,
        int_B=int_B,
        int_B_predicted=pred.int_B if pred else None,
        int_muB=int_muB,
        int_muB_predicted=pred.int_muB if pred else None,
        bound_ok=bound is None or final.s <= bound,
        in_attractor=bool(0 <= final.s <= lam),
        closure_ok=closure is not None and closure <= CLOSURE_RTOL,
        hypothesis_warnings=tuple(hypothesis_warnings(validate_hypotheses(params))),
    )


def run_scenario(scenario: Scenario, **config_overrides) -> ScenarioResult:
    """Integrate one scenario and compute its summary.

    ``config_overrides`` replace :class:`SimulationConfig` fields (``h``,
    ``t_end``, ``steady_tol``...). Failures are re-raised as
    :class:`ScenarioRunError` carrying the scenario name.
    """
    try:
        traj = integrate(scenario.simulation_config(**config_overrides), scenario.params)
    except (IntegrationError, DomainError, ValueError) as exc:
        raise ScenarioRunError(scenario.name, exc) from exc
    return ScenarioResult(scenario, traj, summarize(scenario, traj))


@dataclass(frozen=True)
class SweepRow:
    label: str
    value: float
    result: ScenarioResult | None
    error: str | None = None


def _run_one(args):
    scenario, overrides = args
    try:
        return run_scenario(scenario, **overrides), None
    except ScenarioRunError as exc:
        return None, str(exc)


def run_sweep(spec: SweepSpec, jobs: int = 1, **config_overrides) -> list[SweepRow]:
    """Run every value of the sweep; rows keep input order, failures are recorded per row."""
    scenarios = spec.scenarios()
    tasks = [(sc, config_overrides) for sc in scenarios]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        outcomes = [_run_one(t) for t in tasks]
    rows = []
    for sc, v, (res, err) in zip(scenarios, spec.values, outcomes):
        if err:
            log.error("%s", err)
        rows.append(SweepRow(sc.name, v, res, err))
    return rows


# -- output ------------------------------------------------------------------

SUMMARY_COLUMNS = (
    ("name", "{}"),
    ("s_star", "{:.6g}"),
    ("p_star", "{:.6g}"),
    ("p_star_predicted", "{:.6g}"),
    ("X_final", "{:.3e}"),
    ("B_final", "{:.3e}"),
    ("B_max", "{:.6g}"),
    ("s_max", "{:.6g}"),
    ("lambda", "{:.6g}"),
    ("s_star_upper_bound", "{:.6g}"),
    ("t_final", "{:.6g}"),
    ("bound_ok", "{}"),
    ("in_attractor", "{}"),
    ("closure_ok", "{}"),
)


def format_table(summaries: list[RunSummary]) -> str:
    """Aligned plain-text summary table, one row per scenario."""
    rows = [[c for c, _ in SUMMARY_COLUMNS]]
    for s in summaries:
        d = s.to_dict()
        rows.append(["-" if d[c] is None else fmt.format(d[c]) for c, fmt in SUMMARY_COLUMNS])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    for s in summaries:
        for w in s.hypothesis_warnings:
            lines.append(f"warning [{s.name}]: {w}")
    return "\n".join(lines) + "\n"


def format_json(summaries: list[RunSummary]) -> str:
    return json.dumps({s.name: s.to_dict() for s in summaries}, indent=2) + "\n"


def format_csv(summaries: list[RunSummary]) -> str:
    keys = list(summaries[0].to_dict())
    keys.remove("hypothesis_warnings")
    lines = [",".join(keys)]
    for s in summaries:
        d = s.to_dict()
        lines.append(",".join("" if d[k] is None else (f"{d[k]:.12g}" if isinstance(d[k], float) else str(d[k])) for k in keys))
    return "\n".join(lines) + "\n"


FORMATTERS = {"table": format_table, "json": format_json, "csv": format_csv}


def trajectory_csv(result: ScenarioResult, with_z: bool = False) -> str:
    traj = result.trajectory
    cols = [traj.times, traj.X, traj.B, traj.s, traj.P]
    header = "t,X,B,s,P"
    if with_z:
        cols.append(lyapunov_Z(traj.states.T, result.scenario.params))
        header += ",Z"
    data = np.column_stack(cols)
    lines = [header]
    lines.extend(",".join(f"{v:.12g}" for v in row) for row in data)
    return "\n".join(lines) + "\n"


def emit_outputs(results: list[ScenarioResult], out_dir, with_z: bool = False) -> list[Path]:
    """Write ``<name>.csv`` per scenario plus ``summary.json`` and ``summary.txt``."""
    if not results:
        raise ValueError("no results to emit")
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            path = out / f"{_safe_name(r.summary.name)}.csv"
            path.write_text(trajectory_csv(r, with_z=with_z))
            written.append(path)
        summaries = [r.summary for r in results]
        for fname, text in (("summary.json", format_json(summaries)), ("summary.txt", format_table(summaries))):
            path = out / fname
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write outputs under {out}: {exc}") from exc
    return written


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_.=" else "_" for c in name)

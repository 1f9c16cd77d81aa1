"""Figure presets, parameter sweeps, validation reports and CSV output.

Every preset returns :class:`CsvTable` objects; :func:`run` writes them
with :func:`emit_csv`. Sweep points are evaluated on a thread pool whose
size is capped by ``HARVEST_THREADS``; results are collected in sweep
order, so output bytes do not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .link_budget import BlockAllocation, harvest_phase2, link_report
from .optimizer import OptimizationResult, solve, solve_random_orientation
from .orientation_stats import (
    AveragedReport, avg_harvest_closed_form, avg_harvest_quadrature, monte_carlo_report,
)
from .scenario import (
    ALL_CASES, Geometry, OrientationModel, PolicyCase, Scenario, SystemParams, lambertian_order,
    with_overrides,
)
from .vlc_channel import deterministic_gain, fixed_orientation_gain

PRESETS = ("fig3a", "fig3b", "fig5", "fig6", "fig7", "case_table", "fig8_9_10", "fig11_12",
           "validate", "custom")
MODES = ("sweep", "average")

RESULT_COLUMNS = ("case_id", "i_b_opt", "t_vlc_opt", "rate_opt", "r_vlc", "r_rf", "e1", "e2",
                  "e_h", "feasible", "iterations", "method")

# Number of quasi-uniform user distances in distribution-average mode.
AVERAGE_SAMPLES = 200

# Allocation used by the averaged-performance validation setups.
VALIDATION_AMPLITUDE = 0.2
VALIDATION_T_VLC = 0.8

DEFAULT_TOLERANCES = {
    "vlc_bound_gap": 0.02,
    "energy_vs_mc": 0.03,
    "rf_bound_vs_mc": 0.05,
    "lower_bound_abs": 1e-9,
}


@dataclass(frozen=True)
class ExperimentRun:
    """One CLI invocation."""

    preset: str
    scenario: Scenario
    out: Path
    seed: int | None = None
    mode: str = "sweep"

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass
class CsvTable:
    """Rows sharing one header, destined for ``<name>.csv``."""

    name: str
    columns: tuple
    rows: list = field(default_factory=list)


# --------------------------------------------------------------------------
# CSV


def format_cell(value) -> str:
    """Fixed textual form of a cell: 17 significant digits for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def emit_csv(rows, path, columns) -> Path:
    """Write ``rows`` under a single header line to ``path``.

    Output uses commas, ``.`` decimals and LF line endings, and is
    byte-identical for identical input.
    """
    path = Path(path)
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, header has {len(columns)}")
        lines.append(",".join(format_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def result_cells(res: OptimizationResult, method: str = "closed_form") -> tuple:
    return (res.case_id, res.i_b_opt, res.t_vlc_opt, res.rate_opt, res.r_vlc, res.r_rf, res.e1,
            res.e2, res.e_h, res.feasible, res.iterations, method)


# --------------------------------------------------------------------------
# Helpers


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("HARVEST_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def ordered_map(func, items):
    """``map`` on a thread pool, returning results in input order."""
    items = list(items)
    workers = worker_count(len(items))
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def quasi_uniform(lo: float, hi: float, n: int = AVERAGE_SAMPLES) -> np.ndarray:
    """Midpoints of ``n`` equal cells covering ``[lo, hi]``."""
    return lo + (hi - lo) * (np.arange(n) + 0.5) / n


def _sweep_values(scn: Scenario, name: str, default):
    if scn.sweep.swept_variable == name:
        return list(scn.sweep.values)
    return list(default)


def _validation_allocation(params: SystemParams) -> BlockAllocation:
    i_b = params.i_max - VALIDATION_AMPLITUDE
    return BlockAllocation(i_b, VALIDATION_AMPLITUDE, VALIDATION_T_VLC).validate(params)


def _steady_report(alloc, geom, params, carryover):
    h = fixed_orientation_gain(geom, lambertian_order(geom.theta_hpbw))
    e2_prev = harvest_phase2(alloc.t_rf, h, params) if carryover else 0.0
    return link_report(alloc, e2_prev, h, geom, params)


# --------------------------------------------------------------------------
# Presets


def preset_fig3a(scn: Scenario, t_step=0.05):
    """Both hop rates against the optical time fraction at two fixed biases."""
    p, g, case = scn.params, scn.geom, scn.policy
    table = CsvTable("fig3a", ("i_b", "t_vlc") + RESULT_COLUMNS)
    t_vals = np.round(np.arange(1, int(round(1 / t_step))) * t_step, 12)
    for i_b in (0.6, 0.8):
        for t in t_vals:
            alloc = BlockAllocation.at_bias(i_b, float(t), p)
            rep = _steady_report(alloc, g, p, case.carryover)
            table.rows.append((i_b, float(t), case.case_id, i_b, float(t), rep.r_end2end,
                               rep.r_vlc, rep.r_rf, rep.e1, rep.e2, rep.e_h,
                               rep.r_rf >= p.r_th, 0, "closed_form"))
    return [table]


def preset_fig3b(scn: Scenario, ib_step=0.025):
    """Both hop rates against the DC bias at two fixed time splits."""
    p, g, case = scn.params, scn.geom, scn.policy
    table = CsvTable("fig3b", ("t_vlc", "i_b") + RESULT_COLUMNS)
    n = int(round((p.i_max - p.i_min) / ib_step))
    ib_vals = np.minimum(p.i_min + ib_step * np.arange(n + 1), p.i_max)
    for t in (0.5, 0.8):
        for i_b in ib_vals:
            alloc = BlockAllocation.at_bias(float(i_b), t, p)
            rep = _steady_report(alloc, g, p, case.carryover)
            table.rows.append((t, float(i_b), case.case_id, float(i_b), t, rep.r_end2end,
                               rep.r_vlc, rep.r_rf, rep.e1, rep.e2, rep.e_h,
                               rep.r_rf >= p.r_th, 0, "closed_form"))
    return [table]


def preset_fig5(scn: Scenario):
    """Per-iteration values of the two sub-problems of the joint solver."""
    case = scn.policy if scn.policy.joint else PolicyCase("JO_withE2")
    res = solve(case, scn.geom, scn.params)
    trace = CsvTable("fig5", ("iteration", "phi_sub1", "phi_sub2", "relative_gap"))
    for k, (a, b) in enumerate(res.history, start=1):
        trace.rows.append((k, a, b, abs(a - b) / b))
    final = CsvTable("fig5_result", ("d_u",) + RESULT_COLUMNS,
                     [(scn.geom.d_u,) + result_cells(res)])
    return [trace, final]


def _averaged_records(configs, scn: Scenario):
    """Evaluate the three averaging routes for each ``(geom, model)`` pair."""
    p = scn.params
    alloc = _validation_allocation(p)
    sweep = scn.sweep

    def work(cfg):
        geom, model = cfg
        return monte_carlo_report(alloc, model, geom, p, sweep.mc_samples, sweep.seed)

    return alloc, ordered_map(work, configs)


def _averaged_rows(key, alloc, rep: AveragedReport, geom, model, params, case_id):
    h_c = deterministic_gain(geom, lambertian_order(geom.theta_hpbw))
    e1_q = avg_harvest_quadrature(alloc, model, h_c, params, "none")
    e1_c = avg_harvest_closed_form(alloc, model, h_c, params, "none")
    base = (case_id, alloc.i_b, alloc.t_vlc)
    nan = float("nan")
    out = []
    for method, r_v, r_r, e1, e_h in (
        ("quadrature", rep.avg_r_vlc_exact, rep.avg_r_rf_exact, e1_q, rep.avg_eh_exact),
        ("closed_form", rep.avg_r_vlc_bound, rep.avg_r_rf_bound, e1_c, rep.avg_eh_closed),
        ("monte_carlo", rep.mc_r_vlc.mean, rep.mc_r_rf.mean, nan, rep.mc_eh.mean),
    ):
        e2 = e_h - e1 if not math.isnan(e1) else nan
        out.append(key + base + (min(r_v, r_r), r_v, r_r, e1, e2, e_h, r_r >= params.r_th,
                                 rep.n_samples if method == "monte_carlo" else 0, method))
    return out


FIG6_RANGES = ((0.0, 10.0), (10.0, 40.0))
FOV_SET = (60.0, 90.0)


def fig6_configs(scn: Scenario):
    out = []
    for d_r in _sweep_values(scn, "d_r", (0.0, 2.0)):
        for fov in FOV_SET:
            for lo, hi in FIG6_RANGES:
                geom = replace(scn.geom, d_r=float(d_r), phi_fov=math.radians(fov))
                out.append((geom, OrientationModel(math.radians(lo), math.radians(hi))))
    return out


def fig7_configs(scn: Scenario):
    out = []
    for d_r in (0.0, 2.0):
        for fov in FOV_SET:
            for d_u in _sweep_values(scn, "d_u", (4.0, 5.0, 6.0, 7.0, 8.0)):
                geom = replace(scn.geom, d_r=d_r, phi_fov=math.radians(fov), d_u=float(d_u))
                out.append((geom, scn.orientation))
    return out


def preset_fig6(scn: Scenario):
    """Average optical rate by quadrature, closed form and Monte Carlo."""
    configs = fig6_configs(scn)
    alloc, reports = _averaged_records(configs, scn)
    table = CsvTable("fig6", ("d_r", "phi_fov", "theta1", "theta2") + RESULT_COLUMNS)
    for (geom, model), rep in zip(configs, reports):
        key = (geom.d_r, geom.phi_fov, model.theta1, model.theta2)
        table.rows.extend(_averaged_rows(key, alloc, rep, geom, model, scn.params,
                                         scn.policy.case_id))
    return [table]


def preset_fig7(scn: Scenario):
    """Average RF rate against user distance by the three routes."""
    configs = fig7_configs(scn)
    alloc, reports = _averaged_records(configs, scn)
    table = CsvTable("fig7", ("d_u", "d_r", "phi_fov") + RESULT_COLUMNS)
    for (geom, model), rep in zip(configs, reports):
        key = (geom.d_u, geom.d_r, geom.phi_fov)
        table.rows.extend(_averaged_rows(key, alloc, rep, geom, model, scn.params,
                                         scn.policy.case_id))
    return [table]


def _solve_cases_over_du(geom, params, d_u_values):
    tasks = [(float(d_u), case) for d_u in d_u_values for case in ALL_CASES]
    return tasks, ordered_map(
        lambda task: solve(task[1], replace(geom, d_u=task[0]), params), tasks)


def preset_case_table(scn: Scenario):
    """Optimal rate of the four policies against user distance."""
    d_u_values = _sweep_values(scn, "d_u", (4.0, 5.0, 6.0, 7.0, 8.0))
    tasks, results = _solve_cases_over_du(scn.geom, scn.params, d_u_values)
    table = CsvTable("case_table", ("d_u",) + RESULT_COLUMNS)
    for (d_u, _), res in zip(tasks, results):
        table.rows.append((d_u,) + result_cells(res))
    return [table]


def _average_results(results):
    """Mean rate, allocation and energies over a list of results for one case."""
    first = results[0]
    mean = {name: float(np.mean([getattr(r, name) for r in results]))
            for name in ("i_b_opt", "t_vlc_opt", "rate_opt", "r_vlc", "r_rf", "e1", "e2", "e_h")}
    return (first.case_id, mean["i_b_opt"], mean["t_vlc_opt"], mean["rate_opt"], mean["r_vlc"],
            mean["r_rf"], mean["e1"], mean["e2"], mean["e_h"],
            all(r.feasible for r in results), int(sum(r.iterations for r in results)))


def _du_points(scn: Scenario, mode: str):
    if mode == "average":
        lo, hi = scn.geom.user_dist or (4.0, 8.0)
        return quasi_uniform(lo, hi)
    return np.array(_sweep_values(scn, "d_u", (4.0, 5.0, 6.0, 7.0, 8.0)), float)


def preset_fig8_9_10(scn: Scenario, mode: str = "sweep"):
    """Four policies over relay offset, carrier frequency and user distance."""
    table = CsvTable("fig8_9_10", ("mode", "d_r", "f_c", "d_u") + RESULT_COLUMNS)
    d_us = _du_points(scn, mode)
    for d_r in (0.0, 2.0):
        for f_c in (2.4e9, 5e9):
            params = replace(scn.params, f_c=f_c)
            geom = replace(scn.geom, d_r=d_r)
            tasks, results = _solve_cases_over_du(geom, params, d_us)
            if mode == "sweep":
                for (d_u, _), res in zip(tasks, results):
                    table.rows.append(("sweep", d_r, f_c, d_u) + result_cells(res))
            else:
                for case in ALL_CASES:
                    group = [r for (_, c), r in zip(tasks, results) if c == case]
                    table.rows.append(("average", d_r, f_c, float(np.mean(d_us)))
                                      + _average_results(group) + ("closed_form",))
    return [table]


FIG11_THETA2_DEG = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)


def preset_fig11_12(scn: Scenario, mode: str = "sweep"):
    """Orientation-averaged optimum against the tilt range, by grid search."""
    sweep = scn.sweep
    theta2s = _sweep_values(scn, "theta2", [math.radians(v) for v in FIG11_THETA2_DEG])
    d_us = _du_points(scn, mode) if mode == "average" else np.array([scn.geom.d_u])
    table = CsvTable("fig11_12", ("mode", "d_r", "phi_fov", "theta2", "d_u") + RESULT_COLUMNS)
    for d_r in (0.0, 4.0):
        for fov in FOV_SET:
            for th2 in theta2s:
                model = OrientationModel(scn.orientation.theta1, float(th2))
                geom = replace(scn.geom, d_r=d_r, phi_fov=math.radians(fov))
                tasks = [(float(d_u), case) for d_u in d_us for case in ALL_CASES]
                results = ordered_map(
                    lambda task: solve_random_orientation(
                        task[1], model, replace(geom, d_u=task[0]), scn.params,
                        step_ib=sweep.grid_step_ib, step_t=sweep.grid_step_t), tasks)
                if mode == "sweep":
                    for (d_u, _), res in zip(tasks, results):
                        table.rows.append(("sweep", d_r, geom.phi_fov, float(th2), d_u)
                                          + result_cells(res))
                else:
                    for case in ALL_CASES:
                        group = [r for (_, c), r in zip(tasks, results) if c == case]
                        table.rows.append(("average", d_r, geom.phi_fov, float(th2),
                                           float(np.mean(d_us)))
                                          + _average_results(group) + ("closed_form",))
    return [table]


def preset_custom(scn: Scenario):
    """Solve the scenario's own policy over its own sweep."""
    sw = scn.sweep
    var = sw.swept_variable

    def work(value):
        geom, params, model = scn.geom, scn.params, scn.orientation
        if var in ("d_u", "d_r", "phi_fov"):
            geom = replace(geom, **{var: value})
        elif var == "f_c":
            params = replace(params, f_c=value)
        elif var == "theta2":
            model = OrientationModel(model.theta1, value)
        if sw.orientation_mode == "random":
            return solve_random_orientation(scn.policy, model, geom, params,
                                            step_ib=sw.grid_step_ib, step_t=sw.grid_step_t)
        return solve(scn.policy, geom, params)

    results = ordered_map(work, sw.values)
    table = CsvTable("custom", (var,) + RESULT_COLUMNS)
    for value, res in zip(sw.values, results):
        table.rows.append((value,) + result_cells(res))
    return [table]


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationRecord:
    """Averaged report of one configuration together with its labels."""

    setup: str
    geom: Geometry
    model: OrientationModel
    report: AveragedReport


@dataclass(frozen=True)
class CheckResult:
    check: str
    setup: str
    d_r: float
    phi_fov: float
    theta1: float
    theta2: float
    d_u: float
    value: float
    reference: float
    relative_gap: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class ValidationSummary:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


CHECK_COLUMNS = ("check", "setup", "d_r", "phi_fov", "theta1", "theta2", "d_u", "value",
                 "reference", "relative_gap", "tolerance", "passed")


def validation_records(scn: Scenario) -> list[ValidationRecord]:
    """Averaged reports for the optical-rate and RF-rate validation setups."""
    out = []
    for setup, configs in (("fig6", fig6_configs(scn)), ("fig7", fig7_configs(scn))):
        _, reports = _averaged_records(configs, scn)
        out.extend(ValidationRecord(setup, g, m, r) for (g, m), r in zip(configs, reports))
    return out


def compare_report(records, tolerances=None) -> ValidationSummary:
    """Relative gaps between the averaging routes, with pass/fail per check.

    Checks for every record:

    * ``vlc_lower_bound``: closed-form optical rate does not exceed quadrature.
    * ``vlc_bound_gap``: their relative gap is within tolerance (``fig6`` only).
    * ``energy_vs_mc``: closed-form energy against the Monte Carlo mean.
    * ``rf_bound_vs_mc``: plug-in RF rate against the Monte Carlo mean (``fig7`` only).
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    checks = []

    def add(name, rec, value, ref, tolerance, passed=None):
        gap = abs(value - ref) / abs(ref) if ref else abs(value - ref)
        ok = gap <= tolerance if passed is None else passed
        g, m = rec.geom, rec.model
        checks.append(CheckResult(name, rec.setup, g.d_r, g.phi_fov, m.theta1, m.theta2, g.d_u,
                                  float(value), float(ref), float(gap), float(tolerance),
                                  bool(ok)))

    for rec in records:
        rep = rec.report
        add("vlc_lower_bound", rec, rep.avg_r_vlc_bound, rep.avg_r_vlc_exact,
            tol["lower_bound_abs"],
            passed=rep.avg_r_vlc_bound <= rep.avg_r_vlc_exact + tol["lower_bound_abs"])
        if rec.setup == "fig6":
            add("vlc_bound_gap", rec, rep.avg_r_vlc_bound, rep.avg_r_vlc_exact,
                tol["vlc_bound_gap"])
        add("energy_vs_mc", rec, rep.avg_eh_closed, rep.mc_eh.mean, tol["energy_vs_mc"])
        if rec.setup == "fig7":
            add("rf_bound_vs_mc", rec, rep.avg_r_rf_bound, rep.mc_r_rf.mean,
                tol["rf_bound_vs_mc"])
    return ValidationSummary(tuple(checks))


def summary_table(summary: ValidationSummary) -> CsvTable:
    return CsvTable("validate", CHECK_COLUMNS,
                    [tuple(getattr(c, k) for k in CHECK_COLUMNS) for c in summary.checks])


# --------------------------------------------------------------------------
# Entry point


def build_tables(run_cfg: ExperimentRun):
    """Evaluate a preset; returns ``(tables, exit_status)``."""
    scn = run_cfg.scenario
    if run_cfg.seed is not None:
        scn = with_overrides(scn, seed=run_cfg.seed)
    preset = run_cfg.preset
    if preset == "validate":
        summary = compare_report(validation_records(scn))
        return [summary_table(summary)], summary.exit_status
    if preset in ("fig8_9_10", "fig11_12"):
        tables = PRESET_FUNCS[preset](scn, run_cfg.mode)
    else:
        tables = PRESET_FUNCS[preset](scn)
    status = 0
    if preset == "custom" and not all(row[RESULT_COLUMNS.index("feasible") + 1]
                                      for row in tables[0].rows):
        status = 1
    return tables, status


PRESET_FUNCS = {
    "fig3a": preset_fig3a, "fig3b": preset_fig3b, "fig5": preset_fig5, "fig6": preset_fig6,
    "fig7": preset_fig7, "case_table": preset_case_table, "fig8_9_10": preset_fig8_9_10,
    "fig11_12": preset_fig11_12, "custom": preset_custom,
}


def run(run_cfg: ExperimentRun):
    """Execute a preset and write its CSV files into ``run_cfg.out``.

    Returns
    -------
    (int, list of Path, list of CsvTable)
        Exit status (0 success, 1 failed validation or infeasible custom
        scenario), the files written and the tables themselves.
    """
    out = Path(run_cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tables, status = build_tables(run_cfg)
    paths = [emit_csv(t.rows, out / f"{t.name}.csv", t.columns) for t in tables]
    return status, paths, tables

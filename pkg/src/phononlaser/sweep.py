"""Phase-diagram sweep harness: worker pool, checkpointing, resume.

Grid axes are 1/kappa_c (ms) and 1/gamma_c (us); each point overrides the
cooling-ion parameters of the base spec (g_c = sqrt(kappa_c gamma_c)).  The
mean-field classification is always computed; dark/lasing points get a
Lindblad steady-state solve, heating/runaway points a finite-time evolution
with growth diagnostics (there is no steady state to solve for).  Points are
dispatched to a process pool; results are merged and written in deterministic
(row, col) order by a single writer, so exports are byte-identical across
worker counts and across checkpoint/resume boundaries.
"""

from __future__ import annotations

import json
import multiprocessing as mp
import os
import time
import warnings
from dataclasses import replace

import numpy as np

from . import lindblad
from .config import RunConfig, SolverOptions, spec_to_dict
from .decay import effective_gamma_h
from .export import write_sweep_csv
from .meanfield import MfParams, Phase, classify_phase, steady_n
from .model import SystemSpec
from .operators import embed, number_op
from .tasks import _initial_joint, observable_traces, solve_steady

__all__ = ["run_sweep", "sweep_point", "GROWTH_SLOPE_PER_MS", "lindblad_label_of"]

WORKER_ENV_VAR = "PHONONLASER_MAX_WORKERS"
GROWTH_SLOPE_PER_MS = 0.25    # late-time dn/dt above this counts as runaway growth
GROWTH_TAIL_LIMIT = 5e-3      # stop trusting the truncated evolution past this tail mass
DARK_NBAR_THRESHOLD = 0.5


def _point_spec(base: SystemSpec, inv_kappa_c_ms: float, inv_gamma_c_us: float) -> SystemSpec:
    gamma_c = 1.0e3 / inv_gamma_c_us
    kappa_c = 1.0 / inv_kappa_c_ms
    g_c = float(np.sqrt(kappa_c * gamma_c))
    return replace(base, g_c=g_c, gamma_c=gamma_c)


def _growth_diagnostic(spec: SystemSpec, solver: SolverOptions, t_max_ms: float) -> dict:
    """Finite-time evolution from the ground state with growth metrics."""
    t_grid = np.linspace(0.0, t_max_ms, 21)
    layout = spec.layout
    n_op = embed(number_op(spec.fock_cutoff), 0, layout)
    d_int = layout.dim_h * layout.dim_c
    tail_op = np.zeros_like(n_op)
    tail_op[-d_int:, -d_int:] = np.eye(d_int)
    rho0 = _initial_joint(spec, "ground", 0.0)
    nbar_t, tail_t = observable_traces(spec, rho0, [n_op, tail_op], 0, t_grid, solver).real
    valid = tail_t < GROWTH_TAIL_LIMIT
    last = int(np.argmin(valid)) if not valid.all() else len(t_grid)
    last = max(last, 3)
    nbar_v, t_v = nbar_t[:last], t_grid[:last]
    half = len(t_v) // 2
    slope_late = float(np.polyfit(t_v[half:], nbar_v[half:], 1)[0])
    truncation_hit = bool(~valid.all())
    grew = nbar_v[-1] > nbar_v[0] + 1.0
    growth = bool(truncation_hit and grew) or (grew and slope_late > GROWTH_SLOPE_PER_MS)
    return {
        "nbar": float(nbar_v[-1]),
        "growth_rate_per_ms": slope_late,
        "tail_mass": float(tail_t[last - 1]),
        "growth": growth,
    }


def lindblad_label_of(record: dict) -> str:
    """Label derived from Lindblad output: dark / lasing / growth / error."""
    if record.get("error"):
        return "error"
    if record.get("growth_rate_per_ms") is not None:
        return "growth" if record.get("_growth_flag", True) else "stalled"
    return "dark" if record["nbar"] < DARK_NBAR_THRESHOLD else "lasing"


def sweep_point(args) -> dict:
    """Compute one grid point (top-level function so pools can pickle it)."""
    (row, col, inv_kappa_c, inv_gamma_c, base_spec, solver, gamma_h_eff, growth_time) = args
    t0 = time.time()
    spec = _point_spec(base_spec, inv_kappa_c, inv_gamma_c)
    mf = meanfield_params_cached(spec, gamma_h_eff)
    phase = classify_phase(mf)
    n_mf = steady_n(mf)
    record: dict = {
        "row": row,
        "col": col,
        "inv_kappa_c_ms": inv_kappa_c,
        "inv_gamma_c_us": inv_gamma_c,
        "gamma_c_per_ms": spec.gamma_c,
        "g_c_khz": spec.g_c / (2.0 * np.pi),
        "phase": phase.value,
        "nbar_meanfield": n_mf if isinstance(n_mf, float) else None,
        "nbar": None,
        "sz_h": None,
        "residual": None,
        "tail_mass": None,
        "growth_rate_per_ms": None,
        "nbar_ratio": None,
        "error": None,
    }
    try:
        if phase in (Phase.HEATING, Phase.RUNAWAY_CORNER):
            diag = _growth_diagnostic(spec, solver, growth_time)
            record.update(
                nbar=diag["nbar"],
                growth_rate_per_ms=diag["growth_rate_per_ms"],
                tail_mass=diag["tail_mass"],
                _growth_flag=diag["growth"],
            )
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", lindblad.TruncationWarning)
                _rho, _pn, obs = solve_steady(spec, solver)
            record.update(
                nbar=obs["nbar"], sz_h=obs["sz_h"], residual=obs["residual"],
                tail_mass=obs["tail_mass"],
            )
            if isinstance(n_mf, float) and n_mf > 0:
                record["nbar_ratio"] = obs["nbar"] / n_mf
    except Exception as exc:  # per-point failures recorded, sweep continues
        record["error"] = f"{type(exc).__name__}: {exc}"
    record["lindblad_label"] = lindblad_label_of(record)
    record.pop("_growth_flag", None)
    record["wall_time_s"] = time.time() - t0
    return record


def meanfield_params_cached(spec: SystemSpec, gamma_h_eff: float | None) -> MfParams:
    if spec.be_levels == 2:
        return MfParams(g_h=spec.g_h, g_c=spec.g_c, gamma_h=spec.gamma_h,
                        gamma_c=spec.gamma_c, gamma_e=spec.gamma_e)
    from .tasks import GAMMA_E_BRANCHING_FACTOR

    return MfParams(g_h=spec.g_h, g_c=spec.g_c, gamma_h=gamma_h_eff,
                    gamma_c=spec.gamma_c, gamma_e=GAMMA_E_BRANCHING_FACTOR * gamma_h_eff)


def _checkpoint_paths(out_path: str) -> tuple[str, str]:
    return out_path + ".ckpt.jsonl", out_path + ".ckpt.done"


def _load_checkpoint(out_path: str) -> dict[tuple[int, int], dict]:
    ckpt, _done = _checkpoint_paths(out_path)
    completed: dict[tuple[int, int], dict] = {}
    if os.path.exists(ckpt):
        with open(ckpt, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                completed[(entry["row"], entry["col"])] = entry["record"]
    return completed


def run_sweep(cfg: RunConfig, resume: bool = False, log=print) -> list[dict]:
    """Execute the configured sweep; returns records in (row, col) order.

    Every completed point is appended to the checkpoint before the next
    result is merged; with ``resume`` the completed points are reused
    verbatim, which keeps the final export byte-identical to an
    uninterrupted run.
    """
    if cfg.sweep is None:
        raise ValueError("config has no sweep block")
    base = cfg.system
    out_path = cfg.output if cfg.output.endswith(".csv") else cfg.output + ".csv"
    ckpt_path, done_path = _checkpoint_paths(out_path)
    completed = _load_checkpoint(out_path) if resume else {}
    if not resume:
        for p in _checkpoint_paths(out_path):
            if os.path.exists(p):
                os.remove(p)

    gamma_h_eff = None
    if base.be_levels == 4:
        gamma_h_eff = 1e3 * effective_gamma_h(base.four_level.rate_params())

    points = []
    for row, inv_k in enumerate(cfg.sweep.inv_kappa_c_ms):
        for col, inv_g in enumerate(cfg.sweep.inv_gamma_c_us):
            if (row, col) in completed:
                continue
            points.append((row, col, inv_k, inv_g, base, cfg.solver, gamma_h_eff,
                           cfg.sweep.growth_time_ms))

    workers = cfg.workers
    env_cap = os.environ.get(WORKER_ENV_VAR)
    if env_cap:
        workers = max(1, min(workers, int(env_cap)))

    records = dict(completed)
    os.makedirs(os.path.dirname(os.path.abspath(ckpt_path)), exist_ok=True)
    t0 = time.time()

    def _commit(rec: dict):
        records[(rec["row"], rec["col"])] = rec
        with open(ckpt_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"row": rec["row"], "col": rec["col"], "record": rec}) + "\n")
        with open(done_path, "a", encoding="utf-8") as fh:
            fh.write(f"{rec['row']},{rec['col']}\n")

    if points:
        if workers > 1:
            with mp.get_context("fork").Pool(processes=workers) as pool:
                for rec in pool.imap_unordered(sweep_point, points):
                    _commit(rec)
        else:
            for args in points:
                _commit(sweep_point(args))
    n_err = sum(1 for r in records.values() if r.get("error"))
    log(
        f"sweep: {len(records)} points ({len(points)} computed, "
        f"{len(completed)} resumed, {n_err} failed) in {time.time() - t0:.1f}s"
    )
    ordered = [records[k] for k in sorted(records)]
    write_sweep_csv(ordered, out_path, spec_to_dict(base))
    return ordered

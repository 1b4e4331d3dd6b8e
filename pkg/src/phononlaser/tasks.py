"""Task drivers shared by the CLI and the sweep harness.

Each driver takes a SystemSpec (plus options), runs the relevant solver and
returns plain-dict results ready for export.  Sector-aware shortcuts are used
whenever the model conserves the excitation charge (no tickle drive); the
full-superoperator path is taken otherwise.
"""

from __future__ import annotations

import time
import warnings

import numpy as np
from scipy.special import gammaln

from . import lindblad
from .config import CarrierOptions, CharfunOptions, DiffusionOptions, EvolveOptions, SolverOptions
from .decay import carrier_signal, effective_gamma_h, tau1_from_omega1, tau2_from_omega2
from .lindblad import (
    evolve_vec,
    is_block_closed,
    liouvillian,
    phonon_distribution,
    sector_block,
    sector_indices,
    steady_state,
    vec,
)
from .meanfield import MfParams
from .model import SystemSpec, build_hamiltonian, build_jump_ops, charge_vector
from .operators import destroy, embed, number_op, spin_op
from .phasespace import (
    char_fun,
    marginal_from_charfun,
    phase_variance_trace,
    reduced_motional_state,
)

__all__ = [
    "build_liouvillian",
    "solve_steady",
    "coherent_motional_state",
    "observable_trace",
    "run_steady_task",
    "run_evolve_task",
    "run_charfun_task",
    "run_diffusion_task",
    "run_calibrate_decay_task",
    "run_carrier_task",
    "meanfield_params",
]

GAMMA_E_BRANCHING_FACTOR = 50.0 / 40.0  # decay back to |1> vs through to |0>


def build_liouvillian(spec: SystemSpec):
    H = build_hamiltonian(spec)
    L = liouvillian(H, build_jump_ops(spec))
    charges = None if spec.tickle.enabled else charge_vector(spec)
    return L, charges


def meanfield_params(spec: SystemSpec, gamma_h_eff: float | None = None) -> MfParams:
    """Two-level-reduction parameters matching a spec.

    For a 4-level spec the effective decay rate is fitted from the rate
    equations (or passed in) and the dephasing rate follows from the
    branching-ratio factor.
    """
    if spec.be_levels == 2:
        return MfParams(
            g_h=spec.g_h, g_c=spec.g_c, gamma_h=spec.gamma_h,
            gamma_c=spec.gamma_c, gamma_e=spec.gamma_e,
        )
    if gamma_h_eff is None:
        gamma_h_eff = 1e3 * effective_gamma_h(spec.four_level.rate_params())
    return MfParams(
        g_h=spec.g_h, g_c=spec.g_c, gamma_h=gamma_h_eff,
        gamma_c=spec.gamma_c, gamma_e=GAMMA_E_BRANCHING_FACTOR * gamma_h_eff,
    )


def solve_steady(spec: SystemSpec, solver: SolverOptions = SolverOptions()):
    """Steady state plus the standard observable record."""
    t0 = time.time()
    L, charges = build_liouvillian(spec)
    result = steady_state(
        L, charges=charges,
        residual_tol=solver.steady_residual_tol,
        check_unique=solver.check_unique,
    )
    rho = result.rho
    layout = spec.layout
    nbar = lindblad.expectation(rho, embed(number_op(spec.fock_cutoff), 0, layout)).real
    sz_h = lindblad.expectation(rho, embed(spin_op("z", spec.be_levels, (0, 1)), 1, layout)).real
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lindblad.TruncationWarning)
        pn = phonon_distribution(rho, layout)
    record = {
        "nbar": float(nbar),
        "sz_h": float(sz_h),
        "tail_mass": float(pn[-1]),
        "residual": result.residual,
        "solver_method": result.method,
        "reduced_dim": result.reduced_dim,
        "wall_time_s": time.time() - t0,
    }
    return rho, pn, record


def coherent_motional_state(alpha: complex, N: int) -> np.ndarray:
    n = np.arange(N)
    log_amp = -abs(alpha) ** 2 / 2.0 - 0.5 * gammaln(n + 1)
    c = np.exp(log_amp) * np.power(complex(alpha), n)
    return np.outer(c, c.conj())


def _initial_joint(spec: SystemSpec, kind: str, nbar0: float) -> np.ndarray:
    layout = spec.layout
    if kind == "coherent":
        rho_m = coherent_motional_state(np.sqrt(nbar0), spec.fock_cutoff)
        rho_m = rho_m / np.trace(rho_m).real  # undo truncation loss
    else:
        rho_m = np.zeros((spec.fock_cutoff, spec.fock_cutoff), dtype=complex)
        rho_m[0, 0] = 1.0
    internal = np.zeros((layout.dim_h * layout.dim_c, layout.dim_h * layout.dim_c), dtype=complex)
    internal[0, 0] = 1.0
    return np.kron(rho_m, internal)


def observable_traces(
    spec: SystemSpec,
    rho0: np.ndarray,
    ops: list[np.ndarray],
    sector: int,
    t_grid,
    solver: SolverOptions = SolverOptions(),
) -> np.ndarray:
    """<op_i>(t) for several operators, evolved inside one coherence sector.

    Valid when the model conserves the excitation charge and every operator
    carries the definite charge ``-sector`` (e.g. the annihilation operator
    for sector=+1, any diagonal observable for sector=0).  Falls back to the
    full Liouvillian when the block is not closed.  The state is propagated
    once and contracted against all operators; the result has shape
    (len(ops), len(t_grid)).
    """
    L, charges = build_liouvillian(spec)
    v0_full = vec(rho0)
    weights = [vec(op.T) for op in ops]
    method = "expm" if spec.be_levels == 4 else "adaptive"
    if charges is not None:
        idx = sector_indices(charges, sector)
        if is_block_closed(L, idx):
            Lb = sector_block(L, idx)
            ys = evolve_vec(Lb, v0_full[idx], t_grid, method=method,
                            rtol=solver.evolve_rtol, atol=solver.evolve_atol)
            return np.stack([ys @ w[idx] for w in weights])
    ys = evolve_vec(L, v0_full, t_grid, method=method,
                    rtol=solver.evolve_rtol, atol=solver.evolve_atol)
    return np.stack([ys @ w for w in weights])


def observable_trace(
    spec: SystemSpec,
    rho0: np.ndarray,
    op: np.ndarray,
    sector: int,
    t_grid,
    solver: SolverOptions = SolverOptions(),
) -> np.ndarray:
    return observable_traces(spec, rho0, [op], sector, t_grid, solver)[0]


# ---------------------------------------------------------------------------
# CLI-facing tasks


def run_steady_task(spec: SystemSpec, solver: SolverOptions = SolverOptions()) -> dict:
    rho, pn, record = solve_steady(spec, solver)
    return {
        "kind": "steady_state",
        "pn": pn,
        **record,
    }


def run_evolve_task(spec: SystemSpec, opts: EvolveOptions, solver: SolverOptions = SolverOptions()) -> dict:
    t_grid = np.linspace(0.0, opts.t_max_ms, opts.points)
    rho0 = _initial_joint(spec, opts.initial, opts.initial_nbar)
    layout = spec.layout
    n_op = embed(number_op(spec.fock_cutoff), 0, layout)
    sz_op = embed(spin_op("z", spec.be_levels, (0, 1)), 1, layout)
    tail_op = np.zeros_like(n_op)
    tail_op[-layout.dim_h * layout.dim_c :, -layout.dim_h * layout.dim_c :] = np.eye(
        layout.dim_h * layout.dim_c
    )
    nbar_t, sz_t, tail_t = observable_traces(
        spec, rho0, [n_op, sz_op, tail_op], 0, t_grid, solver
    ).real
    return {
        "kind": "trajectory",
        "t_ms": t_grid,
        "nbar": nbar_t,
        "sz_h": sz_t,
        "tail_mass": tail_t,
        "initial": opts.initial,
        "initial_nbar": opts.initial_nbar,
    }


def run_charfun_task(spec: SystemSpec, opts: CharfunOptions, solver: SolverOptions = SolverOptions()) -> dict:
    rho, pn, record = solve_steady(spec, solver)
    rho_m = reduced_motional_state(rho, spec.layout)
    grid = np.arange(-opts.beta_max, opts.beta_max + opts.beta_step / 2, opts.beta_step)
    axes = []
    for angle_deg in opts.axes_deg:
        phi = np.deg2rad(angle_deg)
        samples = char_fun(rho_m, phi, grid)
        curve = marginal_from_charfun(samples, pad_to=opts.pad_to, x_max=opts.marginal_x_max)
        axes.append(
            {
                "axis_angle_deg": angle_deg,
                "beta": samples.grid,
                "re": samples.values.real,
                "im": samples.values.imag,
                "marginal": {
                    "quadrature_angle_rad": curve.quadrature_angle,
                    "x": curve.x,
                    "p": curve.p,
                    "norm_error": curve.norm_error,
                    "negativity": curve.negativity,
                },
            }
        )
    return {"kind": "charfun", "axes": axes, "pn": pn, **record}


def run_diffusion_task(spec: SystemSpec, opts: DiffusionOptions, solver: SolverOptions = SolverOptions()) -> dict:
    t_grid = np.linspace(0.0, opts.t_max_ms, opts.points)
    rho0 = _initial_joint(spec, "coherent", opts.nbar0)
    a_op = embed(destroy(spec.fock_cutoff), 0, spec.layout)
    a_t = observable_trace(spec, rho0, a_op, 1, t_grid, solver)
    fit = phase_variance_trace(t_grid, a_t, opts.nbar0)
    return {
        "kind": "diffusion",
        "t_ms": t_grid,
        "amp_re": a_t.real,
        "amp_im": a_t.imag,
        "theta_sq": fit.theta_sq,
        "rate_rad2_per_ms": fit.rate,
        "intensity_ref": opts.nbar0,
        "saturated": fit.saturated,
    }


def run_calibrate_decay_task(spec: SystemSpec) -> dict:
    if spec.be_levels != 4:
        raise ValueError("calibrate-decay requires a 4-level heating-ion block")
    fl = spec.four_level
    rp = fl.rate_params()
    rate = effective_gamma_h(rp)
    g = rp.gamma
    return {
        "kind": "calibrate_decay",
        "omega1_rad_per_us": fl.Omega1,
        "omega2_rad_per_us": fl.Omega2,
        "tau1_us": tau1_from_omega1(fl.Omega1, fl.Delta1, fl.gamma0, fl.gamma1, fl.gamma2),
        "tau2_us": tau2_from_omega2(fl.Omega2, fl.gamma0, fl.gamma1, fl.gamma2),
        "effective_gamma_h_per_us": rate,
        "effective_gamma_h_per_ms": 1e3 * rate,
        "branching_saturation_repump1": fl.gamma0 / (fl.gamma0 + fl.gamma2),
        "branching_saturation_repump2": fl.gamma0 / (fl.gamma0 + fl.gamma1),
        "stark_shift_1_rad_per_us": fl.stark_shift_1,
        "gamma_total_per_us": g,
    }


def run_carrier_task(spec: SystemSpec, opts: CarrierOptions, solver: SolverOptions = SolverOptions()) -> dict:
    """Carrier Rabi traces after increasing dissipation durations.

    The phonon distribution is taken from the evolved state at each duration
    (heating-region diagnostic: the oscillation slows and dephases as the
    distribution climbs).
    """
    rho0 = _initial_joint(spec, "ground", 0.0)
    layout = spec.layout
    N = spec.fock_cutoff
    durations = np.asarray(opts.durations_ms, dtype=float)
    t_grid = np.concatenate(([0.0], durations))
    projectors = [
        embed(np.diag((np.arange(N) == n).astype(complex)), 0, layout) for n in range(N)
    ]
    pn_t = observable_traces(spec, rho0, projectors, 0, t_grid, solver).real.T
    omega0 = 2.0 * np.pi * opts.omega0_khz  # rad/ms
    rabi_t = np.linspace(0.0, opts.rabi_t_max_ms, opts.rabi_points)
    traces = []
    for i, dur in enumerate(t_grid):
        pn = np.clip(pn_t[i], 0.0, None)
        pn = pn / pn.sum()
        traces.append(
            {
                "duration_ms": float(dur),
                "nbar": float(pn @ np.arange(N)),
                "p_up": carrier_signal(pn, omega0, spec.eta_c, rabi_t),
            }
        )
    return {
        "kind": "carrier",
        "rabi_t_ms": rabi_t,
        "omega0_khz": opts.omega0_khz,
        "eta": spec.eta_c,
        "traces": traces,
    }

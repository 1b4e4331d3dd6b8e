#!/usr/bin/env python3
"""Produce small reference export files of every kind.

These are the fixtures consumed by the plotkit package tests; they are small
enough to commit (coarse grids, modest truncation) but structurally identical
to production exports.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from phononlaser.config import (
    CarrierOptions,
    CharfunOptions,
    DiffusionOptions,
    parse_config,
    spec_to_dict,
)
from phononlaser.export import write_json
from phononlaser.model import SystemSpec, TickleParams
from phononlaser.sweep import run_sweep
from phononlaser.tasks import (
    run_carrier_task,
    run_charfun_task,
    run_diffusion_task,
    run_steady_task,
)

OUT = os.environ.get("GOLDEN_OUT", os.path.join(os.path.dirname(__file__), "..", "..",
                                                "plotkit", "tests", "golden"))

GAMMA_H = 1.0e3 / 15.5
GAMMA_E = 1.25 * GAMMA_H
TWO_PI = 2.0 * np.pi


def lasing_spec(N=40, tickle=None):
    return SystemSpec(
        g_h=TWO_PI * 4.59, g_c=TWO_PI * 4.24, gamma_h=GAMMA_H, gamma_c=435.0,
        gamma_e=GAMMA_E, be_levels=2, fock_cutoff=N, tickle=tickle or TickleParams(),
    )


def main():
    os.makedirs(OUT, exist_ok=True)

    # phase-diagram sweep (6x6 coarse grid)
    cfg = parse_config(
        f"""
task: sweep
system:
  g_h_khz: 4.55
  g_c_khz: 4.0
  gamma_c_per_ms: 435.0
  heating_ion:
    levels: 2
    gamma_h_per_ms: {GAMMA_H!r}
    gamma_e_per_ms: {GAMMA_E!r}
  fock_cutoff: 30
sweep:
  inv_kappa_c_ms: {np.geomspace(0.005, 0.7, 6).tolist()}
  inv_gamma_c_us: {np.geomspace(2.0, 25.0, 6).tolist()}
output: {os.path.join(OUT, "sweep")}
workers: 2
"""
    )
    run_sweep(cfg)

    spec = lasing_spec()
    # phonon distribution
    steady = run_steady_task(spec)
    write_json(steady, os.path.join(OUT, "pn.json"), spec_to_dict(spec))

    # characteristic function + marginals, unlocked and locked
    charfun_opts = CharfunOptions(axes_deg=(0.0, 90.0), beta_max=0.7, beta_step=0.02,
                                  pad_to=1.0, marginal_x_max=10.0)
    write_json(run_charfun_task(spec, charfun_opts), os.path.join(OUT, "charfun_unlocked.json"),
               spec_to_dict(spec))
    locked = lasing_spec(tickle=TickleParams(enabled=True, g_t=TWO_PI * 0.4, phase=np.pi / 2))
    write_json(run_charfun_task(locked, charfun_opts), os.path.join(OUT, "charfun_locked.json"),
               spec_to_dict(locked))

    # diffusion trace
    diff = run_diffusion_task(spec, DiffusionOptions(nbar0=4.4, t_max_ms=1.0, points=9))
    write_json(diff, os.path.join(OUT, "diffusion.json"), spec_to_dict(spec))

    # carrier traces in the heating region
    heat = SystemSpec(
        g_h=TWO_PI * 4.57, g_c=TWO_PI * 2.11, gamma_h=GAMMA_H, gamma_c=50.0,
        gamma_e=GAMMA_E, be_levels=2, fock_cutoff=40,
    )
    carrier = run_carrier_task(
        heat, CarrierOptions(omega0_khz=60.0, durations_ms=(0.3, 0.6), rabi_t_max_ms=0.8,
                             rabi_points=240)
    )
    write_json(carrier, os.path.join(OUT, "carrier.json"), spec_to_dict(heat))
    print(f"golden exports written to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()

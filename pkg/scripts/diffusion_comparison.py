#!/usr/bin/env python3
"""Compare phase-diffusion rates of the 4-level model and its two-level
reductions, against the closed-form Heisenberg-Langevin coefficients.

Starts each model from a coherent state at the lasing occupation and fits
the linear growth of the phase variance extracted from the <a>(t) decay.
"""

import argparse

import numpy as np

from phononlaser.decay import omega1_from_tau1, omega2_from_tau2
from phononlaser.meanfield import MfParams, total_phase_diffusion
from phononlaser.model import FourLevelParams, SystemSpec
from phononlaser.operators import destroy, embed
from phononlaser.phasespace import phase_variance_trace
from phononlaser.tasks import _initial_joint, observable_trace

GAMMA_H = 1.0e3 / 15.5
GAMMA_E = 1.25 * GAMMA_H
TWO_PI = 2.0 * np.pi
G0, G1, G2 = 40.0, 50.4, 29.6
DELTA1 = -TWO_PI * 10.0


def specs(N):
    fl = FourLevelParams(
        Omega1=omega1_from_tau1(1e3 / 91.0, DELTA1, G0, G1, G2),
        Omega2=omega2_from_tau2(1e3 / 344.0, G0, G1, G2),
        Delta1=DELTA1, gamma0=G0, gamma1=G1, gamma2=G2,
    )
    common = dict(g_h=TWO_PI * 4.59, g_c=TWO_PI * 4.24, gamma_c=435.0, fock_cutoff=N)
    return {
        "four-level": SystemSpec(gamma_h=0.0, be_levels=4, four_level=fl, **common),
        "two-level + dephasing": SystemSpec(gamma_h=GAMMA_H, gamma_e=GAMMA_E, **common),
        "two-level plain": SystemSpec(gamma_h=GAMMA_H, **common),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nbar0", type=float, default=4.4)
    ap.add_argument("--t-max-ms", type=float, default=1.5)
    ap.add_argument("--points", type=int, default=16)
    ap.add_argument("--fock-cutoff", type=int, default=40)
    args = ap.parse_args()

    t_grid = np.linspace(0.0, args.t_max_ms, args.points)
    rates = {}
    for name, spec in specs(args.fock_cutoff).items():
        rho0 = _initial_joint(spec, "coherent", args.nbar0)
        a_op = embed(destroy(spec.fock_cutoff), 0, spec.layout)
        a_t = observable_trace(spec, rho0, a_op, 1, t_grid)
        rates[name] = phase_variance_trace(t_grid, a_t, args.nbar0).rate
        print(f"{name:24s}: {rates[name]:>7.4f} rad^2/ms")

    mf = MfParams(g_h=TWO_PI * 4.59, g_c=TWO_PI * 4.24, gamma_h=GAMMA_H,
                  gamma_c=435.0, gamma_e=GAMMA_E)
    hl = total_phase_diffusion(mf, args.nbar0)
    print(f"{'closed form (with deph)':24s}: {hl:>7.4f} rad^2/ms")
    print(f"ratio four-level / plain: {rates['four-level'] / rates['two-level plain']:.3f}")
    print(f"closed form / four-level: {hl / rates['four-level']:.2f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run a dense phase-diagram sweep over the cooling-ion control axes.

Writes out/phase_diagram_dense.csv; render it with
`plotkit phase_diagram --in out/phase_diagram_dense.csv --out diagram.png`.
"""

import argparse

import numpy as np

from phononlaser.config import parse_config
from phononlaser.sweep import run_sweep

GAMMA_H = 1.0e3 / 15.5
GAMMA_E = 1.25 * GAMMA_H


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=24, help="grid points per axis")
    ap.add_argument("--fock-cutoff", type=int, default=40)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default="out/phase_diagram_dense")
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()

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
  fock_cutoff: {args.fock_cutoff}
sweep:
  inv_kappa_c_ms: {np.geomspace(0.005, 0.7, args.size).tolist()}
  inv_gamma_c_us: {np.geomspace(2.0, 25.0, args.size).tolist()}
output: {args.out}
workers: {args.workers}
"""
    )
    records = run_sweep(cfg, resume=args.resume)
    n_label = {}
    for r in records:
        n_label[r["lindblad_label"]] = n_label.get(r["lindblad_label"], 0) + 1
    print("labels:", n_label)


if __name__ == "__main__":
    main()

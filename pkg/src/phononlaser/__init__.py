"""Simulator for a two-species trapped-ion phonon laser.

A shared motional mode is heated by a blue-sideband-driven ion with engineered
decay and cooled by a red-sideband-driven ion, realizing a dissipative phase
diagram with dark, lasing and runaway-heating regions.  The package provides

* truncated-Fock / spin operator algebra (``operators``),
* the physical model builders incl. the 4-level repumping scheme (``model``,
  ``decay``),
* a sparse Lindblad engine with steady-state and time-domain solvers
  (``lindblad``),
* first-order cumulant / mean-field theory and Heisenberg-Langevin phase
  diffusion coefficients (``meanfield``),
* characteristic-function, marginal and Wigner reconstruction (``phasespace``),
* a config-driven sweep harness and CLI (``config``, ``sweep``, ``cli``).

Internal unit convention: angular frequencies and rates in rad/ms and 1/ms;
atomic-physics inputs of the repumping scheme are quoted in 1/us and rad/us
and converted at the model boundary.
"""

from .operators import SpaceLayout, destroy, displacement, embed, spin_op
from .model import SystemSpec, build_hamiltonian, build_jump_ops
from .decay import RateParams, effective_gamma_h, omega1_from_tau1, omega2_from_tau2
from .lindblad import liouvillian, steady_state, evolve, expectation, phonon_distribution
from .meanfield import MfParams, classify_phase, steady_n, hl_phase_diffusion

__all__ = [
    "SpaceLayout",
    "destroy",
    "displacement",
    "embed",
    "spin_op",
    "SystemSpec",
    "build_hamiltonian",
    "build_jump_ops",
    "RateParams",
    "effective_gamma_h",
    "omega1_from_tau1",
    "omega2_from_tau2",
    "liouvillian",
    "steady_state",
    "evolve",
    "expectation",
    "phonon_distribution",
    "MfParams",
    "classify_phase",
    "steady_n",
    "hl_phase_diffusion",
]

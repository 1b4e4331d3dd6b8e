"""First-order cumulant theory and Heisenberg-Langevin phase diffusion.

The cumulant variables are A = <a>, S_{c/h} = <sigma+_{c/h}> and
D_{c/h} = <sigmaz_{c/h}>.  Adiabatic elimination of the spins yields

    dA/dt = A ( 2 kappa_h / (1 + s_h |A|^2) - 2 kappa_c / (1 + s_c |A|^2) )

with gain/loss coefficients kappa and saturation coefficients s; the heating
ion's dephasing rate gamma_e enters as kappa_h = g_h^2/(gamma_h + gamma_e)
and s_h = 8 g_h^2/(gamma_h (gamma_h + gamma_e)).  Phase boundaries:
kappa_h = kappa_c (dark/lasing) and gamma_h = gamma_c (lasing/heating).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "MeanFieldState",
    "MfParams",
    "Phase",
    "cumulant_rhs",
    "adiabatic_rhs_A",
    "steady_n",
    "classify_phase",
    "integrate_meanfield",
    "hl_phase_diffusion",
    "total_phase_diffusion",
]


class PhaseBoundaryError(ValueError):
    """Raised when a closed-form expression is evaluated on a phase boundary."""


class Phase(enum.Enum):
    DARK = "dark"
    LASING = "lasing"
    HEATING = "heating"
    RUNAWAY_CORNER = "runaway_corner"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class MeanFieldState:
    A: complex
    S_c: complex
    S_h: complex
    D_c: float
    D_h: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.A.real, self.A.imag, self.S_c.real, self.S_c.imag,
             self.S_h.real, self.S_h.imag, self.D_c, self.D_h]
        )

    @staticmethod
    def from_array(y: np.ndarray) -> "MeanFieldState":
        return MeanFieldState(
            A=complex(y[0], y[1]), S_c=complex(y[2], y[3]),
            S_h=complex(y[4], y[5]), D_c=float(y[6]), D_h=float(y[7]),
        )


@dataclass(frozen=True)
class MfParams:
    """Couplings (rad/ms) and rates (1/ms); derived coefficients are computed
    on access and never stored."""

    g_h: float
    g_c: float
    gamma_h: float
    gamma_c: float
    gamma_e: float = 0.0

    @property
    def kappa_h(self) -> float:
        return self.g_h**2 / (self.gamma_h + self.gamma_e)

    @property
    def kappa_c(self) -> float:
        return self.g_c**2 / self.gamma_c

    @property
    def s_h(self) -> float:
        return 8.0 * self.g_h**2 / (self.gamma_h * (self.gamma_h + self.gamma_e))

    @property
    def s_c(self) -> float:
        return 8.0 * self.g_c**2 / self.gamma_c**2


def cumulant_rhs(state: MeanFieldState, p: MfParams) -> MeanFieldState:
    """Time derivative of the five cumulant variables.

    The heating-spin coherence decays at (gamma_h + gamma_e)/2; all other
    equations are unaffected by the dephasing operator.
    """
    A, S_c, S_h, D_c, D_h = state.A, state.S_c, state.S_h, state.D_c, state.D_h
    dA = -1j * p.g_c * np.conj(S_c) - 1j * p.g_h * S_h
    dS_c = -0.5 * p.gamma_c * S_c - 1j * p.g_c * np.conj(A) * D_c
    dD_c = (2j * p.g_c * (np.conj(A) * np.conj(S_c) - A * S_c)).real - p.gamma_c * (D_c + 1.0)
    dS_h = -0.5 * (p.gamma_h + p.gamma_e) * S_h - 1j * p.g_h * A * D_h
    dD_h = (2j * p.g_h * (A * np.conj(S_h) - np.conj(A) * S_h)).real - p.gamma_h * (D_h + 1.0)
    return MeanFieldState(A=dA, S_c=dS_c, S_h=dS_h, D_c=dD_c, D_h=dD_h)


def adiabatic_rhs_A(A: complex, p: MfParams) -> complex:
    """dA/dt after adiabatic elimination of both spins."""
    I = abs(A) ** 2
    return A * (2.0 * p.kappa_h / (1.0 + p.s_h * I) - 2.0 * p.kappa_c / (1.0 + p.s_c * I))


def classify_phase(p: MfParams, rel_tol: float = 1e-9) -> Phase:
    """Four-phase classification from the kappa and gamma orderings.

    Points within ``rel_tol`` (relative) of either boundary are flagged
    BOUNDARY rather than assigned a side.
    """
    dk = p.kappa_h - p.kappa_c
    dg = p.gamma_h - p.gamma_c
    if abs(dk) <= rel_tol * max(p.kappa_h, p.kappa_c) or abs(dg) <= rel_tol * max(
        p.gamma_h, p.gamma_c
    ):
        return Phase.BOUNDARY
    if dg < 0:
        return Phase.LASING if dk > 0 else Phase.DARK
    return Phase.HEATING if dk > 0 else Phase.RUNAWAY_CORNER


def steady_n(p: MfParams) -> float | Phase:
    """Mean phonon number of the lasing fixed point, or the phase flag.

    <n> = gamma_c gamma_h (gamma_c g_h^2 - (gamma_h + gamma_e) g_c^2)
          / (8 g_c^2 g_h^2 (gamma_c - gamma_h)).
    """
    phase = classify_phase(p)
    if phase is Phase.BOUNDARY and abs(p.gamma_c - p.gamma_h) <= 1e-9 * max(
        p.gamma_c, p.gamma_h
    ):
        raise PhaseBoundaryError("gamma_c = gamma_h: phonon expression is singular")
    if phase is Phase.DARK:
        return 0.0
    if phase in (Phase.HEATING, Phase.RUNAWAY_CORNER):
        return phase
    num = p.gamma_c * p.gamma_h * (p.gamma_c * p.g_h**2 - (p.gamma_h + p.gamma_e) * p.g_c**2)
    den = 8.0 * p.g_c**2 * p.g_h**2 * (p.gamma_c - p.gamma_h)
    return num / den


def integrate_meanfield(
    state0: MeanFieldState,
    p: MfParams,
    t_grid,
    blowup_intensity: float = 1e3,
) -> tuple[list[MeanFieldState], bool]:
    """Cumulant trajectory on ``t_grid``; returns (states, runaway).

    In the heating phase |A|^2 grows without bound; the integration stops at
    ``blowup_intensity`` and the runaway flag is set (expected behavior, not
    a failure).
    """
    t_grid = np.asarray(t_grid, dtype=float)

    def rhs(_t, y):
        return cumulant_rhs(MeanFieldState.from_array(y), p).as_array()

    def blowup(_t, y):
        return (y[0] ** 2 + y[1] ** 2) - blowup_intensity

    blowup.terminal = True
    blowup.direction = 1
    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        state0.as_array(),
        t_eval=t_grid,
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        events=blowup,
    )
    states = [MeanFieldState.from_array(y) for y in sol.y.T]
    runaway = len(sol.t_events[0]) > 0
    for s in states:
        if abs(s.D_c) > 1 + 1e-6 or abs(s.D_h) > 1 + 1e-6:
            raise RuntimeError("inversion left the physical range during integration")
        if abs(s.S_c) > 0.5 + 1e-6 or abs(s.S_h) > 0.5 + 1e-6:
            raise RuntimeError("spin coherence left the physical range during integration")
    return states, runaway


def hl_phase_diffusion(g: float, gamma: float, gamma_e: float, I: float) -> float:
    """Heisenberg-Langevin phase diffusion coefficient 2 D_theta,theta (rad^2/ms).

    2D = [2 g^2/(gamma+gamma_e) + 8 g^4 I/(gamma (gamma+gamma_e)^2)]
         / (I [1 + 8 g^2 I/(gamma (gamma+gamma_e))]);
    gamma_e = 0 recovers the plain single-reservoir expression.
    """
    if I <= 0:
        raise ValueError("mean phonon number I must be positive")
    gt = gamma + gamma_e
    num = 2.0 * g**2 / gt + 8.0 * g**4 * I / (gamma * gt**2)
    den = I * (1.0 + 8.0 * g**2 * I / (gamma * gt))
    return num / den


def total_phase_diffusion(p: MfParams, I: float) -> float:
    """Sum of heating-ion (dephasing-modified) and cooling-ion contributions.

    The cooling ion enters through the unmodified expression with its own
    coupling and decay rate; summing the two single-ion coefficients is the
    documented composition rule.
    """
    return hl_phase_diffusion(p.g_h, p.gamma_h, p.gamma_e, I) + hl_phase_diffusion(
        p.g_c, p.gamma_c, 0.0, I
    )

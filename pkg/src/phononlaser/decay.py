"""Engineered decay of the heating ion's 4-level repumping scheme.

Level scheme: qubit states |0>, |1>, auxiliary ground state |2> and a
short-lived excited state |e>.  Repumper 1 drives |1>->|e| at Rabi frequency
Omega1 (detuned by Delta1), repumper 2 drives |2>->|e| resonantly at Omega2;
|e> decays into |0>, |1>, |2> at branching rates gamma0/1/2.  The net effect
is an engineered decay |1>->|0> whose effective exponential rate is what the
two-level reduction uses as gamma_h.

All quantities in this module are in atomic-physics units: rates in 1/us,
Rabi frequencies and detunings in rad/us.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

__all__ = [
    "RateParams",
    "rate_equation_evolve",
    "omega1_from_tau1",
    "omega2_from_tau2",
    "tau1_from_omega1",
    "tau2_from_omega2",
    "effective_gamma_h",
    "carrier_signal",
]


class CalibrationError(RuntimeError):
    """Raised when a decay-calibration fit does not converge."""


@dataclass(frozen=True)
class RateParams:
    """Excited-state branching rates and repumper strengths (1/us, rad/us)."""

    gamma0: float
    gamma1: float
    gamma2: float
    Omega1: float = 0.0
    Omega2: float = 0.0
    Delta: float = 0.0

    def __post_init__(self):
        if min(self.gamma0, self.gamma1, self.gamma2) < 0:
            raise ValueError("branching rates must be nonnegative")

    @property
    def gamma(self) -> float:
        return self.gamma0 + self.gamma1 + self.gamma2

    @property
    def b1(self) -> float:
        """Repumper-1 excitation rate |1>->|e>: gamma Omega1^2/(gamma^2+4 Delta^2)."""
        return self.gamma * self.Omega1**2 / (self.gamma**2 + 4 * self.Delta**2)

    @property
    def b2(self) -> float:
        """Repumper-2 excitation rate |2>->|e> (resonant)."""
        return self.Omega2**2 / self.gamma

    @property
    def tau1(self) -> float:
        """Effective |1>->{|0>,|2>} pumping time with only repumper 1 on."""
        return self.gamma / (self.b1 * (self.gamma0 + self.gamma2))

    @property
    def tau2(self) -> float:
        return self.gamma / (self.b2 * (self.gamma0 + self.gamma1))


def omega1_from_tau1(tau1: float, Delta: float, gamma0: float, gamma1: float, gamma2: float) -> float:
    """Repumper-1 Rabi frequency reproducing a measured pumping time tau1.

    Omega1 = sqrt[(1/tau1) (gamma^2 + 4 Delta^2)/(gamma0 + gamma2)].
    """
    gamma = gamma0 + gamma1 + gamma2
    den = gamma0 + gamma2
    if tau1 <= 0 or den <= 0:
        raise ZeroDivisionError("tau1 and gamma0+gamma2 must be positive")
    return np.sqrt((gamma**2 + 4 * Delta**2) / (tau1 * den))


def omega2_from_tau2(tau2: float, gamma0: float, gamma1: float, gamma2: float) -> float:
    """Repumper-2 Rabi frequency: Omega2 = sqrt[(1/tau2) gamma^2/(gamma0 + gamma1)]."""
    gamma = gamma0 + gamma1 + gamma2
    den = gamma0 + gamma1
    if tau2 <= 0 or den <= 0:
        raise ZeroDivisionError("tau2 and gamma0+gamma1 must be positive")
    return np.sqrt(gamma**2 / (tau2 * den))


def tau1_from_omega1(Omega1: float, Delta: float, gamma0: float, gamma1: float, gamma2: float) -> float:
    """Forward map Omega1 -> b -> tau1 (inverse of omega1_from_tau1)."""
    return RateParams(gamma0, gamma1, gamma2, Omega1=Omega1, Delta=Delta).tau1


def tau2_from_omega2(Omega2: float, gamma0: float, gamma1: float, gamma2: float) -> float:
    return RateParams(gamma0, gamma1, gamma2, Omega2=Omega2).tau2


def rate_equation_evolve(p0, params: RateParams, t_grid) -> np.ndarray:
    """Integrate the 4-level population rate equations.

        dP0/dt = gamma0 Pe
        dP1/dt = -b1 P1 + gamma1 Pe
        dP2/dt = -b2 P2 + gamma2 Pe
        dPe/dt =  b1 P1 + b2 P2 - gamma Pe

    Returns populations with shape (len(t_grid), 4); total population is
    conserved to 1e-9 over the integration.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (4,):
        raise ValueError("p0 must be the four populations (P0, P1, P2, Pe)")
    if np.any(p0 < 0):
        raise ValueError("populations must be nonnegative")
    if abs(p0.sum() - 1.0) > 1e-9:
        raise ValueError("populations must sum to 1")
    t_grid = np.asarray(t_grid, dtype=float)
    b1, b2, g0, g1, g2, g = params.b1, params.b2, params.gamma0, params.gamma1, params.gamma2, params.gamma
    mat = np.array(
        [
            [0.0, 0.0, 0.0, g0],
            [0.0, -b1, 0.0, g1],
            [0.0, 0.0, -b2, g2],
            [0.0, b1, b2, -g],
        ]
    )
    sol = solve_ivp(
        lambda _t, p: mat @ p,
        (t_grid[0], t_grid[-1]),
        p0,
        t_eval=t_grid,
        method="LSODA",
        rtol=1e-11,
        atol=1e-13,
    )
    if not sol.success:
        raise CalibrationError(f"rate-equation integration failed: {sol.message}")
    return sol.y.T


def effective_gamma_h(params: RateParams, t_max: float | None = None) -> float:
    """Single-exponential rate of the |1>->|0> transient with both repumpers on.

    Starting from P1 = 1, fits P0(t) = Pinf (1 - exp(-rate t)) and returns the
    rate in 1/us.  With both repumpers on all population ends in |0>, so Pinf
    is fitted but expected near 1.
    """
    if params.Omega1 == 0 and params.Omega2 == 0:
        return 0.0
    if params.b1 == 0:
        raise CalibrationError("repumper 1 off: |1> population never leaves")
    # timescale estimate from the repumper-1 bottleneck
    scale = params.tau1 + (params.tau2 if params.b2 > 0 else 0.0)
    t_max = t_max if t_max is not None else 8.0 * scale
    t = np.linspace(0.0, t_max, 400)
    pops = rate_equation_evolve(np.array([0.0, 1.0, 0.0, 0.0]), params, t)
    p0 = pops[:, 0]

    def model(tt, pinf, rate):
        return pinf * (1.0 - np.exp(-rate * tt))

    try:
        popt, _ = curve_fit(model, t, p0, p0=(1.0, 1.0 / scale), maxfev=10000)
    except RuntimeError as exc:
        raise CalibrationError(f"effective-rate fit did not converge: {exc}") from exc
    pinf, rate = popt
    if rate <= 0 or not np.isfinite(rate):
        raise CalibrationError(f"effective-rate fit returned unphysical rate {rate}")
    return float(rate)


def carrier_signal(pn, Omega0: float, eta: float, t_grid) -> np.ndarray:
    """Carrier Rabi oscillation averaged over a phonon distribution.

    P_up(t) = sum_n pn sin^2(Omega_n t / 2) with the Debye-Waller carrier
    frequency Omega_n = Omega0 exp(-eta^2/2) L_n(eta^2).
    """
    pn = np.asarray(pn, dtype=float)
    if abs(pn.sum() - 1.0) > 1e-6:
        raise ValueError("phonon distribution must be normalized")
    t_grid = np.asarray(t_grid, dtype=float)
    n = np.arange(len(pn))
    from scipy.special import eval_laguerre

    omega_n = Omega0 * np.exp(-(eta**2) / 2.0) * eval_laguerre(n, eta**2)
    return np.sin(np.outer(t_grid, omega_n) / 2.0) ** 2 @ pn

"""Physical model of the two-ion phonon laser.

Hamiltonian: a red-sideband (Jaynes-Cummings) coupling on the cooling ion, a
blue-sideband (anti-Jaynes-Cummings) coupling on the heating ion, optionally a
resonant tickle drive, and, in 4-level mode, the repumper couplings of the
heating ion.  Jump operators implement spontaneous decay of both ions (plus
the |1><1| dephasing operator that approximates the 4-level scheme in 2-level
mode).

Internal units: rad/ms and 1/ms.  The `four_level` block is specified in
rad/us and 1/us (as quoted for the atomic physics) and converted here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import eval_genlaguerre

from .decay import RateParams
from .operators import SpaceLayout, destroy, embed, spin_op, transition

__all__ = [
    "FourLevelParams",
    "TickleParams",
    "SystemSpec",
    "build_hamiltonian",
    "build_jump_ops",
    "lamb_dicke_matrix_elements",
    "charge_vector",
]

US_TO_MS = 1.0e3  # 1/us -> 1/ms, rad/us -> rad/ms


class SpecError(ValueError):
    """Raised for inconsistent SystemSpec configurations."""


@dataclass(frozen=True)
class FourLevelParams:
    """Repumping-scheme parameters of the heating ion (rad/us, 1/us).

    ``Delta1`` is the signed detuning of repumper 1 from the |1>->|e>
    transition (laser minus atom; red detuning is negative).  With
    ``stark_compensated`` the sideband drive is referenced to the
    light-shifted qubit transition, as calibrated in practice.
    """

    Omega1: float
    Omega2: float
    Delta1: float
    gamma0: float
    gamma1: float
    gamma2: float
    stark_compensated: bool = True

    def rate_params(self) -> RateParams:
        return RateParams(
            self.gamma0, self.gamma1, self.gamma2,
            Omega1=self.Omega1, Omega2=self.Omega2, Delta=self.Delta1,
        )

    @property
    def stark_shift_1(self) -> float:
        """Second-order light shift of |1> from repumper 1, rad/us."""
        g = self.gamma0 + self.gamma1 + self.gamma2
        return self.Omega1**2 * self.Delta1 / (g**2 + 4 * self.Delta1**2)


@dataclass(frozen=True)
class TickleParams:
    """Resonant classical drive g_t(a e^{i phi} + a^dag e^{-i phi})."""

    enabled: bool = False
    g_t: float = 0.0  # rad/ms
    phase: float = 0.0  # rad


@dataclass(frozen=True)
class SystemSpec:
    """Full physical parameter set of a run (couplings in rad/ms, rates 1/ms)."""

    g_h: float
    g_c: float
    gamma_h: float
    gamma_c: float
    gamma_e: float = 0.0
    be_levels: int = 2
    four_level: FourLevelParams | None = None
    tickle: TickleParams = field(default_factory=TickleParams)
    eta_h: float = 0.15
    eta_c: float = 0.05
    nonlinear_ld: bool = True
    fock_cutoff: int = 60
    omega_m: float = 0.0  # trap frequency metadata (rad/ms); never enters matrices

    def __post_init__(self):
        for name in ("g_h", "g_c", "gamma_h", "gamma_c", "gamma_e"):
            if getattr(self, name) < 0:
                raise SpecError(f"{name} must be nonnegative")
        if self.be_levels not in (2, 4):
            raise SpecError(f"be_levels must be 2 or 4, got {self.be_levels}")
        if self.be_levels == 4:
            if self.four_level is None:
                raise SpecError("be_levels=4 requires a four_level parameter block")
            if self.gamma_e > 0:
                raise SpecError(
                    "gamma_e > 0 with be_levels=4 double-counts the repumper dephasing"
                )
        if not 0 <= self.eta_h < 1 or not 0 <= self.eta_c < 1:
            raise SpecError("Lamb-Dicke parameters must lie in [0, 1)")

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.fock_cutoff, dim_h=self.be_levels, dim_c=2)

    def with_fock_cutoff(self, N: int) -> "SystemSpec":
        return replace(self, fock_cutoff=N)


def lamb_dicke_matrix_elements(eta: float, N: int, order: str = "full") -> np.ndarray:
    """Sideband coupling operator including Lamb-Dicke nonlinearity.

    order='first' returns the plain annihilation operator (elements
    sqrt(n+1)); order='full' returns the operator with

        <n| . |n+1> = exp(-eta^2/2) L_n^1(eta^2) / sqrt(n+1),

    the standard first-sideband matrix element normalized so that it reduces
    to sqrt(n+1) as eta -> 0 (the coupling prefactor g = eta * Omega is kept
    outside).
    """
    if not 0 <= eta < 1:
        raise ValueError(f"Lamb-Dicke parameter must lie in [0, 1), got {eta}")
    if order == "first":
        return destroy(N)
    if order != "full":
        raise ValueError(f"order must be 'first' or 'full', got {order!r}")
    a = np.zeros((N, N), dtype=complex)
    n = np.arange(N - 1)
    a[n, n + 1] = np.exp(-(eta**2) / 2.0) * eval_genlaguerre(n, 1, eta**2) / np.sqrt(n + 1.0)
    return a


def _heating_sideband(spec: SystemSpec) -> np.ndarray:
    order = "full" if spec.nonlinear_ld else "first"
    return lamb_dicke_matrix_elements(spec.eta_h, spec.fock_cutoff, order)


def build_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """Assemble the joint Hamiltonian (rad/ms); exactly Hermitian by construction.

    The cooling sideband always uses the first-order Lamb-Dicke coupling; the
    heating sideband uses the full matrix elements unless ``nonlinear_ld`` is
    off.  In 4-level mode the frame rotates with the (optionally
    Stark-compensated) sideband drive and the resonant repumper 2, which puts
    -delta_s on |1> and -(Delta1 + delta_s) on |2> and |e>.
    """
    layout = spec.layout
    N = spec.fock_cutoff
    a_c = destroy(N)
    a_h = _heating_sideband(spec)
    sm_c = spin_op("minus", 2, (0, 1))
    sp_c = spin_op("plus", 2, (0, 1))
    sm_h = spin_op("minus", layout.dim_h, (0, 1))
    sp_h = spin_op("plus", layout.dim_h, (0, 1))

    def joint(m_op, h_op, c_op):
        return np.kron(np.kron(m_op, h_op), c_op)

    eye_m = np.eye(N, dtype=complex)
    eye_h = np.eye(layout.dim_h, dtype=complex)
    eye_c = np.eye(2, dtype=complex)

    H = spec.g_c * (joint(a_c.conj().T, eye_h, sm_c) + joint(a_c, eye_h, sp_c))
    H += spec.g_h * (joint(a_h.conj().T, sp_h, eye_c) + joint(a_h, sm_h, eye_c))

    if spec.tickle.enabled and spec.tickle.g_t != 0.0:
        ph = np.exp(1j * spec.tickle.phase)
        H += spec.tickle.g_t * joint(ph * a_c + ph.conjugate() * a_c.conj().T, eye_h, eye_c)

    if spec.be_levels == 4:
        fl = spec.four_level
        delta_s = fl.stark_shift_1 if fl.stark_compensated else 0.0
        h_int = np.zeros((4, 4), dtype=complex)
        h_int += fl.Omega1 / 2.0 * (transition(4, 3, 1) + transition(4, 1, 3))
        h_int += fl.Omega2 / 2.0 * (transition(4, 3, 2) + transition(4, 2, 3))
        h_int -= delta_s * transition(4, 1, 1)
        h_int -= (fl.Delta1 + delta_s) * (transition(4, 2, 2) + transition(4, 3, 3))
        H += US_TO_MS * joint(eye_m, h_int, eye_c)

    return H


def build_jump_ops(spec: SystemSpec) -> list[np.ndarray]:
    """Jump operators on the joint space (rates inside as sqrt, 1/ms).

    2-level mode: sqrt(gamma_h) sigma-_h and sqrt(gamma_c) sigma-_c, plus
    sqrt(gamma_e)|1><1|_h when gamma_e > 0.  4-level mode: the three
    spontaneous branches out of |e> plus the cooling decay.
    """
    layout = spec.layout
    jumps: list[np.ndarray] = []
    if spec.be_levels == 2:
        if spec.gamma_h > 0:
            jumps.append(np.sqrt(spec.gamma_h) * embed(spin_op("minus", 2, (0, 1)), 1, layout))
        if spec.gamma_e > 0:
            jumps.append(np.sqrt(spec.gamma_e) * embed(spin_op("proj_1", 2, (0, 1)), 1, layout))
    else:
        fl = spec.four_level
        for target, rate in ((0, fl.gamma0), (1, fl.gamma1), (2, fl.gamma2)):
            if rate > 0:
                jumps.append(
                    np.sqrt(US_TO_MS * rate) * embed(transition(4, target, 3), 1, layout)
                )
    if spec.gamma_c > 0:
        jumps.append(np.sqrt(spec.gamma_c) * embed(spin_op("minus", 2, (0, 1)), 2, layout))
    return jumps


def charge_vector(spec: SystemSpec) -> np.ndarray:
    """Conserved excitation charge K per joint basis state.

    K = n + s_c - q_h with s_c the cooling-ion excitation and q_h = 1 for the
    heating-ion levels {|1>, |2>, |e>}.  The tickle-free Hamiltonian commutes
    with K and every jump operator carries definite charge, so the Liouvillian
    is block diagonal in the coherence charge k = K_row - K_col; solvers use
    this to restrict to the relevant block (see lindblad.sector_indices).
    """
    N, dim_h, dim_c = spec.layout.dims
    n = np.arange(N)
    q_h = np.array([0] + [1] * (dim_h - 1))
    s_c = np.arange(dim_c)
    K = (
        n[:, None, None] - q_h[None, :, None] + s_c[None, None, :]
    )
    return K.reshape(-1)

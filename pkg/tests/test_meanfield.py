import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phononlaser.meanfield import (
    MeanFieldState,
    MfParams,
    Phase,
    PhaseBoundaryError,
    adiabatic_rhs_A,
    classify_phase,
    cumulant_rhs,
    hl_phase_diffusion,
    integrate_meanfield,
    steady_n,
    total_phase_diffusion,
)

from refpoints import GAMMA_E, GAMMA_H_EFF, POINT_MAIN, POINT_SCAN, TWO_PI

MAIN_MF = MfParams(
    g_h=TWO_PI * POINT_MAIN["g_h_khz"],
    g_c=TWO_PI * POINT_MAIN["g_c_khz"],
    gamma_h=GAMMA_H_EFF,
    gamma_c=POINT_MAIN["gamma_c"],
    gamma_e=GAMMA_E,
)


def scan_params(g_c_khz, gamma_c=POINT_SCAN["gamma_c"], gamma_e=GAMMA_E):
    return MfParams(
        g_h=TWO_PI * POINT_SCAN["g_h_khz"], g_c=TWO_PI * g_c_khz,
        gamma_h=GAMMA_H_EFF, gamma_c=gamma_c, gamma_e=gamma_e,
    )


def random_state(rng) -> MeanFieldState:
    return MeanFieldState(
        A=complex(rng.normal(), rng.normal()),
        S_c=0.3 * complex(rng.normal(), rng.normal()),
        S_h=0.3 * complex(rng.normal(), rng.normal()),
        D_c=rng.uniform(-1, 1),
        D_h=rng.uniform(-1, 1),
    )


class TestCumulantRhs:
    def test_dark_fixed_point(self):
        state = MeanFieldState(A=0.0, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0)
        d = cumulant_rhs(state, MAIN_MF)
        assert d.A == 0 and d.S_c == 0 and d.S_h == 0
        assert d.D_c == 0 and d.D_h == 0

    def test_decoupled_spin_decay(self):
        p = MfParams(g_h=0.0, g_c=0.0, gamma_h=2.0, gamma_c=3.0, gamma_e=0.5)
        state = MeanFieldState(A=0.0, S_c=0.4 + 0.1j, S_h=0.2j, D_c=0.5, D_h=-0.2)
        d = cumulant_rhs(state, p)
        assert d.S_c == pytest.approx(-0.5 * 3.0 * state.S_c)
        assert d.S_h == pytest.approx(-0.5 * (2.0 + 0.5) * state.S_h)
        assert d.D_c == pytest.approx(-3.0 * (state.D_c + 1))
        assert d.D_h == pytest.approx(-2.0 * (state.D_h + 1))

    def test_finite_difference_jacobian(self, rng):
        # oracle: directional finite difference of the packed flow field
        p = MAIN_MF
        state = random_state(rng)
        y0 = state.as_array()
        direction = rng.normal(size=8)
        direction /= np.linalg.norm(direction)
        eps = 1e-6

        def flow(y):
            return cumulant_rhs(MeanFieldState.from_array(y), p).as_array()

        fd = (flow(y0 + eps * direction) - flow(y0 - eps * direction)) / (2 * eps)
        exact = (flow(y0 + 1e-9 * direction) - flow(y0 - 1e-9 * direction)) / 2e-9
        assert np.linalg.norm(fd - exact) / max(np.linalg.norm(exact), 1e-12) < 1e-5


class TestAdiabaticFlow:
    def test_zero_amplitude_fixed(self):
        assert adiabatic_rhs_A(0.0, MAIN_MF) == 0.0

    @given(st.floats(min_value=0.0, max_value=2 * np.pi))
    def test_phase_covariance(self, phi):
        A = 0.8 + 0.3j
        rotated = adiabatic_rhs_A(A * np.exp(1j * phi), MAIN_MF)
        assert rotated == pytest.approx(adiabatic_rhs_A(A, MAIN_MF) * np.exp(1j * phi), rel=1e-12)

    def test_marginal_sign_at_balanced_gain(self):
        # kappa_h = kappa_c: the sign of dA/dt / A follows (s_c - s_h)|A|^2
        p = MfParams(g_h=10.0, g_c=10.0, gamma_h=50.0, gamma_c=50.0 * (10.0 / 10.0) ** 2)
        # equal couplings and rates -> s_h = s_c, flow identically zero
        assert adiabatic_rhs_A(0.1, p) == pytest.approx(0.0, abs=1e-15)
        p2 = MfParams(g_h=10.0, g_c=20.0, gamma_h=50.0, gamma_c=200.0)
        assert p2.kappa_h == pytest.approx(p2.kappa_c)
        sign_expected = np.sign(p2.s_c - p2.s_h)
        flow = (adiabatic_rhs_A(0.1, p2) / 0.1).real
        assert np.sign(flow) == sign_expected

    def test_matches_cumulant_amplitude(self):
        # full cumulant integration tracks the adiabatically eliminated flow
        # when spins relax much faster than the mode (gamma/g ~ 15)
        p = scan_params(4.29)
        t = np.linspace(0.0, 4.0, 300)
        state0 = MeanFieldState(A=0.1, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0)
        states, runaway = integrate_meanfield(state0, p, t)
        assert not runaway
        from scipy.integrate import solve_ivp

        def rhs(_t, y):
            dA = adiabatic_rhs_A(complex(y[0], y[1]), p)
            return [dA.real, dA.imag]

        sol = solve_ivp(rhs, (0, 4.0), [0.1, 0.0], t_eval=t, rtol=1e-10, atol=1e-12)
        amp_cum = np.array([abs(s.A) for s in states])
        amp_adi = np.hypot(sol.y[0], sol.y[1])
        mask = t > 1.0
        rel = np.abs(amp_cum[mask] - amp_adi[mask]) / amp_adi[mask]
        assert rel.max() < 0.05


class TestSteadyOccupation:
    def test_threshold_continuity(self):
        # approaching the gain/loss balance from the lasing side sends <n> to 0
        kappa_c = MAIN_MF.kappa_c
        values = []
        for eps in (1e-2, 1e-3, 1e-4):
            g_h = np.sqrt(kappa_c * (1 + eps) * (GAMMA_H_EFF + GAMMA_E))
            p = MfParams(g_h=g_h, g_c=MAIN_MF.g_c, gamma_h=GAMMA_H_EFF,
                         gamma_c=POINT_MAIN["gamma_c"], gamma_e=GAMMA_E)
            assert p.kappa_h > p.kappa_c
            values.append(steady_n(p))
        assert all(v > 0 for v in values)
        assert values[0] > values[1] > values[2]
        assert values[-1] < 0.05

    def test_reference_values(self):
        # frozen oracle: direct evaluation of the closed-form expression
        g_h2 = (TWO_PI * 4.59) ** 2
        g_c2 = (TWO_PI * 4.24) ** 2
        gc, gh, ge = 435.0, GAMMA_H_EFF, GAMMA_E
        with_deph = gc * gh * (gc * g_h2 - (gh + ge) * g_c2) / (8 * g_c2 * g_h2 * (gc - gh))
        without = gc * gh * (gc * g_h2 - gh * g_c2) / (8 * g_c2 * g_h2 * (gc - gh))
        assert with_deph == pytest.approx(4.15100, abs=2e-4)
        assert without == pytest.approx(5.06910, abs=2e-4)
        assert steady_n(MAIN_MF) == pytest.approx(with_deph, rel=1e-14)
        p0 = MfParams(g_h=MAIN_MF.g_h, g_c=MAIN_MF.g_c, gamma_h=GAMMA_H_EFF,
                      gamma_c=435.0, gamma_e=0.0)
        assert steady_n(p0) == pytest.approx(without, rel=1e-14)

    def test_dark_returns_zero(self):
        assert steady_n(scan_params(12.0)) == 0.0

    def test_heating_returns_flag(self):
        p = scan_params(2.11, gamma_c=50.0)
        assert steady_n(p) is Phase.HEATING

    def test_equal_decay_rates_singular(self):
        p = MfParams(g_h=30.0, g_c=10.0, gamma_h=100.0, gamma_c=100.0)
        with pytest.raises(PhaseBoundaryError):
            steady_n(p)


class TestClassifyPhase:
    def test_quadrants(self):
        assert classify_phase(scan_params(12.0)) is Phase.DARK
        assert classify_phase(scan_params(4.29)) is Phase.LASING
        assert classify_phase(scan_params(2.11, gamma_c=50.0)) is Phase.HEATING
        assert classify_phase(scan_params(12.0, gamma_c=50.0)) is Phase.RUNAWAY_CORNER

    def test_boundary_flagged(self):
        p = MfParams(g_h=10.0, g_c=10.0, gamma_h=50.0, gamma_c=50.0)
        assert classify_phase(p) is Phase.BOUNDARY

    @given(st.sampled_from([0.5, 2.0]))
    def test_scale_invariance(self, lam):
        # rates scale by lambda, couplings by sqrt(lambda): labels invariant
        for base in (scan_params(12.0), scan_params(4.29), scan_params(2.11, gamma_c=50.0),
                     scan_params(12.0, gamma_c=50.0)):
            scaled = MfParams(
                g_h=base.g_h * np.sqrt(lam), g_c=base.g_c * np.sqrt(lam),
                gamma_h=base.gamma_h * lam, gamma_c=base.gamma_c * lam,
                gamma_e=base.gamma_e * lam,
            )
            assert classify_phase(scaled) is classify_phase(base)


class TestIntegration:
    def test_dark_phase_amplitude_dies(self):
        p = scan_params(12.0)
        states, runaway = integrate_meanfield(
            MeanFieldState(A=0.05, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0), p,
            np.linspace(0, 5, 100),
        )
        assert not runaway
        assert abs(states[-1].A) < 1e-4

    def test_lasing_phase_reaches_steady_occupation(self):
        p = scan_params(4.29)
        states, runaway = integrate_meanfield(
            MeanFieldState(A=0.1, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0), p,
            np.linspace(0, 25, 400),
        )
        assert not runaway
        assert abs(states[-1].A) ** 2 == pytest.approx(steady_n(p), rel=0.01)

    def test_heating_phase_flagged(self):
        p = scan_params(2.11, gamma_c=50.0)
        states, runaway = integrate_meanfield(
            MeanFieldState(A=0.5, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0), p,
            np.linspace(0, 400, 800),
        )
        assert runaway
        assert abs(states[-1].A) ** 2 <= 1.2e3

    def test_amplitude_matches_lindblad_occupation(self):
        # spins relax ~20x faster than the mode: the cumulant amplitude
        # squared agrees with the full solver's occupation within 10%
        from phononlaser.tasks import solve_steady
        from refpoints import spec_twolevel, POINT_SCAN

        p = scan_params(4.29)
        states, _ = integrate_meanfield(
            MeanFieldState(A=0.1, S_c=0.0, S_h=0.0, D_c=-1.0, D_h=-1.0), p,
            np.linspace(0, 40, 200),
        )
        amp_sq = abs(states[-1].A) ** 2
        spec = spec_twolevel(POINT_SCAN, N=40, dephasing=True, g_c_khz=4.29)
        _, _, rec = solve_steady(spec)
        assert abs(amp_sq - rec["nbar"]) / rec["nbar"] < 0.10


class TestPhaseDiffusion:
    @given(
        st.floats(min_value=1.0, max_value=50.0),
        st.floats(min_value=20.0, max_value=500.0),
        st.floats(min_value=0.5, max_value=20.0),
    )
    def test_reduces_without_dephasing(self, g, gamma, I):
        plain = (2 * g**2 / gamma + 8 * g**4 * I / gamma**3) / (I * (1 + 8 * g**2 * I / gamma**2))
        assert hl_phase_diffusion(g, gamma, 0.0, I) == pytest.approx(plain, rel=1e-14)

    @given(st.floats(min_value=0.5, max_value=10.0))
    def test_monotone_decreasing_in_intensity(self, I):
        lo = hl_phase_diffusion(MAIN_MF.g_h, GAMMA_H_EFF, GAMMA_E, I)
        hi = hl_phase_diffusion(MAIN_MF.g_h, GAMMA_H_EFF, GAMMA_E, I * 1.5)
        assert hi < lo

    def test_invalid_intensity(self):
        with pytest.raises(ValueError):
            hl_phase_diffusion(1.0, 1.0, 0.0, 0.0)

    def test_total_reference_value(self):
        # frozen oracle: sum of heating (dephasing-modified) and cooling
        # (plain) contributions evaluated from the printed expressions
        g_h, g_c = MAIN_MF.g_h, MAIN_MF.g_c
        gh, ge, gc = GAMMA_H_EFF, GAMMA_E, 435.0
        I = 4.4
        gt = gh + ge
        heat = (2 * g_h**2 / gt + 8 * g_h**4 * I / (gh * gt**2)) / (
            I * (1 + 8 * g_h**2 * I / (gh * gt))
        )
        cool = (2 * g_c**2 / gc + 8 * g_c**4 * I / gc**3) / (I * (1 + 8 * g_c**2 * I / gc**2))
        assert heat + cool == pytest.approx(2.3162, abs=2e-4)
        assert total_phase_diffusion(MAIN_MF, I) == pytest.approx(heat + cool, rel=1e-14)

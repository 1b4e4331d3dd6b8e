import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phononlaser.decay import (
    CalibrationError,
    RateParams,
    carrier_signal,
    effective_gamma_h,
    omega1_from_tau1,
    omega2_from_tau2,
    rate_equation_evolve,
    tau1_from_omega1,
    tau2_from_omega2,
)

from refpoints import DELTA1, GAMMA0, GAMMA1, GAMMA2

GAMMA = GAMMA0 + GAMMA1 + GAMMA2


def calibrated_params(pump1_per_ms=91.0, pump2_per_ms=344.0) -> RateParams:
    return RateParams(
        GAMMA0, GAMMA1, GAMMA2,
        Omega1=omega1_from_tau1(1e3 / pump1_per_ms, DELTA1, GAMMA0, GAMMA1, GAMMA2),
        Omega2=omega2_from_tau2(1e3 / pump2_per_ms, GAMMA0, GAMMA1, GAMMA2),
        Delta=DELTA1,
    )


class TestRateEquations:
    def test_no_pumping_is_constant(self):
        params = RateParams(GAMMA0, GAMMA1, GAMMA2)
        pops = rate_equation_evolve([0.0, 1.0, 0.0, 0.0], params, np.linspace(0, 10, 11))
        assert np.abs(pops - pops[0]).max() < 1e-12

    def test_population_conserved(self):
        pops = rate_equation_evolve(
            [0.0, 1.0, 0.0, 0.0], calibrated_params(), np.linspace(0, 100, 201)
        )
        assert np.abs(pops.sum(axis=1) - 1.0).max() < 1e-9

    def test_adiabatic_decay_law(self):
        # weak repumper: P1(t) follows exp(-b (gamma0+gamma2) t / gamma)
        params = RateParams(GAMMA0, GAMMA1, GAMMA2, Omega1=1.0, Delta=0.0)
        t = np.linspace(0, 200, 60)
        pops = rate_equation_evolve([0.0, 1.0, 0.0, 0.0], params, t)
        expected = np.exp(-params.b1 * (GAMMA0 + GAMMA2) / GAMMA * t)
        assert np.abs(pops[:, 1] - expected).max() < 2e-3

    def test_branching_saturation_repumper_one(self):
        # only repumper 1: the ground state saturates at gamma0/(gamma0+gamma2)
        params = RateParams(GAMMA0, GAMMA1, GAMMA2, Omega1=6.0, Delta=DELTA1)
        pops = rate_equation_evolve([0.0, 1.0, 0.0, 0.0], params, np.linspace(0, 2000, 50))
        assert abs(pops[-1, 0] - GAMMA0 / (GAMMA0 + GAMMA2)) < 5e-4
        assert abs(pops[-1, 0] - 0.5747) < 5e-3

    def test_branching_saturation_repumper_two(self):
        params = RateParams(GAMMA0, GAMMA1, GAMMA2, Omega2=7.0)
        pops = rate_equation_evolve([0.0, 0.0, 1.0, 0.0], params, np.linspace(0, 2000, 50))
        assert abs(pops[-1, 0] - GAMMA0 / (GAMMA0 + GAMMA1)) < 5e-4
        assert abs(pops[-1, 0] - 0.4425) < 5e-3

    def test_input_validation(self):
        params = calibrated_params()
        with pytest.raises(ValueError):
            rate_equation_evolve([-0.1, 1.1, 0.0, 0.0], params, [0, 1])
        with pytest.raises(ValueError):
            rate_equation_evolve([0.3, 0.3, 0.0, 0.0], params, [0, 1])


class TestRepumperStrengths:
    def test_unit_parameter_identity(self):
        # gamma = 1, gamma0+gamma2 = 1, tau = 1, resonant -> Omega = 1
        assert omega1_from_tau1(1.0, 0.0, 0.5, 0.0, 0.5) == pytest.approx(1.0)
        assert omega2_from_tau2(1.0, 0.5, 0.5, 0.0) == pytest.approx(1.0)

    def test_excitation_rate_relation(self):
        # 1/tau1 = b (gamma0+gamma2)/gamma holds to machine precision
        p = calibrated_params()
        assert 1.0 / p.tau1 == pytest.approx(p.b1 * (GAMMA0 + GAMMA2) / GAMMA, rel=1e-14)

    @given(
        st.floats(min_value=0.5, max_value=50.0),
        st.floats(min_value=-80.0, max_value=80.0),
    )
    def test_round_trip_repumper_one(self, tau1, delta):
        om = omega1_from_tau1(tau1, delta, GAMMA0, GAMMA1, GAMMA2)
        assert tau1_from_omega1(om, delta, GAMMA0, GAMMA1, GAMMA2) == pytest.approx(tau1, rel=1e-12)

    @given(st.floats(min_value=0.5, max_value=50.0))
    def test_round_trip_repumper_two(self, tau2):
        om = omega2_from_tau2(tau2, GAMMA0, GAMMA1, GAMMA2)
        assert tau2_from_omega2(om, GAMMA0, GAMMA1, GAMMA2) == pytest.approx(tau2, rel=1e-12)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            omega1_from_tau1(0.0, 0.0, GAMMA0, GAMMA1, GAMMA2)
        with pytest.raises(ZeroDivisionError):
            omega2_from_tau2(1.0, 0.0, 0.0, 1.0)


class TestEffectiveRate:
    def test_calibrated_rate(self):
        rate = effective_gamma_h(calibrated_params())
        assert abs(rate - 1.0 / 15.5) / (1.0 / 15.5) < 0.10

    def test_off_means_zero(self):
        assert effective_gamma_h(RateParams(GAMMA0, GAMMA1, GAMMA2)) == 0.0

    def test_pump_only_through_aux_state_fails(self):
        with pytest.raises(CalibrationError):
            effective_gamma_h(RateParams(GAMMA0, GAMMA1, GAMMA2, Omega2=5.0))

    def test_strong_drive_saturates_at_branching_limit(self):
        # rate-equation oracle: the fitted rate saturates, bounded by the
        # decay out of the excited state into the absorbing levels
        base = calibrated_params()
        rates = [
            effective_gamma_h(
                RateParams(GAMMA0, GAMMA1, GAMMA2, Omega1=s * base.Omega1,
                           Omega2=s * base.Omega2, Delta=DELTA1)
            )
            for s in (1.0, 4.0, 16.0)
        ]
        assert rates[0] < rates[1] < rates[2]
        assert rates[2] / rates[1] < rates[1] / rates[0]  # saturating growth
        assert rates[2] < GAMMA0 + GAMMA2


class TestCarrierSignal:
    def test_ground_state_pure_rabi(self):
        t = np.linspace(0, 1, 50)
        pn = np.zeros(5)
        pn[0] = 1.0
        sig = carrier_signal(pn, 10.0, 0.0, t)
        assert np.abs(sig - np.sin(10.0 * t / 2) ** 2).max() < 1e-12

    def test_broader_distribution_decays_faster(self):
        # direct-summation oracle: larger spread of Rabi frequencies lowers
        # the late-time contrast envelope
        t = np.linspace(0, 6.0, 400)
        omega0, eta = 10.0, 0.3
        narrow = np.zeros(40)
        narrow[10] = 1.0
        n = np.arange(40)
        broad = np.exp(-0.5 * (n - 10) ** 2 / 16.0)
        broad /= broad.sum()
        sig_n = carrier_signal(narrow, omega0, eta, t)
        sig_b = carrier_signal(broad, omega0, eta, t)
        late = t > 3.0
        contrast_n = sig_n[late].max() - sig_n[late].min()
        contrast_b = sig_b[late].max() - sig_b[late].min()
        assert contrast_b < contrast_n

    def test_thermal_vs_coherent_distinguishable(self):
        # same mean occupation, different envelopes
        nbar, N = 5.0, 60
        n = np.arange(N)
        from scipy.special import factorial

        coherent = np.exp(-nbar) * nbar**n / factorial(n)
        thermal = (nbar / (1 + nbar)) ** n / (1 + nbar)
        coherent /= coherent.sum()
        thermal /= thermal.sum()
        t = np.linspace(0, 4.0, 400)
        sig_c = carrier_signal(coherent, 12.0, 0.15, t)
        sig_t = carrier_signal(thermal, 12.0, 0.15, t)
        assert np.abs(sig_c - sig_t).max() > 0.05

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            carrier_signal([0.5, 0.2], 1.0, 0.1, [0.0, 1.0])

import numpy as np
import pytest

from phononlaser.lindblad import (
    DegenerateSteadyStateError,
    SolverError,
    TruncationWarning,
    evolve,
    expectation,
    floor_positivity,
    hermitize,
    is_block_closed,
    liouvillian,
    phonon_distribution,
    sector_block,
    sector_indices,
    steady_state,
    unvec,
    vec,
)
from phononlaser.model import SystemSpec, TickleParams, build_hamiltonian, build_jump_ops, charge_vector
from phononlaser.operators import SpaceLayout, number_op, spin_op

from refpoints import coherent_state, spec_twolevel


def random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def direct_lindblad_rhs(rho, H, jumps):
    out = -1j * (H @ rho - rho @ H)
    for L in jumps:
        LdL = L.conj().T @ L
        out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


class TestLiouvillian:
    def test_zero_generator(self):
        L = liouvillian(np.zeros((3, 3), dtype=complex), [])
        assert L.nnz == 0

    def test_matches_direct_evaluation(self, rng):
        # oracle: commutator/dissipator evaluated directly on matrices
        dim = 6
        H = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H = H + H.conj().T
        jumps = [
            (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) * 0.7
            for _ in range(3)
        ]
        L = liouvillian(H, jumps)
        rho = random_density(rng, dim)
        direct = direct_lindblad_rhs(rho, H, jumps)
        assert np.abs(unvec(L @ vec(rho)) - direct).max() < 1e-12

    def test_trace_preservation(self, rng):
        dim = 5
        H = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H = H + H.conj().T
        jumps = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))]
        L = liouvillian(H, jumps)
        for _ in range(5):
            rho = random_density(rng, dim)
            assert abs(np.trace(unvec(L @ vec(rho)))) < 1e-10

    def test_hermiticity_preservation(self, rng):
        dim = 4
        H = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H = H + H.conj().T
        jumps = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))]
        L = liouvillian(H, jumps)
        rho = random_density(rng, dim)
        drho = unvec(L @ vec(rho))
        assert np.abs(drho - drho.conj().T).max() < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            liouvillian(np.eye(3, dtype=complex), [np.eye(2, dtype=complex)])


class TestQubitDamping:
    gamma = 3.0

    def build(self):
        sm = spin_op("minus", 2, (0, 1))
        return liouvillian(np.zeros((2, 2), dtype=complex), [np.sqrt(self.gamma) * sm])

    def test_excited_population_decay(self):
        L = self.build()
        rho0 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        t = np.linspace(0, 2.0, 9)
        traj = evolve(rho0, L, t, rtol=1e-10, atol=1e-12)
        assert np.abs(traj[:, 1, 1].real - np.exp(-self.gamma * t)).max() < 1e-8

    def test_steady_is_ground(self):
        res = steady_state(self.build())
        assert np.abs(res.rho - np.diag([1.0, 0.0])).max() < 1e-10
        assert res.residual < 1e-8


class TestSteadyState:
    def test_pure_cooling_reaches_joint_ground(self):
        spec = spec_twolevel(N=8, g_c_khz=4.0)
        spec = SystemSpec(
            g_h=0.0, g_c=spec.g_c, gamma_h=spec.gamma_h, gamma_c=spec.gamma_c,
            fock_cutoff=8,
        )
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        res = steady_state(L, charges=charge_vector(spec))
        expected = np.zeros_like(res.rho)
        expected[0, 0] = 1.0
        assert np.abs(res.rho - expected).max() < 1e-8

    def test_degenerate_nullspace_reported(self):
        # decoupled motion: every motional population distribution is steady
        spec = SystemSpec(g_h=0.0, g_c=0.0, gamma_h=2.0, gamma_c=3.0, fock_cutoff=4)
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        with pytest.raises(DegenerateSteadyStateError):
            steady_state(L, check_unique=True)

    def test_sector_solution_matches_full(self):
        spec = spec_twolevel(N=20, dephasing=True)
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        full = steady_state(L, check_unique=False)
        reduced = steady_state(L, charges=charge_vector(spec), check_unique=False)
        assert reduced.reduced_dim < full.reduced_dim
        assert np.abs(full.rho - reduced.rho).max() < 1e-9
        assert reduced.residual < 1e-8

    def test_blocks_closed_only_without_tickle(self):
        spec = spec_twolevel(N=8)
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        idx = sector_indices(charge_vector(spec), 0)
        assert is_block_closed(L, idx)
        spec_t = spec_twolevel(N=8, tickle=TickleParams(enabled=True, g_t=1.0))
        Lt = liouvillian(build_hamiltonian(spec_t), build_jump_ops(spec_t))
        assert not is_block_closed(Lt, idx)

    def test_sector_block_extraction(self):
        spec = spec_twolevel(N=6)
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        charges = charge_vector(spec)
        idx = sector_indices(charges, 0)
        Lb = sector_block(L, idx)
        assert Lb.shape == (len(idx), len(idx))

    def test_truncation_convergence_of_lasing_points(self):
        # raising the cutoff by 10 moves the occupation by < 1%
        from phononlaser.tasks import solve_steady
        from refpoints import POINT_MID, POINT_SCAN, spec_fourlevel

        for point, g_c in ((POINT_MID, None), (POINT_SCAN, 4.29)):
            n50 = solve_steady(spec_fourlevel(point, N=50, g_c_khz=g_c))[2]["nbar"]
            n60 = solve_steady(spec_fourlevel(point, N=60, g_c_khz=g_c))[2]["nbar"]
            assert abs(n60 - n50) / n50 < 0.01


class TestEvolve:
    def test_zero_generator_constant(self, rng):
        L = liouvillian(np.zeros((3, 3), dtype=complex), [])
        rho0 = random_density(rng, 3)
        traj = evolve(rho0, L, np.linspace(0, 5, 6))
        assert np.abs(traj - rho0).max() < 1e-12

    def test_resonant_drive_builds_coherent_state(self):
        # drive-only generator displaces the ground state; occupation follows
        # a Poisson distribution with mean (g_t t)^2
        g_t = 1.5
        spec = SystemSpec(
            g_h=0.0, g_c=0.0, gamma_h=0.0, gamma_c=0.0, fock_cutoff=25,
            tickle=TickleParams(enabled=True, g_t=g_t, phase=0.3),
        )
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        layout = spec.layout
        rho0 = np.zeros((layout.joint_dim, layout.joint_dim), dtype=complex)
        rho0[0, 0] = 1.0
        t_end = 0.8
        traj = evolve(rho0, L, [0.0, t_end], rtol=1e-10, atol=1e-12)
        pn = phonon_distribution(traj[-1], layout)
        nbar = (g_t * t_end) ** 2
        from scipy.stats import poisson

        expected = poisson.pmf(np.arange(layout.fock_cutoff), nbar)
        assert np.abs(pn - expected).max() < 1e-6

    def test_stiff_and_adaptive_agree(self):
        spec = spec_twolevel(N=6, dephasing=True)
        L = liouvillian(build_hamiltonian(spec), build_jump_ops(spec))
        rho0 = np.kron(coherent_state(1.0, 6), np.diag([1.0, 0, 0, 0]).astype(complex))
        rho0 /= np.trace(rho0).real
        t = np.linspace(0, 0.05, 3)
        tr_a = evolve(rho0, L, t, method="adaptive", rtol=1e-10, atol=1e-12)
        tr_s = evolve(rho0, L, t, method="stiff", rtol=1e-9, atol=1e-12)
        tr_e = evolve(rho0, L, t, method="expm")
        assert np.abs(tr_a[-1] - tr_s[-1]).max() < 1e-6
        assert np.abs(tr_a[-1] - tr_e[-1]).max() < 1e-8


class TestObservables:
    layout = SpaceLayout(6, dim_h=2, dim_c=2)

    def test_identity_expectation(self, rng):
        rho = random_density(rng, 8)
        assert expectation(rho, np.eye(8, dtype=complex)) == pytest.approx(1.0)

    def test_fock_number(self):
        rho = np.zeros((6, 6), dtype=complex)
        rho[3, 3] = 1.0
        assert expectation(rho, number_op(6)).real == pytest.approx(3.0)

    def test_hermitian_expectation_real(self, rng):
        rho = random_density(rng, 6)
        O = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        O = O + O.conj().T
        assert abs(expectation(rho, O).imag) < 1e-10

    def test_mismatch(self, rng):
        with pytest.raises(ValueError):
            expectation(random_density(rng, 4), np.eye(5, dtype=complex))

    def test_ground_distribution(self):
        rho = np.zeros((self.layout.joint_dim, self.layout.joint_dim), dtype=complex)
        rho[0, 0] = 1.0
        pn = phonon_distribution(rho, self.layout)
        assert pn[0] == pytest.approx(1.0)
        assert np.abs(pn[1:]).max() < 1e-15

    def test_coherent_poisson(self):
        N = 40
        layout = SpaceLayout(N, dim_h=2, dim_c=2)
        rho = np.kron(coherent_state(2.0, N), np.diag([1.0, 0, 0, 0]).astype(complex))
        pn = phonon_distribution(rho, layout)
        from scipy.stats import poisson

        assert np.abs(pn - poisson.pmf(np.arange(N), 4.0)).max() < 1e-10

    def test_truncation_warning(self):
        N = 6
        layout = SpaceLayout(N, dim_h=2, dim_c=2)
        rho = np.kron(coherent_state(2.0, N), np.diag([1.0, 0, 0, 0]).astype(complex))
        rho = rho / np.trace(rho).real
        with pytest.warns(TruncationWarning):
            phonon_distribution(rho, layout)


class TestDensityMatrixHygiene:
    def test_floor_small_negatives(self):
        rho = np.diag([1.0, -1e-9, 0.5]).astype(complex)
        rho /= np.trace(rho).real
        fixed = floor_positivity(rho)
        w = np.linalg.eigvalsh(fixed)
        assert w.min() >= 0
        assert np.trace(fixed).real == pytest.approx(1.0)

    def test_large_negative_rejected(self):
        rho = np.diag([1.0, -0.2]).astype(complex)
        rho /= np.trace(rho).real
        with pytest.raises(SolverError):
            floor_positivity(rho)

    def test_hermitize(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = hermitize(m)
        assert np.abs(h - h.conj().T).max() == 0.0

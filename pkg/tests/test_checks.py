"""Inequality checks, Madelung decomposition and residuals, and the full suite."""

import math

import numpy as np
import pytest

from gupnlse import (
    DeformationModel,
    EvolutionConfig,
    Grid,
    NodeError,
    PotentialSpec,
    SuiteConfig,
    UnitsConfig,
    WaveField,
    check_cramer_rao,
    check_fisher_bound,
    check_gup_form,
    check_homogeneity_stationary,
    check_modified_hj_residual,
    check_scaling_law,
    check_separability,
    check_sharper_hur,
    density,
    evolve,
    fluctuation_momentum_stats,
    galilean_boost,
    gaussian_state,
    harmonic_analytic,
    integrate,
    madelung_decompose,
    madelung_residuals,
    momentum_stats,
    normalize,
    plane_wave,
    run_all,
    solve_consistent,
)

UNITS = UnitsConfig()
IDENT = DeformationModel.identity()


def consistent_state(beta, points=1024, n_sigma=10.0):
    ana = harmonic_analytic(beta, 1.0, UNITS)
    g = Grid.centered(n_sigma * math.sqrt(ana.sigma_sq), points)
    model = DeformationModel.gup(beta) if beta else IDENT
    return solve_consistent(g, PotentialSpec.harmonic(1.0), model, UNITS), model


class TestFluctuationMomentum:
    def test_matches_operator_for_identity_model(self):
        g = Grid.centered(12.0, 512, boundary="periodic")
        psi = gaussian_state(g, 1.1, phase_velocity=0.8)
        dp_w = fluctuation_momentum_stats(psi, IDENT)
        _, dp_op = momentum_stats(psi)
        # central-difference Fisher route vs spectral operator route: O(dx^2) apart
        assert dp_w[0] == pytest.approx(dp_op[0], rel=1e-5)

    def test_real_state_reduces_to_deformed_fisher(self):
        from gupnlse import fisher_per_dim, w_inverse

        res, model = consistent_state(0.4)
        dp_w = fluctuation_momentum_stats(res.psi, model)
        F = fisher_per_dim(res.psi)[0]
        assert dp_w[0] == pytest.approx(w_inverse(math.sqrt(UNITS.C * F), model), rel=1e-12)


class TestInequalities:
    def test_linear_gaussian_saturates_hur(self):
        res, model = consistent_state(0.0)
        rep = check_sharper_hur(res.psi, model)[0]
        assert rep.passed
        assert rep.measured == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("beta", [2e-2, 0.2, 2.0, 10.0])
    def test_consistent_states_pass_all(self, beta):
        res, model = consistent_state(beta)
        for rep in (check_sharper_hur(res.psi, model)
                    + check_gup_form(res.psi, model)
                    + check_cramer_rao(res.psi)):
            assert rep.passed, rep
        assert check_fisher_bound(res.psi, model).passed

    def test_gup_and_w_forms_agree(self):
        # equivalent inequalities: same verdict on saturating and non-saturating states
        g = Grid.centered(14.0, 768)
        model = DeformationModel.gup(0.15)
        for psi in (
            gaussian_state(g, 1.3),
            normalize(WaveField(g, (np.exp(-((g.axis(0) - 1.5) ** 2) / 2)
                                    + np.exp(-((g.axis(0) + 1.5) ** 2) / 1.1)).astype(complex))),
        ):
            a = check_sharper_hur(psi, model)[0]
            b = check_gup_form(psi, model)[0]
            assert a.passed == b.passed

    def test_cramer_rao_double_hump_strict(self):
        g = Grid.centered(16.0, 1024)
        x = g.axis(0)
        vals = np.exp(-((x - 2.5) ** 2)) + np.exp(-((x + 2.5) ** 2))
        psi = normalize(WaveField(g, vals.astype(complex)))
        rep = check_cramer_rao(psi)[0]
        assert rep.passed
        assert rep.measured > 1.5  # separated humps inflate the variance

    def test_fisher_bound_detects_violation(self):
        beta = 0.5
        sigma = math.sqrt(beta)  # F = 2/sigma^2 = 2/beta > 1/beta
        g = Grid.centered(8 * sigma, 512)
        psi = gaussian_state(g, sigma)
        rep = check_fisher_bound(psi, DeformationModel.gup(beta))
        assert not rep.passed
        assert rep.measured == pytest.approx(2.0, rel=1e-5)

    def test_fisher_bound_trivial_without_deformation(self):
        g = Grid.centered(8.0, 256)
        psi = gaussian_state(g, 1.0)
        rep = check_fisher_bound(psi, IDENT)
        assert rep.passed and rep.measured == 0.0


class TestScalingLaw:
    def test_kappa_one_exact(self):
        g = Grid.centered(10.0, 512)
        rho = density(gaussian_state(g, 1.2))
        rep = check_scaling_law(rho, 1.0, IDENT, g, UNITS)
        assert rep.passed and rep.measured <= 1e-12

    def test_gaussian_doubling(self):
        g = Grid.centered(14.0, 4096)
        rho = density(gaussian_state(g, 1.5))
        rep = check_scaling_law(rho, 2.0, DeformationModel.gup(0.3), g, UNITS)
        assert rep.passed

    def test_random_mixture(self):
        g = Grid.centered(14.0, 6144)
        x = g.axis(0)
        rng = np.random.default_rng(5)
        rho = np.zeros_like(x)
        for _ in range(4):
            c = rng.uniform(-2, 2)
            s = rng.uniform(0.7, 1.6)
            rho += rng.uniform(0.2, 1.0) * np.exp(-((x - c) ** 2) / s**2)
        rho /= integrate(rho, g)
        rep = check_scaling_law(rho, 1.5, IDENT, g, UNITS)
        assert rep.passed, rep


class TestMadelung:
    def test_real_positive_state_flat_phase(self):
        g = Grid.centered(10.0, 512)
        psi = gaussian_state(g, 1.0)
        m = madelung_decompose(psi)
        assert np.max(np.abs(m.S)) <= 1e-12

    def test_plane_wave_linear_phase(self):
        L = 16.0
        g = Grid.centered(L / 2, 128, boundary="periodic")
        k = 2 * math.pi * 3 / L
        m = madelung_decompose(plane_wave(g, k))
        slope = np.gradient(m.S, g.spacing[0])
        assert np.max(np.abs(slope - k)) <= 1e-8  # hbar = 1

    def test_boosted_gaussian_phase(self):
        g = Grid.centered(12.0, 512)
        psi = galilean_boost(gaussian_state(g, 1.0), 0.7)
        m = madelung_decompose(psi)
        x = g.axis(0)
        sig = np.abs(psi.values) >= 1e-6 * np.max(np.abs(psi.values))
        resid = m.S[sig] - 0.7 * x[sig]
        assert np.max(resid) - np.min(resid) <= 1e-9

    def test_reconstruction_pointwise(self):
        g = Grid.centered(12.0, 512, boundary="periodic")
        psi = galilean_boost(gaussian_state(g, 1.1, center=0.5), 1.2)
        m = madelung_decompose(psi)
        rebuilt = np.sqrt(m.P) * np.exp(1j * m.S / UNITS.hbar)
        assert np.max(np.abs(rebuilt - psi.values)) <= 1e-10

    def test_node_error_on_excited_state(self):
        g = Grid.centered(12.0, 512)
        x = g.axis(0)
        vals = x * np.exp(-(x**2) / 2)  # sign change at the origin
        psi = normalize(WaveField(g, vals.astype(complex)))
        with pytest.raises(NodeError):
            madelung_decompose(psi)

    def test_2d_unwrap(self):
        g = Grid.centered(10.0, 64, dims=2)
        psi = galilean_boost(gaussian_state(g, 1.2), (0.5, -0.3))
        m = madelung_decompose(psi)
        rebuilt = np.sqrt(m.P) * np.exp(1j * m.S)
        assert np.max(np.abs(rebuilt - psi.values)) <= 1e-10


def _hj_trajectories(beta, n, steps, T=0.25, sigma=0.85, half=12.0):
    model = DeformationModel.gup(beta) if beta else IDENT
    out = []
    for fac in (1, 2):
        g = Grid.centered(half, n * fac, boundary="periodic")
        psi0 = gaussian_state(g, sigma)
        cfg = EvolutionConfig(dt=T / (steps * fac), steps=steps * fac, model=model,
                              potential=PotentialSpec.harmonic(1.0), units=UNITS,
                              snapshot_every=1)
        traj = evolve(psi0, cfg)
        assert traj.failure is None
        out.append(traj)
    return out


class TestMadelungResiduals:
    def test_gup_second_order_convergence(self):
        coarse, fine = _hj_trajectories(0.2, 256, 128)
        rep = check_modified_hj_residual(coarse, fine, DeformationModel.gup(0.2),
                                         PotentialSpec.harmonic(1.0), UNITS)
        assert rep.passed, rep

    def test_identity_second_order_convergence(self):
        coarse, fine = _hj_trajectories(0.0, 256, 128)
        rep = check_modified_hj_residual(coarse, fine, IDENT,
                                         PotentialSpec.harmonic(1.0), UNITS)
        assert rep.passed, rep

    def test_stationary_state_continuity_floor(self):
        beta = 0.4
        res, model = consistent_state(beta, points=384, n_sigma=8.0)
        cfg = EvolutionConfig(dt=5e-4, steps=40, model=model,
                              potential=PotentialSpec.harmonic(1.0), units=UNITS,
                              snapshot_every=1)
        traj = evolve(res.psi, cfg)
        assert traj.failure is None
        cont, hj, _ = madelung_residuals(traj, model, PotentialSpec.harmonic(1.0), UNITS)
        # a moving packet at the same resolution for comparison
        moving = evolve(galilean_boost(res.psi, 0.5), cfg)
        cont_mv, _, _ = madelung_residuals(moving, model, PotentialSpec.harmonic(1.0), UNITS)
        assert cont <= 1e-5
        assert cont_mv > 100 * cont


class TestSeparabilityCheck:
    def test_plane_wave_factors(self):
        L = 16.0
        g1 = Grid.centered(L / 2, 64, boundary="periodic")
        pa = plane_wave(g1, 2 * math.pi * 2 / L)
        pb = plane_wave(g1, -2 * math.pi * 3 / L)
        cfg = EvolutionConfig(dt=5e-3, steps=60, model=DeformationModel.gup(0.5),
                              potential=PotentialSpec.free(), units=UNITS)
        rep = check_separability(pa, pb, cfg)
        assert rep.passed
        assert rep.measured <= 1e-10

    def test_gaussian_factors_gup(self):
        g1 = Grid.centered(8.0, 64, boundary="periodic")
        pa = gaussian_state(g1, 0.9)
        pb = gaussian_state(g1, 1.1)
        cfg = EvolutionConfig(dt=4e-3, steps=100, model=DeformationModel.gup(0.15),
                              potential=PotentialSpec.harmonic(1.0), units=UNITS)
        rep = check_separability(pa, pb, cfg)
        assert rep.passed, rep

    def test_identity_model_tensor_exact(self):
        g1 = Grid.centered(8.0, 64, boundary="periodic")
        pa = gaussian_state(g1, 0.9)
        pb = gaussian_state(g1, 1.25)
        cfg = EvolutionConfig(dt=4e-3, steps=100, model=IDENT,
                              potential=PotentialSpec.harmonic(1.0), units=UNITS)
        rep = check_separability(pa, pb, cfg)
        assert rep.measured <= 1e-10


class TestHomogeneityCheck:
    @pytest.mark.parametrize("A", [1.0, 2.0**10, 2.0**-10, 1e3, 1e-3])
    def test_frozen_W_scaling_invariance(self, A):
        g = Grid.centered(11.0, 512)
        rep = check_homogeneity_stationary(PotentialSpec.harmonic(1.0),
                                           DeformationModel.gup(0.3), A, g, UNITS)
        assert rep.passed, rep

    def test_power_of_two_is_exact(self):
        g = Grid.centered(11.0, 512)
        rep = check_homogeneity_stationary(PotentialSpec.harmonic(1.0),
                                           DeformationModel.gup(0.3), 2.0**6, g, UNITS)
        assert rep.measured == 0.0


class TestSuite:
    def test_full_matrix_passes(self):
        reports = run_all(SuiteConfig(betas=(0.0, 1e-4, 1e-2, 1.0),
                                      grid_points=512, evolve_steps=200))
        failures = [r for r in reports if not r.passed]
        assert not failures, failures
        assert len(reports) >= 40

    def test_report_serialization(self):
        reports = run_all(SuiteConfig(betas=(0.0,), grid_points=256, evolve_steps=20))
        d = reports[0].to_dict()
        assert set(d) == {"name", "passed", "measured", "bound", "details"}

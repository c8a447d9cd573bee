"""Schwinger-Dyson solver: transforms, limits, symmetries, thermodynamics."""

import numpy as np
import pytest

from syk_lab.errors import ConvergenceError
from syk_lab.largen import (MatsubaraGreen, SdConfig, conformal_tau_slope,
                            entropy_at, entropy_curve_largen, free_energy_largen,
                            free_g_iw, free_g_tau, freq_to_tau, g_iw_to_tau,
                            matsubara_frequencies, resolve_grid_half_size,
                            solve_sd, tau_grid, tau_to_freq)

FAST = SdConfig(grid_half_size=1 << 10)


class TestTransforms:
    def test_roundtrip_is_identity(self):
        rng = np.random.default_rng(0)
        beta, m = 3.7, 128
        x = rng.normal(size=2 * m) + 1j * rng.normal(size=2 * m)
        back = tau_to_freq(freq_to_tau(x, beta), beta)
        assert np.abs(back - x).max() < 1e-13

    def test_matches_direct_sum(self):
        beta, m = 2.1, 32
        rng = np.random.default_rng(1)
        x = rng.normal(size=2 * m) + 1j * rng.normal(size=2 * m)
        omega = matsubara_frequencies(beta, m)
        taus = tau_grid(beta, m)
        direct = np.array([(x * np.exp(-1j * omega * t)).sum() / beta for t in taus])
        assert np.abs(freq_to_tau(x, beta) - direct).max() < 1e-11

    def test_free_tail_is_analytic(self):
        # the subtraction scheme reproduces the closed-form free propagator exactly
        beta, m, mu = 5.0, 1 << 11, 0.37
        omega = matsubara_frequencies(beta, m)
        g_tau = g_iw_to_tau(free_g_iw(omega, mu), beta, mu)
        want = free_g_tau(tau_grid(beta, m), beta, mu)
        assert np.abs(g_tau - want).max() < 1e-14

    def test_antiperiodic_grid(self):
        taus = tau_grid(4.0, 8)
        assert taus[0] == pytest.approx(0.5 * 4.0 / 16)
        assert len(taus) == 16 and taus[-1] < 4.0
        # midpoint grid maps beta - tau exactly onto itself, reversed
        np.testing.assert_allclose(4.0 - taus, taus[::-1], atol=1e-15)


class TestSolveSd:
    def test_free_fermion_exact_in_one_iteration(self):
        sol = solve_sd(0.0, 0.3, 2.5, FAST)
        assert sol.iterations == 1
        want = free_g_iw(sol.omega, 0.3)
        assert np.abs(sol.g_iw - want).max() == 0.0
        assert np.abs(sol.sigma_iw).max() < 1e-15

    def test_half_filling_symmetries(self):
        sol = solve_sd(1.0, 0.0, 50.0, FAST)
        mid = len(sol.g_tau) // 2
        # G(beta/2) real and negative
        assert sol.g_tau[mid].real < 0
        assert abs(sol.g_tau[mid].imag) < 1e-10
        # particle-hole symmetry of the fixed point: G(tau) = G(beta - tau)^*
        # (the same map sends the free seed to itself: G0(tau) = -1/2 exactly)
        assert np.abs(sol.g_tau - sol.g_tau[::-1].conj()).max() < 1e-8

    def test_invariants_at_solution(self):
        sol = solve_sd(1.0, 0.2, 20.0, FAST)
        assert sol.conjugation_defect() < 1e-10
        assert sol.tail_defect() < 0.05

    def test_initialization_independence(self):
        # perturbing the seed by 1% lands on the same fixed point
        beta = 30.0
        sol_a = solve_sd(1.0, 0.0, beta, FAST)

        rng = np.random.default_rng(2)
        m = resolve_grid_half_size(FAST, beta, 1.0)
        omega = matsubara_frequencies(beta, m)
        noise = 1.0 + 0.01 * rng.normal(size=2 * m)
        seed = free_g_iw(omega, 0.0) * noise

        # rerun the iteration body from the noisy seed via the public solver
        # by swapping the seed in: brief manual loop mirroring solve_sd
        from syk_lab.largen import _symmetrize, g_iw_to_tau as to_tau
        g = _symmetrize(seed)
        for _ in range(4000):
            g_tau = to_tau(g, beta, 0.0)
            sigma_tau = -(g_tau * g_tau * (-g_tau[::-1]))
            sigma_iw = _symmetrize(tau_to_freq(sigma_tau, beta))
            g_new = 1.0 / (1j * omega - sigma_iw)
            res = np.abs(g_new - g).max()
            g = _symmetrize(0.3 * g_new + 0.7 * g)
            if res < FAST.tolerance:
                break
        assert np.abs(g - sol_a.g_iw).max() < 10 * FAST.tolerance

    def test_conformal_window_slope(self):
        sol = solve_sd(1.0, 0.0, 400.0, SdConfig(grid_half_size=1 << 14))
        slope = conformal_tau_slope(sol)
        assert slope == pytest.approx(-0.5, abs=0.06)

    def test_out_of_range_beta(self):
        with pytest.raises(ValueError):
            solve_sd(1.0, 0.0, 2e4)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            solve_sd(1.0, 0.0, 10.0, SdConfig(grid_half_size=64))

    def test_nonconvergence_reports_history(self):
        with pytest.raises(ConvergenceError) as err:
            solve_sd(1.0, 0.0, 100.0, SdConfig(grid_half_size=1 << 10, max_iterations=5))
        assert len(err.value.residual_history) == 5

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SdConfig(mixing=0.0)
        with pytest.raises(ValueError):
            SdConfig(tolerance=-1.0)

    def test_grid_size_scales_with_beta_j(self):
        cfg = SdConfig()
        assert resolve_grid_half_size(cfg, 100.0, 1.0) == 1 << 14
        assert resolve_grid_half_size(cfg, 400.0, 1.0) == 1 << 15
        assert resolve_grid_half_size(cfg, 1000.0, 1.0) == 1 << 17


class TestFreeEnergy:
    def test_free_limit_closed_form(self):
        for mu in (-0.4, 0.0, 0.7):
            beta = 3.0
            f = free_energy_largen(solve_sd(0.0, mu, beta, FAST))
            want = -np.log(1 + np.exp(beta * mu)) / beta
            assert f == pytest.approx(want, abs=1e-8)

    def test_high_temperature_entropy_ln2(self):
        s = entropy_at(1.0, 0.0, 10.0, FAST)
        assert s == pytest.approx(np.log(2), abs=1e-2)

    def test_entropy_curve_monotone_and_free_limit(self):
        tgrid = np.geomspace(0.05, 10.0, 9)
        curve = entropy_curve_largen(0.0, 0.0, tgrid, FAST)
        # J=0 at mu=0: S = ln 2 at every temperature
        np.testing.assert_allclose(curve.entropy_per_site, np.log(2), atol=1e-6)
        curve = entropy_curve_largen(1.0, 0.0, tgrid, FAST)
        assert (np.diff(curve.entropy_per_site) >= -1e-6).all()

    def test_curve_needs_enough_points(self):
        with pytest.raises(ValueError):
            entropy_curve_largen(1.0, 0.0, [0.1, 0.2], FAST)

import numpy as np
import pytest

from arfisma.model import ArfismaParams, SeasonalSpec
from arfisma.presets import get_preset
from arfisma.rng import make_rng
from arfisma.simulate import SimulationConfig, simulate
from arfisma.stable import sample_sas
from arfisma.twostep import (
    WhittleConfig,
    _mh_chain,
    estimate_memory,
    estimate_two_step,
    filter_residuals,
    mh_frequencies,
    periodogram,
    whittle_objective,
)

S4 = SeasonalSpec(s=4)


class TestPeriodogram:
    def test_zero_series(self):
        freqs, vals = periodogram(np.zeros(64))
        assert np.all(vals == 0.0)
        assert freqs[0] > 0.0 and freqs[-1] <= np.pi + 1e-12

    def test_pure_tone_concentrates(self):
        t = np.arange(1, 65)
        freqs, vals = periodogram(np.cos(np.pi * t / 2.0))
        peak = freqs[np.argmax(vals)]
        assert peak == pytest.approx(np.pi / 2.0, abs=1e-12)
        assert vals.max() / vals.sum() > 0.9

    def test_white_noise_level(self):
        # S(2) innovations have variance 2, so the flat spectrum sits at
        # 2/(2 pi) = 1/pi
        z = sample_sas(2.0, 2**14, seed=1)
        _, vals = periodogram(z)
        assert abs(vals.mean() - 1.0 / np.pi) <= 0.1 / np.pi

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            periodogram(np.ones(1))


class TestMHChain:
    def test_flat_target_uniform(self):
        rng = make_rng(3)
        # a flat target accepts every proposal, which trips the diagnostic
        with pytest.warns(RuntimeWarning, match="acceptance rate"):
            draws, rate = _mh_chain(lambda lam: 1.0, 10_000, 500, 0.15 * np.pi, rng)
        assert rate == 1.0
        grid = np.linspace(0.0, np.pi, 201)
        ecdf = np.searchsorted(np.sort(draws), grid) / len(draws)
        assert np.abs(ecdf - grid / np.pi).max() <= 0.05

    def test_pure_tone_target_concentrates(self):
        t = np.arange(1, 257)
        config = WhittleConfig(N=2000, burn_in=500, seed=4)
        draws = mh_frequencies(np.cos(np.pi * t / 2.0), config)
        assert np.mean(np.abs(draws - np.pi / 2.0) <= 0.1) >= 0.9

    def test_benchmark_model_mass_near_poles(self):
        # long memory pulls mass toward 0; the seasonal pole sits at pi/2
        psi, spec = get_preset(1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=4096, M=5000, seed=8))
        draws = mh_frequencies(x, WhittleConfig(N=4000, burn_in=1000, seed=9))
        near_zero = np.mean(draws <= 0.3)
        near_seasonal = np.mean(np.abs(draws - np.pi / 2.0) <= 0.15)
        assert near_zero > 0.3 / np.pi
        assert near_seasonal > 0.3 / np.pi

    def test_deterministic_given_seed(self):
        t = np.arange(1, 129)
        x = np.cos(np.pi * t / 2.0) + 0.1 * np.sin(np.pi * t / 4.0)
        cfg = WhittleConfig(N=500, burn_in=100, seed=5)
        assert np.array_equal(mh_frequencies(x, cfg), mh_frequencies(x, cfg))

    def test_rescaling_leaves_draws_identical(self):
        psi, spec = get_preset(1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=512, M=2000, seed=10))
        cfg = WhittleConfig(N=1000, burn_in=200, seed=11)
        assert np.array_equal(mh_frequencies(x, cfg), mh_frequencies(1000.0 * x, cfg))


class TestWhittleObjective:
    def test_flat_transfer_gives_one(self):
        zeta = ArfismaParams(alpha=2.0)
        freqs = np.array([0.3, 1.1, 2.9])
        assert whittle_objective(freqs, zeta, S4) == 1.0

    def test_single_frequency_reciprocal(self):
        zeta = ArfismaParams(alpha=2.0, phi=(0.6,))
        got = whittle_objective(np.array([np.pi]), zeta, SeasonalSpec(s=4, p=1))
        assert got == pytest.approx(2.56, abs=1e-12)

    @pytest.mark.slow
    def test_ordering_at_truth(self):
        psi, spec = get_preset(1)
        zeta0 = ArfismaParams(alpha=2.0, d=psi.d, D=psi.D)
        zeta_bad = ArfismaParams(alpha=2.0, d=psi.d + 0.15, D=psi.D + 0.15)
        wins = 0
        for rep in range(100):
            x = simulate(SimulationConfig(psi=psi, spec=spec, T=1500, M=5000, seed=3000 + rep))
            freqs = mh_frequencies(x, WhittleConfig(N=2000, burn_in=500, seed=4000 + rep))
            wins += whittle_objective(freqs, zeta0, spec) < whittle_objective(freqs, zeta_bad, spec)
        assert wins >= 90


class TestEstimateMemory:
    @pytest.mark.slow
    def test_white_noise_recovers_zero(self):
        x = sample_sas(1.6, 10_000, seed=12)
        zeta, info = estimate_memory(x, S4, WhittleConfig(seed=13))
        assert abs(zeta.d) <= 0.05
        assert abs(zeta.D) <= 0.05
        assert info["converged"]

    def test_sign_flip_invariance(self):
        psi, spec = get_preset(1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=600, M=2000, seed=14))
        cfg = WhittleConfig(N=1000, burn_in=200, seed=15, restarts=1, maxfev=400)
        a, _ = estimate_memory(x, spec, cfg)
        b, _ = estimate_memory(-x, spec, cfg)
        assert a == b

    def test_needs_minimum_length(self):
        with pytest.raises(ValueError):
            estimate_memory(np.ones(32), S4, WhittleConfig())


class TestFilterResiduals:
    def test_identity_when_memoryless(self):
        zeta = ArfismaParams(alpha=2.0)
        x = np.random.default_rng(1).normal(size=500)
        resid, burn = filter_residuals(x, zeta, S4)
        assert np.allclose(resid, x, atol=1e-12)
        assert burn >= 100

    @pytest.mark.slow
    def test_whitening_recovers_innovation_cf(self):
        psi, spec = get_preset(1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=10_000, M=5000, seed=16))
        zeta0 = ArfismaParams(alpha=psi.alpha, d=psi.d, D=psi.D)
        resid, _ = filter_residuals(x, zeta0, spec)
        z = resid[500:]
        assert abs(np.exp(1j * z).mean() - np.exp(-1.0)) <= 0.03

    def test_whitening_gaussian_ar1(self):
        psi = ArfismaParams(alpha=2.0, phi=(0.6,))
        spec = SeasonalSpec(s=4, p=1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=10_000, M=200, seed=17))
        resid, burn = filter_residuals(x, psi, spec)
        z = resid[burn:] - resid[burn:].mean()
        rho1 = np.dot(z[1:], z[:-1]) / np.dot(z, z)
        assert abs(rho1) <= 0.03


class TestTwoStep:
    @pytest.mark.slow
    def test_degenerate_case_equals_direct_mle(self):
        z = sample_sas(1.6, 10_000, seed=18)
        report = estimate_two_step(z, S4, WhittleConfig(seed=19))
        assert abs(report.psi_hat.alpha - 1.6) <= 0.05
        assert report.method == "tsm"

    def test_report_fields(self):
        from arfisma.model import validate_params

        psi, spec = get_preset(1)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=400, M=1000, seed=20))
        report = estimate_two_step(
            x, spec, WhittleConfig(N=800, burn_in=200, seed=21, restarts=1, maxfev=400)
        )
        assert report.details["residual_burn"] >= 100
        assert np.isfinite(report.objective)
        assert "memory_clipped" in report.details
        assert validate_params(report.psi_hat, spec).valid

    @pytest.mark.slow
    def test_grid_scheme_close_to_mh(self):
        # deterministic Fourier-grid objective agrees with the MH average
        # (enough chain draws to push the MH integration noise below the gap)
        psi = ArfismaParams(alpha=2.0, d=0.15, D=0.20)
        spec = SeasonalSpec(s=4)
        x = simulate(SimulationConfig(psi=psi, spec=spec, T=10_000, M=5000, seed=22))
        mh, _ = estimate_memory(
            x, spec, WhittleConfig(N=20_000, burn_in=2000, seed=23, scheme="mh")
        )
        grid, _ = estimate_memory(x, spec, WhittleConfig(seed=23, scheme="grid"))
        assert abs(mh.d - grid.d) <= 0.03
        assert abs(mh.D - grid.D) <= 0.03


@pytest.mark.slow
class TestReferenceScaleExamples:
    def test_model2_short_memory_mean(self):
        # AR coefficient recovered on average at desk scale
        psi, spec = get_preset(2)
        fits = []
        for rep in range(60):
            x = simulate(SimulationConfig(psi=psi, spec=spec, T=1500, M=5000, seed=5000 + rep))
            report = estimate_two_step(
                x, spec, WhittleConfig(seed=6000 + rep, restarts=2, maxfev=800)
            )
            fits.append(report.psi_hat.phi[0])
        assert abs(np.mean(fits) - 0.587) <= 0.07

    def test_model3_tail_index_stays_usable(self):
        # The reference study reported a collapse of the two-step tail-index
        # estimate under an MA component (mean near 1.26 at truth 1.6).  This
        # implementation whitens the MA dynamics correctly and shows only a
        # small downward bias, so the collapse is not reproduced; the honest
        # behavior is pinned here instead (see the decisions ledger).
        psi, spec = get_preset(3)
        fits = []
        for rep in range(60):
            x = simulate(SimulationConfig(psi=psi, spec=spec, T=1500, M=5000, seed=7000 + rep))
            report = estimate_two_step(
                x, spec, WhittleConfig(seed=8000 + rep, restarts=2, maxfev=800)
            )
            fits.append(report.psi_hat.alpha)
        mean = np.mean(fits)
        assert 1.45 <= mean <= 1.65
        assert mean <= 1.61  # bias, if any, points down

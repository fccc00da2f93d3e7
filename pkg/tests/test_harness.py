import numpy as np
import pytest

import arfisma.harness as harness
from arfisma.ecf import EcfConfig
from arfisma.harness import (
    ExperimentConfig,
    read_replications,
    run_experiment,
    run_replication,
)
from arfisma.model import ArfismaParams, SeasonalSpec, validate_params
from arfisma.presets import get_preset
from arfisma.results import summarize
from arfisma.twostep import WhittleConfig

THETA0 = ArfismaParams(alpha=1.6, d=0.1, D=0.1)


def _fast_tsm_config(R=4, seed=7):
    psi, spec = get_preset(1)
    return ExperimentConfig(
        psi0=psi,
        spec=spec,
        method="tsm",
        T=256,
        R=R,
        M=512,
        master_seed=seed,
        whittle=WhittleConfig(N=600, burn_in=150, seed=0, restarts=1, maxfev=300),
    )


def _fast_ecf_config(R=2, seed=7):
    psi, spec = get_preset(1)
    return ExperimentConfig(
        psi0=psi,
        spec=spec,
        method="ecf",
        T=128,
        R=R,
        M=256,
        master_seed=seed,
        ecf=EcfConfig(m=1, K=96, J_cf=256, restarts=1, maxfev=200),
    )


class TestSummarize:
    def test_all_equal_to_truth(self):
        spec = SeasonalSpec(s=4)
        table = summarize([THETA0, THETA0, THETA0], THETA0, spec)
        assert np.allclose(table.mean, THETA0.to_array(), rtol=0, atol=1e-15)
        assert np.all(table.rmse == 0.0)
        assert np.all(table.mae == 0.0)
        assert table.n_used == 3 and table.n_failed == 0

    def test_symmetric_pair(self):
        spec = SeasonalSpec(s=4)
        h = 0.02
        up = ArfismaParams(alpha=1.6 + h, d=0.1 + h, D=0.1 + h)
        dn = ArfismaParams(alpha=1.6 - h, d=0.1 - h, D=0.1 - h)
        table = summarize([up, dn], THETA0, spec)
        assert np.allclose(table.mean, THETA0.to_array(), atol=1e-15)
        assert np.allclose(table.rmse, h, atol=1e-12)
        assert np.allclose(table.mae, h, atol=1e-12)

    def test_one_sided_pair(self):
        spec = SeasonalSpec(s=4)
        h = 0.03
        up2 = ArfismaParams(alpha=1.6 + 2 * h, d=0.1 + 2 * h, D=0.1 + 2 * h)
        table = summarize([THETA0, up2], THETA0, spec)
        assert np.allclose(table.mean, THETA0.to_array() + h, atol=1e-12)
        assert np.allclose(table.rmse, h * np.sqrt(2.0), atol=1e-12)
        assert np.allclose(table.mae, h, atol=1e-12)

    def test_failures_excluded_and_counted(self):
        spec = SeasonalSpec(s=4)
        table = summarize([THETA0, None, THETA0], THETA0, spec)
        assert table.n_used == 2 and table.n_failed == 1

    def test_rmse_dominates_mae_and_bias(self):
        rng = np.random.default_rng(0)
        spec = SeasonalSpec(s=4)
        ests = [
            ArfismaParams(alpha=1.6 + e[0], d=0.1 + e[1], D=0.1 + e[2])
            for e in rng.normal(0, 0.02, size=(40, 3))
        ]
        table = summarize(ests, THETA0, spec)
        assert np.all(table.rmse >= table.mae - 1e-15)
        assert np.all(table.rmse**2 >= (table.mean - table.truth) ** 2 - 1e-15)


class TestRunReplication:
    def test_deterministic(self):
        config = _fast_tsm_config()
        a = run_replication(config, 0)
        b = run_replication(config, 0)
        assert a.report.psi_hat == b.report.psi_hat

    def test_replications_differ(self):
        from arfisma.rng import STAGE_SIMULATION, derive_seed
        from arfisma.simulate import SimulationConfig, simulate

        config = _fast_tsm_config()
        x0 = simulate(
            SimulationConfig(
                psi=config.psi0, spec=config.spec, T=10, M=64,
                seed=derive_seed(config.master_seed, 0, STAGE_SIMULATION),
            )
        )
        x1 = simulate(
            SimulationConfig(
                psi=config.psi0, spec=config.spec, T=10, M=64,
                seed=derive_seed(config.master_seed, 1, STAGE_SIMULATION),
            )
        )
        assert not np.array_equal(x0, x1)

    def test_estimate_respects_constraints(self):
        config = _fast_ecf_config()
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_replication(config, 0)
        assert res.error is None
        assert validate_params(res.report.psi_hat, config.spec).valid

    def test_failure_becomes_record(self, monkeypatch):
        config = _fast_tsm_config()

        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(harness, "estimate_two_step", boom)
        res = run_replication(config, 0)
        assert res.report is None
        assert "synthetic failure" in res.error


class TestRunExperiment:
    def test_outputs_and_roundtrip(self, tmp_path):
        config = _fast_tsm_config(R=4)
        result = run_experiment(config, out_dir=str(tmp_path))
        assert result.conforming
        names, estimates = read_replications(str(tmp_path / "replications.csv"))
        assert names == list(ArfismaParams.coord_names(config.spec))
        resummary = summarize(estimates, config.psi0, config.spec)
        assert np.array_equal(resummary.mean, result.summary.mean)
        assert np.array_equal(resummary.rmse, result.summary.rmse)
        assert np.array_equal(resummary.mae, result.summary.mae)
        assert (tmp_path / "summary.csv").exists()
        assert (tmp_path / "summary.json").exists()

    def test_parallel_matches_serial(self, tmp_path):
        config = _fast_tsm_config(R=4)
        serial = run_experiment(config, threads=1, out_dir=str(tmp_path / "serial"))
        parallel = run_experiment(config, threads=2, out_dir=str(tmp_path / "parallel"))
        a = (tmp_path / "serial" / "replications.csv").read_bytes()
        b = (tmp_path / "parallel" / "replications.csv").read_bytes()
        assert a == b
        assert np.array_equal(serial.summary.mean, parallel.summary.mean)

    def test_single_replication_rmse_is_abs_error(self):
        config = _fast_tsm_config(R=1)
        result = run_experiment(config)
        err = np.abs(result.summary.mean - result.summary.truth)
        assert np.allclose(result.summary.rmse, err, atol=1e-15)
        assert np.allclose(result.summary.mae, err, atol=1e-15)

    def test_failure_policy_flags_nonconforming(self, monkeypatch):
        config = _fast_tsm_config(R=4)
        real = harness.estimate_two_step

        def flaky(series, spec, cfg):
            flaky.calls += 1
            if flaky.calls % 2 == 0:
                raise RuntimeError("boom")
            return real(series, spec, cfg)

        flaky.calls = 0
        monkeypatch.setattr(harness, "estimate_two_step", flaky)
        result = run_experiment(config)
        assert result.n_failed == 2
        assert not result.conforming
        assert result.summary is not None

    def test_invalid_config_rejected(self):
        psi, spec = get_preset(1)
        with pytest.raises(ValueError):
            ExperimentConfig(psi0=psi, spec=spec, method="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(psi0=psi, spec=spec, R=0)
        with pytest.raises(ValueError):
            ExperimentConfig(psi0=psi, spec=spec, T=32)
        bad = ArfismaParams(alpha=1.6, d=0.5, D=0.2)
        with pytest.raises(ValueError):
            ExperimentConfig(psi0=bad, spec=spec)

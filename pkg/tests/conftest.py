"""Shared fixtures: the heavy Monte Carlo experiments run once per session.

Set ARFISMA_STUDY_CACHE=<dir> to persist and reuse the deterministic study
results across sessions (see study_cache.py); unset, everything is computed
fresh.
"""

import pytest

from arfisma import EcfConfig, WhittleConfig, get_preset
from arfisma.harness import ExperimentConfig

from study_cache import cached_experiment

# Estimator settings used by the desk-scale studies.  Node count and
# truncation follow the package defaults; a two-step warm start plus the
# neutral start keep the search in the right basin while staying inside the
# stated runtime limits on one core.
ECF_STUDY = dict(
    K=1024, J_cf=5000, restarts=2, maxfev=1500, xatol=1e-3, tsm_warm_start=True
)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo test")


@pytest.fixture(scope="session")
def ecf_model1_study():
    """Model 1, ECF, m=1, T=1500, R=100."""
    psi0, spec = get_preset(1)
    config = ExperimentConfig(
        psi0=psi0,
        spec=spec,
        method="ecf",
        T=1500,
        R=100,
        M=5000,
        master_seed=20260810,
        ecf=EcfConfig(m=1, **ECF_STUDY),
        model_id=1,
    )
    return cached_experiment(config, "ecf_model1_T1500_R100")


@pytest.fixture(scope="session")
def tsm_model1_study():
    """Model 1, TSM, T=1500, R=100."""
    psi0, spec = get_preset(1)
    config = ExperimentConfig(
        psi0=psi0,
        spec=spec,
        method="tsm",
        T=1500,
        R=100,
        M=5000,
        master_seed=20260810,
        whittle=WhittleConfig(),
        model_id=1,
    )
    return cached_experiment(config, "tsm_model1_T1500_R100")


@pytest.fixture(scope="session")
def ecf_model2_block_study():
    """Model 2, ECF, m in {1, 6}, T=1500, R=50 each; returns {m: result}."""
    psi0, spec = get_preset(2)
    out = {}
    for m in (1, 6):
        config = ExperimentConfig(
            psi0=psi0,
            spec=spec,
            method="ecf",
            T=1500,
            R=50,
            M=5000,
            master_seed=20260810,
            ecf=EcfConfig(m=m, **{**ECF_STUDY, "K": 512}),
            model_id=2,
        )
        out[m] = cached_experiment(config, f"ecf_model2_m{m}_T1500_R50")
    return out

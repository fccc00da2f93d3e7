"""Optional on-disk cache for the session-scope Monte Carlo studies.

Experiments are deterministic given their config, so re-running a test
session can reuse results.  Enabled only when ARFISMA_STUDY_CACHE names a
directory; a fresh `pytest` run without the variable recomputes everything.
"""

import json
import os

import numpy as np

from arfisma.harness import (
    ExperimentResult,
    ReplicationResult,
    run_experiment,
    write_outputs,
)
from arfisma.model import ArfismaParams
from arfisma.results import EstimationReport, summarize


def _cache_dir():
    return os.environ.get("ARFISMA_STUDY_CACHE")


def _load(config, path):
    with open(os.path.join(path, "summary.json")) as fh:
        payload = json.load(fh)
    if payload["config"] != config.describe():
        return None
    names = ArfismaParams.coord_names(config.spec)
    replications = []
    for row in payload["replications"]:
        if row["error"] is not None:
            replications.append(ReplicationResult(rep_index=row["rep"], error=row["error"]))
            continue
        rep = row["report"]
        psi = ArfismaParams.from_array(
            np.array([rep["psi_hat"][n] for n in names]), config.spec
        )
        replications.append(
            ReplicationResult(
                rep_index=row["rep"],
                report=EstimationReport(
                    psi_hat=psi,
                    objective=rep["objective"],
                    iterations=rep["iterations"],
                    n_evals=rep["n_evals"],
                    converged=rep["converged"],
                    wall_time=0.0,
                    method=rep["method"],
                    details=rep.get("details", {}),
                ),
            )
        )
    estimates = [r.report.psi_hat if r.report else None for r in replications]
    summary = summarize(estimates, config.psi0, config.spec)
    return ExperimentResult(
        config=config,
        replications=replications,
        summary=summary,
        interrupted=payload["interrupted"],
    )


def cached_experiment(config, name: str) -> ExperimentResult:
    base = _cache_dir()
    if base:
        path = os.path.join(base, name)
        if os.path.exists(os.path.join(path, "summary.json")):
            result = _load(config, path)
            if result is not None:
                return result
    result = run_experiment(config)
    if base:
        write_outputs(result, os.path.join(base, name))
    return result

"""Monte Carlo experiment runner.

Replications derive their simulation, integration-node and MH-chain seeds
from (master seed, replication index, stage tag), so results are identical
whatever the worker count or execution order.  Outputs are written
atomically: a per-replication CSV, a summary CSV in table-row order
(param, truth, mean, RMSE, MAE) and a JSON mirror.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .ecf import EcfConfig, estimate_ecf
from .model import ArfismaParams, SeasonalSpec, validate_params
from .results import EstimationReport, SummaryTable, summarize
from .rng import STAGE_ECF_NODES, STAGE_MH_CHAIN, STAGE_SIMULATION, derive_seed
from .simulate import SimulationConfig, simulate
from .twostep import WhittleConfig, estimate_two_step

# an experiment with more than this share of failed replications is flagged
MAX_FAILURE_SHARE = 0.10


@dataclass(frozen=True)
class ExperimentConfig:
    psi0: ArfismaParams
    spec: SeasonalSpec
    method: str = "ecf"
    T: int = 1500
    R: int = 100
    M: int = 5000
    master_seed: int = 0
    ecf: EcfConfig = field(default_factory=EcfConfig)
    whittle: WhittleConfig = field(default_factory=WhittleConfig)
    model_id: int | None = None

    def __post_init__(self):
        if self.method not in ("ecf", "tsm"):
            raise ValueError(f"method must be 'ecf' or 'tsm', got {self.method!r}")
        if self.R < 1:
            raise ValueError(f"R must be >= 1, got {self.R}")
        if self.T < 64:
            raise ValueError(f"T must be >= 64, got {self.T}")
        verdict = validate_params(self.psi0, self.spec)
        if not verdict:
            raise ValueError("invalid psi0: " + "; ".join(verdict.violations))

    def describe(self) -> dict:
        names = ArfismaParams.coord_names(self.spec)
        d = {
            "method": self.method,
            "T": self.T,
            "R": self.R,
            "M": self.M,
            "master_seed": self.master_seed,
            "spec": {
                "s": self.spec.s,
                "p": self.spec.p,
                "q": self.spec.q,
                "P": self.spec.P,
                "Q": self.spec.Q,
            },
            "truth": dict(zip(names, self.psi0.to_array().tolist())),
        }
        if self.model_id is not None:
            d["model"] = self.model_id
        if self.method == "ecf":
            d["ecf"] = {
                "m": self.ecf.m,
                "K": self.ecf.K,
                "J_cf": self.ecf.J_cf,
                "qmc": self.ecf.qmc,
                "demean": self.ecf.demean,
                "tsm_warm_start": self.ecf.tsm_warm_start,
                "restarts": self.ecf.restarts,
                "maxfev": self.ecf.maxfev,
            }
        else:
            d["whittle"] = {
                "N": self.whittle.N,
                "burn_in": self.whittle.burn_in,
                "proposal_scale": self.whittle.proposal_scale,
                "scheme": self.whittle.scheme,
                "restarts": self.whittle.restarts,
            }
        return d


@dataclass(frozen=True)
class ReplicationResult:
    rep_index: int
    report: EstimationReport | None = None
    error: str | None = None


def run_replication(config: ExperimentConfig, rep_index: int) -> ReplicationResult:
    """Simulate and estimate one replication with derived seeds.

    Estimation failures come back as tagged records, not exceptions, so a
    long experiment survives individual bad replications.
    """
    sim_seed = derive_seed(config.master_seed, rep_index, STAGE_SIMULATION)
    series = simulate(
        SimulationConfig(psi=config.psi0, spec=config.spec, T=config.T, M=config.M, seed=sim_seed)
    )
    try:
        if config.method == "ecf":
            est_config = replace(
                config.ecf,
                integration_seed=derive_seed(config.master_seed, rep_index, STAGE_ECF_NODES),
            )
            report = estimate_ecf(series, config.spec, est_config)
        else:
            est_config = replace(
                config.whittle,
                seed=derive_seed(config.master_seed, rep_index, STAGE_MH_CHAIN),
            )
            report = estimate_two_step(series, config.spec, est_config)
    except Exception as exc:  # noqa: BLE001 - failure records by design
        return ReplicationResult(rep_index=rep_index, error=f"{type(exc).__name__}: {exc}")
    return ReplicationResult(rep_index=rep_index, report=report)


def _worker(args) -> ReplicationResult:
    config, rep_index = args
    return run_replication(config, rep_index)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    replications: list
    summary: SummaryTable | None
    interrupted: bool = False

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.replications if r.error is not None)

    @property
    def n_completed(self) -> int:
        return len(self.replications)

    @property
    def conforming(self) -> bool:
        if self.interrupted or self.n_completed < self.config.R:
            return False
        if self.n_completed == 0:
            return False
        return self.n_failed <= MAX_FAILURE_SHARE * self.n_completed


def run_experiment(
    config: ExperimentConfig,
    threads: int = 1,
    out_dir: str | None = None,
    progress: bool = False,
) -> ExperimentResult:
    """Execute all replications and optionally write the output files.

    With ``threads > 1`` replications run in a process pool; because every
    replication derives its own seeds, parallel and serial execution produce
    identical outputs.  On KeyboardInterrupt the completed replications are
    flushed with a completed-count marker.
    """
    results: dict[int, ReplicationResult] = {}
    interrupted = False
    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for res in pool.map(_worker, ((config, i) for i in range(config.R))):
                    results[res.rep_index] = res
                    if progress:
                        _print_progress(res)
        else:
            for i in range(config.R):
                res = run_replication(config, i)
                results[res.rep_index] = res
                if progress:
                    _print_progress(res)
    except KeyboardInterrupt:
        interrupted = True
    replications = [results[i] for i in sorted(results)]
    estimates = [r.report.psi_hat if r.report is not None else None for r in replications]
    summary = None
    if any(e is not None for e in estimates):
        summary = summarize(estimates, config.psi0, config.spec)
    result = ExperimentResult(
        config=config, replications=replications, summary=summary, interrupted=interrupted
    )
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def _print_progress(res: ReplicationResult):
    if res.error is not None:
        print(f"rep {res.rep_index}: FAILED ({res.error})", flush=True)
    else:
        psi = np.round(res.report.psi_hat.to_array(), 4)
        print(f"rep {res.rep_index}: psi_hat={psi.tolist()} ({res.report.wall_time:.1f}s)", flush=True)


def _atomic_write(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _header_lines(result: ExperimentResult) -> list[str]:
    cfg = json.dumps(result.config.describe(), sort_keys=True)
    return [
        f"# arfisma {__version__}",
        f"# config {cfg}",
        f"# completed {result.n_completed} of {result.config.R}"
        + (" (interrupted)" if result.interrupted else ""),
    ]


def _timeless_report(report, spec):
    if report is None:
        return None
    d = report.to_dict(spec)
    d.pop("wall_time", None)
    return d


def write_outputs(result: ExperimentResult, out_dir: str):
    """Write replications.csv, summary.csv and summary.json atomically."""
    os.makedirs(out_dir, exist_ok=True)
    names = ArfismaParams.coord_names(result.config.spec)
    header = _header_lines(result)

    # no wall-clock columns here: per-replication outputs are bit-identical
    # across reruns and worker counts
    rows = [",".join(["rep", "status", *names, "objective", "n_evals", "converged"])]
    for rep in result.replications:
        if rep.error is not None:
            vals = ["" for _ in names]
            rows.append(",".join([str(rep.rep_index), "failed", *vals, "", "", ""]))
            continue
        coords = [format(v, ".17g") for v in rep.report.psi_hat.to_array()]
        rows.append(
            ",".join(
                [
                    str(rep.rep_index),
                    "ok",
                    *coords,
                    format(rep.report.objective, ".17g"),
                    str(rep.report.n_evals),
                    str(int(rep.report.converged)),
                ]
            )
        )
    _atomic_write(
        os.path.join(out_dir, "replications.csv"), "\n".join(header + rows) + "\n"
    )

    srows = [",".join(["param", "truth", "mean", "rmse", "mae"])]
    if result.summary is not None:
        for n, t, m, r, a in zip(
            result.summary.names,
            result.summary.truth,
            result.summary.mean,
            result.summary.rmse,
            result.summary.mae,
        ):
            srows.append(
                ",".join([n] + [format(v, ".17g") for v in (t, m, r, a)])
            )
    _atomic_write(os.path.join(out_dir, "summary.csv"), "\n".join(header + srows) + "\n")

    payload = {
        "version": __version__,
        "config": result.config.describe(),
        "completed": result.n_completed,
        "failed": result.n_failed,
        "interrupted": result.interrupted,
        "conforming": result.conforming,
        "summary": result.summary.to_dict() if result.summary is not None else None,
        "replications": [
            {
                "rep": r.rep_index,
                "error": r.error,
                "report": _timeless_report(r.report, result.config.spec),
            }
            for r in result.replications
        ],
    }
    _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(payload, indent=2) + "\n")


def read_replications(path: str):
    """Read a replications.csv back into (names, estimate-arrays-or-None)."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    first = cols.index("status") + 1
    last = cols.index("objective")
    names = cols[first:last]
    estimates = []
    for row in reader:
        if not row:
            continue
        if row[1] != "ok":
            estimates.append(None)
            continue
        estimates.append(np.array([float(v) for v in row[first:last]]))
    return names, estimates

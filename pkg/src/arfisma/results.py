"""Result containers: per-fit reports and replication-level summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ArfismaParams, SeasonalSpec


@dataclass(frozen=True)
class EstimationReport:
    """Outcome of one estimation run."""

    psi_hat: ArfismaParams
    objective: float
    iterations: int
    n_evals: int
    converged: bool
    wall_time: float
    method: str
    details: dict = field(default_factory=dict)

    def to_dict(self, spec: SeasonalSpec) -> dict:
        names = ArfismaParams.coord_names(spec)
        return {
            "method": self.method,
            "psi_hat": dict(zip(names, self.psi_hat.to_array().tolist())),
            "objective": self.objective,
            "iterations": self.iterations,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "wall_time": self.wall_time,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class SummaryTable:
    """Per-coordinate mean, RMSE and MAE of replicated estimates."""

    names: tuple
    truth: np.ndarray
    mean: np.ndarray
    rmse: np.ndarray
    mae: np.ndarray
    n_used: int
    n_failed: int

    def to_dict(self) -> dict:
        return {
            "n_used": self.n_used,
            "n_failed": self.n_failed,
            "coords": [
                {
                    "param": n,
                    "truth": float(t),
                    "mean": float(m),
                    "rmse": float(r),
                    "mae": float(a),
                }
                for n, t, m, r, a in zip(self.names, self.truth, self.mean, self.rmse, self.mae)
            ],
        }


def summarize(estimates, truth: ArfismaParams, spec: SeasonalSpec) -> SummaryTable:
    """Summary statistics of estimates against the true parameter vector.

    ``estimates`` is an iterable of ``ArfismaParams`` (or coordinate arrays);
    None entries mark failed replications and are excluded with a count.
    """
    truth_vec = truth.to_array()
    rows = []
    n_failed = 0
    for est in estimates:
        if est is None:
            n_failed += 1
            continue
        vec = est.to_array() if isinstance(est, ArfismaParams) else np.asarray(est, dtype=float)
        if vec.size != truth_vec.size:
            raise ValueError("estimate dimension does not match the truth")
        rows.append(vec)
    if not rows:
        raise ValueError("no successful estimates to summarize")
    mat = np.array(rows)
    err = mat - truth_vec[None, :]
    return SummaryTable(
        names=tuple(ArfismaParams.coord_names(spec)),
        truth=truth_vec,
        mean=mat.mean(axis=0),
        rmse=np.sqrt((err**2).mean(axis=0)),
        mae=np.abs(err).mean(axis=0),
        n_used=mat.shape[0],
        n_failed=n_failed,
    )

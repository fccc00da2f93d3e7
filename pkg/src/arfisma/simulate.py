"""Sample-path generation by truncated moving-average filtering.

A path of length T is produced from T + M innovation draws (consumed
oldest-first, so extending T with a fixed seed extends rather than
reshuffles the path) convolved with the first M + 1 infinite-MA
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import oaconvolve

from .model import ArfismaParams, SeasonalSpec, ma_coeffs, validate_params
from .rng import make_rng
from .stable import sample_sas

# direct convolution below this work size, overlap-add FFT above
_DIRECT_WORK_LIMIT = 20_000_000


@dataclass(frozen=True)
class SimulationConfig:
    psi: ArfismaParams
    spec: SeasonalSpec
    T: int
    M: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")


def filter_innovations(coeffs: np.ndarray, innovations: np.ndarray, engine: str = "auto") -> np.ndarray:
    """Convolve an innovation stream with MA coefficients.

    ``innovations`` holds times 1-M .. T oldest-first; the result is the
    path X_1..X_T with X_t = sum_j coeffs[j] * innovations[t-j].
    """
    M = len(coeffs) - 1
    T = len(innovations) - M
    if T < 1:
        raise ValueError("innovation stream shorter than the filter")
    if engine == "auto":
        engine = "direct" if T * (M + 1) <= _DIRECT_WORK_LIMIT else "fft"
    if engine == "direct":
        return np.convolve(innovations, coeffs, mode="valid")
    if engine == "fft":
        return oaconvolve(innovations, coeffs, mode="valid")
    raise ValueError(f"unknown convolution engine {engine!r}")


def simulate(config: SimulationConfig, engine: str = "auto") -> np.ndarray:
    """Generate one path X_1..X_T of the process described by ``config``.

    Deterministic given the seed.  Innovations are standard symmetric
    alpha-stable draws; the moving-average filter is truncated at M.
    """
    verdict = validate_params(config.psi, config.spec)
    if not verdict:
        raise ValueError("invalid parameters: " + "; ".join(verdict.violations))
    rng = make_rng(config.seed)
    z = sample_sas(config.psi.alpha, config.T + config.M, rng)
    c = ma_coeffs(config.psi, config.spec, config.M)
    return filter_innovations(c, z, engine=engine)

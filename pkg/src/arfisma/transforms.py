"""Smooth bijections between the admissible parameter set and R^k.

Derivative-free searches run in unconstrained coordinates: the tail index
through a scaled logistic onto (1, 2), the memory pair through tanh maps
that enforce |d + D| < 1 - 1/alpha and |D| < 1 - 1/alpha exactly, and each
ARMA coefficient block through the partial-autocorrelation (Durbin-Levinson)
parametrization of the stationarity region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ArfismaParams, SeasonalSpec

_ATANH_CLIP = 1.0 - 1e-12


def _atanh(x):
    return np.arctanh(np.clip(x, -_ATANH_CLIP, _ATANH_CLIP))


def pacf_to_ar(kappa: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations in (-1,1)^k to
    coefficients of a stationary AR polynomial 1 - a_1 z - ... - a_k z^k."""
    a = np.zeros(0)
    for k, kap in enumerate(kappa, start=1):
        new = np.empty(k)
        new[k - 1] = kap
        new[: k - 1] = a - kap * a[::-1]
        a = new
    return a


def ar_to_pacf(a: np.ndarray) -> np.ndarray:
    """Inverse of ``pacf_to_ar``; requires a stationary coefficient vector."""
    a = np.asarray(a, dtype=float).copy()
    out = np.zeros(len(a))
    for k in range(len(a), 0, -1):
        kap = a[k - 1]
        out[k - 1] = kap
        if k > 1:
            denom = 1.0 - kap * kap
            if denom <= 0.0:
                raise ValueError("coefficient vector is not inside the stationarity region")
            a = (a[: k - 1] + kap * a[: k - 1][::-1]) / denom
    return out


@dataclass(frozen=True)
class ParamTransform:
    """Bijection between free coordinates and ``ArfismaParams``.

    With ``estimate_alpha`` the first coordinate parametrizes the tail index;
    otherwise alpha is held at ``fixed_alpha`` and only the memory/ARMA slice
    is free (the memory bounds then use ``fixed_alpha``).
    """

    spec: SeasonalSpec
    estimate_alpha: bool = True
    fixed_alpha: float = 2.0

    @property
    def n_free(self) -> int:
        base = 3 if self.estimate_alpha else 2
        return base + self.spec.p + self.spec.q + self.spec.P + self.spec.Q

    def to_psi(self, x: np.ndarray) -> ArfismaParams:
        x = np.asarray(x, dtype=float)
        if x.size != self.n_free:
            raise ValueError(f"expected {self.n_free} coordinates, got {x.size}")
        i = 0
        if self.estimate_alpha:
            alpha = 1.0 + 1.0 / (1.0 + np.exp(-x[0]))
            i = 1
        else:
            alpha = self.fixed_alpha
        bound = 1.0 - 1.0 / alpha
        dpd = bound * np.tanh(x[i])
        D = bound * np.tanh(x[i + 1])
        i += 2
        blocks = []
        for order in (self.spec.p, self.spec.q, self.spec.P, self.spec.Q):
            kappa = np.tanh(x[i : i + order])
            blocks.append(pacf_to_ar(kappa))
            i += order
        phi, theta_a, Phi, Theta_a = blocks
        # MA blocks share the AR stationarity region after a sign flip:
        # 1 + theta_1 z + ... is nonzero on |z| <= 1 iff 1 - (-theta)_1 z - ... is
        return ArfismaParams(
            alpha=float(alpha),
            d=float(dpd - D),
            D=float(D),
            phi=tuple(phi),
            theta=tuple(-theta_a),
            Phi=tuple(Phi),
            Theta=tuple(-Theta_a),
        )

    def to_x(self, psi: ArfismaParams) -> np.ndarray:
        alpha = psi.alpha if self.estimate_alpha else self.fixed_alpha
        bound = 1.0 - 1.0 / alpha
        parts = []
        if self.estimate_alpha:
            frac = np.clip(psi.alpha - 1.0, 1e-9, 1.0 - 1e-9)
            parts.append(np.log(frac / (1.0 - frac)))
        parts.append(_atanh((psi.d + psi.D) / bound))
        parts.append(_atanh(psi.D / bound))
        out = np.array(parts, dtype=float)
        for block, flip in ((psi.phi, 1.0), (psi.theta, -1.0), (psi.Phi, 1.0), (psi.Theta, -1.0)):
            if block:
                kappa = ar_to_pacf(flip * np.asarray(block))
                out = np.r_[out, _atanh(kappa)]
        return out

    def random_psi(self, rng: np.random.Generator) -> ArfismaParams:
        """A random admissible point, used for optimizer restarts."""
        n_arma = self.spec.p + self.spec.q + self.spec.P + self.spec.Q
        x = []
        if self.estimate_alpha:
            alpha = rng.uniform(1.2, 1.95)
            x.append(np.log((alpha - 1.0) / (2.0 - alpha)))
        x.append(_atanh(rng.uniform(-0.7, 0.7)))
        x.append(_atanh(rng.uniform(-0.7, 0.7)))
        x.extend(_atanh(rng.uniform(-0.7, 0.7, size=n_arma)))
        return self.to_psi(np.array(x))


def neutral_start(spec: SeasonalSpec, estimate_alpha: bool = True, fixed_alpha: float = 2.0) -> ArfismaParams:
    """Mild-memory starting point: alpha 1.5, both memories 0.1, ARMA zero."""
    return ArfismaParams(
        alpha=1.5 if estimate_alpha else fixed_alpha,
        d=0.1,
        D=0.1,
        phi=(0.0,) * spec.p,
        theta=(0.0,) * spec.q,
        Phi=(0.0,) * spec.P,
        Theta=(0.0,) * spec.Q,
    )

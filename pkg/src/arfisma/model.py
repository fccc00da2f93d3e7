"""Seasonal fractional ARIMA coefficient algebra.

Parameter containers and validation, Gegenbauer recursions, the seasonal
long-memory expansion, truncated MA/AR infinite-order representations and
the power transfer function.  Everything here is deterministic pure
computation on immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.signal import fftconvolve

# Use direct convolution below this length, FFT above; both are deterministic
# and agree to ~1e-13 relative.
_FFT_CONV_THRESHOLD = 1024


class SingularFrequencyError(ValueError):
    """Transfer function evaluated at a pole frequency."""


@dataclass(frozen=True)
class SeasonalSpec:
    """Structural orders: seasonal period s and ARMA orders (p, q, P, Q)."""

    s: int
    p: int = 0
    q: int = 0
    P: int = 0
    Q: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"seasonal period must be >= 1, got {self.s}")
        for name in ("p", "q", "P", "Q"):
            if getattr(self, name) < 0:
                raise ValueError(f"order {name} must be >= 0")

    @property
    def n_params(self) -> int:
        # alpha, d, D plus the ARMA coefficients
        return 3 + self.p + self.q + self.P + self.Q


@dataclass(frozen=True)
class ArfismaParams:
    """Estimable parameter vector (alpha, d, D, phi, theta, Phi, Theta).

    alpha is the innovation tail index, d and D the nonseasonal and seasonal
    memory exponents, and the remaining tuples the ARMA coefficients in the
    convention ar(z) = 1 - phi_1 z - ..., ma(z) = 1 + theta_1 z + ...
    """

    alpha: float
    d: float = 0.0
    D: float = 0.0
    phi: tuple = ()
    theta: tuple = ()
    Phi: tuple = ()
    Theta: tuple = ()

    def __post_init__(self):
        for name in ("phi", "theta", "Phi", "Theta"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.alpha, self.d, self.D, *self.phi, *self.theta, *self.Phi, *self.Theta]
        )

    @staticmethod
    def coord_names(spec: SeasonalSpec) -> list[str]:
        names = ["alpha", "d", "D"]
        names += [f"phi{i+1}" for i in range(spec.p)]
        names += [f"theta{i+1}" for i in range(spec.q)]
        names += [f"Phi{i+1}" for i in range(spec.P)]
        names += [f"Theta{i+1}" for i in range(spec.Q)]
        return names

    @staticmethod
    def from_array(vec, spec: SeasonalSpec) -> "ArfismaParams":
        vec = np.asarray(vec, dtype=float)
        if vec.size != spec.n_params:
            raise ValueError(f"expected {spec.n_params} coordinates, got {vec.size}")
        i = 3
        phi = tuple(vec[i : i + spec.p]); i += spec.p
        theta = tuple(vec[i : i + spec.q]); i += spec.q
        Phi = tuple(vec[i : i + spec.P]); i += spec.P
        Theta = tuple(vec[i : i + spec.Q])
        return ArfismaParams(vec[0], vec[1], vec[2], phi, theta, Phi, Theta)


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.valid


def _expand_seasonal(coeffs, s: int) -> np.ndarray:
    """Dense ascending coefficients of a polynomial in z^s."""
    out = np.zeros(len(coeffs) * s + 1 if coeffs else 1)
    out[0] = 1.0
    for i, c in enumerate(coeffs, start=1):
        out[i * s] = c
    return out


def ar_polynomial(psi: ArfismaParams, spec: SeasonalSpec) -> np.ndarray:
    """Ascending coefficients of phi(z) * PHI(z^s)."""
    base = np.r_[1.0, -np.asarray(psi.phi)] if psi.phi else np.array([1.0])
    seas = _expand_seasonal([-v for v in psi.Phi], spec.s)
    return np.convolve(base, seas)


def ma_polynomial(psi: ArfismaParams, spec: SeasonalSpec) -> np.ndarray:
    """Ascending coefficients of theta(z) * THETA(z^s)."""
    base = np.r_[1.0, np.asarray(psi.theta)] if psi.theta else np.array([1.0])
    seas = _expand_seasonal(list(psi.Theta), spec.s)
    return np.convolve(base, seas)


def _poly_roots(coeffs_ascending: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs_ascending, dtype=float), trim="b")
    if c.size <= 1:
        return np.array([], dtype=complex)
    return np.roots(c[::-1])


def validate_params(
    psi: ArfismaParams,
    spec: SeasonalSpec,
    margin: float = 1e-6,
    root_tol: float = 1e-6,
) -> ValidationResult:
    """Check membership of ``psi`` in the admissible parameter set.

    Conditions, each reported by name when violated:
      * tail index in (1, 2];
      * coefficient tuples match the declared orders;
      * memory condition |d + D| < 1 - 1/alpha and |D| < 1 - 1/alpha;
      * AR and MA polynomial products free of roots with |z| <= 1 + margin;
      * no (numerically) common zeros between the AR and MA products.
    """
    violations = []
    if not 1.0 < psi.alpha <= 2.0:
        violations.append("alpha_range: alpha must be in (1, 2]")
    if (len(psi.phi), len(psi.theta), len(psi.Phi), len(psi.Theta)) != (
        spec.p, spec.q, spec.P, spec.Q,
    ):
        violations.append("order_mismatch: coefficient counts differ from spec orders")
        return ValidationResult(False, tuple(violations))
    if 1.0 < psi.alpha <= 2.0:
        bound = 1.0 - 1.0 / psi.alpha
        if not abs(psi.d + psi.D) < bound:
            violations.append(
                f"memory_sum: |d + D| = {abs(psi.d + psi.D):.6g} >= 1 - 1/alpha = {bound:.6g}"
            )
        if not abs(psi.D) < bound:
            violations.append(
                f"memory_seasonal: |D| = {abs(psi.D):.6g} >= 1 - 1/alpha = {bound:.6g}"
            )
    ar_roots = _poly_roots(ar_polynomial(psi, spec))
    ma_roots = _poly_roots(ma_polynomial(psi, spec))
    if ar_roots.size and np.abs(ar_roots).min() <= 1.0 + margin:
        violations.append("ar_roots: AR polynomial has a root inside |z| <= 1 + margin")
    if ma_roots.size and np.abs(ma_roots).min() <= 1.0 + margin:
        violations.append("ma_roots: MA polynomial has a root inside |z| <= 1 + margin")
    if ar_roots.size and ma_roots.size:
        dist = np.abs(ar_roots[:, None] - ma_roots[None, :])
        if dist.min() <= root_tol:
            violations.append("common_zeros: AR and MA polynomials share a zero")
    return ValidationResult(not violations, tuple(violations))


@njit(cache=True)
def _gegenbauer_kernel(d: float, nu: float, J: int) -> np.ndarray:
    c = np.zeros(J + 1)
    c[0] = 1.0
    if J >= 1:
        c[1] = 2.0 * d * nu
    for j in range(2, J + 1):
        c[j] = (
            2.0 * nu * ((d - 1.0) / j + 1.0) * c[j - 1]
            - (2.0 * (d - 1.0) / j + 1.0) * c[j - 2]
        )
    return c


def gegenbauer(d: float, nu: float, J: int) -> np.ndarray:
    """Coefficients C_0..C_J of the expansion of (1 - 2 nu z + z^2)^(-d)."""
    if J < 0:
        raise ValueError("truncation length must be >= 0")
    if not -1.0 <= nu <= 1.0:
        raise ValueError(f"nu must be in [-1, 1], got {nu}")
    return _gegenbauer_kernel(float(d), float(nu), int(J))


def _conv_trunc(a: np.ndarray, b: np.ndarray, J: int) -> np.ndarray:
    if max(len(a), len(b)) >= _FFT_CONV_THRESHOLD:
        return fftconvolve(a, b)[: J + 1]
    return np.convolve(a, b)[: J + 1]


def _seasonal_exponents(d: float, D: float, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Gegenbauer exponents and frequencies for (1-B)^d (1-B^s)^D.

    One factor per seasonal half-frequency 2*pi*j/s, j = 0..floor(s/2).  The
    factor at frequency 0 carries (d+D)/2; the one at pi (present only for
    even s) carries D/2 because it is a squared real root; all interior
    factors carry D.  For s = 1 the single factor (d+D)/2 at frequency 0
    reproduces the plain fractional difference of total order d + D.
    """
    half = s // 2
    nus = np.cos(2.0 * np.pi * np.arange(half + 1) / s)
    expo = np.full(half + 1, float(D))
    expo[0] = (d + D) / 2.0
    if half >= 1 and s % 2 == 0:
        expo[half] = D / 2.0
    return expo, nus


def seasonal_memory_coeffs(d: float, D: float, s: int, J: int, sign: int = +1) -> np.ndarray:
    """Series coefficients of the seasonal fractional-difference operator.

    With ``sign=+1`` returns the expansion of the inverse operator
    prod_i (1 - 2 nu_i z + z^2)^(-d_i) (the weights feeding the MA side);
    with ``sign=-1`` all exponents are negated, giving the direct operator
    (the weights feeding the AR side).  Computed by iterated truncated
    convolution of the factor expansions.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if J < 0:
        raise ValueError("truncation length must be >= 0")
    expo, nus = _seasonal_exponents(d, D, s)
    if sign < 0:
        expo = -expo
    out = gegenbauer(expo[0], nus[0], J)
    for e, nu in zip(expo[1:], nus[1:]):
        out = _conv_trunc(out, gegenbauer(e, nu, J), J)
    return out


@njit(cache=True)
def _series_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Power-series division num/den truncated to len(num); den[0] must be 1."""
    J = num.shape[0]
    L = den.shape[0]
    out = np.empty(J)
    for j in range(J):
        acc = num[j]
        kmax = min(j, L - 1)
        for k in range(1, kmax + 1):
            acc -= den[k] * out[j - k]
        out[j] = acc
    return out


def ma_coeffs(psi: ArfismaParams, spec: SeasonalSpec, J: int) -> np.ndarray:
    """Truncated MA(infinity) coefficients c_0..c_J of the process.

    Solves ma_poly(z) * b(z) = ar_poly(z) * c(z) for c by polynomial
    multiplication of the MA side and synthetic division by the AR side.
    c_0 = 1.
    """
    b = seasonal_memory_coeffs(psi.d, psi.D, spec.s, J, sign=+1)
    num = _conv_trunc(ma_polynomial(psi, spec), b, J)
    return _series_divide(num, ar_polynomial(psi, spec))


def ar_coeffs(psi: ArfismaParams, spec: SeasonalSpec, J: int) -> np.ndarray:
    """Truncated AR(infinity) coefficients ct_0..ct_J of the process.

    Same structure as ``ma_coeffs`` with the roles of the polynomial
    products exchanged and the memory exponents negated.  ct_0 = 1.
    """
    pi_w = seasonal_memory_coeffs(psi.d, psi.D, spec.s, J, sign=-1)
    num = _conv_trunc(ar_polynomial(psi, spec), pi_w, J)
    return _series_divide(num, ma_polynomial(psi, spec))


@lru_cache(maxsize=128)
def _ma_coeffs_cached(psi: ArfismaParams, spec: SeasonalSpec, J: int):
    out = ma_coeffs(psi, spec, J)
    out.setflags(write=False)
    return out


def ma_coeffs_cached(psi: ArfismaParams, spec: SeasonalSpec, J: int) -> np.ndarray:
    """Read-only memoized variant of ``ma_coeffs`` (keyed by exact values)."""
    return _ma_coeffs_cached(psi, spec, J)


def power_transfer(psi: ArfismaParams, spec: SeasonalSpec, lam, singular_tol: float = 1e-12):
    """Power transfer function h(lambda) on [-pi, pi].

    |ma(e^{-i lam}) MA(e^{-i lam s})|^2 / |ar(...) AR(...)|^2 *
    |2 sin(lam/2)|^{-2d} * |2 sin(lam s/2)|^{-2D}.

    Raises SingularFrequencyError at lambda = 0 (when d + D > 0) and at
    seasonal harmonics (when the relevant memory exponent is positive);
    at those frequencies the function diverges.
    """
    lam_arr = np.asarray(lam, dtype=float)
    scalar = lam_arr.ndim == 0
    lam_arr = np.atleast_1d(lam_arr).ravel()

    ns = np.abs(2.0 * np.sin(lam_arr / 2.0))
    ss = np.abs(2.0 * np.sin(lam_arr * spec.s / 2.0))
    at_zero = ns < singular_tol
    at_seasonal = (ss < singular_tol) & ~at_zero
    # near 0 the memory factors combine as lam^(-2(d+D)); at an interior
    # seasonal harmonic only the seasonal factor blows up
    if at_zero.any() and psi.d + psi.D > 0.0:
        raise SingularFrequencyError("transfer function diverges at frequency 0")
    if at_seasonal.any() and psi.D > 0.0:
        raise SingularFrequencyError("transfer function diverges at a seasonal harmonic")

    z = np.exp(-1j * lam_arr)
    zs = np.exp(-1j * lam_arr * spec.s)
    ma_base = np.r_[1.0, psi.theta] if psi.theta else np.array([1.0])
    ar_base = np.r_[1.0, [-v for v in psi.phi]] if psi.phi else np.array([1.0])
    ma_seas = np.r_[1.0, psi.Theta] if psi.Theta else np.array([1.0])
    ar_seas = np.r_[1.0, [-v for v in psi.Phi]] if psi.Phi else np.array([1.0])
    polyval = np.polynomial.polynomial.polyval
    num = polyval(z, ma_base) * polyval(zs, ma_seas)
    den = polyval(z, ar_base) * polyval(zs, ar_seas)
    arma = np.abs(num / den) ** 2

    regular = ~(at_zero | at_seasonal)
    mem = np.ones_like(lam_arr)
    mem[regular] = ns[regular] ** (-2.0 * psi.d) * ss[regular] ** (-2.0 * psi.D)
    if at_zero.any():
        total = psi.d + psi.D
        mem[at_zero] = 0.0 if total < 0.0 else float(spec.s) ** (-2.0 * psi.D)
    if at_seasonal.any():
        if psi.D < 0.0:
            mem[at_seasonal] = 0.0
        else:
            mem[at_seasonal] = ns[at_seasonal] ** (-2.0 * psi.d)
    out = arma * mem
    return float(out[0]) if scalar else out

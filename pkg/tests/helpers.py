"""Independent brute-force oracles used across test modules.

Everything here deliberately avoids the package's computational paths:
series come from plain binomial-coefficient products, polynomial products
from numpy convolution, and series division from a triangular linear solve.
"""

import numpy as np
from scipy.linalg import solve_triangular


def pow_series(c1, c2, expo, J):
    """Coefficients of (1 + c1 z + c2 z^2)^expo when the base is (1 + c z^k).

    Supports the three factor shapes needed: (1 - z), (1 + z), (1 + z^2),
    each raised to a real power, via the generalized binomial series.
    """
    if c2 == 0.0:
        out = np.zeros(J + 1)
        out[0] = 1.0
        term = 1.0
        for j in range(1, J + 1):
            term *= c1 * (expo - j + 1) / j
            out[j] = term
        return out
    if c1 == 0.0:
        base = pow_series(c2, 0.0, expo, J // 2)
        out = np.zeros(J + 1)
        out[:: 2] = base[: J // 2 + 1]
        return out
    raise ValueError("unsupported factor shape")


def oracle_seasonal_b(d, D, s, J):
    """Inverse-operator expansion of (1-B)^d (1-B^s)^D by explicit binomials."""
    total = pow_series(-1.0, 0.0, -(d + D), J)
    if s == 1:
        return total
    if s == 2:
        factors = [pow_series(1.0, 0.0, -D, J)]
    elif s == 4:
        factors = [pow_series(1.0, 0.0, -D, J), pow_series(0.0, 1.0, -D, J)]
    else:
        raise ValueError("oracle supports s in {1, 2, 4}")
    out = total
    for f in factors:
        out = np.convolve(out, f)[: J + 1]
    return out


def oracle_series_divide(num, den):
    """Truncated power-series division by a triangular linear solve."""
    J = len(num)
    mat = np.zeros((J, J))
    for k, v in enumerate(den[:J]):
        mat[k:, :] += v * np.eye(J, k=-k)[k:, :]
    return solve_triangular(mat, np.asarray(num, dtype=float), lower=True)


def oracle_ma_coeffs(psi, spec, J):
    """MA(infinity) coefficients by binomials + convolution + solve."""
    b = oracle_seasonal_b(psi.d, psi.D, spec.s, J)
    ma = np.array([1.0, *psi.theta])
    ar = np.array([1.0, *(-v for v in psi.phi)])
    if psi.Theta:
        seas = np.zeros(spec.s * len(psi.Theta) + 1)
        seas[0] = 1.0
        seas[spec.s :: spec.s] = psi.Theta
        ma = np.convolve(ma, seas)
    if psi.Phi:
        seas = np.zeros(spec.s * len(psi.Phi) + 1)
        seas[0] = 1.0
        seas[spec.s :: spec.s] = [-v for v in psi.Phi]
        ar = np.convolve(ar, seas)
    num = np.convolve(ma, b)[: J + 1]
    return oracle_series_divide(num, ar)


def oracle_ar_coeffs(psi, spec, J):
    """AR(infinity) coefficients: exponents negated, polynomial roles swapped."""
    pi_w = oracle_seasonal_b(-psi.d, -psi.D, spec.s, J)
    ma = np.array([1.0, *psi.theta])
    ar = np.array([1.0, *(-v for v in psi.phi)])
    if psi.Theta:
        seas = np.zeros(spec.s * len(psi.Theta) + 1)
        seas[0] = 1.0
        seas[spec.s :: spec.s] = psi.Theta
        ma = np.convolve(ma, seas)
    if psi.Phi:
        seas = np.zeros(spec.s * len(psi.Phi) + 1)
        seas[0] = 1.0
        seas[spec.s :: spec.s] = [-v for v in psi.Phi]
        ar = np.convolve(ar, seas)
    num = np.convolve(ar, pi_w)[: J + 1]
    return oracle_series_divide(num, ma)

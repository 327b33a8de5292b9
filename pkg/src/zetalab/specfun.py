"""Special functions and closed-form block statistics.

The exponential integral E1 and the lower incomplete gamma function are
evaluated here from their series / continued-fraction / asymptotic forms in
double precision. Everything else in the package that needs the dyadic block
variances or the smooth (prime number theorem) surrogate covariances goes
through this module.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError, UnderflowWarning

EULER_GAMMA = 0.5772156649015329
_EPS = 2.220446049250313e-16
_TINY = 1e-300


@dataclass(frozen=True)
class EvalPolicy:
    """Evaluation switches for E1.

    series_cutoff: x below which the convergent power series is used.
    asym_terms: number of terms N kept in the large-x asymptotic expansion.
    quad_tol: tolerance used by the quadrature reference evaluations.
    """

    series_cutoff: float = 1.0
    asym_terms: int = 30
    quad_tol: float = 1e-13

    def __post_init__(self):
        if not self.series_cutoff > 0:
            raise DomainError("series_cutoff must be positive")
        if self.asym_terms < 1:
            raise DomainError("asym_terms must be >= 1")
        if not self.quad_tol > 0:
            raise DomainError("quad_tol must be positive")


DEFAULT_POLICY = EvalPolicy()


# ---------------------------------------------------------------------------
# exponential integral


def _e1_series(x: float) -> float:
    # -gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!)
    total = 0.0
    term = 1.0
    for n in range(1, 200):
        term *= -x / n
        contrib = -term / n
        total += contrib
        if abs(contrib) < _EPS * max(abs(total), 1e-30) * 0.1:
            break
    return -EULER_GAMMA - math.log(x) + total


def _e1_continued_fraction(x: float) -> float:
    # modified Lentz on E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x)
    raise QuadratureError(f"E1 continued fraction did not converge at x={x}")


def _e1_asymptotic(x: float, n_terms: int) -> float:
    total = 1.0
    term = 1.0
    for n in range(1, n_terms + 1):
        term *= -n / x
        total += term
    return math.exp(-x) / x * total


def _asymptotic_ok(x: float, n_terms: int) -> bool:
    # last retained term N!/x^N must be below double resolution
    if x <= n_terms:
        return False
    log_last = math.lgamma(n_terms + 1) - n_terms * math.log(x)
    return log_last < math.log(1e-17)


def exp_integral_e1(x: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """E1(x) = int_x^inf e^{-t}/t dt for real x > 0.

    Returns 0.0 and emits ``UnderflowWarning`` when the result is below the
    smallest representable double.
    """
    x = float(x)
    if not x > 0 or math.isnan(x):
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x < policy.series_cutoff:
        return _e1_series(x)
    if x > 745.0:
        warnings.warn(f"E1({x}) underflows to 0", UnderflowWarning, stacklevel=2)
        return 0.0
    if _asymptotic_ok(x, policy.asym_terms):
        value = _e1_asymptotic(x, policy.asym_terms)
    else:
        value = _e1_continued_fraction(x)
    if value == 0.0:
        warnings.warn(f"E1({x}) underflows to 0", UnderflowWarning, stacklevel=2)
    return value


def e1_by_quadrature(x: float, tol: float = 1e-13) -> float:
    """Reference E1 by adaptive quadrature of the defining integral.

    The piece on [x, 1] is written in the variable s = log t, where the
    integrand exp(-e^s) is smooth.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    opts = dict(epsabs=tol * 1e-2, epsrel=tol, limit=500)
    if x < 1.0:
        lo, _ = integrate.quad(lambda s: math.exp(-math.exp(s)), math.log(x), 0.0, **opts)
        hi, _ = integrate.quad(lambda t: math.exp(-t) / t, 1.0, np.inf, **opts)
        return lo + hi
    val, _ = integrate.quad(lambda t: math.exp(-(t - x)) / t, x, np.inf, **opts)
    return val * math.exp(-x)


# ---------------------------------------------------------------------------
# incomplete gamma


def lower_incomplete_gamma(m: float, x: float) -> float:
    """gamma(m, x) = int_0^x e^{-t} t^{m-1} dt."""
    m = float(m)
    x = float(x)
    if not m > 0:
        raise DomainError(f"lower incomplete gamma requires m > 0, got {m}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"lower incomplete gamma requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < m + 1.0:
        # x^m e^{-x} sum_k x^k / (m (m+1) ... (m+k))
        ap = m
        term = 1.0 / m
        total = term
        for _ in range(10000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return total * math.exp(-x + m * math.log(x))
    # upper tail by Lentz continued fraction, then subtract from Gamma(m)
    b = x + 1.0 - m
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - m)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    upper = math.exp(-x + m * math.log(x)) * h
    return math.gamma(m) - upper


# ---------------------------------------------------------------------------
# dyadic scales


def n_of_sigma(sigma: float) -> int:
    """Integer scale n(sigma) = ceil(log2(1/(2 sigma - 1)))."""
    if not sigma > 0.5:
        raise DomainError(f"sigma must exceed 1/2, got {sigma}")
    return math.ceil(math.log2(1.0 / (2.0 * sigma - 1.0)))


def sigma_of_n(n: int) -> float:
    """sigma_n = 1/2 + 2^-(n+1); the left end of the sigma-window with n(sigma) = n."""
    return 0.5 + 2.0 ** (-(n + 1))


def _check_sigma(sigma):
    if not sigma > 0.5:
        raise DomainError(f"sigma must exceed 1/2, got {sigma}")


def block_variance_v2(k: int, sigma: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """v_k^2 = (E1[(2s-1) 2^{k-1}] - E1[(2s-1) 2^k]) / 2."""
    _check_sigma(sigma)
    if k < 1:
        raise DomainError(f"block index must be >= 1, got {k}")
    c = 2.0 * sigma - 1.0
    return 0.5 * (exp_integral_e1(c * 2.0 ** (k - 1), policy) - exp_integral_e1(c * 2.0**k, policy))


def block_variance_range(k1: int, k2: int, sigma: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Closed form of sum_{k=k1+1}^{k2} v_k^2."""
    _check_sigma(sigma)
    if not 0 <= k1 < k2:
        raise DomainError(f"need 0 <= k1 < k2, got {k1}, {k2}")
    c = 2.0 * sigma - 1.0
    return 0.5 * (exp_integral_e1(c * 2.0**k1, policy) - exp_integral_e1(c * 2.0**k2, policy))


def logweight_integral(a: float, b: float, sigma: float, m: float, q: float = 1.0) -> float:
    """int_a^b u^{m-1} e^{-(2 q sigma - 1) u} du, the smooth analogue of
    sum (log p)^m p^{-2 q sigma} over a < log p <= b."""
    _check_sigma(sigma)
    c = 2.0 * q * sigma - 1.0
    if not c > 0:
        raise DomainError("need 2 q sigma > 1")
    return c ** (-m) * (lower_incomplete_gamma(m, c * b) - lower_incomplete_gamma(m, c * a))


def surrogate_block_covariance(
    k: int,
    sigma: float,
    delta: float,
    policy: EvalPolicy = DEFAULT_POLICY,
    max_pieces: int = 400_000,
) -> float:
    """(1/2) int_{2^{k-1}}^{2^k} cos(delta u) e^{-(2 sigma-1) u} du/u.

    Adaptive Gauss-Kronrod on each interval between consecutive zeros of
    cos(delta u), summed with fsum.
    """
    _check_sigma(sigma)
    if k < 1:
        raise DomainError(f"block index must be >= 1, got {k}")
    delta = abs(float(delta))
    c = 2.0 * sigma - 1.0
    a, b = 2.0 ** (k - 1), 2.0**k
    if delta > 0:
        j_lo = math.ceil(a * delta / math.pi - 0.5)
        j_hi = math.floor(b * delta / math.pi - 0.5)
        n_zero = max(0, j_hi - j_lo + 1)
        if n_zero > max_pieces:
            raise QuadratureError(
                f"oscillatory integrand needs {n_zero} pieces (k={k}, delta={delta}); limit {max_pieces}"
            )
        zeros = (np.arange(j_lo, j_hi + 1) + 0.5) * math.pi / delta if n_zero else np.empty(0)
        zeros = zeros[(zeros > a) & (zeros < b)]
        edges = np.concatenate([[a], zeros, [b]])
    else:
        edges = np.array([a, b])

    def f(u):
        return math.cos(delta * u) * math.exp(-c * u) / u

    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, info = integrate.quad(
            f, lo, hi, epsabs=policy.quad_tol * 1e-3, epsrel=policy.quad_tol, limit=200, full_output=1
        )[:3]
        if err > max(1e-9, 1e3 * policy.quad_tol * abs(val)) and err > 1e-14:
            raise QuadratureError(
                f"quadrature did not converge on [{lo}, {hi}]: value={val}, err={err}, "
                f"neval={info.get('neval')}"
            )
        pieces.append(val)
    return 0.5 * math.fsum(pieces)


def surrogate_covariance_table(k: int, sigma: float, lags) -> np.ndarray:
    """Vectorised surrogate block covariance over an array of lags.

    Uses the closed form (1/2) Re[E1(z 2^{k-1}) - E1(z 2^k)], z = 2 sigma - 1 - i*lag,
    with the complex exponential integral from scipy.
    """
    _check_sigma(sigma)
    lags = np.abs(np.asarray(lags, dtype=float))
    z = (2.0 * sigma - 1.0) - 1j * lags
    a, b = 2.0 ** (k - 1), 2.0**k
    return 0.5 * np.real(special.exp1(z * a) - special.exp1(z * b))

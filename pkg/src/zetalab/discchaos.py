"""Holomorphic multiplicative chaos on the unit disc.

    G(z) = sum_n G_n z^n / sqrt(n),   G_n = (V_n - i W_n) / sqrt(2),
    U_r(theta) = Re G(r e^{i theta}) = sum_n r^n / sqrt(2n) (V_n cos n theta + W_n sin n theta)

Circles are synthesised with one real inverse FFT. The coefficient streams are
keyed by (seed, replica) and read as prefixes, so the circles of one replica
at different radii are all restrictions of the same random function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import AliasingError, DomainError
from .streams import stream

MODE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CircleFieldSample:
    r: float
    theta_grid: np.ndarray
    values: np.ndarray
    n_modes: int
    seed: int | None
    replica: int = 0
    expected_var: float = 0.0  # E U_r^2 of the truncated series
    coef_energy: float = 0.0  # sum_n r^{2n}/(2n) (V_n^2 + W_n^2) / 2

    @property
    def normalizer(self) -> float:
        """log 1/(1 - r)."""
        return math.log(1.0 / (1.0 - self.r))

    @property
    def domain_length(self) -> float:
        return 2.0 * math.pi


def radius_of_n(n: float) -> float:
    """r_n = 1 - e^{-n}."""
    return -math.expm1(-n)


def n_modes_for(r: float, tol: float = MODE_TOL) -> int:
    """Smallest n with r^n / sqrt(2n) < tol."""
    if not 0 < r < 1:
        raise DomainError(f"need 0 < r < 1, got {r}")
    log_r = math.log(r)
    log_tol = math.log(tol)

    def small(n):
        return n * log_r - 0.5 * math.log(2 * n) < log_tol

    hi = 1
    while not small(hi):
        hi *= 2
    lo = max(1, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if small(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def default_grid_size(n_modes: int) -> int:
    """Smallest power of two M with n_modes <= M/2 - 1."""
    m = 2
    while m // 2 - 1 < n_modes:
        m *= 2
    return m


def disc_coefficients(n_modes: int, seed: int, replica: int = 0):
    """(V_1..V_N, W_1..W_N); prefix-consistent in N for a fixed (seed, replica)."""
    v = stream(seed, "disc-V", replica).standard_normal(n_modes)
    w = stream(seed, "disc-W", replica).standard_normal(n_modes)
    return v, w


def mode_amplitudes(r: float, n_modes: int) -> np.ndarray:
    n = np.arange(1, n_modes + 1, dtype=float)
    return np.exp(n * math.log(r)) / np.sqrt(2.0 * n)


def sample_disc_field(
    r: float,
    grid_size: int | None = None,
    rng: np.random.Generator | None = None,
    *,
    seed: int | None = None,
    replica: int = 0,
    mode_tol: float = MODE_TOL,
    n_modes: int | None = None,
    phase: float = 0.0,
) -> CircleFieldSample:
    """U_r on the grid theta_j = 2 pi j / M.

    Coefficients come from ``rng`` when given, else from the keyed streams of
    (seed, replica). ``phase`` gives Re(e^{i phase} G) instead of Re G.
    """
    if not 0 < r < 1:
        raise DomainError(f"need 0 < r < 1, got {r}")
    if n_modes is None:
        n_modes = n_modes_for(r, mode_tol)
    m_pts = default_grid_size(n_modes) if grid_size is None else int(grid_size)
    if m_pts < 2 or m_pts & (m_pts - 1):
        raise DomainError(f"grid size must be a power of two, got {m_pts}")
    if n_modes > m_pts // 2 - 1:
        raise AliasingError(f"{n_modes} modes need a grid of at least {default_grid_size(n_modes)} points, got {m_pts}")
    if rng is not None:
        v = rng.standard_normal(n_modes)
        w = rng.standard_normal(n_modes)
    else:
        if seed is None:
            raise DomainError("either rng or seed is required")
        v, w = disc_coefficients(n_modes, seed, replica)
    amp = mode_amplitudes(r, n_modes)
    spec = np.zeros(m_pts // 2 + 1, dtype=complex)
    coef = amp * (v - 1j * w)
    if phase:
        coef = coef * np.exp(1j * phase)
    spec[1 : n_modes + 1] = coef * (m_pts / 2)
    values = np.fft.irfft(spec, m_pts)
    return CircleFieldSample(
        r=r,
        theta_grid=2.0 * math.pi * np.arange(m_pts) / m_pts,
        values=values,
        n_modes=n_modes,
        seed=seed,
        replica=replica,
        expected_var=math.fsum(amp**2),
        coef_energy=math.fsum(0.5 * np.abs(coef) ** 2),
    )


def disc_covariance(z: complex, z2: complex) -> float:
    """E U(z) U(z2) = 1/2 log 1/|1 - z conj(z2)|."""
    z, z2 = complex(z), complex(z2)
    if abs(z) >= 1 or abs(z2) >= 1:
        raise DomainError("points must lie in the open unit disc")
    return -0.5 * math.log(abs(1.0 - z * z2.conjugate()))


def gmc_mass(sample: CircleFieldSample, beta: float) -> float:
    """(1/2pi) int exp(beta U_r - beta^2/2 E U_r^2) d theta, trapezoid rule."""
    if not 0 < beta < 2:
        raise DomainError(f"chaos normalisation needs beta in (0, 2), got {beta}")
    log_mean = logsumexp(beta * sample.values) - math.log(sample.values.size)
    return math.exp(log_mean - 0.5 * beta * beta * sample.expected_var)


def max_statistic(sample: CircleFieldSample) -> float:
    return float(np.max(sample.values))


def bp_derivative_disc(r: float, rng: np.random.Generator, mode_tol: float = MODE_TOL) -> complex:
    """(1 - r) G'(r) = (1 - r) sum_n sqrt(n) G_n r^{n-1}, truncated where terms drop below mode_tol."""
    if not 0 <= r < 1:
        raise DomainError(f"need 0 <= r < 1, got {r}")
    if r == 0.0:
        n_modes = 1
    else:
        n_modes = 1
        log_r = math.log(r)
        while math.log1p(-r) + 0.5 * math.log(n_modes) + (n_modes - 1) * log_r >= math.log(mode_tol):
            n_modes *= 2
    n = np.arange(1, n_modes + 1, dtype=float)
    g = (rng.standard_normal(n_modes) - 1j * rng.standard_normal(n_modes)) / math.sqrt(2.0)
    weights = np.sqrt(n) * np.power(r, n - 1)
    return complex((1.0 - r) * np.sum(weights * g))


def bp_ratio_disc(r: float, rng: np.random.Generator, mode_tol: float = MODE_TOL) -> float:
    """One draw of (1 - r) |G'(r)|."""
    return abs(bp_derivative_disc(r, rng, mode_tol))


def bp_variance_disc(r: float) -> float:
    """Var of (1 - r) Re G'(r) = (1 - r)^2 / (2 (1 - r^2)^2)."""
    return 0.5 * (1.0 - r) ** 2 / (1.0 - r * r) ** 2

"""Sampling the randomized zeta field X_h = sum_p Re(U_p p^{-ih}) / p^sigma.

The prime sum is split into dyadic blocks (see ``primes``). Blocks up to the
hybrid cutoff K0 are simulated exactly, one uniform phase per prime. Higher
blocks contain far too many primes to enumerate and are replaced by centred
stationary Gaussian processes with the smooth covariance

    rho_k(delta) = 1/2 int_{2^{k-1}}^{2^k} cos(delta u) e^{-(2 sigma - 1) u} du / u.

The Gaussian surrogate is synthesised spectrally: the integral above is a
spectral representation, so discretising it with Gauss-Legendre panels gives
a finite sum of independent Gaussian Fourier modes whose covariance equals the
quadrature of rho_k, accurate to round-off for all lags in [0, 1].

The prime 2 forms block 0 and is always simulated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .config import RunConfig
from .errors import DomainError, EmbeddingError
from .fourier import nonuniform_cos_sum, uniform_grid
from .primes import DEFAULT_K_MAX, prime_power_sum, sieve_block
from .report import ErrorReport
from .specfun import n_of_sigma, surrogate_covariance_table
from .streams import stream

PANEL_WIDTH = 4.0
PANEL_ORDER = 16


@dataclass(frozen=True, eq=False)
class BlockFieldSample:
    k: int
    h_grid: np.ndarray
    values: np.ndarray
    origin: str  # "exact" | "surrogate"


@dataclass(frozen=True, eq=False)
class FieldSample:
    sigma: float
    h_grid: np.ndarray
    values: np.ndarray
    n: int
    k0: int
    k_top: int
    seed: int
    replica: int = 0
    weight_model: str = "uniform-circle"
    blocks: tuple = field(default=())

    @property
    def normalizer(self) -> float:
        """log 1/(sigma - 1/2), the scale log of the free energy."""
        return math.log(1.0 / (self.sigma - 0.5))

    @property
    def domain_length(self) -> float:
        return 1.0


def default_grid_size(n: int) -> int:
    return (1 << (n + 2)) + 1


def block_generator(seed: int, replica: int, k: int) -> np.random.Generator:
    return stream(seed, "euler-block", replica, k)


# ---------------------------------------------------------------------------
# block coefficients


@lru_cache(maxsize=None)
def surrogate_nodes(k: int, panel_width: float = PANEL_WIDTH, order: int = PANEL_ORDER):
    """Gauss-Legendre nodes and weights covering (2^{k-1}, 2^k]."""
    a, b = 2.0 ** (k - 1), 2.0**k
    n_panels = max(1, math.ceil((b - a) / panel_width))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    gw = (half[:, None] * w[None, :]).ravel()
    u.setflags(write=False)
    gw.setflags(write=False)
    return u, gw


def surrogate_spectral_weights(k: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies u_j and variances w_j with sum_j w_j cos(delta u_j) ~ rho_k(delta)."""
    u, gw = surrogate_nodes(k)
    c = 2.0 * sigma - 1.0
    return u, 0.5 * gw * np.exp(-c * u) / u


def _exact_coefficients(k, sigma, rng, weight_model, k_max):
    blk = sieve_block(k, k_max)
    amp = np.exp(-sigma * blk.logs)
    if weight_model == "uniform-circle":
        theta = rng.random(len(blk))
        unit = np.exp(2j * math.pi * theta)
    elif weight_model == "gaussian":
        g = rng.standard_normal((2, len(blk)))
        unit = (g[0] + 1j * g[1]) / math.sqrt(2.0)
    else:
        raise DomainError(f"unknown weight model {weight_model!r}")
    return blk.logs, amp * unit


def _surrogate_coefficients(k, sigma, rng):
    u, w = surrogate_spectral_weights(k, sigma)
    g = rng.standard_normal((2, u.size))
    return u, np.sqrt(w) * (g[0] + 1j * g[1])


def _check_sigma(sigma):
    if not sigma > 0.5:
        raise DomainError(f"sigma must exceed 1/2, got {sigma}")


def sample_exact_block(
    k: int,
    sigma: float,
    grid_size: int,
    rng: np.random.Generator,
    weight_model: str = "uniform-circle",
    k_max: int = DEFAULT_K_MAX,
) -> BlockFieldSample:
    """Y_h(k) = sum over block k of Re(U_p p^{-ih}) / p^sigma on the grid."""
    _check_sigma(sigma)
    freqs, coeffs = _exact_coefficients(k, sigma, rng, weight_model, k_max)
    values = nonuniform_cos_sum(freqs, coeffs, grid_size)
    return BlockFieldSample(k=k, h_grid=uniform_grid(grid_size), values=values, origin="exact")


def sample_surrogate_block(
    k: int,
    sigma: float,
    grid_size: int,
    rng: np.random.Generator,
    method: str = "quadrature",
    padding: int = 2,
    clip_tol: float = 1e-8,
) -> BlockFieldSample:
    """Centred stationary Gaussian draw with covariance rho_k on the grid.

    ``method="quadrature"`` (default) uses the spectral Gauss-Legendre modes.
    ``method="circulant"`` embeds the tabulated covariance in a circulant
    matrix; this raises ``EmbeddingError`` when the embedding is indefinite,
    which is the usual outcome for these band-limited covariances.
    """
    _check_sigma(sigma)
    if k < 1:
        raise DomainError("surrogate blocks start at k = 1")
    if method == "quadrature":
        freqs, coeffs = _surrogate_coefficients(k, sigma, rng)
        values = nonuniform_cos_sum(freqs, coeffs, grid_size)
    elif method == "circulant":
        values = circulant_embedding_sample(k, sigma, grid_size, rng, padding=padding, clip_tol=clip_tol)
    else:
        raise DomainError(f"unknown surrogate method {method!r}")
    return BlockFieldSample(k=k, h_grid=uniform_grid(grid_size), values=values, origin="surrogate")


def circulant_eigenvalues(k: int, sigma: float, grid_size: int, padding: int = 2) -> np.ndarray:
    """Eigenvalues of the circulant embedding of rho_k tabulated on lags [0, padding]."""
    half = padding * (grid_size - 1)
    lags = np.arange(half + 1) / (grid_size - 1)
    row = surrogate_covariance_table(k, sigma, lags)
    row = np.concatenate([row, row[-2:0:-1]])
    return np.fft.rfft(row).real


def circulant_embedding_sample(k, sigma, grid_size, rng, padding=2, clip_tol=1e-8):
    lam = circulant_eigenvalues(k, sigma, grid_size, padding)
    lam_min = float(lam.min())
    if lam_min < -clip_tol * float(lam.max()):
        raise EmbeddingError(
            f"circulant embedding of block {k} is indefinite: min eigenvalue {lam_min:.3e} "
            f"(max {lam.max():.3e}); enlarge padding or use the quadrature method",
            min_eigenvalue=lam_min,
        )
    lam = np.clip(lam, 0.0, None)
    n = 2 * (lam.size - 1)
    full = np.concatenate([lam, lam[-2:0:-1]])
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.fft.fft(np.sqrt(full / n) * z)
    return x.real[:grid_size]


# ---------------------------------------------------------------------------
# full field


def field_layout(sigma: float, k0: int, tail_blocks: int, k_max: int = DEFAULT_K_MAX):
    """(n, k0_eff, k_top) for a field at sigma."""
    n = n_of_sigma(sigma)
    k_top = max(n + tail_blocks, 1)
    return n, min(k0, k_top, k_max), k_top


def sample_field(
    config: RunConfig,
    sigma: float,
    grid_size: int | None = None,
    replica: int = 0,
    phase: float = 0.0,
) -> FieldSample:
    """X_h^sigma on the uniform grid, blocks 0..k_top summed.

    Block k of replica r draws from the stream keyed (seed, r, k) whatever
    sigma is, so fields at different sigma within a replica are evaluations
    of one random function. ``phase`` rotates every weight by e^{i phase},
    giving Re(e^{i phase} sum_p U_p p^{-s}).
    """
    _check_sigma(sigma)
    n, k0, k_top = field_layout(sigma, config.k0, config.tail_blocks, config.k_max)
    m_pts = grid_size if grid_size is not None else default_grid_size(n)
    freqs, coeffs, blocks = [], [], []
    for k in range(0, k_top + 1):
        rng = block_generator(config.seed, replica, k)
        if k == 0 or k <= k0:
            f, c = _exact_coefficients(k, sigma, rng, config.weight_model, config.k_max)
            blocks.append((k, "exact"))
        else:
            f, c = _surrogate_coefficients(k, sigma, rng)
            blocks.append((k, "surrogate"))
        freqs.append(f)
        coeffs.append(c)
    coeffs = np.concatenate(coeffs)
    if phase:
        coeffs = coeffs * np.exp(1j * phase)
    values = nonuniform_cos_sum(np.concatenate(freqs), coeffs, m_pts)
    return FieldSample(
        sigma=sigma,
        h_grid=uniform_grid(m_pts),
        values=values,
        n=n,
        k0=k0,
        k_top=k_top,
        seed=config.seed,
        replica=replica,
        weight_model=config.weight_model,
        blocks=tuple(blocks),
    )


def field_variance(sigma: float, k0: int, tail_blocks: int, k_max: int = DEFAULT_K_MAX) -> float:
    """Variance of the simulated X_h (exact blocks by prime sums, surrogates by quadrature)."""
    _, k0, k_top = field_layout(sigma, k0, tail_blocks, k_max)
    total = 0.5 * prime_power_sum(-1, max(k0, 0), sigma, k_max)
    for k in range(k0 + 1, k_top + 1):
        total += math.fsum(surrogate_spectral_weights(k, sigma)[1])
    return total


# ---------------------------------------------------------------------------
# Laplace transform check


def laplace_series(p: int, sigma: float, lam: float) -> float:
    """E exp(lam W_h(p)) = sum_m (lam^2 / (4 p^{2 sigma}))^m / (m!)^2."""
    x = lam * lam / (4.0 * p ** (2.0 * sigma))
    total, term, m = 1.0, 1.0, 0
    while True:
        m += 1
        term *= x / (m * m)
        total += term
        if term < 1e-17 * total:
            return total


def laplace_check(p: int, sigma: float, lam: float, replicas: int, rng: np.random.Generator) -> ErrorReport:
    """Monte-Carlo mean of exp(lam W_h(p)) against the Bessel-type series."""
    if replicas < 1000:
        raise DomainError("laplace_check needs at least 1000 replicas")
    theta = rng.random(replicas)
    w = np.cos(2.0 * math.pi * theta) / p**sigma
    vals = np.exp(lam * w)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(replicas))
    return ErrorReport(
        name="laplace",
        exact=laplace_series(p, sigma, lam),
        estimate=mean,
        stderr=se,
        params={"p": p, "sigma": sigma, "lambda": lam, "replicas": replicas},
    )


# ---------------------------------------------------------------------------
# Gaussian half-plane model


def halfplane_covariance(s: complex, s2: complex, k_max: int = DEFAULT_K_MAX) -> float:
    """C(s, s') = 1/2 Re sum_p p^{-(s + conj s')}.

    Primes up to exp(2^k_max) are summed exactly; the remainder is the smooth
    integral 1/2 Re E1((s + conj s' - 1) 2^k_max).
    """
    w = complex(s) + complex(s2).conjugate()
    if not w.real > 1.0:
        raise DomainError(f"need Re(s + conj s2) > 1, got {w.real}")
    terms = []
    for k in range(0, k_max + 1):
        logs = sieve_block(k, k_max).logs
        terms.append(np.exp(-w.real * logs) * np.cos(w.imag * logs))
    head = math.fsum(np.concatenate(terms))
    tail = float(np.real(special.exp1((w - 1.0) * 2.0**k_max)))
    return 0.5 * (head + tail)

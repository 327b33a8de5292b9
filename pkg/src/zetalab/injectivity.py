"""Becker-Pommerenke blow-up diagnostics.

Euler model: at offsets eps_k = sigma_k - 1/2 the diagnostic is

    Y_k = eps_k * sum_p U_p log p * p^{-sigma_k},   E|Y_k|^2 -> 1/4.

Scale k uses its own disjoint range of dyadic blocks centred on the blocks
where (log p)^2 p^{-2 sigma_k} carries its mass, so Y_1, Y_2, ... are
independent. Blocks up to k_max are summed over the actual primes; higher
blocks are single complex Gaussians with the smooth (prime number theorem)
variance.

Disc model: X_k = (1 - r_k) G'(r_k) at r_k = 1 - 2^{-k}, drawn jointly from
the exact covariance (1 - r)(1 - r') / (1 - r r')^2.

A finite simulation can only show exceedance fractions growing with the
number of scales; it cannot establish that the supremum is almost surely
infinite. Reports are therefore exceedance curves, never verdicts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .errors import DomainError
from .primes import DEFAULT_K_MAX, sieve_block
from .specfun import lower_incomplete_gamma

BLOCK_SPACING = 7
BLOCK_BELOW = 4
BLOCK_ABOVE = 3

REPORT_HEADER = (
    "Exceedance fractions of the running maximum. Almost-sure unboundedness cannot be "
    "confirmed or refuted at finite scale; growth of these fractions with the number of "
    "scales is the only observable."
)


@dataclass(frozen=True, eq=False)
class BlowupSeries:
    """One replica of the diagnostic along the scales.

    ``scale_params`` holds sigma_k - 1/2 for the euler model (sigma_k itself
    rounds to 1/2 in double precision beyond k ~ 7) and r_k for the disc.
    """

    k_list: tuple
    scale_params: np.ndarray
    y_values: np.ndarray  # complex diagnostic per scale
    running_max: np.ndarray  # running max of |y|
    model: str
    seed: int | None = None
    replica: int = 0

    @property
    def y_abs(self) -> np.ndarray:
        return np.abs(self.y_values)


def _check_k_list(k_list):
    ks = [int(k) for k in k_list]
    if not ks:
        raise DomainError("k_list is empty")
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError(f"k_list must be strictly increasing positive integers, got {ks}")
    return tuple(ks)


def _series(ks, params, y, model, seed, replica):
    return BlowupSeries(
        k_list=ks,
        scale_params=np.asarray(params, dtype=float),
        y_values=y,
        running_max=np.maximum.accumulate(np.abs(y)),
        model=model,
        seed=seed,
        replica=replica,
    )


# ---------------------------------------------------------------------------
# euler model


def euler_offset(k: int) -> float:
    """eps_k = sigma_k - 1/2 = 2^{-(7k + 1)}."""
    return math.ldexp(1.0, -(BLOCK_SPACING * k + 1))


def euler_blocks(k: int) -> range:
    """Dyadic blocks assigned to scale k: (7k - 4, 7k + 3]."""
    centre = BLOCK_SPACING * k
    return range(centre - BLOCK_BELOW + 1, centre + BLOCK_ABOVE + 1)


def surrogate_logweight_variance(j: int, eps: float) -> float:
    """eps^2 int_{2^{j-1}}^{2^j} u e^{-2 eps u} du, written scale-free as
    (gamma(2, c b) - gamma(2, c a)) / 4 with c = 2 eps."""
    c = 2.0 * eps
    a, b = math.ldexp(1.0, j - 1), math.ldexp(1.0, j)
    return 0.25 * (lower_incomplete_gamma(2, c * b) - lower_incomplete_gamma(2, c * a))


def euler_expected_second_moment(k: int, k_max: int = DEFAULT_K_MAX) -> float:
    """E|Y_k|^2 of the simulated diagnostic (prime sums for exact blocks)."""
    eps = euler_offset(k)
    total = []
    for j in euler_blocks(k):
        if j <= k_max:
            logs = sieve_block(j, k_max).logs
            total.append(eps * eps * math.fsum(logs**2 * np.exp(-(1.0 + 2.0 * eps) * logs)))
        else:
            total.append(surrogate_logweight_variance(j, eps))
    return math.fsum(total)


def _euler_y(k, rng, weight_model, k_max):
    eps = euler_offset(k)
    parts = []
    for j in euler_blocks(k):
        if j <= k_max:
            logs = sieve_block(j, k_max).logs
            if weight_model == "uniform-circle":
                unit = np.exp(2j * math.pi * rng.random(logs.size))
            elif weight_model == "gaussian":
                g = rng.standard_normal((2, logs.size))
                unit = (g[0] + 1j * g[1]) / math.sqrt(2.0)
            else:
                raise DomainError(f"unknown weight model {weight_model!r}")
            w = eps * logs * np.exp(-(0.5 + eps) * logs)
            parts.append(complex(np.sum(w * unit)))
        else:
            sd = math.sqrt(0.5 * surrogate_logweight_variance(j, eps))
            g = rng.standard_normal(2)
            parts.append(complex(sd * g[0], sd * g[1]))
    return sum(parts)


def bp_series_euler(
    k_list,
    rng: np.random.Generator,
    *,
    weight_model: str = "uniform-circle",
    k_max: int = DEFAULT_K_MAX,
    seed: int | None = None,
    replica: int = 0,
) -> BlowupSeries:
    """Y_k for each k in k_list, each scale from its own disjoint blocks."""
    ks = _check_k_list(k_list)
    y = np.array([_euler_y(k, rng, weight_model, k_max) for k in ks], dtype=complex)
    return _series(ks, [euler_offset(k) for k in ks], y, "euler", seed, replica)


# ---------------------------------------------------------------------------
# disc model


def disc_radius(k: int) -> float:
    return 1.0 - math.ldexp(1.0, -k)


def disc_bp_kernel(radii) -> np.ndarray:
    """E X(r) conj X(r') for X(r) = (1 - r) G'(r)."""
    r = np.asarray(radii, dtype=float)
    one_minus = 1.0 - r
    return np.outer(one_minus, one_minus) / (1.0 - np.outer(r, r)) ** 2


def bp_series_disc(
    k_list,
    rng: np.random.Generator,
    *,
    seed: int | None = None,
    replica: int = 0,
) -> BlowupSeries:
    """(1 - r_k) G'(r_k) at r_k = 1 - 2^{-k}, one joint complex Gaussian draw."""
    ks = _check_k_list(k_list)
    radii = [disc_radius(k) for k in ks]
    chol = linalg.cholesky(disc_bp_kernel(radii), lower=True)
    g = rng.standard_normal((2, len(ks)))
    y = chol @ ((g[0] + 1j * g[1]) / math.sqrt(2.0))
    return _series(ks, radii, y, "disc", seed, replica)


# ---------------------------------------------------------------------------
# reporting


@dataclass(frozen=True)
class BlowupReport:
    header: str
    thresholds: tuple
    counts: tuple
    replicas: int
    fractions: tuple
    ci_low: tuple
    ci_high: tuple

    def rows(self):
        return list(zip(self.thresholds, self.counts, self.fractions, self.ci_low, self.ci_high))


def detect_blowup(series, thresholds, confidence: float = 0.95) -> BlowupReport:
    """Fraction of replicas whose final running max exceeds each threshold, with Wilson intervals."""
    series = list(series)
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds:
        raise DomainError("thresholds must be nonempty")
    if not series:
        raise DomainError("need at least one series")
    finals = np.array([s.running_max[-1] for s in series])
    n = finals.size
    counts, fracs, lo, hi = [], [], [], []
    for t in thresholds:
        c = int(np.sum(finals > t))
        ci = stats.binomtest(c, n).proportion_ci(confidence_level=confidence, method="wilson")
        counts.append(c)
        fracs.append(c / n)
        lo.append(float(ci.low))
        hi.append(float(ci.high))
    return BlowupReport(
        header=REPORT_HEADER,
        thresholds=thresholds,
        counts=tuple(counts),
        replicas=n,
        fractions=tuple(fracs),
        ci_low=tuple(lo),
        ci_high=tuple(hi),
    )

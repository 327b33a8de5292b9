"""Quick verification suites run by ``zetalab verify``.

Identity checks compare two independent evaluations and must all pass.
Statistical checks are 3-SE z-tests; one failure per run is tolerated as a
multiple-testing allowance.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .discchaos import disc_covariance, gmc_mass, radius_of_n, sample_disc_field
from .errors import UnderflowWarning
from .eulerfield import laplace_check, sample_exact_block, sample_surrogate_block
from .primes import _simple_sieve, prime_power_sum, sieve_block, verify_pnt_block
from .specfun import (
    EULER_GAMMA,
    block_variance_range,
    block_variance_v2,
    e1_by_quadrature,
    exp_integral_e1,
    lower_incomplete_gamma,
    surrogate_block_covariance,
)
from .streams import stream

STAT_ALLOWANCE = 1


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    kind: str  # "identity" | "statistical"
    passed: bool
    value: float
    target: float
    tolerance: float


def _identity(suite, name, value, target, tol):
    return CheckResult(suite, name, "identity", bool(abs(value - target) <= tol), value, target, tol)


def _z(suite, name, mean, se, target):
    return CheckResult(suite, name, "statistical", bool(abs(mean - target) <= 3 * se), mean, target, 3 * se)


def telescoping_residual() -> float:
    """Worst |sum_k v_k^2 - closed form| over 0 <= k1 < k2 <= 40, sigma = 1/2 + 2^-n, n = 1..20.

    Deep blocks underflow to exactly 0 on both sides, which is the correct residual.
    """
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnderflowWarning)
        for n in range(1, 21):
            s = 0.5 + 2.0**-n
            v2 = [0.0] + [block_variance_v2(k, s) for k in range(1, 41)]
            for k1 in range(0, 40):
                for k2 in range(k1 + 1, 41):
                    parts = math.fsum(v2[k1 + 1 : k2 + 1])
                    worst = max(worst, abs(parts - block_variance_range(k1, k2, s)))
    return worst


def suite_specfun(seed: int):
    out = []
    xs = np.logspace(-6, 2, 41)
    err = max(abs(exp_integral_e1(x) - e1_by_quadrature(x)) for x in xs)
    out.append(_identity("specfun", "e1_vs_quadrature", err, 0.0, 1e-12))
    out.append(_identity("specfun", "telescoping", telescoping_residual(), 0.0, 1e-12))
    out.append(_identity("specfun", "e1_small_x", exp_integral_e1(1e-8) + EULER_GAMMA + math.log(1e-8), 0.0, 1e-7))
    out.append(_identity("specfun", "gamma_2_1", lower_incomplete_gamma(2, 1.0), 1 - 2 / math.e, 1e-14))
    out.append(
        _identity("specfun", "covariance_at_zero", surrogate_block_covariance(3, 0.6, 0.0), block_variance_v2(3, 0.6), 1e-10)
    )
    return out


def suite_primes(seed: int):
    out = []
    ref = [p for p in range(2, 100_001) if all(p % d for d in range(2, int(p**0.5) + 1))]
    out.append(_identity("primes", "sieve_vs_trial_division", float(np.array_equal(_simple_sieve(100_000), ref)), 1.0, 0))
    total = 1 + sum(len(sieve_block(k)) for k in range(1, 5))
    out.append(_identity("primes", "block_partition", total, len(_simple_sieve(int(math.exp(16)))), 0))
    out.append(_identity("primes", "sum_0_1_at_0.75", prime_power_sum(0, 1, 0.75), 3**-1.5 + 5**-1.5 + 7**-1.5, 1e-15))
    sigma = 0.5 + 2.0**-8
    rep = verify_pnt_block(4, sigma)
    out.append(CheckResult("primes", "pnt_residual_block4", "identity", rep.abs_err < 0.01 * rep.estimate, rep.abs_err, 0.0, 0.01 * rep.estimate))
    return out


def suite_euler(seed: int):
    out = []
    rng = stream(seed, "verify-laplace")
    for p, s, lam in ((3, 0.75, 1.0), (11, 0.6, 2.0)):
        r = laplace_check(p, s, lam, 10_000, rng)
        out.append(_z("euler", f"laplace_p{p}_s{s}_l{lam}", r.estimate, r.stderr, r.exact))
    sigma, reps = 0.6, 400
    rng = stream(seed, "verify-exact-block")
    x = np.array([sample_exact_block(2, sigma, 5, rng).values[2] for _ in range(reps)])
    target = 0.5 * prime_power_sum(1, 2, sigma)
    out.append(_z("euler", "exact_block_variance", float(np.mean(x**2)), float(np.std(x**2) / math.sqrt(reps)), target))
    rng = stream(seed, "verify-surrogate-block")
    x = np.array([sample_surrogate_block(6, sigma, 5, rng).values[2] for _ in range(reps)])
    out.append(
        _z("euler", "surrogate_block_variance", float(np.mean(x**2)), float(np.std(x**2) / math.sqrt(reps)), block_variance_v2(6, sigma))
    )
    return out


def suite_disc(seed: int):
    out = []
    r = 0.9
    samples = [sample_disc_field(r, seed=seed, replica=i) for i in range(300)]
    parseval = max(abs(np.mean(s.values**2) - s.coef_energy) for s in samples)
    out.append(_identity("disc", "parseval", parseval, 0.0, 1e-10))
    v = np.array([s.values[0] ** 2 for s in samples])
    out.append(_z("disc", "variance", float(v.mean()), float(v.std() / math.sqrt(v.size)), 0.5 * math.log(1 / (1 - r * r))))
    m = len(samples[0].values)
    lag = m // 8
    c = np.array([s.values[0] * s.values[lag] for s in samples])
    target = disc_covariance(r, r * np.exp(2j * math.pi * lag / m))
    out.append(_z("disc", "covariance_lag_pi_4", float(c.mean()), float(c.std() / math.sqrt(c.size)), target))
    rr = radius_of_n(5)
    mass = np.array([gmc_mass(sample_disc_field(rr, seed=seed, replica=i), 1.0) for i in range(300)])
    out.append(_z("disc", "gmc_mass", float(mass.mean()), float(mass.std() / math.sqrt(mass.size)), 1.0))
    out.append(_identity("disc", "covariance_closed_form", disc_covariance(0.5, -0.5), -0.5 * math.log(1.25), 1e-15))
    return out


SUITES = {"specfun": suite_specfun, "primes": suite_primes, "euler": suite_euler, "disc": suite_disc}


def run_suites(names, seed: int):
    results = []
    for name in names:
        results.extend(SUITES[name](seed))
    return results


def overall_pass(results) -> bool:
    if not all(r.passed for r in results if r.kind == "identity"):
        return False
    return sum(not r.passed for r in results if r.kind == "statistical") <= STAT_ALLOWANCE

"""Segmented sieving by dyadic log-blocks and exact prime sums.

Block k (k >= 1) holds the primes with 2^{k-1} < log p <= 2^k. The same rule
with k = 0 gives 1/2 < log p <= 1, i.e. the single prime 2, so range sums
over blocks k1+1..k2 include the prime 2 exactly when k1 = -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DomainError
from .report import ErrorReport
from .specfun import block_variance_v2

DEFAULT_K_MAX = 4
_SEGMENT = 1 << 18


def block_bounds(k: int) -> tuple[int, int]:
    """Integer bounds (lo, hi] of block k: lo < p <= hi."""
    if k < 0:
        raise DomainError(f"block index must be >= 0, got {k}")
    lo = math.floor(math.exp(2.0 ** (k - 1)))
    hi = math.floor(math.exp(2.0**k))
    return lo, hi


def _check_capacity(k: int, k_max: int):
    if k > k_max:
        bound = math.exp(2.0**k)
        raise CapacityError(
            f"block {k} needs primes up to exp(2^{k}) = {bound:.3e}; capacity is "
            f"k_max={k_max} (p <= {math.exp(2.0 ** k_max):.3e})",
            required_bound=bound,
        )


def _simple_sieve(n: int) -> np.ndarray:
    if n < 2:
        return np.empty(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for i in range(3, math.isqrt(n) + 1, 2):
        if is_p[i]:
            is_p[i * i :: 2 * i] = False
    return np.flatnonzero(is_p).astype(np.int64)


def sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in (lo, hi], given all primes up to sqrt(hi) in ``base``."""
    start = lo + 1
    if hi < start:
        return np.empty(0, dtype=np.int64)
    mark = np.ones(hi - start + 1, dtype=bool)
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        first = max(p * p, ((start + p - 1) // p) * p)
        mark[first - start :: p] = False
    if start <= 1:
        mark[: 2 - start] = False
    return np.flatnonzero(mark).astype(np.int64) + start


def primes_in_range(lo: int, hi: int, segment: int = _SEGMENT) -> np.ndarray:
    """All primes p with lo < p <= hi, sieved segment by segment."""
    base = _simple_sieve(math.isqrt(hi) + 1)
    chunks = []
    a = lo
    while a < hi:
        b = min(a + segment, hi)
        chunks.append(sieve_segment(a, b, base))
        a = b
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class PrimeBlock:
    k: int
    primes: np.ndarray
    logs: np.ndarray

    def __len__(self):
        return len(self.primes)


@lru_cache(maxsize=None)
def _sieve_block_cached(k: int) -> PrimeBlock:
    lo, hi = block_bounds(k)
    ps = primes_in_range(lo, hi)
    logs = np.log(ps.astype(float))
    ps.setflags(write=False)
    logs.setflags(write=False)
    return PrimeBlock(k=k, primes=ps, logs=logs)


def sieve_block(k: int, k_max: int = DEFAULT_K_MAX) -> PrimeBlock:
    """Primes of dyadic block k; cached after the first call."""
    if k < 0:
        raise DomainError(f"block index must be >= 0, got {k}")
    _check_capacity(k, k_max)
    return _sieve_block_cached(k)


def _range_blocks(k1: int, k2: int, k_max: int):
    if k1 < -1 or k2 <= k1:
        raise DomainError(f"need -1 <= k1 < k2, got k1={k1}, k2={k2}")
    _check_capacity(k2, k_max)
    return [sieve_block(k, k_max) for k in range(k1 + 1, k2 + 1)]


def _check_sigma(sigma):
    if not sigma > 0.5:
        raise DomainError(f"sigma must exceed 1/2, got {sigma}")


def prime_power_sum(k1: int, k2: int, sigma: float, k_max: int = DEFAULT_K_MAX) -> float:
    """sum of p^{-2 sigma} over exp(2^k1) < p <= exp(2^k2), exactly rounded."""
    _check_sigma(sigma)
    blocks = _range_blocks(k1, k2, k_max)
    terms = np.concatenate([np.exp(-2.0 * sigma * b.logs) for b in blocks])
    return math.fsum(terms)


def prime_cos_sum(k1: int, k2: int, sigma: float, delta: float, k_max: int = DEFAULT_K_MAX) -> float:
    """sum of cos(delta log p) p^{-2 sigma} over the block range."""
    _check_sigma(sigma)
    blocks = _range_blocks(k1, k2, k_max)
    terms = np.concatenate([np.cos(delta * b.logs) * np.exp(-2.0 * sigma * b.logs) for b in blocks])
    return math.fsum(terms)


def prime_logweight_sum(
    k1: int, k2: int, sigma: float, m: float, q: float = 1.0, k_max: int = DEFAULT_K_MAX
) -> float:
    """sum of (log p)^m p^{-2 q sigma} over the block range."""
    _check_sigma(sigma)
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    blocks = _range_blocks(k1, k2, k_max)
    terms = np.concatenate([b.logs**m * np.exp(-2.0 * q * sigma * b.logs) for b in blocks])
    return math.fsum(terms)


def verify_pnt_block(k: int, sigma: float, k_max: int = DEFAULT_K_MAX) -> ErrorReport:
    """Exact block variance (1/2) sum p^{-2 sigma} against its E1 estimate v_k^2."""
    if k < 1:
        raise DomainError(f"block index must be >= 1, got {k}")
    exact = 0.5 * prime_power_sum(k - 1, k, sigma, k_max)
    estimate = block_variance_v2(k, sigma)
    return ErrorReport(name="pnt_block", exact=exact, estimate=estimate, params={"k": k, "sigma": sigma})

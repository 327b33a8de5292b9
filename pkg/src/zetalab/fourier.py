"""Fast evaluation of real trigonometric sums at nonuniform frequencies.

    f(h_j) = Re sum_m c_m exp(-i h_j w_m),   h_j = j / (M - 1),  j = 0..M-1

Each frequency is snapped to the nearest point of the FFT grid of period 2 and
the residual offset is handled by a Taylor series in (h - 1/2). With
|h - 1/2| <= 1/2 and |offset| <= pi/2 the series converges like (pi/4)^q / q!,
so ~18 FFTs of length 2(M-1) reproduce the direct sum to round-off.
"""
from __future__ import annotations

import math

import numpy as np

_TAYLOR_TOL = 1e-17


def _n_terms(radius: float) -> int:
    q = 1
    term = radius
    while term > _TAYLOR_TOL:
        q += 1
        term *= radius / q
    return q + 1


def uniform_grid(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(0.0, 1.0, n_points)


def nonuniform_cos_sum(freqs, coeffs, n_points: int) -> np.ndarray:
    """Evaluate Re sum_m coeffs[m] exp(-i h freqs[m]) on the uniform grid of [0, 1]."""
    freqs = np.asarray(freqs, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    if freqs.shape != coeffs.shape:
        raise ValueError("freqs and coeffs must have the same shape")
    m_pts = int(n_points)
    h = uniform_grid(m_pts)
    if freqs.size == 0:
        return np.zeros(m_pts)
    n_fft = 2 * (m_pts - 1)
    step = math.pi  # 2 pi / period, period = n_fft * dh = 2
    idx = np.rint(freqs / step)
    offset = freqs - idx * step
    bins = np.mod(idx.astype(np.int64), n_fft)
    weight = coeffs * np.exp(-0.5j * offset)
    t = h - 0.5
    n_terms = _n_terms(0.5 * float(np.max(np.abs(offset))) if offset.size else 0.0)
    out = np.zeros(m_pts, dtype=complex)
    factor = np.ones(m_pts, dtype=complex)
    w = weight.copy()
    for q in range(n_terms):
        grid = np.bincount(bins, weights=w.real, minlength=n_fft) + 1j * np.bincount(
            bins, weights=w.imag, minlength=n_fft
        )
        out += factor * np.fft.fft(grid)[:m_pts]
        w *= offset
        factor *= (-1j * t) / (q + 1)
    return out.real


def direct_cos_sum(freqs, coeffs, h) -> np.ndarray:
    """Reference O(M * len(freqs)) evaluation of the same sum at arbitrary h."""
    freqs = np.asarray(freqs, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    h = np.asarray(h, dtype=float)
    out = np.empty(h.shape)
    for i, hv in enumerate(h.ravel()):
        out.flat[i] = np.real(np.sum(coeffs * np.exp(-1j * hv * freqs)))
    return out

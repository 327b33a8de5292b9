import math

import numpy as np
import pytest
from scipy import stats

from zetalab.discchaos import (
    bp_derivative_disc,
    bp_ratio_disc,
    bp_variance_disc,
    default_grid_size,
    disc_coefficients,
    disc_covariance,
    gmc_mass,
    max_statistic,
    mode_amplitudes,
    n_modes_for,
    radius_of_n,
    sample_disc_field,
)
from zetalab.errors import AliasingError, DomainError
from zetalab.streams import stream


def test_mode_count_and_grid():
    r = 0.99
    n = n_modes_for(r)
    assert r**n / math.sqrt(2 * n) < 1e-8 <= r ** (n - 1) / math.sqrt(2 * (n - 1))
    m = default_grid_size(n)
    assert m & (m - 1) == 0 and n <= m // 2 - 1 < 2 * n + 2


def test_grid_errors():
    with pytest.raises(AliasingError):
        sample_disc_field(0.99, 256, seed=1)
    with pytest.raises(DomainError):
        sample_disc_field(0.9, 1000, seed=1)
    with pytest.raises(DomainError):
        sample_disc_field(1.0, seed=1)
    with pytest.raises(DomainError):
        sample_disc_field(0.5)


def test_field_matches_direct_series():
    r, n_modes = 0.8, 40
    s = sample_disc_field(r, 128, seed=3, n_modes=n_modes)
    v, w = disc_coefficients(n_modes, 3)
    amp = mode_amplitudes(r, n_modes)
    k = np.arange(1, n_modes + 1)
    for j in (0, 5, 77):
        th = s.theta_grid[j]
        direct = np.sum(amp * (v * np.cos(k * th) + w * np.sin(k * th)))
        assert s.values[j] == pytest.approx(direct, abs=1e-13)


def test_coefficients_are_prefix_consistent():
    v10, w10 = disc_coefficients(10, 4, replica=2)
    v50, w50 = disc_coefficients(50, 4, replica=2)
    assert np.array_equal(v10, v50[:10]) and np.array_equal(w10, w50[:10])


def test_parseval_identity():
    for rep in range(20):
        s = sample_disc_field(0.95, seed=5, replica=rep)
        assert abs(np.mean(s.values**2) - s.coef_energy) < 1e-10


def test_variance_matches_covariance_kernel():
    r, reps = 0.9, 3000
    x = np.array([sample_disc_field(r, seed=6, replica=i).values[0] for i in range(reps)])
    sq = x**2
    assert abs(sq.mean() - 0.5 * math.log(1 / (1 - r * r))) < 3 * sq.std() / math.sqrt(reps)


def test_expected_variance_on_scale_grid():
    n = 8
    s = sample_disc_field(radius_of_n(n), seed=1)
    assert abs(s.expected_var - 0.5 * (n - math.log(2))) < 1e-3
    assert s.normalizer == pytest.approx(n, abs=1e-12)


def test_small_radius_field_vanishes():
    hits = [np.max(np.abs(sample_disc_field(1e-4, seed=7, replica=i).values)) < 1e-3 for i in range(200)]
    assert np.mean(hits) >= 0.99


def test_covariance_closed_form():
    assert disc_covariance(0, 0.7j) == 0.0
    assert disc_covariance(0.6, 0.6) == pytest.approx(0.5 * math.log(1 / (1 - 0.36)), rel=1e-15)
    assert disc_covariance(0.5, -0.5) == pytest.approx(-0.1115718, abs=1e-7)
    with pytest.raises(DomainError):
        disc_covariance(1.0, 0.1)


def test_grid_shift_is_coefficient_rotation():
    r, n_modes, m, shift = 0.7, 30, 64, 5
    base = sample_disc_field(r, m, seed=8, n_modes=n_modes)
    v, w = disc_coefficients(n_modes, 8)
    phi = 2 * math.pi * shift / m
    k = np.arange(1, n_modes + 1)
    # rolling by `shift` points rotates mode k by angle k * phi
    g = (v - 1j * w) * np.exp(1j * k * phi)
    amp = mode_amplitudes(r, n_modes)
    th = base.theta_grid
    rotated = np.array([np.sum(amp * np.real(g * np.exp(1j * k * t))) for t in th])
    assert np.max(np.abs(rotated - np.roll(base.values, -shift))) < 1e-12


def test_rotation_invariance_in_law():
    r = 0.95
    a = [sample_disc_field(r, seed=9, replica=i).values[0] for i in range(400)]
    b = [sample_disc_field(r, seed=9, replica=i).values[37] for i in range(400, 800)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_phase_rotation_preserves_law():
    r, reps = 0.9, 2000
    x = np.array([sample_disc_field(r, seed=10, replica=i, phase=1.1).values[3] for i in range(reps)])
    sq = x**2
    assert abs(sq.mean() - 0.5 * math.log(1 / (1 - r * r))) < 3 * sq.std() / math.sqrt(reps)


def test_gmc_mass():
    rr = radius_of_n(5)
    m = np.array([gmc_mass(sample_disc_field(rr, seed=11, replica=i), 1.0) for i in range(400)])
    assert np.all(m > 0)
    assert abs(m.mean() - 1) < 3 * m.std() / math.sqrt(m.size)
    small = [abs(gmc_mass(sample_disc_field(rr, seed=11, replica=i), 1e-3) - 1) < 1e-2 for i in range(50)]
    assert all(small)
    s = sample_disc_field(rr, seed=11)
    for bad in (0.0, 2.0, -1.0):
        with pytest.raises(DomainError):
            gmc_mass(s, bad)


def test_max_statistic():
    meds = []
    for n in (4, 6, 8):
        samples = [sample_disc_field(radius_of_n(n), seed=12, replica=i) for i in range(60)]
        mx = np.array([max_statistic(s) for s in samples])
        assert np.all(mx >= np.array([s.values.mean() for s in samples]))
        meds.append(np.median(mx))
    assert meds == sorted(meds)


def test_bp_derivative_variance():
    r = radius_of_n(8)
    assert bp_variance_disc(r) == pytest.approx(0.125, rel=0.02)
    rng = stream(13, "bp")
    x = np.array([bp_derivative_disc(0.9, rng) for _ in range(4000)])
    sq = x.real**2
    assert abs(sq.mean() - bp_variance_disc(0.9)) < 3 * sq.std() / math.sqrt(x.size)
    assert abs(x.real.mean()) < 3 * x.real.std() / math.sqrt(x.size)


def test_bp_ratio_small_radius_is_first_mode():
    rng = stream(14, "bp0")
    x = np.array([bp_ratio_disc(1e-9, rng) for _ in range(4000)])
    assert abs(x.mean() - math.sqrt(math.pi) / 2) < 3 * x.std() / math.sqrt(x.size)
    with pytest.raises(DomainError):
        bp_ratio_disc(1.0, rng)

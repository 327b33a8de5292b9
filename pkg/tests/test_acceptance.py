"""Acceptance criteria 1 to 13 at their stated tolerances.

Every Monte-Carlo criterion runs at master seed 1 (criterion 8 adds seed 2 for
an independent rotated-beta run). Each test records one PASS/FAIL line that
pytest prints in an "acceptance criteria" section at the end of the session.
"""
import cmath
import hashlib
import math
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from zetalab.checks import telescoping_residual
from zetalab.cli import main
from zetalab.config import RunConfig
from zetalab.discchaos import (
    bp_variance_disc,
    disc_covariance,
    gmc_mass,
    max_statistic,
    radius_of_n,
    sample_disc_field,
)
from zetalab.eulerfield import laplace_check
from zetalab.injectivity import bp_series_euler, detect_blowup, disc_radius, euler_offset
from zetalab.primes import verify_pnt_block
from zetalab.specfun import e1_by_quadrature, exp_integral_e1
from zetalab.spectrum import _rem_log_partition, collect_log_means, estimate_spectrum, regress_scales
from zetalab.streams import stream

SEED = 1
pytestmark = pytest.mark.slow


def record(k: int, ok: bool, detail: str):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def disc_run():
    cfg = RunConfig(seed=SEED, model="disc", betas=(1.0, 3.0), scales=range(4, 13), replicas=50, gammas=(0.5,))
    table = collect_log_means(cfg)
    return cfg, table, estimate_spectrum(cfg, table)


def test_criterion_01_special_functions():
    t0 = time.perf_counter()
    tele = telescoping_residual()
    e1 = max(abs(exp_integral_e1(x) - e1_by_quadrature(x)) for x in np.logspace(-6, 2, 81))
    dt = time.perf_counter() - t0
    record(1, tele < 1e-12 and e1 < 1e-12 and dt < 10, f"telescoping {tele:.2e}, E1 {e1:.2e}, {dt:.1f}s")


def test_criterion_02_prime_sums_vs_pnt():
    t0 = time.perf_counter()
    sigma = 0.5 + 2.0**-8
    reps = [verify_pnt_block(k, sigma) for k in range(1, 5)]
    res = [r.abs_err for r in reps]
    dt = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(res, res[1:]))
    small = res[3] < 0.01 * reps[3].estimate
    detail = "residuals " + ", ".join(f"{x:.3g}" for x in res) + f"; residual(4)/v2 {res[3] / reps[3].estimate:.2e}; {dt:.1f}s"
    record(2, decreasing and small and dt < 60, detail)


def test_criterion_03_laplace_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for p in (3, 11, 101):
        for s in (0.6, 0.75):
            for lam in (0.5, 1.0, 2.0):
                r = laplace_check(p, s, lam, 10_000, stream(SEED, "accept-laplace", p, int(100 * s), int(10 * lam)))
                worst = max(worst, abs(r.estimate - r.exact) / r.stderr)
    dt = time.perf_counter() - t0
    record(3, worst < 3 and dt < 30, f"worst |z| {worst:.2f} over 18 cases, {dt:.1f}s")


def test_criterion_04_disc_covariance():
    t0 = time.perf_counter()
    worst = -math.inf
    for r in (0.9, 0.99):
        fields = [sample_disc_field(r, seed=SEED, replica=i).values for i in range(500)]
        m = fields[0].size
        for j in range(1, 9):
            lag = j * m // 16
            c = np.array([np.mean(v * np.roll(v, -lag)) for v in fields])
            target = disc_covariance(r, r * cmath.exp(2j * math.pi * lag / m))
            tol = max(3 * c.std(ddof=1) / math.sqrt(c.size), 0.02)
            worst = max(worst, abs(c.mean() - target) / tol)
    dt = time.perf_counter() - t0
    record(4, worst <= 1 and dt < 300, f"worst error / tolerance {worst:.2f} over 16 (r, lag) pairs, {dt:.1f}s")


def test_criterion_05_gmc_normalisation():
    t0 = time.perf_counter()
    mass = np.array([gmc_mass(sample_disc_field(radius_of_n(8), seed=SEED, replica=i), 1.0) for i in range(500)])
    se = mass.std(ddof=1) / math.sqrt(mass.size)
    mean_ok = abs(mass.mean() - 1) <= 3 * se
    # E 1/mu_r rises over the first few scales (Jensen) and is flat once they are resolved.
    xs, ys = [], []
    for n in range(5, 9):
        inv = [1 / gmc_mass(sample_disc_field(radius_of_n(n), seed=SEED, replica=10_000 * n + i), 1.0) for i in range(500)]
        xs += [n] * len(inv)
        ys += inv
    x, y = np.array(xs, float), np.array(ys)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    slope_se = math.sqrt(resid @ resid / (y.size - 2) / ((x - x.mean()) @ (x - x.mean())))
    dt = time.perf_counter() - t0
    detail = f"mean mass {mass.mean():.4f} +/- {3 * se:.4f}; 1/mu trend {slope:.4f} (3 SE {3 * slope_se:.4f}); {dt:.1f}s"
    record(5, mean_ok and abs(slope) <= 3 * slope_se and dt < 600, detail)


def test_criterion_06_disc_spectrum(disc_run):
    _, _, (e1, e3) = disc_run
    ok = abs(e1.slope - 0.25) <= 0.06 and abs(e3.slope - 2.0) <= 0.25
    record(6, ok, f"slope(1) {e1.slope:.4f} +/- {e1.ci_halfwidth:.4f}, slope(3) {e3.slope:.4f} +/- {e3.ci_halfwidth:.4f}")


def test_criterion_07_euler_spectrum(disc_run):
    t0 = time.perf_counter()
    cfg = RunConfig(seed=SEED, model="euler", betas=(1.0,), scales=range(6, 13), replicas=30)
    (e,) = estimate_spectrum(cfg)
    dt = time.perf_counter() - t0
    disc = disc_run[2][0].slope
    record(7, abs(e.slope - disc) <= 0.08 and dt < 1800, f"euler {e.slope:.4f} vs disc {disc:.4f}, {dt:.0f}s")


def test_criterion_08_rotation_law(disc_run):
    cfg = RunConfig(
        seed=SEED + 1, model="disc", betas=(cmath.exp(1j * math.pi / 3),), scales=range(4, 13), replicas=50, reduce_complex=False
    )
    (rot,) = estimate_spectrum(cfg)
    base = disc_run[2][0]
    gap = abs(rot.slope - base.slope)
    bound = rot.ci_halfwidth + base.ci_halfwidth
    record(8, gap < bound, f"|{rot.slope:.4f} - {base.slope:.4f}| = {gap:.4f} < {bound:.4f}")


def test_criterion_09_thick_points(disc_run):
    cfg, table, _ = disc_run
    sel = [i for i, n in enumerate(cfg.scales) if 6 <= n <= 12]
    data = table.thick[0][sel]
    assert np.all(np.isfinite(data))
    slope, _, ci, _ = regress_scales([cfg.scales[i] for i in sel], data, cfg.bootstrap, stream(SEED, "bootstrap-gamma", 0))
    record(9, abs(slope + 0.25) <= 0.1, f"gamma 0.5 slope {slope:.4f} +/- {ci:.4f}")


def test_criterion_10_rem():
    t0 = time.perf_counter()
    n = 20
    f = np.array([_rem_log_partition(2**n, [1.0, 3.0], stream(SEED, "rem", n, r)) for r in range(20)]) / (n * math.log(2))
    m1, m3 = f.mean(axis=0)
    dt = time.perf_counter() - t0
    record(10, abs(m1 - 0.25) <= 0.03 and abs(m3 - 2.0) <= 0.2 and dt < 120, f"F(1) {m1:.4f}, F(3) {m3:.4f}, {dt:.1f}s")


def test_criterion_11_max_bound():
    fracs = {}
    for n in (6, 10):
        mx = np.array([max_statistic(sample_disc_field(radius_of_n(n), seed=SEED, replica=i)) for i in range(500)])
        fracs[n] = float(np.mean(mx / n <= 1.2))
    record(11, min(fracs.values()) >= 0.99, ", ".join(f"n={n}: {f:.3f}" for n, f in fracs.items()))


def test_criterion_12_injectivity():
    ks = tuple(range(1, 21))
    series = [bp_series_euler(ks, stream(SEED, "inject-euler", r), seed=SEED, replica=r) for r in range(1000)]
    deep = np.array([abs(s.y_values[-1]) ** 2 for s in series])
    second = float(deep.mean())
    disc_var = bp_variance_disc(disc_radius(ks[-1]))
    report = detect_blowup(series[:200], [3.0])
    ok = abs(second - 0.25) <= 0.03 and abs(disc_var / 0.125 - 1) <= 0.02 and report.fractions[0] > 0
    detail = (
        f"E|Y_20|^2 {second:.4f} (eps {euler_offset(20):.1e}); disc limit {disc_var:.6f}; "
        f"exceedance at 3: {report.counts[0]}/{report.replicas}"
    )
    record(12, ok, detail)


def test_criterion_13_determinism(tmp_path):
    cfg = dict(seed=SEED, model="disc", betas=(1.0, 2.5), scales=range(3, 8), replicas=12, gammas=(0.3,))
    digests = set()
    for workers in (1, 2, 3):
        t = collect_log_means(RunConfig(workers=workers, **cfg))
        digests.add(hashlib.sha256(t.log_means.tobytes() + t.thick.tobytes()).hexdigest())
    files = {}
    for workers in ("1", "2", "1"):
        out = tmp_path / f"w{workers}-{len(files)}"
        args = ["--seed", "1", "--workers", workers, "--out-dir", str(out), "spectrum", "run"]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main([*args, "--scales", "3..7", "--replicas", "12", "--gammas", "0.3", "--out", "s.csv"]) == 0
        files[out] = (out / "s.csv").read_bytes() + (out / "s.summary.json").read_bytes()
    record(13, len(digests) == 1 and len(set(files.values())) == 1, f"{len(digests)} table digest(s), {len(set(files.values()))} CLI output digest(s)")

"""Integral means spectrum, free energy, thick points and the REM baseline.

Finite-scale estimator: for each scale n, average the log integral means over
replicas and regress them on the exact scale log (n for the disc at
r_n = 1 - e^{-n}; (n+1) log 2 for the zeta field at sigma_n = 1/2 + 2^{-(n+1)};
n log 2 for the REM with N = 2^n). The slope estimates f(beta); the 95%
interval comes from a replica bootstrap.
"""
from __future__ import annotations

import cmath
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .config import RunConfig
from .discchaos import CircleFieldSample, radius_of_n, sample_disc_field
from .errors import DomainError, EstimationError, ResolutionWarning
from .eulerfield import FieldSample, sample_field
from .specfun import sigma_of_n
from .streams import stream


@dataclass(frozen=True)
class SpectrumEstimate:
    beta: complex
    scales: tuple
    abscissa: tuple
    log_means: tuple
    slope: float
    intercept: float
    ci_halfwidth: float
    replicas: int
    model: str


@dataclass(frozen=True)
class ThickPointEstimate:
    gamma: float
    scales: tuple
    log_measures: tuple
    slope: float
    intercept: float
    ci_halfwidth: float
    replicas: int
    model: str


def theoretical_f(beta: complex) -> float:
    b = abs(complex(beta))
    return 0.25 * b * b if b <= 2.0 else b - 1.0


def complex_beta_reduce(beta: complex) -> float:
    """|beta|: |exp(beta G)| has the law of exp(|beta| G) because the phases are rotation invariant."""
    return abs(complex(beta))


# ---------------------------------------------------------------------------
# per-sample functionals


def _log_weights(sample) -> np.ndarray:
    m = sample.values.size
    if isinstance(sample, CircleFieldSample):
        return np.full(m, math.log(2.0 * math.pi / m))
    dh = 1.0 / (m - 1)
    w = np.full(m, math.log(dh))
    w[0] = w[-1] = math.log(0.5 * dh)
    return w


def _weights(sample) -> np.ndarray:
    return np.exp(_log_weights(sample))


def integral_means(sample, beta_abs: float) -> float:
    """log of the trapezoid integral of exp(beta * field) over the sample's domain."""
    if not np.all(np.isfinite(sample.values)):
        raise DomainError("sample has non-finite values")
    if isinstance(sample, FieldSample):
        need = 1 << (sample.n + 2)
        if sample.values.size - 1 < need:
            warnings.warn(
                f"grid of {sample.values.size} points is coarse for scale n={sample.n} (want >= {need + 1})",
                ResolutionWarning,
                stacklevel=2,
            )
    return float(logsumexp(beta_abs * sample.values + _log_weights(sample)))


def free_energy(sample, beta_abs: float) -> float:
    return integral_means(sample, beta_abs) / sample.normalizer


def thick_threshold(sample, gamma: float) -> float:
    if isinstance(sample, FieldSample):
        return gamma * sample.n * math.log(2.0)
    return gamma * sample.normalizer


def thick_point_measure(sample, gamma: float) -> float:
    """Lebesgue measure of {field >= gamma * scale} by the trapezoid weights."""
    above = sample.values >= thick_threshold(sample, gamma)
    return float(np.sum(_weights(sample)[above]))


def thick_point_log_measure(sample, gamma: float) -> float:
    m = thick_point_measure(sample, gamma)
    return math.log(m) if m > 0 else -math.inf


# ---------------------------------------------------------------------------
# REM


def _rem_log_partition(n_states: int, betas, rng: np.random.Generator, chunk: int = 1 << 20):
    """log(N^{-1} sum_i exp(beta H_i)), H_i ~ N(0, ln N / 2), streamed in chunks."""
    if n_states < 2:
        raise DomainError("REM needs N >= 2")
    sd = math.sqrt(math.log(n_states) / 2.0)
    acc = np.full(len(betas), -np.inf)
    done = 0
    b = np.asarray(betas, dtype=float)
    while done < n_states:
        m = min(chunk, n_states - done)
        h = rng.standard_normal(m) * sd
        part = logsumexp(b[:, None] * h[None, :], axis=1)
        acc = np.logaddexp(acc, part)
        done += m
    return acc - math.log(n_states)


def rem_free_energy(n_states: int, beta_abs: float, rng: np.random.Generator, chunk: int = 1 << 20) -> float:
    """(1/ln N) ln Z_{beta,N} for one draw of the energies."""
    return float(_rem_log_partition(n_states, [beta_abs], rng, chunk)[0]) / math.log(n_states)


# ---------------------------------------------------------------------------
# multi-scale estimation


def scale_abscissa(model: str, n: int) -> float:
    if model == "disc":
        return float(n)
    if model == "euler":
        return (n + 1) * math.log(2.0)
    if model == "rem":
        return n * math.log(2.0)
    raise DomainError(f"unknown model {model!r}")


def _beta_groups(config: RunConfig):
    """Map field phase -> list of (beta index, |beta|)."""
    groups: dict[float, list] = {}
    for i, b in enumerate(config.betas):
        phase = 0.0 if config.reduce_complex else cmath.phase(b)
        groups.setdefault(phase, []).append((i, abs(b)))
    return groups


def make_sample(config: RunConfig, n: int, replica: int, grid_size=None, phase: float = 0.0):
    if config.model == "disc":
        return sample_disc_field(
            radius_of_n(n), grid_size, seed=config.seed, replica=replica, mode_tol=config.mode_tol, phase=phase
        )
    if config.model == "euler":
        return sample_field(config, sigma_of_n(n), grid_size, replica=replica, phase=phase)
    raise DomainError(f"model {config.model!r} has no field sampler")


def _task(args):
    config_json, si, n, replica = args
    config = RunConfig.from_json(config_json)
    nb, ng = len(config.betas), len(config.gammas)
    logs = np.empty(nb)
    thick = np.empty(ng)
    if config.model == "rem":
        rng = stream(config.seed, "rem", n, replica)
        logs[:] = _rem_log_partition(2**n, [abs(b) for b in config.betas], rng)
        thick[:] = np.nan
        return si, replica, logs, thick
    grid = None if config.grid_sizes is None else config.grid_sizes[si]
    for phase, members in _beta_groups(config).items():
        sample = make_sample(config, n, replica, grid, phase)
        for i, babs in members:
            logs[i] = integral_means(sample, babs)
        if phase == 0.0:
            for j, g in enumerate(config.gammas):
                thick[j] = thick_point_log_measure(sample, g)
    if ng and 0.0 not in _beta_groups(config):
        sample = make_sample(config, n, replica, grid)
        for j, g in enumerate(config.gammas):
            thick[j] = thick_point_log_measure(sample, g)
    return si, replica, logs, thick


@dataclass
class LogMeanTable:
    config: RunConfig
    log_means: np.ndarray  # (n_beta, n_scale, replicas)
    thick: np.ndarray  # (n_gamma, n_scale, replicas)

    def rows(self):
        """CSV rows (model, beta_re, beta_im, n, replica, log_mean)."""
        cfg = self.config
        for bi, b in enumerate(cfg.betas):
            for si, n in enumerate(cfg.scales):
                for r in range(cfg.replicas):
                    yield (cfg.model, b.real, b.imag, n, r, float(self.log_means[bi, si, r]))


def collect_log_means(config: RunConfig) -> LogMeanTable:
    """Run every (scale, replica) task; results are placed by task key, not by completion order."""
    nb, ns, nr = len(config.betas), len(config.scales), config.replicas
    logs = np.empty((nb, ns, nr))
    thick = np.empty((len(config.gammas), ns, nr))
    cj = config.to_json()
    tasks = [(cj, si, n, r) for si, n in enumerate(config.scales) for r in range(nr)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        results = [_task(t) for t in tasks]
    for si, r, lv, tv in results:
        logs[:, si, r] = lv
        thick[:, si, r] = tv
    return LogMeanTable(config=config, log_means=logs, thick=thick)


def regress_scales(abscissa, table: np.ndarray, n_boot: int, rng: np.random.Generator):
    """OLS of the replica mean of ``table`` (scales x replicas) on abscissa, with bootstrap CI.

    Returns (slope, intercept, ci_halfwidth, per-scale means).
    """
    x = np.asarray(abscissa, dtype=float)
    if x.size < 3:
        raise EstimationError(f"need at least 3 scales, got {x.size}")
    if np.ptp(x) == 0:
        raise EstimationError("degenerate design: all scales equal")
    y = table.mean(axis=1)
    slope, intercept = np.polyfit(x, y, 1)
    nr = table.shape[1]
    idx = rng.integers(0, nr, size=(n_boot, nr))
    boot_y = table[:, idx].mean(axis=2)  # (scales, n_boot)
    xc = x - x.mean()
    boot_slopes = (xc @ (boot_y - boot_y.mean(axis=0))) / (xc @ xc)
    lo, hi = np.percentile(boot_slopes, [2.5, 97.5])
    return float(slope), float(intercept), float(0.5 * (hi - lo)), y


def _check_design(config: RunConfig):
    if len(config.scales) < 3:
        raise EstimationError(f"spectrum estimation needs >= 3 scales, got {len(config.scales)}")
    if config.replicas < 10:
        raise EstimationError(f"spectrum estimation needs >= 10 replicas per scale, got {config.replicas}")


def estimate_spectrum(config: RunConfig, table: LogMeanTable | None = None) -> list[SpectrumEstimate]:
    """One SpectrumEstimate per beta in config.betas."""
    _check_design(config)
    if table is None:
        table = collect_log_means(config)
    x = [scale_abscissa(config.model, n) for n in config.scales]
    out = []
    for bi, b in enumerate(config.betas):
        rng = stream(config.seed, "bootstrap-beta", bi)
        slope, icpt, ci, y = regress_scales(x, table.log_means[bi], config.bootstrap, rng)
        out.append(
            SpectrumEstimate(
                beta=b,
                scales=config.scales,
                abscissa=tuple(x),
                log_means=tuple(float(v) for v in y),
                slope=slope,
                intercept=icpt,
                ci_halfwidth=ci,
                replicas=config.replicas,
                model=config.model,
            )
        )
    return out


def estimate_thick_points(config: RunConfig, table: LogMeanTable | None = None) -> list[ThickPointEstimate]:
    """Slope of the replica-mean log thick-point measure against the scale normaliser.

    The limit is -gamma^2 for both models.
    """
    _check_design(config)
    if config.model == "rem":
        raise DomainError("thick points are defined for the field models only")
    if table is None:
        table = collect_log_means(config)
    if config.model == "disc":
        x = [float(n) for n in config.scales]
    else:
        x = [n * math.log(2.0) for n in config.scales]
    out = []
    for gi, g in enumerate(config.gammas):
        data = table.thick[gi]
        if not np.all(np.isfinite(data)):
            raise EstimationError(f"empty thick-point set at gamma={g}; increase the grid or lower gamma")
        rng = stream(config.seed, "bootstrap-gamma", gi)
        slope, icpt, ci, y = regress_scales(x, data, config.bootstrap, rng)
        out.append(
            ThickPointEstimate(
                gamma=g,
                scales=config.scales,
                log_measures=tuple(float(v) for v in y),
                slope=slope,
                intercept=icpt,
                ci_halfwidth=ci,
                replicas=config.replicas,
                model=config.model,
            )
        )
    return out

"""Command line entry point.

    zetalab --seed 1 spectrum run --model disc --betas 0.5,1,2,3 --scales 4..12 --out spec.csv
    zetalab --seed 1 inject run --model euler --k 1..20 --replicas 200 --out inj.csv
    zetalab --seed 1 verify all

Exit codes: 0 success, 1 check failure, 2 usage error, 3 capacity error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import struct
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES, overall_pass, run_suites
from .config import MODELS, WEIGHT_MODELS, RunConfig
from .discchaos import radius_of_n, sample_disc_field
from .errors import CapacityError, ConfigError, DomainError, EstimationError, ZetaLabError
from .eulerfield import sample_field
from .injectivity import bp_series_disc, bp_series_euler, detect_blowup
from .primes import DEFAULT_K_MAX, sieve_block, verify_pnt_block
from .specfun import sigma_of_n
from .spectrum import collect_log_means, estimate_spectrum, estimate_thick_points, theoretical_f
from .streams import stream

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
DISC_MAGIC = b"ZLDISC1\n"


class UsageError(ZetaLabError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_int_range(text: str) -> tuple:
    """'4..12' -> (4, ..., 12); '1,3,5' -> (1, 3, 5)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return tuple(out)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def parse_complex_list(text: str) -> tuple:
    return tuple(parse_complex(t) for t in text.split(",") if t.strip())


def parse_float_list(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# output


class Writer:
    """Writes data files under out_dir and records them for the manifest."""

    def __init__(self, out_dir: str, fmt: str):
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.files: dict[str, str] = {}

    def path(self, name: str) -> Path:
        p = Path(name)
        if not p.is_absolute():
            p = self.out_dir / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def _record(self, p: Path, data: bytes):
        p.write_bytes(data)
        self.files[str(p)] = hashlib.sha256(data).hexdigest()

    def table(self, name: str, header, rows) -> Path:
        p = self.path(name)
        if self.fmt == "json":
            p = p.with_suffix(".json") if p.suffix == ".csv" else p
            data = json.dumps([dict(zip(header, r)) for r in rows], separators=(",", ":")).encode()
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
            data = buf.getvalue().encode()
        self._record(p, data)
        return p

    def json(self, name: str, obj) -> Path:
        p = self.path(name)
        self._record(p, json.dumps(obj, indent=2, sort_keys=True).encode())
        return p

    def raw(self, name: str, data: bytes) -> Path:
        p = self.path(name)
        self._record(p, data)
        return p

    def manifest(self, stem: Path, config: RunConfig | None, argv, t0: float):
        obj = {
            "software": "zetalab",
            "version": __version__,
            "argv": list(argv),
            "wall_time_s": time.perf_counter() - t0,
            "files": self.files,
            "config": None if config is None else config.to_dict(),
            "config_sha256": None if config is None else config.digest(),
        }
        p = stem.with_name(stem.stem + ".manifest.json")
        p.write_text(json.dumps(obj, indent=2, sort_keys=True))
        return p


def read_disc_binary(path) -> tuple[dict, np.ndarray]:
    """Inverse of the ``disc sample`` binary format: magic, u64 header length, JSON header, float64 values."""
    data = Path(path).read_bytes()
    if not data.startswith(DISC_MAGIC):
        raise DomainError(f"{path} is not a disc sample file")
    off = len(DISC_MAGIC)
    (hlen,) = struct.unpack("<Q", data[off : off + 8])
    header = json.loads(data[off + 8 : off + 8 + hlen])
    values = np.frombuffer(data[off + 8 + hlen :], dtype="<f8")
    return header, values


# ---------------------------------------------------------------------------
# commands


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for this command")
    return args.seed


def cmd_field_sample(args, w: Writer):
    seed = _need_seed(args)
    cfg = RunConfig(
        seed=seed,
        model="euler",
        scales=(args.sigma_exp,),
        grid_sizes=None if args.grid is None else (args.grid,),
        replicas=1,
        k0=args.k0,
        tail_blocks=args.tail_blocks,
        k_max=args.k_max,
        weight_model=args.weight_model,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    s = sample_field(cfg, sigma_of_n(args.sigma_exp), args.grid, replica=args.replica)
    out = w.table(args.out, ("h", "x"), zip(s.h_grid, s.values))
    side = {
        "config": cfg.to_dict(),
        "sigma": s.sigma,
        "n": s.n,
        "k0": s.k0,
        "k_top": s.k_top,
        "replica": s.replica,
        "blocks": [list(b) for b in s.blocks],
    }
    w.json(Path(args.out).with_suffix(".config.json").as_posix(), side)
    return out, cfg, EXIT_OK


def cmd_disc_sample(args, w: Writer):
    seed = _need_seed(args)
    if (args.n is None) == (args.r is None):
        raise UsageError("give exactly one of --n or --r")
    r = radius_of_n(args.n) if args.n is not None else args.r
    s = sample_disc_field(r, args.grid, seed=seed, replica=args.replica, mode_tol=args.mode_tol)
    header = {
        "r": s.r,
        "n": args.n,
        "grid_size": int(s.values.size),
        "n_modes": s.n_modes,
        "seed": seed,
        "replica": s.replica,
        "mode_tol": args.mode_tol,
        "expected_var": s.expected_var,
        "dtype": "<f8",
    }
    if args.out.endswith(".bin"):
        h = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
        data = DISC_MAGIC + struct.pack("<Q", len(h)) + h + s.values.astype("<f8").tobytes()
        out = w.raw(args.out, data)
    else:
        out = w.table(args.out, ("theta", "u"), zip(s.theta_grid, s.values))
        w.json(Path(args.out).with_suffix(".header.json").as_posix(), header)
    return out, None, EXIT_OK


def _write_checks(w: Writer, name: str, results):
    rows = [(r.suite, r.name, r.kind, int(r.passed), r.value, r.target, r.tolerance) for r in results]
    return w.table(name, ("suite", "check", "kind", "passed", "value", "target", "tolerance"), rows)


def _print_checks(results, ok: bool):
    width = max(len(f"{r.suite}.{r.name}") for r in results)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.suite + '.' + r.name:<{width}}  {r.kind:<11}  value={r.value:.6g}  target={r.target:.6g}  tol={r.tolerance:.3g}")
    print("OVERALL", "PASS" if ok else "FAIL")


def cmd_disc_verify(args, w: Writer):
    results = run_suites(["disc"], _need_seed(args))
    ok = overall_pass(results)
    _print_checks(results, ok)
    return _write_checks(w, args.out, results), None, EXIT_OK if ok else EXIT_CHECK


def cmd_primes_dump(args, w: Writer):
    blk = sieve_block(args.k, args.k_max)
    text = "".join(f"{p}\n" for p in blk.primes.tolist())
    if args.out is None:
        sys.stdout.write(text)
        return None, None, EXIT_OK
    return w.raw(args.out, text.encode()), None, EXIT_OK


def cmd_primes_verify(args, w: Writer):
    sigma = args.sigma
    rows = []
    for k in range(1, args.k_max + 1):
        rep = verify_pnt_block(k, sigma, args.k_max)
        rows.append((k, sigma, rep.exact, rep.estimate, rep.abs_err, rep.rel_err))
    if args.out is None:
        for r in rows:
            print(",".join(_fmt(v) for v in r))
        return None, None, EXIT_OK
    return w.table(args.out, ("k", "sigma", "exact", "estimate", "abs_err", "rel_err"), rows), None, EXIT_OK


def cmd_spectrum_run(args, w: Writer):
    cfg = RunConfig(
        seed=_need_seed(args),
        model=args.model,
        betas=args.betas,
        scales=args.scales,
        grid_sizes=args.grid_sizes,
        replicas=args.replicas,
        k0=args.k0,
        tail_blocks=args.tail_blocks,
        k_max=args.k_max,
        mode_tol=args.mode_tol,
        weight_model=args.weight_model,
        gammas=args.gammas,
        bootstrap=args.bootstrap,
        reduce_complex=not args.no_reduce_complex,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    if len(cfg.scales) < 3:
        raise EstimationError(f"spectrum estimation needs >= 3 scales, got {len(cfg.scales)}")
    table = collect_log_means(cfg)
    out = w.table(args.out, ("model", "beta_re", "beta_im", "n", "replica", "log_mean"), table.rows())
    # the config (with its worker count) lives in the manifest so this file is worker-invariant
    summary = {
        "model": cfg.model,
        "seed": cfg.seed,
        "replicas": cfg.replicas,
        "scales": list(cfg.scales),
        "spectrum": [
            {
                "beta": [e.beta.real, e.beta.imag],
                "slope": e.slope,
                "intercept": e.intercept,
                "ci_halfwidth": e.ci_halfwidth,
                "theory": theoretical_f(e.beta),
                "log_means": list(e.log_means),
            }
            for e in estimate_spectrum(cfg, table)
        ],
    }
    if cfg.gammas and cfg.model != "rem":
        summary["thick_points"] = [
            {"gamma": t.gamma, "slope": t.slope, "ci_halfwidth": t.ci_halfwidth, "theory": -t.gamma**2}
            for t in estimate_thick_points(cfg, table)
        ]
    w.json(Path(args.out).with_suffix(".summary.json").as_posix(), summary)
    for s in summary["spectrum"]:
        b = complex(*s["beta"])
        print(f"beta={b}: slope={s['slope']:.4f} +/- {s['ci_halfwidth']:.4f}  (f={s['theory']:.4f})")
    return out, cfg, EXIT_OK


def cmd_spectrum_f(args, w: Writer):
    print(repr(theoretical_f(args.beta)))
    return None, None, EXIT_OK


def cmd_inject_run(args, w: Writer):
    seed = _need_seed(args)
    ks = args.k
    series = []
    for rep in range(args.replicas):
        rng = stream(seed, f"inject-{args.model}", rep)
        if args.model == "euler":
            s = bp_series_euler(ks, rng, weight_model=args.weight_model, k_max=args.k_max, seed=seed, replica=rep)
        else:
            s = bp_series_disc(ks, rng, seed=seed, replica=rep)
        series.append(s)
    rows = [(s.replica, k, float(y), float(m)) for s in series for k, y, m in zip(s.k_list, s.y_abs, s.running_max)]
    out = w.table(args.out, ("replica", "k", "y_abs", "running_max"), rows)
    report = detect_blowup(series, args.thresholds)
    w.json(
        Path(args.out).with_suffix(".report.json").as_posix(),
        {
            "header": report.header,
            "model": args.model,
            "k": list(ks),
            "replicas": report.replicas,
            "thresholds": list(report.thresholds),
            "fractions": list(report.fractions),
            "wilson_low": list(report.ci_low),
            "wilson_high": list(report.ci_high),
        },
    )
    print(report.header)
    for t, c, f, lo, hi in report.rows():
        print(f"threshold {t:g}: {c}/{report.replicas} = {f:.3f}  [{lo:.3f}, {hi:.3f}]")
    return out, None, EXIT_OK


def cmd_verify(args, w: Writer):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, args.seed if args.seed is not None else 0)
    ok = overall_pass(results)
    _print_checks(results, ok)
    out = _write_checks(w, args.out or f"verify_{args.suite}.csv", results)
    return out, None, EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="master seed (required for sampling commands)")
    p.add_argument("--workers", type=int, default=d(1))
    p.add_argument("--out-dir", default=d("."))
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zetalab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"zetalab {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name, func, **kw):
        p = group.add_parser(name, **kw)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    field = sub.add_parser("field", help="sample the randomized zeta field").add_subparsers(dest="action", required=True)
    p = leaf(field, "sample", cmd_field_sample)
    p.add_argument("--sigma-exp", type=int, required=True, help="scale n; sigma = 1/2 + 2^-(n+1)")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--k0", type=int, default=4)
    p.add_argument("--tail-blocks", type=int, default=3)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--weight-model", choices=WEIGHT_MODELS, default="uniform-circle")
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--out", default="field.csv")

    disc = sub.add_parser("disc", help="holomorphic chaos on the disc").add_subparsers(dest="action", required=True)
    p = leaf(disc, "sample", cmd_disc_sample)
    p.add_argument("--n", type=int, default=None, help="r = 1 - e^-n")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--mode-tol", type=float, default=1e-8)
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--out", default="disc.bin")
    p = leaf(disc, "verify", cmd_disc_verify)
    p.add_argument("--out", default="disc_verify.csv")

    primes = sub.add_parser("primes", help="dyadic prime blocks").add_subparsers(dest="action", required=True)
    p = leaf(primes, "dump", cmd_primes_dump)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--out", default=None)
    p = leaf(primes, "verify", cmd_primes_verify)
    p.add_argument("--sigma", type=float, default=0.5 + 2.0**-8)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--out", default=None)

    spec = sub.add_parser("spectrum", help="integral means spectrum").add_subparsers(dest="action", required=True)
    p = leaf(spec, "run", cmd_spectrum_run)
    p.add_argument("--model", choices=MODELS, default="disc")
    p.add_argument("--betas", type=parse_complex_list, default=(1.0,))
    p.add_argument("--scales", type=parse_int_range, default=tuple(range(4, 13)))
    p.add_argument("--grid-sizes", type=parse_int_range, default=None)
    p.add_argument("--replicas", type=int, default=50)
    p.add_argument("--gammas", type=parse_float_list, default=())
    p.add_argument("--k0", type=int, default=4)
    p.add_argument("--tail-blocks", type=int, default=3)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--mode-tol", type=float, default=1e-8)
    p.add_argument("--weight-model", choices=WEIGHT_MODELS, default="uniform-circle")
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--no-reduce-complex", action="store_true", help="rotate the field by arg(beta) instead of using |beta|")
    p.add_argument("--out", default="spectrum.csv")
    p = leaf(spec, "f", cmd_spectrum_f)
    p.add_argument("--beta", type=parse_complex, required=True)

    inject = sub.add_parser("inject", help="Becker-Pommerenke blow-up diagnostics").add_subparsers(dest="action", required=True)
    p = leaf(inject, "run", cmd_inject_run)
    p.add_argument("--model", choices=("euler", "disc"), default="euler")
    p.add_argument("--k", type=parse_int_range, default=tuple(range(1, 21)))
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--thresholds", type=parse_float_list, default=(0.5, 1.0, 2.0, 3.0))
    p.add_argument("--weight-model", choices=WEIGHT_MODELS, default="uniform-circle")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--out", default="inject.csv")

    p = sub.add_parser("verify", help="identity and statistical self-checks")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_verify)
    p.add_argument("suite", choices=(*SUITES, "all"))
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    writer = Writer(args.out_dir, args.format)
    t0 = time.perf_counter()
    try:
        out, cfg, code = args.func(args, writer)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        print("hint: lower the block index, or raise --k-max if memory allows sieving to the named bound", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, ConfigError, DomainError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if out is not None:
        writer.manifest(Path(out), cfg, argv, t0)
    return code


if __name__ == "__main__":
    sys.exit(main())

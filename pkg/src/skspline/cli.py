"""Command-line interface.

Exit codes: 0 success, 1 usage/config error, 2 numerical or hypothesis failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, JobConfig
from .errors import NumericalFailure, SkSplineError
from .fundamental import FundamentalSpline, cardinal_coefficients, fmt_float
from .interpolation import (
    Interpolant,
    SampleError,
    read_samples_csv,
    refinement_study,
)
from .lattice import fundamental_domain_grid, new_lattice
from .symbol import SymbolFunction
from .verify import format_report, kernel_from_config, run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Printer:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *args):
        if not self.quiet:
            print(*args)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else
                              (str(v) if isinstance(v, (int, np.integer)) else fmt_float(v)) for v in row) + "\n")


def _coords(n: int) -> list[str]:
    return [f"x_{i + 1}" for i in range(n)]


def _vector(cfg: JobConfig, raw, name: str) -> np.ndarray:
    v = np.asarray(raw, dtype=np.float64)
    if v.shape != (cfg.dim,):
        raise ConfigError(f"{name}: expected {cfg.dim} numbers, got {raw!r}")
    return v


def fundamental_sample_points(cfg: JobConfig, A: np.ndarray) -> np.ndarray:
    """Points along ``line`` (any n) or over ``plane`` (n >= 2), defaulting to a few cells around 0."""
    n = cfg.dim
    line, plane = cfg.get("line"), cfg.get("plane")
    if line is not None:
        start = _vector(cfg, line.get("start"), "line.start")
        stop = _vector(cfg, line.get("stop"), "line.stop")
        t = np.linspace(0.0, 1.0, int(line.get("points", 161)))
        return start + t[:, None] * (stop - start)
    if n >= 2:
        plane = plane or {}
        origin = _vector(cfg, plane.get("origin", (-2.0 * A.sum(axis=1)).tolist()), "plane.origin")
        u = _vector(cfg, plane.get("u", (4.0 * A[:, 0]).tolist()), "plane.u")
        v = _vector(cfg, plane.get("v", (4.0 * A[:, 1]).tolist()), "plane.v")
        p = int(plane.get("points", 41))
        a, b = np.meshgrid(np.linspace(0, 1, p), np.linspace(0, 1, p), indexing="ij")
        return origin + a.reshape(-1, 1) * u + b.reshape(-1, 1) * v
    t = np.linspace(-4.0, 4.0, 161)
    return t[:, None] @ A.T


def cmd_symbol(cfg: JobConfig, out: Path, echo) -> int:
    lat = new_lattice(cfg.A)
    sf = SymbolFunction(lat, kernel_from_config(cfg))
    z = fundamental_domain_grid(lat, cfg.N)
    freq = sf.symbol_inverse_frequency(z)
    spat = sf.symbol_inverse_spatial(z)
    rows = ([*zz, f, s.real, s.imag, 1.0 / f] for zz, f, s in zip(z, freq, spat))
    write_csv(out / "symbol.csv", [f"z_{i + 1}" for i in range(cfg.dim)] +
              ["inverse_frequency", "inverse_spatial_re", "inverse_spatial_im", "upsilon"], rows)
    echo(f"min_inverse_symbol {fmt_float(float(freq.min()))}")
    echo(f"poisson_residual {fmt_float(float(np.max(np.abs(freq - spat.real))))}")
    return EXIT_OK


def cmd_fundamental(cfg: JobConfig, out: Path, echo) -> int:
    lat = new_lattice(cfg.A)
    k = kernel_from_config(cfg)
    fs = FundamentalSpline(cardinal_coefficients(lat, k, cfg.N))
    fs.coefficients.save(out / "coefficients.json")
    x = fundamental_sample_points(cfg, lat.generator)
    write_csv(out / "fundamental.csv", _coords(cfg.dim) + ["value"],
              ([*xx, v] for xx, v in zip(x, fs.eval_spatial(x))))
    box = int(cfg.get("cardinality_box", 3))
    resid = fs.cardinality_residual(box)
    tol = cfg.tolerances["cardinality"]
    echo(f"reconstruction_residual {fmt_float(fs.coefficients.reconstruction_residual)}")
    echo(f"cardinality_residual {fmt_float(resid)} (tolerance {fmt_float(tol)})")
    return EXIT_OK if resid <= tol else EXIT_NUMERIC


def interpolation_points(cfg: JobConfig, A: np.ndarray, radius: int) -> np.ndarray:
    spec = cfg.get("eval")
    if spec is not None:
        lo = _vector(cfg, spec.get("lower"), "eval.lower")
        hi = _vector(cfg, spec.get("upper"), "eval.upper")
        p = int(spec.get("points", 21))
        axes = [np.linspace(lo[i], hi[i], p) for i in range(cfg.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)
    # default: quarter-cell steps over the inner half of the sample box
    h = max(radius // 2, 1)
    t = np.arange(-4 * h, 4 * h + 1) / 4.0
    grids = np.meshgrid(*([t] * cfg.dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1) @ A.T


def cmd_interpolate(cfg: JobConfig, out: Path, samples_path: str | None, echo) -> int:
    if samples_path is None:
        raise ConfigError("--samples: required for interpolate")
    lat = new_lattice(cfg.A)
    samples = read_samples_csv(samples_path, lat)
    fs = FundamentalSpline(cardinal_coefficients(lat, kernel_from_config(cfg), cfg.N))
    ip = Interpolant(samples, fs)
    x = interpolation_points(cfg, lat.generator, samples.radius)
    write_csv(out / "interpolant.csv", _coords(cfg.dim) + ["value"], ([*xx, v] for xx, v in zip(x, ip.eval(x))))
    echo(f"interior_sample_residual {fmt_float(ip.interior_residual())}")
    return EXIT_OK


def cmd_verify(cfg: JobConfig, out: Path, echo) -> int:
    checks = run_checks(cfg)
    (out / "report.json").write_text(format_report(checks))
    failed = [name for name, c in checks.items() if not c["pass"]]
    for name, c in checks.items():
        echo(f"{'PASS' if c['pass'] else 'FAIL'} {name} {fmt_float(c['value'])} <= {fmt_float(c['tolerance'])}")
    if failed:
        print("failing checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def refine_target(cfg: JobConfig, kernel):
    spec = cfg.get("refine") or {}
    kind = spec.get("target", "gaussian")
    if kind == "gaussian":
        width = float(spec.get("width", 10.0))
        return lambda x: np.exp(-np.sum(x * x, axis=-1) / width)
    if kind == "zero":
        return lambda x: np.zeros(x.shape[:-1])
    if kind == "kernel_shift":
        centre = new_lattice(cfg.A).generator @ np.asarray(spec.get("shift", [3] + [0] * (cfg.dim - 1)), float)
        return lambda x: kernel.eval(x - centre)
    raise ConfigError(f"refine.target: unknown target {kind!r}")


def cmd_refine(cfg: JobConfig, out: Path, echo) -> int:
    spec = cfg.get("refine") or {}
    lat = new_lattice(cfg.A)
    k = kernel_from_config(cfg)
    rows = refinement_study(lat, k, refine_target(cfg, k), int(spec.get("radius", cfg.M)),
                            levels=int(spec.get("levels", 3)), stationary=bool(spec.get("stationary", False)))
    header = ["level", "scale", "box_radius", "grid_size", "max_mid_cell_error"]
    write_csv(out / "refine.csv", header, ([r[h] for h in header] for r in rows))
    for r in rows:
        echo(f"level {r['level']} scale {fmt_float(r['scale'])} error {fmt_float(r['max_mid_cell_error'])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skspline", description="Cardinal sk-spline interpolation on lattices.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("symbol", "tabulate the symbol on the dual cell"),
                        ("fundamental", "build the fundamental spline and its coefficient table"),
                        ("interpolate", "interpolate lattice samples from CSV"),
                        ("verify", "run the self-check suite"),
                        ("refine", "refinement study over A, A/2, A/4")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON job configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true")
        if name == "interpolate":
            p.add_argument("--samples", required=True, help="CSV with columns s_1..s_n,value")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    echo = _Printer(args.quiet)
    try:
        cfg = JobConfig.load(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "symbol":
            return cmd_symbol(cfg, out, echo)
        if args.command == "fundamental":
            return cmd_fundamental(cfg, out, echo)
        if args.command == "interpolate":
            return cmd_interpolate(cfg, out, args.samples, echo)
        if args.command == "verify":
            return cmd_verify(cfg, out, echo)
        return cmd_refine(cfg, out, echo)
    except NumericalFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SampleError, SkSplineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

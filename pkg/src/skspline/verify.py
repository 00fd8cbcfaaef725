"""Self-check suite aggregating the invariants of every module.

All random samples come from fixed seeds, so a report is reproducible
byte for byte.
"""
from __future__ import annotations

import math

import numpy as np

from .config import JobConfig
from .fundamental import (
    FundamentalSpline,
    cardinal_coefficients,
    eval_fundamental_corollary,
    eval_fundamental_integral,
    fmt_float,
)
from .interpolation import oracle_discrepancy
from .kernels import GaussianKernel, plancherel_residual, quadrature_fourier, scaling_identity_residual
from .lattice import new_lattice
from .symbol import SymbolFunction

SEED = 1234


def kernel_from_config(cfg: JobConfig) -> GaussianKernel:
    fault = cfg.get("fault") or {}
    return GaussianKernel(cfg.B, fourier_fault=float(fault.get("fourier_scale", 1.0)))


def scaling_test_matrices(n: int) -> list[np.ndarray]:
    """Identity, a diagonal stretch and a full matrix with negative determinant."""
    diag = np.diag(np.arange(2.0, 2.0 + n))
    full = 1.5 * np.eye(n) + 0.4 * np.triu(np.ones((n, n)), 1) - 0.25 * np.tril(np.ones((n, n)), -1)
    full[0] *= -1.0
    return [np.eye(n), diag, full]


def random_ball(rng, count: int, n: int, radius: float) -> np.ndarray:
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * radius * rng.random((count, 1)) ** (1.0 / n)


def quadrature_params(k: GaussianKernel, z_max: float) -> tuple[float, int]:
    """Half-width and node count resolving ``F(K)(z)`` for ``|z| <= z_max``."""
    hw = k.spatial_tail_radius(1e-17)
    # transform of the sampled function aliases with period 2 pi / h
    h = 2.0 * np.pi / (z_max + k.frequency_tail_radius(1e-17 * k.fourier_constant) + 1.0)
    return hw, max(64, int(math.ceil(2.0 * hw / h)) + 1)


def fourier_quadrature_error(k: GaussianKernel, count: int = 32, z_max: float = 4.0, seed: int = SEED) -> float:
    rng = np.random.default_rng(seed)
    z = random_ball(rng, count, k.dim, z_max)
    hw, pts = quadrature_params(k, z_max)
    q = quadrature_fourier(k, z, hw, pts)
    return float(np.max(np.abs(q - k.fourier(z))))


def triple_agreement(fs: FundamentalSpline, sf: SymbolFunction, count: int = 16, seed: int = SEED,
                     spread: float = 3.0) -> float:
    lat, k = fs.lattice, fs.kernel
    rng = np.random.default_rng(seed)
    x = (2.0 * rng.random((count, lat.dim)) - 1.0) * spread @ lat.generator.T
    a = fs.eval_spatial(x)
    b = eval_fundamental_integral(lat, k, x, symbol=sf)
    c = eval_fundamental_corollary(lat, k, x, symbol=sf)
    return float(max(np.max(np.abs(a - b)), np.max(np.abs(a - c)), np.max(np.abs(b - c))))


def run_checks(cfg: JobConfig) -> dict:
    """Run every check; returns ``{name: {"value", "tolerance", "pass"}}`` in a fixed order."""
    lat = new_lattice(cfg.A)
    k = kernel_from_config(cfg)
    n = lat.dim
    tol = cfg.tolerances
    values: dict[str, float] = {}

    values["fourier_quadrature"] = fourier_quadrature_error(k)
    values["plancherel"] = plancherel_residual(k)
    rng = np.random.default_rng(SEED + 1)
    zs = rng.standard_normal((16, n)) * 2.0
    values["scaling_identity"] = max(scaling_identity_residual(k, Q, zs) for Q in scaling_test_matrices(n))

    sf = SymbolFunction(lat, k)
    rng = np.random.default_rng(SEED + 2)
    z = (4.0 * rng.random((32, n)) - 2.0) @ lat.dual_basis.T
    values["poisson"] = sf.poisson_residual(z)

    coeffs = cardinal_coefficients(lat, k, cfg.N, sf, max_residual=math.inf)
    values["reconstruction"] = coeffs.reconstruction_residual
    fs = FundamentalSpline(coeffs)
    values["cardinality"] = fs.cardinality_residual(3)
    values["triple_agreement"] = triple_agreement(fs, sf)

    report = oracle_discrepancy(lat, k, cfg.N, cfg.M, fs=fs)
    values["oracle_coefficients"] = report["coeff_max_diff"]
    values["oracle_values"] = report["value_max_diff"]

    return {name: {"value": v, "tolerance": tol[name], "pass": bool(v <= tol[name])}
            for name, v in values.items()}


def format_report(checks: dict) -> str:
    """Stable JSON text with 17-significant-digit floats."""
    lines = ["{"]
    items = list(checks.items())
    for i, (name, c) in enumerate(items):
        sep = "," if i < len(items) - 1 else ""
        lines.append(
            f'  "{name}": {{"value": {fmt_float(c["value"])}, '
            f'"tolerance": {fmt_float(c["tolerance"])}, "pass": {"true" if c["pass"] else "false"}}}{sep}'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"

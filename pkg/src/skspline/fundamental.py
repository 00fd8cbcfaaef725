"""Cardinal coefficients and the fundamental (cardinal) spline.

The coefficients ``alpha_s`` are the Fourier coefficients of the symbol
``Upsilon`` with respect to the characters ``exp(-i <A s, z>)``.  Sampling
``Upsilon`` on the grid ``D j / N`` turns this into an n-dimensional DFT,
because ``<A s, D j / N> = 2 pi <s, j> / N``.

The fundamental spline can then be evaluated three ways:

* series:   ``|det A| sum_s alpha_s K(x - A s)``
* integral: ``|det A| (2 pi)^{-n} int Upsilon(z) F(K)(z) exp(i <z, x>) dz``
* integral with the spatial (lattice-sum) denominator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from .errors import DimensionMismatch, ReconstructionFailure
from .kernels import GaussianKernel, Kernel, trapezoid_nodes
from .lattice import Lattice, box_indices, fundamental_domain_grid, new_lattice
from .symbol import SymbolFunction

#: default ReconstructionFailure threshold
MAX_RECONSTRUCTION_RESIDUAL = 1e-6
#: alpha_s imaginary parts above this mean the symbol was not even
MAX_IMAG_RESIDUE = 1e-10
#: coefficients with |det A| |alpha_s| below this are dropped from the series
SERIES_FLOOR = 1e-14
N_RECONSTRUCTION_SAMPLES = 64
RECONSTRUCTION_SEED = 20240611


@dataclass(frozen=True, eq=False)
class CardinalCoefficients:
    """``alpha_s`` for ``|s|_inf <= half`` stored as a dense centred array.

    ``table[s + half]`` holds ``alpha_s``; ``half = N/2 - 1``.
    """

    lattice: Lattice
    kernel: Kernel
    grid_size: int
    table: np.ndarray
    reconstruction_residual: float
    imag_residue: float = 0.0

    @property
    def half(self) -> int:
        return self.grid_size // 2 - 1

    def __getitem__(self, s) -> float:
        s = np.atleast_1d(np.asarray(s, dtype=np.int64))
        if s.shape != (self.lattice.dim,):
            raise DimensionMismatch(f"index must have length {self.lattice.dim}")
        if np.any(np.abs(s) > self.half):
            return 0.0
        return float(self.table[tuple(s + self.half)])

    def indices(self, radius: int | None = None) -> np.ndarray:
        r = self.half if radius is None else min(int(radius), self.half)
        return box_indices(self.lattice.dim, r)

    def values(self, radius: int | None = None) -> np.ndarray:
        """Coefficients in lexicographic index order matching :meth:`indices`."""
        r = self.half if radius is None else min(int(radius), self.half)
        sl = tuple(slice(self.half - r, self.half + r + 1) for _ in range(self.lattice.dim))
        return self.table[sl].reshape(-1)

    def series(self, z) -> np.ndarray:
        """``sum_s alpha_s exp(-i <A s, z>)`` (complex)."""
        z = np.asarray(z, dtype=np.float64)
        vecs = -(self.indices() @ self.lattice.generator.T)
        out = _accel.phase_sum(z.reshape(-1, self.lattice.dim), vecs, self.values())
        return complex(out[0]) if z.ndim == 1 else out.reshape(z.shape[:-1])

    def shell_max(self) -> np.ndarray:
        """``max |alpha_s|`` over each shell ``|s|_inf = k``, ``k = 0..half``."""
        idx = self.indices()
        shells = np.abs(idx).max(axis=1)
        vals = np.abs(self.values())
        out = np.zeros(self.half + 1)
        np.maximum.at(out, shells, vals)
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        if not isinstance(self.kernel, GaussianKernel):
            raise TypeError("only Gaussian kernels are serializable")
        lines = [
            "{",
            f'  "dim": {self.lattice.dim},',
            f'  "A": {_fmt_matrix(self.lattice.generator)},',
            f'  "B": {_fmt_matrix(self.kernel.shape)},',
            f'  "N": {self.grid_size},',
            f'  "reconstruction_residual": {fmt_float(self.reconstruction_residual)},',
            '  "entries": [',
        ]
        rows = [f"    [{json.dumps(s)}, {fmt_float(a)}]"
                for s, a in zip(self.indices().tolist(), self.values().tolist())]
        lines.append(",\n".join(rows))
        lines += ["  ]", "}"]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "CardinalCoefficients":
        doc = json.loads(text)
        lat = new_lattice(doc["A"])
        kernel = GaussianKernel(doc["B"])
        n, N = int(doc["dim"]), int(doc["N"])
        if lat.dim != n:
            raise DimensionMismatch("dim does not match A")
        half = N // 2 - 1
        table = np.zeros((2 * half + 1,) * n)
        for s, a in doc["entries"]:
            table[tuple(np.asarray(s) + half)] = float(a)
        table.setflags(write=False)
        return cls(lat, kernel, N, table, float(doc.get("reconstruction_residual", math.nan)))

    @classmethod
    def load(cls, path) -> "CardinalCoefficients":
        return cls.from_json(Path(path).read_text())


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _fmt_matrix(m: np.ndarray) -> str:
    return "[" + ", ".join("[" + ", ".join(fmt_float(v) for v in row) + "]" for row in m) + "]"


def cardinal_coefficients(lat: Lattice, k: Kernel, N: int, symbol: SymbolFunction | None = None,
                          max_residual: float = MAX_RECONSTRUCTION_RESIDUAL) -> CardinalCoefficients:
    """Fourier coefficients of the symbol from an ``N^n`` sample grid.

    Raises :class:`ReconstructionFailure` when the truncated series misses
    the symbol by more than ``max_residual`` at random off-grid points; the
    usual fix is a larger ``N``.
    """
    if N % 2 or N < 4:
        raise ValueError(f"grid size must be even and >= 4, got {N}")
    sf = symbol if symbol is not None else SymbolFunction(lat, k)
    n = lat.dim
    grid = fundamental_domain_grid(lat, N)
    ups = 1.0 / sf.symbol_inverse_frequency(grid).reshape((N,) * n)
    full = np.fft.ifftn(ups)
    half = N // 2 - 1
    wrap = np.arange(-half, half + 1) % N
    sub = full[np.ix_(*([wrap] * n))]
    imag = float(np.max(np.abs(sub.imag)))
    table = np.ascontiguousarray(sub.real)
    table.setflags(write=False)
    coeffs = CardinalCoefficients(lat, k, N, table, math.nan, imag)

    rng = np.random.default_rng(RECONSTRUCTION_SEED)
    z = rng.random((N_RECONSTRUCTION_SAMPLES, n)) @ lat.dual_basis.T
    resid = float(np.max(np.abs(coeffs.series(z) - sf.upsilon(z))))
    coeffs = CardinalCoefficients(lat, k, N, table, resid, imag)
    if imag > MAX_IMAG_RESIDUE:
        raise ReconstructionFailure(f"coefficients have imaginary residue {imag:.2e}; symbol not even?")
    if not resid <= max_residual:
        raise ReconstructionFailure(
            f"series reconstruction residual {resid:.2e} exceeds {max_residual:g} at N={N}; increase N"
        )
    return coeffs


def default_eval_truncation(coeffs: CardinalCoefficients) -> int:
    """Largest shell radius holding a coefficient with ``|det A| |alpha_s| > 1e-14``."""
    big = np.nonzero(coeffs.shell_max() * coeffs.lattice.abs_det > SERIES_FLOOR)[0]
    return int(big.max()) if big.size else 0


@dataclass(eq=False)
class FundamentalSpline:
    """``|det A| sum_{|s| <= T} alpha_s K(x - A s)``, one at the origin and zero at other lattice points."""

    coefficients: CardinalCoefficients
    eval_truncation: int = -1
    cardinality_residual_last: float = math.nan
    _shifts: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.eval_truncation < 0:
            self.eval_truncation = default_eval_truncation(self.coefficients)
        c = self.coefficients
        idx = c.indices(self.eval_truncation)
        self._shifts = -(idx @ c.lattice.generator.T)
        self._weights = c.lattice.abs_det * c.values(self.eval_truncation)

    @property
    def lattice(self) -> Lattice:
        return self.coefficients.lattice

    @property
    def kernel(self) -> Kernel:
        return self.coefficients.kernel

    @classmethod
    def build(cls, lat: Lattice, k: Kernel, N: int | None = None, max_N: int | None = None,
              max_residual: float = MAX_RECONSTRUCTION_RESIDUAL) -> "FundamentalSpline":
        """Construct with ``N`` if given, otherwise double from 16 until reconstruction passes."""
        sf = SymbolFunction(lat, k)
        if N is not None:
            return cls(cardinal_coefficients(lat, k, N, sf, max_residual))
        if max_N is None:
            max_N = 4096 if lat.dim == 1 else 256
        N = 16
        while True:
            try:
                return cls(cardinal_coefficients(lat, k, N, sf, max_residual))
            except ReconstructionFailure:
                if 2 * N > max_N:
                    raise
                N *= 2

    def __call__(self, x):
        return self.eval_spatial(x)

    def eval_spatial(self, x):
        k = self.kernel
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != self.lattice.dim:
            raise DimensionMismatch(f"x must have trailing length {self.lattice.dim}")
        flat = x.reshape(-1, self.lattice.dim)
        if hasattr(k, "spatial_metric"):
            out = _accel.gauss_shift_sum(flat, self._shifts, self._weights, k.spatial_metric)
        else:
            out = np.array([math.fsum(self._weights * k.eval(p + self._shifts)) for p in flat])
        return float(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])

    def cardinality_residual(self, M: int) -> float:
        if M < 1:
            raise ValueError("M must be at least 1")
        m = box_indices(self.lattice.dim, M)
        vals = self.eval_spatial(m @ self.lattice.generator.T)
        delta = np.all(m == 0, axis=1).astype(np.float64)
        self.cardinality_residual_last = float(np.max(np.abs(vals - delta)))
        return self.cardinality_residual_last


def eval_fundamental_spatial(fs: FundamentalSpline, x):
    return fs.eval_spatial(x)


def cardinality_residual(fs: FundamentalSpline, M: int) -> float:
    return fs.cardinality_residual(M)


# -- integral representations ------------------------------------------------

DEFAULT_N_QUAD = 128
INTEGRAL_TAIL_EPS = 1e-14


def _integral(lat: Lattice, k: Kernel, x, n_quad: int, symbol: SymbolFunction | None, spatial: bool):
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    sf = symbol if symbol is not None else SymbolFunction(lat, k)
    x = np.asarray(x, dtype=np.float64)
    n = lat.dim
    if x.ndim == 0 or x.shape[-1] != n:
        raise DimensionMismatch(f"x must have trailing length {n}")
    R = k.frequency_tail_radius(INTEGRAL_TAIL_EPS)
    nodes, w = trapezoid_nodes(n, R, n_quad)
    fk = np.asarray(k.fourier(nodes))
    keep = fk != 0.0
    nodes, w, fk = nodes[keep], w[keep], fk[keep]
    if spatial:
        g = fk / sf.symbol_inverse_spatial(nodes)
    else:
        g = (fk / sf.symbol_inverse_frequency(nodes)).astype(np.complex128)
    g = g * w * (lat.abs_det / (2.0 * np.pi) ** n)
    out = _accel.phase_sum(x.reshape(-1, n), nodes, g.real, g.imag)
    return complex(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])


def eval_fundamental_integral(lat: Lattice, k: Kernel, x, n_quad: int = DEFAULT_N_QUAD,
                              symbol: SymbolFunction | None = None, full: bool = False):
    """Quadrature of ``|det A| (2 pi)^{-n} int Upsilon F(K) exp(i <z, x>) dz``.

    Returns the real part unless ``full`` is set.
    """
    v = _integral(lat, k, x, n_quad, symbol, spatial=False)
    return v if full else np.real(v)


def eval_fundamental_corollary(lat: Lattice, k: Kernel, x, n_quad: int = DEFAULT_N_QUAD,
                               symbol: SymbolFunction | None = None, full: bool = False):
    """As :func:`eval_fundamental_integral`, dividing by the lattice-sum form of the symbol."""
    v = _integral(lat, k, x, n_quad, symbol, spatial=True)
    return v if full else np.real(v)

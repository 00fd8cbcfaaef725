"""The periodized symbol ``sum_m F(K)(z + D m)`` and its reciprocal.

Two independent routes are provided:

* frequency form: sum of the kernel transform over dual-lattice translates;
* spatial form:   ``|det A| sum_m K(A m) exp(i <A m, z>)``.

Poisson summation says they agree; :meth:`SymbolFunction.poisson_residual`
measures how well they do.
"""
from __future__ import annotations

import math
import threading

import numpy as np

from . import _accel
from .errors import DegenerateSymbol, DimensionMismatch
from .kernels import Kernel
from .lattice import Lattice, box_indices, fundamental_domain_grid, reduce_to_cell

#: truncation target: first omitted term relative to the leading term
TRUNCATION_EPS = 1e-16
#: symbol values below this fraction of the leading term are rejected
DEGENERACY_EPS = 1e-13
#: construction check on the first omitted shell at z = 0
TAIL_TOLERANCE = 1e-14


def _smin(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False).min())


class SymbolFunction:
    """Evaluator for the inverse symbol and the symbol on a fixed lattice/kernel pair.

    Parameters
    ----------
    lattice, kernel
        Must share the same dimension.
    freq_truncation, spatial_truncation
        Index-box radii for the two sums.  ``None`` picks the smallest box
        whose first omitted term is below ``1e-16`` of the leading term.
    """

    def __init__(self, lattice: Lattice, kernel: Kernel, freq_truncation: int | None = None,
                 spatial_truncation: int | None = None):
        if lattice.dim != kernel.dim:
            raise DimensionMismatch(f"lattice dim {lattice.dim} != kernel dim {kernel.dim}")
        self.lattice = lattice
        self.kernel = kernel
        n = lattice.dim
        zero = np.zeros(n)
        self.freq_leading = float(kernel.fourier(zero))
        self.spatial_leading = lattice.abs_det * float(kernel.eval(zero))

        if freq_truncation is None:
            r_f = kernel.frequency_tail_radius(TRUNCATION_EPS * self.freq_leading)
            # z is reduced to the centred cell before summing
            cell = 0.5 * np.linalg.norm(lattice.dual_basis, axis=0).sum()
            freq_truncation = math.ceil((r_f + cell) / _smin(lattice.dual_basis))
        if spatial_truncation is None:
            r_s = kernel.spatial_tail_radius(TRUNCATION_EPS)
            spatial_truncation = math.ceil(r_s / _smin(lattice.generator))
        self.freq_truncation = int(freq_truncation)
        self.spatial_truncation = int(spatial_truncation)

        m_f = box_indices(n, self.freq_truncation)
        self._freq_shifts = m_f @ lattice.dual_basis.T
        m_s = box_indices(n, self.spatial_truncation)
        self._spatial_vecs = m_s @ lattice.generator.T
        self._spatial_weights = np.asarray(kernel.eval(self._spatial_vecs), dtype=np.float64).reshape(-1)

        self._lock = threading.Lock()
        self.min_symbol_seen = math.inf

        shell = box_indices(n, self.freq_truncation + 1)
        shell = shell[np.abs(shell).max(axis=1) == self.freq_truncation + 1]
        tail = float(np.sum(kernel.fourier(shell @ lattice.dual_basis.T)))
        self.freq_tail_ratio = tail / self.symbol_inverse_frequency(zero)
        if self.freq_tail_ratio > TAIL_TOLERANCE:
            raise ValueError(
                f"freq_truncation={self.freq_truncation} leaves a tail of "
                f"{self.freq_tail_ratio:.2e} relative at z=0"
            )

    def __repr__(self) -> str:
        return (f"SymbolFunction({self.lattice!r}, {self.kernel!r}, "
                f"M_f={self.freq_truncation}, M_s={self.spatial_truncation})")

    def _prep(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 0 or z.shape[-1] != self.lattice.dim:
            raise DimensionMismatch(f"z must have trailing length {self.lattice.dim}, got {z.shape}")
        return z, z.reshape(-1, self.lattice.dim)

    def _record(self, values: np.ndarray, leading: float) -> None:
        if values.size == 0:
            return
        lo = float(np.min(values))
        with self._lock:
            if lo < self.min_symbol_seen:
                self.min_symbol_seen = lo
        if not lo >= DEGENERACY_EPS * leading:
            raise DegenerateSymbol(
                f"inverse symbol {lo:.3e} is below {DEGENERACY_EPS:g} x leading term {leading:.3e}"
            )

    def _frequency_raw(self, flat: np.ndarray) -> np.ndarray:
        k = self.kernel
        zc = reduce_to_cell(self.lattice, flat)
        if hasattr(k, "frequency_metric"):
            ones = np.ones(self._freq_shifts.shape[0])
            s = _accel.gauss_shift_sum(zc, self._freq_shifts, ones, k.frequency_metric)
            return k.fourier_constant * s
        # generic kernel: plain sum in index order
        return np.array([math.fsum(k.fourier(p + self._freq_shifts)) for p in zc])

    def symbol_inverse_frequency(self, z):
        """``sum_{|m| <= M_f} F(K)(z + D m)``; real, positive for Gaussians."""
        z, flat = self._prep(z)
        vals = self._frequency_raw(flat)
        self._record(vals, self.freq_leading)
        return float(vals[0]) if z.ndim == 1 else vals.reshape(z.shape[:-1])

    def symbol_inverse_spatial(self, z):
        """``|det A| sum_{|m| <= M_s} K(A m) exp(i <A m, z>)``; complex."""
        z, flat = self._prep(z)
        vals = self.lattice.abs_det * _accel.phase_sum(flat, self._spatial_vecs, self._spatial_weights)
        self._record(vals.real, self.spatial_leading)
        return complex(vals[0]) if z.ndim == 1 else vals.reshape(z.shape[:-1])

    def upsilon(self, z):
        """Reciprocal of :meth:`symbol_inverse_frequency`."""
        v = self.symbol_inverse_frequency(z)
        return 1.0 / v

    def check_nondegeneracy(self, N: int) -> float:
        """Minimum of the inverse symbol over an ``N^n`` grid on the dual cell."""
        if N < 8:
            raise ValueError("N must be at least 8")
        grid = fundamental_domain_grid(self.lattice, N)
        return float(np.min(self.symbol_inverse_frequency(grid)))

    def poisson_residual(self, sample_zs) -> float:
        """Max ``|frequency form - Re(spatial form)|`` over the samples."""
        z = np.atleast_2d(np.asarray(sample_zs, dtype=np.float64))
        f = self.symbol_inverse_frequency(z)
        s = self.symbol_inverse_spatial(z)
        return float(np.max(np.abs(f - s.real)))


def symbol_inverse_frequency(sf: SymbolFunction, z):
    return sf.symbol_inverse_frequency(z)


def symbol_inverse_spatial(sf: SymbolFunction, z):
    return sf.symbol_inverse_spatial(z)


def upsilon(sf: SymbolFunction, z):
    return sf.upsilon(z)


def check_nondegeneracy(sf: SymbolFunction, N: int) -> float:
    return sf.check_nondegeneracy(N)


def poisson_residual(sf: SymbolFunction, sample_zs) -> float:
    return sf.poisson_residual(sample_zs)

"""Kernels with closed-form Fourier transforms and quadrature cross-checks.

Fourier convention throughout the package::

    F f(y)      = int exp(-i <x, y>) f(x) dx
    F^{-1} g(x) = (2 pi)^{-n} int exp(i <x, y>) g(y) dy
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from . import _accel
from .errors import DimensionMismatch, SingularMatrix, SizeOverflow
from .lattice import MAX_POINTS

TINY = 1e-300


@runtime_checkable
class Kernel(Protocol):
    """What the symbol and spline code needs from a kernel."""

    dim: int

    def eval(self, x) -> np.ndarray | float: ...

    def fourier(self, z) -> np.ndarray | float: ...

    def spatial_tail_radius(self, eps: float) -> float: ...

    def frequency_tail_radius(self, eps: float) -> float: ...


def gaussian_integral(c: float, metric: np.ndarray) -> float:
    """``int exp(-c |M x|^2) dx`` over R^n."""
    n = metric.shape[0]
    return (np.pi / c) ** (n / 2) / abs(np.linalg.det(metric))


@dataclass(frozen=True, eq=False)
class GaussianKernel:
    """``K(x) = exp(-|B x|^2)`` with shape matrix ``B``.

    The transform under the package convention is
    ``pi^{n/2} / |det B| * exp(-|B^{-T} z|^2 / 4)``.

    ``fourier_fault`` multiplies the transform constant; it exists only so
    the verification suite can be shown to catch a wrong constant.
    """

    shape: np.ndarray
    fourier_fault: float = 1.0
    dim: int = field(init=False)
    shape_inv_t: np.ndarray = field(init=False)
    abs_det_shape: float = field(init=False)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.shape, dtype=np.float64))
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionMismatch(f"shape matrix must be square, got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("shape matrix has non-finite entries")
        det = float(np.linalg.det(b))
        if det == 0.0:
            raise SingularMatrix("kernel shape matrix B is singular")
        b = b.copy()
        b.setflags(write=False)
        inv_t = np.linalg.inv(b).T
        inv_t.setflags(write=False)
        object.__setattr__(self, "shape", b)
        object.__setattr__(self, "dim", b.shape[0])
        object.__setattr__(self, "shape_inv_t", inv_t)
        object.__setattr__(self, "abs_det_shape", abs(det))

    def __repr__(self) -> str:
        return f"GaussianKernel(B={self.shape.tolist()})"

    # metrics M such that K(x) = exp(-|M x|^2) and F(K)(z) = c exp(-|M' z|^2)
    @property
    def spatial_metric(self) -> np.ndarray:
        return self.shape

    @property
    def frequency_metric(self) -> np.ndarray:
        return 0.5 * self.shape_inv_t

    @property
    def fourier_constant(self) -> float:
        return self.fourier_fault * np.pi ** (self.dim / 2) / self.abs_det_shape

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected trailing length {self.dim}, got shape {x.shape}")
        return x

    def eval(self, x):
        x = self._check(x)
        y = x @ self.shape.T
        v = np.exp(-np.einsum("...i,...i->...", y, y))
        v = np.where(v < TINY, 0.0, v)
        return float(v) if v.ndim == 0 else v

    def fourier(self, z):
        z = self._check(z)
        y = z @ self.frequency_metric.T
        v = self.fourier_constant * np.exp(-np.einsum("...i,...i->...", y, y))
        v = np.where(v < TINY, 0.0, v)
        return float(v) if v.ndim == 0 else v

    def spatial_tail_radius(self, eps: float) -> float:
        """Radius beyond which ``K <= eps``."""
        if not 0.0 < eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        smin = np.linalg.svd(self.shape, compute_uv=False).min()
        return float(np.sqrt(np.log(1.0 / eps)) / smin)

    def frequency_tail_radius(self, eps: float) -> float:
        """Radius beyond which ``F(K) <= eps``."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        c = self.fourier_constant
        if eps >= c:
            return 0.0
        # smallest singular value of (B^{-1})^T / 2
        smin = np.linalg.svd(self.frequency_metric, compute_uv=False).min()
        return float(np.sqrt(np.log(c / eps)) / smin)

    def l2_norm_sq(self) -> float:
        return gaussian_integral(2.0, self.spatial_metric)

    def fourier_l2_norm_sq(self) -> float:
        return self.fourier_constant**2 * gaussian_integral(2.0, self.frequency_metric)

    def composed(self, Q) -> "GaussianKernel":
        """The kernel ``x -> K(Q x)``, itself a Gaussian with shape ``B Q``."""
        return GaussianKernel(self.shape @ np.asarray(Q, dtype=np.float64), self.fourier_fault)

    def to_dict(self) -> dict:
        return {"type": "gaussian", "B": self.shape.tolist()}


def gaussian_eval(k: GaussianKernel, x):
    return k.eval(x)


def gaussian_fourier(k: GaussianKernel, z):
    return k.fourier(z)


def trapezoid_nodes(n: int, half_width: float, points_per_axis: int, cap: int = MAX_POINTS):
    """Tensor trapezoid nodes and weights on ``[-h, h]^n``."""
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be at least 2")
    if points_per_axis**n > cap:
        raise SizeOverflow(f"{points_per_axis}^{n} quadrature nodes exceed cap {cap}")
    t = np.linspace(-half_width, half_width, points_per_axis)
    w = np.full(points_per_axis, t[1] - t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    grids = np.meshgrid(*([t] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=1)
    weights = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
    return nodes, weights


def quadrature_fourier(k: Kernel, z, half_width: float, points_per_axis: int):
    """Trapezoid approximation of ``int exp(-i<x, z>) K(x) dx`` (complex).

    Independent of any closed form: only ``k.eval`` is used.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != k.dim:
        raise DimensionMismatch(f"z must have trailing length {k.dim}")
    nodes, w = trapezoid_nodes(k.dim, half_width, points_per_axis)
    vals = w * k.eval(nodes)
    keep = vals != 0.0
    out = _accel.phase_sum(z.reshape(-1, k.dim), -nodes[keep], vals[keep])
    return complex(out[0]) if z.ndim == 1 else out.reshape(z.shape[:-1])


def quadrature_inverse_fourier(g: Callable, n: int, x, half_width: float, points_per_axis: int):
    """Trapezoid approximation of ``(2 pi)^{-n} int exp(i<x, y>) g(y) dy`` (complex)."""
    x = np.asarray(x, dtype=np.float64)
    nodes, w = trapezoid_nodes(n, half_width, points_per_axis)
    vals = np.asarray(g(nodes), dtype=np.complex128) * w / (2.0 * np.pi) ** n
    keep = vals != 0.0
    out = _accel.phase_sum(x.reshape(-1, n), nodes[keep], vals[keep].real, vals[keep].imag)
    return complex(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])


def scaling_identity_residual(k: GaussianKernel, Q, sample_zs) -> float:
    """Max deviation of ``F(K(Q.))(z)`` from ``|det Q|^{-1} F(K)(Q^{-T} z)``."""
    q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    det = float(np.linalg.det(q))
    if det == 0.0:
        raise SingularMatrix("Q is singular")
    z = np.atleast_2d(np.asarray(sample_zs, dtype=np.float64))
    left = k.composed(q).fourier(z)
    right = k.fourier(z @ np.linalg.inv(q)) / abs(det)  # (Q^{-T} z)^T = z^T Q^{-1}
    return float(np.max(np.abs(left - right)))


def plancherel_residual(k: GaussianKernel) -> float:
    """Relative gap between ``||K||^2`` and ``(2 pi)^{-n} ||F K||^2`` (closed forms)."""
    lhs = k.l2_norm_sq()
    rhs = k.fourier_l2_norm_sq() / (2.0 * np.pi) ** k.dim
    return abs(lhs - rhs) / abs(lhs)

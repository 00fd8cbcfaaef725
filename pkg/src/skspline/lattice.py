"""Lattices ``A Z^n``, their dual translates and the dual fundamental domain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularMatrix, SizeOverflow

TWO_PI = 2.0 * np.pi

#: default cap on the number of generated points/indices
MAX_POINTS = 10**7

#: norm-based condition estimate above which a generator is rejected
MAX_CONDITION = 1e8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Lattice:
    """The point set ``{A m : m in Z^n}`` with cached derived quantities.

    ``dual_basis`` is ``2 pi A^{-T}``; its columns span the translates over
    which kernel transforms are periodized.  Build with :func:`new_lattice`.
    """

    dim: int
    generator: np.ndarray
    inverse: np.ndarray
    dual_basis: np.ndarray
    abs_det: float
    cond_estimate: float

    def __repr__(self) -> str:
        return f"Lattice(dim={self.dim}, generator={self.generator.tolist()})"

    def to_dict(self) -> dict:
        return {"dim": self.dim, "A": self.generator.tolist()}


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Integer vectors in lexicographic order, one per row of ``indices``."""

    dim: int
    indices: np.ndarray
    radius: int | None = None

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return iter(map(tuple, self.indices.tolist()))


def new_lattice(A) -> Lattice:
    """Validate a generator matrix and precompute inverse, dual basis and volume."""
    a = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"generator must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("generator has non-finite entries")
    n = a.shape[0]
    det = float(np.linalg.det(a))
    if det == 0.0:
        raise SingularMatrix("generator is singular (det A = 0)")
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"generator is singular: {exc}") from None
    cond = float(np.linalg.norm(a, 1) * np.linalg.norm(inv, 1))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrix(f"generator condition estimate {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    return Lattice(
        dim=n,
        generator=_frozen(a),
        inverse=_frozen(inv),
        dual_basis=_frozen(TWO_PI * inv.T),
        abs_det=abs(det),
        cond_estimate=cond,
    )


def _check_vec(lat: Lattice, v, name: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim == 0 or v.shape[-1] != lat.dim:
        raise DimensionMismatch(f"{name} must have trailing length {lat.dim}, got shape {v.shape}")
    return v


def lattice_point(lat: Lattice, m) -> np.ndarray:
    """``A m``; ``m`` may be a single index or a stack of shape (..., n)."""
    m = _check_vec(lat, m, "m")
    return m @ lat.generator.T


def dual_point(lat: Lattice, l) -> np.ndarray:
    """``2 pi A^{-T} l``."""
    l = _check_vec(lat, l, "l")
    return l @ lat.dual_basis.T


def box_indices(n: int, radius: int, cap: int = MAX_POINTS) -> np.ndarray:
    """All ``m`` with ``|m|_inf <= radius`` as an int64 array, lexicographic."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    size = (2 * radius + 1) ** n
    if size > cap:
        raise SizeOverflow(f"box of radius {radius} in dimension {n} has {size} points (cap {cap})")
    r = np.arange(-radius, radius + 1, dtype=np.int64)
    grids = np.meshgrid(*([r] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def enumerate_box(lat: Lattice, radius_inf: int, cap: int = MAX_POINTS) -> IndexSet:
    return IndexSet(lat.dim, box_indices(lat.dim, int(radius_inf), cap), int(radius_inf))


def grid_indices(n: int, N: int, cap: int = MAX_POINTS) -> np.ndarray:
    """``{0..N-1}^n`` in lexicographic order."""
    if N ** n > cap:
        raise SizeOverflow(f"grid {N}^{n} exceeds cap {cap}")
    r = np.arange(N, dtype=np.int64)
    grids = np.meshgrid(*([r] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def fundamental_domain_grid(lat: Lattice, N: int, cap: int = MAX_POINTS) -> np.ndarray:
    """Uniform half-open grid ``D (j / N)`` on the dual fundamental domain, shape (N^n, n)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    j = grid_indices(lat.dim, N, cap)
    return (j / N) @ lat.dual_basis.T


def reduce_to_cell(lat: Lattice, z: np.ndarray) -> np.ndarray:
    """Translate frequencies by dual-lattice vectors into the centred cell."""
    u = z @ lat.generator / TWO_PI  # D^{-1} z = A^T z / 2pi
    return z - np.round(u) @ lat.dual_basis.T

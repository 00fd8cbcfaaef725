"""Cardinal interpolation from lattice samples, plus a dense Gram-system oracle."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import lapack
from scipy.signal import convolve

from . import _accel
from .errors import DimensionMismatch, IllConditioned, ReconstructionFailure, SizeOverflow
from .fundamental import FundamentalSpline
from .kernels import Kernel
from .lattice import IndexSet, Lattice, box_indices, enumerate_box, new_lattice

MAX_GRAM_SIZE = 4096
MAX_GRAM_CONDITION = 1e12
GRAM_RESIDUAL_TOL = 1e-9


class SampleError(ValueError):
    """Malformed sample input (bad CSV, missing or duplicate index)."""


@dataclass(frozen=True, eq=False)
class LatticeSamples:
    """Values ``f(A s)`` on the full box ``|s|_inf <= radius``, lexicographic."""

    lattice: Lattice
    radius: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if v.size != (2 * self.radius + 1) ** self.lattice.dim:
            raise DimensionMismatch(
                f"{v.size} values do not fill a radius-{self.radius} box in dimension {self.lattice.dim}"
            )
        if not np.all(np.isfinite(v)):
            raise SampleError("sample values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def index_set(self) -> IndexSet:
        return enumerate_box(self.lattice, self.radius)

    @property
    def indices(self) -> np.ndarray:
        return box_indices(self.lattice.dim, self.radius)

    @property
    def points(self) -> np.ndarray:
        return self.indices @ self.lattice.generator.T

    def as_array(self) -> np.ndarray:
        return self.values.reshape((2 * self.radius + 1,) * self.lattice.dim)

    @classmethod
    def from_function(cls, lat: Lattice, f: Callable, radius: int) -> "LatticeSamples":
        """Sample a vectorized ``f`` (taking an (m, n) array) on the box."""
        pts = box_indices(lat.dim, radius) @ lat.generator.T
        return cls(lat, radius, np.asarray(f(pts), dtype=np.float64))

    @classmethod
    def from_csv(cls, path, lat: Lattice) -> "LatticeSamples":
        return read_samples_csv(path, lat)

    def to_csv(self, path) -> None:
        n = self.lattice.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"s_{i + 1}" for i in range(n)] + ["value"])
            for s, v in zip(self.indices.tolist(), self.values.tolist()):
                w.writerow([*s, format(v, ".17g")])


def read_samples_csv(path, lat: Lattice) -> LatticeSamples:
    """Parse ``s_1..s_n,value`` rows; the indices must fill a centred box exactly."""
    n = lat.dim
    rows: dict[tuple, float] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            if len(row) != n + 1:
                raise SampleError(f"line {lineno}: expected {n + 1} columns, got {len(row)}")
            try:
                s = tuple(int(c) for c in row[:n])
                v = float(row[n])
            except ValueError:
                raise SampleError(f"line {lineno}: cannot parse {row!r}") from None
            if s in rows:
                raise SampleError(f"line {lineno}: duplicate index {s}")
            rows[s] = v
    if not rows:
        raise SampleError("no samples found")
    radius = max(max(abs(c) for c in s) for s in rows)
    idx = box_indices(n, radius)
    values = np.empty(idx.shape[0])
    for i, s in enumerate(map(tuple, idx.tolist())):
        if s not in rows:
            raise SampleError(f"missing sample for index {list(s)} (box radius {radius})")
        values[i] = rows[s]
    return LatticeSamples(lat, radius, values)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


@dataclass(eq=False)
class Interpolant:
    """``sum_s f(A s) sk(x - A s)`` for a fundamental spline ``sk``.

    The sum is folded once into kernel-shift coefficients: the samples are
    convolved with the truncated ``alpha`` table, so evaluation costs a
    single lattice sum of kernels.
    """

    samples: LatticeSamples
    fundamental: FundamentalSpline
    _shifts: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lat = self.samples.lattice
        if lat.dim != self.fundamental.lattice.dim or not np.array_equal(
                lat.generator, self.fundamental.lattice.generator):
            raise DimensionMismatch("samples and fundamental spline live on different lattices")
        T = self.fundamental.eval_truncation
        coeffs = self.fundamental.coefficients
        alpha = coeffs.values(T).reshape((2 * T + 1,) * lat.dim)
        c = lat.abs_det * convolve(self.samples.as_array(), alpha, method="direct")
        R = self.samples.radius + T
        idx = box_indices(lat.dim, R)
        w = c.reshape(-1)
        keep = w != 0.0
        self._shifts = -(idx[keep] @ lat.generator.T)
        self._weights = np.ascontiguousarray(w[keep])

    @property
    def lattice(self) -> Lattice:
        return self.samples.lattice

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        x = np.asarray(x, dtype=np.float64)
        n = self.lattice.dim
        if x.ndim == 0 or x.shape[-1] != n:
            raise DimensionMismatch(f"x must have trailing length {n}")
        flat = x.reshape(-1, n)
        k = self.fundamental.kernel
        if self._weights.size == 0:
            out = np.zeros(flat.shape[0])
        elif hasattr(k, "spatial_metric"):
            out = _accel.gauss_shift_sum(flat, self._shifts, self._weights, k.spatial_metric)
        else:
            out = np.array([math.fsum(self._weights * k.eval(p + self._shifts)) for p in flat])
        return float(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])

    def interior_indices(self, margin: int | None = None) -> np.ndarray:
        M = self.samples.radius
        if margin is None:
            margin = self.fundamental.eval_truncation
        return box_indices(self.lattice.dim, M - min(int(margin), M))

    def interior_residual(self, margin: int | None = None) -> float:
        """Max ``|sk(A s) - f(A s)|`` over samples at least ``margin`` steps inside the box.

        ``margin`` defaults to the series truncation, clipped so the centre
        sample always counts.
        """
        idx = self.interior_indices(margin)
        M = self.samples.radius
        flat = np.ravel_multi_index(tuple((idx + M).T), (2 * M + 1,) * self.lattice.dim)
        vals = self.eval(idx @ self.lattice.generator.T)
        return float(np.max(np.abs(vals - self.samples.values[flat])))


def interpolate(samples: LatticeSamples, fs: FundamentalSpline) -> Interpolant:
    return Interpolant(samples, fs)


def eval_interpolant(ip: Interpolant, x):
    return ip.eval(x)


# -- Gram oracle --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GramSolution:
    """Coefficients of ``sum_j c_j K(x - A j)`` matching the data on ``J``."""

    lattice: Lattice
    kernel: Kernel
    indices: np.ndarray
    coefficients: np.ndarray
    residual_inf: float
    cond_estimate: float

    def coefficient(self, j) -> float:
        j = np.asarray(j, dtype=np.int64)
        hit = np.nonzero(np.all(self.indices == j, axis=1))[0]
        return float(self.coefficients[hit[0]]) if hit.size else 0.0

    def eval(self, x):
        x = np.asarray(x, dtype=np.float64)
        n = self.lattice.dim
        shifts = -(self.indices @ self.lattice.generator.T)
        out = _accel.gauss_shift_sum(x.reshape(-1, n), shifts, self.coefficients, self.kernel.spatial_metric)
        return float(out[0]) if x.ndim == 1 else out.reshape(x.shape[:-1])


def gram_matrix(lat: Lattice, k: Kernel, indices: np.ndarray) -> np.ndarray:
    pts = indices @ lat.generator.T
    m = pts.shape[0]
    G = np.empty((m, m))
    step = max(1, (1 << 20) // max(1, m))
    for lo in range(0, m, step):
        G[lo:lo + step] = k.eval(pts[lo:lo + step, None, :] - pts[None, :, :])
    return G


def gram_solve(lat: Lattice, k: Kernel, J, rhs) -> GramSolution:
    """Solve ``sum_j c_j K(A k - A j) = f(A k)`` for ``k, j`` in ``J`` densely.

    Uses a symmetric indefinite (Bunch-Kaufman) factorization so that a
    numerically indefinite Gram matrix shows up in the condition estimate
    rather than as a failed Cholesky.
    """
    idx = J.indices if isinstance(J, IndexSet) else np.atleast_2d(np.asarray(J, dtype=np.int64))
    if idx.shape[1] != lat.dim:
        raise DimensionMismatch(f"indices must have {lat.dim} columns")
    m = idx.shape[0]
    if m > MAX_GRAM_SIZE:
        raise SizeOverflow(f"dense Gram system of size {m} exceeds {MAX_GRAM_SIZE}")
    b = np.asarray(rhs, dtype=np.float64).reshape(-1)
    if b.size != m:
        raise DimensionMismatch(f"{b.size} right-hand side values for {m} indices")
    G = gram_matrix(lat, k, idx)
    ldu, ipiv, info = lapack.dsytrf(G)
    if info > 0:
        raise IllConditioned(f"Gram matrix is exactly singular (dsytrf info={info})")
    anorm = float(np.abs(G).sum(axis=0).max())
    rcond, _ = lapack.dsycon(ldu, ipiv, anorm)
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if cond > MAX_GRAM_CONDITION:
        raise IllConditioned(f"Gram condition estimate {cond:.3e} exceeds {MAX_GRAM_CONDITION:g}")
    c, info = lapack.dsytrs(ldu, ipiv, b.reshape(-1, 1))
    c = c.reshape(-1)
    resid = float(np.max(np.abs(G @ c - b))) if m else 0.0
    scale = max(float(np.max(np.abs(b))) if m else 0.0, np.finfo(float).tiny)
    if resid > GRAM_RESIDUAL_TOL * scale:
        raise IllConditioned(f"Gram residual {resid:.2e} exceeds {GRAM_RESIDUAL_TOL:g} x max|f|")
    return GramSolution(lat, k, idx, c, resid, cond)


def oracle_discrepancy(lat: Lattice, k: Kernel, N: int | None, M: int, fs: FundamentalSpline | None = None,
                       n_points: int = 16, seed: int = 7) -> dict:
    """Compare the Gram solution for a unit impulse against the cardinal construction.

    ``coeff_max_diff`` is taken over ``|j|_inf <= M // 2``; ``value_max_diff``
    over random points ``A u`` with ``u`` uniform in ``[-M/2, M/2]^n``.
    """
    if M < 2:
        raise ValueError("box radius M must be at least 2")
    if fs is None:
        fs = FundamentalSpline.build(lat, k, N)
    J = enumerate_box(lat, M)
    rhs = np.all(J.indices == 0, axis=1).astype(np.float64)
    sol = gram_solve(lat, k, J, rhs)
    inner = np.abs(J.indices).max(axis=1) <= M // 2
    expected = lat.abs_det * np.array([fs.coefficients[j] for j in J.indices[inner]])
    coeff_diff = float(np.max(np.abs(sol.coefficients[inner] - expected)))
    rng = np.random.default_rng(seed)
    x = (rng.random((n_points, lat.dim)) - 0.5) * M @ lat.generator.T
    value_diff = float(np.max(np.abs(sol.eval(x) - fs.eval_spatial(x))))
    return {"coeff_max_diff": coeff_diff, "value_max_diff": value_diff}


# -- refinement study ---------------------------------------------------------


def mid_cell_points(lat: Lattice, radius: int) -> np.ndarray:
    """Cell centres ``A (s + 1/2)`` for ``-radius <= s_i < radius``."""
    idx = box_indices(lat.dim, radius)
    idx = idx[np.all(idx < radius, axis=1)]
    return (idx + 0.5) @ lat.generator.T


def refinement_study(lat: Lattice, k: Kernel, target: Callable, radius: int, levels: int = 3,
                     stationary: bool = False, N: int | None = None,
                     max_residual: float = 1e-10) -> list[dict]:
    """Mid-cell max error of the interpolant of ``target`` on ``A / 2^l``, ``l < levels``.

    The physical sample window stays fixed: level ``l`` uses the box radius
    ``radius * 2^l``.  Errors are measured on cell centres in the inner half
    of the window.  With ``stationary`` the kernel is rescaled with the lattice.
    The coefficient grid is refined until the reconstruction residual is below
    ``max_residual`` when that is affordable, so that table truncation does not
    mask the sampling error.
    """
    rows = []
    for level in range(levels):
        scale = 2.0**-level
        sub = new_lattice(lat.generator * scale)
        kern = k.composed(np.eye(lat.dim) / scale) if stationary else k
        try:
            fs = FundamentalSpline.build(sub, kern, N, max_residual=max_residual)
        except ReconstructionFailure:
            # fine lattices in n >= 2 may not reach the strict gate within max_N
            fs = FundamentalSpline.build(sub, kern, N)
        M = radius * 2**level
        ip = Interpolant(LatticeSamples.from_function(sub, target, M), fs)
        x = mid_cell_points(sub, M // 2)
        err = float(np.max(np.abs(ip.eval(x) - np.asarray(target(x)))))
        rows.append({"level": level, "scale": scale, "box_radius": M, "grid_size": fs.coefficients.grid_size,
                     "max_mid_cell_error": err,
                     "reconstruction_residual": fs.coefficients.reconstruction_residual})
    return rows

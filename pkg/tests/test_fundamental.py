import math

import numpy as np
import pytest

from skspline.errors import ReconstructionFailure
from skspline.fundamental import (
    CardinalCoefficients,
    FundamentalSpline,
    cardinal_coefficients,
    cardinality_residual,
    eval_fundamental_corollary,
    eval_fundamental_integral,
    eval_fundamental_spatial,
)
from skspline.kernels import GaussianKernel
from skspline.lattice import new_lattice
from skspline.symbol import SymbolFunction

# (1/2pi) int_0^{2pi} cos(s z) / sum_m sqrt(pi) exp(-(z + 2 pi m)^2 / 4) dz, mpmath at 40 digits
ALPHA_1D = [1.4301057003177680, -0.59563159221291636, 0.22264544260739962, -0.082082599794722308]
# series at x = 1/2 with the mpmath coefficients above (|s| <= 44)
SK_HALF_1D = 0.61084773981693944


@pytest.fixture(scope="module")
def fs1():
    return FundamentalSpline(cardinal_coefficients(new_lattice([[1.0]]), GaussianKernel([[1.0]]), 64))


def test_coefficients_against_quadrature(fs1):
    c = fs1.coefficients
    for s, a in enumerate(ALPHA_1D):
        assert c[[s]] == pytest.approx(a, abs=1e-13)
        assert c[[-s]] == pytest.approx(a, abs=1e-13)
    assert abs(c[[0]]) == c.shell_max().max()
    signs = np.sign([c[[s]] for s in range(8)])
    np.testing.assert_array_equal(signs, [(-1) ** s for s in range(8)])


def test_coefficient_sum_is_upsilon_at_zero(fs1):
    c = fs1.coefficients
    ups0 = SymbolFunction(c.lattice, c.kernel).upsilon([0.0])
    assert abs(math.fsum(c.values()) - ups0) <= 1e-9


def test_coefficient_invariants(config):
    name, lat, k = config
    c = cardinal_coefficients(lat, k, 64)
    assert c.imag_residue <= 1e-10
    assert c.reconstruction_residual <= 1e-8
    idx = c.indices()
    np.testing.assert_allclose(c.values(), [c[-s] for s in idx], atol=1e-10)
    shells = c.shell_max()
    resolved = shells[1:][shells[1:] > 1e-14 * shells[0]]  # below this it is roundoff
    assert resolved.size >= 5
    assert np.all(np.diff(resolved) <= 0)


def test_uniqueness_across_grids(config):
    _, lat, k = config
    a = cardinal_coefficients(lat, k, 64)
    b = cardinal_coefficients(lat, k, 128 if lat.dim == 1 else 96)
    np.testing.assert_allclose(a.values(), b.values(a.half), atol=1e-8)


def test_coarse_grid_raises():
    with pytest.raises(ReconstructionFailure):
        cardinal_coefficients(new_lattice([[1.0]]), GaussianKernel([[1.0]]), 8)


def test_identity_2d_at_n32():
    # N = 32 cannot resolve the n = 2 series to the default gate, yet lattice values stay cardinal
    lat, k = new_lattice(np.eye(2)), GaussianKernel(np.eye(2))
    with pytest.raises(ReconstructionFailure):
        cardinal_coefficients(lat, k, 32)
    fs = FundamentalSpline(cardinal_coefficients(lat, k, 32, max_residual=math.inf))
    assert fs.coefficients.reconstruction_residual > 1e-6
    assert fs.cardinality_residual(2) <= 1e-6


def test_cardinality_residual_falls_with_grid():
    lat, k = new_lattice([[1.0]]), GaussianKernel([[1.0]])
    res = [FundamentalSpline(cardinal_coefficients(lat, k, N, max_residual=math.inf)).cardinality_residual(3)
           for N in (8, 16, 32)]
    assert res[0] > res[1] > res[2]


def test_spatial_examples(fs1):
    assert eval_fundamental_spatial(fs1, [0.0]) == pytest.approx(1.0, abs=1e-7)
    for m in range(1, 4):
        assert abs(fs1([m])) <= 1e-7
        assert abs(fs1([-m])) <= 1e-7
    assert fs1([0.5]) == pytest.approx(SK_HALF_1D, abs=1e-12)
    assert cardinality_residual(fs1, 3) <= 1e-7
    assert fs1.cardinality_residual_last <= 1e-7


def test_integral_forms_1d(fs1):
    lat, k = fs1.lattice, fs1.kernel
    assert eval_fundamental_integral(lat, k, [0.0]) == pytest.approx(1.0, abs=1e-6)
    assert abs(eval_fundamental_integral(lat, k, [1.0])) <= 1e-6
    assert eval_fundamental_integral(lat, k, [0.5]) == pytest.approx(SK_HALF_1D, abs=1e-6)
    assert eval_fundamental_corollary(lat, k, [0.0]) == pytest.approx(1.0, abs=1e-6)
    full = eval_fundamental_integral(lat, k, [[0.3], [2.2]], full=True)
    assert np.max(np.abs(full.imag)) <= 1e-8


def test_triple_agreement(config):
    _, lat, k = config
    fs = FundamentalSpline(cardinal_coefficients(lat, k, 64))
    sf = SymbolFunction(lat, k)
    rng = np.random.default_rng(12)
    x = (rng.random((16, lat.dim)) * 6 - 3) @ lat.generator.T
    a = fs(x)
    b = eval_fundamental_integral(lat, k, x, symbol=sf)
    c = eval_fundamental_corollary(lat, k, x, symbol=sf)
    assert np.max(np.abs(a - b)) <= 1e-6
    assert np.max(np.abs(b - c)) <= 1e-8


def test_hexagonal_cell_midpoint():
    lat, k = new_lattice([[1.0, 0.5], [0.0, np.sqrt(3) / 2]]), GaussianKernel(np.eye(2))
    fs = FundamentalSpline(cardinal_coefficients(lat, k, 64))
    mid = lat.generator @ [0.5, 0.5]
    assert eval_fundamental_corollary(lat, k, mid) == pytest.approx(fs(mid), abs=1e-5)


def test_cardinality_2d():
    lat, k = new_lattice(np.eye(2)), GaussianKernel(np.eye(2))
    assert FundamentalSpline.build(lat, k).cardinality_residual(2) <= 1e-6


def test_eval_truncation_default(fs1):
    c = fs1.coefficients
    T = fs1.eval_truncation
    assert c.shell_max()[T] * c.lattice.abs_det > 1e-14
    assert np.all(c.shell_max()[T + 1:] * c.lattice.abs_det <= 1e-14)


def test_build_picks_grid():
    fs = FundamentalSpline.build(new_lattice([[0.5]]), GaussianKernel([[1.0]]))
    assert fs.coefficients.reconstruction_residual <= 1e-6
    assert fs.cardinality_residual(3) <= 1e-6


def test_json_round_trip(tmp_path, fs1):
    c = fs1.coefficients
    path = tmp_path / "coeffs.json"
    c.save(path)
    text = path.read_text()
    assert '"entries"' in text and '"A": [[1]]' in text
    back = CardinalCoefficients.load(path)
    assert back.grid_size == 64
    np.testing.assert_array_equal(back.table, c.table)
    hexa = cardinal_coefficients(new_lattice([[1.0, 0.5], [0.0, np.sqrt(3) / 2]]), GaussianKernel(np.eye(2)), 64)
    back = CardinalCoefficients.from_json(hexa.to_json())
    np.testing.assert_array_equal(back.table, hexa.table)
    np.testing.assert_array_equal(back.lattice.generator, hexa.lattice.generator)


def test_json_has_17_digits(fs1):
    text = fs1.coefficients.to_json()
    line = [l for l in text.splitlines() if l.strip().startswith("[[1],")][0]
    mantissa = line.split(",")[1].strip().rstrip("]").split("e")[0].lstrip("-").replace(".", "")
    assert len(mantissa.lstrip("0")) == 17

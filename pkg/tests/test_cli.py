import csv
import json
import time

import numpy as np
import pytest

from skspline.cli import main
from skspline.fundamental import CardinalCoefficients, FundamentalSpline
from skspline.interpolation import LatticeSamples
from skspline.kernels import GaussianKernel
from skspline.lattice import new_lattice

HEX = [[1.0, 0.5], [0.0, 0.8660254037844386]]


def write_config(tmp_path, name="cfg.json", **doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_rows(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def printed(capsys, key):
    for line in capsys.readouterr().out.splitlines():
        if line.startswith(key):
            return float(line.split()[1])
    raise AssertionError(f"{key} not printed")


def test_symbol_n1(tmp_path, capsys):
    cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[1]], N=64)
    assert main(["symbol", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    header, data = read_rows(tmp_path / "symbol.csv")
    assert header == ["z_1", "inverse_frequency", "inverse_spatial_re", "inverse_spatial_im", "upsilon"]
    assert data.shape == (64, 5)
    lines = dict(l.split() for l in out.splitlines())
    assert float(lines["min_inverse_symbol"]) > 0
    assert float(lines["poisson_residual"]) <= 1e-10


def test_symbol_wider_kernel_reports_smaller_minimum(tmp_path, capsys):
    mins = []
    for b in (1.0, 0.5):
        cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[b]], N=64)
        assert main(["symbol", "--config", cfg, "--out", str(tmp_path)]) == 0
        mins.append(printed(capsys, "min_inverse_symbol"))
    assert 0 < mins[1] < mins[0]


def test_symbol_degenerate_exit_2(tmp_path):
    cfg = write_config(tmp_path, dim=1, A=[[0.25]], B=[[1]], N=64)
    assert main(["symbol", "--config", cfg, "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("doc, field", [
    ({"dim": 2, "A": [[1, 0], [0]], "B": [[1, 0], [0, 1]]}, "A"),
    ({"dim": 1, "A": [[1]], "B": [[1, 2]]}, "B"),
    ({"dim": 1, "A": [[1]], "N": 15}, "N"),
    ({"dim": 1, "A": [[1]], "tolerances": {"poisson": -1}}, "tolerances.poisson"),
    ({"A": [[1]]}, "dim"),
])
def test_config_errors_name_field(tmp_path, capsys, doc, field):
    cfg = write_config(tmp_path, **doc)
    assert main(["symbol", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert field in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main([]) == 1
    assert main(["symbol", "--config", str(tmp_path / "missing.json")]) == 1


def test_fundamental_n1(tmp_path, capsys):
    cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[1]], N=64)
    assert main(["fundamental", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert printed(capsys, "cardinality_residual") <= 1e-7
    coeffs = CardinalCoefficients.load(tmp_path / "coefficients.json")
    assert coeffs.grid_size == 64
    header, data = read_rows(tmp_path / "fundamental.csv")
    assert header == ["x_1", "value"]
    fs = FundamentalSpline(coeffs)
    np.testing.assert_allclose(data[:, 1], fs(data[:, :1]), atol=1e-15)


def test_fundamental_too_coarse(tmp_path):
    cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[1]], N=8)
    assert main(["fundamental", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_fundamental_hexagonal_plane(tmp_path):
    cfg = write_config(tmp_path, dim=2, A=HEX, B=[[1, 0], [0, 1]], N=64, plane={"points": 11})
    assert main(["fundamental", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    header, data = read_rows(tmp_path / "fundamental.csv")
    assert header == ["x_1", "x_2", "value"]
    assert data.shape == (121, 3)
    # the default plane spans lattice points -2..2 along each generator
    origin = np.isclose(data[:, 0], 0) & np.isclose(data[:, 1], 0)
    assert data[origin, 2] == pytest.approx([1.0], abs=1e-7)


def test_fundamental_line(tmp_path):
    cfg = write_config(tmp_path, dim=2, A=[[1, 0], [0, 1]], N=64,
                       line={"start": [0, 0], "stop": [2, 0], "points": 3})
    assert main(["fundamental", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    _, data = read_rows(tmp_path / "fundamental.csv")
    np.testing.assert_allclose(data[:, 2], [1, 0, 0], atol=1e-7)


def test_interpolate_delta(tmp_path):
    lat = new_lattice([[1.0]])
    LatticeSamples(lat, 6, (np.arange(-6, 7) == 0).astype(float)).to_csv(tmp_path / "s.csv")
    cfg = write_config(tmp_path, dim=1, A=[[1]], N=64)
    assert main(["interpolate", "--config", cfg, "--out", str(tmp_path), "--samples", str(tmp_path / "s.csv")]) == 0
    _, data = read_rows(tmp_path / "interpolant.csv")
    fs = FundamentalSpline.build(lat, GaussianKernel([[1.0]]), 64)
    np.testing.assert_allclose(data[:, 1], fs(data[:, :1]), atol=1e-14)


def test_interpolate_bump_residual(tmp_path, capsys):
    lat = new_lattice(HEX)
    LatticeSamples.from_function(lat, lambda x: np.exp(-np.sum(x * x, -1) / 5), 10).to_csv(tmp_path / "s.csv")
    cfg = write_config(tmp_path, dim=2, A=HEX, N=64)
    assert main(["interpolate", "--config", cfg, "--out", str(tmp_path), "--samples", str(tmp_path / "s.csv")]) == 0
    assert printed(capsys, "interior_sample_residual") <= 1e-6


def test_interpolate_missing_index(tmp_path, capsys):
    (tmp_path / "s.csv").write_text("s_1,value\n-1,0.5\n1,0.5\n")
    cfg = write_config(tmp_path, dim=1, A=[[1]], N=64)
    code = main(["interpolate", "--config", cfg, "--out", str(tmp_path), "--samples", str(tmp_path / "s.csv")])
    assert code == 1
    assert "[0]" in capsys.readouterr().err


def test_verify_n1(tmp_path):
    cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[1]], N=64, M=16)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(c["pass"] for c in report.values())
    assert {"plancherel", "poisson", "cardinality", "oracle_coefficients"} <= set(report)


def test_verify_n2_identity(tmp_path):
    cfg = write_config(tmp_path, dim=2, A=[[1, 0], [0, 1]], B=[[1, 0], [0, 1]], N=64)
    t0 = time.perf_counter()
    assert main(["verify", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    assert time.perf_counter() - t0 < 60


def test_verify_detects_wrong_transform_constant(tmp_path, capsys):
    cfg = write_config(tmp_path, dim=1, A=[[1]], B=[[1]], N=64, fault={"fourier_scale": 1.001})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert not report["plancherel"]["pass"]
    assert not report["poisson"]["pass"]
    assert "plancherel" in capsys.readouterr().err


def test_refine_gaussian(tmp_path):
    cfg = write_config(tmp_path, dim=1, A=[[2]], B=[[1]], M=12, refine={"target": "gaussian", "width": 10})
    assert main(["refine", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    header, data = read_rows(tmp_path / "refine.csv")
    assert header[-1] == "max_mid_cell_error"
    np.testing.assert_allclose(data[:, 1], [1, 0.5, 0.25])
    assert np.all(np.diff(data[:, -1]) < 0)


def test_refine_zero_and_kernel_shift(tmp_path):
    cfg = write_config(tmp_path, dim=1, A=[[2]], B=[[1]], M=12, refine={"target": "zero"})
    assert main(["refine", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    _, data = read_rows(tmp_path / "refine.csv")
    assert np.all(data[:, -1] == 0)
    cfg = write_config(tmp_path, dim=1, A=[[2]], B=[[1]], M=12, refine={"target": "kernel_shift"})
    assert main(["refine", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    _, data = read_rows(tmp_path / "refine.csv")
    assert np.all(data[:, -1] <= 1e-10)


@pytest.mark.parametrize("cmd, files", [
    ("symbol", ["symbol.csv"]),
    ("fundamental", ["coefficients.json", "fundamental.csv"]),
    ("verify", ["report.json"]),
])
def test_outputs_are_byte_identical(tmp_path, cmd, files):
    cfg = write_config(tmp_path, dim=2, A=HEX, N=64)
    for run in ("a", "b"):
        assert main([cmd, "--config", cfg, "--out", str(tmp_path / run), "--quiet"]) == 0
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

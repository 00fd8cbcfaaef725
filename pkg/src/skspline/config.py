"""JSON job configuration shared by every CLI subcommand."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

DEFAULT_TOLERANCES = {
    "fourier_quadrature": 1e-8,
    "plancherel": 1e-12,
    "scaling_identity": 1e-12,
    "poisson": 1e-9,
    "reconstruction": 1e-8,
    "cardinality": 1e-6,
    "triple_agreement": 1e-5,
    "oracle_coefficients": 1e-5,
    "oracle_values": 1e-5,
}


class ConfigError(ValueError):
    pass


def _matrix(doc: dict, name: str, dim: int) -> np.ndarray:
    if name not in doc:
        raise ConfigError(f"{name}: missing")
    raw = doc[name]
    if isinstance(raw, (int, float)) and dim == 1:
        raw = [[raw]]
    if not isinstance(raw, list) or len(raw) != dim:
        raise ConfigError(f"{name}: expected {dim} rows, got {raw!r}")
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise ConfigError(f"{name}: row {i} must have {dim} entries, got {row!r}")
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name}: non-numeric entry {v!r} in row {i}")
    m = np.array(raw, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ConfigError(f"{name}: entries must be finite")
    return m


@dataclass
class JobConfig:
    dim: int
    A: np.ndarray
    B: np.ndarray
    N: int
    M: int
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "JobConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        dim = doc.get("dim")
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ConfigError(f"dim: expected a positive integer, got {dim!r}")
        A = _matrix(doc, "A", dim)
        B = _matrix(doc, "B", dim) if "B" in doc else np.eye(dim)
        N = doc.get("N", 64)
        if isinstance(N, bool) or not isinstance(N, int) or N < 4 or N % 2:
            raise ConfigError(f"N: expected an even integer >= 4, got {N!r}")
        M = doc.get("M", 16 if dim == 1 else 12)
        if isinstance(M, bool) or not isinstance(M, int) or M < 1:
            raise ConfigError(f"M: expected a positive integer, got {M!r}")
        tol = dict(DEFAULT_TOLERANCES)
        for key, val in (doc.get("tolerances") or {}).items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tolerances.{key}: unknown tolerance")
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
                raise ConfigError(f"tolerances.{key}: must be a positive number, got {val!r}")
            tol[key] = float(val)
        known = {"dim", "A", "B", "N", "M", "tolerances"}
        params = {k: v for k, v in doc.items() if k not in known}
        return cls(dim, A, B, N, M, tol, params)

    @classmethod
    def load(cls, path) -> "JobConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

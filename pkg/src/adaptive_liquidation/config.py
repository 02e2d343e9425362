"""TOML run configuration."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .model import REFERENCE_PARAMS, InvalidParameters, ModelParams
from .signals import REFERENCE_SIGNAL, DeterministicSignal, OUSignal, OUSignalParams, ZeroSignal


class ConfigError(ValueError):
    pass


class UnsupportedBoundary(ConfigError):
    """kappa = 0 (purely temporary impact) sits outside the closed form's domain."""


_MODEL_KEYS = {"lambda": "lambda_temp", "gamma": "gamma", "kappa": "kappa", "rho": "rho", "varrho": "varrho",
               "phi": "phi", "horizon": "horizon", "x0": "x0", "y0": "y0"}


@dataclass(frozen=True)
class SignalConfig:
    type: str = "ou"
    iota: float = REFERENCE_SIGNAL.iota
    beta: float = REFERENCE_SIGNAL.beta
    sigma: float = REFERENCE_SIGNAL.sigma
    rate_table: Path | None = None

    def build(self):
        if self.type == "zero":
            return ZeroSignal()
        if self.type == "ou":
            return OUSignal(OUSignalParams(self.iota, self.beta, self.sigma))
        if self.rate_table is not None:
            t, r = read_rate_table(self.rate_table)
            return DeterministicSignal.from_table(t, r)
        return DeterministicSignal.exponential(self.iota, self.beta)

    def deterministic(self):
        """The signal as a deterministic variant; an OU signal qualifies only with sigma = 0."""
        if self.type == "ou":
            if self.sigma != 0.0:
                raise ConfigError("this command needs a deterministic signal (type = 'zero', "
                                  "'deterministic', or 'ou' with sigma = 0)")
            return DeterministicSignal.exponential(self.iota, self.beta)
        return self.build()

    def mean_path(self):
        """Deterministic slice of the signal: the OU mean path when sigma > 0."""
        if self.type == "ou":
            return DeterministicSignal.exponential(self.iota, self.beta)
        return self.build()


@dataclass(frozen=True)
class GridConfig:
    n_steps: int = 2000


@dataclass(frozen=True)
class MCConfig:
    n_paths: int = 10_000
    seed: int = 1
    martingale_vol: float = 0.0
    p0: float = 0.0
    max_path_files: int = 3
    kappa_small: float = 1e-4


@dataclass(frozen=True)
class OracleConfig:
    n_steps: int = 800
    tol: float = 1e-9


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class SweepConfig:
    lo: tuple[float, ...] = (0.0,) * 7
    hi: tuple[float, ...] = (100.0,) * 7
    samples: int = 1000
    grid_n: int = 1001


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = REFERENCE_PARAMS
    signal: SignalConfig = field(default_factory=SignalConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    mc: MCConfig = field(default_factory=MCConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def read_rate_table(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV (t, rate) with a header row."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read rate table {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2:
        raise ConfigError(f"rate table {path} needs at least two rows")
    return data[:, 0], data[:, 1]


def _section(raw: dict, name: str, allowed: set[str]) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    return sec


def _num(sec: dict, key: str, default, kind=float):
    if key not in sec:
        return default
    val = sec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    if kind is int:
        if isinstance(val, float) and not val.is_integer():
            raise ConfigError(f"{key} must be an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"{key} must be finite")
    return float(val)


def _vec7(sec: dict, key: str, default) -> tuple[float, ...]:
    if key not in sec:
        return default
    val = sec[key]
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return (float(val),) * 7
    if not isinstance(val, list) or len(val) != 7:
        raise ConfigError(f"{key} must be a number or a list of 7 numbers")
    return tuple(float(v) for v in val)


def parse_config(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    unknown = set(raw) - {"model", "signal", "grid", "mc", "oracle", "output", "sweep"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    m = _section(raw, "model", set(_MODEL_KEYS))
    kw = {attr: _num(m, key, getattr(REFERENCE_PARAMS, attr)) for key, attr in _MODEL_KEYS.items()}
    if kw["kappa"] == 0.0:
        raise UnsupportedBoundary("kappa = 0 (purely temporary impact) is an unsupported boundary of the "
                                  "closed form; use a small positive kappa such as mc.kappa_small = 1e-4, "
                                  "the temporary-only proxy")
    try:
        model = ModelParams(**kw)
    except InvalidParameters as exc:
        raise ConfigError(str(exc)) from exc

    s = _section(raw, "signal", {"type", "iota", "beta", "sigma", "rate_table"})
    stype = s.get("type", "ou")
    if stype not in ("ou", "deterministic", "zero"):
        raise ConfigError(f"signal.type must be 'ou', 'deterministic' or 'zero', got {stype!r}")
    table = s.get("rate_table")
    if table is not None:
        if not isinstance(table, str):
            raise ConfigError("signal.rate_table must be a path string")
        table = (base_dir / table).resolve()
    signal = SignalConfig(stype, _num(s, "iota", REFERENCE_SIGNAL.iota), _num(s, "beta", REFERENCE_SIGNAL.beta),
                          _num(s, "sigma", REFERENCE_SIGNAL.sigma), table)
    try:
        OUSignalParams(signal.iota, signal.beta, signal.sigma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    g = _section(raw, "grid", {"n_steps"})
    grid = GridConfig(_num(g, "n_steps", GridConfig.n_steps, int))
    if grid.n_steps < 2:
        raise ConfigError("grid.n_steps must be >= 2")

    c = _section(raw, "mc", {"n_paths", "seed", "martingale_vol", "p0", "max_path_files", "kappa_small"})
    mc = MCConfig(_num(c, "n_paths", MCConfig.n_paths, int), _num(c, "seed", MCConfig.seed, int),
                  _num(c, "martingale_vol", MCConfig.martingale_vol), _num(c, "p0", MCConfig.p0),
                  _num(c, "max_path_files", MCConfig.max_path_files, int),
                  _num(c, "kappa_small", MCConfig.kappa_small))
    if mc.n_paths < 1:
        raise ConfigError("mc.n_paths must be >= 1")
    if mc.seed < 0:
        raise ConfigError("mc.seed must be >= 0")
    if mc.martingale_vol < 0 or mc.kappa_small <= 0 or mc.max_path_files < 0:
        raise ConfigError("mc.martingale_vol >= 0, mc.kappa_small > 0 and mc.max_path_files >= 0 required")

    o = _section(raw, "oracle", {"n_steps", "tol"})
    oracle = OracleConfig(_num(o, "n_steps", OracleConfig.n_steps, int), _num(o, "tol", OracleConfig.tol))
    if not 2 <= oracle.n_steps <= 2000:
        raise ConfigError("oracle.n_steps must lie in [2, 2000]")

    out = _section(raw, "output", {"directory", "formats"})
    directory = out.get("directory", "out")
    formats = out.get("formats", ["csv"])
    if not isinstance(directory, str) or not isinstance(formats, list) or not set(formats) <= {"csv", "txt"}:
        raise ConfigError("output.directory must be a string and output.formats a subset of ['csv', 'txt']")
    output = OutputConfig(base_dir / directory, tuple(formats))

    w = _section(raw, "sweep", {"lo", "hi", "samples", "grid_n"})
    sweep = SweepConfig(_vec7(w, "lo", SweepConfig.lo), _vec7(w, "hi", SweepConfig.hi),
                        _num(w, "samples", SweepConfig.samples, int), _num(w, "grid_n", SweepConfig.grid_n, int))
    return RunConfig(model, signal, grid, mc, oracle, output, sweep)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return parse_config(raw, path.parent)


REFERENCE_CONFIG_TOML = """\
[model]
lambda = 0.5
gamma = 1.0
kappa = 1.0
rho = 1.0
varrho = 10.0
phi = 0.1
horizon = 10.0
x0 = 10.0
y0 = 0.0

[signal]
type = "ou"
iota = 1.0
beta = 0.1
sigma = 0.5

[grid]
n_steps = 2000

[mc]
n_paths = 10000
seed = 1
martingale_vol = 0.0

[oracle]
n_steps = 800
tol = 1e-9

[output]
directory = "out"
"""

from __future__ import annotations

from pathlib import Path

import pytest

from adaptive_liquidation.config import (
    REFERENCE_CONFIG_TOML,
    ConfigError,
    RunConfig,
    UnsupportedBoundary,
    load_config,
    parse_config,
    read_rate_table,
)
from adaptive_liquidation.model import REFERENCE_PARAMS
from adaptive_liquidation.signals import DeterministicSignal, OUSignal, ZeroSignal


def write(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "run.toml"
    p.write_text(text)
    return p


def test_reference_file_matches_defaults(tmp_path):
    cfg = load_config(write(tmp_path, REFERENCE_CONFIG_TOML))
    assert cfg.model == REFERENCE_PARAMS
    assert cfg.grid.n_steps == 2000 and cfg.mc.n_paths == 10_000 and cfg.oracle.n_steps == 800
    assert isinstance(cfg.signal.build(), OUSignal)
    assert load_config(None) == RunConfig()


def test_output_relative_to_config(tmp_path):
    cfg = load_config(write(tmp_path, '[output]\ndirectory = "res"\n'))
    assert cfg.output.directory == tmp_path / "res"


@pytest.mark.parametrize("text", [
    "[model\nlambda = 1",                 # malformed TOML
    "[modle]\nlambda = 1",                # unknown section
    "[model]\nlamda = 1",                 # unknown key
    "[model]\nlambda = -1",               # invalid parameter
    "[model]\nlambda = 'x'",
    "[grid]\nn_steps = 1",
    "[grid]\nn_steps = 2.5",
    "[mc]\nn_paths = 0",
    "[mc]\nseed = -1",
    "[signal]\ntype = 'levy'",
    "[signal]\nbeta = 0",
    "[oracle]\nn_steps = 5000",
    "[output]\nformats = ['png']",
    "[sweep]\nlo = [1, 2]",
    "model = 3",
])
def test_rejects(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_kappa_zero_boundary():
    with pytest.raises(UnsupportedBoundary, match="kappa_small"):
        parse_config({"model": {"kappa": 0.0}})


def test_zero_inventory_allowed():
    cfg = parse_config({"model": {"x0": 0.0, "y0": 0.0}})
    assert cfg.model.x0 == 0.0


def test_signal_variants(tmp_path):
    table = tmp_path / "rates.csv"
    table.write_text("t,rate\n0,0\n10,5\n")
    cfg = parse_config({"signal": {"type": "deterministic", "rate_table": "rates.csv"}}, tmp_path)
    sig = cfg.signal.build()
    assert isinstance(sig, DeterministicSignal)
    assert sig.rate_fn(5.0) == pytest.approx(2.5)
    assert isinstance(parse_config({"signal": {"type": "zero"}}).signal.build(), ZeroSignal)
    with pytest.raises(ConfigError):
        parse_config({}).signal.deterministic()
    det = parse_config({"signal": {"sigma": 0.0}}).signal.deterministic()
    assert det.rate_fn(10.0) == pytest.approx(0.36787944117144233)


def test_bad_rate_table(tmp_path):
    (tmp_path / "r.csv").write_text("t,rate\n0,abc\n")
    with pytest.raises(ConfigError):
        read_rate_table(tmp_path / "r.csv")

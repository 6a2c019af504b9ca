from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stno_reservoir.config import (CONFIG_ENV, ConfigError, ExperimentConfig, config_from_dict,
                                   config_hash, dump_config, load_config)
from stno_reservoir.io import (data_section, load_weights, read_drive, read_table, save_weights,
                               write_matrix, write_table)
from stno_reservoir.readout import ReadoutWeights

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


# -------------------------------------------------------------------- config

def test_defaults_load_without_file(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    assert load_config() == ExperimentConfig()


def test_shipped_default_file_equals_builtin_defaults():
    cfg = load_config(CONFIGS / "default.yaml")
    assert config_hash(cfg) == config_hash(ExperimentConfig())


def test_ci_profile_overrides_only_what_it_names():
    cfg = load_config(CONFIGS / "ci.yaml")
    assert cfg.digits.encoding.n_theta == 100
    assert cfg.digits.n_train == (1, 9)
    assert cfg.digits.encoding.theta == ExperimentConfig().digits.encoding.theta
    assert cfg.sweep.currents.num == 7
    assert cfg.oscillator == ExperimentConfig().oscillator


def test_env_var_supplies_default_path(tmp_path, monkeypatch):
    path = tmp_path / "c.yaml"
    path.write_text("seeds: {noise: 9}\n")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_config().seeds.noise == 9
    assert load_config(CONFIGS / "ci.yaml").seeds.noise == 0


@pytest.mark.parametrize("data, where", [
    ({"bogus": 1}, "bogus"),
    ({"digits": {"n_thetaa": 3}}, "n_thetaa"),
    ({"digits": {"encoding": {"nodes": 3}}}, "nodes"),
    ({"oscillator": {"tau": 1.0}}, "tau"),
])
def test_unknown_keys_rejected(data, where):
    with pytest.raises(ConfigError, match=where):
        config_from_dict(data)


@pytest.mark.parametrize("data", [
    {"digits": {"alphabet": "abc"}},
    {"digits": {"frontends": ["mel"]}},
    {"digits": {"n_train": [0]}},
    {"digits": {"modes": []}},
    {"sinesquare": {"n_waveforms": 7}},
    {"sinesquare": {"target_shift": 5}},
    {"sweep": {"currents": {"start": 8.0, "stop": 5.0, "num": 4}}},
    {"simulate": {"probe": "chirp"}},
    {"simulate": {"step_at": -1.0}},
    {"oscillator": {"tau_relax": -5.0}},
    {"oscillator": {"p_thermal": 0.0}},
    {"digits": "not a mapping"},
])
def test_invalid_values_rejected(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_bad_yaml_and_missing_file(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("digits: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.yaml")


def test_hash_ignores_key_order_and_formatting(tmp_path):
    a = tmp_path / "a.yaml"
    b = tmp_path / "b.yaml"
    a.write_text("seeds: {noise: 3, mask: 4}\ndigits: {alphabet: pm1}\n")
    b.write_text("digits:\n  alphabet: pm1\nseeds:\n  mask: 4\n  noise: 3\n")
    assert config_hash(load_config(a)) == config_hash(load_config(b))
    assert config_hash(load_config(a)) != config_hash(ExperimentConfig())


def test_hash_is_stable_hex():
    h = config_hash(ExperimentConfig())
    assert h == config_hash(ExperimentConfig())
    assert len(h) == 64 and int(h, 16) >= 0


def test_dump_round_trips(tmp_path):
    cfg = config_from_dict({"digits": {"encoding": {"n_theta": 50}, "n_train": [2, 3]},
                            "paths": {"corpus_root": "/data/digits"}})
    path = tmp_path / "dump.yaml"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


@given(st.integers(0, 10_000))
def test_master_seed(master):
    cfg = ExperimentConfig().with_seed(master)
    assert cfg.seeds.mask == master + 1
    assert cfg.seeds.noise == cfg.seeds.corpus == cfg.seeds.labels == master


# ---------------------------------------------------------------------- io

def test_table_round_trip_and_header(tmp_path):
    path = write_table(tmp_path / "t.csv", ["a", "b"], [[1, 0.1], [2, 1 / 3]],
                       {"config_hash": "abc", "seeds": "noise=0"})
    meta, cols, rows = read_table(path)
    assert meta["config_hash"] == "abc" and meta["seeds"] == "noise=0"
    assert cols == ["a", "b"]
    assert float(rows[1][1]) == 1 / 3  # floats are written losslessly
    assert data_section(path).splitlines()[0] == "a,b"
    text = path.read_text()
    assert text.splitlines()[0].startswith("# stno_reservoir ")


def test_data_section_ignores_header_changes(tmp_path):
    a = write_table(tmp_path / "a.csv", ["x"], [[1.5]], {"config_hash": "1"})
    b = write_table(tmp_path / "b.csv", ["x"], [[1.5]], {"config_hash": "2"})
    assert a.read_text() != b.read_text()
    assert data_section(a) == data_section(b)


def test_matrix_layout(tmp_path):
    path = write_matrix(tmp_path / "m.csv", [300.0, 400.0], [5.0, 6.0, 7.0],
                        np.arange(6.0).reshape(2, 3), "field\\current")
    _, cols, rows = read_table(path)
    assert cols == ["field\\current", "5.0", "6.0", "7.0"]
    assert rows[1] == ["400.0", "3.0", "4.0", "5.0"]


@given(st.integers(1, 5), st.integers(1, 8), st.floats(0, 10))
def test_weights_round_trip(n_out, n_feat, ridge):
    import tempfile
    values = np.random.default_rng(n_out * 10 + n_feat).standard_normal((n_out, n_feat))
    with tempfile.TemporaryDirectory() as d:
        w = load_weights(save_weights(Path(d) / "w.csv", ReadoutWeights(values, ridge)))
    np.testing.assert_array_equal(w.values, values)
    assert w.ridge == ridge


def test_read_drive(tmp_path):
    path = write_table(tmp_path / "d.csv", ["t_ns", "i_mA"],
                       [[k * 2.0, np.sin(k)] for k in range(10)])
    samples, dt = read_drive(path)
    assert dt == 2.0
    np.testing.assert_array_equal(samples, np.sin(np.arange(10)))


@pytest.mark.parametrize("rows, cols, match", [
    ([[0.0, 1.0, 2.0]], ["t_ns", "i_mA", "x"], "columns"),
    ([[0.0, 1.0]], ["t_ns", "i_mA"], "two samples"),
    ([[0.0, 1.0], [1.0, 1.0], [3.0, 1.0]], ["t_ns", "i_mA"], "uniform"),
    ([[1.0, 1.0], [0.0, 1.0]], ["t_ns", "i_mA"], "uniform"),
])
def test_read_drive_errors(tmp_path, rows, cols, match):
    path = write_table(tmp_path / "d.csv", cols, rows)
    with pytest.raises(ValueError, match=match):
        read_drive(path)

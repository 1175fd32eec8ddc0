"""TOML experiment configs: parsing, validation and sweep axes."""

import pytest

from pullbfr.config import Config, ConfigError, load_config, parse_config, with_axis


def test_defaults():
    cfg = parse_config({})
    assert cfg == Config()
    assert cfg.strategy == "pull-bfr" and cfg.bloom.p == 0.0638 and cfg.pull.delta_ms == 0.4
    assert cfg.push.f_r == 0.017 and cfg.workload.arrivals == "closed"


def test_sections_and_int_to_float():
    cfg = parse_config(
        {
            "strategy": "far",
            "seed": 9,
            "workload": {"alpha": 2, "arrivals": "open"},
            "sweep": {"axis": "alpha", "values": [0.6, 2], "strategies": ["far", "push-bfr"]},
        }
    )
    assert cfg.workload.alpha == 2.0 and isinstance(cfg.workload.alpha, float)
    assert cfg.sweep.values == (0.6, 2) and cfg.sweep.strategies == ("far", "push-bfr")
    assert cfg.to_dict()["sweep"]["values"] == [0.6, 2]


@pytest.mark.parametrize(
    "data, needle",
    [
        ({"strategy": "ospf"}, "strategy must be one of"),
        ({"seed": -1}, "seed must be >= 0"),
        ({"seed": "one"}, "seed must be an integer"),
        ({"colour": 1}, "unknown top-level key"),
        ({"bloom": {"p": 1.5}}, "p must be in (0, 1)"),
        ({"bloom": {"oracle": 1}}, "oracle has wrong type"),
        ({"bloom": {"nn": 1}}, "unknown key 'nn'"),
        ({"pull": {"delta_ms": 0}}, "delta_ms must be > 0"),
        ({"push": {"f_r": -1}}, "f_r must be > 0"),
        ({"workload": {"arrivals": "poisson"}}, "arrivals must be"),
        ({"workload": "x"}, "must be a table"),
        ({"sim": {"warmup_fraction": 1.0}}, "warmup_fraction"),
        ({"topology": {"path": "missing.topo"}}, "path not found"),
        ({"sweep": {"values": [1]}}, "values given without axis"),
        ({"sweep": {"axis": "colour", "values": [1]}}, "axis must be one of"),
        ({"sweep": {"axis": "alpha"}}, "values must be non-empty"),
        ({"sweep": {"axis": "p", "values": [0.1, 2.0]}}, "p=2.0"),
        ({"sweep": {"axis": "universe_size", "values": [1.5]}}, "must be an integer"),
        ({"sweep": {"axis": "alpha", "values": [1, 2, 3], "max_points": 2}}, "exceed max_points"),
    ],
)
def test_rejections(data, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(data)
    assert needle in str(exc.value)


def test_all_problems_reported_at_once():
    with pytest.raises(ConfigError) as exc:
        parse_config({"seed": -1, "bloom": {"p": 2.0}})
    assert len(exc.value.problems) == 2


def test_with_axis():
    cfg = Config()
    assert with_axis(cfg, "delta", 1.6).pull.delta_ms == 1.6
    assert with_axis(cfg, "f_r", 0.034).push.f_r == 0.034
    assert with_axis(cfg, "p", 0.2552).bloom.p == 0.2552
    assert with_axis(cfg, "capacity_scale", 0.2).topology.capacity_scale == 0.2
    assert with_axis(cfg, "universe_size", 6000.0).catalog.universe_size == 6000
    with pytest.raises(ValueError):
        with_axis(cfg, "colour", 1)
    with pytest.raises(TypeError):
        with_axis(cfg, "alpha", True)


def test_load_resolves_relative_paths(tmp_path):
    (tmp_path / "net.topo").write_text("node A client\nnode B server\nlink A B 10 1\n")
    (tmp_path / "exp.toml").write_text('[topology]\npath = "net.topo"\n')
    cfg = load_config(tmp_path / "exp.toml")
    assert cfg.resolve(cfg.topology.path) == tmp_path / "net.topo"


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("strategy = \n")
    with pytest.raises(ConfigError, match="TOML syntax"):
        load_config(bad)

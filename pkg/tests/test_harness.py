"""Config-driven simulations, sweeps and reproducibility."""

import pytest

from pullbfr.config import parse_config
from pullbfr.harness import bloom_params, run_experiment, run_simulation, run_sweep, sweep_csv, sweep_points

QUICK = {"sim": {"duration_s": 10.0}, "workload": {"files_per_client": 2}}


def quick(**extra):
    data = {k: dict(v) for k, v in QUICK.items()}
    for k, v in extra.items():
        if isinstance(v, dict):
            data.setdefault(k, {}).update(v)
        else:
            data[k] = v
    return parse_config(data)


def test_bloom_params_from_config():
    assert bloom_params(quick()).m_bits == 5728
    explicit = bloom_params(quick(bloom={"m_bits": 2000}))
    assert (explicit.m_bits, explicit.k, explicit.n_max) == (2000, 1, 1000)


@pytest.mark.parametrize("strategy", ["pull-bfr", "push-bfr", "far"])
def test_report_is_consistent(strategy):
    r = run_simulation(quick(strategy=strategy, bloom={"oracle": True}))
    r.check_invariants()
    assert r.unsatisfied == 0 and r.pending_remaining == 0
    assert r.wrong_server_interests == 0
    assert len(r.rtt_samples) > 0
    if strategy == "far":
        assert r.advert_overhead_bytes == 0
    else:
        assert r.advert_overhead_bytes > 0


def test_same_seed_same_report():
    a = run_simulation(quick())
    b = run_simulation(quick())
    assert a.to_json() == b.to_json()
    c = run_simulation(quick(), seed=2)
    assert c.to_json() != a.to_json()


def test_sweep_points_order():
    cfg = quick(sweep={"axis": "alpha", "values": [0.6, 2.0], "strategies": ["far", "pull-bfr"], "repetitions": 2})
    pts = sweep_points(cfg)
    assert [(p.strategy, p.value, p.repetition, p.seed) for p in pts] == [
        ("far", 0.6, 0, 1),
        ("far", 0.6, 1, 2),
        ("far", 2.0, 0, 1),
        ("far", 2.0, 1, 2),
        ("pull-bfr", 0.6, 0, 1),
        ("pull-bfr", 0.6, 1, 2),
        ("pull-bfr", 2.0, 0, 1),
        ("pull-bfr", 2.0, 1, 2),
    ]
    assert pts[2].cfg.workload.alpha == 2.0


def test_parallel_sweep_matches_serial():
    cfg = quick(sweep={"axis": "alpha", "values": [0.6, 2.0], "strategies": ["pull-bfr", "push-bfr"]})
    serial = sweep_csv(run_sweep(cfg, jobs=1))
    parallel = sweep_csv(run_sweep(cfg, jobs=2))
    assert serial == parallel
    assert len(serial.splitlines()) == 5


def test_run_experiment_writes_outputs(tmp_path):
    path = run_experiment(quick(), tmp_path / "out")
    assert path.name == "results.csv"
    assert (tmp_path / "out" / "point_0000.json").is_file()
    assert (tmp_path / "out" / "config.json").is_file()
    first = path.read_bytes()
    run_experiment(quick(), tmp_path / "out")
    assert path.read_bytes() == first


def test_custom_topology_and_catalogue(tmp_path):
    (tmp_path / "net.topo").write_text(
        "node C client\nnode R router\nnode S server\nlink C R 1000000000 1000000\nlink R S 1000000000 1000000\n"
    )
    (tmp_path / "files.cat").write_text("file /a/b S\nfile /c S\n")
    cfg = parse_config(
        {"topology": {"path": "net.topo"}, "catalog": {"path": "files.cat"}, **QUICK}, base_dir=str(tmp_path)
    )
    r = run_simulation(cfg)
    assert r.cataloged_files == 2 and r.nodes == 3 and r.unsatisfied == 0


def test_catalogue_with_unknown_server(tmp_path):
    from pullbfr.topology import TopologyError

    (tmp_path / "files.cat").write_text("file /a S99\n")
    cfg = parse_config({"catalog": {"path": "files.cat"}, **QUICK}, base_dir=str(tmp_path))
    with pytest.raises(TopologyError, match="S99"):
        run_simulation(cfg)

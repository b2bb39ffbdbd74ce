"""CLI subcommands: outputs, schemas, manifests, reproducibility, exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

import signedvoter as sv
from signedvoter.cli import main

BAL_CFG = "family = balanced\nsizes = 6, 9\nedges_per_node = 3\nseed = 11\n"
WC_CFG = "family = weakly_connected\nsizes = 5, 4, 6, 4, 7\nedges_per_node = 2\nseed = 4\n"


@pytest.fixture
def bal_cfg(tmp_path):
    p = tmp_path / "bal.cfg"
    p.write_text(BAL_CFG)
    return str(p)


@pytest.fixture
def wc_graph(tmp_path):
    cfg = tmp_path / "wc.cfg"
    cfg.write_text(WC_CFG)
    out = tmp_path / "gen"
    assert main(["generate", "--generate", str(cfg), "--out", str(out)]) == 0
    return str(out / "graph.edges")


def test_generate_writes_graph_and_manifest(bal_cfg, tmp_path):
    out = tmp_path / "g"
    assert main(["generate", "--generate", bal_cfg, "--out", str(out)]) == 0
    edges = (out / "graph.edges").read_text()
    parsed = sv.parse_snap(edges)
    assert parsed.graph.n == 15
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert manifest["version"] == sv.__version__
    assert manifest["duration_seconds"] >= 0
    meta = json.loads((out / "graph.json").read_text())
    assert meta["n"] == 15 and meta["edges"] == parsed.graph.n_edges


def test_classify_records(wc_graph, tmp_path, capsys):
    out = tmp_path / "cls"
    assert main(["classify", "--graph", wc_graph, "--out", str(out)]) == 0
    records = [json.loads(line) for line in
               (out / "components.jsonl").read_text().splitlines()]
    assert len(records) == 3
    by_sink = {r["component_id"]: r for r in records}
    assert by_sink[0]["sink"] is False
    assert by_sink[0]["kind"] == "StrictlyUnbalanced"
    for cid in (1, 2):
        assert by_sink[cid]["sink"] is True
        assert by_sink[cid]["kind"] == "Balanced"
        assert by_sink[cid]["s_size"] + by_sink[cid]["sbar_size"] == by_sink[cid]["size"]


def test_dynamics_fixed_horizon(wc_graph, tmp_path):
    out = tmp_path / "dyn"
    assert main(["dynamics", "--graph", wc_graph, "--seeds", "0,5,9",
                 "--t", "8", "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "step,total_white_expectation"
    assert len(lines) == 10
    G = sv.parse_snap(Path(wc_graph).read_text()).graph
    expect = sv.propagate(G, sv.indicator(G.n, [0, 5, 9]), 8).sum(axis=1)
    got = [float(line.split(",")[1]) for line in lines[1:]]
    assert np.allclose(got, expect, atol=1e-9)
    record = json.loads((out / "steady_state.json").read_text())
    assert record["kind"] == "fixed"
    assert record["n"] == G.n
    ss = sv.steady_state(G, sv.indicator(G.n, [0, 5, 9]))
    assert record["white_average_total"] == pytest.approx(ss.average.sum())


def test_dynamics_adaptive_horizon(wc_graph, tmp_path):
    out = tmp_path / "dyn2"
    assert main(["dynamics", "--graph", wc_graph, "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()[1:]
    G = sv.parse_snap(Path(wc_graph).read_text()).graph
    ss = sv.steady_state(G, np.zeros(G.n))
    final = float(lines[-1].split(",")[1])
    assert final == pytest.approx(ss.average.sum(), abs=1e-5)


def test_dynamics_per_node_requires_t(wc_graph, tmp_path):
    assert main(["dynamics", "--graph", wc_graph, "--per-node",
                 "--out", str(tmp_path / "x")]) == 1


def test_dynamics_per_node_columns_and_seed_file(wc_graph, tmp_path):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("0\n5\n9\n")
    out = tmp_path / "pn"
    assert main(["dynamics", "--graph", wc_graph, "--seeds", str(seeds),
                 "--t", "3", "--per-node", "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    G = sv.parse_snap(Path(wc_graph).read_text()).graph
    assert lines[0].split(",")[:2] == ["step", "total_white_expectation"]
    assert len(lines[0].split(",")) == 2 + G.n
    row0 = lines[1].split(",")
    assert [float(v) for v in row0[2:]] == sv.indicator(G.n, [0, 5, 9]).tolist()


def test_simulate_csv(wc_graph, tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--graph", wc_graph, "--seeds", "1,2", "--t", "5",
                 "--trials", "500", "--rng-seed", "9", "--out", str(out)]) == 0
    lines = (out / "simulation.csv").read_text().splitlines()
    assert lines[0] == "step,mean_white,stderr"
    assert len(lines) == 7
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trials"] == 500 and summary["rng_seed"] == 9


def test_maximize_longterm_and_contributions(wc_graph, tmp_path):
    out = tmp_path / "mx"
    assert main(["maximize", "--graph", wc_graph, "--objective", "longterm",
                 "--k", "3", "--contributions", "--out", str(out)]) == 0
    payload = json.loads((out / "seeds.json").read_text())
    G = sv.parse_snap(Path(wc_graph).read_text()).graph
    expect = sv.svim_l(G, 3)
    assert payload["seeds"] == expect.nodes
    assert payload["value"] == pytest.approx(expect.value)
    rows = (out / "contributions.csv").read_text().splitlines()
    assert rows[0] == "node,contribution" and len(rows) == G.n + 1


def test_dynamics_strictly_unbalanced_settles_at_half(tmp_path):
    cfg = tmp_path / "su.cfg"
    cfg.write_text("family = strictly_unbalanced\nsizes = 8, 12\nedges_per_node = 3\nseed = 3\n")
    out = tmp_path / "su"
    assert main(["dynamics", "--generate", str(cfg), "--out", str(out)]) == 0
    final = float((out / "trajectory.csv").read_text().splitlines()[-1].split(",")[1])
    assert abs(final - 10.0) <= 1e-6 * 20


def test_maximize_oscillation_objective(tmp_path):
    cfg = tmp_path / "ab.cfg"
    cfg.write_text("family = anti_balanced\nsizes = 5, 8\nedges_per_node = 3\nseed = 2\n")
    out = tmp_path / "osc"
    assert main(["maximize", "--generate", str(cfg), "--objective", "oscillation",
                 "--k", "2", "--out", str(out)]) == 0
    payload = json.loads((out / "seeds.json").read_text())
    assert payload["objective"] == "oscillation"
    assert payload["value"] > 0
    # non-oscillating graph: the objective is a data error
    bal = tmp_path / "bal2.cfg"
    bal.write_text(BAL_CFG)
    assert main(["maximize", "--generate", str(bal), "--objective", "oscillation",
                 "--k", "2", "--out", str(tmp_path / "osc2")]) == 2


def test_maximize_baseline(wc_graph, tmp_path):
    out = tmp_path / "mb"
    assert main(["maximize", "--graph", wc_graph, "--baseline", "out_degree",
                 "--k", "2", "--out", str(out)]) == 0
    payload = json.loads((out / "seeds.json").read_text())
    assert payload["objective"] == "heuristic:out_degree"
    assert len(payload["seeds"]) == 2


def test_compare_table_and_summary(wc_graph, tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--graph", wc_graph, "--objective", "longterm",
                 "--k", "3", "--t", "12", "--trials", "60",
                 "--rng-seed", "1", "--out", str(out)]) == 0
    lines = (out / "compare.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "step"
    for name in ("svim", "out_degree", "positive_out_degree", "degree_difference", "random"):
        assert f"{name}_exact" in header
        assert f"{name}_mc_mean" in header
    assert len(lines) == 14
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["methods"]) == {
        "svim", "out_degree", "positive_out_degree", "degree_difference", "random"}
    for record in summary["methods"].values():
        assert "steady_state_influence" in record


def test_replay_reproduces_outputs(bal_cfg, tmp_path):
    args = ["maximize", "--generate", bal_cfg, "--objective", "longterm", "--k", "4"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    for name in ("seeds.json",):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    # simulate is Monte Carlo but still byte-stable for a fixed seed
    sim = ["simulate", "--generate", bal_cfg, "--seeds", "2,3", "--t", "4",
           "--trials", "400", "--rng-seed", "5"]
    s1, s2 = tmp_path / "s1", tmp_path / "s2"
    assert main(sim + ["--out", str(s1)]) == 0
    assert main(sim + ["--out", str(s2)]) == 0
    assert (s1 / "simulation.csv").read_bytes() == (s2 / "simulation.csv").read_bytes()


def test_golden_dynamics_csv(tmp_path):
    # frozen bytes for a fixed tiny graph: schema changes must be deliberate
    graph = tmp_path / "tiny.edges"
    graph.write_text("0 1 1\n1 0 -1\n1 1 1\n")
    out = tmp_path / "gold"
    assert main(["dynamics", "--graph", str(graph), "--seeds", "0",
                 "--t", "3", "--out", str(out)]) == 0
    # hand-derived: x1 = [0, 0], x2 = [0, 1/2], x3 = [1/2, 3/4]
    golden = (
        "step,total_white_expectation\r\n"
        "0,1\r\n"
        "1,0\r\n"
        "2,0.5\r\n"
        "3,1.25\r\n"
    )
    assert (out / "trajectory.csv").read_bytes() == golden.encode()


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.edges"
    bad.write_text("0 1 oops\n")
    assert main(["classify", "--graph", str(bad), "--out", str(tmp_path / "a")]) == 2
    assert main(["classify", "--out", str(tmp_path / "b")]) == 1
    assert main(["classify", "--graph", "x", "--badflag"]) == 1
    assert main(["classify", "--graph", str(tmp_path / "missing.edges"),
                 "--out", str(tmp_path / "m")]) == 2
    dangling = tmp_path / "dang.edges"
    dangling.write_text("0 1 1\n")
    assert main(["classify", "--graph", str(dangling), "--out", str(tmp_path / "c")]) == 2
    assert main(["classify", "--graph", str(dangling), "--repair-dangling",
                 "--out", str(tmp_path / "d")]) == 0
    # periodic sink component: long-term objective is a data error
    per = tmp_path / "per.edges"
    per.write_text("0 1 1\n1 2 1\n2 1 1\n")
    assert main(["maximize", "--graph", str(per), "--objective", "longterm",
                 "--k", "1", "--out", str(tmp_path / "e")]) == 2



def test_exit_code_numeric_failure(tmp_path, monkeypatch):
    # slow-mixing graph with a tightened cap: the numeric gate exits 3
    import signedvoter.cli as cli
    monkeypatch.setattr(cli, "_ADAPTIVE_CAP", 50)
    slow = tmp_path / "slow.edges"
    slow.write_text(sv.serialize(sv.slow_mixing(12)))
    assert main(["dynamics", "--graph", str(slow), "--seeds", "0",
                 "--out", str(tmp_path / "f")]) == 3


def test_usage_error_on_bad_seeds(wc_graph, tmp_path):
    assert main(["dynamics", "--graph", wc_graph, "--seeds", "0,zap",
                 "--t", "2", "--out", str(tmp_path / "x")]) == 1
    assert main(["dynamics", "--graph", wc_graph, "--seeds", "999",
                 "--t", "2", "--out", str(tmp_path / "y")]) == 1

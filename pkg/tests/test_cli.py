"""Command-line wiring: verbs, outputs, exit codes, reproducibility."""

import numpy as np
import pytest

from herdsim.cli import main
from herdsim.harness import parse_runs_csv

TINY_SWEEP = """
config_id = tiny
n_agents = 20
t_steps = 15
s_reps = 6
scenario = equal
mu0 = 0.4
mu1 = 0.6
sigma2 = 0.1
rho_grid = 0.0,0.4
"""

TINY_ENDO = """
config_id = ENDO
n_agents = 14
n_informed = 3
mu0 = 0.4
mu1 = 0.6
mu0_informed = 0.3
mu1_informed = 0.7
sigma2 = 0.1
cost = 0.1
cost_informed = 0.0
t_c = 100
q_prime = 0.5
beta = 30
n_networks = 3
s_reps = 4
t_steps = 20
scenario = equal
bias_grid = 0.0,0.5
"""


@pytest.fixture
def sweep_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_SWEEP)
    return path


@pytest.fixture
def endo_cfg(tmp_path):
    path = tmp_path / "endo.cfg"
    path.write_text(TINY_ENDO)
    return path


class TestSweepVerb:
    def test_outputs_and_exit_code(self, sweep_cfg, tmp_path, capsys):
        out = tmp_path / "results"
        rc = main(["sweep", "--config", str(sweep_cfg), "--seed", "42", "--out", str(out)])
        assert rc == 0
        for name in ("runs.csv", "contagion.csv", "fvi_grid.csv", "manifest.txt"):
            assert (out / name).exists()
        assert len(parse_runs_csv(out / "runs.csv")) == 12

    def test_byte_identical_reruns_any_jobs(self, sweep_cfg, tmp_path):
        outs = []
        for tag, jobs in (("a", "1"), ("b", "2"), ("c", "1")):
            out = tmp_path / tag
            rc = main(
                ["sweep", "--config", str(sweep_cfg), "--seed", "9", "--out", str(out),
                 "--jobs", jobs]
            )
            assert rc == 0
            outs.append((out / "runs.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_override_changes_hash_and_results(self, sweep_cfg, tmp_path):
        out1, out2 = tmp_path / "x", tmp_path / "y"
        main(["sweep", "--config", str(sweep_cfg), "--seed", "1", "--out", str(out1)])
        main(["sweep", "--config", str(sweep_cfg), "--seed", "1", "--out", str(out2),
              "--set", "s_reps=7"])
        r1 = parse_runs_csv(out1 / "runs.csv")
        r2 = parse_runs_csv(out2 / "runs.csv")
        assert len(r2) == 14
        assert r1[0].config != r2[0].config

    def test_bad_config_key_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnicate = 12\n")
        rc = main(["sweep", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "frobnicate" in capsys.readouterr().err

    def test_unwritable_output_exit_2(self, sweep_cfg, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        rc = main(
            ["sweep", "--config", str(sweep_cfg), "--seed", "1",
             "--out", str(blocker / "sub")]
        )
        assert rc == 2


class TestMeanfieldVerb:
    def test_prints_three_fixed_points(self, capsys):
        rc = main(["meanfield", "--mu0", "0.4", "--mu1", "0.6", "--sigma2", "0.1"])
        assert rc == 0
        lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("q*")]
        assert len(lines) == 3
        assert "0.000000" in lines[0] and "[stable]" in lines[0]
        assert "0.5819" in lines[1] and "[unstable]" in lines[1]
        assert "1.000000" in lines[2] and "[stable]" in lines[2]

    def test_writes_curve_csvs(self, tmp_path, capsys):
        out = tmp_path / "mf"
        rc = main(["meanfield", "--mu0", "0.4", "--mu1", "0.6", "--sigma2", "0.1",
                   "--out", str(out)])
        assert rc == 0
        curve = (out / "meanfield_curve.csv").read_text().splitlines()
        assert curve[0] == "q,prob_one"
        assert len(curve) == 202
        fps = (out / "meanfield_fixed_points.csv").read_text().splitlines()
        assert fps[0] == "q_star,stability"
        assert len(fps) == 4


class TestFormAndAuditVerbs:
    def test_form_then_audit_clean(self, endo_cfg, tmp_path, capsys):
        out = tmp_path / "ens"
        rc = main(["form", "--config", str(endo_cfg), "--seed", "3", "--out", str(out)])
        assert rc == 0
        graphs = sorted((out / "graphs").glob("*.edges"))
        logs = sorted((out / "logs").glob("*.log"))
        assert len(graphs) == 3 and len(logs) == 3
        assert (out / "degrees.csv").exists()
        capsys.readouterr()
        rc = main(["audit", "--graph", str(graphs[0]), "--config", str(endo_cfg)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "deletion violations: 0" in printed

    def test_audit_population_size_mismatch_exit_1(self, endo_cfg, tmp_path, capsys):
        g = tmp_path / "small.edges"
        g.write_text("# n=5 density=0.0\n")
        rc = main(["audit", "--graph", str(g), "--config", str(endo_cfg)])
        assert rc == 1
        assert "n_agents" in capsys.readouterr().err


class TestCompareVerb:
    def test_outputs(self, endo_cfg, tmp_path):
        out = tmp_path / "cmp"
        rc = main(["compare", "--config", str(endo_cfg), "--seed", "8", "--out", str(out)])
        assert rc == 0
        records = parse_runs_csv(out / "runs.csv")
        assert len(records) == 6  # three networks per ensemble
        labels = {r.config.split("#")[0] for r in records}
        assert labels == {"endo", "er"}
        bias = (out / "contagion_bias.csv").read_text().splitlines()
        assert bias[0] == "config,bias,n_runs,p_contagion"
        assert len(bias) == 5  # two ensembles x two bias levels
        assert (out / "degrees.csv").exists()
        assert (out / "manifest.txt").exists()

"""Config schema, presets, CLI exit codes, and artifact determinism."""

import csv
import json

import pytest

from zopref.cli import main, parse_seeds
from zopref.config import ConfigError, PRESETS, build, preset, validate
from zopref.envs.gridworld import GridWorld
from zopref.envs.predator_prey import PredatorPrey
from zopref.learner import IterationRow
from zopref.policy import TabularPolicy
from zopref.reporting import read_metrics, write_metrics

MICRO = """\
environment:
  kind: gridworld
  starts: [[2, 1], [3, 1]]
graph:
  kind: complete
learner:
  iterations: 3
  trials: 2
  evaluators: 5
  horizon: 4
  eval_rollouts: 6
output:
  directory: "{out}"
seeds: [0, 1]
"""


def test_presets_build_into_expected_shapes():
    paper = build(preset("gridworld_paper"))
    mdp, cfg = paper
    assert isinstance(mdp, GridWorld)
    assert mdp.graph.n_agents == 4 and mdp.graph.edges == ((0, 1), (1, 2), (2, 3))
    assert (cfg.evaluators, cfg.trials, cfg.horizon) == (1000, 500, 20)
    assert (cfg.iterations, cfg.kappa, cfg.alpha, cfg.mu) == (200, 1, 0.1, 0.1)

    mdp, cfg = build(preset("gridworld_desk"))
    assert (cfg.evaluators, cfg.trials, cfg.horizon, cfg.iterations) == (200, 100, 10, 200)

    mdp, cfg = build(preset("gridworld_safety"))
    assert mdp.config.collision_penalty == 1.0

    mdp, cfg = build(preset("predator_prey_paper"))
    assert isinstance(mdp, PredatorPrey)
    assert mdp.graph.n_agents == 20
    assert (cfg.evaluators, cfg.trials, cfg.horizon, cfg.kappa) == (200, 100, 50, 1)

    assert preset("gridworld_desk").seeds == [0, 1, 2, 3, 4]
    with pytest.raises(ConfigError):
        preset("nope")
    assert set(PRESETS) == {
        "gridworld_paper", "gridworld_safety", "gridworld_desk",
        "predator_prey_paper", "predator_prey_desk",
    }


def test_unknown_keys_rejected_with_dotted_paths():
    base = {"environment": {"kind": "gridworld"}}
    cases = [
        ({**base, "learner": {"evaluatorz": 3}}, "learner.evaluatorz"),
        ({"environment": {"kind": "gridworld", "widht": 9}}, "environment.widht"),
        ({**base, "output": {"dir": "x"}}, "output.dir"),
        ({**base, "extra": 1}, "config.extra"),
        ({**base, "learner": {"eval_cadence": 2}}, "learner.eval_cadence"),
    ]
    for raw, needle in cases:
        with pytest.raises(ConfigError, match=needle.replace(".", r"\.")):
            validate(raw)


def test_value_validation():
    with pytest.raises(ConfigError, match="environment.kind"):
        validate({"environment": {"kind": "maze"}})
    with pytest.raises(ConfigError, match="graph.kind"):
        validate({"environment": {"kind": "gridworld"}, "graph": {"kind": "ring"}})
    with pytest.raises(ConfigError, match="edges"):
        validate({"environment": {"kind": "gridworld"}, "graph": {"kind": "edges"}})
    with pytest.raises(ConfigError, match="distinct"):
        validate({"environment": {"kind": "gridworld"}, "seeds": [1, 1]})
    with pytest.raises(ConfigError, match="seeds"):
        validate({"environment": {"kind": "gridworld"}, "seeds": []})
    with pytest.raises(ConfigError, match="metric_cadence"):
        validate({"environment": {"kind": "gridworld"},
                  "output": {"metric_cadence": 0}})
    cfg = validate({"environment": {"kind": "gridworld"},
                    "output": {"metric_cadence": 4}})
    _, learner = build(cfg)
    assert learner.eval_cadence == 4


def test_explicit_edge_list_graph():
    cfg = validate({
        "environment": {"kind": "gridworld",
                        "starts": [[0, 0], [1, 1], [2, 2]]},
        "graph": {"kind": "edges", "edges": [[0, 2], [1, 2]]},
    })
    mdp, _ = build(cfg)
    assert mdp.graph.edges == ((0, 2), (1, 2))
    bad = validate({
        "environment": {"kind": "gridworld", "starts": [[0, 0], [1, 1]]},
        "graph": {"kind": "edges", "edges": [[0, 5]]},
    })
    with pytest.raises(ConfigError, match="graph"):
        build(bad)


def test_environment_errors_surface_as_config_errors():
    cfg = validate({"environment": {"kind": "gridworld", "target": [9, 9]}})
    with pytest.raises(ConfigError, match="environment"):
        build(cfg)
    cfg = validate({"environment": {"kind": "gridworld"},
                    "learner": {"mu": -1.0}})
    with pytest.raises(ConfigError, match="learner"):
        build(cfg)


def test_seed_list_parsing():
    assert parse_seeds("0..4") == [0, 1, 2, 3, 4]
    assert parse_seeds("3") == [3]
    assert parse_seeds("0,2,5") == [0, 2, 5]
    for bad in ("4..1", "a..b", "1,1", "", "x"):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def _write_micro(tmp_path, out_name="out"):
    out = tmp_path / out_name
    path = tmp_path / "micro.yaml"
    path.write_text(MICRO.format(out=out))
    return path, out


def test_cli_training_run_writes_artifacts(tmp_path):
    path, out = _write_micro(tmp_path)
    assert main([str(path)]) == 0
    for seed in (0, 1):
        rows = read_metrics(out / f"metrics_seed{seed}.csv")
        assert len(rows) == 3
        assert isinstance(rows[0], IterationRow)
        policy = TabularPolicy.load(out / f"checkpoint_seed{seed}.json")
        assert policy.n_agents == 2
    with open(out / "summary.csv", newline="") as fh:
        labels = [row[0] for row in csv.reader(fh)]
    assert labels == ["seed", "0", "1", "mean", "std"]
    assert (out / "learning_curve.png").stat().st_size > 0
    assert (out / "gradient_norm.png").stat().st_size > 0


def _strip_elapsed(path):
    with open(path, newline="") as fh:
        return [row[:4] for row in csv.reader(fh)]


def test_cli_rerun_is_identical_and_seeds_differ(tmp_path):
    path, out = _write_micro(tmp_path)
    assert main([str(path)]) == 0
    assert main([str(path), "--out", str(tmp_path / "out2")]) == 0
    for seed in (0, 1):
        a = _strip_elapsed(out / f"metrics_seed{seed}.csv")
        b = _strip_elapsed(tmp_path / "out2" / f"metrics_seed{seed}.csv")
        assert a == b
        ca = (out / f"checkpoint_seed{seed}.json").read_bytes()
        cb = (tmp_path / "out2" / f"checkpoint_seed{seed}.json").read_bytes()
        assert ca == cb
    assert (_strip_elapsed(out / "metrics_seed0.csv")
            != _strip_elapsed(out / "metrics_seed1.csv"))


def test_cli_seed_override_and_checkpoint_interval(tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "run.yaml"
    cfg.write_text(MICRO.format(out=out).replace(
        'directory: "%s"' % out, 'directory: "%s"\n  checkpoint_interval: 2' % out))
    assert main([str(cfg), "--seeds", "5"]) == 0
    assert (out / "metrics_seed5.csv").exists()
    assert not (out / "metrics_seed0.csv").exists()
    assert (out / "checkpoint_seed5_iter1.json").exists()


def test_cli_exit_codes(tmp_path, capsys):
    assert main([str(tmp_path / "missing.yaml")]) == 1
    assert "config error" in capsys.readouterr().err

    bad = tmp_path / "bad.yaml"
    bad.write_text("environment:\n  kind: gridworld\n  widht: 9\n")
    assert main([str(bad)]) == 1
    assert "environment.widht" in capsys.readouterr().err

    assert main([]) == 1
    capsys.readouterr()
    assert main(["--preset", "gridworld_desk", str(bad)]) == 1
    assert "not both" in capsys.readouterr().err

    assert main(["--diag", "nope"]) == 1
    capsys.readouterr()
    assert main(["x.yaml", "--seeds", "4..1"]) == 1
    capsys.readouterr()


def test_cli_diagnostics_report(tmp_path, capsys):
    out = tmp_path / "diag"
    assert main(["--diag", "preference", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "[PASS]" in text and "checks passed" in text
    with open(out / "diagnostics_preference.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["suite", "name", "lhs", "relation", "rhs",
                       "tolerance", "status"]
    assert all(row[6] == "PASS" for row in rows[1:])
    assert (out / "diagnostics_preference.png").stat().st_size > 0


def test_metrics_round_trip(tmp_path):
    rows = [IterationRow(0, -1.5, 2.25, 0.5, 12.0),
            IterationRow(1, -1.25, 2.0, 0.4, 11.5)]
    path = tmp_path / "m.csv"
    write_metrics(path, rows)
    assert read_metrics(path) == rows
    path.write_text("iteration,other\n")
    with pytest.raises(ValueError):
        read_metrics(path)

import json
import time
from dataclasses import replace
from pathlib import Path

import pytest

from catanlab.board import MapTemplate
from catanlab.bots import HeuristicWeights
from catanlab.cli import WorkbenchConfig, main
from catanlab.evolution import EvolutionConfig, EvolutionInterrupted, run_prompt_evolution
from catanlab.llm import MockModel, ModelParams
from scripted import GOOD_POLICY, tree_bytes

MOCK = Path(__file__).resolve().parents[1] / "scripts" / "mock"
KEYS = ("OPENAI_API_KEY", "ANTHROPIC_API_KEY", "MISTRAL_API_KEY")


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for key in KEYS:
        monkeypatch.delenv(key, raising=False)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


# -- play -------------------------------------------------------------------


def test_unknown_agent_is_usage_error(workdir, capsys):
    assert run("play", "RANDOM", "WIZARD", "--out", "out") == 2
    assert "unknown agent" in capsys.readouterr().err
    assert list(workdir.iterdir()) == []


def test_bad_flags_are_usage_errors(workdir):
    assert run("play", "RANDOM", "RANDOM", "--games", "0", "--out", "out") == 2
    assert run("play", "RANDOM", "RANDOM", "--map", "HUGE", "--out", "out") == 2
    assert run("play", "RANDOM", "POLICY:missing.policy", "--out", "out") == 2
    assert run("frobnicate") == 2
    assert list(workdir.iterdir()) == []


def test_play_single_game_reproducible(workdir):
    assert run("play", "RANDOM", "ALPHABETA", "--games", "1", "--seed", "3", "--out", "a") == 0
    assert run("play", "RANDOM", "ALPHABETA", "--games", "1", "--seed", "3", "--out", "b") == 0
    a, b = tree_bytes(workdir / "a"), tree_bytes(workdir / "b")
    assert "games/game_0.jsonl" in a
    assert {k: v for k, v in a.items() if k != "run.json"} == {k: v for k, v in b.items() if k != "run.json"}


def test_play_random_vs_alphabeta_tournament(workdir):
    assert run("play", "RANDOM", "ALPHABETA", "--games", "100", "--seed", "1", "--out", "t", "--format", "json") == 0
    data = json.loads((workdir / "t/metrics.json").read_text())
    random_row, ab_row = data["rows"]
    assert random_row["agent_name"] == "RANDOM" and random_row["games"] == 100
    assert random_row["win_rate"] <= 0.05
    assert ab_row["win_rate"] >= 0.95


def test_play_policy_and_llm_agents(workdir):
    Path("good.policy").write_text(GOOD_POLICY)
    Path("prompt.txt").write_text("Build cities.")
    assert run("play", "POLICY:good.policy", "RANDOM", "--map", "mini", "--out", "p") == 0
    assert run("play", "PROMPT:prompt.txt", "STRUCTURED", "--map", "mini", "--mock", MOCK / "play.json", "--out", "q") == 0
    assert (workdir / "q/games/game_0.jsonl").exists()


def test_bad_policy_file_rejected(workdir):
    Path("bad.policy").write_text("import os\ndef decide(s, a):\n    return 0\n")
    assert run("play", "POLICY:bad.policy", "RANDOM", "--out", "p") == 2
    assert not (workdir / "p").exists()


def test_live_mode_without_key(workdir, capsys):
    assert run("play", "BASE", "RANDOM", "--model", "gpt-4o", "--out", "live") == 2
    assert "OPENAI_API_KEY" in capsys.readouterr().err
    assert run("evolve", "prompt", "--model", "claude-3-7-sonnet", "--out", "ev") == 2
    assert list(workdir.iterdir()) == []


# -- evolve -----------------------------------------------------------------


def test_evolve_prompt_smoke(workdir):
    start = time.monotonic()
    code = run("evolve", "prompt", "--mock", MOCK / "prompt_evolve.json", "--cycles", 1, "--games-per-cycle", 1, "--out", "ev")
    assert code == 0
    assert time.monotonic() - start < 60
    history = json.loads((workdir / "ev/history.json").read_text())
    assert history["mode"] == "prompt" and len(history["versions"]) == 1


def test_evolve_agent_smoke(workdir):
    code = run("evolve", "agent", "--mock", MOCK / "agent_evolve.json", "--cycles", 1, "--games-per-cycle", 1,
               "--final-trial-games", 1, "--out", "ev")
    assert code == 0
    history = json.loads((workdir / "ev/history.json").read_text())
    assert history["pct_no_errors"] == 100.0
    assert (workdir / "ev/policies/iter_1.policy").read_text() == GOOD_POLICY


def test_evolve_resume_matches_uninterrupted(workdir):
    args = ("--cycles", 3, "--games-per-cycle", 1, "--final-trial-games", 1)
    assert run("evolve", "prompt", "--mock", MOCK / "prompt_evolve.json", *args, "--out", "full") == 0
    cfg = replace(EvolutionConfig(), cycles=3, games_per_cycle=1, final_trial_games=1)
    with pytest.raises(EvolutionInterrupted):
        run_prompt_evolution(cfg, MockModel.from_file(MOCK / "prompt_evolve.json"), ModelParams(), workdir / "cut",
                             stop_after_cycle=1)
    assert run("evolve", "prompt", "--mock", MOCK / "prompt_evolve.json", "--resume", "cut") == 0
    assert tree_bytes(workdir / "full") == tree_bytes(workdir / "cut")


def test_resume_errors(workdir):
    assert run("evolve", "prompt", "--mock", MOCK / "prompt_evolve.json", "--resume", "nowhere") == 2
    assert run("evolve", "agent", "--mock", MOCK / "agent_evolve.json", "--cycles", 1, "--games-per-cycle", 1,
               "--final-trial-games", 0, "--out", "ev") == 0
    assert run("evolve", "prompt", "--mock", MOCK / "prompt_evolve.json", "--resume", "ev") == 2


def test_evolve_bad_mock_script(workdir):
    Path("broken.json").write_text('{"oops": 1}')
    assert run("evolve", "prompt", "--mock", "broken.json", "--out", "ev") == 2


def test_evolve_with_config_file(workdir):
    cfg = WorkbenchConfig(map=MapTemplate.MINI, evolution=EvolutionConfig(cycles=1, games_per_cycle=1, final_trial_games=0))
    Path("cfg.json").write_text(cfg.dumps())
    assert run("evolve", "prompt", "--config", "cfg.json", "--mock", MOCK / "prompt_evolve.json", "--out", "ev") == 0
    history = json.loads((workdir / "ev/history.json").read_text())
    assert history["config"]["cycles"] == 1
    Path("bad.json").write_text('{"colour": "red"}')
    assert run("evolve", "prompt", "--config", "bad.json", "--mock", MOCK / "prompt_evolve.json") == 2


# -- report -----------------------------------------------------------------


@pytest.fixture
def evolved(workdir):
    assert run("evolve", "agent", "--mock", MOCK / "agent_evolve.json", "--cycles", 2, "--games-per-cycle", 1,
               "--final-trial-games", 1, "--out", "ev") == 0
    return workdir / "ev"


@pytest.mark.parametrize("fmt,name", [("csv", "metrics.csv"), ("json", "metrics.json"), ("markdown", "metrics.md")])
def test_report_formats(evolved, fmt, name):
    assert run("report", evolved, "--format", fmt, "--out", "r1") == 0
    assert run("report", evolved, "--format", fmt, "--out", "r2") == 0
    r1, r2 = tree_bytes(evolved.parent / "r1"), tree_bytes(evolved.parent / "r2")
    assert set(r1) == {name, "evolution_curve.csv"} and r1 == r2
    curve = r1["evolution_curve.csv"].decode().splitlines()
    assert curve[0] == "iteration,avg_vp" and len(curve) == 4


def test_report_on_play_output(workdir):
    assert run("play", "RANDOM", "RANDOM", "--games", 2, "--map", "mini", "--out", "p") == 0
    assert run("report", "p", "--format", "markdown", "--out", "r") == 0
    text = (workdir / "r/metrics.md").read_text()
    assert text.count("| RANDOM |") == 2
    assert (workdir / "r/evolution_curve.csv").read_text() == "iteration,avg_vp\n"


def test_report_errors(workdir):
    Path("empty").mkdir()
    assert run("report", "empty") == 2
    assert run("report", "empty", "--format", "xml") == 2


# -- config -----------------------------------------------------------------


def test_workbench_config_round_trip(tmp_path):
    cfg = WorkbenchConfig(
        map=MapTemplate.MINI,
        vp_target=8,
        weights=HeuristicWeights(w_army=2.0),
        models={"BASE": ModelParams(model_id="gpt-4o", temperature=0.2)},
        evolution=EvolutionConfig(cycles=3),
        workers=2,
        rate_limit_rpm=30.0,
    )
    path = tmp_path / "cfg.json"
    path.write_text(cfg.dumps())
    again = WorkbenchConfig.load(path)
    assert again == cfg and again.dumps() == cfg.dumps()
    assert again.params_for("BASE").model_id == "gpt-4o"
    with pytest.raises(ValueError):
        WorkbenchConfig(workers=0)

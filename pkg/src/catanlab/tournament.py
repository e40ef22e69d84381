"""Series of head-to-head games with deterministic seeds and optional worker processes."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .board import MapTemplate
from .bots import DEFAULT_WEIGHTS, HeuristicWeights
from .engine import GameConfig, MatchResult, play_game
from .llm import ModelClient, ModelParams
from .players import AgentSpec, load_policy_file, make_decider
from .seeding import derive_seed


@dataclass(frozen=True)
class SeriesSpec:
    agents: tuple[AgentSpec, AgentSpec]
    games: int
    seed: int = 0
    template: MapTemplate = MapTemplate.FULL
    vp_target: int = 10
    max_turns: int = 500
    weights: HeuristicWeights = DEFAULT_WEIGHTS


def match_seed(seed: int, game: int) -> int:
    return derive_seed(seed, game)


def _game_config(spec: SeriesSpec, game: int) -> GameConfig:
    return GameConfig(
        template=spec.template, vp_target=spec.vp_target, max_turns=spec.max_turns, seed=match_seed(spec.seed, game)
    )


def _log_paths(out_dir, game: int) -> tuple[Path | None, str | None]:
    if out_dir is None:
        return None, None
    rel = f"games/game_{game}.jsonl"
    return Path(out_dir) / rel, rel


def _play_bot_game(args) -> MatchResult:
    spec, game, out_dir, artifacts = args
    config = _game_config(spec, game)
    deciders = [
        make_decider(a, derive_seed(config.seed, f"P{i}"), spec.weights, artifact=artifacts[i])
        for i, a in enumerate(spec.agents)
    ]
    path, rel = _log_paths(out_dir, game)
    return play_game(deciders, config, log_path=path, log_label=rel)


def run_series(
    spec: SeriesSpec,
    out_dir=None,
    workers: int = 1,
    client: ModelClient | None = None,
    params: tuple[ModelParams | None, ModelParams | None] = (None, None),
) -> list[MatchResult]:
    """Play ``spec.games`` games; game ``g`` uses seed ``derive_seed(spec.seed, g)``.

    Games with model-backed agents always run in this process, one at a time.
    Results come back in game order whatever the worker count.
    """
    artifacts = [load_policy_file(a.path) if a.kind == "POLICY" else None for a in spec.agents]
    needs_model = any(a.needs_model for a in spec.agents)
    if not needs_model:
        jobs = [(spec, g, out_dir, artifacts) for g in range(spec.games)]
        if workers > 1 and spec.games > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_play_bot_game, jobs))
        return [_play_bot_game(job) for job in jobs]

    prompts = [
        Path(a.path).read_text(encoding="utf-8") if a.kind == "PROMPT" else None for a in spec.agents
    ]
    results = []
    for g in range(spec.games):
        config = _game_config(spec, g)
        deciders = [
            make_decider(a, derive_seed(config.seed, f"P{i}"), spec.weights, client, params[i], prompts[i], artifacts[i])
            for i, a in enumerate(spec.agents)
        ]
        path, rel = _log_paths(out_dir, g)
        results.append(play_game(deciders, config, log_path=path, log_label=rel))
        for i, d in enumerate(deciders):
            if out_dir is not None and hasattr(d, "write_transcript"):
                d.write_transcript(Path(out_dir) / f"games/game_{g}.p{i}.transcript.jsonl")
    return results

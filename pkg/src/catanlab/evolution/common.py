"""Pieces shared by both evolution loops."""

from __future__ import annotations

import math
from typing import Callable

from ..board import MapTemplate
from ..bots import DEFAULT_WEIGHTS, HeuristicWeights
from ..engine import GameConfig, MatchResult, play_game
from ..players import make_decider, parse_agent
from ..seeding import derive_seed
from .workspace import Workspace


class EvolutionInterrupted(RuntimeError):
    """Raised after a checkpoint when a run is asked to stop early."""


def game_seed(master_seed: int, group, game: int) -> int:
    return derive_seed(master_seed, group, game)


def compact(result: MatchResult) -> dict:
    return {
        "seed": result.seed,
        "winner": result.winner,
        "vp": list(result.vp),
        "turns": result.turns,
        "turn_capped": result.turn_capped,
        "log": result.log_path,
    }


def mean(values) -> float | None:
    values = list(values)
    return math.fsum(values) / len(values) if values else None


def play_series(
    ws: Workspace,
    group,
    games: int,
    master_seed: int,
    template: MapTemplate,
    make_player: Callable[[int], object],
    opponent: str,
    weights: HeuristicWeights = DEFAULT_WEIGHTS,
    vp_target: int = 10,
    max_turns: int = 500,
    after_game: Callable[[int, object, MatchResult], None] | None = None,
) -> list[MatchResult]:
    """Play ``games`` games with the evolving player as P0 against ``opponent``."""
    results = []
    opp_spec = parse_agent(opponent)
    for g in range(games):
        seed = game_seed(master_seed, group, g)
        config = GameConfig(template=template, vp_target=vp_target, max_turns=max_turns, seed=seed)
        player = make_player(seed)
        opp = make_decider(opp_spec, derive_seed(seed, "opponent"), weights)
        rel = ws.game_log(group, g)
        path = ws.path(rel)
        result = play_game([player, opp], config, seed=seed, log_path=path, log_label=rel)
        if after_game is not None:
            after_game(g, player, result)
        results.append(result)
    return results


def argmax_earliest(items, key) -> object | None:
    best, best_value = None, None
    for item in items:
        value = key(item)
        if value is None:
            continue
        if best is None or value > best_value:
            best, best_value = item, value
    return best

"""Full-game orchestration, match summaries and replayable JSON-lines logs."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..seeding import derive_seed
from .actions import Action, DevCard, action_from_json, action_to_json
from .rules import legal_actions, new_game, step
from .state import GameConfig, GameState, Phase, victory_points

log = logging.getLogger(__name__)

Decider = Callable[[GameState, list], Action]


@dataclass
class MatchResult:
    winner: int | None
    vp: list[int]
    turns: int
    settlements: list[int]
    cities: list[int]
    road_pieces: list[int]
    longest_road_held: list[bool]
    largest_army_held: list[bool]
    dev_vp: list[int]
    turn_capped: bool = False
    illegal_action_count: list[int] = field(default_factory=lambda: [0, 0])
    fallback_count: list[int] = field(default_factory=lambda: [0, 0])
    seed: int = 0
    config: dict = field(default_factory=dict)
    log_path: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MatchResult":
        return cls(**data)


def summarize(state: GameState, seed: int, illegal=None, fallbacks=None, log_path=None) -> MatchResult:
    n = len(state.players)
    return MatchResult(
        winner=state.winner,
        vp=[victory_points(state, p, True) for p in range(n)],
        turns=state.turn_index,
        settlements=[len(p.settlements) for p in state.players],
        cities=[len(p.cities) for p in state.players],
        road_pieces=[len(p.road_ids) for p in state.players],
        longest_road_held=[state.longest_road_holder == p for p in range(n)],
        largest_army_held=[state.largest_army_holder == p for p in range(n)],
        dev_vp=[p.dev_hidden[DevCard.VICTORY_POINT] for p in state.players],
        turn_capped=state.turn_capped,
        illegal_action_count=list(illegal or [0] * n),
        fallback_count=list(fallbacks or [0] * n),
        seed=seed,
        config=state.config.to_dict(),
        log_path=None if log_path is None else str(log_path),
    )


def event_to_json(event: dict) -> dict:
    out = dict(event)
    out["action"] = action_to_json(event["action"])
    return out


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_log(path, events: Iterable[dict], result: MatchResult) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for event in events:
            fh.write(_dumps(event_to_json(event)) + "\n")
        fh.write(_dumps({"result": result.to_dict()}) + "\n")


def read_log(path) -> tuple[list[dict], MatchResult]:
    events, result = [], None
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            if "result" in record:
                result = MatchResult.from_dict(record["result"])
            else:
                events.append(record)
    if result is None:
        raise ValueError(f"{path}: log has no result line")
    return events, result


def replay(config: GameConfig, seed: int, actions: Iterable[Action]) -> GameState:
    """Re-run ``actions`` through the pure ``apply`` from a fresh game."""
    from .rules import apply

    state = new_game(config, seed)
    for action in actions:
        state = apply(state, action)
    return state


def replay_log(path) -> GameState:
    events, result = read_log(path)
    config = GameConfig.from_dict(result.config)
    return replay(config, result.seed, (action_from_json(e["action"]) for e in events))


def play_game(
    deciders: Sequence[Decider],
    config: GameConfig,
    seed: int | None = None,
    log_path=None,
    log_label: str | None = None,
) -> MatchResult:
    """Play one game to completion.

    A decider that raises or returns an action outside the legal list is
    replaced for that move by a uniformly random legal action; the event is
    flagged and counted in ``illegal_action_count``.  Deciders may expose a
    ``pop_notes()`` method whose dict is merged into the logged event (the
    LLM players use it to flag retry fallbacks).  ``log_label`` replaces the
    file path recorded in the result, e.g. with a workspace-relative name.
    """
    if len(deciders) != 2:
        raise ValueError("play_game needs exactly two deciders")
    if seed is None:
        seed = config.seed
    state = new_game(config, seed)
    fallback_rng = random.Random(derive_seed(seed, "illegal-fallback"))
    illegal = [0, 0]
    fallbacks = [0, 0]

    while state.phase is not Phase.TERMINAL:
        p = state.acting_player
        legal = legal_actions(state)
        decider = deciders[p]
        notes = {}
        try:
            action = decider(state, legal)
        except Exception as exc:  # noqa: BLE001 - any decider failure degrades to fallback
            log.warning("decider %d failed: %s", p, exc)
            notes["decider_error"] = f"{type(exc).__name__}: {exc}"
            action = None
        pop = getattr(decider, "pop_notes", None)
        if pop is not None:
            notes.update(pop() or {})
        if action is None or action not in legal:
            if action is not None:
                notes["illegal"] = repr(action)
            illegal[p] += 1
            action = legal[fallback_rng.randrange(len(legal))]
        if notes.get("fallback"):
            fallbacks[p] += 1
        step(state, action)
        if notes:
            state._log.event.update(notes)

    result = summarize(state, seed, illegal, fallbacks, log_label if log_label is not None else log_path)
    if log_path is not None:
        write_log(log_path, state.log, result)
    return result

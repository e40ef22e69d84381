"""Rules engine and game loop."""

from .actions import (
    DEV_DECK_COMPOSITION,
    Action,
    ActionType,
    DevCard,
    action_from_json,
    action_to_json,
    describe_action,
)
from .game import MatchResult, play_game, read_log, replay, replay_log, write_log
from .rules import (
    GameOverError,
    IllegalActionError,
    apply,
    explain_illegal,
    legal_actions,
    new_game,
    road_spots,
    settlement_spots,
    step,
    trade_ratios,
)
from .state import Awaiting, Building, GameConfig, GameState, Phase, PlayerState, victory_points

__all__ = [
    "Action",
    "ActionType",
    "Awaiting",
    "Building",
    "DEV_DECK_COMPOSITION",
    "DevCard",
    "GameConfig",
    "GameOverError",
    "GameState",
    "IllegalActionError",
    "MatchResult",
    "Phase",
    "PlayerState",
    "action_from_json",
    "action_to_json",
    "apply",
    "describe_action",
    "explain_illegal",
    "legal_actions",
    "new_game",
    "play_game",
    "read_log",
    "replay",
    "replay_log",
    "road_spots",
    "settlement_spots",
    "step",
    "trade_ratios",
    "victory_points",
    "write_log",
]

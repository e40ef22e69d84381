"""Baseline players: uniform random and depth-limited alpha-beta search."""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, fields

from .engine import Action, GameState, Phase, legal_actions, settlement_spots, step, victory_points

WIN = math.inf
LOSS = -math.inf


@dataclass(frozen=True)
class HeuristicWeights:
    w_vp: float = 10.0
    w_production: float = 10.0
    w_expansion_spots: float = 0.0
    w_dev_cards: float = 0.5
    w_army: float = 0.5
    w_road_length: float = 0.0
    w_hand_penalty: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite")
        if self.w_vp <= 0:
            raise ValueError("w_vp must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "HeuristicWeights":
        return cls(**data)


DEFAULT_WEIGHTS = HeuristicWeights()


def random_decide(state: GameState, legal: list[Action], rng: random.Random) -> Action:
    return legal[rng.randrange(len(legal))]


class RandomPlayer:
    """Seeded uniform-random decider."""

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def __call__(self, state: GameState, legal: list[Action]) -> Action:
        return random_decide(state, legal, self.rng)


def production_value(state: GameState, player: int) -> float:
    """Expected resource cards per roll from ``player``'s buildings."""
    ps = state.players[player]
    robber = state.robber
    node_yield = state.ix.node_yield
    total = 0.0
    for level, nodes in ((1, ps.settlements), (2, ps.cities)):
        for n in nodes:
            for h, _, prob in node_yield[n]:
                if h != robber:
                    total += level * prob
    return total


def evaluate(state: GameState, player: int, weights: HeuristicWeights = DEFAULT_WEIGHTS) -> float:
    if state.phase is Phase.TERMINAL and state.winner is not None:
        return WIN if state.winner == player else LOSS
    ps = state.players[player]
    hand = sum(ps.resources)
    return (
        weights.w_vp * victory_points(state, player, include_hidden=False)
        + weights.w_production * production_value(state, player)
        + weights.w_expansion_spots * len(settlement_spots(state, player))
        + weights.w_dev_cards * sum(ps.dev_hidden)
        + weights.w_army * ps.knights_played
        + weights.w_road_length * state.road_lengths[player]
        - weights.w_hand_penalty * max(0, hand - 7)
    )


def _child(state: GameState, action: Action) -> GameState:
    child = state.copy()
    step(child, action, search=True)
    return child


def _alphabeta(state, depth, alpha, beta, me, weights) -> float:
    if depth == 0 or state.phase is Phase.TERMINAL:
        return evaluate(state, me, weights)
    legal = legal_actions(state)
    if state.acting_player == me:
        value = LOSS
        for a in legal:
            value = max(value, _alphabeta(_child(state, a), depth - 1, alpha, beta, me, weights))
            if value > alpha:
                alpha = value
            if alpha >= beta:
                break
        return value
    value = WIN
    for a in legal:
        value = min(value, _alphabeta(_child(state, a), depth - 1, alpha, beta, me, weights))
        if value < beta:
            beta = value
        if alpha >= beta:
            break
    return value


def alphabeta_search(
    state: GameState, depth: int = 2, weights: HeuristicWeights = DEFAULT_WEIGHTS
) -> tuple[Action | None, float]:
    """Best root action and its value; ties go to the earliest legal action."""
    me = state.acting_player
    if depth == 0 or state.phase is Phase.TERMINAL:
        return None, evaluate(state, me, weights)
    legal = legal_actions(state)
    best_action, best_value = legal[0], LOSS
    alpha = LOSS
    for a in legal:
        value = _alphabeta(_child(state, a), depth - 1, alpha, WIN, me, weights)
        if value > best_value or best_action is None:
            best_action, best_value = a, value
        if value > alpha:
            alpha = value
    return best_action, best_value


def alphabeta_decide(
    state: GameState,
    depth: int = 2,
    weights: HeuristicWeights = DEFAULT_WEIGHTS,
    legal: list[Action] | None = None,
) -> Action:
    if legal is None:
        legal = legal_actions(state)
    if len(legal) == 1:
        return legal[0]
    return alphabeta_search(state, depth, weights)[0]


def _minimax(state, depth, me, weights) -> float:
    if depth == 0 or state.phase is Phase.TERMINAL:
        return evaluate(state, me, weights)
    values = [_minimax(_child(state, a), depth - 1, me, weights) for a in legal_actions(state)]
    return max(values) if state.acting_player == me else min(values)


def minimax_oracle(
    state: GameState, depth: int, weights: HeuristicWeights = DEFAULT_WEIGHTS
) -> tuple[Action | None, float]:
    """Exhaustive depth-limited minimax with the same model and tie-break."""
    me = state.acting_player
    if depth == 0 or state.phase is Phase.TERMINAL:
        return None, evaluate(state, me, weights)
    best_action, best_value = None, LOSS
    for a in legal_actions(state):
        value = _minimax(_child(state, a), depth - 1, me, weights)
        if best_action is None or value > best_value:
            best_action, best_value = a, value
    return best_action, best_value


class AlphaBetaPlayer:
    def __init__(self, depth: int = 2, weights: HeuristicWeights = DEFAULT_WEIGHTS):
        self.depth = depth
        self.weights = weights

    def __call__(self, state: GameState, legal: list[Action]) -> Action:
        return alphabeta_decide(state, self.depth, self.weights, legal)

"""Text renderings of a game situation for language-model players.

Both renderers are pure functions of ``(state, legal)``: every collection is
emitted in a fixed sorted order so equal inputs give byte-identical text.
"""

from __future__ import annotations

from enum import Enum
from importlib import resources as _resources

from ..board import RESOURCES, token_probability
from ..engine import Action, DevCard, GameState, Phase, describe_action, trade_ratios, victory_points
from ..engine.actions import CITY_COST, DEV_CARD_COST, ROAD_COST, SETTLEMENT_COST

ANSWER_INSTRUCTION = (
    "Reply with the number of exactly one action from LEGAL ACTIONS. "
    "Put that number first in your answer."
)


class Renderer(str, Enum):
    BASE = "base"
    STRUCTURED = "structured"


def default_strategy() -> str:
    return (_resources.files("catanlab") / "assets" / "strategy_v1.txt").read_text(encoding="utf-8")


def _counts(values, names) -> str:
    return " ".join(f"{n}={values[i]}" for i, n in enumerate(names))


RES_NAMES = [r.name for r in RESOURCES]
DEV_NAMES = [c.name for c in DevCard]


def _holder(state, holder) -> str:
    return "none" if holder is None else f"P{holder}"


def _edges(state, road_ids) -> str:
    edges = sorted(state.board.topo.edges[e] for e in road_ids)
    return ",".join(f"{a}-{b}" for a, b in edges) or "-"


def _nodes(nodes) -> str:
    return ",".join(str(n) for n in sorted(nodes)) or "-"


def _check(state: GameState, legal: list[Action]) -> None:
    if state.phase is Phase.TERMINAL:
        raise ValueError("cannot render a finished game")
    if not legal:
        raise ValueError("legal action list is empty")


def _header(state: GameState) -> list[str]:
    me = state.acting_player
    return [
        f"turn={state.turn_index} phase={state.phase.value} awaiting={state.awaiting.value} "
        f"you=P{me} current=P{state.current_player} vp_target={state.config.vp_target}"
    ]


def _board_lines(state: GameState, with_odds: bool) -> list[str]:
    board = state.board
    topo = board.topo
    lines = []
    for h in topo.hexes:
        spec = board.tiles[h]
        token = "-" if spec.token is None else str(spec.token)
        robber = " ROBBER" if h == state.robber else ""
        odds = ""
        if with_odds and spec.token is not None:
            odds = f" p={token_probability(spec.token):.3f}"
        lines.append(
            f"tile ({h[0]},{h[1]}) {spec.resource.name} token={token}{odds} "
            f"nodes={_nodes(topo.hex_nodes[h])}{robber}"
        )
    for n in sorted(board.ports):
        lines.append(f"port node={n} kind={board.ports[n].value}")
    lines.append(f"bank {_counts(state.bank, RES_NAMES)} dev_cards_left={len(state.deck) - state.deck_pos}")
    lines.append(
        f"awards longest_road={_holder(state, state.longest_road_holder)} "
        f"largest_army={_holder(state, state.largest_army_holder)}"
    )
    return lines


def _own_lines(state: GameState, player: int, structured: bool) -> list[str]:
    ps = state.players[player]
    lines = [
        f"P{player} vp={victory_points(state, player, True)} "
        f"(public {victory_points(state, player, False)})",
        f"resources {_counts(ps.resources, RES_NAMES)}",
        f"dev_cards_in_hand {_counts(ps.dev_hidden, DEV_NAMES)}",
        f"dev_cards_bought_this_turn {_counts(ps.dev_bought, DEV_NAMES)}",
    ]
    lines.extend(_public_lines(state, player))
    if structured:
        income = [0.0] * 5
        for nodes, level in ((ps.settlements, 1), (ps.cities, 2)):
            for n in nodes:
                for h, res, prob in state.ix.node_yield[n]:
                    if h != state.robber:
                        income[res] += level * prob
        lines.append("expected_income_per_roll " + " ".join(f"{n}={income[i]:.2f}" for i, n in enumerate(RES_NAMES)))
        ratios = trade_ratios(state, player)
        lines.append("trade_ratios " + " ".join(f"{n}={ratios[i]}:1" for i, n in enumerate(RES_NAMES)))
    return lines


def _public_lines(state: GameState, player: int) -> list[str]:
    ps = state.players[player]
    return [
        f"dev_cards_played {_counts(ps.dev_played, DEV_NAMES)}",
        f"settlements={_nodes(ps.settlements)} cities={_nodes(ps.cities)}",
        f"roads={_edges(state, ps.road_ids)}",
        f"longest_road_length={state.road_lengths[player]}",
        f"pieces_left settlements={ps.settlements_left} cities={ps.cities_left} roads={ps.roads_left}",
    ]


def _opponent_lines(state: GameState, player: int) -> list[str]:
    ps = state.players[player]
    return [
        f"P{player} public_vp={victory_points(state, player, False)}",
        f"resource_cards={sum(ps.resources)} dev_cards_in_hand={sum(ps.dev_hidden)}",
        *_public_lines(state, player),
    ]


def _action_lines(legal: list[Action]) -> list[str]:
    return [f"{i}: {describe_action(a)}" for i, a in enumerate(legal)]


def serialize_state_base(state: GameState, legal: list[Action]) -> str:
    """Complete plain dump of the situation seen by the acting player."""
    _check(state, legal)
    me = state.acting_player
    lines = ["GAME", *_header(state), "BOARD", *_board_lines(state, False)]
    for p in range(len(state.players)):
        if p == me:
            lines += [f"PLAYER P{p} (you)", *_own_lines(state, p, False)]
        else:
            lines += [f"PLAYER P{p} (opponent)", *_opponent_lines(state, p)]
    lines += ["LEGAL ACTIONS", *_action_lines(legal), ANSWER_INSTRUCTION]
    return "\n".join(lines) + "\n"


def _cost(cost) -> str:
    return " ".join(f"{n}" for i, n in enumerate(RES_NAMES) for _ in range(cost[i]))


def serialize_state_structured(state: GameState, legal: list[Action], strategy_prompt: str = "") -> str:
    """Sectioned prompt with reading aids; the strategy text leads when given."""
    _check(state, legal)
    me = state.acting_player
    sections = []
    if strategy_prompt.strip():
        sections.append(["=== STRATEGY ===", strategy_prompt.strip()])
    sections.append(
        [
            "=== BOARD ===",
            "Each tile pays its resource to adjacent buildings when its token is rolled "
            "(settlement 1, city 2); p is the chance per roll. The robber tile pays nothing.",
            *_header(state),
            *_board_lines(state, True),
            f"costs road=[{_cost(ROAD_COST)}] settlement=[{_cost(SETTLEMENT_COST)}] "
            f"city=[{_cost(CITY_COST)}] dev_card=[{_cost(DEV_CARD_COST)}]",
        ]
    )
    sections.append(["=== YOUR POSITION ===", *_own_lines(state, me, True)])
    for p in range(len(state.players)):
        if p != me:
            sections.append(["=== OPPONENT ===", *_opponent_lines(state, p)])
    sections.append(["=== LEGAL ACTIONS ===", *_action_lines(legal)])
    sections.append([ANSWER_INSTRUCTION])
    return "\n\n".join("\n".join(s) for s in sections) + "\n"


def render(renderer: Renderer | str, state: GameState, legal: list[Action], strategy_prompt: str = "") -> str:
    if Renderer(renderer) is Renderer.BASE:
        return serialize_state_base(state, legal)
    return serialize_state_structured(state, legal, strategy_prompt)


__all__ = [
    "ANSWER_INSTRUCTION",
    "Renderer",
    "default_strategy",
    "render",
    "serialize_state_base",
    "serialize_state_structured",
]

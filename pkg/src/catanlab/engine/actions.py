"""Action values and their JSON encoding."""

from __future__ import annotations

from enum import Enum, IntEnum
from typing import Any, NamedTuple

from ..board import Resource


class DevCard(IntEnum):
    KNIGHT = 0
    VICTORY_POINT = 1
    ROAD_BUILDING = 2
    YEAR_OF_PLENTY = 3
    MONOPOLY = 4


DEV_DECK_COMPOSITION = {
    DevCard.KNIGHT: 14,
    DevCard.VICTORY_POINT: 5,
    DevCard.ROAD_BUILDING: 2,
    DevCard.YEAR_OF_PLENTY: 2,
    DevCard.MONOPOLY: 2,
}


class ActionType(Enum):
    # Declaration order is the canonical order used by legal_actions.
    ROLL = "ROLL"
    END_TURN = "END_TURN"
    DISCARD = "DISCARD"
    MOVE_ROBBER = "MOVE_ROBBER"
    BUILD_SETTLEMENT = "BUILD_SETTLEMENT"
    BUILD_CITY = "BUILD_CITY"
    BUILD_ROAD = "BUILD_ROAD"
    BUY_DEV_CARD = "BUY_DEV_CARD"
    PLAY_KNIGHT = "PLAY_KNIGHT"
    PLAY_ROAD_BUILDING = "PLAY_ROAD_BUILDING"
    PLAY_YEAR_OF_PLENTY = "PLAY_YEAR_OF_PLENTY"
    PLAY_MONOPOLY = "PLAY_MONOPOLY"
    MARITIME_TRADE = "MARITIME_TRADE"


class Action(NamedTuple):
    """One move.  ``value`` layout depends on ``type``:

    ROLL, END_TURN, BUY_DEV_CARD     None
    DISCARD                          5-tuple of counts, indexed by Resource
    MOVE_ROBBER, PLAY_KNIGHT         (hex, victim index or None)
    BUILD_SETTLEMENT, BUILD_CITY     node id
    BUILD_ROAD                       edge (a, b) with a < b
    PLAY_ROAD_BUILDING               (edge, edge or None)
    PLAY_YEAR_OF_PLENTY              (Resource, Resource), sorted
    PLAY_MONOPOLY                    Resource
    MARITIME_TRADE                   (give Resource, count given, get Resource)
    """

    type: ActionType
    value: Any = None

    def __repr__(self):
        return f"Action({self.type.name}, {self.value!r})"


ROLL = Action(ActionType.ROLL)
END_TURN = Action(ActionType.END_TURN)
BUY_DEV_CARD = Action(ActionType.BUY_DEV_CARD)

# Costs indexed by Resource: wood, brick, sheep, wheat, ore.
ROAD_COST = (1, 1, 0, 0, 0)
SETTLEMENT_COST = (1, 1, 1, 1, 0)
CITY_COST = (0, 0, 0, 2, 3)
DEV_CARD_COST = (0, 0, 1, 1, 1)


def _res(name) -> Resource:
    return Resource[name] if isinstance(name, str) else Resource(name)


def action_to_json(action: Action) -> dict:
    t, v = action.type, action.value
    if t in (ActionType.MOVE_ROBBER, ActionType.PLAY_KNIGHT):
        value = [list(v[0]), v[1]]
    elif t is ActionType.BUILD_ROAD:
        value = list(v)
    elif t is ActionType.PLAY_ROAD_BUILDING:
        value = [list(v[0]), None if v[1] is None else list(v[1])]
    elif t is ActionType.PLAY_YEAR_OF_PLENTY:
        value = [v[0].name, v[1].name]
    elif t is ActionType.PLAY_MONOPOLY:
        value = v.name
    elif t is ActionType.MARITIME_TRADE:
        value = [v[0].name, v[1], v[2].name]
    elif t is ActionType.DISCARD:
        value = list(v)
    else:
        value = v
    return {"type": t.value, "value": value}


def action_from_json(data: dict) -> Action:
    t = ActionType(data["type"])
    v = data.get("value")
    if t in (ActionType.MOVE_ROBBER, ActionType.PLAY_KNIGHT):
        value = (tuple(v[0]), v[1])
    elif t is ActionType.BUILD_ROAD:
        value = tuple(v)
    elif t is ActionType.PLAY_ROAD_BUILDING:
        value = (tuple(v[0]), None if v[1] is None else tuple(v[1]))
    elif t is ActionType.PLAY_YEAR_OF_PLENTY:
        value = (_res(v[0]), _res(v[1]))
    elif t is ActionType.PLAY_MONOPOLY:
        value = _res(v)
    elif t is ActionType.MARITIME_TRADE:
        value = (_res(v[0]), int(v[1]), _res(v[2]))
    elif t is ActionType.DISCARD:
        value = tuple(v)
    else:
        value = v
    return Action(t, value)


def describe_action(action: Action) -> str:
    """Compact human/LLM-readable rendering, e.g. ``BUILD_ROAD 12-17``."""
    t, v = action.type, action.value
    if v is None:
        return t.value
    if t in (ActionType.MOVE_ROBBER, ActionType.PLAY_KNIGHT):
        victim = "nobody" if v[1] is None else f"P{v[1]}"
        return f"{t.value} tile=({v[0][0]},{v[0][1]}) steal_from={victim}"
    if t is ActionType.BUILD_ROAD:
        return f"{t.value} {v[0]}-{v[1]}"
    if t is ActionType.PLAY_ROAD_BUILDING:
        second = "" if v[1] is None else f" {v[1][0]}-{v[1][1]}"
        return f"{t.value} {v[0][0]}-{v[0][1]}{second}"
    if t is ActionType.PLAY_YEAR_OF_PLENTY:
        return f"{t.value} {v[0].name} {v[1].name}"
    if t is ActionType.PLAY_MONOPOLY:
        return f"{t.value} {v.name}"
    if t is ActionType.MARITIME_TRADE:
        return f"{t.value} give={v[1]}x{v[0].name} get=1x{v[2].name}"
    if t is ActionType.DISCARD:
        parts = [f"{n}x{Resource(i).name}" for i, n in enumerate(v) if n]
        return f"{t.value} " + " ".join(parts)
    return f"{t.value} {v}"

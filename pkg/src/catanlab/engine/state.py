"""Game configuration and state containers."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

from ..board import RESOURCES, MapTemplate
from .actions import DevCard


class Phase(Enum):
    SETUP = "SETUP"
    PLAY = "PLAY"
    TERMINAL = "TERMINAL"


class Awaiting(Enum):
    SETUP_SETTLEMENT = "SETUP_SETTLEMENT"
    SETUP_ROAD = "SETUP_ROAD"
    ROLL = "ROLL"
    MAIN = "MAIN"
    DISCARD = "DISCARD"
    ROBBER_PLACEMENT = "ROBBER_PLACEMENT"
    NONE = "NONE"


class Building(Enum):
    SETTLEMENT = "SETTLEMENT"
    CITY = "CITY"


NUM_PLAYERS = 2
BANK_START = 19
SETUP_ORDER = (0, 1, 1, 0)


@dataclass(frozen=True)
class GameConfig:
    template: MapTemplate = MapTemplate.FULL
    vp_target: int = 10
    max_turns: int = 500
    discard_threshold: int = 7
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "template", MapTemplate(self.template))
        if self.vp_target < 3:
            raise ValueError("vp_target must be >= 3")
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")

    def to_dict(self) -> dict:
        return {
            "template": self.template.value,
            "vp_target": self.vp_target,
            "max_turns": self.max_turns,
            "discard_threshold": self.discard_threshold,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameConfig":
        return cls(**data)


class PlayerState:
    __slots__ = (
        "resources",
        "dev_hidden",
        "dev_played",
        "dev_bought",
        "settlements",
        "cities",
        "road_ids",
        "settlements_left",
        "cities_left",
        "roads_left",
    )

    def __init__(self):
        self.resources = [0, 0, 0, 0, 0]
        self.dev_hidden = [0, 0, 0, 0, 0]
        self.dev_played = [0, 0, 0, 0, 0]
        self.dev_bought = [0, 0, 0, 0, 0]
        self.settlements: set[int] = set()
        self.cities: set[int] = set()
        self.road_ids: set[int] = set()
        self.settlements_left = 5
        self.cities_left = 4
        self.roads_left = 15

    def copy(self) -> "PlayerState":
        p = PlayerState.__new__(PlayerState)
        p.resources = self.resources[:]
        p.dev_hidden = self.dev_hidden[:]
        p.dev_played = self.dev_played[:]
        p.dev_bought = self.dev_bought[:]
        p.settlements = set(self.settlements)
        p.cities = set(self.cities)
        p.road_ids = set(self.road_ids)
        p.settlements_left = self.settlements_left
        p.cities_left = self.cities_left
        p.roads_left = self.roads_left
        return p

    @property
    def knights_played(self) -> int:
        return self.dev_played[DevCard.KNIGHT]

    @property
    def hand_size(self) -> int:
        return sum(self.resources)

    @property
    def buildings(self) -> dict[int, Building]:
        out = {n: Building.SETTLEMENT for n in self.settlements}
        out.update((n, Building.CITY) for n in self.cities)
        return dict(sorted(out.items()))

    def to_dict(self, topo) -> dict:
        return {
            "resources": {r.name: self.resources[r] for r in RESOURCES},
            "dev_hidden": {c.name: self.dev_hidden[c] for c in DevCard},
            "dev_played": {c.name: self.dev_played[c] for c in DevCard},
            "dev_bought_this_turn": {c.name: self.dev_bought[c] for c in DevCard},
            "settlements": sorted(self.settlements),
            "cities": sorted(self.cities),
            "roads": sorted(list(topo.edges[e]) for e in self.road_ids),
            "pieces_left": {
                "settlements": self.settlements_left,
                "cities": self.cities_left,
                "roads": self.roads_left,
            },
        }


class _LogCell:
    """Persistent cons list so copies of a state share their log prefix."""

    __slots__ = ("event", "prev", "size")

    def __init__(self, event, prev):
        self.event = event
        self.prev = prev
        self.size = 1 if prev is None else prev.size + 1


class GameState:
    """Authoritative game situation.

    Treat instances as immutable values: ``rules.apply`` returns a fresh
    state.  The engine itself mutates private copies in place.
    """

    __slots__ = (
        "config",
        "board",
        "ix",
        "players",
        "bank",
        "deck",
        "deck_pos",
        "phase",
        "turn_index",
        "current_player",
        "awaiting",
        "discard_queue",
        "longest_road_holder",
        "largest_army_holder",
        "road_lengths",
        "rng_seed",
        "rng_counter",
        "robber",
        "node_owner",
        "node_level",
        "edge_owner",
        "setup_step",
        "setup_node",
        "dev_played_this_turn",
        "winner",
        "turn_capped",
        "_log",
    )

    def copy(self) -> "GameState":
        s = GameState.__new__(GameState)
        s.config = self.config
        s.board = self.board
        s.ix = self.ix
        s.players = [p.copy() for p in self.players]
        s.bank = self.bank[:]
        s.deck = self.deck
        s.deck_pos = self.deck_pos
        s.phase = self.phase
        s.turn_index = self.turn_index
        s.current_player = self.current_player
        s.awaiting = self.awaiting
        s.discard_queue = self.discard_queue
        s.longest_road_holder = self.longest_road_holder
        s.largest_army_holder = self.largest_army_holder
        s.road_lengths = self.road_lengths[:]
        s.rng_seed = self.rng_seed
        s.rng_counter = self.rng_counter
        s.robber = self.robber
        s.node_owner = self.node_owner[:]
        s.node_level = self.node_level[:]
        s.edge_owner = self.edge_owner[:]
        s.setup_step = self.setup_step
        s.setup_node = self.setup_node
        s.dev_played_this_turn = self.dev_played_this_turn
        s.winner = self.winner
        s.turn_capped = self.turn_capped
        s._log = self._log
        return s

    # -- views ---------------------------------------------------------------

    @property
    def dev_deck(self) -> list[DevCard]:
        return list(self.deck[self.deck_pos :])

    @property
    def acting_player(self) -> int:
        if self.awaiting is Awaiting.DISCARD:
            return self.discard_queue[0]
        return self.current_player

    @property
    def log(self) -> list[dict]:
        out = []
        cell = self._log
        while cell is not None:
            out.append(cell.event)
            cell = cell.prev
        out.reverse()
        return out

    @property
    def log_size(self) -> int:
        return 0 if self._log is None else self._log.size

    def append_event(self, event: dict) -> None:
        self._log = _LogCell(event, self._log)

    def draw(self, n: int) -> int:
        """Next value in [0, n) from the state's deterministic stream."""
        digest = hashlib.blake2b(
            f"{self.rng_seed}:{self.rng_counter}".encode(), digest_size=8
        ).digest()
        self.rng_counter += 1
        return int.from_bytes(digest, "big") % n

    def to_dict(self) -> dict:
        """Canonical, JSON-ready snapshot; equal dicts mean equal states."""
        topo = self.board.topo
        return {
            "config": self.config.to_dict(),
            "board_seed": self.board.seed,
            "players": [p.to_dict(topo) for p in self.players],
            "bank": {r.name: self.bank[r] for r in RESOURCES},
            "dev_deck": [c.name for c in self.dev_deck],
            "phase": self.phase.value,
            "turn_index": self.turn_index,
            "current_player": self.current_player,
            "awaiting": self.awaiting.value,
            "discard_queue": list(self.discard_queue),
            "longest_road_holder": self.longest_road_holder,
            "largest_army_holder": self.largest_army_holder,
            "road_lengths": list(self.road_lengths),
            "rng": [self.rng_seed, self.rng_counter],
            "robber": list(self.robber),
            "setup": [self.setup_step, self.setup_node],
            "dev_played_this_turn": self.dev_played_this_turn,
            "winner": self.winner,
            "turn_capped": self.turn_capped,
            "log_size": self.log_size,
        }

    def __eq__(self, other):
        if not isinstance(other, GameState):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self):
        return (
            f"GameState(phase={self.phase.value}, turn={self.turn_index}, "
            f"player={self.acting_player}, awaiting={self.awaiting.value})"
        )


def victory_points(state: GameState, player: int, include_hidden: bool = True) -> int:
    if player not in (0, 1):
        raise ValueError(f"invalid player {player!r}")
    p = state.players[player]
    vp = len(p.settlements) + 2 * len(p.cities)
    if state.longest_road_holder == player:
        vp += 2
    if state.largest_army_holder == player:
        vp += 2
    if include_hidden:
        vp += p.dev_hidden[DevCard.VICTORY_POINT]
    return vp

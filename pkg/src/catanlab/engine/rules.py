"""Rules: game creation, legal-move generation and state transitions."""

from __future__ import annotations

import random
from itertools import combinations_with_replacement

from ..board import RESOURCES, Board, Resource, generate_board, longest_trail, token_probability
from ..seeding import derive_seed
from .actions import (
    BUY_DEV_CARD,
    CITY_COST,
    DEV_CARD_COST,
    DEV_DECK_COMPOSITION,
    END_TURN,
    ROAD_COST,
    ROLL,
    SETTLEMENT_COST,
    Action,
    ActionType,
    DevCard,
)
from .state import (
    BANK_START,
    SETUP_ORDER,
    Awaiting,
    GameConfig,
    GameState,
    Phase,
    PlayerState,
    victory_points,
)

MAX_DISCARD_OPTIONS = 64

W, B, S, H, O = (int(r) for r in RESOURCES)


class GameOverError(RuntimeError):
    """Raised when asking for moves in a finished game."""


class IllegalActionError(ValueError):
    """Raised by ``apply`` for an action outside ``legal_actions``."""

    def __init__(self, action: Action, rule: str):
        super().__init__(f"illegal {action!r}: {rule}")
        self.action = action
        self.rule = rule


class BoardIndex:
    """Per-board lookup tables shared by every state of one game."""

    def __init__(self, board: Board):
        topo = board.topo
        self.topo = topo
        self.edges = topo.edges
        self.edge_index = topo.edge_index
        self.neighbors = topo.node_neighbors
        self.node_edges = topo.node_edges
        self.hexes = topo.hexes
        self.hex_nodes = topo.hex_nodes
        self.tiles = board.tiles
        self.roll_table: dict[int, list[tuple]] = {}
        for h, spec in board.tiles.items():
            if spec.token is not None:
                self.roll_table.setdefault(spec.token, []).append(
                    (h, int(spec.resource), topo.hex_nodes[h])
                )
        # node -> ((hex, resource, probability), ...) for producing tiles
        self.node_yield = tuple(
            tuple(
                (h, int(board.tiles[h].resource), token_probability(board.tiles[h].token))
                for h in topo.node_hexes[n]
                if board.tiles[h].token is not None
            )
            for n in topo.nodes
        )
        self.ports = board.ports
        self.road_actions = tuple(Action(ActionType.BUILD_ROAD, e) for e in topo.edges)
        self.settlement_actions = tuple(
            Action(ActionType.BUILD_SETTLEMENT, n) for n in topo.nodes
        )
        self.city_actions = tuple(Action(ActionType.BUILD_CITY, n) for n in topo.nodes)


def _deal(hand, bank, cost, sign=1):
    for i in range(5):
        c = cost[i]
        if c:
            hand[i] -= sign * c
            bank[i] += sign * c


def _can_afford(hand, cost) -> bool:
    return all(hand[i] >= cost[i] for i in range(5))


def new_game(config: GameConfig, seed: int | None = None) -> GameState:
    """Fresh game in the SETUP phase with a board generated from ``seed``."""
    if seed is None:
        seed = config.seed
    board = generate_board(config.template, seed)
    deck = [card for card, n in DEV_DECK_COMPOSITION.items() for _ in range(n)]
    random.Random(derive_seed(seed, "dev-deck")).shuffle(deck)
    n_nodes = len(board.topo.nodes)

    s = GameState.__new__(GameState)
    s.config = config
    s.board = board
    s.ix = BoardIndex(board)
    s.players = [PlayerState(), PlayerState()]
    s.bank = [BANK_START] * 5
    s.deck = tuple(deck)
    s.deck_pos = 0
    s.phase = Phase.SETUP
    s.turn_index = 0
    s.current_player = SETUP_ORDER[0]
    s.awaiting = Awaiting.SETUP_SETTLEMENT
    s.discard_queue = ()
    s.longest_road_holder = None
    s.largest_army_holder = None
    s.road_lengths = [0, 0]
    s.rng_seed = derive_seed(seed, "dice")
    s.rng_counter = 0
    s.robber = board.robber_tile
    s.node_owner = [-1] * n_nodes
    s.node_level = [0] * n_nodes
    s.edge_owner = [-1] * len(board.topo.edges)
    s.setup_step = 0
    s.setup_node = None
    s.dev_played_this_turn = False
    s.winner = None
    s.turn_capped = False
    s._log = None
    return s


# ---------------------------------------------------------------------------
# Move generation
# ---------------------------------------------------------------------------


def _network_nodes(s: GameState, p: int) -> set[int]:
    """Nodes a new road of ``p`` may start from."""
    ps = s.players[p]
    owner = s.node_owner
    edges = s.ix.edges
    nodes = ps.settlements | ps.cities
    for e in ps.road_ids:
        a, b = edges[e]
        if owner[a] == -1 or owner[a] == p:
            nodes.add(a)
        if owner[b] == -1 or owner[b] == p:
            nodes.add(b)
    return nodes


def road_spots(s: GameState, p: int) -> set[int]:
    """Edge indices where ``p`` may place a road (ignoring cost)."""
    edge_owner = s.edge_owner
    node_edges = s.ix.node_edges
    return {
        e
        for n in _network_nodes(s, p)
        for e in node_edges[n]
        if edge_owner[e] == -1
    }


def _distance_ok(s: GameState, n: int) -> bool:
    owner = s.node_owner
    if owner[n] != -1:
        return False
    for m in s.ix.neighbors[n]:
        if owner[m] != -1:
            return False
    return True


def settlement_spots(s: GameState, p: int) -> list[int]:
    """Nodes where ``p`` may build a settlement (ignoring cost), sorted."""
    edges = s.ix.edges
    touched = set()
    for e in s.players[p].road_ids:
        touched.update(edges[e])
    return sorted(n for n in touched if _distance_ok(s, n))


def trade_ratios(s: GameState, p: int) -> list[int]:
    ps = s.players[p]
    ratios = [4, 4, 4, 4, 4]
    ports = s.ix.ports
    if not ports:
        return ratios
    for n in ps.settlements | ps.cities:
        kind = ports.get(n)
        if kind is None:
            continue
        res = kind.resource
        if res is None:
            ratios = [min(r, 3) for r in ratios]
        else:
            ratios[res] = 2
    return ratios


def _robber_moves(s: GameState, p: int, kind: ActionType) -> list[Action]:
    out = []
    owner = s.node_owner
    players = s.players
    for h in s.ix.hexes:
        if h == s.robber:
            continue
        victims = sorted(
            {
                owner[n]
                for n in s.ix.hex_nodes[h]
                if owner[n] != -1 and owner[n] != p and sum(players[owner[n]].resources) > 0
            }
        )
        if victims:
            out.extend(Action(kind, (h, v)) for v in victims)
        else:
            out.append(Action(kind, (h, None)))
    return out


def _road_building_moves(s: GameState, p: int) -> list[Action]:
    ps = s.players[p]
    if ps.roads_left < 1:
        return []
    edges = s.ix.edges
    first = sorted(road_spots(s, p))
    pairs = set()
    singles = []
    for e1 in first:
        follow = ()
        if ps.roads_left >= 2:
            s.edge_owner[e1] = p
            ps.road_ids.add(e1)
            follow = road_spots(s, p)
            ps.road_ids.discard(e1)
            s.edge_owner[e1] = -1
        if not follow:
            singles.append(e1)
        for e2 in follow:
            pairs.add((e1, e2) if e1 < e2 else (e2, e1))
    moves = [(e, None) for e in singles] + sorted(pairs)
    moves.sort(key=lambda m: (m[0], -1 if m[1] is None else m[1]))
    return [
        Action(
            ActionType.PLAY_ROAD_BUILDING,
            (edges[a], None if b is None else edges[b]),
        )
        for a, b in moves
    ]


def _playable(ps: PlayerState, card: DevCard) -> bool:
    return ps.dev_hidden[card] - ps.dev_bought[card] > 0


def _dev_moves(s: GameState, p: int) -> list[Action]:
    if s.dev_played_this_turn:
        return []
    ps = s.players[p]
    out: list[Action] = []
    if _playable(ps, DevCard.KNIGHT):
        out.extend(_robber_moves(s, p, ActionType.PLAY_KNIGHT))
    if _playable(ps, DevCard.ROAD_BUILDING):
        out.extend(_road_building_moves(s, p))
    if _playable(ps, DevCard.YEAR_OF_PLENTY):
        bank = s.bank
        for a, b in combinations_with_replacement(RESOURCES, 2):
            if (a == b and bank[a] >= 2) or (a != b and bank[a] >= 1 and bank[b] >= 1):
                out.append(Action(ActionType.PLAY_YEAR_OF_PLENTY, (a, b)))
    if _playable(ps, DevCard.MONOPOLY):
        out.extend(Action(ActionType.PLAY_MONOPOLY, r) for r in RESOURCES)
    return out


def _discard_moves(hand: list[int], k: int) -> list[Action]:
    options: list[tuple] = []
    picked = [0] * 5
    remaining = [sum(hand[i:]) for i in range(5)] + [0]

    def rec(i: int, left: int) -> None:
        if i == 4:
            if left <= hand[4]:
                picked[4] = left
                options.append(tuple(picked))
            return
        lo = max(0, left - remaining[i + 1])
        for x in range(lo, min(hand[i], left) + 1):
            picked[i] = x
            rec(i + 1, left - x)

    rec(0, k)
    if len(options) > MAX_DISCARD_OPTIONS:
        n = len(options)
        step = (n - 1) / (MAX_DISCARD_OPTIONS - 1)
        options = [options[round(j * step)] for j in range(MAX_DISCARD_OPTIONS)]
    return [Action(ActionType.DISCARD, o) for o in options]


def _main_moves(s: GameState, p: int) -> list[Action]:
    ps = s.players[p]
    hand = ps.resources
    ix = s.ix
    out = [END_TURN]
    w, b, sh, wh, o = hand
    if ps.settlements_left and w and b and sh and wh:
        out.extend(ix.settlement_actions[n] for n in settlement_spots(s, p))
    if ps.cities_left and wh >= 2 and o >= 3:
        out.extend(ix.city_actions[n] for n in sorted(ps.settlements))
    if ps.roads_left and w and b:
        out.extend(ix.road_actions[e] for e in sorted(road_spots(s, p)))
    if s.deck_pos < len(s.deck) and sh and wh and o:
        out.append(BUY_DEV_CARD)
    out.extend(_dev_moves(s, p))
    ratios = trade_ratios(s, p)
    bank = s.bank
    for give in RESOURCES:
        k = ratios[give]
        if hand[give] >= k:
            for get in RESOURCES:
                if get != give and bank[get] > 0:
                    out.append(Action(ActionType.MARITIME_TRADE, (give, k, get)))
    return out


def legal_actions(state: GameState) -> list[Action]:
    """Every legal action for the acting player, in canonical order."""
    s = state
    aw = s.awaiting
    if s.phase is Phase.TERMINAL:
        raise GameOverError("game is over")
    p = s.acting_player
    if aw is Awaiting.MAIN:
        return _main_moves(s, p)
    if aw is Awaiting.ROLL:
        return [ROLL] + _dev_moves(s, p)
    if aw is Awaiting.DISCARD:
        hand = s.players[p].resources
        return _discard_moves(hand, sum(hand) // 2)
    if aw is Awaiting.ROBBER_PLACEMENT:
        return _robber_moves(s, p, ActionType.MOVE_ROBBER)
    if aw is Awaiting.SETUP_SETTLEMENT:
        return [s.ix.settlement_actions[n] for n in s.ix.topo.nodes if _distance_ok(s, n)]
    if aw is Awaiting.SETUP_ROAD:
        return [
            s.ix.road_actions[e]
            for e in s.ix.node_edges[s.setup_node]
            if s.edge_owner[e] == -1
        ]
    raise GameOverError(f"no moves while awaiting {aw.value}")


# ---------------------------------------------------------------------------
# Transitions
# ---------------------------------------------------------------------------


def _refresh_road_length(s: GameState, p: int) -> None:
    ps = s.players[p]
    if not ps.road_ids:
        s.road_lengths[p] = 0
        return
    edges = s.ix.edges
    owner = s.node_owner
    trail = [edges[e] for e in ps.road_ids]
    blocked = {n for e in trail for n in e if owner[n] != -1 and owner[n] != p}
    s.road_lengths[p] = longest_trail(trail, blocked)


def _update_longest_road(s: GameState) -> None:
    lengths = s.road_lengths
    best = max(lengths)
    h = s.longest_road_holder
    if h is not None and lengths[h] >= 5 and lengths[h] >= best:
        return
    if best >= 5 and lengths.count(best) == 1:
        s.longest_road_holder = lengths.index(best)
    else:
        s.longest_road_holder = None


def _update_largest_army(s: GameState) -> None:
    knights = [ps.dev_played[DevCard.KNIGHT] for ps in s.players]
    best = max(knights)
    h = s.largest_army_holder
    if h is not None and knights[h] >= best:
        return
    if best >= 3 and knights.count(best) == 1:
        s.largest_army_holder = knights.index(best)


def _place_road(s: GameState, p: int, e: int) -> None:
    s.edge_owner[e] = p
    ps = s.players[p]
    ps.road_ids.add(e)
    ps.roads_left -= 1
    _refresh_road_length(s, p)
    _update_longest_road(s)


def _place_settlement(s: GameState, p: int, n: int) -> None:
    s.node_owner[n] = p
    s.node_level[n] = 1
    ps = s.players[p]
    ps.settlements.add(n)
    ps.settlements_left -= 1
    # A new settlement can cut an opponent's road through this node.
    for q in range(len(s.players)):
        if q != p and any(s.edge_owner[e] == q for e in s.ix.node_edges[n]):
            _refresh_road_length(s, q)
            _update_longest_road(s)


def _steal(s: GameState, victim: int, search: bool):
    if search:
        return None
    hand = s.players[victim].resources
    total = sum(hand)
    if total == 0:
        return None
    k = s.draw(total)
    for r in range(5):
        if k < hand[r]:
            hand[r] -= 1
            s.players[s.current_player].resources[r] += 1
            return Resource(r)
        k -= hand[r]
    raise AssertionError("unreachable")


def _produce(s: GameState, dice: int) -> list[list[int]]:
    n_players = len(s.players)
    demand = [[0] * 5 for _ in range(n_players)]
    owner = s.node_owner
    level = s.node_level
    for h, res, nodes in s.ix.roll_table.get(dice, ()):
        if h == s.robber:
            continue
        for n in nodes:
            o = owner[n]
            if o != -1:
                demand[o][res] += level[n]
    bank = s.bank
    paid = [[0] * 5 for _ in range(n_players)]
    for r in range(5):
        claims = [q for q in range(n_players) if demand[q][r]]
        if not claims:
            continue
        total = sum(demand[q][r] for q in claims)
        if total <= bank[r]:
            for q in claims:
                paid[q][r] = demand[q][r]
        elif len(claims) == 1:
            paid[claims[0]][r] = bank[r]
        for q in claims:
            amount = paid[q][r]
            s.players[q].resources[r] += amount
            bank[r] -= amount
    return paid


def _expected_produce(s: GameState) -> None:
    owner = s.node_owner
    level = s.node_level
    for n, yields in enumerate(s.ix.node_yield):
        o = owner[n]
        if o == -1:
            continue
        hand = s.players[o].resources
        for h, res, prob in yields:
            if h != s.robber:
                hand[res] += level[n] * prob


def step(s: GameState, action: Action, search: bool = False) -> None:
    """Apply ``action`` to ``s`` in place; the caller guarantees legality.

    With ``search=True`` chance is replaced by its expectation: a roll
    credits every building its probability-weighted (fractional) yield, a 7
    is never rolled, and robber steals are skipped.  Nothing is logged.
    """
    t = action.type
    v = action.value
    p = s.acting_player
    ps = s.players[p]
    ix = s.ix
    extra = None

    if t is ActionType.ROLL:
        if search:
            _expected_produce(s)
            s.awaiting = Awaiting.MAIN
        else:
            x = s.draw(36)
            d1, d2 = x // 6 + 1, x % 6 + 1
            total = d1 + d2
            extra = {"dice": [d1, d2]}
            if total == 7:
                limit = s.config.discard_threshold
                n = len(s.players)
                queue = tuple(
                    q
                    for q in ((p + i) % n for i in range(n))
                    if sum(s.players[q].resources) > limit
                )
                if queue:
                    s.awaiting = Awaiting.DISCARD
                    s.discard_queue = queue
                else:
                    s.awaiting = Awaiting.ROBBER_PLACEMENT
            else:
                extra["payouts"] = _produce(s, total)
                s.awaiting = Awaiting.MAIN

    elif t is ActionType.END_TURN:
        ps.dev_bought = [0, 0, 0, 0, 0]
        s.dev_played_this_turn = False
        s.turn_index += 1
        s.current_player = (s.current_player + 1) % len(s.players)
        s.awaiting = Awaiting.ROLL
        if s.turn_index >= s.config.max_turns:
            s.phase = Phase.TERMINAL
            s.awaiting = Awaiting.NONE
            s.turn_capped = True

    elif t is ActionType.BUILD_ROAD:
        e = ix.edge_index[v]
        if s.phase is Phase.SETUP:
            _place_road(s, p, e)
            s.setup_step += 1
            s.setup_node = None
            if s.setup_step == len(SETUP_ORDER):
                s.phase = Phase.PLAY
                s.current_player = 0
                s.awaiting = Awaiting.ROLL
            else:
                s.current_player = SETUP_ORDER[s.setup_step]
                s.awaiting = Awaiting.SETUP_SETTLEMENT
        else:
            _deal(ps.resources, s.bank, ROAD_COST)
            _place_road(s, p, e)

    elif t is ActionType.BUILD_SETTLEMENT:
        if s.phase is Phase.SETUP:
            _place_settlement(s, p, v)
            s.setup_node = v
            s.awaiting = Awaiting.SETUP_ROAD
            if s.setup_step >= 2:
                granted = [0] * 5
                for _, res, _ in ix.node_yield[v]:
                    if s.bank[res] > 0:
                        s.bank[res] -= 1
                        ps.resources[res] += 1
                        granted[res] += 1
                extra = {"granted": granted}
        else:
            _deal(ps.resources, s.bank, SETTLEMENT_COST)
            _place_settlement(s, p, v)

    elif t is ActionType.BUILD_CITY:
        _deal(ps.resources, s.bank, CITY_COST)
        ps.settlements.discard(v)
        ps.cities.add(v)
        ps.settlements_left += 1
        ps.cities_left -= 1
        s.node_level[v] = 2

    elif t is ActionType.BUY_DEV_CARD:
        _deal(ps.resources, s.bank, DEV_CARD_COST)
        card = s.deck[s.deck_pos]
        s.deck_pos += 1
        ps.dev_hidden[card] += 1
        ps.dev_bought[card] += 1

    elif t is ActionType.MARITIME_TRADE:
        give, k, get = v
        ps.resources[give] -= k
        s.bank[give] += k
        ps.resources[get] += 1
        s.bank[get] -= 1

    elif t is ActionType.DISCARD:
        for r in range(5):
            ps.resources[r] -= v[r]
            s.bank[r] += v[r]
        s.discard_queue = s.discard_queue[1:]
        if not s.discard_queue:
            s.awaiting = Awaiting.ROBBER_PLACEMENT

    elif t is ActionType.MOVE_ROBBER or t is ActionType.PLAY_KNIGHT:
        if t is ActionType.PLAY_KNIGHT:
            ps.dev_hidden[DevCard.KNIGHT] -= 1
            ps.dev_played[DevCard.KNIGHT] += 1
            s.dev_played_this_turn = True
            _update_largest_army(s)
        else:
            s.awaiting = Awaiting.MAIN
        tile, victim = v
        s.robber = tile
        if victim is not None:
            stolen = _steal(s, victim, search)
            if stolen is not None:
                extra = {"stolen": stolen.name}

    elif t is ActionType.PLAY_ROAD_BUILDING:
        ps.dev_hidden[DevCard.ROAD_BUILDING] -= 1
        ps.dev_played[DevCard.ROAD_BUILDING] += 1
        s.dev_played_this_turn = True
        first, second = v
        e1 = ix.edge_index[first]
        if second is None:
            _place_road(s, p, e1)
        else:
            e2 = ix.edge_index[second]
            if e1 not in road_spots(s, p):
                e1, e2 = e2, e1
            _place_road(s, p, e1)
            _place_road(s, p, e2)

    elif t is ActionType.PLAY_YEAR_OF_PLENTY:
        ps.dev_hidden[DevCard.YEAR_OF_PLENTY] -= 1
        ps.dev_played[DevCard.YEAR_OF_PLENTY] += 1
        s.dev_played_this_turn = True
        for r in v:
            s.bank[r] -= 1
            ps.resources[r] += 1

    elif t is ActionType.PLAY_MONOPOLY:
        ps.dev_hidden[DevCard.MONOPOLY] -= 1
        ps.dev_played[DevCard.MONOPOLY] += 1
        s.dev_played_this_turn = True
        taken = 0
        for q, other in enumerate(s.players):
            if q != p:
                taken += other.resources[v]
                other.resources[v] = 0
        ps.resources[v] += taken
        extra = {"taken": taken}

    else:  # pragma: no cover - exhaustive over ActionType
        raise IllegalActionError(action, f"unknown action type {t!r}")

    if s.phase is Phase.PLAY:
        cur = s.current_player
        if victory_points(s, cur, True) >= s.config.vp_target:
            s.phase = Phase.TERMINAL
            s.awaiting = Awaiting.NONE
            s.winner = cur

    if not search:
        event = {"turn": s.turn_index if t is not ActionType.END_TURN else s.turn_index - 1,
                 "player": p, "action": action}
        if extra:
            event.update(extra)
        event["vp_after"] = [victory_points(s, q, True) for q in range(len(s.players))]
        s.append_event(event)


def apply(state: GameState, action: Action) -> GameState:
    """Pure transition: returns a new state, ``state`` is left untouched."""
    if state.phase is Phase.TERMINAL:
        raise IllegalActionError(action, "game is over (terminal state is absorbing)")
    if action not in legal_actions(state):
        raise IllegalActionError(action, explain_illegal(state, action))
    new = state.copy()
    step(new, action)
    return new


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

_PHASE_TYPES = {
    Awaiting.SETUP_SETTLEMENT: {ActionType.BUILD_SETTLEMENT},
    Awaiting.SETUP_ROAD: {ActionType.BUILD_ROAD},
    Awaiting.ROLL: {
        ActionType.ROLL,
        ActionType.PLAY_KNIGHT,
        ActionType.PLAY_ROAD_BUILDING,
        ActionType.PLAY_YEAR_OF_PLENTY,
        ActionType.PLAY_MONOPOLY,
    },
    Awaiting.DISCARD: {ActionType.DISCARD},
    Awaiting.ROBBER_PLACEMENT: {ActionType.MOVE_ROBBER},
    Awaiting.MAIN: set(ActionType) - {ActionType.ROLL, ActionType.DISCARD, ActionType.MOVE_ROBBER},
}

_DEV_FOR = {
    ActionType.PLAY_KNIGHT: DevCard.KNIGHT,
    ActionType.PLAY_ROAD_BUILDING: DevCard.ROAD_BUILDING,
    ActionType.PLAY_YEAR_OF_PLENTY: DevCard.YEAR_OF_PLENTY,
    ActionType.PLAY_MONOPOLY: DevCard.MONOPOLY,
}

_COSTS = {
    ActionType.BUILD_ROAD: ROAD_COST,
    ActionType.BUILD_SETTLEMENT: SETTLEMENT_COST,
    ActionType.BUILD_CITY: CITY_COST,
    ActionType.BUY_DEV_CARD: DEV_CARD_COST,
}


def explain_illegal(state: GameState, action: Action) -> str:
    """Name the first rule that ``action`` breaks in ``state``."""
    s = state
    if s.phase is Phase.TERMINAL:
        return "game is over (terminal state is absorbing)"
    if not isinstance(action, Action) or not isinstance(action.type, ActionType):
        return "not an Action value"
    t, v = action.type, action.value
    aw = s.awaiting
    if t not in _PHASE_TYPES.get(aw, set()):
        return f"{t.value} is not allowed while awaiting {aw.value}"
    p = s.acting_player
    ps = s.players[p]
    setup = s.phase is Phase.SETUP
    if not setup and t in _COSTS and not _can_afford(ps.resources, _COSTS[t]):
        return f"cannot afford {t.value}"
    if t in _DEV_FOR:
        card = _DEV_FOR[t]
        if s.dev_played_this_turn:
            return "only one development card may be played per turn"
        if ps.dev_hidden[card] == 0:
            return f"no {card.name} card in hand"
        if not _playable(ps, card):
            return f"{card.name} bought this turn cannot be played yet"
    try:
        if t is ActionType.BUILD_SETTLEMENT:
            if ps.settlements_left == 0:
                return "no settlement pieces left"
            if not isinstance(v, int) or not 0 <= v < len(s.node_owner):
                return f"unknown node {v!r}"
            if s.node_owner[v] != -1:
                return "node is occupied"
            if not _distance_ok(s, v):
                return "distance rule: adjacent node is occupied"
            if not setup and v not in settlement_spots(s, p):
                return "settlement must touch one of your roads"
        elif t is ActionType.BUILD_CITY:
            if ps.cities_left == 0:
                return "no city pieces left"
            if v not in ps.settlements:
                return "city must upgrade one of your settlements"
        elif t is ActionType.BUILD_ROAD:
            if ps.roads_left == 0:
                return "no road pieces left"
            if v not in s.ix.edge_index:
                return f"unknown edge {v!r}"
            e = s.ix.edge_index[v]
            if s.edge_owner[e] != -1:
                return "edge is occupied"
            if setup and s.setup_node not in v:
                return "setup road must touch the settlement just placed"
            if not setup and e not in road_spots(s, p):
                return "road must connect to your network"
        elif t is ActionType.BUY_DEV_CARD:
            if s.deck_pos >= len(s.deck):
                return "development deck is empty"
        elif t in (ActionType.MOVE_ROBBER, ActionType.PLAY_KNIGHT):
            tile, victim = v
            if tile not in s.ix.tiles:
                return f"unknown tile {tile!r}"
            if tile == s.robber:
                return "robber must move to a different tile"
            if victim is not None:
                if victim == p or victim not in range(len(s.players)):
                    return "invalid robbery victim"
                if not any(s.node_owner[n] == victim for n in s.ix.hex_nodes[tile]):
                    return "victim has no building on that tile"
                if sum(s.players[victim].resources) == 0:
                    return "victim has no resources to steal"
            return "a stealable victim must be chosen"
        elif t is ActionType.DISCARD:
            need = sum(ps.resources) // 2
            if len(v) != 5 or sum(v) != need:
                return f"must discard exactly {need} cards"
            if any(x < 0 or x > have for x, have in zip(v, ps.resources)):
                return "cannot discard cards you do not hold"
        elif t is ActionType.MARITIME_TRADE:
            give, k, get = v
            if give == get:
                return "cannot trade a resource for itself"
            if k != trade_ratios(s, p)[give]:
                return f"trade ratio for {Resource(give).name} is {trade_ratios(s, p)[give]}:1"
            if ps.resources[give] < k:
                return f"not enough {Resource(give).name} to trade"
            if s.bank[get] == 0:
                return f"bank has no {Resource(get).name}"
        elif t is ActionType.PLAY_YEAR_OF_PLENTY:
            a, b = v
            if a > b:
                return "resources must be listed in canonical order"
            need = [0] * 5
            need[a] += 1
            need[b] += 1
            if any(s.bank[r] < need[r] for r in range(5)):
                return "bank cannot supply the requested resources"
        elif t is ActionType.PLAY_ROAD_BUILDING:
            if ps.roads_left == 0:
                return "no road pieces left"
            return "roads must be free edges connected to your network"
        elif t is ActionType.PLAY_MONOPOLY:
            if Resource(v) not in RESOURCES:
                return "monopoly must name a resource"
    except (TypeError, ValueError, KeyError, IndexError):
        return "malformed action value"
    return "not a legal action in this state"

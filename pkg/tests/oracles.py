"""Independent reference implementations used to check the engine.

Nothing here calls the engine's move generator or trail search; the rules
are re-derived from the raw state fields.
"""

from __future__ import annotations

from itertools import combinations_with_replacement, product

from catanlab.board import RESOURCES, Resource
from catanlab.engine import ActionType, Awaiting, DevCard, GameState, Phase
from catanlab.engine.actions import CITY_COST, DEV_CARD_COST, ROAD_COST, SETTLEMENT_COST

BANK_TOTAL = 19


# -- longest trail ----------------------------------------------------------


def all_trails(edges, blocked=()):
    """Every trail as a tuple of edges: no edge twice, never continuing out of a blocked node."""
    edges = sorted({(min(a, b), max(a, b)) for a, b in edges})
    blocked = set(blocked)
    found = []

    def extend(node, path):
        found.append(tuple(path))
        if path and node in blocked:
            return
        for e in edges:
            if e in path or node not in e:
                continue
            nxt = e[1] if e[0] == node else e[0]
            path.append(e)
            extend(nxt, path)
            path.pop()

    for n in sorted({n for e in edges for n in e}):
        extend(n, [])
    return found


def brute_longest_trail(edges, blocked=()) -> int:
    return max((len(t) for t in all_trails(edges, blocked)), default=0)


# -- legality ---------------------------------------------------------------


def _afford(hand, cost):
    return all(h >= c for h, c in zip(hand, cost))


def _occupied(s: GameState, n):
    return s.node_owner[n] != -1


def _free_with_distance(s: GameState, n):
    topo = s.board.topo
    return not _occupied(s, n) and not any(_occupied(s, m) for m in topo.node_neighbors[n])


def _own_road_nodes(s: GameState, p):
    topo = s.board.topo
    return {n for i, e in enumerate(topo.edges) if s.edge_owner[i] == p for n in e}


def _road_ok(s: GameState, p, edge_owner, edge):
    """Can ``p`` put a road on ``edge`` given road ownership ``edge_owner``?"""
    topo = s.board.topo
    i = topo.edge_index[edge]
    if edge_owner[i] != -1:
        return False
    for n in edge:
        if s.node_owner[n] == p:
            return True
        if s.node_owner[n] != -1:
            continue  # an opponent building cuts the network here
        if any(edge_owner[j] == p for j in topo.node_edges[n]):
            return True
    return False


def _ports(s: GameState, p):
    ratios = {r: 4 for r in RESOURCES}
    for n, kind in s.board.ports.items():
        if s.node_owner[n] != p:
            continue
        if kind.resource is None:
            for r in RESOURCES:
                ratios[r] = min(ratios[r], 3)
        else:
            ratios[kind.resource] = 2
    return ratios


def _robber_targets(s: GameState, p):
    topo = s.board.topo
    out = set()
    for h in s.board.tiles:
        if h == s.robber:
            continue
        victims = {
            s.node_owner[n]
            for n in topo.hex_nodes[h]
            if s.node_owner[n] not in (-1, p) and sum(s.players[s.node_owner[n]].resources) > 0
        }
        if victims:
            out.update((h, v) for v in victims)
        else:
            out.add((h, None))
    return out


def _can_play(s: GameState, p, card):
    ps = s.players[p]
    return not s.dev_played_this_turn and ps.dev_hidden[card] - ps.dev_bought[card] > 0


def _dev_plays(s: GameState, p):
    out = set()
    ps = s.players[p]
    topo = s.board.topo
    if _can_play(s, p, DevCard.KNIGHT):
        out.update(("PLAY_KNIGHT", t) for t in _robber_targets(s, p))
    if _can_play(s, p, DevCard.ROAD_BUILDING) and ps.roads_left >= 1:
        owners = list(s.edge_owner)
        firsts = [e for e in topo.edges if _road_ok(s, p, owners, e)]
        for e1 in firsts:
            seconds = []
            if ps.roads_left >= 2:
                after = list(owners)
                after[topo.edge_index[e1]] = p
                seconds = [e for e in topo.edges if _road_ok(s, p, after, e)]
            if not seconds:
                out.add(("PLAY_ROAD_BUILDING", frozenset([e1])))
            for e2 in seconds:
                out.add(("PLAY_ROAD_BUILDING", frozenset([e1, e2])))
    if _can_play(s, p, DevCard.YEAR_OF_PLENTY):
        for a, b in combinations_with_replacement(RESOURCES, 2):
            need = {a: 1} if a != b else {a: 2}
            if a != b:
                need[b] = 1
            if all(s.bank[r] >= k for r, k in need.items()):
                out.add(("PLAY_YEAR_OF_PLENTY", (a, b)))
    if _can_play(s, p, DevCard.MONOPOLY):
        out.update(("PLAY_MONOPOLY", r) for r in RESOURCES)
    return out


def _discards(hand, k):
    return {d for d in product(*(range(h + 1) for h in hand)) if sum(d) == k}


def expected_moves(s: GameState) -> set:
    """The legal move set derived rule by rule, in a canonical hashable form."""
    topo = s.board.topo
    p = s.discard_queue[0] if s.awaiting is Awaiting.DISCARD else s.current_player
    ps = s.players[p]
    hand = ps.resources
    aw = s.awaiting
    if aw is Awaiting.SETUP_SETTLEMENT:
        return {("BUILD_SETTLEMENT", n) for n in topo.nodes if _free_with_distance(s, n)}
    if aw is Awaiting.SETUP_ROAD:
        return {
            ("BUILD_ROAD", e) for e in topo.edges if s.setup_node in e and s.edge_owner[topo.edge_index[e]] == -1
        }
    if aw is Awaiting.ROLL:
        return {("ROLL", None)} | _dev_plays(s, p)
    if aw is Awaiting.DISCARD:
        return {("DISCARD", d) for d in _discards(hand, sum(hand) // 2)}
    if aw is Awaiting.ROBBER_PLACEMENT:
        return {("MOVE_ROBBER", t) for t in _robber_targets(s, p)}
    assert aw is Awaiting.MAIN
    out = {("END_TURN", None)}
    if ps.settlements_left and _afford(hand, SETTLEMENT_COST):
        mine = _own_road_nodes(s, p)
        out.update(("BUILD_SETTLEMENT", n) for n in topo.nodes if n in mine and _free_with_distance(s, n))
    if ps.cities_left and _afford(hand, CITY_COST):
        out.update(("BUILD_CITY", n) for n in topo.nodes if s.node_owner[n] == p and s.node_level[n] == 1)
    if ps.roads_left and _afford(hand, ROAD_COST):
        out.update(("BUILD_ROAD", e) for e in topo.edges if _road_ok(s, p, s.edge_owner, e))
    if len(s.dev_deck) > 0 and _afford(hand, DEV_CARD_COST):
        out.add(("BUY_DEV_CARD", None))
    out |= _dev_plays(s, p)
    ratios = _ports(s, p)
    for give in RESOURCES:
        if hand[give] >= ratios[give]:
            for get in RESOURCES:
                if get != give and s.bank[get] > 0:
                    out.add(("MARITIME_TRADE", (give, ratios[give], get)))
    return out


def canonical(action) -> tuple:
    """Engine action mapped onto the oracle's representation."""
    t, v = action.type, action.value
    if t is ActionType.PLAY_KNIGHT or t is ActionType.MOVE_ROBBER:
        return (t.name, (tuple(v[0]), v[1]))
    if t is ActionType.PLAY_ROAD_BUILDING:
        return (t.name, frozenset(e for e in v if e is not None))
    if t is ActionType.PLAY_YEAR_OF_PLENTY:
        return (t.name, (Resource(v[0]), Resource(v[1])))
    if t is ActionType.PLAY_MONOPOLY:
        return (t.name, Resource(v))
    if t is ActionType.MARITIME_TRADE:
        return (t.name, (Resource(v[0]), v[1], Resource(v[2])))
    if t is ActionType.DISCARD:
        return (t.name, tuple(v))
    if t is ActionType.BUILD_ROAD:
        return (t.name, tuple(v))
    return (t.name, v)


# -- invariants -------------------------------------------------------------


def _trail_length(s: GameState, p: int) -> int:
    from catanlab.board import longest_trail

    topo = s.board.topo
    trail = [topo.edges[e] for e in s.players[p].road_ids]
    blocked = {n for e in trail for n in e if s.node_owner[n] not in (-1, p)}
    if len(trail) <= 10:
        return brute_longest_trail(trail, blocked)
    return longest_trail(trail, blocked)


def _cached_trail(s: GameState, p: int, cache) -> int:
    # Within one game roads and buildings only accumulate, so piece counts identify the trail inputs.
    if cache is None:
        return _trail_length(s, p)
    opp = s.players[1 - p]
    key = (p, len(s.players[p].road_ids), len(opp.settlements) + len(opp.cities))
    if key not in cache:
        cache[key] = _trail_length(s, p)
    return cache[key]


def invariant_violations(s: GameState, trail_cache: dict | None = None) -> list[str]:
    """Rules-level invariants that must hold after every transition.

    Pass one fresh ``trail_cache`` dict per game to reuse trail lengths across steps.
    """
    problems = []
    for r in range(5):
        total = s.bank[r] + sum(ps.resources[r] for ps in s.players)
        if total != BANK_TOTAL:
            problems.append(f"resource {r}: bank+hands = {total}")
        if s.bank[r] < 0 or any(ps.resources[r] < 0 for ps in s.players):
            problems.append(f"resource {r}: negative count")
    topo = s.board.topo
    for p, ps in enumerate(s.players):
        if len(ps.settlements) + ps.settlements_left != 5:
            problems.append(f"P{p}: settlement pieces")
        if len(ps.cities) + ps.cities_left != 4:
            problems.append(f"P{p}: city pieces")
        if len(ps.road_ids) + ps.roads_left != 15:
            problems.append(f"P{p}: road pieces")
        if ps.knights_played != ps.dev_played[DevCard.KNIGHT]:
            problems.append(f"P{p}: knight count")
        if ps.settlements & ps.cities:
            problems.append(f"P{p}: node is both settlement and city")
        for n in ps.settlements | ps.cities:
            if s.node_owner[n] != p:
                problems.append(f"P{p}: building at node {n} not recorded as owned")
        for e in ps.road_ids:
            if s.edge_owner[e] != p or s.edge_owner[e] == -1:
                problems.append(f"P{p}: road {topo.edges[e]} not recorded as owned")
    dev_total = len(s.dev_deck) + sum(sum(ps.dev_hidden) + sum(ps.dev_played) for ps in s.players)
    if dev_total != 25:
        problems.append(f"development cards: {dev_total} accounted for")
    h = s.longest_road_holder
    if h is not None:
        lengths = [_cached_trail(s, q, trail_cache) for q in range(2)]
        if lengths[h] < 5:
            problems.append("longest road holder has a trail shorter than 5")
        if lengths[1 - h] > lengths[h]:
            problems.append("longest road holder is not the longest")
    a = s.largest_army_holder
    if a is not None:
        if s.players[a].knights_played < 3:
            problems.append("largest army holder has fewer than 3 knights")
        if s.players[1 - a].knights_played > s.players[a].knights_played:
            problems.append("largest army holder does not have the most knights")
    if s.phase is Phase.TERMINAL:
        from catanlab.engine import victory_points

        if s.winner is not None and victory_points(s, s.winner, True) < s.config.vp_target:
            problems.append("winner below the VP target")
        if s.winner is None and not s.turn_capped:
            problems.append("terminal without winner or turn cap")
    return problems

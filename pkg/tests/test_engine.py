import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catanlab.board import MapTemplate, Resource
from catanlab.engine import (
    DEV_DECK_COMPOSITION,
    Action,
    ActionType,
    Awaiting,
    DevCard,
    GameConfig,
    GameOverError,
    IllegalActionError,
    Phase,
    apply,
    legal_actions,
    new_game,
    play_game,
    read_log,
    replay,
    replay_log,
    victory_points,
)
from catanlab.engine.actions import action_from_json
from catanlab.engine.rules import _produce
from catanlab.bots import RandomPlayer
from conftest import random_states
from oracles import canonical, expected_moves, invariant_violations


def post_setup(seed=0, template=MapTemplate.FULL):
    for s in random_states(seed, template):
        if s.phase is Phase.PLAY:
            return s
    raise AssertionError("game ended during setup")


def random_pair(seed):
    return [RandomPlayer(seed * 2), RandomPlayer(seed * 2 + 1)]


# -- setup ------------------------------------------------------------------


def test_new_game_fields():
    s = new_game(GameConfig(), 5)
    assert s.phase is Phase.SETUP and s.awaiting is Awaiting.SETUP_SETTLEMENT
    assert s.bank == [19] * 5
    assert all(sum(p.resources) == 0 for p in s.players)
    assert len(s.dev_deck) == 25
    assert {c: s.dev_deck.count(c) for c in DevCard} == DEV_DECK_COMPOSITION
    assert s.robber == s.board.robber_tile


def test_new_game_deterministic():
    assert new_game(GameConfig(), 11) == new_game(GameConfig(), 11)
    assert new_game(GameConfig(), 11).dev_deck == new_game(GameConfig(), 11).dev_deck
    assert new_game(GameConfig(), 11) != new_game(GameConfig(), 12)


def test_config_validation():
    with pytest.raises(ValueError):
        GameConfig(vp_target=2)
    with pytest.raises(ValueError):
        GameConfig(max_turns=0)
    cfg = GameConfig(template=MapTemplate.MINI, vp_target=5, seed=9)
    assert GameConfig.from_dict(cfg.to_dict()) == cfg


def test_setup_order_is_snake():
    order = []
    for s in random_states(3):
        if s.phase is not Phase.SETUP:
            break
        if s.awaiting is Awaiting.SETUP_SETTLEMENT:
            order.append(s.current_player)
    assert order == [0, 1, 1, 0]


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("template", list(MapTemplate))
def test_post_setup_vp_and_bank(seed, template):
    s = post_setup(seed, template)
    assert [victory_points(s, p) for p in (0, 1)] == [2, 2]
    # Only the second settlement pays out: one card per adjacent producing tile.
    granted = 0
    for p in (0, 1):
        second = [e for e in s.log if e["player"] == p and e["action"].type is ActionType.BUILD_SETTLEMENT][1]
        node = second["action"].value
        expected = [0] * 5
        for h in s.board.topo.node_hexes[node]:
            tile = s.board.tiles[h]
            if tile.resource is not Resource.DESERT:
                expected[tile.resource] += 1
        assert s.players[p].resources == expected
        granted += sum(expected)
    assert sum(s.bank) == 95 - granted


# -- legality ---------------------------------------------------------------


def check_against_oracle(s):
    legal = legal_actions(s)
    assert legal, "legal list must be non-empty"
    got = [canonical(a) for a in legal]
    assert len(set(got)) == len(got), "duplicate actions"
    want = expected_moves(s)
    if s.awaiting is Awaiting.DISCARD and len(want) > 64:
        assert len(got) == 64 and set(got) <= want
    else:
        assert set(got) == want
    order = [a.type for a in legal]
    rank = {t: i for i, t in enumerate(ActionType)}
    assert [rank[t] for t in order] == sorted(rank[t] for t in order)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(MapTemplate)))
def test_legal_actions_match_oracle(seed, template):
    for s in random_states(seed, template, every=2, limit=3000):
        check_against_oracle(s)


def test_legal_actions_cover_every_subphase():
    seen = set()
    for seed in range(6):
        for s in random_states(seed, every=1, limit=4000):
            seen.add(s.awaiting)
            check_against_oracle(s)
    assert seen == set(Awaiting) - {Awaiting.NONE}


def test_legal_actions_deterministic(mid_game_states):
    for s in mid_game_states[:20]:
        assert legal_actions(s) == legal_actions(s.copy())


def test_main_with_empty_hand_has_end_turn():
    s = post_setup(1).copy()
    s.awaiting = Awaiting.MAIN
    for r in range(5):
        s.bank[r] += s.players[s.current_player].resources[r]
        s.players[s.current_player].resources[r] = 0
    legal = legal_actions(s)
    assert Action(ActionType.END_TURN) in legal
    assert {a.type for a in legal} == {ActionType.END_TURN}


def test_wood_and_brick_allow_every_connected_road():
    s = post_setup(2).copy()
    s.awaiting = Awaiting.MAIN
    p = s.current_player
    for r in range(5):
        s.bank[r] += s.players[p].resources[r]
        s.players[p].resources[r] = 0
    for r in (Resource.WOOD, Resource.BRICK):
        s.players[p].resources[r] = 1
        s.bank[r] -= 1
    roads = {a.value for a in legal_actions(s) if a.type is ActionType.BUILD_ROAD}
    want = {v for name, v in expected_moves(s) if name == "BUILD_ROAD"}
    assert roads == want and roads


def test_terminal_has_no_moves():
    s = post_setup(0).copy()
    s.phase = Phase.TERMINAL
    s.winner = 0
    with pytest.raises(GameOverError):
        legal_actions(s)
    with pytest.raises(IllegalActionError):
        apply(s, Action(ActionType.END_TURN))


# -- transitions ------------------------------------------------------------


def test_apply_is_pure(mid_game_states):
    for s in mid_game_states[:30]:
        before = s.to_dict()
        for a in legal_actions(s)[:5]:
            nxt = apply(s, a)
            assert s.to_dict() == before
            assert nxt.log_size == s.log_size + 1


def test_illegal_action_names_rule():
    s = post_setup(0)
    assert s.awaiting is Awaiting.ROLL
    with pytest.raises(IllegalActionError) as err:
        apply(s, Action(ActionType.END_TURN))
    assert "not allowed while awaiting" in err.value.rule
    s2 = apply(s, Action(ActionType.ROLL))
    poor = s2.copy()
    p = poor.current_player
    for r in range(5):
        poor.bank[r] += poor.players[p].resources[r]
        poor.players[p].resources[r] = 0
    with pytest.raises(IllegalActionError) as err:
        apply(poor, Action(ActionType.BUY_DEV_CARD))
    assert "cannot afford" in err.value.rule


def test_every_legal_action_applies(mid_game_states):
    for s in mid_game_states:
        for a in legal_actions(s):
            nxt = apply(s, a)
            assert not invariant_violations(nxt)


def find_roll(target, max_seed=400):
    """A PLAY state awaiting ROLL whose next roll shows ``target``, hands at most 7."""
    for seed in range(max_seed):
        for s in random_states(seed, every=1, limit=600):
            if s.awaiting is not Awaiting.ROLL or s.phase is not Phase.PLAY:
                continue
            if any(sum(p.resources) > 7 for p in s.players):
                continue
            nxt = apply(s, Action(ActionType.ROLL))
            if sum(nxt.log[-1]["dice"]) == target:
                return s, nxt
    raise AssertionError(f"no roll of {target} found")


def test_roll_seven_moves_to_robber():
    s, nxt = find_roll(7)
    assert nxt.awaiting is Awaiting.ROBBER_PLACEMENT
    assert nxt.current_player == s.current_player
    assert nxt.players[0].resources == s.players[0].resources
    targets = {a.value[0] for a in legal_actions(nxt)}
    assert s.robber not in targets
    assert targets == set(s.board.tiles) - {s.robber}


def test_roll_seven_with_big_hand_discards_first():
    for s in (s for seed in range(50) for s in random_states(seed)):
        if s.awaiting is Awaiting.DISCARD:
            p = s.acting_player
            k = sum(s.players[p].resources) // 2
            a = legal_actions(s)[0]
            assert sum(a.value) == k
            after = apply(s, a)
            assert sum(after.players[p].resources) == sum(s.players[p].resources) - k
            return
    pytest.fail("no discard state sampled")


def test_roll_pays_adjacent_buildings():
    s, nxt = find_roll(8)
    expected = [[0] * 5 for _ in range(2)]
    topo = s.board.topo
    for h, tile in s.board.tiles.items():
        if tile.token != 8 or h == s.robber:
            continue
        for n in topo.hex_nodes[h]:
            if s.node_owner[n] != -1:
                expected[s.node_owner[n]][tile.resource] += s.node_level[n]
    for p in (0, 1):
        gained = [a - b for a, b in zip(nxt.players[p].resources, s.players[p].resources)]
        # The bank is never short this early in these sampled states.
        assert gained == expected[p]


def shortage_state():
    s = post_setup(0).copy()
    topo = s.board.topo
    for h, tile in s.board.tiles.items():
        if tile.token is not None and h != s.robber:
            break
    nodes = topo.hex_nodes[h]
    for p in (0, 1):
        for n in list(s.players[p].settlements):
            s.node_owner[n] = -1
            s.node_level[n] = 0
        s.players[p].settlements.clear()
    return s, h, tile, nodes


def test_bank_shortage_two_claimants_get_nothing():
    s, h, tile, nodes = shortage_state()
    s.node_owner[nodes[0]], s.node_level[nodes[0]] = 0, 1
    s.node_owner[nodes[3]], s.node_level[nodes[3]] = 1, 2
    r = tile.resource
    moved = s.bank[r] - 2
    s.bank[r] -= moved
    s.players[0].resources[r] += moved
    before = [p.resources[r] for p in s.players]
    paid = _produce(s, tile.token)
    assert paid[0][r] == paid[1][r] == 0
    assert [p.resources[r] for p in s.players] == before
    assert s.bank[r] == 2


def test_bank_shortage_single_claimant_takes_rest():
    s, h, tile, nodes = shortage_state()
    s.node_owner[nodes[0]], s.node_level[nodes[0]] = 1, 2
    r = tile.resource
    moved = s.bank[r] - 1
    s.bank[r] -= moved
    s.players[0].resources[r] += moved
    paid = _produce(s, tile.token)
    assert paid[1][r] == 1 and s.bank[r] == 0


def test_robber_blocks_production():
    s, h, tile, nodes = shortage_state()
    s.node_owner[nodes[0]], s.node_level[nodes[0]] = 0, 1
    s.robber = h
    assert _produce(s, tile.token)[0][tile.resource] == 0


def test_build_city_adds_one_vp():
    for s in (s for seed in range(50) for s in random_states(seed)):
        cities = [a for a in legal_actions(s) if a.type is ActionType.BUILD_CITY]
        if cities:
            p = s.current_player
            nxt = apply(s, cities[0])
            assert victory_points(nxt, p) == victory_points(s, p) + 1
            assert nxt.node_level[cities[0].value] == 2
            return
    pytest.fail("no BUILD_CITY state sampled")


def test_dev_card_bought_this_turn_not_playable():
    for s in (s for seed in range(50) for s in random_states(seed)):
        if s.phase is Phase.PLAY and Action(ActionType.BUY_DEV_CARD) in legal_actions(s):
            nxt = apply(s, Action(ActionType.BUY_DEV_CARD))
            card = s.dev_deck[0]
            assert nxt.players[s.current_player].dev_hidden[card] == s.players[s.current_player].dev_hidden[card] + 1
            if card is DevCard.KNIGHT and s.players[s.current_player].dev_hidden[card] == 0:
                assert not any(a.type is ActionType.PLAY_KNIGHT for a in legal_actions(nxt))
            return
    pytest.fail("no BUY_DEV_CARD state sampled")


def test_victory_points_arithmetic():
    s = post_setup(0).copy()
    ps = s.players[0]
    settlement, other = sorted(ps.settlements)
    extra = next(n for n in s.board.topo.nodes if s.node_owner[n] == -1)
    ps.settlements = {settlement}
    ps.cities = {other, extra}
    s.node_owner[extra] = 0
    s.node_level[other] = s.node_level[extra] = 2
    s.largest_army_holder = 0
    ps.dev_hidden[DevCard.VICTORY_POINT] = 1
    assert victory_points(s, 0, include_hidden=True) == 1 + 4 + 2 + 1 == 8
    assert victory_points(s, 0, include_hidden=False) == 7
    with pytest.raises(ValueError):
        victory_points(s, 2)


# -- invariants and whole games ---------------------------------------------


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(MapTemplate)))
def test_invariants_hold_every_step(seed, template):
    last = None
    for s in random_states(seed, template):
        assert invariant_violations(s) == []
        last = s
    assert last is not None


def test_terminal_is_absorbing():
    result_state = None
    for s in random_states(1, MapTemplate.MINI):
        result_state = s
    # random_states stops before the terminal state; finish the game.
    legal = legal_actions(result_state)
    for a in legal:
        nxt = apply(result_state, a)
        if nxt.phase is Phase.TERMINAL:
            assert invariant_violations(nxt) == []
            with pytest.raises(GameOverError):
                legal_actions(nxt)
            with pytest.raises(IllegalActionError):
                apply(nxt, Action(ActionType.END_TURN))
            return
    pytest.fail("no terminal successor found")


def test_winner_meets_target():
    for seed in range(10):
        res = play_game(random_pair(seed), GameConfig(template=MapTemplate.MINI, vp_target=5, seed=seed))
        if res.winner is not None:
            assert res.vp[res.winner] >= 5
        else:
            assert res.turn_capped


def test_turn_cap():
    res = play_game(random_pair(0), GameConfig(max_turns=3, seed=1))
    assert res.winner is None and res.turn_capped and res.turns == 3


def test_play_game_deterministic(tmp_path):
    cfg = GameConfig(seed=21)
    a = play_game(random_pair(7), cfg, log_path=tmp_path / "a.jsonl", log_label="g.jsonl")
    b = play_game(random_pair(7), cfg, log_path=tmp_path / "b.jsonl", log_label="g.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    a.log_path = b.log_path = None
    assert a == b


@pytest.mark.parametrize("seed", range(5))
def test_replay_reproduces_final_state(tmp_path, seed):
    cfg = GameConfig(seed=seed)
    path = tmp_path / "g.jsonl"
    res = play_game(random_pair(seed), cfg, log_path=path)
    events, loaded = read_log(path)
    assert loaded.to_dict() == res.to_dict()
    final = replay_log(path)
    assert final.phase is Phase.TERMINAL
    assert [victory_points(final, p) for p in (0, 1)] == res.vp
    assert final.turn_index == res.turns and final.winner == res.winner
    again = replay(cfg, seed, [action_from_json(e["action"]) for e in events])
    assert again == final


def test_log_event_shape(tmp_path):
    path = tmp_path / "g.jsonl"
    play_game(random_pair(3), GameConfig(template=MapTemplate.MINI, seed=3), log_path=path)
    events, _ = read_log(path)
    assert all({"turn", "player", "action", "vp_after"} <= set(e) for e in events)
    assert any("dice" in e for e in events)


def test_illegal_decider_falls_back():
    def bad(state, legal):
        return Action(ActionType.BUILD_CITY, 999)

    def broken(state, legal):
        raise RuntimeError("boom")

    res = play_game([bad, broken], GameConfig(template=MapTemplate.MINI, max_turns=20, seed=2))
    assert res.illegal_action_count[0] > 0 and res.illegal_action_count[1] > 0


def test_random_vs_random_turn_length():
    # Recorded rather than asserted against a band: uniform random players
    # build rarely, so games run far longer than human or bot games.
    results = [play_game(random_pair(g), GameConfig(seed=g)) for g in range(20)]
    turns = [r.turns for r in results]
    assert all(1 <= t <= 500 for t in turns)
    assert sum(r.winner is not None for r in results) >= 10

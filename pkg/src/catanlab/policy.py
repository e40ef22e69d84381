"""Generated player policies: data views, validation and sandboxed execution."""

from __future__ import annotations

import copy
import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .board import MapTemplate, token_probability
from .engine import (
    Action,
    DevCard,
    GameConfig,
    GameState,
    Phase,
    action_to_json,
    describe_action,
    legal_actions,
    new_game,
    step,
    trade_ratios,
    victory_points,
)
from .sandbox import BLANK_TEMPLATE, DEFAULT_STEP_BUDGET, CompiledPolicy, PolicyError, compile_policy
from .seeding import derive_seed

log = logging.getLogger(__name__)

SMOKE_CALLS = 200


def state_view(state: GameState) -> dict:
    """Plain-data snapshot of what the acting player may see."""
    me = state.acting_player
    board = state.board
    topo = board.topo
    ix = state.ix
    ps = state.players[me]
    res_names = ["WOOD", "BRICK", "SHEEP", "WHEAT", "ORE"]

    tiles = []
    for h in topo.hexes:
        spec = board.tiles[h]
        tiles.append(
            {
                "hex": [h[0], h[1]],
                "resource": spec.resource.name,
                "token": spec.token,
                "prob": token_probability(spec.token),
                "nodes": list(topo.hex_nodes[h]),
                "robber": h == state.robber,
            }
        )
    nodes = []
    for n in topo.nodes:
        owner = state.node_owner[n]
        nodes.append(
            {
                "id": n,
                "owner": None if owner == -1 else owner,
                "building": None if owner == -1 else ("CITY" if state.node_level[n] == 2 else "SETTLEMENT"),
                "port": None if n not in board.ports else board.ports[n].value,
                "neighbors": list(topo.node_neighbors[n]),
                "tiles": [
                    {"resource": res_names[res], "prob": prob, "robber": h == state.robber}
                    for h, res, prob in ix.node_yield[n]
                ],
            }
        )
    players = []
    for p, other in enumerate(state.players):
        players.append(
            {
                "vp": victory_points(state, p, include_hidden=(p == me)),
                "settlements": sorted(other.settlements),
                "cities": sorted(other.cities),
                "roads": [list(topo.edges[e]) for e in sorted(other.road_ids)],
                "road_length": state.road_lengths[p],
                "knights_played": other.knights_played,
                "resource_count": sum(other.resources),
                "dev_card_count": sum(other.dev_hidden),
                "longest_road": state.longest_road_holder == p,
                "largest_army": state.largest_army_holder == p,
            }
        )
    ratios = trade_ratios(state, me)
    return {
        "me": me,
        "opponent": 1 - me,
        "turn": state.turn_index,
        "phase": state.phase.value,
        "awaiting": state.awaiting.value,
        "vp_target": state.config.vp_target,
        "map": board.template.value,
        "robber": [state.robber[0], state.robber[1]],
        "tiles": tiles,
        "nodes": nodes,
        "players": players,
        "resources": {name: ps.resources[i] for i, name in enumerate(res_names)},
        "dev_cards": {c.name: ps.dev_hidden[c] for c in DevCard},
        "trade_ratios": {name: ratios[i] for i, name in enumerate(res_names)},
        "bank": {name: state.bank[i] for i, name in enumerate(res_names)},
        "dev_cards_left": len(state.deck) - state.deck_pos,
    }


def actions_view(legal: list[Action]) -> list[dict]:
    out = []
    for i, a in enumerate(legal):
        encoded = action_to_json(a)
        out.append({"index": i, "type": encoded["type"], "value": encoded["value"], "text": describe_action(a)})
    return out


@dataclass
class PolicyArtifact:
    iteration: int
    source: str
    change_summary: str = ""
    avg_vp: float | None = None
    runtime_error_games: int = 0
    validated: bool = False
    violations: list = field(default_factory=list)

    def __post_init__(self):
        self._compiled: CompiledPolicy | None = None

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "source": self.source,
            "change_summary": self.change_summary,
            "avg_vp": self.avg_vp,
            "runtime_error_games": self.runtime_error_games,
            "validated": self.validated,
            "violations": list(self.violations),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyArtifact":
        return cls(**data)


def blank_artifact() -> PolicyArtifact:
    artifact = PolicyArtifact(0, BLANK_TEMPLATE, "blank template")
    validate_policy(artifact)
    return artifact


@lru_cache(maxsize=1)
def smoke_states() -> tuple[tuple[dict, list[dict], int], ...]:
    """Fixed sample of decision points (MINI and FULL) for smoke-testing policies."""
    samples = []
    for template in (MapTemplate.MINI, MapTemplate.FULL):
        game = 0
        while sum(1 for s in samples if s[3] is template) < SMOKE_CALLS // 2:
            seed = derive_seed("policy-smoke", template.value, game)
            rng = random.Random(seed)
            state = new_game(GameConfig(template=template), seed)
            k = 0
            while state.phase is not Phase.TERMINAL and k < 400:
                legal = legal_actions(state)
                if k % 8 == 0 or state.awaiting.value in ("DISCARD", "ROBBER_PLACEMENT"):
                    samples.append((state_view(state), actions_view(legal), len(legal), template))
                step(state, legal[rng.randrange(len(legal))])
                k += 1
            game += 1
    mini = [s for s in samples if s[3] is MapTemplate.MINI][: SMOKE_CALLS // 2]
    full = [s for s in samples if s[3] is MapTemplate.FULL][: SMOKE_CALLS // 2]
    return tuple((v, a, n) for v, a, n, _ in mini + full)


def _check_choice(choice, n: int) -> str | None:
    if choice is None:
        return None
    if isinstance(choice, bool) or not isinstance(choice, int):
        return f"decide returned {type(choice).__name__}, expected an action index or None"
    if not 0 <= choice < n:
        return f"decide returned {choice}, outside 0..{n - 1}"
    return None


def validate_policy(artifact: PolicyArtifact, budget: int = DEFAULT_STEP_BUDGET) -> list[str]:
    """Static checks, then 200 budgeted smoke calls; sets ``artifact.validated``."""
    compiled, violations = compile_policy(artifact.source)
    if compiled is not None:
        for k, (view, actions, n) in enumerate(smoke_states()):
            try:
                choice = compiled.decide(copy.deepcopy(view), copy.deepcopy(actions), budget)
            except PolicyError as exc:
                violations.append(f"smoke call {k}: {type(exc).__name__}: {exc}")
                break
            problem = _check_choice(choice, n)
            if problem:
                violations.append(f"smoke call {k}: {problem}")
                break
    artifact.violations = list(violations)
    artifact.validated = not violations
    artifact._compiled = compiled if not violations else None
    return violations


def execute_policy(
    artifact: PolicyArtifact,
    state: GameState,
    legal: list[Action],
    rng: random.Random,
    errors: list | None = None,
    budget: int = DEFAULT_STEP_BUDGET,
) -> Action:
    """Run the artifact's ``decide``; any failure degrades to a random legal move.

    ``None`` from the policy means "no preference" and is not an error.
    Failures are appended to ``errors`` when given.
    """
    if not artifact.validated:
        raise ValueError("policy artifact has not been validated")
    compiled = artifact._compiled
    if compiled is None:
        compiled, problems = compile_policy(artifact.source)
        if compiled is None:
            raise ValueError(f"validated artifact no longer compiles: {problems}")
        artifact._compiled = compiled
    problem = None
    try:
        choice = compiled.decide(state_view(state), actions_view(legal), budget)
        problem = _check_choice(choice, len(legal))
    except PolicyError as exc:
        problem = f"{type(exc).__name__}: {exc}"
    if problem is not None:
        log.debug("policy iteration %d failed: %s", artifact.iteration, problem)
        if errors is not None:
            errors.append(problem)
        return legal[rng.randrange(len(legal))]
    if choice is None:
        return legal[rng.randrange(len(legal))]
    return legal[choice]


class PolicyPlayer:
    """Decider running a validated artifact; tracks errors per game."""

    def __init__(self, artifact: PolicyArtifact, seed: int = 0):
        if not artifact.validated:
            raise ValueError("policy artifact has not been validated")
        self.artifact = artifact
        self.rng = random.Random(derive_seed(seed, "policy-fallback"))
        self.errors: list[str] = []
        self._notes: dict = {}

    def __call__(self, state: GameState, legal: list[Action]) -> Action:
        before = len(self.errors)
        action = execute_policy(self.artifact, state, legal, self.rng, self.errors)
        if len(self.errors) > before:
            self._notes = {"policy_error": self.errors[-1], "fallback": True}
        return action

    def pop_notes(self) -> dict:
        notes, self._notes = self._notes, {}
        return notes

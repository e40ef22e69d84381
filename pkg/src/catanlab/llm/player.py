"""Turning model answers into moves: parsing, retries and the LLM-backed player."""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..engine import Action, GameState, action_to_json
from ..seeding import derive_seed
from .client import Message, ModelClient, ModelParams, Role
from .render import Renderer, render

# A run of digits not glued to letters, decimals, signs or ranges such as "12-17".
_INT = re.compile(r"(?<![\w.\-])(\d+)(?!\w|\.\d|-\d)")


@dataclass(frozen=True)
class ParseFailure:
    raw: str

    def __bool__(self):
        return False


def parse_action(model_output: str, legal: list[Action]) -> Action | ParseFailure:
    """Return ``legal[i]`` for the first standalone integer ``i`` in range."""
    if not legal:
        raise ValueError("legal action list is empty")
    for match in _INT.finditer(model_output or ""):
        i = int(match.group(1))
        if i < len(legal):
            return legal[i]
    return ParseFailure(model_output)


def system_prompt(player: int) -> str:
    return (
        f"You are player P{player} in a two-player game of Settlers of Catan played to the "
        "target score shown below. Each message describes the current situation and "
        "lists the moves you may make, numbered from 0. Choose one."
    )


def corrective_message(n: int) -> str:
    return (
        f"That answer did not name a valid action. Reply with one integer from 0 to {n - 1} "
        "taken from the LEGAL ACTIONS list."
    )


@dataclass
class Decision:
    action: Action
    messages: list[Message]
    responses: list[str]
    retries: int = 0
    fallback: bool = False
    extras: dict = field(default_factory=dict)

    def to_record(self, state: GameState) -> dict:
        return {
            "turn": state.turn_index,
            "player": state.acting_player,
            "messages": [m.to_dict() for m in self.messages],
            "responses": list(self.responses),
            "action": action_to_json(self.action),
            "retries": self.retries,
            "fallback": self.fallback,
        }


def decide_with_transcript(
    client: ModelClient,
    params: ModelParams,
    renderer: Renderer | str,
    state: GameState,
    legal: list[Action],
    strategy_prompt: str = "",
    rng: random.Random | None = None,
) -> Decision:
    if not legal:
        raise ValueError("legal action list is empty")
    messages = [
        Message(Role.SYSTEM, system_prompt(state.acting_player)),
        Message(Role.USER, render(renderer, state, legal, strategy_prompt)),
    ]
    responses = []
    for attempt in range(params.max_retries + 1):
        raw = client.complete(list(messages), params)
        responses.append(raw)
        parsed = parse_action(raw, legal)
        if not isinstance(parsed, ParseFailure):
            return Decision(parsed, messages, responses, retries=attempt)
        if attempt < params.max_retries:
            messages.append(Message(Role.ASSISTANT, raw if raw.strip() else "(empty reply)"))
            messages.append(Message(Role.USER, corrective_message(len(legal))))
    if rng is None:
        rng = random.Random(derive_seed("llm-fallback", state.rng_seed, state.log_size))
    action = legal[rng.randrange(len(legal))]
    return Decision(action, messages, responses, retries=params.max_retries, fallback=True)


def llm_decide(
    client: ModelClient,
    params: ModelParams,
    renderer: Renderer | str,
    state: GameState,
    legal: list[Action],
    strategy_prompt: str = "",
    rng: random.Random | None = None,
) -> Action:
    """Render, ask, parse; retry with a correction, then fall back to a random move."""
    return decide_with_transcript(client, params, renderer, state, legal, strategy_prompt, rng).action


class LLMPlayer:
    """Game decider backed by a model client.

    Every decision is kept in ``transcript``; ``pop_notes`` reports retries and
    random fallbacks so ``play_game`` can flag them in the game log.
    """

    def __init__(
        self,
        client: ModelClient,
        params: ModelParams,
        renderer: Renderer | str = Renderer.BASE,
        strategy_prompt: str = "",
        seed: int = 0,
    ):
        self.client = client
        self.params = params
        self.renderer = Renderer(renderer)
        self.strategy_prompt = strategy_prompt
        self.rng = random.Random(derive_seed(seed, "llm-fallback"))
        self.transcript: list[dict] = []
        self._notes: dict = {}

    def __call__(self, state: GameState, legal: list[Action]) -> Action:
        self._notes = {}
        if len(legal) == 1:
            return legal[0]
        d = decide_with_transcript(
            self.client, self.params, self.renderer, state, legal, self.strategy_prompt, self.rng
        )
        self.transcript.append(d.to_record(state))
        if d.retries:
            self._notes["llm_retries"] = d.retries
        if d.fallback:
            self._notes["fallback"] = True
        return d.action

    def pop_notes(self) -> dict:
        notes, self._notes = self._notes, {}
        return notes

    def reset_transcript(self) -> None:
        self.transcript = []

    def write_transcript(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for record in self.transcript:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

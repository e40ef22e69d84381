"""Resolve agent names such as ``ALPHABETA`` or ``PROMPT:notes.txt`` into deciders."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .bots import DEFAULT_WEIGHTS, AlphaBetaPlayer, HeuristicWeights, RandomPlayer
from .llm import LLMPlayer, ModelClient, ModelParams, Renderer, default_strategy
from .policy import PolicyArtifact, PolicyPlayer, validate_policy
from .seeding import derive_seed

BOT_NAMES = ("RANDOM", "ALPHABETA")
LLM_NAMES = ("BASE", "STRUCTURED")


class UnknownAgentError(ValueError):
    pass


@dataclass(frozen=True)
class AgentSpec:
    name: str
    kind: str  # RANDOM, ALPHABETA, BASE, STRUCTURED, PROMPT or POLICY
    path: Path | None = None

    @property
    def needs_model(self) -> bool:
        return self.kind in ("BASE", "STRUCTURED", "PROMPT")


def parse_agent(name: str) -> AgentSpec:
    upper = name.upper()
    if upper in BOT_NAMES or upper in LLM_NAMES:
        return AgentSpec(upper, upper)
    kind, sep, rest = name.partition(":")
    if sep and kind.upper() in ("PROMPT", "POLICY") and rest:
        return AgentSpec(name, kind.upper(), Path(rest))
    raise UnknownAgentError(
        f"unknown agent {name!r}; use RANDOM, ALPHABETA, BASE, STRUCTURED, PROMPT:<file> or POLICY:<file>"
    )


def load_policy_file(path) -> PolicyArtifact:
    artifact = PolicyArtifact(0, Path(path).read_text(encoding="utf-8"), f"loaded from {Path(path).name}")
    violations = validate_policy(artifact)
    if violations:
        raise ValueError(f"policy {path} failed validation: {'; '.join(violations)}")
    return artifact


def make_decider(
    spec: AgentSpec,
    seed: int,
    weights: HeuristicWeights = DEFAULT_WEIGHTS,
    client: ModelClient | None = None,
    params: ModelParams | None = None,
    prompt_text: str | None = None,
    artifact: PolicyArtifact | None = None,
) -> Callable:
    """Build a fresh decider for one game; ``seed`` feeds any random fallback."""
    if spec.kind == "RANDOM":
        return RandomPlayer(derive_seed(seed, "random-player"))
    if spec.kind == "ALPHABETA":
        return AlphaBetaPlayer(weights=weights)
    if spec.kind == "POLICY":
        if artifact is None:
            artifact = load_policy_file(spec.path)
        return PolicyPlayer(artifact, seed)
    if client is None or params is None:
        raise ValueError(f"agent {spec.name} needs a model client")
    if spec.kind == "BASE":
        return LLMPlayer(client, params, Renderer.BASE, "", seed)
    if spec.kind == "STRUCTURED":
        text = default_strategy() if prompt_text is None else prompt_text
        return LLMPlayer(client, params, Renderer.STRUCTURED, text, seed)
    if prompt_text is None:
        prompt_text = Path(spec.path).read_text(encoding="utf-8")
    return LLMPlayer(client, params, Renderer.STRUCTURED, prompt_text, seed)

"""Evolution run settings and history records."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

from ..board import MapTemplate
from ..metrics import token_count


class EvolutionMode(str, Enum):
    PROMPT = "prompt"
    AGENT = "agent"


class RoleName(str, Enum):
    EVOLVER = "EVOLVER"
    ANALYZER = "ANALYZER"
    RESEARCHER = "RESEARCHER"
    STRATEGIZER = "STRATEGIZER"
    CODER = "CODER"


@dataclass(frozen=True)
class EvolutionConfig:
    """``games_per_cycle=None`` means the mode default (5 prompt, 10 agent)."""

    cycles: int = 10
    games_per_cycle: int | None = None
    evolution_map: MapTemplate = MapTemplate.MINI
    final_trial_games: int = 10
    final_trial_map: MapTemplate = MapTemplate.FULL
    opponent: str = "ALPHABETA"
    master_seed: int = 0
    vp_target: int = 10
    max_turns: int = 500
    max_tool_calls: int = 12
    max_role_invocations: int = 20
    web_search: str = "offline"  # "offline" stub or "live"

    def __post_init__(self):
        object.__setattr__(self, "evolution_map", MapTemplate(self.evolution_map))
        object.__setattr__(self, "final_trial_map", MapTemplate(self.final_trial_map))
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.games_per_cycle is not None and self.games_per_cycle < 1:
            raise ValueError("games_per_cycle must be >= 1")
        if self.final_trial_games < 0:
            raise ValueError("final_trial_games must be >= 0")
        if self.max_tool_calls < 1 or self.max_role_invocations < 1:
            raise ValueError("tool and role budgets must be >= 1")
        if self.web_search not in ("offline", "live"):
            raise ValueError("web_search must be 'offline' or 'live'")

    def games_for(self, mode: EvolutionMode) -> int:
        if self.games_per_cycle is not None:
            return self.games_per_cycle
        return 5 if EvolutionMode(mode) is EvolutionMode.PROMPT else 10

    def to_dict(self) -> dict:
        d = asdict(self)
        d["evolution_map"] = self.evolution_map.value
        d["final_trial_map"] = self.final_trial_map.value
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionConfig":
        return cls(**data)


@dataclass
class PromptVersion:
    iteration: int
    text: str
    avg_vp: float | None = None
    games: list = field(default_factory=list)
    no_edit: bool = False
    tool_calls: int = 0
    token_len: int = field(init=False)

    def __post_init__(self):
        self.token_len = token_count(self.text)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PromptVersion":
        data = dict(data)
        data.pop("token_len", None)
        return cls(**data)

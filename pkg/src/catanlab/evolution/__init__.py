"""Prompt and agent self-improvement loops."""

from .agent_evolver import pct_no_errors, run_agent_evolution
from .common import EvolutionInterrupted, argmax_earliest, game_seed, play_series
from .config import EvolutionConfig, EvolutionMode, PromptVersion, RoleName
from .prompt_evolver import MAX_PROMPT_TOKENS, run_prompt_evolution
from .roles import OfflineSearch, RoleAgent, RoleResult, ToolCall, parse_tool_call
from .workspace import Workspace, WorkspaceError

__all__ = [
    "EvolutionConfig",
    "EvolutionInterrupted",
    "EvolutionMode",
    "MAX_PROMPT_TOKENS",
    "OfflineSearch",
    "PromptVersion",
    "RoleAgent",
    "RoleName",
    "RoleResult",
    "ToolCall",
    "Workspace",
    "WorkspaceError",
    "argmax_earliest",
    "game_seed",
    "parse_tool_call",
    "pct_no_errors",
    "play_series",
    "run_agent_evolution",
    "run_prompt_evolution",
]

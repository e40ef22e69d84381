"""Language-model players: prompt rendering, model clients and action parsing."""

from .client import (
    PROVIDERS,
    ConfigError,
    HttpChatClient,
    Message,
    MockExhausted,
    MockModel,
    ModelClient,
    ModelError,
    ModelParams,
    RateLimiter,
    Role,
    provider_for_model,
)
from .player import Decision, LLMPlayer, ParseFailure, decide_with_transcript, llm_decide, parse_action
from .render import Renderer, default_strategy, render, serialize_state_base, serialize_state_structured

__all__ = [
    "PROVIDERS",
    "ConfigError",
    "Decision",
    "HttpChatClient",
    "LLMPlayer",
    "Message",
    "MockExhausted",
    "MockModel",
    "ModelClient",
    "ModelError",
    "ModelParams",
    "ParseFailure",
    "RateLimiter",
    "Renderer",
    "Role",
    "decide_with_transcript",
    "default_strategy",
    "llm_decide",
    "parse_action",
    "provider_for_model",
    "render",
    "serialize_state_base",
    "serialize_state_structured",
]

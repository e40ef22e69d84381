"""Chat-completion clients: an HTTP client for live providers and a scripted mock."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Protocol, Sequence

log = logging.getLogger(__name__)


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"
    TOOL = "tool"


@dataclass(frozen=True)
class Message:
    role: Role
    content: str

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        if not isinstance(self.content, str) or not self.content:
            raise ValueError("message content must be non-empty text")

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}

    @classmethod
    def from_dict(cls, data: dict) -> "Message":
        return cls(Role(data["role"]), data["content"])


@dataclass(frozen=True)
class ModelParams:
    model_id: str = "mock"
    temperature: float = 0.7
    max_retries: int = 3

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def to_dict(self) -> dict:
        return {"model_id": self.model_id, "temperature": self.temperature, "max_retries": self.max_retries}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        return cls(**data)


class ModelClient(Protocol):
    def complete(self, messages: Sequence[Message], params: ModelParams) -> str: ...


class ModelError(RuntimeError):
    """A live provider could not produce a completion."""


class ConfigError(ValueError):
    """Missing credentials or an unknown provider."""


# provider -> (default base URL, API-key environment variable)
PROVIDERS = {
    "openai": ("https://api.openai.com/v1", "OPENAI_API_KEY"),
    "mistral": ("https://api.mistral.ai/v1", "MISTRAL_API_KEY"),
    "anthropic": ("https://api.anthropic.com/v1", "ANTHROPIC_API_KEY"),
}


def provider_for_model(model_id: str) -> str:
    name = model_id.lower()
    if name.startswith("claude"):
        return "anthropic"
    if name.startswith(("mistral", "open-mistral", "codestral")):
        return "mistral"
    return "openai"


class RateLimiter:
    """Process-wide requests-per-minute throttle shared by threads."""

    def __init__(self, requests_per_minute: float, clock=time.monotonic, sleep=time.sleep):
        if requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be positive")
        self.interval = 60.0 / requests_per_minute
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next = 0.0

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next - now
            self._next = max(now, self._next) + self.interval
        if wait > 0:
            self._sleep(wait)


class HttpChatClient:
    """OpenAI-compatible ``/chat/completions`` client.

    Transport failures and 5xx/429 answers are retried ``params.max_retries``
    times with exponential backoff, then raised as ``ModelError``.  Answers cut
    short by the provider's output limit are returned as-is and recorded in
    ``truncations``.
    """

    def __init__(
        self,
        provider: str = "openai",
        base_url: str | None = None,
        api_key: str | None = None,
        headers: dict | None = None,
        timeout: float = 120.0,
        rate_limiter: RateLimiter | None = None,
        backoff: float = 1.0,
        transport=None,
    ):
        import httpx

        if provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {provider!r}; expected one of {sorted(PROVIDERS)}")
        default_url, key_var = PROVIDERS[provider]
        key = api_key if api_key is not None else os.environ.get(key_var)
        if not key:
            raise ConfigError(f"{key_var} is not set; live mode needs an API key for {provider}")
        self.provider = provider
        self.base_url = (base_url or default_url).rstrip("/")
        self.rate_limiter = rate_limiter
        self.backoff = backoff
        self.truncations: list[dict] = []
        self._lock = threading.Lock()
        all_headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
        all_headers.update(headers or {})
        self._http = httpx.Client(headers=all_headers, timeout=timeout, transport=transport)

    @staticmethod
    def _wire(message: Message) -> dict:
        # Tool results travel as user text; vendor tool-call formats are not used.
        if message.role is Role.TOOL:
            return {"role": "user", "content": f"[tool result]\n{message.content}"}
        return message.to_dict()

    def complete(self, messages: Sequence[Message], params: ModelParams) -> str:
        import httpx

        body = {
            "model": params.model_id,
            "messages": [self._wire(m) for m in messages],
            "temperature": params.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(params.max_retries + 1):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            try:
                resp = self._http.post(f"{self.base_url}/chat/completions", json=body)
                if resp.status_code == 429 or resp.status_code >= 500:
                    raise ModelError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                if resp.status_code >= 400:
                    raise ConfigError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                choice = resp.json()["choices"][0]
                text = choice["message"].get("content") or ""
                if choice.get("finish_reason") == "length":
                    event = {"model": params.model_id, "chars": len(text)}
                    with self._lock:
                        self.truncations.append(event)
                    log.warning("completion truncated by provider limit: %s", event)
                return text
            except ConfigError:
                raise
            except (httpx.HTTPError, ModelError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                log.warning("completion attempt %d failed: %s", attempt + 1, exc)
                if attempt < params.max_retries and self.backoff:
                    time.sleep(self.backoff * 2**attempt)
        raise ModelError(f"completion failed after {params.max_retries + 1} attempts: {last_error}")

    def close(self) -> None:
        self._http.close()


class MockExhausted(RuntimeError):
    """The mock script has no answer for a request."""


Handler = Callable[[Sequence[Message], int], str]


@dataclass
class _Rule:
    pattern: re.Pattern
    on: str
    responses: list
    uses: int = 0


@dataclass
class MockModel:
    """Deterministic scripted client.

    Resolution order for request number ``k`` (0-based): ``responses[k]`` if
    the ordinal list covers it, else the first rule whose regex matches the
    selected message text (``on``: ``last``, ``system`` or ``any``), else
    ``default``.  A rule with several responses cycles through them.  Any
    response may be a callable ``(messages, ordinal) -> str``.
    """

    responses: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    default: object = None
    ordinal: int = 0

    def __post_init__(self):
        self._rules = [self._compile(r) for r in self.rules]
        self._lock = threading.Lock()
        self.calls: list[dict] = []

    @staticmethod
    def _compile(rule) -> _Rule:
        if isinstance(rule, _Rule):
            return rule
        if "responses" in rule:
            responses = list(rule["responses"])
        else:
            responses = [rule["response"]]
        if not responses:
            raise ValueError("mock rule needs at least one response")
        on = rule.get("on", "last")
        if on not in ("last", "system", "any"):
            raise ValueError(f"mock rule 'on' must be last, system or any, not {on!r}")
        return _Rule(re.compile(rule["pattern"], re.S), on, responses)

    @classmethod
    def from_script(cls, script: dict) -> "MockModel":
        unknown = set(script) - {"responses", "rules", "default"}
        if unknown:
            raise ValueError(f"unknown mock script keys: {sorted(unknown)}")
        return cls(
            responses=list(script.get("responses", [])),
            rules=list(script.get("rules", [])),
            default=script.get("default"),
        )

    @classmethod
    def from_file(cls, path) -> "MockModel":
        return cls.from_script(json.loads(Path(path).read_text(encoding="utf-8")))

    @staticmethod
    def _target(rule: _Rule, messages: Sequence[Message]) -> str:
        if rule.on == "system":
            return "\n".join(m.content for m in messages if m.role is Role.SYSTEM)
        if rule.on == "any":
            return "\n".join(m.content for m in messages)
        return messages[-1].content if messages else ""

    def _resolve(self, messages: Sequence[Message], k: int):
        if k < len(self.responses):
            return self.responses[k], "ordinal"
        for i, rule in enumerate(self._rules):
            if rule.pattern.search(self._target(rule, messages)):
                answer = rule.responses[rule.uses % len(rule.responses)]
                rule.uses += 1
                return answer, f"rule{i}"
        if self.default is not None:
            return self.default, "default"
        raise MockExhausted(f"no scripted answer for request {k}")

    def complete(self, messages: Sequence[Message], params: ModelParams) -> str:
        with self._lock:
            k = self.ordinal
            self.ordinal += 1
            answer, source = self._resolve(messages, k)
            self.calls.append({"ordinal": k, "source": source})
        if callable(answer):
            answer = answer(messages, k)
        return str(answer)

    def get_state(self) -> dict:
        with self._lock:
            return {"ordinal": self.ordinal, "rule_uses": [r.uses for r in self._rules]}

    def set_state(self, state: dict) -> None:
        with self._lock:
            self.ordinal = int(state["ordinal"])
            for rule, uses in zip(self._rules, state.get("rule_uses", [])):
                rule.uses = int(uses)

"""Role agents with persistent memory and a JSON tool-call loop.

A role's reply must contain one JSON object ``{"tool": name, "args": {...}}``.
The tool result goes back as a TOOL message; the loop ends when a terminal
tool succeeds or the call budget runs out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as _resources
from typing import Callable

from ..llm import Message, ModelClient, ModelParams, Role
from .config import RoleName
from .workspace import Workspace


@dataclass(frozen=True)
class ToolCall:
    tool: str
    args: dict


def parse_tool_call(text: str) -> ToolCall | None:
    """First JSON object in ``text`` that names a tool."""
    decoder = json.JSONDecoder()
    i = text.find("{")
    while i != -1:
        try:
            obj, _ = decoder.raw_decode(text, i)
        except ValueError:
            obj = None
        if isinstance(obj, dict) and isinstance(obj.get("tool"), str):
            args = obj.get("args", {})
            if isinstance(args, dict):
                return ToolCall(obj["tool"], args)
        i = text.find("{", i + 1)
    return None


Tool = Callable[[dict], dict]


@dataclass
class RoleResult:
    ok: bool
    tool: str | None = None
    args: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    calls: int = 0


PROTOCOL = (
    "Act only through tools. Each reply must contain exactly one JSON object of the form "
    '{"tool": "<name>", "args": {...}}. Tool results come back to you as messages. '
    "Available tools:\n"
)

ROLE_BRIEFS = {
    RoleName.EVOLVER: (
        "You are the Evolver. You improve a Settlers of Catan player between rounds of games. "
        "Study the results so far, then produce the next version."
    ),
    RoleName.ANALYZER: (
        "You are the Analyzer. You read the logs of the latest games and report what the player "
        "did well, what it did badly, and why it won or lost."
    ),
    RoleName.RESEARCHER: (
        "You are the Researcher. You answer questions about Settlers of Catan rules and strategy, "
        "using the search tool when useful."
    ),
    RoleName.STRATEGIZER: (
        "You are the Strategizer. You propose concrete high-level plans the player should follow, "
        "based on the analysis you are given."
    ),
    RoleName.CODER: (
        "You are the Coder. You write the player's decision policy in the restricted policy language: "
        "a Python subset with def, if, for, while, return, comprehensions, lambda and the builtins "
        "len, range, min, max, sum, abs, int, float, str, bool, list, tuple, dict, set, sorted, "
        "enumerate, zip, reversed, any, all, round. No imports, attributes other than list/dict/str "
        "methods, or I/O. The policy must define decide(state, actions) and return an index into "
        "actions or None for a random move. Each action is a dict with index, type, value and text."
    ),
}

TOOL_DOCS = {
    "read_results": "read_results {} -> scores of every version so far and the latest games",
    "view_file": "view_file {\"path\": str} -> text of a file inside the run workspace",
    "edit_prompt": "edit_prompt {\"text\": str} -> replace the player's strategy prompt (ends your turn)",
    "write_policy": "write_policy {\"source\": str, \"summary\": str} -> validate and submit a new policy",
    "web_search": "web_search {\"query\": str} -> short strategy notes",
    "submit_report": "submit_report {\"text\": str} -> hand in your analysis (ends your turn)",
    "submit_notes": "submit_notes {\"text\": str} -> hand in your findings (ends your turn)",
    "submit_strategy": "submit_strategy {\"text\": str} -> hand in your plan (ends your turn)",
    "invoke_role": "invoke_role {\"role\": RESEARCHER|STRATEGIZER|CODER, \"request\": str} -> that role's answer",
    "finish": "finish {\"summary\": str} -> end this cycle",
}


def system_prompt(role: RoleName, tool_names) -> str:
    docs = "\n".join(f"- {TOOL_DOCS[t]}" for t in tool_names)
    return f"{ROLE_BRIEFS[role]}\n\n{PROTOCOL}{docs}"


class RoleAgent:
    """One role's conversation; every message is appended to its transcript file."""

    def __init__(
        self,
        role: RoleName,
        client: ModelClient,
        params: ModelParams,
        workspace: Workspace,
        tool_names,
    ):
        self.role = RoleName(role)
        self.client = client
        self.params = params
        self.workspace = workspace
        self.tool_names = list(tool_names)
        self.memory: list[Message] = []
        self._file = workspace.path(workspace.role_transcript(self.role.value))

    def start(self) -> None:
        self._file.parent.mkdir(parents=True, exist_ok=True)
        self._file.write_text("", encoding="utf-8")
        self.memory = []
        self.add(Message(Role.SYSTEM, system_prompt(self.role, self.tool_names)))

    def restore(self, length: int) -> None:
        """Reload the first ``length`` messages, dropping anything written after a checkpoint."""
        lines = self._file.read_text(encoding="utf-8").splitlines()[:length]
        if len(lines) != length:
            raise ValueError(f"{self._file} holds fewer than {length} messages")
        self.memory = [Message.from_dict(json.loads(line)) for line in lines]
        self._file.write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    def add(self, message: Message) -> None:
        self.memory.append(message)
        with self._file.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(message.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    def run(self, request: str, tools: dict[str, Tool], terminal: set[str], budget: int) -> RoleResult:
        self.add(Message(Role.USER, request))
        calls = 0
        for _ in range(budget):
            reply = self.client.complete(list(self.memory), self.params)
            calls += 1
            self.add(Message(Role.ASSISTANT, reply if reply.strip() else "(empty reply)"))
            call = parse_tool_call(reply)
            if call is None:
                self.add(Message(Role.USER, 'No tool call found. Reply with one JSON object {"tool": ..., "args": {...}}.'))
                continue
            if call.tool not in tools:
                result = {"ok": False, "error": f"unknown tool {call.tool!r}; available: {sorted(tools)}"}
            else:
                try:
                    result = tools[call.tool](call.args)
                except (KeyError, TypeError, ValueError) as exc:
                    result = {"ok": False, "error": f"{type(exc).__name__}: {exc}"}
            self.add(Message(Role.TOOL, json.dumps({"tool": call.tool, **result}, sort_keys=True, ensure_ascii=False)))
            if call.tool in terminal and result.get("ok"):
                return RoleResult(True, call.tool, call.args, result, calls)
        return RoleResult(False, calls=calls)


class OfflineSearch:
    """Deterministic stand-in for web search over bundled strategy notes."""

    def __init__(self):
        text = (_resources.files("catanlab") / "assets" / "strategy_notes.json").read_text(encoding="utf-8")
        self.notes = json.loads(text)

    def __call__(self, query: str, limit: int = 3) -> list[str]:
        words = {w.strip(".,?!").lower() for w in query.split()}
        scored = []
        for i, note in enumerate(self.notes):
            overlap = len(words & set(note["keywords"]))
            scored.append((-overlap, i, note["text"]))
        scored.sort()
        return [text for score, _, text in scored[:limit] if score < 0] or [self.notes[0]["text"]]

"""Run directory layout and path confinement."""

from __future__ import annotations

import json
from pathlib import Path


class WorkspaceError(ValueError):
    """A path escapes the run workspace."""


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class Workspace:
    """All files of one evolution run live under ``root``.

    Layout: ``prompts/iter_N.txt``, ``policies/iter_N.policy``,
    ``transcripts/<role>.jsonl``, ``games/cycle_N/game_M.jsonl`` (player
    transcripts beside them as ``game_M.transcript.jsonl``), ``history.json``
    and ``checkpoint.json``.
    """

    def __init__(self, root):
        self.root = Path(root).resolve()

    def path(self, rel) -> Path:
        candidate = (self.root / rel).resolve()
        if candidate != self.root and self.root not in candidate.parents:
            raise WorkspaceError(f"{rel!s} is outside the workspace")
        return candidate

    def rel(self, path) -> str:
        return Path(path).resolve().relative_to(self.root).as_posix()

    def write_text(self, rel, text: str) -> Path:
        p = self.path(rel)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        return p

    def read_text(self, rel) -> str:
        return self.path(rel).read_text(encoding="utf-8")

    def write_json(self, rel, data) -> Path:
        return self.write_text(rel, dumps(data))

    def read_json(self, rel):
        return json.loads(self.read_text(rel))

    def exists(self, rel) -> bool:
        return self.path(rel).exists()

    def prompt_file(self, iteration: int) -> str:
        return f"prompts/iter_{iteration}.txt"

    def policy_file(self, iteration: int) -> str:
        return f"policies/iter_{iteration}.policy"

    def game_log(self, group, game: int) -> str:
        folder = f"cycle_{group}" if isinstance(group, int) else str(group)
        return f"games/{folder}/game_{game}.jsonl"

    def game_transcript(self, group, game: int) -> str:
        return self.game_log(group, game)[: -len(".jsonl")] + ".transcript.jsonl"

    def role_transcript(self, role: str) -> str:
        return f"transcripts/{role.lower()}.jsonl"

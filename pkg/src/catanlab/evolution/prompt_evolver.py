"""Prompt evolution: an Evolver role rewrites the player's strategy prompt each cycle."""

from __future__ import annotations

import logging
from typing import Callable

from ..bots import DEFAULT_WEIGHTS, HeuristicWeights
from ..llm import LLMPlayer, ModelClient, ModelParams, Renderer, default_strategy
from ..metrics import token_count
from .common import EvolutionInterrupted, argmax_earliest, compact, mean, play_series
from .config import EvolutionConfig, EvolutionMode, PromptVersion, RoleName
from .roles import OfflineSearch, RoleAgent
from .workspace import Workspace, WorkspaceError

log = logging.getLogger(__name__)

MAX_PROMPT_TOKENS = 4000
VIEW_LIMIT = 20_000
EVOLVER_TOOLS = ("read_results", "view_file", "web_search", "edit_prompt")


def make_common_tools(ws: Workspace, results_fn: Callable[[], dict], config: EvolutionConfig, search=None):
    offline = OfflineSearch()

    def read_results(args):
        return {"ok": True, "results": results_fn()}

    def view_file(args):
        rel = str(args["path"])
        try:
            p = ws.path(rel)
        except WorkspaceError as exc:
            return {"ok": False, "error": str(exc)}
        if not p.is_file():
            return {"ok": False, "error": f"no such file: {rel}"}
        text = p.read_text(encoding="utf-8", errors="replace")
        return {"ok": True, "path": rel, "content": text[:VIEW_LIMIT], "truncated": len(text) > VIEW_LIMIT}

    def web_search(args):
        query = str(args["query"])
        if config.web_search == "live":
            if search is None:
                return {"ok": False, "error": "live web search is enabled but no provider is configured"}
            return {"ok": True, "results": list(search(query))}
        return {"ok": True, "results": offline(query)}

    return {"read_results": read_results, "view_file": view_file, "web_search": web_search}


def _client_state(client):
    getter = getattr(client, "get_state", None)
    return getter() if getter is not None else None


def _set_client_state(client, state):
    if state is not None and hasattr(client, "set_state"):
        client.set_state(state)


def _context(cycle: int, cycles: int, current: PromptVersion | None, initial: str, versions: list) -> str:
    text = current.text if current is not None else initial
    label = f"iteration {current.iteration}" if current is not None else "iteration 0 (initial)"
    lines = [
        f"Cycle {cycle} of {cycles}.",
        f"Current strategy prompt ({label}, {token_count(text)} tokens):",
        "<<<",
        text,
        ">>>",
        "Scores so far (average victory points per game):",
    ]
    if not versions:
        lines.append("- none yet")
    for v in versions:
        flag = " (no edit)" if v["no_edit"] else ""
        lines.append(f"- iteration {v['iteration']}: {v['avg_vp']:.2f}{flag}")
    lines.append("Inspect results or game logs if useful, then call edit_prompt with the complete new prompt.")
    return "\n".join(lines)


def run_prompt_evolution(
    config: EvolutionConfig,
    client: ModelClient,
    params: ModelParams,
    workspace,
    initial_prompt: str | None = None,
    weights: HeuristicWeights = DEFAULT_WEIGHTS,
    resume: bool = False,
    stop_after_cycle: int | None = None,
    search=None,
) -> dict:
    """Run every cycle, the final trial and the reference trial; return the history dict."""
    ws = Workspace(workspace)
    games = config.games_for(EvolutionMode.PROMPT)
    evolver = RoleAgent(RoleName.EVOLVER, client, params, ws, EVOLVER_TOOLS)

    if resume and ws.exists("checkpoint.json"):
        cp = ws.read_json("checkpoint.json")
        if cp["history"]["mode"] != EvolutionMode.PROMPT.value:
            raise ValueError("checkpoint belongs to an agent-mode run")
        history = cp["history"]
        evolver.restore(cp["memory"][RoleName.EVOLVER.value])
        _set_client_state(client, cp["client_state"])
        start = cp["next_cycle"]
    else:
        if initial_prompt is None:
            initial_prompt = default_strategy()
        ws.write_text(ws.prompt_file(0), initial_prompt)
        history = {
            "mode": EvolutionMode.PROMPT.value,
            "config": config.to_dict(),
            "model_id": params.model_id,
            "params": params.to_dict(),
            "initial_prompt": initial_prompt,
            "versions": [],
            "cycles": [],
        }
        evolver.start()
        start = 1
    initial_prompt = history["initial_prompt"]

    def results_fn():
        latest = history["cycles"][-1] if history["cycles"] else None
        return {
            "versions": [
                {k: v[k] for k in ("iteration", "avg_vp", "token_len", "no_edit")} for v in history["versions"]
            ],
            "latest_cycle": latest,
            "prompt_files": [ws.prompt_file(v["iteration"]) for v in history["versions"]],
        }

    def make_player_fn(text: str, group):
        def make(seed):
            return LLMPlayer(client, params, Renderer.STRUCTURED, text, seed)

        def after(g, player, result):
            player.write_transcript(ws.path(ws.game_transcript(group, g)))

        return make, after

    for cycle in range(start, config.cycles + 1):
        versions = history["versions"]
        current = PromptVersion.from_dict(versions[-1]) if versions else None
        pending: dict = {}
        tools = make_common_tools(ws, results_fn, config, search)

        def edit_prompt(args, pending=pending):
            text = args["text"]
            if not isinstance(text, str) or not text.strip():
                return {"ok": False, "error": "text must be a non-empty string"}
            n = token_count(text)
            if n > MAX_PROMPT_TOKENS:
                return {"ok": False, "error": f"prompt has {n} tokens; the limit is {MAX_PROMPT_TOKENS}"}
            pending["text"] = text
            return {"ok": True, "token_len": n}

        tools["edit_prompt"] = edit_prompt
        outcome = evolver.run(
            _context(cycle, config.cycles, current, initial_prompt, versions),
            tools,
            terminal={"edit_prompt"},
            budget=config.max_tool_calls,
        )
        no_edit = "text" not in pending
        text = pending.get("text") or (current.text if current is not None else initial_prompt)
        if no_edit:
            log.warning("cycle %d: no prompt edit within %d tool calls; reusing prompt", cycle, config.max_tool_calls)
        ws.write_text(ws.prompt_file(cycle), text)

        make, after = make_player_fn(text, cycle)
        results = play_series(
            ws, cycle, games, config.master_seed, config.evolution_map, make, config.opponent,
            weights, config.vp_target, config.max_turns, after,
        )
        version = PromptVersion(
            iteration=cycle,
            text=text,
            avg_vp=mean(r.vp[0] for r in results),
            games=[r.log_path for r in results],
            no_edit=no_edit,
            tool_calls=outcome.calls,
        )
        versions.append(version.to_dict())
        history["cycles"].append(
            {
                "cycle": cycle,
                "avg_vp": version.avg_vp,
                "no_edit": no_edit,
                "tool_calls": outcome.calls,
                "games": [compact(r) for r in results],
            }
        )
        ws.write_json("history.json", history)
        ws.write_json(
            "checkpoint.json",
            {
                "next_cycle": cycle + 1,
                "history": history,
                "memory": {RoleName.EVOLVER.value: len(evolver.memory)},
                "client_state": _client_state(client),
            },
        )
        if stop_after_cycle is not None and cycle == stop_after_cycle and cycle < config.cycles:
            raise EvolutionInterrupted(f"stopped after cycle {cycle}")

    best = argmax_earliest(history["versions"], key=lambda v: v["avg_vp"])
    trial_make, trial_after = make_player_fn(best["text"], "final")
    trial = play_series(
        ws, "final", config.final_trial_games, config.master_seed, config.final_trial_map,
        trial_make, config.opponent, weights, config.vp_target, config.max_turns, trial_after,
    )

    def make_base(seed):
        return LLMPlayer(client, params, Renderer.BASE, "", seed)

    def base_after(g, player, result):
        player.write_transcript(ws.path(ws.game_transcript("reference", g)))

    reference = play_series(
        ws, "reference", config.final_trial_games, config.master_seed, config.final_trial_map,
        make_base, config.opponent, weights, config.vp_target, config.max_turns, base_after,
    )
    history["best"] = {
        "iteration": best["iteration"],
        "selection_avg_vp": best["avg_vp"],
        "token_len": best["token_len"],
        "score": mean(r.vp[0] for r in trial),
    }
    history["final_trial"] = {
        "agent": "PromptEvolver",
        "map": config.final_trial_map.value,
        "games": [r.to_dict() for r in trial],
    }
    history["reference"] = {
        "kind": "BaseAgent",
        "avg_vp": mean(r.vp[0] for r in reference),
        "games": [r.to_dict() for r in reference],
    }
    ws.write_json("history.json", history)
    ws.write_json(
        "checkpoint.json",
        {
            "next_cycle": config.cycles + 1,
            "history": history,
            "memory": {RoleName.EVOLVER.value: len(evolver.memory)},
            "client_state": _client_state(client),
        },
    )
    return history

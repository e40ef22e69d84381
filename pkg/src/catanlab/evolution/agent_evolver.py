"""Agent evolution: coordinated roles rewrite an executable player policy.

Cycle 0 evaluates the blank template. Every later cycle runs the Analyzer over
the previous cycle's games, then lets the Evolver invoke the Researcher,
Strategizer and Coder within a role-invocation budget. The newest validated
policy is evaluated; a cycle whose final policy write failed validation is
rejected, the previous policy is re-evaluated, and all its games count as
error games.
"""

from __future__ import annotations

import logging

from ..bots import DEFAULT_WEIGHTS, HeuristicWeights
from ..engine import MatchResult
from ..llm import ModelClient, ModelParams
from ..metrics import token_count
from ..policy import PolicyArtifact, PolicyPlayer, blank_artifact, validate_policy
from ..players import make_decider, parse_agent
from ..seeding import derive_seed
from .common import EvolutionInterrupted, argmax_earliest, compact, mean, play_series
from .config import EvolutionConfig, EvolutionMode, RoleName
from .prompt_evolver import _client_state, _set_client_state, make_common_tools
from .roles import RoleAgent
from .workspace import Workspace

log = logging.getLogger(__name__)

SUB_ROLES = (RoleName.RESEARCHER, RoleName.STRATEGIZER, RoleName.CODER)
ROLE_TOOLS = {
    RoleName.EVOLVER: ("read_results", "view_file", "invoke_role", "finish"),
    RoleName.ANALYZER: ("read_results", "view_file", "submit_report"),
    RoleName.RESEARCHER: ("web_search", "submit_notes"),
    RoleName.STRATEGIZER: ("read_results", "view_file", "submit_strategy"),
    RoleName.CODER: ("read_results", "view_file", "write_policy"),
}
SUBMIT_TOOL = {
    RoleName.ANALYZER: "submit_report",
    RoleName.RESEARCHER: "submit_notes",
    RoleName.STRATEGIZER: "submit_strategy",
    RoleName.CODER: "write_policy",
}


def pct_no_errors(cycles: list[dict]) -> float | None:
    """Share of evaluation games in cycles 1..N that ran without a policy error."""
    games = [e for c in cycles if c["cycle"] >= 1 for e in c["game_errors"]]
    if not games:
        return None
    return 100.0 * sum(1 for e in games if not e) / len(games)


def _artifact_record(artifact: PolicyArtifact, results: list[MatchResult]) -> dict:
    d = artifact.to_dict()
    d["token_len"] = token_count(artifact.source)
    d["games"] = [r.log_path for r in results]
    return d


def _restore_artifact(record: dict) -> PolicyArtifact:
    keys = ("iteration", "source", "change_summary", "avg_vp", "runtime_error_games", "validated", "violations")
    artifact = PolicyArtifact(**{k: record[k] for k in keys})
    validate_policy(artifact)
    return artifact


def run_agent_evolution(
    config: EvolutionConfig,
    client: ModelClient,
    params: ModelParams,
    workspace,
    weights: HeuristicWeights = DEFAULT_WEIGHTS,
    resume: bool = False,
    stop_after_cycle: int | None = None,
    search=None,
) -> dict:
    """Run cycle 0 and every evolution cycle, then the optional final trial; return the history dict."""
    ws = Workspace(workspace)
    games = config.games_for(EvolutionMode.AGENT)
    agents = {role: RoleAgent(role, client, params, ws, ROLE_TOOLS[role]) for role in ROLE_TOOLS}

    def checkpoint(next_cycle: int):
        ws.write_json("history.json", history)
        ws.write_json(
            "checkpoint.json",
            {
                "next_cycle": next_cycle,
                "history": history,
                "memory": {role.value: len(agent.memory) for role, agent in agents.items()},
                "client_state": _client_state(client),
            },
        )

    def evaluate(artifact: PolicyArtifact, group, n=games, template=config.evolution_map):
        errors: list[list[str]] = []

        def make(seed):
            return PolicyPlayer(artifact, seed)

        def after(g, player, result):
            errors.append(list(player.errors))

        results = play_series(
            ws, group, n, config.master_seed, template, make, config.opponent,
            weights, config.vp_target, config.max_turns, after,
        )
        return results, errors

    if resume and ws.exists("checkpoint.json"):
        cp = ws.read_json("checkpoint.json")
        if cp["history"]["mode"] != EvolutionMode.AGENT.value:
            raise ValueError("checkpoint belongs to a prompt-mode run")
        history = cp["history"]
        for role, agent in agents.items():
            agent.restore(cp["memory"][role.value])
        _set_client_state(client, cp["client_state"])
        start = cp["next_cycle"]
        current = _restore_artifact(history["artifacts"][history["current"]])
    else:
        for agent in agents.values():
            agent.start()
        history = {
            "mode": EvolutionMode.AGENT.value,
            "config": config.to_dict(),
            "model_id": params.model_id,
            "params": params.to_dict(),
            "artifacts": [],
            "cycles": [],
            "current": 0,
        }
        current = blank_artifact()
        ws.write_text(ws.policy_file(0), current.source)
        results, errors = evaluate(current, 0)
        current.avg_vp = mean(r.vp[0] for r in results)
        current.runtime_error_games = sum(1 for e in errors if e)
        history["artifacts"].append(_artifact_record(current, results))
        history["cycles"].append(
            {
                "cycle": 0,
                "avg_vp": current.avg_vp,
                "artifact": 0,
                "rejected": False,
                "no_policy": False,
                "role_invocations": 0,
                "game_errors": [bool(e) for e in errors],
                "error_messages": [e[:3] for e in errors],
                "games": [compact(r) for r in results],
            }
        )
        checkpoint(1)
        start = 1

    def results_fn():
        latest = history["cycles"][-1]
        return {
            "artifacts": [
                {k: a[k] for k in ("iteration", "avg_vp", "runtime_error_games", "token_len", "change_summary")}
                for a in history["artifacts"]
            ],
            "latest_cycle": {k: latest[k] for k in ("cycle", "avg_vp", "rejected", "no_policy", "games")},
            "current_policy_file": ws.policy_file(history["artifacts"][history["current"]]["iteration"]),
        }

    for cycle in range(start, config.cycles + 1):
        common = make_common_tools(ws, results_fn, config, search)
        previous = history["cycles"][-1]

        def submit(args):
            text = args["text"]
            if not isinstance(text, str) or not text.strip():
                return {"ok": False, "error": "text must be a non-empty string"}
            return {"ok": True}

        report = agents[RoleName.ANALYZER].run(
            f"Cycle {cycle}. Analyse the {len(previous['games'])} games of cycle {previous['cycle']} "
            f"(logs under games/cycle_{previous['cycle']}/) and submit_report.",
            {"read_results": common["read_results"], "view_file": common["view_file"], "submit_report": submit},
            terminal={"submit_report"},
            budget=config.max_tool_calls,
        )
        report_text = report.args.get("text", "") if report.ok else "(the Analyzer did not submit a report)"

        writes: list[PolicyArtifact] = []

        def write_policy(args):
            source = args["source"]
            if not isinstance(source, str):
                return {"ok": False, "error": "source must be a string"}
            artifact = PolicyArtifact(cycle, source, str(args.get("summary", "")))
            violations = validate_policy(artifact)
            writes.append(artifact)
            if violations:
                return {"ok": False, "validated": False, "violations": violations[:10]}
            return {"ok": True, "validated": True}

        role_tools = {
            RoleName.RESEARCHER: {"web_search": common["web_search"], "submit_notes": submit},
            RoleName.STRATEGIZER: {
                "read_results": common["read_results"], "view_file": common["view_file"], "submit_strategy": submit,
            },
            RoleName.CODER: {
                "read_results": common["read_results"], "view_file": common["view_file"], "write_policy": write_policy,
            },
        }
        invocations = 0

        def invoke_role(args):
            nonlocal invocations
            try:
                role = RoleName(str(args["role"]).upper())
            except ValueError:
                return {"ok": False, "error": f"role must be one of {[r.value for r in SUB_ROLES]}"}
            if role not in SUB_ROLES:
                return {"ok": False, "error": f"role must be one of {[r.value for r in SUB_ROLES]}"}
            if invocations >= config.max_role_invocations:
                return {"ok": False, "error": f"role invocation budget of {config.max_role_invocations} is spent"}
            invocations += 1
            before = len(writes)
            outcome = agents[role].run(
                str(args["request"]), role_tools[role], terminal={SUBMIT_TOOL[role]}, budget=config.max_tool_calls
            )
            if role is RoleName.CODER:
                if len(writes) == before:
                    return {"ok": False, "role": role.value, "error": "the Coder did not write a policy"}
                last = writes[-1]
                return {
                    "ok": last.validated,
                    "role": role.value,
                    "validated": last.validated,
                    "violations": last.violations[:10],
                    "summary": last.change_summary,
                }
            if not outcome.ok:
                return {"ok": False, "role": role.value, "error": f"{role.value} did not answer within its budget"}
            return {"ok": True, "role": role.value, "answer": outcome.args["text"]}

        def finish(args):
            return {"ok": True}

        evolver = agents[RoleName.EVOLVER].run(
            "\n".join(
                [
                    f"Cycle {cycle} of {config.cycles}. The current policy scored "
                    f"{history['artifacts'][history['current']]['avg_vp']:.2f} average victory points.",
                    "Analyzer report:",
                    report_text,
                    f"You may invoke roles up to {config.max_role_invocations} times. "
                    "Have the Coder write a new policy, then call finish.",
                ]
            ),
            {**{k: common[k] for k in ("read_results", "view_file")}, "invoke_role": invoke_role, "finish": finish},
            terminal={"finish"},
            budget=config.max_role_invocations + config.max_tool_calls,
        )

        rejected = bool(writes) and not writes[-1].validated
        no_policy = not writes
        if writes and writes[-1].validated:
            current = writes[-1]
            ws.write_text(ws.policy_file(cycle), current.source)
        else:
            if rejected:
                log.warning("cycle %d: final policy failed validation; re-evaluating the previous policy", cycle)
                ws.write_text(f"policies/iter_{cycle}.rejected.policy", writes[-1].source)
            else:
                log.warning("cycle %d: no policy written; keeping the previous policy", cycle)
            record = history["artifacts"][history["current"]]
            current = _restore_artifact(record)
            current.iteration = cycle
            current.change_summary = f"re-evaluation of iteration {record['iteration']}"

        results, errors = evaluate(current, cycle)
        current.avg_vp = mean(r.vp[0] for r in results)
        current.runtime_error_games = sum(1 for e in errors if e)
        game_errors = [True] * len(results) if rejected else [bool(e) for e in errors]
        if not rejected and not no_policy:
            history["artifacts"].append(_artifact_record(current, results))
            history["current"] = len(history["artifacts"]) - 1
        history["cycles"].append(
            {
                "cycle": cycle,
                "avg_vp": current.avg_vp,
                "artifact": history["artifacts"][history["current"]]["iteration"],
                "rejected": rejected,
                "no_policy": no_policy,
                "violations": writes[-1].violations[:10] if rejected else [],
                "role_invocations": invocations,
                "finished": evolver.ok,
                "analyzer_report": report.ok,
                "game_errors": game_errors,
                "error_messages": [e[:3] for e in errors],
                "games": [compact(r) for r in results],
            }
        )
        history["pct_no_errors"] = pct_no_errors(history["cycles"])
        checkpoint(cycle + 1)
        if stop_after_cycle is not None and cycle == stop_after_cycle and cycle < config.cycles:
            raise EvolutionInterrupted(f"stopped after cycle {cycle}")

    best = argmax_earliest(history["artifacts"], key=lambda a: a["avg_vp"])
    history["pct_no_errors"] = pct_no_errors(history["cycles"])
    history["best"] = {
        "iteration": best["iteration"],
        "score": best["avg_vp"],
        "token_len": best["token_len"],
    }
    history["reference"] = {"kind": "cycle 0", "avg_vp": history["artifacts"][0]["avg_vp"]}
    if config.final_trial_games > 0:
        artifact = _restore_artifact(best)
        trial, trial_errors = evaluate(artifact, "final", config.final_trial_games, config.final_trial_map)
        history["final_trial"] = {
            "agent": "AgentEvolver",
            "map": config.final_trial_map.value,
            "avg_vp": mean(r.vp[0] for r in trial),
            "error_games": sum(1 for e in trial_errors if e),
            "games": [r.to_dict() for r in trial],
        }
        random_spec = parse_agent("RANDOM")
        baseline = play_series(
            ws, "reference", config.final_trial_games, config.master_seed, config.final_trial_map,
            lambda seed: make_decider(random_spec, derive_seed(seed, "random-reference")),
            config.opponent, weights, config.vp_target, config.max_turns,
        )
        history["random_baseline"] = {
            "kind": "RandomPlayer",
            "avg_vp": mean(r.vp[0] for r in baseline),
            "games": [r.to_dict() for r in baseline],
        }
    checkpoint(config.cycles + 1)
    return history


"""Command-line entry point: play, evolve prompt|agent, report.

Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .board import MapTemplate
from .bots import DEFAULT_WEIGHTS, HeuristicWeights
from .engine import MatchResult
from .evolution import EvolutionConfig, run_agent_evolution, run_prompt_evolution
from .evolution.workspace import dumps
from .llm import (
    ConfigError,
    HttpChatClient,
    MockModel,
    ModelClient,
    ModelError,
    ModelParams,
    RateLimiter,
    provider_for_model,
)
from .llm.client import MockExhausted
from .metrics import ReportFormat, aggregate, emit_report, evolution_summary
from .players import UnknownAgentError, load_policy_file, parse_agent
from .tournament import SeriesSpec, run_series

log = logging.getLogger("catanlab")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or configuration; reported with exit code 2."""


@dataclass
class WorkbenchConfig:
    map: MapTemplate = MapTemplate.FULL
    vp_target: int = 10
    max_turns: int = 500
    weights: HeuristicWeights = DEFAULT_WEIGHTS
    models: dict = field(default_factory=dict)  # agent name or "default" -> ModelParams
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    out: str = "runs"
    workers: int | None = None  # None: one per CPU for bot games
    rate_limit_rpm: float | None = None

    def __post_init__(self):
        self.map = MapTemplate(self.map)
        if self.vp_target < 2 or self.max_turns < 1:
            raise ValueError("vp_target must be >= 2 and max_turns >= 1")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def params_for(self, agent_name: str) -> ModelParams:
        return self.models.get(agent_name) or self.models.get("default") or ModelParams()

    def effective_workers(self) -> int:
        return self.workers if self.workers is not None else (os.cpu_count() or 1)

    def to_dict(self) -> dict:
        return {
            "map": self.map.value,
            "vp_target": self.vp_target,
            "max_turns": self.max_turns,
            "weights": self.weights.to_dict(),
            "models": {k: v.to_dict() for k, v in sorted(self.models.items())},
            "evolution": self.evolution.to_dict(),
            "out": self.out,
            "workers": self.workers,
            "rate_limit_rpm": self.rate_limit_rpm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WorkbenchConfig":
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "weights" in data:
            data["weights"] = HeuristicWeights.from_dict(data["weights"])
        if "models" in data:
            data["models"] = {k: ModelParams.from_dict(v) for k, v in data["models"].items()}
        if "evolution" in data:
            data["evolution"] = EvolutionConfig.from_dict(data["evolution"])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "WorkbenchConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def dumps(self) -> str:
        return dumps(self.to_dict())


def _map(value: str) -> MapTemplate:
    try:
        return MapTemplate(value.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"map must be one of {[m.value for m in MapTemplate]}") from None


def _format(value: str) -> ReportFormat:
    try:
        return ReportFormat(value.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"format must be one of {[f.value for f in ReportFormat]}") from None


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--map", type=_map, help="FULL or MINI")
    common.add_argument("--model", help="model id for LLM agents (default from config, else 'mock')")
    common.add_argument("--config", help="WorkbenchConfig JSON file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=_positive, help="worker processes for bot-only games")
    common.add_argument("--mock", metavar="SCRIPT", help="MockModel JSON script instead of a live provider")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="catanlab", description="Settlers of Catan agent workbench")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    play = sub.add_parser("play", parents=[common], help="play a series of games between two agents")
    play.add_argument("agent_a", help="RANDOM, ALPHABETA, BASE, STRUCTURED, PROMPT:<file> or POLICY:<file>")
    play.add_argument("agent_b")
    play.add_argument("--games", type=_positive, default=1)
    play.add_argument("--format", type=_format, default=ReportFormat.CSV)

    evolve = sub.add_parser("evolve", parents=[common], help="run an evolution loop")
    evolve.add_argument("mode", choices=["prompt", "agent"])
    evolve.add_argument("--cycles", type=_positive)
    evolve.add_argument("--games-per-cycle", type=_positive)
    evolve.add_argument("--final-trial-games", type=int)
    evolve.add_argument("--opponent")
    evolve.add_argument("--initial-prompt", help="prompt mode: starting strategy text file")
    evolve.add_argument("--resume", metavar="WORKSPACE", help="continue an interrupted run in WORKSPACE")

    report = sub.add_parser("report", help="write metrics tables for a run directory")
    report.add_argument("path", help="evolution workspace (history.json) or play output (results.jsonl)")
    report.add_argument("--format", type=_format, default=ReportFormat.MARKDOWN)
    report.add_argument("--out", help="output directory (default: the input directory)")
    report.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(args) -> WorkbenchConfig:
    try:
        cfg = WorkbenchConfig.load(args.config) if args.config else WorkbenchConfig()
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"cannot load config {args.config}: {exc}") from exc
    if args.map is not None:
        cfg.map = args.map
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    if args.model is not None:
        cfg.models = {**cfg.models, "default": replace(cfg.params_for("default"), model_id=args.model)}
    return cfg


def make_client(cfg: WorkbenchConfig, mock: str | None, model_ids) -> ModelClient:
    """MockModel from a script, or a live client for the provider of the model ids."""
    if mock is not None:
        try:
            return MockModel.from_file(mock)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load mock script {mock}: {exc}") from exc
    providers = {provider_for_model(m) for m in model_ids}
    if len(providers) != 1:
        raise UsageError(f"one live provider per run, got {sorted(providers)}")
    limiter = RateLimiter(cfg.rate_limit_rpm) if cfg.rate_limit_rpm else None
    try:
        return HttpChatClient(providers.pop(), rate_limiter=limiter)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc


def cmd_play(args) -> int:
    cfg = _load_config(args)
    try:
        specs = (parse_agent(args.agent_a), parse_agent(args.agent_b))
    except UnknownAgentError as exc:
        raise UsageError(str(exc)) from exc
    for spec in specs:
        if spec.path is not None and not spec.path.is_file():
            raise UsageError(f"{spec.name}: no such file {spec.path}")
        if spec.kind == "POLICY":
            try:
                load_policy_file(spec.path)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
    params = tuple(cfg.params_for(s.name) if s.needs_model else None for s in specs)
    client = None
    if any(s.needs_model for s in specs):
        client = make_client(cfg, args.mock, [p.model_id for p in params if p is not None])
    series = SeriesSpec(
        agents=specs,
        games=args.games,
        seed=args.seed if args.seed is not None else 0,
        template=cfg.map,
        vp_target=cfg.vp_target,
        max_turns=cfg.max_turns,
        weights=cfg.weights,
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = run_series(series, out, cfg.effective_workers(), client, params)
    (out / "run.json").write_text(
        dumps(
            {
                "agents": [s.name for s in specs],
                "model_ids": [p.model_id if p else "" for p in params],
                "seed": series.seed,
                "config": cfg.to_dict(),
            }
        ),
        encoding="utf-8",
    )
    (out / "results.jsonl").write_text(
        "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in results), encoding="utf-8"
    )
    rows = [
        aggregate(results, i, spec.name, params[i].model_id if params[i] else "") for i, spec in enumerate(specs)
    ]
    emit_report(rows, None, args.format, out)
    for row in rows:
        print(
            f"{row.agent_name}: win_rate={row.win_rate:.2f} avg_vp={row.avg_vp:.2f} "
            f"avg_turns={row.avg_turns:.2f} games={row.games}"
        )
    return EXIT_OK


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    ev = cfg.evolution
    if args.resume:
        workspace = Path(args.resume)
        history_file = workspace / "checkpoint.json"
        if not history_file.is_file():
            raise UsageError(f"{workspace} has no checkpoint.json to resume from")
        history = json.loads(history_file.read_text(encoding="utf-8"))["history"]
        if history["mode"] != args.mode:
            raise UsageError(f"{workspace} holds a {history['mode']}-mode run")
        ev = EvolutionConfig.from_dict(history["config"])
        params = ModelParams.from_dict(history["params"])
    else:
        workspace = Path(cfg.out)
        overrides = {
            "cycles": args.cycles,
            "games_per_cycle": args.games_per_cycle,
            "final_trial_games": args.final_trial_games,
            "opponent": args.opponent,
            "master_seed": args.seed,
            "evolution_map": args.map,
        }
        try:
            ev = replace(ev, **{k: v for k, v in overrides.items() if v is not None})
            if ev.opponent is not None:
                parse_agent(ev.opponent)
        except (ValueError, UnknownAgentError) as exc:
            raise UsageError(str(exc)) from exc
        params = cfg.params_for("EVOLVER")
    initial = None
    if args.initial_prompt:
        if args.mode != "prompt":
            raise UsageError("--initial-prompt applies to prompt mode only")
        initial = Path(args.initial_prompt).read_text(encoding="utf-8")
    client = make_client(cfg, args.mock, [params.model_id])
    if args.mode == "prompt":
        history = run_prompt_evolution(
            ev, client, params, workspace, initial_prompt=initial, weights=cfg.weights, resume=bool(args.resume)
        )
    else:
        history = run_agent_evolution(ev, client, params, workspace, weights=cfg.weights, resume=bool(args.resume))
    print(json.dumps(evolution_summary(history), sort_keys=True))
    return EXIT_OK


def _rows_from_history(history: dict) -> list:
    rows = []
    model_id = history.get("model_id", "")
    trial = history.get("final_trial")
    if trial:
        results = [MatchResult.from_dict(g) for g in trial["games"]]
        rows.append(aggregate(results, 0, trial["agent"], model_id, history.get("pct_no_errors")))
    for key in ("reference", "random_baseline"):
        ref = history.get(key) or {}
        if ref.get("games"):
            results = [MatchResult.from_dict(g) for g in ref["games"]]
            rows.append(aggregate(results, 0, ref["kind"], model_id if ref["kind"] == "BaseAgent" else ""))
    return rows


def cmd_report(args) -> int:
    src = Path(args.path)
    out = Path(args.out) if args.out else src
    if (src / "history.json").is_file():
        history = json.loads((src / "history.json").read_text(encoding="utf-8"))
        rows = _rows_from_history(history)
    elif (src / "results.jsonl").is_file():
        history = None
        results = [MatchResult.from_dict(json.loads(line)) for line in (src / "results.jsonl").read_text().splitlines()]
        if not results:
            raise UsageError(f"{src}/results.jsonl is empty")
        run = json.loads((src / "run.json").read_text(encoding="utf-8")) if (src / "run.json").is_file() else {}
        names = run.get("agents", ["P0", "P1"])
        models = run.get("model_ids", ["", ""])
        rows = [aggregate(results, i, names[i], models[i]) for i in (0, 1)]
    else:
        raise UsageError(f"{src} holds neither history.json nor results.jsonl")
    for path in emit_report(rows, history, args.format, out):
        print(path)
    return EXIT_OK


COMMANDS = {"play": cmd_play, "evolve": cmd_evolve, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"catanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, MockExhausted, OSError, ValueError) as exc:
        print(f"catanlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

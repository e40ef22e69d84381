"""Tournament metrics, improvement/token statistics and report files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .engine import MatchResult

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsRow:
    agent_name: str
    model_id: str
    games: int
    win_rate: float
    avg_vp: float
    avg_turns: float
    avg_settlements: float
    avg_cities: float
    avg_roads_held: float
    avg_army_held: float
    avg_dev_vp: float
    pct_no_errors: float | None = None
    avg_road_pieces: float = 0.0

    def __post_init__(self):
        if self.games < 1:
            raise ValueError("games must be >= 1")
        if not 0.0 <= self.win_rate <= 1.0:
            raise ValueError("win_rate must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsRow":
        return cls(**data)


COLUMNS = [f.name for f in fields(MetricsRow)]


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def aggregate(
    results: Sequence[MatchResult],
    agent_player: int,
    agent_name: str = "",
    model_id: str = "",
    pct_no_errors: float | None = None,
) -> MetricsRow:
    """Per-game means from ``agent_player``'s point of view (VP includes hidden cards)."""
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    if agent_player not in (0, 1):
        raise ValueError("agent_player must be 0 or 1")
    p = agent_player
    return MetricsRow(
        agent_name=agent_name,
        model_id=model_id,
        games=len(results),
        win_rate=_mean(r.winner == p for r in results),
        avg_vp=_mean(r.vp[p] for r in results),
        avg_turns=_mean(r.turns for r in results),
        avg_settlements=_mean(r.settlements[p] for r in results),
        avg_cities=_mean(r.cities[p] for r in results),
        avg_roads_held=_mean(r.longest_road_held[p] for r in results),
        avg_army_held=_mean(r.largest_army_held[p] for r in results),
        avg_dev_vp=_mean(r.dev_vp[p] for r in results),
        pct_no_errors=pct_no_errors,
        avg_road_pieces=_mean(r.road_pieces[p] for r in results),
    )


def percent_improvement(candidate: float, reference: float) -> float:
    """``100·(candidate − reference)/reference``, unrounded."""
    if not reference > 0:
        raise ValueError("reference must be positive")
    return 100.0 * (candidate - reference) / reference


def format_percent(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.1f}%"


def token_count(text: str) -> int:
    """Number of whitespace-separated tokens."""
    return len(text.split())


def _tokens_of(item) -> int:
    if isinstance(item, int):
        return item
    if isinstance(item, str):
        return token_count(item)
    if isinstance(item, dict):
        return item["token_len"] if "token_len" in item else token_count(item.get("source") or item["text"])
    token_len = getattr(item, "token_len", None)
    if token_len is not None:
        return token_len
    return token_count(getattr(item, "source", None) or item.text)


def token_change_detail(versions: Sequence) -> tuple[float | None, list[int]]:
    """Mean consecutive relative change and the indices of skipped pairs."""
    if len(versions) < 2:
        raise ValueError("need at least two versions")
    counts = [_tokens_of(v) for v in versions]
    changes, skipped = [], []
    for i in range(len(counts) - 1):
        if counts[i] == 0:
            skipped.append(i)
            log.warning("token change pair %d skipped: zero-length version", i)
            continue
        changes.append(100.0 * abs(counts[i + 1] - counts[i]) / counts[i])
    return (_mean(changes) if changes else None), skipped


def percent_token_change(versions: Sequence) -> float | None:
    return token_change_detail(versions)[0]


# -- reports -------------------------------------------------------------------


class ReportFormat(str, Enum):
    CSV = "CSV"
    JSON = "JSON"
    MARKDOWN = "MARKDOWN"


APPENDIX_HEADERS = [
    "Agent", "Win Rate", "Avg VP", "Avg Turns", "Avg Settles", "Avg Cities", "Avg Roads", "Avg Army", "Avg Dev VP",
]
EVOLUTION_HEADERS = ["Model", "% Improvement", "Length (Tokens)", "% Change (Tokens)", "% No Errors"]


def _num(value, digits: int = 2) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}f}"


def _json_value(value):
    if isinstance(value, float):
        return round(value, 6)
    return value


def evolution_summary(history: dict) -> dict:
    """The evolution-table quantities for one run, raw inputs included."""
    mode = history.get("mode")
    versions = history.get("versions") or history.get("artifacts") or []
    best = history.get("best") or {}
    reference = history.get("reference") or {}
    ref_vp = reference.get("avg_vp")
    cand_vp = best.get("score")
    improvement = None
    if ref_vp is not None and cand_vp is not None and ref_vp > 0:
        improvement = percent_improvement(cand_vp, ref_vp)
    chain = [v for v in versions if v.get("source") or v.get("text")]
    change = percent_token_change(chain) if len(chain) >= 2 else None
    return {
        "mode": mode,
        "model_id": history.get("model_id", ""),
        "best_iteration": best.get("iteration"),
        "best_score": cand_vp,
        "reference_kind": reference.get("kind"),
        "reference_avg_vp": ref_vp,
        "percent_improvement": improvement,
        "length_tokens": best.get("token_len"),
        "percent_token_change": change,
        "pct_no_errors": history.get("pct_no_errors"),
    }


def evolution_curve_csv(history: dict | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "avg_vp"])
    for cycle in (history or {}).get("cycles", []):
        writer.writerow([cycle["cycle"], _num(cycle.get("avg_vp"), 4)])
    return buf.getvalue()


def rows_csv(rows: Iterable[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([row.agent_name, row.model_id] + [_num(getattr(row, c)) for c in COLUMNS[2:]])
    return buf.getvalue()


def rows_json(rows: Iterable[MetricsRow], history: dict | None) -> str:
    data = {"rows": [{k: _json_value(v) for k, v in r.to_dict().items()} for r in rows]}
    if history is not None:
        data["evolution"] = {k: _json_value(v) for k, v in evolution_summary(history).items()}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _md_table(headers, body) -> list[str]:
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    lines += ["| " + " | ".join(cells) + " |" for cells in body]
    return lines


def rows_markdown(rows: Iterable[MetricsRow], history: dict | None) -> str:
    body = [
        [
            r.agent_name,
            _num(r.win_rate),
            _num(r.avg_vp),
            _num(r.avg_turns),
            _num(r.avg_settlements),
            _num(r.avg_cities),
            _num(r.avg_roads_held),
            _num(r.avg_army_held),
            _num(r.avg_dev_vp),
        ]
        for r in rows
    ]
    lines = _md_table(APPENDIX_HEADERS, body)
    if history is not None:
        s = evolution_summary(history)
        no_errors = s["pct_no_errors"]
        lines += [""] + _md_table(
            EVOLUTION_HEADERS,
            [
                [
                    s["model_id"] or "-",
                    format_percent(s["percent_improvement"]),
                    "-" if s["length_tokens"] is None else str(s["length_tokens"]),
                    format_percent(s["percent_token_change"]),
                    "-" if no_errors is None else format_percent(no_errors),
                ]
            ],
        )
    return "\n".join(lines) + "\n"


def emit_report(
    rows: Sequence[MetricsRow],
    history: dict | None,
    format: ReportFormat | str,
    out_dir,
) -> list[Path]:
    """Write the metrics table in ``format`` plus ``evolution_curve.csv``."""
    fmt = format if isinstance(format, ReportFormat) else ReportFormat(str(format).upper())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt is ReportFormat.CSV:
        main, text = out / "metrics.csv", rows_csv(rows)
    elif fmt is ReportFormat.JSON:
        main, text = out / "metrics.json", rows_json(rows, history)
    else:
        main, text = out / "metrics.md", rows_markdown(rows, history)
    curve = out / "evolution_curve.csv"
    main.write_text(text, encoding="utf-8")
    curve.write_text(evolution_curve_csv(history), encoding="utf-8")
    return [main, curve]

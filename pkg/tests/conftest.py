import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from catanlab.board import MapTemplate  # noqa: E402
from catanlab.engine import GameConfig, Phase, legal_actions, new_game, step  # noqa: E402


def random_states(seed: int, template=MapTemplate.FULL, every: int = 1, limit: int | None = None):
    """Yield states along one seeded random playout."""
    rng = random.Random(seed)
    state = new_game(GameConfig(template=template), seed)
    k = 0
    while state.phase is not Phase.TERMINAL:
        if k % every == 0:
            yield state
        legal = legal_actions(state)
        nxt = state.copy()
        step(nxt, legal[rng.randrange(len(legal))])
        state = nxt
        k += 1
        if limit is not None and k >= limit:
            return


def sample_states(n: int, seed: int = 0, template=MapTemplate.FULL, every: int = 7) -> list:
    out = []
    g = 0
    while len(out) < n:
        for s in random_states(seed * 1000 + g, template, every):
            if s.phase is Phase.PLAY:
                out.append(s)
            if len(out) >= n:
                break
        g += 1
    return out


@pytest.fixture(scope="session")
def mid_game_states():
    return sample_states(60, seed=1)


def branching_states(n: int, seed: int = 0, min_legal: int = 3, template=MapTemplate.FULL) -> list:
    """PLAY-phase states with at least ``min_legal`` moves, from consecutive playouts."""
    out = []
    g = 0
    while len(out) < n:
        for i, s in enumerate(random_states(seed * 1000 + g, template)):
            if i % 3 == 0 and s.phase is Phase.PLAY and len(legal_actions(s)) >= min_legal:
                out.append(s)
                if len(out) >= n:
                    break
        g += 1
    return out


# -- acceptance summary -------------------------------------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_c"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(report.user_properties).get("detail", "")
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = detail or report.longrepr[2]
        _CRITERIA[name] = f"{outcome}  {name}  {detail}".rstrip()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[1][1:])):
        terminalreporter.write_line(_CRITERIA[name])

import builtins
import copy
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catanlab.engine import legal_actions
from catanlab.policy import (
    PolicyArtifact,
    PolicyPlayer,
    actions_view,
    blank_artifact,
    execute_policy,
    smoke_states,
    state_view,
    validate_policy,
)
from catanlab.sandbox import BLANK_TEMPLATE, BudgetExceeded, PolicyRuntimeError, compile_policy
from conftest import branching_states

CANNED = '''
PRIORITY = ["BUILD_CITY", "BUILD_SETTLEMENT", "BUILD_ROAD", "BUY_DEV_CARD"]

def score(a):
    if a["type"] in PRIORITY:
        return len(PRIORITY) - PRIORITY.index(a["type"])
    return 0

def decide(state, actions):
    best = max(actions, key=lambda a: (score(a), -a["index"]))
    if score(best) == 0:
        return None
    return best["index"]
'''

RICHER = '''
def production(state):
    total = 0.0
    me = state["players"][state["me"]]
    for n in state["nodes"]:
        if n["id"] in me["settlements"] or n["id"] in me["cities"]:
            for tile in n["tiles"]:
                total = total + tile["prob"] * 36
    return total

def decide(state, actions):
    names = sorted({a["type"] for a in actions})
    counts = {}
    for a in actions:
        counts[a["type"]] = counts.get(a["type"], 0) + 1
    picks = [a["index"] for a in actions if a["type"] == names[-1]]
    k = (len(names) * 7 + sum(counts.values()) + int(production(state))) % len(picks)
    return picks[k] if picks else None
'''


def hostile_suite(tmp_path):
    target = tmp_path / "escaped.txt"
    return {
        "unbounded loop": "def decide(s, a):\n    while True:\n        pass\n",
        "import": "import os\ndef decide(s, a):\n    return 0\n",
        "from import": "from os import system\ndef decide(s, a):\n    return 0\n",
        "dunder walk": "def decide(s, a):\n    return ().__class__.__bases__[0]\n",
        "open": f"def decide(s, a):\n    open({str(target)!r}, 'w')\n    return 0\n",
        "eval": "def decide(s, a):\n    return eval('1')\n",
        "exec": "def decide(s, a):\n    exec('x = 1')\n    return 0\n",
        "getattr": "def decide(s, a):\n    return getattr(s, 'x')\n",
        "globals": "def decide(s, a):\n    return globals()\n",
        "unbounded recursion": "def f(n):\n    return f(n + 1)\ndef decide(s, a):\n    return f(0)\n",
        "list bomb": "def decide(s, a):\n    x = [0] * (10**9)\n    return 0\n",
        "string bomb": "def decide(s, a):\n    x = 'a'\n    for i in range(100):\n        x = x + x\n    return 0\n",
        "power bomb": "def decide(s, a):\n    return 10**10**10\n",
        "huge range": "def decide(s, a):\n    return sum(range(10**12))\n",
        "code object": "def decide(s, a):\n    f = lambda: 0\n    return f.__code__\n",
        "format escape": "def decide(s, a):\n    return '{0.__class__}'.format(1)\n",
        "deep expression": "def decide(s, a):\n    return " + "+".join(["1"] * 5000) + "\n",
        "sort bomb": "def decide(s, a):\n    x = list(range(90000))\n    for i in range(100):\n        x = sorted(x)\n    return 0\n",
        "class": "class A:\n    pass\ndef decide(s, a):\n    return 0\n",
        "global write": "X = 0\ndef decide(s, a):\n    global X\n    X = 1\n    return 0\n",
        "try swallow": "def decide(s, a):\n    try:\n        return 1 // 0\n    except Exception:\n        return 0\n",
        "with": "def decide(s, a):\n    with s:\n        return 0\n",
        "async": "async def decide(s, a):\n    return 0\n",
        "yield": "def decide(s, a):\n    yield 0\n",
    }, target


def test_hostile_policies_rejected_without_io(tmp_path, monkeypatch):
    opened = []
    real_open = builtins.open

    def spy_open(*args, **kwargs):
        opened.append(args[0] if args else kwargs.get("file"))
        return real_open(*args, **kwargs)

    smoke_states()  # build the fixed sample before watching for file access
    suite, target = hostile_suite(tmp_path)
    monkeypatch.setattr(builtins, "open", spy_open)
    for name, source in suite.items():
        artifact = PolicyArtifact(1, source)
        violations = validate_policy(artifact)
        assert violations, name
        assert not artifact.validated, name
    assert opened == []
    assert not target.exists()


def test_hostile_budget_and_limits_named(tmp_path):
    suite, _ = hostile_suite(tmp_path)
    expect = {
        "unbounded loop": "BudgetExceeded",
        "huge range": "BudgetExceeded",
        "unbounded recursion": "call depth",
        "list bomb": "collection too large",
        "power bomb": "integer too large",
        "open": "unknown name 'open'",
        "import": "Import is not allowed",
    }
    for name, fragment in expect.items():
        violations = validate_policy(PolicyArtifact(1, suite[name]))
        assert any(fragment in v for v in violations), (name, violations)


def test_empty_source():
    assert validate_policy(PolicyArtifact(1, "")) == ["no decide entrypoint"]
    assert validate_policy(PolicyArtifact(1, "   \n")) == ["no decide entrypoint"]


def test_missing_decide():
    assert validate_policy(PolicyArtifact(1, "def other(s, a):\n    return 0\n"))


def test_blank_template_valid():
    artifact = blank_artifact()
    assert artifact.validated and artifact.source == BLANK_TEMPLATE


def real_python(source):
    namespace = {}
    exec(compile(source, "<canned>", "exec"), namespace)  # trusted test source only
    return namespace["decide"]


@pytest.mark.parametrize("source", [CANNED, RICHER])
def test_dual_run_matches_python(source):
    artifact = PolicyArtifact(1, source)
    assert validate_policy(artifact) == []
    compiled, _ = compile_policy(source)
    reference = real_python(source)
    for view, actions, n in smoke_states():
        got = compiled.decide(copy.deepcopy(view), copy.deepcopy(actions))
        assert got == reference(copy.deepcopy(view), copy.deepcopy(actions))


def test_dual_run_in_games():
    artifact = PolicyArtifact(1, CANNED)
    validate_policy(artifact)
    reference = real_python(CANNED)
    for s in branching_states(30, seed=2):
        legal = legal_actions(s)
        want = reference(state_view(s), actions_view(legal))
        got = execute_policy(artifact, s, legal, random.Random(0))
        if want is not None:
            assert got == legal[want]


def test_constant_zero_picks_first():
    artifact = PolicyArtifact(1, "def decide(state, actions):\n    return 0\n")
    assert validate_policy(artifact) == []
    for s in branching_states(10, seed=4):
        legal = legal_actions(s)
        assert execute_policy(artifact, s, legal, random.Random(1)) == legal[0]


def test_raising_policy_falls_back():
    # Validation rejects this policy, so the flag is forced to exercise the run-time path.
    source = (
        "def decide(state, actions):\n"
        "    if len(actions) > 100000:\n"
        "        return 0\n"
        "    return actions[len(actions)]['index']\n"
    )
    artifact = PolicyArtifact(1, source)
    assert validate_policy(artifact)
    artifact.validated = True
    s = branching_states(1, seed=6)[0]
    legal = legal_actions(s)
    errors = []
    got = execute_policy(artifact, s, legal, random.Random(3), errors)
    assert got in legal and len(errors) == 1
    player = PolicyPlayer(artifact, seed=1)
    player(s, legal)
    assert player.pop_notes()["fallback"] is True and player.errors


def test_unvalidated_artifact_refused():
    artifact = PolicyArtifact(1, "def decide(state, actions):\n    return 0\n")
    with pytest.raises(ValueError):
        execute_policy(artifact, None, [], random.Random(0))
    with pytest.raises(ValueError):
        PolicyPlayer(artifact)


def test_policy_cannot_mutate_engine_state():
    source = (
        "def decide(state, actions):\n"
        "    state['resources']['WOOD'] = 99\n"
        "    state['nodes'][0]['owner'] = 1\n"
        "    actions.pop()\n"
        "    return None\n"
    )
    artifact = PolicyArtifact(1, source)
    assert validate_policy(artifact) == []
    s = branching_states(1, seed=7)[0]
    before = s.to_dict()
    legal = legal_actions(s)
    assert execute_policy(artifact, s, legal, random.Random(0)) in legal
    assert s.to_dict() == before


def test_artifact_round_trip():
    artifact = blank_artifact()
    again = PolicyArtifact.from_dict(artifact.to_dict())
    assert again.to_dict() == artifact.to_dict()


def run_snippet(expr):
    compiled, violations = compile_policy(f"def decide(state, actions):\n    return {expr}\n")
    assert violations == [], violations
    return compiled.decide({}, [])


ints = st.integers(-50, 50)


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return str(draw(ints))
    op = draw(st.sampled_from(["+", "-", "*", "//", "%", "<", "==", "and", "or", "max", "min", "abs"]))
    a = draw(expressions(depth=depth - 1))
    b = draw(expressions(depth=depth - 1))
    if op in ("max", "min"):
        return f"{op}({a}, {b})"
    if op == "abs":
        return f"abs({a})"
    return f"({a} {op} {b})"


@settings(max_examples=300, deadline=None)
@given(expressions())
def test_interpreter_agrees_with_python_arithmetic(expr):
    try:
        want = eval(expr, {"__builtins__": {"max": max, "min": min, "abs": abs}})  # generated from the grammar above
    except ZeroDivisionError:
        with pytest.raises(PolicyRuntimeError):
            run_snippet(expr)
        return
    assert run_snippet(expr) == want


def test_budget_is_deterministic():
    compiled, _ = compile_policy("def decide(s, a):\n    n = 0\n    for i in range(1000):\n        n = n + i\n    return n\n")
    assert compiled.decide({}, [], budget=100_000) == sum(range(1000))
    with pytest.raises(BudgetExceeded):
        compiled.decide({}, [], budget=500)

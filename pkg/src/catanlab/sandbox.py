"""Budgeted interpreter for generated player policies.

A policy is source text in a small Python subset that must define
``decide(state, actions)``.  The text is parsed with :mod:`ast`, checked
against a whitelist, and then evaluated by the tree walker below; it is never
handed to ``exec``/``eval``.  Policies see only plain data (dicts, lists,
strings, numbers), can call a fixed set of pure builtins and container
methods, and every evaluation step is charged against a budget.  There is no
way to name modules, files, attributes other than whitelisted methods, or any
dunder.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass

MAX_SOURCE_CHARS = 50_000
DEFAULT_STEP_BUDGET = 100_000
MAX_COLLECTION = 100_000
MAX_INT_BITS = 4096
MAX_CALL_DEPTH = 32

BLANK_TEMPLATE = '''def decide(state, actions):
    """Return the index of the chosen action, or None for a random legal move."""
    return None
'''


class PolicyError(Exception):
    """Base class for everything a policy can do wrong."""


class PolicySyntaxError(PolicyError):
    pass


class BudgetExceeded(PolicyError):
    pass


class PolicyRuntimeError(PolicyError):
    pass


# -- static checking -----------------------------------------------------------

_ALLOWED_NODES = {
    ast.Module, ast.FunctionDef, ast.arguments, ast.arg, ast.Return, ast.Assign,
    ast.AugAssign, ast.AnnAssign, ast.For, ast.While, ast.If, ast.Break,
    ast.Continue, ast.Pass, ast.Expr, ast.BoolOp, ast.BinOp, ast.UnaryOp,
    ast.Lambda, ast.IfExp, ast.Dict, ast.Set, ast.ListComp, ast.SetComp,
    ast.DictComp, ast.GeneratorExp, ast.comprehension, ast.Compare, ast.Call,
    ast.keyword, ast.Constant, ast.Attribute, ast.Subscript, ast.Slice,
    ast.Name, ast.List, ast.Tuple, ast.Load, ast.Store, ast.JoinedStr,
    ast.FormattedValue,
    ast.And, ast.Or, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.FloorDiv,
    ast.Mod, ast.Pow, ast.USub, ast.UAdd, ast.Not, ast.Eq, ast.NotEq, ast.Lt,
    ast.LtE, ast.Gt, ast.GtE, ast.In, ast.NotIn, ast.Is, ast.IsNot,
}

_METHODS = {
    list: {"append", "extend", "pop", "index", "count", "insert", "remove", "copy", "reverse", "sort"},
    tuple: {"index", "count"},
    dict: {"get", "keys", "values", "items", "copy", "setdefault", "pop", "update"},
    set: {"add", "discard", "remove", "copy", "union", "intersection", "difference"},
    str: {
        "startswith", "endswith", "split", "lower", "upper", "strip", "join",
        "replace", "find", "count", "isdigit",
    },
}
_ALL_METHODS = set().union(*_METHODS.values())

_FORMAT_SPEC = re.compile(r"[<>^]?\d{0,3}(\.\d{1,2})?[dfs%]?")


def _check_static(tree: ast.Module) -> list[str]:
    violations = []
    defined = set(_BUILTIN_NAMES)
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.Lambda)):
            defined.update(a.arg for a in node.args.args)
            if isinstance(node, ast.FunctionDef):
                defined.add(node.name)
        elif isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store):
            defined.add(node.id)

    for node in ast.walk(tree):
        kind = type(node)
        if kind not in _ALLOWED_NODES:
            violations.append(f"line {getattr(node, 'lineno', '?')}: {kind.__name__} is not allowed")
            continue
        if kind is ast.Name:
            if node.id.startswith("__"):
                violations.append(f"line {node.lineno}: dunder name {node.id!r}")
            elif isinstance(node.ctx, ast.Load) and node.id not in defined:
                violations.append(f"line {node.lineno}: unknown name {node.id!r}")
        elif kind is ast.Attribute:
            if node.attr.startswith("_") or node.attr not in _ALL_METHODS:
                violations.append(f"line {node.lineno}: attribute {node.attr!r} is not available")
        elif kind is ast.Call:
            if isinstance(node.func, ast.Attribute):
                continue
            if any(k.arg is None for k in node.keywords) or any(isinstance(a, ast.Starred) for a in node.args):
                violations.append(f"line {node.lineno}: argument unpacking is not allowed")
        elif kind is ast.FunctionDef:
            a = node.args
            if a.vararg or a.kwarg or a.kwonlyargs or a.posonlyargs:
                violations.append(f"line {node.lineno}: only plain positional parameters are allowed")
            if node.decorator_list:
                violations.append(f"line {node.lineno}: decorators are not allowed")
        elif kind is ast.Lambda:
            a = node.args
            if a.vararg or a.kwarg or a.kwonlyargs or a.posonlyargs:
                violations.append(f"line {node.lineno}: only plain positional parameters are allowed")
        elif kind is ast.Constant:
            if isinstance(node.value, (bytes, complex)) or node.value is Ellipsis:
                violations.append(f"line {node.lineno}: {type(node.value).__name__} constants are not allowed")
        elif kind is ast.FormattedValue:
            spec = node.format_spec
            if spec is not None:
                text = "".join(
                    v.value for v in spec.values if isinstance(v, ast.Constant) and isinstance(v.value, str)
                )
                if len(spec.values) != 1 or not _FORMAT_SPEC.fullmatch(text):
                    violations.append(f"line {node.lineno}: unsupported format spec")
    # Attribute nodes are only legal as the callee of a method call.
    callees = {id(n.func) for n in ast.walk(tree) if isinstance(n, ast.Call)}
    for node in ast.walk(tree):
        if isinstance(node, ast.Attribute) and id(node) not in callees:
            violations.append(f"line {node.lineno}: attribute access outside a method call")

    for stmt in tree.body:
        if isinstance(stmt, (ast.FunctionDef, ast.Assign, ast.AnnAssign)):
            continue
        if isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant):
            continue
        violations.append(f"line {stmt.lineno}: only definitions and assignments are allowed at top level")
    entry = [s for s in tree.body if isinstance(s, ast.FunctionDef) and s.name == "decide"]
    if not entry:
        violations.append("no decide entrypoint")
    elif len(entry[-1].args.args) != 2:
        violations.append("decide must take exactly two parameters (state, actions)")
    return violations


# -- evaluation ----------------------------------------------------------------


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Function:
    """A policy-defined function; calling it re-enters the interpreter."""

    __slots__ = ("interp", "node", "env", "name")

    def __init__(self, interp, node, env, name):
        self.interp = interp
        self.node = node
        self.env = env
        self.name = name

    def __call__(self, *args):
        return self.interp.call_function(self, list(args))

    def __repr__(self):
        return f"<policy function {self.name}>"


class _Env:
    __slots__ = ("vars", "parent")

    def __init__(self, parent=None):
        self.vars = {}
        self.parent = parent

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        if name in _BUILTIN_NAMES:
            return _BUILTIN_NAMES[name]
        raise PolicyRuntimeError(f"name {name!r} is not defined")


def _size(value) -> int:
    try:
        return len(value)
    except TypeError:
        return 0


def _check_size(value):
    if isinstance(value, int) and not isinstance(value, bool):
        if value.bit_length() > MAX_INT_BITS:
            raise PolicyRuntimeError("integer too large")
    elif isinstance(value, (str, list, tuple, dict, set)) and len(value) > MAX_COLLECTION:
        raise PolicyRuntimeError("collection too large")
    return value


class Interpreter:
    def __init__(self, budget: int = DEFAULT_STEP_BUDGET):
        self.budget = budget
        self.steps = 0
        self.depth = 0

    def tick(self, n: int = 1):
        self.steps += n
        if self.steps > self.budget:
            raise BudgetExceeded(f"step budget of {self.budget} exceeded")

    # statements

    def run_module(self, tree: ast.Module) -> _Env:
        env = _Env()
        for stmt in tree.body:
            if isinstance(stmt, ast.Expr):
                continue
            self.exec_stmt(stmt, env)
        return env

    def exec_block(self, body, env):
        for stmt in body:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, node, env):
        self.tick()
        kind = type(node)
        if kind is ast.Expr:
            self.eval(node.value, env)
        elif kind is ast.Assign:
            value = self.eval(node.value, env)
            for target in node.targets:
                self.assign(target, value, env)
        elif kind is ast.AnnAssign:
            if node.value is not None:
                self.assign(node.target, self.eval(node.value, env), env)
        elif kind is ast.AugAssign:
            current = self.eval(_as_load(node.target), env)
            value = self.binop(node.op, current, self.eval(node.value, env))
            self.assign(node.target, value, env)
        elif kind is ast.If:
            if self.truth(self.eval(node.test, env)):
                self.exec_block(node.body, env)
            else:
                self.exec_block(node.orelse, env)
        elif kind is ast.For:
            iterable = self.iterate(self.eval(node.iter, env))
            broke = False
            for item in iterable:
                self.tick()
                self.assign(node.target, item, env)
                try:
                    self.exec_block(node.body, env)
                except _Break:
                    broke = True
                    break
                except _Continue:
                    continue
            if not broke:
                self.exec_block(node.orelse, env)
        elif kind is ast.While:
            broke = False
            while self.truth(self.eval(node.test, env)):
                self.tick()
                try:
                    self.exec_block(node.body, env)
                except _Break:
                    broke = True
                    break
                except _Continue:
                    continue
            if not broke:
                self.exec_block(node.orelse, env)
        elif kind is ast.Return:
            raise _Return(None if node.value is None else self.eval(node.value, env))
        elif kind is ast.FunctionDef:
            env.vars[node.name] = _Function(self, node, env, node.name)
        elif kind is ast.Break:
            raise _Break()
        elif kind is ast.Continue:
            raise _Continue()
        elif kind is ast.Pass:
            pass
        else:
            raise PolicyRuntimeError(f"{kind.__name__} is not supported")

    def assign(self, target, value, env):
        kind = type(target)
        if kind is ast.Name:
            env.vars[target.id] = value
        elif kind in (ast.Tuple, ast.List):
            items = list(self.iterate(value))
            if len(items) != len(target.elts):
                raise PolicyRuntimeError(f"cannot unpack {len(items)} values into {len(target.elts)}")
            for t, v in zip(target.elts, items):
                self.assign(t, v, env)
        elif kind is ast.Subscript:
            container = self.eval(target.value, env)
            if not isinstance(container, (list, dict)):
                raise PolicyRuntimeError("only lists and dicts support item assignment")
            key = self.eval(target.slice, env)
            try:
                container[key] = value
            except (IndexError, TypeError) as exc:
                raise PolicyRuntimeError(str(exc)) from None
            _check_size(container)
        else:
            raise PolicyRuntimeError(f"cannot assign to {kind.__name__}")

    # expressions

    def eval(self, node, env):
        self.tick()
        kind = type(node)
        if kind is ast.Constant:
            return node.value
        if kind is ast.Name:
            return env.lookup(node.id)
        if kind is ast.BinOp:
            return self.binop(node.op, self.eval(node.left, env), self.eval(node.right, env))
        if kind is ast.UnaryOp:
            operand = self.eval(node.operand, env)
            try:
                if isinstance(node.op, ast.Not):
                    return not self.truth(operand)
                if isinstance(node.op, ast.USub):
                    return -operand
                return +operand
            except TypeError as exc:
                raise PolicyRuntimeError(str(exc)) from None
        if kind is ast.BoolOp:
            is_and = isinstance(node.op, ast.And)
            value = None
            for sub in node.values:
                value = self.eval(sub, env)
                if self.truth(value) != is_and:
                    return value
            return value
        if kind is ast.Compare:
            left = self.eval(node.left, env)
            for op, comp in zip(node.ops, node.comparators):
                right = self.eval(comp, env)
                if not self.compare(op, left, right):
                    return False
                left = right
            return True
        if kind is ast.IfExp:
            branch = node.body if self.truth(self.eval(node.test, env)) else node.orelse
            return self.eval(branch, env)
        if kind is ast.Call:
            return self.call(node, env)
        if kind is ast.Subscript:
            container = self.eval(node.value, env)
            key = self.eval(node.slice, env)
            if not isinstance(container, (list, tuple, dict, str)):
                raise PolicyRuntimeError(f"{type(container).__name__} is not subscriptable")
            try:
                result = container[key]
            except (IndexError, KeyError, TypeError) as exc:
                raise PolicyRuntimeError(f"{type(exc).__name__}: {exc}") from None
            if isinstance(key, slice):
                self.tick(_size(result))
            return result
        if kind is ast.Slice:
            parts = [None if p is None else self.eval(p, env) for p in (node.lower, node.upper, node.step)]
            for p in parts:
                if p is not None and (not isinstance(p, int) or isinstance(p, bool)):
                    raise PolicyRuntimeError("slice bounds must be integers")
            return slice(*parts)
        if kind is ast.List:
            return _check_size([self.eval(e, env) for e in node.elts])
        if kind is ast.Tuple:
            return tuple(self.eval(e, env) for e in node.elts)
        if kind is ast.Set:
            return self.hashable_call(set, [self.eval(e, env) for e in node.elts])
        if kind is ast.Dict:
            if any(k is None for k in node.keys):
                raise PolicyRuntimeError("dict unpacking is not supported")
            pairs = [(self.eval(k, env), self.eval(v, env)) for k, v in zip(node.keys, node.values)]
            return self.hashable_call(dict, pairs)
        if kind in (ast.ListComp, ast.GeneratorExp, ast.SetComp):
            out = []
            self.comprehension(node.generators, 0, env, lambda e: out.append(self.eval(node.elt, e)))
            return self.hashable_call(set, out) if kind is ast.SetComp else out
        if kind is ast.DictComp:
            pairs = []
            self.comprehension(
                node.generators, 0, env, lambda e: pairs.append((self.eval(node.key, e), self.eval(node.value, e)))
            )
            return self.hashable_call(dict, pairs)
        if kind is ast.Lambda:
            return _Function(self, node, env, "<lambda>")
        if kind is ast.JoinedStr:
            parts = []
            for v in node.values:
                if isinstance(v, ast.Constant):
                    parts.append(v.value)
                else:
                    value = self.eval(v.value, env)
                    if isinstance(value, _Function):
                        raise PolicyRuntimeError("cannot format a function")
                    spec = "" if v.format_spec is None else v.format_spec.values[0].value
                    try:
                        parts.append(format(value, spec))
                    except (TypeError, ValueError) as exc:
                        raise PolicyRuntimeError(str(exc)) from None
            return _check_size("".join(parts))
        raise PolicyRuntimeError(f"{kind.__name__} is not supported")

    def comprehension(self, generators, i, env, emit):
        if i == len(generators):
            emit(env)
            return
        gen = generators[i]
        if gen.is_async:
            raise PolicyRuntimeError("async comprehensions are not supported")
        scope = _Env(env)
        for item in self.iterate(self.eval(gen.iter, scope)):
            self.tick()
            self.assign(gen.target, item, scope)
            if all(self.truth(self.eval(cond, scope)) for cond in gen.ifs):
                self.comprehension(generators, i + 1, scope, emit)

    def hashable_call(self, fn, arg):
        try:
            return _check_size(fn(arg))
        except TypeError as exc:
            raise PolicyRuntimeError(str(exc)) from None

    def truth(self, value) -> bool:
        if isinstance(value, _Function):
            return True
        return bool(value)

    def iterate(self, value):
        if isinstance(value, (list, tuple, str, range)):
            return value
        if isinstance(value, (dict, set)):
            return list(value)
        raise PolicyRuntimeError(f"{type(value).__name__} is not iterable")

    def binop(self, op, a, b):
        kind = type(op)
        try:
            if kind is ast.Add:
                if isinstance(a, (str, list, tuple)) and isinstance(b, type(a)):
                    if len(a) + len(b) > MAX_COLLECTION:
                        raise PolicyRuntimeError("collection too large")
                    self.tick((len(a) + len(b)) // 64)
                return _check_size(a + b)
            if kind is ast.Sub:
                return a - b
            if kind is ast.Mult:
                for seq, n in ((a, b), (b, a)):
                    if isinstance(seq, (str, list, tuple)) and isinstance(n, int):
                        if len(seq) * max(n, 0) > MAX_COLLECTION:
                            raise PolicyRuntimeError("collection too large")
                        self.tick(len(seq) * max(n, 0) // 64)
                if isinstance(a, int) and isinstance(b, int) and a.bit_length() + b.bit_length() > MAX_INT_BITS:
                    raise PolicyRuntimeError("integer too large")
                return _check_size(a * b)
            if kind is ast.Div:
                return a / b
            if kind is ast.FloorDiv:
                return a // b
            if kind is ast.Mod:
                if isinstance(a, str):
                    raise PolicyRuntimeError("string % formatting is not supported")
                return a % b
            if kind is ast.Pow:
                if isinstance(a, int) and isinstance(b, int) and not isinstance(b, bool):
                    if b > 0 and abs(a) > 1 and a.bit_length() * b > MAX_INT_BITS:
                        raise PolicyRuntimeError("integer too large")
                if isinstance(a, float) or isinstance(b, float):
                    result = a**b
                    if isinstance(result, complex):
                        raise PolicyRuntimeError("complex result")
                    return result
                return _check_size(a**b)
        except PolicyError:
            raise
        except (TypeError, ZeroDivisionError, OverflowError, ValueError) as exc:
            raise PolicyRuntimeError(f"{type(exc).__name__}: {exc}") from None
        raise PolicyRuntimeError(f"operator {kind.__name__} is not supported")

    def compare(self, op, a, b) -> bool:
        kind = type(op)
        try:
            if kind is ast.Eq:
                return a == b
            if kind is ast.NotEq:
                return a != b
            if kind is ast.Lt:
                return a < b
            if kind is ast.LtE:
                return a <= b
            if kind is ast.Gt:
                return a > b
            if kind is ast.GtE:
                return a >= b
            if kind in (ast.In, ast.NotIn):
                if not isinstance(b, (list, tuple, dict, set, str, range)):
                    raise PolicyRuntimeError(f"'in' needs a container, not {type(b).__name__}")
                self.tick(_size(b) // 16 if isinstance(b, (list, tuple)) else 1)
                found = a in b
                return found if kind is ast.In else not found
            if kind is ast.Is:
                return a is b
            if kind is ast.IsNot:
                return a is not b
        except PolicyError:
            raise
        except TypeError as exc:
            raise PolicyRuntimeError(f"TypeError: {exc}") from None
        raise PolicyRuntimeError(f"comparison {kind.__name__} is not supported")

    def call(self, node, env):
        args = [self.eval(a, env) for a in node.args]
        kwargs = {k.arg: self.eval(k.value, env) for k in node.keywords}
        if isinstance(node.func, ast.Attribute):
            obj = self.eval(node.func.value, env)
            return self.call_method(obj, node.func.attr, args, kwargs)
        fn = self.eval(node.func, env)
        if isinstance(fn, _Function):
            if kwargs:
                raise PolicyRuntimeError("keyword arguments to policy functions are not supported")
            return self.call_function(fn, args)
        if isinstance(fn, _Builtin):
            return fn.invoke(self, args, kwargs)
        raise PolicyRuntimeError(f"{type(fn).__name__} is not callable")

    def call_method(self, obj, name, args, kwargs):
        allowed = _METHODS.get(type(obj))
        if allowed is None or name not in allowed:
            raise PolicyRuntimeError(f"{type(obj).__name__} has no method {name!r}")
        if name == "sort" and kwargs.get("key") is not None and not isinstance(kwargs["key"], _Function):
            raise PolicyRuntimeError("sort key must be a function")
        if set(kwargs) - {"key", "reverse", "default"}:
            raise PolicyRuntimeError(f"unsupported keyword for {name}")
        self.tick(1 + _size(obj) // 16)
        for a in args:
            self.tick(_size(a) // 16)
        if name in ("keys", "values", "items"):
            return list(getattr(obj, name)())
        if name == "replace" and len(args) >= 2 and isinstance(args[1], str):
            if len(obj) * max(1, len(args[1])) > MAX_COLLECTION:
                raise PolicyRuntimeError("string too large")
        try:
            result = getattr(obj, name)(*args, **kwargs)
        except PolicyError:
            raise
        except (IndexError, KeyError, TypeError, ValueError) as exc:
            raise PolicyRuntimeError(f"{type(exc).__name__}: {exc}") from None
        _check_size(obj)
        return _check_size(result)

    def call_function(self, fn: _Function, args):
        node = fn.node
        params = [a.arg for a in node.args.args]
        defaults = node.args.defaults
        if len(args) > len(params) or len(args) < len(params) - len(defaults):
            raise PolicyRuntimeError(f"{fn.name}() takes {len(params)} arguments, got {len(args)}")
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            self.depth -= 1
            raise PolicyRuntimeError("maximum call depth exceeded")
        try:
            env = _Env(fn.env)
            missing = len(params) - len(args)
            filled = list(args)
            if missing:
                filled += [self.eval(d, fn.env) for d in defaults[len(defaults) - missing :]]
            env.vars.update(zip(params, filled))
            if isinstance(node, ast.Lambda):
                return self.eval(node.body, env)
            try:
                self.exec_block(node.body, env)
            except _Return as r:
                return r.value
            except (_Break, _Continue):
                raise PolicyRuntimeError("break/continue outside a loop") from None
            return None
        finally:
            self.depth -= 1


def _as_load(target):
    if isinstance(target, ast.Name):
        return ast.Name(id=target.id, ctx=ast.Load())
    if isinstance(target, ast.Subscript):
        return ast.Subscript(value=target.value, slice=target.slice, ctx=ast.Load())
    raise PolicyRuntimeError("unsupported augmented assignment target")


# -- builtins ------------------------------------------------------------------


class _Builtin:
    __slots__ = ("name", "fn", "keywords")

    def __init__(self, name, fn, keywords=()):
        self.name = name
        self.fn = fn
        self.keywords = frozenset(keywords)

    def invoke(self, interp: Interpreter, args, kwargs):
        if set(kwargs) - self.keywords:
            raise PolicyRuntimeError(f"{self.name}() got an unsupported keyword")
        key = kwargs.get("key")
        if key is not None and not isinstance(key, _Function):
            raise PolicyRuntimeError(f"{self.name}() key must be a function")
        if self.name == "range":
            if not all(isinstance(a, int) and not isinstance(a, bool) for a in args):
                raise PolicyRuntimeError("range() needs integers")
        cost = 1 + sum(_size(a) if not isinstance(a, str) else 0 for a in args)
        interp.tick(cost)
        try:
            result = self.fn(*args, **kwargs)
        except PolicyError:
            raise
        except (TypeError, ValueError, KeyError, IndexError, ZeroDivisionError, OverflowError) as exc:
            raise PolicyRuntimeError(f"{self.name}(): {type(exc).__name__}: {exc}") from None
        if isinstance(result, range):
            return result
        return _check_size(result)


def _materialize(fn):
    return lambda *a: list(fn(*a))


def _to_list(x=()):
    if isinstance(x, range) and len(x) > MAX_COLLECTION:
        raise PolicyRuntimeError("collection too large")
    return list(x)


def _round(x, n=None):
    return round(x) if n is None else round(x, n)


_BUILTIN_NAMES = {
    name: _Builtin(name, fn, kw)
    for name, fn, kw in [
        ("len", len, ()),
        ("range", range, ()),
        ("min", min, ("key", "default")),
        ("max", max, ("key", "default")),
        ("sum", sum, ()),
        ("abs", abs, ()),
        ("int", int, ()),
        ("float", float, ()),
        ("str", str, ()),
        ("bool", bool, ()),
        ("list", _to_list, ()),
        ("tuple", tuple, ()),
        ("dict", dict, ()),
        ("set", set, ()),
        ("sorted", sorted, ("key", "reverse")),
        ("enumerate", _materialize(enumerate), ()),
        ("zip", _materialize(zip), ()),
        ("reversed", _materialize(reversed), ()),
        ("any", any, ()),
        ("all", all, ()),
        ("round", _round, ()),
    ]
}
_BUILTIN_NAMES.update({"inf": math.inf})


# -- compiled policies ---------------------------------------------------------


@dataclass
class CompiledPolicy:
    source: str
    tree: ast.Module

    def decide(self, state_view, actions_view, budget: int = DEFAULT_STEP_BUDGET):
        """Run ``decide`` on fresh globals; raises a PolicyError subclass on failure."""
        interp = Interpreter(budget)
        try:
            env = interp.run_module(self.tree)
            fn = env.vars.get("decide")
            if not isinstance(fn, _Function):
                raise PolicyRuntimeError("decide is not a function")
            return interp.call_function(fn, [state_view, actions_view])
        except PolicyError:
            raise
        except (_Return, _Break, _Continue):
            raise PolicyRuntimeError("control flow outside a function") from None
        except RecursionError:
            raise PolicyRuntimeError("expression nesting too deep") from None
        except MemoryError:
            raise PolicyRuntimeError("out of memory") from None


def compile_policy(source: str) -> tuple[CompiledPolicy | None, list[str]]:
    """Parse and statically check ``source``; returns (policy, violations)."""
    if not isinstance(source, str) or not source.strip():
        return None, ["no decide entrypoint"]
    if len(source) > MAX_SOURCE_CHARS:
        return None, [f"source longer than {MAX_SOURCE_CHARS} characters"]
    try:
        tree = ast.parse(source, mode="exec")
    except SyntaxError as exc:
        return None, [f"syntax error: {exc.msg} (line {exc.lineno})"]
    except (RecursionError, MemoryError, ValueError):
        return None, ["source nesting too deep"]
    violations = _check_static(tree)
    if violations:
        return None, violations
    return CompiledPolicy(source, tree), []

"""Plug-in functional estimation: Monte Carlo averages of functionals of
the smoothed fitted distribution.

Functionals can be given as callables or as small arithmetic expression
strings over the coordinates (x1, ..., xd, or the whole vector x), with
+ - * / **, exp, log, abs, pow and norm.  Expressions are parsed once
through an AST whitelist; nothing else is evaluated.
"""

from __future__ import annotations

import ast
import operator
from dataclasses import dataclass

import numpy as np

from .exceptions import MalformedInput, NonFiniteFunctional
from .smoothed import SmoothedModel, sample


@dataclass(frozen=True)
class FunctionalEstimate:
    value: float
    std_error: float
    draws: int
    seed: int
    reps: int = 1

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error,
                "draws": self.draws, "reps": self.reps, "seed": self.seed}


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNARYOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _norm(*args):
    if len(args) == 1 and np.asarray(args[0]).ndim == 2:
        return np.linalg.norm(args[0], axis=1)
    return np.sqrt(sum(np.asarray(a, dtype=float) ** 2 for a in args))


_FUNCS = {"exp": np.exp, "log": np.log, "abs": np.abs,
          "pow": np.power, "norm": _norm}


def compile_expression(expr: str, d: int):
    """Compile an expression over x1..xd (and the vector x) into a
    vectorised function of an (m, d) sample matrix."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise MalformedInput(f"cannot parse expression {expr!r}: {exc}") from exc

    def ev(node, X):
        if isinstance(node, ast.Expression):
            return ev(node.body, X)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)):
                return float(node.value)
            raise MalformedInput(f"non-numeric constant {node.value!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, X), ev(node.right, X))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARYOPS:
            return _UNARYOPS[type(node.op)](ev(node.operand, X))
        if isinstance(node, ast.Name):
            if node.id == "x":
                return X
            if node.id.startswith("x") and node.id[1:].isdigit():
                i = int(node.id[1:])
                if 1 <= i <= d:
                    return X[:, i - 1]
            raise MalformedInput(f"unknown variable {node.id!r} (use x1..x{d} or x)")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fn = _FUNCS.get(node.func.id)
            if fn is None or node.keywords:
                raise MalformedInput(f"unknown function {node.func.id!r}")
            return fn(*[ev(a, X) for a in node.args])
        raise MalformedInput(f"disallowed syntax: {ast.dump(node)}")

    # validate eagerly on a dummy sample so malformed input fails at parse time
    ev(tree, np.zeros((2, d)) + 0.5)

    def g(X):
        out = ev(tree, np.asarray(X, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=float), (len(X),)).copy()

    return g


def _as_callable(g, d: int):
    return compile_expression(g, d) if isinstance(g, str) else g


def estimate_linear_functional(model: SmoothedModel, g, draws: int,
                               seed: int) -> FunctionalEstimate:
    """Monte Carlo estimate of the mean of g under the smoothed density."""
    if draws < 2:
        raise ValueError("draws must be at least 2")
    fn = _as_callable(g, model.d)
    X = sample(model, draws, seed)
    vals = np.asarray(fn(X), dtype=float)
    if vals.shape != (draws,):
        vals = np.broadcast_to(vals, (draws,))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteFunctional("g returned a non-finite value on a draw")
    return FunctionalEstimate(
        value=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / np.sqrt(draws)),
        draws=int(draws), seed=int(seed))


def estimate_functional_generic(model: SmoothedModel, theta, draws: int,
                                seed: int, reps: int) -> FunctionalEstimate:
    """Apply a sample-level functional to `reps` independent samples of
    size `draws`; value is the mean over reps, std_error the SE of that
    mean across reps."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    vals = []
    for r in range(reps):
        X = sample(model, draws, seed * 100003 + r)
        v = float(theta(X))
        if not np.isfinite(v):
            raise NonFiniteFunctional(f"theta returned {v!r} on replicate {r}")
        vals.append(v)
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return FunctionalEstimate(value=float(vals.mean()), std_error=se,
                              draws=int(draws), seed=int(seed), reps=int(reps))

"""Normalization by evaluation with memoized readback.

Terms are interpreted into a semantic domain of Python closures; reading
the result back yields the normal form.  Every value bound by evaluation
carries a write-once cache cell, so a value's normal form is read back at
most once and reused afterwards — readback emits straight into a shared
node arena, which is what keeps exponentially large normal forms linear
in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .sharing import GraphBuilder, TermGraph
from .syntax import App, Ident, Lam, Term, Var, free_marker, gen_ident


@dataclass
class CacheCell:
    """Write-once slot for a value's normal form (a shared node index)."""

    content: int | None = None

    def fill(self, value: int) -> None:
        if self.content is not None:
            raise AssertionError("cache cell filled twice")
        self.content = value


@dataclass(frozen=True)
class Abs:
    fn: Callable[["Sem"], "Sem"]


@dataclass(frozen=True)
class Neutral:
    force: Callable[[], int]


@dataclass(frozen=True)
class Cached:
    cell: CacheCell
    inner: "Sem"


Sem = Abs | Neutral | Cached

Env = dict[Ident, Sem]


def mount_cache(v: Sem) -> Sem:
    """Annotate with an empty cache; idempotent on already-cached values."""
    return v if isinstance(v, Cached) else Cached(CacheCell(), v)


def cached_call(cell: CacheCell, thunk: Callable[[], int]) -> int:
    if cell.content is None:
        cell.fill(thunk())
    return cell.content


class Evaluator:
    """One normalization; owns its fresh-name counter and node arena, so
    distinct evaluations are independent and reproducible."""

    def __init__(self, graph: GraphBuilder | None = None):
        self.graph = graph if graph is not None else GraphBuilder()
        self.counter = 0

    def _fresh(self) -> Ident:
        x = gen_ident(self.counter)
        self.counter += 1
        return x

    def abstract_variable(self, x: Ident) -> Sem:
        node: list[int | None] = [None]

        def force() -> int:
            if node[0] is None:
                node[0] = self.graph.var(x)
            return node[0]

        return Neutral(force)

    def env_lookup(self, x: Ident, env: Env) -> Sem:
        v = env.get(x)
        if v is not None:
            return v
        return self.abstract_variable(free_marker(x))

    def eval(self, t: Term, env: Env) -> Sem:
        match t:
            case Var(x):
                return self.env_lookup(x, env)
            case Lam(x, body):
                return Abs(lambda v: self.eval(body, {**env, x: mount_cache(v)}))
            case App(f, a):
                # arguments before functions
                v2 = self.eval(a, env)
                return self.from_sem(self.eval(f, env))(v2)
        raise TypeError(f"not a term: {t!r}")

    def from_sem(self, v: Sem) -> Callable[[Sem], Sem]:
        match v:
            case Abs(f):
                return f
            case Neutral(force):
                return self._apply_neutral(force)
            case Cached(cell, Neutral(force)):
                return self._apply_neutral(lambda: cached_call(cell, force))
            case Cached(_, inner):
                # a cached abstraction is about to be applied; contraction
                # changes its normal form, so the cache must be ignored
                assert isinstance(inner, Abs), "cache may only wrap an abstraction here"
                return self.from_sem(inner)
        raise TypeError(f"not a semantic value: {v!r}")

    def _apply_neutral(self, force: Callable[[], int]) -> Callable[[Sem], Sem]:
        def apply(v: Sem) -> Sem:
            def force_app() -> int:
                n = self.reify(v)
                return self.graph.app(force(), n)

            return Neutral(force_app)

        return apply

    def reify(self, v: Sem) -> int:
        """Read a semantic value back as a shared normal-form node."""
        match v:
            case Abs(f):
                x = self._fresh()
                body = self.reify(f(self.abstract_variable(x)))
                return self.graph.lam(x, body)
            case Neutral(force):
                return force()
            case Cached(cell, inner):
                return cached_call(cell, lambda: self.reify(inner))
        raise TypeError(f"not a semantic value: {v!r}")


def nbe_normalize(t: Term) -> TermGraph:
    """Evaluate in the empty environment, then read the normal form back."""
    ev = Evaluator()
    root = ev.reify(ev.eval(t, {}))
    return ev.graph.graph(root)

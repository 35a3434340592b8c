"""Environment-based variant of the strong call-by-value machine.

Delayed substitutions live in persistent environments attached to
closures instead of being pushed into the term; everything else (modes,
heap, counter, the eighteen transitions and their dispatch order) mirrors
the delimited-substitution machine step for step.  Translating a
configuration by executing its delayed substitutions yields the
corresponding substitution-machine configuration, and the two machines
fire the same rule numbers in lockstep.

Value and frame constructors are shared with the substitution machine;
only closures (here) and delimiters (there) differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import sharing
from .errors import FuelError, MachineStuck
from .subst_machine import (
    MODE_C,
    MODE_E,
    MODE_M,
    MODE_S,
    DEFAULT_FUEL,
    Annot,
    ArgNF,
    ArgVal,
    AVar,
    Binder,
    Config,
    Delim,
    FunTerm,
    FunVal,
    Memo,
    MTerm,
    MValue,
    RunResult,
    VApp,
    VLam,
)
from .syntax import App, Ident, Lam, Term, Var, free_marker, gen_ident, ident_key


# --- persistent environments ----------------------------------------------


class _Node:
    __slots__ = ("key", "ident", "value", "left", "right", "height", "size")

    def __init__(self, key, ident, value, left, right):
        self.key = key
        self.ident = ident
        self.value = value
        self.left = left
        self.right = right
        self.height = 1 + max(_height(left), _height(right))
        self.size = 1 + _size(left) + _size(right)


def _height(n):
    return n.height if n is not None else 0


def _size(n):
    return n.size if n is not None else 0


def _balance(n):
    lh, rh = _height(n.left), _height(n.right)
    if lh - rh > 1:
        l = n.left
        if _height(l.left) < _height(l.right):
            l = _rotate_left(l)
        return _rotate_right(_Node(n.key, n.ident, n.value, l, n.right))
    if rh - lh > 1:
        r = n.right
        if _height(r.left) > _height(r.right):
            r = _rotate_right(r)
        return _rotate_left(_Node(n.key, n.ident, n.value, n.left, r))
    return n


def _rotate_right(n):
    l = n.left
    return _Node(l.key, l.ident, l.value, l.left, _Node(n.key, n.ident, n.value, l.right, n.right))


def _rotate_left(n):
    r = n.right
    return _Node(r.key, r.ident, r.value, _Node(n.key, n.ident, n.value, n.left, r.left), r.right)


class EnvMap:
    """Persistent balanced search map from identifiers to machine values.

    Insertion returns a new map sharing structure with the old one, so
    closures can hang on to their environment at zero copying cost."""

    __slots__ = ("_root",)

    def __init__(self, root=None):
        self._root = root

    def insert(self, x: Ident, v) -> "EnvMap":
        key = ident_key(x)

        def go(n):
            if n is None:
                return _Node(key, x, v, None, None)
            if key < n.key:
                return _balance(_Node(n.key, n.ident, n.value, go(n.left), n.right))
            if key > n.key:
                return _balance(_Node(n.key, n.ident, n.value, n.left, go(n.right)))
            return _Node(key, x, v, n.left, n.right)

        return EnvMap(go(self._root))

    def get(self, x: Ident):
        key = ident_key(x)
        n = self._root
        while n is not None:
            if key < n.key:
                n = n.left
            elif key > n.key:
                n = n.right
            else:
                return n.value
        return None

    def __contains__(self, x: Ident) -> bool:
        return self.get(x) is not None

    def __len__(self) -> int:
        return _size(self._root)

    def items(self):
        def walk(n):
            if n is not None:
                yield from walk(n.left)
                yield (n.ident, n.value)
                yield from walk(n.right)

        yield from walk(self._root)


EMPTY_ENV = EnvMap()


# --- closure-specific syntax -----------------------------------------------


@dataclass(frozen=True)
class Clo:
    """An abstraction paired with the environment it was evaluated in."""

    binder: Ident
    body: Term
    env: EnvMap


@dataclass(frozen=True)
class FunClo:
    """Function part of an application, paired with its environment."""

    term: Term
    env: EnvMap


@dataclass(eq=False)
class EConfig(Config):
    """Machine state; E-mode focus carries an environment."""

    env: EnvMap = EMPTY_ENV


def lookup(env: EnvMap, x: Ident) -> MValue:
    """Environment lookup; unbound names become marked abstract variables."""
    v = env.get(x)
    if v is not None:
        return v
    return AVar(free_marker(x))


def load(t: Term) -> EConfig:
    return EConfig(MODE_E, t, None, None, -1, [], [], 0, env=EMPTY_ENV)


def step(cfg: EConfig) -> int:
    """One transition; same numbering and dispatch order as the
    substitution machine."""
    stack = cfg.stack
    if cfg.mode == MODE_E:
        t = cfg.term
        if isinstance(t, App):  # (1)
            stack.append(FunClo(t.fn, cfg.env))
            cfg.term = t.arg
            return 1
        if isinstance(t, Lam):  # (2)
            cfg.mode = MODE_C
            cfg.value = Clo(t.binder, t.body, cfg.env)
            cfg.term = None
            return 2
        if isinstance(t, Var):  # (3)
            cfg.mode = MODE_C
            cfg.value = lookup(cfg.env, t.ident)
            cfg.term = None
            return 3
        raise MachineStuck(f"no rule applies in E mode: {cfg!r}")

    if cfg.mode == MODE_C:
        v = cfg.value
        top = stack[-1] if stack else None
        if isinstance(top, FunClo):  # (4)
            stack[-1] = ArgVal(v)
            cfg.mode = MODE_E
            cfg.term = top.term
            cfg.env = top.env
            cfg.value = None
            return 4
        if isinstance(top, ArgVal):
            a = top.value
            if isinstance(v, Clo):
                if isinstance(a, Annot):  # (5) — beta: extend the environment
                    stack.pop()
                    cfg.mode = MODE_E
                    cfg.term = v.body
                    cfg.env = v.env.insert(v.binder, a)
                    cfg.value = None
                    return 5
                loc = cfg.alloc()  # (6)
                stack[-1] = ArgVal(Annot(loc, a))
                return 6
            if isinstance(v, Annot) and isinstance(v.value, Clo):  # (7)
                cfg.value = v.value
                return 7
            stack.pop()  # (8)
            cfg.value = VApp(v, a)
            return 8
        if isinstance(v, Clo):  # (9)
            fresh = gen_ident(cfg.counter)
            cfg.counter += 1
            loc = cfg.alloc()
            cfg.mode = MODE_E
            cfg.term = v.body
            cfg.env = v.env.insert(v.binder, Annot(loc, AVar(fresh)))
            cfg.value = None
            stack.append(Binder(fresh))
            return 9
        if isinstance(v, AVar):  # (10)
            cfg.mode = MODE_S
            cfg.term = Var(v.ident)
            cfg.value = None
            return 10
        if isinstance(v, VApp):  # (11)
            stack.append(FunVal(v.fn))
            cfg.value = v.arg
            return 11
        if isinstance(v, Annot):  # (12)
            cfg.mode = MODE_M
            cfg.found = cfg.heap[v.loc]
            cfg.loc = v.loc
            cfg.value = v.value
            return 12
        raise MachineStuck(f"no rule applies in C mode: {cfg!r}")

    if cfg.mode == MODE_M:
        if cfg.found is not None:  # (13)
            cfg.mode = MODE_S
            cfg.term = cfg.found
            cfg.value = None
            cfg.found = None
            cfg.loc = -1
            return 13
        stack.append(Memo(cfg.loc))  # (14)
        cfg.mode = MODE_C
        cfg.found = None
        cfg.loc = -1
        return 14

    if cfg.mode == MODE_S:
        if not stack:
            raise MachineStuck("step on a final configuration")
        top = stack[-1]
        if isinstance(top, Memo):  # (15)
            stack.pop()
            cfg.store(top.loc, cfg.term)
            return 15
        if isinstance(top, FunVal):  # (16)
            stack[-1] = ArgNF(cfg.term)
            cfg.mode = MODE_C
            cfg.value = top.value
            cfg.term = None
            return 16
        if isinstance(top, ArgNF):  # (17)
            stack.pop()
            cfg.term = App(cfg.term, top.term)
            return 17
        if isinstance(top, Binder):  # (18)
            stack.pop()
            cfg.term = Lam(top.ident, cfg.term)
            return 18
        raise MachineStuck(f"no rule applies in S mode: {cfg!r}")

    raise MachineStuck(f"unknown mode {cfg.mode!r}")


Hook = Callable[[int, int, str, EConfig], None]


def run(t: Term, fuel: int = DEFAULT_FUEL, hook: Hook | None = None) -> RunResult:
    """As subst_machine.run, on the environment-based machine."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    cfg = load(t)
    counts: dict[int, int] = {}
    steps = 0
    while not cfg.is_final:
        if steps >= fuel:
            raise FuelError(f"machine exceeded {fuel} transitions", steps=steps)
        rule = step(cfg)
        steps += 1
        counts[rule] = counts.get(rule, 0) + 1
        if hook is not None:
            hook(steps, rule, cfg.mode, cfg)
    nf = cfg.term
    return RunResult(
        graph=sharing.graph_of_term(nf),
        term=nf,
        rule_counts=counts,
        steps=steps,
        heap_size=len(cfg.heap),
    )


# --- translation to the substitution machine --------------------------------


class Translator:
    """Executes the delayed substitutions of environment-machine states.

    Caches are keyed by object identity (everything translated is
    immutable and shared across consecutive configurations), so repeated
    per-step translation of a run costs about as much as the run itself.
    """

    def __init__(self):
        self._values: dict[int, tuple] = {}
        self._terms: dict[tuple, tuple] = {}
        self._frames: dict[int, tuple] = {}

    def value(self, v: MValue) -> MValue:
        hit = self._values.get(id(v))
        if hit is not None:
            return hit[1]
        match v:
            case AVar(_):
                out: MValue = v
            case VApp(f, a):
                out = VApp(self.value(f), self.value(a))
            case Annot(loc, inner):
                out = Annot(loc, self.value(inner))
            case Clo(x, body, env):
                out = VLam(x, self.term(env, body, frozenset((x,))))
            case _:
                raise TypeError(f"not an environment-machine value: {v!r}")
        self._values[id(v)] = (v, out)
        return out

    def term(self, env: EnvMap, t: Term, shadowed: frozenset[Ident] = frozenset()) -> MTerm:
        key = (id(env), id(t), shadowed)
        hit = self._terms.get(key)
        if hit is not None:
            return hit[2]
        match t:
            case Var(x):
                if x in shadowed:
                    out: MTerm = t
                else:
                    v = env.get(x)
                    out = t if v is None else Delim(self.value(v))
            case App(f, a):
                out = App(self.term(env, f, shadowed), self.term(env, a, shadowed))
            case Lam(x, b):
                out = Lam(x, self.term(env, b, shadowed | {x}))
            case _:
                raise TypeError(f"not a term: {t!r}")
        self._terms[key] = (env, t, out)
        return out

    def frame(self, f):
        hit = self._frames.get(id(f))
        if hit is not None:
            return hit[1]
        match f:
            case FunClo(t, env):
                out: object = FunTerm(self.term(env, t))
            case ArgVal(v):
                out = ArgVal(self.value(v))
            case FunVal(v):
                out = FunVal(self.value(v))
            case _:
                out = f  # ArgNF, Binder, Memo carry no environments
        self._frames[id(f)] = (f, out)
        return out

    def stack(self, frames: list) -> list:
        return [self.frame(f) for f in frames]

    def config(self, cfg: EConfig, snapshot_heap: bool = True) -> Config:
        focus_term = cfg.term
        if cfg.mode == MODE_E:
            focus_term = self.term(cfg.env, cfg.term)
        value = self.value(cfg.value) if cfg.value is not None else None
        return Config(
            cfg.mode,
            focus_term,
            value,
            cfg.found,
            cfg.loc,
            self.stack(cfg.stack),
            list(cfg.heap) if snapshot_heap else cfg.heap,
            cfg.counter,
        )


def translate_term(env: EnvMap, t: Term) -> MTerm:
    """Execute an environment's delayed substitutions over a term."""
    return Translator().term(env, t)


def translate_value(v: MValue) -> MValue:
    return Translator().value(v)


def translate_config(cfg: EConfig) -> Config:
    """The substitution-machine configuration this state corresponds to."""
    return Translator().config(cfg)

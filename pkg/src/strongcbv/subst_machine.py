"""Strong call-by-value abstract machine with delimited substitution.

The machine works on terms extended with substitution delimiters: a
delimiter carries an already-evaluated value, blocks further substitution
inside it, and lets substituted values be shared rather than copied.
Computed strong normal forms are memoized in a write-once heap keyed by
the location annotations on values, so each value is fully normalized at
most once; the final normal form is returned as a shared graph.

Four modes of operation:

  E  evaluate a term to a weak normal form
  C  continue with a computed weak normal form
  S  continue with a computed strong normal form
  M  consult the memo table for a value's normal form

Eighteen numbered transitions; dispatch always takes the first matching
rule in ascending order, which is what disambiguates rules 5/6/7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import sharing
from .errors import FuelError, MachineStuck
from .syntax import App, Ident, Lam, Term, Var, gen_ident

DEFAULT_FUEL = 10**7

BETA_RULE = 5

RULE_NAMES = {
    1: "push-function",
    2: "weak-value",
    3: "strip",
    4: "pop-function",
    5: "beta",
    6: "annotate-argument",
    7: "drop-annotation",
    8: "inert-apply",
    9: "under-binder",
    10: "abstract-var",
    11: "push-inert",
    12: "memo-lookup",
    13: "memo-hit",
    14: "memo-start",
    15: "memo-store",
    16: "pop-inert",
    17: "rebuild-app",
    18: "rebuild-lam",
}


# --- machine terms and values --------------------------------------------


@dataclass(frozen=True)
class Delim:
    """Substitution delimiter carrying an evaluated value."""

    value: "MValue"


MTerm = Var | App | Lam | Delim


@dataclass(frozen=True)
class AVar:
    """Abstract variable: a free or freshly generated name as a value."""

    ident: Ident


@dataclass(frozen=True)
class VApp:
    fn: "MValue"
    arg: "MValue"


@dataclass(frozen=True)
class VLam:
    binder: Ident
    body: MTerm


@dataclass(frozen=True)
class Annot:
    """A value annotated with its memo location."""

    loc: int
    value: "MValue"


MValue = AVar | VApp | VLam | Annot


# --- stack frames ---------------------------------------------------------


@dataclass(frozen=True)
class FunTerm:
    """Function part of an application, waiting for its argument's value."""

    term: MTerm


@dataclass(frozen=True)
class ArgVal:
    """Evaluated argument, waiting for the function's value."""

    value: MValue


@dataclass(frozen=True)
class FunVal:
    """Inert function part, parked while its argument is normalized."""

    value: MValue


@dataclass(frozen=True)
class ArgNF:
    """Normalized argument, waiting for the function to be normalized."""

    term: Term


@dataclass(frozen=True)
class Binder:
    ident: Ident


@dataclass(frozen=True)
class Memo:
    loc: int


Frame = FunTerm | ArgVal | FunVal | ArgNF | Binder | Memo


# --- operations on machine terms ------------------------------------------


def strip(t: MTerm) -> MValue:
    """Read a variable or delimiter as a value."""
    match t:
        case Var(x):
            return AVar(x)
        case Delim(v):
            return v
    raise MachineStuck(f"strip applied to {type(t).__name__}")


def msubst(x: Ident, d: Delim, t: MTerm) -> MTerm:
    """Delimited substitution t[x := d]: stops at shadowing binders and at
    delimiters, and never renames (the substituted variable cannot occur
    under a delimiter)."""
    if not isinstance(d, Delim):
        raise TypeError("substituted term must be a delimiter")

    def go(t: MTerm) -> MTerm:
        match t:
            case Var(y):
                return d if y == x else t
            case App(f, a):
                f2 = go(f)
                a2 = go(a)
                return t if f2 is f and a2 is a else App(f2, a2)
            case Lam(y, b):
                if y == x:
                    return t
                b2 = go(b)
                return t if b2 is b else Lam(y, b2)
            case Delim(_):
                return t
        raise TypeError(f"not a machine term: {t!r}")

    return go(t)


# --- configurations --------------------------------------------------------

MODE_E, MODE_C, MODE_S, MODE_M = "E", "C", "S", "M"


@dataclass(eq=False)
class Config:
    """One machine state.  The heap and counter are owned by the
    configuration: stepping mutates them in place and nothing else."""

    mode: str
    term: MTerm | None  # E focus, or S normal form
    value: MValue | None  # C / M focus
    found: Term | None  # M memo-lookup result
    loc: int  # M location
    stack: list[Frame]
    heap: list[Term | None]  # write-once: entries go empty -> filled
    counter: int  # fresh-name source

    @property
    def is_final(self) -> bool:
        return self.mode == MODE_S and not self.stack

    def alloc(self) -> int:
        self.heap.append(None)
        return len(self.heap) - 1

    def store(self, loc: int, nf: Term) -> None:
        if self.heap[loc] is not None:
            raise MachineStuck(f"heap location {loc} written twice")
        self.heap[loc] = nf

    def __repr__(self) -> str:
        return (
            f"<Config {self.mode} stack={len(self.stack)} "
            f"heap={len(self.heap)} counter={self.counter}>"
        )


def load(t: Term) -> Config:
    """Initial configuration: evaluate t on the empty stack."""
    return Config(MODE_E, t, None, None, -1, [], [], 0)


def step(cfg: Config) -> int:
    """Apply the first matching transition in ascending rule order and
    return its number.  Raises MachineStuck on a final or ill-formed
    configuration."""
    stack = cfg.stack
    if cfg.mode == MODE_E:
        t = cfg.term
        if isinstance(t, App):  # (1)
            stack.append(FunTerm(t.fn))
            cfg.term = t.arg
            return 1
        if isinstance(t, Lam):  # (2)
            cfg.mode = MODE_C
            cfg.term = None
            cfg.value = VLam(t.binder, t.body)
            return 2
        cfg.mode = MODE_C  # (3)
        cfg.value = strip(t)
        cfg.term = None
        return 3

    if cfg.mode == MODE_C:
        v = cfg.value
        top = stack[-1] if stack else None
        if isinstance(top, FunTerm):  # (4)
            stack[-1] = ArgVal(v)
            cfg.mode = MODE_E
            cfg.term = top.term
            cfg.value = None
            return 4
        if isinstance(top, ArgVal):
            a = top.value
            if isinstance(v, VLam):
                if isinstance(a, Annot):  # (5) — the beta transition
                    stack.pop()
                    cfg.mode = MODE_E
                    cfg.term = msubst(v.binder, Delim(a), v.body)
                    cfg.value = None
                    return 5
                loc = cfg.alloc()  # (6)
                stack[-1] = ArgVal(Annot(loc, a))
                return 6
            if isinstance(v, Annot) and isinstance(v.value, VLam):  # (7)
                # contraction will change the normal form: forget the memo
                cfg.value = v.value
                return 7
            stack.pop()  # (8)
            cfg.value = VApp(v, a)
            return 8
        if isinstance(v, VLam):  # (9) — go under the binder
            fresh = gen_ident(cfg.counter)
            cfg.counter += 1
            loc = cfg.alloc()
            cfg.mode = MODE_E
            cfg.term = msubst(v.binder, Delim(Annot(loc, AVar(fresh))), v.body)
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
        if cfg.found is not None:  # (13) — memo hit, reuse the normal form
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


@dataclass
class RunResult:
    graph: sharing.TermGraph
    term: Term  # the normal form, sharing intact
    rule_counts: dict[int, int]
    steps: int
    heap_size: int

    @property
    def beta_count(self) -> int:
        return self.rule_counts.get(BETA_RULE, 0)


Hook = Callable[[int, int, str, Config], None]


def run(t: Term, fuel: int = DEFAULT_FUEL, hook: Hook | None = None) -> RunResult:
    """Drive the machine from load(t) to the final configuration.

    Only the eighteen numbered transitions are counted; loading and the
    final unload are not transitions.  The hook, when given, is invoked
    after every transition with (step index, rule, mode tag, config); the
    configuration must be treated as read-only.
    """
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

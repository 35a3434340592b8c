"""Reduction semantics for the strong right-to-left call-by-value strategy.

This is the executable reference the machines are checked against: a
deterministic decomposition that finds the unique next redex, one-step
contraction, and full / weak-fragment normalizers with step counts.

Grammar of the term classes used throughout (over plain terms):

    wnf      w ::= \\x. t | i          inert    i ::= i w | x
    normal   n ::= \\x. n | a          neutral  a ::= a n | x

Weak reduction contracts ``(\\x. t) w`` with w a wnf, searching arguments
before functions; the strong strategy additionally reduces under binders
and normalizes the arguments of inert applications, again right to left.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import FuelError
from .syntax import HOLE, App, Ident, Lam, Term, Var, plug, subst

DEFAULT_FUEL = 10**6


# --- term classes --------------------------------------------------------


def is_wnf(t: Term) -> bool:
    return isinstance(t, Lam) or is_inert(t)


def is_inert(t: Term) -> bool:
    match t:
        case Var(_):
            return True
        case App(f, a):
            return is_inert(f) and is_wnf(a)
    return False


def is_normal(t: Term) -> bool:
    match t:
        case Lam(_, b):
            return is_normal(b)
    return is_neutral(t)


def is_neutral(t: Term) -> bool:
    match t:
        case Var(_):
            return True
        case App(f, a):
            return is_neutral(f) and is_normal(a)
    return False


def classify(t: Term) -> frozenset[str]:
    """Memberships of t among {wnf, inert, normal, neutral, reducible}."""
    out = set()
    if is_wnf(t):
        out.add("wnf")
    if is_inert(t):
        out.add("inert")
    if is_normal(t):
        out.add("normal")
    else:
        out.add("reducible")
    if is_neutral(t):
        out.add("neutral")
    return frozenset(out)


# --- decomposition -------------------------------------------------------


@dataclass(frozen=True)
class Redex:
    """A unique decomposition t = context[(\\bound. body) argument]."""

    context: Term
    bound: Ident
    body: Term
    argument: Term

    def contract(self) -> Term:
        return plug(self.context, subst(self.bound, self.argument, self.body))

    def source(self) -> Term:
        return plug(self.context, App(Lam(self.bound, self.body), self.argument))


def _wrap(d: Redex | None, build) -> Redex | None:
    return None if d is None else replace(d, context=build(d.context))


def _decompose_weak(t: Term) -> Redex | None:
    # Arguments first; the function side only once the argument is a wnf.
    match t:
        case App(f, a):
            d = _decompose_weak(a)
            if d is not None:
                return _wrap(d, lambda c: App(f, c))
            d = _decompose_weak(f)
            if d is not None:
                return _wrap(d, lambda c: App(c, a))
            if isinstance(f, Lam):
                return Redex(Var(HOLE), f.binder, f.body, a)
            return None
    return None


def _decompose_inert(t: Term) -> Redex | None:
    # t is an inert application; normalize its arguments right to left,
    # descending into the function side once the argument is normal.
    match t:
        case App(f, a):
            d = _decompose_strong(a)
            if d is not None:
                return _wrap(d, lambda c: App(f, c))
            return _wrap(_decompose_inert(f), lambda c: App(c, a))
    return None


def _decompose_strong(t: Term) -> Redex | None:
    match t:
        case Lam(x, b):
            return _wrap(_decompose_strong(b), lambda c: Lam(x, c))
        case App(_, _):
            d = _decompose_weak(t)
            if d is not None:
                return d
            return _decompose_inert(t)
    return None


def decompose(t: Term) -> Redex | None:
    """The strategy's unique decomposition, or None on a normal form."""
    return _decompose_strong(t)


def decompose_weak(t: Term) -> Redex | None:
    """Decomposition restricted to the weak fragment (stops at binders)."""
    return _decompose_weak(t)


# --- stepping and normalization ------------------------------------------


def step(t: Term) -> Term | None:
    """One contraction of the strategy; None iff t is a normal form."""
    d = decompose(t)
    return None if d is None else d.contract()


def weak_step(t: Term) -> Term | None:
    d = decompose_weak(t)
    return None if d is None else d.contract()


def _iterate(t: Term, stepper, fuel: int, kind: str) -> tuple[Term, int]:
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    count = 0
    while True:
        nxt = stepper(t)
        if nxt is None:
            return t, count
        count += 1
        if count > fuel:
            raise FuelError(f"{kind} normalization exceeded {fuel} steps", steps=count)
        t = nxt


def normalize(t: Term, fuel: int = DEFAULT_FUEL) -> tuple[Term, int]:
    """Fully normalize, returning the normal form and the contraction count."""
    return _iterate(t, step, fuel, "strong")


def weak_normalize(t: Term, fuel: int = DEFAULT_FUEL) -> tuple[Term, int]:
    """Normalize the weak fragment only; the result is a weak normal form."""
    return _iterate(t, weak_step, fuel, "weak")

"""Benchmark corpora: the standard family instances and seeded random
closed terms, shared between the test suite and the bench command."""

from __future__ import annotations

import random

from .syntax import App, Ident, Lam, Term, Var, gen_family, parse

DEFAULT_SEED = 0xC0FFEE

_NAME_POOL = tuple(Ident(n) for n in "abcdef")


def church_app(k: int, inner: str, outer: str = "identity") -> Term:
    """(church_k inner) outer, the shape used by the step-count figures."""
    return App(App(gen_family("church", k), gen_family(inner)), gen_family(outer))


def identity_apps() -> list[tuple[str, Term]]:
    return [
        ("I I", parse(r"(\x. x) (\y. y)")),
        ("(I I) I", parse(r"((\x. x) (\y. y)) (\z. z)")),
        ("I (I I)", parse(r"(\x. x) ((\y. y) (\z. z))")),
        ("I under binder", parse(r"\x. (\y. y) x")),
    ]


def standard_corpus(
    dub_max: int = 10, exp_max: int = 8, e_max: int = 12, q_max: int = 10
) -> list[tuple[str, Term]]:
    """The closed family corpus the acceptance checks run over."""
    out = identity_apps()
    for k in range(dub_max + 1):
        out.append((f"(c_{k} dub) I", church_app(k, "dub")))
    for k in range(exp_max + 1):
        out.append((f"(c_{k} c_2) I", App(App(gen_family("church", k), gen_family("church", 2)), gen_family("identity"))))
    for n in range(e_max + 1):
        out.append((f"e_{n}", gen_family("e", n)))
    for n in range(q_max + 1):
        out.append((f"Q_{n}", gen_family("Q", n)))
    return out


def random_closed_term(rng: random.Random, size: int) -> Term:
    """A random closed abstraction with roughly `size` constructors."""

    def go(budget: int, scope: tuple[Ident, ...]) -> Term:
        if budget <= 1:
            if scope:
                return Var(rng.choice(scope))
            x = rng.choice(_NAME_POOL)
            return Lam(x, Var(x))
        roll = rng.random()
        if scope and roll < 0.25:
            return Var(rng.choice(scope))
        if roll < 0.50 or budget < 3:
            x = rng.choice(_NAME_POOL)
            return Lam(x, go(budget - 1, scope + (x,)))
        left = rng.randint(1, budget - 2)
        return App(go(left, scope), go(budget - 1 - left, scope))

    x = rng.choice(_NAME_POOL)
    return Lam(x, go(size - 1, (x,))) if size > 1 else Lam(_NAME_POOL[0], Var(_NAME_POOL[0]))


def random_term(rng: random.Random, size: int) -> Term:
    """A random closed term: half the draws are application spines of
    smaller closed terms, which is where reduction actually happens."""
    if size >= 7 and rng.random() < 0.5:
        k = rng.choice((2, 2, 3))
        if size - 1 > 2 + k:
            cuts = sorted(rng.sample(range(2, size - 1), k - 1))
            parts, prev = [], 1
            for c in cuts + [size - 1]:
                parts.append(max(c - prev, 2))
                prev = c
            t = random_closed_term(rng, parts[0])
            for p in parts[1:]:
                t = App(t, random_closed_term(rng, p))
            return t
    return random_closed_term(rng, size)


def random_corpus(count: int = 1000, max_size: int = 25, seed: int = DEFAULT_SEED) -> list[Term]:
    rng = random.Random(seed)
    return [random_term(rng, rng.randint(3, max_size)) for _ in range(count)]

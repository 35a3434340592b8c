"""Named lambda terms: parsing, printing, variable analysis, substitution,
alpha-equivalence, and generators for the standard benchmark families."""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# --- identifiers ---------------------------------------------------------


@dataclass(frozen=True)
class Ident:
    """A variable name.

    Three disjoint namespaces share this type: plain source names, names
    drawn from a counter (printed ``x_0``, ``x_1``, ...), and markers for
    free variables of the input (printed with a ``_free`` suffix).  The
    namespace lives in the structure, not in the string, so freshness never
    depends on avoiding string collisions.
    """

    name: str
    gen: int | None = None
    free: bool = False

    def __str__(self) -> str:
        if self.gen is not None:
            return f"{self.name}_{self.gen}"
        if self.free:
            return f"{self.name}_free"
        return self.name


def gen_ident(counter: int) -> Ident:
    """The counter-generated identifier printed ``x_<counter>``."""
    return Ident("x", gen=counter)


def free_marker(x: Ident) -> Ident:
    """The marker standing for a free occurrence of source variable x."""
    return Ident(x.name, free=True)


def ident_key(x: Ident) -> tuple:
    """Total order on identifiers, for search trees and stable listings."""
    return (x.name, -1 if x.gen is None else x.gen, x.free)


# --- terms ---------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    ident: Ident


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    binder: Ident
    body: "Term"


Term = Var | App | Lam

# Contexts are Terms with exactly one occurrence of this hole variable.
# The character cannot be produced by the parser, so no input collides.
HOLE = Ident("□")


def term_size(t: Term) -> int:
    """Number of constructors, counted over the unfolded tree."""
    match t:
        case Var(_):
            return 1
        case App(f, a):
            return 1 + term_size(f) + term_size(a)
        case Lam(_, b):
            return 1 + term_size(b)
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> set[Ident]:
    match t:
        case Var(x):
            return {x}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Lam(x, b):
            return free_vars(b) - {x}
    raise TypeError(f"not a term: {t!r}")


def bound_vars(t: Term) -> set[Ident]:
    match t:
        case Var(_):
            return set()
        case App(f, a):
            return bound_vars(f) | bound_vars(a)
        case Lam(x, b):
            return bound_vars(b) | {x}
    raise TypeError(f"not a term: {t!r}")


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def _max_gen(t: Term) -> int:
    """Largest generation counter occurring anywhere in t, or -1."""
    match t:
        case Var(x):
            return -1 if x.gen is None else x.gen
        case App(f, a):
            return max(_max_gen(f), _max_gen(a))
        case Lam(x, b):
            own = -1 if x.gen is None else x.gen
            return max(own, _max_gen(b))
    raise TypeError(f"not a term: {t!r}")


def subst(x: Ident, s: Term, t: Term) -> Term:
    """Capture-avoiding substitution t[x := s].

    Binders of t that would capture a free variable of s are renamed to
    fresh counter-generated identifiers; renaming happens only when the
    substitution actually reaches under the clashing binder, so results
    stay structurally minimal.
    """
    fv_s = free_vars(s)
    ctr = [max(_max_gen(t), _max_gen(s)) + 1]

    def fresh() -> Ident:
        i = gen_ident(ctr[0])
        ctr[0] += 1
        return i

    def go(t: Term, ren: dict[Ident, Ident], active: bool) -> Term:
        match t:
            case Var(y):
                if active and y == x:
                    return s
                r = ren.get(y)
                return Var(r) if r is not None else t
            case App(f, a):
                f2 = go(f, ren, active)
                a2 = go(a, ren, active)
                return t if f2 is f and a2 is a else App(f2, a2)
            case Lam(y, b):
                active2 = active and y != x
                ren2 = {k: v for k, v in ren.items() if k != y} if y in ren else ren
                binder = y
                if active2 and y in fv_s and x in free_vars(b):
                    binder = fresh()
                    ren2 = {**ren2, y: binder}
                b2 = go(b, ren2, active2)
                return t if binder is y and b2 is b else Lam(binder, b2)
        raise TypeError(f"not a term: {t!r}")

    return go(t, {}, True)


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Equality modulo renaming of bound variables.

    Free variables must match by identifier; bound occurrences are compared
    through binding depth, which is the nameless canonical reading with free
    names kept alongside their first-occurrence positions.
    """

    def go(a: Term, b: Term, e1: dict[Ident, int], e2: dict[Ident, int], d: int) -> bool:
        match a, b:
            case Var(x), Var(y):
                lx = e1.get(x)
                ly = e2.get(y)
                if lx is None and ly is None:
                    return x == y
                return lx == ly
            case App(f1, a1), App(f2, a2):
                return go(f1, f2, e1, e2, d) and go(a1, a2, e1, e2, d)
            case Lam(x, b1), Lam(y, b2):
                return go(b1, b2, {**e1, x: d}, {**e2, y: d}, d + 1)
        return False

    return go(t1, t2, {}, {}, 0)


# --- contexts ------------------------------------------------------------


def hole_count(t: Term) -> int:
    match t:
        case Var(x):
            return 1 if x == HOLE else 0
        case App(f, a):
            return hole_count(f) + hole_count(a)
        case Lam(x, b):
            if x == HOLE:
                raise ValueError("hole used as binder")
            return hole_count(b)
    raise TypeError(f"not a term: {t!r}")


def is_context(t: Term) -> bool:
    return hole_count(t) == 1


def plug(context: Term, t: Term) -> Term:
    """Fill the unique hole of a context; plugging may capture, by design."""

    def go(c: Term) -> Term:
        match c:
            case Var(x):
                return t if x == HOLE else c
            case App(f, a):
                f2 = go(f)
                a2 = go(a)
                return c if f2 is f and a2 is a else App(f2, a2)
            case Lam(x, b):
                b2 = go(b)
                return c if b2 is b else Lam(x, b2)
        raise TypeError(f"not a term: {c!r}")

    return go(context)


# --- concrete syntax -----------------------------------------------------
#
#   term := lam | app
#   lam  := '\' ident+ '.' term
#   app  := atom+                 (left-associative)
#   atom := ident | '(' term ')'
#   ident := [A-Za-z_][A-Za-z0-9_']*
#   '#' starts a line comment; whitespace is insignificant.

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_GENERATED_RE = re.compile(r"x_[0-9]+\Z")
_SKIP_RE = re.compile(r"[ \t\r]+|#[^\n]*")


def _lex(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _SKIP_RE.match(text, pos)
        if m:
            col += m.end() - pos
            pos = m.end()
            continue
        c = text[pos]
        if c == "\n":
            pos += 1
            line += 1
            col = 1
            continue
        if c in "\\.()":
            tokens.append((c, c, line, col))
            pos += 1
            col += 1
            continue
        m = _IDENT_RE.match(text, pos)
        if m:
            name = m.group()
            if name.endswith("_free"):
                raise ParseError(f"identifier {name!r} uses the reserved '_free' suffix", line, col)
            if _GENERATED_RE.fullmatch(name):
                raise ParseError(f"identifier {name!r} matches the generated-name pattern", line, col)
            tokens.append(("ident", name, line, col))
            pos = m.end()
            col += len(name)
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(("eof", "", line, col))
    return tokens


def parse(text: str) -> Term:
    """Parse the concrete grammar above into a Term."""
    tokens = _lex(text)
    idx = 0

    def peek() -> tuple[str, str, int, int]:
        return tokens[idx]

    def advance() -> tuple[str, str, int, int]:
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def expect(kind: str) -> tuple[str, str, int, int]:
        tok = advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok

    def parse_term() -> Term:
        if peek()[0] == "\\":
            advance()
            binders = []
            while peek()[0] == "ident":
                binders.append(Ident(advance()[1]))
            if not binders:
                tok = peek()
                raise ParseError("expected at least one binder after '\\'", tok[2], tok[3])
            expect(".")
            body = parse_term()
            for b in reversed(binders):
                body = Lam(b, body)
            return body
        return parse_app()

    def parse_app() -> Term:
        atoms = []
        while True:
            kind, value, line, col = peek()
            if kind == "ident":
                advance()
                atoms.append(Var(Ident(value)))
            elif kind == "(":
                advance()
                atoms.append(parse_term())
                expect(")")
            else:
                break
        if not atoms:
            kind, value, line, col = peek()
            raise ParseError(f"expected a term, found {value or 'end of input'!r}", line, col)
        t = atoms[0]
        for a in atoms[1:]:
            t = App(t, a)
        return t

    t = parse_term()
    kind, value, line, col = peek()
    if kind != "eof":
        raise ParseError(f"trailing input starting at {value!r}", line, col)
    return t


def pretty(t: Term) -> str:
    """Print with minimal parentheses; inverse of parse on its output."""

    def go(t: Term, pos: int) -> str:
        # pos 0: top level or lambda body, 1: function side, 2: argument side
        match t:
            case Var(x):
                return str(x)
            case Lam(x, b):
                s = f"\\{x}. {go(b, 0)}"
                return f"({s})" if pos > 0 else s
            case App(f, a):
                s = f"{go(f, 1)} {go(a, 2)}"
                return f"({s})" if pos > 1 else s
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


# --- benchmark families --------------------------------------------------

_F = Ident("f")
_X = Ident("x")
_Y = Ident("y")
_Z = Ident("z")
_W = Ident("w")
_P = Ident("p")

FAMILIES = ("church", "omega", "dub", "identity", "e", "A", "B", "Q")


def gen_family(name: str, n: int = 0) -> Term:
    """Member n of a named term family.

    church: \\f. \\x. f^n x         omega: \\x. x x
    identity: \\x. x                dub: \\x. \\p. (p x) x
    e: \\x. (church_n omega) x      (normal form has exponential size)
    A: x, then (A_n (\\y. y)) x     (open, inert)
    B: z, then z (\\w. B_n)         (open)
    Q: \\x. (\\z. B_n) A_n          (closed; one-step normal form of
                                     quadratic size, shareable linearly)
    """
    if n < 0:
        raise ValueError("family index must be >= 0")
    match name:
        case "church":
            body: Term = Var(_X)
            for _ in range(n):
                body = App(Var(_F), body)
            return Lam(_F, Lam(_X, body))
        case "omega":
            return Lam(_X, App(Var(_X), Var(_X)))
        case "identity":
            return Lam(_X, Var(_X))
        case "dub":
            return Lam(_X, Lam(_P, App(App(Var(_P), Var(_X)), Var(_X))))
        case "e":
            return Lam(_X, App(App(gen_family("church", n), gen_family("omega")), Var(_X)))
        case "A":
            t: Term = Var(_X)
            for _ in range(n):
                t = App(App(t, Lam(_Y, Var(_Y))), Var(_X))
            return t
        case "B":
            t = Var(_Z)
            for _ in range(n):
                t = App(Var(_Z), Lam(_W, t))
            return t
        case "Q":
            return Lam(_X, App(Lam(_Z, gen_family("B", n)), gen_family("A", n)))
    raise ValueError(f"unknown family {name!r} (expected one of {', '.join(FAMILIES)})")

import pytest
from hypothesis import given, settings, strategies as st

from strongcbv.syntax import (
    App,
    Ident,
    Lam,
    ParseError,
    Var,
    alpha_eq,
    bound_vars,
    free_vars,
    gen_family,
    gen_ident,
    is_context,
    parse,
    plug,
    pretty,
    subst,
    term_size,
    HOLE,
)

x, y, z = Ident("x"), Ident("y"), Ident("z")
a, b, c = Ident("a"), Ident("b"), Ident("c")


# --- strategies -----------------------------------------------------------

_names = st.sampled_from([Ident(n) for n in "abcxyz"])


@st.composite
def terms(draw, max_depth=5, closed=False):
    def go(depth, scope):
        choices = ["lam"]
        if scope:
            choices += ["var", "var"]
        if depth > 0:
            choices += ["app", "app", "lam"]
        kind = draw(st.sampled_from(choices))
        if kind == "var":
            return Var(draw(st.sampled_from(scope)))
        if kind == "lam":
            v = draw(_names)
            return Lam(v, go(depth - 1, scope + [v]))
        return App(go(depth - 1, scope), go(depth - 1, scope))

    return go(max_depth, [] if closed else [a, b, c])


# --- parsing ---------------------------------------------------------------


def test_parse_self_application():
    assert parse(r"\x. x x") == Lam(x, App(Var(x), Var(x)))


def test_parse_left_associative():
    assert parse("a b c") == App(App(Var(a), Var(b)), Var(c))


def test_parse_church_two():
    assert parse(r"\f.\x. f (f x)") == gen_family("church", 2)


def test_parse_multi_binder_sugar():
    assert parse(r"\f x. f x") == parse(r"\f. \x. f x")


def test_parse_body_extends_right():
    assert parse(r"\x. x a b") == Lam(x, App(App(Var(x), Var(a)), Var(b)))
    # a lambda is not an atom: as an argument it needs parentheses
    assert parse(r"\x. x (\y. y)") == Lam(x, App(Var(x), Lam(y, Var(y))))
    with pytest.raises(ParseError):
        parse(r"\x. x \y. y")


def test_parse_comments_and_whitespace():
    assert parse("# leading comment\n  a   # trailing\n b") == App(Var(a), Var(b))


@pytest.mark.parametrize(
    "text",
    [")", "a (b", r"\. x", "", r"\x", "a b )"],
)
def test_parse_syntax_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse("a b\n@ c")
    assert exc.value.line == 2 and exc.value.col == 1


@pytest.mark.parametrize("text", ["foo_free", r"\x_free. x_free", "x_3", r"\y. x_12"])
def test_parse_rejects_reserved_identifiers(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_allows_primed_and_underscored_names():
    t = parse(r"\y'. y' my_var")
    assert isinstance(t, Lam) and t.binder == Ident("y'")


# --- printing ---------------------------------------------------------------


def test_pretty_identity():
    assert pretty(Lam(x, Var(x))) == r"\x. x"


def test_pretty_minimal_parens():
    assert pretty(App(App(Var(a), Var(b)), Var(c))) == "a b c"
    assert pretty(Lam(x, App(Var(x), Lam(y, Var(y))))) == r"\x. x (\y. y)"
    assert pretty(App(Var(a), App(Var(b), Var(c)))) == "a (b c)"
    assert pretty(App(Lam(x, Var(x)), Var(a))) == r"(\x. x) a"


def test_pretty_generated_and_free_markers():
    assert pretty(Lam(gen_ident(0), Var(gen_ident(0)))) == r"\x_0. x_0"
    assert pretty(Var(Ident("y", free=True))) == "y_free"


@settings(max_examples=80)
@given(terms())
def test_parse_pretty_roundtrip(t):
    assert parse(pretty(t)) == t


# --- variables ----------------------------------------------------------------


def test_free_and_bound_vars():
    t = Lam(x, App(Var(x), Var(y)))
    assert free_vars(t) == {y}
    assert bound_vars(t) == {x}


def test_family_q_is_closed():
    assert free_vars(gen_family("Q", 2)) == set()
    assert free_vars(gen_family("Q", 7)) == set()


# --- substitution ----------------------------------------------------------------


def test_subst_capture_renames():
    out = subst(x, Var(y), Lam(y, Var(x)))
    assert isinstance(out, Lam)
    assert out.binder != y and out.binder.gen is not None
    assert out.body == Var(y)


def test_subst_shadowing_stops():
    t = Lam(x, Var(x))
    assert subst(x, Var(y), t) is t


def test_subst_plain():
    omega = gen_family("omega")
    assert subst(x, omega, App(Var(x), Var(x))) == App(omega, omega)


def test_subst_no_needless_renaming():
    # binder clashes with nothing actually substituted under it
    t = Lam(y, Var(z))
    assert subst(x, Var(y), t) is t


@settings(max_examples=80)
@given(terms(), terms())
def test_subst_free_vars_equation(t, s):
    fv_t = free_vars(t)
    fv = free_vars(subst(x, s, t))
    if x in fv_t:
        assert fv == (fv_t - {x}) | free_vars(s)
    else:
        assert fv == fv_t


# --- alpha equivalence -------------------------------------------------------------


def test_alpha_eq_basic():
    assert alpha_eq(parse(r"\x. x"), parse(r"\y. y"))
    assert not alpha_eq(parse(r"\x.\y. x"), parse(r"\x.\y. y"))


def test_alpha_eq_free_vars_by_name():
    assert not alpha_eq(Var(x), Var(y))
    assert alpha_eq(Var(x), Var(x))


def test_alpha_eq_machine_output_shape():
    from strongcbv import subst_machine

    nf = subst_machine.run(parse(r"(\x. x) (\y. y)")).term
    assert alpha_eq(nf, parse(r"\z. z"))


def _rename_binders(t, offset):
    fresh = [offset]

    def go(t, ren):
        match t:
            case Var(v):
                return Var(ren.get(v, v))
            case App(f, g):
                return App(go(f, ren), go(g, ren))
            case Lam(v, body):
                nv = gen_ident(fresh[0])
                fresh[0] += 1
                return Lam(nv, go(body, {**ren, v: nv}))

    return go(t, {})


@settings(max_examples=80)
@given(terms(), st.integers(min_value=100, max_value=10**6))
def test_alpha_eq_invariant_under_renaming(t, offset):
    assert alpha_eq(t, _rename_binders(t, offset))


@settings(max_examples=40)
@given(terms(), terms(), terms())
def test_alpha_eq_equivalence_relation(t1, t2, t3):
    assert alpha_eq(t1, t1)
    assert alpha_eq(t1, t2) == alpha_eq(t2, t1)
    if alpha_eq(t1, t2) and alpha_eq(t2, t3):
        assert alpha_eq(t1, t3)


# --- contexts --------------------------------------------------------------------------


def test_plug_and_context_check():
    ctx = App(Var(HOLE), Var(a))
    assert is_context(ctx)
    assert plug(ctx, Lam(x, Var(x))) == App(Lam(x, Var(x)), Var(a))
    assert not is_context(Var(a))
    assert not is_context(App(Var(HOLE), Var(HOLE)))


# --- families ----------------------------------------------------------------------------


def test_family_church_zero():
    assert pretty(gen_family("church", 0)) == r"\f. \x. x"


def test_family_a_one():
    assert gen_family("A", 1) == App(App(Var(x), Lam(y, Var(y))), Var(x))


def test_family_e_two():
    omega = Lam(x, App(Var(x), Var(x)))
    expected = Lam(x, App(App(gen_family("church", 2), omega), Var(x)))
    assert gen_family("e", 2) == expected


def test_family_dub_shape():
    p = Ident("p")
    assert gen_family("dub") == Lam(x, Lam(p, App(App(Var(p), Var(x)), Var(x))))


def test_family_q2_display():
    q2 = gen_family("Q", 2)
    body = q2.body
    assert q2.binder == x
    assert body.fn == Lam(z, gen_family("B", 2))
    assert body.arg == gen_family("A", 2)


def test_family_sizes_linear():
    for n in range(0, 12):
        assert term_size(gen_family("A", n)) == 1 + 5 * n


def test_family_unknown():
    with pytest.raises(ValueError):
        gen_family("mystery", 1)
    with pytest.raises(ValueError):
        gen_family("church", -1)

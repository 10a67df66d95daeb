import random

import pytest
from hypothesis import given, settings, strategies as st

from bccs.generate import random_term
from bccs.syntax import (NIL, TAU, Alphabet, ParseError, Prefix, Substitution,
                         SubstitutionError, Sum, Var, ac_canonical, depth, init_tau_term,
                         is_safe, meta, name, parse, render, substitute, term, weak_depth)
from bccs.axioms import axiom, get_axiom


a, b = name("a"), name("b")


def test_parse_basic_shapes():
    assert parse("0") is NIL
    assert parse("a.0 + b.0") is Sum(Prefix(a, NIL), Prefix(b, NIL))
    assert parse("tau.(a.x + tau.b.0)") is Prefix(
        TAU, Sum(Prefix(a, Var("x")), Prefix(TAU, Prefix(b, NIL))))


def test_prefix_binds_tighter_than_sum():
    assert parse("a.x + y") is Sum(Prefix(a, Var("x")), Var("y"))


def test_sum_associates_to_the_right():
    assert parse("x + y + z") is Sum(Var("x"), Sum(Var("y"), Var("z")))


def test_metavariables():
    t = parse("@a.x + @@b.y")
    assert t.left.action == meta("a")
    assert t.right.action.kind == "metaany"


@pytest.mark.parametrize("bad", ["a.", "(a.0", "a.0 +", "tau", "a b", "1", ""])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad)


def test_render_examples():
    assert render(NIL) == "0"
    assert render(Prefix(a, Sum(Var("x"), NIL))) == "a.(x + 0)"


def test_render_round_trip_on_random_terms():
    rng = random.Random(11)
    for _ in range(1000):
        t = random_term(rng, ["a", "b", "tau"], rng.randint(0, 4), variables=("x", "y"))
        assert parse(render(t)) is t


@pytest.mark.parametrize("src,want", [
    ("a.0 + 0", "a.0"),
    ("a.0 + a.0", "a.0"),
    ("b.0 + a.0", "a.0 + b.0"),
    ("(x + a.0) + (0 + x)", "x + a.0"),
    ("tau.0 + a.0", "a.0 + tau.0"),
])
def test_ac_canonical(src, want):
    assert render(ac_canonical(term(src))) == want


def test_ac_canonical_idempotent():
    rng = random.Random(3)
    for _ in range(300):
        t = random_term(rng, ["a", "b", "tau"], 3, variables=("x",))
        c = ac_canonical(t)
        assert ac_canonical(c) is c


def test_depths():
    assert depth(term("0")) == 0 and depth(term("x")) == 0
    assert depth(term("a.a.0 + b.0")) == 2
    assert weak_depth(term("tau.a.tau.0")) == 1


def test_substitute():
    s = Substitution.of({"x": "b.0", "y": "0"})
    assert render(substitute(term("a.x + y"), s)) == "a.b.0 + 0"
    assert render(substitute(term("@a.x"), Substitution.of({"x": "0"}, {"a": "b"}))) == "b.0"
    assert substitute(term("x"), Substitution()) is term("x")


def test_ground_substitution_requires_metas():
    with pytest.raises(SubstitutionError):
        substitute(term("@a.0"), Substitution(), ground=True)


def test_visible_meta_cannot_become_tau():
    with pytest.raises(SubstitutionError):
        substitute(term("@a.0"), Substitution.of({}, {"a": "tau"}))


def test_safety():
    assert not is_safe(axiom("U", "x <= a.x"))
    assert is_safe(get_axiom("IF1"))
    assert not is_safe(term("a.x + x"))


def test_init_tau_term():
    assert render(init_tau_term(term("a.b.0"))) == "tau.b.0"
    assert init_tau_term(NIL) is NIL
    assert render(init_tau_term(term("a.b.0 + x"))) == "tau.b.0 + x"
    with pytest.raises(ValueError):
        init_tau_term(term("tau.a.0"))


def test_init_tau_preserves_depth():
    rng = random.Random(5)
    for _ in range(200):
        t = random_term(rng, ["a", "b"], 3, variables=("x",))
        u = init_tau_term(t)
        assert depth(u) == depth(t)


def test_alphabet():
    A = Alphabet.parse("b,a")
    assert A.finite and len(A) == 2 and A.least() == a
    assert not Alphabet.parse("unbounded").finite
    with pytest.raises(ValueError):
        Alphabet.parse("")
    with pytest.raises(ValueError):
        Alphabet.of("tau")
    assert Alphabet.unbounded().fresh({"a_x"}, "a_x") != "a_x"


_leaf = st.sampled_from(["0", "x", "y"])


def _grow(children):
    prefixed = st.tuples(st.sampled_from(["a", "b", "tau", "@a"]), children).map(
        lambda p: f"{p[0]}.({p[1]})")
    summed = st.tuples(children, children).map(lambda p: f"({p[0]}) + ({p[1]})")
    return prefixed | summed


terms = st.recursive(_leaf, _grow, max_leaves=8).map(parse)


@settings(max_examples=300, deadline=None)
@given(terms)
def test_render_parse_property(t):
    assert parse(render(t)) is t


@settings(max_examples=300, deadline=None)
@given(terms, terms)
def test_ac_canonical_commutes_with_sum(t, u):
    assert ac_canonical(Sum(t, u)) is ac_canonical(Sum(u, t))
    assert depth(ac_canonical(t)) == depth(t)

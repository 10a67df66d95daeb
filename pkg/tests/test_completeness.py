import random

import pytest

from bccs.axioms import catalog, transform_weak
from bccs.completeness import (NotRelated, completed_paths, distinguishing_future,
                               prove_if_ground, prove_weak_from_concrete, residual_saturation,
                               saturate, saturated_term)
from bccs.generate import random_term
from bccs.proofs import check_derivation
from bccs.semantics import check_closed, initials, residuals, transitions
from bccs.syntax import NIL, Prefix, Sum, ac_canonical, render, term

IF_GC = catalog("IF-gc")


def naive_saturate(q):
    """Reference saturation on (action, body) lists, built without the library."""
    def summands(t):
        if isinstance(t, Sum):
            return summands(t.left) + summands(t.right)
        return [] if t is NIL else [t]

    def build(t):
        pairs = [(s.action.name, s.body) for s in summands(t)]
        extra = []
        for a in sorted({a for a, _ in pairs}):
            bodies = [b for x, b in pairs if x == a]
            merged = NIL
            for b in bodies:
                merged = b if merged is NIL else Sum(merged, b)
            extra.append(Prefix(next(s.action for s in summands(t) if s.action.name == a),
                                build(merged)))
        out = t
        for e in extra:
            out = Sum(out, e)
        return out
    return ac_canonical(build(q))


SAT_Q = "a.(b.(c.0 + d.0) + b.e.0) + a.f.0"
SAT_WANT = SAT_Q + " + a.(b.(c.0 + d.0) + b.e.0 + f.0 + b.(c.0 + d.0 + e.0))"


def test_saturation_golden():
    qbar, d = saturate(SAT_Q)
    assert ac_canonical(qbar) is ac_canonical(term(SAT_WANT))
    assert ac_canonical(qbar) is naive_saturate(term(SAT_Q))
    c = check_derivation(IF_GC, d)
    assert c.lhs is term(SAT_Q) and c.rhs is qbar


@pytest.mark.parametrize("src,want", [("0", "0"), ("a.0", "a.0")])
def test_saturation_trivial(src, want):
    qbar, _ = saturate(src)
    assert ac_canonical(qbar) is term(want)


def test_saturation_properties():
    rng = random.Random(21)
    for _ in range(150):
        q = random_term(rng, ["a", "b", "c"], rng.randint(0, 3))
        qbar, d = saturate(q)
        assert initials(qbar) == initials(q)
        assert check_closed("if-eq", q, qbar)
        assert ac_canonical(qbar) is naive_saturate(q)
        check_derivation(IF_GC, d)


def test_saturation_rejects_tau_and_open():
    with pytest.raises(ValueError):
        saturated_term("tau.0")
    with pytest.raises(ValueError):
        saturated_term("a.x")


def test_residual_saturation():
    q = term("a.(a.0 + a.a.a.0) + a.a.a.0")
    assert residual_saturation(q, "") is saturate(q)[0]
    assert residual_saturation(q, ()) is saturate(q)[0]
    want = saturate("(a.0 + a.a.a.0) + a.a.0")[0]
    assert ac_canonical(residual_saturation(q, "a")) is ac_canonical(want)
    with pytest.raises(ValueError):
        residual_saturation(q, "b")


def test_residual_saturation_steps():
    """q_sigma has an a-step to q_{sigma a} along every trace."""
    q = term("a.(a.0 + a.a.a.0) + a.a.a.0")
    for trace in ([], ["a"], ["a", "a"]):
        here = residual_saturation(q, trace)
        nxt = residual_saturation(q, trace + ["a"])
        assert any(t is nxt for a, t in transitions(here) if a.name == "a")


WORKED_PAIR = ("a.(a.0 + a.a.0) + a.a.a.a.0", "a.(a.0 + a.a.a.0) + a.a.a.0")


@pytest.mark.parametrize("p,q", [WORKED_PAIR, ("a.0", "a.0"), ("a.(b.0 + c.0)", "a.b.0 + a.c.0")])
def test_prove_if_ground(p, q):
    d = prove_if_ground(p, q)
    c = check_derivation(IF_GC, d)
    assert c.lhs is term(p) and c.rhs is term(q)


def test_prove_if_ground_refuses_unrelated():
    with pytest.raises(NotRelated):
        prove_if_ground("a.(a.0 + a.a.0)", "a.(a.0 + a.a.a.0)")


def test_distinguishing_future():
    trace, refused = distinguishing_future(term("a.(a.0 + a.a.0)"), term("a.(a.0 + a.a.a.0)"))
    assert trace == () and refused == frozenset({("a", "a", "a", "a")})
    assert distinguishing_future(term(WORKED_PAIR[0]), term(WORKED_PAIR[1])) is None


def test_completed_paths():
    paths = completed_paths(term("a.(b.0 + c.0)"))
    assert [[(str(a), render(t)) for a, t in p] for p in paths] == [
        [("a", "b.0 + c.0"), ("b", "0")], [("a", "b.0 + c.0"), ("c", "0")]]


def test_if_sweep_sample(small_terms):
    rng = random.Random(8)
    pool = small_terms
    for _ in range(300):
        p, q = rng.choice(pool), rng.choice(pool)
        if check_closed("if-pre", p, q):
            check_derivation(IF_GC, prove_if_ground(p, q))


WEAK = transform_weak(IF_GC, "wif-pre")


@pytest.mark.parametrize("p,q,marker", [
    ("a.0", "tau.a.0", "W1"),
    ("tau.a.a.0", "tau.(a.a.0 + a.0)", "init-tau(IF2)"),
    ("a.(b.0 + c.0)", "a.b.0 + a.c.0", "IF1"),
])
def test_prove_weak_cases(p, q, marker):
    d = prove_weak_from_concrete(IF_GC, prove_if_ground, p, q, "wif-pre")
    c = check_derivation(WEAK, d)
    assert c.lhs is term(p) and c.rhs is term(q)
    assert marker in d.axioms_used()


def test_prove_weak_refuses():
    with pytest.raises(NotRelated):
        prove_weak_from_concrete(IF_GC, prove_if_ground, "tau.a.0", "a.0", "wif-pre")
    with pytest.raises(ValueError):
        prove_weak_from_concrete(IF_GC, prove_if_ground, "a.0", "a.0", "wif-eq")

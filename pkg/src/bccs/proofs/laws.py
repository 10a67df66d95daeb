"""Derived-law scripts, tau elimination and init-tau lifting of derivations."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..axioms import (Axiom, Axiomatization, AxiomError, combine, get_axiom,
                      init_tau_axiom, init_tau_axiomatization, lifted_axioms)
from ..syntax import (NIL, TAU, Action, Prefix, Substitution, Sum, Term, Var,
                      ac_canonical, has_tau, initial_variables, meta, meta_any,
                      init_tau_term, render, summand_key, summands, sum_of, term)
from .core import (Chain, Derivation, DerivationError, ax, check, cong, prefix,
                   refl, reverse, sum_, sym, trans)

ALPHA = meta_any("a")
VIS = meta("a")


def inst(name: str, orient: str = "lr", actions: dict | None = None, **terms) -> Derivation:
    """Instance of a catalog axiom; keyword values may be strings."""
    s = Substitution({k: term(v) for k, v in terms.items()},
                     {k: (v if isinstance(v, Action) else _act(v)) for k, v in (actions or {}).items()})
    return ax(get_axiom(name), orient, s)


def _act(text: str) -> Action:
    from ..syntax import parse_action
    return parse_action(text)


def _wif1(alpha: Action, x: Term, y: Term, orient: str = "lr") -> Derivation:
    return ax(get_axiom("WIF1"), orient, Substitution({"x": x, "y": y}, {"a": alpha}))


def _wif2(x: Term, y: Term, orient: str = "lr") -> Derivation:
    return ax(get_axiom("WIF2"), orient, Substitution({"x": x, "y": y}))


# ---------------------------------------------------------------- D1 and D2


def d1_derivation(x: Term, y: Term) -> Derivation:
    """tau.(tau.x + y) ~ tau.x + y from WIF1-2."""
    start = Prefix(TAU, Sum(Prefix(TAU, x), y))
    return (Chain(start)
            .then(prefix(TAU, _wif2(x, y)))
            .then(_wif1(TAU, x, Sum(x, y)))
            .then(_wif2(x, y, "rl"))
            .done(Sum(Prefix(TAU, x), y)))


def d2_derivation(alpha: Action, xs: list[Term], y: Term) -> Derivation:
    """alpha.(sum tau.x_i + y) ~ sum alpha.x_i + alpha.(sum x_i + y), by induction on |xs|."""
    start = Prefix(alpha, sum_of([Prefix(TAU, x) for x in xs] + [y]))
    end = sum_of([Prefix(alpha, x) for x in xs] + [Prefix(alpha, sum_of(list(xs) + [y]))])
    if not xs:
        return refl(start)
    x0, rest = xs[0], list(xs[1:])
    y1 = sum_of([Prefix(TAU, x) for x in rest] + [y])
    ch = Chain(start)
    ch.then(prefix(alpha, _wif2(x0, y1)))
    ch.then(_wif1(alpha, x0, Sum(x0, y1)))
    inner = d2_derivation(alpha, rest, Sum(x0, y))
    ch.then(sum_(refl(Prefix(alpha, x0)), inner))
    return ch.done(end)


# ---------------------------------------------------------------- derived-law scripts


@dataclass
class DerivedLaw:
    key: str
    premises: Axiomatization
    derivations: list[Derivation]
    conclusions: list[tuple[Term, Term]]
    # conclusions the stated premises cannot reach, with the reason
    refuted: list[tuple[Axiom, str]] = field(default_factory=list)

    def verify(self) -> list[str]:
        """Check every script; returns the concluded judgements as text."""
        out = []
        for d, (l, r) in zip(self.derivations, self.conclusions):
            c = check(self.premises, d)
            if c.lhs is not l or c.rhs is not r:
                raise DerivationError(f"{self.key}: concluded {c}, expected "
                                      f"{render(l)} ~ {render(r)}")
            out.append(str(c))
        return out


def _both(a: Axiom) -> list[tuple[Term, Term]]:
    return [(a.lhs, a.rhs), (a.rhs, a.lhs)]


def _premises(*names: str, mode: str | None = None) -> Axiomatization:
    return combine("+".join(names), *names, mode=mode)


def _law_d1():
    E = _premises("WIF1", "WIF2")
    a = get_axiom("D1")
    return E, [d1_derivation(Var("x"), Var("y"))], [(a.lhs, a.rhs)]


def _law_d2():
    E = _premises("WIF1", "WIF2")
    ds, cs = [], []
    for n in (1, 2, 3):
        a = get_axiom(f"D2({n})")
        ds.append(d2_derivation(ALPHA, [Var(f"x{i + 1}") for i in range(n)], Var("y")))
        cs.append((a.lhs, a.rhs))
    return E, ds, cs


def _law_w1():
    E = _premises("W1'")
    a = get_axiom("W1")
    d = Chain(a.lhs).then(inst("W1'", x="x", y="0")).done(a.rhs)
    return E, [d], [(a.lhs, a.rhs)]


def _law_wif2():
    E = _premises("WIF2'", "W1")
    a = get_axiom("WIF2")
    # tau.x + tau.(x+y) <= tau.x + (tau.x + y) = tau.x + y
    back = (Chain(a.rhs)
            .then(cong("tau.x + w99", inst("WIF2'", x="x", y="y")))
            .done(a.lhs))
    # tau.x + y = tau.x + tau.(x+x) + y <= tau.x + (tau.x + x) + y <= tau.x + tau.(x+y)
    fwd = (Chain(a.lhs)
           .then(cong("tau.x + w99 + y", inst("WIF2'", x="x", y="x")))
           .then(cong("tau.x + w99", inst("W1", x="x + y")))
           .done(a.rhs))
    return E, [fwd, back], _both(a)


def _f1_prime(alpha: Action) -> Derivation:
    x, y, z = Var("x"), Var("y"), Var("z")
    inner = (Chain(Sum(x, y))
             .then(sum_(inst("W1'", x="x", y="z"), refl(y)))
             .then(cong("tau.x + w99", inst("W1'", x="y + z", y="0")))
             .done(term("tau.x + tau.(y + z)")))
    return (Chain(Prefix(alpha, Sum(x, y)))
            .then(prefix(alpha, inner))
            .then(_wif1(alpha, x, Sum(y, z)))
            .done(Sum(Prefix(alpha, x), Prefix(alpha, Sum(y, z)))))


def _law_f1p():
    E = _premises("W1'", "WIF1")
    axs = [get_axiom("F1'/a"), get_axiom("F1'/tau")]
    return E, [_f1_prime(VIS), _f1_prime(TAU)], [(a.lhs, a.rhs) for a in axs]


def _law_init_f2():
    E = _premises("W1'", "WIF1")
    a = get_axiom("init-tau(F2)")  # two-letter alphabet
    taus = term("tau.x1 + tau.x2")
    d = (Chain(a.lhs)
         .then(inst("W1'", x=taus, y="y"))
         .then(cong("w99 + y", _wif1(TAU, Var("x1"), Var("x2"))))
         .done(a.rhs))
    return E, [d], [(a.lhs, a.rhs)]


def _law_wfe():
    E = _premises("WIF2", "FE2'/tau")
    a = get_axiom("WFE")
    # a.x + tau.(a.y + z) = tau.(a.y + z) + tau.(a.x + a.y + z) = tau.(a.x + a.y + z)
    d = (Chain(a.lhs)
         .then(_wif2(term("@a.y + z"), term("@a.x")))
         .then(inst("FE2'/tau", actions={"b": "@a"}, x="z", y="y", z="x"))
         .done(a.rhs))
    return E, [d], [(a.lhs, a.rhs)]


def _law_fe1t():
    E = _premises("WIF2")
    a = get_axiom("FE1'/tau")
    # from the right: tau.x + tau.(x+y) + tau.(y+z) = tau.x + y + tau.(y+z)
    #   = tau.x + tau.(y+z) + tau.(y+z+y) = tau.x + tau.(y+z)
    d = (Chain(a.rhs)
         .then(cong("w99 + tau.(y + z)", _wif2(Var("x"), Var("y"), "rl")))
         .then(cong("tau.x + w99", _wif2(term("y + z"), Var("y"))))
         .done(a.lhs))
    return E, [reverse(d)], [(a.lhs, a.rhs)]


def _law_fe2t():
    E = _premises("WIF2", "WFE")
    a = get_axiom("FE2'/tau")
    d = (Chain(a.lhs)
         .then(_wif2(term("x + @b.y"), term("@b.z"), "rl"))
         .then(inst("WFE", actions={"a": "@b"}, x="z", y="y", z="x"))
         .done(a.rhs))
    return E, [d], [(a.lhs, a.rhs)]


def _law_fe3():
    E = _premises("FE3'", "WIF1")
    a = get_axiom("FE3")
    zs = "a.z1 + b.z2"
    u, v = term(f"x + {zs}"), term(f"x + y + {zs}")
    d = (Chain(a.lhs)
         .then(_wif1(VIS, u, v, "rl"))
         .then(prefix(VIS, inst("FE3'", x="x", y="y", z1="z1", z2="z2")))
         .then(_wif1(VIS, v, v))
         .done(a.rhs))
    return E, [d], [(a.lhs, a.rhs)]


def _law_cte():
    E = _premises("CTE", "WIF1")
    a, t = get_axiom("CTE'/a"), get_axiom("CTE'/tau")
    d = inst("CTE")
    why = ("not derivable: CTE, WIF1 and WIF2 all preserve weak completed-trace "
           "equality together with impossible futures after the empty trace, "
           "which separates tau.(b.0 + c.0) from tau.b.0 + tau.c.0")
    return E, [d], [(a.lhs, a.rhs)], [(t, why)]


def _ct2_prime(alpha: Action) -> Derivation:
    l = term("@b.w + y")
    r = term("@c.x + z")
    start = Prefix(alpha, term("@b.w + @c.x + y + z"))
    inner = sum_(ax(get_axiom("W1"), "lr", Substitution({"x": l})),
                 ax(get_axiom("W1"), "lr", Substitution({"x": r})))
    return (Chain(start)
            .then(prefix(alpha, inner))
            .then(_wif1(alpha, l, r))
            .done(Sum(Prefix(alpha, l), Prefix(alpha, r))))


def _law_ct2():
    E = _premises("W1", "WIF1")
    axs = [get_axiom("CT2'/a"), get_axiom("CT2'/tau")]
    return E, [_ct2_prime(VIS), _ct2_prime(TAU)], [(a.lhs, a.rhs) for a in axs]


def _if1_prime(alpha: Action) -> Derivation:
    x, y = Var("x"), Var("y")
    inner = sum_(inst("W1", x="x"), inst("W1", x="y"))
    return (Chain(Prefix(alpha, Sum(x, y)))
            .then(prefix(alpha, inner))
            .then(_wif1(alpha, x, y))
            .done(Sum(Prefix(alpha, x), Prefix(alpha, y))))


def _law_if1():
    E = _premises("W1", "WIF1")
    axs = [get_axiom("IF1'/a"), get_axiom("IF1'/tau")]
    return E, [_if1_prime(VIS), _if1_prime(TAU)], [(a.lhs, a.rhs) for a in axs]


def _if2_prime(alpha: Action) -> Derivation:
    x, y = Var("x"), Var("y")
    yz = term("y + z")
    a_ = get_axiom("IF2'/tau" if alpha.is_tau else "IF2'/a")
    t = lambda s: term(s)  # noqa: E731
    return (Chain(a_.lhs)
            .then(_wif1(alpha, x, yz, "rl"))
            # alpha.(tau.x + tau.(y+z)) = alpha.(tau.x + tau.(y+z) + tau.(y+z+y)) -> + y
            .then(prefix(alpha, cong("tau.x + w99", _wif2(yz, y, "rl"))))
            # tau.x + y -> tau.x + tau.(x+y)
            .then(prefix(alpha, cong("w99 + tau.(y + z)", _wif2(x, y))))
            # tau.x + tau.(y+z) -> tau.(tau.x + tau.(y+z))
            .then(prefix(alpha, cong("tau.(x + y) + w99", _wif1(TAU, x, yz, "rl"))))
            .then(_wif1(alpha, t("x + y"), t("tau.x + tau.(y + z)")))
            .then(cong(Sum(Prefix(alpha, t("x + y")), Var("w99")), _wif1(alpha, x, yz)))
            .done(a_.rhs))


def _law_if2():
    E = _premises("WIF1", "WIF2")
    axs = [get_axiom("IF2'/a"), get_axiom("IF2'/tau")]
    return E, [_if2_prime(VIS), _if2_prime(TAU)], [(a.lhs, a.rhs) for a in axs]


_LAWS = {
    "D1": _law_d1,
    "D2": _law_d2,
    "W1-from-W1'": _law_w1,
    "WIF2-from-WIF2'+W1": _law_wif2,
    "F1'-from-W1'+WIF1": _law_f1p,
    "initTauF2-from-W1'+WIF1": _law_init_f2,
    "WFE-from-WIF2+FE2'": _law_wfe,
    "FE1'tau-from-WIF2": _law_fe1t,
    "FE2'tau-from-WIF2+WFE": _law_fe2t,
    "FE3-from-FE3'+WIF1": _law_fe3,
    "CTE'-from-CTE+WIF1": _law_cte,
    "CT2'-from-W1+WIF1": _law_ct2,
    "IF1'-from-W1+WIF1": _law_if1,
    "IF2'-from-WIF1+WIF2": _law_if2,
}

LAW_KEYS = tuple(_LAWS)


def _norm_key(k: str) -> str:
    return k.replace("′", "'").replace("τ", "tau").replace(" ", "").lower()


def derived_law(key: str) -> DerivedLaw:
    nk = _norm_key(key)
    if nk.startswith("d2(") and nk.endswith(")"):
        n = int(nk[3:-1])
        a = get_axiom(f"D2({n})")
        d = d2_derivation(ALPHA, [Var(f"x{i + 1}") for i in range(n)], Var("y"))
        return DerivedLaw(f"D2({n})", _premises("WIF1", "WIF2"), [d], [(a.lhs, a.rhs)])
    for k, make in _LAWS.items():
        if _norm_key(k) == nk:
            E, ds, cs, *rest = make()
            return DerivedLaw(k, E, ds, cs, rest[0] if rest else [])
    raise KeyError(f"unknown derived law {key!r}")


# ---------------------------------------------------------------- tau elimination

_WEAK = None


def weak_core() -> Axiomatization:
    global _WEAK
    if _WEAK is None:
        _WEAK = _premises("WIF1", "WIF2")
    return _WEAK


def _tau_initial(t: Term) -> bool:
    return any(isinstance(s, Prefix) and s.action.is_tau for s in summands(t))


def _sum_cong(ds: list[Derivation]) -> Derivation:
    if not ds:
        return refl(NIL)
    acc = ds[-1]
    for d in reversed(ds[:-1]):
        acc = sum_(d, acc)
    return acc


def _flatten(t: Term) -> tuple[Derivation, list[Term], list[Term]]:
    """t ~ sum tau.t_k + rest with no t_k tau-initial and no tau summand in rest."""
    parts = summands(t)
    ch = Chain(t).to(sum_of(parts))
    while True:
        idx = next((i for i, s in enumerate(parts)
                    if isinstance(s, Prefix) and s.action.is_tau and _tau_initial(s.body)), None)
        if idx is None:
            break
        body = summands(parts[idx].body)
        j = next(i for i, s in enumerate(body) if isinstance(s, Prefix) and s.action.is_tau)
        b1 = body[j].body
        brest = sum_of(body[:j] + body[j + 1:])
        others = parts[:idx] + parts[idx + 1:]
        ch.then(cong(sum_of(others + [Var("w99")]), d1_derivation(b1, brest)))
        parts = others + [Prefix(TAU, b1)] + summands(brest)
        ch.to(sum_of(parts))
    taus = [s.body for s in parts if isinstance(s, Prefix) and s.action.is_tau]
    rest = [s for s in parts if not (isinstance(s, Prefix) and s.action.is_tau)]
    return ch.done(sum_of([Prefix(TAU, b) for b in taus] + rest)), taus, rest


def _nf1(t: Term) -> Derivation:
    parts = summands(t)
    ds = [_nf1_summand(s) for s in parts]
    return Chain(t).to(sum_of(parts)).then(_sum_cong(ds)).done()


def _nf1_summand(s: Term) -> Derivation:
    if isinstance(s, Var):
        return refl(s)
    a, b = s.action, s.body
    if a.is_tau:
        raise DerivationError("internal: tau summand in a stable position")
    if not _tau_initial(b):
        return prefix(a, _nf1(b))
    dflat, taus, rest = _flatten(b)
    r = sum_of(rest)
    ch = Chain(s).then(prefix(a, dflat))
    ch.then(d2_derivation(a, taus, r))
    ds = [prefix(a, _nf1(x)) for x in taus] + [prefix(a, _nf1(sum_of(taus + [r])))]
    ch.then(_sum_cong(ds))
    return ch.done()


def _nf2(t: Term) -> Derivation:
    dflat, taus, rest = _flatten(t)
    ch = Chain(t).then(dflat)
    if rest:
        i0 = min(range(len(taus)), key=lambda i: summand_key(ac_canonical(Prefix(TAU, taus[i]))))
        t0 = taus[i0]
        others = [Prefix(TAU, b) for i, b in enumerate(taus) if i != i0]
        y = sum_of(rest)
        ch.then(cong(sum_of(others + [Var("w99")]), _wif2(t0, y)))
        bodies = [b for i, b in enumerate(taus) if i != i0] + [t0, Sum(t0, y)]
    else:
        bodies = list(taus)
    ch.to(sum_of([Prefix(TAU, b) for b in bodies]))
    ch.then(_sum_cong([prefix(TAU, _nf1(b)) for b in bodies]))
    return ch.done()


def eliminate_tau(t: "Term | str") -> tuple[Term, Derivation]:
    """Normal form without inner taus, with a derivation from A1-4 + WIF1-2.

    A tau-initial input ends up as a sum of tau-prefixed tau-free terms.
    """
    t = term(t)
    if not has_tau(t):
        return t, refl(t)
    d = _nf2(t) if _tau_initial(t) else _nf1(t)
    normal = ac_canonical(d.rhs)
    return normal, Chain(t).then(d).done(normal)


def is_tau_normal(t: Term) -> bool:
    ss = summands(t)
    if any(isinstance(s, Prefix) and s.action.is_tau for s in ss):
        return all(isinstance(s, Prefix) and s.action.is_tau and not has_tau(s.body) for s in ss)
    return not has_tau(t)


# ---------------------------------------------------------------- init-tau lifting


def lift_init_tau_derivation(E: Axiomatization, d: Derivation) -> Derivation:
    """From E |- t ~ u build a derivation of init-tau(t) ~ init-tau(u).

    Axiom leaves become instances of init-tau axioms with the substitution
    rewritten on initially occurring variables. Prefix congruence
    a.t ~ a.u becomes tau.t ~ tau.u and keeps the inner derivation, so the
    result checks against E together with init-tau(E).
    """
    init_tau_axiomatization(E)  # rejects unsafe or tau-containing axiom sets
    memo: dict[int, Derivation] = {}

    def go(n: Derivation) -> Derivation:
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k == "REFL":
            r = refl(init_tau_term(n.lhs))
        elif k == "AX":
            a = E.get(n.axiom)
            try:
                ia = init_tau_axiom(a)
            except AxiomError as e:
                raise DerivationError(str(e)) from None
            s = n.subst or Substitution()
            initial = initial_variables(a.lhs) | initial_variables(a.rhs)
            tm = dict(s.terms)
            for v in initial:
                tm[v] = init_tau_term(s.terms.get(v, Var(v)))
            r = ax(ia, n.orient, Substitution(tm, s.actions))
            if r.lhs is not init_tau_term(n.lhs) or r.rhs is not init_tau_term(n.rhs):
                raise DerivationError(f"lifting {a.name} does not commute with init-tau")
        elif k == "TRANS":
            r = trans(go(n.children[0]), go(n.children[1]))
        elif k == "SUM":
            r = sum_(go(n.children[0]), go(n.children[1]))
        elif k == "PREFIX":
            if n.action.is_tau:
                raise DerivationError("init-tau lifting expects a tau-free derivation")
            r = prefix(TAU, n.children[0])
        else:
            r = sym(go(n.children[0]))
        memo[id(n)] = r
        return r

    return go(d)


__all__ = [
    "DerivedLaw", "LAW_KEYS", "d1_derivation", "d2_derivation", "derived_law",
    "eliminate_tau", "is_tau_normal", "lift_init_tau_derivation", "lifted_axioms",
    "weak_core", "inst",
]

"""Inverted substitutions over an unbounded alphabet.

Every variable y of a goal t <= u gets a fresh action a_y; the closed
substitution rho sends y to a_y.0, and the map R turns a closed term back
into an open one by collapsing each a_y-prefixed subterm to y.  A checker
tests the three conditions under which closed derivability lifts to open
derivability, and ``lift_derivation`` replays that lifting on concrete
derivations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .axioms import CORE_NAMES, Axiom, Axiomatization
from .proofs.core import (Chain, Derivation, DerivationError, ax, bridge, check, prefix,
                          refl, sum_, sym, trans)
from .proofs.search import search
from .syntax import (NIL, Action, Alphabet, Prefix, Substitution, Sum, Term, Var,
                     ac_canonical, action_names, has_meta, is_closed, name, render,
                     substitute, term, variables)
from .generate import random_term


class OmegaError(ValueError):
    pass


@dataclass(frozen=True)
class InvertedMapping:
    fresh: dict  # variable -> fresh action name

    @property
    def inverse(self) -> dict[str, str]:
        return {a: y for y, a in self.fresh.items()}

    @property
    def rho(self) -> Substitution:
        return Substitution({y: Prefix(name(a), NIL) for y, a in self.fresh.items()})

    def is_fresh(self, a: Action) -> bool:
        return a.kind == "name" and a.name in self.inverse

    def R(self, t: "Term | str") -> Term:
        t = term(t)
        if not is_closed(t):
            raise OmegaError(f"R is defined on closed terms: {render(t)}")
        return self._R(t)

    def _R(self, t: Term) -> Term:
        if t is NIL:
            return NIL
        if isinstance(t, Prefix):
            y = self.inverse.get(t.action.name) if t.action.kind == "name" else None
            return Var(y) if y is not None else Prefix(t.action, self._R(t.body))
        return Sum(self._R(t.left), self._R(t.right))

    def apply_rho(self, t: Term) -> Term:
        return substitute(t, self.rho)


def groote_mapping(t: "Term | str", u: "Term | str", E: Axiomatization | None = None,
                   alphabet: Alphabet | None = None) -> InvertedMapping:
    """Mint one fresh action per variable of t + u, avoiding every action
    name in t, u and E."""
    t, u = term(t), term(u)
    alphabet = alphabet or (E.alphabet if E is not None else None) or Alphabet.unbounded()
    if alphabet.finite:
        raise OmegaError("inverted substitutions need an unbounded alphabet")
    taken = set(action_names(t)) | set(action_names(u))
    if E is not None:
        for a in E:
            taken |= action_names(a.lhs) | action_names(a.rhs)
    fresh = {}
    for y in sorted(variables(t) | variables(u)):
        a = alphabet.fresh(taken, hint=f"a_{y}")
        taken.add(a)
        fresh[y] = a
    return InvertedMapping(fresh)


# ---------------------------------------------------------------- requirements


@dataclass
class OmegaReport:
    mapping: InvertedMapping
    requirement1: list[str] = field(default_factory=list)
    requirement2: list[str] = field(default_factory=list)
    requirement3: list[str] = field(default_factory=list)
    checked: dict = field(default_factory=lambda: {"1": 0, "2": 0, "3": 0})

    @property
    def ok(self) -> bool:
        return not (self.requirement1 or self.requirement2 or self.requirement3)

    def summary(self) -> str:
        lines = [f"fresh: {', '.join(f'{y} -> {a}' for y, a in sorted(self.mapping.fresh.items()))}"]
        for k, fails in (("1", self.requirement1), ("2", self.requirement2),
                         ("3", self.requirement3)):
            status = "ok" if not fails else f"{len(fails)} failure(s)"
            lines.append(f"requirement {k}: {self.checked[k]} checked, {status}")
            lines += [f"  {f}" for f in fails[:20]]
        return "\n".join(lines)


def _sample_actions(E: Axiomatization, t: Term, u: Term, mp: InvertedMapping) -> list[Action]:
    names = set(action_names(t)) | set(action_names(u))
    for a in E:
        names |= action_names(a.lhs) | action_names(a.rhs)
    names = names or {"a", "b"}
    return sorted({name(n) for n in names} | {name(a) for a in mp.fresh.values()})


def random_samples(E: Axiomatization, t: "Term | str", u: "Term | str", mp: InvertedMapping,
                   count: int, seed: int = 0, depth: int = 3) -> list[Substitution]:
    """Closed substitutions over the goal's actions plus the fresh ones."""
    t, u = term(t), term(u)
    rng = random.Random(seed)
    acts = _sample_actions(E, t, u, mp)
    vs = sorted({v for a in E for v in variables(a.lhs) | variables(a.rhs)})
    metas = sorted({x.name for a in E for x in _metas(a)})
    out = []
    for _ in range(count):
        tm = {v: random_term(rng, acts, rng.randint(0, depth), max_summands=2) for v in vs}
        am = {m: rng.choice(acts) for m in metas}
        out.append(Substitution(tm, am))
    return out


def _metas(a: Axiom) -> set[Action]:
    from .syntax import actions
    return {x for x in actions(a.lhs) | actions(a.rhs) if x.is_meta}


def _restrict(s: Substitution, a: Axiom) -> Substitution:
    vs = variables(a.lhs) | variables(a.rhs)
    ms = {x.name for x in _metas(a)}
    return Substitution({k: v for k, v in s.terms.items() if k in vs},
                        {k: v for k, v in s.actions.items() if k in ms})


def discharge(E: Axiomatization, mp: InvertedMapping, axm: Axiom, orient: str,
              s: Substitution, budget: int = 2) -> Derivation | None:
    """A derivation from E of R(s(lhs)) <= R(s(rhs)) for one closed instance.

    Three scripts, tried in order: when no metavariable is sent to a fresh
    action the image is an instance of the axiom itself (if E has it); when
    the two images agree modulo A1-4 a bridge suffices; otherwise a small
    bounded search."""
    d0 = ax(axm, orient, s)
    lhs, rhs = mp.R(d0.lhs), mp.R(d0.rhs)
    own = E.get(axm.name) if axm.name in E else None
    if own is not None and own.lhs is axm.lhs and own.rhs is axm.rhs \
            and not any(mp.is_fresh(a) for a in s.actions.values()):
        s2 = Substitution({k: mp.R(v) for k, v in s.terms.items()}, dict(s.actions))
        d = ax(own, orient, s2)
        if d.lhs is lhs and d.rhs is rhs:
            return d
    if ac_canonical(lhs) is ac_canonical(rhs):
        return bridge(lhs, rhs)
    rep = search(E, lhs, rhs, budget=budget, max_states=5000)
    return rep.derivation


def check_omega_requirements(E: Axiomatization, t: "Term | str", u: "Term | str",
                             samples: "list[Substitution] | int" = 100, seed: int = 0,
                             source: Axiomatization | None = None,
                             mapping: InvertedMapping | None = None,
                             budget: int = 2) -> OmegaReport:
    """Check the three lifting conditions for the goal t <= u.

    Condition 2 is tested on the axioms of ``source`` (E by default), each
    under every sampled closed substitution; derivations must come from E."""
    t, u = term(t), term(u)
    if has_meta(t) or has_meta(u):
        raise OmegaError("the goal must be a concrete (metavariable-free) inequation")
    source = source or E
    mp = mapping or groote_mapping(t, u, source)
    if isinstance(samples, int):
        samples = random_samples(source, t, u, mp, samples, seed)
    rep = OmegaReport(mp)

    for side in (t, u):
        rep.checked["1"] += 1
        back = mp.R(mp.apply_rho(side))
        if back is not side:
            rep.requirement1.append(f"R(rho({render(side)})) = {render(back)}")

    for axm in source:
        for s in samples:
            s1 = _restrict(s, axm)
            orients = ("lr", "rl") if axm.equation and not E.equivalence else ("lr",)
            for orient in orients:
                rep.checked["2"] += 1
                d = discharge(E, mp, axm, orient, s1, budget)
                why = None
                if d is None:
                    why = "no derivation found"
                else:
                    try:
                        check(E, d)
                    except DerivationError as exc:
                        why = f"derivation rejected: {exc}"
                if why:
                    rep.requirement2.append(f"{axm.name} {orient} under {s1.render()}: {why}")

    rng = random.Random(seed + 1)
    acts = _sample_actions(source, t, u, mp)
    for i, s in enumerate(samples):
        ops = [random_term(rng, acts, rng.randint(0, 2), max_summands=2) for _ in range(4)]
        p1, q1, p2, q2 = ops
        rep.checked["3"] += 1
        why = _congruence_case(E, mp, "+", (p1, p2), (q1, q2))
        if why:
            rep.requirement3.append(why)
        a = acts[i % len(acts)]
        rep.checked["3"] += 1
        why = _congruence_case(E, mp, a, (p1,), (q1,))
        if why:
            rep.requirement3.append(why)
    return rep


def _congruence_case(E: Axiomatization, mp: InvertedMapping, op, ps, qs) -> str | None:
    hyps = [Axiom(f"H{i + 1}", mp.R(p), mp.R(q), False, primitive=False)
            for i, (p, q) in enumerate(zip(ps, qs))]
    EH = E.extend(hyps, name=E.name + "+hyp", mode="preorder")
    hd = [ax(h) for h in hyps]
    if op == "+":
        lhs, rhs = mp.R(Sum(*ps)), mp.R(Sum(*qs))
        d = sum_(hd[0], hd[1])
    else:
        lhs, rhs = mp.R(Prefix(op, ps[0])), mp.R(Prefix(op, qs[0]))
        d = refl(lhs) if mp.is_fresh(op) else prefix(op, hd[0])
    try:
        d = Chain(lhs).then(d).done(rhs)
        check(EH, d)
    except DerivationError as exc:
        opname = "+" if op == "+" else str(op)
        return f"{opname} on {', '.join(render(p) for p in ps)}: {exc}"
    return None


# ---------------------------------------------------------------- lifting


def lift_derivation(E: Axiomatization, mp: InvertedMapping, d: Derivation,
                    budget: int = 2) -> Derivation:
    """Turn a derivation of p <= q between closed terms into one of R(p) <= R(q)."""
    memo: dict[int, Derivation] = {}

    def go(n: Derivation) -> Derivation:
        got = memo.get(id(n))
        if got is not None:
            return got
        if n.kind == "REFL":
            out = refl(mp.R(n.lhs))
        elif n.kind == "AX":
            axm = E.get(n.axiom)
            out = discharge(E, mp, axm, n.orient, n.subst or Substitution(), budget)
            if out is None:
                raise OmegaError(f"cannot lift the {n.axiom} step {render(n.lhs)} ~ {render(n.rhs)}")
        elif n.kind == "TRANS":
            out = trans(go(n.children[0]), go(n.children[1]))
        elif n.kind == "SUM":
            out = sum_(go(n.children[0]), go(n.children[1]))
        elif n.kind == "PREFIX":
            out = refl(mp.R(n.lhs)) if mp.is_fresh(n.action) else prefix(n.action, go(n.children[0]))
        elif n.kind == "SYM":
            out = sym(go(n.children[0]))
        else:
            raise OmegaError(f"unknown derivation node {n.kind}")
        memo[id(n)] = out
        return out

    return go(d)


def lift_open(E: Axiomatization, t: "Term | str", u: "Term | str", budget: int = 4,
              mapping: InvertedMapping | None = None) -> Derivation | None:
    """Derive t <= u by proving rho(t) <= rho(u) and lifting through R."""
    t, u = term(t), term(u)
    mp = mapping or groote_mapping(t, u, E)
    closed = search(E, mp.apply_rho(t), mp.apply_rho(u), budget=budget).derivation
    if closed is None:
        return None
    lifted = lift_derivation(E, mp, closed)
    d = Chain(t).then(lifted).done(u)
    check(E, d)
    return d


__all__ = ["OmegaError", "InvertedMapping", "groote_mapping", "OmegaReport", "random_samples",
           "discharge", "check_omega_requirements", "lift_derivation", "lift_open"]

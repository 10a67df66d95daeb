"""Constructive ground-completeness: saturation, the impossible-futures
prover and the concrete-to-weak proof pipeline."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

from .axioms import Axiomatization, AxiomError, catalog, transform_weak
from .proofs.core import (Chain, Derivation, DerivationError, ax, bridge, check,
                          cong, prefix, refl, reverse, sum_)
from .proofs.laws import d1_derivation, eliminate_tau, lift_init_tau_derivation
from .semantics import (RelationId, check_closed, residuals, show_trace,
                        traces, transitions)
from .syntax import (NIL, TAU, Action, Alphabet, Prefix, Substitution, Sum, Term,
                     Var, ac_canonical, action_key, body_key, canonical_sum,
                     has_tau, is_closed, render, sum_of, summands, term)

HOLE = Var("w99")


class NotRelated(ValueError):
    """The goal does not hold semantically; ``witness`` explains why."""

    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


# ---------------------------------------------------------------- saturation


@lru_cache(maxsize=None)
def _saturated(q: Term) -> Term:
    q = ac_canonical(q)
    parts = summands(q)
    extra = []
    for a in _initial_actions(q):
        bodies = [s.body for s in parts if isinstance(s, Prefix) and s.action == a]
        extra.append(Prefix(a, _saturated(canonical_sum(bodies))))
    return canonical_sum(parts + extra)


def saturated_term(q: "Term | str") -> Term:
    """q plus, for each initial a, a.(saturation of the merged a-bodies)."""
    q = term(q)
    if not is_closed(q) or has_tau(q):
        raise ValueError(f"saturation needs a closed tau-free term: {render(q)}")
    return _saturated(ac_canonical(q))


def saturate(q: "Term | str", E: Axiomatization | None = None) -> tuple[Term, Derivation]:
    """The saturation of q together with a proof of q == saturation."""
    qbar = saturated_term(q)
    return qbar, saturation_derivation(q, E)


def _initial_actions(q: Term) -> list[Action]:
    return sorted({s.action for s in summands(q) if isinstance(s, Prefix)}, key=action_key)


def residual_saturation(q: Term, trace) -> Term:
    if isinstance(trace, str):
        trace = trace.replace(".", " ").split()
    trace = tuple(trace)
    q = term(q)
    rs = residuals(ac_canonical(q), trace, "strong")
    if not rs:
        raise ValueError(f"{show_trace(trace)} is not a trace of {render(q)}")
    return saturated_term(canonical_sum(rs))


def _bodies(t: Term, a: Action) -> list[Term]:
    return [s.body for s in summands(t) if isinstance(s, Prefix) and s.action == a]


class _IF:
    """Derivation builders over a fixed axiomatization containing IF1-2."""

    def __init__(self, E: Axiomatization):
        self.E = E
        self.if1 = E.get("IF1")
        self.if2 = E.get("IF2")
        self._sat: dict[Term, Derivation] = {}
        self._proofs: dict[tuple[Term, Term], Derivation] = {}

    def _if2(self, a: Action, x: Term, y: Term, z: Term, orient: str) -> Derivation:
        return ax(self.if2, orient, Substitution({"x": x, "y": y, "z": z}, {"a": a}))

    def add_merged(self, cur: Term, a: Action, bodies: list[Term]) -> Derivation:
        """cur ~ cur + a.(sum of bodies), given every a.b (b in bodies) is a summand of cur."""
        ch = Chain(cur)
        acc = bodies[0]
        for k in range(1, len(bodies)):
            b = bodies[k]
            ch.then(cong(Sum(cur, HOLE), self._if2(a, acc, b, NIL, "lr")))
            if k >= 2:
                prev, before = bodies[k - 1], sum_of(bodies[:k - 1])
                ch.then(cong(Sum(cur, HOLE),
                             self._if2(a, prev, before, Sum(prev, b), "rl")))
            acc = Sum(acc, b)
        return ch.done(Sum(cur, Prefix(a, acc)))

    def saturation(self, q: Term) -> Derivation:
        """q ~ saturate(q) using A1-4 and IF2 only (q canonical)."""
        d = self._sat.get(q)
        if d is not None:
            return d
        ch = Chain(q)
        for a in _initial_actions(q):
            bodies = _bodies(q, a)
            cur = ch.cur
            ch.then(self.add_merged(cur, a, bodies))
            merged = sum_of(bodies)
            inner = Chain(merged).then(self.saturation(ac_canonical(merged))).done()
            ch.then(cong(Sum(cur, HOLE), prefix(a, inner)))
        d = ch.done(_saturated(q))
        self._sat[q] = d
        return d

    def split(self, a: Action, bodies: list[Term]) -> Derivation:
        """a.(b1 + ... + bn) <= a.b1 + ... + a.bn by IF1."""
        if len(bodies) == 1:
            return refl(Prefix(a, bodies[0]))
        rest = sum_of(bodies[1:])
        step = ax(self.if1, "lr", Substitution({"x": bodies[0], "y": rest}, {"a": a}))
        tail = self.split(a, bodies[1:])
        return Chain(step.lhs).then(step).then(sum_(refl(Prefix(a, bodies[0])), tail)).done()

    # ------------------------------------------------------------ the proof

    def prove(self, p: Term, q: Term) -> Derivation:
        key = (p, q)
        d = self._proofs.get(key)
        if d is None:
            d = self._prove(p, q)
            self._proofs[key] = d
        return d

    def _prove(self, p: Term, q: Term) -> Derivation:
        if p is q:
            return refl(p)
        if p is NIL:
            raise NotRelated(f"0 is only below 0, not {render(q)}")
        qbar = _saturated(q)
        ch = Chain(p)
        ch.then(self.step_join(p, q))
        ch.then(cong(Sum(p, HOLE), self.saturation(q)))
        d2, heads = self.step_paths(p, q)
        ch.then(sum_(d2, refl(qbar)))
        for i, (a1, psi1, path) in enumerate(heads):
            others = [Prefix(b, s) for b, s, _ in heads[i + 1:]]
            ch.then(cong(sum_of(others + [HOLE]), self.drop_path(q, path, 1)))
        ch.then(reverse(self.saturation(q)))
        return ch.done(q)

    def step_join(self, p: Term, q: Term) -> Derivation:
        """p <= p + q."""
        ch = Chain(p)
        merged, steps = [], []
        for a in _initial_actions(p):
            pb, qb = _bodies(p, a), _bodies(q, a)
            if not qb:
                raise NotRelated(f"{a} is initial in {render(p)} but not in {render(q)}")
            ch.then(self.add_merged(ch.cur, a, pb))
            P, Q = canonical_sum(pb), canonical_sum(qb)
            sub = Chain(sum_of(pb)).then(self.prove(P, Q)).done(sum_of(qb))
            merged.append(Prefix(a, sum_of(pb)))
            steps.append(Chain(merged[-1]).then(prefix(a, sub)).then(self.split(a, qb)).done())
        ch.to(Sum(p, sum_of(merged)))
        ch.then(sum_(refl(p), _sum_cong(steps)))
        return ch.done(Sum(p, q))

    def psis(self, q: Term, path: tuple) -> list[Term]:
        """psi_1..psi_d for a completed path ((a1,p1),...,(ad,pd)) of p."""
        d = len(path)
        psi: list[Term] = [NIL] * (d + 1)
        for l in range(d - 1, 0, -1):
            trace = tuple(a.name for a, _ in path[:l])
            target = traces(path[l - 1][1])
            cands = [r for r in residuals(q, trace, "strong") if traces(r) <= target]
            if not cands:
                raise NotRelated(f"no residual of {render(q)} after {show_trace(trace)} "
                                 f"has traces within those of {render(path[l - 1][1])}")
            qp = min(cands, key=body_key)
            psi[l] = canonical_sum([qp, Prefix(path[l][0], psi[l + 1])])
            if not traces(psi[l]) <= target:
                raise AssertionError(f"psi table invariant broken at level {l}")
        return psi[1:d + 1]

    def step_paths(self, p: Term, q: Term) -> tuple[Derivation, list]:
        """p <= sum over completed paths of a1.psi_1, plus the path heads."""
        ds = []
        heads: dict[Term, tuple] = {}
        for s in summands(p):
            a, body = s.action, s.body
            psis = []
            for tail in completed_paths(body):
                path = ((a, body),) + tail
                psi1 = self.psis(q, path)[0]
                psis.append(psi1)
                heads.setdefault(Prefix(a, psi1), (a, psi1, path))
            target = canonical_sum(psis)
            sub = self.prove(body, target)
            parts = sorted(set(psis), key=body_key)
            inner = Chain(body).then(sub).done(sum_of(parts))
            ds.append(Chain(s).then(prefix(a, inner)).then(self.split(a, parts)).done())
        acc = _sum_cong(ds)
        ordered = [heads[k] for k in sorted(heads, key=lambda t: body_key(t))]
        return Chain(p).then(acc).done(sum_of([Prefix(a, s) for a, s, _ in ordered])), ordered

    def drop_path(self, q: Term, path: tuple, l: int) -> Derivation:
        """a_l.psi_l + q_(a1..a_{l-1}) ~ q_(a1..a_{l-1})."""
        d = len(path)
        psis = self.psis(q, path)
        prev = residual_saturation(q, [a.name for a, _ in path[:l - 1]])
        a = path[l - 1][0]
        start = Sum(Prefix(a, psis[l - 1]), prev)
        if l == d:
            return bridge(start, prev)
        trace = tuple(x.name for x, _ in path[:l])
        target = traces(path[l - 1][1])
        qp = min((r for r in residuals(q, trace, "strong") if traces(r) <= target), key=body_key)
        X = Prefix(path[l][0], psis[l])
        Z = residual_saturation(q, trace)
        nxt = self.drop_path(q, path, l + 1)  # X + Z ~ Z
        ch = Chain(start)
        ch.to(sum_of([Prefix(a, Sum(qp, X)), prev, Prefix(a, qp), Prefix(a, Z)]))
        ch.then(cong(sum_of([Prefix(a, Sum(qp, X)), prev, Prefix(a, qp), Prefix(a, HOLE)]),
                     reverse(nxt)))
        ch.then(cong(Sum(prev, HOLE), self._if2(a, qp, X, Z, "rl")))
        ch.then(cong(sum_of([prev, Prefix(a, qp), Prefix(a, HOLE)]), nxt))
        return ch.done(prev)


def _sum_cong(ds: list[Derivation]) -> Derivation:
    acc = ds[-1]
    for d in reversed(ds[:-1]):
        acc = sum_(d, acc)
    return acc


def completed_paths(t: Term) -> list[tuple]:
    trs = sorted(transitions(t), key=lambda at: (action_key(at[0]), body_key(at[1])))
    if not trs:
        return [()]
    out = []
    for a, t2 in trs:
        for rest in completed_paths(t2):
            out.append(((a, t2),) + rest)
    return out


def distinguishing_future(p: Term, q: Term) -> tuple[tuple, frozenset] | None:
    """A pair (trace, B) with p able to avoid B after the trace while q cannot."""
    from .semantics import residual_map
    rp, rq = residual_map(p, False), residual_map(q, False)
    for tr in sorted(rp, key=lambda t: (len(t), t)):
        qs = rq.get(tr)
        if not qs:
            return tr, frozenset()
        for pr in sorted(rp[tr], key=body_key):
            tp = traces(pr)
            if not any(traces(r) <= tp for r in qs):
                B = frozenset().union(*(traces(r) for r in qs)) - tp
                return tr, B
    return None


def prove_if_ground(p: "Term | str", q: "Term | str",
                    E: Axiomatization | None = None) -> Derivation:
    """Derivation of p <= q from A1-4 + IF1-2 for closed tau-free p, q with p below q
    in the impossible-futures preorder."""
    p, q = term(p), term(q)
    for t in (p, q):
        if not is_closed(t) or has_tau(t):
            raise ValueError(f"prove_if_ground expects closed tau-free terms: {render(t)}")
    if not check_closed("if-pre", p, q):
        w = distinguishing_future(p, q)
        tr, B = w
        if B:
            why = (f"after {show_trace(tr)} the left side can refuse "
                   f"{{{', '.join(sorted(show_trace(b) for b in B))}}} and the right side cannot")
        else:
            why = f"{show_trace(tr)} is a trace of the left side only"
        raise NotRelated(f"{render(p)} is not below {render(q)}: {why}", w)
    E = E or catalog("IF-gc")
    d = _IF(E).prove(ac_canonical(p), ac_canonical(q))
    return Chain(p).then(d).done(q)


def saturation_derivation(q: "Term | str", E: Axiomatization | None = None) -> Derivation:
    q = term(q)
    b = _IF(E or catalog("IF-gc"))
    return Chain(q).then(b.saturation(ac_canonical(q))).done(saturated_term(q))


# ---------------------------------------------------------------- weak pipeline

ConcreteProver = Callable[[Term, Term], Derivation]


def prove_weak_from_concrete(E: Axiomatization, prover: ConcreteProver, p: "Term | str",
                             q: "Term | str", rel: RelationId | str,
                             alphabet: Alphabet | None = None) -> Derivation:
    """Derivation of p <= q from the weak transformation of E, assembled from
    tau elimination, the concrete prover and init-tau lifting."""
    p, q = term(p), term(q)
    rel = RelationId.parse(rel) if isinstance(rel, str) else rel
    if rel.equivalence:
        raise ValueError("only weak preorders are supported by this pipeline")
    if not (is_closed(p) and is_closed(q)):
        raise ValueError("closed terms expected")
    if not check_closed(rel, p, q):
        raise NotRelated(f"{render(p)} is not below {render(q)} for {rel}")
    W = transform_weak(E, rel)
    letter = (alphabet or E.alphabet or Alphabet.unbounded()).least()
    ptau, qtau = _tau_init(p), _tau_init(q)

    def both_tau(P: Term, Q: Term) -> Derivation:
        np_, dp = eliminate_tau(P)
        nq_, dq = eliminate_tau(Q)
        cp = sum_of([Prefix(letter, s.body) for s in summands(np_)])
        cq = sum_of([Prefix(letter, s.body) for s in summands(nq_)])
        dc = prover(cp, cq)
        lifted = lift_init_tau_derivation(E, dc)
        return Chain(P).then(dp).then(lifted).then(reverse(dq)).done(Q)

    def tau_wrap(t: Term) -> Derivation:
        """tau.t ~ t for tau-initial t, via tau elimination and D1."""
        nt, dt = eliminate_tau(t)
        ss = summands(nt)
        head, rest = ss[0].body, sum_of(ss[1:])
        return (Chain(Prefix(TAU, t)).then(prefix(TAU, dt))
                .then(d1_derivation(head, rest)).then(reverse(dt)).done(t))

    if not ptau and not qtau:
        np_, dp = eliminate_tau(p)
        nq_, dq = eliminate_tau(q)
        d = Chain(p).then(dp).then(prover(np_, nq_)).then(reverse(dq)).done(q)
    elif ptau and qtau:
        d = both_tau(p, q)
    elif not ptau:
        if "W1" not in W:
            raise AxiomError(f"case p stable, q unstable needs W1, absent for {rel}")
        w1 = ax(W.get("W1"), "lr", Substitution({"x": p}))
        d = (Chain(p).then(w1).then(both_tau(Prefix(TAU, p), Prefix(TAU, q)))
             .then(tau_wrap(q)).done(q))
    else:
        if "W2" not in W:
            raise AxiomError(f"case p unstable, q stable needs W2, absent for {rel}")
        w2 = ax(W.get("W2"), "lr", Substitution({"x": q}))
        d = (Chain(p).then(reverse(tau_wrap(p))).then(both_tau(Prefix(TAU, p), Prefix(TAU, q)))
             .then(w2).done(q))
    check(W, d)
    return d


def _tau_init(t: Term) -> bool:
    return any(isinstance(s, Prefix) and s.action.is_tau for s in summands(t))


__all__ = ["NotRelated", "saturate", "saturated_term", "residual_saturation", "prove_if_ground",
           "saturation_derivation", "prove_weak_from_concrete", "completed_paths",
           "distinguishing_future"]

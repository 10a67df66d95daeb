"""Bounded bidirectional search for derivations.

States are AC-canonical terms, so A1-4 never costs a step; every edge is
a single application of a non-core axiom at some sum-level position,
matched modulo associativity, commutativity and idempotence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from ..axioms import CORE_NAMES, Axiom, Axiomatization
from ..semantics import RelationId, check_closed
from ..syntax import (NIL, Action, Prefix, Substitution, Sum, Term, Var,
                      ac_canonical, actions, canonical_sum, is_closed, render,
                      substitute, summands, term, variables)
from .core import Chain, Derivation, ax, prefix, refl, sum_


@dataclass(frozen=True)
class Rule:
    axiom: Axiom
    orient: str

    @property
    def source(self) -> Term:
        return self.axiom.lhs if self.orient == "lr" else self.axiom.rhs

    @property
    def target(self) -> Term:
        return self.axiom.rhs if self.orient == "lr" else self.axiom.lhs


def rules_of(E: Axiomatization) -> list[Rule]:
    out = []
    for a in E.extra():
        out.append(Rule(a, "lr"))
        if a.equation:
            out.append(Rule(a, "rl"))
    return out


# ---------------------------------------------------------------- ACI matching

Binding = tuple[dict, dict]


def _bind_action(p: Action, a: Action, am: dict) -> dict | None:
    if not p.is_meta:
        return am if p == a else None
    b = am.get(p.name)
    if b is not None:
        return am if b == a else None
    if a.is_meta:
        return None
    if p.kind == "meta" and a.is_tau:
        return None
    out = dict(am)
    out[p.name] = a
    return out


def _match_prefix(p: Prefix, s: Term, b: Binding) -> Iterator[Binding]:
    if not isinstance(s, Prefix):
        return
    am = _bind_action(p.action, s.action, b[1])
    if am is None:
        return
    for b2, _ in _match_sum(summands(p.body), tuple(summands(s.body)), (b[0], am), True):
        yield b2


def _assignments(elems: list[Term], names: list[str]) -> Iterator[dict[str, Term]]:
    """Spread ``elems`` over ``names``: each element goes to a nonempty subset."""
    if not names:
        if not elems:
            yield {}
        return
    subsets = [c for k in range(1, len(names) + 1) for c in itertools.combinations(names, k)]
    for choice in itertools.product(subsets, repeat=len(elems)):
        parts: dict[str, list[Term]] = {n: [] for n in names}
        for e, ns in zip(elems, choice):
            for n in ns:
                parts[n].append(e)
        yield {n: canonical_sum(v) for n, v in parts.items()}


def _match_sum(pats: list[Term], S: tuple[Term, ...], b: Binding,
               exact: bool) -> Iterator[tuple[Binding, frozenset]]:
    prefixes = [p for p in pats if isinstance(p, Prefix)]
    vars_ = [p.name for p in pats if isinstance(p, Var)]
    Sset = frozenset(S)

    def place(i: int, b: Binding, covered: frozenset) -> Iterator[tuple[Binding, frozenset]]:
        if i == len(prefixes):
            yield b, covered
            return
        for s in S:
            for b2 in _match_prefix(prefixes[i], s, b):
                yield from place(i + 1, b2, covered | {s})

    for b1, covered in place(0, b, frozenset()):
        tm = b1[0]
        ok = True
        for v in vars_:
            if v in tm:
                vals = frozenset(summands(tm[v]))
                if not vals <= Sset:
                    ok = False
                    break
                covered = covered | vals
        if not ok:
            continue
        free = sorted({v for v in vars_ if v not in tm})
        rest = [s for s in S if s not in covered]
        if exact:
            choices = [rest]
        elif not free:
            choices = [[]]
        else:
            choices = [[]] + [[s] for s in rest]
            if len(rest) > 1:
                choices.append(rest)
        for chosen in choices:
            for asg in _assignments(chosen, free):
                tm2 = dict(tm)
                tm2.update(asg)
                yield (tm2, b1[1]), covered | frozenset(chosen)


# ---------------------------------------------------------------- one-step rewriting

Frame = tuple  # (rest summands as a term or None, action)


def _sum_positions(t: Term, frames: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    yield frames, t
    S = summands(t)
    for i, s in enumerate(S):
        if isinstance(s, Prefix):
            others = S[:i] + S[i + 1:]
            rest = canonical_sum(others) if others else None
            yield from _sum_positions(s.body, frames + ((rest, s.action),))


def _plug(frames: tuple, x: Term) -> Term:
    for rest, a in reversed(frames):
        x = Prefix(a, x)
        if rest is not None:
            x = Sum(rest, x)
    return x


def _in_frames(frames: tuple, d: Derivation) -> Derivation:
    for rest, a in reversed(frames):
        d = prefix(a, d)
        if rest is not None:
            d = sum_(refl(rest), d)
    return d


@dataclass(frozen=True)
class Step:
    """An axiom instance inside a context; ``before``/``after`` are canonical."""

    rule: Rule
    subst: Substitution
    frames: tuple
    context: Term | None
    before: Term
    after: Term

    def derivation(self) -> Derivation:
        inner = ax(self.rule.axiom, self.rule.orient, self.subst)
        if self.context is not None:
            inner = sum_(refl(self.context), inner)
        d = _in_frames(self.frames, inner)
        return Chain(self.before).then(d).done(self.after)


def _complete(tm: dict, am: dict, need_terms, need_actions, pool, acts) -> Iterator[Substitution]:
    free_t = sorted(v for v in need_terms if v not in tm)
    free_a = sorted({(a.name, a.kind) for a in need_actions if a.name not in am})
    t_opts = [pool] * len(free_t)
    a_opts = [[x for x in acts if k == "metaany" or not x.is_tau] for _, k in free_a]
    for tv in itertools.product(*t_opts):
        for av in itertools.product(*a_opts):
            t2 = dict(tm)
            t2.update(zip(free_t, tv))
            a2 = dict(am)
            a2.update({n: x for (n, _), x in zip(free_a, av)})
            yield Substitution(t2, a2)


def _meta_actions(t: Term) -> set[Action]:
    return {a for a in actions(t) if a.is_meta}


def steps(state: Term, rules: list[Rule], pool: list[Term], acts: list[Action],
          backward: bool = False) -> Iterator[Step]:
    """All single steps out of (or, if ``backward``, into) a canonical state."""
    for frames, here in _sum_positions(state):
        S = tuple(summands(here))
        for r in rules:
            match_side, other = (r.target, r.source) if backward else (r.source, r.target)
            pats = summands(match_side)
            seen: set = set()
            for (tm, am), covered in _match_sum(pats, S, ({}, {}), exact=False):
                for s in _complete(tm, am, variables(other), _meta_actions(other), pool, acts):
                    inst = ac_canonical(substitute(other, s))
                    base = [x for x in S if x not in covered]
                    contexts = [base]
                    if covered and len(base) < len(S):
                        contexts.append(list(S))
                    for ctx in contexts:
                        new_here = canonical_sum(ctx + [inst])
                        key = (new_here, s)
                        if key in seen:
                            continue
                        seen.add(key)
                        new_state = ac_canonical(_plug(frames, new_here))
                        if new_state is state:
                            continue
                        context = canonical_sum(ctx) if ctx else None
                        if backward:
                            yield Step(r, s, frames, context, new_state, state)
                        else:
                            yield Step(r, s, frames, context, state, new_state)


def _size(t: Term) -> int:
    if t is NIL or isinstance(t, Var):
        return 1
    if isinstance(t, Prefix):
        return 1 + _size(t.body)
    return _size(t.left) + _size(t.right)


def _pool(*ts: Term) -> list[Term]:
    out = {NIL}
    for t in ts:
        for _, here in _sum_positions(ac_canonical(t)):
            out.add(here)
    return sorted(out, key=lambda u: (_size(u), render(u)))


# ---------------------------------------------------------------- search driver


@dataclass
class SearchReport:
    status: str  # found | exhausted | limit | refuted
    derivation: Derivation | None
    states: int
    steps: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


def search(E: Axiomatization, p: "Term | str", q: "Term | str", budget: int = 4,
           max_states: int = 20000, max_size: int | None = None,
           rel: RelationId | str | None = None) -> SearchReport:
    """Look for a derivation of p <= q (or p == q in equivalence mode)
    using at most ``budget`` non-core axiom steps."""
    p, q = term(p), term(q)
    if rel is not None and is_closed(p) and is_closed(q) and not check_closed(rel, p, q):
        return SearchReport("refuted", None, 0)
    cp, cq = ac_canonical(p), ac_canonical(q)
    if cp is cq:
        return SearchReport("found", Chain(p).done(q), 1, 0)
    rules = rules_of(E)
    pool = _pool(p, q)
    acts = sorted({a for t in (p, q) for a in actions(t) if not a.is_meta}) or []
    if max_size is None:
        max_size = 2 * max(_size(cp), _size(cq)) + 8

    fwd: dict[Term, Step | None] = {cp: None}
    bwd: dict[Term, Step | None] = {cq: None}
    f_front, b_front = [cp], [cq]
    f_depth = b_depth = 0
    pruned = False

    def path_fwd(t: Term) -> list[Step]:
        out = []
        while fwd[t] is not None:
            st = fwd[t]
            out.append(st)
            t = st.before
        return out[::-1]

    def path_bwd(t: Term) -> list[Step]:
        out = []
        while bwd[t] is not None:
            st = bwd[t]
            out.append(st)
            t = st.after
        return out

    def finish(meet: Term) -> SearchReport:
        ss = path_fwd(meet) + path_bwd(meet)
        ch = Chain(p)
        for st in ss:
            ch.then(st.derivation())
        return SearchReport("found", ch.done(q), len(fwd) + len(bwd), len(ss))

    while f_depth + b_depth < budget and (f_front or b_front):
        forward = bool(f_front) and (len(f_front) <= len(b_front) or not b_front)
        front, mine, other = (f_front, fwd, bwd) if forward else (b_front, bwd, fwd)
        nxt = []
        for st in front:
            for step in steps(st, rules, pool, acts, backward=not forward):
                new = step.after if forward else step.before
                if new in mine:
                    continue
                if _size(new) > max_size:
                    pruned = True
                    continue
                mine[new] = step
                if new in other:
                    return finish(new)
                nxt.append(new)
                if len(fwd) + len(bwd) > max_states:
                    return SearchReport("limit", None, len(fwd) + len(bwd))
        if forward:
            f_front, f_depth = nxt, f_depth + 1
        else:
            b_front, b_depth = nxt, b_depth + 1
    return SearchReport("exhausted", None, len(fwd) + len(bwd))


def search_derivation(E: Axiomatization, p: "Term | str", q: "Term | str",
                      budget: int = 4, **kw) -> Derivation | None:
    return search(E, p, q, budget, **kw).derivation


def random_walk(E: Axiomatization, start: "Term | str", length: int, rng,
                pool: list[Term] | None = None) -> Derivation:
    """A derivation of start <= t (or start == t) built from ``length``
    randomly chosen single steps; stops early at a dead end."""
    start = term(start)
    rules = rules_of(E)
    cur = ac_canonical(start)
    pool = pool if pool is not None else _pool(start)
    acts = sorted({a for a in actions(start) if not a.is_meta}) or []
    ch = Chain(start)
    for _ in range(length):
        options = list(itertools.islice(steps(cur, rules, pool, acts), 400))
        if not options:
            break
        st = rng.choice(options)
        ch.then(st.derivation())
        cur = st.after
    return ch.done()

"""Operational semantics, observations and the decorated-trace preorders.

Closed terms are finite trees, so every observation set is finite and the
preorders T, CT, F, IF (and their weak variants) are decided by walking
residual sets.  ``check_oracle`` decides the same relations straight from
the definitions (failure pairs and impossible-future pairs enumerated
literally) and exists to cross-validate ``check_closed``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable

from . import _pykernels, kernels
from .generate import enumerate_closed
from .syntax import (TAU, Action, Alphabet, Prefix, Substitution, Term, Var,
                     actions, has_meta, has_tau, render, substitute, summands,
                     variables)

Trace = tuple  # tuple of action names; WT_V traces end in a variable name


class SemanticsError(ValueError):
    pass


class OracleBudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- relation ids

BASES = ("t", "ct", "f", "if")


@dataclass(frozen=True)
class RelationId:
    base: str  # one of BASES
    weak: bool = False
    equivalence: bool = False

    @classmethod
    def parse(cls, text: str) -> "RelationId":
        t = text.strip().lower()
        shape = "pre"
        if t.endswith("-pre") or t.endswith("-eq"):
            t, shape = t.rsplit("-", 1)
        weak = False
        if t not in BASES and t.startswith("w") and t[1:] in BASES:
            weak, t = True, t[1:]
        if t not in BASES:
            raise ValueError(f"unknown relation {text!r}")
        return cls(t, weak, shape == "eq")

    @property
    def flavor(self) -> str:
        return "weak" if self.weak else "strong"

    def preorder(self) -> "RelationId":
        return RelationId(self.base, self.weak, False)

    def as_equivalence(self) -> "RelationId":
        return RelationId(self.base, self.weak, True)

    def strong(self) -> "RelationId":
        return RelationId(self.base, False, self.equivalence)

    def __str__(self) -> str:
        return ("w" if self.weak else "") + self.base + ("-eq" if self.equivalence else "-pre")


def rel(text: str) -> RelationId:
    return RelationId.parse(text)


class Observation(Enum):
    INITIALS = "initials"
    TRACES = "traces"
    COMPLETED_TRACES = "completed-traces"
    WEAK_TRACES = "weak-traces"
    WEAK_COMPLETED_TRACES = "weak-completed-traces"
    WEAK_TRACES_ENDING_IN_VARIABLE = "weak-traces-var"


# ---------------------------------------------------------------- transitions


@lru_cache(maxsize=None)
def transitions(t: Term) -> frozenset[tuple[Action, Term]]:
    out = set()
    for s in summands(t):
        if isinstance(s, Prefix):
            if s.action.is_meta:
                raise SemanticsError(f"metavariable {s.action} has no semantics")
            out.add((s.action, s.body))
    return frozenset(out)


def initials(t: Term) -> frozenset[Action]:
    return frozenset(a for a, _ in transitions(t))


def can_tau(t: Term) -> bool:
    return any(a.is_tau for a, _ in transitions(t))


def tau_closure(states: Iterable[Term]) -> frozenset[Term]:
    seen = set(states)
    todo = list(seen)
    while todo:
        s = todo.pop()
        for a, s2 in transitions(s):
            if a.is_tau and s2 not in seen:
                seen.add(s2)
                todo.append(s2)
    return frozenset(seen)


@lru_cache(maxsize=None)
def _closure1(t: Term) -> frozenset[Term]:
    return tau_closure([t])


def tau_successors(t: Term) -> frozenset[Term]:
    """All t' with t =>-tau-> t' (at least one tau step)."""
    out = set()
    for s in _closure1(t):
        for a, s2 in transitions(s):
            if a.is_tau:
                out.add(s2)
    return frozenset(out)


def _check_strong(t: Term):
    if has_tau(t):
        raise SemanticsError(f"strong semantics applied to a term with tau: {render(t)}")


# ---------------------------------------------------------------- observations


@lru_cache(maxsize=None)
def traces(t: Term) -> frozenset[Trace]:
    out = {()}
    for a, t2 in transitions(t):
        if a.is_tau:
            raise SemanticsError(f"strong semantics applied to a term with tau: {render(t)}")
        out.update((a.name,) + s for s in traces(t2))
    return frozenset(out)


@lru_cache(maxsize=None)
def completed_traces(t: Term) -> frozenset[Trace]:
    tr = transitions(t)
    if not tr:
        return frozenset([()])
    out = set()
    for a, t2 in tr:
        if a.is_tau:
            raise SemanticsError(f"strong semantics applied to a term with tau: {render(t)}")
        out.update((a.name,) + s for s in completed_traces(t2))
    return frozenset(out)


@lru_cache(maxsize=None)
def weak_traces(t: Term) -> frozenset[Trace]:
    out = {()}
    for a, t2 in transitions(t):
        if a.is_tau:
            out |= weak_traces(t2)
        else:
            out.update((a.name,) + s for s in weak_traces(t2))
    return frozenset(out)


@lru_cache(maxsize=None)
def weak_completed_traces(t: Term) -> frozenset[Trace]:
    tr = transitions(t)
    if not tr:
        return frozenset([()])
    out = set()
    for a, t2 in tr:
        if a.is_tau:
            out |= weak_completed_traces(t2)
        else:
            out.update((a.name,) + s for s in weak_completed_traces(t2))
    return frozenset(out)


@lru_cache(maxsize=None)
def weak_traces_var(t: Term) -> frozenset[Trace]:
    """Weak traces ending in a variable: each variable occurrence y acts
    as a terminal pseudo-action, giving traces ``(a1, ..., ak, y)``."""
    out = set()
    for s in summands(t):
        if isinstance(s, Var):
            out.add((s.name,))
        elif isinstance(s, Prefix):
            rest = weak_traces_var(s.body)
            if s.action.is_tau:
                out |= rest
            else:
                out.update((s.action.name,) + r for r in rest)
    return frozenset(out)


def observe(kind: Observation | str, t: Term) -> frozenset[Trace]:
    kind = Observation(kind)
    if kind is Observation.INITIALS:
        return frozenset((str(a),) for a in initials(t))
    if kind in (Observation.TRACES, Observation.COMPLETED_TRACES):
        _check_strong(t)
        return traces(t) if kind is Observation.TRACES else completed_traces(t)
    if kind is Observation.WEAK_TRACES:
        return weak_traces(t)
    if kind is Observation.WEAK_COMPLETED_TRACES:
        return weak_completed_traces(t)
    return weak_traces_var(t)


def show_trace(tr: Trace) -> str:
    if not tr:
        return "ε"
    return "".join(tr) if all(len(a) == 1 for a in tr) else ".".join(tr)


# ---------------------------------------------------------------- residuals


@lru_cache(maxsize=None)
def _strong_step(states: frozenset, a: str) -> frozenset:
    return frozenset(t2 for s in states for b, t2 in transitions(s)
                     if b.kind == "name" and b.name == a)


@lru_cache(maxsize=None)
def _weak_step(states: frozenset, a: str) -> frozenset:
    return tau_closure(_strong_step(states, a))


def residuals(t: Term, trace: Iterable[str], flavor: str = "strong") -> frozenset[Term]:
    trace = tuple(trace)
    if flavor == "strong":
        _check_strong(t)
        cur = frozenset([t])
        for a in trace:
            cur = _strong_step(cur, a)
        return cur
    if flavor != "weak":
        raise ValueError(f"unknown flavor {flavor!r}")
    cur = _closure1(t)
    for a in trace:
        cur = _weak_step(cur, a)
    return cur


@lru_cache(maxsize=None)
def residual_map(t: Term, weak: bool) -> dict[Trace, frozenset[Term]]:
    """Map from every (weak) trace of t to its residual set."""
    start = _closure1(t) if weak else frozenset([t])
    step = _weak_step if weak else _strong_step
    out: dict[Trace, frozenset[Term]] = {}
    todo = [((), start)]
    while todo:
        tr, states = todo.pop()
        out[tr] = states
        names = sorted({a.name for s in states for a, _ in transitions(s) if a.kind == "name"})
        for a in names:
            todo.append((tr + (a,), step(states, a)))
    return out


# ---------------------------------------------------------------- decisions


def _dominated(p_sets, q_sets) -> bool:
    masks, n = kernels.masks_for(list(p_sets) + list(q_sets))
    pm, qm = masks[:len(p_sets)], masks[len(p_sets):]
    if n > 63:
        return _pykernels.dominated(pm, qm)
    return kernels.dominated(pm, qm)


def _check_terms(r: RelationId, p: Term, q: Term):
    for t in (p, q):
        if variables(t):
            raise SemanticsError(f"open term given to a closed-term check: {render(t)}")
        if has_meta(t):
            raise SemanticsError(f"metavariable in {render(t)}")
        if not r.weak:
            _check_strong(t)


def _preorder(r: RelationId, p: Term, q: Term) -> bool:
    b = r.base
    if not r.weak:
        if b == "t":
            return traces(p) <= traces(q)
        if b == "ct":
            return completed_traces(p) <= completed_traces(q)
        rp, rq = residual_map(p, False), residual_map(q, False)
        obs = initials if b == "f" else traces
        for tr, ps in rp.items():
            qs = rq.get(tr)
            if not qs:
                return False
            if not _dominated([obs(x) for x in ps], [obs(x) for x in qs]):
                return False
        return True
    if b == "t":
        return weak_traces(p) <= weak_traces(q)
    if can_tau(p) and not can_tau(q):
        return False
    if b == "ct":
        return weak_completed_traces(p) <= weak_completed_traces(q)
    rp, rq = residual_map(p, True), residual_map(q, True)
    if b == "f":
        for tr, ps in rp.items():
            stable_p = [initials(x) for x in ps if not can_tau(x)]
            if not stable_p:
                continue
            qs = rq.get(tr, ())
            stable_q = [initials(x) for x in qs if not can_tau(x)]
            if not _dominated(stable_p, stable_q):
                return False
        return True
    if weak_traces(p) != weak_traces(q):
        return False
    for tr, ps in rp.items():
        qs = rq.get(tr)
        if not qs:
            return False
        if not _dominated([weak_traces(x) for x in ps], [weak_traces(x) for x in qs]):
            return False
    return True


def check_closed(r: RelationId | str, p: Term, q: Term) -> bool:
    """Decide ``p <= q`` (or ``p == q`` for an equivalence) on closed terms."""
    if isinstance(r, str):
        r = RelationId.parse(r)
    _check_terms(r, p, q)
    if r.equivalence:
        return _preorder(r, p, q) and _preorder(r, q, p)
    return _preorder(r, p, q)


# ---------------------------------------------------------------- oracle


class _Walker:
    """Explicit path enumeration, independent of the memoized tables above."""

    def __init__(self, budget: int):
        self.budget = budget

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise OracleBudgetExceeded("oracle node budget exceeded")

    def runs(self, t: Term, weak: bool):
        """Yield (visible trace, end state) for every (weak) run of t."""
        stack = [((), t)]
        while stack:
            tr, s = stack.pop()
            self.tick()
            yield tr, s
            for a, s2 in transitions(s):
                if a.is_tau:
                    if not weak:
                        raise SemanticsError("tau in strong oracle")
                    stack.append((tr, s2))
                else:
                    stack.append((tr + (a.name,), s2))

    def trace_set(self, t: Term, weak: bool) -> frozenset:
        return frozenset(tr for tr, _ in self.runs(t, weak))


def check_oracle(r: RelationId | str, p: Term, q: Term, budget: int = 200_000,
                 max_bits: int = 22) -> bool:
    """Decide the relation straight from its definition.

    IF/WIF pairs ``(sigma, B)`` are enumerated with B ranging over all
    subsets of the union of residual trace sets; F/WF failure pairs are
    enumerated with B over subsets of the actions in p and q.
    """
    if isinstance(r, str):
        r = RelationId.parse(r)
    _check_terms(r, p, q)
    w = _Walker(budget)
    if r.equivalence:
        return _oracle(w, r, p, q, max_bits) and _oracle(w, r, q, p, max_bits)
    return _oracle(w, r, p, q, max_bits)


def _oracle(w: _Walker, r: RelationId, p: Term, q: Term, max_bits: int) -> bool:
    weak = r.weak
    runs_p = list(w.runs(p, weak))
    runs_q = list(w.runs(q, weak))
    if weak and r.base != "t":
        tau_p = any(a.is_tau for a, _ in transitions(p))
        tau_q = any(a.is_tau for a, _ in transitions(q))
        if tau_p and not tau_q:
            return False
    if r.base == "t":
        return {tr for tr, _ in runs_p} <= {tr for tr, _ in runs_q}
    if r.base == "ct":
        return ({tr for tr, s in runs_p if not transitions(s)}
                <= {tr for tr, s in runs_q if not transitions(s)})
    if r.base == "f":
        acts = sorted({a.name for t in (p, q) for a in actions(t) if a.kind == "name"})
        return _failure_pairs(runs_p, acts) <= _failure_pairs(runs_q, acts)
    # impossible futures
    if weak and w.trace_set(p, True) != w.trace_set(q, True):
        return False
    by_trace_p: dict = {}
    by_trace_q: dict = {}
    for tr, s in runs_p:
        by_trace_p.setdefault(tr, []).append(s)
    for tr, s in runs_q:
        by_trace_q.setdefault(tr, []).append(s)
    for tr, ps in by_trace_p.items():
        qs = by_trace_q.get(tr, [])
        p_sets = [w.trace_set(s, weak) for s in ps]
        q_sets = [w.trace_set(s, weak) for s in qs]
        masks, n = kernels.masks_for(p_sets + q_sets)
        if n > max_bits:
            raise OracleBudgetExceeded(f"{n} traces in the universe exceeds {max_bits}")
        if kernels.refuting_subset(masks[:len(ps)], masks[len(ps):], n) >= 0:
            return False
    return True


def _failure_pairs(runs, acts) -> set:
    out = set()
    for tr, s in runs:
        ini = {a for a, _ in transitions(s)}
        if any(a.is_tau for a in ini):
            continue  # a refusal needs a stable state
        free = [a for a in acts if all(b.name != a for b in ini)]
        for k in range(len(free) + 1):
            for combo in itertools.combinations(free, k):
                out.add((tr, frozenset(combo)))
    return out


# ---------------------------------------------------------------- open terms


def _meta_vars(t: Term) -> dict[str, str]:
    return {a.name: a.kind for a in actions(t) if a.is_meta}


def closed_instances(t: Term, u: Term, alphabet: Alphabet, bound: int, weak: bool,
                     max_summands: int = 2, limit: int | None = None, seed: int = 0):
    """Closed substitutions for the variables and metavariables of t, u.

    Variables range over the AC-distinct closed terms of depth <= bound
    (tau allowed when ``weak``).  When the product exceeds ``limit`` a
    seeded random sample of ``limit`` substitutions is drawn instead.
    Yields ``Substitution`` objects.
    """
    names = list(alphabet.names or ("a", "b"))
    acts = names + (["tau"] if weak else [])
    pool = enumerate_closed(acts, bound, max_summands)
    vs = sorted(variables(t) | variables(u))
    metas = {**_meta_vars(t), **_meta_vars(u)}
    ms = sorted(metas)
    visible = [Action("name", n) for n in names]
    choices = [visible + ([TAU] if (weak and metas[m] == "metaany") else []) for m in ms]
    total = len(pool) ** len(vs)
    for c in choices:
        total *= len(c)
    if limit is None or total <= limit:
        for acts_choice in itertools.product(*choices):
            am = dict(zip(ms, acts_choice))
            for terms in itertools.product(pool, repeat=len(vs)):
                yield Substitution(dict(zip(vs, terms)), am)
        return
    rng = random.Random(seed)
    for _ in range(limit):
        am = {m: rng.choice(c) for m, c in zip(ms, choices)}
        yield Substitution({v: rng.choice(pool) for v in vs}, am)


def refute_open(r: RelationId | str, t: Term, u: Term, bound: int,
                alphabet: Alphabet | None = None, max_summands: int = 2,
                limit: int | None = 20_000, seed: int = 0) -> Substitution | None:
    """First closed instance violating the relation, or None if none up to bound."""
    if isinstance(r, str):
        r = RelationId.parse(r)
    alphabet = alphabet or Alphabet.of("a", "b")
    for s in closed_instances(t, u, alphabet, bound, r.weak, max_summands, limit, seed):
        if not check_closed(r, substitute(t, s, ground=True), substitute(u, s, ground=True)):
            return s
    return None

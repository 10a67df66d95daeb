"""Exhaustive enumeration and random generation of terms."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from .syntax import (NIL, TAU, Action, Prefix, Term, Var, ac_canonical,
                     canonical_sum, sum_of)


def _as_actions(acts) -> list[Action]:
    out = []
    for a in acts:
        if isinstance(a, Action):
            out.append(a)
        elif a == "tau":
            out.append(TAU)
        else:
            out.append(Action("name", a))
    return out


def enumerate_closed(actions: Sequence, depth: int, max_summands: int = 2,
                     top_actions: Sequence | None = None) -> list[Term]:
    """All AC-distinct closed terms of depth <= ``depth`` with at most
    ``max_summands`` summands at every level.

    ``top_actions`` (when given) replaces ``actions`` for the outermost
    prefixes only, e.g. to allow a leading tau level.
    """
    acts = _as_actions(actions)
    level = [NIL]
    for d in range(1, depth + 1):
        lead = _as_actions(top_actions) if (top_actions is not None and d == depth) else acts
        pieces = [Prefix(a, t) for a in lead for t in level]
        terms = {NIL}
        for k in range(1, max_summands + 1):
            for combo in itertools.combinations(pieces, k):
                terms.add(canonical_sum(combo))
        level = sorted(terms, key=_sort_key)
    return level


def _sort_key(t: Term):
    from .syntax import body_key
    return body_key(t)


def random_term(rng: random.Random, actions: Sequence, depth: int,
                max_summands: int = 3, variables: Sequence[str] = (),
                var_weight: float = 0.2, nil_weight: float = 0.15) -> Term:
    """A random term of depth <= ``depth`` (not canonicalized)."""
    acts = _as_actions(actions)

    def leaf() -> Term:
        if variables and rng.random() < var_weight / (var_weight + nil_weight):
            return Var(rng.choice(list(variables)))
        return NIL

    def go(d: int) -> Term:
        if d == 0:
            return leaf()
        n = rng.randint(1, max_summands)
        parts = []
        for _ in range(n):
            r = rng.random()
            if r < nil_weight:
                parts.append(NIL)
            elif variables and r < nil_weight + var_weight:
                parts.append(Var(rng.choice(list(variables))))
            else:
                parts.append(Prefix(rng.choice(acts), go(rng.randint(0, d - 1))))
        return sum_of(parts)

    return go(depth)


def random_canonical(rng: random.Random, actions: Sequence, depth: int,
                     max_summands: int = 3, variables: Sequence[str] = ()) -> Term:
    return ac_canonical(random_term(rng, actions, depth, max_summands, variables))

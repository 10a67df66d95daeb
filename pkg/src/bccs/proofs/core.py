"""Derivation trees, the checker, A1-4 bridging and the text format."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from ..axioms import CORE, Axiom, Axiomatization
from ..syntax import (NIL, Action, Prefix, Substitution, SubstitutionError, Sum,
                      Term, Var, ac_canonical, parse, parse_action, render,
                      subterm, substitute, summand_key, term, variables)


class DerivationError(ValueError):
    """A derivation failed to check; ``path`` locates the offending node."""

    def __init__(self, msg: str, path: tuple[int, ...] = ()):
        where = ".".join(map(str, path)) or "root"
        super().__init__(f"{msg} (at node {where})")
        self.reason = msg
        self.path = path


@dataclass(frozen=True, eq=False)
class Derivation:
    kind: str  # REFL | AX | TRANS | SUM | PREFIX | SYM
    lhs: Term
    rhs: Term
    children: tuple["Derivation", ...] = ()
    axiom: str | None = None
    orient: str = "lr"
    equation: bool = True
    subst: Substitution | None = None
    action: Action | None = None

    def __str__(self) -> str:
        return f"{render(self.lhs)} ~ {render(self.rhs)}"

    def size(self) -> int:
        seen: set[int] = set()
        stack = [self]
        while stack:
            d = stack.pop()
            if id(d) in seen:
                continue
            seen.add(id(d))
            stack.extend(d.children)
        return len(seen)

    def axiom_steps(self, skip: Iterable[str] = ()) -> int:
        """Number of AX leaves (counted with multiplicity along the tree)."""
        skip = set(skip)

        @lru_cache(maxsize=None)
        def go(d: Derivation) -> int:
            if d.kind == "AX":
                return 0 if d.axiom in skip else 1
            return sum(go(c) for c in d.children)

        return go(self)

    def axioms_used(self) -> set[str]:
        out: set[str] = set()
        for d in walk(self):
            if d.kind == "AX":
                out.add(d.axiom)
        return out


Derivation.__hash__ = object.__hash__


def walk(d: Derivation) -> Iterator[Derivation]:
    seen: set[int] = set()
    stack = [d]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.children)


# ---------------------------------------------------------------- constructors


def refl(t: Term) -> Derivation:
    return Derivation("REFL", t, t)


def ax(a: Axiom, orient: str = "lr", subst: Substitution | None = None) -> Derivation:
    if orient not in ("lr", "rl"):
        raise DerivationError(f"bad orientation {orient!r}")
    if orient == "rl" and not a.equation:
        raise DerivationError(f"{a.name} is an inequation and cannot be used right-to-left")
    s = subst or Substitution()
    try:
        l, r = substitute(a.lhs, s), substitute(a.rhs, s)
    except SubstitutionError as e:
        raise DerivationError(str(e)) from None
    if orient == "rl":
        l, r = r, l
    return Derivation("AX", l, r, (), a.name, orient, a.equation, s)


def trans(d1: Derivation, d2: Derivation) -> Derivation:
    if d1.rhs is not d2.lhs:
        raise DerivationError(f"transitivity mismatch: {render(d1.rhs)} vs {render(d2.lhs)}")
    if d1.kind == "REFL":
        return d2
    if d2.kind == "REFL":
        return d1
    return Derivation("TRANS", d1.lhs, d2.rhs, (d1, d2))


def trans_all(ds: list[Derivation], start: Term | None = None) -> Derivation:
    """Balanced chain of transitivity steps (keeps trees shallow)."""
    ds = [d for d in ds if d.kind != "REFL"]
    if not ds:
        if start is None:
            raise DerivationError("empty chain")
        return refl(start)
    if start is not None and ds[0].lhs is not start:
        raise DerivationError("chain does not start at the given term")

    def go(lo: int, hi: int) -> Derivation:
        if hi - lo == 1:
            return ds[lo]
        mid = (lo + hi) // 2
        return trans(go(lo, mid), go(mid, hi))

    return go(0, len(ds))


def sum_(d1: Derivation, d2: Derivation) -> Derivation:
    if d1.kind == "REFL" and d2.kind == "REFL":
        return refl(Sum(d1.lhs, d2.lhs))
    return Derivation("SUM", Sum(d1.lhs, d2.lhs), Sum(d1.rhs, d2.rhs), (d1, d2))


def prefix(a: Action, d: Derivation) -> Derivation:
    if d.kind == "REFL":
        return refl(Prefix(a, d.lhs))
    return Derivation("PREFIX", Prefix(a, d.lhs), Prefix(a, d.rhs), (d,), action=a)


def sym(d: Derivation) -> Derivation:
    if d.kind == "REFL":
        return d
    return Derivation("SYM", d.rhs, d.lhs, (d,))


def reverse(d: Derivation) -> Derivation:
    """Turn a derivation of t ~ u into one of u ~ t without SYM.

    Only possible when every axiom used is an equation.
    """
    memo: dict[int, Derivation] = {}

    def go(n: Derivation) -> Derivation:
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k == "REFL":
            r = n
        elif k == "AX":
            if not n.equation:
                raise DerivationError(f"cannot reverse inequation {n.axiom}")
            r = Derivation("AX", n.rhs, n.lhs, (), n.axiom, "rl" if n.orient == "lr" else "lr",
                           True, n.subst)
        elif k == "TRANS":
            r = trans(go(n.children[1]), go(n.children[0]))
        elif k == "SUM":
            r = sum_(go(n.children[0]), go(n.children[1]))
        elif k == "PREFIX":
            r = prefix(n.action, go(n.children[0]))
        else:
            r = n.children[0]
        memo[id(n)] = r
        return r

    return go(d)


def cong(template: "Term | str", d: Derivation, hole: str = "w99") -> Derivation:
    """Plug ``d`` into every occurrence of the variable ``hole`` in ``template``."""
    template = term(template)

    def go(t: Term) -> Derivation:
        if isinstance(t, Var) and t.name == hole:
            return d
        if hole not in variables(t):
            return refl(t)
        if isinstance(t, Prefix):
            return prefix(t.action, go(t.body))
        return sum_(go(t.left), go(t.right))

    return go(template)


def instantiate(d: Derivation, s: Substitution) -> Derivation:
    """Apply a substitution to every judgement of a derivation."""
    from ..syntax import map_action
    memo: dict[int, Derivation] = {}

    def go(n: Derivation) -> Derivation:
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k == "REFL":
            r = refl(substitute(n.lhs, s))
        elif k == "AX":
            old = n.subst or Substitution()
            tm = {v: substitute(t, s) for v, t in old.terms.items()}
            for v, t in s.terms.items():
                tm.setdefault(v, t)
            am = {v: map_action(a, s) for v, a in old.actions.items()}
            for v, a in s.actions.items():
                am.setdefault(v, a)
            ns = Substitution(tm, am)
            r = Derivation("AX", substitute(n.lhs, s), substitute(n.rhs, s), (), n.axiom,
                           n.orient, n.equation, ns)
        elif k == "TRANS":
            r = trans(go(n.children[0]), go(n.children[1]))
        elif k == "SUM":
            r = sum_(go(n.children[0]), go(n.children[1]))
        elif k == "PREFIX":
            r = prefix(map_action(n.action, s), go(n.children[0]))
        else:
            r = sym(go(n.children[0]))
        memo[id(n)] = r
        return r

    return go(d)


# ---------------------------------------------------------------- checking


@dataclass(frozen=True)
class Conclusion:
    lhs: Term
    rhs: Term
    equivalence: bool

    @property
    def symbol(self) -> str:
        return "==" if self.equivalence else "<="

    def __str__(self) -> str:
        return f"{render(self.lhs)} {self.symbol} {render(self.rhs)}"


def check(E: Axiomatization, d: Derivation) -> Conclusion:
    """Verify every inference of ``d`` against ``E``; raise DerivationError otherwise."""
    done: set[int] = set()

    def go(n: Derivation, path: tuple[int, ...]):
        if id(n) in done:
            return
        k = n.kind
        if k == "REFL":
            if n.lhs is not n.rhs:
                raise DerivationError("reflexivity with different sides", path)
        elif k == "AX":
            if n.axiom not in E:
                raise DerivationError(f"axiom {n.axiom} is not in {E.name}", path)
            a = E.get(n.axiom)
            if n.orient == "rl" and not a.equation:
                raise DerivationError(f"inequation {a.name} used right-to-left", path)
            if n.orient not in ("lr", "rl"):
                raise DerivationError(f"bad orientation {n.orient!r}", path)
            try:
                l, r = substitute(a.lhs, n.subst or Substitution()), substitute(a.rhs, n.subst or Substitution())
            except SubstitutionError as e:
                raise DerivationError(str(e), path) from None
            if n.orient == "rl":
                l, r = r, l
            if l is not n.lhs or r is not n.rhs:
                raise DerivationError(
                    f"{a.name} instance is {render(l)} ~ {render(r)}, "
                    f"node claims {render(n.lhs)} ~ {render(n.rhs)}", path)
        elif k == "TRANS":
            d1, d2 = n.children
            go(d1, path + (0,))
            go(d2, path + (1,))
            if d1.rhs is not d2.lhs:
                raise DerivationError(
                    f"transitivity mismatch: {render(d1.rhs)} vs {render(d2.lhs)}", path)
            if n.lhs is not d1.lhs or n.rhs is not d2.rhs:
                raise DerivationError("transitivity conclusion mismatch", path)
        elif k == "SUM":
            d1, d2 = n.children
            go(d1, path + (0,))
            go(d2, path + (1,))
            if n.lhs is not Sum(d1.lhs, d2.lhs) or n.rhs is not Sum(d1.rhs, d2.rhs):
                raise DerivationError("sum congruence conclusion mismatch", path)
        elif k == "PREFIX":
            (d1,) = n.children
            go(d1, path + (0,))
            if n.action is None or n.lhs is not Prefix(n.action, d1.lhs) \
                    or n.rhs is not Prefix(n.action, d1.rhs):
                raise DerivationError("prefix congruence conclusion mismatch", path)
        elif k == "SYM":
            if not E.equivalence:
                raise DerivationError("symmetry is only available in equivalence mode", path)
            (d1,) = n.children
            go(d1, path + (0,))
            if n.lhs is not d1.rhs or n.rhs is not d1.lhs:
                raise DerivationError("symmetry conclusion mismatch", path)
        else:
            raise DerivationError(f"unknown rule {k!r}", path)
        done.add(id(n))

    go(d, ())
    return Conclusion(d.lhs, d.rhs, E.equivalence)


def checks(E: Axiomatization, d: Derivation) -> bool:
    try:
        check(E, d)
    except DerivationError:
        return False
    return True


# ---------------------------------------------------------------- A1-4 bridging

_A = {a.name: a for a in CORE}


def _core(name: str, orient: str = "lr", **terms: Term) -> Derivation:
    return ax(_A[name], orient, Substitution(terms))


@lru_cache(maxsize=None)
def norm(t: Term) -> Derivation:
    """A1-4 derivation of t ~ ac_canonical(t)."""
    if t is NIL or isinstance(t, Var):
        return refl(t)
    if isinstance(t, Prefix):
        return prefix(t.action, norm(t.body))
    dl, dr = norm(t.left), norm(t.right)
    return trans(sum_(dl, dr), _merge(dl.rhs, dr.rhs))


@lru_cache(maxsize=None)
def _merge(L: Term, R: Term) -> Derivation:
    # L and R canonical; derives L + R ~ canonical(L + R)
    if R is NIL:
        return _core("A4", x=L)
    if L is NIL:
        return trans(_core("A1", x=NIL, y=R), _core("A4", x=R))
    if not isinstance(L, Sum):
        return _insert(L, R)
    s, rest = L.left, L.right
    d1 = _core("A2", x=s, y=rest, z=R)
    m = _merge(rest, R)
    return trans_all([d1, sum_(refl(s), m), _insert(s, m.rhs)], Sum(L, R))


@lru_cache(maxsize=None)
def _insert(s: Term, M: Term) -> Derivation:
    # s a canonical summand, M canonical and nonzero
    start = Sum(s, M)
    if isinstance(M, Sum):
        m, rest = M.left, M.right
    else:
        m, rest = M, None
    if s is m:
        if rest is None:
            return _core("A3", x=s)
        return trans(_core("A2", "rl", x=s, y=s, z=rest), sum_(_core("A3", x=s), refl(rest)))
    if summand_key(s) < summand_key(m):
        return refl(start)
    if rest is None:
        return _core("A1", x=s, y=m)
    return trans_all([
        _core("A2", "rl", x=s, y=m, z=rest),
        sum_(_core("A1", x=s, y=m), refl(rest)),
        _core("A2", x=m, y=s, z=rest),
        sum_(refl(m), _insert(s, rest)),
    ], start)


def bridge(t: Term, u: Term) -> Derivation:
    """A1-4 derivation of t ~ u for AC-equal terms."""
    if t is u:
        return refl(t)
    if ac_canonical(t) is not ac_canonical(u):
        raise DerivationError(f"not equal modulo A1-4: {render(t)} vs {render(u)}")
    return trans(norm(t), reverse(norm(u)))


class Chain:
    """Accumulates steps, inserting A1-4 bridges whenever consecutive
    judgements only agree modulo associativity, commutativity, idempotence
    and 0."""

    def __init__(self, start: Term):
        self.start = start
        self.cur = start
        self.parts: list[Derivation] = []

    def then(self, d: Derivation) -> "Chain":
        if d.lhs is not self.cur:
            self.parts.append(bridge(self.cur, d.lhs))
        self.parts.append(d)
        self.cur = d.rhs
        return self

    def to(self, t: "Term | str") -> "Chain":
        t = term(t)
        if t is not self.cur:
            self.parts.append(bridge(self.cur, t))
            self.cur = t
        return self

    def done(self, end: "Term | str | None" = None) -> Derivation:
        if end is not None:
            self.to(end)
        return trans_all(self.parts, self.start)


# ---------------------------------------------------------------- axiom application


def match(pattern: Term, t: Term, s: Substitution | None = None) -> Substitution | None:
    """Syntactic matching extending ``s``; None on failure."""
    tm = dict(s.terms) if s else {}
    am = dict(s.actions) if s else {}

    def go(p: Term, u: Term) -> bool:
        if isinstance(p, Var):
            if p.name in tm:
                return tm[p.name] is u
            tm[p.name] = u
            return True
        if p is NIL:
            return u is NIL
        if isinstance(p, Prefix):
            if not isinstance(u, Prefix):
                return False
            a = p.action
            if a.is_meta:
                b = am.get(a.name)
                if b is None:
                    if a.kind == "meta" and u.action.kind != "name":
                        return False
                    am[a.name] = u.action
                elif b != u.action:
                    return False
            elif a != u.action:
                return False
            return go(p.body, u.body)
        if not isinstance(u, Sum):
            return False
        return go(p.left, u.left) and go(p.right, u.right)

    return Substitution(tm, am) if go(pattern, t) else None


def apply_axiom_at(t: "Term | str", a: Axiom, orient: str, position: Iterable[int],
                   subst: Substitution | None = None) -> tuple[Term, Derivation]:
    """One axiom step inside a context.

    Returns the rewritten term and a derivation of t ~ t[position := instance]."""
    t = term(t)
    path = list(position)
    sub = subterm(t, path)
    side = a.lhs if orient == "lr" else a.rhs
    s = match(side, sub, subst)
    if s is None:
        raise DerivationError(f"{a.name} ({orient}) does not match {render(sub)}")
    step = ax(a, orient, s)

    def wrap(u: Term, p: list[int]) -> Derivation:
        if not p:
            return step
        if isinstance(u, Sum):
            if p[0] == 0:
                return sum_(wrap(u.left, p[1:]), refl(u.right))
            return sum_(refl(u.left), wrap(u.right, p[1:]))
        return prefix(u.action, wrap(u.body, p[1:]))

    d = wrap(t, path)
    return d.rhs, d


# ---------------------------------------------------------------- text format

_INDENT = "  "


def serialize(d: Derivation) -> str:
    lines: list[str] = []
    stack = [(d, 0)]
    while stack:
        n, lvl = stack.pop()
        pad = _INDENT * lvl
        if n.kind == "REFL":
            lines.append(f"{pad}REFL | {render(n.lhs)}")
        elif n.kind == "AX":
            eq = "eq" if n.equation else "ineq"
            sub = (n.subst or Substitution()).render()
            lines.append(f"{pad}AX | {n.axiom} | {n.orient} | {eq} | {sub} | "
                         f"{render(n.lhs)} | {render(n.rhs)}")
        elif n.kind == "PREFIX":
            lines.append(f"{pad}PREFIX | {n.action} | {render(n.lhs)} | {render(n.rhs)}")
        else:
            lines.append(f"{pad}{n.kind} | {render(n.lhs)} | {render(n.rhs)}")
        for c in reversed(n.children):
            stack.append((c, lvl + 1))
    return "\n".join(lines) + "\n"


def parse_substitution(text: str) -> Substitution:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"substitution must be braced: {text!r}")
    tm: dict[str, Term] = {}
    am: dict[str, Action] = {}
    body = text[1:-1].strip()
    for part in filter(None, (p.strip() for p in body.split(";"))):
        if ":=" not in part:
            raise ValueError(f"bad binding {part!r}")
        k, v = (x.strip() for x in part.split(":=", 1))
        if k.startswith("@"):
            am[k.lstrip("@")] = parse_action(v)
        else:
            tm[k] = parse(v)
    return Substitution(tm, am)


_LINE = re.compile(r"^((?:  )*)(\S.*)$")


def deserialize(text: str) -> Derivation:
    """Inverse of :func:`serialize`; structural consistency is re-checked."""
    rows: list[tuple[int, list[str], int]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        m = _LINE.match(raw)
        if not m:
            raise DerivationError(f"line {no}: bad indentation")
        rows.append((len(m.group(1)) // len(_INDENT), [f.strip() for f in m.group(2).split("|")], no))
    if not rows:
        raise DerivationError("empty derivation text")
    pos = 0

    def node(level: int) -> Derivation:
        nonlocal pos
        lvl, f, no = rows[pos]
        if lvl != level:
            raise DerivationError(f"line {no}: expected indentation level {level}")
        pos += 1
        kind = f[0]
        try:
            if kind == "REFL":
                return refl(parse(f[1]))
            if kind == "AX":
                name, orient, eq, sub, lhs, rhs = f[1:7]
                return Derivation("AX", parse(lhs), parse(rhs), (), name, orient, eq == "eq",
                                  parse_substitution(sub))
            arity = {"TRANS": 2, "SUM": 2, "PREFIX": 1, "SYM": 1}.get(kind)
            if arity is None:
                raise DerivationError(f"line {no}: unknown rule {kind!r}")
            if kind == "PREFIX":
                act, lhs, rhs = parse_action(f[1]), parse(f[2]), parse(f[3])
            else:
                act, lhs, rhs = None, parse(f[1]), parse(f[2])
        except (ValueError, IndexError) as e:
            if isinstance(e, DerivationError):
                raise
            raise DerivationError(f"line {no}: {e}") from None
        kids = tuple(node(level + 1) for _ in range(arity))
        return Derivation(kind, lhs, rhs, kids, action=act)

    d = node(0)
    if pos != len(rows):
        raise DerivationError(f"line {rows[pos][2]}: trailing lines")
    return d


def conclusion_text(d: Derivation, equivalence: bool) -> str:
    return str(Conclusion(d.lhs, d.rhs, equivalence))


def substitution(terms: Mapping[str, "Term | str"] | None = None,
                 actions: Mapping[str, "Action | str"] | None = None) -> Substitution:
    return Substitution.of(terms, actions)

"""Process terms over 0, variables, action prefixing and binary choice.

Terms are hash-consed: building the same tree twice yields the same
object, so structural equality is identity and terms are cheap dictionary
keys.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple

TAU_WORD = "tau"
VAR_RE = re.compile(r"[w-z][0-9]*\Z")
IDENT_RE = re.compile(r"[a-z][a-z0-9_]*")


class Action(NamedTuple):
    kind: str  # "tau" | "name" | "meta" | "metaany"
    name: str

    @property
    def is_tau(self) -> bool:
        return self.kind == "tau"

    @property
    def is_meta(self) -> bool:
        return self.kind in ("meta", "metaany")

    def __str__(self) -> str:
        if self.kind == "tau":
            return TAU_WORD
        if self.kind == "meta":
            return "@" + self.name
        if self.kind == "metaany":
            return "@@" + self.name
        return self.name


TAU = Action("tau", TAU_WORD)


def name(n: str) -> Action:
    if n == TAU_WORD:
        raise ValueError("'tau' is reserved and cannot be used as an action name")
    return Action("name", n)


def meta(n: str) -> Action:
    return Action("meta", n)


def meta_any(n: str) -> Action:
    return Action("metaany", n)


def action_key(a: Action) -> tuple:
    # visible names first, tau last
    order = {"name": 0, "meta": 1, "metaany": 2, "tau": 3}
    return (order[a.kind], a.name)


# ---------------------------------------------------------------- terms


class Term:
    __slots__ = ()

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __repr__(self) -> str:
        return f"Term({render(self)!r})"

    def __str__(self) -> str:
        return render(self)

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        return (parse, (render(self),))


class Nil(Term):
    __slots__ = ()
    _instance: "Nil | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance


class Var(Term):
    __slots__ = ("name",)
    _table: dict = {}

    def __new__(cls, name: str):
        t = cls._table.get(name)
        if t is None:
            t = object.__new__(cls)
            object.__setattr__(t, "name", name)
            cls._table[name] = t
        return t


class Prefix(Term):
    __slots__ = ("action", "body")
    _table: dict = {}

    def __new__(cls, action: Action, body: Term):
        key = (action, body)
        t = cls._table.get(key)
        if t is None:
            t = object.__new__(cls)
            object.__setattr__(t, "action", action)
            object.__setattr__(t, "body", body)
            cls._table[key] = t
        return t


class Sum(Term):
    __slots__ = ("left", "right")
    _table: dict = {}

    def __new__(cls, left: Term, right: Term):
        key = (left, right)
        t = cls._table.get(key)
        if t is None:
            t = object.__new__(cls)
            object.__setattr__(t, "left", left)
            object.__setattr__(t, "right", right)
            cls._table[key] = t
        return t


NIL = Nil()


def sum_of(parts: Iterable[Term]) -> Term:
    """Right-nested sum of ``parts``; the empty sum is 0."""
    parts = list(parts)
    if not parts:
        return NIL
    acc = parts[-1]
    for p in reversed(parts[:-1]):
        acc = Sum(p, acc)
    return acc


def prefix_n(a: Action, n: int, body: Term) -> Term:
    for _ in range(n):
        body = Prefix(a, body)
    return body


def summands(t: Term) -> list[Term]:
    """Flatten nested sums; 0 summands are dropped."""
    out: list[Term] = []
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Sum):
            stack.append(s.right)
            stack.append(s.left)
        elif s is not NIL:
            out.append(s)
    return out


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "+.()0":
            toks.append((c, c, i))
            i += 1
        elif c == "@":
            j = i + 2 if text.startswith("@@", i) else i + 1
            m = IDENT_RE.match(text, j)
            if not m:
                raise ParseError("expected identifier after '@'", j)
            if m.group() == TAU_WORD:
                raise ParseError("'tau' cannot name an action metavariable", j)
            kind = "metaany" if j == i + 2 else "meta"
            toks.append((kind, m.group(), i))
            i = m.end()
        else:
            m = IDENT_RE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {c!r}", i)
            toks.append(("ident", m.group(), i))
            i = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind: str):
        tok = self.peek()
        if tok[0] != kind:
            what = tok[1] or "end of input"
            raise ParseError(f"expected {kind!r} but found {what!r}", tok[2])
        self.i += 1
        return tok

    def term(self) -> Term:
        parts = [self.prefix()]
        while self.peek()[0] == "+":
            self.i += 1
            parts.append(self.prefix())
        return sum_of(parts)

    def prefix(self) -> Term:
        kind, text, pos = self.peek()
        if kind in ("meta", "metaany"):
            self.i += 1
            self.take(".")
            return Prefix(Action(kind, text), self.prefix())
        if kind == "ident" and not VAR_RE.match(text):
            self.i += 1
            if self.peek()[0] != ".":
                if text == TAU_WORD:
                    raise ParseError("'tau' must be followed by '.'", pos)
                raise ParseError(f"action {text!r} must be followed by '.'", pos)
            self.i += 1
            act = TAU if text == TAU_WORD else Action("name", text)
            return Prefix(act, self.prefix())
        return self.atom()

    def atom(self) -> Term:
        kind, text, pos = self.peek()
        if kind == "0":
            self.i += 1
            return NIL
        if kind == "ident":
            self.i += 1
            return Var(text)
        if kind == "(":
            self.i += 1
            t = self.term()
            self.take(")")
            return t
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.take("eof")
    return t


def term(x: "Term | str") -> Term:
    """Accept either a term or its textual form."""
    return parse(x) if isinstance(x, str) else x


# ---------------------------------------------------------------- printing


@lru_cache(maxsize=None)
def render(t: Term) -> str:
    if t is NIL:
        return "0"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Prefix):
        body = render(t.body)
        if isinstance(t.body, Sum):
            body = f"({body})"
        return f"{t.action}.{body}"
    left = render(t.left)
    if isinstance(t.left, Sum):
        left = f"({left})"
    return f"{left} + {render(t.right)}"


# ---------------------------------------------------------------- AC normal form


@lru_cache(maxsize=None)
def summand_key(s: Term) -> tuple:
    """Total order on canonical summands: variables first, then prefixes."""
    if isinstance(s, Var):
        return (0, s.name)
    if isinstance(s, Prefix):
        return (1, action_key(s.action), body_key(s.body))
    raise TypeError(f"not a summand: {render(s)}")


def body_key(t: Term) -> tuple:
    return tuple(summand_key(s) for s in summands(t))


@lru_cache(maxsize=None)
def ac_canonical(t: Term) -> Term:
    """Normal form modulo associativity, commutativity, idempotence and 0."""
    if t is NIL or isinstance(t, Var):
        return t
    if isinstance(t, Prefix):
        return Prefix(t.action, ac_canonical(t.body))
    return canonical_sum(ac_canonical(s) for s in summands(t))


def canonical_sum(parts: Iterable[Term]) -> Term:
    """Sum of already-canonical summands (or canonical sums), deduplicated and sorted."""
    flat = {s for p in parts for s in summands(p)}
    return sum_of(sorted(flat, key=summand_key))


def ac_equal(t: Term, u: Term) -> bool:
    return ac_canonical(t) is ac_canonical(u)


# ---------------------------------------------------------------- metrics


@lru_cache(maxsize=None)
def depth(t: Term) -> int:
    if t is NIL or isinstance(t, Var):
        return 0
    if isinstance(t, Prefix):
        return 1 + depth(t.body)
    return max(depth(t.left), depth(t.right))


@lru_cache(maxsize=None)
def weak_depth(t: Term) -> int:
    if t is NIL or isinstance(t, Var):
        return 0
    if isinstance(t, Prefix):
        return weak_depth(t.body) + (0 if t.action.is_tau else 1)
    return max(weak_depth(t.left), weak_depth(t.right))


@lru_cache(maxsize=None)
def variables(t: Term) -> frozenset[str]:
    if t is NIL:
        return frozenset()
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Prefix):
        return variables(t.body)
    return variables(t.left) | variables(t.right)


@lru_cache(maxsize=None)
def actions(t: Term) -> frozenset[Action]:
    if t is NIL or isinstance(t, Var):
        return frozenset()
    if isinstance(t, Prefix):
        return actions(t.body) | {t.action}
    return actions(t.left) | actions(t.right)


def is_closed(t: Term) -> bool:
    return not variables(t)


def has_tau(t: Term) -> bool:
    return TAU in actions(t)


def has_meta(t: Term) -> bool:
    return any(a.is_meta for a in actions(t))


def initial_variables(t: Term) -> frozenset[str]:
    return frozenset(s.name for s in summands(t) if isinstance(s, Var))


@lru_cache(maxsize=None)
def guarded_variables(t: Term) -> frozenset[str]:
    """Variables with an occurrence under some prefix."""
    out: set[str] = set()
    for s in summands(t):
        if isinstance(s, Prefix):
            out |= variables(s.body)
    return frozenset(out)


def is_safe(t) -> bool:
    """No variable occurs both initially and under a prefix.

    Accepts a term or anything with ``lhs``/``rhs`` (checked as lhs + rhs).
    """
    if hasattr(t, "lhs") and hasattr(t, "rhs"):
        t = Sum(t.lhs, t.rhs)
    return not (initial_variables(t) & guarded_variables(t))


def subterm(t: Term, path: Iterable[int]) -> Term:
    """Follow a binary path: 0/1 pick the sides of a sum, 0 enters a prefix."""
    for step in path:
        if isinstance(t, Sum):
            t = t.left if step == 0 else t.right
        elif isinstance(t, Prefix) and step == 0:
            t = t.body
        else:
            raise IndexError(f"no position {step} in {render(t)}")
    return t


def replace_at(t: Term, path: list[int], new: Term) -> Term:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(t, Sum):
        if step == 0:
            return Sum(replace_at(t.left, rest, new), t.right)
        return Sum(t.left, replace_at(t.right, rest, new))
    if isinstance(t, Prefix) and step == 0:
        return Prefix(t.action, replace_at(t.body, rest, new))
    raise IndexError(f"no position {step} in {render(t)}")


def positions(t: Term, prefix: tuple = ()) -> Iterator[tuple[tuple[int, ...], Term]]:
    yield prefix, t
    if isinstance(t, Sum):
        yield from positions(t.left, prefix + (0,))
        yield from positions(t.right, prefix + (1,))
    elif isinstance(t, Prefix):
        yield from positions(t.body, prefix + (0,))


# ---------------------------------------------------------------- substitution


@dataclass(frozen=True)
class Substitution:
    """Simultaneous replacement of term variables and action metavariables."""

    terms: Mapping[str, Term] = field(default_factory=dict)
    actions: Mapping[str, Action] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", dict(self.terms))
        object.__setattr__(self, "actions", dict(self.actions))

    @classmethod
    def of(cls, terms: Mapping[str, "Term | str"] | None = None,
           actions: Mapping[str, "Action | str"] | None = None) -> "Substitution":
        tm = {k.lstrip("@"): term(v) for k, v in (terms or {}).items()}
        am = {}
        for k, v in (actions or {}).items():
            am[k.lstrip("@")] = v if isinstance(v, Action) else parse_action(v)
        return cls(tm, am)

    def _key(self):
        return (tuple(sorted(self.terms.items(), key=lambda kv: kv[0])),
                tuple(sorted(self.actions.items())))

    def __eq__(self, other):
        return isinstance(other, Substitution) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __bool__(self):
        return bool(self.terms or self.actions)

    def render(self) -> str:
        parts = [f"{k} := {render(v)}" for k, v in sorted(self.terms.items())]
        parts += [f"@{k} := {v}" for k, v in sorted(self.actions.items())]
        return "{" + "; ".join(parts) + "}"

    __str__ = render


def parse_action(text: str) -> Action:
    text = text.strip()
    if text == TAU_WORD:
        return TAU
    if text.startswith("@@"):
        return meta_any(text[2:])
    if text.startswith("@"):
        return meta(text[1:])
    if not IDENT_RE.fullmatch(text) or VAR_RE.match(text):
        raise ValueError(f"not an action: {text!r}")
    return Action("name", text)


class SubstitutionError(ValueError):
    pass


def map_action(a: Action, s: Substitution, ground: bool = False) -> Action:
    if not a.is_meta:
        return a
    b = s.actions.get(a.name)
    if b is None:
        if ground:
            raise SubstitutionError(f"unmapped action metavariable {a}")
        return a
    if a.kind == "meta" and (b.is_tau or b.kind == "metaany"):
        raise SubstitutionError(f"{a} ranges over visible actions only, cannot map to {b}")
    return b


def substitute(t: Term, s: Substitution, ground: bool = False) -> Term:
    memo: dict[Term, Term] = {}

    def go(u: Term) -> Term:
        r = memo.get(u)
        if r is not None:
            return r
        if u is NIL:
            r = u
        elif isinstance(u, Var):
            r = s.terms.get(u.name, u)
        elif isinstance(u, Prefix):
            r = Prefix(map_action(u.action, s, ground), go(u.body))
        else:
            r = Sum(go(u.left), go(u.right))
        memo[u] = r
        return r

    return go(t)


# ---------------------------------------------------------------- init-tau


def init_tau_term(t: Term) -> Term:
    """Rename the initial visible actions of a tau-free term into tau."""
    if has_tau(t):
        raise ValueError(f"init-tau expects a tau-free term: {render(t)}")
    return _init_tau(t)


def _init_tau(t: Term) -> Term:
    if t is NIL or isinstance(t, Var):
        return t
    if isinstance(t, Sum):
        return Sum(_init_tau(t.left), _init_tau(t.right))
    if t.action.kind == "metaany":
        raise ValueError(f"initial {t.action} may already denote tau")
    return Prefix(TAU, t.body)


# ---------------------------------------------------------------- alphabets


@dataclass(frozen=True)
class Alphabet:
    """A finite list of action names, or an unbounded supply of them."""

    names: tuple[str, ...] | None

    def __post_init__(self):
        if self.names is not None:
            if not self.names:
                raise ValueError("a finite alphabet must be nonempty")
            for n in self.names:
                if n == TAU_WORD or not IDENT_RE.fullmatch(n) or VAR_RE.match(n):
                    raise ValueError(f"invalid action name {n!r}")
            if len(set(self.names)) != len(self.names):
                raise ValueError("duplicate action names")

    @classmethod
    def of(cls, *names: str) -> "Alphabet":
        return cls(tuple(names))

    @classmethod
    def unbounded(cls) -> "Alphabet":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "Alphabet":
        text = text.strip()
        if text == "unbounded":
            return cls.unbounded()
        return cls(tuple(p.strip() for p in text.split(",") if p.strip()))

    @property
    def finite(self) -> bool:
        return self.names is not None

    def __len__(self) -> int:
        if self.names is None:
            raise ValueError("unbounded alphabet has no size")
        return len(self.names)

    def __bool__(self) -> bool:
        # an alphabet is never "empty"; keeps `alphabet or default` safe when unbounded
        return True

    def actions(self) -> list[Action]:
        if self.names is None:
            raise ValueError("cannot list an unbounded alphabet")
        return [Action("name", n) for n in self.names]

    def least(self) -> Action:
        if self.names is None:
            return Action("name", "a")
        return Action("name", min(self.names))

    def fresh(self, avoid: Iterable[str], hint: str = "a") -> str:
        """Mint a name outside ``avoid`` (and outside the declared names)."""
        taken = set(avoid) | set(self.names or ())
        base = hint if IDENT_RE.fullmatch(hint) and not VAR_RE.match(hint) else "a"
        cand, i = base, 0
        while cand in taken or cand == TAU_WORD or VAR_RE.match(cand):
            i += 1
            cand = f"{base}_{i}"
        return cand

    def __str__(self) -> str:
        return "unbounded" if self.names is None else ",".join(self.names)


def action_names(t: Term) -> frozenset[str]:
    return frozenset(a.name for a in actions(t) if a.kind == "name")

"""Axioms, axiomatizations, the built-in catalog and the concrete-to-weak
transformation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .semantics import RelationId, check_closed
from .syntax import (NIL, TAU, Alphabet, Prefix, Sum, Term, has_tau, init_tau_term,
                     is_safe, meta, parse, render)


class AxiomError(ValueError):
    pass


@dataclass(frozen=True)
class Axiom:
    name: str
    lhs: Term
    rhs: Term
    equation: bool
    primitive: bool = True

    @property
    def shape(self) -> str:
        return "equation" if self.equation else "inequation"

    @property
    def symbol(self) -> str:
        return "==" if self.equation else "<="

    def render(self) -> str:
        return f"{self.name} : {render(self.lhs)} {self.symbol} {render(self.rhs)}"

    __str__ = render

    def renamed(self, name: str) -> "Axiom":
        return Axiom(name, self.lhs, self.rhs, self.equation, self.primitive)


def axiom(name: str, text: str, primitive: bool = True) -> Axiom:
    """Build an axiom from ``"lhs <= rhs"`` or ``"lhs == rhs"``."""
    for sym, eq in (("==", True), ("<=", False)):
        if sym in text:
            left, right = text.split(sym, 1)
            return Axiom(name, parse(left), parse(right), eq, primitive)
    raise AxiomError(f"axiom {name!r} needs '<=' or '==': {text!r}")


CORE_TEXT = {
    "A1": "x + y == y + x",
    "A2": "(x + y) + z == x + (y + z)",
    "A3": "x + x == x",
    "A4": "x + 0 == x",
}
CORE = tuple(axiom(n, t) for n, t in CORE_TEXT.items())
CORE_NAMES = tuple(CORE_TEXT)


@dataclass(frozen=True)
class Axiomatization:
    """A named, ordered axiom list with a mode; A1-4 are always members."""

    name: str
    axioms: tuple[Axiom, ...]
    mode: str = "preorder"
    alphabet: Alphabet | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("preorder", "equivalence"):
            raise AxiomError(f"unknown mode {self.mode!r}")
        axs = list(self.axioms)
        have = {a.name for a in axs}
        missing = [a for a in CORE if a.name not in have]
        axs = missing + axs
        index: dict[str, Axiom] = {}
        for a in axs:
            if a.name in index:
                raise AxiomError(f"duplicate axiom name {a.name!r}")
            if self.mode == "equivalence" and not a.equation:
                raise AxiomError(f"inequation {a.name} in an equivalence axiomatization")
            index[a.name] = a
        for a in CORE:
            if index[a.name].lhs is not a.lhs or index[a.name].rhs is not a.rhs:
                raise AxiomError(f"{a.name} must be the standard axiom {a}")
        object.__setattr__(self, "axioms", tuple(axs))
        object.__setattr__(self, "_index", index)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(self.axioms)

    def __len__(self) -> int:
        return len(self.axioms)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def get(self, name: str) -> Axiom:
        try:
            return self._index[name]
        except KeyError:
            raise AxiomError(f"unknown axiom {name!r} in {self.name}") from None

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.axioms]

    @property
    def equivalence(self) -> bool:
        return self.mode == "equivalence"

    def extra(self) -> list[Axiom]:
        """Axioms other than A1-4."""
        return [a for a in self.axioms if a.name not in CORE_NAMES]

    def extend(self, axioms: Iterable[Axiom], name: str | None = None,
               mode: str | None = None) -> "Axiomatization":
        have = set(self.names)
        new = list(self.axioms) + [a for a in axioms if a.name not in have]
        return Axiomatization(name or self.name, tuple(new), mode or self.mode, self.alphabet)

    def equational_fragment(self) -> "Axiomatization":
        return Axiomatization(self.name + "/eq", tuple(a for a in self.axioms if a.equation),
                              "equivalence", self.alphabet)

    def render(self) -> str:
        lines = [f"# {self.name}", f"mode {self.mode}"]
        if self.alphabet is not None:
            lines.append(f"alphabet {self.alphabet}")
        lines += [a.render() for a in self.axioms]
        return "\n".join(lines) + "\n"


class AxiomFileError(AxiomError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_axiomatization(text: str, name: str = "file") -> Axiomatization:
    mode = None
    alphabet = None
    axs: list[Axiom] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)
        if head[0] == "mode" and ":" not in line:
            mode = head[1].strip() if len(head) > 1 else ""
            if mode not in ("preorder", "equivalence"):
                raise AxiomFileError(f"bad mode {mode!r}", no)
            continue
        if head[0] == "alphabet" and ":" not in line:
            try:
                alphabet = Alphabet.parse(head[1] if len(head) > 1 else "")
            except ValueError as e:
                raise AxiomFileError(str(e), no) from None
            continue
        if ":" not in line:
            raise AxiomFileError("expected 'NAME : TERM <= TERM'", no)
        nm, body = line.split(":", 1)
        try:
            axs.append(axiom(nm.strip(), body))
        except ValueError as e:
            raise AxiomFileError(str(e), no) from None
    if mode is None:
        mode = "equivalence" if all(a.equation for a in axs) and axs else "preorder"
    try:
        return Axiomatization(name, tuple(axs), mode, alphabet)
    except AxiomError as e:
        raise AxiomFileError(str(e), 0) from None


# ---------------------------------------------------------------- catalog

_SCHEMAS = {
    "IF1": "@a.(x + y) <= @a.x + @a.y",
    "IF2": "@a.x + @a.(y + z) == @a.(x + y) + @a.x + @a.(y + z)",
    "WIF1": "@@a.(tau.x + tau.y) == @@a.x + @@a.y",
    "WIF2": "tau.x + y == tau.x + tau.(x + y)",
    "WIF2'": "tau.(x + y) <= tau.x + y",
    "W1": "x <= tau.x",
    "W1'": "x <= tau.x + y",
    "W2": "tau.x <= x",
    "WE": "x == tau.x",
    "F1": "@a.(x + y) <= @a.x + @a.(y + z)",
    "FE1": "@a.x + @a.(y + z) == @a.x + @a.(x + y) + @a.(y + z)",
    "FE2*": "@a.(@b.x + w) + @a.(@b.y + z) == @a.(@b.x + @b.y + w) + @a.(@b.y + z)",
    "FE2": "@a.(x + @b.y) + @a.(x + @b.y + @b.z) == @a.(x + @b.y + @b.z)",
    "WFE": "@a.x + tau.(@a.y + z) == tau.(@a.x + @a.y + z)",
    "CTE": "@a.(@b.w + @c.x + y + z) == @a.(@b.w + y) + @a.(@c.x + z)",
    "CT1": "@a.x <= @a.x + y",
    "CT2": "@a.(@b.w + @c.x + y + z) <= @a.(@b.w + y) + @a.(@c.x + z)",
    "TE": "@a.x + @a.y == @a.(x + y)",
    "T1": "@a.(x + y) <= @a.x + @a.y",
    "T2": "x <= x + y",
    "D1": "tau.(tau.x + y) == tau.x + y",
}

# primed forms come in a visible and a tau instance
_PRIMED = {"F1'": "F1", "FE1'": "FE1", "FE2'": "FE2", "CTE'": "CTE", "CT1'": "CT1",
           "CT2'": "CT2", "TE'": "TE", "T1'": "T1", "IF1'": "IF1", "IF2'": "IF2"}

# the literal FE2 display, which is unsound; kept only for regression tests
FE2_LITERAL = "@a.(x + @b.y) + @a.(x + @b.y + @b.z) == @a.(x + @b.x + @b.z)"

NON_PRIMITIVE = {"D1"}


def _replace_action(t: Term, old, new) -> Term:
    if isinstance(t, Prefix):
        return Prefix(new if t.action == old else t.action, _replace_action(t.body, old, new))
    if isinstance(t, Sum):
        return Sum(_replace_action(t.left, old, new), _replace_action(t.right, old, new))
    return t


def _tau_instance(ax: Axiom, name: str) -> Axiom:
    # @a ranges over visible names, so this is a renaming rather than a substitution
    a = meta("a")
    return Axiom(name, _replace_action(ax.lhs, a, TAU), _replace_action(ax.rhs, a, TAU),
                 ax.equation, ax.primitive)


def _alphabet_names(alphabet: Alphabet | None) -> tuple[str, ...]:
    alphabet = alphabet or Alphabet.of("a", "b")
    if not alphabet.finite:
        raise AxiomError("this axiom is only defined over a finite alphabet")
    return alphabet.names


def f2(alphabet: Alphabet | None = None) -> Axiom:
    names = _alphabet_names(alphabet)
    left = " + ".join(f"{b}.x{i + 1}" for i, b in enumerate(names))
    return axiom("F2", f"{left} <= {left} + y")


def init_tau_f2(alphabet: Alphabet | None = None) -> Axiom:
    names = _alphabet_names(alphabet)
    left = " + ".join(f"tau.x{i + 1}" for i in range(len(names)))
    return axiom("init-tau(F2)", f"{left} <= {left} + y")


def _fe3_text(alphabet: Alphabet | None, head: str) -> str:
    names = _alphabet_names(alphabet)
    zs = " + ".join(f"{b}.z{i + 1}" for i, b in enumerate(names))
    return f"{head}.(x + {zs}) + {head}.(x + y + {zs}) == {head}.(x + y + {zs})"


def fe3(alphabet: Alphabet | None = None) -> Axiom:
    return axiom("FE3", _fe3_text(alphabet, "@a"))


def fe3_tau(alphabet: Alphabet | None = None) -> Axiom:
    return axiom("FE3'", _fe3_text(alphabet, "tau"))


def d2(n: int) -> Axiom:
    if n < 0:
        raise AxiomError("D2 needs n >= 0")
    xs = [f"x{i + 1}" for i in range(n)]
    inner = " + ".join([f"tau.{x}" for x in xs] + ["y"])
    right = " + ".join([f"@@a.{x}" for x in xs] + [f"@@a.({' + '.join(xs + ['y'])})"])
    return axiom(f"D2({n})", f"@@a.({inner}) == {right}", primitive=False)


def get_axiom(name: str, alphabet: Alphabet | None = None) -> Axiom:
    """Look up a single catalog axiom by name (e.g. ``IF1``, ``F1'/tau``, ``D2(2)``)."""
    if name in CORE_TEXT:
        return next(a for a in CORE if a.name == name)
    if name in _SCHEMAS:
        return axiom(name, _SCHEMAS[name], primitive=name not in NON_PRIMITIVE)
    if name == "F2":
        return f2(alphabet)
    if name == "init-tau(F2)":
        return init_tau_f2(alphabet)
    if name == "FE3":
        return fe3(alphabet)
    if name == "FE3'":
        return fe3_tau(alphabet)
    if name.startswith("D2(") and name.endswith(")"):
        return d2(int(name[3:-1]))
    if "/" in name:
        base, which = name.split("/", 1)
        if base in _PRIMED and which in ("a", "tau"):
            src = get_axiom(_PRIMED[base], alphabet)
            return src.renamed(name) if which == "a" else _tau_instance(src, name)
    raise AxiomError(f"unknown axiom {name!r}")


def primed_pair(base: str) -> list[str]:
    return [f"{base}/a", f"{base}/tau"]


_COMPOSITES = {
    "A1-4": ((), "equivalence"),
    "IF-gc": (("IF1", "IF2"), "preorder"),
    "WIF-gc": (("WIF1", "WIF2'", "W1"), "preorder"),
    "WF-gc": (("WIF1", "WIF2'", "W1'"), "preorder"),
    "WFE-gc": (("WIF1", "WIF2", "WFE"), "equivalence"),
    "F-gc": (("F1",), "preorder"),
    "FE-gc": (("FE1", "FE2"), "equivalence"),
    "CTE-gc": (("CTE",), "equivalence"),
    "CT-gc": (("CT1", "CT2"), "preorder"),
    "TE-gc": (("TE",), "equivalence"),
    "T-gc": (("T1", "T2"), "preorder"),
    "WCTE-gc": (("WIF1", "WIF2", "CTE"), "equivalence"),
    "WCT-gc": (("WIF1", "WIF2'", "W1'", "CT1'/a", "CT1'/tau"), "preorder"),
    "WTE-gc": (("WE", "TE"), "equivalence"),
    "WT-gc": (("T1'/a", "T1'/tau", "T2", "WE"), "preorder"),
}

CATALOG_AXIOMS = (list(_SCHEMAS) + ["F2", "FE3", "FE3'"]
                  + [n for b in _PRIMED for n in primed_pair(b)]
                  + ["D2(1)", "D2(2)", "D2(3)"])


def catalog_keys() -> list[str]:
    return list(_COMPOSITES) + CATALOG_AXIOMS


def catalog(name: str, alphabet: Alphabet | None = None) -> Axiomatization:
    """A composite catalog set, or A1-4 plus a single named axiom."""
    key = _resolve_key(name)
    if key in _COMPOSITES:
        names, mode = _COMPOSITES[key]
        axs = tuple(get_axiom(n, alphabet) for n in names)
        return Axiomatization(key, axs, mode, alphabet)
    ax = get_axiom(key, alphabet)
    return Axiomatization(key, (ax,), "equivalence" if ax.equation else "preorder", alphabet)


def _resolve_key(name: str) -> str:
    if name in _COMPOSITES or name in CATALOG_AXIOMS or name in CORE_TEXT:
        return name
    low = name.lower()
    for k in list(_COMPOSITES) + CATALOG_AXIOMS:
        if k.lower() == low:
            return k
    raise AxiomError(f"unknown catalog key {name!r}")


def combine(name: str, *axiom_names: str, mode: str | None = None,
            alphabet: Alphabet | None = None) -> Axiomatization:
    axs = tuple(get_axiom(n, alphabet) for n in axiom_names)
    if mode is None:
        mode = "equivalence" if all(a.equation for a in axs) else "preorder"
    return Axiomatization(name, axs, mode, alphabet)


# ---------------------------------------------------------------- init-tau and the transformation


def init_tau_axiom(ax: Axiom) -> Axiom:
    if has_tau(ax.lhs) or has_tau(ax.rhs):
        raise AxiomError(f"{ax.name} contains tau")
    if not is_safe(ax):
        raise AxiomError(f"{ax.name} is not safe")
    lhs, rhs = init_tau_term(ax.lhs), init_tau_term(ax.rhs)
    if lhs is ax.lhs and rhs is ax.rhs:
        return ax
    return Axiom(f"init-tau({ax.name})", lhs, rhs, ax.equation, ax.primitive)


def _check_concrete(E: Axiomatization):
    for a in E:
        if has_tau(a.lhs) or has_tau(a.rhs):
            raise AxiomError(f"{a.name} contains tau; a concrete axiomatization is required")
        if not is_safe(a):
            raise AxiomError(f"{a.name} is not safe")


def init_tau_axiomatization(E: Axiomatization) -> Axiomatization:
    _check_concrete(E)
    out = []
    for a in E:
        t = init_tau_axiom(a)
        if t is not a:
            out.append(t)
    return Axiomatization(f"init-tau({E.name})", tuple(out), E.mode, E.alphabet)


def lifted_axioms(E: Axiomatization) -> Axiomatization:
    """E together with init-tau(E)."""
    return E.extend(init_tau_axiomatization(E).extra(), name=f"{E.name}+init-tau")


_TAU0 = Prefix(TAU, NIL)


def transform_weak(E: Axiomatization, rel: RelationId | str, w1: bool | None = None,
                   w2: bool | None = None, we: bool | None = None) -> Axiomatization:
    """E, init-tau(E), WIF1-2, plus W1/W2 (preorders) or WE (equivalences).

    The W1/W2/WE clauses are decided on the witness pairs (0, tau.0) and
    (tau.0, 0) unless forced by the keyword overrides.
    """
    if isinstance(rel, str):
        rel = RelationId.parse(rel)
    if not rel.weak:
        raise AxiomError(f"transform_weak needs a weak relation, got {rel}")
    if rel.equivalence != E.equivalence:
        raise AxiomError(f"{E.name} is a {E.mode} axiomatization but {rel} is not")
    _check_concrete(E)
    out = list(E.axioms) + init_tau_axiomatization(E).extra()
    out += [get_axiom("WIF1"), get_axiom("WIF2")]
    if rel.equivalence:
        if we if we is not None else check_closed(rel, NIL, _TAU0):
            out.append(get_axiom("WE"))
    else:
        if w1 if w1 is not None else check_closed(rel, NIL, _TAU0):
            out.append(get_axiom("W1"))
        if w2 if w2 is not None else check_closed(rel, _TAU0, NIL):
            out.append(get_axiom("W2"))
    seen: dict[str, Axiom] = {}
    for a in out:
        seen.setdefault(a.name, a)
    return Axiomatization(f"A({E.name},{rel})", tuple(seen.values()), E.mode, E.alphabet)

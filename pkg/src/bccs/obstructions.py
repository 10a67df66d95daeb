"""Negative results: the infinite (in)equation families that no finite sound
axiomatization can derive, the witness predicates that separate their two
sides, and auditable certificates tying the two together."""

from __future__ import annotations

from dataclasses import dataclass, field

from .axioms import Axiom, Axiomatization, AxiomError, parse_axiomatization
from .semantics import (RelationId, check_closed, completed_traces, refute_open,
                        show_trace, tau_successors, transitions, weak_completed_traces,
                        weak_traces, weak_traces_var)
from .syntax import (NIL, TAU, Action, Alphabet, Prefix, Substitution, Sum, Term, Var,
                     body_key, has_tau, is_closed, name, prefix_n, render, substitute,
                     sum_of, term, variables, weak_depth)

FAMILIES = ("wif-eq", "if-eq", "wif-pre", "if-pre", "singleton")

# family -> (relation it is sound for, witness predicate, step kind, transfer direction)
_PROFILE = {
    "wif-eq": ("wif-eq", "wct-tau", "tau", "left-to-right"),
    "if-eq": ("if-eq", "wct-tau", "action", "left-to-right"),
    "wif-pre": ("wif-pre", "notrace-tau", "tau", "left-to-right"),
    "if-pre": ("if-pre", "notrace-tau", "action", "left-to-right"),
    "singleton": ("wif-pre", "wtv-short", None, "right-to-left"),
}


class FamilyError(ValueError):
    pass


class CertificateRefused(RuntimeError):
    """The axiomatization failed the soundness sweep, so no certificate applies."""

    def __init__(self, msg: str, counterexample=None):
        super().__init__(msg)
        self.counterexample = counterexample


def _family_id(fid: str) -> str:
    f = fid.strip().lower()
    if f not in FAMILIES:
        raise FamilyError(f"unknown family {fid!r}; expected one of {', '.join(FAMILIES)}")
    return f


def default_alphabet(fid: str) -> Alphabet:
    return Alphabet.of("a") if _family_id(fid) == "singleton" else Alphabet.of("a", "b")


def family_relation(fid: str) -> RelationId:
    return RelationId.parse(_PROFILE[_family_id(fid)][0])


def family(fid: str, m: int, alphabet: Alphabet | None = None) -> Axiom:
    """The m-th member of a family, built literally (no AC normalization)."""
    fid = _family_id(fid)
    if m < 0:
        raise FamilyError("m must be a natural number")
    A = alphabet or default_alphabet(fid)
    if fid in ("wif-pre", "if-pre"):
        if not A.finite or len(A) < 2:
            raise FamilyError(f"{fid} needs a finite alphabet with at least two actions")
    if fid == "singleton" and (not A.finite or len(A) != 1):
        raise FamilyError("singleton is only sound over a one-letter alphabet")
    a = A.least()
    x = Var("x")

    def an(k: int, body: Term = NIL) -> Term:
        return prefix_n(a, k, body)

    if fid == "wif-eq":
        both = Prefix(TAU, Sum(an(m), an(2 * m)))
        lhs, rhs = Sum(Prefix(TAU, an(2 * m)), both), both
    elif fid == "if-eq":
        both = Prefix(a, Sum(an(m), an(2 * m)))
        lhs, rhs = Sum(an(2 * m + 1), both), both
    elif fid in ("wif-pre", "if-pre"):
        head = TAU if fid == "wif-pre" else a
        parts = [Prefix(head, Sum(an(m, x), x))]
        parts += [Prefix(head, Sum(an(m, x), an(m, Prefix(b, NIL)))) for b in A.actions()]
        big = sum_of(parts)
        extra = Prefix(TAU, an(m, x)) if fid == "wif-pre" else an(m + 1, x)
        lhs, rhs = Sum(extra, big), big
    else:
        lhs, rhs = an(m, x), Sum(an(m, x), x)
    return Axiom(f"{fid}[{m}]", lhs, rhs, fid.endswith("-eq"), primitive=False)


# ---------------------------------------------------------------- soundness


@dataclass
class SoundnessReport:
    status: str  # exact-sound | no-counterexample | unsound
    counterexample: Substitution | None = None
    bound: int | None = None

    @property
    def ok(self) -> bool:
        return self.status != "unsound"

    def describe(self) -> str:
        if self.status == "exact-sound":
            return "exact-sound"
        if self.status == "no-counterexample":
            return f"no counterexample up to bound {self.bound}"
        return f"unsound under {self.counterexample.render()}"


def check_axiom_sound(ax: Axiom, r: RelationId | str, bound: int = 2,
                      alphabet: Alphabet | None = None, limit: int = 2000,
                      seed: int = 0) -> SoundnessReport:
    r = RelationId.parse(r) if isinstance(r, str) else r
    if ax.equation and not r.equivalence:
        r = r.as_equivalence()
    if is_closed(ax.lhs) and is_closed(ax.rhs):
        ok = check_closed(r, ax.lhs, ax.rhs)
        return SoundnessReport("exact-sound" if ok else "unsound",
                               None if ok else Substitution({}), None)
    A = alphabet if alphabet is not None and alphabet.finite else Alphabet.of("a", "b")
    cex = refute_open(r, ax.lhs, ax.rhs, bound, A, limit=limit, seed=seed)
    if cex is None:
        return SoundnessReport("no-counterexample", None, bound)
    return SoundnessReport("unsound", cex, bound)


def check_family_sound(fid: str, m: int, bound: int = 2,
                       alphabet: Alphabet | None = None, limit: int = 2000) -> SoundnessReport:
    fid = _family_id(fid)
    A = alphabet or default_alphabet(fid)
    return check_axiom_sound(family(fid, m, A), family_relation(fid), bound, A, limit)


# ---------------------------------------------------------------- witness predicates


def _step_targets(t: Term, step: str | Action | None) -> list[Term]:
    if step is None or step == "tau" or step == TAU:
        out = tau_successors(t)
    else:
        a = name(step) if isinstance(step, str) else step
        out = {t2 for b, t2 in transitions(t) if b == a}
    return sorted(out, key=body_key)


def _closed_view(t: Term) -> Term:
    vs = variables(t)
    return substitute(t, Substitution({v: NIL for v in vs})) if vs else t


def _power(a: Action, k: int) -> tuple:
    return (a.name,) * k


def wct_witness(t: Term, m: int, step="tau", letter: Action | None = None) -> Term | None:
    """Some t' reached by a step with completed traces exactly {a^{2m}}.

    With ``step="tau"`` the step is a weak tau move and traces are weak;
    with an action the step is that single strong move."""
    a = letter or name("a")
    want = frozenset([_power(a, 2 * m)])
    weak = step in (None, "tau") or step == TAU
    for t2 in _step_targets(t, step):
        ct = weak_completed_traces(t2) if weak else completed_traces(t2)
        if ct == want:
            return t2
    return None


def _no_short_traces(t: Term, m: int, var: str, letter: Action) -> bool:
    if (var,) in weak_traces_var(t):
        return False
    head = _power(letter, m)
    return not any(len(tr) == m + 1 and tr[:m] == head for tr in weak_traces(_closed_view(t)))


def notrace_witness(t: Term, m: int, step="tau", var: str = "x",
                    letter: Action | None = None) -> Term | None:
    """Some t^ reached by a step having neither the weak trace ``var``
    nor any weak trace a^m b."""
    a = letter or name("a")
    for t2 in _step_targets(t, step):
        if _no_short_traces(t2, m, var, a):
            return t2
    return None


def wtv_short(t: Term, m: int, var: str = "x", letter: Action | None = None) -> bool:
    """``var`` is a variable-ending weak trace of t, but a^k var is not for 1 <= k < m."""
    a = letter or name("a")
    vt = weak_traces_var(t)
    if (var,) not in vt:
        return False
    return all(_power(a, k) + (var,) not in vt for k in range(1, m))


def witness(kind: str, t: "Term | str", m: int, step="tau", var: str = "x",
            letter: Action | None = None) -> Term | None:
    """Evaluate a witness predicate; returns the witness term or None.

    For ``wtv-short`` the witness is t itself when the predicate holds."""
    t = term(t)
    if kind == "wct-tau":
        if not is_closed(t):
            raise ValueError("wct-tau is defined on closed terms")
        return wct_witness(t, m, step, letter)
    if kind == "notrace-tau":
        return notrace_witness(t, m, step, var, letter)
    if kind == "wtv-short":
        return t if wtv_short(t, m, var, letter) else None
    raise ValueError(f"unknown witness kind {kind!r}")


def _side_condition(fid: str, rhs: Term, m: int, a: Action) -> tuple[str, bool]:
    if fid == "wif-eq":
        got = weak_completed_traces(rhs)
        allowed = {_power(a, m), _power(a, 2 * m)}
        label = f"WCT(rhs) = {_show_set(got)} within {_show_set(allowed)}"
        return label, got <= allowed
    if fid == "if-eq":
        got = completed_traces(rhs)
        allowed = {_power(a, m + 1), _power(a, 2 * m + 1)}
        label = f"CT(rhs) = {_show_set(got)} within {_show_set(allowed)}"
        return label, got <= allowed
    return "none", True


def _show_set(s) -> str:
    return "{" + ", ".join(sorted(show_trace(t) for t in s)) + "}"


# ---------------------------------------------------------------- certificates


@dataclass
class Certificate:
    family: str
    m: int
    e_depth: int
    alphabet: Alphabet
    axioms: list[Axiom]
    dropped: list[str]
    goal: Axiom
    predicate: str
    step: str
    transfer: str
    lhs_witness: Term | None
    rhs_witness: Term | None
    side_condition: str
    side_ok: bool
    soundness: str
    verdict: str
    notes: list[str] = field(default_factory=list)

    def transfer_violated(self) -> bool:
        if self.transfer == "left-to-right":
            return self.lhs_witness is not None and self.rhs_witness is None
        return self.rhs_witness is not None and self.lhs_witness is None

    def render(self) -> str:
        def w(t):
            return "none" if t is None else render(t)
        lines = [
            "certificate",
            f"family: {self.family}",
            f"alphabet: {self.alphabet}",
            f"m: {self.m}",
            f"e-depth: {self.e_depth}",
        ]
        lines += [f"axiom: {a.render()}" for a in self.axioms]
        lines += [f"dropped: {n}" for n in self.dropped]
        lines += [
            f"goal: {render(self.goal.lhs)} {self.goal.symbol} {render(self.goal.rhs)}",
            f"predicate: {self.predicate}",
            f"step: {self.step}",
            f"transfer: {self.transfer}",
            f"lhs-witness: {w(self.lhs_witness)}",
            f"rhs-witness: {w(self.rhs_witness)}",
            f"side-condition: {self.side_condition} : {'holds' if self.side_ok else 'fails'}",
            f"soundness: {self.soundness}",
            f"verdict: {self.verdict}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    __str__ = render


def e_depth(axioms) -> int:
    return max((max(weak_depth(a.lhs), weak_depth(a.rhs)) for a in axioms), default=0)


def _evaluate(fid: str, m: int, A: Alphabet, goal: Axiom):
    _, pred, kind, _ = _PROFILE[fid]
    a = A.least()
    step = "tau" if kind == "tau" else (a.name if kind == "action" else "none")
    st = None if step == "none" else step
    if pred == "wtv-short":
        lw, rw = witness(pred, goal.lhs, m, letter=a), witness(pred, goal.rhs, m, letter=a)
    else:
        lw = witness(pred, goal.lhs, m, st, letter=a)
        rw = witness(pred, goal.rhs, m, st, letter=a)
    side, ok = _side_condition(fid, goal.rhs, m, a)
    return pred, step, lw, rw, side, ok


def _verdict(transfer_violated: bool, m: int, depth: int, side_ok: bool) -> str:
    if transfer_violated and m > depth and side_ok:
        return "non-derivable"
    return "inconclusive"


def obstruction_certificate(E: Axiomatization, fid: str, alphabet: Alphabet | None = None,
                            m: int | None = None, bound: int = 2, samples: int = 300,
                            seed: int = 0) -> Certificate:
    """Instantiate a family above the weak depth of E and record why E
    cannot derive that instance."""
    fid = _family_id(fid)
    A = alphabet or (E.alphabet if E.alphabet is not None and E.alphabet.finite
                     and (fid != "singleton" or len(E.alphabet) == 1) else None) \
        or default_alphabet(fid)
    r = family_relation(fid)
    concrete = fid.startswith("if")
    axioms = list(E)
    dropped: list[str] = []
    notes: list[str] = []
    if r.equivalence and not E.equivalence:
        frag = E.equational_fragment()
        dropped = [a.name for a in axioms if a.name not in frag]
        axioms = list(frag)
        notes.append("equational fragment used for an equation family")
    if concrete and any(has_tau(a.lhs) or has_tau(a.rhs) for a in axioms):
        raise AxiomError(f"{fid} concerns tau-free terms; {E.name} mentions tau")
    depth = e_depth(axioms)
    if m is None:
        m = depth + 1
    elif m <= depth:
        raise FamilyError(f"m = {m} does not exceed the axiom depth {depth}")

    for ax_ in axioms:
        if ax_.name in ("A1", "A2", "A3", "A4"):
            continue
        rep = check_axiom_sound(ax_, r, bound, A, limit=samples, seed=seed)
        if not rep.ok:
            raise CertificateRefused(f"{ax_.name} is not sound for {r}: {rep.describe()}",
                                     rep.counterexample)
    fam_rep = check_family_sound(fid, m, bound, A, limit=samples)
    if not fam_rep.ok:
        raise CertificateRefused(f"{fid}[{m}] is not sound: {fam_rep.describe()}")
    soundness = (f"axioms: no counterexample up to bound {bound} ({samples} samples each); "
                 f"goal: {fam_rep.describe()}")

    goal = family(fid, m, A)
    pred, step, lw, rw, side, ok = _evaluate(fid, m, A, goal)
    transfer = _PROFILE[fid][3]
    violated = (lw is not None and rw is None) if transfer == "left-to-right" \
        else (rw is not None and lw is None)
    return Certificate(fid, m, depth, A, axioms, dropped, goal, pred, step, transfer,
                       lw, rw, side, ok, soundness, _verdict(violated, m, depth, ok), notes)


def parse_certificate(text: str) -> dict:
    fields: dict = {"axiom": [], "dropped": [], "note": []}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "certificate":
        raise ValueError("not a certificate")
    for ln in lines[1:]:
        key, _, val = ln.partition(":")
        key, val = key.strip(), val.strip()
        if key in ("axiom", "dropped", "note"):
            fields[key].append(val)
        else:
            fields[key] = val
    return fields


def validate_certificate(text: str) -> bool:
    """Recompute every checkable field of a serialized certificate."""
    f = parse_certificate(text)
    try:
        fid = _family_id(f["family"])
        A = Alphabet.parse(f["alphabet"])
        m = int(f["m"])
        E = parse_axiomatization("\n".join(f["axiom"]), "certificate")
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed certificate: {exc}") from exc
    if e_depth(E) != int(f["e-depth"]):
        return False
    goal = family(fid, m, A)
    if f["goal"] != f"{render(goal.lhs)} {goal.symbol} {render(goal.rhs)}":
        return False
    pred, step, lw, rw, side, ok = _evaluate(fid, m, A, goal)
    if f["predicate"] != pred or f["step"] != step or f["transfer"] != _PROFILE[fid][3]:
        return False
    if f["lhs-witness"] != ("none" if lw is None else render(lw)):
        return False
    if f["rhs-witness"] != ("none" if rw is None else render(rw)):
        return False
    if f["side-condition"] != f"{side} : {'holds' if ok else 'fails'}":
        return False
    transfer = _PROFILE[fid][3]
    violated = (lw is not None and rw is None) if transfer == "left-to-right" \
        else (rw is not None and lw is None)
    return f["verdict"] == _verdict(violated, m, int(f["e-depth"]), ok)


__all__ = ["FAMILIES", "FamilyError", "CertificateRefused", "family", "family_relation",
           "default_alphabet", "SoundnessReport", "check_axiom_sound", "check_family_sound",
           "wct_witness", "notrace_witness", "wtv_short", "witness", "Certificate",
           "e_depth", "obstruction_certificate", "parse_certificate", "validate_certificate"]

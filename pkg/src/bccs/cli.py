"""Command-line driver.

Exit codes: 0 when the requested relation holds or the artifact was
produced, 1 when it fails or a proof is refused, 2 on bad usage or input.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import axioms as ax_mod
from .axioms import AxiomError, Axiomatization, catalog, parse_axiomatization, transform_weak
from .completeness import NotRelated, prove_if_ground, prove_weak_from_concrete, saturate
from .obstructions import (CertificateRefused, FamilyError, check_family_sound, family,
                           obstruction_certificate, validate_certificate)
from .omega import OmegaError, check_omega_requirements
from .proofs.core import DerivationError, check, deserialize, serialize
from .proofs.laws import LAW_KEYS, derived_law
from .semantics import (Observation, RelationId, check_closed, check_oracle, observe,
                        refute_open, show_trace)
from .syntax import Alphabet, ParseError, ac_canonical, is_closed, render, term


class InputError(click.ClickException):
    exit_code = 2


def _term(text: str):
    try:
        return term(text)
    except ParseError as exc:
        raise InputError(f"cannot parse {text!r}: {exc}") from None


def _rel(text: str) -> RelationId:
    try:
        return RelationId.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _alphabet(text: str | None) -> Alphabet | None:
    if text is None:
        return None
    try:
        return Alphabet.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _axioms(arg: str, alphabet: Alphabet | None = None) -> Axiomatization:
    path = Path(arg)
    try:
        if path.is_file():
            return parse_axiomatization(path.read_text(), path.stem)
        return catalog(arg, alphabet)
    except ax_mod.AxiomFileError as exc:
        raise InputError(f"{arg}: {exc}") from None
    except (AxiomError, KeyError, ValueError) as exc:
        raise InputError(f"{arg}: {exc}") from None


def _goal(text: str):
    for sym in ("<=", "=="):
        if sym in text:
            left, right = text.split(sym, 1)
            return _term(left), _term(right), sym
    raise InputError(f"goal needs '<=' or '==': {text!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
        click.echo(f"written to {out}")
    else:
        click.echo(text.rstrip("\n"))


alphabet_opt = click.option("--alphabet", default=None, help="a,b,... or 'unbounded'")
def _rel_option(default: str):
    return click.option("--rel", "rel_text", default=default, show_default=True,
                        help="{t,ct,f,if,wt,wct,wf,wif}[-pre|-eq]")


rel_opt = _rel_option("if-pre")
weak_rel_opt = _rel_option("wif-pre")
out_opt = click.option("--out", default=None, help="write the artifact to FILE")


@click.group()
def main():
    """Process-algebra axiomatizations: semantics, proofs and obstructions."""


@main.command()
@click.argument("terms", nargs=-1, required=True)
@click.option("--canonical", is_flag=True, help="normalize modulo A1-4")
def fmt(terms, canonical):
    """Parse and pretty-print terms."""
    for t in terms:
        x = _term(t)
        click.echo(render(ac_canonical(x) if canonical else x))


@main.command()
@click.argument("kind", type=click.Choice([o.value for o in Observation]))
@click.argument("t")
def obs(kind, t):
    """Print an observation set of a term, one entry per line."""
    try:
        items = observe(kind, _term(t))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for it in sorted(items, key=lambda x: (len(x), x) if isinstance(x, tuple) else (0, str(x))):
        click.echo(show_trace(it) if isinstance(it, tuple) else str(it))


@main.command(name="check")
@rel_opt
@alphabet_opt
@click.option("--bound", default=2, show_default=True, type=click.IntRange(0))
@click.option("--seed", default=0, show_default=True, type=int)
@click.argument("p")
@click.argument("q")
def check_cmd(rel_text, alphabet, bound, seed, p, q):
    """Decide P rel Q (closed) or search for a refuting closed instance (open)."""
    r, P, Q = _rel(rel_text), _term(p), _term(q)
    try:
        if is_closed(P) and is_closed(Q):
            ok = check_closed(r, P, Q)
            click.echo(f"{r}: {'holds' if ok else 'fails'}")
        else:
            click.echo(f"seed: {seed}")
            cex = refute_open(r, P, Q, bound, _alphabet(alphabet), seed=seed)
            ok = cex is None
            click.echo(f"{r}: " + (f"no counterexample up to bound {bound}" if ok
                                   else f"fails under {cex.render()}"))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    sys.exit(0 if ok else 1)


@main.command()
@rel_opt
@click.argument("p")
@click.argument("q")
def oracle(rel_text, p, q):
    """Decide P rel Q with the brute-force oracle and compare with the checker."""
    r, P, Q = _rel(rel_text), _term(p), _term(q)
    try:
        o = check_oracle(r, P, Q)
        c = check_closed(r, P, Q)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    click.echo(f"oracle: {'holds' if o else 'fails'}")
    click.echo(f"checker: {'holds' if c else 'fails'}")
    if o != c:
        click.echo("DISAGREEMENT")
        sys.exit(1)
    sys.exit(0 if o else 1)


@main.command(name="prove-if")
@click.argument("p")
@click.argument("q")
@out_opt
def prove_if(p, q, out):
    """Derive P <= Q from A1-4 + IF1-2 (closed, tau-free terms)."""
    try:
        d = prove_if_ground(_term(p), _term(q))
    except NotRelated as exc:
        click.echo(f"refused: {exc}")
        sys.exit(1)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(serialize(d), out)


@main.command(name="prove-weak")
@click.option("--axioms", "axioms_arg", default="IF-gc", show_default=True)
@weak_rel_opt
@click.argument("p")
@click.argument("q")
@out_opt
def prove_weak(axioms_arg, rel_text, p, q, out):
    """Derive P <= Q from the weak transformation of a concrete axiomatization."""
    E = _axioms(axioms_arg)
    r = _rel(rel_text)
    if axioms_arg.lower() not in ("if-gc",):
        raise InputError("only the impossible-futures prover is available (--axioms IF-gc)")
    try:
        d = prove_weak_from_concrete(E, prove_if_ground, _term(p), _term(q), r)
    except NotRelated as exc:
        click.echo(f"refused: {exc}")
        sys.exit(1)
    except (AxiomError, ValueError) as exc:
        click.echo(f"refused: {exc}")
        sys.exit(1)
    _emit(serialize(d), out)


@main.command()
@click.option("--axioms", "axioms_arg", required=True)
@weak_rel_opt
@out_opt
def transform(axioms_arg, rel_text, out):
    """Print the weak transformation of a concrete axiomatization."""
    try:
        W = transform_weak(_axioms(axioms_arg), _rel(rel_text))
    except (AxiomError, ValueError) as exc:
        raise InputError(str(exc)) from None
    _emit(W.render(), out)


@main.command(name="saturate")
@click.argument("q")
@click.option("--proof", is_flag=True, help="also print the derivation")
@out_opt
def saturate_cmd(q, proof, out):
    """Print the saturation of a closed tau-free term."""
    try:
        qbar, d = saturate(_term(q))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = render(qbar)
    if proof:
        text += "\n" + serialize(d)
    _emit(text, out)


@main.command(name="family")
@click.option("--family", "fid", required=True)
@click.option("--m", "m", required=True, type=click.IntRange(0))
@alphabet_opt
@click.option("--sound", is_flag=True, help="also run the soundness check")
@click.option("--bound", default=2, show_default=True, type=click.IntRange(0))
def family_cmd(fid, m, alphabet, sound, bound):
    """Print a member of an obstruction family."""
    A = _alphabet(alphabet)
    try:
        a = family(fid, m, A)
    except FamilyError as exc:
        raise InputError(str(exc)) from None
    click.echo(a.render())
    if sound:
        rep = check_family_sound(fid, m, bound, A)
        click.echo(f"soundness: {rep.describe()}")
        sys.exit(0 if rep.ok else 1)


@main.command()
@click.option("--axioms", "axioms_arg", required=True)
@click.option("--family", "fid", required=True)
@click.option("--m", "m", default=None, type=click.IntRange(0))
@alphabet_opt
@click.option("--bound", default=2, show_default=True, type=click.IntRange(0))
@click.option("--seed", default=0, show_default=True, type=int)
@out_opt
def obstruct(axioms_arg, fid, m, alphabet, bound, seed, out):
    """Issue a non-derivability certificate for a family member."""
    A = _alphabet(alphabet)
    E = _axioms(axioms_arg, A)
    try:
        cert = obstruction_certificate(E, fid, A, m=m, bound=bound, seed=seed)
    except CertificateRefused as exc:
        click.echo(f"refused: {exc}")
        sys.exit(1)
    except (FamilyError, AxiomError, ValueError) as exc:
        raise InputError(str(exc)) from None
    text = cert.render()
    if not validate_certificate(text):
        click.echo("certificate failed to re-validate")
        sys.exit(1)
    _emit(text, out)
    sys.exit(0 if cert.verdict == "non-derivable" else 1)


@main.command(name="omega-check")
@click.option("--axioms", "axioms_arg", required=True)
@click.option("--goal", required=True, help="'t <= u'")
@click.option("--source", default=None, help="axioms whose instances feed requirement 2")
@click.option("--samples", default=100, show_default=True, type=click.IntRange(1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--budget", default=2, show_default=True, type=click.IntRange(0))
def omega_check(axioms_arg, goal, source, samples, seed, budget):
    """Check the inverted-substitution requirements for a goal."""
    E = _axioms(axioms_arg)
    S = _axioms(source) if source else None
    t, u, _ = _goal(goal)
    click.echo(f"seed: {seed}")
    try:
        rep = check_omega_requirements(E, t, u, samples, seed, source=S, budget=budget)
    except OmegaError as exc:
        raise InputError(str(exc)) from None
    click.echo(rep.summary())
    sys.exit(0 if rep.ok else 1)


@main.command()
@click.option("--axioms", "axioms_arg", required=True)
@rel_opt
@alphabet_opt
@click.option("--count", default=500, show_default=True, type=click.IntRange(1))
@click.option("--bound", default=2, show_default=True, type=click.IntRange(0))
@click.option("--seed", default=0, show_default=True, type=int)
def sweep(axioms_arg, rel_text, alphabet, count, bound, seed):
    """Bounded soundness regression: sample closed instances of every axiom."""
    r = _rel(rel_text)
    A = _alphabet(alphabet)
    E = _axioms(axioms_arg, A)
    click.echo(f"seed: {seed}")
    bad = 0
    for a in E:
        rr = r.as_equivalence() if a.equation and r.equivalence else r
        try:
            cex = refute_open(rr, a.lhs, a.rhs, bound, A or E.alphabet, limit=count, seed=seed)
        except ValueError as exc:
            raise InputError(f"{a.name}: {exc}") from None
        if a.equation and not r.equivalence and cex is None:
            cex = refute_open(rr, a.rhs, a.lhs, bound, A or E.alphabet, limit=count, seed=seed)
        if cex is None:
            click.echo(f"{a.name}: pass up to bound {bound}")
        else:
            bad += 1
            click.echo(f"{a.name}: counterexample {cex.render()}")
    click.echo(f"{bad} counterexample(s)")
    sys.exit(1 if bad else 0)


@main.command(name="replay-laws")
@click.argument("keys", nargs=-1)
def replay_laws(keys):
    """Replay the derived-law scripts against their premise sets."""
    bad = 0
    for k in keys or LAW_KEYS:
        try:
            law = derived_law(k)
        except KeyError as exc:
            raise InputError(str(exc)) from None
        try:
            concl = law.verify()
            click.echo(f"{law.key}: ok ({len(concl)} script(s), premises {law.premises.name})")
        except DerivationError as exc:
            bad += 1
            click.echo(f"{law.key}: FAILED {exc}")
        for a, why in law.refuted:
            click.echo(f"{law.key}: not derivable from these premises: {a.render()} ({why})")
    sys.exit(1 if bad else 0)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--axioms", "axioms_arg", required=True)
def replay(file, axioms_arg):
    """Re-check a serialized derivation against an axiomatization."""
    E = _axioms(axioms_arg)
    try:
        d = deserialize(Path(file).read_text())
    except (DerivationError, ValueError) as exc:
        raise InputError(f"{file}: {exc}") from None
    try:
        c = check(E, d)
    except DerivationError as exc:
        click.echo(f"rejected: {exc}")
        sys.exit(1)
    click.echo(f"accepted: {c}")


if __name__ == "__main__":
    main()

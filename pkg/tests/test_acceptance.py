"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that pytest prints in an "acceptance"
section of the terminal summary.
"""

import random
import time

import pytest

from bccs.axioms import catalog, combine, transform_weak
from bccs.completeness import prove_if_ground, prove_weak_from_concrete, saturate
from bccs.generate import random_term
from bccs.obstructions import (check_family_sound, family, obstruction_certificate,
                               validate_certificate, witness, wtv_short)
from bccs.omega import check_omega_requirements
from bccs.proofs import (LAW_KEYS, check_derivation, derived_law, eliminate_tau,
                         is_tau_normal, random_walk, search)
from bccs.semantics import check_closed, check_oracle, refute_open, weak_completed_traces
from bccs.syntax import Alphabet, ac_canonical, render, sum_of, term

IF_GC = catalog("IF-gc")
WIF_GC = catalog("WIF-gc")


def test_1_oracle_agreement(small_terms, verdict):
    start = time.perf_counter()
    pairs = disagreements = 0
    for p in small_terms:
        for q in small_terms:
            pairs += 1
            if check_closed("if-pre", p, q) != check_oracle("if-pre", p, q):
                disagreements += 1
    elapsed = time.perf_counter() - start
    ok = verdict("1 oracle agreement", disagreements == 0 and elapsed < 60,
                 f"{pairs} pairs, {disagreements} disagreements, {elapsed:.1f}s")
    assert ok


def test_2_ground_completeness_sweep(small_terms, verdict):
    start = time.perf_counter()
    related = proved = 0
    for p in small_terms:
        for q in small_terms:
            if not check_closed("if-pre", p, q):
                continue
            related += 1
            c = check_derivation(IF_GC, prove_if_ground(p, q))
            proved += c.lhs is p and c.rhs is q
    elapsed = time.perf_counter() - start
    ok = verdict("2 ground-completeness sweep", related == proved and elapsed < 300,
                 f"{proved}/{related} related pairs proved and checked, {elapsed:.1f}s")
    assert ok


def test_3_golden_examples(verdict):
    problems = []
    p = term("a.(a.0 + a.a.0) + a.a.a.a.0")
    q = term("a.(a.0 + a.a.a.0) + a.a.a.0")
    c = check_derivation(IF_GC, prove_if_ground(p, q))
    if not (c.lhs is p and c.rhs is q):
        problems.append("worked IF pair")
    sq = "a.(b.(c.0 + d.0) + b.e.0) + a.f.0"
    want = term(sq + " + a.(b.(c.0 + d.0) + b.e.0 + f.0 + b.(c.0 + d.0 + e.0))")
    if ac_canonical(saturate(sq)[0]) is not ac_canonical(want):
        problems.append("saturation")
    if check_closed("wif-pre", term("tau.0"), term("0")):
        problems.append("tau.0 vs 0")
    if check_closed("wif-pre", term("tau.a.0"), term("tau.a.0 + b.0")):
        problems.append("tau.a.0 vs tau.a.0 + b.0")
    E = combine("A1-4+IF1'", "IF1'/a", "IF1'/tau")
    rep = search(E, "tau.a.a.0", "tau.(a.a.0 + a.0)", 3)
    if not rep.found:
        problems.append("search chain")
    else:
        check_derivation(E, rep.derivation)
    ok = verdict("3 golden examples", not problems, ", ".join(problems) or "5 examples reproduced")
    assert ok


def test_4_transformation(tau_led_terms, verdict):
    W = transform_weak(IF_GC, "wif-pre")
    cex = []
    for ax in W:
        sides = [(ax.lhs, ax.rhs), (ax.rhs, ax.lhs)] if ax.equation else [(ax.lhs, ax.rhs)]
        for lhs, rhs in sides:
            s = refute_open("wif-pre", lhs, rhs, 2, limit=500, seed=7)
            if s is not None:
                cex.append(f"{ax.name}: {s.render()}")
    related = proved = 0
    for p in tau_led_terms:
        for q in tau_led_terms:
            if not check_closed("wif-pre", p, q):
                continue
            related += 1
            d = prove_weak_from_concrete(IF_GC, prove_if_ground, p, q, "wif-pre")
            c = check_derivation(W, d)
            proved += c.lhs is p and c.rhs is q
    ok = verdict("4 transformation", not cex and related == proved,
                 f"{len(W)} axioms swept, {len(cex)} counterexamples; "
                 f"{proved}/{related} related pairs over {len(tau_led_terms)} terms proved")
    assert ok


def test_5_tau_elimination(verdict):
    rng = random.Random(2024)
    from bccs.proofs import weak_core
    E = weak_core()
    failures = 0
    for _ in range(500):
        t = random_term(rng, ["a", "b", "tau"], rng.randint(1, 4))
        normal, d = eliminate_tau(t)
        c = check_derivation(E, d)
        if not (is_tau_normal(normal) and c.lhs is t and c.rhs is normal
                and check_closed("wif-eq", t, normal)):
            failures += 1
    ok = verdict("5 tau elimination", failures == 0, f"500 terms, {failures} failures")
    assert ok


def test_6_derived_laws(verdict):
    failures = []
    for key in LAW_KEYS:
        try:
            derived_law(key).verify()
        except Exception as exc:  # report every failing script
            failures.append(f"{key}: {exc}")
    ok = verdict("6 derived laws", not failures and len(LAW_KEYS) == 14,
                 f"{len(LAW_KEYS) - len(failures)}/{len(LAW_KEYS)} scripts check")
    assert ok


@pytest.mark.xfail(strict=True, reason="the tau instance of CTE' is not derivable from "
                   "CTE + WIF1 + WIF2; the premises preserve a distinction it erases")
def test_6_cte_prime_tau_instance(verdict):
    law = derived_law("CTE'-from-CTE+WIF1")
    missing = [a.name for a, _ in law.refuted]
    ok = verdict("6 CTE' tau instance", not missing,
                 "not derivable: " + ", ".join(missing) if missing else "derived")
    assert ok


def test_7_negative_results(verdict):
    problems = []
    certs = [obstruction_certificate(WIF_GC, "wif-eq"),
             obstruction_certificate(catalog("A1-4"), "if-eq")]
    for cert in certs:
        if cert.verdict != "non-derivable" or not validate_certificate(cert.render()):
            problems.append(f"certificate {cert.family}")
    for fid in ("wif-eq", "if-eq"):
        for m in (1, 2, 3):
            if check_family_sound(fid, m).status != "exact-sound":
                problems.append(f"{fid}[{m}] soundness")
    for fid in ("wif-pre", "if-pre", "singleton"):
        for m in (1, 2):
            rep = check_family_sound(fid, m, bound=2)
            if not rep.ok:
                problems.append(f"{fid}[{m}] counterexample")
    for cert, E in zip(certs, (WIF_GC, catalog("A1-4"))):
        rep = search(E, cert.goal.lhs, cert.goal.rhs, 6, max_states=20000)
        if rep.found:
            problems.append(f"search found {cert.family}")
    ok = verdict("7 negative results", not problems, ", ".join(problems)
                 or "2 certificates validated, families sound, budget-6 search fails")
    assert ok


def _walks(E, atoms, seed, count=200):
    rng = random.Random(seed)
    pool = [term(s) for s in atoms]
    for _ in range(count):
        p = sum_of(rng.sample(pool, rng.randint(1, 3)))
        c = check_derivation(E, random_walk(E, p, rng.randint(1, 4), rng))
        yield c.lhs, c.rhs


def test_8_witness_transfer(verdict):
    m, violations, applicable = 2, 0, [0, 0, 0]
    target = {("a",) * m, ("a",) * (2 * m)}
    wct_atoms = ["tau.a.a.a.a.0", "tau.(a.a.0 + a.a.a.a.0)", "a.a.0", "a.a.a.a.0",
                 "tau.tau.a.a.a.a.0", "tau.(tau.a.a.a.a.0 + tau.(a.a.0 + a.a.a.a.0))"]
    for p, q in _walks(WIF_GC.equational_fragment(), wct_atoms, 5):
        if witness("wct-tau", p, m) is not None and weak_completed_traces(q) <= target:
            applicable[0] += 1
            violations += witness("wct-tau", q, m) is None
    nt_atoms = ["tau.a.a.x", "tau.(a.a.x + x)", "tau.(a.a.x + a.a.b.0)", "tau.(a.a.x + a.a.a.0)",
                "a.x", "tau.tau.a.a.x", "b.(x + y)", "tau.(tau.a.a.x + a.y)"]
    for p, q in _walks(WIF_GC, nt_atoms, 7):
        if witness("notrace-tau", p, m) is not None:
            applicable[1] += 1
            violations += witness("notrace-tau", q, m) is None
    wtv_atoms = ["a.a.x", "x", "a.a.x + x", "tau.x", "a.tau.a.x", "a.y", "tau.(a.x + y)"]
    for p, q in _walks(WIF_GC, wtv_atoms, 11):
        if wtv_short(q, m):
            applicable[2] += 1
            violations += not wtv_short(p, m)
    ok = verdict("8 witness transfer", violations == 0 and min(applicable) > 0,
                 f"3 x 200 derivations, applicable {applicable}, {violations} violations")
    assert ok


def test_9_omega_harness(verdict):
    goal = ("a.(x + y)", "a.x + a.y")
    good = check_omega_requirements(IF_GC, *goal, samples=100, seed=0)
    bad = check_omega_requirements(catalog("A1-4"), *goal, samples=100, seed=0, source=IF_GC)
    ok = verdict("9 omega harness", good.ok and bool(bad.requirement2),
                 f"IF-gc: {sum(good.checked.values())} checks ok; "
                 f"core only: {len(bad.requirement2)} requirement-2 failures")
    assert ok


def test_10_spectrum_inclusions(small_terms, tau_led_terms, verdict):
    chains = [(["if-pre", "f-pre", "ct-pre", "t-pre"], small_terms),
              (["wif-pre", "wf-pre", "wct-pre", "wt-pre"], small_terms),
              (["wif-pre", "wf-pre", "wct-pre", "wt-pre"], tau_led_terms)]
    violations = checked = 0
    for rels, pool in chains:
        for p in pool:
            for q in pool:
                held = [check_closed(r, p, q) for r in rels]
                checked += 1
                violations += any(a and not b for a, b in zip(held, held[1:]))
    ok = verdict("10 spectrum inclusions", violations == 0,
                 f"{checked} pair checks, {violations} violations")
    assert ok

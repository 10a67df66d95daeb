import pytest

from bccs.axioms import (AxiomError, AxiomFileError, Axiomatization, axiom, catalog,
                         catalog_keys, combine, get_axiom, init_tau_axiom,
                         init_tau_axiomatization, parse_axiomatization, transform_weak)
from bccs.semantics import refute_open
from bccs.syntax import Alphabet, render, term


def test_catalog_composites():
    assert catalog("IF-gc").names == ["A1", "A2", "A3", "A4", "IF1", "IF2"]
    assert catalog("WIF-gc").names == ["A1", "A2", "A3", "A4", "WIF1", "WIF2'", "W1"]
    assert catalog("WFE-gc").names == ["A1", "A2", "A3", "A4", "WIF1", "WIF2", "WFE"]
    assert catalog("WFE-gc").equivalence


def test_catalog_axiom_texts():
    assert get_axiom("IF1").lhs is term("@a.(x + y)")
    assert get_axiom("IF1").rhs is term("@a.x + @a.y")
    w = get_axiom("WIF1")
    assert w.equation and w.rhs is term("@@a.x + @@a.y")
    assert not get_axiom("D1").primitive


def test_every_catalog_key_resolves():
    for k in catalog_keys():
        E = catalog(k, Alphabet.of("a", "b"))
        assert {"A1", "A2", "A3", "A4"} <= set(E.names)


def test_unknown_key():
    with pytest.raises(AxiomError):
        catalog("nope")


def test_core_always_included():
    E = Axiomatization("e", (get_axiom("IF1"),))
    assert E.names[:4] == ["A1", "A2", "A3", "A4"]


def test_equivalence_rejects_inequations():
    with pytest.raises(AxiomError):
        Axiomatization("e", (get_axiom("IF1"),), "equivalence")


def test_schematic_instantiation_counts():
    A = Alphabet.of("a", "b", "c")
    f2 = get_axiom("F2", A)
    assert render(f2.lhs) == "a.x1 + b.x2 + c.x3"
    fe3 = get_axiom("FE3", Alphabet.of("a", "b"))
    assert "a.z1 + b.z2" in render(fe3.rhs)


@pytest.mark.parametrize("src,want", [
    ("F1", "tau.(x + y) <= tau.x + tau.(y + z)"),
    ("A1", "x + y == y + x"),
    ("CTE", "tau.(@b.w + @c.x + y + z) == tau.(@b.w + y) + tau.(@c.x + z)"),
])
def test_init_tau_axiom(src, want):
    got = init_tau_axiom(get_axiom(src))
    assert f"{render(got.lhs)} {got.symbol} {render(got.rhs)}" == want


def test_init_tau_rejects_tau_and_unsafe():
    with pytest.raises(AxiomError):
        init_tau_axiom(get_axiom("WIF1"))
    with pytest.raises(AxiomError):
        init_tau_axiomatization(Axiomatization("u", (axiom("U", "x <= @a.x + x"),)))


def test_transform_weak_if():
    E = transform_weak(catalog("IF-gc"), "wif-pre")
    assert E.names == ["A1", "A2", "A3", "A4", "IF1", "IF2", "init-tau(IF1)",
                       "init-tau(IF2)", "WIF1", "WIF2", "W1"]


def test_transform_weak_f_and_t():
    assert "init-tau(F1)" in transform_weak(combine("f", "F1"), "wf-pre").names
    names = transform_weak(combine("t", "TE", "T1", "T2"), "wt-pre").names
    assert "W1" in names and "W2" in names


def test_transform_weak_overrides_and_errors():
    E = transform_weak(catalog("IF-gc"), "wif-pre", w1=False)
    assert "W1" not in E.names and "WIF2" in E.names
    with pytest.raises(AxiomError):
        transform_weak(catalog("IF-gc"), "if-pre")


@pytest.mark.parametrize("key,rel", [
    ("IF-gc", "wif-pre"), ("F-gc", "wf-pre"), ("CT-gc", "wct-pre"), ("T-gc", "wt-pre"),
])
def test_transform_weak_bounded_soundness(key, rel):
    E = transform_weak(catalog(key), rel)
    for ax in E:
        for lhs, rhs in ((ax.lhs, ax.rhs), (ax.rhs, ax.lhs)) if ax.equation else ((ax.lhs, ax.rhs),):
            assert refute_open(rel, lhs, rhs, 2, limit=300, seed=1) is None, ax.name


def test_axiom_file_round_trip():
    text = catalog("IF-gc", Alphabet.of("a", "b")).render()
    E = parse_axiomatization(text)
    assert E.names == catalog("IF-gc").names and E.alphabet.finite


def test_axiom_file_errors():
    with pytest.raises(AxiomFileError) as info:
        parse_axiomatization("mode preorder\nX : a.x\n")
    assert info.value.line == 2
    with pytest.raises(AxiomFileError):
        parse_axiomatization("mode sideways\n")


def test_combine_mode():
    assert combine("c", "A3").equivalence
    assert not combine("c", "IF1", "IF2").equivalence

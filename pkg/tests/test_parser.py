"""Concrete syntax: lexer, parser, pretty-printer."""

import pytest

from hottc.errors import ParseError
from hottc.levels import LMax, LParam, LSucc, LZero, ZERO
from hottc.parser import LEVEL_HOLE, parse_module, parse_term, tokenize
from hottc.printer import print_level, print_term
from hottc.surface import (
    SApp, SHole, SId, SKw, SLam, SName, SPair, SPi, SProj, SSigma, SSum,
    SType,
)
from hottc.terms import (
    App, Id, Lam, Nat, NatElim, Pair, Pi, Sigma, Sort, Succ, Sum, Var, Zero,
    nat_lit,
)


def head_spine(s):
    args = []
    while isinstance(s, SApp):
        args.append(s.arg)
        s = s.fn
    return s, list(reversed(args))


def test_tokenize_comments_and_spans():
    toks = [t for t in tokenize("foo -- rest of line\n  bar", "<t>")
            if t.kind != "eof"]
    assert [t.value for t in toks] == ["foo", "bar"]
    assert toks[0].span == (1, 1)
    assert toks[1].span == (2, 3)


def test_arrow_right_assoc():
    t = parse_term("Nat -> Nat -> Nat")
    assert isinstance(t, SPi) and t.name == "_"
    assert isinstance(t.codomain, SPi)


def test_app_binds_tighter_than_arrow():
    t = parse_term("f x -> g y")
    assert isinstance(t, SPi)
    assert isinstance(t.domain, SApp)


def test_eq_with_annotation():
    t = parse_term("a = b :> A + B")
    assert isinstance(t, SId)
    assert isinstance(t.ty, SSum)


def test_eq_without_annotation():
    t = parse_term("a = b")
    assert isinstance(t, SId) and t.ty is None


def test_sum_prod_precedence():
    # * binds tighter than +
    t = parse_term("A + B * C")
    assert isinstance(t, SSum)
    assert isinstance(t.right, SSigma)
    t2 = parse_term("A * B + C")
    assert isinstance(t2, SSum)
    assert isinstance(t2.left, SSigma)


def test_projections_postfix():
    t = parse_term("p.1")
    assert isinstance(t, SProj) and t.index == 1
    t = parse_term("f x.2")
    # projection binds tighter than application
    assert isinstance(t, SApp) and isinstance(t.arg, SProj)


def test_pair_literal():
    t = parse_term("(a , b)")
    assert isinstance(t, SPair)


def test_lambda_forms():
    t = parse_term("fun (x : Nat) => x")
    assert isinstance(t, SLam) and t.domain is not None
    t = parse_term("fun (x y : Nat) => x")
    assert isinstance(t, SLam) and isinstance(t.body, SLam)


def test_forall_implicit_group():
    t = parse_term("forall {A B : Type{0}}, A -> B")
    assert isinstance(t, SPi) and t.implicit
    assert isinstance(t.codomain, SPi) and t.codomain.implicit


def test_sigma_binder():
    t = parse_term("Sigma (x : Nat), x = x")
    assert isinstance(t, SSigma) and t.name == "x"


def test_numerals():
    t = parse_term("2")
    assert isinstance(t, SApp)
    h, args = head_spine(t)
    assert isinstance(h, SKw) and h.name == "succ"


def test_type_levels():
    assert parse_term("Type{0}").level == ZERO
    assert parse_term("Type{i}").level == LParam("i")
    assert parse_term("Type{i+2}").level == LSucc(LSucc(LParam("i")))
    l = parse_term("Type{max(i, j+1)}").level
    assert l == LMax(LParam("i"), LSucc(LParam("j")))
    assert parse_term("Type{?}").level == LEVEL_HOLE


def test_at_references():
    t = parse_term("@f")
    assert t.levels is None
    t = parse_term("@f{0, i}")
    assert t.levels == [ZERO, LParam("i")]


def test_hole():
    assert isinstance(parse_term("_"), SHole)


def test_decl_shapes():
    m = parse_module(
        "def idfun {i} {A : Type{i}} (a : A) : A := a\n"
        "axiom funky {i j} : Type{max(i, j)}\n"
        "opaque def hidden : Nat := 0\n"
        "[class] def C (A : Type{0}) : Type{1} := Nat -> A\n"
        "[instance 5] def inst : Nat := 0\n"
        "[monomorphic] axiom mono {i} : Type{i+1}\n",
        "<m>")
    d = m.decls
    assert [x.name for x in d] == ["idfun", "funky", "hidden", "C",
                                   "inst", "mono"]
    assert d[0].level_params == ["i"]
    assert d[0].binders[0].implicit and not d[0].binders[1].implicit
    assert d[1].kind == "axiom" and d[1].body is None
    assert d[2].opaque
    assert d[3].is_class
    assert d[4].instance_priority == 5
    assert d[5].monomorphic


def test_imports():
    m = parse_module('import "Basics"\nimport "Fin"\ndef x : Nat := 0\n',
                     "<m>")
    assert [p for p, _ in m.imports] == ["Basics", "Fin"]


def test_axiom_with_body_rejected():
    with pytest.raises(ParseError):
        parse_module("axiom a : Nat := 0", "<m>")


def test_def_without_body_rejected():
    with pytest.raises(ParseError):
        parse_module("def a : Nat", "<m>")


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as e:
        parse_module("def x : Nat :=\n  := 0", "<m>")
    assert "<m>:2" in str(e.value)


def test_trailing_garbage_rejected():
    with pytest.raises(ParseError):
        parse_term("x y )")


# ---------------------------------------------------------------------------
# Printer


def test_print_levels():
    assert print_level(ZERO) == "0"
    assert print_level(LSucc(LSucc(ZERO))) == "2"
    assert print_level(LSucc(LParam("i"))) == "i+1"
    assert print_level(LMax(LParam("i"), ZERO)) == "max(i,0)"


def test_print_arrow_vs_forall():
    assert print_term(Pi(Nat(), Nat())) == "Nat -> Nat"
    s = print_term(Pi(Sort(ZERO), Var(0), hint="A"))
    assert s == "forall (A : Type{0}), A"


def test_print_numerals():
    assert print_term(nat_lit(3)) == "3"
    assert print_term(Succ(Var(0)), names=["n"]) == "succ n"


def test_print_parenthesization():
    t = App(Lam(Nat(), Var(0), hint="x"), Zero())
    assert print_term(t) == "(fun (x : Nat) => x) 0"
    t2 = Pi(Pi(Nat(), Nat()), Nat())
    assert print_term(t2) == "(Nat -> Nat) -> Nat"


def test_print_id_and_sigma():
    t = Id(Nat(), Zero(), Zero())
    assert print_term(t) == "0 = 0 :> Nat"
    assert print_term(Sigma(Nat(), Nat())) == "Nat * Nat"
    assert print_term(Sum(Nat(), Nat())) == "Nat + Nat"


def test_print_freshens_shadowed_binders():
    t = Lam(Nat(), Lam(Nat(), Var(1), hint="x"), hint="x")
    s = print_term(t)
    assert s == "fun (x : Nat) => fun (x1 : Nat) => x"


def test_printed_terms_reparse():
    samples = [
        nat_lit(4),
        Pi(Nat(), Pi(Nat(), Nat())),
        Lam(Nat(), Succ(Var(0)), hint="n"),
        Id(Nat(), Zero(), nat_lit(1)),
        NatElim(Lam(Nat(), Nat(), hint="n"), Zero(),
                Lam(Nat(), Lam(Nat(), Succ(Var(0))), hint="k"), nat_lit(2)),
        Pair(Zero(), Zero(), Sigma(Nat(), Nat())),
    ]
    for t in samples:
        parse_term(print_term(t))

"""Elaboration: implicit insertion, holes, unification, instance search."""

import pytest

from hottc.elab import Elaborator
from hottc.env import Environment, Options
from hottc.errors import (
    InstanceDepthExceeded, InstanceNotFound, TypeMismatch, UnknownName,
    UnsolvedHole,
)
from hottc.loader import check_source
from hottc.parser import parse_term
from hottc.prelude import bootstrap
from hottc.terms import (
    App, Const, Inl, Lam, Nat, Pair, Pi, Refl, Sigma, Succ, Sum, Var, Zero,
    nat_lit,
)


@pytest.fixture
def env():
    e = Environment()
    check_source(e, "def idfun {i} {A : Type{i}} (a : A) : A := a")
    return e


def elab(env, src, expected=None):
    el = Elaborator(env)
    if expected is None:
        t, ty = el.infer([], parse_term(src))
        el.resolve_goals()
        return el.zonk(t), el.zonk(ty)
    t = el.check([], parse_term(src), expected)
    el.resolve_goals()
    return el.zonk(t)


def test_implicit_argument_solved(env):
    t, ty = elab(env, "idfun 0")
    assert t == App(App(Const("idfun", t.fn.fn.levels), Nat()), Zero())
    assert ty == Nat()


def test_at_suppresses_insertion(env):
    t, ty = elab(env, "@idfun{0} Nat 0")
    assert ty == Nat()
    with pytest.raises(TypeMismatch):
        # with insertion suppressed, 0 lands in the type slot
        elab(env, "@idfun{0} 0")


def test_unknown_name(env):
    with pytest.raises(UnknownName):
        elab(env, "nope")


def test_hole_solved_by_unification(env):
    t = elab(env, "fun (f : Nat -> Nat) => f _",
             expected=None)


def test_unsolved_hole_reported(env):
    with pytest.raises(UnsolvedHole):
        check_source(env, "def bad : Nat := _")


def test_check_against_pi_inserts_implicit_lambda(env):
    # eta-expanding against an implicit Pi
    el = Elaborator(env)
    d = env.lookup("idfun")
    t = el.check([], parse_term("fun (a : Nat) => a"),
                 Pi(Nat(), Nat()))
    assert isinstance(t, Lam)


def test_pair_annotation_from_expected(env):
    expected = Sigma(Nat(), Nat())
    t = elab(env, "(0 , 1)", expected=expected)
    assert isinstance(t, Pair) and t.annotation == expected


def test_refl_short_form(env):
    from hottc.terms import Id
    t = elab(env, "refl", expected=Id(Nat(), Zero(), Zero()))
    assert t == Refl(Nat(), Zero())


def test_inl_short_form(env):
    t = elab(env, "inl 0", expected=Sum(Nat(), Nat()))
    assert t == Inl(Zero(), Nat())


def test_keyword_arity_error(env):
    with pytest.raises(TypeMismatch):
        elab(env, "natrec 0")


def test_numerals_elaborate(env):
    t, ty = elab(env, "3")
    assert t == nat_lit(3) and ty == Nat()


def test_path_driven_inference(env):
    check_source(env, """
def sym {i} {A : Type{i}} {x y : A} (p : x = y :> A) : y = x :> A :=
  J (fun (b : A) => fun (q : x = b :> A) => b = x :> A) refl p
""")
    t, ty = elab(env, "sym (refl Nat 0)")
    assert ty.lhs == Zero() and ty.rhs == Zero()


def test_prelude_cells_check():
    env = bootstrap()
    assert "coeq_ind_beta_glue" in env.order


def test_dependent_application(env):
    # motive for natrec inferred from the lambda's own annotation
    t, ty = elab(env, "natrec (fun (n : Nat) => Nat) 0 "
                      "(fun (n : Nat) => fun (r : Nat) => succ r) 2")
    from hottc.reduce import normalize
    assert normalize(env, t) == nat_lit(2)


# ---------------------------------------------------------------------------
# instance search


POINTED = """
[class] def IsPointed {i} (A : Type{i}) : Type{i} := A

def point {i} {A : Type{i}} {p : IsPointed A} : A := p

[instance 0] def nat_pointed : IsPointed Nat := 0

[instance 0] def prod_pointed {i j} {A : Type{i}} {B : Type{j}}
  {pa : IsPointed A} {pb : IsPointed B} : IsPointed (A * B) :=
  (point , point)
"""


def test_instance_resolution(env):
    check_source(env, POINTED)
    t = elab(env, "point", expected=Nat())
    assert t.arg == Const("nat_pointed")


def test_instance_composite(env):
    check_source(env, POINTED)
    t = elab(env, "point", expected=Sigma(Nat(), Nat()))
    # the product instance chains through the Nat instance twice
    head = t.arg
    while isinstance(head, App):
        head = head.fn
    assert head == Const("prod_pointed", head.levels)


def test_instance_not_found(env):
    check_source(env, POINTED)
    with pytest.raises((InstanceNotFound, TypeMismatch)):
        check_source(env, "def u : Unit := point")


def test_instance_priority_order(env):
    check_source(env, POINTED)
    check_source(env, "[instance 0] def nat_pointed2 : IsPointed Nat := 1")
    # equal priority: earlier declaration wins
    t = elab(env, "point", expected=Nat())
    assert t.arg == Const("nat_pointed")


def test_instance_depth_exceeded():
    env = Environment(Options(instance_depth=16))
    check_source(env, """
[class] def Loopy {i} (A : Type{i}) : Type{i} := A

[instance 0] def loopy_self {i} {A : Type{i}} {l : Loopy A} : Loopy A := l

def want_loop {i} (A : Type{i}) {l : Loopy A} : Loopy A := l
""")
    with pytest.raises(InstanceDepthExceeded):
        check_source(env, "def stuck : Loopy Nat := want_loop Nat")

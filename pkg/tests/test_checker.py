"""Kernel typing rules."""

import pytest

from hottc.check import Checker, add_declaration
from hottc.env import AXIOM, Environment, Options
from hottc.errors import (
    DuplicateName, LevelArityError, NotAFunction, NotASigma, TypeMismatch,
    UnboundVariable, UniverseInconsistency,
)
from hottc.levels import ZERO, Constraint, LE, LGlobal, LParam, LSucc, lmax
from hottc.reduce import conv, whnf
from hottc.terms import (
    ApD, App, Const, Empty, Id, Inl, Interval, IntervalInd, IOne, IZero, J,
    Lam, Nat, NatElim, Pair, Pi, Proj1, Proj2, Refl, Seg, Sigma, Sort, Star,
    Succ, Sum, SumElim, Transport, Unit, UnitElim, Var, Zero, apps, nat_lit,
    shift,
)


@pytest.fixture
def env():
    return Environment()


def infer(env, t, ctx=None):
    ck = Checker(env)
    return ck.infer(ctx or [], t), ck


def test_var_rule(env):
    ty, _ = infer(env, Var(0), ctx=[Nat()])
    assert ty == Nat()
    ty, _ = infer(env, Var(1), ctx=[Sort(ZERO), Var(0)])
    assert ty == Sort(ZERO)
    # the type of the inner variable is the outer one, shifted past it
    ty, _ = infer(env, Var(0), ctx=[Sort(ZERO), Var(0)])
    assert ty == Var(1)
    with pytest.raises(UnboundVariable):
        infer(env, Var(0))


def test_sort_rule(env):
    ty, _ = infer(env, Sort(ZERO))
    assert ty == Sort(LSucc(ZERO))


def test_pi_max_rule(env):
    u = LParam("u")
    t = Pi(Sort(u), Pi(Var(0), Var(1)))
    ty, ck = infer(env, t)
    assert conv(env, ty, Sort(LSucc(u)), ck.g)


def test_lam_app(env):
    f = Lam(Nat(), Succ(Var(0)))
    ty, _ = infer(env, f)
    assert ty == Pi(Nat(), Nat())
    ty, _ = infer(env, App(f, Zero()))
    assert ty == Nat()
    with pytest.raises(NotAFunction):
        infer(env, App(Zero(), Zero()))


def test_check_mode(env):
    ck = Checker(env)
    ck.check([], Lam(Nat(), Var(0)), Pi(Nat(), Nat()))
    with pytest.raises(TypeMismatch):
        ck.check([], Zero(), Sort(ZERO))


def test_sigma_pair_proj(env):
    ann = Sigma(Nat(), Unit())
    p = Pair(Zero(), Star(), ann)
    ty, _ = infer(env, p)
    assert ty == ann
    assert infer(env, Proj1(p))[0] == Nat()
    assert infer(env, Proj2(p))[0] == Unit()
    with pytest.raises(NotASigma):
        infer(env, Proj1(Zero()))


def test_dependent_pair(env):
    # (Nat, zero) : Sigma (A : Type0), A
    ann = Sigma(Sort(ZERO), Var(0))
    ty, _ = infer(env, Pair(Nat(), Zero(), ann))
    assert ty == ann
    with pytest.raises(TypeMismatch):
        infer(env, Pair(Nat(), Star(), ann))


def test_sum_rules(env):
    t = Inl(Zero(), Unit())
    assert infer(env, t)[0] == Sum(Nat(), Unit())
    m = Lam(Sum(Nat(), Unit()), Nat())
    e = SumElim(m, Lam(Nat(), Var(0)), Lam(Unit(), Zero()), t)
    ty, ck = infer(env, e)
    assert conv(env, ty, Nat(), ck.g)


def test_natelim_typing(env):
    m = Lam(Nat(), Nat())
    t = NatElim(m, Zero(), Lam(Nat(), Lam(Nat(), Succ(Var(0)))), nat_lit(2))
    ty, ck = infer(env, t)
    assert conv(env, ty, Nat(), ck.g)
    bad = NatElim(m, Star(), Lam(Nat(), Lam(Nat(), Var(0))), Zero())
    with pytest.raises(TypeMismatch):
        infer(env, bad)


def test_unitelim(env):
    m = Lam(Unit(), Nat())
    ty, ck = infer(env, UnitElim(m, Zero(), Star()))
    assert conv(env, ty, Nat(), ck.g)


def test_indices_matter_nat(env):
    ty, _ = infer(env, Id(Nat(), Zero(), Zero()))
    assert ty == Sort(ZERO)


def test_indices_matter_param(env):
    u = LParam("u")
    ctx = [Sort(u), Var(0), Var(1)]
    ty, _ = infer(env, Id(Var(2), Var(1), Var(0)), ctx=ctx)
    assert ty == Sort(u)


def test_refl(env):
    ty, _ = infer(env, Refl(Nat(), Zero()))
    assert ty == Id(Nat(), Zero(), Zero())
    with pytest.raises(TypeMismatch):
        infer(env, Refl(Nat(), Star()))


def test_j_rule(env):
    # symmetry at Nat via based path induction, in a context
    # [x : Nat, y : Nat, p : Id Nat x y]
    ctx = [Nat(), Nat(), Id(Nat(), Var(1), Var(0))]
    x = Var(2)
    motive = Lam(Nat(), Lam(Id(Nat(), Var(3), Var(0)),
                            Id(Nat(), Var(1), Var(4))))
    t = J(motive, Refl(Nat(), x), Var(0))
    ty, ck = infer(env, t, ctx=ctx)
    assert conv(env, ty, Id(Nat(), Var(1), Var(2)), ck.g)


def test_transport_apd(env):
    ctx = [Nat(), Nat(), Id(Nat(), Var(1), Var(0))]
    fam = Lam(Nat(), Nat())
    ty, ck = infer(env, Transport(fam, Var(0), Var(2)), ctx=ctx)
    assert conv(env, ty, Nat(), ck.g)
    f = Lam(Nat(), Succ(Var(0)))
    ty, ck = infer(env, ApD(fam, f, Var(0)), ctx=ctx)
    want = Id(App(fam, Var(1)),
              Transport(fam, Var(0), App(f, Var(2))), App(f, Var(1)))
    assert conv(env, ty, want, ck.g)


def test_interval_rules(env):
    assert infer(env, Interval())[0] == Sort(ZERO)
    assert infer(env, Seg())[0] == Id(Interval(), IZero(), IOne())
    m = Lam(Interval(), Nat())
    t = IntervalInd(m, Zero(), nat_lit(1), Var(0), IZero())
    ctx = [Id(Nat(), Transport(m, Seg(), Zero()), nat_lit(1))]
    ty, ck = infer(env, t, ctx=ctx)
    assert conv(env, ty, Nat(), ck.g)
    # wrong seg cell type is rejected
    bad = IntervalInd(m, Zero(), nat_lit(1), Refl(Nat(), Zero()), IZero())
    with pytest.raises(TypeMismatch):
        infer(env, bad)


# ---------------------------------------------------------------------------
# Declarations


def test_add_definition_and_const(env):
    u = LParam("i")
    idty = Pi(Sort(u), Pi(Var(0), Var(1)))
    idbody = Lam(Sort(u), Lam(Var(0), Var(0)))
    add_declaration(env, "idfun", [u], [], idty, idbody)
    use = apps(Const("idfun", (ZERO,)), Nat(), Zero())
    ty, ck = infer(env, use)
    assert conv(env, ty, Nat(), ck.g)
    with pytest.raises(LevelArityError):
        infer(env, Const("idfun", ()))


def test_duplicate_rejected(env):
    add_declaration(env, "d", [], [], Nat(), Zero())
    with pytest.raises(DuplicateName):
        add_declaration(env, "d", [], [], Nat(), Zero())


def test_axiom_deps_tracking(env):
    add_declaration(env, "fe", [], [], Id(Nat(), Zero(), Zero()), None,
                    kind=AXIOM)
    assert env.axioms_of("fe") == {"fe"}
    add_declaration(env, "uses_fe", [], [],
                    Id(Nat(), Zero(), Zero()), Const("fe"))
    assert env.axioms_of("uses_fe") == {"fe"}
    add_declaration(env, "pure", [], [], Nat(), Zero())
    assert env.axioms_of("pure") == frozenset()


def test_primitive_contributes_nothing(env):
    from hottc.env import PRIMITIVE
    add_declaration(env, "cell", [], [], Id(Nat(), Zero(), Zero()), None,
                    kind=PRIMITIVE)
    add_declaration(env, "client", [], [],
                    Id(Nat(), Zero(), Zero()), Const("cell"))
    assert env.axioms_of("client") == frozenset()


def test_type_in_type_gate():
    env = Environment()
    with pytest.raises(UniverseInconsistency):
        add_declaration(env, "bad", [], [], Sort(ZERO), Sort(ZERO))
    env2 = Environment(Options(type_in_type=True))
    add_declaration(env2, "bad", [], [], Sort(ZERO), Sort(ZERO))


def test_polymorphic_instantiation(env):
    u = LParam("i")
    add_declaration(env, "ty", [u], [], Sort(LSucc(u)), Sort(u))
    ty1, ck = infer(env, Const("ty", (ZERO,)))
    assert conv(env, ty1, Sort(LSucc(ZERO)), ck.g)
    ty2, ck2 = infer(env, Const("ty", (LSucc(ZERO),)))
    assert conv(env, ty2, Sort(LSucc(LSucc(ZERO))), ck2.g)


def test_monomorphic_levels_shared(env):
    u = LParam("i")
    add_declaration(env, "mono", [u], [], Sort(LSucc(u)), None,
                    kind=AXIOM, monomorphic=True)
    d = env.lookup("mono")
    assert d.level_params == []
    g_atom = LGlobal("mono.i")
    assert d.type == Sort(LSucc(g_atom))
    # two uses mention the same global
    t1, _ = infer(env, Const("mono"))
    t2, _ = infer(env, Const("mono"))
    assert t1 == t2 == Sort(LSucc(g_atom))


def test_stored_constraints_reinstantiated(env):
    u, v = LParam("i"), LParam("j")
    add_declaration(env, "up", [u, v], [Constraint(u, LE, v)],
                    Sort(LSucc(v)), Sort(v))
    ck = Checker(env)
    with pytest.raises(UniverseInconsistency):
        # the stored i <= j instantiated at (1, 0) is unsatisfiable
        ck.infer([], Const("up", (LSucc(ZERO), ZERO)))


def test_opaque_type_still_usable(env):
    add_declaration(env, "n", [], [], Nat(), nat_lit(2), opaque=True)
    ty, _ = infer(env, Const("n"))
    assert ty == Nat()


def test_preservation_spot_check(env):
    from hottc.reduce import normalize
    samples = [
        App(Lam(Nat(), Succ(Var(0))), Zero()),
        Proj1(Pair(Zero(), Star(), Sigma(Nat(), Unit()))),
        NatElim(Lam(Nat(), Nat()), Zero(),
                Lam(Nat(), Lam(Nat(), Succ(Var(0)))), nat_lit(3)),
    ]
    for t in samples:
        ty1, ck = infer(env, t)
        ty2, _ = infer(env, normalize(env, t))
        assert conv(env, ty1, ty2, ck.g)

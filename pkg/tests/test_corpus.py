"""Spot checks against the bundled library: computation behaviour of the
checked developments, not just that they typecheck."""

from pathlib import Path

import pytest

from hottc.env import Options
from hottc.levels import ZERO, LParam, LSucc
from hottc.loader import load_file
from hottc.prelude import bootstrap
from hottc.reduce import conv, normalize, whnf
from hottc.terms import (
    Base, Const, Empty, IZero, Inl, Inr, Lam, Nat, Pi, Sort, Star, Sum,
    Unit, Var, apps, nat_lit,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def _load(name):
    env = bootstrap(Options())
    load_file(env, str(CORPUS / f"{name}.hott"))
    return env


@pytest.fixture(scope="module")
def fin_env():
    # pulls in Basics and Equivalences as imports
    return _load("Fin")


@pytest.fixture(scope="module")
def hits_env():
    return _load("HITs")


@pytest.fixture(scope="module")
def pointed_env():
    return _load("Pointed")


def test_fin2_inhabitants(fin_env):
    # Fin 2 unfolds to (Empty + Unit) + Unit; its two closed inhabitants
    # normalize to distinct injections
    z = normalize(fin_env, Const("fin2_zero"))
    o = normalize(fin_env, Const("fin2_one"))
    assert z == Inl(Inr(Star(), Empty()), Unit())
    assert o == Inr(Star(), Sum(Empty(), Unit()))
    assert z != o


def test_pathsplit_zero_is_unit(fin_env):
    t = apps(Const("pathsplit", (ZERO,)), nat_lit(0), Nat(), Nat(),
             Lam(Nat(), Var(0)))
    assert normalize(fin_env, t) == Unit()


def test_negb_involution_computes(fin_env):
    tt = normalize(fin_env, Const("true"))
    t = apps(Const("negb"), apps(Const("negb"), Const("true")))
    assert normalize(fin_env, t) == tt


def test_interval_rec_computes_on_points(hits_env):
    # the derived recursor still computes on i0 even though its body routes
    # through a transported seg cell; Var(0) stands for the path argument
    t = apps(Const("interval_rec", (ZERO,)), Nat(), nat_lit(3), nat_lit(4),
             Var(0), IZero())
    assert normalize(hits_env, t) == nat_lit(3)


def test_circle_rec_computes_on_base(hits_env):
    t = apps(Const("circle_rec", (ZERO,)), Nat(), nat_lit(5), Var(0), Base())
    assert normalize(hits_env, t) == nat_lit(5)


def test_relequiv_lands_one_universe_up(fin_env):
    u = LParam("u")
    ty = fin_env.type_at("RelEquiv", (u,))
    ty = whnf(fin_env, ty)
    assert isinstance(ty, Pi)
    cod = whnf(fin_env, ty.codomain)
    assert isinstance(cod, Pi)
    assert whnf(fin_env, cod.codomain) == Sort(LSucc(u))


def test_eckmann_hilton_present_and_axiom_free(fin_env):
    d = fin_env.lookup("eckmann_hilton")
    assert d.body is not None
    assert fin_env.axioms_of("eckmann_hilton") == frozenset()


def test_no_stray_axioms(fin_env, hits_env, pointed_env):
    # everything outside the Axioms development proves its statements
    for env, names in [
        (fin_env, ["Fin", "finite_bool", "equiv_bool_fin2", "concat",
                   "equiv_compose", "isequiv_adjointify"]),
        (hits_env, ["interval_rec_beta_seg", "circle_rec_beta_loop",
                    "susp_rec_beta_merid", "po_glue", "trunc_rec"]),
        (pointed_env, ["point", "unit_pt", "pmap_compose_idmap",
                       "pmap_eta"]),
    ]:
        for n in names:
            assert env.axioms_of(n) == frozenset(), n


def test_instance_search_found_basepoints(pointed_env):
    # unit_pt and nat_pt were elaborated by discharging IsPointed instances
    assert normalize(pointed_env, Const("unit_pt")) == Star()
    nat_pt = normalize(pointed_env, Const("nat_pt"))
    assert nat_pt == nat_lit(0)


def test_pmap_eta_body_is_refl_at_the_map(pointed_env):
    # the eta lemma is proved by refl, so its two endpoints are convertible
    d = pointed_env.lookup("pmap_eta")
    g = pointed_env.fresh_graph()
    ty = d.type
    while isinstance(ty, Pi):
        ty = ty.codomain
    # Id (pMap X Y) f (f.1, f.2) under the binders
    lhs, rhs = ty.lhs, ty.rhs
    assert conv(pointed_env, lhs, rhs, g)

"""Universe constraint store tests.

The oracle here is exhaustive assignment search: a constraint set over a
handful of atoms is consistent iff some assignment with values in 0..6
satisfies it, and entails c iff every satisfying assignment satisfies c.
For Max-free difference constraints over at most 4 atoms the implied
offsets never exceed the search bound, so the bounded oracle is exact.
"""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hottc.errors import LevelArityError, UniverseInconsistency
from hottc.levels import (
    EQ, LE, LT, ZERO, Constraint, ConstraintGraph, LGlobal, LMax, LMeta,
    LParam, LSucc, LZero, constraint_holds, fresh_meta, instantiate,
    level_nf, lmax, nf_to_level, subst_level, succ,
)

U = LParam("u")
V = LParam("v")
W = LParam("w")
X = LParam("x")
ATOMS = [U, V, W, X]


# ---------------------------------------------------------------------------
# Oracle


def oracle_satisfying(constraints, atoms, bound=6):
    """All assignments over 0..bound satisfying every constraint."""
    out = []
    for values in itertools.product(range(bound + 1), repeat=len(atoms)):
        asg = dict(zip(atoms, values))
        if all(constraint_holds(c, asg) for c in constraints):
            out.append(asg)
    return out


def oracle_consistent(constraints, atoms, bound=6):
    return bool(oracle_satisfying(constraints, atoms, bound))


def oracle_entails(constraints, c, atoms, bound=6):
    return all(constraint_holds(c, asg)
               for asg in oracle_satisfying(constraints, atoms, bound))


def build(constraints):
    g = ConstraintGraph()
    for c in constraints:
        g.add_constraint(c)
    return g


# ---------------------------------------------------------------------------
# Normalization


def test_nf_flattens_max_and_pushes_succ():
    l = LSucc(LMax(U, LSucc(V)))
    assert level_nf(l) == {U: 1, V: 2}


def test_nf_keeps_largest_offset_per_atom():
    assert level_nf(LMax(U, LSucc(U))) == {U: 1}


def test_nf_roundtrip():
    l = lmax(succ(U), lmax(ZERO, V))
    assert level_nf(nf_to_level(level_nf(l))) == level_nf(l)


def test_subst_level():
    assert subst_level(LSucc(U), {U: V}) == LSucc(V)
    assert subst_level(lmax(U, V), {U: ZERO}) == lmax(ZERO, V)


def test_fresh_meta_distinct():
    assert fresh_meta() != fresh_meta()


# ---------------------------------------------------------------------------
# add_constraint


def test_strict_cycle_rejected():
    g = ConstraintGraph()
    g.add_constraint(Constraint(U, LT, V))
    with pytest.raises(UniverseInconsistency) as e:
        g.add_constraint(Constraint(V, LE, U))
    assert len(e.value.cycle) == 2


def test_rejected_add_leaves_store_usable():
    g = ConstraintGraph()
    g.add_constraint(Constraint(U, LT, V))
    with pytest.raises(UniverseInconsistency):
        g.add_constraint(Constraint(V, LE, U))
    assert g.entails(Constraint(U, LT, V))
    assert not g.entails(Constraint(V, LE, U))
    g.add_constraint(Constraint(V, LE, W))


def test_transitivity():
    g = build([Constraint(U, LE, V), Constraint(V, LE, W)])
    assert g.entails(Constraint(U, LE, W))


def test_succ_le_self_rejected():
    g = ConstraintGraph()
    with pytest.raises(UniverseInconsistency):
        g.add_constraint(Constraint(LSucc(U), LE, U))


def test_eq_splits():
    g = build([Constraint(U, EQ, V)])
    assert g.entails(Constraint(U, LE, V))
    assert g.entails(Constraint(V, LE, U))
    assert g.entails(Constraint(U, EQ, V))


def test_max_on_lhs_decomposes():
    g = build([Constraint(lmax(U, V), LE, W)])
    assert g.entails(Constraint(U, LE, W))
    assert g.entails(Constraint(V, LE, W))


def test_max_on_rhs_entailed_disjunct():
    g = build([Constraint(U, LE, V)])
    g.add_constraint(Constraint(U, LE, lmax(V, W)))
    # nothing new should be forced on w
    assert not g.entails(Constraint(U, LE, W))


def test_max_on_rhs_commits_a_consistent_disjunct():
    g = ConstraintGraph()
    g.add_constraint(Constraint(U, LE, lmax(V, W)))
    assert g.entails(Constraint(U, LE, V)) or g.entails(Constraint(U, LE, W))


def test_max_on_rhs_incompleteness_is_a_clean_error():
    # u <= max(v,w) is satisfiable together with v < u and w < u only by
    # neither disjunct; documented incompleteness must error, not accept.
    g = build([Constraint(V, LT, U), Constraint(W, LT, U)])
    with pytest.raises(UniverseInconsistency):
        g.add_constraint(Constraint(U, LE, lmax(V, W)))


def test_zero_floor():
    g = ConstraintGraph()
    g.register(U)
    assert g.entails(Constraint(ZERO, LE, U))
    with pytest.raises(UniverseInconsistency):
        g.add_constraint(Constraint(LSucc(U), LE, ZERO))


# ---------------------------------------------------------------------------
# entails


def test_entails_lattice_law():
    g = ConstraintGraph()
    assert g.entails(Constraint(U, LE, lmax(U, V)))


def test_entails_weakening():
    g = build([Constraint(U, LE, V)])
    assert g.entails(Constraint(U, LE, LSucc(V)))
    assert g.entails(Constraint(U, LT, LSucc(V)))
    assert not g.entails(Constraint(U, LT, V))


def test_entails_reflexive_offsets():
    g = ConstraintGraph()
    assert g.entails(Constraint(U, LE, U))
    assert g.entails(Constraint(U, LT, LSucc(U)))
    assert not g.entails(Constraint(LSucc(U), LE, U))


def test_unknown_atoms_unconstrained():
    g = ConstraintGraph()
    assert not g.entails(Constraint(U, LE, V))
    assert g.entails(Constraint(ZERO, LE, V))


# ---------------------------------------------------------------------------
# solve_assignment


def test_solve_empty():
    g = ConstraintGraph()
    g.register(U)
    assert g.solve_assignment()[U] == 0


def test_solve_strict():
    g = build([Constraint(U, LT, V)])
    asg = g.solve_assignment()
    assert asg[U] == 0 and asg[V] == 1


def test_solve_validates():
    g = build([Constraint(U, LT, V), Constraint(LSucc(V), LE, W)])
    asg = g.solve_assignment()
    assert g.check_assignment(asg)
    assert asg[W] == 2


# ---------------------------------------------------------------------------
# instantiate


def test_instantiate_freshness():
    m1, _ = instantiate([U], [])
    m2, _ = instantiate([U], [])
    assert m1[U] != m2[U]
    assert isinstance(m1[U], LMeta)


def test_instantiate_explicit_levels():
    m, _ = instantiate([U, V], [], explicit=[ZERO, LSucc(ZERO)])
    assert m[U] == ZERO and m[V] == LSucc(ZERO)


def test_instantiate_arity_mismatch():
    with pytest.raises(LevelArityError):
        instantiate([U, V], [], explicit=[ZERO])


def test_instantiate_substitutes_constraints():
    m, cs = instantiate([U, V], [Constraint(U, LT, V)])
    assert cs == [Constraint(m[U], LT, m[V])]
    assert isinstance(cs[0].lhs, LMeta) and isinstance(cs[0].rhs, LMeta)


def test_instantiate_leaves_globals_alone():
    gl = LGlobal("fe")
    m, cs = instantiate([], [Constraint(gl, LT, LGlobal("fe2"))])
    assert cs == [Constraint(gl, LT, LGlobal("fe2"))]


def test_instantiate_freshens_leaked_metas():
    leaked = fresh_meta()
    _, cs1 = instantiate([U], [Constraint(U, LE, leaked)])
    _, cs2 = instantiate([U], [Constraint(U, LE, leaked)])
    assert cs1[0].rhs != leaked
    assert cs1[0].rhs != cs2[0].rhs


# ---------------------------------------------------------------------------
# Oracle agreement


def random_constraint(rng, atoms):
    def atom():
        a = rng.choice(atoms + [ZERO])
        for _ in range(rng.randrange(3)):
            a = LSucc(a)
        return a
    return Constraint(atom(), rng.choice([LE, LT]), atom())


def random_constraint_set(rng):
    atoms = ATOMS[:rng.randrange(1, 5)]
    return [random_constraint(rng, atoms)
            for _ in range(rng.randrange(9))], atoms


@pytest.mark.parametrize("seed", range(20))
def test_oracle_agreement_batch(seed):
    rng = random.Random(seed)
    for _ in range(50):
        cs, atoms = random_constraint_set(rng)
        try:
            g = build(cs)
            ok = True
        except UniverseInconsistency:
            ok = False
        assert ok == oracle_consistent(cs, atoms), cs
        if not ok:
            continue
        query = random_constraint(rng, atoms)
        assert g.entails(query) == oracle_entails(cs, query, atoms), \
            (cs, query)


def test_self_entailment():
    rng = random.Random(7)
    for _ in range(100):
        cs, _ = random_constraint_set(rng)
        try:
            g = build(cs)
        except UniverseInconsistency:
            continue
        for c in cs:
            assert g.entails(c), (cs, c)


def test_solve_assignment_fuzzed():
    rng = random.Random(11)
    for _ in range(200):
        cs, _ = random_constraint_set(rng)
        try:
            g = build(cs)
        except UniverseInconsistency:
            continue
        assert g.check_assignment(g.solve_assignment()), cs


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2),
                          st.booleans(), st.integers(0, 3), st.integers(0, 2)),
                max_size=8))
@settings(max_examples=200, deadline=None)
def test_consistency_matches_oracle_hypothesis(spec):
    cs = []
    for li, lo, strict, ri, ro in spec:
        lhs, rhs = ATOMS[li], ATOMS[ri]
        for _ in range(lo):
            lhs = LSucc(lhs)
        for _ in range(ro):
            rhs = LSucc(rhs)
        cs.append(Constraint(lhs, LT if strict else LE, rhs))
    try:
        build(cs)
        ok = True
    except UniverseInconsistency:
        ok = False
    assert ok == oracle_consistent(cs, ATOMS)

"""De Bruijn indexed term language.

Terms are immutable dataclasses.  Name hints and implicitness markers are
carried for printing only and are excluded from equality, so `==` is exactly
alpha-equality.  Binders appear in three places (Pi codomain, Lam body,
Sigma second component); eliminator motives and cases are ordinary
function-valued terms, not binding forms.

Each class lists its term-valued fields in `_spec` as (field, binders), which
drives the generic traversal used by shift and subst.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable, Tuple

from .errors import ScopeError
from .levels import LevelExpr


class Term:
    __slots__ = ()
    _spec: Tuple[Tuple[str, int], ...] = ()


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    generated = cls.__hash__

    def cached_hash(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = cached_hash
    return cls


@_node
class Var(Term):
    index: int


@_node
class Sort(Term):
    level: LevelExpr


@_node
class Pi(Term):
    domain: Term
    codomain: Term  # binds 1
    hint: str = field(default="x", compare=False)
    implicit: bool = field(default=False, compare=False)
    _spec = (("domain", 0), ("codomain", 1))


@_node
class Lam(Term):
    domain: Term
    body: Term  # binds 1
    hint: str = field(default="x", compare=False)
    _spec = (("domain", 0), ("body", 1))


@_node
class App(Term):
    fn: Term
    arg: Term
    _spec = (("fn", 0), ("arg", 0))


@_node
class Sigma(Term):
    first: Term
    second: Term  # binds 1
    hint: str = field(default="x", compare=False)
    _spec = (("first", 0), ("second", 1))


@_node
class Pair(Term):
    fst: Term
    snd: Term
    annotation: Term  # the Sigma type, so projection inference never guesses
    _spec = (("fst", 0), ("snd", 0), ("annotation", 0))


@_node
class Proj1(Term):
    pair: Term
    _spec = (("pair", 0),)


@_node
class Proj2(Term):
    pair: Term
    _spec = (("pair", 0),)


@_node
class Sum(Term):
    left: Term
    right: Term
    _spec = (("left", 0), ("right", 0))


@_node
class Inl(Term):
    value: Term
    right_ty: Term
    _spec = (("value", 0), ("right_ty", 0))


@_node
class Inr(Term):
    value: Term
    left_ty: Term
    _spec = (("value", 0), ("left_ty", 0))


@_node
class SumElim(Term):
    motive: Term
    left_case: Term
    right_case: Term
    scrut: Term
    _spec = (("motive", 0), ("left_case", 0), ("right_case", 0), ("scrut", 0))


@_node
class Unit(Term):
    pass


@_node
class Star(Term):
    pass


@_node
class UnitElim(Term):
    motive: Term
    case: Term
    scrut: Term
    _spec = (("motive", 0), ("case", 0), ("scrut", 0))


@_node
class Empty(Term):
    pass


@_node
class EmptyElim(Term):
    motive: Term
    scrut: Term
    _spec = (("motive", 0), ("scrut", 0))


@_node
class Nat(Term):
    pass


@_node
class Zero(Term):
    pass


@_node
class Succ(Term):
    pred: Term
    _spec = (("pred", 0),)


@_node
class NatElim(Term):
    motive: Term
    zero_case: Term
    succ_case: Term
    scrut: Term
    _spec = (("motive", 0), ("zero_case", 0), ("succ_case", 0), ("scrut", 0))


@_node
class Id(Term):
    ty: Term
    lhs: Term
    rhs: Term
    _spec = (("ty", 0), ("lhs", 0), ("rhs", 0))


@_node
class Refl(Term):
    ty: Term
    point: Term
    _spec = (("ty", 0), ("point", 0))


@_node
class J(Term):
    """Based path induction.  motive : forall (y : A), Id A a y -> Sort;
    the base point and endpoint are recovered from the path's type."""
    motive: Term
    refl_case: Term
    path: Term
    _spec = (("motive", 0), ("refl_case", 0), ("path", 0))


@_node
class Transport(Term):
    family: Term  # A -> Sort
    path: Term
    payload: Term
    _spec = (("family", 0), ("path", 0), ("payload", 0))


@_node
class ApD(Term):
    """Dependent application to a path.  The family annotation makes the
    Refl reduct's type available without inference."""
    family: Term  # A -> Sort
    fn: Term
    path: Term
    _spec = (("family", 0), ("fn", 0), ("path", 0))


# Higher inductive primitives.  Point constructors compute under their
# eliminators; path constructors are normal forms.


@_node
class Interval(Term):
    pass


@_node
class IZero(Term):
    pass


@_node
class IOne(Term):
    pass


@_node
class Seg(Term):
    pass


@_node
class IntervalInd(Term):
    motive: Term
    zero_case: Term
    one_case: Term
    seg_case: Term
    scrut: Term
    _spec = (("motive", 0), ("zero_case", 0), ("one_case", 0),
             ("seg_case", 0), ("scrut", 0))


@_node
class Circle(Term):
    pass


@_node
class Base(Term):
    pass


@_node
class Loop(Term):
    pass


@_node
class CircleInd(Term):
    motive: Term
    base_case: Term
    loop_case: Term
    scrut: Term
    _spec = (("motive", 0), ("base_case", 0), ("loop_case", 0), ("scrut", 0))


@_node
class Susp(Term):
    ty: Term
    _spec = (("ty", 0),)


@_node
class North(Term):
    ty: Term
    _spec = (("ty", 0),)


@_node
class South(Term):
    ty: Term
    _spec = (("ty", 0),)


@_node
class Merid(Term):
    ty: Term
    point: Term
    _spec = (("ty", 0), ("point", 0))


@_node
class SuspInd(Term):
    motive: Term
    north_case: Term
    south_case: Term
    merid_case: Term
    scrut: Term
    _spec = (("motive", 0), ("north_case", 0), ("south_case", 0),
             ("merid_case", 0), ("scrut", 0))


@_node
class Coeq(Term):
    """Coequalizer of f, g : A -> B."""
    f: Term
    g: Term
    _spec = (("f", 0), ("g", 0))


@_node
class CoeqPoint(Term):
    f: Term
    g: Term
    point: Term
    _spec = (("f", 0), ("g", 0), ("point", 0))


@_node
class CoeqGlue(Term):
    f: Term
    g: Term
    point: Term
    _spec = (("f", 0), ("g", 0), ("point", 0))


@_node
class CoeqInd(Term):
    motive: Term
    point_case: Term
    glue_case: Term
    scrut: Term
    _spec = (("motive", 0), ("point_case", 0), ("glue_case", 0), ("scrut", 0))


@_node
class Trunc(Term):
    ty: Term
    _spec = (("ty", 0),)


@_node
class Tr(Term):
    ty: Term
    point: Term
    _spec = (("ty", 0), ("point", 0))


@_node
class TrPath(Term):
    ty: Term
    lhs: Term
    rhs: Term
    _spec = (("ty", 0), ("lhs", 0), ("rhs", 0))


@_node
class TruncInd(Term):
    motive: Term
    prop_case: Term
    point_case: Term
    scrut: Term
    _spec = (("motive", 0), ("prop_case", 0), ("point_case", 0), ("scrut", 0))


@_node
class Const(Term):
    name: str
    levels: Tuple[LevelExpr, ...] = ()


@_node
class MetaVar(Term):
    """Elaboration-time hole; never reaches the kernel."""
    id: int


# ---------------------------------------------------------------------------
# Traversal


def map_subterms(t: Term, f: Callable[[Term, int], Term]) -> Term:
    """Rebuild t with f applied to each immediate subterm; f receives the
    number of binders crossed (0 or 1).  Shares nodes when nothing changed."""
    spec = t._spec
    if not spec:
        return t
    td = t.__dict__
    updates = None
    for name, binders in spec:
        old = td[name]
        new = f(old, binders)
        if new is not old:
            if updates is None:
                updates = {}
            updates[name] = new
    if updates is None:
        return t
    # rebuild without going through the dataclass constructor; drop the
    # per-node caches, which describe the old children
    n = object.__new__(type(t))
    d = n.__dict__
    d.update(td)
    d.pop("_h", None)
    d.pop("_mf", None)
    d.pop("_hm", None)
    d.update(updates)
    return n


def fold_subterms(t: Term):
    for name, binders in t._spec:
        yield getattr(t, name), binders


def max_free(t: Term) -> int:
    """Smallest binder depth under which t is well scoped; cached per node
    so shift and subst can skip closed subtrees."""
    v = t.__dict__.get("_mf")
    if v is not None:
        return v
    if isinstance(t, Var):
        v = t.index + 1
    else:
        v = 0
        for s, b in fold_subterms(t):
            m = max_free(s) - b
            if m > v:
                v = m
    object.__setattr__(t, "_mf", v)
    return v


def has_meta(t: Term) -> bool:
    """Whether any MetaVar occurs in t; cached per node."""
    v = t.__dict__.get("_hm")
    if v is None:
        if isinstance(t, MetaVar):
            v = True
        else:
            v = any(has_meta(s) for s, _ in fold_subterms(t))
        object.__setattr__(t, "_hm", v)
    return v


def _rebuild(t: Term, updates: dict) -> Term:
    """Copy t with some term fields replaced, skipping the dataclass
    constructor; the per-node caches describe the old children, so drop them."""
    n = object.__new__(type(t))
    d = n.__dict__
    d.update(t.__dict__)
    d.pop("_h", None)
    d.pop("_mf", None)
    d.pop("_hm", None)
    d.update(updates)
    return n


def shift(t: Term, amount: int, cutoff: int = 0) -> Term:
    if amount == 0:
        return t

    def go(t: Term, cutoff: int) -> Term:
        mf = t.__dict__.get("_mf")
        if (max_free(t) if mf is None else mf) <= cutoff:
            return t
        if type(t) is Var:
            if t.index < cutoff:
                return t
            if t.index + amount < cutoff:
                raise ScopeError(f"shift underflow at index {t.index}")
            return Var(t.index + amount)
        td = t.__dict__
        updates = None
        for name, binders in t._spec:
            old = td[name]
            new = go(old, cutoff + binders)
            if new is not old:
                if updates is None:
                    updates = {}
                updates[name] = new
        return t if updates is None else _rebuild(t, updates)
    return go(t, cutoff)


def subst(t: Term, target: int, replacement: Term) -> Term:
    """Replace Var(target) by replacement; free indices above target drop."""
    def go(t: Term, depth: int) -> Term:
        k = target + depth
        mf = t.__dict__.get("_mf")
        if (max_free(t) if mf is None else mf) <= k:
            return t
        if type(t) is Var:
            if t.index == k:
                return shift(replacement, depth, 0)
            if t.index > k:
                return Var(t.index - 1)
            return t
        td = t.__dict__
        updates = None
        for name, binders in t._spec:
            old = td[name]
            new = go(old, depth + binders)
            if new is not old:
                if updates is None:
                    updates = {}
                updates[name] = new
        return t if updates is None else _rebuild(t, updates)
    return go(t, 0)


def subst_top(body: Term, arg: Term) -> Term:
    return subst(body, 0, arg)


def syntactic_equal(a: Term, b: Term) -> bool:
    return a == b


def subst_levels(t: Term, mapping) -> Term:
    """Apply a level substitution throughout (Sort levels and Const arguments)."""
    from .levels import subst_level
    if not mapping:
        return t
    if isinstance(t, Sort):
        return Sort(subst_level(t.level, mapping))
    if isinstance(t, Const):
        return Const(t.name, tuple(subst_level(l, mapping) for l in t.levels))
    return map_subterms(t, lambda s, b: subst_levels(s, mapping))


def well_scoped(t: Term, depth: int = 0) -> bool:
    if isinstance(t, Var):
        return t.index < depth
    return all(well_scoped(s, depth + b) for s, b in fold_subterms(t))


def max_free_index(t: Term, depth: int = 0) -> int:
    """Largest free index relative to depth, or -1 if closed."""
    if isinstance(t, Var):
        return t.index - depth
    best = -1
    for s, b in fold_subterms(t):
        best = max(best, max_free_index(s, depth + b))
    return best


def contains_meta(t: Term) -> bool:
    if isinstance(t, MetaVar):
        return True
    return any(contains_meta(s) for s, _ in fold_subterms(t))


def apps(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def nat_lit(n: int) -> Term:
    t: Term = Zero()
    for _ in range(n):
        t = Succ(t)
    return t


def unfold_apps(t: Term) -> Tuple[Term, list]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args

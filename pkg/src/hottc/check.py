"""Bidirectional kernel typing.

Every kernel term infers (annotations on Pair/Refl/Inl/Inr keep the rules
syntax-directed); check is infer followed by cumulativity subtyping.

Universe constraints are produced only here.  Conversion runs with level
callbacks that first consult the store and otherwise optimistically record
the missing constraint; on structural success the recorded constraints are
committed to the working graph (which raises on inconsistency), on failure
they are discarded.
"""

from __future__ import annotations

from typing import List, Optional, Set

from .env import AXIOM, DEFINITION, Definition, Environment, PRIMITIVE
from .errors import (
    LevelArityError, NotAFunction, NotASigma, TypeMismatch, UnboundVariable,
    UnknownName,
)
from .levels import (
    Constraint, EQ, LE, ZERO, LGlobal, LParam, LSucc, lmax, subst_constraint,
)
from .reduce import Converter, whnf
from .terms import (
    ApD, App, Base, Circle, CircleInd, Coeq, CoeqGlue, CoeqInd, CoeqPoint,
    Const, Empty, EmptyElim, Id, Inl, Inr, Interval, IntervalInd, IOne,
    IZero, J, Lam, Loop, Merid, MetaVar, Nat, NatElim, North, Pair, Pi,
    Proj1, Proj2, Refl, Seg, Sigma, Sort, South, Star, Succ, Sum, SumElim,
    Susp, SuspInd, Term, Tr, TrPath, Transport, Trunc, TruncInd, Unit,
    UnitElim, Var, Zero, shift, subst_levels, subst_top,
)


class Checker:
    """Owns a working constraint graph for one declaration."""

    def __init__(self, env: Environment, g=None):
        self.env = env
        self.g = g if g is not None else env.fresh_graph()
        self._collected: List[Constraint] = []

    # -- constraint-collecting conversion -----------------------------------

    def _le(self, u, v) -> bool:
        c = Constraint(u, LE, v)
        if self.g.entails(c):
            return True
        self._collected.append(c)
        return True

    def _eq(self, u, v) -> bool:
        if u == v:
            return True
        c = Constraint(u, EQ, v)
        if self.g.entails(c):
            return True
        self._collected.append(c)
        return True

    def _converter(self) -> Converter:
        c = Converter(self.env, self._le, self._eq)
        c.mark = lambda: len(self._collected)
        c.reset = lambda n: self._collected.__delitem__(slice(n, None))
        return c

    def _commit(self) -> None:
        for c in self._collected:
            self.g.add_constraint(c)
        self._collected.clear()

    def ensure_subtype(self, got: Term, expected: Term,
                       what: str = "term") -> None:
        self._collected.clear()
        if self._converter().subtype(got, expected):
            self._commit()
            return
        self._collected.clear()
        raise TypeMismatch(expected, got,
                           message=f"{what}: type mismatch")

    def ensure_conv(self, got: Term, expected: Term,
                    what: str = "term") -> None:
        self._collected.clear()
        if self._converter().conv(got, expected):
            self._commit()
            return
        self._collected.clear()
        raise TypeMismatch(expected, got,
                           message=f"{what}: not convertible")

    # -- helpers -------------------------------------------------------------

    def infer_sort(self, ctx, t: Term):
        """Infer t's type and demand it be a sort; returns the level."""
        ty = whnf(self.env, self.infer(ctx, t))
        if isinstance(ty, Sort):
            return ty.level
        raise TypeMismatch(Sort(ZERO), ty, message="expected a type")

    def check(self, ctx, t: Term, expected: Term) -> None:
        got = self.infer(ctx, t)
        self.ensure_subtype(got, expected)

    def _whnf_as(self, ctx, t: Term, cls, err):
        ty = whnf(self.env, self.infer(ctx, t))
        if not isinstance(ty, cls):
            raise err
        return ty

    def motive_level(self, ctx, motive: Term, domains: List[Term]):
        """Demand motive : forall (x0 : D0) ... (xn : Dn), Sort l; each Di
        is given in the context extended by the previous binders.  Returns l.
        """
        ty = whnf(self.env, self.infer(ctx, motive))
        for d in domains:
            if not isinstance(ty, Pi):
                raise TypeMismatch(Pi(d, Sort(ZERO)), ty,
                                   message="motive: expected a function type")
            self.ensure_conv(ty.domain, d, "motive domain")
            ty = whnf(self.env, ty.codomain)
        if not isinstance(ty, Sort):
            raise TypeMismatch(Sort(ZERO), ty,
                               message="motive: target must be a sort")
        return ty.level

    def _id_components(self, ctx, path: Term):
        ty = whnf(self.env, self.infer(ctx, path))
        if not isinstance(ty, Id):
            raise TypeMismatch(Id(Var(0), Var(0), Var(0)), ty,
                               message="expected a path")
        return ty.ty, ty.lhs, ty.rhs

    # -- inference -----------------------------------------------------------

    def infer(self, ctx: List[Term], t: Term) -> Term:
        env = self.env
        match t:
            case Var(index=i):
                if i < 0 or i >= len(ctx):
                    raise UnboundVariable(f"unbound variable index {i}")
                return shift(ctx[-1 - i], i + 1)
            case Sort(level=l):
                for a in _level_atoms_of(l):
                    self.g.register(a)
                return Sort(LSucc(l))
            case Pi(domain=a, codomain=b):
                i = self.infer_sort(ctx, a)
                j = self.infer_sort(ctx + [a], b)
                return Sort(lmax(i, j))
            case Lam(domain=a, body=body, hint=h):
                self.infer_sort(ctx, a)
                return Pi(a, self.infer(ctx + [a], body), hint=h)
            case App(fn=f, arg=arg):
                fty = whnf(env, self.infer(ctx, f))
                if not isinstance(fty, Pi):
                    raise NotAFunction("application head is not a function")
                self.check(ctx, arg, fty.domain)
                return subst_top(fty.codomain, arg)
            case Sigma(first=a, second=b):
                i = self.infer_sort(ctx, a)
                j = self.infer_sort(ctx + [a], b)
                return Sort(lmax(i, j))
            case Pair(fst=f, snd=s, annotation=ann):
                self.infer_sort(ctx, ann)
                sty = whnf(env, ann)
                if not isinstance(sty, Sigma):
                    raise NotASigma("pair annotation is not a sigma type")
                self.check(ctx, f, sty.first)
                self.check(ctx, s, subst_top(sty.second, f))
                return ann
            case Proj1(pair=p):
                sty = self._whnf_as(ctx, p, Sigma,
                                    NotASigma("projection from non-pair"))
                return sty.first
            case Proj2(pair=p):
                sty = self._whnf_as(ctx, p, Sigma,
                                    NotASigma("projection from non-pair"))
                return subst_top(sty.second, Proj1(p))
            case Sum(left=a, right=b):
                return Sort(lmax(self.infer_sort(ctx, a),
                                 self.infer_sort(ctx, b)))
            case Inl(value=v, right_ty=b):
                self.infer_sort(ctx, b)
                return Sum(self.infer(ctx, v), b)
            case Inr(value=v, left_ty=a):
                self.infer_sort(ctx, a)
                return Sum(a, self.infer(ctx, v))
            case SumElim(motive=m, left_case=lc, right_case=rc, scrut=s):
                sty = self._whnf_as(ctx, s, Sum,
                                    TypeMismatch(Sum(Var(0), Var(0)), None,
                                                 message="sumrec scrutinee"))
                a, b = sty.left, sty.right
                self.motive_level(ctx, m, [Sum(a, b)])
                m1 = shift(m, 1)
                self.check(ctx, lc,
                           Pi(a, App(m1, Inl(Var(0), shift(b, 1)))))
                self.check(ctx, rc,
                           Pi(b, App(m1, Inr(Var(0), shift(a, 1)))))
                return App(m, s)
            case Unit() | Empty() | Nat() | Interval() | Circle():
                return Sort(ZERO)
            case Star():
                return Unit()
            case UnitElim(motive=m, case=c, scrut=s):
                self.check(ctx, s, Unit())
                self.motive_level(ctx, m, [Unit()])
                self.check(ctx, c, App(m, Star()))
                return App(m, s)
            case EmptyElim(motive=m, scrut=s):
                self.check(ctx, s, Empty())
                self.motive_level(ctx, m, [Empty()])
                return App(m, s)
            case Zero():
                return Nat()
            case Succ(pred=n):
                self.check(ctx, n, Nat())
                return Nat()
            case NatElim(motive=m, zero_case=z, succ_case=sc, scrut=s):
                self.check(ctx, s, Nat())
                self.motive_level(ctx, m, [Nat()])
                self.check(ctx, z, App(m, Zero()))
                self.check(ctx, sc, Pi(
                    Nat(),
                    Pi(App(shift(m, 1), Var(0)),
                       App(shift(m, 2), Succ(Var(1))))))
                return App(m, s)
            case Id(ty=a, lhs=x, rhs=y):
                i = self.infer_sort(ctx, a)
                self.check(ctx, x, a)
                self.check(ctx, y, a)
                return Sort(i)
            case Refl(ty=a, point=x):
                self.infer_sort(ctx, a)
                self.check(ctx, x, a)
                return Id(a, x, x)
            case J(motive=m, refl_case=d, path=p):
                a, x, y = self._id_components(ctx, p)
                self.motive_level(ctx, m, [
                    a, Id(shift(a, 1), shift(x, 1), Var(0))])
                self.check(ctx, d, App(App(m, x), Refl(a, x)))
                return App(App(m, y), p)
            case Transport(family=fam, path=p, payload=u):
                a, x, y = self._id_components(ctx, p)
                self.motive_level(ctx, fam, [a])
                self.check(ctx, u, App(fam, x))
                return App(fam, y)
            case ApD(family=fam, fn=f, path=p):
                a, x, y = self._id_components(ctx, p)
                self.motive_level(ctx, fam, [a])
                self.check(ctx, f, Pi(a, App(shift(fam, 1), Var(0))))
                return Id(App(fam, y),
                          Transport(fam, p, App(f, x)), App(f, y))
            case IZero() | IOne():
                return Interval()
            case Seg():
                return Id(Interval(), IZero(), IOne())
            case IntervalInd(motive=m, zero_case=a, one_case=b,
                             seg_case=s, scrut=x):
                self.check(ctx, x, Interval())
                self.motive_level(ctx, m, [Interval()])
                self.check(ctx, a, App(m, IZero()))
                self.check(ctx, b, App(m, IOne()))
                self.check(ctx, s, Id(App(m, IOne()),
                                      Transport(m, Seg(), a), b))
                return App(m, x)
            case Base():
                return Circle()
            case Loop():
                return Id(Circle(), Base(), Base())
            case CircleInd(motive=m, base_case=b, loop_case=l, scrut=x):
                self.check(ctx, x, Circle())
                self.motive_level(ctx, m, [Circle()])
                self.check(ctx, b, App(m, Base()))
                self.check(ctx, l, Id(App(m, Base()),
                                      Transport(m, Loop(), b), b))
                return App(m, x)
            case Susp(ty=a) | Trunc(ty=a):
                return Sort(self.infer_sort(ctx, a))
            case North(ty=a) | South(ty=a):
                self.infer_sort(ctx, a)
                return Susp(a)
            case Merid(ty=a, point=p):
                self.infer_sort(ctx, a)
                self.check(ctx, p, a)
                return Id(Susp(a), North(a), South(a))
            case SuspInd(motive=m, north_case=n, south_case=s,
                         merid_case=mm, scrut=x):
                xty = self._whnf_as(ctx, x, Susp,
                                    TypeMismatch(Susp(Var(0)), None,
                                                 message="suspind scrutinee"))
                a = xty.ty
                self.motive_level(ctx, m, [Susp(a)])
                self.check(ctx, n, App(m, North(a)))
                self.check(ctx, s, App(m, South(a)))
                a1, m1 = shift(a, 1), shift(m, 1)
                self.check(ctx, mm, Pi(a, Id(
                    App(m1, South(a1)),
                    Transport(m1, Merid(a1, Var(0)), shift(n, 1)),
                    shift(s, 1))))
                return App(m, x)
            case Coeq(f=f, g=g2):
                a, b = self._coeq_sides(ctx, f, g2)
                return Sort(lmax(self.infer_sort(ctx, a),
                                 self.infer_sort(ctx, b)))
            case CoeqPoint(f=f, g=g2, point=p):
                a, b = self._coeq_sides(ctx, f, g2)
                self.check(ctx, p, b)
                return Coeq(f, g2)
            case CoeqGlue(f=f, g=g2, point=p):
                a, b = self._coeq_sides(ctx, f, g2)
                self.check(ctx, p, a)
                return Id(Coeq(f, g2),
                          CoeqPoint(f, g2, App(f, p)),
                          CoeqPoint(f, g2, App(g2, p)))
            case CoeqInd(motive=m, point_case=pc, glue_case=gc, scrut=x):
                xty = self._whnf_as(ctx, x, Coeq,
                                    TypeMismatch(Coeq(Var(0), Var(0)), None,
                                                 message="coeqind scrutinee"))
                f, g2 = xty.f, xty.g
                a, b = self._coeq_sides(ctx, f, g2)
                self.motive_level(ctx, m, [Coeq(f, g2)])
                m1 = shift(m, 1)
                f1, g1 = shift(f, 1), shift(g2, 1)
                self.check(ctx, pc, Pi(
                    b, App(m1, CoeqPoint(f1, g1, Var(0)))))
                pc1 = shift(pc, 1)
                self.check(ctx, gc, Pi(a, Id(
                    App(m1, CoeqPoint(f1, g1, App(g1, Var(0)))),
                    Transport(m1, CoeqGlue(f1, g1, Var(0)),
                              App(pc1, App(f1, Var(0)))),
                    App(pc1, App(g1, Var(0))))))
                return App(m, x)
            case Tr(ty=a, point=p):
                self.infer_sort(ctx, a)
                self.check(ctx, p, a)
                return Trunc(a)
            case TrPath(ty=a, lhs=x, rhs=y):
                self.infer_sort(ctx, a)
                self.check(ctx, x, Trunc(a))
                self.check(ctx, y, Trunc(a))
                return Id(Trunc(a), x, y)
            case TruncInd(motive=m, prop_case=hp, point_case=pc, scrut=x):
                xty = self._whnf_as(ctx, x, Trunc,
                                    TypeMismatch(Trunc(Var(0)), None,
                                                 message="truncind scrutinee"))
                a = xty.ty
                self.motive_level(ctx, m, [Trunc(a)])
                m1, m2, m3 = shift(m, 1), shift(m, 2), shift(m, 3)
                self.check(ctx, hp, Pi(
                    Trunc(a),
                    Pi(App(m1, Var(0)),
                       Pi(App(m2, Var(1)),
                          Id(App(m3, Var(2)), Var(1), Var(0))))))
                self.check(ctx, pc,
                           Pi(a, App(m1, Tr(shift(a, 1), Var(0)))))
                return App(m, x)
            case Const(name=name, levels=levels):
                d = self.env.lookup(name)
                if len(levels) != d.arity:
                    raise LevelArityError(
                        f"'{name}' expects {d.arity} level argument(s), "
                        f"got {len(levels)}")
                ty, _, cs = _instantiate_at(d, list(levels))
                for c in cs:
                    self.g.add_constraint(c)
                return ty
            case MetaVar():
                raise TypeMismatch(None, None,
                                   message="unsolved hole reached the kernel")
        raise TypeMismatch(None, None,
                           message=f"no typing rule for {type(t).__name__}")

    def _coeq_sides(self, ctx, f: Term, g2: Term):
        fty = whnf(self.env, self.infer(ctx, f))
        if not isinstance(fty, Pi):
            raise NotAFunction("coequalizer argument is not a function")
        a = fty.domain
        try:
            b = shift(fty.codomain, -1)
        except Exception:
            raise TypeMismatch(None, fty,
                               message="coequalizer needs a non-dependent map")
        self.ensure_conv(self.infer(ctx, g2), Pi(a, shift(b, 1)),
                         "parallel pair")
        return a, b


def _level_atoms_of(l):
    from .levels import level_atoms
    return [a for a in level_atoms(l) if not isinstance(a, type(ZERO))]


def _instantiate_at(d: Definition, levels):
    """Type and constraints of d at the given level arguments, with any
    metas that leaked into the stored constraints freshened."""
    from .levels import LMeta, fresh_meta, level_atoms
    mapping = dict(zip(d.level_params, levels))
    for c in d.constraints:
        for atom in list(level_atoms(c.lhs)) + list(level_atoms(c.rhs)):
            if isinstance(atom, (LMeta, LParam)) and atom not in mapping:
                mapping[atom] = fresh_meta()
    ty = subst_levels(d.type, mapping)
    return ty, mapping, [subst_constraint(c, mapping) for c in d.constraints]


# ---------------------------------------------------------------------------
# Declarations


def _collect_metas(ty: Term, body: Optional[Term], constraints) -> List:
    """Residual level metas in first-occurrence order (type, body, then
    constraints)."""
    from .levels import LMeta, level_atoms
    from .terms import fold_subterms
    order: List = []

    def see_level(l):
        for a in level_atoms(l):
            if isinstance(a, LMeta) and a not in order:
                order.append(a)

    def walk(t: Term):
        if isinstance(t, Sort):
            see_level(t.level)
        elif isinstance(t, Const):
            for l in t.levels:
                see_level(l)
        for s, _ in fold_subterms(t):
            walk(s)

    walk(ty)
    if body is not None:
        walk(body)
    for c in constraints:
        see_level(c.lhs)
        see_level(c.rhs)
    return order


def _covers(big, small, strict: int) -> bool:
    # a ZERO part contributes a bare constant, which any part of the other
    # side dominates once its own offset is at least as large
    return all((a in big and off + strict <= big[a])
               or (a == ZERO and any(off + strict <= o for o in big.values()))
               for a, off in small.items())


def _trivial_constraint(c: Constraint) -> bool:
    """Holds under every level assignment, so storing it is pointless."""
    from .levels import level_nf
    if c.lhs == c.rhs:
        return True
    lhs, rhs = level_nf(c.lhs), level_nf(c.rhs)
    if c.rel == EQ:
        return _covers(rhs, lhs, 0) and _covers(lhs, rhs, 0)
    return _covers(rhs, lhs, 1 if c.rel == "<" else 0)


def _minimize_metas(g, ty: Term, body: Optional[Term], constraints):
    """Replace each residual level meta by its least solution expressed
    over the graph's rigid atoms (universe minimization).  Bails out,
    leaving everything unchanged, when a least solution is not expressible
    or when the substituted constraints would restrict the parameters
    beyond what the original store entails."""
    from .levels import LMeta, nf_to_level
    metas = _collect_metas(ty, body, constraints)
    if not metas:
        return ty, body, constraints
    rigid = [a for a in g.atoms if not isinstance(a, LMeta)]
    sol = {}
    for m in metas:
        nf = {ZERO: 0}  # levels live over the naturals
        for s in rigid:
            d = g.path_weight(s, m)
            if d is None:
                continue
            if d < 0:
                return ty, body, constraints  # bound not expressible
            if nf.get(s, -1) < d:
                nf[s] = d
        sol[m] = nf_to_level(nf)
    new_cs = [subst_constraint(c, sol) for c in constraints]
    new_cs = [c for c in new_cs if not _trivial_constraint(c)]
    if any(not g.entails(c) for c in new_cs):
        return ty, body, constraints  # would over-constrain the parameters
    ty = subst_levels(ty, sol)
    body = subst_levels(body, sol) if body is not None else None
    return ty, body, new_cs


def _canonicalize_metas(ty: Term, body: Optional[Term], constraints):
    """Rename residual level metas to 0..n-1 in first-occurrence order,
    so elaborating the same source twice stores identical definitions."""
    from .levels import LMeta
    order = _collect_metas(ty, body, constraints)
    if not order:
        return ty, body, constraints
    mapping = {m: LMeta(i) for i, m in enumerate(order)}
    ty = subst_levels(ty, mapping)
    body = subst_levels(body, mapping) if body is not None else None
    constraints = [subst_constraint(c, mapping) for c in constraints]
    return ty, body, constraints


def referenced_axioms(env: Environment, *terms: Optional[Term]) -> frozenset:
    deps: Set[str] = set()

    def walk(t: Term):
        if isinstance(t, Const):
            deps.update(env.lookup(t.name).axiom_deps)
        from .terms import fold_subterms
        for s, _ in fold_subterms(t):
            walk(s)
    for t in terms:
        if t is not None:
            walk(t)
    return frozenset(deps)


def add_declaration(env: Environment, name: str,
                    level_params: List[LParam],
                    constraints: List[Constraint],
                    ty: Term, body: Optional[Term],
                    opaque: bool = False, kind: str = DEFINITION,
                    is_class: bool = False,
                    instance_priority: Optional[int] = None,
                    monomorphic: bool = False) -> Definition:
    """Kernel-check one declaration and extend the environment.

    For [monomorphic] declarations the level parameters become globals
    living in the environment's shared graph, so every use sees the same
    levels.  Otherwise constraints collected while checking are stored on
    the definition and re-instantiated at each use.
    """
    if name in env:
        from .errors import DuplicateName
        raise DuplicateName(f"duplicate name '{name}'")
    if monomorphic and level_params:
        mapping = {p: LGlobal(f"{name}.{p.name}") for p in level_params}
        constraints = [subst_constraint(c, mapping) for c in constraints]
        ty = subst_levels(ty, mapping)
        body = subst_levels(body, mapping) if body is not None else None
        level_params = []

    ck = Checker(env)
    baseline = len(ck.g.constraints)
    for p in level_params:
        ck.g.register(p)
    for c in constraints:
        ck.g.add_constraint(c)
    ck.infer_sort([], ty)
    if body is not None:
        ck.check([], body, ty)
    collected = ck.g.constraints[baseline:]

    if not monomorphic:
        collected = [c for c in collected if not _trivial_constraint(c)]
        ty, body, collected = _minimize_metas(ck.g, ty, body, collected)
        # any metas the minimizer could not eliminate are renumbered from
        # zero so the stored form is reproducible; uses re-freshen them
        ty, body, collected = _canonicalize_metas(ty, body, collected)

    deps = referenced_axioms(env, ty, body)
    if kind == AXIOM:
        deps = deps | {name}
    d = Definition(name, level_params, list(collected), ty, body,
                   opaque=opaque, kind=kind, axiom_deps=deps,
                   is_class=is_class, instance_priority=instance_priority,
                   monomorphic=monomorphic)
    if monomorphic:
        env.graph = ck.g  # globals and their constraints persist
        d.constraints = []
    env.add(d)
    return d

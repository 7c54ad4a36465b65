"""Surface-to-kernel elaboration.

Metavariables are closed: a hole created in a context of length n is
represented as a fresh head applied to the n context variables, so solutions
are lambda telescopes and Miller pattern unification applies.  Unification
is first-order up to weak-head reduction; there are no postponed
constraints.  Universe levels are never solved here; level metas flow into
the kernel where the constraint store deals with them.

Instance goals (implicit arguments whose type heads a [class] constant) are
queued per declaration and resolved by depth-limited backward chaining after
the body is elaborated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .env import Environment
from .errors import (
    InstanceDepthExceeded, InstanceNotFound, LevelArityError, OccursCheck,
    ParseError, TypeMismatch, UnificationFailure, UnknownName, UnsolvedHole,
)
from .levels import LMax, LMeta, LParam, LSucc, LevelExpr, fresh_meta
from .parser import LEVEL_HOLE
from .reduce import whnf
from .surface import (
    SAt, SDecl, SHole, SId, SKw, SLam, SName, SPair, SPi, SProj, SSigma,
    SSum, SType, SApp, Surface,
)
from .terms import (
    ApD, App, Base, Circle, CircleInd, Coeq, CoeqGlue, CoeqInd, CoeqPoint,
    Const, Empty, EmptyElim, Id, Inl, Inr, Interval, IntervalInd, IOne,
    IZero, J, Lam, Loop, Merid, MetaVar, Nat, NatElim, North, Pair, Pi,
    Proj1, Proj2, Refl, Seg, Sigma, Sort, South, Star, Succ, Sum, SumElim,
    Susp, SuspInd, Term, Tr, TrPath, Transport, Trunc, TruncInd, Unit,
    UnitElim, Var, Zero, apps, fold_subterms, has_meta, map_subterms, shift,
    subst, subst_levels, subst_top, unfold_apps,
)

_meta_ids = itertools.count()


@dataclass
class MetaEntry:
    id: int
    ctx_types: List[Term]
    ty: Term  # scoped in the creation context
    span: object = None
    solution: Optional[Term] = None


@dataclass
class InstanceGoal:
    meta_id: int
    ctx: List[Tuple[str, Term]]
    goal: Term
    span: object = None


class Elaborator:
    def __init__(self, env: Environment):
        self.env = env
        self.metas: Dict[int, MetaEntry] = {}
        self.goals: List[InstanceGoal] = []
        self.pending: List[tuple] = []
        self.level_params: List[str] = []
        self._trail: List[int] = []

    # -- metas --------------------------------------------------------------

    def fresh_meta(self, ctx, ty: Term, span=None) -> Term:
        mid = next(_meta_ids)
        self.metas[mid] = MetaEntry(mid, [t for _, t in ctx], ty, span)
        n = len(ctx)
        return apps(MetaVar(mid), *[Var(i) for i in range(n - 1, -1, -1)])

    def _assign(self, mid: int, sol: Term) -> None:
        self.metas[mid].solution = sol
        self._trail.append(mid)

    def _snapshot(self) -> int:
        return len(self._trail)

    def _rollback(self, mark: int) -> None:
        while len(self._trail) > mark:
            self.metas[self._trail.pop()].solution = None

    def zonk(self, t: Term) -> Term:
        if not has_meta(t):
            return t
        head, args = unfold_apps(t)
        if isinstance(head, MetaVar):
            e = self.metas.get(head.id)
            if e is not None and e.solution is not None:
                sol = e.solution
                body = sol
                rest = list(args)
                while isinstance(body, Lam) and rest:
                    body = subst_top(body.body, rest.pop(0))
                return self.zonk(apps(body, *rest))
        return map_subterms(t, lambda s, b: self.zonk(s))

    def whnf(self, t: Term, delta: bool = True) -> Term:
        while True:
            t = whnf(self.env, t, delta=delta)
            head, args = unfold_apps(t)
            if isinstance(head, MetaVar):
                e = self.metas.get(head.id)
                if e is not None and e.solution is not None:
                    t = apps(e.solution, *args)
                    continue
            return t

    # -- unification ---------------------------------------------------------

    def unify(self, a: Term, b: Term) -> None:
        # keep constants folded as long as possible: spine decomposition on
        # matching heads avoids exploding definitions into normal forms
        a = self.whnf(a, delta=False)
        b = self.whnf(b, delta=False)
        if a == b:
            return

        ha, aa = unfold_apps(a)
        hb, ab = unfold_apps(b)

        if isinstance(ha, MetaVar) and isinstance(hb, MetaVar) \
                and ha.id == hb.id:
            if len(aa) == len(ab):
                for x, y in zip(aa, ab):
                    self.unify(x, y)
                return
            raise UnificationFailure("mismatched meta spine lengths")
        if isinstance(ha, MetaVar):
            if self._try_solve(ha.id, aa, b):
                return
            if isinstance(hb, MetaVar) and self._try_solve(hb.id, ab, a):
                return
            b2 = self.whnf(b)
            if b2 != b:
                self.unify(a, b2)
                return
            raise UnificationFailure("unsolvable flexible equation")
        if isinstance(hb, MetaVar):
            if self._try_solve(hb.id, ab, a):
                return
            a2 = self.whnf(a)
            if a2 != a:
                self.unify(a2, b)
                return
            raise UnificationFailure("unsolvable flexible equation")

        # matching constant spines: componentwise before unfolding
        if (isinstance(ha, Const) and isinstance(hb, Const)
                and ha.name == hb.name and len(aa) == len(ab)):
            mark = self._snapshot()
            try:
                for u, v in zip(ha.levels, hb.levels):
                    self.unify_levels(u, v)
                for x, y in zip(aa, ab):
                    self.unify(x, y)
                return
            except UnificationFailure:
                self._rollback(mark)

        # reduce for real; restart whenever a head moved
        a2 = self.whnf(a)
        b2 = self.whnf(b)
        if a2 != a or b2 != b:
            self.unify(a2, b2)
            return
        if isinstance(ha, Const) or isinstance(hb, Const):
            # irreducible heads: opaque constants, axioms, or stuck spines
            if isinstance(a, Lam) or isinstance(b, Lam):
                pass  # fall through to eta
            elif isinstance(a, Pair) or isinstance(b, Pair):
                pass
            else:
                raise UnificationFailure("stuck constant against rigid term")

        if isinstance(a, Sort) and isinstance(b, Sort):
            self.unify_levels(a.level, b.level)
            return
        if isinstance(a, Var) and isinstance(b, Var):
            if a.index != b.index:
                raise UnificationFailure("distinct variables")
            return
        if isinstance(a, Lam) and not isinstance(b, Lam):
            self.unify(a.body, App(shift(b, 1), Var(0)))
            return
        if isinstance(b, Lam) and not isinstance(a, Lam):
            self.unify(App(shift(a, 1), Var(0)), b.body)
            return
        if isinstance(a, Pair) and not isinstance(b, Pair):
            self.unify(a.fst, Proj1(b))
            self.unify(a.snd, Proj2(b))
            return
        if isinstance(b, Pair) and not isinstance(a, Pair):
            self.unify(Proj1(a), b.fst)
            self.unify(Proj2(a), b.snd)
            return
        if type(a) is not type(b):
            raise UnificationFailure(
                f"{type(a).__name__} does not unify with {type(b).__name__}")
        if isinstance(a, Pair):
            self.unify(a.fst, b.fst)
            self.unify(a.snd, b.snd)
            return
        fa = [s for s, _ in fold_subterms(a)]
        fb = [s for s, _ in fold_subterms(b)]
        if len(fa) != len(fb):
            raise UnificationFailure("arity mismatch")
        for x, y in zip(fa, fb):
            self.unify(x, y)

    def unify_levels(self, u: LevelExpr, v: LevelExpr) -> None:
        # levels are not solved here; the kernel's constraint store decides.
        return

    def _try_solve(self, mid: int, spine: List[Term], t: Term) -> bool:
        args = []
        for s in spine:
            s = self.whnf(s)
            if not isinstance(s, Var) or s.index in args:
                return False
            args.append(s.index)
        t = self.zonk(t)
        k = len(args)
        rename = {u: k - 1 - j for j, u in enumerate(args)}

        def build(t: Term, depth: int) -> Term:
            if isinstance(t, Var):
                if t.index < depth:
                    return t
                outer = t.index - depth
                if outer not in rename:
                    raise UnificationFailure("solution escapes meta scope")
                return Var(rename[outer] + depth)
            head, _ = unfold_apps(t)
            if isinstance(head, MetaVar) and head.id == mid:
                raise OccursCheck(f"occurs check on hole {mid}")
            return map_subterms(t, lambda s, b: build(s, depth + b))

        try:
            body = build(t, 0)
        except UnificationFailure:
            return False
        entry = self.metas[mid]
        doms = list(entry.ctx_types[-k:]) if k else []
        if k > len(entry.ctx_types):
            # spine extends past the creation context: the extra binder
            # domains are the leading Pi domains of the meta's own type
            doms = list(entry.ctx_types)
            ty = entry.ty
            for _ in range(k - len(entry.ctx_types)):
                ty = self.whnf(ty)
                if not isinstance(ty, Pi):
                    return False
                doms.append(ty.domain)
                ty = ty.codomain
        sol = body
        for dom in reversed(doms):
            sol = Lam(dom, sol)
        self._assign(mid, sol)
        return True

    # -- surface elaboration -------------------------------------------------

    def elab_level(self, l: LevelExpr) -> LevelExpr:
        if l == LEVEL_HOLE:
            return fresh_meta()
        if isinstance(l, LSucc):
            return LSucc(self.elab_level(l.prev))
        if isinstance(l, LMax):
            return LMax(self.elab_level(l.left), self.elab_level(l.right))
        if isinstance(l, LParam):
            if l.name not in self.level_params:
                raise UnknownName(f"unknown universe level '{l.name}'")
        return l

    def lookup_local(self, ctx, name: str) -> Optional[int]:
        for i, (n, _) in enumerate(reversed(ctx)):
            if n == name:
                return i
        return None

    def _global(self, ctx, name: str,
                levels: Optional[List[LevelExpr]] = None):
        d = self.env.lookup(name)
        if levels is None:
            lvls = tuple(fresh_meta() for _ in d.level_params)
        else:
            if len(levels) != d.arity:
                raise LevelArityError(
                    f"'{name}' expects {d.arity} level argument(s)")
            lvls = tuple(self.elab_level(l) for l in levels)
        mapping = dict(zip(d.level_params, lvls))
        return Const(name, lvls), subst_levels(d.type, mapping)

    def infer_sort_of(self, ctx, ty: Term) -> None:
        # kernel recheck validates sorts; elaboration trusts type positions
        return

    # application spines ----------------------------------------------------

    def _spine(self, s: Surface):
        args = []
        while isinstance(s, SApp):
            args.append(s.arg)
            s = s.fn
        args.reverse()
        return s, args

    def _insert_implicits(self, ctx, t: Term, ty: Term):
        """Fill leading implicit Pis with metas or instance goals."""
        ty = self.whnf(ty)
        while isinstance(ty, Pi) and ty.implicit:
            m = self.fresh_meta(ctx, ty.domain)
            if self._is_class_goal(ty.domain):
                head, _ = unfold_apps(m)
                self.goals.append(InstanceGoal(head.id, list(ctx), ty.domain))
            t = App(t, m)
            ty = self.whnf(subst_top(ty.codomain, m))
        return t, ty

    def _is_class_goal(self, ty: Term) -> bool:
        # no delta here: class constants are transparent and would unfold
        head, _ = unfold_apps(self.whnf(ty, delta=False))
        return (isinstance(head, Const) and head.name in self.env
                and self.env.lookup(head.name).is_class)

    def _apply(self, ctx, t: Term, ty: Term, arg: Surface,
               allow_insert: bool = True):
        if allow_insert:
            t, ty = self._insert_implicits(ctx, t, ty)
        else:
            ty = self.whnf(ty)
        if not isinstance(ty, Pi):
            # maybe the function type is itself a hole: refine it
            hty = self.whnf(ty)
            if _meta_headed(hty):
                dom = self.fresh_meta(ctx, Sort(fresh_meta()))
                cod = self.fresh_meta(ctx, Sort(fresh_meta()))
                pi = Pi(dom, shift(cod, 1))
                self.unify(hty, pi)
                ty = pi
            else:
                raise TypeMismatch(None, hty,
                                   message="applied a non-function")
        a = self.check(ctx, arg, ty.domain)
        return App(t, a), subst_top(ty.codomain, a)

    # keyword forms ---------------------------------------------------------

    def _sort_meta(self, ctx) -> Term:
        return Sort(fresh_meta())

    def _motive_expected(self, ctx, domain: Term) -> Term:
        return Pi(domain, Sort(fresh_meta()))

    def _elab_keyword(self, ctx, kw: str, sargs: List[Surface], span):
        """Saturated eliminator/constructor keywords; returns (term, type,
        consumed) where consumed is how many surface args were used."""
        need = _KW_ARITY[kw]
        if len(sargs) < need:
            raise TypeMismatch(None, None, span=span, message=(
                f"'{kw}' expects {need} argument(s), got {len(sargs)}"))
        a = sargs[:need]
        E = self
        match kw:
            case "Nat":
                return Nat(), Sort(_L0), 0
            case "zero":
                return Zero(), Nat(), 0
            case "succ":
                n = E.check(ctx, a[0], Nat())
                return Succ(n), Nat(), 1
            case "Unit":
                return Unit(), Sort(_L0), 0
            case "star":
                return Star(), Unit(), 0
            case "Empty":
                return Empty(), Sort(_L0), 0
            case "I":
                return Interval(), Sort(_L0), 0
            case "i0":
                return IZero(), Interval(), 0
            case "i1":
                return IOne(), Interval(), 0
            case "seg":
                return Seg(), Id(Interval(), IZero(), IOne()), 0
            case "S1":
                return Circle(), Sort(_L0), 0
            case "base":
                return Base(), Circle(), 0
            case "loop":
                return Loop(), Id(Circle(), Base(), Base()), 0
            case "natrec":
                m = E.check(ctx, a[0], E._motive_expected(ctx, Nat()))
                z = E.check(ctx, a[1], App(m, Zero()))
                s = E.check(ctx, a[2], Pi(
                    Nat(), Pi(App(shift(m, 1), Var(0)),
                              App(shift(m, 2), Succ(Var(1))))))
                n = E.check(ctx, a[3], Nat())
                return NatElim(m, z, s, n), App(m, n), 4
            case "unitrec":
                m = E.check(ctx, a[0], E._motive_expected(ctx, Unit()))
                c = E.check(ctx, a[1], App(m, Star()))
                s = E.check(ctx, a[2], Unit())
                return UnitElim(m, c, s), App(m, s), 3
            case "emptyrec":
                m = E.check(ctx, a[0], E._motive_expected(ctx, Empty()))
                s = E.check(ctx, a[1], Empty())
                return EmptyElim(m, s), App(m, s), 2
            case "sumrec":
                st, sty = E.infer(ctx, a[3])
                sty = self.whnf(sty)
                if not isinstance(sty, Sum):
                    l = E.fresh_meta(ctx, E._sort_meta(ctx))
                    r = E.fresh_meta(ctx, E._sort_meta(ctx))
                    E.unify(sty, Sum(l, r))
                    sty = Sum(l, r)
                l, r = sty.left, sty.right
                m = E.check(ctx, a[0], E._motive_expected(ctx, Sum(l, r)))
                m1 = shift(m, 1)
                lc = E.check(ctx, a[1],
                             Pi(l, App(m1, Inl(Var(0), shift(r, 1)))))
                rc = E.check(ctx, a[2],
                             Pi(r, App(m1, Inr(Var(0), shift(l, 1)))))
                return SumElim(m, lc, rc, st), App(m, st), 4
            case "inl":
                if len(a) >= 2:
                    v, vty = E.infer(ctx, a[0])
                    r = E.check(ctx, a[1], E._sort_meta(ctx))
                    return Inl(v, r), Sum(vty, r), 2
                raise _NeedsExpected()
            case "inr":
                if len(a) >= 2:
                    v, vty = E.infer(ctx, a[0])
                    l = E.check(ctx, a[1], E._sort_meta(ctx))
                    return Inr(v, l), Sum(l, vty), 2
                raise _NeedsExpected()
            case "refl":
                ty = E.check(ctx, a[0], E._sort_meta(ctx))
                x = E.check(ctx, a[1], ty)
                return Refl(ty, x), Id(ty, x, x), 2
            case "J":
                pt, a_, x, y = E._path_parts(ctx, a[2])
                m = E.check(ctx, a[0], Pi(
                    a_, Pi(Id(shift(a_, 1), shift(x, 1), Var(0)),
                           Sort(fresh_meta()))))
                d = E.check(ctx, a[1], App(App(m, x), Refl(a_, x)))
                return J(m, d, pt), App(App(m, y), pt), 3
            case "transport":
                pt, a_, x, y = E._path_parts(ctx, a[1])
                fam = E.check(ctx, a[0], E._motive_expected(ctx, a_))
                u = E.check(ctx, a[2], App(fam, x))
                return Transport(fam, pt, u), App(fam, y), 3
            case "apD":
                pt, a_, x, y = E._path_parts(ctx, a[2])
                fam = E.check(ctx, a[0], E._motive_expected(ctx, a_))
                f = E.check(ctx, a[1], Pi(a_, App(shift(fam, 1), Var(0))))
                return (ApD(fam, f, pt),
                        Id(App(fam, y), Transport(fam, pt, App(f, x)),
                           App(f, y)), 3)
            case "Iind":
                m = E.check(ctx, a[0], E._motive_expected(ctx, Interval()))
                z = E.check(ctx, a[1], App(m, IZero()))
                o = E.check(ctx, a[2], App(m, IOne()))
                s = E.check(ctx, a[3], Id(App(m, IOne()),
                                          Transport(m, Seg(), z), o))
                x = E.check(ctx, a[4], Interval())
                return IntervalInd(m, z, o, s, x), App(m, x), 5
            case "S1ind":
                m = E.check(ctx, a[0], E._motive_expected(ctx, Circle()))
                b = E.check(ctx, a[1], App(m, Base()))
                l = E.check(ctx, a[2], Id(App(m, Base()),
                                          Transport(m, Loop(), b), b))
                x = E.check(ctx, a[3], Circle())
                return CircleInd(m, b, l, x), App(m, x), 4
            case "susp":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                return Susp(t), E._type_of_type(ctx, t), 1
            case "north":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                return North(t), Susp(t), 1
            case "south":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                return South(t), Susp(t), 1
            case "merid":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                p = E.check(ctx, a[1], t)
                return Merid(t, p), Id(Susp(t), North(t), South(t)), 2
            case "suspind":
                xt, xty = E.infer(ctx, a[4])
                xty = self.whnf(xty)
                if not isinstance(xty, Susp):
                    u = E.fresh_meta(ctx, E._sort_meta(ctx))
                    E.unify(xty, Susp(u))
                    xty = Susp(u)
                at = xty.ty
                m = E.check(ctx, a[0], E._motive_expected(ctx, Susp(at)))
                n = E.check(ctx, a[1], App(m, North(at)))
                s = E.check(ctx, a[2], App(m, South(at)))
                a1, m1 = shift(at, 1), shift(m, 1)
                mm = E.check(ctx, a[3], Pi(at, Id(
                    App(m1, South(a1)),
                    Transport(m1, Merid(a1, Var(0)), shift(n, 1)),
                    shift(s, 1))))
                return SuspInd(m, n, s, mm, xt), App(m, xt), 5
            case "coeq":
                f, fty = E.infer(ctx, a[0])
                dom, cod = E._fun_parts(ctx, fty)
                g = E.check(ctx, a[1], Pi(dom, shift(cod, 1)))
                return Coeq(f, g), E._type_of_type(ctx, cod), 2
            case "cp":
                f, fty = E.infer(ctx, a[0])
                dom, cod = E._fun_parts(ctx, fty)
                g = E.check(ctx, a[1], Pi(dom, shift(cod, 1)))
                p = E.check(ctx, a[2], cod)
                return CoeqPoint(f, g, p), Coeq(f, g), 3
            case "cglue":
                f, fty = E.infer(ctx, a[0])
                dom, cod = E._fun_parts(ctx, fty)
                g = E.check(ctx, a[1], Pi(dom, shift(cod, 1)))
                p = E.check(ctx, a[2], dom)
                return (CoeqGlue(f, g, p),
                        Id(Coeq(f, g), CoeqPoint(f, g, App(f, p)),
                           CoeqPoint(f, g, App(g, p))), 3)
            case "coeqind":
                xt, xty = E.infer(ctx, a[3])
                xty = self.whnf(xty)
                if not isinstance(xty, Coeq):
                    raise TypeMismatch(None, xty, span=span,
                                       message="coeqind scrutinee")
                f, g = xty.f, xty.g
                dom, cod = E._fun_parts(ctx, E.infer_type_of(ctx, f))
                m = E.check(ctx, a[0], E._motive_expected(ctx, Coeq(f, g)))
                m1, f1, g1 = shift(m, 1), shift(f, 1), shift(g, 1)
                pc = E.check(ctx, a[1],
                             Pi(cod, App(m1, CoeqPoint(f1, g1, Var(0)))))
                pc1 = shift(pc, 1)
                gc = E.check(ctx, a[2], Pi(dom, Id(
                    App(m1, CoeqPoint(f1, g1, App(g1, Var(0)))),
                    Transport(m1, CoeqGlue(f1, g1, Var(0)),
                              App(pc1, App(f1, Var(0)))),
                    App(pc1, App(g1, Var(0))))))
                return CoeqInd(m, pc, gc, xt), App(m, xt), 4
            case "trunc":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                return Trunc(t), E._type_of_type(ctx, t), 1
            case "tr":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                p = E.check(ctx, a[1], t)
                return Tr(t, p), Trunc(t), 2
            case "trpath":
                t = E.check(ctx, a[0], E._sort_meta(ctx))
                x = E.check(ctx, a[1], Trunc(t))
                y = E.check(ctx, a[2], Trunc(t))
                return TrPath(t, x, y), Id(Trunc(t), x, y), 3
            case "truncind":
                xt, xty = E.infer(ctx, a[3])
                xty = self.whnf(xty)
                if not isinstance(xty, Trunc):
                    u = E.fresh_meta(ctx, E._sort_meta(ctx))
                    E.unify(xty, Trunc(u))
                    xty = Trunc(u)
                at = xty.ty
                m = E.check(ctx, a[0], E._motive_expected(ctx, Trunc(at)))
                m1, m2, m3 = shift(m, 1), shift(m, 2), shift(m, 3)
                hp = E.check(ctx, a[1], Pi(
                    Trunc(at),
                    Pi(App(m1, Var(0)),
                       Pi(App(m2, Var(1)),
                          Id(App(m3, Var(2)), Var(1), Var(0))))))
                pc = E.check(ctx, a[2],
                             Pi(at, App(m1, Tr(shift(at, 1), Var(0)))))
                return TruncInd(m, hp, pc, xt), App(m, xt), 4
        raise AssertionError(f"keyword {kw} not handled")

    def _type_of_type(self, ctx, t: Term) -> Term:
        """Sort of a type already elaborated; falls back to a level hole."""
        ty = self.infer_type_of(ctx, t)
        ty = self.whnf(ty)
        if isinstance(ty, Sort):
            return ty
        return Sort(fresh_meta())

    def infer_type_of(self, ctx, t: Term) -> Term:
        """Type of an elaborated kernel term (meta-tolerant re-inference)."""
        from .check import Checker
        ck = Checker(self.env, _PermissiveGraph())
        return ck.infer([ty for _, ty in ctx], self.zonk(t))

    def _path_parts(self, ctx, sp: Surface):
        p, pty = self.infer(ctx, sp)
        pty = self.whnf(pty)
        if not isinstance(pty, Id):
            a = self.fresh_meta(ctx, self._sort_meta(ctx))
            x = self.fresh_meta(ctx, a)
            y = self.fresh_meta(ctx, a)
            self.unify(pty, Id(a, x, y))
            pty = Id(a, x, y)
        return p, pty.ty, pty.lhs, pty.rhs

    def _fun_parts(self, ctx, fty: Term):
        fty = self.whnf(fty)
        if isinstance(fty, Pi) and not _uses_var0(fty.codomain):
            return fty.domain, shift(fty.codomain, -1)
        dom = self.fresh_meta(ctx, self._sort_meta(ctx))
        cod = self.fresh_meta(ctx, self._sort_meta(ctx))
        self.unify(fty, Pi(dom, shift(cod, 1)))
        return dom, cod

    # infer / check ---------------------------------------------------------

    def infer(self, ctx, s: Surface):
        head, sargs = self._spine(s)
        t, ty, consumed = self._head(ctx, head, sargs)
        suppress = isinstance(head, SAt)
        for arg in sargs[consumed:]:
            t, ty = self._apply(ctx, t, ty, arg,
                                allow_insert=not suppress)
        if not suppress:
            t, ty = self._insert_implicits(ctx, t, ty)
        return t, ty

    def _head(self, ctx, head: Surface, sargs: List[Surface]):
        match head:
            case SName(name=n, span=sp):
                i = self.lookup_local(ctx, n)
                if i is not None:
                    return Var(i), shift(ctx[-1 - i][1], i + 1), 0
                if n not in self.env:
                    raise UnknownName(f"unknown name '{n}'", span=sp)
                t, ty = self._global(ctx, n)
                return t, ty, 0
            case SAt(name=n, levels=ls, span=sp):
                if n not in self.env:
                    raise UnknownName(f"unknown name '{n}'", span=sp)
                t, ty = self._global(ctx, n, ls if ls is not None else None)
                return t, ty, 0
            case SKw(name=kw, span=sp):
                t, ty, consumed = self._elab_keyword(ctx, kw, sargs, sp)
                return t, ty, consumed
            case SHole(span=sp):
                ty = self.fresh_meta(ctx, Sort(fresh_meta()), sp)
                return self.fresh_meta(ctx, ty, sp), ty, 0
            case SType(level=l, span=sp):
                lv = self.elab_level(l)
                return Sort(lv), Sort(LSucc(lv)), 0
            case SPi(name=n, implicit=imp, domain=d, codomain=c):
                dt, dsort = self._as_type(ctx, d)
                ct, csort = self._as_type(ctx + [(n, dt)], c)
                return (Pi(dt, ct, hint=n, implicit=imp),
                        Sort(LMax(dsort, csort)), 0)
            case SSigma(name=n, first=f, second=sec):
                ft, fsort = self._as_type(ctx, f)
                st, ssort = self._as_type(ctx + [(n, ft)], sec)
                return Sigma(ft, st, hint=n), Sort(LMax(fsort, ssort)), 0
            case SSum(left=l, right=r):
                lt, ls_ = self._as_type(ctx, l)
                rt, rs = self._as_type(ctx, r)
                return Sum(lt, rt), Sort(LMax(ls_, rs)), 0
            case SId(lhs=x, rhs=y, ty=a):
                if a is not None:
                    at, asort = self._as_type(ctx, a)
                else:
                    xt0, xty = self.infer(ctx, x)
                    at, asort = xty, self._sort_level_of(ctx, xty)
                    x = _Elaborated(xt0)
                xt = self.check(ctx, x, at)
                yt = self.check(ctx, y, at)
                return Id(at, xt, yt), Sort(asort), 0
            case SLam(name=n, domain=d, body=b):
                if d is None:
                    dt = self.fresh_meta(ctx, Sort(fresh_meta()))
                else:
                    dt, _ = self._as_type(ctx, d)
                bt, bty = self.infer(ctx + [(n, dt)], b)
                return Lam(dt, bt, hint=n), Pi(dt, bty, hint=n), 0
            case SPair(span=sp):
                raise UnsolvedHole(
                    "cannot infer the type of a bare pair", span=sp)
            case SProj(target=tg, index=i):
                t, ty = self.infer(ctx, tg)
                ty = self.whnf(ty)
                if not isinstance(ty, Sigma):
                    f = self.fresh_meta(ctx, self._sort_meta(ctx))
                    s2 = self.fresh_meta(ctx + [("_", f)],
                                         self._sort_meta(ctx))
                    self.unify(ty, Sigma(f, s2))
                    ty = Sigma(f, s2)
                if i == 1:
                    return Proj1(t), ty.first, 0
                return Proj2(t), subst_top(ty.second, Proj1(t)), 0
            case _Elaborated(term=t):
                return t, self.infer_type_of(ctx, t), 0
        raise AssertionError(f"unhandled surface head {type(head).__name__}")

    def _sort_level_of(self, ctx, ty: Term) -> LevelExpr:
        s = self.whnf(self.infer_type_of(ctx, ty))
        if isinstance(s, Sort):
            return s.level
        return fresh_meta()

    def _as_type(self, ctx, s: Surface):
        """Elaborate a surface term known to sit in a type position;
        returns (term, its sort level)."""
        t, ty = self.infer(ctx, s)
        ty = self.whnf(ty)
        if isinstance(ty, Sort):
            return t, ty.level
        if _meta_headed(ty):
            lv = fresh_meta()
            self.unify(ty, Sort(lv))
            return t, lv
        raise TypeMismatch(Sort(fresh_meta()), ty,
                           message="expected a type")

    def check(self, ctx, s: Surface, expected: Term) -> Term:
        if isinstance(s, _Elaborated):
            return s.term
        wexp = self.whnf(expected)
        head, sargs = self._spine(s)

        if isinstance(wexp, Pi) and wexp.implicit:
            implicit_lam = False  # surface lambdas are explicit only
            if not implicit_lam:
                inner = self.check(
                    ctx + [(wexp.hint or "_", wexp.domain)],
                    _shift_surface(s), wexp.codomain)
                return Lam(wexp.domain, inner, hint=wexp.hint)

        match s:
            case SLam(name=n, domain=d, body=b) if isinstance(wexp, Pi):
                if d is not None:
                    dt, _ = self._as_type(ctx, d)
                    self.unify(dt, wexp.domain)
                else:
                    dt = wexp.domain
                bt = self.check(ctx + [(n, dt)], b, wexp.codomain)
                return Lam(dt, bt, hint=n)
            case SPair(fst=f, snd=s2) if isinstance(wexp, Sigma):
                ft = self.check(ctx, f, wexp.first)
                st = self.check(ctx, s2, subst_top(wexp.second, ft))
                return Pair(ft, st, wexp)
            case SHole(span=sp):
                return self.fresh_meta(ctx, expected, sp)
            case SKw(name="refl", span=sp) if isinstance(wexp, Id):
                self.unify(wexp.lhs, wexp.rhs)
                return Refl(wexp.ty, wexp.lhs)
            case SApp() if isinstance(head, SKw) and head.name == "inl" \
                    and len(sargs) == 1 and isinstance(wexp, Sum):
                v = self.check(ctx, sargs[0], wexp.left)
                return Inl(v, wexp.right)
            case SApp() if isinstance(head, SKw) and head.name == "inr" \
                    and len(sargs) == 1 and isinstance(wexp, Sum):
                v = self.check(ctx, sargs[0], wexp.right)
                return Inr(v, wexp.left)

        t, ty = self.infer(ctx, s)
        mark = self._snapshot()
        try:
            self.unify(ty, expected)
        except UnificationFailure as e:
            # the failure may be order-dependent: a sibling equation can
            # still solve the blocking metas, so park it and retry later
            self._rollback(mark)
            self.pending.append((ty, expected, _span_of(s), str(e)))
        return t

    # declarations ----------------------------------------------------------

    def elab_declaration(self, decl: SDecl):
        """Returns (level_params, type, body) as kernel values."""
        self.level_params = list(decl.level_params)
        ctx: List[Tuple[str, Term]] = []
        doms: List[Tuple[str, Term, bool]] = []
        for b in decl.binders:
            bt, _ = self._as_type(ctx, b.ty)
            doms.append((b.name, bt, b.implicit))
            ctx.append((b.name, bt))
        result, _ = self._as_type(ctx, decl.result)
        body = None
        if decl.body is not None:
            body = self.check(ctx, decl.body, result)

        self.resolve_goals()

        ty = result
        for name, dom, imp in reversed(doms):
            ty = Pi(dom, ty, hint=name, implicit=imp)
        if body is not None:
            for name, dom, imp in reversed(doms):
                body = Lam(dom, body, hint=name)
        ty = self.zonk(ty)
        body = self.zonk(body) if body is not None else None
        for t in ([ty] + ([body] if body is not None else [])):
            bad = _find_meta(t)
            if bad is not None:
                e = self.metas.get(bad)
                raise UnsolvedHole(
                    f"unsolved hole in '{decl.name}'",
                    span=e.span if e else decl.span)
        params = [LParam(n) for n in decl.level_params]
        return params, ty, body

    # instance search -------------------------------------------------------

    def flush_pending(self) -> None:
        """Retry parked unification problems until a fixpoint; equations
        blocked on metas often become rigid once their siblings commit."""
        while self.pending:
            progress = False
            remaining = []
            for item in self.pending:
                ty, exp, span, msg = item
                mark = self._snapshot()
                try:
                    self.unify(self.zonk(ty), self.zonk(exp))
                    progress = True
                except UnificationFailure:
                    self._rollback(mark)
                    remaining.append(item)
            self.pending = remaining
            if not progress:
                ty, exp, span, msg = self.pending[0]
                self.pending = []
                raise TypeMismatch(exp, ty, span=span, message=msg)

    def resolve_goals(self) -> None:
        self.flush_pending()
        budget = self.env.options.instance_depth
        for goal in self.goals:
            entry = self.metas[goal.meta_id]
            if entry.solution is not None:
                continue  # already pinned down by unification
            ty = self.zonk(goal.goal)
            sol = self.resolve_instance(goal.ctx, ty, budget)
            n = len(goal.ctx)
            spine_args = [Var(i) for i in range(n - 1, -1, -1)]
            # assign directly: unify would unfold transparent instance heads
            if not self._try_solve(goal.meta_id, spine_args, sol):
                self.unify(apps(MetaVar(goal.meta_id), *spine_args), sol)
        self.goals.clear()
        self.flush_pending()

    def resolve_instance(self, ctx, goal: Term, depth: int) -> Term:
        goal = self.zonk(self.whnf(goal, delta=False))
        head, _ = unfold_apps(goal)
        if not isinstance(head, Const):
            raise InstanceNotFound(f"instance goal has no class head")
        if depth <= 0:
            raise InstanceDepthExceeded(
                f"instance search depth exhausted on '{head.name}'")
        # local hypotheses of matching class head act as instances
        for i in range(len(ctx)):
            hty = shift(ctx[-1 - i][1], i + 1)
            hh, _ = unfold_apps(self.whnf(hty, delta=False))
            if not (isinstance(hh, Const) and hh.name == head.name):
                continue
            mark = self._snapshot()
            try:
                self.unify(hty, goal)
                return Var(i)
            except UnificationFailure:
                self._rollback(mark)
        table = self.env.instances.get(head.name, [])
        for _, _, cand in table:
            mark = self._snapshot()
            try:
                return self._try_instance(ctx, cand, goal, depth)
            except (UnificationFailure, InstanceNotFound):
                self._rollback(mark)
            # depth exhaustion propagates: it is a hard stop, not a retry
        raise InstanceNotFound(
            f"no instance found for '{head.name}'")

    def _try_instance(self, ctx, cand: str, goal: Term, depth: int) -> Term:
        t, ty = self._global(ctx, cand)
        premises = []
        ty = self.whnf(ty, delta=False)
        while isinstance(ty, Pi):
            m = self.fresh_meta(ctx, ty.domain)
            premises.append((m, ty.domain))
            t = App(t, m)
            ty = self.whnf(subst_top(ty.codomain, m), delta=False)
        self.unify(ty, goal)
        for m, pty in premises:
            mhead, _ = unfold_apps(m)
            if self.metas[mhead.id].solution is not None:
                continue
            self._resolve_premise(ctx, m, self.zonk(pty), depth)
        return self.zonk(t)

    def _resolve_premise(self, ctx, m: Term, pty: Term, depth: int) -> None:
        pty = self.whnf(pty, delta=False)
        binders = []
        inner_ctx = list(ctx)
        while isinstance(pty, Pi):
            binders.append(pty.domain)
            inner_ctx = inner_ctx + [(pty.hint, pty.domain)]
            pty = self.whnf(pty.codomain, delta=False)
        head, _ = unfold_apps(pty)
        if isinstance(head, Const) and head.name in self.env \
                and self.env.lookup(head.name).is_class:
            sol = self.resolve_instance(inner_ctx, pty, depth - 1)
            for dom in reversed(binders):
                sol = Lam(dom, sol)
            self.unify(m, sol)
            return
        # not a class goal: it must have been fixed by unification
        mh, _ = unfold_apps(self.whnf(m))
        if isinstance(mh, MetaVar):
            raise UnificationFailure(
                "instance premise left undetermined")


class _PermissiveGraph:
    """Constraint sink for meta-tolerant re-inference inside elaboration."""

    constraints: list = []

    def entails(self, c) -> bool:
        return True

    def add_constraint(self, c) -> None:
        return

    def register(self, a) -> None:
        return

    def clone(self):
        return self


@dataclass
class _Elaborated(Surface):
    """Wrapper threading an already-elaborated kernel term back through
    surface-level checking."""
    term: Term
    span: object = None


class _NeedsExpected(Exception):
    pass


_L0 = None  # placeholder replaced below


def _init_levels():
    global _L0
    from .levels import ZERO
    _L0 = ZERO


_init_levels()

_KW_ARITY = {
    "Nat": 0, "zero": 0, "succ": 1, "Unit": 0, "star": 0, "Empty": 0,
    "natrec": 4, "sumrec": 4, "unitrec": 3, "emptyrec": 2,
    "inl": 2, "inr": 2, "refl": 2,
    "J": 3, "transport": 3, "apD": 3,
    "I": 0, "i0": 0, "i1": 0, "seg": 0, "Iind": 5,
    "S1": 0, "base": 0, "loop": 0, "S1ind": 4,
    "susp": 1, "north": 1, "south": 1, "merid": 2, "suspind": 5,
    "coeq": 2, "cp": 3, "cglue": 3, "coeqind": 4,
    "trunc": 1, "tr": 2, "trpath": 3, "truncind": 4,
}


def _uses_var0(t: Term) -> bool:
    def go(t: Term, depth: int) -> bool:
        if isinstance(t, Var):
            return t.index == depth
        return any(go(s, depth + b) for s, b in fold_subterms(t))
    return go(t, 0)


def _meta_headed(t: Term) -> bool:
    head, _ = unfold_apps(t)
    return isinstance(head, MetaVar)


def _find_meta(t: Term) -> Optional[int]:
    if isinstance(t, MetaVar):
        return t.id
    for s, _ in fold_subterms(t):
        r = _find_meta(s)
        if r is not None:
            return r
    return None


def _shift_surface(s: Surface) -> Surface:
    # surface terms refer to binders by name; entering a fresh implicit
    # binder cannot capture, because its name comes from a printer hint that
    # the calling context never mentions
    return s


def _span_of(s: Surface):
    return getattr(s, "span", None)

"""Pretty-printer from kernel terms back to concrete syntax.

The output is designed to re-elaborate to the same kernel term: global
references print in `@name{...}` form (implicit insertion suppressed, level
arguments explicit, level metas as `?`), eliminators print as saturated
keyword applications, and binder names are freshened against everything in
scope, including referenced globals.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from .levels import (
    LGlobal, LMax, LMeta, LParam, LSucc, LZero, LevelExpr,
)
from .terms import (
    ApD, App, Base, Circle, CircleInd, Coeq, CoeqGlue, CoeqInd, CoeqPoint,
    Const, Empty, EmptyElim, Id, Inl, Inr, Interval, IntervalInd, IOne,
    IZero, J, Lam, Loop, Merid, MetaVar, Nat, NatElim, North, Pair, Pi,
    Proj1, Proj2, Refl, Seg, Sigma, Sort, South, Star, Succ, Sum, SumElim,
    Susp, SuspInd, Term, Tr, TrPath, Transport, Trunc, TruncInd, Unit,
    UnitElim, Var, Zero, max_free_index, shift,
)

# precedence levels, loosest to tightest; mirror the parser
TERM, EQL, SUM, PROD, APPL, ATOM = range(6)


def print_level(l: LevelExpr, glob_map: Optional[Dict[str, str]] = None
                ) -> str:
    n = 0
    while isinstance(l, LSucc):
        n += 1
        l = l.prev
    if isinstance(l, LZero):
        return str(n)
    if isinstance(l, LParam):
        base = l.name
    elif isinstance(l, LGlobal):
        base = (glob_map or {}).get(l.name, l.name)
    elif isinstance(l, LMeta):
        base = "?"
    elif isinstance(l, LMax):
        base = (f"max({print_level(l.left, glob_map)},"
                f"{print_level(l.right, glob_map)})")
    else:
        base = str(l)
    return base + f"+{n}" if n else base


class Printer:
    def __init__(self, env=None, glob_map: Optional[Dict[str, str]] = None):
        self.env = env
        self.glob_map = glob_map or {}

    def _taken(self, names: List[str], t: Term) -> set:
        used = set(names)
        if self.env is not None:
            used |= set(self.env.defs)
        return used

    def _freshen(self, hint: str, names: List[str]) -> str:
        taken = self._taken(names, None)
        if hint == "_" or not hint:
            hint = "x"
        if hint not in taken:
            return hint
        k = 1
        while f"{hint}{k}" in taken:
            k += 1
        return f"{hint}{k}"

    def term(self, t: Term, names: Optional[List[str]] = None) -> str:
        return self._p(t, names or [], TERM)

    def _uses_var0(self, body: Term) -> bool:
        def free0(t: Term, depth: int) -> bool:
            if isinstance(t, Var):
                return t.index == depth
            from .terms import fold_subterms
            return any(free0(s, depth + b) for s, b in fold_subterms(t))
        return free0(body, 0)

    def _kw(self, prec: int, kw: str, names, *args: Term) -> str:
        parts = [kw] + [self._p(a, names, ATOM) for a in args]
        s = " ".join(parts)
        return f"({s})" if args and prec > APPL else s

    def _p(self, t: Term, names: List[str], prec: int) -> str:
        match t:
            case Var(index=i):
                if 0 <= i < len(names):
                    return names[-1 - i]
                return f"_v{i - len(names)}"  # free index: diagnostics only
            case Sort(level=l):
                return "Type{" + print_level(l, self.glob_map) + "}"
            case Pi(domain=a, codomain=b, hint=h, implicit=imp):
                if not imp and not self._uses_var0(b):
                    s = (self._p(a, names, EQL) + " -> "
                         + self._p(shift(b, -1), names, TERM))
                else:
                    x = self._freshen(h, names)
                    br = "{%s : %s}" if imp else "(%s : %s)"
                    s = ("forall " + br % (x, self._p(a, names, TERM))
                         + ", " + self._p(b, names + [x], TERM))
                return f"({s})" if prec > TERM else s
            case Lam(domain=a, body=b, hint=h):
                x = self._freshen(h, names)
                s = (f"fun ({x} : {self._p(a, names, TERM)}) => "
                     + self._p(b, names + [x], TERM))
                return f"({s})" if prec > TERM else s
            case Sigma(first=a, second=b, hint=h):
                if not self._uses_var0(b):
                    s = (self._p(a, names, APPL) + " * "
                         + self._p(shift(b, -1), names, PROD))
                    return f"({s})" if prec > PROD else s
                x = self._freshen(h, names)
                s = (f"Sigma ({x} : {self._p(a, names, TERM)}), "
                     + self._p(b, names + [x], TERM))
                return f"({s})" if prec > TERM else s
            case App():
                from .terms import unfold_apps
                head, args = unfold_apps(t)
                hs = self._p(head, names, APPL)
                s = " ".join([hs] + [self._p(a, names, ATOM) for a in args])
                return f"({s})" if prec > APPL else s
            case Pair(fst=f, snd=s2):
                return f"({self._p(f, names, TERM)} , {self._p(s2, names, TERM)})"
            case Proj1(pair=p):
                return self._p(p, names, ATOM) + ".1"
            case Proj2(pair=p):
                return self._p(p, names, ATOM) + ".2"
            case Sum(left=a, right=b):
                s = self._p(a, names, PROD) + " + " + self._p(b, names, SUM)
                return f"({s})" if prec > SUM else s
            case Inl(value=v, right_ty=b):
                return self._kw(prec, "inl", names, v, b)
            case Inr(value=v, left_ty=a):
                return self._kw(prec, "inr", names, v, a)
            case SumElim(motive=m, left_case=l, right_case=r, scrut=s):
                return self._kw(prec, "sumrec", names, m, l, r, s)
            case Unit():
                return "Unit"
            case Star():
                return "star"
            case UnitElim(motive=m, case=c, scrut=s):
                return self._kw(prec, "unitrec", names, m, c, s)
            case Empty():
                return "Empty"
            case EmptyElim(motive=m, scrut=s):
                return self._kw(prec, "emptyrec", names, m, s)
            case Nat():
                return "Nat"
            case Zero():
                return "0"
            case Succ():
                n, inner = 0, t
                while isinstance(inner, Succ):
                    n += 1
                    inner = inner.pred
                if isinstance(inner, Zero):
                    return str(n)
                return self._kw(prec, "succ", names, t.pred)
            case NatElim(motive=m, zero_case=z, succ_case=sc, scrut=s):
                return self._kw(prec, "natrec", names, m, z, sc, s)
            case Id(ty=a, lhs=x, rhs=y):
                s = (self._p(x, names, SUM) + " = " + self._p(y, names, SUM)
                     + " :> " + self._p(a, names, SUM))
                return f"({s})" if prec > EQL else s
            case Refl(ty=a, point=x):
                return self._kw(prec, "refl", names, a, x)
            case J(motive=m, refl_case=d, path=p):
                return self._kw(prec, "J", names, m, d, p)
            case Transport(family=f, path=p, payload=u):
                return self._kw(prec, "transport", names, f, p, u)
            case ApD(family=fam, fn=f, path=p):
                return self._kw(prec, "apD", names, fam, f, p)
            case Interval():
                return "I"
            case IZero():
                return "i0"
            case IOne():
                return "i1"
            case Seg():
                return "seg"
            case IntervalInd(motive=m, zero_case=a, one_case=b,
                             seg_case=s, scrut=x):
                return self._kw(prec, "Iind", names, m, a, b, s, x)
            case Circle():
                return "S1"
            case Base():
                return "base"
            case Loop():
                return "loop"
            case CircleInd(motive=m, base_case=b, loop_case=l, scrut=x):
                return self._kw(prec, "S1ind", names, m, b, l, x)
            case Susp(ty=a):
                return self._kw(prec, "susp", names, a)
            case North(ty=a):
                return self._kw(prec, "north", names, a)
            case South(ty=a):
                return self._kw(prec, "south", names, a)
            case Merid(ty=a, point=p):
                return self._kw(prec, "merid", names, a, p)
            case SuspInd(motive=m, north_case=n, south_case=s,
                         merid_case=mm, scrut=x):
                return self._kw(prec, "suspind", names, m, n, s, mm, x)
            case Coeq(f=f, g=g):
                return self._kw(prec, "coeq", names, f, g)
            case CoeqPoint(f=f, g=g, point=p):
                return self._kw(prec, "cp", names, f, g, p)
            case CoeqGlue(f=f, g=g, point=p):
                return self._kw(prec, "cglue", names, f, g, p)
            case CoeqInd(motive=m, point_case=pc, glue_case=gc, scrut=x):
                return self._kw(prec, "coeqind", names, m, pc, gc, x)
            case Trunc(ty=a):
                return self._kw(prec, "trunc", names, a)
            case Tr(ty=a, point=p):
                return self._kw(prec, "tr", names, a, p)
            case TrPath(ty=a, lhs=x, rhs=y):
                return self._kw(prec, "trpath", names, a, x, y)
            case TruncInd(motive=m, prop_case=hp, point_case=pc, scrut=x):
                return self._kw(prec, "truncind", names, m, hp, pc, x)
            case Const(name=n, levels=ls):
                if not ls:
                    return f"@{n}"
                inner = ", ".join(print_level(l, self.glob_map) for l in ls)
                return f"@{n}" + "{" + inner + "}"
            case MetaVar():
                return "_"
        return f"<{type(t).__name__}>"


def print_term(t: Term, env=None, names=None,
               glob_map: Optional[Dict[str, str]] = None) -> str:
    return Printer(env, glob_map).term(t, names)


def print_definition(env, name: str) -> str:
    """Render one environment entry as a declaration."""
    d = env.lookup(name)
    glob_map = {}
    params = [p.name for p in d.level_params]
    if d.monomorphic:
        # recover the parameter spelling from the owned globals
        seen = []
        def scan_levels(l):
            if isinstance(l, LSucc):
                scan_levels(l.prev)
            elif isinstance(l, LMax):
                scan_levels(l.left)
                scan_levels(l.right)
            elif isinstance(l, LGlobal) and l.name.startswith(name + "."):
                short = l.name[len(name) + 1:]
                if short not in seen:
                    seen.append(short)

        def scan(t: Term):
            if isinstance(t, Sort):
                scan_levels(t.level)
            if isinstance(t, Const):
                for l in t.levels:
                    scan_levels(l)
            from .terms import fold_subterms
            for s, _ in fold_subterms(t):
                scan(s)
        scan(d.type)
        if d.body is not None:
            scan(d.body)
        params = seen
        glob_map = {f"{name}.{p}": p for p in params}

    pr = Printer(env, glob_map)
    attrs = []
    if d.is_class:
        attrs.append("[class]")
    if d.instance_priority is not None:
        attrs.append(f"[instance {d.instance_priority}]")
    if d.monomorphic:
        attrs.append("[monomorphic]")
    head = "".join(a + " " for a in attrs)
    if d.body is None:
        head += "axiom "
    else:
        if d.opaque:
            head += "opaque "
        head += "def "
    head += name
    if params:
        head += " {" + " ".join(params) + "}"
    # shared binders print in the head, so implicit arguments stay implicit
    # when the declaration is elaborated again
    ty, body = d.type, d.body
    names: List[str] = []
    while (body is not None and isinstance(ty, Pi) and isinstance(body, Lam)
           and ty.domain == body.domain):
        x = pr._freshen(ty.hint, names)
        br = "{%s : %s}" if ty.implicit else "(%s : %s)"
        head += " " + br % (x, pr.term(ty.domain, names))
        names.append(x)
        ty, body = ty.codomain, body.body
    out = head + " : " + pr.term(ty, names)
    if body is not None and d.kind != "axiom":
        out += " := " + pr.term(body, names)
    return out


def print_module(env, names: List[str]) -> str:
    return "\n\n".join(print_definition(env, n) for n in names) + "\n"

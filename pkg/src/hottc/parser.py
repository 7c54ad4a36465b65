"""Lexer and recursive-descent parser for `.hott` source files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import ParseError
from .levels import ZERO, LMax, LParam, LSucc, LevelExpr
from .surface import (
    SAt, SBinder, SDecl, SHole, SId, SKw, SLam, SModule, SName, SPair, SPi,
    SProj, SSum, SSigma, SType, SApp, Surface, Span,
)

LEVEL_HOLE = LParam("?")

TERM_KEYWORDS = {
    "natrec", "sumrec", "emptyrec", "unitrec", "J", "transport", "apD",
    "refl", "inl", "inr",
    "I", "i0", "i1", "seg", "Iind",
    "S1", "base", "loop", "S1ind",
    "susp", "north", "south", "merid", "suspind",
    "coeq", "cp", "cglue", "coeqind",
    "trunc", "tr", "trpath", "truncind",
    "Nat", "zero", "succ", "Unit", "star", "Empty",
}

RESERVED = TERM_KEYWORDS | {
    "fun", "forall", "Sigma", "Type", "max", "def", "opaque", "axiom",
    "import", "class", "instance", "monomorphic",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<number>[0-9]+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*|_[A-Za-z0-9_']+)
  | (?P<sym>:=|:>|=>|->|\.1|\.2|[(){}\[\],:=+*@_?])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # ident | number | string | sym | eof
    value: str
    span: Span


def tokenize(src: str, path: str = "<input>") -> List[Token]:
    toks: List[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"{path}:{line}:{col}: unexpected character "
                             f"{src[pos]!r}", span=(line, col))
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token(kind, text, (line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    toks.append(Token("eof", "", (line, col)))
    return toks


class Parser:
    def __init__(self, src: str, path: str = "<input>"):
        self.path = path
        self.toks = tokenize(src, path)
        self.i = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self, off: int = 0) -> Token:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at_sym(self, s: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.value == s

    def at_word(self, w: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.value == w

    def eat_sym(self, s: str) -> Token:
        if not self.at_sym(s):
            self.fail(f"expected '{s}'")
        return self.next()

    def eat_word(self, w: str) -> Token:
        if not self.at_word(w):
            self.fail(f"expected '{w}'")
        return self.next()

    def eat_name(self) -> Token:
        t = self.peek()
        if t.kind != "ident" or t.value in RESERVED:
            self.fail("expected an identifier")
        return self.next()

    def fail(self, what: str):
        t = self.peek()
        shown = t.value or "end of input"
        raise ParseError(
            f"{self.path}:{t.span[0]}:{t.span[1]}: {what}, found '{shown}'",
            span=t.span)

    # -- modules ------------------------------------------------------------

    def parse_module(self) -> SModule:
        mod = SModule(self.path)
        while self.at_word("import"):
            t = self.next()
            s = self.peek()
            if s.kind != "string":
                self.fail("expected a quoted import path")
            self.next()
            mod.imports.append((s.value[1:-1], t.span))
        while self.peek().kind != "eof":
            mod.decls.append(self.parse_decl())
        return mod

    def parse_decl(self) -> SDecl:
        is_class = False
        priority: Optional[int] = None
        monomorphic = False
        while self.at_sym("["):
            self.next()
            if self.at_word("class"):
                self.next()
                is_class = True
            elif self.at_word("instance"):
                self.next()
                priority = 0
                if self.peek().kind == "number":
                    priority = int(self.next().value)
            elif self.at_word("monomorphic"):
                self.next()
                monomorphic = True
            else:
                self.fail("expected an attribute name")
            self.eat_sym("]")

        opaque = False
        if self.at_word("opaque"):
            self.next()
            opaque = True
        if self.at_word("def"):
            kind = "def"
            start = self.next().span
        elif self.at_word("axiom"):
            if opaque:
                self.fail("'opaque' applies to 'def' only")
            kind = "axiom"
            start = self.next().span
        else:
            self.fail("expected 'def' or 'axiom'")

        name = self.eat_name().value
        level_params: List[str] = []
        if self.at_sym("{") and self._brace_is_level_params():
            self.next()
            while not self.at_sym("}"):
                level_params.append(self.eat_name().value)
            self.next()
        binders: List[SBinder] = []
        while self.at_sym("(") or self.at_sym("{"):
            binders.extend(self.parse_binder_group())
        self.eat_sym(":")
        result = self.parse_term()
        body = None
        if self.at_sym(":="):
            if kind == "axiom":
                self.fail("an axiom cannot have a body")
            self.next()
            body = self.parse_term()
        elif kind == "def":
            self.fail("expected ':=' and a body")
        return SDecl(kind, name, level_params, binders, result, body,
                     opaque=opaque, is_class=is_class,
                     instance_priority=priority, monomorphic=monomorphic,
                     span=start)

    def _brace_is_level_params(self) -> bool:
        # level params `{i j}` contain no ':' before the closing brace
        j = self.i + 1
        while j < len(self.toks):
            t = self.toks[j]
            if t.kind == "sym" and t.value == "}":
                return True
            if t.kind != "ident" or t.value in RESERVED:
                return False
            j += 1
        return False

    def parse_binder_group(self) -> List[SBinder]:
        implicit = self.at_sym("{")
        close = "}" if implicit else ")"
        start = self.next().span
        names = [self.eat_name()]
        while self.peek().kind == "ident" and not self.at_sym(":"):
            if self.peek().value in RESERVED:
                break
            names.append(self.next())
        self.eat_sym(":")
        ty = self.parse_term()
        self.eat_sym(close)
        return [SBinder(n.value, ty, implicit, span=n.span) for n in names]

    # -- terms --------------------------------------------------------------

    def parse_term(self) -> Surface:
        t = self.peek()
        if self.at_word("fun"):
            return self.parse_fun()
        if self.at_word("forall"):
            return self.parse_forall()
        if self.at_word("Sigma"):
            return self.parse_sigma()
        left = self.parse_eq()
        if self.at_sym("->"):
            self.next()
            right = self.parse_term()
            return SPi("_", False, left, right, span=t.span)
        return left

    def parse_fun(self) -> Surface:
        start = self.next().span
        binders: List[SBinder] = []
        while True:
            if self.at_sym("("):
                binders.extend(self.parse_binder_group())
            elif self.peek().kind == "ident" and \
                    self.peek().value not in RESERVED:
                n = self.next()
                binders.append(SBinder(n.value, None, False, span=n.span))
            else:
                break
        if not binders:
            self.fail("expected at least one binder after 'fun'")
        self.eat_sym("=>")
        body = self.parse_term()
        for b in reversed(binders):
            body = SLam(b.name, b.ty, body, span=start)
        return body

    def parse_forall(self) -> Surface:
        start = self.next().span
        binders: List[SBinder] = []
        while self.at_sym("(") or self.at_sym("{"):
            binders.extend(self.parse_binder_group())
        if not binders:
            self.fail("expected binders after 'forall'")
        self.eat_sym(",")
        body = self.parse_term()
        for b in reversed(binders):
            body = SPi(b.name, b.implicit, b.ty, body, span=start)
        return body

    def parse_sigma(self) -> Surface:
        start = self.next().span
        binders = []
        while self.at_sym("("):
            binders.extend(self.parse_binder_group())
        if not binders:
            self.fail("expected binders after 'Sigma'")
        self.eat_sym(",")
        body = self.parse_term()
        for b in reversed(binders):
            body = SSigma(b.name, b.ty, body, span=start)
        return body

    def parse_eq(self) -> Surface:
        left = self.parse_sum()
        if self.at_sym("="):
            span = self.next().span
            right = self.parse_sum()
            ty = None
            if self.at_sym(":>"):
                self.next()
                ty = self.parse_sum()
            return SId(left, right, ty, span=span)
        return left

    def parse_sum(self) -> Surface:
        left = self.parse_prod()
        if self.at_sym("+"):
            span = self.next().span
            return SSum(left, self.parse_sum(), span=span)
        return left

    def parse_prod(self) -> Surface:
        left = self.parse_app()
        if self.at_sym("*"):
            span = self.next().span
            # non-dependent Sigma sugar
            return SSigma("_", left, self.parse_prod(), span=span)
        return left

    _ATOM_STARTS = {"(", "_", "@"}

    def _at_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("number",):
            return True
        if t.kind == "ident":
            return (t.value not in RESERVED or t.value in TERM_KEYWORDS
                    or t.value == "Type")
        return t.kind == "sym" and t.value in self._ATOM_STARTS

    def parse_app(self) -> Surface:
        t = self.parse_postfix()
        while self._at_atom():
            arg = self.parse_postfix()
            t = SApp(t, arg, span=getattr(t, "span", None))
        return t

    def parse_postfix(self) -> Surface:
        t = self.parse_atom()
        while self.peek().kind == "sym" and self.peek().value in (".1", ".2"):
            tok = self.next()
            t = SProj(t, 1 if tok.value == ".1" else 2, span=tok.span)
        return t

    def parse_atom(self) -> Surface:
        t = self.peek()
        if t.kind == "number":
            self.next()
            return self._nat_literal(int(t.value), t.span)
        if self.at_sym("_"):
            self.next()
            return SHole(span=t.span)
        if self.at_sym("@"):
            self.next()
            name = self.eat_name()
            levels = None
            if self.at_sym("{"):
                self.next()
                levels = []
                if not self.at_sym("}"):
                    levels.append(self.parse_level())
                    while self.at_sym(","):
                        self.next()
                        levels.append(self.parse_level())
                self.eat_sym("}")
            return SAt(name.value, levels, span=t.span)
        if self.at_sym("("):
            self.next()
            inner = self.parse_term()
            if self.at_sym(","):
                self.next()
                snd = self.parse_term()
                self.eat_sym(")")
                return SPair(inner, snd, span=t.span)
            self.eat_sym(")")
            return inner
        if t.kind == "ident":
            if t.value == "Type":
                self.next()
                self.eat_sym("{")
                l = self.parse_level()
                self.eat_sym("}")
                return SType(l, span=t.span)
            if t.value in TERM_KEYWORDS:
                self.next()
                return SKw(t.value, span=t.span)
            if t.value in RESERVED:
                self.fail("unexpected keyword")
            self.next()
            return SName(t.value, span=t.span)
        self.fail("expected a term")

    def _nat_literal(self, n: int, span: Span) -> Surface:
        t: Surface = SKw("zero", span=span)
        for _ in range(n):
            t = SApp(SKw("succ", span=span), t, span=span)
        return t

    # -- levels -------------------------------------------------------------

    def parse_level(self) -> LevelExpr:
        l = self.parse_level_atom()
        while self.at_sym("+"):
            self.next()
            t = self.peek()
            if t.kind != "number":
                self.fail("expected a number after '+' in a level")
            self.next()
            for _ in range(int(t.value)):
                l = LSucc(l)
        return l

    def parse_level_atom(self) -> LevelExpr:
        t = self.peek()
        if t.kind == "number":
            self.next()
            l: LevelExpr = ZERO
            for _ in range(int(t.value)):
                l = LSucc(l)
            return l
        if self.at_sym("?"):
            self.next()
            return LEVEL_HOLE
        if self.at_word("max"):
            self.next()
            self.eat_sym("(")
            a = self.parse_level()
            self.eat_sym(",")
            b = self.parse_level()
            self.eat_sym(")")
            return LMax(a, b)
        if self.at_sym("("):
            self.next()
            l = self.parse_level()
            self.eat_sym(")")
            return l
        if t.kind == "ident" and t.value not in RESERVED:
            self.next()
            return LParam(t.value)
        self.fail("expected a universe level")


def parse_module(src: str, path: str = "<input>") -> SModule:
    return Parser(src, path).parse_module()


def parse_term(src: str, path: str = "<input>") -> Surface:
    p = Parser(src, path)
    t = p.parse_term()
    if p.peek().kind != "eof":
        p.fail("trailing input after term")
    return t

"""Surface syntax trees produced by the parser and consumed by the
elaborator.  Spans are (line, column) pairs, 1-based."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .levels import LevelExpr

Span = Tuple[int, int]


class Surface:
    __slots__ = ()


@dataclass
class SName(Surface):
    name: str
    span: Optional[Span] = None


@dataclass
class SAt(Surface):
    """@name: a global reference with implicit insertion suppressed."""
    name: str
    levels: Optional[List[LevelExpr]] = None
    span: Optional[Span] = None


@dataclass
class SKw(Surface):
    """Primitive keyword (eliminators, constructors, ground types)."""
    name: str
    span: Optional[Span] = None


@dataclass
class SHole(Surface):
    span: Optional[Span] = None


@dataclass
class SType(Surface):
    level: LevelExpr  # LParam("?") marks a hole, replaced at elaboration
    span: Optional[Span] = None


@dataclass
class SPi(Surface):
    name: str
    implicit: bool
    domain: Surface
    codomain: Surface
    span: Optional[Span] = None


@dataclass
class SLam(Surface):
    name: str
    domain: Optional[Surface]
    body: Surface
    span: Optional[Span] = None


@dataclass
class SSigma(Surface):
    name: str
    first: Surface
    second: Surface
    span: Optional[Span] = None


@dataclass
class SApp(Surface):
    fn: Surface
    arg: Surface
    span: Optional[Span] = None


@dataclass
class SPair(Surface):
    fst: Surface
    snd: Surface
    span: Optional[Span] = None


@dataclass
class SProj(Surface):
    target: Surface
    index: int  # 1 or 2
    span: Optional[Span] = None


@dataclass
class SSum(Surface):
    left: Surface
    right: Surface
    span: Optional[Span] = None


@dataclass
class SId(Surface):
    lhs: Surface
    rhs: Surface
    ty: Optional[Surface]  # `a = b :> A`; None when the `:>` is omitted
    span: Optional[Span] = None


@dataclass
class SBinder:
    name: str
    ty: Surface
    implicit: bool
    span: Optional[Span] = None


@dataclass
class SDecl:
    kind: str  # "def" or "axiom"
    name: str
    level_params: List[str]
    binders: List[SBinder]
    result: Surface
    body: Optional[Surface]
    opaque: bool = False
    is_class: bool = False
    instance_priority: Optional[int] = None
    monomorphic: bool = False
    span: Optional[Span] = None


@dataclass
class SModule:
    path: str
    imports: List[Tuple[str, Span]] = field(default_factory=list)
    decls: List[SDecl] = field(default_factory=list)

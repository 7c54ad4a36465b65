"""Global environment: named definitions with polymorphism data, opacity,
attributes, and transitive axiom dependencies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import DuplicateName, UnknownName
from .levels import (
    Constraint, ConstraintGraph, DegenerateGraph, LevelExpr, LParam,
    instantiate,
)
from .terms import Term, subst_levels

DEFINITION = "definition"
AXIOM = "axiom"
PRIMITIVE = "primitive"


@dataclass
class Definition:
    name: str
    level_params: List[LParam]
    constraints: List[Constraint]
    type: Term
    body: Optional[Term]
    opaque: bool = False
    kind: str = DEFINITION
    axiom_deps: frozenset = frozenset()
    is_class: bool = False
    instance_priority: Optional[int] = None
    monomorphic: bool = False

    @property
    def arity(self) -> int:
        return len(self.level_params)


@dataclass
class Options:
    type_in_type: bool = False
    instance_depth: int = 16


class Environment:
    def __init__(self, options: Optional[Options] = None):
        self.options = options or Options()
        self.defs: Dict[str, Definition] = {}
        self.order: List[str] = []
        self.graph: ConstraintGraph = (
            DegenerateGraph() if self.options.type_in_type
            else ConstraintGraph())
        # class head -> [(priority, insertion index, def name)], kept sorted
        self.instances: Dict[str, List[Tuple[int, int, str]]] = {}

    def fresh_graph(self) -> ConstraintGraph:
        """A working constraint store seeded with the global (monomorphic)
        constraints, honoring the type-in-type policy."""
        return self.graph.clone()

    def lookup(self, name: str) -> Definition:
        d = self.defs.get(name)
        if d is None:
            raise UnknownName(f"unknown name '{name}'")
        return d

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def add(self, d: Definition) -> None:
        if d.name in self.defs:
            raise DuplicateName(f"duplicate name '{d.name}'")
        self.defs[d.name] = d
        self.order.append(d.name)
        if d.instance_priority is not None:
            head = _class_head(d.type)
            if head is not None:
                entries = self.instances.setdefault(head, [])
                entries.append((d.instance_priority, len(entries), d.name))
                entries.sort()

    def instantiate_const(self, name: str,
                          explicit: Optional[List[LevelExpr]] = None):
        """Level-instantiate a definition for use: returns (type, levels used,
        constraints to add).  Fresh metas unless explicit levels are given."""
        d = self.lookup(name)
        mapping, cs = instantiate(d.level_params, d.constraints, explicit)
        levels = tuple(mapping[p] for p in d.level_params)
        return subst_levels(d.type, mapping), levels, cs

    def body_at(self, name: str, levels: Tuple[LevelExpr, ...]):
        """The definition's body instantiated at the given levels, or None."""
        d = self.lookup(name)
        if d.body is None:
            return None
        mapping = dict(zip(d.level_params, levels))
        return subst_levels(d.body, mapping)

    def type_at(self, name: str, levels: Tuple[LevelExpr, ...]) -> Term:
        d = self.lookup(name)
        mapping = dict(zip(d.level_params, levels))
        return subst_levels(d.type, mapping)

    def axioms_of(self, name: str) -> frozenset:
        return self.lookup(name).axiom_deps


def _class_head(ty: Term) -> Optional[str]:
    """Head constant of an instance type's conclusion, skipping Pi prefixes."""
    from .terms import Const, Pi, unfold_apps
    while isinstance(ty, Pi):
        ty = ty.codomain
    head, _ = unfold_apps(ty)
    return head.name if isinstance(head, Const) else None

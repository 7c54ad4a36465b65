"""Universe level algebra and the constraint store.

Levels are interpreted over the naturals.  A level expression normalizes to a
max of atoms-plus-offsets; a constraint store is a weighted digraph where an
edge a -> b of weight w asserts val(b) >= val(a) + w.  The store is
inconsistent exactly when some cycle has positive total weight, and an atomic
inequality is entailed exactly when a long-enough path exists (every atom is
implicitly >= Zero, which pins the graph at a common origin).

Max on the right-hand side of a constraint is handled soundly but
incompletely: a <= max(b, c) is accepted if one disjunct is already entailed,
otherwise each disjunct is tried as a tentative addition and the first
consistent one is committed.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import UniverseInconsistency


# ---------------------------------------------------------------------------
# Level expressions


class LevelExpr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class LZero(LevelExpr):
    def __str__(self):
        return "0"


@dataclass(frozen=True, slots=True)
class LParam(LevelExpr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class LGlobal(LevelExpr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class LMeta(LevelExpr):
    id: int

    def __str__(self):
        return "?"


@dataclass(frozen=True, slots=True)
class LSucc(LevelExpr):
    prev: LevelExpr

    def __str__(self):
        return f"{self.prev}+1"


@dataclass(frozen=True, slots=True)
class LMax(LevelExpr):
    left: LevelExpr
    right: LevelExpr

    def __str__(self):
        return f"max({self.left},{self.right})"


# atoms are dict keys throughout the constraint store; the generated hash
# builds a field tuple per call, so give them direct implementations
LZero.__hash__ = lambda self: 0x5a11
LParam.__hash__ = lambda self: hash(self.name)
LGlobal.__hash__ = lambda self: hash(self.name) ^ 0x9e3779b9
LMeta.__hash__ = lambda self: self.id

ZERO = LZero()

_meta_counter = itertools.count()


def fresh_meta() -> LMeta:
    return LMeta(next(_meta_counter))


Atom = LevelExpr  # LZero | LParam | LGlobal | LMeta


def is_atom(l: LevelExpr) -> bool:
    return isinstance(l, (LZero, LParam, LGlobal, LMeta))


def level_nf(l: LevelExpr) -> Dict[Atom, int]:
    """Normalize to {atom: offset}, the level being max over atom+offset.

    Succ distributes over Max, so the normal form is flat.
    """
    out: Dict[Atom, int] = {}

    def go(l: LevelExpr, off: int) -> None:
        if isinstance(l, LSucc):
            go(l.prev, off + 1)
        elif isinstance(l, LMax):
            go(l.left, off)
            go(l.right, off)
        else:
            if out.get(l, -1) < off:
                out[l] = off
    go(l, 0)
    return out


def nf_to_level(nf: Dict[Atom, int]) -> LevelExpr:
    parts = []
    for atom, off in sorted(nf.items(), key=lambda kv: str(kv[0])):
        l: LevelExpr = atom
        for _ in range(off):
            l = LSucc(l)
        parts.append(l)
    if not parts:
        return ZERO
    acc = parts[0]
    for p in parts[1:]:
        acc = LMax(acc, p)
    return acc


def succ(l: LevelExpr) -> LevelExpr:
    return LSucc(l)


def lmax(a: LevelExpr, b: LevelExpr) -> LevelExpr:
    return LMax(a, b)


def subst_level(l: LevelExpr, mapping: Dict[Atom, LevelExpr]) -> LevelExpr:
    if isinstance(l, LSucc):
        return LSucc(subst_level(l.prev, mapping))
    if isinstance(l, LMax):
        return LMax(subst_level(l.left, mapping), subst_level(l.right, mapping))
    return mapping.get(l, l)


def level_atoms(l: LevelExpr) -> Iterable[Atom]:
    if isinstance(l, LSucc):
        yield from level_atoms(l.prev)
    elif isinstance(l, LMax):
        yield from level_atoms(l.left)
        yield from level_atoms(l.right)
    else:
        yield l


# ---------------------------------------------------------------------------
# Constraints


LE = "<="
LT = "<"
EQ = "="


@dataclass(frozen=True, slots=True)
class Constraint:
    lhs: LevelExpr
    rel: str  # one of LE, LT, EQ
    rhs: LevelExpr

    def __str__(self):
        return f"{self.lhs} {self.rel} {self.rhs}"


def subst_constraint(c: Constraint, mapping: Dict[Atom, LevelExpr]) -> Constraint:
    return Constraint(subst_level(c.lhs, mapping), c.rel, subst_level(c.rhs, mapping))


@dataclass(frozen=True, slots=True)
class _Edge:
    src: Atom
    dst: Atom
    weight: int
    origin: Optional[Constraint]


def _lookup(dist: Dict[Atom, int], x: Atom) -> Optional[int]:
    """Best known distance to x in a possibly stale cached map.  Atoms
    registered after the map was cached are reachable only through their
    zero-weight edge from ZERO, so the ZERO distance is always a valid
    lower bound for any atom."""
    d = dist.get(x)
    d0 = dist.get(ZERO)
    if d0 is not None and (d is None or d0 > d):
        return d0
    return d


class ConstraintGraph:
    """Difference-constraint store over universe atoms.

    Mutable; `clone` gives an independent copy for tentative extension.
    """

    def __init__(self):
        self._nodes: Dict[Atom, List[_Edge]] = {ZERO: []}  # outgoing edges
        self.constraints: List[Constraint] = []
        self._dist: Dict[Atom, Dict[Atom, int]] = {}  # longest-path cache

    # -- structure ----------------------------------------------------------

    def clone(self) -> "ConstraintGraph":
        g = ConstraintGraph.__new__(ConstraintGraph)
        g._nodes = {a: list(es) for a, es in self._nodes.items()}
        g.constraints = list(self.constraints)
        g._dist = {}
        return g

    @property
    def atoms(self) -> List[Atom]:
        return list(self._nodes)

    def register(self, atom: Atom) -> None:
        if atom not in self._nodes:
            # cached distance maps stay valid: the only path to a fresh atom
            # runs through its ZERO edge, which _entails_atomic recovers
            self._nodes[atom] = []
            if atom is not ZERO and not isinstance(atom, LZero):
                # every level is at least Zero
                self._nodes[ZERO].append(_Edge(ZERO, atom, 0, None))

    def _register_level(self, l: LevelExpr) -> None:
        for a in level_atoms(l):
            self.register(a)

    # -- consistency --------------------------------------------------------

    def _longest_from(self, src: Atom) -> Dict[Atom, int]:
        """Longest-path distances from src; assumes the graph is consistent.

        Worklist relaxation: each pop re-relaxes only the popped node's
        outgoing edges, so sparse graphs cost far less than a full
        Bellman-Ford sweep.  Terminates because distances only increase and
        the consistent store has no positive cycles.
        """
        cached = self._dist.get(src)
        if cached is not None:
            return cached
        dist = {src: 0}
        nodes = self._nodes
        queue = deque((src,))
        queued = {src}
        while queue:
            a = queue.popleft()
            queued.discard(a)
            da = dist[a]
            for e in nodes[a]:
                nd = da + e.weight
                b = e.dst
                if b not in dist or dist[b] < nd:
                    dist[b] = nd
                    if b not in queued:
                        queued.add(b)
                        queue.append(b)
        self._dist[src] = dist
        return dist

    def _find_positive_cycle(self) -> Optional[List[Constraint]]:
        dist: Dict[Atom, int] = {a: 0 for a in self._nodes}
        pred: Dict[Atom, _Edge] = {}
        n = len(self._nodes)
        flagged = None
        for i in range(n + 1):
            changed = False
            for a, es in self._nodes.items():
                for e in es:
                    if dist[a] + e.weight > dist[e.dst]:
                        dist[e.dst] = dist[a] + e.weight
                        pred[e.dst] = e
                        changed = True
                        if i == n:
                            flagged = e.dst
            if not changed:
                return None
        if flagged is None:
            return None
        # walk predecessors back into the cycle
        node = flagged
        for _ in range(n + 1):
            node = pred[node].src
        cycle_edges = []
        cur = node
        while True:
            e = pred[cur]
            cycle_edges.append(e)
            cur = e.src
            if cur == node:
                break
        origins = []
        for e in reversed(cycle_edges):
            if e.origin is not None and e.origin not in origins:
                origins.append(e.origin)
        return origins

    def consistent(self) -> bool:
        return self._find_positive_cycle() is None

    # -- adding constraints -------------------------------------------------

    def add_constraint(self, c: Constraint) -> None:
        """Add c; raises UniverseInconsistency (leaving the store unchanged)."""
        # already-entailed constraints need no new edges or consistency pass
        self._register_level(c.lhs)
        self._register_level(c.rhs)
        if self.entails(c):
            self.constraints.append(c)
            return
        added: List[_Edge] = []
        try:
            self._add(c, added)
        except UniverseInconsistency:
            for e in added:
                self._nodes[e.src].remove(e)
            self._dist.clear()
            raise
        self.constraints.append(c)

    def _insert_edge(self, a: Atom, b: Atom, w: int, origin: Constraint,
                     added: List[_Edge]) -> None:
        """Add edge a -> b of weight w, keeping the store consistent.

        The store had no positive cycle, so any new one must pass through
        the new edge: it exists iff longest(b .. a) + w > 0.
        """
        # a fresh meta has no outgoing edges, so no cycle can close through
        # it; the trivial path still closes a self-loop
        if a == b:
            back = 0
        elif not self._nodes[b]:
            back = None
        else:
            back = _lookup(self._longest_from(b), a)
        if back is not None and back + w > 0:
            # rebuild the offending cycle on a scratch copy for the report
            trial = self.clone()
            trial._nodes[a].append(_Edge(a, b, w, origin))
            cycle = trial._find_positive_cycle() or [origin]
            raise UniverseInconsistency(
                "universe inconsistency: cycle "
                + ", ".join(str(x) for x in cycle),
                cycle=cycle,
            )
        e = _Edge(a, b, w, origin)
        self._nodes[a].append(e)
        added.append(e)
        # drop only cached maps the new edge could improve; a source that
        # reaches ZERO may reach `a` through a later-registered zero edge,
        # so those maps are dropped conservatively
        stale = []
        for s, dist in self._dist.items():
            da = _lookup(dist, a)
            if da is None:
                continue
            db = _lookup(dist, b)
            if db is None or db < da + w:
                stale.append(s)
        for s in stale:
            del self._dist[s]

    def _add(self, c: Constraint, added: List[_Edge]) -> None:
        self._register_level(c.lhs)
        self._register_level(c.rhs)
        if c.rel == EQ:
            self._add(Constraint(c.lhs, LE, c.rhs), added)
            self._add(Constraint(c.rhs, LE, c.lhs), added)
            return
        strict = 1 if c.rel == LT else 0
        rhs_nf = level_nf(c.rhs)
        for atom, off in level_nf(c.lhs).items():
            self._add_atomic(atom, off + strict, rhs_nf, c, added)

    def _add_atomic(self, a: Atom, k: int, rhs_nf: Dict[Atom, int],
                    origin: Constraint, added: List[_Edge]) -> None:
        """Demand a + k <= max of rhs_nf."""
        if len(rhs_nf) == 1:
            (b, n), = rhs_nf.items()
            self._insert_edge(a, b, k - n, origin, added)
            return
        # Max on the rhs: sound disjunct commitment.
        for b, n in rhs_nf.items():
            if self._entails_atomic(a, k, b, n):
                return
        for b, n in rhs_nf.items():
            back = self._longest_from(b).get(a)
            if back is None or back + (k - n) <= 0:
                self._insert_edge(a, b, k - n, origin, added)
                return
        raise UniverseInconsistency(
            f"no consistent disjunct for {origin}", cycle=[origin])

    # -- entailment ---------------------------------------------------------

    def _entails_atomic(self, a: Atom, k: int, b: Atom, n: int) -> bool:
        """Does the store force a + k <= b + n?"""
        if a == b:
            return k <= n
        if b not in self._nodes:
            # the only fact about an unseen atom is b >= 0
            return self._entails_atomic(a, k, ZERO, n)
        if a not in self._nodes:
            # a is unbounded above, so only trivial bounds hold
            return False
        if not self._nodes[a]:
            # no outgoing edges: a reaches nothing but itself
            return False
        d = _lookup(self._longest_from(a), b)
        return d is not None and d >= k - n

    def entails(self, c: Constraint) -> bool:
        if c.rel == EQ:
            return (self.entails(Constraint(c.lhs, LE, c.rhs))
                    and self.entails(Constraint(c.rhs, LE, c.lhs)))
        strict = 1 if c.rel == LT else 0
        rhs_nf = level_nf(c.rhs)
        for a, off in level_nf(c.lhs).items():
            k = off + strict
            if not any(self._entails_atomic(a, k, b, n)
                       for b, n in rhs_nf.items()):
                return False
        return True

    def path_weight(self, src: Atom, dst: Atom) -> Optional[int]:
        """Largest w with val(dst) >= val(src) + w forced, or None."""
        if src == dst:
            return 0
        if src not in self._nodes or not self._nodes[src]:
            return None
        return _lookup(self._longest_from(src), dst)

    def level_le(self, a: LevelExpr, b: LevelExpr) -> bool:
        return self.entails(Constraint(a, LE, b))

    def level_eq(self, a: LevelExpr, b: LevelExpr) -> bool:
        if a == b:
            return True
        return self.entails(Constraint(a, EQ, b))

    # -- assignments --------------------------------------------------------

    def solve_assignment(self) -> Dict[Atom, int]:
        """Coordinate-wise minimal satisfying assignment (longest path from 0)."""
        cycle = self._find_positive_cycle()
        if cycle is not None:
            raise UniverseInconsistency("inconsistent constraint store",
                                        cycle=cycle)
        dist = self._longest_from(ZERO)
        return {a: max(0, dist.get(a, 0)) for a in self._nodes}

    def evaluate(self, l: LevelExpr, assignment: Dict[Atom, int]) -> int:
        return max(assignment.get(a, 0) + off for a, off in level_nf(l).items())

    def check_assignment(self, assignment: Dict[Atom, int]) -> bool:
        for c in self.constraints:
            if not constraint_holds(c, assignment):
                return False
        return True


class DegenerateGraph(ConstraintGraph):
    """Constraint policy for type-in-type: everything is accepted."""

    def add_constraint(self, c: Constraint) -> None:
        self.constraints.append(c)

    def entails(self, c: Constraint) -> bool:
        return True

    def clone(self) -> "DegenerateGraph":
        g = DegenerateGraph.__new__(DegenerateGraph)
        g._nodes = {a: list(es) for a, es in self._nodes.items()}
        g.constraints = list(self.constraints)
        return g

    def solve_assignment(self) -> Dict[Atom, int]:
        return {a: 0 for a in self._nodes}


def constraint_holds(c: Constraint, assignment: Dict[Atom, int]) -> bool:
    def ev(l):
        return max(assignment.get(a, 0) + off for a, off in level_nf(l).items())
    lv, rv = ev(c.lhs), ev(c.rhs)
    if c.rel == LE:
        return lv <= rv
    if c.rel == LT:
        return lv < rv
    return lv == rv


def instantiate(params: List[LParam],
                constraints: List[Constraint],
                explicit: Optional[List[LevelExpr]] = None
                ) -> Tuple[Dict[Atom, LevelExpr], List[Constraint]]:
    """Level substitution for using a polymorphic definition.

    Each Param maps to a fresh Meta (or the caller-supplied level); Metas that
    leaked into the stored constraints are freshened too, so separate uses
    never share solver variables.  Globals and Zero are left alone.
    """
    if explicit is not None and len(explicit) != len(params):
        from .errors import LevelArityError
        raise LevelArityError(
            f"expected {len(params)} level argument(s), got {len(explicit)}")
    mapping: Dict[Atom, LevelExpr] = {}
    for i, p in enumerate(params):
        mapping[p] = explicit[i] if explicit is not None else fresh_meta()
    for c in constraints:
        for atom in list(level_atoms(c.lhs)) + list(level_atoms(c.rhs)):
            if isinstance(atom, (LMeta, LParam)) and atom not in mapping:
                mapping[atom] = fresh_meta()
    return mapping, [subst_constraint(c, mapping) for c in constraints]

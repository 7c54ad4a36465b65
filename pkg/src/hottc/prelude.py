"""Primitive cells available in every environment.

Higher inductive eliminators compute definitionally on point constructors
only; their action on path constructors is provided by these cells.  They
are registered as primitives: using them does not mark a proof as
axiom-dependent, because they are part of the theory, not postulates.
"""

from __future__ import annotations

from .env import PRIMITIVE, Environment, Options
from .loader import check_declaration
from .parser import parse_module

_PRELUDE = """
axiom interval_ind_beta_seg {i}
  (P : I -> Type{i}) (a : P i0) (b : P i1)
  (p : transport P seg a = b :> P i1) :
  apD P (fun (x : I) => Iind P a b p x) seg = p
    :> (transport P seg a = b :> P i1)

axiom circle_ind_beta_loop {i}
  (P : S1 -> Type{i}) (b : P base)
  (l : transport P loop b = b :> P base) :
  apD P (fun (x : S1) => S1ind P b l x) loop = l
    :> (transport P loop b = b :> P base)

axiom susp_ind_beta_merid {i j}
  (A : Type{i}) (P : susp A -> Type{j})
  (n : P (north A)) (s : P (south A))
  (m : forall (a : A), transport P (merid A a) n = s :> P (south A))
  (a : A) :
  apD P (fun (x : susp A) => suspind P n s m x) (merid A a) = m a
    :> (transport P (merid A a) n = s :> P (south A))

axiom coeq_ind_beta_glue {i j k}
  (A : Type{i}) (B : Type{j}) (f : A -> B) (g : A -> B)
  (P : coeq f g -> Type{k})
  (pc : forall (b : B), P (cp f g b))
  (gc : forall (a : A),
          transport P (cglue f g a) (pc (f a)) = pc (g a)
            :> P (cp f g (g a)))
  (a : A) :
  apD P (fun (x : coeq f g) => coeqind P pc gc x) (cglue f g a) = gc a
    :> (transport P (cglue f g a) (pc (f a)) = pc (g a)
          :> P (cp f g (g a)))
"""


def bootstrap(options: Options | None = None) -> Environment:
    env = Environment(options or Options())
    mod = parse_module(_PRELUDE, "<prelude>")
    for d in mod.decls:
        check_declaration(env, d, kind=PRIMITIVE)
    return env

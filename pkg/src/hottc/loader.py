"""Module loading: parse, elaborate, and check declarations in order,
resolving imports depth-first with cycle detection.

Checked imports are cached next to their sources (separate compilation):
a module's cache is keyed by its own source, the caches of everything it
imports, and the checker options, so any upstream edit invalidates the
whole downstream chain.  The entry file is always re-checked.
"""

from __future__ import annotations

import hashlib
import os
import pickle
from typing import Dict, List, Optional, Set

from .check import add_declaration
from .elab import Elaborator
from .env import AXIOM, DEFINITION, PRIMITIVE, Environment
from .errors import ImportCycle, IoError
from .parser import parse_module
from .surface import SDecl, SModule

_CACHE_FORMAT = 2


def check_declaration(env: Environment, decl: SDecl,
                      kind: Optional[str] = None) -> None:
    el = Elaborator(env)
    params, ty, body = el.elab_declaration(decl)
    if kind is None:
        kind = AXIOM if decl.kind == "axiom" else DEFINITION
    add_declaration(
        env, decl.name, params, [], ty, body,
        opaque=decl.opaque, kind=kind,
        is_class=decl.is_class,
        instance_priority=decl.instance_priority,
        monomorphic=decl.monomorphic)


def check_source(env: Environment, src: str, path: str = "<input>"
                 ) -> List[str]:
    """Check every declaration of a single source string; imports are not
    allowed here.  Returns the declared names."""
    mod = parse_module(src, path)
    if mod.imports:
        raise IoError(f"{path}: imports are only resolved when loading files")
    for d in mod.decls:
        check_declaration(env, d)
    return [d.name for d in mod.decls]


def _resolve(base_dir: str, name: str) -> str:
    return os.path.normpath(os.path.join(base_dir, name + ".hott"))


def _cache_path(apath: str) -> str:
    d, base = os.path.split(apath)
    stem = base[:-5] if base.endswith(".hott") else base
    return os.path.join(d, ".hottc-cache", stem + ".pkl")


def _module_key(env: Environment, src: str, dep_keys: List[str]) -> str:
    h = hashlib.sha256()
    h.update(repr((_CACHE_FORMAT, env.options.type_in_type,
                   env.options.instance_depth)).encode())
    h.update(src.encode("utf-8"))
    for k in dep_keys:
        h.update(k.encode())
    return h.hexdigest()


def _try_restore(env: Environment, apath: str, key: str) -> Optional[List[str]]:
    try:
        with open(_cache_path(apath), "rb") as fh:
            payload = pickle.load(fh)
        if payload.get("key") != key:
            return None
        for d in payload["defs"]:
            env.add(d)
        for c in payload["global_constraints"]:
            env.graph.add_constraint(c)
        return payload["names"]
    except Exception:
        return None


def _write_cache(env: Environment, apath: str, key: str, names: List[str],
                 def_base: int, gc_base: int) -> None:
    payload = {
        "key": key,
        "names": names,
        "defs": [env.defs[n] for n in env.order[def_base:]],
        "global_constraints": env.graph.constraints[gc_base:],
    }
    path = _cache_path(apath)
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)
        os.replace(tmp, path)
    except OSError:
        pass  # caching is best-effort


def load_file(env: Environment, path: str, use_cache: bool = True
              ) -> List[str]:
    """Load a file and its imports; returns the names declared by the entry
    file itself (not by its imports)."""
    done: Dict[str, str] = {}  # absolute path -> module key
    stack: List[str] = []

    def go(apath: str, entry: bool) -> str:
        if apath in stack:
            cycle = " -> ".join(stack[stack.index(apath):] + [apath])
            raise ImportCycle(f"import cycle: {cycle}")
        if apath in done:
            return done[apath]
        try:
            with open(apath, "r", encoding="utf-8") as fh:
                src = fh.read()
        except OSError as e:
            raise IoError(f"cannot read '{apath}': {e.strerror}") from None
        mod = parse_module(src, apath)
        stack.append(apath)
        base = os.path.dirname(apath)
        dep_keys = [go(_resolve(base, imp), False)
                    for imp, span in mod.imports]
        stack.pop()
        key = _module_key(env, src, dep_keys)
        done[apath] = key
        if not entry and use_cache \
                and _try_restore(env, apath, key) is not None:
            return key
        def_base = len(env.order)
        gc_base = len(env.graph.constraints)
        for d in mod.decls:
            check_declaration(env, d)
        names = [d.name for d in mod.decls]
        if use_cache:
            _write_cache(env, apath, key, names, def_base, gc_base)
        if entry:
            nonlocal entry_names
            entry_names = names
        return key

    entry_names: List[str] = []
    go(os.path.normpath(os.path.abspath(path)), True)
    return entry_names

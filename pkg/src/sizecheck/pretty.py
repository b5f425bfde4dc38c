"""Rendering of kernel terms, stages and diagnostics."""

from __future__ import annotations

from .syntax import (
    Abs, Annot, App, Case, Cofix, Const, Constr, Fix, Ind, LetIn, Match, Prod,
    Sort, Stage, Term, Univ, Var,
)

ARROW = "→"
IOTA = "ι"
INFTY_CHAR = "∞"
LANGLE = "⟨"
RANGLE = "⟩"


def pp_sort(s: Sort) -> str:
    return str(s)


def pp_stage(s: Stage, ascii: bool = False) -> str:
    if s.var is None:
        return "oo" if ascii else INFTY_CHAR
    base = f"v{s.var}"
    return f"{base}+{s.hats}" if s.hats else base


def pp_annot(a: Annot, ascii: bool = False) -> str:
    """Superscript text for an annotation; empty string when bare."""
    if a.kind == "bare":
        return ""
    if a.kind == "star":
        return "*"
    if a.kind == "glob":
        return "!" if ascii else IOTA
    if a.kind == "full":
        return "oo" if ascii else INFTY_CHAR
    return pp_stage(a.stage, ascii)


def _sup(text: str) -> str:
    if any(c in text for c in "+"):
        return "^{" + text + "}"
    return "^" + text


def _annot_suffix(a: Annot, ascii: bool) -> str:
    t = pp_annot(a, ascii)
    return _sup(t) if t else ""


def _vector_suffix(sizes, ascii: bool) -> str:
    if sizes is None:
        return ""
    inner = ",".join(pp_annot(a, ascii) for a in sizes)
    if ascii:
        return f"^<{inner}>"
    return f"^{LANGLE}{inner}{RANGLE}"


def _occurs0(t: Term, depth: int = 0) -> bool:
    if isinstance(t, Var):
        return t.idx == depth
    if isinstance(t, Abs):
        return _occurs0(t.dom, depth) or _occurs0(t.body, depth + 1)
    if isinstance(t, Prod):
        return _occurs0(t.dom, depth) or _occurs0(t.cod, depth + 1)
    if isinstance(t, App):
        return _occurs0(t.fn, depth) or _occurs0(t.arg, depth)
    if isinstance(t, LetIn):
        return _occurs0(t.ty, depth) or _occurs0(t.val, depth) or _occurs0(t.body, depth + 1)
    if isinstance(t, Case):
        return (
            _occurs0(t.motive, depth)
            or _occurs0(t.target, depth)
            or any(_occurs0(b, depth) for _, b in t.branches)
        )
    if isinstance(t, Match):
        nb = 0 if t.ret_binders is None else len(t.ret_binders)
        return (
            _occurs0(t.target, depth)
            or _occurs0(t.ret, depth + nb)
            or any(_occurs0(b, depth + len(ns)) for _, ns, b in t.clauses)
        )
    if isinstance(t, (Fix, Cofix)):
        n = len(t.defs)
        return any(_occurs0(d.ty, depth) or _occurs0(d.body, depth + n) for d in t.defs)
    return False


def _freshen(name: str, used: list[str]) -> str:
    if name == "_" or name not in used:
        return name
    while name in used:
        name += "'"
    return name


# precedence levels: 0 binders/let/match, 1 arrows, 2 application, 3 atoms


def pp_term(t: Term, names: list[str] | None = None, ascii: bool = False) -> str:
    return _pp(t, list(names or []), 0, ascii)


def _pp(t: Term, names: list[str], prec: int, ascii: bool) -> str:
    def wrap(s: str, level: int) -> str:
        return f"({s})" if level < prec else s

    if isinstance(t, Univ):
        return pp_sort(t.sort)
    if isinstance(t, Var):
        if t.idx < len(names):
            base = names[-1 - t.idx]
        else:
            base = f"#{t.idx}"
        return base + _vector_suffix(t.sizes, ascii)
    if isinstance(t, Const):
        return t.name + _vector_suffix(t.sizes, ascii)
    if isinstance(t, Ind):
        return t.name + _annot_suffix(t.annot, ascii)
    if isinstance(t, Constr):
        return t.name
    if isinstance(t, App):
        fn = _pp(t.fn, names, 2, ascii)
        arg = _pp(t.arg, names, 3, ascii)
        return wrap(f"{fn} {arg}", 2)
    if isinstance(t, Prod):
        arrow = "->" if ascii else ARROW
        if t.name != "_" and _occurs0(t.cod):
            name = _freshen(t.name, names)
            dom = _pp(t.dom, names, 0, ascii)
            cod = _pp(t.cod, names + [name], 1, ascii)
            return wrap(f"({name} : {dom}) {arrow} {cod}", 1)
        dom = _pp(t.dom, names, 2, ascii)
        cod = _pp(t.cod, names + ["_"], 1, ascii)
        return wrap(f"{dom} {arrow} {cod}", 1)
    if isinstance(t, Abs):
        name = _freshen(t.name, names)
        dom = _pp(t.dom, names, 0, ascii)
        body = _pp(t.body, names + [name], 0, ascii)
        return wrap(f"fun {name} : {dom} => {body}", 0)
    if isinstance(t, LetIn):
        name = _freshen(t.name, names)
        ty = _pp(t.ty, names, 0, ascii)
        val = _pp(t.val, names, 0, ascii)
        body = _pp(t.body, names + [name], 0, ascii)
        return wrap(f"let {name} : {ty} := {val} in {body}", 0)
    if isinstance(t, Case):
        target = _pp(t.target, names, 0, ascii)
        motive = _pp(t.motive, names, 3, ascii)
        arms = " ".join(
            f"| {c} => {_pp(b, names, 0, ascii)}" for c, b in t.branches
        )
        return wrap(f"match {target} return* {motive} with {arms} end", 0)
    if isinstance(t, Match):
        target = _pp(t.target, names, 0, ascii)
        arms = []
        for c, ns, b in t.clauses:
            inner = names + list(ns)
            head = " ".join((c,) + ns)
            arms.append(f"| {head} => {_pp(b, inner, 0, ascii)}")
        rnames = list(t.ret_binders or ())
        ret = _pp(t.ret, names + rnames, 0, ascii)
        return wrap(f"match {target} return {ret} with {' '.join(arms)} end", 0)
    if isinstance(t, Fix):
        inner = names + [d.name for d in t.defs]
        parts = []
        for i, d in enumerate(t.defs):
            ty = _pp(d.ty, names, 0, ascii)
            body = _pp(d.body, inner, 0, ascii)
            idx = t.indices[i] if i < len(t.indices) else "?"
            parts.append(f"{d.name}/{idx} : {ty} := {body}")
        return wrap(f"fix<{t.select}> {' with '.join(parts)}", 0)
    if isinstance(t, Cofix):
        inner = names + [d.name for d in t.defs]
        parts = [
            f"{d.name} : {_pp(d.ty, names, 0, ascii)} := {_pp(d.body, inner, 0, ascii)}"
            for d in t.defs
        ]
        return wrap(f"cofix<{t.select}> {' with '.join(parts)}", 0)
    return f"<{type(t).__name__}>"

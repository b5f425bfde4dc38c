"""Name resolution, inductive installation and the declaration driver."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DuplicateName, NotASort, ParseFailure, UnknownName
from .inference import Checker
from .parser import (
    RApp, RArrow, RAxiom, RDecl, RDefinition, RFixGroup, RForall, RFun,
    RIndGroup, RLet, RMatch, RSort, RTerm, RVar, parse_source,
)
from .pretty import pp_term
from .syntax import (
    Abs, App, BARE, Const, Constr, Cofix, ERASE_FULL, FULL, Fix, FixDef, GDef,
    GlobalEnv, Ind, IndBlock, IndBody, Constructor, LetIn, Match, Prod, PROP,
    SET, Signature, TeleEntry, Telescope, Term, Univ, Var, count_annots,
    erase, strip_app, type_,
)


# ---------------------------------------------------------------------------
# Lowering: surface names to de Bruijn indices and global references
# ---------------------------------------------------------------------------


def lower_term(raw: RTerm, scope: list[str], sig: Signature, genv: GlobalEnv) -> Term:
    if isinstance(raw, RVar):
        name = raw.name
        if name != "_":
            for i, n in enumerate(reversed(scope)):
                if n == name:
                    return Var(i, None, name)
            if sig.has_ind(name):
                return Ind(name, BARE)
            if sig.has_constr(name):
                return Constr(name)
            if name in genv:
                return Const(name, None)
        raise UnknownName(f"unknown name {name}", span=raw.span)
    if isinstance(raw, RSort):
        if raw.kind == "Prop":
            return Univ(PROP)
        if raw.kind == "Set":
            return Univ(SET)
        return Univ(type_(raw.level))
    if isinstance(raw, RApp):
        return _lower_app(raw, scope, sig, genv)
    if isinstance(raw, RArrow):
        dom = lower_term(raw.dom, scope, sig, genv)
        cod = lower_term(raw.cod, scope + ["_"], sig, genv)
        return Prod("_", dom, cod)
    if isinstance(raw, RForall):
        dom = lower_term(raw.ty, scope, sig, genv)
        cod = lower_term(raw.body, scope + [raw.name], sig, genv)
        return Prod(raw.name, dom, cod)
    if isinstance(raw, RFun):
        dom = lower_term(raw.ty, scope, sig, genv)
        body = lower_term(raw.body, scope + [raw.name], sig, genv)
        return Abs(raw.name, dom, body)
    if isinstance(raw, RLet):
        ty = lower_term(raw.ty, scope, sig, genv)
        val = lower_term(raw.val, scope, sig, genv)
        body = lower_term(raw.body, scope + [raw.name], sig, genv)
        return LetIn(raw.name, ty, val, body)
    if isinstance(raw, RMatch):
        target = lower_term(raw.target, scope, sig, genv)
        if raw.as_name is None and raw.in_name is None:
            ret_binders = None
            ret = lower_term(raw.ret, scope, sig, genv)
        else:
            binders = list(raw.in_pats) + [raw.as_name or "_"]
            ret_binders = tuple(binders)
            ret = lower_term(raw.ret, scope + binders, sig, genv)
        clauses = []
        for c in raw.clauses:
            body = lower_term(c.body, scope + list(c.names), sig, genv)
            clauses.append((c.cname, c.names, body))
        return Match(target, ret, ret_binders, tuple(clauses), raw.in_name)
    raise ParseFailure(f"cannot lower {type(raw).__name__}")


def _lower_app(raw: RApp, scope, sig, genv) -> Term:
    return App(lower_term(raw.fn, scope, sig, genv), lower_term(raw.arg, scope, sig, genv))


def _forall_chain(binders, retty: RTerm) -> RTerm:
    out = retty
    for n, ty in reversed(binders):
        out = RForall(n, ty, out)
    return out


def _fun_chain(binders, body: RTerm) -> RTerm:
    out = body
    for n, ty in reversed(binders):
        out = RFun(n, ty, out)
    return out


# ---------------------------------------------------------------------------
# Inductive installation
# ---------------------------------------------------------------------------


def _peel_prods(t: Term) -> tuple[Telescope, Term]:
    tele: list[TeleEntry] = []
    while isinstance(t, Prod):
        tele.append(TeleEntry(t.name, t.dom))
        t = t.cod
    return tuple(tele), t


def _fullify(genv: GlobalEnv, t: Term) -> Term:
    """Full-erase a lowered signature term, attaching infinite annotation
    vectors to defined-constant uses so their unfolding stays well-sized."""
    t = erase(t, ERASE_FULL)

    def walk(u: Term) -> Term:
        if isinstance(u, Const) and u.sizes is None:
            decl = genv.lookup(u.name)
            if isinstance(decl, GDef):
                return Const(u.name, (FULL,) * count_annots(decl.body))
            return u
        if isinstance(u, Prod):
            return Prod(u.name, walk(u.dom), walk(u.cod))
        if isinstance(u, Abs):
            return Abs(u.name, u.dom, walk(u.body))
        if isinstance(u, App):
            return App(walk(u.fn), walk(u.arg))
        return u

    return walk(t)


def install_inductive(checker: Checker, group: RIndGroup, warn=None) -> IndBlock:
    """Scope- and arity-check a surface (co)inductive block and add it to the
    signature.  Strict positivity is not checked; a warning records that."""
    sig, genv = checker.sig, checker.genv
    first = group.bodies[0]
    for body in group.bodies:
        for name in (body.name, *(c for c, _ in body.ctors)):
            if name in genv or sig.has_ind(name) or sig.has_constr(name):
                raise DuplicateName(f"name {name} is already declared", span=body.span)
        if body.binders != first.binders:
            raise ParseFailure(
                "mutual inductive bodies must share their parameters", span=body.span
            )

    # parameters
    scope: list[str] = []
    params: list[TeleEntry] = []
    for n, ty_raw in first.binders:
        ty = lower_term(ty_raw, scope, sig, genv)
        params.append(TeleEntry(n, _fullify(genv, ty)))
        scope.append(n)

    # arities
    bodies: list[IndBody] = []
    for body in group.bodies:
        arity = lower_term(body.arity, scope, sig, genv)
        indices, rest = _peel_prods(arity)
        if not isinstance(rest, Univ):
            raise NotASort(f"arity of {body.name} must end in a universe", span=body.span)
        indices = tuple(TeleEntry(e.name, _fullify(genv, e.ty)) for e in indices)
        bodies.append(IndBody(body.name, indices, rest.sort))

    # provisional registration so constructor types can mention the block
    block = IndBlock(tuple(params), tuple(bodies), (), group.coinductive)
    sig.add_block(block)
    try:
        ctors: list[Constructor] = []
        for bi, body in enumerate(group.bodies):
            for cname, cty_raw in body.ctors:
                cty = lower_term(cty_raw, scope, sig, genv)
                args, head = _peel_prods(cty)
                h, hargs = strip_app(head)
                if not isinstance(h, Ind) or h.name not in {b.name for b in bodies}:
                    raise ParseFailure(
                        f"constructor {cname} must build one of the block's types",
                        span=body.span,
                    )
                m, n = len(params), len(args)
                if len(hargs) < m:
                    raise ParseFailure(
                        f"constructor {cname} must apply {h.name} to the parameters",
                        span=body.span,
                    )
                for i in range(m):
                    expected = n + m - 1 - i
                    if not (isinstance(hargs[i], Var) and hargs[i].idx == expected):
                        raise ParseFailure(
                            f"constructor {cname} must apply {h.name} to the parameters in order",
                            span=body.span,
                        )
                owner_body = next(b for b in bodies if b.name == h.name)
                index_args = hargs[m:]
                if len(index_args) != len(owner_body.indices):
                    raise ParseFailure(
                        f"constructor {cname} applies {h.name} to {len(index_args)} indices, "
                        f"expected {len(owner_body.indices)}",
                        span=body.span,
                    )
                args = tuple(TeleEntry(e.name, _fullify(genv, e.ty)) for e in args)
                index_args = tuple(_fullify(genv, a) for a in index_args)
                ctors.append(Constructor(cname, h.name, args, index_args))
    except Exception:
        _remove_block(sig, block)
        raise
    _remove_block(sig, block)
    block = IndBlock(tuple(params), tuple(bodies), tuple(ctors), group.coinductive)
    sig.add_block(block)
    if warn is not None:
        names = ", ".join(b.name for b in bodies)
        warn(f"warning: strict positivity of {names} is not checked")
    return block


def _remove_block(sig: Signature, block: IndBlock) -> None:
    sig.blocks.remove(block)
    for b in block.bodies:
        sig.inds.pop(b.name, None)
    for c in block.constructors:
        sig.constrs.pop(c.name, None)


# ---------------------------------------------------------------------------
# Declaration processing
# ---------------------------------------------------------------------------


@dataclass
class CheckedGlobal:
    name: str
    ty: Term


def _struct_index(fd, span) -> int | None:
    if fd.struct is None:
        return None
    if isinstance(fd.struct, int):
        idx = fd.struct
    else:
        names = [n for n, _ in fd.binders]
        if fd.struct not in names:
            raise ParseFailure(
                f"struct argument {fd.struct} is not a binder of {fd.name}", span=span
            )
        idx = names.index(fd.struct) + 1
    if idx < 1 or idx > len(fd.binders):
        raise ParseFailure(f"struct index {idx} out of range for {fd.name}", span=span)
    return idx


def process_decl(checker: Checker, decl: RDecl, warn=None) -> list[CheckedGlobal]:
    """Check one surface declaration, extending the environments.  Returns the
    printed-form globals it introduced."""
    sig, genv = checker.sig, checker.genv
    out: list[CheckedGlobal] = []
    if isinstance(decl, RDefinition):
        ty = lower_term(decl.ty, [], sig, genv)
        body = lower_term(decl.body, [], sig, genv)
        g = checker.check_global_def(decl.name, ty, body, span=decl.span)
        out.append(CheckedGlobal(g.name, g.ty))
        return out
    if isinstance(decl, RAxiom):
        ty = lower_term(decl.ty, [], sig, genv)
        g = checker.check_global_assum(decl.name, ty, span=decl.span)
        out.append(CheckedGlobal(g.name, g.ty))
        return out
    if isinstance(decl, RIndGroup):
        install_inductive(checker, decl, warn=warn)
        return out
    if isinstance(decl, RFixGroup):
        names = [fd.name for fd in decl.defs]
        tys_raw = [_forall_chain(fd.binders, fd.retty) for fd in decl.defs]
        bodies_raw = [_fun_chain(fd.binders, fd.body) for fd in decl.defs]
        structs = [_struct_index(fd, decl.span) for fd in decl.defs]
        if decl.cofix:
            indices: tuple[int, ...] = ()
        elif all(s is not None for s in structs):
            indices = tuple(structs)  # type: ignore[arg-type]
        else:
            indices = ()
        defs = tuple(
            FixDef(
                name,
                lower_term(ty_raw, [], sig, genv),
                lower_term(body_raw, names.copy(), sig, genv),
            )
            for name, ty_raw, body_raw in zip(names, tys_raw, bodies_raw)
        )
        for k, (name, ty_raw) in enumerate(zip(names, tys_raw), start=1):
            node: Term = Cofix(k, defs) if decl.cofix else Fix(indices, k, defs)
            ty = lower_term(ty_raw, [], sig, genv)
            g = checker.check_global_def(name, ty, node, span=decl.span)
            out.append(CheckedGlobal(g.name, g.ty))
        return out
    raise ParseFailure(f"unknown declaration {type(decl).__name__}")


def render_global(g: CheckedGlobal, ascii: bool = False) -> str:
    return f"{g.name} : {pp_term(g.ty, [], ascii=ascii)}"


def check_text(checker: Checker, text: str, warn=None, on_global=None) -> list[CheckedGlobal]:
    decls = parse_source(text)
    out = []
    for decl in decls:
        for g in process_decl(checker, decl, warn=warn):
            out.append(g)
            if on_global is not None:
                on_global(g)
    return out

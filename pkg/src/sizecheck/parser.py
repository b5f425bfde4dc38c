"""Lexer, parser and canonical printer for the surface language.

Binder groups are flattened into single binders at parse time, so printing
and reparsing a file reproduces the same tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseFailure, Span

KEYWORDS = {
    "Inductive", "CoInductive", "Definition", "Fixpoint", "CoFixpoint",
    "Axiom", "forall", "fun", "let", "in", "match", "with", "as", "return",
    "end", "struct", "Prop", "Set", "Type",
}

PUNCT = [":=", "=>", "->", "(", ")", ":", ",", ".", "|", "@", "{", "}"]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "num" | "punct" | "eof"
    value: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col)


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("(*", i):
            depth = 1
            j = i + 2
            l2, c2 = line, col + 2
            while j < n and depth:
                if text.startswith("(*", j):
                    depth += 1
                    j += 2
                    c2 += 2
                elif text.startswith("*)", j):
                    depth -= 1
                    j += 2
                    c2 += 2
                elif text[j] == "\n":
                    j += 1
                    l2 += 1
                    c2 = 1
                else:
                    j += 1
                    c2 += 1
            if depth:
                raise ParseFailure("unterminated comment", Span(line, col))
            i, line, col = j, l2, c2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseFailure(f"unexpected character {c!r}", Span(line, col))
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Surface AST
# ---------------------------------------------------------------------------


class RTerm:
    __slots__ = ()


@dataclass(frozen=True)
class RVar(RTerm):
    name: str
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RSort(RTerm):
    kind: str
    level: int = 1
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RApp(RTerm):
    fn: RTerm
    arg: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RArrow(RTerm):
    dom: RTerm
    cod: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RForall(RTerm):
    name: str
    ty: RTerm
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RFun(RTerm):
    name: str
    ty: RTerm
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RLet(RTerm):
    name: str
    ty: RTerm
    val: RTerm
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RClause:
    cname: str
    names: tuple[str, ...]
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RMatch(RTerm):
    target: RTerm
    as_name: Optional[str]
    in_name: Optional[str]
    in_pats: tuple[str, ...]
    ret: RTerm
    clauses: tuple[RClause, ...]
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RDefinition:
    name: str
    ty: RTerm
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RAxiom:
    name: str
    ty: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RFixDef:
    name: str
    binders: tuple[tuple[str, RTerm], ...]
    struct: Optional[int | str]
    retty: RTerm
    body: RTerm
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RFixGroup:
    cofix: bool
    defs: tuple[RFixDef, ...]
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RIndBody:
    name: str
    binders: tuple[tuple[str, RTerm], ...]
    arity: RTerm
    ctors: tuple[tuple[str, RTerm], ...]
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class RIndGroup:
    coinductive: bool
    bodies: tuple[RIndBody, ...]
    span: Optional[Span] = field(default=None, compare=False)


RDecl = RDefinition | RAxiom | RFixGroup | RIndGroup


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_punct(self, p: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.value == p

    def at_kw(self, kw: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.value == kw

    def expect_punct(self, p: str) -> Token:
        t = self.next()
        if t.kind != "punct" or t.value != p:
            raise ParseFailure(f"expected {p!r}, found {t.value!r}", t.span)
        return t

    def expect_kw(self, kw: str) -> Token:
        t = self.next()
        if t.kind != "ident" or t.value != kw:
            raise ParseFailure(f"expected {kw!r}, found {t.value!r}", t.span)
        return t

    def expect_ident(self) -> Token:
        t = self.next()
        if t.kind != "ident" or t.value in KEYWORDS:
            raise ParseFailure(f"expected an identifier, found {t.value!r}", t.span)
        return t

    def expect_name_or_wild(self) -> Token:
        t = self.next()
        if t.kind != "ident" or (t.value in KEYWORDS and t.value != "_"):
            raise ParseFailure(f"expected a name, found {t.value!r}", t.span)
        return t

    # -- declarations --------------------------------------------------------

    def parse_file(self) -> list[RDecl]:
        decls: list[RDecl] = []
        while self.peek().kind != "eof":
            decls.append(self.parse_decl())
        return decls

    def parse_decl(self) -> RDecl:
        t = self.peek()
        if t.kind != "ident":
            raise ParseFailure(f"expected a declaration, found {t.value!r}", t.span)
        if t.value == "Definition":
            return self._parse_definition()
        if t.value == "Axiom":
            return self._parse_axiom()
        if t.value in ("Fixpoint", "CoFixpoint"):
            return self._parse_fix_group()
        if t.value in ("Inductive", "CoInductive"):
            return self._parse_ind_group()
        raise ParseFailure(f"unknown declaration keyword {t.value!r}", t.span)

    def _parse_definition(self) -> RDefinition:
        kw = self.next()
        name = self.expect_ident()
        self.expect_punct(":")
        ty = self.parse_term()
        self.expect_punct(":=")
        body = self.parse_term()
        self.expect_punct(".")
        return RDefinition(name.value, ty, body, kw.span)

    def _parse_axiom(self) -> RAxiom:
        kw = self.next()
        name = self.expect_ident()
        self.expect_punct(":")
        ty = self.parse_term()
        self.expect_punct(".")
        return RAxiom(name.value, ty, kw.span)

    def _parse_fix_group(self) -> RFixGroup:
        kw = self.next()
        cofix = kw.value == "CoFixpoint"
        defs = [self._parse_fixdef(cofix)]
        while self.at_kw("with"):
            self.next()
            defs.append(self._parse_fixdef(cofix))
        self.expect_punct(".")
        return RFixGroup(cofix, tuple(defs), kw.span)

    def _parse_fixdef(self, cofix: bool) -> RFixDef:
        name = self.expect_ident()
        binders = self._parse_binder_groups()
        struct: Optional[int | str] = None
        if self.at_punct("{"):
            if cofix:
                raise ParseFailure("cofixpoints take no struct annotation", self.peek().span)
            self.next()
            self.expect_kw("struct")
            t = self.next()
            if t.kind == "num":
                struct = int(t.value)
            elif t.kind == "ident" and t.value not in KEYWORDS:
                struct = t.value
            else:
                raise ParseFailure("expected an argument position or name", t.span)
            self.expect_punct("}")
        self.expect_punct(":")
        retty = self.parse_term()
        self.expect_punct(":=")
        body = self.parse_term()
        return RFixDef(name.value, binders, struct, retty, body, name.span)

    def _parse_ind_group(self) -> RIndGroup:
        kw = self.next()
        coind = kw.value == "CoInductive"
        bodies = [self._parse_ind_body()]
        while self.at_kw("with"):
            self.next()
            bodies.append(self._parse_ind_body())
        self.expect_punct(".")
        return RIndGroup(coind, tuple(bodies), kw.span)

    def _parse_ind_body(self) -> RIndBody:
        name = self.expect_ident()
        binders = self._parse_binder_groups()
        self.expect_punct(":")
        arity = self.parse_term()
        self.expect_punct(":=")
        ctors: list[tuple[str, RTerm]] = []
        if self.at_punct("|") or (self.peek().kind == "ident" and self.peek().value not in KEYWORDS):
            if self.at_punct("|"):
                self.next()
            while True:
                cname = self.expect_ident()
                self.expect_punct(":")
                cty = self.parse_term()
                ctors.append((cname.value, cty))
                if self.at_punct("|"):
                    self.next()
                    continue
                break
        return RIndBody(name.value, binders, arity, tuple(ctors), name.span)

    def _parse_binder_groups(self) -> tuple[tuple[str, RTerm], ...]:
        out: list[tuple[str, RTerm]] = []
        while self.at_punct("("):
            self.next()
            names = [self.expect_name_or_wild().value]
            while self.peek().kind == "ident" and not self.at_punct(":"):
                if self.peek().value in KEYWORDS and self.peek().value != "_":
                    break
                names.append(self.expect_name_or_wild().value)
            self.expect_punct(":")
            ty = self.parse_term()
            self.expect_punct(")")
            out.extend((n, ty) for n in names)
        return tuple(out)

    # -- terms ----------------------------------------------------------------

    def parse_term(self) -> RTerm:
        t = self.peek()
        if self.at_kw("forall"):
            self.next()
            binders = self._parse_fun_binders()
            self.expect_punct(",")
            body = self.parse_term()
            for n, ty in reversed(binders):
                body = RForall(n, ty, body, t.span)
            return body
        if self.at_kw("fun"):
            self.next()
            binders = self._parse_fun_binders()
            self.expect_punct("=>")
            body = self.parse_term()
            for n, ty in reversed(binders):
                body = RFun(n, ty, body, t.span)
            return body
        if self.at_kw("let"):
            self.next()
            name = self.expect_name_or_wild()
            self.expect_punct(":")
            ty = self.parse_term()
            self.expect_punct(":=")
            val = self.parse_term()
            self.expect_kw("in")
            body = self.parse_term()
            return RLet(name.value, ty, val, body, t.span)
        return self._parse_arrow()

    def _parse_fun_binders(self) -> list[tuple[str, RTerm]]:
        if self.at_punct("("):
            groups = self._parse_binder_groups()
            if not groups:
                raise ParseFailure("expected binders", self.peek().span)
            return list(groups)
        names = [self.expect_name_or_wild().value]
        while self.peek().kind == "ident" and not self.at_punct(":"):
            if self.peek().value in KEYWORDS and self.peek().value != "_":
                break
            names.append(self.expect_name_or_wild().value)
        self.expect_punct(":")
        ty = self.parse_term()
        return [(n, ty) for n in names]

    def _parse_arrow(self) -> RTerm:
        t = self.peek()
        dom = self._parse_app()
        if self.at_punct("->"):
            self.next()
            cod = self.parse_term()
            return RArrow(dom, cod, t.span)
        return dom

    def _parse_app(self) -> RTerm:
        t = self.peek()
        fn = self._parse_atom()
        while self._at_atom_start():
            arg = self._parse_atom()
            fn = RApp(fn, arg, t.span)
        return fn

    def _at_atom_start(self) -> bool:
        t = self.peek()
        if t.kind == "punct":
            return t.value == "("
        if t.kind == "ident":
            return t.value not in KEYWORDS or t.value in ("Prop", "Set", "Type", "match", "_")
        return False

    def _parse_atom(self) -> RTerm:
        t = self.peek()
        if self.at_punct("("):
            self.next()
            inner = self.parse_term()
            self.expect_punct(")")
            return inner
        if t.kind == "ident":
            if t.value == "Prop":
                self.next()
                return RSort("Prop", 0, t.span)
            if t.value == "Set":
                self.next()
                return RSort("Set", 0, t.span)
            if t.value == "Type":
                self.next()
                level = 1
                if self.at_punct("@"):
                    self.next()
                    self.expect_punct("{")
                    num = self.next()
                    if num.kind != "num":
                        raise ParseFailure("expected a universe level", num.span)
                    level = int(num.value)
                    if level < 1:
                        raise ParseFailure("universe levels start at 1", num.span)
                    self.expect_punct("}")
                return RSort("Type", level, t.span)
            if t.value == "match":
                return self._parse_match()
            if t.value in KEYWORDS and t.value != "_":
                raise ParseFailure(f"unexpected keyword {t.value!r}", t.span)
            self.next()
            return RVar(t.value, t.span)
        raise ParseFailure(f"unexpected token {t.value!r}", t.span)

    def _parse_match(self) -> RTerm:
        kw = self.expect_kw("match")
        target = self.parse_term()
        as_name: Optional[str] = None
        in_name: Optional[str] = None
        in_pats: tuple[str, ...] = ()
        if self.at_kw("as"):
            self.next()
            as_name = self.expect_name_or_wild().value
        if self.at_kw("in"):
            self.next()
            in_name = self.expect_ident().value
            pats = []
            while self.peek().kind == "ident" and not self.at_kw("return"):
                pats.append(self.expect_name_or_wild().value)
            in_pats = tuple(pats)
        self.expect_kw("return")
        ret = self.parse_term()
        self.expect_kw("with")
        clauses: list[RClause] = []
        while self.at_punct("|"):
            bar = self.next()
            cname = self.expect_ident()
            names = []
            while self.peek().kind == "ident" and not self._peek_is_arrow_next():
                names.append(self.expect_name_or_wild().value)
            self.expect_punct("=>")
            body = self.parse_term()
            clauses.append(RClause(cname.value, tuple(names), body, bar.span))
        self.expect_kw("end")
        return RMatch(target, as_name, in_name, in_pats, ret, tuple(clauses), kw.span)

    def _peek_is_arrow_next(self) -> bool:
        return self.at_punct("=>")


def parse_source(text: str) -> list[RDecl]:
    return Parser(text).parse_file()


# ---------------------------------------------------------------------------
# Canonical printer (print . parse is a fixed point on parsed trees)
# ---------------------------------------------------------------------------


def _pr(t: RTerm, prec: int) -> str:
    def wrap(s: str, level: int) -> str:
        return f"({s})" if level < prec else s

    if isinstance(t, RVar):
        return t.name
    if isinstance(t, RSort):
        if t.kind == "Type" and t.level != 1:
            return f"Type@{{{t.level}}}"
        return t.kind
    if isinstance(t, RApp):
        return wrap(f"{_pr(t.fn, 2)} {_pr(t.arg, 3)}", 2)
    if isinstance(t, RArrow):
        return wrap(f"{_pr(t.dom, 2)} -> {_pr(t.cod, 1)}", 1)
    if isinstance(t, RForall):
        return wrap(f"forall {t.name} : {_pr(t.ty, 1)}, {_pr(t.body, 0)}", 0)
    if isinstance(t, RFun):
        return wrap(f"fun {t.name} : {_pr(t.ty, 1)} => {_pr(t.body, 0)}", 0)
    if isinstance(t, RLet):
        return wrap(
            f"let {t.name} : {_pr(t.ty, 1)} := {_pr(t.val, 0)} in {_pr(t.body, 0)}", 0
        )
    if isinstance(t, RMatch):
        parts = [f"match {_pr(t.target, 1)}"]
        if t.as_name is not None:
            parts.append(f"as {t.as_name}")
        if t.in_name is not None:
            parts.append("in " + " ".join((t.in_name,) + t.in_pats))
        parts.append(f"return {_pr(t.ret, 1)}")
        parts.append("with")
        body = " ".join(parts)
        for c in t.clauses:
            head = " ".join((c.cname,) + c.names)
            body += f" | {head} => {_pr(c.body, 0)}"
        return f"{body} end"
    raise TypeError(f"cannot print {type(t).__name__}")


def _pr_binders(binders) -> str:
    return "".join(f" ({n} : {_pr(ty, 1)})" for n, ty in binders)


def print_decl(d: RDecl) -> str:
    if isinstance(d, RDefinition):
        return f"Definition {d.name} : {_pr(d.ty, 0)} := {_pr(d.body, 0)}."
    if isinstance(d, RAxiom):
        return f"Axiom {d.name} : {_pr(d.ty, 0)}."
    if isinstance(d, RFixGroup):
        kw = "CoFixpoint" if d.cofix else "Fixpoint"
        parts = []
        for fd in d.defs:
            s = f"{fd.name}{_pr_binders(fd.binders)}"
            if fd.struct is not None:
                s += f" {{struct {fd.struct}}}"
            s += f" : {_pr(fd.retty, 0)} := {_pr(fd.body, 0)}"
            parts.append(s)
        return f"{kw} " + " with ".join(parts) + "."
    if isinstance(d, RIndGroup):
        kw = "CoInductive" if d.coinductive else "Inductive"
        parts = []
        for b in d.bodies:
            s = f"{b.name}{_pr_binders(b.binders)} : {_pr(b.arity, 0)} :="
            for cname, cty in b.ctors:
                s += f" | {cname} : {_pr(cty, 0)}"
            parts.append(s)
        return f"{kw} " + " with ".join(parts) + "."
    raise TypeError(f"cannot print {type(d).__name__}")


def print_source(decls: list[RDecl]) -> str:
    return "\n".join(print_decl(d) for d in decls) + "\n"

"""Term syntax: stages, annotations, terms, environments and the pure
structural operations over them (variable collection, counting, erasure,
substitution, stage shifting).

Terms use de Bruijn indices for local variables; binder display names are
kept for printing only and never take part in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import KernelBug

# ---------------------------------------------------------------------------
# Stages and annotations
# ---------------------------------------------------------------------------

# Stage variables are dense integer ids handed out by CheckerState.
StageVar = int


@dataclass(frozen=True)
class Stage:
    """A size expression: a stage variable plus a finite hat count, or the
    infinite stage (var is None)."""

    var: Optional[StageVar]
    hats: int = 0

    def __post_init__(self):
        if self.var is None and self.hats != 0:
            # successor of the infinite stage is the infinite stage
            object.__setattr__(self, "hats", 0)

    @property
    def is_infty(self) -> bool:
        return self.var is None

    def succ(self, n: int = 1) -> "Stage":
        if self.var is None:
            return self
        return Stage(self.var, self.hats + n)


INFTY = Stage(None, 0)


def stage_floor(s: Stage) -> StageVar:
    """Underlying variable of a finite stage; rejects the infinite stage."""
    if s.var is None:
        raise KernelBug("floor of the infinite stage")
    return s.var


def svar(v: StageVar, hats: int = 0) -> Stage:
    return Stage(v, hats)


@dataclass(frozen=True)
class Annot:
    """Annotation on an inductive-type occurrence or a variable-vector slot.

    kind is one of "bare", "star", "glob", "full", "sized"; only "sized"
    carries a stage.
    """

    kind: str
    stage: Optional[Stage] = None


BARE = Annot("bare")
STAR = Annot("star")
GLOB = Annot("glob")
FULL = Annot("full")


def sized(s: Stage) -> Annot:
    return Annot("sized", s)


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sort:
    kind: str  # "Prop" | "Set" | "Type"
    level: int = 0  # >= 1 for Type

    def __str__(self) -> str:
        if self.kind == "Type":
            return f"Type@{{{self.level}}}" if self.level != 1 else "Type"
        return self.kind


PROP = Sort("Prop")
SET = Sort("Set")


def type_(level: int = 1) -> Sort:
    return Sort("Type", level)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Univ(Term):
    sort: Sort


@dataclass(frozen=True)
class Var(Term):
    """Local variable (de Bruijn index).  A variable bound to a definition may
    carry a vector of annotations, one per annotation site of the stored
    body."""

    idx: int
    sizes: Optional[tuple[Annot, ...]] = None
    name: str = field(default="_", compare=False)


@dataclass(frozen=True)
class Const(Term):
    """Reference to a global assumption or definition."""

    name: str
    sizes: Optional[tuple[Annot, ...]] = None


@dataclass(frozen=True)
class Abs(Term):
    name: str = field(compare=False)
    dom: Term = None  # bare
    body: Term = None


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Prod(Term):
    name: str = field(compare=False)
    dom: Term = None
    cod: Term = None


@dataclass(frozen=True)
class LetIn(Term):
    name: str = field(compare=False)
    ty: Term = None  # bare
    val: Term = None
    body: Term = None


@dataclass(frozen=True)
class Ind(Term):
    name: str
    annot: Annot = BARE


@dataclass(frozen=True)
class Constr(Term):
    name: str


@dataclass(frozen=True)
class Case(Term):
    """Kernel case analysis.  Branches are plain terms (abstractions over the
    constructor's non-parameter arguments), one per constructor in signature
    order."""

    motive: Term
    target: Term
    branches: tuple[tuple[str, Term], ...]


@dataclass(frozen=True)
class Match(Term):
    """Surface match, produced by the parser and elaborated into Case during
    inference (the motive and branch binder types need the target's type).

    ret_binders is None when the match had no as/in clause: ret then lives in
    the enclosing scope.  Otherwise ret_binders lists the bound names (index
    names followed by the target alias) and ret is scoped under them.
    Each clause is (constructor name, argument names, body); the body is
    scoped under the argument names.
    """

    target: Term
    ret: Term
    ret_binders: Optional[tuple[str, ...]]
    clauses: tuple[tuple[str, tuple[str, ...], Term], ...]
    in_ind: Optional[str] = None


@dataclass(frozen=True)
class FixDef(Term):
    name: str = field(compare=False)
    ty: Term = None  # position term (bare before inference)
    body: Term = None  # sees all mutual names; Var(0) is the last def


@dataclass(frozen=True)
class Fix(Term):
    """Mutual fixpoint.  indices are 1-based recursive-argument positions,
    one per def; an empty tuple means they are still to be searched.  select
    is 1-based."""

    indices: tuple[int, ...]
    select: int
    defs: tuple[FixDef, ...]


@dataclass(frozen=True)
class Cofix(Term):
    select: int
    defs: tuple[FixDef, ...]


# ---------------------------------------------------------------------------
# Spine helpers
# ---------------------------------------------------------------------------


def strip_app(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def mk_app(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def mk_pis(tele: "Telescope", body: Term) -> Term:
    for entry in reversed(tele):
        body = Prod(entry.name, entry.ty, body)
    return body


def mk_abs(tele: "Telescope", body: Term) -> Term:
    for entry in reversed(tele):
        body = Abs(entry.name, entry.ty, body)
    return body


# ---------------------------------------------------------------------------
# de Bruijn shifting and substitution
# ---------------------------------------------------------------------------


def _map_subterms(t: Term, f, depth: int) -> Term:
    """Rebuild t applying f(sub, depth) to immediate subterms, where depth is
    the number of extra binders between t and the subterm."""
    if isinstance(t, (Univ, Var, Const, Ind, Constr)):
        return t
    if isinstance(t, Abs):
        return Abs(t.name, f(t.dom, depth), f(t.body, depth + 1))
    if isinstance(t, App):
        return App(f(t.fn, depth), f(t.arg, depth))
    if isinstance(t, Prod):
        return Prod(t.name, f(t.dom, depth), f(t.cod, depth + 1))
    if isinstance(t, LetIn):
        return LetIn(t.name, f(t.ty, depth), f(t.val, depth), f(t.body, depth + 1))
    if isinstance(t, Case):
        return Case(
            f(t.motive, depth),
            f(t.target, depth),
            tuple((c, f(b, depth)) for c, b in t.branches),
        )
    if isinstance(t, Match):
        nret = 0 if t.ret_binders is None else len(t.ret_binders)
        return Match(
            f(t.target, depth),
            f(t.ret, depth + nret),
            t.ret_binders,
            tuple((c, ns, f(b, depth + len(ns))) for c, ns, b in t.clauses),
            t.in_ind,
        )
    if isinstance(t, Fix):
        n = len(t.defs)
        return Fix(
            t.indices,
            t.select,
            tuple(FixDef(d.name, f(d.ty, depth), f(d.body, depth + n)) for d in t.defs),
        )
    if isinstance(t, Cofix):
        n = len(t.defs)
        return Cofix(
            t.select,
            tuple(FixDef(d.name, f(d.ty, depth), f(d.body, depth + n)) for d in t.defs),
        )
    raise KernelBug(f"unknown term node {type(t).__name__}")


def shift_term(t: Term, by: int, cutoff: int = 0) -> Term:
    if by == 0:
        return t

    def go(u: Term, depth: int) -> Term:
        if isinstance(u, Var):
            if u.idx >= cutoff + depth:
                return Var(u.idx + by, u.sizes, u.name)
            return u
        return _map_subterms(u, go, depth)

    return go(t, 0)


def subst_many(t: Term, repl: list[Term]) -> Term:
    """Substitute Var(0..n-1) by repl[0..n-1] (each expressed in the outer
    context) and shift the remaining variables down by n."""
    n = len(repl)
    if n == 0:
        return t

    def go(u: Term, depth: int) -> Term:
        if isinstance(u, Var):
            k = u.idx - depth
            if 0 <= k < n:
                e = shift_term(repl[k], depth)
                if u.sizes is not None and isinstance(e, (Var, Const)) and e.sizes is None:
                    # an annotated use of a substituted variable keeps its vector
                    e = _with_sizes(e, u.sizes)
                return e
            if k >= n:
                return Var(u.idx - n, u.sizes, u.name)
            return u
        return _map_subterms(u, go, depth)

    return go(t, 0)


def _with_sizes(t: Term, sizes: tuple[Annot, ...]) -> Term:
    if isinstance(t, Var):
        return Var(t.idx, sizes, t.name)
    if isinstance(t, Const):
        return Const(t.name, sizes)
    return t


def subst_term(t: Term, e: Term) -> Term:
    """Substitute Var(0) by e (capture-avoiding)."""
    return subst_many(t, [e])


# ---------------------------------------------------------------------------
# Annotation-site traversal: stage variables, counting, substitution, erasure
# ---------------------------------------------------------------------------


def _iter_children(t: Term, with_meta=False) -> Iterator[tuple[Term, bool]]:
    """Yield (child, skip) pairs in canonical pre-order, where skip marks the
    bare/position slots (abstraction and let-in type annotations, fix and
    cofix def types) that annotation-site operations must not enter."""
    if isinstance(t, Abs):
        yield t.dom, True
        yield t.body, False
    elif isinstance(t, App):
        yield t.fn, False
        yield t.arg, False
    elif isinstance(t, Prod):
        yield t.dom, False
        yield t.cod, False
    elif isinstance(t, LetIn):
        yield t.ty, True
        yield t.val, False
        yield t.body, False
    elif isinstance(t, Case):
        yield t.motive, False
        yield t.target, False
        for _, b in t.branches:
            yield b, False
    elif isinstance(t, Match):
        yield t.target, False
        yield t.ret, True
        for _, _, b in t.clauses:
            yield b, False
    elif isinstance(t, (Fix, Cofix)):
        for d in t.defs:
            yield d.ty, True
            yield d.body, False


def stage_vars(t: Term) -> set[StageVar]:
    """All stage variables in sized annotations and annotation vectors."""
    out: set[StageVar] = set()

    def go(u: Term) -> None:
        if isinstance(u, Ind):
            if u.annot.kind == "sized" and u.annot.stage.var is not None:
                out.add(u.annot.stage.var)
            return
        if isinstance(u, (Var, Const)):
            if u.sizes:
                for a in u.sizes:
                    if a.kind == "sized" and a.stage.var is not None:
                        out.add(a.stage.var)
            return
        for child, _skip in _iter_children(u):
            go(child)

    go(t)
    return out


def pos_vars(t: Term, positions: set[StageVar] | frozenset[StageVar]) -> set[StageVar]:
    return stage_vars(t) & set(positions)


_COUNTED = ("sized", "full", "glob")


def count_annots(t: Term) -> int:
    """Number of sized/full/glob annotation sites, in canonical pre-order,
    skipping bare and position subterms."""
    n = 0

    def go(u: Term) -> None:
        nonlocal n
        if isinstance(u, Ind):
            if u.annot.kind in _COUNTED:
                n += 1
            return
        if isinstance(u, (Var, Const)):
            if u.sizes:
                n += sum(1 for a in u.sizes if a.kind in _COUNTED)
            return
        for child, skip in _iter_children(u):
            if not skip:
                go(child)

    go(t)
    return n


def subst_fulls(t: Term, stages: list[Stage] | tuple[Stage, ...]) -> Term:
    """Replace the full-annotation sites of t, in canonical order, by the
    given stages.  Length mismatch signals a kernel bug."""
    stages = list(stages)
    pos = 0

    def take() -> Stage:
        nonlocal pos
        if pos >= len(stages):
            raise KernelBug("too few stages for full-annotation substitution")
        s = stages[pos]
        pos += 1
        return s

    def walk(u: Term) -> Term:
        if isinstance(u, Ind):
            if u.annot.kind == "full":
                return Ind(u.name, sized(take()))
            return u
        if isinstance(u, (Var, Const)):
            if u.sizes:
                new = tuple(sized(take()) if a.kind == "full" else a for a in u.sizes)
                return _with_sizes(u, new)
            return u
        if isinstance(u, (Univ, Constr)):
            return u
        if isinstance(u, Abs):
            return Abs(u.name, u.dom, walk(u.body))
        if isinstance(u, App):
            return App(walk(u.fn), walk(u.arg))
        if isinstance(u, Prod):
            return Prod(u.name, walk(u.dom), walk(u.cod))
        if isinstance(u, LetIn):
            return LetIn(u.name, u.ty, walk(u.val), walk(u.body))
        if isinstance(u, Case):
            return Case(walk(u.motive), walk(u.target), tuple((c, walk(b)) for c, b in u.branches))
        if isinstance(u, Match):
            return Match(walk(u.target), u.ret, u.ret_binders,
                         tuple((c, ns, walk(b)) for c, ns, b in u.clauses), u.in_ind)
        if isinstance(u, Fix):
            return Fix(u.indices, u.select,
                       tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Cofix):
            return Cofix(u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        raise KernelBug(f"unknown term node {type(u).__name__}")

    out = walk(t)
    if pos != len(stages):
        raise KernelBug(
            f"annotation count mismatch: term has {pos} full sites, got {len(stages)} stages"
        )
    return out


def subst_glob(t: Term, s: Stage) -> Term:
    """Replace every glob-annotation site by the given stage (shared)."""

    def walk(u: Term) -> Term:
        if isinstance(u, Ind):
            return Ind(u.name, sized(s)) if u.annot.kind == "glob" else u
        if isinstance(u, (Var, Const)):
            if u.sizes and any(a.kind == "glob" for a in u.sizes):
                return _with_sizes(u, tuple(sized(s) if a.kind == "glob" else a for a in u.sizes))
            return u
        if isinstance(u, (Univ, Constr)):
            return u
        if isinstance(u, Abs):
            return Abs(u.name, u.dom, walk(u.body))
        if isinstance(u, App):
            return App(walk(u.fn), walk(u.arg))
        if isinstance(u, Prod):
            return Prod(u.name, walk(u.dom), walk(u.cod))
        if isinstance(u, LetIn):
            return LetIn(u.name, u.ty, walk(u.val), walk(u.body))
        if isinstance(u, Case):
            return Case(walk(u.motive), walk(u.target), tuple((c, walk(b)) for c, b in u.branches))
        if isinstance(u, Fix):
            return Fix(u.indices, u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Cofix):
            return Cofix(u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Match):
            return Match(walk(u.target), u.ret, u.ret_binders,
                         tuple((c, ns, walk(b)) for c, ns, b in u.clauses), u.in_ind)
        raise KernelBug(f"unknown term node {type(u).__name__}")

    return walk(t)


def subst_stage(t: Term, v: StageVar, s: Stage) -> Term:
    """Pointwise substitution of a stage variable throughout all sized
    annotation sites (vectors included)."""

    def on_annot(a: Annot) -> Annot:
        if a.kind == "sized" and a.stage.var == v:
            return sized(s.succ(a.stage.hats))
        return a

    return map_annots(t, on_annot)


def shift_stages(t: Term, positions: set[StageVar] | frozenset[StageVar]) -> Term:
    """Successor of every sized annotation whose variable is a position
    variable; everything else untouched."""

    def on_annot(a: Annot) -> Annot:
        if a.kind == "sized" and a.stage.var in positions:
            return sized(a.stage.succ())
        return a

    return map_annots(t, on_annot)


def map_annots(t: Term, f) -> Term:
    """Apply f to every annotation site outside bare/position slots."""

    def walk(u: Term) -> Term:
        if isinstance(u, Ind):
            return Ind(u.name, f(u.annot))
        if isinstance(u, (Var, Const)):
            if u.sizes:
                return _with_sizes(u, tuple(f(a) for a in u.sizes))
            return u
        if isinstance(u, (Univ, Constr)):
            return u
        if isinstance(u, Abs):
            return Abs(u.name, u.dom, walk(u.body))
        if isinstance(u, App):
            return App(walk(u.fn), walk(u.arg))
        if isinstance(u, Prod):
            return Prod(u.name, walk(u.dom), walk(u.cod))
        if isinstance(u, LetIn):
            return LetIn(u.name, u.ty, walk(u.val), walk(u.body))
        if isinstance(u, Case):
            return Case(walk(u.motive), walk(u.target), tuple((c, walk(b)) for c, b in u.branches))
        if isinstance(u, Fix):
            return Fix(u.indices, u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Cofix):
            return Cofix(u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Match):
            return Match(walk(u.target), u.ret, u.ret_binders,
                         tuple((c, ns, walk(b)) for c, ns, b in u.clauses), u.in_ind)
        raise KernelBug(f"unknown term node {type(u).__name__}")

    return walk(t)


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------

ERASE_BARE = "bare"
ERASE_FULL = "full"
ERASE_STAR = "star"
ERASE_GLOB = "glob"


def erase(t: Term, mode: str, positions: frozenset[StageVar] | set[StageVar] = frozenset()) -> Term:
    """Erase annotations.

    bare: every annotation becomes bare and vectors are dropped; fix/cofix
    type slots are erased too (the result is a valid inference input).
    full: every annotation site becomes a full site; vectors are kept so the
    site count is stable under erasure.
    star/glob: sized sites whose variable is in positions become star/glob,
    all other sites become bare/full; bare and position slots are untouched.
    """
    pos = set(positions)

    def on_annot(a: Annot) -> Annot:
        if mode == ERASE_BARE:
            return BARE
        if mode == ERASE_FULL:
            return FULL
        in_pos = a.kind == "sized" and a.stage.var in pos
        if mode == ERASE_STAR:
            return STAR if in_pos else BARE
        if mode == ERASE_GLOB:
            return GLOB if in_pos else FULL
        raise KernelBug(f"unknown erasure mode {mode!r}")

    def walk(u: Term) -> Term:
        if isinstance(u, Ind):
            return Ind(u.name, on_annot(u.annot))
        if isinstance(u, (Var, Const)):
            if u.sizes is None:
                return u
            if mode == ERASE_BARE:
                return _with_sizes_or_none(u, None)
            return _with_sizes(u, tuple(on_annot(a) for a in u.sizes))
        if isinstance(u, (Univ, Constr)):
            return u
        if isinstance(u, Abs):
            dom = erase(u.dom, ERASE_BARE) if mode == ERASE_BARE else u.dom
            return Abs(u.name, dom, walk(u.body))
        if isinstance(u, App):
            return App(walk(u.fn), walk(u.arg))
        if isinstance(u, Prod):
            return Prod(u.name, walk(u.dom), walk(u.cod))
        if isinstance(u, LetIn):
            ty = erase(u.ty, ERASE_BARE) if mode == ERASE_BARE else u.ty
            return LetIn(u.name, ty, walk(u.val), walk(u.body))
        if isinstance(u, Case):
            return Case(walk(u.motive), walk(u.target), tuple((c, walk(b)) for c, b in u.branches))
        if isinstance(u, Match):
            return Match(walk(u.target), u.ret, u.ret_binders,
                         tuple((c, ns, walk(b)) for c, ns, b in u.clauses), u.in_ind)
        if isinstance(u, Fix):
            defs = tuple(
                FixDef(d.name, erase(d.ty, ERASE_BARE) if mode == ERASE_BARE else d.ty,
                       walk(d.body))
                for d in u.defs
            )
            return Fix(u.indices, u.select, defs)
        if isinstance(u, Cofix):
            defs = tuple(
                FixDef(d.name, erase(d.ty, ERASE_BARE) if mode == ERASE_BARE else d.ty,
                       walk(d.body))
                for d in u.defs
            )
            return Cofix(u.select, defs)
        raise KernelBug(f"unknown term node {type(u).__name__}")

    return walk(t)


def _with_sizes_or_none(t: Term, sizes) -> Term:
    if isinstance(t, Var):
        return Var(t.idx, sizes, t.name)
    if isinstance(t, Const):
        return Const(t.name, sizes)
    return t


# ---------------------------------------------------------------------------
# Telescopes, signature, environments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TeleEntry:
    name: str = field(compare=False)
    ty: Term = None
    val: Optional[Term] = None


Telescope = tuple[TeleEntry, ...]


@dataclass
class IndBody:
    name: str
    indices: Telescope  # under the block's params
    sort: Sort


@dataclass
class Constructor:
    name: str
    owner: str
    args: Telescope  # under params
    index_args: tuple[Term, ...]  # under params + args


@dataclass
class IndBlock:
    params: Telescope
    bodies: tuple[IndBody, ...]
    constructors: tuple[Constructor, ...]
    coinductive: bool = False

    def body_index(self, name: str) -> int:
        for i, b in enumerate(self.bodies):
            if b.name == name:
                return i
        raise KernelBug(f"no inductive body {name} in block")

    def constructors_of(self, name: str) -> list[Constructor]:
        return [c for c in self.constructors if c.owner == name]


class Signature:
    """Lookup tables for mutual (co)inductive blocks."""

    def __init__(self):
        self.blocks: list[IndBlock] = []
        self.inds: dict[str, tuple[IndBlock, int]] = {}
        self.constrs: dict[str, tuple[IndBlock, int]] = {}

    def add_block(self, block: IndBlock) -> None:
        self.blocks.append(block)
        for i, body in enumerate(block.bodies):
            self.inds[body.name] = (block, i)
        for j, ctor in enumerate(block.constructors):
            self.constrs[ctor.name] = (block, j)

    def has_ind(self, name: str) -> bool:
        return name in self.inds

    def has_constr(self, name: str) -> bool:
        return name in self.constrs

    def is_coinductive(self, name: str) -> bool:
        return self.inds[name][0].coinductive


@dataclass
class GAssum:
    name: str
    ty: Term  # full


@dataclass
class GDef:
    name: str
    ty: Term  # glob-annotated
    body: Term  # full


class GlobalEnv:
    def __init__(self):
        self.entries: dict[str, GAssum | GDef] = {}

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def lookup(self, name: str):
        return self.entries.get(name)

    def add(self, decl: GAssum | GDef) -> None:
        self.entries[decl.name] = decl


@dataclass(frozen=True)
class LocalDecl:
    name: str = field(compare=False)
    ty: Term = None  # sized, expressed outside this binder
    val: Optional[Term] = None


LocalEnv = tuple[LocalDecl, ...]


def env_push(env: LocalEnv, name: str, ty: Term, val: Optional[Term] = None) -> LocalEnv:
    return env + (LocalDecl(name, ty, val),)


def env_lookup(env: LocalEnv, idx: int) -> LocalDecl:
    """Entry for de Bruijn index idx with type/value shifted into the current
    context."""
    decl = env[-1 - idx]
    ty = shift_term(decl.ty, idx + 1)
    val = shift_term(decl.val, idx + 1) if decl.val is not None else None
    return LocalDecl(decl.name, ty, val)


# ---------------------------------------------------------------------------
# Checker state
# ---------------------------------------------------------------------------


class CheckerState:
    """Stage-variable pools: every allocated variable, plus the subset that is
    currently position-flagged.  Single-owner mutable state."""

    def __init__(self):
        self.next_id: int = 0
        self.pool: set[StageVar] = set()
        self.positions: set[StageVar] = set()

    def fresh(self, n: int) -> list[StageVar]:
        out = []
        for _ in range(n):
            v = self.next_id
            self.next_id += 1
            self.pool.add(v)
            out.append(v)
        return out

    def fresh_star(self, n: int) -> list[StageVar]:
        out = self.fresh(n)
        self.positions.update(out)
        return out

    def demote(self, vars: frozenset[StageVar] | set[StageVar]) -> None:
        self.positions -= set(vars)

    def snapshot(self):
        return (self.next_id, set(self.pool), set(self.positions))

    def restore(self, snap) -> None:
        self.next_id, self.pool, self.positions = snap[0], set(snap[1]), set(snap[2])

    def reset(self) -> None:
        self.next_id = 0
        self.pool.clear()
        self.positions.clear()

"""Bidirectional size inference and type checking.

Terms come in bare (annotation-free), leave sized, and are stored in the
global environment with their stages erased to the infinite/preserved
markers.  Fixpoint termination and cofixpoint productivity are decided by the
constraint solver; failed position annotations are removed from the type and
the fixpoint is re-elaborated until the solver accepts or no position
annotation is left to remove.
"""

from __future__ import annotations

import itertools

from .constraints import ConstraintSet, rec_check, union_all
from .errors import (
    BranchArityMismatch, DuplicateName, ExpectedFunction, ExpectedInductive,
    ForbiddenElimination, KernelBug, NoValidRecursiveArgument, NotASort,
    NotEnoughArguments, NotInductiveRecursiveArg, NotCoinductiveReturn,
    RecCheckFailure, SizecheckError, StructuralMismatch, UnknownName,
    Unsatisfiable,
)
from .reduction import annot_stage, whnf
from .subtyping import subtype
from .syntax import (
    Abs, App, BARE, Case, CheckerState, Cofix, Const, Constr, ERASE_BARE,
    ERASE_FULL, ERASE_GLOB, ERASE_STAR, Fix, FixDef, GAssum, GDef, GlobalEnv,
    Ind, IndBlock, LetIn, LocalEnv, Match, Prod, STAR, Signature, Sort, Stage,
    StageVar, TeleEntry, Telescope, Term, Univ, Var, count_annots, env_lookup,
    env_push, erase, mk_app, mk_pis, pos_vars, shift_stages, shift_term, sized,
    stage_vars, strip_app, subst_glob, subst_many, subst_term, svar, type_,
)

# ---------------------------------------------------------------------------
# Universe machinery
# ---------------------------------------------------------------------------


def axiom(s: Sort) -> Sort:
    if s.kind in ("Prop", "Set"):
        return type_(1)
    return type_(s.level + 1)


def rule(s1: Sort, s2: Sort) -> Sort:
    """Universe of a product with domain sort s1 and codomain sort s2."""
    if s2.kind == "Prop":
        return s2
    if s2.kind == "Set":
        return s2 if s1.kind in ("Prop", "Set") else s1
    if s1.kind in ("Prop", "Set"):
        return s2
    return type_(max(s1.level, s2.level))


def elim(sig: Signature, genv: GlobalEnv, w_ind: Sort, w: Sort, ind_name: str) -> None:
    """Check that a target in universe w_ind may be eliminated into universe
    w.  Prop targets only eliminate into Prop, except for empty and singleton
    inductives."""
    if w_ind.kind in ("Set", "Type"):
        return
    if w.kind == "Prop":
        return
    if _small_elim(sig, genv, ind_name):
        return
    raise ForbiddenElimination(
        f"cannot eliminate {ind_name} (in Prop) into {w}: not an empty or singleton inductive"
    )


_small_elim_cache: dict[int, dict[str, bool]] = {}


def _small_elim(sig: Signature, genv: GlobalEnv, name: str) -> bool:
    cache = _small_elim_cache.setdefault(id(sig), {})
    if name in cache:
        return cache[name]
    block, _ = sig.inds[name]
    ctors = block.constructors_of(name)
    if len(ctors) == 0:
        ok = True
    elif len(ctors) == 1:
        env: LocalEnv = ()
        for entry in block.params:
            env = env_push(env, entry.name, entry.ty)
        ok = True
        for entry in ctors[0].args:
            s = _sort_of_type(sig, genv, env, entry.ty)
            if s is None or s.kind != "Prop":
                ok = False
                break
            env = env_push(env, entry.name, entry.ty)
    else:
        ok = False
    cache[name] = ok
    return ok


def _sort_of_type(sig, genv, lenv, t: Term) -> Sort | None:
    """Best-effort sort of a type, enough to decide the singleton criterion."""
    t1 = whnf(sig, genv, lenv, t, unfold=True)
    if isinstance(t1, Univ):
        return axiom(t1.sort)
    if isinstance(t1, Prod):
        s1 = _sort_of_type(sig, genv, lenv, t1.dom)
        s2 = _sort_of_type(sig, genv, env_push(lenv, t1.name, t1.dom), t1.cod)
        if s1 is None or s2 is None:
            return None
        return rule(s1, s2)
    head, _ = strip_app(t1)
    if isinstance(head, Ind) and sig.has_ind(head.name):
        block, k = sig.inds[head.name]
        return block.bodies[k].sort
    if isinstance(head, Var) and head.idx < len(lenv):
        ty = whnf(sig, genv, lenv, env_lookup(lenv, head.idx).ty, unfold=True)
        return ty.sort if isinstance(ty, Univ) else None
    if isinstance(head, Const):
        decl = genv.lookup(head.name)
        if decl is not None:
            ty = whnf(sig, genv, lenv, decl.ty, unfold=True)
            return ty.sort if isinstance(ty, Univ) else None
    return None


# ---------------------------------------------------------------------------
# Signature metafunctions
# ---------------------------------------------------------------------------


def inds(sig: Signature, name: str) -> int:
    """Number of mutual bodies in the block owning the given inductive or
    constructor name."""
    if sig.has_ind(name):
        return len(sig.inds[name][0].bodies)
    if sig.has_constr(name):
        return len(sig.constrs[name][0].bodies)
    raise UnknownName(f"unknown inductive or constructor {name}")


def ind_type(sig: Signature, name: str) -> Term:
    if not sig.has_ind(name):
        raise UnknownName(f"unknown inductive {name}")
    block, k = sig.inds[name]
    body = block.bodies[k]
    return mk_pis(block.params + body.indices, Univ(body.sort))


def _subst_block_annots(block: IndBlock, t: Term, stages: list[Stage]) -> Term:
    """Annotate the block's own inductive occurrences (stored as full sites)
    with the per-body stages."""
    names = {b.name: i for i, b in enumerate(block.bodies)}

    def walk(u: Term) -> Term:
        if isinstance(u, Ind):
            if u.name in names and u.annot.kind == "full":
                return Ind(u.name, sized(stages[names[u.name]]))
            return u
        if isinstance(u, (Univ, Var, Const, Constr)):
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
            return Case(walk(u.motive), walk(u.target),
                        tuple((c, walk(b)) for c, b in u.branches))
        if isinstance(u, Fix):
            return Fix(u.indices, u.select,
                       tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        if isinstance(u, Cofix):
            return Cofix(u.select, tuple(FixDef(d.name, d.ty, walk(d.body)) for d in u.defs))
        raise KernelBug(f"unexpected node in signature telescope: {type(u).__name__}")

    return walk(t)


def constr_type(sig: Signature, cname: str, stages: list[Stage] | tuple[Stage, ...]) -> Term:
    if not sig.has_constr(cname):
        raise UnknownName(f"unknown constructor {cname}")
    block, ci = sig.constrs[cname]
    ctor = block.constructors[ci]
    stages = list(stages)
    if len(stages) != len(block.bodies):
        raise KernelBug("constructor stage vector has wrong length")
    args = tuple(
        TeleEntry(e.name, _subst_block_annots(block, e.ty, stages), e.val) for e in ctor.args
    )
    k = block.body_index(ctor.owner)
    m, n = len(block.params), len(args)
    param_vars = [Var(n + m - 1 - i, name=block.params[i].name) for i in range(m)]
    ret = mk_app(Ind(ctor.owner, sized(stages[k].succ())), *param_vars, *ctor.index_args)
    return mk_pis(block.params + args, ret)


def _inst(t: Term, actuals: list[Term], inner: int) -> Term:
    """Substitute the parameter zone of a signature-telescope term: Var(inner)
    .. Var(inner+m-1) become the actual parameters (shifted under the inner
    binders); the inner binders stay."""
    m = len(actuals)
    repl = [Var(i) for i in range(inner)] + [
        shift_term(actuals[m - 1 - j], inner) for j in range(m)
    ]
    return subst_many(t, repl)


def instantiate_telescope(tele: Telescope, actuals: list[Term]) -> Telescope:
    return tuple(
        TeleEntry(e.name, _inst(e.ty, actuals, i), e.val) for i, e in enumerate(tele)
    )


def motive_type(sig: Signature, ind_name: str, params: list[Term], w: Sort, s: Stage) -> Term:
    """Expected type of a case motive: the instantiated indices, the target,
    then the return universe."""
    block, k = sig.inds[ind_name]
    body = block.bodies[k]
    idx = instantiate_telescope(body.indices, params)
    q = len(idx)
    idx_vars = [Var(q - 1 - i, name=idx[i].name) for i in range(q)]
    target = mk_app(
        Ind(ind_name, sized(s)), *[shift_term(p, q) for p in params], *idx_vars
    )
    return mk_pis(idx + (TeleEntry("_", target),), Univ(w))


def branch_type(
    sig: Signature,
    cname: str,
    params: list[Term],
    stages: list[Stage],
    motive: Term,
) -> Term:
    """Expected type of a case branch: the constructor's instantiated
    arguments, then the motive applied to the constructor's indices and the
    rebuilt constructor application."""
    block, ci = sig.constrs[cname]
    ctor = block.constructors[ci]
    args = tuple(
        TeleEntry(e.name, _subst_block_annots(block, e.ty, stages), e.val) for e in ctor.args
    )
    args = instantiate_telescope(args, params)
    n = len(args)
    arg_vars = [Var(n - 1 - i, name=args[i].name) for i in range(n)]
    shifted_params = [shift_term(p, n) for p in params]
    idx_args = [_inst(t, params, n) for t in ctor.index_args]
    capp = mk_app(Constr(cname), *shifted_params, *arg_vars)
    body = mk_app(shift_term(motive, n), *idx_args, capp)
    return mk_pis(args, body)


def case_stage(sig: Signature, ind_name: str, s: Stage, v: StageVar) -> ConstraintSet:
    """Constraint tying the target's stage to the fresh case stage: the target
    must fit below the successor for an inductive, dually for a coinductive."""
    out = ConstraintSet()
    if sig.is_coinductive(ind_name):
        out.add(svar(v, 1), s)
    else:
        out.add(s, svar(v, 1))
    return out


# ---------------------------------------------------------------------------
# Function-type decomposition and position-annotation placement
# ---------------------------------------------------------------------------


def decompose(sig, genv, lenv, t: Term, n: int) -> tuple[Telescope, Term]:
    """Peel exactly n products, reducing between peels."""
    tele: list[TeleEntry] = []
    env = lenv
    for _ in range(n):
        t1 = whnf(sig, genv, env, t, unfold=True)
        if not isinstance(t1, Prod):
            raise NotEnoughArguments(f"expected a function type with {n} arguments")
        tele.append(TeleEntry(t1.name, t1.dom))
        env = env_push(env, t1.name, t1.dom)
        t = t1.cod
    return tuple(tele), t


def decompose_all(sig, genv, lenv, t: Term) -> tuple[Telescope, Term]:
    tele: list[TeleEntry] = []
    env = lenv
    while True:
        t1 = whnf(sig, genv, env, t, unfold=True)
        if not isinstance(t1, Prod):
            return tuple(tele), t1
        tele.append(TeleEntry(t1.name, t1.dom))
        env = env_push(env, t1.name, t1.dom)
        t = t1.cod


_PROBE_BASE = -2  # negative stage ids are reserved for head probes


def _head_inductive(sig, genv, lenv, ty: Term):
    """Resolve the head inductive of an argument or return type.

    Returns (inductive name, starred rebuild or None).  For an alias head the
    annotation vector is probed with marker stages to find which slot lands on
    the head inductive after unfolding.
    """
    head, args = strip_app(ty)
    if isinstance(head, Ind):
        if not sig.has_ind(head.name):
            return None, None
        return head.name, mk_app(Ind(head.name, STAR), *args)
    body = None
    if isinstance(head, Var) and head.sizes is None and head.idx < len(lenv):
        decl = env_lookup(lenv, head.idx)
        if decl.val is not None:
            body = decl.val
    elif isinstance(head, Const) and head.sizes is None:
        decl = genv.lookup(head.name)
        if isinstance(decl, GDef):
            body = decl.body
    if body is not None:
        n = count_annots(body)
        markers = tuple(sized(svar(_PROBE_BASE - i)) for i in range(n))
        probe = Var(head.idx, markers, head.name) if isinstance(head, Var) else Const(head.name, markers)
        red = whnf(sig, genv, lenv, mk_app(probe, *args), unfold=True)
        rh, _ = strip_app(red)
        if (
            isinstance(rh, Ind)
            and sig.has_ind(rh.name)
            and rh.annot.kind == "sized"
            and rh.annot.stage.var is not None
            and rh.annot.stage.var <= _PROBE_BASE
        ):
            slot = _PROBE_BASE - rh.annot.stage.var
            vec = tuple(STAR if i == slot else BARE for i in range(n))
            starred = Var(head.idx, vec, head.name) if isinstance(head, Var) else Const(head.name, vec)
            return rh.name, mk_app(starred, *args)
        if isinstance(rh, Ind) and sig.has_ind(rh.name):
            return rh.name, None
    # last resort: reduce the whole type and retry on the reduct
    red = whnf(sig, genv, lenv, ty, unfold=True)
    if red != ty:
        rh, rargs = strip_app(red)
        if isinstance(rh, Ind) and sig.has_ind(rh.name):
            return rh.name, mk_app(Ind(rh.name, STAR), *rargs)
    return None, None


def _star_positions(sig, genv, lenv, tele: Telescope, ret: Term, target: str):
    """Star the head of every argument/return type whose head resolves to the
    target inductive."""
    out: list[TeleEntry] = []
    env = lenv
    for entry in tele:
        name, starred = _head_inductive(sig, genv, env, entry.ty)
        if name == target and starred is not None:
            out.append(TeleEntry(entry.name, starred))
        else:
            out.append(entry)
        env = env_push(env, entry.name, entry.ty)
    name, starred = _head_inductive(sig, genv, env, ret)
    if name == target and starred is not None:
        ret = starred
    return tuple(out), ret


def set_rec_stars(sig, genv, lenv, t: Term, n: int) -> Term:
    """Position-annotate a bare fixpoint type: the nth argument's head must be
    an inductive type; every argument and return type with the same head gets
    a position annotation."""
    tele, ret = decompose_all(sig, genv, lenv, t)
    if n < 1 or n > len(tele):
        raise NotInductiveRecursiveArg(
            f"fixpoint type has no argument at position {n}"
        )
    env = lenv
    for entry in tele[: n - 1]:
        env = env_push(env, entry.name, entry.ty)
    target, starred = _head_inductive(sig, genv, env, tele[n - 1].ty)
    if target is None or starred is None:
        raise NotInductiveRecursiveArg(
            f"recursive argument {n} does not have an inductive type"
        )
    if sig.is_coinductive(target):
        raise NotInductiveRecursiveArg(
            f"recursive argument {n} has coinductive type {target}"
        )
    tele2, ret2 = _star_positions(sig, genv, lenv, tele, ret, target)
    return mk_pis(tele2, ret2)


def set_corec_stars(sig, genv, lenv, t: Term) -> Term:
    """Position-annotate a bare cofixpoint type: the return head must be a
    coinductive type; arguments with the same head are starred too."""
    tele, ret = decompose_all(sig, genv, lenv, t)
    env = lenv
    for entry in tele:
        env = env_push(env, entry.name, entry.ty)
    target, starred = _head_inductive(sig, genv, env, ret)
    if target is None or starred is None or not sig.is_coinductive(target):
        raise NotCoinductiveReturn("cofixpoint return type is not coinductive")
    tele2, ret2 = _star_positions(sig, genv, lenv, tele, ret, target)
    return mk_pis(tele2, ret2)


def _annotated_head_var(sig, genv, lenv, ty: Term, positions) -> StageVar | None:
    red = whnf(sig, genv, lenv, ty, unfold=True)
    rh, _ = strip_app(red)
    if (
        isinstance(rh, Ind)
        and rh.annot.kind == "sized"
        and rh.annot.stage.var is not None
        and rh.annot.stage.var in positions
    ):
        return rh.annot.stage.var
    return None


def get_rec_var(sig, genv, lenv, t: Term, n: int, positions) -> StageVar:
    tele, _ = decompose_all(sig, genv, lenv, t)
    if n < 1 or n > len(tele):
        raise NotInductiveRecursiveArg(f"fixpoint type has no argument at position {n}")
    env = lenv
    for entry in tele[: n - 1]:
        env = env_push(env, entry.name, entry.ty)
    v = _annotated_head_var(sig, genv, env, tele[n - 1].ty, positions)
    if v is None:
        raise NotInductiveRecursiveArg(
            f"recursive argument {n} lost its position annotation"
        )
    return v


def get_corec_var(sig, genv, lenv, t: Term, positions) -> StageVar:
    tele, ret = decompose_all(sig, genv, lenv, t)
    env = lenv
    for entry in tele:
        env = env_push(env, entry.name, entry.ty)
    v = _annotated_head_var(sig, genv, env, ret, positions)
    if v is None:
        raise NotCoinductiveReturn("cofixpoint return type lost its position annotation")
    return v


# ---------------------------------------------------------------------------
# Declared-vs-inferred position transfer
# ---------------------------------------------------------------------------


def get_pos_vars(sig, genv, lenv, positions, t: Term, u: Term) -> set[StageVar]:
    """Stage variables of t sitting where u carries a position variable,
    collected by a lockstep structural walk."""
    out: set[StageVar] = set()

    def collect(at, au):
        if (
            au.kind == "sized"
            and au.stage.var is not None
            and au.stage.var in positions
            and at.kind == "sized"
            and at.stage.var is not None
        ):
            out.add(at.stage.var)

    def go(env, a: Term, b: Term):
        a1 = whnf(sig, genv, env, a, unfold=False)
        b1 = whnf(sig, genv, env, b, unfold=False)
        ah, aa = strip_app(a1)
        bh, ba = strip_app(b1)
        same_var = isinstance(ah, Var) and isinstance(bh, Var) and ah.idx == bh.idx
        same_const = isinstance(ah, Const) and isinstance(bh, Const) and ah.name == bh.name
        if same_var or same_const:
            va = ah.sizes or ()
            vb = bh.sizes or ()
            if len(va) == len(vb) and len(aa) == len(ba):
                for sa, sb in zip(va, vb):
                    collect(sa, sb)
                for x, y in zip(aa, ba):
                    go(env, x, y)
                return
        elif isinstance(ah, Ind) and isinstance(bh, Ind) and ah.name == bh.name:
            if len(aa) == len(ba):
                collect(ah.annot, bh.annot)
                for x, y in zip(aa, ba):
                    go(env, x, y)
                return
        elif isinstance(ah, Univ) and isinstance(bh, Univ):
            return
        elif isinstance(ah, Constr) and isinstance(bh, Constr) and ah.name == bh.name:
            if len(aa) == len(ba):
                for x, y in zip(aa, ba):
                    go(env, x, y)
                return
        elif isinstance(ah, Prod) and isinstance(bh, Prod) and not aa and not ba:
            go(env, ah.dom, bh.dom)
            go(env_push(env, ah.name, ah.dom), ah.cod, bh.cod)
            return
        elif isinstance(ah, Abs) and isinstance(bh, Abs) and not aa and not ba:
            go(env_push(env, ah.name, ah.dom), ah.body, bh.body)
            return
        a2 = whnf(sig, genv, env, a1, unfold=True)
        b2 = whnf(sig, genv, env, b1, unfold=True)
        if a2 != a1 or b2 != b1:
            go(env, a2, b2)
            return
        raise StructuralMismatch(
            "declared and inferred types disagree structurally"
        )

    go(lenv, t, u)
    return out


# ---------------------------------------------------------------------------
# The checker
# ---------------------------------------------------------------------------


def env_push_tele(env: LocalEnv, tele: Telescope) -> LocalEnv:
    for entry in tele:
        env = env_push(env, entry.name, entry.ty)
    return env


class Checker:
    """Threads the signature, global environment and stage pools through the
    inference rules.  Constraint sets are threaded functionally: every rule
    takes the current set and returns the (possibly extended) set to carry
    on with."""

    def __init__(self, sig: Signature, genv: GlobalEnv, state: CheckerState | None = None,
                 trace=None, dump=None):
        self.sig = sig
        self.genv = genv
        self.state = state if state is not None else CheckerState()
        self.trace = trace
        self.dump = dump

    # -- small helpers -------------------------------------------------------

    def _t(self, rule_name: str) -> None:
        if self.trace is not None:
            self.trace(rule_name)

    def _whnf(self, lenv, t, unfold=True):
        return whnf(self.sig, self.genv, lenv, t, unfold=unfold)

    def _subtype(self, lenv, t, u) -> ConstraintSet:
        return subtype(self.sig, self.genv, lenv, t, u)

    def _fresh_annots(self, n: int, slots=None) -> tuple:
        """Fresh stage annotations for a definition use; star slots allocate
        position variables."""
        if slots is None:
            return tuple(sized(svar(v)) for v in self.state.fresh(n))
        if len(slots) != n:
            raise KernelBug("annotation vector length does not match counted sites")
        out = []
        for a in slots:
            if a.kind == "star":
                out.append(sized(svar(self.state.fresh_star(1)[0])))
            elif a.kind == "bare":
                out.append(sized(svar(self.state.fresh(1)[0])))
            else:
                raise KernelBug(f"unexpected {a.kind} slot in inference input")
        return tuple(out)

    # -- inference -----------------------------------------------------------

    def infer(self, C: ConstraintSet, lenv: LocalEnv, e: Term):
        """Infer a sized term and type for a bare or position term."""
        if isinstance(e, Univ):
            self._t("infer-univ")
            return C, e, Univ(axiom(e.sort))

        if isinstance(e, Var):
            if e.idx >= len(lenv):
                raise KernelBug(f"unbound de Bruijn index {e.idx}")
            decl = env_lookup(lenv, e.idx)
            if decl.val is None:
                self._t("infer-var")
                return C, Var(e.idx, None, decl.name), decl.ty
            self._t("infer-var-def")
            n = count_annots(decl.val)
            annots = self._fresh_annots(n, e.sizes)
            return C, Var(e.idx, annots, decl.name), decl.ty

        if isinstance(e, Const):
            decl = self.genv.lookup(e.name)
            if decl is None:
                raise UnknownName(f"unknown constant {e.name}")
            if isinstance(decl, GAssum):
                self._t("infer-const")
                return C, Const(e.name, None), decl.ty
            self._t("infer-const-def")
            n = count_annots(decl.body)
            annots = self._fresh_annots(n, e.sizes)
            u = self.state.fresh(1)[0]
            return C, Const(e.name, annots), subst_glob(decl.ty, svar(u))

        if isinstance(e, Ind):
            if not self.sig.has_ind(e.name):
                raise UnknownName(f"unknown inductive {e.name}")
            if e.annot.kind == "star":
                self._t("infer-ind-star")
                v = self.state.fresh_star(1)[0]
            elif e.annot.kind == "bare":
                self._t("infer-ind")
                v = self.state.fresh(1)[0]
            else:
                raise KernelBug("inference input carries a stage annotation")
            return C, Ind(e.name, sized(svar(v))), ind_type(self.sig, e.name)

        if isinstance(e, Constr):
            if not self.sig.has_constr(e.name):
                raise UnknownName(f"unknown constructor {e.name}")
            self._t("infer-constr")
            vs = self.state.fresh(inds(self.sig, e.name))
            return C, e, constr_type(self.sig, e.name, [svar(v) for v in vs])

        if isinstance(e, Abs):
            self._t("infer-abs")
            C, dom, _w = self.infer_sort(C, lenv, e.dom)
            env2 = env_push(lenv, e.name, dom)
            C, body, u = self.infer(C, env2, e.body)
            return C, Abs(e.name, erase(dom, ERASE_BARE), body), Prod(e.name, dom, u)

        if isinstance(e, Prod):
            self._t("infer-prod")
            C, dom, w1 = self.infer_sort(C, lenv, e.dom)
            env2 = env_push(lenv, e.name, dom)
            C, cod, w2 = self.infer_sort(C, env2, e.cod)
            return C, Prod(e.name, dom, cod), Univ(rule(w1, w2))

        if isinstance(e, LetIn):
            self._t("infer-letin")
            C, ty, _w = self.infer_sort(C, lenv, e.ty)
            C, val = self.check(C, lenv, e.val, ty)
            env2 = env_push(lenv, e.name, ty, val)
            C, body, u = self.infer(C, env2, e.body)
            return C, LetIn(e.name, erase(ty, ERASE_BARE), val, body), subst_term(u, val)

        if isinstance(e, App):
            self._t("infer-app")
            C, fn, fty = self.infer(C, lenv, e.fn)
            fty1 = self._whnf(lenv, fty)
            if not isinstance(fty1, Prod):
                raise ExpectedFunction("application head is not a function")
            C, arg = self.check(C, lenv, e.arg, fty1.dom)
            return C, App(fn, arg), subst_term(fty1.cod, arg)

        if isinstance(e, (Match, Case)):
            return self._infer_case(C, lenv, e)

        if isinstance(e, Fix):
            if not e.indices:
                return self._search_fix_indices(C, lenv, e)
            return self._infer_fixpoint(C, lenv, e, e.indices, cofix=False)

        if isinstance(e, Cofix):
            return self._infer_fixpoint(C, lenv, e, None, cofix=True)

        raise KernelBug(f"cannot infer node {type(e).__name__}")

    def infer_sort(self, C, lenv, e):
        C, t, ty = self.infer(C, lenv, e)
        ty1 = self._whnf(lenv, ty)
        if not isinstance(ty1, Univ):
            raise NotASort("expected a type (a term whose type is a universe)")
        return C, t, ty1.sort

    def check(self, C: ConstraintSet, lenv: LocalEnv, e: Term, ty: Term):
        """Check a bare term against a sized type: infer, then require the
        inferred type to subtype the expected one."""
        self._t("check")
        C, e1, inferred = self.infer(C, lenv, e)
        C.merge(self._subtype(lenv, inferred, ty))
        return C, e1

    # -- case analysis -------------------------------------------------------

    def _infer_case(self, C, lenv, e):
        self._t("infer-case")
        C, target, tty = self.infer(C, lenv, e.target)
        tty1 = self._whnf(lenv, tty)
        th, targs = strip_app(tty1)
        if not isinstance(th, Ind) or not self.sig.has_ind(th.name):
            raise ExpectedInductive("case target does not have an inductive type")
        iname = th.name
        s = annot_stage(th.annot)
        block, k = self.sig.inds[iname]
        body_def = block.bodies[k]
        nparams = len(block.params)
        if len(targs) != nparams + len(body_def.indices):
            raise ExpectedInductive(
                f"target type {iname} is not fully applied"
            )
        params = targs[:nparams]
        indices_a = targs[nparams:]

        if isinstance(e, Match):
            if e.in_ind is not None and e.in_ind != iname:
                raise ExpectedInductive(
                    f"match pattern names {e.in_ind} but the target has type {iname}"
                )
            motive_bare = self._build_motive(lenv, e, iname, nparams, params, body_def.indices)
        else:
            motive_bare = e.motive
        C, motive, t_p = self.infer(C, lenv, motive_bare)

        q = len(body_def.indices)
        tele_w, rem = decompose(self.sig, self.genv, lenv, t_p, q + 1)
        rem1 = self._whnf(env_push_tele(lenv, tele_w), rem)
        if not isinstance(rem1, Univ):
            raise NotASort("case motive does not end in a universe")
        w = rem1.sort
        elim(self.sig, self.genv, body_def.sort, w, iname)

        vs = self.state.fresh(len(block.bodies))
        vk = vs[k]
        C.merge(case_stage(self.sig, iname, s, vk))
        mty = motive_type(self.sig, iname, params, w, svar(vk, 1))
        C.merge(self._subtype(lenv, t_p, mty))

        ctors = block.constructors_of(iname)
        stage_list = [svar(v) for v in vs]
        branches_out = []
        if isinstance(e, Match):
            clause_map = {}
            for cname, names, body in e.clauses:
                if cname in clause_map:
                    raise BranchArityMismatch(f"duplicate branch for constructor {cname}")
                clause_map[cname] = (names, body)
            unknown = set(clause_map) - {c.name for c in ctors}
            if unknown:
                raise BranchArityMismatch(
                    f"branch for {sorted(unknown)[0]} does not belong to {iname}"
                )
        for ctor in ctors:
            bt = branch_type(self.sig, ctor.name, params, stage_list, motive)
            if isinstance(e, Match):
                if ctor.name not in clause_map:
                    raise BranchArityMismatch(f"missing branch for constructor {ctor.name}")
                names, cbody = clause_map[ctor.name]
                if len(names) != len(ctor.args):
                    raise BranchArityMismatch(
                        f"branch for {ctor.name} binds {len(names)} arguments, expected {len(ctor.args)}"
                    )
                branch_term = self._wrap_clause(bt, names, cbody)
            else:
                branch_term = None
                for cname, b in e.branches:
                    if cname == ctor.name:
                        branch_term = b
                        break
                if branch_term is None:
                    raise BranchArityMismatch(f"missing branch for constructor {ctor.name}")
            C, eb = self.check(C, lenv, branch_term, bt)
            branches_out.append((ctor.name, eb))
        if isinstance(e, Case) and len(e.branches) != len(ctors):
            raise BranchArityMismatch("branch vector does not match the constructor list")

        result_ty = mk_app(motive, *indices_a, target)
        return C, Case(motive, target, tuple(branches_out)), result_ty

    def _build_motive(self, lenv, e: Match, iname, nparams, params, indices_tele):
        """Elaborate the surface return clause into a motive abstraction over
        the (bare-typed) indices and target."""
        bare_params = [erase(p, ERASE_BARE) for p in params]
        idx = instantiate_telescope(indices_tele, bare_params)
        q = len(idx)
        if e.ret_binders is None:
            names = ["_"] * q + ["_"]
            ret = shift_term(e.ret, q + 1)
        else:
            names = list(e.ret_binders)
            ret = e.ret
            if len(names) == nparams + q + 1:
                # parameter slots in the `in` pattern must be wildcards; they
                # bind nothing, so the return type is adjusted past them
                extra = names[:nparams]
                if any(n != "_" for n in extra):
                    raise BranchArityMismatch(
                        f"parameters of {iname} must be written as _ in the match pattern"
                    )
                names = names[nparams:]
                ret = shift_term(ret, -nparams, cutoff=q + 1)
            elif len(names) != q + 1:
                raise BranchArityMismatch(
                    f"match binds {len(names) - 1} index patterns, {iname} has {q}"
                )
        idx_vars = [Var(q - 1 - i) for i in range(q)]
        tdom = mk_app(
            Ind(iname, BARE), *[shift_term(p, q) for p in bare_params], *idx_vars
        )
        motive = ret
        motive = Abs(names[-1], tdom, motive)
        for i in range(q - 1, -1, -1):
            motive = Abs(names[i], erase(idx[i].ty, ERASE_BARE), motive)
        return motive

    def _wrap_clause(self, bt: Term, names, body: Term) -> Term:
        """Wrap a clause body in abstractions whose domains come from the
        branch type (bare-erased), mirroring surface elaboration."""
        doms = []
        t = bt
        for _ in names:
            if not isinstance(t, Prod):
                raise KernelBug("branch type shorter than clause binders")
            doms.append(erase(t.dom, ERASE_BARE))
            t = t.cod
        out = body
        for name, dom in zip(reversed(names), reversed(doms)):
            out = Abs(name, dom, out)
        return out

    # -- fixpoints -----------------------------------------------------------

    def _search_fix_indices(self, C, lenv, fx: Fix):
        """Try every recursive-argument index combination, left to right,
        keeping the first that checks."""
        self._t("search-fix-indices")
        arities = []
        for d in fx.defs:
            try:
                tele, _ = decompose_all(self.sig, self.genv, lenv, erase(d.ty, ERASE_BARE))
            except SizecheckError:
                tele = ()
            arities.append(len(tele))
        if any(a == 0 for a in arities):
            raise NoValidRecursiveArgument(
                "fixpoint has a definition with no arguments",
                fixpoint=fx.defs[fx.select - 1].name,
            )
        last_err: SizecheckError | None = None
        for combo in itertools.product(*(range(1, a + 1) for a in arities)):
            snap = self.state.snapshot()
            try:
                return self._infer_fixpoint(C, lenv, fx, combo, cofix=False)
            except SizecheckError as err:
                last_err = err
                self.state.restore(snap)
        raise NoValidRecursiveArgument(
            f"no valid recursive argument found (last failure: {last_err})",
            fixpoint=fx.defs[fx.select - 1].name,
        )

    def _infer_fixpoint(self, C, lenv, fx, indices, cofix: bool):
        self._t("infer-cofix" if cofix else "infer-fix")
        defs = fx.defs
        name_for_errors = defs[fx.select - 1].name
        bare_tys = [erase(d.ty, ERASE_BARE) for d in defs]

        # the bare types must typecheck on their own before any reduction is
        # performed on them; results are discarded
        for bty in bare_tys:
            self.infer(C.copy(), lenv, bty)

        if cofix:
            star_tys = [set_corec_stars(self.sig, self.genv, lenv, bty) for bty in bare_tys]
        else:
            star_tys = [
                set_rec_stars(self.sig, self.genv, lenv, bty, n)
                for bty, n in zip(bare_tys, indices)
            ]

        first_pass = True
        while True:
            C_try = C.copy()
            sized_tys = []
            for st in star_tys:
                C_try, t_k, _w = self.infer_sort(C_try, lenv, st)
                sized_tys.append(t_k)
            if cofix:
                rhos = [
                    get_corec_var(self.sig, self.genv, lenv, t, self.state.positions)
                    for t in sized_tys
                ]
            else:
                rhos = [
                    get_rec_var(self.sig, self.genv, lenv, t, n, self.state.positions)
                    for t, n in zip(sized_tys, indices)
                ]
            env2 = lenv
            for i, (d, t_k) in enumerate(zip(defs, sized_tys)):
                env2 = env_push(env2, d.name, shift_term(t_k, i))
            nk = len(defs)
            bodies = []
            for d, t_k in zip(defs, sized_tys):
                expected = shift_stages(shift_term(t_k, nk), self.state.positions)
                C_try, e_k = self.check(C_try, env2, d.body, expected)
                bodies.append(e_k)

            if first_pass and self.dump is not None:
                self.dump(name_for_errors, C_try.copy())
            first_pass = False

            try:
                outs = []
                for rho, t_k in zip(rhos, sized_tys):
                    pv = pos_vars(t_k, self.state.positions)
                    sv = stage_vars(t_k) - pv
                    outs.append(rec_check(C_try, rho, pv, sv))
                C_final = union_all(outs)
            except RecCheckFailure as f:
                self._t(f"demote {sorted(f.vars)}")
                self.state.demote(f.vars)
                star_tys = [erase(t, ERASE_STAR, self.state.positions) for t in sized_tys]
                continue
            except Unsatisfiable as err:
                if err.fixpoint is None:
                    err.fixpoint = name_for_errors
                raise

            positions = self.state.positions
            out_defs = tuple(
                FixDef(d.name, erase(t_k, ERASE_STAR, positions), e_k)
                for d, t_k, e_k in zip(defs, sized_tys, bodies)
            )
            if cofix:
                node: Term = Cofix(fx.select, out_defs)
            else:
                node = Fix(tuple(indices), fx.select, out_defs)
            return C_final, node, sized_tys[fx.select - 1]

    # -- global declarations -------------------------------------------------

    def _check_fresh(self, name, span=None):
        if name in self.genv or self.sig.has_ind(name) or self.sig.has_constr(name):
            raise DuplicateName(f"name {name} is already declared", span=span)

    def check_global_assum(self, name: str, ty_bare: Term, span=None) -> GAssum:
        self._t("global-assum")
        self._check_fresh(name, span)
        self.state.reset()
        C = ConstraintSet()
        C, t, _w = self.infer_sort(C, (), ty_bare)
        decl = GAssum(name, erase(t, ERASE_FULL))
        self.genv.add(decl)
        return decl

    def check_global_def(self, name: str, ty_bare: Term, body_bare: Term, span=None) -> GDef:
        """Infer the declared type and the body, require the body's type to
        subtype the declared one, transfer position variables onto the
        declared type, and store the erased declaration."""
        self._t("global-def")
        self._check_fresh(name, span)
        self.state.reset()
        C = ConstraintSet()
        C, t, _w = self.infer_sort(C, (), ty_bare)
        C, e, u = self.infer(C, (), body_bare)
        self._subtype((), u, t)  # only failure matters here
        self.state.positions |= get_pos_vars(
            self.sig, self.genv, (), self.state.positions, t, u
        )
        decl = GDef(name, erase(t, ERASE_GLOB, self.state.positions), erase(e, ERASE_FULL))
        self.genv.add(decl)
        return decl

"""Weak-head normalization and eta-aware conversion.

Conversion compares terms up to reduction and emits bidirectional substaging
constraints at corresponding annotation sites.  Definition unfolding is lazy:
two uses of the same defined name first compare their annotation vectors
pointwise and only unfold when the structural comparison fails.
"""

from __future__ import annotations

from .errors import KernelBug, NotConvertible
from .syntax import (
    Abs, Annot, App, Case, Cofix, Const, Constr, ERASE_FULL, Fix, FixDef, GDef,
    GlobalEnv, Ind, INFTY, LetIn, LocalEnv, Match, Prod, Signature, Stage, Term,
    Univ, Var, env_lookup, env_push, erase, mk_app, shift_term, strip_app,
    subst_fulls, subst_many, subst_term,
)
from .constraints import ConstraintSet


def annot_stage(a: Annot) -> Stage:
    """Stage carried by an annotation for comparison purposes; full sites
    stand for the infinite stage."""
    if a.kind == "sized":
        return a.stage
    if a.kind == "full":
        return INFTY
    raise KernelBug(f"annotation of kind {a.kind!r} has no stage")


def unfold_fix(fx: Fix) -> Term:
    n = len(fx.defs)
    repl = [Fix(fx.indices, n - i, fx.defs) for i in range(n)]
    return subst_many(fx.defs[fx.select - 1].body, repl)


def unfold_cofix(cf: Cofix) -> Term:
    n = len(cf.defs)
    repl = [Cofix(n - i, cf.defs) for i in range(n)]
    return subst_many(cf.defs[cf.select - 1].body, repl)


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n):
        self.left = n

    def tick(self):
        if self.left is not None:
            self.left -= 1
            if self.left < 0:
                raise KernelBug("reduction step limit exceeded")


def whnf(
    sig: Signature,
    genv: GlobalEnv,
    lenv: LocalEnv,
    t: Term,
    unfold: bool = True,
    max_steps: int | None = None,
    _budget: _Budget | None = None,
) -> Term:
    """Head-reduce t until head-normal.

    unfold gates delta-reduction of local and global definitions; beta, zeta,
    iota, mu and nu always fire.  max_steps imposes a debugging step limit.
    """
    budget = _budget if _budget is not None else _Budget(max_steps)
    head = t
    args: list[Term] = []
    while True:
        if isinstance(head, App):
            h, sp = strip_app(head)
            args = sp + args
            head = h
            continue
        if isinstance(head, Abs) and args:
            budget.tick()
            head = subst_term(head.body, args.pop(0))
            continue
        if isinstance(head, LetIn):
            budget.tick()
            head = subst_term(head.body, head.val)
            continue
        if isinstance(head, Var):
            if not unfold or head.idx >= len(lenv):
                break
            decl = env_lookup(lenv, head.idx)
            if decl.val is None:
                break
            budget.tick()
            if head.sizes is None:
                head = decl.val
            else:
                head = subst_fulls(
                    erase(decl.val, ERASE_FULL), [annot_stage(a) for a in head.sizes]
                )
            continue
        if isinstance(head, Const):
            decl = genv.lookup(head.name)
            if not unfold or not isinstance(decl, GDef):
                break
            budget.tick()
            if head.sizes is None:
                head = decl.body
            else:
                head = subst_fulls(decl.body, [annot_stage(a) for a in head.sizes])
            continue
        if isinstance(head, Case):
            tgt = whnf(sig, genv, lenv, head.target, unfold=unfold, _budget=budget)
            th, tsp = strip_app(tgt)
            if isinstance(th, Constr) and sig.has_constr(th.name):
                block, _ = sig.constrs[th.name]
                nparams = len(block.params)
                branch = None
                for cname, body in head.branches:
                    if cname == th.name:
                        branch = body
                        break
                if branch is not None:
                    budget.tick()
                    head = mk_app(branch, *tsp[nparams:])
                    continue
            if isinstance(th, Cofix):
                budget.tick()
                head = Case(head.motive, mk_app(unfold_cofix(th), *tsp), head.branches)
                continue
            head = Case(head.motive, tgt, head.branches)
            break
        if isinstance(head, Fix) and head.indices:
            n = head.indices[head.select - 1]
            if len(args) >= n:
                rec = whnf(sig, genv, lenv, args[n - 1], unfold=unfold, _budget=budget)
                rh, _ = strip_app(rec)
                if isinstance(rh, Constr):
                    budget.tick()
                    args[n - 1] = rec
                    head = unfold_fix(head)
                    continue
            break
        break  # Univ, Prod, Ind, Constr, Cofix, Match, unapplied Abs, stuck Fix
    return mk_app(head, *args)


# ---------------------------------------------------------------------------
# Conversion
# ---------------------------------------------------------------------------


def equate(sig: Signature, genv: GlobalEnv, lenv: LocalEnv, t: Term, u: Term) -> ConstraintSet:
    """Convertibility check; returns the substaging constraints (both
    directions at every corresponding annotation pair) or raises
    NotConvertible."""
    out = ConstraintSet()
    _eq(sig, genv, lenv, t, u, out)
    return out


def _eq_annots(a1: Annot, a2: Annot, out: ConstraintSet) -> None:
    sized1 = a1.kind in ("sized", "full")
    sized2 = a2.kind in ("sized", "full")
    if sized1 and sized2:
        s1, s2 = annot_stage(a1), annot_stage(a2)
        out.add(s1, s2)
        out.add(s2, s1)
        return
    if a1.kind == a2.kind:
        return
    raise NotConvertible(f"annotation kinds differ: {a1.kind} vs {a2.kind}")


def _unfoldable(sig, genv, lenv, head: Term) -> bool:
    if isinstance(head, Var) and head.idx < len(lenv):
        return env_lookup(lenv, head.idx).val is not None
    if isinstance(head, Const):
        return isinstance(genv.lookup(head.name), GDef)
    return False


def _eq(sig, genv, lenv, t, u, out: ConstraintSet) -> None:
    t1 = whnf(sig, genv, lenv, t, unfold=False)
    u1 = whnf(sig, genv, lenv, u, unfold=False)
    th, ta = strip_app(t1)
    uh, ua = strip_app(u1)

    def spines(delta: ConstraintSet) -> None:
        if len(ta) != len(ua):
            raise NotConvertible("argument counts differ")
        for x, y in zip(ta, ua):
            _eq(sig, genv, lenv, x, y, delta)

    # eta: an abstraction against a non-abstraction
    if isinstance(th, Abs) and not ta and not isinstance(uh, Abs):
        env2 = env_push(lenv, th.name, th.dom)
        _eq(sig, genv, env2, th.body, App(shift_term(u1, 1), Var(0, name=th.name)), out)
        return
    if isinstance(uh, Abs) and not ua and not isinstance(th, Abs):
        env2 = env_push(lenv, uh.name, uh.dom)
        _eq(sig, genv, env2, App(shift_term(t1, 1), Var(0, name=uh.name)), uh.body, out)
        return

    same_var = isinstance(th, Var) and isinstance(uh, Var) and th.idx == uh.idx
    same_const = isinstance(th, Const) and isinstance(uh, Const) and th.name == uh.name
    if same_var or same_const:
        trial = ConstraintSet()
        try:
            v1 = th.sizes or ()
            v2 = uh.sizes or ()
            if len(v1) != len(v2):
                raise NotConvertible("annotation vector lengths differ")
            for a1, a2 in zip(v1, v2):
                _eq_annots(a1, a2, trial)
            if len(ta) != len(ua):
                raise NotConvertible("argument counts differ")
            for x, y in zip(ta, ua):
                _eq(sig, genv, lenv, x, y, trial)
            out.merge(trial)
            return
        except NotConvertible:
            if _unfoldable(sig, genv, lenv, th) and _unfoldable(sig, genv, lenv, uh):
                pass  # fall through to full unfolding below
            else:
                raise

    elif isinstance(th, Univ) and isinstance(uh, Univ) and not ta and not ua:
        if th.sort != uh.sort:
            raise NotConvertible(f"sorts differ: {th.sort} vs {uh.sort}")
        return

    elif isinstance(th, Ind) and isinstance(uh, Ind) and th.name == uh.name:
        _eq_annots(th.annot, uh.annot, out)
        spines(out)
        return

    elif isinstance(th, Constr) and isinstance(uh, Constr) and th.name == uh.name:
        spines(out)
        return

    elif isinstance(th, Prod) and isinstance(uh, Prod) and not ta and not ua:
        _eq(sig, genv, lenv, th.dom, uh.dom, out)
        env2 = env_push(lenv, th.name, th.dom)
        _eq(sig, genv, env2, th.cod, uh.cod, out)
        return

    elif isinstance(th, Abs) and isinstance(uh, Abs) and not ta and not ua:
        _eq(sig, genv, lenv, th.dom, uh.dom, out)
        env2 = env_push(lenv, th.name, th.dom)
        _eq(sig, genv, env2, th.body, uh.body, out)
        return

    elif isinstance(th, Case) and isinstance(uh, Case):
        trial = ConstraintSet()
        try:
            _eq(sig, genv, lenv, th.motive, uh.motive, trial)
            _eq(sig, genv, lenv, th.target, uh.target, trial)
            if len(th.branches) != len(uh.branches):
                raise NotConvertible("branch counts differ")
            for (c1, b1), (c2, b2) in zip(th.branches, uh.branches):
                if c1 != c2:
                    raise NotConvertible(f"branch constructors differ: {c1} vs {c2}")
                _eq(sig, genv, lenv, b1, b2, trial)
            for x, y in zip(ta, ua):
                _eq(sig, genv, lenv, x, y, trial)
            if len(ta) != len(ua):
                raise NotConvertible("argument counts differ")
            out.merge(trial)
            return
        except NotConvertible:
            pass  # targets may still reduce under full unfolding

    elif isinstance(th, Fix) and isinstance(uh, Fix):
        if th.indices != uh.indices or th.select != uh.select or len(th.defs) != len(uh.defs):
            raise NotConvertible("fixpoint shapes differ")
        for d1, d2 in zip(th.defs, uh.defs):
            _eq(sig, genv, lenv, d1.ty, d2.ty, out)
        env2 = lenv
        for d in th.defs:
            env2 = env_push(env2, d.name, d.ty)
        for d1, d2 in zip(th.defs, uh.defs):
            _eq(sig, genv, env2, d1.body, d2.body, out)
        spines(out)
        return

    elif isinstance(th, Cofix) and isinstance(uh, Cofix):
        if th.select != uh.select or len(th.defs) != len(uh.defs):
            raise NotConvertible("cofixpoint shapes differ")
        for d1, d2 in zip(th.defs, uh.defs):
            _eq(sig, genv, lenv, d1.ty, d2.ty, out)
        env2 = lenv
        for d in th.defs:
            env2 = env_push(env2, d.name, d.ty)
        for d1, d2 in zip(th.defs, uh.defs):
            _eq(sig, genv, env2, d1.body, d2.body, out)
        spines(out)
        return

    # mismatched or opaque heads: unfold definitions and retry once progress
    # is made
    t2 = whnf(sig, genv, lenv, t1, unfold=True)
    u2 = whnf(sig, genv, lenv, u1, unfold=True)
    if t2 != t1 or u2 != u1:
        _eq(sig, genv, lenv, t2, u2, out)
        return
    raise NotConvertible(
        f"terms are not convertible ({type(th).__name__} vs {type(uh).__name__})",
        lhs=t1, rhs=u1,
    )

"""Algorithmic subtyping and the positivity/negativity predicates."""

from __future__ import annotations

from .constraints import ConstraintSet
from .errors import NotConvertible, NotSubtype
from .reduction import annot_stage, equate, whnf
from .syntax import (
    Ind, Prod, Signature, Sort, StageVar, Term, Univ, env_push, stage_vars,
    strip_app,
)

POSITIVE = "positive"
NEGATIVE = "negative"


def dual(pol: str) -> str:
    return NEGATIVE if pol == POSITIVE else POSITIVE


def _sort_rank(s: Sort) -> int:
    if s.kind == "Prop":
        return 0
    if s.kind == "Set":
        return 1
    return 1 + s.level


def sort_leq(s1: Sort, s2: Sort) -> bool:
    """Cumulativity: Prop <= Set <= Type@{1} <= Type@{2} <= ..."""
    return _sort_rank(s1) <= _sort_rank(s2)


def subtype(sig: Signature, genv, lenv, t: Term, u: Term) -> ConstraintSet:
    """Check t <= u, producing the substaging constraints that make it hold.
    Raises NotSubtype when the head shapes are irreconcilable."""
    out = ConstraintSet()
    _sub(sig, genv, lenv, t, u, out)
    return out


def _sub(sig, genv, lenv, t, u, out: ConstraintSet) -> None:
    t1 = whnf(sig, genv, lenv, t, unfold=False)
    u1 = whnf(sig, genv, lenv, u, unfold=False)
    th, ta = strip_app(t1)
    uh, ua = strip_app(u1)

    if isinstance(th, Univ) and isinstance(uh, Univ) and not ta and not ua:
        if not sort_leq(th.sort, uh.sort):
            raise NotSubtype(f"universe {th.sort} is not below {uh.sort}", lhs=t1, rhs=u1)
        return

    if isinstance(th, Prod) and isinstance(uh, Prod) and not ta and not ua:
        # domains must be convertible; codomains are covariant
        out.merge(equate(sig, genv, lenv, th.dom, uh.dom))
        env2 = env_push(lenv, th.name, th.dom)
        _sub(sig, genv, env2, th.cod, uh.cod, out)
        return

    if isinstance(th, Ind) and isinstance(uh, Ind) and th.name == uh.name:
        r = annot_stage(th.annot)
        s = annot_stage(uh.annot)
        if sig.is_coinductive(th.name):
            out.add(s, r)
        else:
            out.add(r, s)
        if len(ta) != len(ua):
            raise NotSubtype("inductive type applied to differing argument counts",
                             lhs=t1, rhs=u1)
        for x, y in zip(ta, ua):
            out.merge(equate(sig, genv, lenv, x, y))
        return

    # try to expose more structure by unfolding definitions and reducing
    t2 = whnf(sig, genv, lenv, t1, unfold=True)
    u2 = whnf(sig, genv, lenv, u1, unfold=True)
    if t2 != t1 or u2 != u1:
        _sub(sig, genv, lenv, t2, u2, out)
        return

    # fall back to convertibility
    try:
        out.merge(equate(sig, genv, lenv, t1, u1))
    except NotConvertible as e:
        raise NotSubtype(str(e), lhs=t1, rhs=u1) from e


# ---------------------------------------------------------------------------
# Positivity / negativity of a stage variable in a type
# ---------------------------------------------------------------------------


def polarity_check(sig: Signature, genv, lenv, v: StageVar, t: Term, pol: str) -> bool:
    """True when the variable occurs only positively (resp. negatively) in t.

    Absence always passes; products flip polarity in the domain; an inductive
    head accepts positive occurrences in its own annotation (dually a
    coinductive head accepts negative ones) provided the variable stays out
    of the arguments.
    """
    if v not in stage_vars(t):
        return True
    t1 = whnf(sig, genv, lenv, t, unfold=True)
    if isinstance(t1, Prod):
        if not polarity_check(sig, genv, lenv, v, t1.dom, dual(pol)):
            return False
        env2 = env_push(lenv, t1.name, t1.dom)
        return polarity_check(sig, genv, env2, v, t1.cod, pol)
    head, args = strip_app(t1)
    if isinstance(head, Ind) and sig.has_ind(head.name):
        in_args = any(v in stage_vars(a) for a in args)
        coind = sig.is_coinductive(head.name)
        if pol == POSITIVE:
            if not coind:
                return not in_args
            return not in_args and _annot_var(head) != v
        else:
            if coind:
                return not in_args
            return not in_args and _annot_var(head) != v
    return False


def _annot_var(ind: Ind):
    if ind.annot.kind == "sized" and ind.annot.stage.var is not None:
        return ind.annot.stage.var
    return None

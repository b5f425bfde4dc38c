"""Stage-constraint graphs and the termination/productivity decision
procedure.

A constraint v1+n1 <= v2+n2 is stored as a directed edge v1 -> v2 with weight
n2 - n1.  The infinite stage is a distinguished node; edges into it are never
stored (always satisfiable) and edges out of it carry weight 0 and force
their target to be infinite.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import RecCheckFailure, Unsatisfiable
from .syntax import CheckerState, INFTY, Stage, StageVar, Term, pos_vars, stage_vars

INFTY_NODE = -1


def node_name(n: int) -> str:
    return "INFTY" if n == INFTY_NODE else f"v{n}"


class ConstraintSet:
    """Weighted digraph over stage variables plus the infinity node.
    Parallel edges collapse to the minimum weight."""

    def __init__(self):
        self._adj: dict[int, dict[int, int]] = {}

    # -- construction -------------------------------------------------------

    def add_edge(self, a: int, b: int, w: int) -> None:
        if b == INFTY_NODE:
            return
        if a == b and w >= 0:
            return  # vacuous reflexive constraint
        row = self._adj.setdefault(a, {})
        if b not in row or w < row[b]:
            row[b] = w

    def add(self, lhs: Stage, rhs: Stage) -> None:
        if rhs.is_infty:
            return
        if lhs.is_infty:
            self.add_edge(INFTY_NODE, rhs.var, 0)
            return
        self.add_edge(lhs.var, rhs.var, rhs.hats - lhs.hats)

    def merge(self, other: "ConstraintSet") -> "ConstraintSet":
        for a, b, w in other.edges():
            self.add_edge(a, b, w)
        return self

    def copy(self) -> "ConstraintSet":
        out = ConstraintSet()
        out._adj = {a: dict(row) for a, row in self._adj.items()}
        return out

    # -- queries -------------------------------------------------------------

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for a in sorted(self._adj):
            row = self._adj[a]
            for b in sorted(row):
                yield a, b, row[b]

    def weight(self, a: int, b: int):
        return self._adj.get(a, {}).get(b)

    def nodes(self) -> set[int]:
        out = set(self._adj)
        for row in self._adj.values():
            out.update(row)
        return out

    def __len__(self) -> int:
        return sum(len(row) for row in self._adj.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, ConstraintSet) and set(self.edges()) == set(other.edges())

    def upward_closure(self, start: Iterable[int]) -> set[int]:
        """Nodes reachable from start along edge direction, start included."""
        seen = set(start)
        frontier = list(seen)
        while frontier:
            a = frontier.pop()
            for b in self._adj.get(a, ()):
                if b not in seen:
                    seen.add(b)
                    frontier.append(b)
        return seen

    def downward_closure(self, start: Iterable[int]) -> set[int]:
        """Nodes that reach start along edge direction, start included."""
        preds: dict[int, set[int]] = {}
        for a, row in self._adj.items():
            for b in row:
                preds.setdefault(b, set()).add(a)
        seen = set(start)
        frontier = list(seen)
        while frontier:
            b = frontier.pop()
            for a in preds.get(b, ()):
                if a not in seen:
                    seen.add(a)
                    frontier.append(a)
        return seen

    def remove_edges_touching(self, vars: set[int]) -> None:
        for a in list(self._adj):
            if a in vars:
                del self._adj[a]
                continue
            row = self._adj[a]
            for b in list(row):
                if b in vars:
                    del row[b]
            if not row:
                del self._adj[a]

    def negative_cycle_vars(self) -> set[int]:
        """Variables lying on at least one negative-weight cycle.

        Bellman-Ford from a virtual zero source; when an edge still relaxes
        after |V| passes, predecessor links are walked back onto the cycle.
        Found cycles are removed and the sweep repeats until none remain.
        """
        result: set[int] = set()
        adj = {a: dict(row) for a, row in self._adj.items()}
        while True:
            nodes = set(adj)
            for row in adj.values():
                nodes.update(row)
            if not nodes:
                break
            order = sorted(nodes)
            dist = {n: 0 for n in order}
            pred: dict[int, int | None] = {n: None for n in order}
            witness = None
            for _ in range(len(order)):
                changed = False
                for a in order:
                    row = adj.get(a)
                    if not row:
                        continue
                    da = dist[a]
                    for b, w in row.items():
                        if da + w < dist[b]:
                            dist[b] = da + w
                            pred[b] = a
                            changed = True
                            witness = b
                if not changed:
                    witness = None
                    break
            if witness is None:
                break
            # walk predecessor links until a node repeats: that node is on
            # the cycle the final relaxation detected
            seen: set[int] = set()
            x: int | None = witness
            while x is not None and x not in seen:
                seen.add(x)
                x = pred[x]
            if x is None:
                break
            cycle = {x}
            y = pred[x]
            while y is not None and y != x:
                cycle.add(y)
                y = pred[y]
            result |= cycle
            for n in cycle:
                adj.pop(n, None)
            for a in list(adj):
                row = adj[a]
                for b in list(row):
                    if b in cycle:
                        del row[b]
                if not row:
                    del adj[a]
        result.discard(INFTY_NODE)
        return result

    # -- rendering -----------------------------------------------------------

    def dump_lines(self) -> list[str]:
        return [f"{node_name(a)} ⊑{w} {node_name(b)}" for a, b, w in self.edges()]

    def __repr__(self) -> str:
        return "ConstraintSet({" + ", ".join(
            f"{node_name(a)}->{node_name(b)}:{w}" for a, b, w in self.edges()
        ) + "})"


def union_all(sets: Iterable[ConstraintSet]) -> ConstraintSet:
    out = ConstraintSet()
    for c in sets:
        out.merge(c)
    return out


# ---------------------------------------------------------------------------
# RecCheck
# ---------------------------------------------------------------------------


def rec_check(
    C: ConstraintSet,
    rho: StageVar,
    vstar: set[StageVar] | frozenset[StageVar],
    vneq: set[StageVar] | frozenset[StageVar],
) -> ConstraintSet:
    """Decide whether the constraints admit an assignment with the position
    variables vstar finite (rho smallest among them) and the leftover
    variables vneq infinite.

    Returns an extended constraint set on success.  Raises RecCheckFailure
    with a set of demotable position variables when some of them are forced
    infinite, and Unsatisfiable when no demotion can help.
    """
    vstar = set(vstar)
    vneq = set(vneq)
    if rho not in vstar:
        raise Unsatisfiable(f"recursive stage variable v{rho} is not position-flagged")
    work = C.copy()

    # 1. rho must be the smallest noninfinite stage: bound it below every
    #    variable in its downward component (the variables it must not exceed).
    pin_set = work.downward_closure({rho}) - {rho, INFTY_NODE} - vneq
    # Must-be-finite region: everything that bounds a position variable from
    # below, taken before any edge deletion.
    fin = work.downward_closure(vstar) - {INFTY_NODE}
    for v in sorted(pin_set):
        work.add_edge(rho, v, 0)

    # 2. negative cycles cannot be satisfied by finite stages
    neg = work.negative_cycle_vars()

    # 3. the only resolution is to force the cycle variables to infinity
    if neg:
        work.remove_edges_touching(neg)
        for v in sorted(neg):
            work.add_edge(INFTY_NODE, v, 0)

    # 4. infinity flowing out of the must-infinite variables, wherever it can
    #    touch the must-finite region
    if vneq:
        forced = work.upward_closure(vneq) & work.upward_closure(fin)
        for v in sorted(forced - {INFTY_NODE}):
            work.add_edge(INFTY_NODE, v, 0)

    # 5. variables determined both infinite and noninfinite
    vbot = work.upward_closure({INFTY_NODE}) & fin
    if not vbot:
        return work

    # 6. demote contradictory position variables, or give up
    demotable = frozenset(vbot & (vstar - {rho}))
    if not demotable:
        raise Unsatisfiable(
            f"size constraints force v{rho} to be infinite: recursion does not decrease"
        )
    raise RecCheckFailure(demotable)


def rec_check_loop(
    C: ConstraintSet,
    rhos: list[StageVar],
    types: list[Term],
    bodies: list[Term],
    state: CheckerState,
) -> ConstraintSet:
    """Run rec_check over every mutual def, demoting failed position variables
    from the state pools and retrying until success or hard failure.

    The must-infinite set is taken from the def types only: variables left in
    checked bodies are erased to the infinite stage in storage but are
    re-annotated fresh at every later use, so they impose no global bound.
    """
    while True:
        try:
            outs = []
            for rho, t in zip(rhos, types):
                pv = pos_vars(t, state.positions)
                sv = stage_vars(t) - pv
                outs.append(rec_check(C, rho, pv, sv))
            return union_all(outs)
        except RecCheckFailure as f:
            state.demote(f.vars)

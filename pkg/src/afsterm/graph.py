"""Dependency graph approximation, SCC decomposition and cycle pruning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .terms import (
    Term, Var, BVar, Abs, FunApp, app_spine, type_of,
    PLAIN, FRESH,
)
from .dp import DependencyPair, DPProblem


@dataclass(frozen=True)
class DPGraph:
    pairs: tuple[DependencyPair, ...]
    edges: dict[int, frozenset[int]]
    alive: frozenset[int]  # indices not yet removed; removed nodes are tombstoned

    def out_edges(self, i: int) -> frozenset[int]:
        return frozenset(j for j in self.edges.get(i, frozenset()) if j in self.alive)

    def without(self, removed: Iterable[int]) -> "DPGraph":
        return DPGraph(self.pairs, self.edges, self.alive - frozenset(removed))

    @property
    def empty(self) -> bool:
        return not self.alive

    def edge_count(self) -> int:
        return sum(len(self.out_edges(i)) for i in sorted(self.alive))


def _compatible(rhs_part: Term, lhs_part: Term, defined: frozenset[str]) -> bool:
    """Over-approximation: can an instance of rhs_part rewrite (internally)
    to an instance of lhs_part?

    Variables and defined-headed or redex-headed terms may become anything;
    constructor and abstraction roots are stable under reduction, and the
    fresh constants are irreducible.
    """
    if isinstance(lhs_part, Var):
        return True
    if isinstance(rhs_part, Var):
        return True
    r_head, r_args = app_spine(rhs_part)
    if isinstance(r_head, Var) or isinstance(r_head, BVar):
        return True
    if isinstance(r_head, Abs):
        if r_args:
            return True  # beta redex
        if isinstance(lhs_part, Abs):
            return True
        return False
    assert isinstance(r_head, FunApp)
    if r_head.fn.kind == FRESH:
        return False  # fresh constants are irreducible and match no pattern
    if r_head.fn.name in defined and r_head.fn.kind == PLAIN:
        return True
    # constructor (or marked) root: preserved by internal steps
    l_head, l_args = app_spine(lhs_part)
    if not isinstance(l_head, FunApp):
        return False
    if l_head.fn != r_head.fn or len(l_args) != len(r_args):
        return False
    return all(
        _compatible(ra, la, defined)
        for ra, la in zip(list(r_head.args) + r_args, list(l_head.args) + l_args)
    )


def _may_follow(p: DependencyPair, q: DependencyPair, defined: frozenset[str]) -> bool:
    """Edge test: p's right-hand side may lead to q's left-hand side."""
    if p.collapsing:
        return True
    r_head, r_args = app_spine(p.rhs)
    l_head, l_args = app_spine(q.lhs)
    if not (isinstance(r_head, FunApp) and isinstance(l_head, FunApp)):
        return False
    if r_head.fn != l_head.fn or len(r_args) != len(l_args):
        return False
    if type_of(p.rhs) != type_of(q.lhs):
        return False
    return all(
        _compatible(ra, la, defined)
        for ra, la in zip(list(r_head.args) + r_args, list(l_head.args) + l_args)
    )


def approximate_graph(problem: DPProblem) -> DPGraph:
    defined = problem.afs.defined_names
    n = len(problem.pairs)
    edges: dict[int, frozenset[int]] = {}
    for i, p in enumerate(problem.pairs):
        edges[i] = frozenset(
            j for j, q in enumerate(problem.pairs) if _may_follow(p, q, defined)
        )
    return DPGraph(problem.pairs, edges, frozenset(range(n)))


def sccs(g: DPGraph) -> list[tuple[int, ...]]:
    """Strongly connected components that lie on a cycle (singletons only
    with a self-loop), ordered by smallest member index."""
    order = sorted(g.alive)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = [0]
    out: list[tuple[int, ...]] = []

    def strongconnect(v: int) -> None:
        # iterative Tarjan to avoid recursion limits
        work = [(v, iter(sorted(g.out_edges(v))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(g.out_edges(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comp.sort()
                if len(comp) > 1 or comp[0] in g.out_edges(comp[0]):
                    out.append(tuple(comp))

    for v in order:
        if v not in index:
            strongconnect(v)
    out.sort(key=lambda c: c[0])
    return out


def prune(g: DPGraph) -> DPGraph:
    """Remove all nodes that are not part of any cycle; idempotent."""
    keep: set[int] = set()
    for comp in sccs(g):
        keep.update(comp)
    return DPGraph(g.pairs, g.edges, frozenset(keep))


def to_dot(g: DPGraph) -> str:
    lines = ["digraph dependency_graph {"]
    for i in sorted(g.alive):
        label = str(g.pairs[i]).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{i} [label="{i}: {label}"];')
    for i in sorted(g.alive):
        for j in sorted(g.out_edges(i)):
            lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"

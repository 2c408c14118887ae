"""Candidate terms, dynamic dependency pairs, and the tagging machinery."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .afs import AFS, Rule
from .terms import (
    Term, Var, BVar, Abs, App, FunApp, Variable, FunctionSymbol,
    type_of, free_vars, app_spine, head, mark, strict_subterms_closed,
    fresh_const, fresh_name, term_text, apply_subst, tagged, untagged,
    PLAIN, TAGGED, lam,
)


@dataclass(frozen=True)
class DependencyPair:
    lhs: Term
    rhs: Term
    kind: str  # "candidate" | "applied-head"
    rule_index: int

    @property
    def collapsing(self) -> bool:
        return isinstance(head(self.rhs), Var)

    def __str__(self) -> str:
        return f"{term_text(self.lhs)} ~> {term_text(self.rhs)}"


@dataclass(frozen=True)
class DPProblem:
    pairs: tuple[DependencyPair, ...]
    afs: AFS
    static_mode: bool = False  # collapsing pairs dropped (SPFP systems)

    @property
    def collapsing_set(self) -> bool:
        return any(p.collapsing for p in self.pairs)


def candidate_terms(rhs: Term, afs: AFS) -> list[Term]:
    """Closed candidate terms of a rule right-hand side, outermost first.

    Candidates are subterms f(t..) t.. with f defined, and x t1..tn (n > 0)
    with x free in rhs; bound variables going free are replaced by the
    per-type fresh constants.
    """
    defined = afs.defined_names
    rhs_free = free_vars(rhs)
    out: list[Term] = []
    seen: set[Term] = set()

    def close(t: Term, bound: dict[Variable, None]) -> Term:
        escaped = {v for v in free_vars(t) if v in bound}
        if not escaped:
            return t
        subst = {v: FunApp(fresh_const(v.type)) for v in escaped}
        return apply_subst(t, subst)

    def add(t: Term, bound: dict[Variable, None]) -> None:
        closed = close(t, bound)
        if closed not in seen:
            seen.add(closed)
            out.append(closed)

    def walk(t: Term, bound: dict[Variable, None]) -> None:
        spine_head, args = app_spine(t)
        if isinstance(spine_head, FunApp) and spine_head.fn.kind == PLAIN \
                and spine_head.fn.name in defined:
            prefix = t
            chain = [prefix]
            while isinstance(prefix, App):
                prefix = prefix.fn
                chain.append(prefix)
            for c in chain:  # longest application prefix first
                add(c, bound)
            for a in spine_head.args:
                walk(a, bound)
            for a in args:
                walk(a, bound)
            return
        if isinstance(spine_head, Var) and args and spine_head.var in rhs_free \
                and spine_head.var not in bound:
            prefix = t
            chain = [prefix]
            while isinstance(prefix.fn, App):  # keep >= 1 argument
                prefix = prefix.fn
                chain.append(prefix)
            for c in chain:
                add(c, bound)
            for a in args:
                walk(a, bound)
            return
        if isinstance(t, Abs):
            avoid = list(bound) + list(rhs_free)
            from .terms import open_abs
            x, body = open_abs(t, avoid)
            inner = dict(bound)
            inner[x] = None
            walk(body, inner)
            return
        if isinstance(t, App):
            walk(t.fn, bound)
            walk(t.arg, bound)
            return
        if isinstance(t, FunApp):
            for a in t.args:
                walk(a, bound)

    walk(rhs, {})
    return out


def _mark_root(t: Term, afs: AFS) -> Term:
    return mark(t, afs.defined_names)


def dependency_pairs(afs: AFS, spfp_drop: bool = True) -> DPProblem:
    """All dynamic dependency pairs of a completed AFS.

    For SPFP systems the collapsing pairs are dropped (static mode) unless
    spfp_drop is disabled.
    """
    assert afs.completed, "dependency pairs are taken on the completed system"
    defined = afs.defined_names
    pairs: list[DependencyPair] = []
    seen: set[tuple[Term, Term]] = set()

    for idx, rule in enumerate(afs.rules):
        marked_lhs = _mark_root(rule.lhs, afs)
        strict_subs = None
        for cand in candidate_terms(rule.rhs, afs):
            if strict_subs is None:
                strict_subs = strict_subterms_closed(rule.lhs)
            if any(cand == s for s in strict_subs):
                continue  # candidate is a strict subterm of the left-hand side
            pair = (marked_lhs, _mark_root(cand, afs))
            if pair not in seen:
                seen.add(pair)
                pairs.append(DependencyPair(pair[0], pair[1], "candidate", idx))
        lhs_type = type_of(rule.lhs)
        if lhs_type.is_arrow():
            rhead = head(rule.rhs)
            applies = isinstance(rhead, Var) or (
                isinstance(rhead, FunApp) and rhead.fn.kind == PLAIN
                and rhead.fn.name in defined)
            if applies and not isinstance(rule.rhs, Abs):
                avoid = {v.name for v in free_vars(rule.lhs)}
                lhs, rhs = rule.lhs, rule.rhs
                t = lhs_type
                while t.is_arrow():
                    name = fresh_name("y", avoid)
                    avoid.add(name)
                    y = Variable(name, t.left)
                    lhs = App(lhs, Var(y))
                    rhs = App(rhs, Var(y))
                    key = (lhs, rhs)
                    if key not in seen:
                        seen.add(key)
                        pairs.append(DependencyPair(lhs, rhs, "applied-head", idx))
                    t = t.right

    static_mode = False
    if spfp_drop and afs.spfp:
        pairs = [p for p in pairs if not p.collapsing]
        static_mode = True
    return DPProblem(tuple(pairs), afs, static_mode=static_mode)


# tagging --------------------------------------------------------------------


def tag(t: Term, bound: Optional[set[Variable]] = None) -> Term:
    """tag_Z: replace f by f- on functional subterms whose free variables
    meet the set of traversed binders (Z grows under abstractions)."""
    return _tag(t, frozenset(bound or ()))


def _tag(t: Term, z: frozenset[Variable]) -> Term:
    if isinstance(t, (Var, BVar)):
        return t
    if isinstance(t, Abs):
        from .terms import open_abs
        x, body = open_abs(t, z | free_vars(t))
        return lam(x, _tag(body, z | {x}))
    if isinstance(t, App):
        return App(_tag(t.fn, z), _tag(t.arg, z))
    assert isinstance(t, FunApp)
    args = tuple(_tag(a, z) for a in t.args)
    if t.fn.kind == PLAIN and z and (free_vars(t) & z):
        return FunApp(tagged(t.fn), args)
    return FunApp(t.fn, args)


def untag(t: Term) -> Term:
    if isinstance(t, (Var, BVar)):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, untag(t.body), t.hint)
    if isinstance(t, App):
        return App(untag(t.fn), untag(t.arg))
    assert isinstance(t, FunApp)
    fn = untagged(t.fn) if t.fn.kind == TAGGED else t.fn
    return FunApp(fn, tuple(untag(a) for a in t.args))


def untag_rule(f: FunctionSymbol) -> Rule:
    """f-(x1..xn) => f(x1..xn)."""
    assert f.kind == PLAIN
    xs = tuple(Var(Variable(f"x{i + 1}", ty)) for i, ty in enumerate(f.decl.inputs))
    return Rule(FunApp(tagged(f), xs), FunApp(f, xs), origin="untag")


def build_rtag(rules: Sequence[Rule]) -> list[Rule]:
    """Rules with tagged right-hand sides, plus the untag rules for tagged
    symbols that actually occur in some tagged right-hand side."""
    tagged_rules = [Rule(r.lhs, tag(r.rhs), origin=r.origin) for r in rules]
    used: dict[str, FunctionSymbol] = {}
    for r in tagged_rules:
        for sym in _tagged_symbols(r.rhs):
            used.setdefault(sym.name, sym)
    out = list(tagged_rules)
    for name in sorted(used):
        out.append(untag_rule(untagged(used[name])))
    return out


def _tagged_symbols(t: Term) -> Iterable[FunctionSymbol]:
    if isinstance(t, Abs):
        yield from _tagged_symbols(t.body)
    elif isinstance(t, App):
        yield from _tagged_symbols(t.fn)
        yield from _tagged_symbols(t.arg)
    elif isinstance(t, FunApp):
        if t.fn.kind == TAGGED:
            yield t.fn
        for a in t.args:
            yield from _tagged_symbols(a)


def tagged_symbols_below_lambda(terms: Iterable[Term]) -> list[FunctionSymbol]:
    """The tagged versions f- of symbols occurring below an abstraction, in
    the sense of tag_0: collected from tag-images of the given terms."""
    out: dict[str, FunctionSymbol] = {}
    for t in terms:
        for sym in _tagged_symbols(tag(t)):
            out.setdefault(sym.name, sym)
    return [out[name] for name in sorted(out)]

"""AFS representation: rules, validation, completion and classification."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .terms import (
    Term, Var, Abs, App, FunApp, Variable, FunctionSymbol,
    Arrow, type_of, free_vars, app_spine, is_beta_normal,
    fresh_name, term_text, PLAIN, instantiate,
)


class IllegalLhs(Exception):
    """A rule violates the required left-hand side / rule shape."""


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    origin: str = "user"  # user | completion | extension-R+ | untag

    def __str__(self) -> str:
        return f"{term_text(self.lhs)} => {term_text(self.rhs)}"


def lhs_head_symbol(lhs: Term) -> Optional[FunctionSymbol]:
    head, _ = app_spine(lhs)
    if isinstance(head, FunApp):
        return head.fn
    return None


def validate_rule(rule: Rule, line: int = 0, col: int = 0) -> None:
    """Checks the rule shape contract; raises IllegalLhs or lets IllTyped
    propagate from typing."""
    lt = type_of(rule.lhs)
    rt = type_of(rule.rhs)
    if lt != rt:
        raise IllegalLhs(f"rule sides have different types ({lt} vs {rt}): {rule}")
    if not (free_vars(rule.rhs) <= free_vars(rule.lhs)):
        extra = ", ".join(sorted(v.name for v in free_vars(rule.rhs) - free_vars(rule.lhs)))
        raise IllegalLhs(f"right-hand side uses variables not in the left-hand side: {extra}")
    head, _ = app_spine(rule.lhs)
    if not isinstance(head, FunApp):
        raise IllegalLhs(f"left-hand side must be headed by a function symbol: {term_text(rule.lhs)}")
    if head.fn.kind != PLAIN:
        raise IllegalLhs("left-hand sides may only use signature symbols")
    if not is_beta_normal(rule.lhs):
        raise IllegalLhs(f"left-hand side contains a beta-redex: {term_text(rule.lhs)}")
    if not is_beta_normal(rule.rhs):
        # the dependency pair analysis assumes beta-normal right-hand sides;
        # nonconforming input is rejected rather than transformed
        raise IllegalLhs(f"right-hand side contains a beta-redex: {term_text(rule.rhs)}")


@dataclass(frozen=True)
class AFS:
    signature: tuple[FunctionSymbol, ...]
    rules: tuple[Rule, ...]
    local: bool = False
    base_output: bool = False
    pfp: bool = False
    spfp: bool = False
    completed: bool = False

    @property
    def defined_names(self) -> frozenset[str]:
        names = set()
        for rule in self.rules:
            sym = lhs_head_symbol(rule.lhs)
            if sym is not None:
                names.add(sym.name)
        return frozenset(names)

    @property
    def defined(self) -> tuple[FunctionSymbol, ...]:
        names = self.defined_names
        return tuple(f for f in self.signature if f.name in names)

    @property
    def constructors(self) -> tuple[FunctionSymbol, ...]:
        names = self.defined_names
        return tuple(f for f in self.signature if f.name not in names)

    def symbol(self, name: str) -> FunctionSymbol:
        for f in self.signature:
            if f.name == name:
                return f
        raise KeyError(name)


def complete(afs: AFS) -> AFS:
    """Add, for each rule l => \\x1..xn. r with r not an abstraction, the
    applied variants l x1 => \\x2..xn. r, ..., l x1 .. xn => r.

    Idempotent; original rules are preserved."""
    existing = {(r.lhs, r.rhs) for r in afs.rules}
    new_rules = list(afs.rules)
    for rule in afs.rules:
        if not isinstance(rule.rhs, Abs):
            continue
        avoid = {v.name for v in free_vars(rule.lhs) | free_vars(rule.rhs)}
        lhs, rhs = rule.lhs, rule.rhs
        while isinstance(rhs, Abs):
            name = fresh_name(rhs.hint or "x", avoid)
            avoid.add(name)
            x = Variable(name, rhs.var_type)
            lhs = App(lhs, Var(x))
            rhs = instantiate(rhs.body, Var(x))
            if (lhs, rhs) not in existing:
                existing.add((lhs, rhs))
                new_rules.append(Rule(lhs, rhs, origin="completion"))
    return replace(afs, rules=tuple(new_rules), completed=True)


def _left_linear(lhs: Term) -> bool:
    counts: dict[Variable, int] = {}

    def walk(t: Term) -> None:
        if isinstance(t, Var):
            counts[t.var] = counts.get(t.var, 0) + 1
        elif isinstance(t, Abs):
            walk(t.body)
        elif isinstance(t, App):
            walk(t.fn)
            walk(t.arg)
        elif isinstance(t, FunApp):
            for a in t.args:
                walk(a)

    walk(lhs)
    return all(c == 1 for c in counts.values())


def _fully_extended(lhs: Term) -> bool:
    """No free variable of the left-hand side occurs below an abstraction."""

    def walk(t: Term, under_abs: bool) -> bool:
        if isinstance(t, Var):
            return not under_abs
        if isinstance(t, Abs):
            return walk(t.body, True)
        if isinstance(t, App):
            return walk(t.fn, under_abs) and walk(t.arg, under_abs)
        if isinstance(t, FunApp):
            return all(walk(a, under_abs) for a in t.args)
        return True  # BVar

    return walk(lhs, False)


def _functional_vars(t: Term) -> frozenset[Variable]:
    return frozenset(v for v in free_vars(t) if v.type.is_arrow())


def _has_defined_call_under_binder(rhs: Term, defined: frozenset[str]) -> bool:
    """True if rhs has a subterm \\x. C[f(...)] with f defined and the bound
    variable free in the f-subterm."""

    def scan_abs_body(body: Term, depth: int) -> bool:
        # look for FunApp with a defined head whose subtree references the
        # binder at `depth` (index == depth at that point of the traversal)
        def uses_binder(t: Term, d: int) -> bool:
            from .terms import BVar
            if isinstance(t, BVar):
                return t.index == d
            if isinstance(t, Abs):
                return uses_binder(t.body, d + 1)
            if isinstance(t, App):
                return uses_binder(t.fn, d) or uses_binder(t.arg, d)
            if isinstance(t, FunApp):
                return any(uses_binder(a, d) for a in t.args)
            return False

        def walk(t: Term, d: int) -> bool:
            if isinstance(t, FunApp):
                if t.fn.name in defined and t.fn.kind == PLAIN and uses_binder(t, d):
                    return True
                return any(walk(a, d) for a in t.args)
            if isinstance(t, Abs):
                return walk(t.body, d + 1)
            if isinstance(t, App):
                return walk(t.fn, d) or walk(t.arg, d)
            return False

        return walk(body, depth)

    def walk(t: Term) -> bool:
        if isinstance(t, Abs):
            if scan_abs_body(t.body, 0):
                return True
            return walk(t.body)
        if isinstance(t, App):
            return walk(t.fn) or walk(t.arg)
        if isinstance(t, FunApp):
            return any(walk(a) for a in t.args)
        return False

    return walk(rhs)


def classify(afs: AFS) -> AFS:
    """Fill the derived flags: local, base_output, pfp, spfp."""
    local = all(_left_linear(r.lhs) and _fully_extended(r.lhs) for r in afs.rules)
    base_output = all(f.decl.output.is_base() for f in afs.signature)
    defined = afs.defined_names

    pfp = True
    for rule in afs.rules:
        head, applied = app_spine(rule.lhs)
        assert isinstance(head, FunApp)
        direct_args = list(head.args) + applied
        direct_var_args = {a.var for a in direct_args if isinstance(a, Var)}
        for fv in _functional_vars(rule.rhs):
            if fv not in direct_var_args:
                pfp = False
                break
        if not pfp:
            break

    spfp = (
        pfp
        and base_output
        and not any(_has_defined_call_under_binder(r.rhs, defined) for r in afs.rules)
    )
    return replace(afs, local=local, base_output=base_output, pfp=pfp, spfp=spfp)


def build_rplus(afs: AFS) -> tuple[Rule, ...]:
    """R+ : the rules plus applied variants l x1..xk => r x1..xk for rules
    whose right-hand side is not an abstraction and whose type permits it."""
    out = list(afs.rules)
    for rule in afs.rules:
        if isinstance(rule.rhs, Abs):
            continue
        t = type_of(rule.lhs)
        avoid = {v.name for v in free_vars(rule.lhs)}
        lhs, rhs = rule.lhs, rule.rhs
        while isinstance(t, Arrow):
            name = fresh_name("x", avoid)
            avoid.add(name)
            x = Variable(name, t.left)
            lhs = App(lhs, Var(x))
            rhs = App(rhs, Var(x))
            out.append(Rule(lhs, rhs, origin="extension-R+"))
            t = t.right
    return tuple(out)

"""Argument functions plus a recursive path ordering on mu-transformed terms.

Applications and abstractions become function symbols @{s,t} and L{s,t}; the
mandatory precedence places user symbols above @, every @ above every L,
and every L above the fresh constants, with @{s,t} above the @ent of strict
subtypes.  Status is lexicographic left-to-right.  Binders are opened with
rigid atoms that nothing else dominates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from ..afs import Rule, lhs_head_symbol
from ..terms import (
    Term, Var, BVar, Abs, App, FunApp, Variable, FunctionSymbol, SimpleType,
    Arrow, TypeDecl, type_of, free_vars, type_text, type_subterms,
    PLAIN, MARKED, TAGGED, FRESH, EXT, app_spine, marked,
)
from .constraints import ConstraintSet


# --------------------------------------------------------------------------
# mu-terms

USER = "user"   # signature symbols (plain / marked / tagged / filtered)
APPK = "app"
LAMK = "lam"
CONSTK = "const"  # fresh constants c_sigma
PAIRK = "pair"    # the pairing symbols from the usable-rules obligations


@dataclass(frozen=True)
class MSym:
    cat: str
    name: str            # display name, or type text for app/lam/const
    tpair: Optional[tuple[str, str]] = None  # (sigma, tau) for app/lam

    def __str__(self) -> str:
        if self.cat == APPK:
            return "@{%s,%s}" % self.tpair
        if self.cat == LAMK:
            return "L{%s,%s}" % self.tpair
        return self.name


@dataclass(frozen=True)
class MTerm:
    pass


@dataclass(frozen=True)
class MVar(MTerm):
    name: str


@dataclass(frozen=True)
class MAtom(MTerm):
    ident: int


@dataclass(frozen=True)
class MBind(MTerm):
    body: MTerm  # contains MIdx nodes for the binder


@dataclass(frozen=True)
class MIdx(MTerm):
    index: int


@dataclass(frozen=True)
class MFun(MTerm):
    sym: MSym
    args: tuple[MTerm, ...] = ()


def mu(t: Term, binders: tuple[SimpleType, ...] = ()) -> MTerm:
    if isinstance(t, Var):
        return MVar(f"{t.var.name}:{type_text(t.var.type)}")
    if isinstance(t, BVar):
        return MIdx(t.index)
    if isinstance(t, Abs):
        ty = type_of(t, binders)
        assert isinstance(ty, Arrow)
        sym = MSym(LAMK, f"L{{{type_text(ty.left)},{type_text(ty.right)}}}",
                   (type_text(ty.left), type_text(ty.right)))
        return MFun(sym, (MBind(mu(t.body, binders + (t.var_type,))),))
    if isinstance(t, App):
        fty = type_of(t.fn, binders)
        assert isinstance(fty, Arrow)
        sym = MSym(APPK, f"@{{{type_text(fty.left)},{type_text(fty.right)}}}",
                   (type_text(fty.left), type_text(fty.right)))
        return MFun(sym, (mu(t.fn, binders), mu(t.arg, binders)))
    assert isinstance(t, FunApp)
    if t.fn.kind == FRESH:
        return MFun(MSym(CONSTK, t.fn.display), ())
    if t.fn.kind == EXT and t.fn.name.startswith("!p{"):
        return MFun(MSym(PAIRK, t.fn.display), tuple(mu(a, binders) for a in t.args))
    return MFun(MSym(USER, t.fn.display), tuple(mu(a, binders) for a in t.args))


def _open_bind(b: MBind, atom: MAtom) -> MTerm:
    def inst(t: MTerm, depth: int) -> MTerm:
        if isinstance(t, MIdx):
            return atom if t.index == depth else t
        if isinstance(t, MBind):
            return MBind(inst(t.body, depth + 1))
        if isinstance(t, MFun):
            return MFun(t.sym, tuple(inst(a, depth) for a in t.args))
        return t

    return inst(b.body, 0)


def mvars(t: MTerm) -> frozenset[str]:
    if isinstance(t, MVar):
        return frozenset((t.name,))
    if isinstance(t, MBind):
        return mvars(t.body)
    if isinstance(t, MFun):
        out: frozenset[str] = frozenset()
        for a in t.args:
            out |= mvars(a)
        return out
    return frozenset()


def matoms(t: MTerm) -> frozenset[int]:
    if isinstance(t, MAtom):
        return frozenset((t.ident,))
    if isinstance(t, MBind):
        return matoms(t.body)
    if isinstance(t, MFun):
        out: frozenset[int] = frozenset()
        for a in t.args:
            out |= matoms(a)
        return out
    return frozenset()


# --------------------------------------------------------------------------
# precedence


class Precedence:
    """User-symbol precedence facts over the mandatory base ordering."""

    def __init__(self, facts: Sequence[tuple[str, str]] = (), frozen: bool = False):
        self.above: dict[str, set[str]] = {}
        self.frozen = frozen
        for a, b in facts:
            if not self._add(a, b):
                raise ValueError(f"cyclic precedence: {a} > {b}")

    def facts(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, bs in self.above.items() for b in bs)

    def _reachable(self, a: str, b: str) -> bool:
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                return True
            for y in self.above.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def _add(self, a: str, b: str) -> bool:
        if a == b or self._reachable(b, a):
            return False
        self.above.setdefault(a, set()).add(b)
        return True

    def holds(self, f: MSym, g: MSym) -> bool:
        """The mandatory facts plus the user facts (transitively)."""
        user_like = (USER, PAIRK)
        if f.cat in user_like and g.cat in (APPK, LAMK, CONSTK):
            return True
        if f.cat == APPK:
            if g.cat in (LAMK, CONSTK):
                return True
            if g.cat == APPK:
                return _strict_subtype(g.tpair, f.tpair)
            return False
        if f.cat == LAMK:
            return g.cat == CONSTK
        if f.cat in user_like and g.cat in user_like:
            return f.name != g.name and self._reachable(f.name, g.name)
        return False

    def request(self, f: MSym, g: MSym) -> bool:
        """In search mode, try to add f > g as a user fact."""
        if self.holds(f, g):
            return True
        if self.frozen:
            return False
        if f.cat != USER or g.cat != USER or f.name == g.name:
            return False
        return self._add(f.name, g.name)


def _strict_subtype(small: Optional[tuple[str, str]], big: Optional[tuple[str, str]]) -> bool:
    if small is None or big is None:
        return False
    from ..parser import parse_type_text
    s = Arrow(parse_type_text(small[0]), parse_type_text(small[1]))
    b = Arrow(parse_type_text(big[0]), parse_type_text(big[1]))
    return s != b and any(s == sub for sub in type_subterms(b))


# --------------------------------------------------------------------------
# the ordering


class _Gas:
    __slots__ = ("n",)

    def __init__(self, n: int):
        self.n = n

    def tick(self) -> bool:
        self.n -= 1
        return self.n > 0


def _geq(s: MTerm, t: MTerm, prec: Precedence, counter: list[int], gas: _Gas) -> bool:
    return s == t or _greater(s, t, prec, counter, gas)


def _greater(s: MTerm, t: MTerm, prec: Precedence, counter: list[int], gas: _Gas) -> bool:
    if not gas.tick():
        return False
    if isinstance(s, (MVar, MAtom, MIdx)):
        return False
    if isinstance(s, MBind):
        counter[0] += 1
        return _greater(_open_bind(s, MAtom(counter[0])), t, prec, counter, gas)
    assert isinstance(s, MFun)
    if isinstance(t, MVar):
        return t.name in mvars(s)
    if isinstance(t, MAtom):
        return t.ident in matoms(s)
    if isinstance(t, MBind):
        counter[0] += 1
        return _greater(s, _open_bind(t, MAtom(counter[0])), prec, counter, gas)
    # subterm clause
    for arg in s.args:
        if isinstance(arg, MBind):
            counter[0] += 1
            if _geq(_open_bind(arg, MAtom(counter[0])), t, prec, counter, gas):
                return True
        elif _geq(arg, t, prec, counter, gas):
            return True
    if isinstance(t, MFun):
        if s.sym == t.sym and len(s.args) == len(t.args):
            # lexicographic status, left to right
            for i, (a, b) in enumerate(zip(s.args, t.args)):
                if a == b:
                    continue
                if isinstance(a, MBind) and isinstance(b, MBind):
                    counter[0] += 1
                    atom = MAtom(counter[0])
                    first = _greater(_open_bind(a, atom), _open_bind(b, atom), prec, counter, gas)
                else:
                    first = _greater(a, b, prec, counter, gas)
                if not first:
                    return False
                return all(_greater(s, tb, prec, counter, gas) for tb in t.args[i + 1:])
            return False
        if prec.request(s.sym, t.sym):
            return all(_greater(s, tb, prec, counter, gas) for tb in t.args)
    return False


def rpo_greater(s: MTerm, t: MTerm, prec: Precedence, gas_limit: int = 200_000) -> bool:
    return _greater(s, t, prec, [0], _Gas(gas_limit))


def rpo_geq(s: MTerm, t: MTerm, prec: Precedence, gas_limit: int = 200_000) -> bool:
    return _geq(s, t, prec, [0], _Gas(gas_limit))


# --------------------------------------------------------------------------
# argument functions


@dataclass(frozen=True)
class ArgFunRPO:
    """Argument function table plus precedence facts plus strict pair set."""

    pi: dict  # display name -> template Term over the symbol's argument slots
    precedence: tuple[tuple[str, str], ...]
    strict: tuple[int, ...]


def template_slots(f: FunctionSymbol) -> tuple[Variable, ...]:
    return tuple(Variable(f"x{i + 1}", ty) for i, ty in enumerate(f.decl.inputs))


def apply_argfun(pi: dict, t: Term) -> Term:
    """The homomorphic extension of the argument function table."""
    if isinstance(t, (Var, BVar)):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, apply_argfun(pi, t.body), t.hint)
    if isinstance(t, App):
        return App(apply_argfun(pi, t.fn), apply_argfun(pi, t.arg))
    assert isinstance(t, FunApp)
    args = tuple(apply_argfun(pi, a) for a in t.args)
    template = pi.get(t.fn.display)
    if template is None:
        return FunApp(t.fn, args)
    slots = template_slots(t.fn)
    return _subst_slots(template, dict(zip(slots, args)))


def _subst_slots(t: Term, mapping: dict[Variable, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.var, t)
    if isinstance(t, BVar):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, _subst_slots(t.body, mapping), t.hint)
    if isinstance(t, App):
        return App(_subst_slots(t.fn, mapping), _subst_slots(t.arg, mapping))
    assert isinstance(t, FunApp)
    return FunApp(t.fn, tuple(_subst_slots(a, mapping) for a in t.args))


def pi_options(f: FunctionSymbol, in_s: bool, rules: Sequence[Rule]) -> list[Term]:
    """Candidate templates for one symbol: identity, untag/unmark images,
    rule right-hand sides over variable arguments, collapses, and kept
    subsets (a fresh primed symbol)."""
    slots = template_slots(f)
    slot_terms = tuple(Var(x) for x in slots)
    identity = FunApp(f, slot_terms)
    out: list[Term] = [identity]

    def s_ok(t: Term) -> bool:
        return not in_s or free_vars(t) == set(slots)

    base = FunctionSymbol(f.name, f.decl, PLAIN)
    if f.kind == TAGGED:
        cand = FunApp(base, slot_terms)
        if s_ok(cand):
            out.append(cand)
        is_defined = any((lhs_head_symbol(r.lhs) or base).name == f.name
                         and lhs_head_symbol(r.lhs) is not None for r in rules)
        cand2 = FunApp(marked(base), slot_terms)
        if is_defined and s_ok(cand2):
            out.append(cand2)
    if f.kind == MARKED:
        cand = FunApp(base, slot_terms)
        if s_ok(cand):
            out.append(cand)

    # a rule f(x1..xn) => r with distinct variable arguments suggests r
    for rule in rules:
        head, applied = app_spine(rule.lhs)
        if applied or not isinstance(head, FunApp):
            continue
        sym = head.fn
        if sym.name != f.name:
            continue
        if sym.kind == f.kind or (f.kind == MARKED and sym.kind == PLAIN):
            if all(isinstance(a, Var) for a in head.args) and \
                    len({a.var for a in head.args}) == len(head.args):
                body = _subst_slots(rule.rhs, {a.var: Var(s) for a, s in zip(head.args, slots)})
                if f.kind == MARKED:
                    body2 = body
                    h2, ap2 = app_spine(body2)
                    if isinstance(h2, FunApp) and h2.fn.kind == PLAIN and not ap2:
                        body2 = FunApp(marked(h2.fn), h2.args)
                        if s_ok(body2):
                            out.append(body2)
                if s_ok(body):
                    out.append(body)

    # collapse to one argument of the output type
    for i, ty in enumerate(f.decl.inputs):
        if ty == f.decl.output:
            cand = Var(slots[i])
            if s_ok(cand):
                out.append(cand)

    # keep a proper subset of arguments under a fresh primed symbol
    if f.decl.arity > 1 and not in_s:
        n = f.decl.arity
        for mask in range(2 ** n - 2, -1, -1):
            kept = [i for i in range(n) if mask & (1 << i)]
            if len(kept) == n:
                continue
            g = FunctionSymbol(
                f.display + "'" + "".join(str(i + 1) for i in kept),
                TypeDecl(tuple(f.decl.inputs[i] for i in kept), f.decl.output),
                EXT,
            )
            out.append(FunApp(g, tuple(Var(slots[i]) for i in kept)))

    dedup: list[Term] = []
    for t in out:
        if t not in dedup:
            dedup.append(t)
    return dedup


def _constraint_list(cs: ConstraintSet) -> list[tuple[str, int, Term, Term]]:
    out: list[tuple[str, int, Term, Term]] = []
    for w in cs.weak:
        out.append(("weak", -1, w.lhs, w.rhs))
    for c in cs.strict_candidates:
        out.append(("cand", c.pair_index, c.lhs, c.rhs))
    return out


def orient(cs: ConstraintSet, pi: dict, prec: Precedence) -> Optional[tuple[int, ...]]:
    """Try to orient all constraints (weak at least weakly, candidates at
    least weakly, >= 1 candidate strictly); returns the strict indices."""
    for w in cs.weak:
        if not rpo_geq(mu(apply_argfun(pi, w.lhs)), mu(apply_argfun(pi, w.rhs)), prec):
            return None
    strict = []
    for c in cs.strict_candidates:
        lhs = mu(apply_argfun(pi, c.lhs))
        rhs = mu(apply_argfun(pi, c.rhs))
        if rpo_greater(lhs, rhs, prec):
            strict.append(c.pair_index)
        elif not rpo_geq(lhs, rhs, prec):
            return None
    if not strict:
        return None
    return tuple(strict)


def search_rpo(cs: ConstraintSet, budget: float = 10.0) -> Optional[ArgFunRPO]:
    """Search over argument functions (iterative deepening on the number of
    non-identity entries) with greedy precedence accumulation."""
    from .poly_search import occurring_symbols

    deadline = time.monotonic() + budget
    symbols = occurring_symbols(cs)
    s_names = {f.display for f in cs.S}
    rules = list(cs.afs.rules)
    options = {f.display: pi_options(f, f.display in s_names, rules) for f in symbols}
    names = [f.display for f in symbols]

    def attempt(pi: dict) -> Optional[ArgFunRPO]:
        prec = Precedence()
        strict = orient(cs, pi, prec)
        if strict is None:
            return None
        return ArgFunRPO(dict(pi), tuple(prec.facts()), strict)

    # tier 0: identity everywhere; tier 1: the "suggested" option per symbol
    # (untag/unmark/rule image), alone and combined; then pairs of changes
    base_pi: dict = {}
    found = attempt(base_pi)
    if found:
        return found

    suggested: dict = {}
    for name in names:
        opts = options[name]
        if len(opts) > 1:
            suggested[name] = opts[1]
    if suggested:
        found = attempt(suggested)
        if found:
            return found

    for depth in (1, 2):
        if time.monotonic() > deadline:
            return None
        found = _dfs_pi(names, options, {}, depth, attempt, deadline, suggested)
        if found:
            return found
    return None


def _dfs_pi(names, options, pi, depth, attempt, deadline, suggested, start=0):
    if time.monotonic() > deadline:
        return None
    result = attempt(pi) if pi else None
    if result:
        return result
    if depth == 0:
        return None
    for i in range(start, len(names)):
        name = names[i]
        for opt in options[name][1:]:
            if time.monotonic() > deadline:
                return None
            pi2 = dict(pi)
            pi2[name] = opt
            # also combine with the suggested assignments of other symbols
            found = _dfs_pi(names, options, pi2, depth - 1, attempt, deadline,
                            suggested, i + 1)
            if found:
                return found
            merged = dict(suggested)
            merged.update(pi2)
            if merged != pi2:
                found = attempt(merged)
                if found:
                    return found
    return None


def check_argfun_rpo(cs: ConstraintSet, cert: ArgFunRPO) -> tuple[bool, str]:
    """Re-run the ordering decisions with the certificate's frozen facts."""
    try:
        prec = Precedence(cert.precedence, frozen=True)
    except ValueError as exc:
        return False, str(exc)
    s_names = {f.display for f in cs.S}
    for name, template in cert.pi.items():
        if name in s_names:
            sym = next((f for f in cs.S if f.display == name), None)
            if sym is not None:
                slots = set(template_slots(sym))
                if free_vars(template) != slots:
                    return False, f"pi({name}) violates the protected-argument condition"
    if not cert.strict:
        return False, "no pair is claimed strict"
    claimed = set(cert.strict)
    cand_ids = {c.pair_index for c in cs.strict_candidates}
    if not claimed <= cand_ids:
        return False, "strict set mentions pairs outside the constraint set"
    for w in cs.weak:
        if not rpo_geq(mu(apply_argfun(cert.pi, w.lhs)), mu(apply_argfun(cert.pi, w.rhs)), prec):
            return False, f"weak constraint not oriented: {w.label}"
    for c in cs.strict_candidates:
        lhs = mu(apply_argfun(cert.pi, c.lhs))
        rhs = mu(apply_argfun(cert.pi, c.rhs))
        if c.pair_index in claimed:
            if not rpo_greater(lhs, rhs, prec):
                return False, f"pair {c.pair_index} is not strictly oriented"
        else:
            if not rpo_geq(lhs, rhs, prec):
                return False, f"pair {c.pair_index} is not weakly oriented"
    return True, ""

"""Weakly monotonic interpretations over the naturals with 0 and max.

Terms are interpreted symbolically; application uses the max construction,
the per-type constants are fixed to zero.  Comparison normalizes both sides
to a max of sums of monomials over base slots and applied functional slots,
then decides coverage branch by branch.  The comparator is sound but
incomplete; a bounded total-order case split handles the interplay between
max branches and monotone functional slots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..terms import (
    Term, Var, BVar, Abs, App, FunApp, Variable, FunctionSymbol, SimpleType,
    Arrow, type_of, free_vars, open_abs, type_text, FRESH, EXT,
)


class Unsupported(Exception):
    """The symbolic machinery cannot represent this comparison."""


# --------------------------------------------------------------------------
# expression language (bodies of interpretation templates)


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class SlotRef(Expr):
    index: int


@dataclass(frozen=True)
class AppSlot(Expr):
    index: int
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Add(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class Mul(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class MaxE(Expr):
    parts: tuple[Expr, ...]


@dataclass(frozen=True)
class PolyFun:
    """An interpretation template: slot types, then a body over the slots."""

    slot_types: tuple[SimpleType, ...]
    body: Expr


def expr_weight(e: Expr) -> int:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, SlotRef):
        return 1
    if isinstance(e, AppSlot):
        return 1 + sum(expr_weight(a) for a in e.args)
    if isinstance(e, (Add, MaxE)):
        return sum(expr_weight(p) for p in e.parts)
    assert isinstance(e, Mul)
    return 1 + sum(expr_weight(p) for p in e.parts)


def expr_text(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, SlotRef):
        return f"x{e.index + 1}"
    if isinstance(e, AppSlot):
        args = ", ".join(expr_text(a) for a in e.args)
        return f"x{e.index + 1}({args})"
    if isinstance(e, Add):
        return " + ".join(expr_text(p) for p in e.parts)
    if isinstance(e, Mul):
        parts = []
        for p in e.parts:
            s = expr_text(p)
            if isinstance(p, (Add, MaxE)):
                s = f"({s})"
            parts.append(s)
        return "*".join(parts)
    assert isinstance(e, MaxE)
    return "max(" + ", ".join(expr_text(p) for p in e.parts) + ")"


# --------------------------------------------------------------------------
# normal forms
#
# NF       := tuple of branches (semantic max)
# branch   := tuple of monomials (semantic sum), canonically sorted
# monomial := (coeff, factors) with factors a sorted tuple
# factor   := ("slot", sid) | ("atom", sid, args) with args a tuple of branches

NF = tuple
Branch = tuple
Monomial = tuple


def _mono_key(m: Monomial):
    return (m[1], m[0])


def _canon_branch(monos) -> Branch:
    merged: dict[tuple, int] = {}
    for coeff, factors in monos:
        if coeff:
            merged[factors] = merged.get(factors, 0) + coeff
    return tuple(sorted(((c, f) for f, c in merged.items() if c), key=_mono_key))


def nf_const(n: int) -> NF:
    return (_canon_branch([(n, ())]),) if n else ((),)


def nf_slot(sid) -> NF:
    return (((1, (("slot", sid),)),),)


def nf_atom(sid, arg_nfs: Sequence[NF]) -> NF:
    # distribute max out of atom arguments (sound and complete over a total
    # order with monotone slots)
    branches = []
    def build(i: int, chosen: tuple):
        if i == len(arg_nfs):
            branches.append(((1, (("atom", sid, chosen),)),))
            return
        for b in arg_nfs[i]:
            build(i + 1, chosen + (b,))
    build(0, ())
    return _canon_nf(branches)


def _branch_add(a: Branch, b: Branch) -> Branch:
    return _canon_branch(list(a) + list(b))


def _branch_mul(a: Branch, b: Branch) -> Branch:
    out = []
    for ca, fa in a:
        for cb, fb in b:
            out.append((ca * cb, tuple(sorted(fa + fb))))
    return _canon_branch(out)


def _canon_nf(branches) -> NF:
    uniq = sorted(set(tuple(b) for b in branches))
    if len(uniq) <= 1:
        return tuple(uniq) if uniq else ((),)
    if len(uniq) > 24:  # keep the canonicalization linear for huge maxes
        return tuple(uniq)
    # drop branches plainly subsumed by another (every monomial occurs there
    # with at least the same coefficient)
    dicts = [{f: k for k, f in b} for b in uniq]
    lens = [len(b) for b in uniq]
    kept = []
    for i, b in enumerate(uniq):
        dominated = False
        for j in range(len(uniq)):
            if i == j or lens[j] < lens[i]:
                continue
            cd = dicts[j]
            if all(cd.get(f, 0) >= k for k, f in b):
                bd = dicts[i]
                c = uniq[j]
                if not all(bd.get(f, 0) >= k for k, f in c) or j < i:
                    dominated = True
                    break
        if not dominated:
            kept.append(b)
    return tuple(kept) if kept else ((),)


_NF_LIMIT = 64


def _guard(nf: NF) -> NF:
    if len(nf) > _NF_LIMIT or any(len(b) > _NF_LIMIT for b in nf):
        raise Unsupported("normal form too large")
    return nf


def nf_add(a: NF, b: NF) -> NF:
    return _guard(_canon_nf([_branch_add(x, y) for x in a for y in b]))


def nf_mul(a: NF, b: NF) -> NF:
    return _guard(_canon_nf([_branch_mul(x, y) for x in a for y in b]))


def nf_max(a: NF, b: NF) -> NF:
    return _guard(_canon_nf(list(a) + list(b)))


NF_ZERO: NF = ((),)


# --------------------------------------------------------------------------
# semantic values


class SemVal:
    pass


@dataclass(frozen=True)
class SBase(SemVal):
    nf: NF


@dataclass
class SFun(SemVal):
    type: SimpleType  # an arrow type
    fn: Callable[[SemVal], SemVal]

    def __call__(self, arg: SemVal) -> SemVal:
        return self.fn(arg)


def zero_sem(ty: SimpleType) -> SemVal:
    if ty.is_base():
        return SBase(NF_ZERO)
    assert isinstance(ty, Arrow)
    return SFun(ty, lambda _arg: zero_sem(ty.right))


def flat_sem(v: SemVal) -> NF:
    """Apply a semantic value to zeros down to base."""
    while isinstance(v, SFun):
        v = v(zero_sem(v.type.left))
    assert isinstance(v, SBase)
    return v.nf


def sem_max(v: SemVal, y: NF) -> SemVal:
    if isinstance(v, SBase):
        return SBase(nf_max(v.nf, y))
    return SFun(v.type, lambda arg, v=v, y=y: sem_max(v(arg), y))


def sem_join(a: SemVal, b: SemVal) -> SemVal:
    """Pointwise maximum of two semantic values of the same type."""
    if isinstance(a, SBase) and isinstance(b, SBase):
        return SBase(nf_max(a.nf, b.nf))
    assert isinstance(a, SFun) and isinstance(b, SFun)
    return SFun(a.type, lambda arg, a=a, b=b: sem_join(a(arg), b(arg)))


def slot_sem(sid, ty: SimpleType) -> SemVal:
    """The semantic value of an opaque slot of the given type."""
    if ty.is_base():
        return SBase(nf_slot(sid))

    def apply_chain(collected: tuple, t: SimpleType) -> SemVal:
        if t.is_base():
            raise AssertionError
        def fn(arg: SemVal, collected=collected, t=t) -> SemVal:
            if isinstance(arg, SFun):
                raise Unsupported("functional argument to an opaque slot")
            nxt = collected + (arg.nf,)
            if t.right.is_base():
                return SBase(nf_atom(sid, nxt))
            return apply_chain(nxt, t.right)
        return SFun(t, fn)

    return apply_chain((), ty)


# --------------------------------------------------------------------------
# evaluating templates and interpreting terms


def apply_polyfun(fun: PolyFun, args: Sequence[SemVal], out_type: SimpleType) -> SemVal:
    """Apply a template: curry until all slots are filled, then evaluate."""
    n = len(fun.slot_types)
    if len(args) == n:
        return _eval_body(fun.body, tuple(args), out_type)
    assert len(args) < n
    assert isinstance(out_type, Arrow)
    return SFun(out_type,
                lambda a, args=tuple(args): apply_polyfun(fun, args + (a,), out_type.right))


def _eval_body(e: Expr, env: tuple[SemVal, ...], out_type: SimpleType) -> SemVal:
    # bodies always produce base values; out_type is base once fully applied
    nf = _eval_expr(e, env)
    return SBase(nf)


def _eval_expr(e: Expr, env: tuple[SemVal, ...]) -> NF:
    if isinstance(e, Const):
        return nf_const(e.value)
    if isinstance(e, SlotRef):
        v = env[e.index]
        if isinstance(v, SFun):
            raise Unsupported("bare functional slot in template body")
        return v.nf
    if isinstance(e, AppSlot):
        v = env[e.index]
        if isinstance(v, SBase):
            raise Unsupported("applying a base slot")
        for a in e.args:
            v = v(SBase(_eval_expr(a, env)))
        if isinstance(v, SFun):
            raise Unsupported("underapplied functional slot in template")
        return v.nf
    if isinstance(e, Add):
        out = NF_ZERO
        for p in e.parts:
            out = nf_add(out, _eval_expr(p, env))
        return out
    if isinstance(e, Mul):
        out = nf_const(1)
        for p in e.parts:
            out = nf_mul(out, _eval_expr(p, env))
        return out
    assert isinstance(e, MaxE)
    out = NF_ZERO
    for p in e.parts:
        out = nf_max(out, _eval_expr(p, env))
    return out


def slot_types_for(f: FunctionSymbol) -> tuple[SimpleType, ...]:
    """Template slots: the declared inputs plus the curried output arguments."""
    return tuple(f.decl.inputs) + f.decl.output.argument_types()


class Interpreter:
    """Interprets terms under an assignment of templates to symbols."""

    def __init__(self, assign: dict[str, PolyFun]):
        self.assign = assign

    def interp(self, t: Term, val: dict[Variable, SemVal]) -> SemVal:
        if isinstance(t, Var):
            return val[t.var]
        if isinstance(t, BVar):
            raise Unsupported("dangling bound variable")
        if isinstance(t, Abs):
            x, body = open_abs(t, list(val.keys()))
            ty = type_of(t)

            def fn(arg: SemVal, x=x, body=body) -> SemVal:
                inner = dict(val)
                inner[x] = arg
                return self.interp(body, inner)

            return SFun(ty, fn)
        if isinstance(t, App):
            f = self.interp(t.fn, val)
            a = self.interp(t.arg, val)
            if not isinstance(f, SFun):
                raise Unsupported("application of a base value")
            return sem_max(f(a), flat_sem(a))
        assert isinstance(t, FunApp)
        f = t.fn
        if f.kind == FRESH:
            return zero_sem(f.decl.output)
        if f.kind == EXT and f.name.startswith("!p{"):
            args = [self.interp(a, val) for a in t.args]
            return sem_join(args[0], args[1])
        fun = self.assign.get(f.display)
        if fun is None:
            raise Unsupported(f"no interpretation for {f.display}")
        args = [self.interp(a, val) for a in t.args]
        return apply_polyfun(fun, args, f.decl.output)


def valuation_for(terms: Sequence[Term]) -> dict[Variable, SemVal]:
    vs: set[Variable] = set()
    for t in terms:
        vs |= free_vars(t)
    return {v: slot_sem(f"v:{v.name}:{type_text(v.type)}", v.type)
            for v in sorted(vs, key=lambda v: (v.name, type_text(v.type)))}


def sides_to_nf(lhs: Term, rhs: Term, interp: Interpreter) -> tuple[NF, NF]:
    """Interpret both sides under a shared valuation; eta-expand functional
    comparisons with shared fresh slots."""
    val = valuation_for([lhs, rhs])
    lv = interp.interp(lhs, val)
    rv = interp.interp(rhs, val)
    i = 0
    while isinstance(lv, SFun):
        if not isinstance(rv, SFun):
            raise Unsupported("sides of different functional depth")
        arg = slot_sem(f"eta:{i}", lv.type.left)
        lv = lv(arg)
        rv = rv(arg)
        i += 1
    if not isinstance(rv, SBase) or not isinstance(lv, SBase):
        raise Unsupported("sides of different functional depth")
    return lv.nf, rv.nf


# --------------------------------------------------------------------------
# the comparator


def _factor_covers(sf, tf, asms) -> bool:
    if sf == tf:
        return True
    if sf[0] == "slot" or tf[0] == "slot":
        return False
    if sf[0] == "atom" and tf[0] == "atom":
        if sf[1] != tf[1] or len(sf[2]) != len(tf[2]):
            return False
        return all(_sum_geq(sa, ta, asms) for sa, ta in zip(sf[2], tf[2]))
    return False


def _sum_geq(a: Branch, b: Branch, asms, depth: int = 2) -> bool:
    if _sum_covers(a, b, asms):
        return True
    if depth <= 0:
        return False
    for lo, hi in asms:
        if b == lo and _sum_geq(a, hi, asms, depth - 1):
            return True
    return False


_cover_memo: dict = {}


def _sum_covers(a: Branch, b: Branch, asms) -> bool:
    """Every monomial of b is matched into a's monomials, factor multisets
    covered bijectively, respecting coefficients."""
    key = (a, b, asms)
    hit = _cover_memo.get(key)
    if hit is not None:
        return hit
    if len(_cover_memo) > 200_000:
        _cover_memo.clear()
    capacities = [c for c, _f in a]
    out = _alloc(list(b), 0, a, capacities, asms)
    _cover_memo[key] = out
    return out


def _alloc(need: list, i: int, a: Branch, caps: list[int], asms) -> bool:
    if i == len(need):
        return True
    coeff, factors = need[i]
    if not factors:  # constant monomial: any remaining capacity on constants
        remaining = coeff
        order = []
        for j, (c, f) in enumerate(a):
            if not f and caps[j] > 0:
                order.append(j)
        taken = []
        for j in order:
            take = min(caps[j], remaining)
            caps[j] -= take
            taken.append((j, take))
            remaining -= take
            if not remaining:
                break
        if not remaining and _alloc(need, i + 1, a, caps, asms):
            return True
        for j, take in taken:
            caps[j] += take
        return False
    candidates = [
        j for j, (c, f) in enumerate(a)
        if caps[j] > 0 and len(f) == len(factors)
        and _factors_cover(f, factors, asms)
    ]
    return _alloc_units(need, i, coeff, candidates, a, caps, asms)


def _alloc_units(need, i, remaining, candidates, a, caps, asms) -> bool:
    if remaining == 0:
        return _alloc(need, i + 1, a, caps, asms)
    for idx, j in enumerate(candidates):
        if caps[j] <= 0:
            continue
        take = min(caps[j], remaining)
        caps[j] -= take
        if _alloc_units(need, i, remaining - take, candidates[idx:], a, caps, asms):
            return True
        caps[j] += take
    return False


def _factors_cover(sfs: tuple, tfs: tuple, asms) -> bool:
    """Bijective cover between equal-length factor multisets."""
    if len(sfs) != len(tfs):
        return False
    remaining = list(sfs)

    def assign(k: int) -> bool:
        if k == len(tfs):
            return True
        for idx, sf in enumerate(remaining):
            if sf is not None and _factor_covers(sf, tfs[k], asms):
                remaining[idx] = None
                if assign(k + 1):
                    return True
                remaining[idx] = sf
        return False

    return assign(0)


def _branch_covered(s_nf: NF, t_branch: Branch, asms, splits: int) -> bool:
    for sb in s_nf:
        if _sum_covers(sb, t_branch, asms):
            return True
    if splits <= 0:
        return False
    # total-order case split on a single-argument atom monomial F(e):
    # either F(e) <= e (replace the monomial) or e <= F(e) (assume it)
    for k, (coeff, factors) in enumerate(t_branch):
        if len(factors) != 1 or factors[0][0] != "atom":
            continue
        atom = factors[0]
        if len(atom[2]) != 1:
            continue
        arg_sum = atom[2][0]
        reduced = list(t_branch[:k] + t_branch[k + 1:])
        scaled = [(c * coeff, f) for c, f in arg_sum]
        case_a = _canon_branch(reduced + scaled)
        atom_sum: Branch = ((1, (atom,)),)
        new_asms = asms + ((arg_sum, atom_sum),)
        if _branch_covered(s_nf, case_a, asms, splits - 1) and \
                _branch_covered(s_nf, t_branch, new_asms, splits - 1):
            return True
    return False


def nf_geq(s: NF, t: NF, strict: bool = False) -> bool:
    """Sound check of s >= t (or s > t) for all valuations."""
    one = (1, ())
    for tb in t:
        goal = _canon_branch(list(tb) + [one]) if strict else tb
        if not _branch_covered(s, goal, (), 2):
            return False
    return True


def compare_terms(lhs: Term, rhs: Term, interp: Interpreter, strict: bool) -> bool:
    try:
        l_nf, r_nf = sides_to_nf(lhs, rhs, interp)
    except Unsupported:
        return False
    return nf_geq(l_nf, r_nf, strict)


# --------------------------------------------------------------------------
# concrete evaluation (used for sampling checks)


def eval_expr(e: Expr, env: Sequence) -> int:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, SlotRef):
        v = env[e.index]
        assert isinstance(v, int)
        return v
    if isinstance(e, AppSlot):
        f = env[e.index]
        return f(*[eval_expr(a, env) for a in e.args])
    if isinstance(e, Add):
        return sum(eval_expr(p, env) for p in e.parts)
    if isinstance(e, Mul):
        out = 1
        for p in e.parts:
            out *= eval_expr(p, env)
        return out
    assert isinstance(e, MaxE)
    return max(eval_expr(p, env) for p in e.parts)


def eval_nf(nf: NF, assign: dict) -> int:
    best = 0
    for branch in nf:
        total = 0
        for coeff, factors in branch:
            prod = coeff
            for f in factors:
                if f[0] == "slot":
                    prod *= assign[f[1]]
                else:
                    fn = assign[f[1]]
                    prod *= fn(*[eval_nf((arg,), assign) for arg in f[2]])
            total += prod
        best = max(best, total)
    return best


def nf_slots(nf: NF) -> set:
    out = set()

    def factor(f):
        out.add(f[1])
        if f[0] == "atom":
            for arg in f[2]:
                for m in arg:
                    for g in m[1]:
                        factor(g)

    for branch in nf:
        for _c, factors in branch:
            for f in factors:
                factor(f)
    return out

"""Independent re-verification of certificates against a constraint set."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Union

from .constraints import ConstraintSet
from .subterm import Projection, check_projection
from .poly import (
    PolyFun, Interpreter, compare_terms, apply_polyfun, slot_sem, zero_sem,
    SBase, SFun, flat_sem, nf_geq, Unsupported,
)
from .poly_search import PolyInterp
from .rpo import ArgFunRPO, check_argfun_rpo

Certificate = Union[Projection, PolyInterp, ArgFunRPO]


@dataclass(frozen=True)
class Verdict:
    valid: bool
    strict: tuple[int, ...] = ()
    reason: str = ""


_SAMPLE_FUNS = [
    lambda *a: 0,
    lambda *a: 1,
    lambda *a: 2,
    lambda *a: (a[0] if a else 0),
    lambda *a: (a[0] + 1 if a else 1),
    lambda *a: (2 * a[0] if a else 0),
    lambda *a: sum(a),
    lambda *a: sum(a) + 1,
]


def _sample_monotone(rng: random.Random, arity: int):
    return rng.choice(_SAMPLE_FUNS)


def sample_weak_monotonicity(fun: PolyFun, rng: random.Random, rounds: int = 12) -> bool:
    """Sampled check that the template value never decreases in any slot."""
    for _ in range(rounds):
        base_vals = {}
        env1 = []
        env2 = []
        bump = rng.randrange(len(fun.slot_types)) if fun.slot_types else 0
        for i, ty in enumerate(fun.slot_types):
            if ty.is_base():
                v = rng.randrange(0, 4)
                env1.append(v)
                env2.append(v + (1 if i == bump else 0))
            else:
                f = _sample_monotone(rng, len(ty.argument_types()))
                if i == bump:
                    g = (lambda f: lambda *a: f(*a) + 1)(f)
                else:
                    g = f
                env1.append(f)
                env2.append(g)
        from .poly import eval_expr
        try:
            if eval_expr(fun.body, env1) > eval_expr(fun.body, env2):
                return False
        except Exception:
            return False
    return True


def check_poly_interp(cs: ConstraintSet, cert: PolyInterp) -> Verdict:
    if not cert.strict:
        return Verdict(False, (), "no pair is claimed strict")
    cand_ids = {c.pair_index for c in cs.strict_candidates}
    if not set(cert.strict) <= cand_ids:
        return Verdict(False, (), "strict set mentions pairs outside the constraint set")
    for name in cert.assign:
        if name.startswith("!c{") or name.startswith("!p{"):
            return Verdict(False, (), f"certificate may not interpret {name}")

    rng = random.Random(20821)
    for name, fun in sorted(cert.assign.items()):
        if not sample_weak_monotonicity(fun, rng):
            return Verdict(False, (), f"J({name}) fails the weak monotonicity sampling")

    # protected symbols: the argument recovery condition
    for sym in cs.S:
        fun = cert.assign.get(sym.display)
        if fun is None:
            continue
        for i in range(sym.decl.arity):
            env = []
            for j, ty in enumerate(fun.slot_types):
                env.append(slot_sem(f"rec:{j}", ty) if j == i else zero_sem(ty))
            try:
                val = apply_polyfun(fun, env, sym.decl.output)
            except Unsupported:
                return Verdict(False, (), f"J({sym.display}) is not checkable")
            if not isinstance(val, SBase):
                return Verdict(False, (), f"J({sym.display}) is not fully applied")
            target = slot_sem(f"rec:{i}", fun.slot_types[i])
            goal = flat_sem(target) if isinstance(target, SFun) else target.nf
            if not nf_geq(val.nf, goal):
                return Verdict(
                    False, (),
                    f"J({sym.display}) does not recover its argument {i + 1}")

    interp = Interpreter(cert.assign)
    for w in cs.weak:
        if not compare_terms(w.lhs, w.rhs, interp, strict=False):
            return Verdict(False, (), f"weak constraint not oriented ({w.label})")
    for c in cs.strict_candidates:
        strict = c.pair_index in cert.strict
        if not compare_terms(c.lhs, c.rhs, interp, strict=strict):
            kind = "strictly" if strict else "weakly"
            return Verdict(False, (), f"pair {c.pair_index} is not {kind} oriented")
    return Verdict(True, tuple(cert.strict))


def check_certificate(cs: ConstraintSet, cert: Certificate,
                      scc: Optional[tuple[int, ...]] = None,
                      pairs=None) -> Verdict:
    """Re-verify a certificate; Projection certificates need the SCC and the
    pair list, the others are checked against the constraint set."""
    if isinstance(cert, Projection):
        assert scc is not None and pairs is not None
        ok, reason = check_projection(scc, pairs, cert)
        return Verdict(ok, tuple(cert.strict), reason)
    if isinstance(cert, PolyInterp):
        return check_poly_interp(cs, cert)
    if isinstance(cert, ArgFunRPO):
        ok, reason = check_argfun_rpo(cs, cert)
        return Verdict(ok, tuple(cert.strict), reason)
    return Verdict(False, (), f"unknown certificate type {type(cert).__name__}")

"""Certificate re-verification: the published witnesses and mutation tests."""

import random

import pytest

from afsterm import parse_afs
from afsterm.afs import complete, classify
from afsterm.dp import dependency_pairs
from afsterm.graph import approximate_graph, prune, sccs
from afsterm.orderings import (
    build_constraints, check_certificate, search_poly, PolyInterp, ArgFunRPO,
    Projection,
)
from afsterm.orderings.poly import (
    PolyFun, Const, SlotRef, AppSlot, Add, Mul, MaxE, slot_types_for,
    Interpreter, sides_to_nf, nf_slots, eval_nf, Unsupported,
)
from afsterm.terms import (
    Base, Arrow, TypeDecl, FunctionSymbol, Variable, Var, FunApp, EXT,
)

from helpers import load, MONOTONE_SAMPLES

nat = Base("nat")


def build(name, spfp_drop=True):
    afs = classify(complete(load(name)))
    prob = dependency_pairs(afs, spfp_drop=spfp_drop)
    comps = sccs(prune(approximate_graph(prob)))
    return afs, prob, comps


def identity_fun(sym):
    return PolyFun(slot_types_for(sym), SlotRef(0))


class TestPaperWitnesses:
    def test_map_interpretation(self):
        afs, prob, comps = build("map", spfp_drop=False)
        cs = build_constraints(comps[0], prob)
        st = lambda n: slot_types_for(afs.symbol(n))
        J = {
            "map#": PolyFun(st("map"), Add((AppSlot(0, (SlotRef(1),)), SlotRef(1)))),
            "map": PolyFun(st("map"),
                           Add((Mul((SlotRef(1), AppSlot(0, (SlotRef(1),)))), SlotRef(1)))),
            "cons": PolyFun(st("cons"), Add((SlotRef(0), SlotRef(1), Const(1)))),
        }
        cert = PolyInterp(J, tuple(c.pair_index for c in cs.strict_candidates))
        assert check_certificate(cs, cert).valid

    def test_twice_stage_one(self):
        afs, prob, comps = build("twice")
        cs = build_constraints(comps[0], prob)
        st = lambda n: slot_types_for(afs.symbol(n))
        ffn = PolyFun(st("twice"), AppSlot(0, (AppSlot(0, (SlotRef(1),)),)))
        J = {
            "I": identity_fun(afs.symbol("I")),
            "I#": identity_fun(afs.symbol("I")),
            "I-": identity_fun(afs.symbol("I")),
            "o": PolyFun((), Const(0)),
            "s": PolyFun(st("s"), Add((SlotRef(0), Const(1)))),
            "twice": ffn,
            "twice#": ffn,
        }
        # strictly removes exactly the two I# pairs (indices 0 and 1)
        cert = PolyInterp(J, (0, 1))
        assert check_certificate(cs, cert).valid
        # claiming strictness on an applied twice pair must fail
        bad = PolyInterp(J, (0, 1, 5))
        assert not check_certificate(cs, bad).valid

    def test_twice_stage_two(self):
        afs, prob, comps = build("twice")
        scc2 = tuple(i for i in comps[0] if i not in (0, 1))
        cs2 = build_constraints(scc2, prob)
        assert not cs2.weak  # no formative rules remain for these pairs
        st = lambda n: slot_types_for(afs.symbol(n))
        stage2 = PolyFun(st("twice"),
                         Add((MaxE((AppSlot(0, (AppSlot(0, (SlotRef(1),)),)),
                                    SlotRef(1))), Const(1))))
        cert = PolyInterp({"twice": stage2, "twice#": stage2}, scc2)
        assert check_certificate(cs2, cert).valid

    def test_eval_argument_function(self):
        afs, prob, comps = build("eval")
        scc = next(c for c in comps if any(prob.pairs[i].collapsing for i in c))
        cs = build_constraints(scc, prob)
        M = afs.symbol("dom").decl.output
        domp = FunctionSymbol("dom'", TypeDecl((M, M), M), EXT)
        x1, x2 = Variable("x1", M), Variable("x2", M)
        cert = ArgFunRPO(
            {"dom": FunApp(domp, (Var(x1), Var(x2)))},
            (("fun", "dom'"), ("dom'", "s"), ("dom'", "o")),
            scc,
        )
        assert check_certificate(cs, cert).valid

    def test_eval_without_filtering_fails(self):
        # dropping the argument function loses the orientation: the third
        # dom argument is not recoverable
        afs, prob, comps = build("eval")
        scc = next(c for c in comps if any(prob.pairs[i].collapsing for i in c))
        cs = build_constraints(scc, prob)
        cert = ArgFunRPO({}, (("fun", "s"),), scc)
        assert not check_certificate(cs, cert).valid


def mutate_poly(rng, cert):
    """One value-lowering or structure-breaking edit to one interpretation:
    decrement a coefficient, drop a summand, or zero an applied argument."""
    name = rng.choice(sorted(cert.assign))
    fun = cert.assign[name]

    edits = []

    def scan(e, path):
        if isinstance(e, Const):
            if e.value > 0:
                edits.append(("dec", path))
        elif isinstance(e, Add):
            if len(e.parts) > 1:
                for i in range(len(e.parts)):
                    edits.append(("drop", path + (i,)))
            for i, p in enumerate(e.parts):
                scan(p, path + (i,))
        elif isinstance(e, (Mul, MaxE)):
            for i, p in enumerate(e.parts):
                scan(p, path + (i,))
        elif isinstance(e, AppSlot):
            for i, p in enumerate(e.args):
                if p != Const(0):
                    edits.append(("zero", path + (i,)))
                scan(p, path + (i,))
        elif isinstance(e, SlotRef):
            edits.append(("zero", path))

    def rebuild(e, kind, path):
        if not path:
            if kind == "dec":
                assert isinstance(e, Const)
                return Const(e.value - 1)
            return Const(0)
        i = path[0]
        if isinstance(e, Add) and kind == "drop" and len(path) == 1:
            parts = [p for j, p in enumerate(e.parts) if j != i]
            return parts[0] if len(parts) == 1 else Add(tuple(parts))
        if isinstance(e, (Add, Mul, MaxE)):
            parts = list(e.parts)
            parts[i] = rebuild(parts[i], kind, path[1:])
            return type(e)(tuple(parts))
        assert isinstance(e, AppSlot)
        args = list(e.args)
        args[i] = rebuild(args[i], kind, path[1:])
        return AppSlot(e.index, tuple(args))

    scan(fun.body, ())
    if not edits:
        new_body = Const(0)
    else:
        kind, path = edits[rng.randrange(len(edits))]
        new_body = rebuild(fun.body, kind, path)
    assign = dict(cert.assign)
    assign[name] = PolyFun(fun.slot_types, new_body)
    return PolyInterp(assign, cert.strict)


def sample_validates(cs, cert, rng, rounds=25) -> bool:
    """Numeric spot-check that an accepted certificate really orients the
    constraints on sampled valuations."""
    interp = Interpreter(cert.assign)
    duties = [(w.lhs, w.rhs, False) for w in cs.weak]
    duties += [(c.lhs, c.rhs, c.pair_index in cert.strict)
               for c in cs.strict_candidates]
    for lhs, rhs, strict in duties:
        try:
            l_nf, r_nf = sides_to_nf(lhs, rhs, interp)
        except Unsupported:
            return False
        slots = sorted(nf_slots(l_nf) | nf_slots(r_nf), key=str)
        for _ in range(rounds):
            assign = {}
            for s in slots:
                assign[s] = rng.randrange(0, 5)
            try:
                lv, rv = eval_nf(l_nf, assign), eval_nf(r_nf, assign)
            except TypeError:
                assign = {s: (rng.choice(MONOTONE_SAMPLES)
                              if _needs_callable(l_nf, r_nf, s) else assign[s])
                          for s in slots}
                lv, rv = eval_nf(l_nf, assign), eval_nf(r_nf, assign)
            if strict and not lv > rv:
                return False
            if not strict and not lv >= rv:
                return False
    return True


def _needs_callable(l_nf, r_nf, sid) -> bool:
    def factor_uses(f) -> bool:
        if f[0] != "atom":
            return False
        if f[1] == sid:
            return True
        return any(factor_uses(g) for s in f[2] for _c, fs in s for g in fs)

    def nf_uses(nf) -> bool:
        return any(factor_uses(f) for branch in nf for _c, fs in branch for f in fs)

    return nf_uses(l_nf) or nf_uses(r_nf)


class TestMutations:
    def test_mutated_certificates_rejected(self):
        rng = random.Random(4242)
        # collect valid poly certificates from several systems
        stock = []
        for name in ("twice", "map", "quot", "dupapp"):
            afs, prob, comps = build(name, spfp_drop=(name != "map"))
            for scc in comps:
                cs = build_constraints(scc, prob)
                cert = search_poly(cs, budget=10.0)
                if cert is not None:
                    assert check_certificate(cs, cert).valid
                    stock.append((cs, cert))
        assert stock

        total, rejected, accepted_valid = 0, 0, 0
        while total < 100:
            cs, cert = stock[total % len(stock)]
            mutant = mutate_poly(rng, cert)
            if mutant.assign == cert.assign:
                continue
            total += 1
            verdict = check_certificate(cs, mutant)
            if not verdict.valid:
                rejected += 1
            else:
                # the checker may accept a mutant only if it is genuinely
                # valid: confirm by numeric sampling
                assert sample_validates(cs, mutant, rng)
                accepted_valid += 1
        assert rejected + accepted_valid == 100
        assert rejected >= 95

    def test_precedence_mutation_rejected(self):
        afs, prob, comps = build("eval")
        scc = next(c for c in comps if any(prob.pairs[i].collapsing for i in c))
        cs = build_constraints(scc, prob)
        M = afs.symbol("dom").decl.output
        domp = FunctionSymbol("dom'", TypeDecl((M, M), M), EXT)
        x1, x2 = Variable("x1", M), Variable("x2", M)
        pi = {"dom": FunApp(domp, (Var(x1), Var(x2)))}
        good = ArgFunRPO(pi, (("fun", "dom'"),), scc)
        assert check_certificate(cs, good).valid
        flipped = ArgFunRPO(pi, (("dom'", "fun"),), scc)
        assert not check_certificate(cs, flipped).valid

    def test_projection_mutations(self):
        afs, prob, comps = build("eval")
        scc = next(c for c in comps if str(prob.pairs[c[0]]).startswith("dom#(o"))
        good = Projection({"dom#": 2}, scc)
        assert check_certificate(None, good, scc=scc, pairs=prob.pairs).valid
        bad = Projection({"dom#": 1}, scc)
        assert not check_certificate(None, bad, scc=scc, pairs=prob.pairs).valid
        empty = Projection({"dom#": 2}, ())
        assert not check_certificate(None, empty, scc=scc, pairs=prob.pairs).valid

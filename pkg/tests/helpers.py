"""Shared test utilities: corpus loading and random well-typed terms."""

from __future__ import annotations

import random
from pathlib import Path

from afsterm import parse_afs
from afsterm.terms import (
    Term, Var, Abs, App, FunApp, Variable, SimpleType, Arrow, Base,
    lam, type_of, free_vars,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name: str):
    return parse_afs((CORPUS / f"{name}.afs").read_text())


def corpus_names() -> list[str]:
    return sorted(p.stem for p in CORPUS.glob("*.afs"))


def random_term(rng: random.Random, afs, ty: SimpleType, size: int,
                env: tuple[Variable, ...] = (), allow_free: bool = True) -> Term:
    """A random well-typed term of the given type over the signature."""
    leaves = []
    for v in env:
        if v.type == ty:
            leaves.append(("var", v))
    for f in afs.signature:
        if f.decl.output == ty and f.decl.arity == 0:
            leaves.append(("const", f))
    if allow_free:
        leaves.append(("free", Variable(f"u{rng.randrange(3)}", ty)))

    if size <= 1 or (not ty.is_arrow() and rng.random() < 0.2):
        if leaves:
            kind, payload = rng.choice(leaves)
            return Var(payload) if kind in ("var", "free") else FunApp(payload)

    options = []
    if ty.is_arrow():
        options.append("abs")
    syms = [f for f in afs.signature if f.decl.output == ty and f.decl.arity > 0]
    if syms:
        options.append("fun")
    # application at a base argument type
    base_types = sorted({b.name for f in afs.signature
                         for b in [f.decl.output.base_result()]})
    if base_types and size > 2:
        options.append("app")
    if not options:
        if leaves:
            kind, payload = rng.choice(leaves)
            return Var(payload) if kind in ("var", "free") else FunApp(payload)
        return Var(Variable("u0", ty))

    choice = rng.choice(options)
    if choice == "abs":
        assert isinstance(ty, Arrow)
        x = Variable(f"b{len(env)}", ty.left)
        body = random_term(rng, afs, ty.right, size - 1, env + (x,), allow_free)
        return lam(x, body)
    if choice == "fun":
        f = rng.choice(syms)
        budget = max(1, (size - 1) // max(1, f.decl.arity))
        args = tuple(random_term(rng, afs, a, budget, env, allow_free)
                     for a in f.decl.inputs)
        return FunApp(f, args)
    # application: build fn : sigma -> ty and arg : sigma
    sigma = Base(rng.choice(base_types))
    fn = random_term(rng, afs, Arrow(sigma, ty), size // 2, env, allow_free)
    arg = random_term(rng, afs, sigma, size // 2, env, allow_free)
    return App(fn, arg)


def random_closed_term(rng: random.Random, afs, ty: SimpleType, size: int) -> Term:
    for _ in range(20):
        t = random_term(rng, afs, ty, size, allow_free=False)
        if not free_vars(t):
            return t
    # fall back to a nullary symbol of the type if sampling keeps failing
    for f in afs.signature:
        if f.decl.output == ty and f.decl.arity == 0:
            return FunApp(f)
    raise RuntimeError(f"cannot build a closed term of type {ty}")


MONOTONE_SAMPLES = [
    lambda *a: 0,
    lambda *a: 1,
    lambda *a: 3,
    lambda *a: (a[0] if a else 0),
    lambda *a: (a[0] + 1 if a else 1),
    lambda *a: (2 * a[0] if a else 0),
    lambda *a: sum(a),
    lambda *a: sum(a) + 2,
]

"""Simple types, simply-typed terms, substitution, matching and rewriting.

Terms use a locally nameless representation: free variables are named
(`Var`), bound variables are de Bruijn indices (`BVar`).  Alpha-equivalent
terms are therefore structurally equal, and terms hash consistently, which
the dependency-pair machinery relies on for graphs and deduplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence


# --------------------------------------------------------------------------
# types


class SimpleType:
    """Base class for simple types (base types and arrow types)."""

    def is_base(self) -> bool:
        return isinstance(self, Base)

    def is_arrow(self) -> bool:
        return isinstance(self, Arrow)

    def argument_types(self) -> tuple["SimpleType", ...]:
        """The types a1..an with self = a1 -> ... -> an -> base."""
        args = []
        t = self
        while isinstance(t, Arrow):
            args.append(t.left)
            t = t.right
        return tuple(args)

    def base_result(self) -> "Base":
        t = self
        while isinstance(t, Arrow):
            t = t.right
        assert isinstance(t, Base)
        return t

    def __str__(self) -> str:
        return type_text(self)


@dataclass(frozen=True)
class Base(SimpleType):
    name: str


@dataclass(frozen=True)
class Arrow(SimpleType):
    left: SimpleType
    right: SimpleType


def arrow(*types: SimpleType) -> SimpleType:
    """Right-associated arrow type from a list of types."""
    assert types
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def type_text(t: SimpleType) -> str:
    if isinstance(t, Base):
        return t.name
    assert isinstance(t, Arrow)
    left = type_text(t.left)
    if t.left.is_arrow():
        left = f"({left})"
    return f"{left} -> {type_text(t.right)}"


def type_subterms(t: SimpleType) -> Iterator[SimpleType]:
    yield t
    if isinstance(t, Arrow):
        yield from type_subterms(t.left)
        yield from type_subterms(t.right)


@dataclass(frozen=True)
class TypeDecl:
    """Type declaration [a1 x ... x an] -> out of a function symbol."""

    inputs: tuple[SimpleType, ...]
    output: SimpleType

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def __str__(self) -> str:
        if not self.inputs:
            return type_text(self.output)
        ins = " * ".join(type_text(i) for i in self.inputs)
        return f"[{ins}] -> {type_text(self.output)}"


# kind values for FunctionSymbol
PLAIN = "plain"
MARKED = "marked"          # f#, used at dependency pair roots
TAGGED = "tagged"          # f-, symbols occurring below an abstraction
FRESH = "fresh-constant"   # !c{type}, closes candidate terms
EXT = "extension"          # pairing, filtered symbols, mu-encoding symbols


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    decl: TypeDecl
    kind: str = PLAIN

    @property
    def display(self) -> str:
        if self.kind == MARKED:
            return self.name + "#"
        if self.kind == TAGGED:
            return self.name + "-"
        return self.name

    def __str__(self) -> str:
        return self.display


def marked(f: FunctionSymbol) -> FunctionSymbol:
    assert f.kind == PLAIN
    return FunctionSymbol(f.name, f.decl, MARKED)


def tagged(f: FunctionSymbol) -> FunctionSymbol:
    assert f.kind == PLAIN
    return FunctionSymbol(f.name, f.decl, TAGGED)


def untagged(f: FunctionSymbol) -> FunctionSymbol:
    assert f.kind == TAGGED
    return FunctionSymbol(f.name, f.decl, PLAIN)


def fresh_const(t: SimpleType) -> FunctionSymbol:
    """The per-type constant used to close candidate terms.

    One symbol per type, named after the type's textual form.
    """
    return FunctionSymbol(f"!c{{{type_text(t)}}}", TypeDecl((), t), FRESH)


def pairing_symbol(t: SimpleType) -> FunctionSymbol:
    return FunctionSymbol(f"!p{{{type_text(t)}}}", TypeDecl((t, t), t), EXT)


@dataclass(frozen=True)
class Variable:
    name: str
    type: SimpleType

    def __str__(self) -> str:
        return self.name


# --------------------------------------------------------------------------
# terms


class Term:
    """Base class of term nodes; construct via Var/Abs/App/FunApp or lam()."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    var: Variable


@dataclass(frozen=True)
class BVar(Term):
    """Bound variable occurrence (de Bruijn index); internal to Abs bodies."""

    index: int
    type: SimpleType


@dataclass(frozen=True)
class Abs(Term):
    var_type: SimpleType
    body: Term
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class FunApp(Term):
    fn: FunctionSymbol
    args: tuple[Term, ...] = ()


class IllTyped(Exception):
    def __init__(self, position: tuple[int, ...], reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"ill-typed term at position {list(position)}: {reason}")


class TypeMismatch(Exception):
    pass


class BudgetExceeded(Exception):
    """Raised by bounded_reductions when completeness was requested."""

    def __init__(self, partial: "Exploration"):
        self.partial = partial
        super().__init__("reduction budget exceeded")


# construction helpers ------------------------------------------------------


def lam(x: Variable, body: Term) -> Abs:
    """Abstraction binding the named variable x in body."""
    return Abs(x.type, _abstract(body, x, 0), hint=x.name)


def lams(xs: Sequence[Variable], body: Term) -> Term:
    for x in reversed(xs):
        body = lam(x, body)
    return body


def _abstract(t: Term, x: Variable, depth: int) -> Term:
    if isinstance(t, Var):
        return BVar(depth, x.type) if t.var == x else t
    if isinstance(t, BVar):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, _abstract(t.body, x, depth + 1), t.hint)
    if isinstance(t, App):
        return App(_abstract(t.fn, x, depth), _abstract(t.arg, x, depth))
    assert isinstance(t, FunApp)
    return FunApp(t.fn, tuple(_abstract(a, x, depth) for a in t.args))


def instantiate(body: Term, value: Term, depth: int = 0) -> Term:
    """Replace the binder at `depth` by a locally closed value."""
    if isinstance(body, BVar):
        return value if body.index == depth else body
    if isinstance(body, Var):
        return body
    if isinstance(body, Abs):
        return Abs(body.var_type, instantiate(body.body, value, depth + 1), body.hint)
    if isinstance(body, App):
        return App(instantiate(body.fn, value, depth), instantiate(body.arg, value, depth))
    assert isinstance(body, FunApp)
    return FunApp(body.fn, tuple(instantiate(a, value, depth) for a in body.args))


def open_abs(t: Abs, avoid: Iterable[Variable] = ()) -> tuple[Variable, Term]:
    """Open an abstraction with a fresh named variable for traversal."""
    names = {v.name for v in avoid}
    name = t.hint or "x"
    candidate = name
    i = 0
    while candidate in names:
        i += 1
        candidate = f"{name}{i}"
    x = Variable(candidate, t.var_type)
    return x, instantiate(t.body, Var(x))


def app(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def app_spine(t: Term) -> tuple[Term, list[Term]]:
    """Decompose an application chain into its head and arguments."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def head(t: Term) -> Term:
    while isinstance(t, App):
        t = t.fn
    return t


# inspection ----------------------------------------------------------------


def type_of(t: Term, binders: tuple[SimpleType, ...] = ()) -> SimpleType:
    """The type of a well-formed term; raises IllTyped otherwise."""
    return _type_of(t, binders, ())


def _type_of(t: Term, binders: tuple[SimpleType, ...], pos: tuple[int, ...]) -> SimpleType:
    if isinstance(t, Var):
        return t.var.type
    if isinstance(t, BVar):
        if t.index >= len(binders):
            raise IllTyped(pos, "dangling bound variable")
        expected = binders[len(binders) - 1 - t.index]
        if expected != t.type:
            raise IllTyped(pos, "bound variable type disagrees with binder")
        return t.type
    if isinstance(t, Abs):
        return Arrow(t.var_type, _type_of(t.body, binders + (t.var_type,), pos + (0,)))
    if isinstance(t, App):
        fn_type = _type_of(t.fn, binders, pos + (0,))
        arg_type = _type_of(t.arg, binders, pos + (1,))
        if not isinstance(fn_type, Arrow):
            raise IllTyped(pos, f"cannot apply a term of base type {fn_type}")
        if fn_type.left != arg_type:
            raise IllTyped(pos, f"argument type {arg_type} does not match {fn_type.left}")
        return fn_type.right
    assert isinstance(t, FunApp)
    decl = t.fn.decl
    if len(t.args) != decl.arity:
        raise IllTyped(pos, f"{t.fn.display} expects {decl.arity} arguments, got {len(t.args)}")
    for i, (a, expected) in enumerate(zip(t.args, decl.inputs)):
        actual = _type_of(a, binders, pos + (i,))
        if actual != expected:
            raise IllTyped(pos + (i,), f"argument {i + 1} of {t.fn.display} has type {actual}, expected {expected}")
    return decl.output


def typecheck(t: Term, env: Optional[Mapping[str, SimpleType]] = None) -> SimpleType:
    """Type of t; if env is given, free variables must be declared in it."""
    if env is not None:
        for v in free_vars(t):
            if v.name not in env:
                raise IllTyped((), f"undeclared variable {v.name}")
            if env[v.name] != v.type:
                raise IllTyped((), f"variable {v.name} has type {v.type}, declared {env[v.name]}")
    return type_of(t)


def alpha_equal(s: Term, t: Term) -> bool:
    """Equality modulo renaming of bound variables."""
    return s == t


def free_vars(t: Term) -> frozenset[Variable]:
    if isinstance(t, Var):
        return frozenset((t.var,))
    if isinstance(t, (BVar,)):
        return frozenset()
    if isinstance(t, Abs):
        return free_vars(t.body)
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    assert isinstance(t, FunApp)
    out: frozenset[Variable] = frozenset()
    for a in t.args:
        out |= free_vars(a)
    return out


def dangling_bvars(t: Term, depth: int = 0) -> frozenset[int]:
    """Indices of bound variables escaping t (relative to t's root)."""
    if isinstance(t, BVar):
        return frozenset((t.index - depth,)) if t.index >= depth else frozenset()
    if isinstance(t, Var):
        return frozenset()
    if isinstance(t, Abs):
        return dangling_bvars(t.body, depth + 1)
    if isinstance(t, App):
        return dangling_bvars(t.fn, depth) | dangling_bvars(t.arg, depth)
    assert isinstance(t, FunApp)
    out: frozenset[int] = frozenset()
    for a in t.args:
        out |= dangling_bvars(a, depth)
    return out


def subterms(t: Term) -> list[Term]:
    """All subterm nodes in pre-order, including t itself.

    Nodes below a binder are returned raw and may contain dangling indices.
    """
    out = [t]
    if isinstance(t, Abs):
        out.extend(subterms(t.body))
    elif isinstance(t, App):
        out.extend(subterms(t.fn))
        out.extend(subterms(t.arg))
    elif isinstance(t, FunApp):
        for a in t.args:
            out.extend(subterms(a))
    return out


def strict_subterms_closed(t: Term) -> list[Term]:
    """Strict subterms of a locally closed t, with escaping bound variables
    replaced by the per-type constants (so every result is closed)."""
    out: list[Term] = []

    def walk(s: Term, first: bool) -> None:
        if not first:
            dangling = dangling_bvars(s)
            closed = s
            for idx in sorted(dangling, reverse=True):
                # indices are relative to s's root; substitute outside-in
                closed = _close_index(closed, idx)
            out.append(closed)
        if isinstance(s, Abs):
            walk(s.body, False)
        elif isinstance(s, App):
            walk(s.fn, False)
            walk(s.arg, False)
        elif isinstance(s, FunApp):
            for a in s.args:
                walk(a, False)

    walk(t, True)
    return out


def _close_index(t: Term, index: int, depth: int = 0) -> Term:
    if isinstance(t, BVar):
        if t.index == depth + index:
            return FunApp(fresh_const(t.type))
        return t
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, _close_index(t.body, index, depth + 1), t.hint)
    if isinstance(t, App):
        return App(_close_index(t.fn, index, depth), _close_index(t.arg, index, depth))
    assert isinstance(t, FunApp)
    return FunApp(t.fn, tuple(_close_index(a, index, depth) for a in t.args))


def symbols_of(t: Term) -> frozenset[FunctionSymbol]:
    if isinstance(t, (Var, BVar)):
        return frozenset()
    if isinstance(t, Abs):
        return symbols_of(t.body)
    if isinstance(t, App):
        return symbols_of(t.fn) | symbols_of(t.arg)
    assert isinstance(t, FunApp)
    out = frozenset((t.fn,))
    for a in t.args:
        out |= symbols_of(a)
    return out


def term_size(t: Term) -> int:
    if isinstance(t, (Var, BVar)):
        return 1
    if isinstance(t, Abs):
        return 1 + term_size(t.body)
    if isinstance(t, App):
        return 1 + term_size(t.fn) + term_size(t.arg)
    assert isinstance(t, FunApp)
    return 1 + sum(term_size(a) for a in t.args)


# substitution and matching -------------------------------------------------

Substitution = Mapping[Variable, Term]


def apply_subst(t: Term, subst: Substitution) -> Term:
    """Capture-avoiding substitution of free variables.

    The substitution must be type-preserving; bound variables are indices so
    capture cannot occur.
    """
    for v, s in subst.items():
        if type_of(s) != v.type:
            raise TypeMismatch(f"substitution maps {v.name} : {v.type} to a term of type {type_of(s)}")
    return _subst(t, subst)


def _subst(t: Term, subst: Substitution) -> Term:
    if isinstance(t, Var):
        return subst.get(t.var, t)
    if isinstance(t, BVar):
        return t
    if isinstance(t, Abs):
        return Abs(t.var_type, _subst(t.body, subst), t.hint)
    if isinstance(t, App):
        return App(_subst(t.fn, subst), _subst(t.arg, subst))
    assert isinstance(t, FunApp)
    return FunApp(t.fn, tuple(_subst(a, subst) for a in t.args))


def match(pattern: Term, subject: Term) -> Optional[dict[Variable, Term]]:
    """Syntactic matching modulo alpha of a rule left-hand side fragment.

    Returns a substitution, or None.  A binding fails when it would let a
    bound variable of the subject escape.
    """
    binding: dict[Variable, Term] = {}
    if _match(pattern, subject, binding):
        return binding
    return None


def _match(pattern: Term, subject: Term, binding: dict[Variable, Term]) -> bool:
    if isinstance(pattern, Var):
        if dangling_bvars(subject):
            return False  # a bound variable would escape
        if type_of(subject) != pattern.var.type:
            return False
        if pattern.var in binding:
            return binding[pattern.var] == subject
        binding[pattern.var] = subject
        return True
    if isinstance(pattern, BVar):
        return isinstance(subject, BVar) and pattern.index == subject.index
    if isinstance(pattern, Abs):
        return (
            isinstance(subject, Abs)
            and pattern.var_type == subject.var_type
            and _match(pattern.body, subject.body, binding)
        )
    if isinstance(pattern, App):
        return (
            isinstance(subject, App)
            and _match(pattern.fn, subject.fn, binding)
            and _match(pattern.arg, subject.arg, binding)
        )
    assert isinstance(pattern, FunApp)
    return (
        isinstance(subject, FunApp)
        and pattern.fn == subject.fn
        and all(_match(p, s, binding) for p, s in zip(pattern.args, subject.args))
    )


# rewriting -----------------------------------------------------------------


def beta_reduce_root(t: Term) -> Optional[Term]:
    if isinstance(t, App) and isinstance(t.fn, Abs):
        return instantiate(t.fn.body, t.arg)
    return None


def is_beta_normal(t: Term) -> bool:
    if isinstance(t, App) and isinstance(t.fn, Abs):
        return False
    if isinstance(t, Abs):
        return is_beta_normal(t.body)
    if isinstance(t, App):
        return is_beta_normal(t.fn) and is_beta_normal(t.arg)
    if isinstance(t, FunApp):
        return all(is_beta_normal(a) for a in t.args)
    return True


def beta_normalize(t: Term, max_steps: int = 10_000) -> Term:
    """Beta normal form (terminating on well-typed terms)."""
    steps = 0
    while True:
        reducts = _beta_step(t)
        if reducts is None:
            return t
        t = reducts
        steps += 1
        if steps > max_steps:
            raise BudgetExceeded(Exploration(t, {}, None, False))


def _beta_step(t: Term) -> Optional[Term]:
    root = beta_reduce_root(t)
    if root is not None:
        return root
    if isinstance(t, Abs):
        b = _beta_step(t.body)
        return None if b is None else Abs(t.var_type, b, t.hint)
    if isinstance(t, App):
        f = _beta_step(t.fn)
        if f is not None:
            return App(f, t.arg)
        a = _beta_step(t.arg)
        return None if a is None else App(t.fn, a)
    if isinstance(t, FunApp):
        for i, a in enumerate(t.args):
            r = _beta_step(a)
            if r is not None:
                return FunApp(t.fn, t.args[:i] + (r,) + t.args[i + 1:])
    return None


def rewrite_step(t: Term, rules: Sequence) -> list[Term]:
    """All one-step reducts of t: rule steps at every position plus beta
    steps, deduplicated modulo alpha (structural equality)."""
    seen: dict[Term, None] = {}

    def add(s: Term) -> None:
        if s not in seen:
            seen[s] = None

    def walk(s: Term, rebuild) -> None:
        root = beta_reduce_root(s)
        if root is not None:
            add(rebuild(root))
        for rule in rules:
            gamma = match(rule.lhs, s)
            if gamma is not None:
                add(rebuild(_subst(rule.rhs, gamma)))
        if isinstance(s, Abs):
            walk(s.body, lambda r, s=s: rebuild(Abs(s.var_type, r, s.hint)))
        elif isinstance(s, App):
            walk(s.fn, lambda r, s=s: rebuild(App(r, s.arg)))
            walk(s.arg, lambda r, s=s: rebuild(App(s.fn, r)))
        elif isinstance(s, FunApp):
            for i, a in enumerate(s.args):
                walk(a, lambda r, s=s, i=i: rebuild(FunApp(s.fn, s.args[:i] + (r,) + s.args[i + 1:])))

    walk(t, lambda r: r)
    return list(seen.keys())


@dataclass
class Exploration:
    """Result of a bounded breadth-first reduction exploration."""

    start: Term
    traces: dict[Term, tuple[Term, ...]]  # term -> one witness trace (start..term)
    loop: Optional[tuple[Term, ...]]      # a trace revisiting an alpha-equal term
    complete: bool                        # no unexpanded frontier remained

    @property
    def reached(self) -> set[Term]:
        return set(self.traces.keys())

    def normal_forms(self, rules: Sequence) -> set[Term]:
        return {t for t in self.traces if not rewrite_step(t, rules)}


def bounded_reductions(t: Term, rules: Sequence, max_steps: int,
                       require_complete: bool = False,
                       max_nodes: Optional[int] = None) -> Exploration:
    """Breadth-first set of terms reachable in at most max_steps steps.

    Keeps one witness trace per term and reports whether some trace revisits
    an alpha-equal term (a loop).  With require_complete=True, raises
    BudgetExceeded (carrying the partial result) if the frontier was not
    exhausted.  max_nodes caps the explored set for wide systems.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    traces: dict[Term, tuple[Term, ...]] = {t: (t,)}
    loop: Optional[tuple[Term, ...]] = None
    frontier = [t]
    truncated = False
    for _ in range(max_steps):
        if not frontier:
            break
        next_frontier: list[Term] = []
        for s in frontier:
            trace = traces[s]
            for r in rewrite_step(s, rules):
                if loop is None and r in trace:
                    loop = trace + (r,)
                if r not in traces:
                    if max_nodes is not None and len(traces) >= max_nodes:
                        truncated = True
                        continue
                    traces[r] = trace + (r,)
                    next_frontier.append(r)
        frontier = next_frontier
    complete = not truncated and (
        not frontier or all(not rewrite_step(s, rules) for s in frontier))
    result = Exploration(t, traces, loop, complete)
    if require_complete and not complete:
        raise BudgetExceeded(result)
    return result


# marking -------------------------------------------------------------------


def mark(t: Term, defined: Iterable[str]) -> Term:
    """Marked counterpart: the root symbol f becomes f# when t = f(...) with
    f a defined symbol; applications and other forms are unchanged."""
    names = set(defined)
    if isinstance(t, FunApp) and t.fn.kind == PLAIN and t.fn.name in names:
        return FunApp(marked(t.fn), t.args)
    return t


# printing ------------------------------------------------------------------


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def term_text(t: Term, scope: Optional[set[str]] = None) -> str:
    """Render a term in the input grammar (infix @, \\x:type. bodies)."""
    if scope is None:
        scope = {v.name for v in free_vars(t)}
    return _text(t, [], scope)


def _text(t: Term, binders: list[Variable], scope: set[str]) -> str:
    if isinstance(t, Var):
        return t.var.name
    if isinstance(t, BVar):
        return binders[len(binders) - 1 - t.index].name
    if isinstance(t, Abs):
        name = fresh_name(t.hint or "x", scope | {b.name for b in binders})
        x = Variable(name, t.var_type)
        body = _text(instantiate(t.body, Var(x)), binders, scope | {name})
        return f"\\{name}:{type_text(t.var_type)}. {body}"
    if isinstance(t, App):
        fn = _text(t.fn, binders, scope)
        if isinstance(t.fn, Abs):
            fn = f"({fn})"
        arg = _text(t.arg, binders, scope)
        if isinstance(t.arg, (App, Abs)):
            arg = f"({arg})"
        return f"{fn} @ {arg}"
    assert isinstance(t, FunApp)
    if not t.args:
        return t.fn.display
    args = ", ".join(_text(a, binders, scope) for a in t.args)
    return f"{t.fn.display}({args})"

"""The main proving loop: prepare, prune, pick an SCC, discharge it with the
subterm criterion or a reduction pair, repeat; plus proof self-verification
and the corpus runner."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .afs import AFS, complete, classify
from .dp import DPProblem, dependency_pairs
from .graph import approximate_graph, sccs, prune
from .orderings import (
    build_constraints, subterm_criterion, Projection,
    search_poly, search_rpo, PolyInterp, ArgFunRPO, check_certificate,
)

YES = "YES"
MAYBE = "MAYBE"

ENGINE_ORDER = ("subterm", "poly", "rpo")


@dataclass
class Config:
    timeout: float = 60.0
    scc_budget: float = 10.0
    engines: tuple[str, ...] = ENGINE_ORDER
    coef_bound: int = 3
    verbosity: int = 0

    def __post_init__(self) -> None:
        if self.timeout <= 0 or self.scc_budget <= 0:
            raise ValueError("budgets must be positive")
        for e in self.engines:
            if e not in ENGINE_ORDER:
                raise ValueError(f"unknown engine {e!r}")


@dataclass(frozen=True)
class Preparation:
    local: bool
    static_mode: bool
    rule_count: int
    pair_count: int
    node_count: int
    edge_count: int


@dataclass(frozen=True)
class PruneStep:
    removed: tuple[int, ...]


@dataclass(frozen=True)
class SubtermStep:
    scc: tuple[int, ...]
    cert: Projection
    removed: tuple[int, ...]


@dataclass(frozen=True)
class ReductionPairStep:
    scc: tuple[int, ...]
    mode: str
    cert: Union[PolyInterp, ArgFunRPO]
    removed: tuple[int, ...]


@dataclass(frozen=True)
class GiveUp:
    scc: tuple[int, ...]
    tried: tuple[str, ...]
    reason: str


Step = Union[Preparation, PruneStep, SubtermStep, ReductionPairStep, GiveUp]


@dataclass
class Proof:
    verdict: str
    steps: list[Step]
    problem: DPProblem


class InternalError(Exception):
    """A search produced a certificate the checker rejects."""


def prove(afs: AFS, cfg: Optional[Config] = None) -> Proof:
    cfg = cfg or Config()
    deadline = time.monotonic() + cfg.timeout

    prepared = classify(complete(afs))
    problem = dependency_pairs(prepared)
    graph = approximate_graph(problem)
    steps: list[Step] = [Preparation(
        local=prepared.local,
        static_mode=problem.static_mode,
        rule_count=len(prepared.rules),
        pair_count=len(problem.pairs),
        node_count=len(graph.alive),
        edge_count=graph.edge_count(),
    )]

    while True:
        pruned = prune(graph)
        dropped = tuple(sorted(graph.alive - pruned.alive))
        if dropped:
            steps.append(PruneStep(dropped))
        graph = pruned
        if graph.empty:
            proof = Proof(YES, steps, problem)
            break
        components = sccs(graph)
        scc = components[0]
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            steps.append(GiveUp(scc, (), "timeout"))
            proof = Proof(MAYBE, steps, problem)
            break
        budget = min(cfg.scc_budget, remaining)
        step = _discharge(scc, problem, cfg, budget)
        if step is None:
            tried = tuple(e for e in cfg.engines
                          if e != "subterm" or not any(problem.pairs[i].collapsing for i in scc))
            steps.append(GiveUp(scc, tried, "no engine oriented a pair strictly"))
            proof = Proof(MAYBE, steps, problem)
            break
        steps.append(step)
        graph = graph.without(step.removed)

    errors = verify_proof(proof)
    if errors:
        raise InternalError("; ".join(errors))
    return proof


def _discharge(scc: tuple[int, ...], problem: DPProblem, cfg: Config,
               budget: float) -> Optional[Union[SubtermStep, ReductionPairStep]]:
    collapsing = any(problem.pairs[i].collapsing for i in scc)
    if "subterm" in cfg.engines and not collapsing:
        cert = subterm_criterion(scc, problem.pairs)
        if cert is not None:
            return SubtermStep(scc, cert, cert.strict)
    cs = build_constraints(scc, problem)
    if "poly" in cfg.engines:
        cert = search_poly(cs, budget=budget, coef_bound=cfg.coef_bound)
        if cert is not None:
            return ReductionPairStep(scc, cs.mode, cert, cert.strict)
    # the path ordering engine does not contain beta, which the collapsing
    # modes require; it is only offered on non-collapsing problems
    if "rpo" in cfg.engines and not collapsing:
        cert = search_rpo(cs, budget=budget)
        if cert is not None:
            return ReductionPairStep(scc, cs.mode, cert, cert.strict)
    return None


def verify_proof(proof: Proof) -> list[str]:
    """Replay the proof skeleton and re-check every certificate; returns the
    list of problems found (empty for a valid proof)."""
    problem = proof.problem
    errors: list[str] = []
    graph = approximate_graph(problem)
    removed_total: list[int] = []

    steps = list(proof.steps)
    if not steps or not isinstance(steps[0], Preparation):
        return ["proof must start with a preparation step"]
    prep = steps[0]
    if prep.pair_count != len(problem.pairs):
        errors.append("preparation step records the wrong pair count")

    for step in steps[1:]:
        if isinstance(step, Preparation):
            errors.append("duplicate preparation step")
            break
        if isinstance(step, PruneStep):
            pruned = prune(graph)
            expected = tuple(sorted(graph.alive - pruned.alive))
            if expected != step.removed:
                errors.append(f"prune step removed {step.removed}, expected {expected}")
                break
            graph = pruned
            removed_total.extend(step.removed)
            continue
        if isinstance(step, GiveUp):
            break
        # an SCC step: the chosen set must be the first SCC of the graph
        pruned = prune(graph)
        if pruned.alive != graph.alive:
            errors.append("missing prune step before an SCC step")
            break
        components = sccs(graph)
        if not components:
            errors.append("SCC step on an empty graph")
            break
        if step.scc != components[0]:
            errors.append(f"step works on {step.scc}, expected SCC {components[0]}")
            break
        if isinstance(step, SubtermStep):
            verdict = check_certificate(None, step.cert, scc=step.scc, pairs=problem.pairs)
        else:
            cs = build_constraints(step.scc, problem)
            if cs.mode != step.mode:
                errors.append(f"step mode {step.mode} does not match {cs.mode}")
                break
            verdict = check_certificate(cs, step.cert)
        if not verdict.valid:
            errors.append(f"certificate rejected: {verdict.reason}")
            break
        if tuple(sorted(step.removed)) != tuple(sorted(verdict.strict)):
            errors.append("removed pairs do not match the strictly oriented ones")
            break
        if not set(step.removed) <= set(step.scc):
            errors.append("removed pairs outside the SCC")
            break
        if not step.removed:
            errors.append("step removed no pairs")
            break
        removed_total.extend(step.removed)
        graph = graph.without(step.removed)

    if not errors:
        if proof.verdict == YES:
            if graph.alive:
                errors.append("verdict YES but pairs remain")
            elif sorted(removed_total) != sorted(range(len(problem.pairs))):
                errors.append("removal bookkeeping does not cover all pairs exactly once")
        else:
            if not isinstance(proof.steps[-1], GiveUp):
                errors.append("verdict MAYBE without a give-up step")
    return errors


# corpus ----------------------------------------------------------------------


@dataclass
class CorpusEntry:
    path: Path
    expect: Optional[str]
    verdict: Optional[str]
    seconds: float
    steps: int
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        if self.error is not None:
            return False
        return self.expect is None or self.expect == self.verdict


def expected_verdict(text: str) -> Optional[str]:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#") and "expect:" in stripped:
            value = stripped.split("expect:", 1)[1].strip()
            if value in (YES, MAYBE):
                return value
    return None


def run_corpus(directory: Union[str, Path], cfg: Optional[Config] = None) -> list[CorpusEntry]:
    from .parser import parse_afs

    cfg = cfg or Config()
    out: list[CorpusEntry] = []
    for path in sorted(Path(directory).glob("*.afs")):
        text = path.read_text()
        expect = expected_verdict(text)
        start = time.monotonic()
        try:
            afs = parse_afs(text)
            proof = prove(afs, cfg)
            out.append(CorpusEntry(path, expect, proof.verdict,
                                   time.monotonic() - start, len(proof.steps)))
        except Exception as exc:  # parse failures must not abort the run
            out.append(CorpusEntry(path, expect, None,
                                   time.monotonic() - start, 0, error=str(exc)))
    return out

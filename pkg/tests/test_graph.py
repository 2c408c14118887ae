"""Dependency graph approximation, SCCs, pruning."""

import random

from afsterm.afs import complete, classify
from afsterm.dp import dependency_pairs
from afsterm.graph import DPGraph, approximate_graph, prune, sccs, to_dot

from helpers import load


def build(name, spfp_drop=True):
    afs = classify(complete(load(name)))
    prob = dependency_pairs(afs, spfp_drop=spfp_drop)
    return prob, approximate_graph(prob)


class TestApproximation:
    def test_twice_single_scc_of_six(self):
        prob, g = build("twice")
        comps = sccs(g)
        assert comps == [(0, 1, 3, 4, 5, 6)]
        # the I#(s(n)) ~> I#(!c{nat}) pair is not on any cycle
        assert str(prob.pairs[2]) == "I#(s(n)) ~> I#(!c{nat})"

    def test_eval_edges_as_drawn(self):
        prob, g = build("eval")
        # pairs: 0 dom(s..)~>dom, 1 dom(o..)~>dom(o..), 2 eval~>F dom, 3 eval~>dom#
        index = {str(p): i for i, p in enumerate(prob.pairs)}
        d1 = index["dom#(s(x), s(y), s(z)) ~> dom#(x, y, z)"]
        d2 = index["dom#(o, s(y), s(z)) ~> dom#(o, y, z)"]
        e1 = index["eval#(fun(F, x, y), z) ~> F @ dom(x, y, z)"]
        e2 = index["eval#(fun(F, x, y), z) ~> dom#(x, y, z)"]
        expected = {
            e1: {e1, e2, d1, d2},
            e2: {d1, d2},
            d1: {d1, d2},
            d2: {d2},  # dom#(o,..) cannot reach dom#(s(x),..): o never becomes s
        }
        for i, targets in expected.items():
            assert g.out_edges(i) == frozenset(targets), f"node {i}"

    def test_collapsing_node_reaches_everything(self):
        prob, g = build("twice")
        for i, p in enumerate(prob.pairs):
            if p.collapsing:
                assert g.out_edges(i) == g.alive

    def test_fromchain_sccs(self):
        # without the static-mode drop this is the eight-pair system with
        # SCCs {lteq}, {from}, and {incch, chain-collapsing, chain}
        prob, g = build("fromchain", spfp_drop=False)
        assert len(prob.pairs) == 8
        comps = sccs(g)
        as_named = [tuple(str(prob.pairs[i]).split(" ~>")[0] for i in c) for c in comps]
        assert len(comps) == 3
        sizes = sorted(len(c) for c in comps)
        assert sizes == [1, 1, 3]
        big = max(comps, key=len)
        texts = [str(prob.pairs[i]) for i in big]
        assert any("incch#" in t for t in texts)
        assert any("~> F @ y" in t for t in texts)
        assert any("chain#(F, from(F @ y, z))" in t for t in texts)

    def test_singleton_without_self_loop(self):
        prob, g = build("eval")
        # eval# ~> dom# has no self loop and is in no SCC
        i = [k for k, p in enumerate(prob.pairs)
             if str(p) == "eval#(fun(F, x, y), z) ~> dom#(x, y, z)"][0]
        assert i not in {n for comp in sccs(g) for n in comp}


class TestPrune:
    def test_eval_prune_drops_one(self):
        prob, g = build("eval")
        pruned = prune(g)
        dropped = g.alive - pruned.alive
        assert len(dropped) == 1
        (i,) = dropped
        assert str(prob.pairs[i]) == "eval#(fun(F, x, y), z) ~> dom#(x, y, z)"

    def test_idempotent(self):
        _, g = build("twice")
        once = prune(g)
        assert prune(once).alive == once.alive

    def test_fully_cyclic_unchanged(self):
        _, g = build("ack")
        assert prune(g).alive == g.alive

    def test_empty(self):
        g = DPGraph((), {}, frozenset())
        assert prune(g).empty
        assert sccs(g) == []

    def test_prune_equals_scc_union(self):
        for name in ("twice", "eval", "fromchain", "fga"):
            _, g = build(name)
            assert prune(g).alive == {n for c in sccs(g) for n in c}


class TestSccOracle:
    @staticmethod
    def brute_sccs(n, edges):
        reach = [[False] * n for _ in range(n)]
        for i in range(n):
            stack = [i]
            seen = set()
            while stack:
                v = stack.pop()
                for w in edges.get(v, ()):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            for w in seen:
                reach[i][w] = True
        comps = {}
        for i in range(n):
            members = tuple(sorted(
                j for j in range(n)
                if reach[i][j] and reach[j][i]
            ))
            # on a cycle: mutually reachable with itself through >= 1 edge
            if reach[i][i]:
                comps[members if members else (i,)] = None
        out = sorted({tuple(sorted(set(c) | {i for i in c})) for c in comps})
        return sorted(out, key=lambda c: c[0])

    def test_random_graphs_match_oracle(self):
        rng = random.Random(42)
        for trial in range(200):
            n = rng.randrange(1, 13)
            edges = {}
            for i in range(n):
                edges[i] = frozenset(
                    j for j in range(n) if rng.random() < 0.25)
            g = DPGraph(tuple(range(n)), edges, frozenset(range(n)))
            got = sccs(g)
            want = self.brute_sccs(n, edges)
            assert got == want, f"trial {trial}: {edges}"


def test_dot_output():
    _, g = build("eval")
    dot = to_dot(g)
    assert dot.startswith("digraph")
    assert "->" in dot

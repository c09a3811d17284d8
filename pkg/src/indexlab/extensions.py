"""Variants of index coding that reduce to, or are bracketed by, the basic problem.

Multi-round and block variants become an ordinary side-information graph
(blow-up or composition).  Shared requests, where several receivers may ask
for the same bit, are described by a :class:`P4Instance`: an m x n knowledge
grid plus one demanded bit per receiver.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf import FieldSpec
from .graph import BudgetExhausted, Graph, blow_up, compose
from .indexcode import ConfusionGraph, EllResult, confusion_from_receivers, optimal_length
from .matrix import FFMatrix
from .minrank import (
    DEFAULT_BUDGET,
    MinrankResult,
    RankSearch,
    RowPattern,
    Violation,
    _check_pattern,
)


@dataclass(frozen=True)
class P4Instance:
    m: int
    n: int
    knows: tuple[tuple[bool, ...], ...]
    wants: tuple[int, ...]

    def __post_init__(self) -> None:
        knows = tuple(tuple(bool(b) for b in row) for row in self.knows)
        wants = tuple(int(w) for w in self.wants)
        object.__setattr__(self, "knows", knows)
        object.__setattr__(self, "wants", wants)
        if len(knows) != self.m or any(len(row) != self.n for row in knows):
            raise ValueError(f"knowledge grid must be {self.m} x {self.n}")
        if len(wants) != self.m:
            raise ValueError(f"need one demand per receiver, got {len(wants)}")
        for i, w in enumerate(wants):
            if not 0 <= w < self.n:
                raise ValueError(f"receiver {i} demands bit {w}, outside [0, {self.n})")
            if knows[i][w]:
                raise ValueError(f"receiver {i} already knows the bit it demands")

    def known_mask(self, i: int) -> int:
        return sum(1 << j for j, b in enumerate(self.knows[i]) if b)

    def receivers(self) -> list[tuple[int, int]]:
        return [(self.wants[i], self.known_mask(i)) for i in range(self.m)]

    def without(self, i: int) -> "P4Instance":
        keep = [r for r in range(self.m) if r != i]
        return P4Instance(self.m - 1, self.n, [self.knows[r] for r in keep], [self.wants[r] for r in keep])

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "wants": list(self.wants),
                "knows": [list(row) for row in self.knows]}

    @classmethod
    def from_json(cls, obj: dict | str) -> "P4Instance":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["m"], obj["n"], obj["knows"], obj["wants"])

    @classmethod
    def from_graph(cls, g: Graph) -> "P4Instance":
        """Receiver i wants bit i and knows its out-neighbours."""
        knows = g.adjacency_matrix().tolist()
        return cls(g.n, g.n, knows, list(range(g.n)))


def split_demands(n: int, knows: Sequence[Sequence[bool]], demands: Sequence[Sequence[int]]) -> P4Instance:
    """A receiver asking for several bits becomes one clone per bit, same knowledge."""
    rows, wants = [], []
    for row, ds in zip(knows, demands):
        for d in ds:
            rows.append(row)
            wants.append(d)
    return P4Instance(len(wants), n, rows, wants)


@dataclass
class Reduction:
    graph: Graph
    demand: list[tuple[int, int]]  # vertex -> (bit, round)


def reduce_to_basic(kind: str, base, t: int | None = None) -> Reduction:
    """Graph for t rounds ("blowup", same graph each round) or for a list of
    per-round graphs ("compose").  Vertex u * t + k stands for bit u of round k.
    """
    if kind == "blowup":
        if not isinstance(base, Graph) or t is None:
            raise ValueError("blowup needs a graph and a round count t")
        g = blow_up(base, t)
        rounds, n = t, base.n
    elif kind == "compose":
        graphs = list(base)
        g = compose(graphs)
        rounds, n = len(graphs), graphs[0].n
    else:
        raise ValueError(f"unknown reduction {kind!r}")
    return Reduction(g, [(u, k) for u in range(n) for k in range(rounds)])


def build_gind_gcl(inst: P4Instance) -> tuple[Graph, Graph]:
    """Two m-vertex graphs bracketing the shared-request instance.

    Receivers with a common demand form an independent set in the first
    and a bidirected clique in the second; otherwise i -> j iff receiver i
    knows the bit receiver j wants.
    """
    ind, cl = [], []
    for i in range(inst.m):
        for j in range(inst.m):
            if i == j:
                continue
            if inst.wants[i] == inst.wants[j]:
                cl.append((i, j))
            elif inst.knows[i][inst.wants[j]]:
                ind.append((i, j))
                cl.append((i, j))
    return Graph.from_edges(inst.m, ind), Graph.from_edges(inst.m, cl)


def p4_represents_check(b: FFMatrix, inst: P4Instance) -> list[Violation]:
    if b.shape != (inst.m, inst.n):
        raise ValueError(f"{b.rows}x{b.cols} matrix for a {inst.m}x{inst.n} instance")
    allowed = np.array(inst.knows, dtype=bool).reshape(inst.m, inst.n)
    return _check_pattern(b.entries, allowed, np.array(inst.wants, dtype=np.int64))


def p4_patterns(inst: P4Instance) -> list[RowPattern]:
    return [RowPattern(inst.wants[i], tuple(j for j in range(inst.n) if inst.knows[i][j]))
            for i in range(inst.m)]


def p4_minrank(inst: P4Instance, f: FieldSpec, budget: int | None = DEFAULT_BUDGET) -> MinrankResult:
    """Exact minimum rank of an m x n matrix obeying the instance's zero pattern.

    Upper bound: one unit row per demand, rank = number of distinct demands.
    """
    fallback = np.zeros((inst.m, inst.n), dtype=np.int64)
    fallback[np.arange(inst.m), list(inst.wants)] = 1
    upper = len(set(inst.wants))
    if inst.m == 0:
        return MinrankResult(0, True, FFMatrix(f, fallback))
    search = RankSearch(p4_patterns(inst), inst.n, f, budget)
    try:
        for r in range(1, upper):
            rows = search.feasible(r)
            if rows is not None:
                return MinrankResult(r, True, FFMatrix(f, rows), search.nodes, 1, upper)
    except BudgetExhausted:
        return MinrankResult(upper, False, FFMatrix(f, fallback), search.nodes, 1, upper)
    return MinrankResult(upper, True, FFMatrix(f, fallback), search.nodes, 1, upper)


def p4_confusion_graph(inst: P4Instance) -> ConfusionGraph:
    """x ~ y iff some receiver wants a bit where they differ yet sees them agree."""
    return confusion_from_receivers(inst.n, inst.receivers())


def p4_ell(inst: P4Instance, budget: int | None = None) -> EllResult:
    return optimal_length(p4_confusion_graph(inst), budget)


def all_instances(m: int, n: int):
    """Every instance with exactly m receivers over n bits."""
    for wants in itertools.product(range(n), repeat=m):
        free = [(i, j) for i in range(m) for j in range(n) if j != wants[i]]
        for bits in itertools.product((False, True), repeat=len(free)):
            knows = [[False] * n for _ in range(m)]
            for (i, j), b in zip(free, bits):
                knows[i][j] = b
            yield P4Instance(m, n, knows, wants)

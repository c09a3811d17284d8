"""Representing matrices and exact minrank over small finite fields.

A matrix represents a graph when its diagonal is nonzero and it vanishes
at every off-diagonal non-edge.  Exact minrank is found by a row-by-row
search at increasing target ranks: each row is normalised to 1 at its
diagonal, its free entries sit at the out-neighbours, and a reduced
row-echelon basis of the rows chosen so far prunes every branch whose
rank would exceed the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple, Sequence

import numpy as np

from .gf import FieldSpec
from .graph import (
    DEFAULT_ALPHA_CAP,
    DEFAULT_COVER_CAP,
    DEFAULT_MAIS_CAP,
    BudgetExhausted,
    Graph,
    clique_cover,
    independence_number,
    mais,
)
from .matrix import FFMatrix, block_diag, identity, rank

DEFAULT_BUDGET = 2_000_000


class Violation(NamedTuple):
    row: int
    col: int
    value: int
    kind: str  # "zero-diagonal" | "nonzero-off-edge"


def _check_pattern(entries: np.ndarray, allowed: np.ndarray, lead: np.ndarray) -> list[Violation]:
    """Violations of: entries[lead] != 0, and entries == 0 outside ``allowed``."""
    out = []
    rows = np.arange(entries.shape[0])
    for i in np.flatnonzero(entries[rows, lead] == 0):
        out.append(Violation(int(i), int(lead[i]), 0, "zero-diagonal"))
    bad = (entries != 0) & ~allowed
    bad[rows, lead] = False
    for i, j in zip(*np.nonzero(bad)):
        out.append(Violation(int(i), int(j), int(entries[i, j]), "nonzero-off-edge"))
    return sorted(out)


def represents_check(m: FFMatrix, g: Graph) -> list[Violation]:
    """Every way m fails to represent g; an empty list means it does."""
    if m.rows != m.cols or m.rows != g.n:
        raise ValueError(f"{m.rows}x{m.cols} matrix cannot represent a graph on {g.n} vertices")
    return _check_pattern(m.entries, g.adjacency_matrix(), np.arange(g.n))


def represents(m: FFMatrix, g: Graph) -> bool:
    return not represents_check(m, g)


@dataclass(frozen=True)
class Representation:
    graph: Graph
    field: FieldSpec
    matrix: FFMatrix

    def __post_init__(self) -> None:
        if self.matrix.field != self.field:
            raise ValueError("matrix field does not match")
        bad = represents_check(self.matrix, self.graph)
        if bad:
            raise ValueError(f"matrix does not represent the graph: {bad[:5]}")

    @property
    def rank(self) -> int:
        return rank(self.matrix)


@dataclass
class MinrankResult:
    value: int
    optimal: bool
    witness: FFMatrix | None
    nodes: int = 0
    lower: int = 0
    upper: int = 0

    def to_json(self) -> dict:
        out = {"value": self.value, "optimal": self.optimal, "nodes": self.nodes,
               "lower": self.lower, "upper": self.upper}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


class RowPattern(NamedTuple):
    lead: int  # column forced nonzero (normalised to 1)
    free: tuple[int, ...]  # columns that may take any value


class RankSearch:
    """Decide whether some matrix with the given row patterns has rank <= r."""

    def __init__(self, patterns: Sequence[RowPattern], ncols: int, field: FieldSpec,
                 budget: int | None = DEFAULT_BUDGET):
        self.patterns = list(patterns)
        self.ncols = ncols
        self.field = field
        self.budget = budget
        self.nodes = 0
        self.order = sorted(range(len(self.patterns)),
                            key=lambda i: (len(self.patterns[i].free), i))
        self._add, self._mul, self._neg, self._inv = field.tables
        for pat in self.patterns:
            if pat.lead in pat.free:
                raise ValueError("lead column listed as free")

    def _tick(self) -> None:
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExhausted(f"minrank search exceeded {self.budget} nodes", self.nodes)

    def _axpy(self, v: list[int], c: int, w: Sequence[int]) -> None:
        """v -= c * w, in place."""
        add, mul, neg = self._add, self._mul, self._neg
        nc = neg[c]
        for j, x in enumerate(w):
            if x:
                v[j] = add[v[j]][mul[nc][x]]

    def _insert(self, basis: tuple, vec: list[int]) -> tuple | None:
        """Basis extended by vec in RREF, or None if vec is already in the span."""
        res = list(vec)
        for piv, b in basis:
            c = res[piv]
            if c:
                self._axpy(res, c, b)
        piv = next((j for j, x in enumerate(res) if x), None)
        if piv is None:
            return None
        s = self._inv[res[piv]]
        res = tuple(self._mul[s][x] for x in res)
        new = []
        for p, b in basis:
            if b[piv]:
                bl = list(b)
                self._axpy(bl, b[piv], res)
                b = tuple(bl)
            new.append((p, b))
        new.append((piv, res))
        new.sort()
        return tuple(new)

    def _span_candidates(self, basis: tuple, pat: RowPattern):
        q = len(self._add)
        fixed: list[tuple[Sequence[int], int]] = []
        free_vecs: list[Sequence[int]] = []
        free = set(pat.free)
        for piv, b in basis:
            if piv == pat.lead:
                fixed.append((b, 1))
            elif piv in free:
                free_vecs.append(b)
        allowed = free | {pat.lead}
        zero_cols = [j for j in range(self.ncols) if j not in allowed]
        base = [0] * self.ncols
        for b, c in fixed:
            for j, x in enumerate(b):
                if x:
                    base[j] = self._add[base[j]][self._mul[c][x]]
        for coefs in itertools.product(range(q), repeat=len(free_vecs)):
            v = list(base)
            for c, b in zip(coefs, free_vecs):
                if c:
                    for j, x in enumerate(b):
                        if x:
                            v[j] = self._add[v[j]][self._mul[c][x]]
            if v[pat.lead] == 1 and not any(v[j] for j in zero_cols):
                yield v

    def _pattern_vectors(self, pat: RowPattern):
        q = len(self._add)
        for vals in itertools.product(range(q), repeat=len(pat.free)):
            v = [0] * self.ncols
            v[pat.lead] = 1
            for j, x in zip(pat.free, vals):
                v[j] = x
            yield v

    def feasible(self, r: int) -> list[list[int]] | None:
        """Rows (in original order) of a rank <= r solution, or None.

        What remains solvable depends only on the span of the rows chosen so
        far, and an RREF basis is a canonical name for that span; children
        are therefore merged by resulting basis and failed (depth, basis)
        states are remembered.
        """
        m = len(self.patterns)
        rows: list[list[int] | None] = [None] * m
        failed: set[tuple[int, tuple]] = set()

        def rec(d: int, basis: tuple) -> bool:
            if d == m:
                return True
            if (d, basis) in failed:
                return False
            self._tick()
            i = self.order[d]
            pat = self.patterns[i]
            if len(basis) == r:
                # the basis cannot grow, so one admissible row is as good as any
                v = next(self._span_candidates(basis, pat), None)
                if v is not None:
                    rows[i] = v
                    if rec(d + 1, basis):
                        return True
            else:
                tried = set()
                for v in self._pattern_vectors(pat):
                    nb = self._insert(basis, v)
                    nb = basis if nb is None else nb
                    if nb in tried:
                        continue
                    tried.add(nb)
                    rows[i] = v
                    if rec(d + 1, nb):
                        return True
            failed.add((d, basis))
            return False

        if r < 0:
            return None
        if rec(0, ()):
            return [list(r_) for r_ in rows]  # type: ignore[arg-type]
        return None


def graph_patterns(g: Graph) -> list[RowPattern]:
    return [RowPattern(i, tuple(g.out_neighbors(i))) for i in range(g.n)]


def _clique_witness(g: Graph, f: FieldSpec, parts: list[list[int]]) -> FFMatrix:
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for part in parts:
        a[np.ix_(part, part)] = 1
    return FFMatrix(f, a)


@dataclass
class MinrankBounds:
    lower: int
    upper: int
    alpha: int
    mais: int | None = None
    cover: list[list[int]] = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "alpha": self.alpha, "mais": self.mais}


def minrank_bounds(g: Graph, alpha_cap: int = DEFAULT_ALPHA_CAP, mais_cap: int = DEFAULT_MAIS_CAP,
                   cover_cap: int = DEFAULT_COVER_CAP) -> MinrankBounds:
    """Field-independent sandwich: max(alpha, MAIS) <= minrk <= clique cover number."""
    alpha = independence_number(g, alpha_cap)
    m = None if g.is_undirected() else mais(g, mais_cap)
    parts = clique_cover(g, cover_cap)
    return MinrankBounds(max(alpha, m or 0), len(parts), alpha, m if m is not None else alpha, parts)


def exact_minrank(g: Graph, f: FieldSpec, budget: int | None = DEFAULT_BUDGET,
                  use_bounds: bool = True) -> MinrankResult:
    """Exact minrank of g over f with a witness matrix.

    With ``use_bounds`` the search starts at max(alpha, MAIS) and stops
    below the clique-cover number, whose block witness is returned if no
    smaller rank is feasible.  Without it the search runs from rank 1 and
    falls back to the identity, so nothing is taken from the combinatorial
    bounds.  If the node budget runs out the best known upper bound is
    returned with ``optimal=False``.
    """
    n = g.n
    if n == 0:
        return MinrankResult(0, True, FFMatrix(f, np.zeros((0, 0), np.int64)))
    if use_bounds and n <= DEFAULT_COVER_CAP:
        b = minrank_bounds(g)
        lower, upper = b.lower, b.upper
        fallback = _clique_witness(g, f, b.cover)
    else:
        lower, upper = 1, n
        fallback = identity(f, n)
    search = RankSearch(graph_patterns(g), n, f, budget)
    try:
        for r in range(lower, upper):
            rows = search.feasible(r)
            if rows is not None:
                return MinrankResult(r, True, FFMatrix(f, rows), search.nodes, lower, upper)
    except BudgetExhausted:
        return MinrankResult(upper, False, fallback, search.nodes, lower, upper)
    return MinrankResult(upper, True, fallback, search.nodes, lower, upper)


def minrank(g: Graph, f: FieldSpec, budget: int | None = DEFAULT_BUDGET) -> int:
    res = exact_minrank(g, f, budget)
    if not res.optimal:
        raise BudgetExhausted(f"minrank search exceeded {budget} nodes", res.nodes)
    return res.value


def union_minrank(gs: Sequence[Graph], f: FieldSpec, budget: int | None = DEFAULT_BUDGET) -> MinrankResult:
    """Minrank of a disjoint union as the sum over components, block-diagonal witness."""
    if not gs:
        raise ValueError("union_minrank needs at least one graph")
    parts = [exact_minrank(g, f, budget) for g in gs]
    if not all(p.optimal for p in parts):
        raise BudgetExhausted("a component exhausted its minrank budget", sum(p.nodes for p in parts))
    blocks = [p.witness for p in parts if p.witness is not None and p.witness.rows]
    witness = block_diag(blocks) if blocks else FFMatrix(f, np.zeros((0, 0), np.int64))
    value = sum(p.value for p in parts)
    return MinrankResult(value, True, witness, sum(p.nodes for p in parts), value, value)


def reduce_representation(rep: Representation) -> Representation:
    """GF(p^k) representation -> GF(p) representation of rank <= k * rank.

    Rows are scaled to a unit diagonal, then every entry is replaced by the
    constant coefficient of its polynomial.
    """
    f = rep.field
    a = rep.matrix.entries
    diag_inv = f.inv(np.diagonal(a).copy())
    scaled = f.mul(a, diag_inv[:, None])
    base = FieldSpec(f.p)
    return Representation(rep.graph, base, FFMatrix(base, f.const_coeff(scaled)))

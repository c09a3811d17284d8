"""Set-system graphs whose minranks over two fields are far apart.

Vertices are the s-subsets of a ground set [r]; two distinct subsets are
adjacent iff their intersection size is -1 modulo p^k.  With s = p^k q^l - 1
the Gram-type matrices of inclusion matrices,

    P(A, B) = C(|A & B|, p^k - 1) mod p,   Q(A, B) = C(|A & B|, q^l - 1) mod q,

represent the graph over GF(p) and its complement over GF(q) while having
rank at most C(r, p^k - 1) and C(r, q^l - 1) respectively.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .gf import FieldSpec, binomial_mod_p, is_prime
from .graph import CapExceeded, Graph, complement, disjoint_union
from .matrix import FFMatrix, field_matmul, rank, streaming_rank
from .minrank import represents_check

DEFAULT_VERTEX_CAP = 10**6
DEFAULT_GRAPH_CAP = 20_000
DEFAULT_ENTRY_CAP = 50_000_000
LITERAL_CHECK_CAP = 500


@dataclass(frozen=True)
class RamseyParams:
    p: int
    q: int
    k: int
    l: int
    r: int
    s: int
    epsilon: Fraction

    @property
    def pk(self) -> int:
        return self.p**self.k

    @property
    def ql(self) -> int:
        return self.q**self.l

    @classmethod
    def from_exponents(cls, p: int, q: int, k: int, l: int, r: int | None = None) -> "RamseyParams":
        if not (is_prime(p) and is_prime(q)) or p == q:
            raise ValueError("p and q must be distinct primes")
        if k < 1 or l < 1:
            raise ValueError("exponents k and l must be positive")
        pk, ql = p**k, q**l
        if not ql < pk:
            raise ValueError(f"need q^l < p^k, got {q}^{l}={ql} >= {p}^{k}={pk}")
        s = pk * ql - 1
        r = p ** (3 * k) if r is None else r
        if r < s:
            raise ValueError(f"ground set size r={r} is smaller than s={s}")
        return cls(p, q, k, l, r, s, Fraction(pk, ql) - 1)

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "k": self.k, "l": self.l, "r": self.r, "s": self.s,
                "epsilon": str(self.epsilon)}


def find_params(p: int, q: int, epsilon, k_max: int = 64) -> RamseyParams:
    """Smallest k <= k_max with q^l < p^k < (1 + epsilon) q^l, l = floor(k log_q p).

    All comparisons are exact; epsilon may be a float, str or Fraction.
    """
    if not (is_prime(p) and is_prime(q)) or p == q:
        raise ValueError("p and q must be distinct primes")
    eps = Fraction(str(epsilon)) if not isinstance(epsilon, Fraction) else epsilon
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    for k in range(1, k_max + 1):
        pk = p**k
        l, ql = 0, 1
        while ql * q <= pk:
            l, ql = l + 1, ql * q
        if l < 1:
            continue
        # p^k < (1 + eps) q^l  <=>  p^k * den < (den + num) * q^l
        if pk * eps.denominator < (eps.denominator + eps.numerator) * ql:
            return RamseyParams.from_exponents(p, q, k, l)
    raise ValueError(f"no k <= {k_max} satisfies q^l < p^k < (1+{eps}) q^l for p={p}, q={q}")


# -- subsets in colexicographic order ------------------------------------------------

def colex_subsets(r: int, s: int) -> list[tuple[int, ...]]:
    return sorted(itertools.combinations(range(r), s), key=lambda c: c[::-1])


def colex_rank(subset: Sequence[int]) -> int:
    return sum(math.comb(a, i + 1) for i, a in enumerate(sorted(subset)))


def _comb_table(r: int, d: int) -> np.ndarray:
    return np.array([[math.comb(x, t) for t in range(d + 1)] for x in range(r)], dtype=np.int64)


def _subset_array(r: int, s: int) -> np.ndarray:
    subs = colex_subsets(r, s)
    return np.array(subs, dtype=np.int64).reshape(len(subs), s)


@dataclass
class RamseyInstance:
    params: RamseyParams
    vertices: np.ndarray  # (n, s) sorted members of each subset, colex order
    graph_cap: int = DEFAULT_GRAPH_CAP

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @property
    def r(self) -> int:
        return self.params.r

    @property
    def s(self) -> int:
        return self.params.s

    def incidence(self) -> np.ndarray:
        inc = np.zeros((self.n, self.r), dtype=np.int64)
        np.put_along_axis(inc, self.vertices, 1, axis=1)
        return inc

    @cached_property
    def intersections(self) -> np.ndarray:
        """|A & B| for every pair of vertices."""
        if self.n > self.graph_cap:
            raise CapExceeded(f"{self.n} vertices exceeds the pairwise cap {self.graph_cap}")
        inc = self.incidence().astype(np.float64)
        return np.rint(inc @ inc.T).astype(np.int64)

    @cached_property
    def graph(self) -> Graph:
        pk = self.params.pk
        return Graph.from_matrix(self.intersections % pk == pk - 1)

    def adjacent(self, a: int, b: int) -> bool:
        if a == b:
            return False
        inter = len(set(self.vertices[a].tolist()) & set(self.vertices[b].tolist()))
        return inter % self.params.pk == self.params.pk - 1

    def index_of(self, subset: Sequence[int]) -> int:
        return colex_rank(subset)


def build_ramsey_graph(params: RamseyParams, r_override: int | None = None,
                       vertex_cap: int = DEFAULT_VERTEX_CAP,
                       graph_cap: int = DEFAULT_GRAPH_CAP) -> RamseyInstance:
    """Enumerate the vertex set; the graph itself is built on first access.

    ``r_override`` replaces the ground set size (any r >= s keeps the
    representation argument intact).
    """
    if r_override is not None:
        params = RamseyParams.from_exponents(params.p, params.q, params.k, params.l, r_override)
    n = math.comb(params.r, params.s)
    if n > vertex_cap:
        raise CapExceeded(f"C({params.r},{params.s}) = {n} vertices exceeds the cap {vertex_cap}")
    return RamseyInstance(params, _subset_array(params.r, params.s), graph_cap)


def inclusion_rows(r: int, s: int, d: int, f: FieldSpec, chunk: int = 4096,
                   vertices: np.ndarray | None = None) -> Iterator[np.ndarray]:
    """Rows of the inclusion matrix M_d, ``chunk`` rows at a time."""
    if not 0 <= d <= s <= r:
        raise ValueError(f"need 0 <= d <= s <= r, got d={d}, s={s}, r={r}")
    subs = _subset_array(r, s) if vertices is None else vertices
    cols = math.comb(r, d)
    table = _comb_table(r, d)
    combos = list(itertools.combinations(range(s), d))
    positions = np.array(combos, dtype=np.int64).reshape(len(combos), d)
    for start in range(0, subs.shape[0], chunk):
        block = subs[start : start + chunk]
        idx = np.zeros((block.shape[0], positions.shape[0]), dtype=np.int64)
        for t in range(d):
            idx += table[block[:, positions[:, t]], t + 1]
        out = np.zeros((block.shape[0], cols), dtype=np.int64)
        np.put_along_axis(out, idx, 1, axis=1)
        yield out


def inclusion_matrix(r: int, s: int, d: int, f: FieldSpec, cap: int = DEFAULT_ENTRY_CAP) -> FFMatrix:
    """The C(r,s) x C(r,d) containment matrix, colex order on both sides."""
    if not 0 <= d <= s <= r:
        raise ValueError(f"need 0 <= d <= s <= r, got d={d}, s={s}, r={r}")
    size = math.comb(r, s) * math.comb(r, d)
    if size > cap:
        raise CapExceeded(f"inclusion matrix with {size} entries exceeds the cap {cap}")
    return FFMatrix(f, np.vstack(list(inclusion_rows(r, s, d, f))))


def inclusion_rank(r: int, s: int, d: int, f: FieldSpec, chunk: int = 4096) -> int:
    """Rank of M_d over f, streaming rows so only a C(r,d)-row basis is kept."""
    return streaming_rank(f, math.comb(r, d), inclusion_rows(r, s, d, f, chunk))


@dataclass
class PQ:
    P: FFMatrix
    Q: FFMatrix
    literal_checked: bool = False


def build_PQ(inst: RamseyInstance, literal_cap: int = LITERAL_CHECK_CAP) -> PQ:
    """P over GF(p) and Q over GF(q) from intersection sizes.

    For instances with at most ``literal_cap`` vertices both are also
    recomputed as M_d M_d^T and compared entrywise.
    """
    pr = inst.params
    inter = inst.intersections
    tp = np.array([binomial_mod_p(x, pr.pk - 1, pr.p) for x in range(pr.s + 1)], dtype=np.int64)
    tq = np.array([binomial_mod_p(x, pr.ql - 1, pr.q) for x in range(pr.s + 1)], dtype=np.int64)
    fp, fq = FieldSpec(pr.p), FieldSpec(pr.q)
    P = FFMatrix(fp, tp[inter])
    Q = FFMatrix(fq, tq[inter])
    checked = False
    if inst.n <= literal_cap:
        for mat, fld, d in ((P, fp, pr.pk - 1), (Q, fq, pr.ql - 1)):
            m = np.vstack(list(inclusion_rows(pr.r, pr.s, d, fld, vertices=inst.vertices)))
            if not np.array_equal(field_matmul(fld, m, m.T), mat.entries):
                raise AssertionError(f"closed-form Gram matrix disagrees with M_{d} M_{d}^T")
        checked = True
    return PQ(P, Q, checked)


@dataclass
class ConstructionReport:
    n: int
    p_violations: list = dc_field(default_factory=list)
    q_violations: list = dc_field(default_factory=list)
    rank_p_P: int = 0
    rank_q_Q: int = 0
    col_bound_p: int = 0
    col_bound_q: int = 0
    minrk_lower_q: int = 0
    crt_violations: int = 0
    literal_checked: bool = False

    @property
    def passed(self) -> bool:
        return (not self.p_violations and not self.q_violations and self.crt_violations == 0
                and self.rank_p_P <= self.col_bound_p and self.rank_q_Q <= self.col_bound_q)

    def to_json(self) -> dict:
        return {"n": self.n, "rank_p_P": self.rank_p_P, "rank_q_Q": self.rank_q_Q,
                "minrk_lower_q": self.minrk_lower_q, "col_bound_p": self.col_bound_p,
                "col_bound_q": self.col_bound_q, "p_violations": len(self.p_violations),
                "q_violations": len(self.q_violations), "crt_violations": self.crt_violations,
                "literal_checked": self.literal_checked, "passed": self.passed}


def verify_construction(inst: RamseyInstance, pq: PQ | None = None) -> ConstructionReport:
    """Check P represents G over GF(p), Q represents the complement over GF(q).

    Also reports both ranks, the column-count upper bounds, and the lower
    bound minrk_q(G) >= ceil(n / rank_q(Q)) that follows from
    minrk(G) * minrk(complement) >= n.
    """
    pr = inst.params
    pq = build_PQ(inst) if pq is None else pq
    g = inst.graph
    rep = ConstructionReport(inst.n, literal_checked=pq.literal_checked)
    rep.p_violations = represents_check(pq.P, g)
    rep.q_violations = represents_check(pq.Q, complement(g))
    rep.rank_p_P = rank(pq.P)
    rep.rank_q_Q = rank(pq.Q)
    rep.col_bound_p = math.comb(pr.r, pr.pk - 1)
    rep.col_bound_q = math.comb(pr.r, pr.ql - 1)
    rep.minrk_lower_q = -(-inst.n // rep.rank_q_Q) if rep.rank_q_Q else 0
    adj = g.adjacency_matrix()
    rep.crt_violations = int(np.count_nonzero(adj & (inst.intersections % pr.ql == pr.ql - 1)))
    return rep


@dataclass
class UnionWitness:
    H: Graph
    witness: list[tuple[int, int]]
    independent: bool

    @property
    def size(self) -> int:
        return len(self.witness)

    @property
    def capacity_lower_bound(self) -> float:
        """sqrt(|witness|): alpha of the square bounds the Shannon capacity."""
        return math.sqrt(self.size)


def _product_edge(adj: Sequence[int], u: tuple[int, int], v: tuple[int, int]) -> bool:
    """Is (u, v) an edge of the strong square of the graph with bitsets adj?"""
    return all(a == b or adj[a] >> b & 1 for a, b in zip(u, v))


def build_union_H(g) -> UnionWitness:
    """H = G + complement(G) and the 2n-vertex independent set of H x H.

    The witness {(v_i, v'_i)} + {(v'_i, v_i)} is checked pair by pair;
    the product graph itself is never built.
    """
    if isinstance(g, RamseyInstance):
        g = g.graph
    n = g.n
    H = disjoint_union([g, complement(g)])
    witness = [(i, n + i) for i in range(n)] + [(n + i, i) for i in range(n)]
    adj = H.adj
    independent = not any(
        _product_edge(adj, witness[a], witness[b]) or _product_edge(adj, witness[b], witness[a])
        for a in range(len(witness)) for b in range(a + 1, len(witness))
    )
    return UnionWitness(H, witness, independent)


def asymptotic_bound(n: float) -> float:
    """exp(sqrt(2 ln n ln ln n)); a diagnostic with the vanishing term dropped."""
    if n < 3:
        raise ValueError("the bound needs n >= 3")
    ln = math.log(n)
    return math.exp(math.sqrt(2 * ln * math.log(ln)))


def relabel(inst: RamseyInstance, perm: Sequence[int]) -> np.ndarray:
    """Vertex permutation induced by relabelling the ground set with perm."""
    perm = np.asarray(perm, dtype=np.int64)
    images = np.sort(perm[inst.vertices], axis=1)
    table = _comb_table(inst.r, inst.s)
    return sum(table[images[:, t], t + 1] for t in range(inst.s))

"""Directed side-information graphs and the operators used on them.

A graph on ``n`` vertices stores one out-neighbourhood bitset per vertex:
bit j of ``adj[i]`` is set iff (i, j) is an edge, i.e. receiver i knows
bit j.  Undirected graphs are the symmetric ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ALPHA_CAP = 30
DEFAULT_MAIS_CAP = 20
DEFAULT_COVER_CAP = 20


class CapExceeded(ValueError):
    """An exact invariant was requested on a graph above its size cap."""


class BudgetExhausted(RuntimeError):
    """An exact search hit its node budget before finishing."""

    def __init__(self, message: str, nodes: int = 0):
        super().__init__(message)
        self.nodes = nodes


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        adj = tuple(int(a) for a in self.adj)
        if len(adj) != self.n:
            raise ValueError(f"expected {self.n} adjacency rows, got {len(adj)}")
        full = (1 << self.n) - 1
        for i, row in enumerate(adj):
            if row & ~full or row < 0:
                raise ValueError(f"row {i} references vertices outside [0, {self.n})")
            if row >> i & 1:
                raise ValueError(f"self-loop at vertex {i}")
        object.__setattr__(self, "adj", adj)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], undirected: bool = False) -> "Graph":
        adj = [0] * n
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {(u, v)} out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u] |= 1 << v
            if undirected:
                adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def from_matrix(cls, a) -> "Graph":
        """Graph from a boolean adjacency matrix (diagonal ignored)."""
        a = np.asarray(a, dtype=bool).copy()
        n = a.shape[0]
        np.fill_diagonal(a, False)
        packed = np.packbits(a, axis=1, bitorder="little")
        return cls(n, tuple(int.from_bytes(row.tobytes(), "little") for row in packed))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, (i + 1) % n) for i in range(n)), undirected=True)

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)), undirected=True)

    @classmethod
    def transitive_tournament(cls, n: int) -> "Graph":
        """Edges (i, j) for i < j."""
        return cls.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))

    # -- queries --------------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def out_neighbors(self, i: int) -> list[int]:
        a = self.adj[i]
        if a.bit_length() > 64:
            # string scan beats bit peeling on wide rows
            return [j for j, c in enumerate(reversed(bin(a)[2:])) if c == "1"]
        return list(_bits(a))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.adj[i])]

    def num_edges(self) -> int:
        return sum(popcount(a) for a in self.adj)

    @property
    def in_adj(self) -> tuple[int, ...]:
        inn = [0] * self.n
        for i, row in enumerate(self.adj):
            for j in _bits(row):
                inn[j] |= 1 << i
        return tuple(inn)

    def is_undirected(self) -> bool:
        return self.adj == self.in_adj

    def undirected_core(self) -> tuple[int, ...]:
        """Bitsets of the bidirected pairs."""
        return tuple(a & b for a, b in zip(self.adj, self.in_adj))

    def symmetric_closure(self) -> tuple[int, ...]:
        """Bitsets of pairs joined in at least one direction."""
        return tuple(a | b for a, b in zip(self.adj, self.in_adj))

    def adjacency_matrix(self) -> np.ndarray:
        n = self.n
        nbytes = (n + 7) // 8
        buf = b"".join(a.to_bytes(nbytes, "little") for a in self.adj)
        raw = np.frombuffer(buf, dtype=np.uint8).reshape(n, nbytes) if n else np.zeros((0, 0), np.uint8)
        return np.unpackbits(raw, axis=1, bitorder="little")[:, :n].astype(bool)

    def reverse(self) -> "Graph":
        return Graph(self.n, self.in_adj)

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph, vertex k of the result being vertices[k]."""
        vs = list(vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("repeated vertex in induced subgraph")
        adj = []
        for u in vs:
            row = 0
            for k, v in enumerate(vs):
                if self.adj[u] >> v & 1:
                    row |= 1 << k
            adj.append(row)
        return Graph(len(vs), tuple(adj))

    # -- serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, obj: dict | str) -> "Graph":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_edges(int(obj["n"]), obj.get("edges", []))


# -- operators --------------------------------------------------------------------

def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, tuple(full & ~a & ~(1 << i) for i, a in enumerate(g.adj)))


def strong_product(g1: Graph, g2: Graph) -> Graph:
    """Vertex (u1, u2) is u1 * g2.n + u2; each coordinate equal or an edge."""
    n2 = g2.n
    closed2 = [a | 1 << i for i, a in enumerate(g2.adj)]
    adj = []
    for u1 in range(g1.n):
        closed1 = list(_bits(g1.adj[u1] | 1 << u1))
        for u2 in range(n2):
            row = 0
            for v1 in closed1:
                row |= closed2[u2] << (v1 * n2)
            row &= ~(1 << (u1 * n2 + u2))
            adj.append(row)
    return Graph(g1.n * n2, tuple(adj))


def blow_up(g: Graph, t: int) -> Graph:
    """t independent copies of each vertex; (u, i) is u * t + i."""
    if t < 1:
        raise ValueError("blow-up factor must be >= 1")
    block = (1 << t) - 1
    adj = []
    for u in range(g.n):
        row = 0
        for v in _bits(g.adj[u]):
            row |= block << (v * t)
        adj.extend([row] * t)
    return Graph(g.n * t, tuple(adj))


def compose(gs: Sequence[Graph]) -> Graph:
    """Round composition; vertex (i, k) is i * t + k.

    ((i1, k1), (i2, k2)) is an edge iff (i1, i2) is an edge of round k2's graph.
    """
    if not gs:
        raise ValueError("compose needs at least one graph")
    n = gs[0].n
    if any(g.n != n for g in gs):
        raise ValueError("all rounds must share the vertex count")
    t = len(gs)
    adj = []
    for i in range(n):
        row = 0
        for k2, g in enumerate(gs):
            for i2 in _bits(g.adj[i]):
                row |= 1 << (i2 * t + k2)
        adj.extend([row] * t)
    return Graph(n * t, tuple(adj))


def disjoint_union(gs: Sequence[Graph]) -> Graph:
    if not gs:
        raise ValueError("disjoint_union needs at least one graph")
    adj = []
    offset = 0
    for g in gs:
        adj.extend(a << offset for a in g.adj)
        offset += g.n
    return Graph(offset, tuple(adj))


def is_independent(g: Graph, vertices: Iterable[int]) -> bool:
    vs = 0
    for v in vertices:
        vs |= 1 << v
    sym = g.symmetric_closure()
    return all(not (sym[v] & vs) for v in _bits(vs))


# -- exact invariants -------------------------------------------------------------

def _max_independent(sym: Sequence[int], cand: int) -> int:
    """Maximum independent subset (as a bitset) of cand; simple branch and bound."""
    best = 0
    best_size = 0

    def rec(cand: int, chosen: int, size: int) -> None:
        nonlocal best, best_size
        while cand:
            if size + popcount(cand) <= best_size:
                return
            # take isolated vertices for free
            v = None
            for u in _bits(cand):
                if not sym[u] & cand:
                    chosen |= 1 << u
                    size += 1
                    cand &= ~(1 << u)
                else:
                    v = u if v is None or popcount(sym[u] & cand) > popcount(sym[v] & cand) else v
            if v is None:
                break
            rec(cand & ~sym[v] & ~(1 << v), chosen | 1 << v, size + 1)
            cand &= ~(1 << v)
        if size > best_size:
            best, best_size = chosen, size

    rec(cand, 0, 0)
    return best


def max_independent_set(g: Graph, cap: int = DEFAULT_ALPHA_CAP) -> list[int]:
    if g.n > cap:
        raise CapExceeded(f"independence search capped at n={cap}, got {g.n}")
    return list(_bits(_max_independent(g.symmetric_closure(), (1 << g.n) - 1)))


def independence_number(g: Graph, cap: int = DEFAULT_ALPHA_CAP) -> int:
    """Largest vertex set with no edge in either direction."""
    return len(max_independent_set(g, cap))


def acyclic_subsets(g: Graph, cap: int = DEFAULT_MAIS_CAP) -> np.ndarray:
    """Boolean table over all vertex subsets: does the subset induce an acyclic graph?

    A nonempty set is acyclic iff it has a sink whose removal leaves an
    acyclic set; the table is filled one popcount layer at a time.
    """
    n = g.n
    if n > cap:
        raise CapExceeded(f"MAIS search capped at n={cap}, got {n}")
    size = 1 << n
    sets = np.arange(size, dtype=np.int64)
    sink = np.full(size, -1, dtype=np.int64)
    for v in range(n - 1, -1, -1):
        is_sink = ((sets >> v) & 1).astype(bool) & ((sets & g.adj[v]) == 0)
        sink[is_sink] = v
    pc = np.zeros(size, dtype=np.int64)
    for v in range(n):
        pc += (sets >> v) & 1
    ok = np.zeros(size, dtype=bool)
    ok[0] = True
    for layer in range(1, n + 1):
        idx = np.flatnonzero((pc == layer) & (sink >= 0))
        ok[idx] = ok[idx ^ (np.int64(1) << sink[idx])]
    return ok


def mais(g: Graph, cap: int = DEFAULT_MAIS_CAP) -> int:
    """Size of a maximum induced acyclic subgraph (2-cycles count as cycles)."""
    if g.n == 0:
        return 0
    return int(_popcounts(np.flatnonzero(acyclic_subsets(g, cap))).max())


def max_acyclic_set(g: Graph, cap: int = DEFAULT_MAIS_CAP) -> list[int]:
    ok = acyclic_subsets(g, cap)
    sets = np.flatnonzero(ok)
    best = int(sets[np.argmax(_popcounts(sets))])
    return list(_bits(best))


def _popcounts(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    out = np.zeros_like(a)
    while a.any():
        out += a & 1
        a = a >> 1
    return out


def greedy_clique(adj: Sequence[int]) -> list[int]:
    """A maximal clique found greedily (largest degree first); a lower bound on chi."""
    n = len(adj)
    best: list[int] = []
    order = sorted(range(n), key=lambda v: -popcount(adj[v]))
    for start in order[: min(n, 32)]:
        clique = [start]
        cand = adj[start]
        while cand:
            v = max(_bits(cand), key=lambda u: popcount(adj[u] & cand))
            clique.append(v)
            cand &= adj[v]
        if len(clique) > len(best):
            best = clique
    return best


def k_coloring(adj: Sequence[int], k: int, budget: int | None = None, seed_clique: Sequence[int] = ()) -> list[int] | None:
    """A proper k-colouring of the undirected graph ``adj``, or None if none exists.

    DSATUR-ordered backtracking; a new colour is only ever the next unused
    one, which removes colour-permutation symmetry.  ``seed_clique``
    vertices are pre-coloured 0, 1, 2, ...
    """
    n = len(adj)
    if n == 0:
        return []
    if k <= 0:
        return None
    colors = [-1] * n
    # forbidden colour masks per vertex
    forb = [0] * n
    nodes = 0
    clique = list(seed_clique)
    if len(clique) > k:
        return None
    for c, v in enumerate(clique):
        colors[v] = c
        for u in _bits(adj[v]):
            forb[u] |= 1 << c
    for v in clique:
        if forb[v] >> colors[v] & 1:
            raise ValueError("seed clique is not a clique")

    def pick() -> int:
        best, key = -1, None
        for v in range(n):
            if colors[v] < 0:
                kk = (popcount(forb[v]), popcount(adj[v]))
                if key is None or kk > key:
                    best, key = v, kk
        return best

    def rec(used: int, left: int) -> bool:
        nonlocal nodes
        if left == 0:
            return True
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExhausted(f"colouring search exceeded {budget} nodes", nodes)
        v = pick()
        limit = min(used + 1, k)
        for c in range(limit):
            if forb[v] >> c & 1:
                continue
            colors[v] = c
            touched = []
            for u in _bits(adj[v]):
                if colors[u] < 0 and not forb[u] >> c & 1:
                    forb[u] |= 1 << c
                    touched.append(u)
            if all(popcount(forb[u]) < k for u in touched) and rec(max(used, c + 1), left - 1):
                return True
            for u in touched:
                forb[u] &= ~(1 << c)
            colors[v] = -1
        return False

    if rec(len(clique), n - len(clique)):
        return colors
    return None


def chromatic_number(adj: Sequence[int], budget: int | None = None) -> tuple[int, list[int]]:
    """Exact chromatic number with an optimal colouring."""
    if not adj:
        return 0, []
    clique = greedy_clique(adj)
    for k in range(len(clique), len(adj) + 1):
        col = k_coloring(adj, k, budget, clique)
        if col is not None:
            return k, col
    raise AssertionError("unreachable: n colours always suffice")


def clique_cover(g: Graph, cap: int = DEFAULT_COVER_CAP, budget: int | None = None) -> list[list[int]]:
    """Minimum partition into mutually bidirected cliques."""
    if g.n > cap:
        raise CapExceeded(f"clique cover search capped at n={cap}, got {g.n}")
    core = g.undirected_core()
    full = (1 << g.n) - 1
    comp = [full & ~a & ~(1 << i) for i, a in enumerate(core)]
    k, col = chromatic_number(comp, budget)
    parts: list[list[int]] = [[] for _ in range(k)]
    for v, c in enumerate(col):
        parts[c].append(v)
    return sorted(parts)


def clique_cover_number(g: Graph, cap: int = DEFAULT_COVER_CAP, budget: int | None = None) -> int:
    """chi of the complement of the bidirected core."""
    return len(clique_cover(g, cap, budget))

"""Index codes: linear codes from representing matrices, exact optimum oracles,
concatenation, the two-round tournament scheme, and a broadcast simulator.

Words are indexed by receiver: bit i of a word is the bit receiver i wants.
A word may be given as a '0'/'1' string (position i is bit i) or as a
sequence of 0/1 integers.  Codewords are '0'/'1' strings.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .gf import FieldSpec
from .graph import (
    CapExceeded,
    Graph,
    compose,
    greedy_clique,
    k_coloring,
    popcount,
)
from .matrix import FFMatrix, basis_coordinates, field_matmul, row_basis
from .minrank import represents_check

DEFAULT_ELL_CAP = 6
EXTENDED_ELL_CAP = 8


def as_bits(word, n: int) -> np.ndarray:
    if isinstance(word, str):
        if any(c not in "01" for c in word):
            raise ValueError(f"word {word!r} is not a bit string")
        bits = np.frombuffer(word.encode(), dtype=np.uint8) - ord("0")
    else:
        bits = np.asarray(word)
    if bits.ndim != 1 or bits.shape[0] != n:
        raise ValueError(f"expected {n} bits, got {bits.shape[0] if bits.ndim == 1 else bits.shape}")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("word entries must be 0 or 1")
    return bits.astype(np.int64)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def _check_codeword(codeword: str, length: int) -> int:
    if len(codeword) != length or any(c not in "01" for c in codeword):
        raise ValueError(f"malformed codeword {codeword!r}; expected {length} bits")
    return int(codeword, 2) if length else 0


def bits_needed(count: int) -> int:
    """ceil(log2 count) for count >= 1, in exact integer arithmetic."""
    return (count - 1).bit_length() if count > 1 else 0


class IndexCode:
    """Common surface: encode a word, let receiver i decode from its side bits.

    ``side`` passed to :meth:`decode` lists the values of the bits receiver
    i knows, in increasing vertex order (``self.side_indices(i)``).
    """

    graph: Graph
    length_bits: int

    def side_indices(self, i: int) -> list[int]:
        cache = self.__dict__.setdefault("_neighbors", {})
        if i not in cache:
            cache[i] = self.graph.out_neighbors(i)
        return cache[i]

    def side_of(self, i: int, word) -> list[int]:
        x = as_bits(word, self.graph.n)
        return x[self.side_indices(i)].tolist()

    def _side(self, i: int, side) -> list[int]:
        idx = self.side_indices(i)
        side = list(side)
        if len(side) != len(idx):
            raise ValueError(f"receiver {i} needs {len(idx)} side bits, got {len(side)}")
        if any(b not in (0, 1) for b in side):
            raise ValueError("side bits must be 0 or 1")
        return side

    def encode(self, word) -> str:
        raise NotImplementedError

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        raise NotImplementedError


def encode(code: IndexCode, x) -> str:
    return code.encode(x)


def decode(code: IndexCode, i: int, codeword: str, side: Sequence[int]) -> int:
    return code.decode(i, codeword, side)


# -- linear codes from representing matrices ------------------------------------------

class LinearIndexCode(IndexCode):
    """Broadcast the inner products of x with a row basis of a representing matrix.

    Receiver i rebuilds (Ax)_i from the basis symbols and strips off the
    terms of the bits it knows: x_i = a_ii^-1 ((Ax)_i - sum_j a_ij x_j).
    """

    def __init__(self, graph: Graph, matrix: FFMatrix):
        bad = represents_check(matrix, graph)
        if bad:
            raise ValueError(f"matrix does not represent the graph: {bad[:5]}")
        self.graph = graph
        self.matrix = matrix
        self.field: FieldSpec = matrix.field
        self.basis = row_basis(matrix)
        self.coords = basis_coordinates(self.basis, matrix)
        self.rank = self.basis.rows
        self.length_bits = bits_needed(self.field.q ** self.rank)
        f = self.field
        a = matrix.entries
        self._diag_inv = [f.inv(int(a[i, i])) for i in range(graph.n)]
        self._side_cols = [np.array(graph.out_neighbors(i), dtype=np.int64) for i in range(graph.n)]

    def symbols(self, word) -> list[int]:
        x = as_bits(word, self.graph.n)
        return field_matmul(self.field, self.basis.entries, x[:, None])[:, 0].tolist()

    def encode(self, word) -> str:
        q = self.field.q
        value = 0
        for s in self.symbols(word):
            value = value * q + s
        return format(value, f"0{self.length_bits}b") if self.length_bits else ""

    def unpack(self, codeword: str) -> np.ndarray:
        value = _check_codeword(codeword, self.length_bits)
        q = self.field.q
        if value >= q**self.rank:
            raise ValueError("codeword does not encode a symbol vector")
        syms = np.zeros(self.rank, dtype=np.int64)
        for t in range(self.rank - 1, -1, -1):
            value, syms[t] = divmod(value, q)
        return syms

    def _dot(self, a: np.ndarray, b: np.ndarray) -> int:
        f = self.field
        if a.size == 0:
            return 0
        if f.k == 1:
            return int(a @ b) % f.p
        out = 0
        for t in np.flatnonzero(a):
            out = f.add(out, f.mul(int(a[t]), int(b[t])))
        return int(out)

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        side = self._side(i, side)
        f = self.field
        syms = self.unpack(codeword)
        ax_i = self._dot(self.coords[i], syms)
        cols = self._side_cols[i]
        known = self._dot(self.matrix.entries[i, cols], np.asarray(side, dtype=np.int64))
        xi = f.mul(self._diag_inv[i], f.sub(ax_i, known))
        if xi not in (0, 1):
            raise ValueError("codeword is inconsistent with the side information")
        return int(xi)


def code_from_matrix(g: Graph, m: FFMatrix) -> LinearIndexCode:
    return LinearIndexCode(g, m)


class ImageLabelCode(IndexCode):
    """Label Ax by its position among all images {Ax : x binary}; small n only."""

    def __init__(self, graph: Graph, matrix: FFMatrix, cap: int = 16):
        if graph.n > cap:
            raise CapExceeded(f"image labelling enumerates 2^n words; n={graph.n} > {cap}")
        bad = represents_check(matrix, graph)
        if bad:
            raise ValueError(f"matrix does not represent the graph: {bad[:5]}")
        self.graph = graph
        self.matrix = matrix
        words = np.array(list(itertools.product((0, 1), repeat=graph.n)), dtype=np.int64).T
        images = field_matmul(matrix.field, matrix.entries, words).T
        self.labels = sorted({tuple(v) for v in images.tolist()})
        self._index = {v: k for k, v in enumerate(self.labels)}
        self.length_bits = bits_needed(len(self.labels))

    def encode(self, word) -> str:
        x = as_bits(word, self.graph.n)
        ax = tuple(field_matmul(self.matrix.field, self.matrix.entries, x[:, None])[:, 0].tolist())
        label = self._index[ax]
        return format(label, f"0{self.length_bits}b") if self.length_bits else ""

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        side = self._side(i, side)
        label = _check_codeword(codeword, self.length_bits)
        if label >= len(self.labels):
            raise ValueError("unknown label")
        f = self.matrix.field
        a = self.matrix.entries
        acc = self.labels[label][i]
        for j, b in zip(self.graph.out_neighbors(i), side):
            acc = f.sub(acc, f.mul(int(a[i, j]), b))
        return int(f.mul(f.inv(int(a[i, i])), acc))


# -- confusion graph oracle ------------------------------------------------------------

def bad_differences(n: int, receivers: Sequence[tuple[int, int]]) -> list[int]:
    """Nonzero z = x ^ y that some receiver cannot resolve.

    ``receivers`` lists (wanted bit, bitmask of known bits).  Receiver
    (w, K) confuses x and y iff they differ at w and agree on K.
    """
    out = []
    for z in range(1, 1 << n):
        if any(z >> w & 1 and not z & known for w, known in receivers):
            out.append(z)
    return out


def graph_receivers(g: Graph) -> list[tuple[int, int]]:
    return [(i, g.adj[i]) for i in range(g.n)]


@dataclass
class ConfusionGraph:
    n: int
    adj: list[int]  # bitsets over the 2^n words

    def adjacent(self, x: int, y: int) -> bool:
        return bool(self.adj[x] >> y & 1)

    def num_edges(self) -> int:
        return sum(popcount(a) for a in self.adj) // 2


def confusion_from_receivers(n: int, receivers: Sequence[tuple[int, int]]) -> ConfusionGraph:
    zs = bad_differences(n, receivers)
    adj = []
    for x in range(1 << n):
        row = 0
        for z in zs:
            row |= 1 << (x ^ z)
        adj.append(row)
    return ConfusionGraph(n, adj)


def confusion_graph(g: Graph, cap: int = EXTENDED_ELL_CAP) -> ConfusionGraph:
    """Words x ~ y iff some receiver i sees x_i != y_i yet x, y agree on its side bits.

    Word w has bit i equal to (w >> i) & 1.
    """
    if g.n > cap:
        raise CapExceeded(f"confusion graph has 2^{g.n} words; cap is n={cap}")
    return confusion_from_receivers(g.n, graph_receivers(g))


@dataclass
class EllResult:
    value: int
    coloring: list[int]
    nodes_budget: int | None = None


def optimal_length(cg: ConfusionGraph, budget: int | None = None) -> EllResult:
    """Smallest l such that the confusion graph is 2^l-colourable."""
    clique = greedy_clique(cg.adj)
    start = bits_needed(len(clique))
    for ell in range(start, cg.n + 1):
        col = k_coloring(cg.adj, 1 << ell, budget, clique)
        if col is not None:
            return EllResult(ell, col, budget)
    raise AssertionError("2^n colours always suffice")


def exact_ell(g: Graph, cap: int = DEFAULT_ELL_CAP, budget: int | None = 5_000_000) -> EllResult:
    """Optimal index code length, linear or not, with an optimal colouring.

    An l-bit code is exactly a proper colouring of the confusion graph with
    at most 2^l colours.
    """
    if g.n > cap:
        raise CapExceeded(f"exact ell is capped at n={cap}, got {g.n}")
    return optimal_length(confusion_graph(g, max(cap, g.n)), budget)


class ColoringCode(IndexCode):
    """Codeword = colour of x in a proper colouring of the confusion graph."""

    def __init__(self, graph: Graph, coloring: Sequence[int]):
        if len(coloring) != 1 << graph.n:
            raise ValueError("colouring must cover all 2^n words")
        cg = confusion_graph(graph, max(EXTENDED_ELL_CAP, graph.n))
        for x in range(1 << graph.n):
            for y in range(x + 1, 1 << graph.n):
                if cg.adj[x] >> y & 1 and coloring[x] == coloring[y]:
                    raise ValueError(f"words {x} and {y} are confusable but share a colour")
        self.graph = graph
        self.coloring = list(coloring)
        self.length_bits = bits_needed(max(coloring) + 1)

    @classmethod
    def optimal(cls, graph: Graph, cap: int = DEFAULT_ELL_CAP) -> "ColoringCode":
        return cls(graph, exact_ell(graph, cap).coloring)

    @staticmethod
    def _word_int(x: np.ndarray) -> int:
        return int(sum(int(b) << i for i, b in enumerate(x)))

    def encode(self, word) -> str:
        c = self.coloring[self._word_int(as_bits(word, self.graph.n))]
        return format(c, f"0{self.length_bits}b") if self.length_bits else ""

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        side = self._side(i, side)
        c = _check_codeword(codeword, self.length_bits)
        idx = self.side_indices(i)
        want = sum(b << j for j, b in zip(idx, side))
        mask = sum(1 << j for j in idx)
        seen = {w >> i & 1 for w, cw in enumerate(self.coloring) if cw == c and w & mask == want}
        if len(seen) != 1:
            raise ValueError("codeword is inconsistent with the side information")
        return seen.pop()


def _separates(rows: Sequence[int], zs: Sequence[int]) -> bool:
    return all(any(popcount(r & z) & 1 for r in rows) for z in zs)


def linear_encoder_works(g: Graph, rows: Sequence[int]) -> bool:
    """Does x -> (r . x mod 2 for r in rows) decode for every receiver?  Rows are bitmasks."""
    return _separates(rows, bad_differences(g.n, graph_receivers(g)))


@dataclass
class LinearEllResult:
    value: int
    encoder: list[int]  # rows as bitmasks over the n source bits


def exact_linear_ell(g: Graph, max_ell: int = 4, n_cap: int = 4, verify: bool = True) -> LinearEllResult:
    """Shortest GF(2)-linear index code, by exhausting encoder matrices.

    E works iff no confusable difference z lies in its kernel, i.e. every
    such z has odd overlap with some row.  With ``verify`` the result is
    compared to the GF(2) minrank and an AssertionError raised on mismatch.
    """
    if g.n > n_cap or max_ell > 4:
        raise CapExceeded(f"linear search capped at n <= {n_cap}, l <= 4")
    zs = bad_differences(g.n, graph_receivers(g))
    rows_all = range(1, 1 << g.n)
    for ell in range(0, max_ell + 1):
        for rows in itertools.combinations(rows_all, ell):
            if _separates(rows, zs):
                if verify:
                    from .minrank import minrank
                    mr = minrank(g, FieldSpec(2))
                    if mr != ell:
                        raise AssertionError(f"linear length {ell} != minrk_2 {mr}")
                return LinearEllResult(ell, list(rows))
    raise CapExceeded(f"no linear code with at most {max_ell} bits")


# -- composite codes ------------------------------------------------------------------

class ConcatCode(IndexCode):
    """Codes for the parts of a vertex partition, sent one after another.

    Each receiver decodes inside its own part using only the side bits that
    fall in that part.
    """

    def __init__(self, graph: Graph, parts: Sequence[tuple[Sequence[int], IndexCode]]):
        seen: list[int] = []
        for verts, code in parts:
            seen.extend(verts)
            if code.graph != graph.induced(verts):
                raise ValueError("part code is not for the induced subgraph on its vertices")
        if sorted(seen) != list(range(graph.n)):
            raise ValueError("parts do not partition the vertex set")
        self.graph = graph
        self.parts = [(list(v), c) for v, c in parts]
        self.length_bits = sum(c.length_bits for _, c in self.parts)
        self._where = {}
        offset = 0
        for k, (verts, code) in enumerate(self.parts):
            for local, v in enumerate(verts):
                self._where[v] = (k, local, offset)
            offset += code.length_bits

    def encode(self, word) -> str:
        x = as_bits(word, self.graph.n)
        return "".join(code.encode(x[verts]) for verts, code in self.parts)

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        side = self._side(i, side)
        _check_codeword(codeword, self.length_bits)
        k, local, offset = self._where[i]
        verts, code = self.parts[k]
        known = dict(zip(self.side_indices(i), side))
        local_side = [known[verts[j]] for j in code.side_indices(local)]
        return code.decode(local, codeword[offset : offset + code.length_bits], local_side)


def concat_codes(g: Graph, parts: Sequence[tuple[Sequence[int], IndexCode]]) -> ConcatCode:
    return ConcatCode(g, parts)


def tournament_pair(n: int) -> Graph:
    t = Graph.transitive_tournament(n)
    return compose([t, t.reverse()])


class TournamentComposeCode(IndexCode):
    """(n+1)-bit code for two rounds over the transitive tournament and its reverse.

    Vertex 2i is x_i (round one), 2i + 1 is y_i (round two).  Sends
    x_i ^ y_i for each i, then the parity of x.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.graph = tournament_pair(n)
        self.length_bits = n + 1

    def encode(self, word) -> str:
        w = as_bits(word, 2 * self.n)
        x, y = w[0::2], w[1::2]
        return bits_to_str(list(x ^ y) + [int(x.sum() & 1)])

    def reconstruct_all(self, v: int, codeword: str, side: Sequence[int]) -> tuple[list[int], list[int]]:
        """Every receiver can recover both words in full."""
        side = self._side(v, side)
        _check_codeword(codeword, self.length_bits)
        n, i = self.n, v // 2
        z = [int(c) for c in codeword[:n]]
        parity = int(codeword[n])
        known = dict(zip(self.side_indices(v), side))
        x = [0] * n
        for j in range(n):
            if j > i:
                x[j] = known[2 * j]
            elif j < i:
                x[j] = z[j] ^ known[2 * j + 1]
        x[i] = parity ^ (sum(x[j] for j in range(n) if j != i) & 1)
        y = [z[j] ^ x[j] for j in range(n)]
        return x, y

    def decode(self, i: int, codeword: str, side: Sequence[int]) -> int:
        x, y = self.reconstruct_all(i, codeword, side)
        return (x, y)[i % 2][i // 2]


def tournament_compose_code(n: int) -> TournamentComposeCode:
    return TournamentComposeCode(n)


# -- protocol simulation --------------------------------------------------------------

class ProtocolFailure(AssertionError):
    """A receiver decoded the wrong bit."""


@dataclass
class ProtocolResult:
    outputs: list[int]
    transcript: dict = dc_field(default_factory=dict)


def run_protocol(code: IndexCode, x, trace: bool = False, graph: Graph | None = None) -> ProtocolResult:
    """One broadcast round: encode, then every receiver decodes on its own."""
    g = code.graph if graph is None else graph
    if g != code.graph:
        raise ValueError("code was built for a different graph")
    bits = as_bits(x, g.n)
    codeword = code.encode(bits)
    outputs = []
    receivers = []
    for i in range(g.n):
        side = bits[code.side_indices(i)].tolist()
        out = code.decode(i, codeword, side)
        outputs.append(out)
        if trace:
            receivers.append({"receiver": i, "side": bits_to_str(side), "output": out})
    transcript = {"input": bits_to_str(bits), "codeword": codeword, "bits": len(codeword)}
    if trace:
        transcript["receivers"] = receivers
    wrong = [i for i in range(g.n) if outputs[i] != bits[i]]
    if wrong:
        raise ProtocolFailure(f"receivers {wrong[:10]} decoded the wrong bit for input {bits_to_str(bits)}")
    return ProtocolResult(outputs, transcript)


def simulate(code: IndexCode, trials: int, seed: int) -> dict:
    """Run the protocol on seeded random inputs; the digest fixes the transcripts."""
    rng = np.random.Generator(np.random.PCG64(seed))
    h = hashlib.sha256()
    failures = 0
    for _ in range(trials):
        x = rng.integers(0, 2, size=code.graph.n)
        try:
            res = run_protocol(code, x)
            h.update(json.dumps(res.transcript, sort_keys=True).encode())
        except ProtocolFailure:
            failures += 1
    return {"trials": trials, "seed": seed, "failures": failures, "bits": code.length_bits,
            "generator": "PCG64", "transcript_sha256": h.hexdigest()}


def exhaustive_check(code: IndexCode) -> int:
    """Number of inputs on which some receiver fails; 0 for a valid code."""
    n = code.graph.n
    bad = 0
    for w in itertools.product((0, 1), repeat=n):
        try:
            run_protocol(code, np.array(w, dtype=np.int64))
        except ProtocolFailure:
            bad += 1
    return bad


def linear_length(rank: int, q: int) -> int:
    """ceil(rank * log2 q), exactly."""
    return bits_needed(q**rank)


def float_length(rank: int, q: int) -> float:
    return rank * math.log2(q)

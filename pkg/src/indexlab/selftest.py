"""End-to-end checks of every certified property, shared by the CLI and the test suite.

Each check returns a :class:`CheckResult`; none of them raises on a
failed property.  ``fault`` names a deliberate corruption used to show that
the checks can fail.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable

import networkx as nx
import numpy as np

from .extensions import all_instances, build_gind_gcl, p4_ell, p4_minrank, p4_represents_check
from .gf import FieldSpec, binomial_mod_p
from .graph import (
    Graph,
    clique_cover_number,
    complement,
    disjoint_union,
    independence_number,
    mais,
    strong_product,
)
from .indexcode import (
    IndexCode,
    ProtocolFailure,
    code_from_matrix,
    concat_codes,
    exact_ell,
    exact_linear_ell,
    exhaustive_check,
    linear_encoder_works,
    simulate,
    tournament_compose_code,
)
from .matrix import FFMatrix, kron, rank
from .minrank import exact_minrank, reduce_representation, represents_check
from .ramsey import (
    RamseyParams,
    build_PQ,
    build_ramsey_graph,
    build_union_H,
    inclusion_rows,
    inclusion_rank,
    verify_construction,
)

FAULTS = ("flip-entry", "codeword-bitflip", "drop-parity", "wrong-bound")
DEFAULT_CHECKS = (1, 3, 4, 5, 6, 7, 8, 9, 11)
ALL_CHECKS = tuple(range(1, 12))

F2, F3, F4 = FieldSpec(2), FieldSpec(3), FieldSpec(2, 2)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    details: dict = dc_field(default_factory=dict)
    seconds: float = 0.0
    limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{status}] criterion {self.number:>2}: {self.name} in {self.seconds:.2f}s{limit}"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "details": self.details}


# -- graph families ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def undirected_classes(n_max: int, n_min: int = 1) -> tuple[Graph, ...]:
    """One graph per isomorphism class on n_min..n_max vertices (n_max <= 7)."""
    out = []
    for h in nx.graph_atlas_g():
        if n_min <= h.number_of_nodes() <= n_max:
            out.append(Graph.from_edges(h.number_of_nodes(), h.edges(), undirected=True))
    return tuple(out)


@lru_cache(maxsize=None)
def directed_labelled(n_max: int) -> tuple[Graph, ...]:
    """Every labelled digraph on 1..n_max vertices."""
    out = []
    for n in range(1, n_max + 1):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for mask in range(1 << len(pairs)):
            out.append(Graph.from_edges(n, [e for b, e in enumerate(pairs) if mask >> b & 1]))
    return tuple(out)


def small_family(n_max: int, directed_max: int = 3) -> tuple[Graph, ...]:
    return undirected_classes(n_max) + directed_labelled(min(directed_max, n_max))


def random_digraph(rng: np.random.Generator, n: int, density: float = 0.5) -> Graph:
    a = rng.random((n, n)) < density
    return Graph.from_matrix(a)


def random_representation(rng: np.random.Generator, g: Graph, f: FieldSpec) -> FFMatrix:
    a = rng.integers(0, f.q, size=(g.n, g.n)) * g.adjacency_matrix()
    np.fill_diagonal(a, rng.integers(1, f.q, size=g.n))
    return FFMatrix(f, a)


class _FlipFirstBit(IndexCode):
    """Wraps a code and corrupts the first transmitted bit."""

    def __init__(self, code: IndexCode):
        self.inner = code
        self.graph = code.graph
        self.length_bits = code.length_bits

    def encode(self, word) -> str:
        cw = self.inner.encode(word)
        return ("1" if cw[:1] == "0" else "0") + cw[1:] if cw else cw

    def decode(self, i, codeword, side):
        try:
            return self.inner.decode(i, codeword, side)
        except ValueError:
            return -1


def _maybe_faulty(code: IndexCode, fault: str | None) -> IndexCode:
    return _FlipFirstBit(code) if fault == "codeword-bitflip" else code


def _decodes_everything(code: IndexCode) -> bool:
    return exhaustive_check(code) == 0


# -- the shared n = 252 instance --------------------------------------------------------

def small_instance():
    return build_ramsey_graph(RamseyParams.from_exponents(3, 2, 1, 1), r_override=10)


def _flip_offedge(P: FFMatrix, g: Graph) -> FFMatrix:
    a = P.entries.copy()
    non = np.argwhere(~g.adjacency_matrix() & ~np.eye(g.n, dtype=bool))
    i, j = non[0]
    a[i, j] = (a[i, j] + 1) % P.field.p
    return P.with_entries(a)


# -- the checks -------------------------------------------------------------------------

def check_construction(fault: str | None = None) -> dict:
    inst = small_instance()
    pq = build_PQ(inst)
    if fault == "flip-entry":
        pq.P = _flip_offedge(pq.P, inst.graph)
    rep = verify_construction(inst, pq)
    ok = (rep.passed and inst.n == 252 and rep.rank_p_P <= 45 and rep.rank_q_Q <= 10
          and rep.minrk_lower_q >= 26 and rep.literal_checked)
    return {"ok": ok, **rep.to_json()}


def check_canonical_rank(fault: str | None = None, samples: int = 10_000, seed: int = 0) -> dict:
    pr = RamseyParams.from_exponents(3, 2, 1, 1)
    n = math.comb(pr.r, pr.s)
    d = pr.pk - 1
    r = inclusion_rank(pr.r, pr.s, d, F3)
    # diagonal of M_d M_d^T on sampled vertices: literal row norms and the Lucas value
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = np.sort(np.array([rng.choice(pr.r, size=pr.s, replace=False) for _ in range(samples)]), axis=1)
    rows = np.vstack(list(inclusion_rows(pr.r, pr.s, d, F3, vertices=picks)))
    diag = rows.sum(axis=1) % pr.p
    lucas = binomial_mod_p(pr.s, d, pr.p)
    bad = int(np.count_nonzero(diag != 1)) + (lucas != 1)
    bound = math.comb(pr.r, d)
    return {"ok": r <= bound and bad == 0 and n == 80730, "n": n, "rank": r, "bound": bound,
            "sampled": samples, "diagonal_violations": bad}


def check_sandwich(fault: str | None = None) -> dict:
    graphs = undirected_classes(6)
    bad = []
    for idx, g in enumerate(graphs):
        res = exact_minrank(g, F2, budget=None, use_bounds=False)
        alpha = independence_number(g)
        cover = clique_cover_number(g)
        if fault == "wrong-bound":
            cover -= 1
        witness_ok = not represents_check(res.witness, g) and rank(res.witness) == res.value
        if not (res.optimal and witness_ok and alpha <= res.value <= cover):
            bad.append(idx)
    return {"ok": not bad, "graphs": len(graphs), "on_six_vertices": sum(g.n == 6 for g in graphs),
            "violations": len(bad)}


def check_product_bound(fault: str | None = None, trials: int = 200, seed: int = 1) -> dict:
    graphs = undirected_classes(6)
    bad = 0
    for g in graphs:
        a = exact_minrank(g, F2).value
        b = exact_minrank(complement(g), F2).value
        bad += a * b < g.n
    rng = np.random.Generator(np.random.PCG64(seed))
    kron_bad = 0
    for t in range(trials):
        f = (F2, F3, F4)[t % 3]
        g1 = random_digraph(rng, int(rng.integers(1, 5)))
        g2 = random_digraph(rng, int(rng.integers(1, 5)))
        if t % 2:
            a1, a2 = exact_minrank(g1, f).witness, exact_minrank(g2, f).witness
        else:
            a1, a2 = random_representation(rng, g1, f), random_representation(rng, g2, f)
        kron_bad += bool(represents_check(kron(a1, a2), strong_product(g1, g2)))
    return {"ok": bad == 0 and kron_bad == 0, "graphs": len(graphs), "product_violations": bad,
            "kron_trials": trials, "kron_violations": kron_bad}


def check_field_reduction(fault: str | None = None) -> dict:
    graphs = small_family(5)
    bad = 0
    for g in graphs:
        m2 = exact_minrank(g, F2, budget=None).value
        r4 = exact_minrank(g, F4, budget=None)
        reduced = reduce_representation_checked(g, r4.witness)
        ok = r4.optimal and -(-m2 // 2) <= r4.value <= m2
        ok = ok and reduced is not None and rank(reduced) <= 2 * r4.value
        bad += not ok
    return {"ok": bad == 0, "graphs": len(graphs), "violations": bad}


def reduce_representation_checked(g: Graph, m: FFMatrix) -> FFMatrix | None:
    from .minrank import Representation

    try:
        return reduce_representation(Representation(g, m.field, m)).matrix
    except ValueError:
        return None


def check_coding(fault: str | None = None, trials: int = 1000, seed: int = 2) -> dict:
    graphs = small_family(5)
    bad = 0
    for g in graphs:
        code = code_from_matrix(g, exact_minrank(g, F2, budget=None).witness)
        bad += not _decodes_everything(_maybe_faulty(code, fault))
    inst = small_instance()
    pcode = _maybe_faulty(code_from_matrix(inst.graph, build_PQ(inst).P), fault)
    sim = simulate(pcode, trials, seed)
    return {"ok": bad == 0 and sim["failures"] == 0, "graphs": len(graphs), "exhaustive_failures": bad,
            "ramsey_bits": pcode.length_bits, "ramsey_trials": trials, "ramsey_failures": sim["failures"],
            "transcript_sha256": sim["transcript_sha256"]}


def check_oracle(fault: str | None = None) -> dict:
    kn = [exact_ell(Graph.complete(n)).value for n in range(1, 7)]
    empty = [exact_ell(Graph.empty(n)).value for n in range(1, 7)]
    c5 = Graph.cycle(5)
    ell_c5 = exact_ell(c5).value
    mr_c5 = exact_minrank(c5, F2).value
    linear_bad = 0
    family = small_family(4)
    for g in family:
        try:
            exact_linear_ell(g, verify=True)
        except AssertionError:
            linear_bad += 1
    ok = kn == [1] * 6 and empty == list(range(1, 7)) and ell_c5 == 3 == mr_c5 and linear_bad == 0
    return {"ok": ok, "complete": kn, "empty": empty, "c5_ell": ell_c5, "c5_minrank": mr_c5,
            "linear_graphs": len(family), "linear_mismatches": linear_bad}


class _DropParity(IndexCode):
    def __init__(self, code):
        self.inner, self.graph, self.length_bits = code, code.graph, code.length_bits

    def encode(self, word):
        cw = self.inner.encode(word)
        return cw[:-1] + "0"

    def decode(self, i, codeword, side):
        return self.inner.decode(i, codeword, side)


def check_tournament(fault: str | None = None, n_max: int = 8) -> dict:
    rows = []
    ok = True
    for n in range(1, n_max + 1):
        code = tournament_compose_code(n)
        tested = _DropParity(code) if fault == "drop-parity" else _maybe_faulty(code, fault)
        decodes = _decodes_everything(tested)
        m = mais(code.graph)
        rows.append({"n": n, "bits": code.length_bits, "mais": m, "decodes": decodes})
        ok &= decodes and m == n + 1 == code.length_bits
    # two rounds of two bits, vertices x1, y1, x2, y2: our rows and the
    # alternative x1^y1, x2^y2, x1^y2 are both valid 3-bit linear encoders
    g = tournament_compose_code(2).graph
    ours = [0b0011, 0b1100, 0b0101]
    alt = [0b0011, 0b1100, 0b1001]
    same = linear_encoder_works(g, ours) and linear_encoder_works(g, alt)
    ok &= same and g.n == 4
    return {"ok": bool(ok), "rows": rows, "two_round_example": same}


def check_union_additivity(fault: str | None = None, pairs: int = 50, seed: int = 3) -> dict:
    rng = np.random.Generator(np.random.PCG64(seed))
    bad = 0
    for t in range(pairs):
        f = F2 if t % 2 == 0 else F3
        g1 = random_digraph(rng, int(rng.integers(3, 6)))
        g2 = random_digraph(rng, int(rng.integers(3, 6)))
        whole = exact_minrank(disjoint_union([g1, g2]), f)
        parts = exact_minrank(g1, f).value + exact_minrank(g2, f).value
        bad += not (whole.optimal and whole.value == parts)
    return {"ok": bad == 0, "pairs": pairs, "violations": bad}


def check_union_witness(fault: str | None = None, trials: int = 200, seed: int = 4) -> dict:
    inst = small_instance()
    pq = build_PQ(inst)
    uw = build_union_H(inst)
    n = inst.n
    p_code = code_from_matrix(inst.graph, pq.P)
    q_code = code_from_matrix(complement(inst.graph), pq.Q)
    code = _maybe_faulty(concat_codes(uw.H, [(range(n), p_code), (range(n, 2 * n), q_code)]), fault)
    expected = (F3.q ** rank(pq.P) - 1).bit_length() + rank(pq.Q)
    sim = simulate(code, trials, seed)
    ok = (uw.independent and uw.size == 2 * n and uw.capacity_lower_bound >= math.sqrt(2 * n)
          and code.length_bits == expected and sim["failures"] == 0)
    return {"ok": ok, "H_vertices": uw.H.n, "witness_size": uw.size, "independent": uw.independent,
            "capacity_lower_bound": uw.capacity_lower_bound, "bits": code.length_bits,
            "expected_bits": expected, "trials": trials, "failures": sim["failures"]}


def check_shared_requests(fault: str | None = None) -> dict:
    @lru_cache(maxsize=None)
    def mr(g: Graph) -> int:
        return exact_minrank(g, F2, budget=None).value

    count = bad = 0
    for m in range(1, 5):
        for n in range(1, 4):
            for inst in all_instances(m, n):
                g_ind, g_cl = build_gind_gcl(inst)
                res = p4_minrank(inst, F2, budget=None)
                count += 1
                ok = res.optimal and not p4_represents_check(res.witness, inst)
                bad += not (ok and mr(g_cl) <= res.value <= mr(g_ind))
    ell_count = ell_bad = 0
    for m in range(1, 4):
        for n in range(1, 3):
            for inst in all_instances(m, n):
                g_ind, g_cl = build_gind_gcl(inst)
                ell_count += 1
                ell_bad += not (exact_ell(g_cl).value <= p4_ell(inst).value <= exact_ell(g_ind).value)
    return {"ok": bad == 0 and ell_bad == 0, "instances": count, "violations": bad,
            "ell_instances": ell_count, "ell_violations": ell_bad}


CHECKS: dict[int, tuple[str, Callable[..., dict], float | None]] = {
    1: ("construction certificate, n=252", check_construction, 10.0),
    2: ("streaming rank at r=27, n=80730", check_canonical_rank, 120.0),
    3: ("alpha <= minrk_2 <= clique cover, undirected n<=6", check_sandwich, 300.0),
    4: ("minrk(G) minrk(co-G) >= n and Kronecker witnesses", check_product_bound, None),
    5: ("GF(4) versus GF(2) minrank and field reduction", check_field_reduction, None),
    6: ("linear codes decode: exhaustive n<=5 and Ramsey P-code", check_coding, None),
    7: ("confusion-graph oracle agreement", check_oracle, None),
    8: ("two-round tournament code", check_tournament, None),
    9: ("disjoint-union additivity of minrank", check_union_additivity, None),
    10: ("union graph capacity witness and concatenated code", check_union_witness, None),
    11: ("shared-request sandwiches", check_shared_requests, None),
}


def run_check(number: int, fault: str | None = None) -> CheckResult:
    name, fn, limit = CHECKS[number]
    start = time.perf_counter()
    try:
        details = fn(fault)
        passed = bool(details.pop("ok"))
    except (AssertionError, ProtocolFailure, ValueError) as exc:
        details, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
    seconds = time.perf_counter() - start
    if limit is not None and seconds > limit:
        passed = False
        details["over_time"] = True
    return CheckResult(number, name, passed, details, seconds, limit)


def run_selftest(numbers=DEFAULT_CHECKS, fault: str | None = None, threads: int = 1) -> list[CheckResult]:
    """Run the chosen checks; results come back in check order whatever the schedule."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {', '.join(FAULTS)}")
    numbers = list(numbers)
    if threads <= 1 or len(numbers) == 1:
        return [run_check(k, fault) for k in numbers]
    with ProcessPoolExecutor(max_workers=min(threads, len(numbers))) as pool:
        return list(pool.map(run_check, numbers, [fault] * len(numbers)))

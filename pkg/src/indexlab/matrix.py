"""Dense matrices over GF(p^k): rank, row bases, Kronecker and block products.

Entries are stored as an int64 numpy array of field-element encodings.
Elimination is done by :class:`EchelonAccumulator`, which keeps a reduced
row-echelon basis of at most ``cols`` rows and can be fed rows in chunks,
so tall matrices never need to be held in memory at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gf import FieldSpec, parse_field_spec

# float64 matmul is exact while every partial sum stays below 2**53
_FLOAT_EXACT = 1 << 52


@dataclass(frozen=True, eq=False)
class FFMatrix:
    field: FieldSpec
    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.int64, copy=True)
        if a.ndim != 2:
            raise ValueError("matrix entries must form a 2-D grid")
        self.field.check(a)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __getitem__(self, idx):
        v = self.entries[idx]
        return int(v) if np.ndim(v) == 0 else v

    def __eq__(self, other) -> bool:
        if not isinstance(other, FFMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.entries, other.entries)

    def __repr__(self) -> str:
        return f"FFMatrix(GF({self.field}), {self.entries.tolist()})"

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def with_entries(self, entries) -> "FFMatrix":
        return FFMatrix(self.field, entries)

    def to_json(self) -> dict:
        return {"field": str(self.field), "rows": self.rows, "cols": self.cols,
                "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "FFMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        field = parse_field_spec(obj["field"])
        entries = np.array(obj["entries"], dtype=np.int64).reshape(-1, obj["cols"]) \
            if obj["rows"] else np.zeros((0, obj["cols"]), dtype=np.int64)
        if entries.shape != (obj["rows"], obj["cols"]):
            raise ValueError(f"entry grid has shape {entries.shape}, header says "
                             f"{(obj['rows'], obj['cols'])}")
        return cls(field, entries)


def identity(field: FieldSpec, n: int) -> FFMatrix:
    return FFMatrix(field, np.eye(n, dtype=np.int64))


def ones(field: FieldSpec, rows: int, cols: int | None = None) -> FFMatrix:
    return FFMatrix(field, np.ones((rows, rows if cols is None else cols), dtype=np.int64))


def zeros(field: FieldSpec, rows: int, cols: int | None = None) -> FFMatrix:
    return FFMatrix(field, np.zeros((rows, rows if cols is None else cols), dtype=np.int64))


# -- array-level field linear algebra --------------------------------------------

def field_matmul(field: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of two arrays of field elements."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if field.k == 1:
        p = field.p
        inner = a.shape[-1]
        if inner == 0:
            return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
        if (p - 1) ** 2 * inner < _FLOAT_EXACT:
            out = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
            return np.mod(out, p).astype(np.int64)
        return (a @ b) % p
    out = np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
    for t in range(a.shape[-1]):
        out = field.add(out, field.mul(a[..., t, None], b[t]))
    return out


class EchelonAccumulator:
    """Incremental reduced row-echelon basis over a field.

    Rows are fed in order; a row is kept iff it is independent of all rows
    kept before it, so ``kept`` lists the first independent rows in index
    order.  With ``track=True`` the accumulator also records how each basis
    row is written in terms of the kept input rows.
    """

    def __init__(self, field: FieldSpec, cols: int, track: bool = False):
        self.field = field
        self.cols = cols
        self.track = track
        self.basis = np.zeros((0, cols), dtype=np.int64)
        self.transform = np.zeros((0, 0), dtype=np.int64)
        self.pivots: list[int] = []
        self.kept: list[int] = []
        self.seen = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def full(self) -> bool:
        return self.rank == self.cols

    def reduce(self, rows: np.ndarray) -> np.ndarray:
        """Residues of rows modulo the current span."""
        rows = np.asarray(rows, dtype=np.int64)
        if not self.pivots:
            return rows.copy()
        coef = rows[:, self.pivots]
        return self.field.sub(rows, field_matmul(self.field, coef, self.basis))

    def add_rows(self, rows: np.ndarray) -> int:
        """Feed a chunk of rows; returns the number that raised the rank."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[None, :]
        start = self.seen
        self.seen += rows.shape[0]
        if self.full or rows.shape[0] == 0:
            return 0
        if self.track:
            return sum(self._add_tracked(row, start + j) for j, row in enumerate(rows))
        f = self.field
        res = self.reduce(rows)
        added = 0
        j = 0
        while j < res.shape[0] and not self.full:
            nz = np.flatnonzero(res[j:].any(axis=1))
            if nz.size == 0:
                break
            j += int(nz[0])
            row = self._normalise(res[j])
            piv = self._clear_column(row)
            rest = res[j + 1 :]
            c = rest[:, piv]
            hit = np.flatnonzero(c)
            if hit.size:
                rest[hit] = f.sub(rest[hit], f.mul(c[hit, None], row[None, :]))
            self._append(row, piv, start + j)
            added += 1
            j += 1
        return added

    def _normalise(self, row: np.ndarray) -> np.ndarray:
        piv = int(np.flatnonzero(row)[0])
        return self.field.mul(row, self.field.inv(int(row[piv])))

    def _clear_column(self, row: np.ndarray, t_row: np.ndarray | None = None) -> int:
        """Eliminate row's pivot column from the basis; returns the pivot."""
        f = self.field
        piv = int(np.flatnonzero(row)[0])
        if self.pivots:
            c = self.basis[:, piv].copy()
            if c.any():
                self.basis = f.sub(self.basis, f.mul(c[:, None], row[None, :]))
                if t_row is not None:
                    self.transform = f.sub(self.transform, f.mul(c[:, None], t_row[None, :]))
        return piv

    def _append(self, row: np.ndarray, piv: int, index: int) -> None:
        self.basis = np.vstack([self.basis, row[None, :]])
        self.pivots.append(piv)
        self.kept.append(index)

    def _add_tracked(self, row: np.ndarray, index: int) -> int:
        if self.full:
            return 0
        f = self.field
        res = self.reduce(row[None, :])[0]
        if not res.any():
            return 0
        # res = [-coef @ T, 1] @ [kept rows; row]
        coef = row[self.pivots]
        t_row = np.append(f.neg(field_matmul(f, coef[None, :], self.transform)[0])
                          if self.pivots else np.zeros(0, np.int64), 1)
        piv = int(np.flatnonzero(res)[0])
        scale = f.inv(int(res[piv]))
        res = f.mul(res, scale)
        t_row = f.mul(t_row, scale)
        self.transform = np.pad(self.transform, ((0, 0), (0, 1)))
        self._clear_column(res, t_row)
        self.transform = np.vstack([self.transform, t_row[None, :]])
        self._append(res, piv, index)
        return 1


def _as_matrix(m) -> FFMatrix:
    if not isinstance(m, FFMatrix):
        raise TypeError(f"expected FFMatrix, got {type(m).__name__}")
    return m


def rank(m: FFMatrix) -> int:
    """Rank over the matrix's field."""
    m = _as_matrix(m)
    acc = EchelonAccumulator(m.field, m.cols)
    acc.add_rows(m.entries)
    return acc.rank


def streaming_rank(field: FieldSpec, cols: int, chunks: Iterable[np.ndarray]) -> int:
    """Rank of the matrix whose rows arrive as a sequence of chunks."""
    acc = EchelonAccumulator(field, cols)
    for chunk in chunks:
        acc.add_rows(chunk)
        if acc.full:
            break
    return acc.rank


def row_basis_indices(m: FFMatrix) -> list[int]:
    acc = EchelonAccumulator(m.field, m.cols)
    acc.add_rows(m.entries)
    return acc.kept


def row_basis(m: FFMatrix) -> FFMatrix:
    """The first linearly independent rows of m, in index order."""
    m = _as_matrix(m)
    idx = row_basis_indices(m)
    return FFMatrix(m.field, m.entries[idx] if idx else np.zeros((0, m.cols), np.int64))


def basis_coordinates(basis: FFMatrix, m: FFMatrix) -> np.ndarray:
    """Coordinates C with C @ basis == m, for rows of m in the row space of basis.

    ``basis`` must have full row rank.  Raises ValueError if some row of m
    is outside the span.
    """
    f = basis.field
    acc = EchelonAccumulator(f, basis.cols, track=True)
    acc.add_rows(basis.entries)
    if acc.rank != basis.rows:
        raise ValueError("basis rows are linearly dependent")
    if basis.rows == 0:
        if m.entries.any():
            raise ValueError("row outside the span of the basis")
        return np.zeros((m.rows, 0), dtype=np.int64)
    if acc.reduce(m.entries).any():
        raise ValueError("row outside the span of the basis")
    # rref = T @ basis, and each row equals row[pivots] @ rref
    return field_matmul(f, m.entries[:, acc.pivots], acc.transform)


def mat_vec(m: FFMatrix, x: Sequence[int]) -> list[int]:
    """Exact product m @ x."""
    m = _as_matrix(m)
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.shape[0] != m.cols:
        raise ValueError(f"vector of length {x.shape} does not match {m.cols} columns")
    m.field.check(x)
    return field_matmul(m.field, m.entries, x[:, None])[:, 0].tolist()


def _same_field(mats: Sequence[FFMatrix]) -> FieldSpec:
    field = mats[0].field
    for m in mats[1:]:
        if m.field != field:
            raise ValueError(f"field mismatch: GF({field}) vs GF({m.field})")
    return field


def kron(a: FFMatrix, b: FFMatrix) -> FFMatrix:
    """Kronecker product; row (i1, i2) sits at index i1 * b.rows + i2."""
    f = _same_field([a, b])
    out = f.mul(a.entries[:, None, :, None], b.entries[None, :, None, :])
    return FFMatrix(f, np.asarray(out).reshape(a.rows * b.rows, a.cols * b.cols))


def block_diag(blocks: Sequence[FFMatrix]) -> FFMatrix:
    if not blocks:
        raise ValueError("block_diag needs at least one block")
    f = _same_field(blocks)
    out = np.zeros((sum(b.rows for b in blocks), sum(b.cols for b in blocks)), dtype=np.int64)
    r = c = 0
    for b in blocks:
        out[r : r + b.rows, c : c + b.cols] = b.entries
        r += b.rows
        c += b.cols
    return FFMatrix(f, out)

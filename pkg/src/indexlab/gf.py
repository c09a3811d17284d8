"""Prime and prime-power finite fields, plus binomial congruences.

Elements of GF(p^k) are plain integers in ``[0, p^k)``: the base-p digits
(least significant first) are the coefficients of a polynomial of degree
``< k`` reduced modulo the field's canonical irreducible.  For ``k == 1``
this is ordinary arithmetic mod p.

All arithmetic entry points accept either Python ints or numpy integer
arrays, so the same field object backs scalar code and vectorised
elimination.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb

import numpy as np

MAX_ORDER = 1 << 16

_SPEC_RE = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+)\s*)?$")


def is_prime(n: int) -> bool:
    """Trial-division primality test."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# -- polynomials over GF(p), coefficient lists low degree first --------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m."""
    a = _poly_trim(list(a))
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        c = a[-1]
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _poly_trim(a)
    return a


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """True if the monic polynomial ``modulus`` has no factor of degree <= k/2."""
    k = len(modulus) - 1
    if k < 1 or modulus[-1] != 1:
        return False
    if k == 1:
        return True
    # no roots: quick rejection, exact for k <= 3
    for x in range(p):
        if sum(c * pow(x, i, p) for i, c in enumerate(modulus)) % p == 0:
            return False
    for d in range(2, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(list(modulus), list(low) + [1], p):
                return False
    return True


@lru_cache(maxsize=None)
def canonical_modulus(p: int, k: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree k over GF(p).

    Candidates are ordered by the integer sum(c_i * p**i) over their
    non-leading coefficients, i.e. the same little-endian reading used for
    field elements.
    """
    for code in range(p**k):
        low = [(code // p**i) % p for i in range(k)]
        cand = tuple(low) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise AssertionError(f"no irreducible polynomial of degree {k} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^k) with its canonical modulus (coefficients low degree first)."""

    p: int
    k: int = 1
    modulus: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"characteristic {self.p!r} is not prime")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"extension degree must be >= 1, got {self.k!r}")
        if self.p**self.k > MAX_ORDER:
            raise ValueError(f"GF({self.p}^{self.k}) exceeds the supported order {MAX_ORDER}")
        canon = canonical_modulus(self.p, self.k)
        if not self.modulus:
            object.__setattr__(self, "modulus", canon)
        elif tuple(self.modulus) != canon:
            raise ValueError(f"modulus {self.modulus} is not the canonical irreducible {canon}")

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def order(self) -> int:
        return self.q

    def __str__(self) -> str:
        return str(self.p) if self.k == 1 else f"{self.p}^{self.k}"

    def __repr__(self) -> str:
        return f"FieldSpec({self})"

    # -- tables ---------------------------------------------------------------

    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        """Antilog/log tables w.r.t. the smallest primitive element."""
        q = self.q
        for g in range(2, q) if q > 2 else [1]:
            exp = np.zeros(2 * q, dtype=np.int64)
            x = 1
            seen = 0
            for e in range(q - 1):
                exp[e] = x
                x = self._mul_poly(x, g)
                if x == 1:
                    seen = e + 1
                    break
            if seen == q - 1:
                exp[q - 1 : 2 * (q - 1)] = exp[: q - 1]
                log = np.zeros(q, dtype=np.int64)
                log[exp[: q - 1]] = np.arange(q - 1)
                return exp, log
        raise AssertionError("no primitive element found")

    @cached_property
    def _inv_table(self) -> np.ndarray:
        q = self.q
        inv = np.zeros(q, dtype=np.int64)
        if self.k == 1:
            for a in range(1, q):
                inv[a] = pow(a, q - 2, q)
        else:
            exp, log = self._exp_log
            inv[1:] = exp[(q - 1 - log[1:]) % (q - 1)]
        return inv

    def _mul_poly(self, a: int, b: int) -> int:
        """Schoolbook product of two encoded polynomials, reduced."""
        p, k = self.p, self.k
        da = [(a // p**i) % p for i in range(k)]
        db = [(b // p**i) % p for i in range(k)]
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        rem = _poly_mod(prod, list(self.modulus), p)
        return sum(c * p**i for i, c in enumerate(rem))

    @cached_property
    def tables(self) -> tuple[list[list[int]], list[list[int]], list[int], list[int]]:
        """Python-list (add, mul, neg, inv) tables; intended for q <= 256."""
        q = self.q
        if q > 256:
            raise ValueError("scalar tables are only built for fields of order <= 256")
        a = np.arange(q)
        add = self.add(a[:, None], a[None, :]).tolist()
        mul = self.mul(a[:, None], a[None, :]).tolist()
        neg = self.neg(a).tolist()
        inv = self._inv_table.tolist()
        return add, mul, neg, inv

    # -- arithmetic (ints or numpy arrays) --------------------------------------

    def check(self, a) -> None:
        if isinstance(a, np.ndarray):
            if a.size and (a.min() < 0 or a.max() >= self.q):
                raise ValueError(f"array entries out of range for GF({self})")
        elif not isinstance(a, (int, np.integer)) or not 0 <= a < self.q:
            raise ValueError(f"{a!r} is not an element of GF({self})")

    def add(self, a, b):
        p, k = self.p, self.k
        if k == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        out = 0
        for i in range(k):
            w = p**i
            out = out + ((a // w + b // w) % p) * w
        return out

    def neg(self, a):
        p, k = self.p, self.k
        if k == 1:
            return (-a) % p
        if p == 2:
            return a
        out = 0
        for i in range(k):
            w = p**i
            out = out + ((-(a // w)) % p) * w
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        exp, log = self._exp_log
        q = self.q
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
            out = exp[log[a] + log[b]]
            return np.where((a == 0) | (b == 0), 0, out)
        if a == 0 or b == 0:
            return 0
        return int(exp[(int(log[a]) + int(log[b])) % (q - 1)])

    def inv(self, a):
        if isinstance(a, np.ndarray):
            if np.any(a == 0):
                raise ZeroDivisionError("inverse of zero")
            return self._inv_table[a]
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self._inv_table[a])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def const_coeff(self, a):
        """Constant coefficient of the polynomial encoded by a (an element of GF(p))."""
        return a % self.p

    def elements(self) -> range:
        return range(self.q)


def parse_field_spec(text: str) -> FieldSpec:
    """Parse ``"P"`` or ``"P^K"`` into the canonical field."""
    m = _SPEC_RE.match(str(text))
    if not m:
        raise ValueError(f"malformed field spec {text!r}; expected P or P^K")
    p = int(m.group(1))
    k = int(m.group(2)) if m.group(2) is not None else 1
    if k < 1:
        raise ValueError(f"extension degree must be >= 1 in {text!r}")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return FieldSpec(p, k)


def field_ops(spec: FieldSpec, kind: str, a: int, b: int | None = None) -> int:
    """Checked scalar arithmetic: kind is one of add, mul, neg, inv."""
    spec.check(a)
    if kind in ("add", "mul"):
        if b is None:
            raise ValueError(f"{kind} needs two operands")
        spec.check(b)
        return int(spec.add(a, b) if kind == "add" else spec.mul(a, b))
    if kind == "neg":
        return int(spec.neg(a))
    if kind == "inv":
        return spec.inv(a)
    raise ValueError(f"unknown field operation {kind!r}")


def base_digits(n: int, p: int) -> list[int]:
    digits = []
    while n:
        n, d = divmod(n, p)
        digits.append(d)
    return digits


def binomial_mod_p(n: int, r: int, p: int) -> int:
    """C(n, r) mod p via the product of digit binomials in base p (Lucas)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if n < 0 or r < 0:
        raise ValueError("binomial arguments must be non-negative")
    if r > n:
        return 0
    out = 1
    while r:
        n, ni = divmod(n, p)
        r, ri = divmod(r, p)
        if ri > ni:
            return 0
        out = out * comb(ni, ri) % p
    return out % p

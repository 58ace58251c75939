"""Exact arithmetic over prime fields F_p and the linear algebra primitives
(rank, span membership, linear solves) the rest of the package is built on.

Vectors are plain tuples of residues in [0, p).  Everything is exact integer
arithmetic; there is no floating point anywhere in this module.  For p = 2 the
elimination routines switch to a bit-packed representation (one Python int per
row, bit i = coordinate i), which is what makes the exhaustive verifiers fast
enough in pure Python.  Correctness is defined by the generic path; the packed
path is an equivalent specialization.

All pivoting is lowest-index-first so that solutions and reduced bases are
reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


def is_prime(p: int) -> bool:
    """Trial-division primality check (moduli here are small)."""
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field F_p for a prime modulus p."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    def normalize(self, value: int) -> int:
        return value % self.p

    def normalize_vector(self, vec: Sequence[int]) -> tuple:
        return tuple(v % self.p for v in vec)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        """Multiplicative inverse of a nonzero residue."""
        a %= self.p
        if a == 0:
            raise ValueError("0 is not invertible")
        return pow(a, self.p - 2, self.p)

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


GF2 = PrimeField(2)


def ff_inverse(a: int, field: PrimeField) -> int:
    """Inverse of `a` in `field`; raises ValueError for a = 0."""
    return field.inv(a)


def vector_to_mask(vec: Sequence[int]) -> int:
    """Pack a 0/1 vector into an int, bit i = entry i."""
    mask = 0
    for i, v in enumerate(vec):
        if v & 1:
            mask |= 1 << i
    return mask


class Echelon:
    """Incremental row-echelon basis of a set of vectors over F_p.

    Rows are kept reduced with pivots at strictly increasing coordinates, so
    membership tests are a single reduction pass.  Over GF(2) rows are bit
    masks and reduction is XOR.
    """

    def __init__(self, field: PrimeField, length: int):
        self.field = field
        self.length = length
        self.pivots: list[int] = []  # pivot coordinate of each row, ascending
        self.rows: list = []  # packed ints for p=2, lists otherwise

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce2(self, mask: int) -> int:
        for piv, row in zip(self.pivots, self.rows):
            if (mask >> piv) & 1:
                mask ^= row
        return mask

    def _reduce_generic(self, vec: Sequence[int]) -> list:
        p = self.field.p
        work = [v % p for v in vec]
        for piv, row in zip(self.pivots, self.rows):
            c = work[piv]
            if c:
                for j in range(piv, self.length):
                    work[j] = (work[j] - c * row[j]) % p
        return work

    def contains(self, vec: Sequence[int]) -> bool:
        """True iff vec lies in the span of the inserted vectors."""
        if self.field.p == 2:
            return self._reduce2(vector_to_mask(vec)) == 0
        return not any(self._reduce_generic(vec))

    def contains_unit(self, i: int) -> bool:
        """Membership test for the i-th (0-based) unit vector."""
        if self.field.p == 2:
            return self._reduce2(1 << i) == 0
        vec = [0] * self.length
        vec[i] = 1
        return not any(self._reduce_generic(vec))

    def add(self, vec: Sequence[int]) -> bool:
        """Insert a vector; returns True iff it enlarged the span."""
        if len(vec) != self.length:
            raise ValueError(f"vector length {len(vec)} != {self.length}")
        if self.field.p == 2:
            mask = self._reduce2(vector_to_mask(vec))
            if mask == 0:
                return False
            piv = (mask & -mask).bit_length() - 1
            # keep rows fully reduced above the new pivot
            for idx, row in enumerate(self.rows):
                if (row >> piv) & 1:
                    self.rows[idx] = row ^ mask
            pos = 0
            while pos < len(self.pivots) and self.pivots[pos] < piv:
                pos += 1
            self.pivots.insert(pos, piv)
            self.rows.insert(pos, mask)
            return True
        p = self.field.p
        work = self._reduce_generic(vec)
        piv = next((j for j, v in enumerate(work) if v), None)
        if piv is None:
            return False
        c_inv = self.field.inv(work[piv])
        work = [(v * c_inv) % p for v in work]
        for idx, row in enumerate(self.rows):
            c = row[piv]
            if c:
                self.rows[idx] = [(rv - c * wv) % p for rv, wv in zip(row, work)]
        pos = 0
        while pos < len(self.pivots) and self.pivots[pos] < piv:
            pos += 1
        self.pivots.insert(pos, piv)
        self.rows.insert(pos, work)
        return True


def rank(vectors: Iterable[Sequence[int]], field: PrimeField) -> int:
    """Dimension of the span of `vectors`; 0 for an empty collection."""
    vectors = list(vectors)
    if not vectors:
        return 0
    length = len(vectors[0])
    ech = Echelon(field, length)
    for v in vectors:
        ech.add(v)
    return ech.rank


def span_solve(
    target: Sequence[int],
    generators: Sequence[Sequence[int]],
    field: PrimeField,
) -> Optional[tuple]:
    """Coefficients c with sum_i c_i * generators[i] = target, or None.

    Deterministic: Gaussian elimination on the augmented system with
    lowest-index pivot selection; free variables are set to zero, so the
    solution prefers the earliest generators.
    """
    length = len(target)
    for g in generators:
        if len(g) != length:
            raise ValueError(f"generator length {len(g)} != target length {length}")
    r = len(generators)
    p = field.p

    if p == 2:
        # rows indexed by coordinate; bits 0..r-1 are coefficients, bit r is
        # the target entry
        rows = []
        for coord in range(length):
            row = 0
            for j, g in enumerate(generators):
                if g[coord] & 1:
                    row |= 1 << j
            if target[coord] & 1:
                row |= 1 << r
            rows.append(row)
        pivot_of_col: dict[int, int] = {}
        next_row = 0
        for col in range(r):
            sel = next((i for i in range(next_row, length) if (rows[i] >> col) & 1), None)
            if sel is None:
                continue
            rows[next_row], rows[sel] = rows[sel], rows[next_row]
            pivot_row = rows[next_row]
            for i in range(length):
                if i != next_row and (rows[i] >> col) & 1:
                    rows[i] ^= pivot_row
            pivot_of_col[col] = next_row
            next_row += 1
        if any(rows[i] >> r for i in range(next_row, length)):
            return None
        coeffs = [0] * r
        for col, row_idx in pivot_of_col.items():
            coeffs[col] = (rows[row_idx] >> r) & 1
        return tuple(coeffs)

    rows = [[g[coord] % p for g in generators] + [target[coord] % p] for coord in range(length)]
    pivot_of_col = {}
    next_row = 0
    for col in range(r):
        sel = next((i for i in range(next_row, length) if rows[i][col]), None)
        if sel is None:
            continue
        rows[next_row], rows[sel] = rows[sel], rows[next_row]
        inv = field.inv(rows[next_row][col])
        rows[next_row] = [(v * inv) % p for v in rows[next_row]]
        piv_row = rows[next_row]
        for i in range(length):
            if i != next_row and rows[i][col]:
                c = rows[i][col]
                rows[i] = [(v - c * pv) % p for v, pv in zip(rows[i], piv_row)]
        pivot_of_col[col] = next_row
        next_row += 1
    # below next_row every coefficient column has been eliminated
    if any(rows[i][r] for i in range(next_row, length)):
        return None
    coeffs = [0] * r
    for col, row_idx in pivot_of_col.items():
        coeffs[col] = rows[row_idx][r]
    return tuple(coeffs)


def unit_vector(i: int, length: int) -> tuple:
    """The 0-based i-th unit vector of the given length."""
    if not 0 <= i < length:
        raise ValueError(f"unit index {i} out of range for length {length}")
    return tuple(1 if j == i else 0 for j in range(length))


def dot(a: Sequence[int], b: Sequence[int], field: PrimeField) -> int:
    if len(a) != len(b):
        raise ValueError(f"dot of lengths {len(a)} and {len(b)}")
    return sum(x * y for x, y in zip(a, b)) % field.p

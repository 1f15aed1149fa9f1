"""Dense GF(2) linear algebra on bit-packed rows.

Rows are stored as Python integers (bit i = column i), so a row XOR or a
row-vector AND is a single word-parallel big-int operation.  Matrices and
vectors are immutable after construction; elimination always works on a
copy of the row list, so instances can be shared freely across trials.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class DimensionMismatch(ValueError):
    """Operand dimensions are incompatible."""


def _mask(n: int) -> int:
    return (1 << n) - 1


class BitVector:
    """Length-n vector over GF(2), packed into one integer."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int = 0):
        if n < 0:
            raise ValueError("length must be non-negative")
        if bits < 0 or bits >> n:
            raise ValueError("bits out of range for length %d" % n)
        self.n = n
        self.bits = bits

    @classmethod
    def from_array(cls, arr) -> "BitVector":
        a = np.asarray(arr, dtype=np.uint8) & 1
        if a.ndim != 1:
            raise ValueError("expected a 1-D array")
        if a.size == 0:
            return cls(0, 0)
        packed = np.packbits(a, bitorder="little").tobytes()
        return cls(a.size, int.from_bytes(packed, "little"))

    def to_array(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.uint8)
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, count=self.n, bitorder="little")

    def weight(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionMismatch("xor of lengths %d and %d" % (self.n, other.n))
        return BitVector(self.n, self.bits ^ other.bits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and self.n == other.n
            and self.bits == other.bits
        )

    def __hash__(self):
        return hash((self.n, self.bits))

    def __repr__(self):
        return "BitVector(%d, 0b%s)" % (self.n, format(self.bits, "0%db" % max(self.n, 1)))


class BitMatrix:
    """rows x cols matrix over GF(2); each row is one packed integer."""

    __slots__ = ("rows", "cols", "row_bits")

    def __init__(self, rows: int, cols: int, row_bits: Sequence[int]):
        if len(row_bits) != rows:
            raise ValueError("row count does not match row data")
        m = _mask(cols)
        for r in row_bits:
            if r < 0 or r & ~m:
                raise ValueError("row bits exceed column count")
        self.rows = rows
        self.cols = cols
        self.row_bits = tuple(row_bits)

    @classmethod
    def from_array(cls, arr) -> "BitMatrix":
        a = np.asarray(arr, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows = [BitVector.from_array(row).bits for row in a] if a.shape[1] else [0] * a.shape[0]
        return cls(a.shape[0], a.shape[1], rows)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, [0] * rows)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, bits in enumerate(self.row_bits):
            out[i] = BitVector(self.cols, bits).to_array()
        return out

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_bits[i])

    def transpose(self) -> "BitMatrix":
        a = self.to_array()
        return BitMatrix.from_array(a.T)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.row_bits == other.row_bits
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.row_bits))

    def __repr__(self):
        return "BitMatrix(%dx%d)" % (self.rows, self.cols)


def matvec_mod2(m: BitMatrix, v: BitVector) -> BitVector:
    """m @ v over GF(2): result[i] = parity(row_i AND v)."""
    if v.n != m.cols:
        raise DimensionMismatch("matrix has %d cols, vector has length %d" % (m.cols, v.n))
    out = 0
    for i, r in enumerate(m.row_bits):
        out |= ((r & v.bits).bit_count() & 1) << i
    return BitVector(m.rows, out)


class RowBasis:
    """Row-echelon basis of a row space, for rank and repeated membership tests.

    Pivoting is by first (lowest-index) set bit, which makes the pivot order
    deterministic for a given input.
    """

    __slots__ = ("cols", "pivots", "pivot_rows")

    def __init__(self, rows: Iterable[int], cols: int):
        basis: dict[int, int] = {}
        for r in rows:
            r = self._reduce(r, basis)
            if r:
                basis[(r & -r).bit_length() - 1] = r
        self.cols = cols
        self.pivots = sorted(basis)
        self.pivot_rows = basis

    @staticmethod
    def _reduce(r: int, basis: dict[int, int]) -> int:
        while r:
            p = (r & -r).bit_length() - 1
            row = basis.get(p)
            if row is None:
                return r
            r ^= row
        return 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def contains(self, bits: int) -> bool:
        return self._reduce(bits, self.pivot_rows) == 0


def rank_mod2(m: BitMatrix) -> int:
    """GF(2) rank by Gaussian elimination on a copy of the rows."""
    return RowBasis(m.row_bits, m.cols).rank


def in_row_space(m: BitMatrix, v: BitVector) -> bool:
    """True iff v is a GF(2) combination of rows of m."""
    if v.n != m.cols:
        raise DimensionMismatch("matrix has %d cols, vector has length %d" % (m.cols, v.n))
    return RowBasis(m.row_bits, m.cols).contains(v.bits)

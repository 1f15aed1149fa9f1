"""CSS codes: construction, validation, and the logical-success test.

A CSS code is a pair of binary parity-check matrices (hx, hz) with
hx @ hz.T == 0 over GF(2).  Rows of hx are the X-stabilizers (they detect
the Z component of an error, syndrome sz = hx @ ez); rows of hz detect the
X component (sx = hz @ ex).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import gf2


class CssValidationError(ValueError):
    pass


def _as_check_matrix(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=np.uint8)
    if a.ndim != 2:
        raise CssValidationError("%s must be a 2-D matrix" % name)
    if not np.isin(a, (0, 1)).all():
        raise CssValidationError("%s must be binary" % name)
    return np.ascontiguousarray(a & 1)


@dataclass
class PauliError:
    """X/Z components of an n-qubit Pauli error; qubit i carries Y iff both bits are set."""

    ex: np.ndarray
    ez: np.ndarray

    def __post_init__(self):
        self.ex = np.ascontiguousarray(np.asarray(self.ex, dtype=np.uint8) & 1)
        self.ez = np.ascontiguousarray(np.asarray(self.ez, dtype=np.uint8) & 1)
        if self.ex.shape != self.ez.shape or self.ex.ndim != 1:
            raise ValueError("ex and ez must be 1-D arrays of equal length")

    @classmethod
    def identity(cls, n: int) -> "PauliError":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def _trusted(cls, ex: np.ndarray, ez: np.ndarray) -> "PauliError":
        # hot-path constructor: caller guarantees contiguous 0/1 uint8 arrays
        obj = object.__new__(cls)
        obj.ex = ex
        obj.ez = ez
        return obj

    @property
    def n(self) -> int:
        return self.ex.size

    def weight(self) -> int:
        """Hamming weight of the support (number of non-identity qubits)."""
        return int((self.ex | self.ez).sum())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliError)
            and np.array_equal(self.ex, other.ex)
            and np.array_equal(self.ez, other.ez)
        )


@dataclass
class Syndrome:
    """sx = hz @ ex (one bit per Z-stabilizer), sz = hx @ ez (one bit per X-stabilizer)."""

    sx: np.ndarray
    sz: np.ndarray

    def __post_init__(self):
        self.sx = np.ascontiguousarray(np.asarray(self.sx, dtype=np.uint8) & 1)
        self.sz = np.ascontiguousarray(np.asarray(self.sz, dtype=np.uint8) & 1)

    @classmethod
    def _trusted(cls, sx: np.ndarray, sz: np.ndarray) -> "Syndrome":
        obj = object.__new__(cls)
        obj.sx = sx
        obj.sz = sz
        return obj

    def any(self) -> bool:
        return bool(self.sx.any() or self.sz.any())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Syndrome)
            and np.array_equal(self.sx, other.sx)
            and np.array_equal(self.sz, other.sz)
        )


class CssCode:
    """Validated CSS code with Tanner-graph adjacency for both check sectors.

    Immutable after construction; instances are shared read-only across
    concurrent trials.  Row-echelon bases of hx and hz are cached so the
    per-trial logical check costs one reduction per residual.
    """

    def __init__(self, hx, hz):
        hx = _as_check_matrix(hx, "hx")
        hz = _as_check_matrix(hz, "hz")
        if hx.shape[1] != hz.shape[1]:
            raise CssValidationError(
                "column mismatch: hx has %d, hz has %d" % (hx.shape[1], hz.shape[1])
            )
        self.hx = hx
        self.hz = hz
        self.n = hx.shape[1]
        self.mx = hx.shape[0]
        self.mz = hz.shape[0]

        if self.mx and self.mz:
            prod = (hx.astype(np.int32) @ hz.T.astype(np.int32)) & 1
            bad = np.argwhere(prod)
            if bad.size:
                i, j = bad[0]
                raise CssValidationError(
                    "stabilizers do not commute: X row %d and Z row %d overlap on an odd "
                    "number of qubits" % (i, j)
                )

        self._hx_basis = gf2.RowBasis(gf2.BitMatrix.from_array(hx).row_bits, self.n)
        self._hz_basis = gf2.RowBasis(gf2.BitMatrix.from_array(hz).row_bits, self.n)
        self.k = self.n - self._hx_basis.rank - self._hz_basis.rank

        # adjacency: supports of each check, and per-qubit check lists M_X(i), M_Z(i)
        self.x_checks = [np.flatnonzero(hx[j]).astype(np.int32) for j in range(self.mx)]
        self.z_checks = [np.flatnonzero(hz[j]).astype(np.int32) for j in range(self.mz)]
        self.m_x = [np.flatnonzero(hx[:, i]).astype(np.int32) for i in range(self.n)]
        self.m_z = [np.flatnonzero(hz[:, i]).astype(np.int32) for i in range(self.n)]

        h = hashlib.sha256()
        h.update(b"css:%d:%d:%d:" % (self.n, self.mx, self.mz))
        h.update(np.packbits(hx).tobytes())
        h.update(np.packbits(hz).tobytes())
        self.code_hash = h.hexdigest()[:16]
        self._graph = None
        # cached operands for batched syndrome computation
        self.hx_t32 = np.ascontiguousarray(hx.T, dtype=np.int32)
        self.hz_t32 = np.ascontiguousarray(hz.T, dtype=np.int32)

    def __reduce__(self):
        return (CssCode, (self.hx, self.hz))

    def __repr__(self):
        return "CssCode(n=%d, k=%d, mx=%d, mz=%d)" % (self.n, self.k, self.mx, self.mz)

    @property
    def graph(self):
        """Flattened Tanner-graph arrays used by the decoders (built lazily)."""
        if self._graph is None:
            from .graph import JointGraph

            self._graph = JointGraph.from_checks(self.hx, self.hz)
        return self._graph

    def in_x_stabilizers(self, v: np.ndarray) -> bool:
        return self._hx_basis.contains(gf2.BitVector.from_array(v).bits)

    def in_z_stabilizers(self, v: np.ndarray) -> bool:
        return self._hz_basis.contains(gf2.BitVector.from_array(v).bits)


def new_css(hx, hz) -> CssCode:
    return CssCode(hx, hz)


def hypergraph_product(h1, h2) -> CssCode:
    """CSS code from two classical parity-check matrices.

    With h1 of shape (m1, n1) and h2 of shape (m2, n2):

        hx = [h1 (x) I_n2 | I_m1 (x) h2.T]
        hz = [I_n1 (x) h2  | h1.T (x) I_m2]

    giving N = n1*n2 + m1*m2 qubits; orthogonality holds identically.
    """
    a1 = _as_check_matrix(h1, "h1")
    a2 = _as_check_matrix(h2, "h2")
    if a1.size == 0 or a2.size == 0 or not a1.any() or not a2.any():
        raise ValueError("base matrices must be nonzero")
    m1, n1 = a1.shape
    m2, n2 = a2.shape
    hx = np.concatenate(
        [np.kron(a1, np.eye(n2, dtype=np.uint8)), np.kron(np.eye(m1, dtype=np.uint8), a2.T)],
        axis=1,
    )
    hz = np.concatenate(
        [np.kron(np.eye(n1, dtype=np.uint8), a2), np.kron(a1.T, np.eye(m2, dtype=np.uint8))],
        axis=1,
    )
    return CssCode(hx, hz)


def logical_error_check(code: CssCode, e: PauliError, e_hat: PauliError) -> bool:
    """True iff the correction succeeds up to stabilizers.

    The residual (e_hat XOR e) must lie in the stabilizer group: its X part
    in rowspace(hx) and its Z part in rowspace(hz).  Membership in the row
    space is the dual statement of annihilation by the orthogonal complement.
    """
    if e.n != code.n or e_hat.n != code.n:
        raise ValueError("error length does not match code")
    return code.in_x_stabilizers(e.ex ^ e_hat.ex) and code.in_z_stabilizers(e.ez ^ e_hat.ez)

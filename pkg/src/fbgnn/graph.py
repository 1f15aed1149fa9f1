"""Flattened Tanner-graph arrays shared by the decoders and the GNN.

A joint graph has one variable node per qubit and two check sectors: the
X sector holds the rows of hx (syndrome bits sz), the Z sector the rows of
hz (syndrome bits sx).  Edges are stored in check-major order; a padded
(checks x max_degree) layout supports vectorized extrinsic scans, and a
variable-major permutation supports per-qubit sums.

Graphs are built from raw check matrices and do not require CSS
orthogonality, so toy graphs for unit tests can be built directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _ragged_sum(ordered: np.ndarray, ptr: np.ndarray, empty: np.ndarray) -> np.ndarray:
    """Segment sums over the last axis.  ordered has shape (..., E) with segment i
    occupying [ptr[i], ptr[i+1]); a zero pad column keeps every offset valid for
    reduceat, and empty segments (whose reduceat output is a stray element) are
    zeroed afterwards."""
    n_seg = ptr.size - 1
    if n_seg == 0:
        return np.zeros(ordered.shape[:-1] + (0,), dtype=ordered.dtype)
    pad = np.zeros(ordered.shape[:-1] + (1,), dtype=ordered.dtype)
    padded = np.concatenate([ordered, pad], axis=-1)
    sums = np.add.reduceat(padded, ptr[:-1], axis=-1)
    if empty.any():
        sums[..., empty] = 0
    return sums


@dataclass
class SectorGraph:
    n_vars: int
    n_checks: int
    n_edges: int
    max_degree: int
    edge_var: np.ndarray      # (E,) variable of each edge, check-major order
    edge_check: np.ndarray    # (E,) check of each edge
    check_ptr: np.ndarray     # (C+1,) CSR offsets into the edge arrays
    pad_edge: np.ndarray      # (C, D) edge index, -1 on padding
    pad_edge_safe: np.ndarray  # (C, D) edge index with 0 on padding (for gathers)
    pad_mask: np.ndarray      # (C, D) bool
    pad_pos_of_edge: np.ndarray  # (E,) flat index of each edge in the (C*D) layout
    var_ptr: np.ndarray       # (N+1,) CSR offsets of the variable-major view
    var_edge: np.ndarray      # (E,) edge indices grouped by variable
    seg_of_pos: np.ndarray    # (E,) variable of each variable-major position
    var_degree: np.ndarray    # (N,)
    check_degree: np.ndarray  # (C,)

    @classmethod
    def from_matrix(cls, h) -> "SectorGraph":
        h = (np.asarray(h, dtype=np.uint8) & 1)
        if h.ndim != 2:
            raise ValueError("check matrix must be 2-D")
        n_checks, n_vars = h.shape
        ec, ev = np.nonzero(h)  # row-major: sorted by check, then variable
        ec = ec.astype(np.int32)
        ev = ev.astype(np.int32)
        n_edges = ev.size
        check_degree = h.sum(axis=1).astype(np.int32)
        var_degree = h.sum(axis=0).astype(np.int32)
        max_degree = int(check_degree.max(initial=0))

        check_ptr = np.zeros(n_checks + 1, dtype=np.int32)
        np.cumsum(check_degree, out=check_ptr[1:])

        pad_edge = np.full((n_checks, max(max_degree, 1)), -1, dtype=np.int32)
        pos_in_check = np.arange(n_edges, dtype=np.int32) - check_ptr[ec]
        pad_edge[ec, pos_in_check] = np.arange(n_edges, dtype=np.int32)
        pad_mask = pad_edge >= 0
        pad_edge_safe = np.where(pad_mask, pad_edge, 0)
        pad_pos_of_edge = (ec.astype(np.int64) * pad_edge.shape[1] + pos_in_check).astype(np.int64)

        var_ptr = np.zeros(n_vars + 1, dtype=np.int32)
        np.cumsum(var_degree, out=var_ptr[1:])
        order = np.argsort(ev, kind="stable").astype(np.int32)
        var_edge = order
        seg_of_pos = ev[order]

        return cls(
            n_vars=n_vars,
            n_checks=n_checks,
            n_edges=n_edges,
            max_degree=max_degree,
            edge_var=ev,
            edge_check=ec,
            check_ptr=check_ptr,
            pad_edge=pad_edge,
            pad_edge_safe=pad_edge_safe,
            pad_mask=pad_mask,
            pad_pos_of_edge=pad_pos_of_edge,
            var_ptr=var_ptr,
            var_edge=var_edge,
            seg_of_pos=seg_of_pos,
            var_degree=var_degree,
            check_degree=check_degree,
        )

    def segment_sum(self, values: np.ndarray) -> np.ndarray:
        """Per-variable sums of per-edge values; values has shape (..., E)."""
        ordered = values[..., self.var_edge]
        return _ragged_sum(ordered, self.var_ptr, self.var_degree == 0)

    def check_parity(self, bits: np.ndarray) -> np.ndarray:
        """Parity of a per-variable bit vector over each check's support; bits (..., N)."""
        if self.n_checks == 0:
            return np.zeros(bits.shape[:-1] + (0,), dtype=np.uint8)
        gathered = bits[..., self.edge_var].astype(np.int32)
        sums = _ragged_sum(gathered, self.check_ptr, self.check_degree == 0)
        return (sums & 1).astype(np.uint8)


@dataclass
class JointGraph:
    n: int
    x: SectorGraph  # rows of hx; syndrome bits sz
    z: SectorGraph  # rows of hz; syndrome bits sx

    @classmethod
    def from_checks(cls, hx, hz) -> "JointGraph":
        hx = np.asarray(hx, dtype=np.uint8)
        hz = np.asarray(hz, dtype=np.uint8)
        if hx.ndim != 2 or hz.ndim != 2 or hx.shape[1] != hz.shape[1]:
            raise ValueError("hx and hz must be 2-D with equal column counts")
        return cls(n=hx.shape[1], x=SectorGraph.from_matrix(hx), z=SectorGraph.from_matrix(hz))


def as_graph(code_or_graph) -> JointGraph:
    if isinstance(code_or_graph, JointGraph):
        return code_or_graph
    return code_or_graph.graph

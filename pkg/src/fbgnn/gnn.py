"""One-shot feedback GNN: maps a BP posterior and the syndrome to refined priors.

The layer runs on the same Tanner graph as the decoder.  Node features are
the posterior LLR triples; each check gets a scalar reliability feature
(signed boxplus of its neighbors' commutation LLRs, negative = likely
unsatisfied).  Edge messages come from one MLP per check sector applied to
the concatenated endpoint features; each qubit averages its incoming X- and
Z-sector messages separately and a third MLP maps
[node feature || X aggregate || Z aggregate] to the new prior triple.

All MLPs have one hidden layer of 40 tanh units and a linear output, giving
3923 parameters regardless of the code.  The output is intentionally left
unclamped; the next BP block clamps when it forms messages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bp4
from .css import Syndrome
from .graph import SectorGraph, as_graph

HIDDEN = 40
EDGE_IN = 4    # check scalar + 3 node LLRs
EDGE_OUT = 20
VN_IN = 3 + 2 * EDGE_OUT
VN_OUT = 3

MAGIC = "FBGNN"
VERSION = "v1"
_HEADER = "%s %s %d %d %d %d %d\n" % (MAGIC, VERSION, EDGE_IN, HIDDEN, EDGE_OUT, VN_IN, VN_OUT)


class WeightFormatError(ValueError):
    pass


@dataclass
class MlpParams:
    """One hidden layer of 40 tanh units, linear output."""

    w1: np.ndarray  # (in, 40)
    b1: np.ndarray  # (40,)
    w2: np.ndarray  # (40, out)
    b2: np.ndarray  # (out,)

    def n_params(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2)

    def astype(self, dtype) -> "MlpParams":
        return MlpParams(*(a.astype(dtype) for a in self.arrays()))


def mlp_forward(p: MlpParams, x: np.ndarray) -> np.ndarray:
    """tanh hidden layer, linear output; x has shape (..., in)."""
    x = np.asarray(x)
    if x.shape[-1] != p.w1.shape[0]:
        raise ValueError("input dimension %d, expected %d" % (x.shape[-1], p.w1.shape[0]))
    h = np.tanh(x @ p.w1 + p.b1)
    return h @ p.w2 + p.b2


@dataclass
class GnnWeights:
    f_cx: MlpParams  # X-sector edge MLP, shared by all X-check edges
    f_cz: MlpParams
    f_vn: MlpParams
    version: str = VERSION

    def param_count(self) -> int:
        return self.f_cx.n_params() + self.f_cz.n_params() + self.f_vn.n_params()

    def mlps(self) -> tuple[MlpParams, MlpParams, MlpParams]:
        return (self.f_cx, self.f_cz, self.f_vn)

    def arrays(self) -> list[np.ndarray]:
        return [a for m in self.mlps() for a in m.arrays()]

    def astype(self, dtype) -> "GnnWeights":
        return GnnWeights(self.f_cx.astype(dtype), self.f_cz.astype(dtype),
                          self.f_vn.astype(dtype), self.version)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    @classmethod
    def from_flat(cls, flat: np.ndarray, dtype=np.float64) -> "GnnWeights":
        flat = np.asarray(flat, dtype=dtype)
        mlps = []
        offset = 0
        for n_in, n_out in ((EDGE_IN, EDGE_OUT), (EDGE_IN, EDGE_OUT), (VN_IN, VN_OUT)):
            shapes = [(n_in, HIDDEN), (HIDDEN,), (HIDDEN, n_out), (n_out,)]
            arrs = []
            for s in shapes:
                size = int(np.prod(s))
                arrs.append(flat[offset:offset + size].reshape(s).copy())
                offset += size
            mlps.append(MlpParams(*arrs))
        if offset != flat.size:
            raise ValueError("flat vector has %d entries, expected %d" % (flat.size, offset))
        return cls(*mlps)


def init_weights(seed_or_rng=0) -> GnnWeights:
    """Glorot-uniform matrices (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = (
        seed_or_rng
        if isinstance(seed_or_rng, np.random.Generator)
        else np.random.Generator(np.random.Philox(key=int(seed_or_rng)))
    )

    def mlp(n_in: int, n_out: int) -> MlpParams:
        bound1 = np.sqrt(6.0 / (n_in + HIDDEN))
        bound2 = np.sqrt(6.0 / (HIDDEN + n_out))
        return MlpParams(
            rng.uniform(-bound1, bound1, (n_in, HIDDEN)).astype(np.float32),
            np.zeros(HIDDEN, dtype=np.float32),
            rng.uniform(-bound2, bound2, (HIDDEN, n_out)).astype(np.float32),
            np.zeros(n_out, dtype=np.float32),
        )

    return GnnWeights(mlp(EDGE_IN, EDGE_OUT), mlp(EDGE_IN, EDGE_OUT), mlp(VN_IN, VN_OUT))


def zero_weights(dtype=np.float32) -> GnnWeights:
    return GnnWeights.from_flat(np.zeros(3923), dtype=dtype)


def save_weights(w: GnnWeights, path) -> None:
    """Header line with version and layer sizes, then raw little-endian float32."""
    if w.version != VERSION:
        raise WeightFormatError("can only write version %s files" % VERSION)
    with open(path, "wb") as fh:
        fh.write(_HEADER.encode("ascii"))
        for a in w.arrays():
            fh.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


def load_weights(path) -> GnnWeights:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace")
        tokens = header.split()
        if len(tokens) != 7 or tokens[0] != MAGIC:
            raise WeightFormatError("not a %s weight file" % MAGIC)
        if tokens[1] != VERSION:
            raise WeightFormatError("unsupported version %r" % tokens[1])
        dims = [int(t) for t in tokens[2:]]
        if dims != [EDGE_IN, HIDDEN, EDGE_OUT, VN_IN, VN_OUT]:
            raise WeightFormatError("unexpected layer sizes %r" % dims)
        raw = fh.read()
    expected = 4 * 3923
    if len(raw) != expected:
        raise WeightFormatError("payload has %d bytes, expected %d" % (len(raw), expected))
    flat = np.frombuffer(raw, dtype="<f4")
    return GnnWeights.from_flat(flat, dtype=np.float32)


def combine_posterior(triple, clamp: float = bp4.DEFAULT_CLAMP):
    """Per-qubit commutation LLRs (lambda_x, lambda_z) from a posterior triple."""
    tri = np.asarray(triple)
    return (
        bp4.to_scalar_message(tri, "x", clamp),
        bp4.to_scalar_message(tri, "z", clamp),
    )


def _full_boxplus(sg: SectorGraph, lam: np.ndarray, pad: float) -> np.ndarray:
    """Boxplus over each check's full neighborhood; lam (..., E) check-major."""
    if sg.n_checks == 0:
        return np.zeros(lam.shape[:-1] + (0,), dtype=lam.dtype)
    d = sg.pad_edge.shape[1]
    safe = np.where(sg.pad_mask, sg.pad_edge, 0)
    p = np.where(sg.pad_mask, lam[..., safe], lam.dtype.type(pad))
    acc = p[..., 0]
    for k in range(1, d):
        acc = bp4._bp2(acc, p[..., k])
    return acc


def cn_feature(code_or_graph, lam_x: np.ndarray, lam_z: np.ndarray,
               syndrome: Syndrome) -> tuple[np.ndarray, np.ndarray]:
    """Scalar reliability feature per check, both sectors.

    X-sector check j: (-1)^sz[j] * boxplus of lambda_x over its support; the
    more negative, the more likely the check is violated.
    """
    g = as_graph(code_or_graph)
    lam_x = np.asarray(lam_x)
    lam_z = np.asarray(lam_z)
    pad = bp4._pad_identity(lam_x.dtype)
    sign_x = (1.0 - 2.0 * np.asarray(syndrome.sz)).astype(lam_x.dtype)
    sign_z = (1.0 - 2.0 * np.asarray(syndrome.sx)).astype(lam_z.dtype)
    h_cx = sign_x * _full_boxplus(g.x, lam_x[..., g.x.edge_var], pad)
    h_cz = sign_z * _full_boxplus(g.z, lam_z[..., g.z.edge_var], pad)
    return h_cx, h_cz


def _mean_aggregate(sg: SectorGraph, msgs: np.ndarray) -> np.ndarray:
    """Mean of per-edge message rows per variable; zero vector for degree-0 vars.

    msgs has shape (E, F) in check-major edge order.
    """
    if sg.n_edges == 0:
        return np.zeros((sg.n_vars, msgs.shape[-1]), dtype=msgs.dtype)
    ordered = msgs[sg.var_edge]
    sums = np.add.reduceat(
        np.concatenate([ordered, np.zeros((1,) + msgs.shape[1:], dtype=msgs.dtype)], axis=0),
        sg.var_ptr[:-1],
        axis=0,
    )
    empty = sg.var_degree == 0
    if empty.any():
        sums[empty] = 0
    inv = np.zeros(sg.n_vars, dtype=msgs.dtype)
    nz = sg.var_degree > 0
    inv[nz] = 1.0 / sg.var_degree[nz]
    return sums * inv[:, None]


@dataclass
class GnnState:
    """Intermediate tensors of one forward pass (for inspection and tests)."""

    h_v: np.ndarray
    h_cx: np.ndarray
    h_cz: np.ndarray
    msg_x: np.ndarray
    msg_z: np.ndarray
    agg_x: np.ndarray
    agg_z: np.ndarray


def gnn_forward(code_or_graph, weights: GnnWeights, posterior, syndrome: Syndrome,
                clamp: float = bp4.DEFAULT_CLAMP, return_state: bool = False):
    """Refined channel priors (n, 3) from a BP posterior and the observed syndrome."""
    g = as_graph(code_or_graph)
    h_v = np.asarray(posterior)
    if h_v.shape != (g.n, 3):
        raise ValueError("posterior must have shape (n, 3)")
    dtype = np.result_type(h_v.dtype, weights.f_vn.w1.dtype)
    h_v = h_v.astype(dtype, copy=False)

    lam_x, lam_z = combine_posterior(h_v, clamp)
    h_cx, h_cz = cn_feature(g, lam_x, lam_z, syndrome)

    edge_in_x = np.concatenate([h_cx[g.x.edge_check, None], h_v[g.x.edge_var]], axis=1)
    edge_in_z = np.concatenate([h_cz[g.z.edge_check, None], h_v[g.z.edge_var]], axis=1)
    msg_x = mlp_forward(weights.f_cx, edge_in_x) if g.x.n_edges else np.zeros((0, EDGE_OUT), dtype)
    msg_z = mlp_forward(weights.f_cz, edge_in_z) if g.z.n_edges else np.zeros((0, EDGE_OUT), dtype)

    agg_x = _mean_aggregate(g.x, msg_x)
    agg_z = _mean_aggregate(g.z, msg_z)

    refined = mlp_forward(weights.f_vn, np.concatenate([h_v, agg_x, agg_z], axis=1))
    if return_state:
        return refined, GnnState(h_v, h_cx, h_cz, msg_x, msg_z, agg_x, agg_z)
    return refined

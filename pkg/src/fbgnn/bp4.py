"""Quaternary sum-product decoding over the joint X/Z Tanner graph.

Message conventions
-------------------
Per qubit i the state is an LLR triple (Lx, Ly, Lz) against identity, e.g.
Lx = log(p_I / p_X).  The scalar message toward a check collapses the triple
to the LLR of commuting with that check:

    toward an X-sector check (row of hx):  log((1+e^-Lx) / (e^-Ly + e^-Lz))
    toward a Z-sector check (row of hz):   log((1+e^-Lz) / (e^-Lx + e^-Ly))

Check-to-variable messages combine extrinsic scalars with the boxplus rule
and flip sign on a fired syndrome bit.  Variable updates add check messages
(scaled by the normalization factor kappa) to the channel priors; only the
checks that can see a given Pauli component contribute to it, so the X
component sums over Z-sector neighbors, the Z component over X-sector
neighbors, and the Y component over both.

All messages are clamped to +-clamp after every computation.  The flooding
schedule runs every check update, then every variable update, once per
iteration.  Decoder state is per-trial; the graph itself is shared
read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .css import PauliError, Syndrome
from .graph import JointGraph, SectorGraph, as_graph

try:  # compiled kernel is optional; the numpy path is the fallback
    from . import _kernel
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None

DEFAULT_CLAMP = 30.0
DEFAULT_PRIOR_P = 0.05  # decoder-side prior, fixed regardless of the true channel


def kernel_available() -> bool:
    return _kernel is not None


def _pad_identity(dtype) -> float:
    # acts as an exact boxplus identity: large enough that exp(pad - clamp)
    # overflows to the pad itself, small enough that (x + pad) - pad == x
    # to within one ulp of the working precision
    return 4096.0 if np.dtype(dtype) == np.float64 else 256.0


def init_priors(n: int, p: float, dtype=np.float64) -> np.ndarray:
    """Uniform depolarizing priors: every entry log((1-p)/(p/3))."""
    if not 0.0 < p < 1.0:
        raise ValueError("prior error rate must lie strictly in (0, 1)")
    val = np.log((1.0 - p) / (p / 3.0))
    return np.full((n, 3), val, dtype=dtype)


# np.logaddexp is a generic (non-SIMD) ufunc and an order of magnitude slower
# than this composition of vectorized primitives; values agree to ~1 ulp
def _fast_softplus(u: np.ndarray) -> np.ndarray:
    return np.maximum(u, 0.0) + np.log1p(np.exp(-np.abs(u)))


def _fast_logaddexp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(a, b) + np.log1p(np.exp(-np.abs(a - b)))


def _fast_msg(num: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """log((1 + e^-num) / (e^-d1 + e^-d2)): LLR of commuting with a check whose
    commuting error component has LLR `num`."""
    return _fast_softplus(-num) - _fast_logaddexp(-d1, -d2)


def _msg_x(tri: np.ndarray) -> np.ndarray:
    return _fast_msg(tri[..., 0], tri[..., 1], tri[..., 2])


def _msg_z(tri: np.ndarray) -> np.ndarray:
    return _fast_msg(tri[..., 2], tri[..., 0], tri[..., 1])


def to_scalar_message(triple, sector: str, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Collapse LLR triples (..., 3) to scalar messages toward one check sector."""
    tri = np.asarray(triple)
    if sector == "x":
        m = _msg_x(tri)
    elif sector == "z":
        m = _msg_z(tri)
    else:
        raise ValueError("sector must be 'x' or 'z'")
    return np.clip(m, -clamp, clamp)


def _bp2(a, b):
    # log-domain LLR of the XOR of two independent bits
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def boxplus(values) -> float:
    """Log-domain LLR of the XOR of independent bits with the given LLRs."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("boxplus of an empty list is undefined")
    acc = v[0]
    for k in range(1, v.size):
        acc = _bp2(acc, v[k])
    return float(acc)


def cn_update(messages, syndrome_bit: int, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Extrinsic check-node update for one check.

    messages holds the incoming scalar from each neighbor; entry k of the
    result is the boxplus of all other entries, sign-flipped if the check
    fired.  A degree-1 check has an empty extrinsic set and asserts
    satisfaction at full clamp strength.
    """
    m = np.asarray(messages, dtype=np.float64).ravel()
    if m.size == 0:
        raise ValueError("check has no neighbors")
    pad = _pad_identity(m.dtype)
    d = m.size
    pre = np.empty(d + 1)
    suf = np.empty(d + 1)
    pre[0] = pad
    suf[d] = pad
    for k in range(d):
        pre[k + 1] = _bp2(pre[k], m[k])
        suf[d - 1 - k] = _bp2(m[d - 1 - k], suf[d - k])
    ext = _bp2(pre[:d], suf[1:])
    sign = -1.0 if syndrome_bit else 1.0
    return sign * np.clip(ext, -clamp, clamp)


# tanh-domain product cap: 2*atanh(_PMAX) ~ 35, beyond any sane clamp, so an
# empty extrinsic product (degree-1 check) lands exactly on +-clamp
_PMAX = 1.0 - 1e-15


def _tanh_slots(sg: SectorGraph, lam: np.ndarray) -> np.ndarray:
    """tanh(lam/2) in the padded (..., C, D) layout, 1.0 (product identity) on pads."""
    t = np.tanh(0.5 * lam[..., sg.pad_edge_safe].astype(np.float64))
    t[..., ~sg.pad_mask] = 1.0
    return t


def _exclusive_prods(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Products of all slots strictly before / strictly after each slot."""
    d = t.shape[-1]
    pre = np.ones_like(t)
    suf = np.ones_like(t)
    for k in range(1, d):
        np.multiply(pre[..., k - 1], t[..., k - 1], out=pre[..., k])
        np.multiply(suf[..., d - k], t[..., d - k], out=suf[..., d - k - 1])
    return pre, suf


def _cn_extrinsic(sg: SectorGraph, lam: np.ndarray, sign: np.ndarray, clamp: float) -> np.ndarray:
    """Vectorized extrinsic CN update for a whole sector; lam (..., E) check-major.

    Prefix/suffix tanh products are carried in float64 so the tanh domain
    keeps resolution past the clamp at any working precision.
    """
    if sg.n_edges == 0:
        return np.zeros_like(lam)
    t = _tanh_slots(sg, lam)
    pre, suf = _exclusive_prods(t)
    prod = np.clip(pre * suf, -_PMAX, _PMAX)
    delta = sign[..., :, None] * np.clip(2.0 * np.arctanh(prod), -clamp, clamp)
    flat = delta.reshape(delta.shape[:-2] + (sg.pad_edge.size,))
    return flat[..., sg.pad_pos_of_edge].astype(lam.dtype, copy=False)


def _vn_scalar_messages(g: JointGraph, priors: np.ndarray, dx: np.ndarray, dz: np.ndarray,
                        tx: np.ndarray, tz: np.ndarray, kappa: float,
                        clamp: float) -> tuple[np.ndarray, np.ndarray]:
    """New variable-to-check scalars for both sectors (extrinsic rule)."""
    vx = g.x.edge_var
    gx = priors[..., vx, 0] + kappa * tz[..., vx]
    gy = priors[..., vx, 1] + kappa * (tz[..., vx] + tx[..., vx] - dx)
    gz = priors[..., vx, 2] + kappa * (tx[..., vx] - dx)
    lam_x = np.clip(_fast_msg(gx, gy, gz), -clamp, clamp)

    vz = g.z.edge_var
    gx = priors[..., vz, 0] + kappa * (tz[..., vz] - dz)
    gy = priors[..., vz, 1] + kappa * (tz[..., vz] + tx[..., vz] - dz)
    gz = priors[..., vz, 2] + kappa * tx[..., vz]
    lam_z = np.clip(_fast_msg(gz, gx, gy), -clamp, clamp)
    return lam_x, lam_z


def _posterior(priors: np.ndarray, tx: np.ndarray, tz: np.ndarray, kappa: float) -> np.ndarray:
    post = np.empty_like(priors)
    post[..., 0] = priors[..., 0] + kappa * tz
    post[..., 1] = priors[..., 1] + kappa * (tx + tz)
    post[..., 2] = priors[..., 2] + kappa * tx
    return post


def vn_update(code_or_graph, priors, delta_x, delta_z, kappa: float = 1.0,
              clamp: float = DEFAULT_CLAMP):
    """Extrinsic variable-node update.

    Returns ((tri_x, lam_x), (tri_z, lam_z)): per-edge LLR triples and the
    scalar messages derived from them, for edges of each sector in
    check-major order.
    """
    g = as_graph(code_or_graph)
    priors = np.asarray(priors, dtype=np.float64)
    dx = np.asarray(delta_x, dtype=np.float64)
    dz = np.asarray(delta_z, dtype=np.float64)
    tx = g.x.segment_sum(dx)
    tz = g.z.segment_sum(dz)

    vx = g.x.edge_var
    tri_x = np.stack(
        [
            priors[vx, 0] + kappa * tz[vx],
            priors[vx, 1] + kappa * (tz[vx] + tx[vx] - dx),
            priors[vx, 2] + kappa * (tx[vx] - dx),
        ],
        axis=-1,
    )
    vz = g.z.edge_var
    tri_z = np.stack(
        [
            priors[vz, 0] + kappa * (tz[vz] - dz),
            priors[vz, 1] + kappa * (tz[vz] + tx[vz] - dz),
            priors[vz, 2] + kappa * tx[vz],
        ],
        axis=-1,
    )
    lam_x = to_scalar_message(tri_x, "x", clamp)
    lam_z = to_scalar_message(tri_z, "z", clamp)
    return (tri_x, lam_x), (tri_z, lam_z)


def posterior(code_or_graph, priors, delta_x, delta_z, kappa: float = 1.0) -> np.ndarray:
    """Channel posterior: the variable update without the extrinsic exclusion."""
    g = as_graph(code_or_graph)
    priors = np.asarray(priors, dtype=np.float64)
    tx = g.x.segment_sum(np.asarray(delta_x, dtype=np.float64))
    tz = g.z.segment_sum(np.asarray(delta_z, dtype=np.float64))
    return _posterior(priors, tx, tz, kappa)


def hard_decision(post) -> PauliError:
    """Per qubit, pick the smallest of (0, Gx, Gy, Gz); ties resolve I < X < Y < Z."""
    p = np.asarray(post)
    stacked = np.concatenate([np.zeros(p.shape[:-1] + (1,), dtype=p.dtype), p], axis=-1)
    idx = np.argmin(stacked, axis=-1)  # argmin takes the first minimum
    ex = ((idx == 1) | (idx == 2)).astype(np.uint8)
    ez = ((idx == 2) | (idx == 3)).astype(np.uint8)
    return PauliError(ex, ez) if p.ndim == 2 else (ex, ez)


@dataclass
class BpConfig:
    iterations: int
    kappa: float = 1.0
    clamp: float = DEFAULT_CLAMP
    early_stop: bool = True
    dtype: type = np.float32
    backend: str = "auto"  # auto | python | kernel

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.clamp > 0:
            raise ValueError("clamp must be positive")
        if self.backend not in ("auto", "python", "kernel"):
            raise ValueError("unknown backend %r" % self.backend)


@dataclass
class BpOutcome:
    e_hat: PauliError
    converged: bool
    posterior: np.ndarray
    iterations_used: int
    posterior_trace: Optional[list[np.ndarray]] = None


def _resolve_backend(cfg: BpConfig) -> str:
    if cfg.backend == "python":
        return "python"
    if cfg.backend == "kernel":
        if _kernel is None:
            raise RuntimeError("compiled kernel requested but not built")
        if np.dtype(cfg.dtype) != np.float32:
            raise RuntimeError("compiled kernel only supports float32")
        return "kernel"
    if _kernel is not None and np.dtype(cfg.dtype) == np.float32:
        return "kernel"
    return "python"


def _kernel_state(g: JointGraph):
    state = getattr(g, "_kernel_state", None)
    if state is None:
        state = _kernel.DecoderState(
            g.n,
            g.x.check_ptr, g.x.edge_var,
            g.z.check_ptr, g.z.edge_var,
        )
        g._kernel_state = state
    return state


def run(code_or_graph, syndrome: Syndrome, priors, cfg: BpConfig,
        taps: Optional[Iterable[int]] = None) -> BpOutcome:
    """Flooding BP from the given priors until the syndrome is reproduced or the
    iteration budget is spent.

    Messages are (re)initialized from the priors, so consecutive runs are
    independent.  If taps is given, the channel posterior is recorded at the
    end of each listed iteration (1-based).
    """
    g = as_graph(code_or_graph)
    priors = np.asarray(priors, dtype=cfg.dtype)
    if priors.shape != (g.n, 3):
        raise ValueError("priors must have shape (n, 3)")
    sx = np.asarray(syndrome.sx, dtype=np.uint8)
    sz = np.asarray(syndrome.sz, dtype=np.uint8)
    if sx.shape != (g.z.n_checks,) or sz.shape != (g.x.n_checks,):
        raise ValueError("syndrome shape does not match the code")
    tap_list = sorted(set(int(t) for t in taps)) if taps is not None else None
    if tap_list and (tap_list[0] < 1 or tap_list[-1] > cfg.iterations):
        raise ValueError("tap iterations must lie in 1..iterations")

    if _resolve_backend(cfg) == "kernel":
        state = _kernel_state(g)
        tap_arr = np.asarray(tap_list if tap_list else [], dtype=np.int32)
        trace = np.zeros((len(tap_arr), g.n, 3), dtype=np.float32)
        ex = np.zeros(g.n, dtype=np.uint8)
        ez = np.zeros(g.n, dtype=np.uint8)
        post = np.zeros((g.n, 3), dtype=np.float32)
        converged, used = state.run(
            np.ascontiguousarray(priors, dtype=np.float32), sx, sz,
            int(cfg.iterations), float(cfg.kappa), float(cfg.clamp),
            bool(cfg.early_stop), tap_arr, trace, ex, ez, post,
        )
        trace_list = [trace[i] for i in range(len(tap_arr))] if tap_list is not None else None
        return BpOutcome(PauliError(ex, ez), bool(converged), post, int(used), trace_list)

    return _run_python(g, sx, sz, priors, cfg, tap_list)


def _run_python(g: JointGraph, sx: np.ndarray, sz: np.ndarray, priors: np.ndarray,
                cfg: BpConfig, tap_list) -> BpOutcome:
    dtype = np.dtype(cfg.dtype)
    kappa = dtype.type(cfg.kappa)
    clamp = dtype.type(cfg.clamp)
    sign_x = (1.0 - 2.0 * sz).astype(dtype)  # X-sector checks carry sz bits
    sign_z = (1.0 - 2.0 * sx).astype(dtype)

    lam_x = np.clip(_msg_x(priors[g.x.edge_var]), -clamp, clamp)
    lam_z = np.clip(_msg_z(priors[g.z.edge_var]), -clamp, clamp)

    trace = [] if tap_list is not None else None
    tap_set = set(tap_list) if tap_list else set()
    converged = False
    post = priors.copy()
    ex = np.zeros(g.n, dtype=np.uint8)
    ez = np.zeros(g.n, dtype=np.uint8)
    used = 0
    for it in range(1, cfg.iterations + 1):
        used = it
        dx = _cn_extrinsic(g.x, lam_x, sign_x, clamp)
        dz = _cn_extrinsic(g.z, lam_z, sign_z, clamp)
        tx = g.x.segment_sum(dx)
        tz = g.z.segment_sum(dz)
        lam_x, lam_z = _vn_scalar_messages(g, priors, dx, dz, tx, tz, kappa, clamp)
        post = _posterior(priors, tx, tz, kappa)
        if it in tap_set:
            trace.append(post.copy())
        e = hard_decision(post)
        ex, ez = e.ex, e.ez
        converged = bool(
            np.array_equal(g.x.check_parity(ez), sz) and np.array_equal(g.z.check_parity(ex), sx)
        )
        if converged and cfg.early_stop:
            break
    return BpOutcome(PauliError(ex, ez), converged, post, used, trace)

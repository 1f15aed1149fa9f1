"""Minimal array-valued reverse-mode autodiff.

Just enough machinery to differentiate the feedback GNN plus an unrolled BP
block: elementwise ops, (batched) matmul against weight matrices, the
gather/segment-sum pairs induced by a Tanner graph, and two fused decoder
primitives (pairwise boxplus and the LLR-triple collapse) with hand-derived
adjoints.  Everything operates on float64 numpy arrays; graphs are built by
closures and replayed in reverse topological order.
"""

from __future__ import annotations

import numpy as np


class Var:
    __slots__ = ("data", "grad", "parents", "bwd")

    def __init__(self, data, parents=(), bwd=None):
        self.data = np.asarray(data)
        self.grad = None
        self.parents = parents
        self.bwd = bwd

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return "Var(shape=%r)" % (self.data.shape,)


def value(x):
    return x.data if isinstance(x, Var) else np.asarray(x)


def _acc(v: Var, g):
    if v.grad is None:
        v.grad = np.array(np.broadcast_to(g, v.data.shape), dtype=np.float64)
    else:
        v.grad += g


def _acc_owned(v: Var, g: np.ndarray):
    """Accumulate a gradient buffer the caller created and will not reuse."""
    if v.grad is None and g.shape == v.data.shape:
        v.grad = g
    else:
        _acc(v, g)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _lift(x) -> Var:
    return x if isinstance(x, Var) else Var(np.asarray(x, dtype=np.float64))


def _sigmoid(t: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * t))


# ---------------------------------------------------------------- basic ops

def add(a, b) -> Var:
    a, b = _lift(a), _lift(b)
    out = Var(a.data + b.data, (a, b))

    def bwd(g):
        _acc(a, _unbroadcast(g, a.data.shape))
        _acc(b, _unbroadcast(g, b.data.shape))

    out.bwd = bwd
    return out


def sub(a, b) -> Var:
    return add(a, neg(b))


def neg(a) -> Var:
    a = _lift(a)
    out = Var(-a.data, (a,))
    out.bwd = lambda g: _acc(a, -g)
    return out


def mul(a, b) -> Var:
    """Elementwise product; either side may be a constant array."""
    if not isinstance(a, Var) and not isinstance(b, Var):
        raise TypeError("at least one operand must be a Var")
    if not isinstance(b, Var):
        a, b_const = a, np.asarray(b)
        out = Var(a.data * b_const, (a,))
        out.bwd = lambda g: _acc(a, _unbroadcast(g * b_const, a.data.shape))
        return out
    if not isinstance(a, Var):
        return mul(b, a)
    out = Var(a.data * b.data, (a, b))

    def bwd(g):
        _acc(a, _unbroadcast(g * b.data, a.data.shape))
        _acc(b, _unbroadcast(g * a.data, b.data.shape))

    out.bwd = bwd
    return out


def scale(a: Var, c: float) -> Var:
    out = Var(a.data * c, (a,))
    out.bwd = lambda g: _acc(a, g * c)
    return out


def tanh(a: Var) -> Var:
    y = np.tanh(a.data)
    out = Var(y, (a,))
    out.bwd = lambda g: _acc_owned(a, g * (1.0 - y * y))
    return out


def softplus(a: Var) -> Var:
    from .bp4 import _fast_softplus

    out = Var(_fast_softplus(a.data), (a,))
    out.bwd = lambda g: _acc_owned(a, g * _sigmoid(a.data))
    return out


def clip(a: Var, lo: float, hi: float) -> Var:
    inside = (a.data > lo) & (a.data < hi)
    out = Var(np.clip(a.data, lo, hi), (a,))
    out.bwd = lambda g: _acc_owned(a, g * inside)
    return out


def matmul(a, w) -> Var:
    """a (..., i) @ w (i, o); gradients flow into whichever operands are Vars."""
    av, wv = value(a), value(w)
    parents = tuple(x for x in (a, w) if isinstance(x, Var))
    out = Var(av @ wv, parents)
    batch_axes = tuple(range(av.ndim - 1))

    def bwd(g):
        if isinstance(a, Var):
            _acc_owned(a, g @ wv.T)
        if isinstance(w, Var):
            _acc_owned(w, np.tensordot(av, g, axes=(batch_axes, batch_axes)))

    out.bwd = bwd
    return out


def affine(x, w: Var, b: Var) -> Var:
    """x (..., i) @ w (i, o) + b (o,), fused so the pass-through gradient never
    needs a defensive copy."""
    xv = value(x)
    out = Var(xv @ w.data + b.data, tuple(p for p in (x, w, b) if isinstance(p, Var)))
    batch_axes = tuple(range(xv.ndim - 1))

    def bwd(g):
        if isinstance(x, Var):
            _acc_owned(x, g @ w.data.T)
        _acc_owned(w, np.tensordot(xv, g, axes=(batch_axes, batch_axes)))
        _acc_owned(b, g.sum(axis=batch_axes))

    out.bwd = bwd
    return out


def component(a: Var, i: int) -> Var:
    """Select index i of the last axis, dropping it."""
    out = Var(a.data[..., i], (a,))

    def bwd(g):
        buf = np.zeros(a.data.shape, dtype=np.float64)
        buf[..., i] = g
        _acc(a, buf)

    out.bwd = bwd
    return out


def stack_last(parts: list) -> Var:
    """Stack (...,)-shaped vars along a new last axis."""
    datas = [value(p) for p in parts]
    out = Var(np.stack(datas, axis=-1), tuple(p for p in parts if isinstance(p, Var)))

    def bwd(g):
        for i, p in enumerate(parts):
            if isinstance(p, Var):
                _acc(p, g[..., i])

    out.bwd = bwd
    return out


def concat_last(parts: list) -> Var:
    datas = [value(p) for p in parts]
    sizes = [d.shape[-1] for d in datas]
    out = Var(np.concatenate(datas, axis=-1), tuple(p for p in parts if isinstance(p, Var)))
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for i, p in enumerate(parts):
            if isinstance(p, Var):
                _acc(p, g[..., offsets[i]:offsets[i + 1]])

    out.bwd = bwd
    return out


def mean_all(a: Var) -> Var:
    out = Var(np.float64(a.data.mean()), (a,))
    inv = 1.0 / a.data.size
    out.bwd = lambda g: _acc(a, np.full(a.data.shape, g * inv))
    return out


def sum_all(a: Var) -> Var:
    out = Var(np.float64(a.data.sum()), (a,))
    out.bwd = lambda g: _acc(a, np.full(a.data.shape, g))
    return out


# ------------------------------------------------------- decoder primitives

def bp2(a, b) -> Var:
    """Pairwise log-domain boxplus: logaddexp(0, a+b) - logaddexp(a, b)."""
    av, bv = value(a), value(b)
    out = Var(np.logaddexp(0.0, av + bv) - np.logaddexp(av, bv),
              tuple(x for x in (a, b) if isinstance(x, Var)))

    def bwd(g):
        s_sum = _sigmoid(av + bv)
        if isinstance(a, Var):
            _acc(a, _unbroadcast(g * (s_sum - _sigmoid(av - bv)), av.shape))
        if isinstance(b, Var):
            _acc(b, _unbroadcast(g * (s_sum - _sigmoid(bv - av)), bv.shape))

    out.bwd = bwd
    return out


def scalar_msg(num, d1, d2) -> Var:
    """log((1 + e^-num) / (e^-d1 + e^-d2)): the LLR-triple collapse toward a check
    whose commuting component is `num`."""
    from .bp4 import _fast_msg

    nv, d1v, d2v = value(num), value(d1), value(d2)
    out = Var(_fast_msg(nv, d1v, d2v),
              tuple(x for x in (num, d1, d2) if isinstance(x, Var)))

    def bwd(g):
        if isinstance(num, Var):
            _acc_owned(num, g * (-_sigmoid(-nv)))
        if isinstance(d1, Var):
            _acc_owned(d1, g * _sigmoid(d2v - d1v))
        if isinstance(d2, Var):
            _acc_owned(d2, g * _sigmoid(d1v - d2v))

    out.bwd = bwd
    return out


def cn_extrinsic(lam: Var, sg, sign: np.ndarray, clamp: float) -> Var:
    """Fused extrinsic check-node update for one sector.

    lam holds (..., E) variable-to-check scalars in check-major order; the
    result is the per-edge check-to-variable message: the sign-flipped,
    clamped boxplus of each check's other incoming scalars.  Forward and
    backward run in the tanh-product domain with exclusive prefix/suffix
    scans, so the adjoint is division-free and exact.
    """
    from . import bp4

    lam_d = lam.data
    t = bp4._tanh_slots(sg, lam_d)  # (..., C, D), pads = 1
    pre, suf = bp4._exclusive_prods(t)
    raw_prod = pre * suf
    prod = np.clip(raw_prod, -bp4._PMAX, bp4._PMAX)
    raw = 2.0 * np.arctanh(prod)
    clipped = np.clip(raw, -clamp, clamp)
    delta_pad = sign[..., :, None] * clipped
    flat = delta_pad.reshape(delta_pad.shape[:-2] + (sg.pad_edge.size,))
    out = Var(flat[..., sg.pad_pos_of_edge], (lam,))
    d = t.shape[-1]

    def bwd(g):
        g_pad = g[..., sg.pad_edge_safe] * sg.pad_mask
        inside = (np.abs(raw) < clamp) & (np.abs(raw_prod) < bp4._PMAX)
        g_prod = g_pad * sign[..., :, None] * inside * 2.0 / (1.0 - prod * prod)
        g_pre = g_prod * suf
        g_suf = g_prod * pre
        g_t = np.zeros_like(t)
        carry = np.zeros(t.shape[:-1])
        for k in range(d - 1, 0, -1):  # pre[k] = pre[k-1] * t[k-1]
            gk = g_pre[..., k] + carry
            g_t[..., k - 1] += gk * pre[..., k - 1]
            carry = gk * t[..., k - 1]
        carry = np.zeros(t.shape[:-1])
        for k in range(0, d - 1):  # suf[k] = t[k+1] * suf[k+1]
            gk = g_suf[..., k] + carry
            g_t[..., k + 1] += gk * suf[..., k + 1]
            carry = gk * t[..., k + 1]
        g_lam_pad = g_t * (0.5 * (1.0 - t * t)) * sg.pad_mask
        flat_g = g_lam_pad.reshape(g_lam_pad.shape[:-2] + (sg.pad_edge.size,))
        _acc(lam, flat_g[..., sg.pad_pos_of_edge])

    out.bwd = bwd
    return out


def parity_logits(lam: Var, sg) -> Var:
    """Per-check parity logits: boxplus over each check's full neighborhood.

    lam holds (..., E) per-edge scalars in check-major order; the result has
    shape (..., C).
    """
    from . import bp4

    t = bp4._tanh_slots(sg, lam.data)
    pre, suf = bp4._exclusive_prods(t)
    raw_prod = t[..., 0] * suf[..., 0]  # full product
    prod = np.clip(raw_prod, -bp4._PMAX, bp4._PMAX)
    out = Var(2.0 * np.arctanh(prod), (lam,))

    def bwd(g):
        inside = np.abs(raw_prod) < bp4._PMAX
        g_prod = g * inside * 2.0 / (1.0 - prod * prod)
        g_t = g_prod[..., None] * pre * suf  # leave-one-out products
        g_lam_pad = g_t * (0.5 * (1.0 - t * t)) * sg.pad_mask
        flat_g = g_lam_pad.reshape(g_lam_pad.shape[:-2] + (sg.pad_edge.size,))
        _acc(lam, flat_g[..., sg.pad_pos_of_edge])

    out.bwd = bwd
    return out


def vn_messages(px: Var, py: Var, pz: Var, tx, tz, delta, sg, sector: str,
                kappa: float, clamp: float) -> Var:
    """Fused extrinsic variable update for one sector: new variable-to-check
    scalars from the prior components (B, N), the per-variable message sums
    tx/tz (B, N), and the sector's own incoming messages delta (B, E).

    Passing tx = tz = delta = None gives the message initialization from bare
    priors.  The excluded own-message term only appears in the LLR components
    the sector's checks can see, mirroring the plain decoder.
    """
    from .bp4 import _fast_msg

    v = sg.edge_var
    pxe, pye, pze = px.data[..., v], py.data[..., v], pz.data[..., v]
    if delta is None:
        gx, gy, gz = pxe, pye, pze
    else:
        txe, tze, d = tx.data[..., v], tz.data[..., v], delta.data
        if sector == "x":
            gx = pxe + kappa * tze
            gy = pye + kappa * (tze + txe - d)
            gz = pze + kappa * (txe - d)
        else:
            gx = pxe + kappa * (tze - d)
            gy = pye + kappa * (tze + txe - d)
            gz = pze + kappa * txe
    raw = _fast_msg(gx, gy, gz) if sector == "x" else _fast_msg(gz, gx, gy)
    parents = (px, py, pz) + ((tx, tz, delta) if delta is not None else ())
    out = Var(np.clip(raw, -clamp, clamp), parents)

    def bwd(g):
        gm = g * (np.abs(raw) < clamp)
        if sector == "x":
            num, d1, d2 = gx, gy, gz
        else:
            num, d1, d2 = gz, gx, gy
        gnum = gm * (-_sigmoid(-num))
        gd1 = gm * _sigmoid(d2 - d1)
        gd2 = gm * _sigmoid(d1 - d2)
        if sector == "x":
            ggx, ggy, ggz = gnum, gd1, gd2
        else:
            ggz, ggx, ggy = gnum, gd1, gd2
        sx_sum = sg.segment_sum(ggx)
        sy_sum = sg.segment_sum(ggy)
        sz_sum = sg.segment_sum(ggz)
        _acc_owned(px, sx_sum)
        _acc_owned(py, sy_sum)
        _acc_owned(pz, sz_sum)
        if delta is not None:
            _acc_owned(tz, kappa * (sx_sum + sy_sum))
            _acc_owned(tx, kappa * (sy_sum + sz_sum))
            if sector == "x":
                _acc_owned(delta, -kappa * (ggy + ggz))
            else:
                _acc_owned(delta, -kappa * (ggx + ggy))

    out.bwd = bwd
    return out


def tap_bce(px: Var, py: Var, pz: Var, tx: Var, tz: Var, graph, sx: np.ndarray,
            sz: np.ndarray, kappa: float, clamp: float) -> Var:
    """Fused loss tap: channel posterior -> per-qubit commutation LLRs ->
    per-check parity logits -> BCE against the syndrome bits, summed over the
    batch and the checks of both sectors."""
    from . import bp4

    Px = px.data + kappa * tz.data
    Py = py.data + kappa * (tx.data + tz.data)
    Pz = pz.data + kappa * tx.data
    raw_x = bp4._fast_msg(Px, Py, Pz)
    raw_z = bp4._fast_msg(Pz, Px, Py)
    lam_qx = np.clip(raw_x, -clamp, clamp)
    lam_qz = np.clip(raw_z, -clamp, clamp)

    saved = {}
    total = 0.0
    for name, sector, lam_q, target in (
        ("x", graph.x, lam_qx, sz), ("z", graph.z, lam_qz, sx)
    ):
        if sector.n_checks == 0:
            continue
        t = bp4._tanh_slots(sector, lam_q[..., sector.edge_var])
        pre, suf = bp4._exclusive_prods(t)
        raw_prod = t[..., 0] * suf[..., 0]
        prod = np.clip(raw_prod, -bp4._PMAX, bp4._PMAX)
        logit = 2.0 * np.arctanh(prod)
        tgt = target.astype(np.float64)
        total += float(
            (tgt * bp4._fast_softplus(logit) + (1.0 - tgt) * bp4._fast_softplus(-logit)).sum()
        )
        saved[name] = (sector, t, pre, suf, raw_prod, prod, logit, tgt)

    out = Var(np.float64(total), (px, py, pz, tx, tz))

    def bwd(g):
        gPx = np.zeros(Px.shape)
        gPy = np.zeros(Px.shape)
        gPz = np.zeros(Px.shape)
        for name, (sector, t, pre, suf, raw_prod, prod, logit, tgt) in saved.items():
            g_logit = g * (tgt * _sigmoid(logit) - (1.0 - tgt) * _sigmoid(-logit))
            inside = np.abs(raw_prod) < bp4._PMAX
            g_prod = g_logit * inside * 2.0 / (1.0 - prod * prod)
            g_t = g_prod[..., None] * pre * suf
            g_lam_pad = g_t * (0.5 * (1.0 - t * t)) * sector.pad_mask
            flat_g = g_lam_pad.reshape(g_lam_pad.shape[:-2] + (sector.pad_edge.size,))
            g_lam_e = flat_g[..., sector.pad_pos_of_edge]
            g_lam_q = sector.segment_sum(g_lam_e)
            if name == "x":
                raw, num, d1, d2 = raw_x, Px, Py, Pz
            else:
                raw, num, d1, d2 = raw_z, Pz, Px, Py
            gm = g_lam_q * (np.abs(raw) < clamp)
            gnum = gm * (-_sigmoid(-num))
            gd1 = gm * _sigmoid(d2 - d1)
            gd2 = gm * _sigmoid(d1 - d2)
            if name == "x":
                gPx += gnum
                gPy += gd1
                gPz += gd2
            else:
                gPz += gnum
                gPx += gd1
                gPy += gd2
        _acc(px, gPx)
        _acc(py, gPy)
        _acc(pz, gPz)
        _acc_owned(tz, kappa * (gPx + gPy))
        _acc_owned(tx, kappa * (gPy + gPz))

    out.bwd = bwd
    return out


# ------------------------------------------------- graph gather/scatter ops

def gather_var(a: Var, sg) -> Var:
    """(..., N) -> (..., E): copy each variable's value to its sector edges."""
    out = Var(a.data[..., sg.edge_var], (a,))

    def bwd(g):
        ordered = g[..., sg.var_edge]
        from .graph import _ragged_sum

        _acc(a, _ragged_sum(ordered, sg.var_ptr, sg.var_degree == 0))

    out.bwd = bwd
    return out


def gather_check(a: Var, sg) -> Var:
    """(..., C) -> (..., E): copy each check's value to its edges (check-major)."""
    out = Var(a.data[..., sg.edge_check], (a,))

    def bwd(g):
        from .graph import _ragged_sum

        _acc(a, _ragged_sum(g, sg.check_ptr, sg.check_degree == 0))

    out.bwd = bwd
    return out


def segment_sum(a: Var, sg, axis: int = -1) -> Var:
    """Per-variable sums over the edge axis: (..., E, ...) -> (..., N, ...)."""
    from .graph import _ragged_sum

    moved = np.moveaxis(a.data, axis, -1)
    ordered = moved[..., sg.var_edge]
    sums = _ragged_sum(ordered, sg.var_ptr, sg.var_degree == 0)
    out = Var(np.moveaxis(sums, -1, axis), (a,))

    def bwd(g):
        gm = np.moveaxis(g, axis, -1)
        g_pos = gm[..., sg.seg_of_pos]
        buf = np.empty_like(np.moveaxis(a.data, axis, -1))
        buf[..., sg.var_edge] = g_pos
        _acc(a, np.moveaxis(buf, -1, axis))

    out.bwd = bwd
    return out


def pad_by_check(a: Var, sg, pad_value: float) -> Var:
    """(..., E) check-major -> (..., C, D) padded with the boxplus identity."""
    safe = np.where(sg.pad_mask, sg.pad_edge, 0)
    data = np.where(sg.pad_mask, a.data[..., safe], pad_value)
    out = Var(data, (a,))

    def bwd(g):
        gm = np.where(sg.pad_mask, g, 0.0)
        flat = gm.reshape(gm.shape[:-2] + (sg.pad_edge.size,))
        _acc(a, flat[..., sg.pad_pos_of_edge])

    out.bwd = bwd
    return out


def unpad_by_check(a: Var, sg) -> Var:
    """(..., C, D) -> (..., E): read each real edge's slot."""
    flat = a.data.reshape(a.data.shape[:-2] + (sg.pad_edge.size,))
    out = Var(flat[..., sg.pad_pos_of_edge], (a,))

    def bwd(g):
        buf = np.zeros(a.data.shape[:-2] + (sg.pad_edge.size,), dtype=np.float64)
        buf[..., sg.pad_pos_of_edge] = g
        _acc(a, buf.reshape(a.data.shape))

    out.bwd = bwd
    return out


def slice_last(a: Var, k: int) -> Var:
    """a[..., k] keeping structure for padded scans."""
    return component(a, k)


# ------------------------------------------------------------- backward

def backward(loss: Var) -> None:
    """Reverse-accumulate gradients from a scalar loss."""
    topo: list[Var] = []
    seen: set[int] = set()
    stack: list[tuple[Var, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data, dtype=np.float64)
    for node in reversed(topo):
        if node.bwd is not None and node.grad is not None:
            node.bwd(node.grad)

"""End-to-end training of the feedback GNN through an unrolled BP block.

The forward pass is: fixed-prior BP block (no trainable parts, plain numpy)
-> GNN -> second BP block unrolled on the tape -> check-prediction loss.
The loss takes posterior snapshots from a window of late iterations of the
second block, collapses each to per-qubit commutation LLRs, forms each
check's parity logit with boxplus, and scores it against the observed
syndrome bit with binary cross-entropy.  Gradients flow through the second
block and the GNN only; the first block merely produces the GNN input.

Training always runs at float64 with kappa = 1.0; the evaluation decoder
runs at float32.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import autodiff as ad
from . import bp4, gnn
from .channel import (
    STREAM_CHANNEL,
    STREAM_TRAINING,
    ChannelConfig,
    sample_depolarizing_at,
    sample_depolarizing_batch,
    substream,
    syndrome as compute_syndrome,
    syndrome_batch,
)
from .css import CssCode, PauliError, Syndrome, logical_error_check
from .graph import JointGraph, as_graph


@dataclass
class TrainSample:
    error: PauliError
    syndrome: Syndrome
    weight: int


@dataclass
class Dataset:
    samples: list[TrainSample]
    stage: str  # "easy" (plain-BP failures) or "hard" (sandwich failures)
    code_hash: str
    p: float
    seed: int

    def __len__(self) -> int:
        return len(self.samples)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            n = self.samples[0].error.n if self.samples else 0
            fh.write(
                "FBGNN-DS v1 stage=%s code=%s p=%r seed=%d n=%d\n"
                % (self.stage, self.code_hash, self.p, self.seed, n)
            )
            for s in self.samples:
                ex = np.packbits(s.error.ex, bitorder="little").tobytes().hex()
                ez = np.packbits(s.error.ez, bitorder="little").tobytes().hex()
                fh.write("%s,%s\n" % (ex, ez))

    @classmethod
    def load(cls, path, code: CssCode) -> "Dataset":
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 7 or header[0] != "FBGNN-DS" or header[1] != "v1":
                raise ValueError("not a dataset file: %s" % path)
            meta = dict(tok.split("=", 1) for tok in header[2:])
            if meta["code"] != code.code_hash:
                raise ValueError(
                    "dataset was generated for code %s, got %s" % (meta["code"], code.code_hash)
                )
            n = int(meta["n"])
            if n != code.n:
                raise ValueError("dataset n=%d does not match code n=%d" % (n, code.n))
            samples = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                hex_ex, hex_ez = line.split(",")
                ex = np.unpackbits(
                    np.frombuffer(bytes.fromhex(hex_ex), dtype=np.uint8), count=n, bitorder="little"
                )
                ez = np.unpackbits(
                    np.frombuffer(bytes.fromhex(hex_ez), dtype=np.uint8), count=n, bitorder="little"
                )
                err = PauliError(ex, ez)
                samples.append(TrainSample(err, compute_syndrome(code, err), err.weight()))
        return cls(samples, meta["stage"], meta["code"], float(meta["p"]), int(meta["seed"]))


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 128
    steps: int = 5000
    bp_first: int = 16
    bp_second: int = 16
    tap_lo: int = 8
    tap_hi: int = 16
    kappa: float = 1.0  # every training BP run is unscaled
    clamp: float = bp4.DEFAULT_CLAMP
    prior_p: float = bp4.DEFAULT_PRIOR_P
    seed: int = 0
    model_count: int = 10
    anchor_init: bool = True  # start the output bias at the channel prior
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not (1 <= self.tap_lo <= self.tap_hi <= self.bp_second):
            raise ValueError("tap range must lie within the second BP block")
        if self.bp_first < 1 or self.steps < 1 or self.batch_size < 1:
            raise ValueError("bp_first, steps and batch_size must be positive")

    @property
    def taps(self) -> range:
        return range(self.tap_lo, self.tap_hi + 1)


@dataclass
class LossReport:
    entries: list[tuple[int, float, float]] = field(default_factory=list)  # step, loss, grad norm

    def losses(self) -> list[float]:
        return [e[1] for e in self.entries]

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("step,loss,grad_norm\n")
            for step, loss, gnorm in self.entries:
                fh.write("%d,%r,%r\n" % (step, loss, gnorm))


# ------------------------------------------------------------------ loss

def boxplus_loss(posterior_traces: Sequence[np.ndarray], syn: Syndrome, code_or_graph,
                 clamp: float = bp4.DEFAULT_CLAMP) -> float:
    """Mean BCE between predicted check-fire probabilities and the syndrome.

    For each snapshot and each check, the parity logit is the boxplus of the
    neighbors' commutation LLRs; the check fires with probability
    sigmoid(-logit), and the target is the observed syndrome bit.
    """
    if len(posterior_traces) == 0:
        raise ValueError("need at least one posterior snapshot")
    g = as_graph(code_or_graph)
    sz = np.asarray(syn.sz, dtype=np.float64)
    sx = np.asarray(syn.sx, dtype=np.float64)
    total = 0.0
    for post in posterior_traces:
        post = np.asarray(post, dtype=np.float64)
        lam_x = bp4.to_scalar_message(post, "x", clamp)
        lam_z = bp4.to_scalar_message(post, "z", clamp)
        pad = bp4._pad_identity(np.float64)
        logit_x = gnn._full_boxplus(g.x, lam_x[g.x.edge_var], pad) if g.x.n_checks else np.zeros(0)
        logit_z = gnn._full_boxplus(g.z, lam_z[g.z.edge_var], pad) if g.z.n_checks else np.zeros(0)
        bce_x = sz * np.logaddexp(0.0, logit_x) + (1.0 - sz) * np.logaddexp(0.0, -logit_x)
        bce_z = sx * np.logaddexp(0.0, logit_z) + (1.0 - sx) * np.logaddexp(0.0, -logit_z)
        total += bce_x.sum() + bce_z.sum()
    n_checks = g.x.n_checks + g.z.n_checks
    if n_checks == 0:
        raise ValueError("graph has no checks")
    return float(total / (len(posterior_traces) * n_checks))


# ---------------------------------------------------- first (frozen) block

def _bp_posterior_batch(g: JointGraph, priors: np.ndarray, sx: np.ndarray, sz: np.ndarray,
                        iters: int, kappa: float, clamp: float) -> np.ndarray:
    """Batched float64 flooding BP, no early stop; returns posteriors (B, N, 3)."""
    B = sx.shape[0]
    priors = np.broadcast_to(np.asarray(priors, dtype=np.float64), (B, g.n, 3))
    sign_x = (1.0 - 2.0 * sz).astype(np.float64)
    sign_z = (1.0 - 2.0 * sx).astype(np.float64)
    lam_x = np.clip(bp4._msg_x(priors[:, g.x.edge_var, :]), -clamp, clamp)
    lam_z = np.clip(bp4._msg_z(priors[:, g.z.edge_var, :]), -clamp, clamp)
    tx = np.zeros((B, g.n))
    tz = np.zeros((B, g.n))
    for _ in range(iters):
        dx = bp4._cn_extrinsic(g.x, lam_x, sign_x, clamp)
        dz = bp4._cn_extrinsic(g.z, lam_z, sign_z, clamp)
        tx = g.x.segment_sum(dx)
        tz = g.z.segment_sum(dz)
        lam_x, lam_z = bp4._vn_scalar_messages(g, priors, dx, dz, tx, tz, kappa, clamp)
    return bp4._posterior(priors, tx, tz, kappa)


# ------------------------------------------------------------- tape forward

def _weight_vars(weights: gnn.GnnWeights) -> list[ad.Var]:
    return [ad.Var(a.astype(np.float64)) for a in weights.arrays()]


def _tape_mlp(wvars: list[ad.Var], offset: int, x) -> ad.Var:
    w1, b1, w2, b2 = wvars[offset:offset + 4]
    hidden = ad.tanh(ad.affine(x, w1, b1))
    return ad.affine(hidden, w2, b2)


def _check_features_batch(g: JointGraph, lam_x: np.ndarray, lam_z: np.ndarray,
                          sx: np.ndarray, sz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pad = bp4._pad_identity(np.float64)
    sign_x = 1.0 - 2.0 * sz.astype(np.float64)
    sign_z = 1.0 - 2.0 * sx.astype(np.float64)
    h_cx = sign_x * gnn._full_boxplus(g.x, lam_x[:, g.x.edge_var], pad)
    h_cz = sign_z * gnn._full_boxplus(g.z, lam_z[:, g.z.edge_var], pad)
    return h_cx, h_cz


def _tape_gnn(g: JointGraph, wvars: list[ad.Var], lam_post: np.ndarray,
              sx: np.ndarray, sz: np.ndarray, clamp: float) -> ad.Var:
    """GNN forward on the tape; lam_post is a constant (B, N, 3) array."""
    lam_x = np.clip(bp4._msg_x(lam_post), -clamp, clamp)
    lam_z = np.clip(bp4._msg_z(lam_post), -clamp, clamp)
    h_cx, h_cz = _check_features_batch(g, lam_x, lam_z, sx, sz)

    out_parts = [lam_post]
    for sector, h_c, offset in ((g.x, h_cx, 0), (g.z, h_cz, 4)):
        if sector.n_edges == 0:
            out_parts.append(np.zeros((lam_post.shape[0], g.n, gnn.EDGE_OUT)))
            continue
        edge_in = np.concatenate(
            [h_c[:, sector.edge_check, None], lam_post[:, sector.edge_var, :]], axis=2
        )
        msgs = _tape_mlp(wvars, offset, edge_in)  # (B, E, 20)
        agg = ad.segment_sum(msgs, sector, axis=1)
        inv = np.zeros(sector.n_vars)
        nz = sector.var_degree > 0
        inv[nz] = 1.0 / sector.var_degree[nz]
        out_parts.append(ad.mul(agg, inv[None, :, None]))
    vn_in = ad.concat_last(out_parts)
    return _tape_mlp(wvars, 8, vn_in)  # (B, N, 3), unclamped


def _tape_check_logits(sector, lam_q: ad.Var) -> ad.Var:
    """Per-check parity logits from per-qubit commutation LLRs (B, N)."""
    return ad.parity_logits(ad.gather_var(lam_q, sector), sector)


def _tape_loss(g: JointGraph, wvars: list[ad.Var], lam_post: np.ndarray,
               sx: np.ndarray, sz: np.ndarray, cfg: TrainConfig) -> ad.Var:
    """Loss graph: GNN -> unrolled second BP block -> check-prediction BCE."""
    clamp = cfg.clamp
    kappa = cfg.kappa
    refined = _tape_gnn(g, wvars, lam_post, sx, sz, clamp)  # (B, N, 3)
    px, py, pz = (ad.component(refined, i) for i in range(3))

    sign_x = 1.0 - 2.0 * sz.astype(np.float64)
    sign_z = 1.0 - 2.0 * sx.astype(np.float64)

    lam_x = ad.vn_messages(px, py, pz, None, None, None, g.x, "x", kappa, clamp)
    lam_z = ad.vn_messages(px, py, pz, None, None, None, g.z, "z", kappa, clamp)

    taps = set(cfg.taps)
    bce_terms = []
    for it in range(1, cfg.bp_second + 1):
        dx = ad.cn_extrinsic(lam_x, g.x, sign_x, clamp)
        dz = ad.cn_extrinsic(lam_z, g.z, sign_z, clamp)
        tx = ad.segment_sum(dx, g.x)
        tz = ad.segment_sum(dz, g.z)
        lam_x = ad.vn_messages(px, py, pz, tx, tz, dx, g.x, "x", kappa, clamp)
        lam_z = ad.vn_messages(px, py, pz, tx, tz, dz, g.z, "z", kappa, clamp)
        if it in taps:
            bce_terms.append(ad.tap_bce(px, py, pz, tx, tz, g, sx, sz, kappa, clamp))

    total = bce_terms[0]
    for term in bce_terms[1:]:
        total = ad.add(total, term)
    batch = lam_post.shape[0]
    denom = batch * len(taps) * (g.x.n_checks + g.z.n_checks)
    return ad.scale(total, 1.0 / denom)


def _batch_loss(code_or_graph, weights: gnn.GnnWeights, samples: Sequence[TrainSample],
                cfg: TrainConfig, want_grad: bool = True,
                lam_post: Optional[np.ndarray] = None):
    """Mean loss over a batch, and (optionally) its gradient in flat float64 form."""
    g = as_graph(code_or_graph)
    sx = np.stack([s.syndrome.sx for s in samples])
    sz = np.stack([s.syndrome.sz for s in samples])
    if lam_post is None:
        priors = bp4.init_priors(g.n, cfg.prior_p, dtype=np.float64)
        lam_post = _bp_posterior_batch(g, priors, sx, sz, cfg.bp_first, cfg.kappa, cfg.clamp)
    wvars = _weight_vars(weights)
    loss = _tape_loss(g, wvars, lam_post, sx, sz, cfg)
    if not np.isfinite(loss.data):
        raise FloatingPointError("non-finite training loss")
    if not want_grad:
        return float(loss.data), None
    ad.backward(loss)
    grads = np.concatenate(
        [
            (v.grad if v.grad is not None else np.zeros(v.data.shape)).ravel()
            for v in wvars
        ]
    )
    return float(loss.data), grads


def eval_loss(code_or_graph, weights: gnn.GnnWeights, sample: TrainSample,
              cfg: TrainConfig) -> float:
    """Forward-only replay of the training pipeline for one sample."""
    loss, _ = _batch_loss(code_or_graph, weights, [sample], cfg, want_grad=False)
    return loss


def loss_and_grad(code_or_graph, weights: gnn.GnnWeights, sample: TrainSample,
                  cfg: TrainConfig) -> tuple[float, gnn.GnnWeights]:
    """Loss and exact gradient (as a GnnWeights-shaped container) for one sample."""
    loss, grads = _batch_loss(code_or_graph, weights, [sample], cfg)
    return loss, gnn.GnnWeights.from_flat(grads, dtype=np.float64)


# ------------------------------------------------------------ optimization

class _Adam:
    def __init__(self, size: int, lr: float, beta1: float, beta2: float, eps: float):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps

    def step(self, w: np.ndarray, g: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g
        mhat = self.m / (1.0 - self.beta1 ** self.t)
        vhat = self.v / (1.0 - self.beta2 ** self.t)
        return w - self.lr * mhat / (np.sqrt(vhat) + self.eps)


def train(code: CssCode, dataset: Dataset, cfg: TrainConfig,
          hard_dataset: Optional[Dataset] = None,
          init: Optional[gnn.GnnWeights] = None) -> tuple[gnn.GnnWeights, LossReport]:
    """Minibatch Adam on the unrolled-decoder loss; deterministic given cfg.seed.

    With a hard dataset, each batch slot draws from either dataset with equal
    probability (occurrence balancing).
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if hard_dataset is not None and len(hard_dataset) == 0:
        raise ValueError("empty hard dataset")
    g = code.graph
    rng = substream(cfg.seed, STREAM_TRAINING, 0)
    if init is not None:
        weights = init
    else:
        weights = gnn.init_weights(rng)
        if cfg.anchor_init:
            # start as an identity-ish map: the refined priors open at the
            # channel prior, so the sandwich initially behaves like plain BP
            # and training learns perturbations around it; a zero-output
            # start instead falls into a basin that satisfies the syndrome
            # by overwhelming the priors (wrong-coset corrections)
            weights.f_vn.b2 = weights.f_vn.b2 + np.float32(
                np.log((1.0 - cfg.prior_p) / (cfg.prior_p / 3.0))
            )
    caches = [_posterior_cache(g, dataset, cfg)]
    pools = [dataset.samples]
    if hard_dataset is not None:
        caches.append(_posterior_cache(g, hard_dataset, cfg))
        pools.append(hard_dataset.samples)
    flat = weights.flatten().astype(np.float64)
    opt = _Adam(flat.size, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    report = LossReport()
    for step in range(cfg.steps):
        if hard_dataset is not None:
            which = (rng.random(cfg.batch_size) < 0.5).astype(np.int64)
        else:
            which = np.zeros(cfg.batch_size, dtype=np.int64)
        idx = np.stack(
            [rng.integers(0, len(pool), size=cfg.batch_size) for pool in pools]
        ) if hard_dataset is not None else rng.integers(0, len(pools[0]), size=cfg.batch_size)[None]
        rows = idx[which, np.arange(cfg.batch_size)]
        batch = [pools[w][r] for w, r in zip(which, rows)]
        lam_post = np.stack([caches[w][r] for w, r in zip(which, rows)])
        w64 = gnn.GnnWeights.from_flat(flat, dtype=np.float64)
        try:
            loss, grads = _batch_loss(g, w64, batch, cfg, lam_post=lam_post)
        except FloatingPointError as exc:
            raise RuntimeError("training diverged at step %d: %s" % (step, exc)) from exc
        flat = opt.step(flat, grads)
        report.entries.append((step, loss, float(np.linalg.norm(grads))))
    return gnn.GnnWeights.from_flat(flat, dtype=np.float32), report


def _posterior_cache(g: JointGraph, dataset: Dataset, cfg: TrainConfig) -> np.ndarray:
    """First-block posteriors for every sample; the first block has no trainable
    parts, so this is computed once per training run."""
    priors = bp4.init_priors(g.n, cfg.prior_p, dtype=np.float64)
    cache = np.empty((len(dataset), g.n, 3))
    chunk = 1024
    for a in range(0, len(dataset), chunk):
        part = dataset.samples[a:a + chunk]
        sx = np.stack([s.syndrome.sx for s in part])
        sz = np.stack([s.syndrome.sz for s in part])
        cache[a:a + len(part)] = _bp_posterior_batch(
            g, priors, sx, sz, cfg.bp_first, cfg.kappa, cfg.clamp
        )
    return cache


def _train_model_task(args):
    code, dataset, cfg, hard = args
    weights, _ = train(code, dataset, cfg, hard_dataset=hard)
    return weights


def train_models(code: CssCode, dataset: Dataset, cfg: TrainConfig,
                 hard_dataset: Optional[Dataset] = None,
                 workers: int = 1) -> list[gnn.GnnWeights]:
    """cfg.model_count independent trainings with seeds cfg.seed, cfg.seed+1, ...;
    results are per-seed deterministic regardless of the worker count."""
    from dataclasses import replace
    from multiprocessing import get_context

    tasks = [
        (code, dataset, replace(cfg, seed=cfg.seed + m), hard_dataset)
        for m in range(cfg.model_count)
    ]
    if workers <= 1 or len(tasks) == 1:
        return [_train_model_task(t) for t in tasks]
    with get_context("fork").Pool(min(workers, len(tasks))) as pool:
        return pool.map(_train_model_task, tasks)


def select_best(models: Sequence[gnn.GnnWeights], validation: Dataset, code: CssCode,
                schedule=None) -> gnn.GnnWeights:
    """Model with the lowest failure rate (flagged or logical) under the
    sandwich decoder on the validation set; ties break to the lower index."""
    from .sim import Schedule, sandwich_decode

    if len(models) == 0:
        raise ValueError("need at least one model")
    if len(validation) == 0:
        raise ValueError("empty validation set")
    if schedule is None:
        schedule = Schedule((64, 16, 16, 16), (1.0, 1.0, 1.0, 1.0))
    best_idx, best_fails = 0, None
    for i, w in enumerate(models):
        fails = 0
        for s in validation.samples:
            out = sandwich_decode(code, s.syndrome, w, schedule)
            if not out.converged or not logical_error_check(code, s.error, out.e_hat):
                fails += 1
        if best_fails is None or fails < best_fails:
            best_idx, best_fails = i, fails
    return models[best_idx]


# ------------------------------------------------------- dataset generation

def _decode_fails(code: CssCode, err: PauliError, syn: Syndrome, decode) -> bool:
    out = decode(syn)
    return (not out.converged) or (not logical_error_check(code, err, out.e_hat))


def _make_decoder(code: CssCode, spec: tuple):
    """Rebuild a decode closure from a picklable description (for worker pools)."""
    if spec[0] == "bp":
        _, iters, prior_p, backend = spec
        bp_cfg = bp4.BpConfig(iters, kappa=1.0, early_stop=True, backend=backend)
        priors = bp4.init_priors(code.n, prior_p, dtype=np.float32)
        return lambda s: bp4.run(code, s, priors, bp_cfg)
    from .sim import Schedule, sandwich_decode

    _, blocks, kappas, weights, prior_p, backend = spec
    schedule = Schedule(blocks, kappas)
    return lambda s: sandwich_decode(code, s, weights, schedule, prior_p=prior_p,
                                     backend=backend)


_GEN_STATE: dict = {}


def _gen_pool_init(code, spec, p, seed, weight_limit):
    _GEN_STATE["args"] = (code, _make_decoder(code, spec), ChannelConfig(p, seed), seed,
                          weight_limit)


def _failures_in_range(code: CssCode, decode, cfg: ChannelConfig, seed: int,
                       weight_limit: Optional[int], start: int, count: int) -> list[int]:
    exs, ezs = sample_depolarizing_batch(code.n, cfg, seed, STREAM_CHANNEL, start, count)
    wt = (exs | ezs).sum(axis=1)
    keep = wt > 0
    if weight_limit is not None:
        keep &= wt <= weight_limit
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return []
    sxs, szs = syndrome_batch(code, exs[idx], ezs[idx])
    found = []
    for row, i in enumerate(idx):
        err = PauliError._trusted(exs[i], ezs[i])
        syn = Syndrome._trusted(sxs[row], szs[row])
        if _decode_fails(code, err, syn, decode):
            found.append(start + int(i))
    return found


def _gen_pool_task(task):
    start, count = task
    code, decode, cfg, seed, weight_limit = _GEN_STATE["args"]
    return _failures_in_range(code, decode, cfg, seed, weight_limit, start, count)


def _collect_failures(code: CssCode, p: float, target_count: int, seed: int, spec: tuple,
                      max_trials: int, weight_limit: Optional[int],
                      workers: int = 1) -> list[TrainSample]:
    """Sample the channel in fixed batches (any worker count gives the same
    result) and keep the errors the decoder cannot fix, in trial order."""
    from multiprocessing import get_context

    cfg = ChannelConfig(p, seed)
    batch = 2048
    n_batches = -(-max_trials // batch)
    sizes = [min(batch, max_trials - b * batch) for b in range(n_batches)]
    found: list[int] = []
    pool = None
    try:
        if workers > 1:
            pool = get_context("fork").Pool(
                workers, initializer=_gen_pool_init,
                initargs=(code, spec, p, seed, weight_limit),
            )
        else:
            decode = _make_decoder(code, spec)
        b = 0
        while b < n_batches and len(found) < target_count:
            chunk = range(b, min(b + max(workers, 1) * 4, n_batches))
            tasks = [(i * batch, sizes[i]) for i in chunk]
            if pool is not None:
                results = pool.map(_gen_pool_task, tasks)
            else:
                results = [
                    _failures_in_range(code, decode, cfg, seed, weight_limit, *t) for t in tasks
                ]
            for r in results:
                found.extend(r)
            b = chunk.stop
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    found = found[:target_count]
    if not found:
        return []
    exs, ezs = sample_depolarizing_at(code.n, cfg, seed, STREAM_CHANNEL, np.array(found))
    sxs, szs = syndrome_batch(code, exs, ezs)
    return [
        TrainSample(
            PauliError._trusted(exs[i], ezs[i]),
            Syndrome._trusted(sxs[i], szs[i]),
            int((exs[i] | ezs[i]).sum()),
        )
        for i in range(len(found))
    ]


def gen_dataset_stage1(code: CssCode, p: float, target_count: int, seed: int,
                       bp_iters: int = 64, max_trials: Optional[int] = None,
                       prior_p: float = bp4.DEFAULT_PRIOR_P,
                       backend: str = "auto", workers: int = 1) -> Dataset:
    """Collect channel errors that defeat plain flooding BP.

    Keeps errors whose support weight is at most 0.05*n and for which the
    64-iteration decoder is flagged or logically wrong; runs until
    target_count samples are stored or the trial budget is exhausted.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("channel p must lie in (0, 1)")
    if max_trials is None:
        max_trials = 20_000 * target_count
    limit = code.n // 20  # weight <= 0.05*n, exact in integers
    spec = ("bp", bp_iters, prior_p, backend)
    samples = _collect_failures(code, p, target_count, seed, spec, max_trials, limit, workers)
    if not samples:
        raise RuntimeError("no decoder failures found; code/p combination too easy")
    return Dataset(samples, "easy", code.code_hash, p, seed)


def gen_dataset_stage3(code: CssCode, weights: gnn.GnnWeights, p: float, target_count: int,
                       seed: int, bp_iters: int = 64, max_trials: Optional[int] = None,
                       prior_p: float = bp4.DEFAULT_PRIOR_P,
                       backend: str = "auto", workers: int = 1) -> Dataset:
    """Collect errors that still defeat the (bp_iters, GNN, bp_iters) pipeline."""
    if not np.any(weights.flatten()):
        raise ValueError("refusing to generate a hard dataset from untrained (zero) weights")
    if max_trials is None:
        max_trials = 100_000 * target_count
    spec = ("sandwich", (bp_iters, bp_iters), (1.0, 1.0), weights, prior_p, backend)
    samples = _collect_failures(code, p, target_count, seed, spec, max_trials, None, workers)
    if not samples:
        raise RuntimeError("no pipeline failures found; code/p combination too easy")
    return Dataset(samples, "hard", code.code_hash, p, seed)

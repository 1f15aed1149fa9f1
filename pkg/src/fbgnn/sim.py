"""Monte-Carlo harness: sandwich decoding, trial loops, and the results CSV.

Per-trial randomness is keyed by (seed, stream, trial index), so tallies are
bit-identical for any worker count; trials are processed in fixed batches and
the stop rule is evaluated at batch boundaries only.  A flagged outcome is
always counted as a logical error (conservative accounting).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Optional

import numpy as np

from . import baselines, bp4, gnn
from .channel import ChannelConfig, sample_depolarizing_batch, substream, syndrome_batch
from .css import CssCode, PauliError, Syndrome, logical_error_check
from .stats import wilson_ci

TRIAL_BATCH = 256
DECODERS = ("bp", "bp-pert", "bp-enh", "bp-gnn")


@dataclass(frozen=True)
class Schedule:
    """BP block lengths and per-block normalization factors, e.g. (64,16,16,16)
    with kappas (0.8,1,1,1); every block after the first is preceded by one
    GNN application."""

    blocks: tuple[int, ...]
    kappas: tuple[float, ...]

    def __post_init__(self):
        if len(self.blocks) < 1:
            raise ValueError("schedule needs at least one block")
        if len(self.kappas) != len(self.blocks):
            raise ValueError("need one kappa per block")
        if any(b < 1 for b in self.blocks):
            raise ValueError("block lengths must be positive")
        if any(not k > 0 for k in self.kappas):
            raise ValueError("kappas must be positive")

    @classmethod
    def parse(cls, blocks_text: str, kappas_text: Optional[str] = None) -> "Schedule":
        try:
            blocks = tuple(int(tok) for tok in blocks_text.split(","))
        except ValueError:
            raise ValueError("bad schedule %r" % blocks_text) from None
        if kappas_text is None:
            kappas = (1.0,) * len(blocks)
        else:
            try:
                kappas = tuple(float(tok) for tok in kappas_text.split(","))
            except ValueError:
                raise ValueError("bad kappa list %r" % kappas_text) from None
        return cls(blocks, kappas)

    def __str__(self):
        return ",".join(str(b) for b in self.blocks)

    def kappa_str(self) -> str:
        return ",".join("%g" % k for k in self.kappas)


def sandwich_decode(code_or_graph, syn, weights: Optional[gnn.GnnWeights], schedule: Schedule,
                    prior_p: float = bp4.DEFAULT_PRIOR_P, clamp: float = bp4.DEFAULT_CLAMP,
                    backend: str = "auto", dtype=np.float32) -> bp4.BpOutcome:
    """Alternate BP blocks with GNN feedback until the syndrome is reproduced.

    Block 0 starts from the fixed depolarizing priors.  After a flagged block,
    the GNN maps the block's posterior (plus the syndrome) to refined priors
    and the next block restarts with re-initialized messages; the same weights
    are used for every feedback round.  Returns the first converged outcome,
    otherwise the last (flagged) one.
    """
    from .graph import as_graph

    g = as_graph(code_or_graph)
    if len(schedule.blocks) > 1 and weights is None:
        raise ValueError("multi-block schedule requires GNN weights")
    priors = bp4.init_priors(g.n, prior_p, dtype=dtype)
    total_iters = 0
    out = None
    for b, (iters, kappa) in enumerate(zip(schedule.blocks, schedule.kappas)):
        if b > 0:
            priors = gnn.gnn_forward(g, weights, out.posterior, syn, clamp).astype(dtype)
        cfg = bp4.BpConfig(iters, kappa=kappa, clamp=clamp, early_stop=True,
                           dtype=dtype, backend=backend)
        out = bp4.run(g, syn, priors, cfg)
        total_iters += out.iterations_used
        if out.converged:
            break
    return bp4.BpOutcome(out.e_hat, out.converged, out.posterior, total_iters,
                         out.posterior_trace)


@dataclass
class SimConfig:
    decoder: str
    schedule: Schedule
    p_values: tuple[float, ...]
    target_errors: int = 100
    max_trials: int = 1_000_000
    seed: int = 0
    workers: int = 1
    prior_p: float = bp4.DEFAULT_PRIOR_P
    clamp: float = bp4.DEFAULT_CLAMP
    backend: str = "auto"
    baseline: baselines.BaselineConfig = field(default_factory=baselines.BaselineConfig)

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError("unknown decoder %r (choose from %s)" % (self.decoder, ", ".join(DECODERS)))
        if self.target_errors < 1 or self.max_trials < 1:
            raise ValueError("stop rule must be positive")
        if any(not 0.0 <= p < 1.0 for p in self.p_values):
            raise ValueError("p values must lie in [0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.decoder == "bp" and len(self.schedule.blocks) != 1:
            raise ValueError("decoder 'bp' takes a single-block schedule")


@dataclass
class SimPoint:
    p: float
    trials: int
    flagged: int
    logical_errors: int
    wall_s: float

    @property
    def ler(self) -> float:
        return self.logical_errors / self.trials if self.trials else 0.0

    def ci(self) -> tuple[float, float]:
        return wilson_ci(self.logical_errors, self.trials)


@dataclass
class SimResult:
    decoder: str
    schedule: Schedule
    seed: int
    points: list[SimPoint]

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(csv_header())
            for pt in self.points:
                fh.write(self.csv_row(pt))

    def csv_row(self, pt: SimPoint) -> str:
        import csv as _csv
        import io

        lo, hi = pt.ci()
        buf = io.StringIO()
        _csv.writer(buf, lineterminator="\n").writerow(
            [
                self.decoder, str(self.schedule), self.schedule.kappa_str(),
                repr(float(pt.p)), pt.trials, pt.flagged, pt.logical_errors,
                repr(float(pt.ler)), repr(float(lo)), repr(float(hi)),
                self.seed, "%.3f" % pt.wall_s,
            ]
        )
        return buf.getvalue()


def csv_header() -> str:
    return "decoder,schedule,kappa,p,trials,flagged,logical_errors,ler,ci_low,ci_high,seed,wall_s\n"


def _decode_one(code: CssCode, syn, cfg: SimConfig, weights, make_rng) -> bp4.BpOutcome:
    if cfg.decoder == "bp-gnn":
        return sandwich_decode(code, syn, weights, cfg.schedule, cfg.prior_p, cfg.clamp,
                               cfg.backend)
    bp_cfg = bp4.BpConfig(cfg.schedule.blocks[0], kappa=cfg.schedule.kappas[0],
                          clamp=cfg.clamp, early_stop=True, backend=cfg.backend)
    priors = bp4.init_priors(code.n, cfg.prior_p, dtype=np.float32)
    if cfg.decoder == "bp":
        return bp4.run(code, syn, priors, bp_cfg)
    base_cfg = baselines.BaselineConfig(
        max_attempts=cfg.baseline.max_attempts,
        perturb_strength=cfg.baseline.perturb_strength,
        enhanced_mass=cfg.baseline.enhanced_mass,
        prior_p=cfg.prior_p,
    )
    if cfg.decoder == "bp-pert":
        return baselines.random_perturbation_decode(code, syn, base_cfg, bp_cfg, make_rng())
    return baselines.enhanced_feedback_decode(code, syn, base_cfg, bp_cfg, make_rng())


def run_trial_batch(code: CssCode, cfg: SimConfig, weights, p_idx: int, start: int,
                    count: int) -> tuple[int, int]:
    """Decode trials [start, start+count); returns (flagged, logical_errors)."""
    p = cfg.p_values[p_idx]
    channel = ChannelConfig(p, cfg.seed)
    exs, ezs = sample_depolarizing_batch(code.n, channel, cfg.seed, 2 * p_idx, start, count)
    sxs, szs = syndrome_batch(code, exs, ezs)
    flagged = 0
    logical = 0
    for i in range(count):
        err = PauliError._trusted(exs[i], ezs[i])
        syn = Syndrome._trusted(sxs[i], szs[i])
        make_rng = lambda: substream(cfg.seed, 2 * p_idx + 1, start + i)  # noqa: B023
        out = _decode_one(code, syn, cfg, weights, make_rng)
        if not out.converged:
            flagged += 1
            logical += 1  # flagged outcomes never get logical-equivalence credit
        elif not logical_error_check(code, err, out.e_hat):
            logical += 1
    return flagged, logical


_WORKER: dict = {}


def _pool_init(code, cfg, weights):
    _WORKER["args"] = (code, cfg, weights)


def _pool_task(task):
    p_idx, start, count = task
    code, cfg, weights = _WORKER["args"]
    return run_trial_batch(code, cfg, weights, p_idx, start, count)


def monte_carlo(code: CssCode, cfg: SimConfig,
                weights: Optional[gnn.GnnWeights] = None) -> SimResult:
    """Per-p trial loop with a stop-at-target-errors rule.

    Trials are consumed in fixed batches; the stop rule is applied after each
    batch in order, so the tallies do not depend on the worker count.
    """
    if cfg.decoder == "bp-gnn" and weights is None:
        raise ValueError("decoder 'bp-gnn' requires weights")
    points = []
    pool = None
    ctx = get_context("fork")
    try:
        if cfg.workers > 1:
            pool = ctx.Pool(cfg.workers, initializer=_pool_init, initargs=(code, cfg, weights))
        for p_idx in range(len(cfg.p_values)):
            t0 = time.perf_counter()
            n_batches = math.ceil(cfg.max_trials / TRIAL_BATCH)
            sizes = [
                min(TRIAL_BATCH, cfg.max_trials - b * TRIAL_BATCH) for b in range(n_batches)
            ]
            flagged = logical = trials = 0
            batch = 0
            while batch < n_batches:
                chunk = range(batch, min(batch + max(cfg.workers, 1) * 4, n_batches))
                tasks = [(p_idx, b * TRIAL_BATCH, sizes[b]) for b in chunk]
                if pool is not None:
                    results = pool.map(_pool_task, tasks)
                else:
                    results = [run_trial_batch(code, cfg, weights, *t) for t in tasks]
                done = False
                for (f, l), t in zip(results, tasks):
                    flagged += f
                    logical += l
                    trials += t[2]
                    if logical >= cfg.target_errors:
                        done = True
                        break
                batch = chunk.stop
                if done:
                    break
            points.append(SimPoint(cfg.p_values[p_idx], trials, flagged, logical,
                                   time.perf_counter() - t0))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return SimResult(cfg.decoder, cfg.schedule, cfg.seed, points)

"""Depolarizing channel sampling and syndrome extraction.

Randomness is counter-based: every trial owns a substream keyed by
(master seed, stream id, trial index), so results are bit-identical no
matter how trials are batched or spread across workers.  Channel uniforms
come from a vectorized Philox-4x32-10 implementation, which makes sampling
a whole batch of trials one numpy pass; `substream` wraps numpy's Philox
for consumers that need a full Generator (decoder retries, training).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .css import CssCode, PauliError, Syndrome

# stream ids partition the key space between independent consumers
STREAM_CHANNEL = 0
STREAM_DECODER = 1
STREAM_TRAINING = 2

_M64 = (1 << 64) - 1


@dataclass
class ChannelConfig:
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("physical error rate must lie in [0, 1]")


def substream(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Independent numpy Generator keyed by (seed, stream); the trial index
    selects a disjoint 2^64-block window of the Philox counter space."""
    key = np.array([seed & _M64, stream & _M64], dtype=np.uint64)
    counter = np.array([0, trial & _M64, (trial >> 64) & _M64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _philox_uniforms(seed: int, stream: int, trials: np.ndarray, n: int) -> np.ndarray:
    """(len(trials), n) uniforms in [0,1); Philox-4x32-10 keyed per trial.

    Counter words are (trial_lo, trial_hi, block, 0); the key is a splitmix64
    hash of (seed, stream).  32-bit output resolution.
    """
    blocks = (n + 3) // 4
    t = np.asarray(trials, dtype=np.uint64)[:, None]
    block = np.arange(blocks, dtype=np.uint32)[None, :]
    c0 = np.broadcast_to(t.astype(np.uint32), (t.shape[0], blocks)).copy()
    c1 = np.broadcast_to((t >> np.uint64(32)).astype(np.uint32), c0.shape).copy()
    c2 = np.broadcast_to(block, c0.shape).copy()
    c3 = np.full_like(c0, 0x46424731)  # constant domain tag
    keyhash = _splitmix64(((seed & _M64) << 1) ^ _splitmix64(stream & _M64))
    k0 = np.full_like(c0, keyhash & 0xFFFFFFFF)
    k1 = np.full_like(c0, (keyhash >> 32) & 0xFFFFFFFF)

    M0 = np.uint64(0xD2511F53)
    M1 = np.uint64(0xCD9E8D57)
    W0 = np.uint32(0x9E3779B9)
    W1 = np.uint32(0xBB67AE85)
    for _ in range(10):
        p0 = M0 * c0.astype(np.uint64)
        p1 = M1 * c2.astype(np.uint64)
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = k0 + W0
        k1 = k1 + W1
    words = np.stack([c0, c1, c2, c3], axis=2).reshape(t.shape[0], blocks * 4)[:, :n]
    return words.astype(np.float64) * 2.0 ** -32


class TrialStream:
    """Per-trial counter-based uniform source (matches the batch sampler bit
    for bit); grows a block cursor so repeated draws do not overlap."""

    __slots__ = ("seed", "stream", "trial", "_cursor")

    def __init__(self, seed: int, stream: int, trial: int):
        self.seed = seed
        self.stream = stream
        self.trial = trial
        self._cursor = 0

    def random(self, n: int) -> np.ndarray:
        u = _philox_uniforms(self.seed, self.stream, np.array([self.trial]),
                             self._cursor * 4 + n)[0, self._cursor * 4:]
        self._cursor += (n + 3) // 4
        return u


class Rng:
    """Per-trial substream factory for one (seed, stream) pair."""

    __slots__ = ("seed", "stream")

    def __init__(self, seed: int, stream: int = STREAM_CHANNEL):
        self.seed = seed
        self.stream = stream

    def trial(self, index: int) -> TrialStream:
        return TrialStream(self.seed, self.stream, index)


def _categories(u: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    third = p / 3.0
    x = u < third
    y = (u >= third) & (u < 2.0 * third)
    z = (u >= 2.0 * third) & (u < p)
    return (x | y).astype(np.uint8), (y | z).astype(np.uint8)


def sample_depolarizing(n: int, cfg: ChannelConfig, rng) -> PauliError:
    """i.i.d. depolarizing error: each qubit is X, Y, or Z with probability p/3.

    One uniform draw per qubit, mapped to the four categories exactly; rng is
    anything with .random(n) (a TrialStream or a numpy Generator).
    """
    ex, ez = _categories(rng.random(n), cfg.p)
    return PauliError(ex, ez)


def sample_depolarizing_batch(n: int, cfg: ChannelConfig, seed: int, stream: int,
                              start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Errors for trials [start, start+count) in one pass; rows are bit-identical
    to per-trial sample_depolarizing with the matching TrialStream."""
    trials = np.arange(start, start + count, dtype=np.uint64)
    return sample_depolarizing_at(n, cfg, seed, stream, trials)


def sample_depolarizing_at(n: int, cfg: ChannelConfig, seed: int, stream: int,
                           trials: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Errors for an arbitrary list of trial indices."""
    u = _philox_uniforms(seed, stream, np.asarray(trials, dtype=np.uint64), n)
    return _categories(u, cfg.p)


def syndrome(code: CssCode, e: PauliError) -> Syndrome:
    """sx = hz @ ex, sz = hx @ ez over GF(2)."""
    if e.n != code.n:
        raise ValueError("error length %d does not match code n=%d" % (e.n, code.n))
    sx, sz = syndrome_batch(code, e.ex[None, :], e.ez[None, :])
    return Syndrome(sx[0], sz[0])


def syndrome_batch(code: CssCode, ex: np.ndarray, ez: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise syndromes of (B, n) error components."""
    sx = (ex.astype(np.int32) @ code.hz_t32) & 1
    sz = (ez.astype(np.int32) @ code.hx_t32) & 1
    return sx.astype(np.uint8), sz.astype(np.uint8)

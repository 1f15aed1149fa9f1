import numpy as np
import pytest

from fbgnn import channel
from fbgnn.channel import ChannelConfig, Rng, sample_depolarizing, syndrome
from fbgnn.css import PauliError


def test_p_zero_gives_identity():
    err = sample_depolarizing(50, ChannelConfig(0.0, 1), Rng(1).trial(0))
    assert err.weight() == 0


def test_p_one_category_balance():
    # at p=1 the three Pauli types are exactly equally likely
    n = 300_000
    err = sample_depolarizing(n, ChannelConfig(1.0, 2), Rng(2).trial(0))
    n_y = int((err.ex & err.ez).sum())
    n_x = int(err.ex.sum()) - n_y
    n_z = int(err.ez.sum()) - n_y
    assert n_x + n_y + n_z == n
    sigma = np.sqrt(n * (1 / 3) * (2 / 3))
    for count in (n_x, n_y, n_z):
        assert abs(count - n / 3) < 3 * sigma


def test_same_trial_same_error():
    cfg = ChannelConfig(0.3, 7)
    a = sample_depolarizing(64, cfg, Rng(7).trial(5))
    b = sample_depolarizing(64, cfg, Rng(7).trial(5))
    assert a == b


def test_different_trials_differ():
    cfg = ChannelConfig(0.3, 7)
    a = sample_depolarizing(64, cfg, Rng(7).trial(5))
    b = sample_depolarizing(64, cfg, Rng(7).trial(6))
    assert a != b


def test_batch_matches_per_trial():
    cfg = ChannelConfig(0.11, 3)
    exs, ezs = channel.sample_depolarizing_batch(33, cfg, 3, 0, 10, 20)
    for i, trial in enumerate(range(10, 30)):
        single = sample_depolarizing(33, cfg, Rng(3).trial(trial))
        assert np.array_equal(exs[i], single.ex)
        assert np.array_equal(ezs[i], single.ez)


def test_marginal_rate():
    n, p = 200_000, 0.08
    err = sample_depolarizing(n, ChannelConfig(p, 11), Rng(11).trial(0))
    rate = (err.ex | err.ez).mean()
    sigma = np.sqrt(p * (1 - p) / n)
    assert abs(rate - p) < 4 * sigma


def test_philox_against_reference_implementation():
    # independent scalar reimplementation of the counter-based generator
    def scalar_philox(seed, stream, trial, n):
        def splitmix64(x):
            mask = (1 << 64) - 1
            x = (x + 0x9E3779B97F4A7C15) & mask
            x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & mask
            x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & mask
            return x ^ (x >> 31)

        key = splitmix64(((seed & ((1 << 64) - 1)) << 1) ^ splitmix64(stream))
        out = []
        for block in range((n + 3) // 4):
            c = [trial & 0xFFFFFFFF, (trial >> 32) & 0xFFFFFFFF, block, 0x46424731]
            k = [key & 0xFFFFFFFF, (key >> 32) & 0xFFFFFFFF]
            for _ in range(10):
                p0 = 0xD2511F53 * c[0]
                p1 = 0xCD9E8D57 * c[2]
                c = [
                    ((p1 >> 32) ^ c[1] ^ k[0]) & 0xFFFFFFFF,
                    p1 & 0xFFFFFFFF,
                    ((p0 >> 32) ^ c[3] ^ k[1]) & 0xFFFFFFFF,
                    p0 & 0xFFFFFFFF,
                ]
                k = [(k[0] + 0x9E3779B9) & 0xFFFFFFFF, (k[1] + 0xBB67AE85) & 0xFFFFFFFF]
            out.extend(c)
        return np.array(out[:n], dtype=np.float64) * 2.0 ** -32

    got = channel._philox_uniforms(42, 1, np.array([9]), 10)[0]
    want = scalar_philox(42, 1, 9, 10)
    assert np.array_equal(got, want)


def test_uniforms_moments():
    u = channel._philox_uniforms(5, 0, np.arange(2000), 32).ravel()
    assert abs(u.mean() - 0.5) < 0.01
    assert abs(u.var() - 1 / 12) < 0.01
    assert u.min() >= 0.0 and u.max() < 1.0


def test_invalid_p_rejected():
    with pytest.raises(ValueError):
        ChannelConfig(1.5, 0)


def test_syndrome_definition(steane):
    # single X on qubit 0 fires exactly the Z-type checks containing qubit 0
    e = PauliError.identity(7)
    e.ex[0] = 1
    s = syndrome(steane, e)
    assert s.sx.tolist() == steane.hz[:, 0].tolist()
    assert not s.sz.any()


def test_syndrome_y_fires_both(steane):
    e = PauliError.identity(7)
    e.ex[0] = 1
    e.ez[0] = 1
    s = syndrome(steane, e)
    assert s.sx.tolist() == steane.hz[:, 0].tolist()
    assert s.sz.tolist() == steane.hx[:, 0].tolist()


def test_syndrome_zero_error(steane):
    s = syndrome(steane, PauliError.identity(7))
    assert not s.any()


def test_syndrome_linearity(hgp_small):
    rng = np.random.default_rng(21)
    n = hgp_small.n
    for _ in range(20):
        e = PauliError(rng.integers(0, 2, n), rng.integers(0, 2, n))
        f = PauliError(rng.integers(0, 2, n), rng.integers(0, 2, n))
        ef = PauliError(e.ex ^ f.ex, e.ez ^ f.ez)
        se, sf, sef = (syndrome(hgp_small, x) for x in (e, f, ef))
        assert np.array_equal(sef.sx, se.sx ^ sf.sx)
        assert np.array_equal(sef.sz, se.sz ^ sf.sz)


def test_stabilizer_rows_have_zero_syndrome(hgp_medium):
    # an X-stabilizer acts on the X components, a Z-stabilizer on the Z ones
    for j in range(hgp_medium.mx):
        stab = PauliError(hgp_medium.hx[j].copy(), np.zeros(hgp_medium.n, dtype=np.uint8))
        assert not syndrome(hgp_medium, stab).any()
    for j in range(hgp_medium.mz):
        stab = PauliError(np.zeros(hgp_medium.n, dtype=np.uint8), hgp_medium.hz[j].copy())
        assert not syndrome(hgp_medium, stab).any()

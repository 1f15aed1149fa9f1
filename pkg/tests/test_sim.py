import numpy as np
import pytest

from fbgnn import bp4, channel, gnn
from fbgnn.baselines import BaselineConfig
from fbgnn.css import Syndrome
from fbgnn.sim import (
    Schedule,
    SimConfig,
    csv_header,
    monte_carlo,
    run_trial_batch,
    sandwich_decode,
)
from fbgnn.stats import paired_ratio_ci, wilson_ci


def test_schedule_parse():
    s = Schedule.parse("64,16,16,16", "0.8,1,1,1")
    assert s.blocks == (64, 16, 16, 16)
    assert s.kappas == (0.8, 1.0, 1.0, 1.0)
    assert str(s) == "64,16,16,16"
    assert s.kappa_str() == "0.8,1,1,1"


def test_schedule_defaults_kappa_one():
    assert Schedule.parse("64").kappas == (1.0,)


@pytest.mark.parametrize("text", ["64,,16", "", "a,b", "64,-1"])
def test_schedule_parse_rejects(text):
    with pytest.raises(ValueError):
        Schedule.parse(text)


def test_schedule_kappa_count_mismatch():
    with pytest.raises(ValueError):
        Schedule.parse("64,16", "1")


def test_sandwich_zero_syndrome_returns_after_first_block(hgp_small):
    syn = Syndrome(np.zeros(2, np.uint8), np.zeros(2, np.uint8))
    out = sandwich_decode(hgp_small, syn, gnn.init_weights(0), Schedule((64, 16), (1, 1)))
    assert out.converged
    assert out.iterations_used == 1
    assert out.e_hat.weight() == 0


def test_sandwich_single_block_is_plain_bp(hgp_medium):
    cfg_ch = channel.ChannelConfig(0.06, 3)
    priors = bp4.init_priors(hgp_medium.n, 0.05, np.float32)
    for trial in range(20):
        err = channel.sample_depolarizing(hgp_medium.n, cfg_ch, channel.Rng(3).trial(trial))
        syn = channel.syndrome(hgp_medium, err)
        a = sandwich_decode(hgp_medium, syn, None, Schedule((24,), (1.0,)))
        b = bp4.run(hgp_medium, syn, priors, bp4.BpConfig(24, kappa=1.0))
        assert a.converged == b.converged
        assert a.e_hat == b.e_hat


def test_sandwich_requires_weights_for_multi_block(hgp_small):
    syn = Syndrome(np.zeros(2, np.uint8), np.zeros(2, np.uint8))
    with pytest.raises(ValueError):
        sandwich_decode(hgp_small, syn, None, Schedule((16, 16), (1, 1)))


def test_sandwich_total_iterations_bounded(hgp_medium):
    w = gnn.init_weights(4)
    sched = Schedule((8, 4, 4), (1.0, 1.0, 1.0))
    cfg_ch = channel.ChannelConfig(0.1, 9)
    for trial in range(10):
        err = channel.sample_depolarizing(hgp_medium.n, cfg_ch, channel.Rng(9).trial(trial))
        syn = channel.syndrome(hgp_medium, err)
        out = sandwich_decode(hgp_medium, syn, w, sched)
        assert out.iterations_used <= sum(sched.blocks)


def _sim_cfg(**kw):
    defaults = dict(
        decoder="bp",
        schedule=Schedule((16,), (1.0,)),
        p_values=(0.02,),
        target_errors=5,
        max_trials=600,
        seed=1,
        workers=1,
    )
    defaults.update(kw)
    return SimConfig(**defaults)


def test_monte_carlo_p_zero_no_errors(hgp_medium):
    cfg = _sim_cfg(p_values=(0.0,), max_trials=300, target_errors=100)
    res = monte_carlo(hgp_medium, cfg)
    assert res.points[0].logical_errors == 0
    assert res.points[0].flagged == 0
    assert res.points[0].trials == 300


def test_monte_carlo_counts_and_stop_rule(hgp_medium):
    cfg = _sim_cfg(p_values=(0.08,), target_errors=10, max_trials=5000)
    res = monte_carlo(hgp_medium, cfg)
    pt = res.points[0]
    assert pt.logical_errors >= 10
    assert pt.flagged <= pt.logical_errors <= pt.trials
    lo, hi = pt.ci()
    assert lo <= pt.ler <= hi


def test_monte_carlo_worker_independence(hgp_medium, tmp_path):
    cfg1 = _sim_cfg(p_values=(0.05, 0.08), target_errors=8, max_trials=2000, workers=1)
    cfg2 = _sim_cfg(p_values=(0.05, 0.08), target_errors=8, max_trials=2000, workers=2)
    r1 = monte_carlo(hgp_medium, cfg1)
    r2 = monte_carlo(hgp_medium, cfg2)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    r1.write_csv(p1)
    r2.write_csv(p2)

    def strip_wall(path):
        return [",".join(line.split(",")[:-1]) for line in path.read_text().splitlines()]

    assert strip_wall(p1) == strip_wall(p2)


def test_monte_carlo_decoder_validation(hgp_medium):
    with pytest.raises(ValueError):
        _sim_cfg(decoder="nope")
    with pytest.raises(ValueError):
        _sim_cfg(decoder="bp", schedule=Schedule((16, 16), (1, 1)))
    with pytest.raises(ValueError):
        monte_carlo(hgp_medium, _sim_cfg(decoder="bp-gnn",
                                         schedule=Schedule((16, 16), (1, 1))))


def test_monte_carlo_baseline_decoders_run(hgp_medium):
    for name in ("bp-pert", "bp-enh"):
        cfg = _sim_cfg(decoder=name, p_values=(0.06,), target_errors=3, max_trials=600,
                       baseline=BaselineConfig(max_attempts=3))
        res = monte_carlo(hgp_medium, cfg)
        assert res.points[0].trials > 0


def test_flagged_counted_as_logical(hgp_medium):
    flagged, logical = run_trial_batch(hgp_medium, _sim_cfg(p_values=(0.12,),
                                       max_trials=256), None, 0, 0, 256)
    assert logical >= flagged


def test_csv_columns_exact(hgp_medium, tmp_path):
    cfg = _sim_cfg(p_values=(0.03,), target_errors=2, max_trials=300)
    res = monte_carlo(hgp_medium, cfg)
    path = tmp_path / "r.csv"
    res.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "decoder,schedule,kappa,p,trials,flagged,logical_errors,ler,ci_low,ci_high,seed,wall_s"
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "bp"
    assert int(fields[4]) > 0


def test_wilson_ci_basics():
    lo, hi = wilson_ci(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi < 0.05
    lo, hi = wilson_ci(50, 100)
    assert lo < 0.5 < hi
    lo, hi = wilson_ci(1, 1000)
    assert lo > 0.0


def test_paired_ratio_ci():
    ratio, lo, hi = paired_ratio_ci(50, 50, 10, 890, seed=1)
    assert ratio == pytest.approx(60 / 100)
    assert lo < ratio < hi
    assert hi < 1.0  # clearly separated improvement
    with pytest.raises(ValueError):
        paired_ratio_ci(0, 0, 0, 0)

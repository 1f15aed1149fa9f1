import os

import numpy as np
import pytest

from fbgnn import gnn
from fbgnn.cli import main


def test_code_info_steane(capsys):
    assert main(["code-info", "--code", "steane"]) == 0
    out = capsys.readouterr().out
    assert "N=7" in out and "K=1" in out


def test_code_info_hgp(capsys):
    assert main(["code-info", "--code", "hgp-hamming"]) == 0
    assert "N=58 K=16" in capsys.readouterr().out


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_invalid_schedule_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--code", "steane", "--schedule", "64,,16", "--p", "0.01",
              "--out", str(tmp_path / "r.csv")])
    assert exc.value.code == 2


def test_unknown_code_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["code-info", "--code", "not-a-code"])
    assert exc.value.code == 2


def test_simulate_p_zero(tmp_path, capsys):
    out_csv = tmp_path / "r.csv"
    rc = main(["simulate", "--code", "steane", "--decoder", "bp", "--schedule", "16",
               "--p", "0", "--max-trials", "200", "--seed", "3", "--out", str(out_csv)])
    assert rc == 0
    lines = out_csv.read_text().splitlines()
    assert len(lines) == 2
    assert int(lines[1].split(",")[6]) == 0  # logical_errors column


def test_simulate_gnn_requires_weights(tmp_path):
    rc = main(["simulate", "--code", "steane", "--decoder", "bp-gnn",
               "--schedule", "16,8", "--p", "0.01", "--max-trials", "50",
               "--out", str(tmp_path / "r.csv")])
    assert rc == 1


def test_gen_train_select_pipeline(tmp_path, capsys):
    ds_path = tmp_path / "easy.txt"
    rc = main(["gen-dataset", "--code", "hgp-hamming", "--stage", "1", "--count", "12",
               "--p", "0.05", "--seed", "5", "--out", str(ds_path)])
    assert rc == 0
    assert ds_path.exists()

    models_dir = tmp_path / "models"
    rc = main(["train", "--code", "hgp-hamming", "--dataset", str(ds_path),
               "--steps", "4", "--batch", "4", "--models", "2", "--seed", "1",
               "--out", str(models_dir)])
    assert rc == 0
    files = sorted(os.listdir(models_dir))
    assert "model_00.fbgnn" in files and "loss_01.csv" in files

    best = tmp_path / "best.fbgnn"
    rc = main(["select", "--code", "hgp-hamming", "--models", str(models_dir),
               "--validation", str(ds_path), "--schedule", "16,8",
               "--out", str(best)])
    assert rc == 0
    w = gnn.load_weights(best)
    assert w.param_count() == 3923


def test_simulate_with_alist_pair(tmp_path):
    from fbgnn.alist import save_alist
    from fbgnn.codes import hamming_7_4

    hx_path, hz_path = tmp_path / "hx.alist", tmp_path / "hz.alist"
    save_alist(hamming_7_4(), hx_path)
    save_alist(hamming_7_4(), hz_path)
    rc = main(["simulate", "--hx", str(hx_path), "--hz", str(hz_path),
               "--decoder", "bp", "--schedule", "8", "--p", "0.01",
               "--max-trials", "100", "--out", str(tmp_path / "r.csv")])
    assert rc == 0


def test_manifest_loading(tmp_path, capsys):
    from fbgnn.alist import save_alist
    from fbgnn.codes import hamming_7_4

    save_alist(hamming_7_4(), tmp_path / "hx.alist")
    save_alist(hamming_7_4(), tmp_path / "hz.alist")
    manifest = tmp_path / "code.txt"
    manifest.write_text("hx.alist\nhz.alist\n")
    assert main(["code-info", "--code", str(manifest)]) == 0
    assert "N=7 K=1" in capsys.readouterr().out


def test_bench_runs(capsys):
    rc = main(["bench", "--code", "steane", "--trials", "20", "--iters", "8"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "python" in out

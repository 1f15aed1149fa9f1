"""Command-line front end: simulate, gen-dataset, train, select, code-info, bench."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="named code, manifest file, or HX.alist:HZ.alist")
    p.add_argument("--hx", help="alist file for hx (with --hz)")
    p.add_argument("--hz", help="alist file for hz (with --hx)")


def _resolve_code(args, parser: argparse.ArgumentParser):
    from .alist import load_alist
    from .codes import resolve_code
    from .css import CssCode

    if args.hx or args.hz:
        if not (args.hx and args.hz):
            parser.error("--hx and --hz must be given together")
        return CssCode(load_alist(args.hx), load_alist(args.hz))
    if not args.code:
        parser.error("no code given (use --code or --hx/--hz)")
    try:
        return resolve_code(args.code)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbgnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte-Carlo logical error rate")
    _add_code_args(sim)
    sim.add_argument("--decoder", default="bp", help="bp | bp-pert | bp-enh | bp-gnn")
    sim.add_argument("--schedule", default="64,16,16,16", help="BP block lengths, e.g. 64,16,16,16")
    sim.add_argument("--kappa", default=None, help="per-block normalization, e.g. 0.8,1,1,1")
    sim.add_argument("--p", required=True, help="comma-separated physical error rates")
    sim.add_argument("--target-errors", type=int, default=100)
    sim.add_argument("--max-trials", type=int, default=1_000_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--weights", help="GNN weight file (for bp-gnn)")
    sim.add_argument("--na", type=int, default=10, help="max attempts for baseline decoders")
    sim.add_argument("--prior-p", type=float, default=0.05)
    sim.add_argument("--backend", default="auto", choices=("auto", "python", "kernel"))
    sim.add_argument("--out", default="results.csv")

    gen = sub.add_parser("gen-dataset", help="collect decoder-defeating error patterns")
    _add_code_args(gen)
    gen.add_argument("--stage", type=int, choices=(1, 3), required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--p", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--budget", type=int, default=None, help="max channel samples")
    gen.add_argument("--bp-iters", type=int, default=64)
    gen.add_argument("--weights", help="trained weights (stage 3)")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--out", required=True)

    tr = sub.add_parser("train", help="train feedback-GNN models")
    _add_code_args(tr)
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--dataset-hard")
    tr.add_argument("--bp-first", type=int, default=16)
    tr.add_argument("--bp-second", type=int, default=16)
    tr.add_argument("--steps", type=int, default=5000)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--batch", type=int, default=128)
    tr.add_argument("--models", type=int, default=10)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True, help="output directory for models and loss curves")

    sel = sub.add_parser("select", help="pick the best model on a validation set")
    _add_code_args(sel)
    sel.add_argument("--models", required=True, help="directory of .fbgnn weight files")
    sel.add_argument("--validation", required=True, help="validation dataset file")
    sel.add_argument("--schedule", default="64,16,16,16")
    sel.add_argument("--kappa", default=None)
    sel.add_argument("--out", help="copy the winner here")

    info = sub.add_parser("code-info", help="print code parameters")
    _add_code_args(info)

    bench = sub.add_parser("bench", help="compare the compiled and numpy decoder backends")
    _add_code_args(bench)
    bench.add_argument("--p", type=float, default=0.05)
    bench.add_argument("--trials", type=int, default=2000)
    bench.add_argument("--iters", type=int, default=64)
    bench.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_simulate(args, parser):
    from . import gnn
    from .baselines import BaselineConfig
    from .sim import Schedule, SimConfig, monte_carlo, csv_header

    code = _resolve_code(args, parser)
    try:
        schedule = Schedule.parse(args.schedule, args.kappa)
        p_values = tuple(float(tok) for tok in args.p.split(","))
    except ValueError as exc:
        parser.error(str(exc))
    weights = None
    if args.weights:
        weights = gnn.load_weights(args.weights)
    try:
        cfg = SimConfig(
            decoder=args.decoder,
            schedule=schedule,
            p_values=p_values,
            target_errors=args.target_errors,
            max_trials=args.max_trials,
            seed=args.seed,
            workers=args.workers,
            prior_p=args.prior_p,
            backend=args.backend,
            baseline=BaselineConfig(max_attempts=args.na, prior_p=args.prior_p),
        )
    except ValueError as exc:
        parser.error(str(exc))
    result = monte_carlo(code, cfg, weights)
    result.write_csv(args.out)
    sys.stdout.write(csv_header())
    for pt in result.points:
        sys.stdout.write(result.csv_row(pt))
    return 0


def _cmd_gen_dataset(args, parser):
    from . import gnn
    from .training import gen_dataset_stage1, gen_dataset_stage3

    code = _resolve_code(args, parser)
    if args.stage == 1:
        ds = gen_dataset_stage1(code, args.p, args.count, args.seed,
                                bp_iters=args.bp_iters, max_trials=args.budget,
                                workers=args.workers)
    else:
        if not args.weights:
            parser.error("stage 3 requires --weights")
        ds = gen_dataset_stage3(code, gnn.load_weights(args.weights), args.p, args.count,
                                args.seed, bp_iters=args.bp_iters, max_trials=args.budget,
                                workers=args.workers)
    ds.save(args.out)
    print("wrote %d samples to %s" % (len(ds), args.out))
    return 0


def _cmd_train(args, parser):
    from . import gnn
    from .training import Dataset, TrainConfig, train

    code = _resolve_code(args, parser)
    dataset = Dataset.load(args.dataset, code)
    hard = Dataset.load(args.dataset_hard, code) if args.dataset_hard else None
    os.makedirs(args.out, exist_ok=True)
    for m in range(args.models):
        cfg = TrainConfig(lr=args.lr, batch_size=args.batch, steps=args.steps,
                          bp_first=args.bp_first, bp_second=args.bp_second,
                          seed=args.seed + m, model_count=args.models)
        weights, report = train(code, dataset, cfg, hard_dataset=hard)
        gnn.save_weights(weights, os.path.join(args.out, "model_%02d.fbgnn" % m))
        report.write_csv(os.path.join(args.out, "loss_%02d.csv" % m))
        print("model %02d: final loss %.6f" % (m, report.entries[-1][1]))
    return 0


def _cmd_select(args, parser):
    import shutil

    from . import gnn
    from .sim import Schedule
    from .training import Dataset, select_best

    code = _resolve_code(args, parser)
    validation = Dataset.load(args.validation, code)
    try:
        schedule = Schedule.parse(args.schedule, args.kappa)
    except ValueError as exc:
        parser.error(str(exc))
    paths = sorted(
        os.path.join(args.models, f) for f in os.listdir(args.models) if f.endswith(".fbgnn")
    )
    if not paths:
        parser.error("no .fbgnn files in %s" % args.models)
    models = [gnn.load_weights(p) for p in paths]
    best = select_best(models, validation, code, schedule)
    best_path = paths[[id(m) for m in models].index(id(best))]
    print("best model: %s" % best_path)
    if args.out:
        shutil.copyfile(best_path, args.out)
    return 0


def _cmd_code_info(args, parser):
    code = _resolve_code(args, parser)
    xdeg = sorted(set(int(d) for d in code.graph.x.check_degree)) if code.mx else []
    zdeg = sorted(set(int(d) for d in code.graph.z.check_degree)) if code.mz else []
    print(
        "N=%d K=%d mx=%d mz=%d x-check-degrees=%s z-check-degrees=%s hash=%s"
        % (code.n, code.k, code.mx, code.mz, xdeg or "-", zdeg or "-", code.code_hash)
    )
    return 0


def _cmd_bench(args, parser):
    from . import bp4
    from .channel import ChannelConfig, substream, sample_depolarizing, syndrome as synd

    code = _resolve_code(args, parser)
    backends = ["python"] + (["kernel"] if bp4.kernel_available() else [])
    if len(backends) == 1:
        print("compiled kernel not built; benchmarking the numpy path only")
    priors = bp4.init_priors(code.n, 0.05, dtype=np.float32)
    channel = ChannelConfig(args.p, args.seed)
    rates = {}
    for backend in backends:
        cfg = bp4.BpConfig(args.iters, kappa=1.0, early_stop=True, backend=backend)
        t0 = time.perf_counter()
        converged = 0
        for trial in range(args.trials):
            err = sample_depolarizing(code.n, channel, substream(args.seed, 0, trial))
            out = bp4.run(code, synd(code, err), priors, cfg)
            converged += out.converged
        dt = time.perf_counter() - t0
        rates[backend] = args.trials / dt
        print(
            "%-7s %8.1f trials/s  (%d/%d converged, %.2fs)"
            % (backend, rates[backend], converged, args.trials, dt)
        )
    if len(rates) == 2:
        print("speedup: %.1fx" % (rates["kernel"] / rates["python"]))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "gen-dataset": _cmd_gen_dataset,
        "train": _cmd_train,
        "select": _cmd_select,
        "code-info": _cmd_code_info,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args, parser)
    except (ValueError, OSError, RuntimeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

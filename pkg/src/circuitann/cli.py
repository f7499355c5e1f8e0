"""Command-line runner.

Subcommands share ``--seed``, ``--config`` and ``--out``. Files written
under ``--out``: ``dataset.csv``, ``context.json``, ``weights.json``,
``train_report.json``, ``report.{csv,json,md}``, ``predictions.csv`` and
``sweep.csv``, depending on the command.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .circuits import GRID_CLASS_IDS, ann_architecture, feature_names, target_names
from .config import experiment_config, load_config, sweep_cap
from .data import (
    DatasetFormatError,
    apply_noise_offset,
    denormalize_outputs,
    generate_dataset,
    normalize_features,
    read_context,
    read_dataset,
    split_train_test,
    write_dataset,
)
from .experiments import (
    THRESHOLDS,
    SweepCriterion,
    SweepTooLargeError,
    emit_report,
    evaluate,
    run_amplifier_experiment,
    run_class_experiment,
    run_ohm_experiment,
    sweep,
    write_sweep,
)
from .mlp import TrainConfig, TrainReport, forward_batch, init_network, load_weights, save_weights, saved_cycles, train

REPORT_FORMATS = ("csv", "json", "md")


class CLIError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for every random stream")
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: out)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="circuitann", parents=[common],
                                     description="Neural-network surrogates for circuit response prediction.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a dataset")
    p.add_argument("--class", dest="cls", required=True, choices=GRID_CLASS_IDS + ("amp_electrical", "amp_electronic"))
    p.add_argument("--count", type=int)

    p = sub.add_parser("train", parents=[common], help="train on the dataset in --out")
    p.add_argument("--data", help="dataset CSV (default: <out>/dataset.csv)")
    p.add_argument("--cycles", type=int)
    p.add_argument("--resume", action="store_true", help="continue from <out>/weights.json")

    p = sub.add_parser("eval", parents=[common], help="evaluate weights on the held-out split")
    p.add_argument("--data", help="dataset CSV (default: <out>/dataset.csv)")

    p = sub.add_parser("predict", parents=[common], help="predict responses for physical inputs")
    p.add_argument("--input", required=True, help="CSV with one column per feature")
    p.add_argument("--output", help="default: <out>/predictions.csv")

    p = sub.add_parser("run", parents=[common], help="generate, train and evaluate one class or all")
    p.add_argument("--class", dest="cls", required=True, choices=GRID_CLASS_IDS + ("all",))

    sub.add_parser("ohm", parents=[common], help="Ohm's-law learnability study")
    sub.add_parser("amp", parents=[common], help="electrical vs electronic amplifier pair")

    p = sub.add_parser("sweep", parents=[common], help="enumerate a design grid and filter by predicted response")
    p.add_argument("--grid", action="append", default=[], metavar="NAME=SPEC",
                   help="feature grid: NAME=min:max:step or NAME=v1,v2,...")
    p.add_argument("--current-band", required=True, metavar="LO:HI")
    p.add_argument("--phase-band", metavar="LO:HI")
    p.add_argument("--cap", type=int)
    p.add_argument("--weights", help="default: <out>/weights.json")
    return parser


def _path(args, name):
    return os.path.join(args.out, name)


def _write_reports(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for fmt in REPORT_FORMATS:
        emit_report(report, fmt, out_dir)


def _summary(report):
    m = report.metrics
    status = {True: "PASS", False: "FAIL", None: "n/a"}[report.passed]
    line = f"{report.label:15s} nrmse={_g(m['nrmse'])} threshold={_g(report.threshold)} {status}"
    for w in report.warnings:
        line += f"\n  warning: {w}"
    return line


def _g(x):
    return "-" if x is None else format(x, ".4g")


def _train_report_doc(rep: TrainReport, start_cycle: int) -> dict:
    return {
        "start_cycle": start_cycle,
        "loss_per_cycle": rep.loss_per_cycle,
        "initial_loss": rep.initial_loss,
        "final_loss": rep.final_loss,
    }


def _seed(args, context_doc):
    """Explicit ``--seed`` wins, then the seed the dataset was generated with."""
    if args.seed is not None:
        return args.seed
    return context_doc.get("seed")


def _load_split(args, cfg, data_path=None):
    path = data_path or _path(args, "dataset.csv")
    ds = read_dataset(path, _path(args, "context.json") if data_path is None else None)
    return ds, split_train_test(ds, cfg.test_fraction, cfg.seed)


def cmd_gen(args, parser):
    cfg = experiment_config(args.cls, args.seed, parser)
    sampler = cfg.sampler
    if args.count is not None:
        sampler = replace(sampler, count=args.count)
    ds = generate_dataset(sampler)
    os.makedirs(args.out, exist_ok=True)
    write_dataset(ds, _path(args, "dataset.csv"), _path(args, "context.json"))
    print(f"wrote {len(ds)} rows of class {ds.cls} to {_path(args, 'dataset.csv')}")


def cmd_train(args, parser):
    _, doc = read_context(_path(args, "context.json"))
    cfg = experiment_config(doc["class"], _seed(args, doc), parser)
    ds, (train_set, _) = _load_split(args, cfg, args.data)
    train_set = apply_noise_offset(train_set, cfg.noise_offset)
    tcfg = cfg.train
    if args.cycles is not None:
        tcfg = TrainConfig(tcfg.learning_rate, args.cycles, tcfg.seed, tcfg.shuffle_each_cycle)
    weights_path = _path(args, "weights.json")
    arch = ann_architecture(ds.cls)
    if args.resume:
        net = load_weights(weights_path, arch)
        start = saved_cycles(weights_path)
    else:
        net = init_network(arch, cfg.seed)
        start = 0
    net, rep = train(net, train_set, tcfg, start_cycle=start)
    done = start + len(rep.loss_per_cycle)
    save_weights(net, weights_path, cycles_completed=done)
    with open(_path(args, "train_report.json"), "w") as fh:
        json.dump(_train_report_doc(rep, start), fh, indent=2)
        fh.write("\n")
    print(f"trained {ds.cls} for cycles {start}..{done - 1}: final loss {rep.final_loss:.6g}")


def cmd_eval(args, parser):
    _, doc = read_context(_path(args, "context.json"))
    cfg = experiment_config(doc["class"], _seed(args, doc), parser)
    ds, (train_set, test_set) = _load_split(args, cfg, args.data)
    net = load_weights(_path(args, "weights.json"), ann_architecture(ds.cls))
    treport = TrainReport()
    tr_path = _path(args, "train_report.json")
    if os.path.exists(tr_path):
        with open(tr_path) as fh:
            d = json.load(fh)
        treport = TrainReport(d["loss_per_cycle"], d["final_loss"], d["initial_loss"])
    report = evaluate(
        net, test_set, train_report=treport, n_train=len(train_set),
        input_offset=cfg.noise_offset if cfg.noise_all else 0.0, output_offset=cfg.noise_offset,
        threshold=THRESHOLDS.get(ds.cls),
    )
    _write_reports(report, args.out)
    print(_summary(report))


def cmd_predict(args, parser):
    ctx, doc = read_context(_path(args, "context.json"))
    cls = doc["class"]
    cfg = experiment_config(cls, _seed(args, doc), parser)
    net = load_weights(_path(args, "weights.json"), ann_architecture(cls))
    names = feature_names(cls)
    with open(args.input, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [n for n in names if n not in (reader.fieldnames or [])]
        if missing:
            raise CLIError(f"{args.input}: missing columns {missing}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[n]) for n in names])
            except (TypeError, ValueError):
                raise CLIError(f"{args.input}: row {line_no}: non-numeric feature value") from None
    phys = np.array(rows, dtype=float).reshape(-1, len(names))
    feats = normalize_features(cls, phys, ctx)
    if cfg.noise_all:
        feats = feats + cfg.noise_offset
    pred = forward_batch(net, feats) - cfg.noise_offset if len(feats) else np.zeros((0, len(target_names(cls))))
    out = args.output or _path(args, "predictions.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + [f"{t}_pred" for t in target_names(cls)])
        for x, y in zip(phys, pred):
            resp = denormalize_outputs(y, ctx)
            vals = [resp.current_mag] + ([resp.phase_deg] if len(y) > 1 else [])
            w.writerow([format(v, ".17g") for v in list(x) + vals])
    print(f"wrote {len(phys)} predictions to {out}")


def _save_run(net, ds, report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_dataset(ds, os.path.join(out_dir, "dataset.csv"), os.path.join(out_dir, "context.json"))
    save_weights(net, os.path.join(out_dir, "weights.json"), cycles_completed=len(report.train_report.loss_per_cycle))
    _write_reports(report, out_dir)
    print(_summary(report))


def cmd_run(args, parser):
    classes = GRID_CLASS_IDS if args.cls == "all" else (args.cls,)
    for cls in classes:
        cfg = experiment_config(cls, args.seed, parser)
        net, ds, report = run_class_experiment(cls, cfg)
        _save_run(net, ds, report, os.path.join(args.out, cls) if args.cls == "all" else args.out)


def cmd_ohm(args, parser):
    cfg = experiment_config("1a", args.seed, parser)
    net, ds, report = run_ohm_experiment(train_cfg=cfg.train, test_fraction=cfg.test_fraction, seed=cfg.seed)
    _save_run(net, ds, report, args.out)


def cmd_amp(args, parser):
    cfg = experiment_config("amp_electrical", args.seed, parser)
    results = run_amplifier_experiment(cfg.sampler, cfg.train, cfg.test_fraction, cfg.seed)
    for cls, (net, ds, report) in results.items():
        _save_run(net, ds, report, os.path.join(args.out, cls))


def _band(text, flag):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise CLIError(f"{flag} must read LO:HI, got {text!r}") from None
    return lo, hi


def _grid_axis(spec):
    name, sep, values = spec.partition("=")
    if not sep:
        raise CLIError(f"--grid expects NAME=SPEC, got {spec!r}")
    try:
        if ":" in values:
            lo, hi, step = (float(t) for t in values.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((hi - lo) / step + 1e-9))
            axis = lo + step * np.arange(n + 1)
        else:
            axis = np.array([float(v) for v in values.split(",")])
    except ValueError:
        raise CLIError(f"bad grid spec {spec!r}") from None
    return name.strip(), axis


def cmd_sweep(args, parser):
    ctx, doc = read_context(_path(args, "context.json"))
    cls = doc["class"]
    cfg = experiment_config(cls, _seed(args, doc), parser)
    net = load_weights(args.weights or _path(args, "weights.json"), ann_architecture(cls))
    grid = dict(_grid_axis(g) for g in args.grid)
    crit = SweepCriterion(_band(args.current_band, "--current-band"),
                          _band(args.phase_band, "--phase-band") if args.phase_band else None)
    cap = args.cap if args.cap is not None else sweep_cap(parser)
    hits = sweep(cls, net, ctx, grid, crit, cap=cap, output_offset=cfg.noise_offset)
    out = _path(args, "sweep.csv")
    write_sweep(hits, cls, out)
    print(f"{len(hits)} designs in band; wrote {out}")


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "run": cmd_run,
    "ohm": cmd_ohm,
    "amp": cmd_amp,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("config", None), ("out", "out")):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        config = load_config(args.config)
        COMMANDS[args.command](args, config)
    except (CLIError, DatasetFormatError, SweepTooLargeError, ValueError, OSError) as exc:
        print(f"circuitann {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

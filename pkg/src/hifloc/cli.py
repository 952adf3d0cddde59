"""Command-line front end.

Subcommands
-----------
simulate     one fault scenario -> locus CSV, R-X SVG, trip decision
dataset      scenario grid -> dataset CSV + fitted normalizer JSON
train        dataset + optimizer -> model JSON + per-epoch report CSV
eval         model(s) + dataset -> results table (CSV + aligned text) + fit SVGs
plot         re-render an R-X or fit SVG from saved artifacts
init-config  write a preset experiment configuration to a JSON file

Exit codes: 0 success, 2 usage error, 3 simulation error, 4 training
divergence, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import features as feat
from . import harness, svgplot, training
from .errors import HiflocError, IoFailure, LineSearchFailure, NonFiniteLoss
from .netmodel import FaultScenario
from .relay import decide_trip, locus_to_csv, zone1_for_line

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SIMULATION = 3
EXIT_TRAINING = 4
EXIT_IO = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hifloc",
        description="Distance-relay locus simulation and neural fault location")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="experiment configuration JSON "
                       "(defaults to the built-in augmented study)")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="run one fault scenario")
    add_common(p)
    p.add_argument("--distance-km", type=float, required=True)
    p.add_argument("--rf-ohm", type=float, required=True)
    p.add_argument("--inception-s", type=float, default=None)

    p = sub.add_parser("dataset", help="build the scenario-grid dataset")
    add_common(p)

    p = sub.add_parser("train", help="train one optimizer on a dataset")
    add_common(p)
    p.add_argument("--dataset", required=True, help="dataset CSV from `dataset`")
    p.add_argument("--normalizer", default=None,
                   help="normalizer JSON (refitted from training rows when omitted)")
    p.add_argument("--optimizer", choices=training.OPTIMIZER_NAMES, required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("eval", help="tabulate model predictions against a dataset")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", action="append", required=True,
                   help="model JSON (repeatable, one column per model)")
    p.add_argument("--split", choices=("train", "validation", "test", "all"),
                   default="all")

    p = sub.add_parser("plot", help="re-render an SVG from saved artifacts")
    add_common(p)
    p.add_argument("--kind", choices=("rx", "fit"), required=True)
    p.add_argument("--locus", help="locus CSV (kind=rx)")
    p.add_argument("--model", help="model JSON (kind=fit)")
    p.add_argument("--dataset", help="dataset CSV (kind=fit)")
    p.add_argument("--svg", required=True, help="output SVG path")

    p = sub.add_parser("init-config", help="write a preset configuration file")
    p.add_argument("--preset", choices=sorted(cfgmod.PRESETS), default="default")
    p.add_argument("--path", required=True, help="output JSON path")
    return parser


def _load_config(args) -> cfgmod.ExperimentConfig:
    if getattr(args, "config", None):
        return cfgmod.load_config(args.config)
    return cfgmod.default_config()


def _out_dir(args, cfg) -> Path:
    out = Path(args.out if args.out else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    inception = cfg.sim.inception_s if args.inception_s is None else args.inception_s
    scenario = FaultScenario(distance_km=args.distance_km, rf_ohm=args.rf_ohm,
                             inception_s=inception)
    locus = feat.simulate_locus(cfg, scenario)
    zone = zone1_for_line(cfg.line, cfg.relay.reach_fraction)
    decision = decide_trip(locus, zone, cfg.relay.dwell)
    _write_text(out / "locus.csv", locus_to_csv(locus))
    svgplot.render_rx_svg(locus, zone, out / "rx.svg",
                          title=f"R-X locus d={args.distance_km:g} km "
                                f"rf={args.rf_ohm:g} ohm")
    trip = "yes" if decision.tripped else "no"
    when = "" if decision.trip_time_s is None else f" t={decision.trip_time_s:.4f}s"
    print(f"tripped={trip}{when} points={len(locus)} -> {out / 'locus.csv'}")
    return EXIT_OK


def cmd_dataset(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    dataset = feat.build_dataset(cfg.scenarios(), cfg)
    normalizer = feat.fit_normalizer(dataset, target_max=cfg.line.length_km)
    _write_text(out / "dataset.csv", feat.dataset_to_csv(dataset))
    _write_text(out / "normalizer.json",
                json.dumps(normalizer.to_dict(), indent=2, sort_keys=True) + "\n")
    counts = {s: int(len(dataset.rows_for(s))) for s in ("train", "validation", "test")}
    print(f"dataset: {len(dataset)} rows {counts} -> {out / 'dataset.csv'}")
    return EXIT_OK


def _read_dataset(path, cfg) -> feat.Dataset:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read dataset {path}: {exc}") from exc
    return feat.dataset_from_csv(text, mode=cfg.features.mode)


def cmd_train(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    dataset = _read_dataset(args.dataset, cfg)
    if args.normalizer:
        try:
            raw = json.loads(Path(args.normalizer).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read normalizer {args.normalizer}: {exc}") from exc
        normalizer = feat.NormalizationParams.from_dict(raw)
    else:
        normalizer = feat.fit_normalizer(dataset, target_max=cfg.line.length_km)

    tc = cfg.training.get(args.optimizer) or training.TrainConfig(optimizer=args.optimizer)
    if tc.optimizer != args.optimizer:
        raise IoFailure(f"config names optimizer {tc.optimizer!r} under key "
                        f"{args.optimizer!r}")
    if args.seed is not None:
        tc = training.TrainConfig.from_dict({**tc.to_dict(), "seed": args.seed})

    arrays = feat.normalized_arrays(dataset, normalizer)
    x_train, y_train = arrays["train"]
    x_val, y_val = arrays["validation"]
    model = training.new_model_for(tc, n_inputs=x_train.shape[1])
    model, report = training.train_mlp(model, x_train, y_train, x_val, y_val, tc)

    model_path = out / f"model_{args.optimizer}.json"
    training.save_model(model_path, model, normalizer=normalizer.to_dict(),
                        optimizer=args.optimizer)
    _write_text(out / f"report_{args.optimizer}.csv", training.report_to_csv(report))
    final_val = report.validation_mse[report.best_epoch - 1] if report.n_epochs else float("nan")
    print(f"{args.optimizer}: {report.n_epochs} epochs stop={report.stop_reason} "
          f"best_epoch={report.best_epoch} best_val_mse={final_val:.3e} "
          f"-> {model_path}")
    return EXIT_OK


def _rows_for_split(dataset: feat.Dataset, split: str):
    if split == "all":
        idx = np.arange(len(dataset))
    else:
        idx = dataset.rows_for(split)
    return dataset.features[idx], dataset.targets_km[idx], idx


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    dataset = _read_dataset(args.dataset, cfg)
    x_raw, targets, _ = _rows_for_split(dataset, args.split)

    table = None
    for model_path in args.model:
        model, norm_dict, opt_name = training.load_model(model_path)
        if norm_dict is None:
            raise IoFailure(f"model {model_path} carries no normalizer block")
        normalizer = feat.NormalizationParams.from_dict(norm_dict)
        name = opt_name or Path(model_path).stem
        single = harness.evaluate_locator(model, normalizer, x_raw, targets, name)
        table = single if table is None else table.merged_with(single)

        split_data = {}
        for split in ("train", "validation", "test"):
            xs, ts, _ = _rows_for_split(dataset, split)
            if len(ts):
                sub = harness.evaluate_locator(model, normalizer, xs, ts, name)
                split_data[split] = (sub.real_km, sub.predictions_km[name])
            else:
                split_data[split] = (np.empty(0), np.empty(0))
        svgplot.render_fit_svg(None, split_data, out / f"fit_{name}.svg",
                               title=f"Regression fit ({name})")

    _write_text(out / "results.csv", harness.results_to_csv(table))
    _write_text(out / "results.txt", harness.results_to_text(table))
    print(harness.results_to_text(table), end="")
    return EXIT_OK


def _read_locus_csv(path):
    from .relay import ImpedanceLocus
    try:
        lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read locus {path}: {exc}") from exc
    times = []
    zs = []
    for ln in lines[1:]:
        t, r, x = ln.split(",")
        times.append(float(t))
        zs.append(complex(float(r), float(x)))
    return ImpedanceLocus(times_s=np.asarray(times), z_ohm=np.asarray(zs, dtype=complex))


def cmd_plot(args) -> int:
    cfg = _load_config(args)
    if args.kind == "rx":
        if not args.locus:
            raise IoFailure("plot --kind rx needs --locus")
        locus = _read_locus_csv(args.locus)
        zone = zone1_for_line(cfg.line, cfg.relay.reach_fraction)
        svgplot.render_rx_svg(locus, zone, args.svg)
    else:
        if not (args.model and args.dataset):
            raise IoFailure("plot --kind fit needs --model and --dataset")
        dataset = _read_dataset(args.dataset, cfg)
        model, norm_dict, opt_name = training.load_model(args.model)
        if norm_dict is None:
            raise IoFailure(f"model {args.model} carries no normalizer block")
        normalizer = feat.NormalizationParams.from_dict(norm_dict)
        name = opt_name or Path(args.model).stem
        split_data = {}
        for split in ("train", "validation", "test"):
            xs, ts, _ = _rows_for_split(dataset, split)
            if len(ts):
                sub = harness.evaluate_locator(model, normalizer, xs, ts, name)
                split_data[split] = (sub.real_km, sub.predictions_km[name])
            else:
                split_data[split] = (np.empty(0), np.empty(0))
        svgplot.render_fit_svg(None, split_data, args.svg,
                               title=f"Regression fit ({name})")
    print(f"wrote {args.svg}")
    return EXIT_OK


def cmd_init_config(args) -> int:
    cfg = cfgmod.PRESETS[args.preset]()
    cfgmod.save_config(cfg, args.path)
    print(f"wrote {args.preset} config -> {args.path}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "eval": cmd_eval,
    "plot": cmd_plot,
    "init-config": cmd_init_config,
}


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (NonFiniteLoss, LineSearchFailure) as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except IoFailure as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HiflocError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()

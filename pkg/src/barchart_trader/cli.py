"""Command line: ``barchart-trader {encode,train,backtest,run-all}``.

On failure the last stderr line is ``error: <ErrorClass>: <message>`` and
the exit status is 1 (2 for usage errors).
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import pipeline
from .config import PipelineConfig, from_dict, load_config
from .errors import ConfigError, PipelineError
from .metrics import table2_csv, table3_csv

log = logging.getLogger("barchart_trader")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--input", action="append", dest="inputs", metavar="CSV", help="OHLCV CSV (repeatable)")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--train-start")
    p.add_argument("--train-end")
    p.add_argument("--test-start")
    p.add_argument("--test-end")
    p.add_argument("--price-channel", choices=("adjusted", "close"))
    p.add_argument("--first-fraction", help="Sell/Hold quantile, e.g. 2/5")
    p.add_argument("--second-fraction", help="Hold/Buy quantile, e.g. 3/5")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="tickers processed concurrently")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--optimizer", choices=("sgd", "adam"))
    p.add_argument("--start-capital", type=float)
    p.add_argument("--commission", type=float)
    p.add_argument("--no-liquidate", action="store_true", help="keep an open position at the end")
    p.add_argument("--no-svg", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="barchart-trader", description="Bar-chart image CNN trading pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("encode", "build labeled image datasets"),
        ("train", "train one model per ticker"),
        ("backtest", "predict labels on the test range and simulate trading"),
        ("run-all", "encode, train and backtest in sequence"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "backtest":
            p.add_argument("--labels", help="date,label CSV used instead of model predictions (single ticker)")
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    doc = cfg.to_dict()
    for key in ("inputs", "output_dir", "train_start", "train_end", "test_start", "test_end",
                "price_channel", "first_fraction", "second_fraction", "seed", "jobs"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.no_svg:
        doc["svg"] = False
    for flag, key in (("epochs", "epochs"), ("batch_size", "batch_size"),
                      ("learning_rate", "learning_rate"), ("optimizer", "optimizer")):
        value = getattr(args, flag)
        if value is not None:
            doc["model"][key] = value
    for flag in ("start_capital", "commission"):
        value = getattr(args, flag)
        if value is not None:
            doc["backtest"][flag] = value
    if args.no_liquidate:
        doc["backtest"]["liquidate_at_end"] = False
    cfg = from_dict(doc)
    if not cfg.inputs:
        raise ConfigError("no input CSV given (use --input or 'inputs' in the config)")
    return cfg


def _fan_out(cfg: PipelineConfig, fn, *extra):
    if cfg.jobs > 1 and len(cfg.inputs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(fn, cfg, path, *extra) for path in cfg.inputs]
            return [f.result() for f in futures]
    return [fn(cfg, path, *extra) for path in cfg.inputs]


def cmd_encode(cfg: PipelineConfig):
    for path, counts in zip(cfg.inputs, _fan_out(cfg, pipeline.encode)):
        parts = [f"{split} " + " ".join(f"{k}={v}" for k, v in c.items())
                 for split, c in counts.items() if split != "separation"]
        print(f"{pipeline.ticker_of(path)}: " + "; ".join(parts))


def _train_one(cfg, path):
    _, report = pipeline.train_stage(cfg, path)
    return report


def cmd_train(cfg: PipelineConfig):
    for path, report in zip(cfg.inputs, _fan_out(cfg, _train_one)):
        last = f"loss={report.loss[-1]:.4f} acc={report.accuracy[-1]:.4f}" if report.epochs else "untrained"
        print(f"{pipeline.ticker_of(path)}: {report.epochs} epochs {last}")


def cmd_backtest(cfg: PipelineConfig, labels=None):
    if labels is not None and len(cfg.inputs) != 1:
        raise ConfigError("--labels applies to a single input")
    outputs = _fan_out(cfg, pipeline.backtest_stage, labels)
    reports = {o.ticker: o.report for o in outputs}
    root = Path(cfg.output_dir)
    (root / "table2.csv").write_text(table2_csv(reports))
    (root / "table3.csv").write_text(table3_csv(reports))
    for o in outputs:
        r = o.report
        acc = f" acc={o.test_accuracy:.4f}" if o.test_accuracy is not None else ""
        print(f"{o.ticker}: AR={r.ar:.2f}% BaH={r.bah_ar:.2f}% trades={r.transactions} "
              f"PoS={r.pos:.2f}% MDD={r.mdd:.2f}%{acc}")
    return outputs


def cmd_run_all(cfg: PipelineConfig):
    cmd_encode(cfg)
    cmd_train(cfg)
    return cmd_backtest(cfg)


def _setup_logging(cfg: PipelineConfig):
    root = Path(cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(root / "run.log", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        _setup_logging(cfg)
        log.info("%s with %s", args.command, cfg.to_dict())
        if args.command == "encode":
            cmd_encode(cfg)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "backtest":
            cmd_backtest(cfg, args.labels)
        else:
            cmd_run_all(cfg)
    except (PipelineError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

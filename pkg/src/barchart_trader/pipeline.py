"""Per-ticker pipeline stages: encode, train, backtest.

Every stage reads its inputs from and writes its artifacts to
``<output_dir>/<ticker>/``::

    train.dataset      labeled training images (+ #sep header)
    test.dataset       test-period images labeled with the training #sep
    class_counts.json
    model.bin          see neuralnet.serialization
    train_report.csv
    predictions.csv    date,label,p_hold,p_buy,p_sell
    ledger.csv, equity.csv, metrics.json, equity.svg
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .backtester import equity_to_csv, ledger_to_csv, simulate
from .chart_encoder import WINDOW, encode_batch, encode_windows, sliding_windows
from .config import PipelineConfig
from .errors import AlignmentError, InsufficientDataError, ParseError, ValidationError
from .labeler import (
    TrendLabel,
    build_reference_list,
    deserialize_dataset,
    label_dataset,
    read_separation,
    resample_balanced,
    separation_points,
    serialize_dataset,
)
from .market_data import PriceSeries, close_prices, read_csv, slice_by_date
from .metrics import MetricsReport, compute_report, report_to_json
from .neuralnet import read_model, train, write_model
from .neuralnet.model import predict_proba
from .plot import equity_svg

log = logging.getLogger(__name__)


def ticker_of(path) -> str:
    return Path(path).stem


def ticker_dir(cfg: PipelineConfig, ticker: str) -> Path:
    d = Path(cfg.output_dir) / ticker
    d.mkdir(parents=True, exist_ok=True)
    return d


def _prices(cfg: PipelineConfig, path, start, end) -> PriceSeries:
    series = read_csv(path)
    first, last = series.bars[0].date, series.bars[-1].date
    series = slice_by_date(series, start or first, end or last)
    return close_prices(series, cfg.use_adjusted)


def train_prices(cfg: PipelineConfig, path) -> PriceSeries:
    return _prices(cfg, path, cfg.train_start, cfg.train_end)


def test_prices(cfg: PipelineConfig, path) -> PriceSeries:
    if cfg.test_start is None and cfg.test_end is None:
        raise ValidationError("no test range configured")
    return _prices(cfg, path, cfg.test_start, cfg.test_end)


def encode(cfg: PipelineConfig, path) -> dict:
    """Write the train (and, if the test range allows, test) dataset files."""
    ticker = ticker_of(path)
    out = ticker_dir(cfg, ticker)
    prices = train_prices(cfg, path)
    windows = sliding_windows(prices, require_lookahead=True)
    sep = separation_points(build_reference_list(windows), cfg.first_fraction, cfg.second_fraction)
    dataset = label_dataset(windows, encode_windows(windows), sep)
    (out / "train.dataset").write_text(serialize_dataset(dataset), encoding="utf-8")
    counts = {"train": {l.name: c for l, c in dataset.class_counts().items()}}

    test_file = out / "test.dataset"
    if cfg.test_start is not None or cfg.test_end is not None:
        tp = test_prices(cfg, path)
        if len(tp) >= WINDOW + 15:
            tw = sliding_windows(tp, require_lookahead=True)
            test_ds = label_dataset(tw, encode_windows(tw), sep)
            test_file.write_text(serialize_dataset(test_ds), encoding="utf-8")
            counts["test"] = {l.name: c for l, c in test_ds.class_counts().items()}
        else:
            log.warning("%s: test range too short for labeled test windows", ticker)
            test_file.unlink(missing_ok=True)
    counts["separation"] = [sep.first, sep.second]
    (out / "class_counts.json").write_text(json.dumps(counts, sort_keys=True, indent=2) + "\n")
    return counts


def train_stage(cfg: PipelineConfig, path):
    ticker = ticker_of(path)
    out = ticker_dir(cfg, ticker)
    dataset = deserialize_dataset((out / "train.dataset").read_text(encoding="utf-8"))
    arch = cfg.model.architecture
    if arch.input_size != 30:
        raise ValidationError(f"dataset images are 30x30 but the model expects {arch.input_size}x{arch.input_size}")
    balanced = resample_balanced(dataset, cfg.seed)
    # no holdout here: training artifacts must not depend on test-period prices
    model, report = train(balanced, cfg.model_config)
    write_model(model, out / "model.bin")
    (out / "train_report.csv").write_text(report.to_csv())
    return model, report


def read_labels(path, dates) -> list[TrendLabel]:
    """Label override file: ``date,label`` rows, label as 0/1/2 or a name."""
    names = {l.name: l for l in TrendLabel}
    labels = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["date", "label"]:
            raise ParseError("labels file needs a 'date,label' header", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ParseError("expected date,label", line)
            raw = row[1].strip()
            if raw.upper() in names:
                labels[row[0].strip()] = names[raw.upper()]
            elif raw in ("0", "1", "2"):
                labels[row[0].strip()] = TrendLabel(int(raw))
            else:
                raise ParseError(f"invalid label {raw!r}", line)
    keys = [d.isoformat() for d in dates]
    missing = [k for k in keys if k not in labels]
    if missing or len(labels) != len(keys):
        raise AlignmentError(
            f"labels file must cover exactly the {len(keys)} evaluation days "
            f"({keys[0]}..{keys[-1]}); {len(missing)} missing"
        )
    return [labels[k] for k in keys]


@dataclass
class BacktestOutput:
    ticker: str
    report: MetricsReport
    labels: list
    test_accuracy: Optional[float]


def backtest_stage(cfg: PipelineConfig, path, labels_path=None) -> BacktestOutput:
    """Predict a label for each test-day window, simulate, and report.

    Evaluation days are the last days of the inference windows, i.e. the
    test range minus its first 29 days.
    """
    ticker = ticker_of(path)
    out = ticker_dir(cfg, ticker)
    prices = test_prices(cfg, path)
    if len(prices) < WINDOW:
        raise InsufficientDataError(f"{ticker}: test range has {len(prices)} days, need at least {WINDOW}")
    windows = sliding_windows(prices, require_lookahead=False)
    evaluation = prices.slice(WINDOW - 1, len(prices))

    probs = None
    if labels_path is not None:
        labels = read_labels(labels_path, evaluation.dates)
    else:
        model = read_model(out / "model.bin", expected=cfg.model.architecture)
        images = encode_batch(np.stack([w.closes for w in windows])).astype(np.float64)
        probs = predict_proba(model, images)
        labels = [TrendLabel(int(i)) for i in np.argmax(probs, axis=1)]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "label", "p_hold", "p_buy", "p_sell"])
    for i, (d, label) in enumerate(zip(evaluation.dates, labels)):
        p = [repr(float(v)) for v in probs[i]] if probs is not None else ["", "", ""]
        w.writerow([d.isoformat(), int(label)] + p)
    (out / "predictions.csv").write_text(buf.getvalue())

    result = simulate(evaluation, labels, cfg.backtest)
    report = compute_report(result)

    accuracy = None
    test_file = out / "test.dataset"
    if test_file.exists():
        truth = deserialize_dataset(test_file.read_text(encoding="utf-8"))
        by_date = {d: l for d, l in zip(evaluation.dates, labels)}
        hits = [by_date[s.end_date] == s.label for s in truth.samples if s.end_date in by_date]
        accuracy = float(np.mean(hits)) if hits else None

    (out / "ledger.csv").write_text(ledger_to_csv(result))
    (out / "equity.csv").write_text(equity_to_csv(result))
    (out / "metrics.json").write_text(report_to_json(report, ticker=ticker, test_accuracy=accuracy))
    if cfg.svg:
        bah = _bah_curve(evaluation, cfg)
        (out / "equity.svg").write_text(
            equity_svg({"CNN-BI": result.equity_curve, "Buy & Hold": bah}, title=f"{ticker} equity")
        )
    return BacktestOutput(ticker, report, labels, accuracy)


def _bah_curve(evaluation: PriceSeries, cfg: PipelineConfig):
    labels = [TrendLabel.HOLD] * len(evaluation)
    labels[0] = TrendLabel.BUY
    if len(labels) > 1:
        labels[-1] = TrendLabel.SELL
    return simulate(evaluation, labels, cfg.backtest).equity_curve


def separation_of(cfg: PipelineConfig, path):
    out = ticker_dir(cfg, ticker_of(path))
    with open(out / "train.dataset", encoding="utf-8") as fh:
        return read_separation(fh)

"""Pipeline configuration: JSON file plus command-line overrides.

Schema (every key optional except where the stage needs it)::

    {
      "inputs": ["data/JPM.csv", ...],
      "train_start": "1997-01-01", "train_end": "2006-12-31",
      "test_start": "2007-01-01",  "test_end": "2012-12-31",
      "price_channel": "adjusted" | "close",
      "first_fraction": "2/5", "second_fraction": "3/5",
      "seed": 0,
      "output_dir": "out",
      "jobs": 1,
      "svg": true,
      "model": {"epochs": 100, "batch_size": 1028, "learning_rate": 0.01,
                "optimizer": "sgd", "dropout_rates": [0.25, 0.5],
                "micro_batch": 64},
      "backtest": {"start_capital": 10000.0, "commission": 1.0,
                   "liquidate_at_end": true}
    }

``seed`` is the single global seed; it overrides ``model.seed`` and drives
resampling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .backtester import BacktestConfig
from .errors import ConfigError
from .neuralnet.model import ModelConfig


def _date(value, key) -> Optional[date]:
    if value is None or isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"{key}: malformed date {value!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...] = ()
    train_start: Optional[date] = None
    train_end: Optional[date] = None
    test_start: Optional[date] = None
    test_end: Optional[date] = None
    price_channel: str = "adjusted"
    first_fraction: Fraction = Fraction(2, 5)
    second_fraction: Fraction = Fraction(3, 5)
    seed: int = 0
    output_dir: str = "out"
    jobs: int = 1
    svg: bool = True
    model: ModelConfig = field(default_factory=ModelConfig)
    backtest: BacktestConfig = field(default_factory=BacktestConfig)

    @property
    def use_adjusted(self) -> bool:
        return self.price_channel == "adjusted"

    @property
    def model_config(self) -> ModelConfig:
        return replace(self.model, seed=self.seed)

    def validate(self) -> "PipelineConfig":
        if self.price_channel not in ("adjusted", "close"):
            raise ConfigError(f"price_channel must be 'adjusted' or 'close', got {self.price_channel!r}")
        if not 0 <= self.first_fraction <= self.second_fraction < 1:
            raise ConfigError("quantile fractions must satisfy 0 <= first <= second < 1")
        for a, b, what in (
            (self.train_start, self.train_end, "train"),
            (self.test_start, self.test_end, "test"),
        ):
            if a is not None and b is not None and a > b:
                raise ConfigError(f"{what} range starts after it ends")
        # training windows only see prices up to train_end, so their +15 day
        # lookahead can never reach into the test period
        if self.train_end is not None and self.test_start is not None and self.train_end >= self.test_start:
            raise ConfigError("train range must end before the test range starts")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "train_start": self.train_start.isoformat() if self.train_start else None,
            "train_end": self.train_end.isoformat() if self.train_end else None,
            "test_start": self.test_start.isoformat() if self.test_start else None,
            "test_end": self.test_end.isoformat() if self.test_end else None,
            "price_channel": self.price_channel,
            "first_fraction": str(self.first_fraction),
            "second_fraction": str(self.second_fraction),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "jobs": self.jobs,
            "svg": self.svg,
            "model": {k: v for k, v in self.model.to_dict().items() if k != "seed"},
            "backtest": {
                "start_capital": self.backtest.start_capital,
                "commission": self.backtest.commission,
                "liquidate_at_end": self.backtest.liquidate_at_end,
            },
        }


def from_dict(doc: dict) -> PipelineConfig:
    known = {f for f in PipelineConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = dict(doc)
    try:
        if "inputs" in kw:
            kw["inputs"] = tuple(str(p) for p in kw["inputs"])
        for key in ("train_start", "train_end", "test_start", "test_end"):
            if key in kw:
                kw[key] = _date(kw[key], key)
        for key in ("first_fraction", "second_fraction"):
            if key in kw:
                kw[key] = Fraction(str(kw[key]))
        if "model" in kw and isinstance(kw["model"], dict):
            kw["model"] = ModelConfig.from_dict(kw["model"])
        if "backtest" in kw and isinstance(kw["backtest"], dict):
            kw["backtest"] = BacktestConfig(**kw["backtest"])
        return PipelineConfig(**kw).validate()
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> PipelineConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return from_dict(doc)

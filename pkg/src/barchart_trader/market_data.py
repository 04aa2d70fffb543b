"""Daily OHLCV parsing, validation and slicing."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EmptySliceError, OrderingError, ParseError, ValidationError

COLUMNS = ("date", "open", "high", "low", "close", "adjusted_close", "volume")

_HEADER_ALIASES = {
    "date": "date",
    "open": "open",
    "high": "high",
    "low": "low",
    "close": "close",
    "adjclose": "adjusted_close",
    "adjustedclose": "adjusted_close",
    "volume": "volume",
}

_CSV_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")


@dataclass(frozen=True)
class OhlcvBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    adjusted_close: float
    volume: float

    def validate(self, row=None):
        prices = (self.open, self.high, self.low, self.close, self.adjusted_close)
        for p in prices:
            if not math.isfinite(p) or p <= 0:
                raise ValidationError(f"non-positive price {p!r} on {self.date}", row)
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise ValidationError(f"high/low do not bracket open/close on {self.date}", row)
        if not math.isfinite(self.volume) or self.volume < 0:
            raise ValidationError(f"negative volume on {self.date}", row)


@dataclass(frozen=True)
class OhlcvSeries:
    ticker: str
    bars: tuple[OhlcvBar, ...]

    def __post_init__(self):
        if not self.bars:
            raise EmptySliceError(f"series {self.ticker!r} has no bars")
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise OrderingError(f"dates not strictly increasing: {prev.date} then {cur.date}")

    def __len__(self):
        return len(self.bars)

    @property
    def dates(self) -> list[date]:
        return [b.date for b in self.bars]


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """A single price channel aligned to trading days."""

    ticker: str
    dates: tuple[date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        if prices.ndim != 1 or len(prices) != len(self.dates):
            raise ValidationError("dates and prices must have equal length")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValidationError("prices must be finite and positive")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))

    def __len__(self):
        return len(self.prices)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.ticker == other.ticker
            and self.dates == other.dates
            and np.array_equal(self.prices, other.prices)
        )

    def slice(self, start: int, stop: int) -> "PriceSeries":
        return PriceSeries(self.ticker, self.dates[start:stop], self.prices[start:stop])


def _canonical(name: str) -> str:
    key = "".join(ch for ch in name.strip().lower() if ch.isalnum())
    return _HEADER_ALIASES.get(key, key)


def _number(cell: str, column: str, line: int) -> float:
    text = cell.strip()
    if not text:
        raise ParseError(f"missing value in column {column!r}", line)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"malformed number {text!r} in column {column!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite number {text!r} in column {column!r}", line)
    return value


def parse_csv(text: str | Iterable[str], ticker: str = "") -> OhlcvSeries:
    """Parse a daily OHLCV CSV export.

    Column order is taken from the header, which must name all seven columns
    (``Adj Close``, ``adjusted_close`` and similar spellings are accepted).
    Line numbers in errors count the header as line 1.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input, header row required", 1) from None
    names = [_canonical(h) for h in header]
    missing = [c for c in COLUMNS if c not in names]
    if missing:
        raise ParseError(f"header missing columns {missing}", 1)
    pos = {c: names.index(c) for c in COLUMNS}

    bars = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, got {len(row)}", line)
        try:
            day = date.fromisoformat(row[pos["date"]].strip())
        except ValueError:
            raise ParseError(f"malformed date {row[pos['date']]!r}", line) from None
        values = {c: _number(row[pos[c]], c, line) for c in COLUMNS[1:]}
        bar = OhlcvBar(date=day, **values)
        bar.validate(row=line)
        if bars and day <= bars[-1].date:
            raise OrderingError(
                f"date {day} does not follow {bars[-1].date}", row=line
            )
        bars.append(bar)
    if not bars:
        raise EmptySliceError("no data rows")
    return OhlcvSeries(ticker, tuple(bars))


def to_csv(series: OhlcvSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for b in series.bars:
        writer.writerow(
            [b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low),
             repr(b.close), repr(b.adjusted_close), repr(b.volume)]
        )
    return buf.getvalue()


def slice_by_date(series: OhlcvSeries, start: date, end: date) -> OhlcvSeries:
    if start > end:
        raise ValueError(f"start {start} is after end {end}")
    bars = tuple(b for b in series.bars if start <= b.date <= end)
    if not bars:
        raise EmptySliceError(f"no bars of {series.ticker!r} between {start} and {end}")
    return OhlcvSeries(series.ticker, bars)


def close_prices(series: OhlcvSeries, use_adjusted: bool = True) -> PriceSeries:
    if use_adjusted:
        prices = [b.adjusted_close for b in series.bars]
    else:
        prices = [b.close for b in series.bars]
    return PriceSeries(series.ticker, tuple(series.dates), np.array(prices))


def read_csv(path, ticker: str | None = None) -> OhlcvSeries:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        return parse_csv(fh, ticker=ticker if ticker is not None else path.stem)

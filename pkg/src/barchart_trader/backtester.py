"""All-in / all-out long-only trading simulation driven by daily labels."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import AlignmentError, DegenerateTradeError, ValidationError
from .labeler import TrendLabel
from .market_data import PriceSeries


@dataclass(frozen=True)
class BacktestConfig:
    start_capital: float = 10_000.00
    commission: float = 1.00
    liquidate_at_end: bool = True

    def __post_init__(self):
        if not self.start_capital > 0:
            raise ValidationError("start_capital must be positive")
        if self.commission < 0:
            raise ValidationError("commission must be non-negative")


@dataclass(frozen=True)
class Transaction:
    buy_index: int
    sell_index: int
    buy_price: float
    sell_price: float
    shares: float
    capital_before: float  # cash committed at the buy, commission included
    capital_after: float  # cash after the sell, commission deducted
    forced: bool = False

    @property
    def gain(self) -> float:
        return self.capital_after - self.capital_before

    @property
    def length(self) -> int:
        return self.sell_index - self.buy_index

    @property
    def percent_return(self) -> float:
        return 100.0 * (self.capital_after - self.capital_before) / self.capital_before


@dataclass(frozen=True, eq=False)
class BacktestResult:
    transactions: tuple[Transaction, ...]
    equity_curve: np.ndarray
    prices: np.ndarray
    config: BacktestConfig
    dates: Optional[tuple[date, ...]] = None

    @property
    def final_capital(self) -> float:
        return float(self.equity_curve[-1])

    @property
    def total_days(self) -> int:
        return len(self.equity_curve)

    @property
    def total_transaction_length(self) -> int:
        return sum(t.length for t in self.transactions)


def simulate(prices, labels: Sequence[int], config: BacktestConfig = BacktestConfig()) -> BacktestResult:
    """Run the label-driven trading scenario at each day's close.

    Buy while flat invests all cash less one commission; Sell while invested
    sells every share and pays one commission. Hold, a Buy while invested,
    a Sell while flat and any label equal to the previous day's label do
    nothing. An open position is sold at the last close when
    ``config.liquidate_at_end`` is set, recorded with ``forced=True``.
    """
    dates = None
    if isinstance(prices, PriceSeries):
        dates = prices.dates
        prices = prices.prices
    prices = np.asarray(prices, dtype=np.float64)
    labels = [TrendLabel(int(l)) for l in labels]
    if prices.ndim != 1 or len(prices) == 0:
        raise AlignmentError("prices must be a non-empty 1-D sequence")
    if len(labels) != len(prices):
        raise AlignmentError(f"{len(labels)} labels for {len(prices)} prices")

    c = config.commission
    cash = config.start_capital
    shares = 0.0
    invested = False
    buy_index, buy_price, committed = 0, 0.0, 0.0
    previous = None
    ledger = []
    equity = np.empty(len(prices))

    for t, (price, label) in enumerate(zip(prices, labels)):
        price = float(price)
        if label != previous:
            if label is TrendLabel.BUY and not invested:
                if price <= c or cash <= c:
                    raise DegenerateTradeError(
                        f"day {t}: cannot buy at price {price} with cash {cash} and commission {c}"
                    )
                committed = cash
                shares = (cash - c) / price
                cash = 0.0
                invested = True
                buy_index, buy_price = t, price
            elif label is TrendLabel.SELL and invested:
                cash = shares * price - c
                ledger.append(Transaction(buy_index, t, buy_price, price, shares, committed, cash))
                shares = 0.0
                invested = False
        previous = label
        equity[t] = shares * price if invested else cash

    if invested and config.liquidate_at_end:
        t = len(prices) - 1
        price = float(prices[t])
        cash = shares * price - c
        ledger.append(Transaction(buy_index, t, buy_price, price, shares, committed, cash, forced=True))
        equity[t] = cash

    return BacktestResult(tuple(ledger), equity, prices, config, dates)


def ledger_to_csv(result: BacktestResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["number", "interval", "gain", "instant_capital", "forced"])
    for i, t in enumerate(result.transactions, start=1):
        w.writerow([i, f"{t.buy_index}-{t.sell_index}", f"{t.gain:.2f}", f"{t.capital_after:.2f}", int(t.forced)])
    return buf.getvalue()


def _money(x: float) -> str:
    sign = "-" if x < 0 else ""
    return f"{sign}${abs(x):,.2f}"


def ledger_table(result: BacktestResult) -> str:
    """Human-readable ledger: number, day interval, gain, running capital."""
    lines = ["Transaction Number | Interval (Day) | Gain | Instant Capital"]
    for i, t in enumerate(result.transactions, start=1):
        mark = " (forced)" if t.forced else ""
        lines.append(f"{i}, {t.buy_index}-{t.sell_index}, {_money(t.gain)}, {_money(t.capital_after)}{mark}")
    return "\n".join(lines) + "\n"


def equity_to_csv(result: BacktestResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "capital"])
    keys = result.dates if result.dates is not None else range(result.total_days)
    for key, value in zip(keys, result.equity_curve):
        w.writerow([key.isoformat() if isinstance(key, date) else key, repr(float(value))])
    return buf.getvalue()

"""Trade statistics for a backtest: returns, hit rate, drawdown and friends."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .backtester import BacktestConfig, BacktestResult, simulate
from .errors import DomainError
from .labeler import TrendLabel

TRADING_DAYS_PER_YEAR = 252
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class MetricsReport:
    ar: float  # strategy annualized return, %
    bah_ar: Optional[float]  # buy-and-hold annualized return, %
    ant: float  # transactions per year
    pos: float  # % of transactions with positive gain
    apt: float  # mean per-transaction return, %
    avg_length: float  # mean holding period, days
    mpt: float  # best transaction, %
    mlt: float  # worst transaction, %
    maxc: float
    minc: float
    idle_ratio: float  # % of days without a position
    mdd: float  # maximum drawdown of daily equity, %
    romad: Optional[float]  # total % return / mdd; None when mdd == 0
    transactions: int
    years: float

    def to_dict(self) -> dict:
        return asdict(self)


def annualized_return(total: float, start: float, years: float) -> float:
    if start <= 0 or years <= 0:
        raise DomainError("start capital and years must be positive")
    if total <= 0:
        raise DomainError(f"non-positive final capital {total}")
    return ((total / start) ** (1.0 / years) - 1.0) * 100.0


def years_from_result(result: BacktestResult) -> float:
    """Calendar span when dates are known, else trading days / 252."""
    if result.dates is not None and len(result.dates) > 1:
        span = (result.dates[-1] - result.dates[0]).days
        if span > 0:
            return span / DAYS_PER_YEAR
    return result.total_days / TRADING_DAYS_PER_YEAR


def buy_and_hold_return(prices, start_capital: float = 10_000.0, commission: float = 1.0, years: float = 1.0) -> float:
    prices = np.asarray(prices, dtype=np.float64)
    if prices.size == 0:
        raise DomainError("buy and hold needs at least one price")
    labels = [TrendLabel.HOLD] * len(prices)
    labels[0] = TrendLabel.BUY
    if len(prices) > 1:
        labels[-1] = TrendLabel.SELL
    result = simulate(prices, labels, BacktestConfig(start_capital, commission, liquidate_at_end=True))
    return annualized_return(result.final_capital, start_capital, years)


def max_drawdown(equity) -> float:
    """Largest peak-to-trough decline of ``equity`` in percent of the peak."""
    eq = np.asarray(equity, dtype=np.float64)
    if eq.size == 0:
        return 0.0
    peak = np.maximum.accumulate(eq)
    return float(np.max((peak - eq) / peak) * 100.0)


def compute_report(result: BacktestResult, years: Optional[float] = None) -> MetricsReport:
    if years is None:
        years = years_from_result(result)
    if years <= 0:
        raise DomainError("years must be positive")
    cfg = result.config
    txs = result.transactions
    count = len(txs)
    returns = [t.percent_return for t in txs]
    total_len = result.total_transaction_length
    days = result.total_days
    mdd = max_drawdown(result.equity_curve)
    total_pct = (result.final_capital / cfg.start_capital - 1.0) * 100.0
    return MetricsReport(
        ar=annualized_return(result.final_capital, cfg.start_capital, years),
        bah_ar=buy_and_hold_return(result.prices, cfg.start_capital, cfg.commission, years),
        ant=count / years,
        pos=100.0 * sum(1 for t in txs if t.gain > 0) / count if count else 0.0,
        apt=sum(returns) / count if count else 0.0,
        avg_length=total_len / count if count else 0.0,
        mpt=max(returns) if count else 0.0,
        mlt=min(returns) if count else 0.0,
        maxc=float(np.max(result.equity_curve)),
        minc=float(np.min(result.equity_curve)),
        idle_ratio=100.0 * (days - total_len) / days,
        mdd=mdd,
        romad=total_pct / mdd if mdd > 0 else None,
        transactions=count,
        years=years,
    )


def report_to_json(report: MetricsReport, **extra) -> str:
    doc = dict(extra)
    doc.update(report.to_dict())
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


TABLE2_COLUMNS = ("ticker", "cnn_bi_ar", "bah_ar")
TABLE3_COLUMNS = ("ticker",) + tuple(
    f.name for f in fields(MetricsReport) if f.name not in ("transactions", "years", "bah_ar")
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _mean(values):
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    return sum(vals) / len(vals) if vals else None


def _table(rows: Sequence[dict], columns, average: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    if average and rows:
        w.writerow(["Average"] + [_cell(_mean([r.get(c) for r in rows])) for c in columns[1:]])
    return buf.getvalue()


def table2_csv(reports: dict[str, MetricsReport], average: bool = True) -> str:
    """Strategy vs buy-and-hold annualized return, one row per ticker."""
    rows = [{"ticker": t, "cnn_bi_ar": r.ar, "bah_ar": r.bah_ar} for t, r in reports.items()]
    return _table(rows, TABLE2_COLUMNS, average)


def table3_csv(reports: dict[str, MetricsReport], average: bool = True) -> str:
    rows = [dict(r.to_dict(), ticker=t) for t, r in reports.items()]
    return _table(rows, TABLE3_COLUMNS, average)

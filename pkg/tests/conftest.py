import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from barchart_trader.market_data import PriceSeries  # noqa: E402
from barchart_trader.neuralnet import kernels  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def trading_days(n, start=date(2000, 1, 3)):
    """n consecutive weekdays."""
    days = []
    d = start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def price_series(prices, ticker="TEST", start=date(2000, 1, 3)):
    prices = np.asarray(prices, dtype=float)
    return PriceSeries(ticker, tuple(trading_days(len(prices), start)), prices)


def ohlcv_csv(closes, start=date(2000, 1, 3), adjusted=None):
    closes = np.asarray(closes, dtype=float)
    adjusted = closes if adjusted is None else np.asarray(adjusted, dtype=float)
    lines = ["Date,Open,High,Low,Close,Adj Close,Volume"]
    prev = float(closes[0])
    for d, c, a in zip(trading_days(len(closes), start), closes.tolist(), adjusted.tolist()):
        o = prev
        lines.append(f"{d.isoformat()},{o!r},{max(o, c) * 1.01!r},{min(o, c) * 0.99!r},{c!r},{a!r},100000")
        prev = c
    return "\n".join(lines) + "\n"


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    previous = kernels.BACKEND
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, title, detail = CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})")

from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barchart_trader.errors import EmptySliceError, OrderingError, ParseError, ValidationError
from barchart_trader.market_data import (
    OhlcvBar,
    OhlcvSeries,
    close_prices,
    parse_csv,
    read_csv,
    slice_by_date,
    to_csv,
)
from conftest import FIXTURES, ohlcv_csv

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def test_three_rows_parse_ascending():
    text = HEADER + (
        "2007-01-02,10,11,9,10.5,10.4,1000\n"
        "2007-01-03,10.5,12,10,11.5,11.4,1200\n"
        "2007-01-04,11.5,12,11,11.8,11.7,900\n"
    )
    s = parse_csv(text, ticker="ABC")
    assert len(s) == 3
    assert s.dates == [date(2007, 1, 2), date(2007, 1, 3), date(2007, 1, 4)]
    assert s.bars[1].adjusted_close == 11.4


def test_header_order_detected():
    text = "volume,Adj Close,close,LOW,high,open,date\n1000,10.4,10.5,9,11,10,2007-01-02\n"
    bar = parse_csv(text).bars[0]
    assert (bar.open, bar.high, bar.low, bar.close, bar.adjusted_close, bar.volume) == (10, 11, 9, 10.5, 10.4, 1000)


def test_negative_close_names_row():
    text = HEADER + "2007-01-02,10,11,9,10.5,10.4,1000\n2007-01-03,10,11,0.5,-1,10,1000\n"
    with pytest.raises(ValidationError) as exc:
        parse_csv(text)
    assert exc.value.row == 3


def test_out_of_order_dates():
    text = HEADER + "2007-01-03,10,11,9,10.5,10.4,1000\n2007-01-02,10,11,9,10.5,10.4,1000\n"
    with pytest.raises(OrderingError):
        parse_csv(text)


def test_duplicate_dates():
    text = HEADER + "2007-01-03,10,11,9,10.5,10.4,1000\n2007-01-03,10,11,9,10.5,10.4,1000\n"
    with pytest.raises(OrderingError):
        parse_csv(text)


@pytest.mark.parametrize(
    "row",
    ["2007-01-02,10,11,9,abc,10.4,1000", "2007-01-02,10,11,9,,10.4,1000", "2007-01-02,10,11,9,nan,10.4,1000"],
)
def test_malformed_number_reports_line(row):
    with pytest.raises(ParseError) as exc:
        parse_csv(HEADER + row + "\n")
    assert exc.value.line == 2


def test_high_low_must_bracket():
    with pytest.raises(ValidationError):
        parse_csv(HEADER + "2007-01-02,10,10.2,9,10.5,10.4,1000\n")


def test_missing_column():
    with pytest.raises(ParseError):
        parse_csv("Date,Open,High,Low,Close,Volume\n2007-01-02,10,11,9,10.5,1000\n")


def _series(n=10):
    return parse_csv(ohlcv_csv(np.linspace(10, 20, n)), ticker="T")


def test_slice_all_is_identity():
    s = _series()
    assert slice_by_date(s, s.dates[0], s.dates[-1]) == s


def test_slice_middle():
    s = _series()
    sub = slice_by_date(s, s.dates[3], s.dates[6])
    assert sub.bars == s.bars[3:7]


def test_slice_no_overlap():
    s = _series()
    with pytest.raises(EmptySliceError):
        slice_by_date(s, date(1990, 1, 1), date(1990, 2, 1))


def test_close_prices_channels():
    s = parse_csv(ohlcv_csv([10.0, 11.0, 12.0], adjusted=[9.0, 10.0, 11.0]))
    assert close_prices(s, use_adjusted=False).prices.tolist() == [10.0, 11.0, 12.0]
    assert close_prices(s, use_adjusted=True).prices.tolist() == [9.0, 10.0, 11.0]
    single = slice_by_date(s, s.dates[0], s.dates[0])
    assert len(close_prices(single)) == 1


def test_read_fixture_uses_stem_as_ticker():
    s = read_csv(FIXTURES / "FIXT.csv")
    assert s.ticker == "FIXT"
    assert len(s) == 320


@st.composite
def valid_series(draw):
    n = draw(st.integers(1, 25))
    price = st.floats(0.01, 1e5, allow_nan=False)
    start = draw(st.dates(date(1990, 1, 1), date(2020, 1, 1)))
    gaps = draw(st.lists(st.integers(1, 5), min_size=n, max_size=n))
    bars = []
    d = start
    for g in gaps:
        o, c, a = draw(price), draw(price), draw(price)
        hi = max(o, c) + draw(st.floats(0, 10))
        lo = min(o, c) * draw(st.floats(0.5, 1))
        bars.append(OhlcvBar(d, o, hi, lo, c, a, float(draw(st.integers(0, 10**9)))))
        d += timedelta(days=g)
    return OhlcvSeries("P", tuple(bars))


@settings(max_examples=60, deadline=None)
@given(valid_series())
def test_csv_round_trip(series):
    assert parse_csv(to_csv(series), ticker="P") == series


@settings(max_examples=40, deadline=None)
@given(valid_series(), st.data())
def test_slice_idempotent_and_channel_aligned(series, data):
    i = data.draw(st.integers(0, len(series) - 1))
    j = data.draw(st.integers(i, len(series) - 1))
    a, b = series.dates[i], series.dates[j]
    once = slice_by_date(series, a, b)
    assert slice_by_date(once, a, b) == once
    prices = close_prices(once)
    assert len(prices) == len(once)
    assert list(prices.dates) == once.dates

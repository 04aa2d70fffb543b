"""Sliding 30-day windows rendered as 30x30 binary bar-chart images.

Each image column is one day (column 0 oldest). The bar for that day is a
solid run of set pixels from row 0 (bottom) up to ``1 + round(v * 29)``
where ``v`` is the min-max normalized close inside the window.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError
from .market_data import PriceSeries

WINDOW = 30
SIZE = 30
REF_OFFSET = 4
CURRENT_OFFSET = 15


@dataclass(frozen=True, eq=False)
class PriceWindow:
    ticker: str
    end_index: int
    end_date: date
    closes: np.ndarray
    future_4: Optional[float] = None
    future_15: Optional[float] = None

    def __post_init__(self):
        if len(self.closes) != WINDOW:
            raise ValidationError(f"window needs {WINDOW} closes, got {len(self.closes)}")
        if self.future_15 is not None and self.future_4 is None:
            raise ValidationError("future_15 present without future_4")

    @property
    def has_lookahead(self) -> bool:
        return self.future_15 is not None


@dataclass(frozen=True, eq=False)
class ChartImage:
    """Boolean pixel grid indexed ``[row, column]`` with row 0 at the bottom."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=bool)
        if px.shape != (SIZE, SIZE):
            raise ValidationError(f"image must be {SIZE}x{SIZE}, got {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other):
        if not isinstance(other, ChartImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    @property
    def heights(self) -> np.ndarray:
        return self.pixels.sum(axis=0)

    def to_text(self) -> str:
        """30-line grid, top row first, ``#`` for set pixels."""
        rows = ["".join("#" if p else "." for p in self.pixels[r]) for r in range(SIZE - 1, -1, -1)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ChartImage":
        lines = [ln for ln in text.splitlines() if ln]
        if len(lines) != SIZE or any(len(ln) != SIZE for ln in lines):
            raise ParseError(f"text image must be {SIZE} lines of {SIZE} characters")
        grid = np.array([[ch == "#" for ch in ln] for ln in reversed(lines)])
        return cls(grid)


def sliding_windows(prices: PriceSeries, require_lookahead: bool) -> list[PriceWindow]:
    """Cut ``prices`` into all 30-day windows with a step of one day.

    With ``require_lookahead`` only windows whose +4 and +15 day prices exist
    are returned (training). Otherwise every window is returned and the
    future prices are attached where the series still has them.
    """
    n = len(prices)
    minimum = WINDOW + CURRENT_OFFSET if require_lookahead else WINDOW
    if n < minimum:
        raise InsufficientDataError(
            f"{prices.ticker or 'series'} has {n} prices, need at least {minimum}"
        )
    values = prices.prices
    last = n - 1 - CURRENT_OFFSET if require_lookahead else n - 1
    windows = []
    for end in range(WINDOW - 1, last + 1):
        f4 = float(values[end + REF_OFFSET]) if end + REF_OFFSET < n else None
        f15 = float(values[end + CURRENT_OFFSET]) if end + CURRENT_OFFSET < n else None
        windows.append(
            PriceWindow(
                ticker=prices.ticker,
                end_index=end,
                end_date=prices.dates[end],
                closes=values[end - WINDOW + 1 : end + 1],
                future_4=f4,
                future_15=f15,
            )
        )
    return windows


def normalize_window(closes) -> np.ndarray:
    c = np.asarray(closes, dtype=np.float64)
    if c.shape[-1] != WINDOW:
        raise ValidationError(f"window needs {WINDOW} closes, got {c.shape[-1]}")
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise ValidationError("window closes must be finite and positive")
    lo = c.min(axis=-1, keepdims=True)
    hi = c.max(axis=-1, keepdims=True)
    span = hi - lo
    flat = span == 0
    out = (c - lo) / np.where(flat, 1.0, span)
    return np.where(flat, 0.5, out)


def bar_heights(normalized) -> np.ndarray:
    """``1 + round_half_up(v * 29)`` per day; accepts ``(..., 30)`` arrays."""
    v = np.asarray(normalized, dtype=np.float64)
    if v.shape[-1] != WINDOW:
        raise ValidationError(f"expected {WINDOW} values, got {v.shape[-1]}")
    if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
        raise ValidationError("normalized values must lie in [0, 1]")
    return 1 + np.floor(v * (SIZE - 1) + 0.5).astype(np.int64)


def encode_image(normalized) -> ChartImage:
    heights = bar_heights(normalized)
    if heights.ndim != 1:
        raise ValidationError("encode_image takes a single window")
    rows = np.arange(SIZE)[:, None]
    return ChartImage(rows < heights[None, :])


def encode_batch(closes_matrix) -> np.ndarray:
    """Render many windows at once: ``(N, 30)`` closes to ``(N, 30, 30)`` bools."""
    heights = bar_heights(normalize_window(closes_matrix))
    rows = np.arange(SIZE)[None, :, None]
    return rows < heights[:, None, :]


def encode_windows(windows: list[PriceWindow]) -> list[ChartImage]:
    if not windows:
        return []
    grid = encode_batch(np.stack([w.closes for w in windows]))
    return [ChartImage(g) for g in grid]

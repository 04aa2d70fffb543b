"""Buy/Hold/Sell labeling from future price slopes, plus dataset files.

The reference list holds the 4-day-ahead slopes of every training window.
Its order statistics at ``floor(2n/5)`` and ``floor(3n/5)`` split the
15-day-ahead slope of each window into Sell / Hold / Buy.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .chart_encoder import CURRENT_OFFSET, REF_OFFSET, SIZE, ChartImage, PriceWindow
from .errors import (
    AlignmentError,
    EmptyClassError,
    InsufficientDataError,
    LookaheadMissingError,
    ParseError,
    ValidationError,
)

MIN_REFERENCE = 5
N_PIXELS = SIZE * SIZE


class TrendLabel(enum.IntEnum):
    HOLD = 0
    BUY = 1
    SELL = 2


@dataclass(frozen=True)
class SlopeReferenceList:
    slopes: tuple[float, ...]

    def __post_init__(self):
        if len(self.slopes) < MIN_REFERENCE:
            raise InsufficientDataError(
                f"reference list needs at least {MIN_REFERENCE} slopes, got {len(self.slopes)}"
            )
        if any(b < a for a, b in zip(self.slopes, self.slopes[1:])):
            raise ValidationError("reference slopes must be sorted ascending")

    def __len__(self):
        return len(self.slopes)


@dataclass(frozen=True)
class SeparationPoints:
    first: float
    second: float

    def __post_init__(self):
        if not (math.isfinite(self.first) and math.isfinite(self.second)):
            raise ValidationError("separation points must be finite")
        if self.first > self.second:
            raise ValidationError(f"first separation point {self.first} exceeds second {self.second}")


@dataclass(frozen=True)
class LabeledSample:
    image: ChartImage
    label: TrendLabel
    ticker: str
    end_date: date
    slope_current: float

    def __post_init__(self):
        if not math.isfinite(self.slope_current):
            raise ValidationError(f"non-finite slope for {self.end_date}")


@dataclass(frozen=True)
class LabeledDataset:
    samples: tuple[LabeledSample, ...]
    separation: SeparationPoints
    ticker: str
    start_date: Optional[date] = None
    end_date: Optional[date] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValidationError("dataset has no samples")
        if any(s.ticker != self.ticker for s in self.samples):
            raise ValidationError(f"all samples must belong to ticker {self.ticker!r}")

    def __len__(self):
        return len(self.samples)

    def class_counts(self) -> dict[TrendLabel, int]:
        counts = {label: 0 for label in TrendLabel}
        for s in self.samples:
            counts[s.label] += 1
        return counts

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Images as ``(N, 30, 30, 1)`` float64 and labels as int64."""
        x = np.stack([s.image.pixels for s in self.samples]).astype(np.float64)[..., None]
        y = np.array([int(s.label) for s in self.samples], dtype=np.int64)
        return x, y


def reference_slope(window: PriceWindow) -> float:
    if window.future_4 is None:
        raise LookaheadMissingError(f"window ending {window.end_date} has no +{REF_OFFSET} day price")
    return (window.future_4 - float(window.closes[-1])) / REF_OFFSET


def current_slope(window: PriceWindow) -> float:
    if window.future_15 is None:
        raise LookaheadMissingError(
            f"window ending {window.end_date} has no +{CURRENT_OFFSET} day price"
        )
    return (window.future_15 - float(window.closes[-1])) / CURRENT_OFFSET


def build_reference_list(windows: Iterable[PriceWindow]) -> SlopeReferenceList:
    slopes = [reference_slope(w) for w in windows]
    if len(slopes) < MIN_REFERENCE:
        raise InsufficientDataError(
            f"need at least {MIN_REFERENCE} windows with lookahead, got {len(slopes)}"
        )
    return SlopeReferenceList(tuple(sorted(slopes)))


def separation_points(
    ref: SlopeReferenceList,
    first_fraction: Fraction = Fraction(2, 5),
    second_fraction: Fraction = Fraction(3, 5),
) -> SeparationPoints:
    """Order statistics of the sorted reference slopes (0-based, floored)."""
    n = len(ref)
    first_fraction, second_fraction = Fraction(first_fraction), Fraction(second_fraction)
    if not (0 <= first_fraction <= second_fraction < 1):
        raise ValidationError("fractions must satisfy 0 <= first <= second < 1")
    i = math.floor(first_fraction * n)
    j = math.floor(second_fraction * n)
    return SeparationPoints(ref.slopes[i], ref.slopes[j])


def assign_label(slope_current: float, sep: SeparationPoints) -> TrendLabel:
    if not math.isfinite(slope_current):
        raise ValidationError(f"non-finite slope {slope_current!r}")
    if slope_current > sep.second:
        return TrendLabel.BUY
    if slope_current < sep.first:
        return TrendLabel.SELL
    return TrendLabel.HOLD


def label_dataset(
    windows: Sequence[PriceWindow],
    images: Sequence[ChartImage],
    sep: SeparationPoints,
) -> LabeledDataset:
    if len(windows) != len(images):
        raise AlignmentError(f"{len(windows)} windows but {len(images)} images")
    if not windows:
        raise ValidationError("no windows to label")
    samples = []
    for w, img in zip(windows, images):
        slope = current_slope(w)
        samples.append(LabeledSample(img, assign_label(slope, sep), w.ticker, w.end_date, slope))
    return LabeledDataset(
        tuple(samples), sep, windows[0].ticker, windows[0].end_date, windows[-1].end_date
    )


def resample_balanced(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Oversample minority classes with replacement up to the majority count.

    Originals keep their order; duplicates are appended grouped by class in
    label order (Hold, Buy, Sell).
    """
    by_class = {label: [] for label in TrendLabel}
    for i, s in enumerate(dataset.samples):
        by_class[s.label].append(i)
    empty = [label.name for label, idx in by_class.items() if not idx]
    if empty:
        raise EmptyClassError(f"cannot rebalance, no samples for {', '.join(empty)}")
    target = max(len(idx) for idx in by_class.values())
    rng = np.random.default_rng(seed)
    extra = []
    for label in TrendLabel:
        idx = by_class[label]
        need = target - len(idx)
        if need:
            picks = rng.integers(0, len(idx), size=need)
            extra.extend(dataset.samples[idx[p]] for p in picks)
    return LabeledDataset(
        dataset.samples + tuple(extra),
        dataset.separation,
        dataset.ticker,
        dataset.start_date,
        dataset.end_date,
    )


# Dataset file layout:
#   #dataset,<ticker>,<start date or empty>,<end date or empty>
#   #sep,<first>,<second>
#   then per sample a metadata comment and the pixel line:
#   #s,<end date>,<slope_current>
#   <label>,p0,...,p899       pixels row-major starting from the bottom row


def _sample_line(sample: LabeledSample) -> str:
    bits = sample.image.pixels.reshape(-1).astype(np.uint8)
    return f"{int(sample.label)}," + ",".join("1" if b else "0" for b in bits)


def serialize_dataset(dataset: LabeledDataset) -> str:
    buf = io.StringIO()
    start = dataset.start_date.isoformat() if dataset.start_date else ""
    end = dataset.end_date.isoformat() if dataset.end_date else ""
    buf.write(f"#dataset,{dataset.ticker},{start},{end}\n")
    buf.write(f"#sep,{dataset.separation.first!r},{dataset.separation.second!r}\n")
    for s in dataset.samples:
        buf.write(f"#s,{s.end_date.isoformat()},{s.slope_current!r}\n")
        buf.write(_sample_line(s))
        buf.write("\n")
    return buf.getvalue()


def _parse_float(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"malformed number {text!r}", line) from None


def _parse_date(text: str, line: int) -> Optional[date]:
    if not text:
        return None
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ParseError(f"malformed date {text!r}", line) from None


def read_separation(text: str | Iterable[str]) -> SeparationPoints:
    """Separation points from the ``#sep`` header of a dataset file."""
    lines = io.StringIO(text) if isinstance(text, str) else text
    for lineno, raw in enumerate(lines, start=1):
        if raw.startswith("#sep,"):
            parts = raw.strip().split(",")
            if len(parts) != 3:
                raise ParseError("#sep line needs two values", lineno)
            return SeparationPoints(_parse_float(parts[1], lineno), _parse_float(parts[2], lineno))
    raise ParseError("no #sep header found")


def deserialize_dataset(text: str | Iterable[str]) -> LabeledDataset:
    lines = io.StringIO(text) if isinstance(text, str) else text
    ticker, start, end, sep = "", None, None, None
    meta = None
    samples = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        if line.startswith("#"):
            parts = line.split(",")
            tag = parts[0]
            if tag == "#dataset":
                if len(parts) != 4:
                    raise ParseError("#dataset line needs ticker, start, end", lineno)
                ticker = parts[1]
                start, end = _parse_date(parts[2], lineno), _parse_date(parts[3], lineno)
            elif tag == "#sep":
                if len(parts) != 3:
                    raise ParseError("#sep line needs two values", lineno)
                sep = SeparationPoints(_parse_float(parts[1], lineno), _parse_float(parts[2], lineno))
            elif tag == "#s":
                if len(parts) != 3:
                    raise ParseError("#s line needs end date and slope", lineno)
                meta = (_parse_date(parts[1], lineno), _parse_float(parts[2], lineno))
            continue
        cells = line.split(",")
        if len(cells) != N_PIXELS + 1:
            raise ParseError(f"expected label and {N_PIXELS} pixels, got {len(cells) - 1} pixels", lineno)
        if cells[0] not in ("0", "1", "2"):
            raise ParseError(f"invalid label {cells[0]!r}", lineno)
        try:
            bits = np.array([{"0": False, "1": True}[c] for c in cells[1:]])
        except KeyError:
            raise ParseError("pixel values must be 0 or 1", lineno) from None
        end_date, slope = meta if meta is not None else (date.min, 0.0)
        meta = None
        samples.append(
            LabeledSample(
                ChartImage(bits.reshape(SIZE, SIZE)), TrendLabel(int(cells[0])), ticker, end_date, slope
            )
        )
    if sep is None:
        raise ParseError("dataset file has no #sep header")
    if not samples:
        raise ParseError("dataset file has no samples")
    return LabeledDataset(tuple(samples), sep, ticker, start, end)

"""Parsing, validation, alignment, and synthesis of weekly search-interest datasets.

Input files are Google-Trends-style "multiTimeline" CSV exports; the canonical
on-disk form produced by :func:`to_canonical_csv` is a plain wide CSV with a
``week`` column followed by one column per keyword.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from datetime import date, timedelta

import numpy as np

from .errors import (
    AlignmentError,
    DuplicateKeyword,
    EmptyDataset,
    InvalidSpec,
    ParseError,
)

WEEK = timedelta(days=7)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One keyword's weekly interest values with aligned timestamps.

    Values are stored as floats even though raw exports are integers: the
    downstream transforms (z-scores, segment means) produce reals immediately.
    The instance is immutable; the value buffer is marked read-only.
    """

    keyword: str
    timestamps: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) != len(self.timestamps):
            raise ValueError(
                f"series {self.keyword!r}: {len(vals)} values for "
                f"{len(self.timestamps)} timestamps"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.keyword == other.keyword
            and self.timestamps == other.timestamps
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of series sharing one weekly time axis."""

    series: tuple[TimeSeries, ...]
    time_axis: tuple[date, ...]

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "time_axis", tuple(self.time_axis))

    @classmethod
    def from_series(cls, series) -> "Dataset":
        series = tuple(series)
        if not series:
            raise EmptyDataset("dataset has no series")
        return cls(series=series, time_axis=series[0].timestamps)

    @property
    def keywords(self) -> tuple[str, ...]:
        return tuple(s.keyword for s in self.series)

    def __len__(self) -> int:
        return len(self.series)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.time_axis == other.time_axis and self.series == other.series


@dataclass(frozen=True)
class SeriesReport:
    keyword: str
    range_ok: bool
    spacing_ok: bool
    missing_count: int


@dataclass(frozen=True)
class ValidationReport:
    """Per-series and dataset-level validation flags; never raises."""

    series: tuple[SeriesReport, ...]
    aligned: bool
    duplicate_keywords: bool

    @property
    def ok(self) -> bool:
        return (
            self.aligned
            and not self.duplicate_keywords
            and all(s.range_ok and s.spacing_ok and s.missing_count == 0 for s in self.series)
        )


def _parse_cell(cell: str, line: int) -> float:
    cell = cell.strip()
    if cell == "<1":
        return 0.0
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric value {cell!r}", line=line) from None


def parse_trends_csv(text: str) -> Dataset:
    """Parse a Google Trends multiTimeline export (or a canonical dataset CSV).

    Tolerates the optional two-line preamble ("Category: ..." then a blank
    line). Keywords are the header text up to the first ":": the region
    suffix is metadata, not identity. Cells reading "<1" parse as 0.
    """
    reader = csv.reader(io.StringIO(text))
    rows: list[tuple[int, list[str]]] = []
    for cells in reader:
        if not cells or all(c.strip() == "" for c in cells):
            continue
        rows.append((reader.line_num, cells))

    if rows and rows[0][1][0].strip().lower().startswith("category"):
        rows = rows[1:]
    if not rows:
        raise EmptyDataset("no header row found")

    header_line, header = rows[0]
    if header[0].strip().lower() != "week":
        raise ParseError(f"expected 'Week' in first column, got {header[0]!r}", line=header_line)
    keywords = [cell.split(":", 1)[0].strip() for cell in header[1:]]
    if not keywords or any(k == "" for k in keywords):
        raise ParseError("empty keyword in header", line=header_line)
    if len(set(keywords)) != len(keywords):
        dupes = sorted({k for k in keywords if keywords.count(k) > 1})
        raise DuplicateKeyword(f"duplicate keyword column(s): {', '.join(dupes)}")

    timestamps: list[date] = []
    columns: list[list[float]] = [[] for _ in keywords]
    for line, cells in rows[1:]:
        if len(cells) != len(keywords) + 1:
            raise ParseError(
                f"expected {len(keywords) + 1} cells, got {len(cells)}", line=line
            )
        try:
            timestamps.append(date.fromisoformat(cells[0].strip()))
        except ValueError:
            raise ParseError(f"malformed date {cells[0]!r}", line=line) from None
        for col, cell in zip(columns, cells[1:]):
            col.append(_parse_cell(cell, line))

    if not timestamps:
        raise EmptyDataset("no data rows after header")

    axis = tuple(timestamps)
    series = tuple(
        TimeSeries(keyword=kw, timestamps=axis, values=np.array(col))
        for kw, col in zip(keywords, columns)
    )
    return Dataset(series=series, time_axis=axis)


def _format_value(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_canonical_csv(d: Dataset) -> str:
    """Emit the canonical wide CSV: header ``week,<kw1>,<kw2>,...``, ISO dates."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["week"] + list(d.keywords))
    for i, ts in enumerate(d.time_axis):
        writer.writerow([ts.isoformat()] + [_format_value(s.values[i]) for s in d.series])
    return buf.getvalue()


def merge(parts: list[Dataset]) -> Dataset:
    """Combine per-keyword datasets, intersecting time axes to the common range.

    Downstream transforms need gap-free aligned series, so axes are truncated
    to [max of starts, min of ends] rather than padded.
    """
    if not parts:
        raise EmptyDataset("nothing to merge")
    for p in parts:
        if not p.series:
            raise EmptyDataset("cannot merge an empty dataset")

    seen: set[str] = set()
    for p in parts:
        for kw in p.keywords:
            if kw in seen:
                raise DuplicateKeyword(f"keyword {kw!r} appears in more than one part")
            seen.add(kw)

    start = max(p.time_axis[0] for p in parts)
    end = min(p.time_axis[-1] for p in parts)
    if start > end:
        raise AlignmentError(f"date ranges are disjoint ({start} > {end})")

    merged_axis: tuple[date, ...] | None = None
    series: list[TimeSeries] = []
    for p in parts:
        keep = [i for i, t in enumerate(p.time_axis) if start <= t <= end]
        axis = tuple(p.time_axis[i] for i in keep)
        if merged_axis is None:
            merged_axis = axis
        elif axis != merged_axis:
            raise AlignmentError("weekly grids do not coincide on the common date range")
        for s in p.series:
            series.append(
                TimeSeries(keyword=s.keyword, timestamps=axis, values=s.values[keep])
            )
    assert merged_axis is not None
    return Dataset(series=tuple(series), time_axis=merged_axis)


def validate(d: Dataset) -> ValidationReport:
    """Check range/spacing/missing-value invariants. Reports, never throws."""
    reports = []
    for s in d.series:
        finite = s.values[np.isfinite(s.values)]
        range_ok = bool(np.all((finite >= 0.0) & (finite <= 100.0)))
        spacing_ok = all(
            b - a == WEEK for a, b in zip(s.timestamps, s.timestamps[1:])
        )
        missing = int(np.count_nonzero(~np.isfinite(s.values)))
        reports.append(
            SeriesReport(
                keyword=s.keyword,
                range_ok=range_ok,
                spacing_ok=spacing_ok,
                missing_count=missing,
            )
        )
    aligned = all(s.timestamps == d.time_axis for s in d.series)
    duplicates = len(set(d.keywords)) != len(d.keywords)
    return ValidationReport(
        series=tuple(reports), aligned=aligned, duplicate_keywords=duplicates
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Component recipe for a synthetic weekly series.

    The composed signal is ``base + trend_slope*t + seasonal + spikes + noise``
    clipped to [0, 100]; the seasonal term uses ``t mod period`` so integer
    periods repeat exactly.
    """

    keyword: str = "synthetic"
    base: float = 50.0
    trend_slope: float = 0.0
    seasonal_amplitude: float = 0.0
    seasonal_period: float = 52.0
    spikes: tuple[tuple[int, float], ...] = ()
    noise_sigma: float = 0.0
    start: date = date(2020, 4, 12)


def synthetic_components(spec: SyntheticSpec, length: int) -> np.ndarray:
    """Deterministic (noise-free, unclipped) part of the synthetic signal."""
    t = np.arange(length, dtype=float)
    out = spec.base + spec.trend_slope * t
    if spec.seasonal_amplitude != 0.0:
        phase = np.mod(t, spec.seasonal_period) / spec.seasonal_period
        out = out + spec.seasonal_amplitude * np.sin(2.0 * np.pi * phase)
    for week, height in spec.spikes:
        if 0 <= week < length:
            out[week] += height
    return out


def generate_synthetic(spec: SyntheticSpec, length: int, seed: int) -> TimeSeries:
    """Generate a deterministic synthetic series from component parameters."""
    if length < 2:
        raise InvalidSpec(f"length must be >= 2, got {length}")
    if spec.seasonal_period <= 0:
        raise InvalidSpec("seasonal_period must be positive")
    if spec.noise_sigma < 0:
        raise InvalidSpec("noise_sigma must be non-negative")

    values = synthetic_components(spec, length)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, spec.noise_sigma, size=length)
    values = np.clip(values, 0.0, 100.0)
    timestamps = tuple(spec.start + WEEK * i for i in range(length))
    return TimeSeries(keyword=spec.keyword, timestamps=timestamps, values=values)


def archetype_dataset(seed: int, length: int = 262) -> Dataset:
    """A 20-series fixture mixing the standard weekly-interest archetypes.

    Stable-seasonal, trending, spiky, and chaotic series, plus a pair of
    near-duplicate twins (same components, independent low-sigma noise) that
    any sane clustering should keep together.
    """
    rng = np.random.default_rng(seed)
    specs: list[SyntheticSpec] = []
    for i in range(6):
        specs.append(
            SyntheticSpec(
                keyword=f"seasonal_{i:02d}",
                base=45.0 + 6.0 * i,
                seasonal_amplitude=8.0 + 3.0 * i,
                seasonal_period=26.0 if i % 2 else 52.0,
                noise_sigma=1.5,
            )
        )
    for i in range(2):
        specs.append(
            SyntheticSpec(
                keyword=f"trend_up_{i:02d}",
                base=25.0 + 10.0 * i,
                trend_slope=0.12 + 0.05 * i,
                seasonal_amplitude=4.0,
                noise_sigma=2.0,
            )
        )
    for i in range(2):
        specs.append(
            SyntheticSpec(
                keyword=f"trend_down_{i:02d}",
                base=80.0 - 5.0 * i,
                trend_slope=-0.10 - 0.04 * i,
                seasonal_amplitude=4.0,
                noise_sigma=2.0,
            )
        )
    for i in range(4):
        weeks = tuple(int(w) for w in rng.integers(10, max(11, length - 10), size=4))
        heights = tuple(float(h) for h in rng.uniform(30.0, 50.0, size=4))
        specs.append(
            SyntheticSpec(
                keyword=f"spiky_{i:02d}",
                base=35.0 + 4.0 * i,
                spikes=tuple(zip(weeks, heights)),
                noise_sigma=3.0,
            )
        )
    for i in range(4):
        specs.append(
            SyntheticSpec(
                keyword=f"chaotic_{i:02d}",
                base=50.0,
                noise_sigma=12.0 + 3.0 * i,
            )
        )
    twin = SyntheticSpec(
        keyword="twin_a",
        base=55.0,
        seasonal_amplitude=18.0,
        seasonal_period=52.0,
        noise_sigma=0.4,
    )
    specs.append(twin)

    series = [generate_synthetic(s, length, seed=seed + 101 + i) for i, s in enumerate(specs)]
    series.append(
        generate_synthetic(replace(twin, keyword="twin_b"), length, seed=seed + 997)
    )
    return Dataset.from_series(series)

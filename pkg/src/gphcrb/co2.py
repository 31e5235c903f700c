"""Ingestion of the NOAA Mauna Loa monthly CO2 text format.

The classic ``co2_mm_mlo.txt`` layout: '#'-prefixed comment lines, then
whitespace-delimited rows of

    year  month  decimal_date  average  interpolated  [trend  days ...]

A -99.99 sentinel in the average column marks a missing monthly average;
the interpolated column is used instead, which is the file's own
documented convention. The repository bundles a snapshot under
``gphcrb/data`` so tests and the CO2 study are reproducible offline;
:func:`fetch_snapshot` refreshes it from NOAA when a network is
available.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional

import numpy as np

from .errors import DataGap, DuplicateMonth, MalformedRow
from .gp import Dataset

MISSING_SENTINEL = -99.99
SNAPSHOT_NAME = "co2_mm_mlo.txt"
NOAA_URL = "https://gml.noaa.gov/webdata/ccgg/trends/co2/co2_mm_mlo.txt"


@dataclass(frozen=True)
class Co2Record:
    year: int
    month: int
    decimal_date: float
    average_ppm: Optional[float]  # None when the sentinel was present
    interpolated_ppm: float

    def __post_init__(self):
        if not (1950 <= self.year <= 2100):
            raise MalformedRow(0, f"year {self.year} outside plausible range")
        if not (1 <= self.month <= 12):
            raise MalformedRow(0, f"month {self.month} outside 1..12")
        if self.interpolated_ppm <= 0:
            raise MalformedRow(0, f"interpolated ppm {self.interpolated_ppm} <= 0")

    @property
    def value_used(self) -> float:
        return self.average_ppm if self.average_ppm is not None else self.interpolated_ppm


def parse_co2(source) -> list[Co2Record]:
    """Parse NOAA-format text into validated monthly records.

    ``source`` may be a string or any iterable of lines. Records come
    back sorted by decimal date; duplicated months are rejected.
    """
    if isinstance(source, str):
        lines: Iterable[str] = io.StringIO(source)
    else:
        lines = source
    records = []
    seen = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 5:
            raise MalformedRow(line_no, f"expected at least 5 columns, got {len(parts)}")
        try:
            year = int(parts[0])
            month = int(parts[1])
            decimal_date = float(parts[2])
            average = float(parts[3])
            interpolated = float(parts[4])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        key = (year, month)
        if key in seen:
            raise DuplicateMonth(f"{year}-{month:02d} appears twice (line {line_no})")
        seen.add(key)
        missing = abs(average - MISSING_SENTINEL) < 1e-9
        try:
            rec = Co2Record(
                year=year,
                month=month,
                decimal_date=decimal_date,
                average_ppm=None if missing else average,
                interpolated_ppm=interpolated,
            )
        except MalformedRow as exc:
            raise MalformedRow(line_no, str(exc)) from None
        records.append(rec)
    records.sort(key=lambda r: r.decimal_date)
    return records


def _month_range(from_ym: tuple, to_ym: tuple):
    y, m = from_ym
    if (y, m) > tuple(to_ym):
        raise DataGap(f"window {from_ym}..{to_ym} is not ordered")
    while (y, m) <= tuple(to_ym):
        yield (y, m)
        m += 1
        if m > 12:
            y, m = y + 1, 1


def window(records: list[Co2Record], from_ym: tuple, to_ym: tuple) -> Dataset:
    """Restrict to an inclusive (year, month) window as a Dataset.

    xs are decimal dates, ys the monthly values (average, or the
    interpolated fallback). Raises DataGap if any month in the range is
    absent.
    """
    by_month = {(r.year, r.month): r for r in records}
    xs, ys = [], []
    for ym in _month_range(tuple(from_ym), tuple(to_ym)):
        rec = by_month.get(ym)
        if rec is None:
            raise DataGap(f"month {ym[0]}-{ym[1]:02d} missing from records")
        xs.append(rec.decimal_date)
        ys.append(rec.value_used)
    return Dataset(xs=np.asarray(xs), ys=np.asarray(ys))


def to_normalized_csv(records: list[Co2Record]) -> str:
    """Normalized `year,month,decimal_date,ppm` CSV of the used values."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "month", "decimal_date", "ppm"])
    for r in records:
        w.writerow([r.year, r.month, f"{r.decimal_date:.4f}", f"{r.value_used:.2f}"])
    return buf.getvalue()


def from_normalized_csv(text: str) -> list[Co2Record]:
    rows = list(csv.reader(io.StringIO(text)))
    records = []
    for row in rows[1:]:
        if not row:
            continue
        records.append(
            Co2Record(
                year=int(row[0]),
                month=int(row[1]),
                decimal_date=float(row[2]),
                average_ppm=float(row[3]),
                interpolated_ppm=float(row[3]),
            )
        )
    return records


def load_snapshot() -> list[Co2Record]:
    """Parse the snapshot bundled with the package."""
    text = resources.files("gphcrb").joinpath("data", SNAPSHOT_NAME).read_text()
    return parse_co2(text)


def fetch_snapshot(dest: str, url: str = NOAA_URL) -> None:
    """Refresh the snapshot from NOAA (needs network; tests never call this)."""
    import urllib.request

    with urllib.request.urlopen(url) as resp:
        text = resp.read().decode("utf-8")
    parse_co2(text)  # validate before replacing anything
    with open(dest, "w") as fh:
        fh.write(text)

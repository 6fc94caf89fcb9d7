"""CSV readers and writers for implied-vol quotes and daily return series.

Quotes: ``maturity_years,strike,implied_vol,weight``.
Returns: ``date,log_return`` with ISO-8601 dates.
Files are UTF-8 with LF newlines; floats are written with ``repr`` so a
write followed by a read reproduces every value exactly.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

QUOTE_HEADER = "maturity_years,strike,implied_vol,weight"
RETURN_HEADER = "date,log_return"
TRADING_DAYS = 252


@dataclass(frozen=True)
class VolQuote:
    T: float
    K: float
    implied_vol: float
    weight: float = 1.0

    def __post_init__(self):
        if not (self.T > 0 and self.K > 0 and self.implied_vol > 0):
            raise ValueError("quote needs T > 0, K > 0 and implied_vol > 0")
        if not self.weight >= 0:
            raise ValueError("quote weight must be >= 0")


@dataclass
class ReturnSeries:
    returns: np.ndarray
    dt: float = 1.0 / TRADING_DAYS
    dates: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 1 or not np.all(np.isfinite(self.returns)):
            raise ValueError("returns must be a finite 1-d sequence")
        if not self.dt > 0:
            raise ValueError("observation interval must be > 0")

    def __len__(self):
        return self.returns.size


def _lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return text.split("\n")


def _check_header(lines, expected, path):
    if not lines or lines[0].strip("\r").lstrip("﻿") != expected:
        raise ParseError(f"{path}: expected header '{expected}'", line=1)


def _float(text: str, name: str, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{name} is not a number: {text!r}", line=lineno, field=name) from None
    if not math.isfinite(v):
        raise ParseError(f"{name} is not finite: {text!r}", line=lineno, field=name)
    return v


def load_quotes(path) -> list[VolQuote]:
    lines = _lines(path)
    _check_header(lines, QUOTE_HEADER, path)
    out = []
    for lineno, raw in enumerate(lines[1:], start=2):
        row = raw.strip("\r")
        if not row.strip():
            continue
        cols = row.split(",")
        if len(cols) != 4:
            raise ParseError(f"expected 4 columns, got {len(cols)}", line=lineno)
        T, K, vol, w = (_float(c, n, lineno) for c, n in zip(cols, ("maturity_years", "strike", "implied_vol", "weight")))
        for name, v, ok in (("maturity_years", T, T > 0), ("strike", K, K > 0),
                            ("implied_vol", vol, vol > 0), ("weight", w, w >= 0)):
            if not ok:
                raise ParseError(f"{name} out of range: {v!r}", line=lineno, field=name)
        out.append(VolQuote(T, K, vol, w))
    return out


def write_quotes(path, quotes) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(QUOTE_HEADER + "\n")
        for q in quotes:
            fh.write(",".join(repr(float(v)) for v in (q.T, q.K, q.implied_vol, q.weight)) + "\n")


def load_returns(path, dt_years: float = 1.0 / TRADING_DAYS) -> ReturnSeries:
    lines = _lines(path)
    _check_header(lines, RETURN_HEADER, path)
    dates, rets = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        row = raw.strip("\r")
        if not row.strip():
            continue
        cols = row.split(",")
        if len(cols) != 2:
            raise ParseError(f"expected 2 columns, got {len(cols)}", line=lineno)
        try:
            dt.date.fromisoformat(cols[0])
        except ValueError:
            raise ParseError(f"date is not ISO-8601: {cols[0]!r}", line=lineno, field="date") from None
        dates.append(cols[0])
        rets.append(_float(cols[1], "log_return", lineno))
    return ReturnSeries(np.array(rets), dt_years, dates)


def write_returns(path, series: ReturnSeries, start: dt.date = dt.date(2000, 1, 3)) -> None:
    """Write the series; missing dates are filled with consecutive weekdays from ``start``."""
    dates = list(series.dates)
    day = start
    while len(dates) < len(series):
        while day.weekday() >= 5:
            day += dt.timedelta(days=1)
        dates.append(day.isoformat())
        day += dt.timedelta(days=1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RETURN_HEADER + "\n")
        for d, r in zip(dates, series.returns):
            fh.write(f"{d},{float(r)!r}\n")

"""Return analytics over an aligned hourly price panel."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindow, NonPositivePrice, TooFewObservations, UnknownAsset

HOUR = 3600
UNDEFINED = "undefined"


@dataclass
class PricePanel:
    timestamps: np.ndarray  # (T,) epoch seconds, hourly
    assets: list
    close: np.ndarray  # (N, T)
    fill_flags: np.ndarray  # (N, T) bool

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.close = np.asarray(self.close, dtype=float)
        if self.fill_flags is None:
            self.fill_flags = np.zeros(self.close.shape, dtype=bool)
        n, t = self.close.shape
        if n != len(self.assets) or t != len(self.timestamps):
            raise ValueError("panel shape does not match assets/timestamps")
        if n < 1 or t < 2:
            raise ValueError("panel needs at least one asset and two timestamps")
        if np.any(np.diff(self.timestamps) != HOUR):
            raise ValueError("panel timestamps must be spaced by exactly one hour")
        if not np.all(self.close > 0):
            raise NonPositivePrice("panel closes must be positive")


@dataclass
class ReturnPanel:
    timestamps: np.ndarray  # (T-1,), each return labelled by its later hour
    assets: list
    returns: np.ndarray  # (N, T-1)

    def row(self, asset: str) -> np.ndarray:
        try:
            return self.returns[self.assets.index(asset)]
        except ValueError:
            raise UnknownAsset(f"asset {asset!r} not in panel") from None


@dataclass
class MarketReturnSeries:
    timestamps: np.ndarray
    values: np.ndarray


@dataclass
class DescriptiveStats:
    mean: float
    median: float
    std: float
    skewness: float | None  # None when the variance is zero
    kurtosis: float | None
    min: float
    max: float
    n: int


def log_returns(panel: PricePanel) -> ReturnPanel:
    if not np.all(panel.close > 0):
        raise NonPositivePrice("log-returns need positive prices")
    lp = np.log(panel.close)
    return ReturnPanel(panel.timestamps[1:].copy(), list(panel.assets), np.diff(lp, axis=1))


def rescale(panel: PricePanel) -> np.ndarray:
    return panel.close / panel.close[:, :1]


def market_return(rp: ReturnPanel) -> MarketReturnSeries:
    """Equally weighted mean return per hour.

    Averaged as offsets from the first asset so that a panel of identical
    assets reproduces their common return bit for bit.
    """
    r = rp.returns
    return MarketReturnSeries(rp.timestamps.copy(), r[0] + (r - r[0]).mean(axis=0))


def _describe_values(x: np.ndarray, excess: bool = False) -> DescriptiveStats:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        raise TooFewObservations(f"need at least 4 observations, got {n}")
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d ** 2)
    if m2 > 0:
        skew = float(np.mean(d ** 3) / m2 ** 1.5)
        kurt = float(np.mean(d ** 4) / m2 ** 2) - (3.0 if excess else 0.0)
    else:
        skew = kurt = None
    return DescriptiveStats(
        mean=float(mean),
        median=float(np.median(x)),
        std=float(np.sqrt(np.sum(d ** 2) / (n - 1))),
        skewness=skew,
        kurtosis=kurt,
        min=float(x.min()),
        max=float(x.max()),
        n=n,
    )


def describe(rp: ReturnPanel, asset: str, excess_kurtosis: bool = False) -> DescriptiveStats:
    """Sample moments of one asset's returns.

    std uses the n-1 denominator; skewness is m3/m2^1.5 and kurtosis m4/m2^2
    (raw unless ``excess_kurtosis``), both from biased central moments.
    """
    return _describe_values(rp.row(asset), excess_kurtosis)


def describe_series(values, excess_kurtosis: bool = False) -> DescriptiveStats:
    return _describe_values(values, excess_kurtosis)


def average_returns(rp: ReturnPanel, start: int, end: int) -> dict:
    """Per-asset mean of returns stamped inside the closed interval [start, end]."""
    mask = (rp.timestamps >= start) & (rp.timestamps <= end)
    if not mask.any():
        raise EmptyWindow(f"no returns stamped in [{start}, {end}]")
    means = rp.returns[:, mask].mean(axis=1)
    return {a: float(m) for a, m in zip(rp.assets, means)}


def rank_returns(averages: dict, descending: bool = False) -> list[tuple[str, float]]:
    return sorted(averages.items(), key=lambda kv: (-kv[1] if descending else kv[1], kv[0]))


def _g6(x) -> str:
    return UNDEFINED if x is None else f"{x:.6g}"


def stats_csv(rows: list[tuple[str, DescriptiveStats]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["asset", "mean", "median", "std", "skewness", "kurtosis", "min", "max"])
    for name, s in rows:
        w.writerow([name] + [_g6(v) for v in (s.mean, s.median, s.std, s.skewness, s.kurtosis, s.min, s.max)])
    return buf.getvalue()

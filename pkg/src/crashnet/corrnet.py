"""Exponentially weighted Pearson correlations over rolling windows."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InvalidParameter, LengthMismatch, UnknownAsset
from .panel import ReturnPanel

MARKET = "MARKET"
DEGENERATE_VAR = 1e-18


@dataclass(frozen=True)
class WeightScheme:
    window: int
    theta: float
    decay: float  # effective e-folding length in observations
    weights: np.ndarray


def make_weights(window: int, theta: float, literal: bool = False) -> WeightScheme:
    """Normalised weights w_t proportional to exp((t - window) / decay), t = 1..window.

    By default ``theta`` is a fraction of the window (decay = theta * window);
    ``literal=True`` uses theta itself as the decay length.
    """
    if window < 2:
        raise InvalidParameter(f"window must be >= 2, got {window}")
    if not theta > 0:
        raise InvalidParameter(f"theta must be positive, got {theta}")
    decay = float(theta) if literal else float(theta) * window
    t = np.arange(1, window + 1, dtype=float)
    w = np.exp((t - window) / decay)
    w /= w.sum()
    return WeightScheme(window, float(theta), decay, w)


def weighted_corr(x, y, w) -> tuple[float, bool]:
    """Weighted Pearson correlation; returns (rho, degenerate).

    A pair with either weighted variance below 1e-18 is degenerate and gets rho = 0.
    """
    weights = w.weights if isinstance(w, WeightScheme) else np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (x.shape == y.shape == weights.shape):
        raise LengthMismatch(f"lengths differ: x={x.shape}, y={y.shape}, w={weights.shape}")
    dx = x - np.dot(weights, x)
    dy = y - np.dot(weights, y)
    vx = np.dot(weights, dx * dx)
    vy = np.dot(weights, dy * dy)
    if vx < DEGENERATE_VAR or vy < DEGENERATE_VAR:
        return 0.0, True
    rho = np.dot(weights, dx * dy) / (np.sqrt(vx) * np.sqrt(vy))
    return float(min(1.0, max(-1.0, rho))), False


def weighted_corr_matrix(block: np.ndarray, w) -> tuple[np.ndarray, np.ndarray]:
    """(N, window) block of returns -> (rho, degenerate) N x N arrays."""
    weights = w.weights if isinstance(w, WeightScheme) else np.asarray(w, dtype=float)
    if block.shape[1] != weights.size:
        raise LengthMismatch(f"window of {block.shape[1]} observations vs {weights.size} weights")
    d = block - (block @ weights)[:, None]
    dw = d * np.sqrt(weights)
    cov = dw @ dw.T
    cov = np.triu(cov) + np.triu(cov, 1).T
    var = np.diag(cov).copy()
    bad = var < DEGENERATE_VAR
    sd = np.sqrt(np.where(bad, 1.0, var))
    rho = cov / np.outer(sd, sd)
    np.clip(rho, -1.0, 1.0, out=rho)
    degenerate = bad[:, None] | bad[None, :]
    rho[degenerate] = 0.0
    np.fill_diagonal(degenerate, False)
    np.fill_diagonal(rho, 1.0)
    return rho, degenerate


@dataclass
class RollingCorrSeries:
    window_ends: np.ndarray  # (W,) timestamp of each window's last return
    assets: list
    matrices: np.ndarray  # (W, N, N)
    degenerate: np.ndarray  # (W, N, N) bool
    scheme: WeightScheme
    step: int = 1

    def __len__(self):
        return len(self.window_ends)


def rolling_corr(rp: ReturnPanel, window: int = 24, step: int = 1, theta: float = 0.3,
                 literal: bool = False) -> RollingCorrSeries:
    """One weighted correlation matrix per window of ``window`` returns, advancing by ``step``."""
    if step < 1:
        raise InvalidParameter("step must be >= 1")
    scheme = make_weights(window, theta, literal)
    n, t = rp.returns.shape
    if t < window:
        raise InsufficientData(f"{t} return observations < window {window}")
    ends = list(range(window - 1, t, step))
    mats = np.empty((len(ends), n, n))
    degs = np.empty((len(ends), n, n), dtype=bool)
    for k, e in enumerate(ends):
        mats[k], degs[k] = weighted_corr_matrix(rp.returns[:, e - window + 1:e + 1], scheme)
    return RollingCorrSeries(rp.timestamps[ends].copy(), list(rp.assets), mats, degs, scheme, step)


def average_corr(series: RollingCorrSeries, focus: str = MARKET) -> np.ndarray:
    """Per-window mean off-diagonal correlation of ``focus`` (or of the whole matrix for MARKET)."""
    n = len(series.assets)
    if n < 2:
        raise InsufficientData("average correlation needs at least two assets")
    off = ~np.eye(n, dtype=bool)
    if focus == MARKET:
        return series.matrices[:, off].mean(axis=1)
    try:
        i = series.assets.index(focus)
    except ValueError:
        raise UnknownAsset(f"asset {focus!r} not in panel") from None
    return series.matrices[:, i, off[i]].mean(axis=1)


def ema(signal, alpha: float = 0.3) -> np.ndarray:
    """s_1 = x_1, s_t = alpha * x_t + (1 - alpha) * s_{t-1}."""
    if not 0 < alpha <= 1:
        raise InvalidParameter(f"alpha must be in (0, 1], got {alpha}")
    x = np.asarray(signal, dtype=float)
    out = np.empty_like(x)
    if x.size == 0:
        return out
    out[0] = x[0]
    for t in range(1, x.size):
        out[t] = alpha * x[t] + (1 - alpha) * out[t - 1]
    return out


def avg_corr_csv(series: RollingCorrSeries, focus: list[str], alpha: float | None = None) -> str:
    """``window_end,asset,avg_corr`` rows; EMA-smoothed when ``alpha`` is given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_end", "asset", "avg_corr"])
    cols = {f: average_corr(series, f) for f in focus}
    if alpha is not None:
        cols = {f: ema(v, alpha) for f, v in cols.items()}
    for k, ts in enumerate(series.window_ends):
        for f in focus:
            w.writerow([int(ts), f, f"{cols[f][k]:.10g}"])
    return buf.getvalue()


def matrices_csv(series: RollingCorrSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_end", "asset_i", "asset_j", "rho", "degenerate"])
    n = len(series.assets)
    for k, ts in enumerate(series.window_ends):
        for i in range(n):
            for j in range(i + 1, n):
                w.writerow([int(ts), series.assets[i], series.assets[j],
                            f"{series.matrices[k, i, j]:.10g}", int(series.degenerate[k, i, j])])
    return buf.getvalue()

"""Seeded synthetic crash market used as the bundled end-to-end fixture.

Ten assets over 400 hours from 2022-05-01 00:00 UTC: a one-factor market with
fat-tailed shocks, a collapsing pair (LUNA and its stablecoin UST), a pegged
stablecoin whose closes barely move, and trade tapes for three focus assets.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidParameter
from .ingest.types import BUY, CANDLES, HOUR, SELL, TRADES, Candle, TradeRecord

START = 1651363200  # 2022-05-01T00:00Z
ASSETS = ("BTC", "ETH", "SOL", "AVAX", "DOGE", "LINK", "MKR", "LUNA", "UST", "USDT")
START_PRICES = (38000.0, 2800.0, 100.0, 70.0, 0.13, 11.0, 1800.0, 80.0, 1.0, 1.0)
TRADE_SYMBOLS = ("BTC", "LUNA", "UST")
EXCHANGE = "synthetic"
QUOTE = "USD"
REGIMES = ("crash", "calm")


def simulate_closes(n_hours: int = 400, seed: int = 7, regime: str = "crash") -> np.ndarray:
    """Closes of shape (len(ASSETS), n_hours).

    ``regime="crash"`` switches on the collapse after hour 200. ``regime="calm"`` is a
    homoskedastic Gaussian one-factor market with dispersed betas, whose CSAD is convex
    in the market return, so the herding regressions should find nothing there.
    """
    if regime not in REGIMES:
        raise InvalidParameter(f"regime must be one of {REGIMES}, got {regime!r}")
    rng = np.random.default_rng(seed)
    n = len(ASSETS)
    if regime == "calm":
        market = 0.01 * rng.standard_normal(n_hours)
        beta = np.linspace(0.6, 1.6, n)
        r = beta[:, None] * market[None, :] + 0.006 * rng.standard_normal((n, n_hours))
        r[:, 0] = 0.0
        return np.array(START_PRICES)[:, None] * np.exp(np.cumsum(r, axis=1))
    t = np.arange(n_hours)
    crash = t >= 200
    vol = np.where(crash, 0.02, 0.008)
    market = vol * rng.standard_t(4, n_hours) / np.sqrt(2.0)
    beta = np.array([1.0, 1.2, 1.5, 1.4, 1.3, 1.3, 0.9, 1.6, 0.0, 0.0])
    idio = np.array([0.004, 0.005, 0.008, 0.008, 0.009, 0.007, 0.006, 0.015, 0.0, 0.0])
    r = beta[:, None] * market[None, :] + idio[:, None] * (vol / 0.008) * rng.standard_normal((n, n_hours))
    luna, ust = ASSETS.index("LUNA"), ASSETS.index("UST")
    r[luna] += np.where(crash, -0.03, 0.0) + np.where(crash, 0.08, 0.0) * rng.standard_normal(n_hours)
    r[ust] = np.where(crash, -0.004 + 0.02 * rng.standard_normal(n_hours), 0.0005 * rng.standard_normal(n_hours))
    r[:, 0] = 0.0
    close = np.array(START_PRICES)[:, None] * np.exp(np.cumsum(r, axis=1))
    usdt = ASSETS.index("USDT")
    close[usdt] = np.round(1.0 + 0.0002 * rng.standard_normal(n_hours), 4)
    return close


def candles_for(close_row: np.ndarray, seed: int) -> list[Candle]:
    rng = np.random.default_rng(seed)
    out = []
    prev = close_row[0]
    for k, c in enumerate(close_row):
        o = prev
        spread = 1 + 0.002 * rng.random()
        out.append(Candle(START + k * HOUR, float(o), float(max(o, c) * spread), float(min(o, c) / spread),
                          float(c), float(np.round(rng.lognormal(3, 1), 6))))
        prev = c
    return out


def trades_for(close_row: np.ndarray, seed: int) -> list[TradeRecord]:
    rng = np.random.default_rng(seed)
    out = []
    tid = 0
    for k, c in enumerate(close_row):
        prev = close_row[k - 1] if k else c
        p_sell = 0.5 + 0.4 * np.tanh((prev - c) / (0.01 * prev))
        count = int(rng.poisson(12)) + 1
        offsets = np.sort(rng.integers(0, HOUR * 1000, count))
        for off in offsets:
            side = SELL if rng.random() < p_sell else BUY
            price = float(np.round(c * (1 + 0.001 * rng.standard_normal()), 8))
            amount = float(np.round(rng.lognormal(0, 1), 6)) + 1e-6
            out.append(TradeRecord(int((START + k * HOUR) * 1000 + off), price, amount, side, tid))
            tid += 1
    return out


def write_fixture(store, n_hours: int = 400, seed: int = 7, regime: str = "crash") -> dict:
    close = simulate_closes(n_hours, seed, regime)
    end = START + n_hours * HOUR
    added = {}
    for i, sym in enumerate(ASSETS):
        added[(sym, CANDLES)] = store.write(EXCHANGE, sym, CANDLES, QUOTE, candles_for(close[i], seed + i),
                                            START, end)
        if sym in TRADE_SYMBOLS:
            added[(sym, TRADES)] = store.write(EXCHANGE, sym, TRADES, QUOTE, trades_for(close[i], seed + 100 + i),
                                               START, end)
    return added

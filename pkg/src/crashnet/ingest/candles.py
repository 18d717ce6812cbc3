from __future__ import annotations

import math
from itertools import groupby

from .types import HOUR_MS, Candle, TradeRecord


def hour_of(ts_ms: int) -> int:
    """Opening epoch second of the UTC hour containing ``ts_ms``."""
    return (ts_ms // HOUR_MS) * 3600


def build_candles_from_trades(trades: list[TradeRecord]) -> list[Candle]:
    """Hourly OHLCV bars from an ascending trade tape.

    Hours without trades produce no candle; gap handling belongs to the panel loader.
    """
    out = []
    for hour, group in groupby(trades, key=lambda t: hour_of(t.ts_ms)):
        group = list(group)
        prices = [t.price for t in group]
        out.append(Candle(
            ts=hour,
            open=prices[0],
            high=max(prices),
            low=min(prices),
            close=prices[-1],
            volume=math.fsum(t.amount for t in group),
        ))
    return out

"""Hourly buy/sell notional imbalance from a trade tape.

Positive imbalance means net selling pressure: imbalance = sell - buy.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import UnorderedInput
from .ingest.types import BUY, HOUR_MS

HOUR = 3600


@dataclass(frozen=True)
class ImbalanceBar:
    hour: int
    buy_notional: float
    sell_notional: float

    @property
    def imbalance(self) -> float:
        return self.sell_notional - self.buy_notional


def hourly_imbalance(trades) -> list[ImbalanceBar]:
    """One bar per UTC hour from the first to the last trade, empty hours as zeros."""
    if not trades:
        return []
    buys, sells = {}, {}
    prev = None
    for t in trades:
        if prev is not None and t.ts_ms < prev:
            raise UnorderedInput(f"trade {t.trade_id} at {t.ts_ms} precedes {prev}")
        prev = t.ts_ms
        hour = t.ts_ms // HOUR_MS
        (buys if t.side == BUY else sells).setdefault(hour, []).append(t.price * t.amount)
    first = trades[0].ts_ms // HOUR_MS
    last = trades[-1].ts_ms // HOUR_MS
    return [ImbalanceBar(h * HOUR, math.fsum(buys.get(h, ())), math.fsum(sells.get(h, ())))
            for h in range(first, last + 1)]


@dataclass
class ImbalanceReport:
    bars: list
    events: dict = field(default_factory=dict)  # label -> hour epoch
    top_positive: list = field(default_factory=list)
    top_negative: list = field(default_factory=list)

    def event_bars(self) -> dict:
        by_hour = {b.hour: b for b in self.bars}
        return {label: by_hour.get(ts) for label, ts in self.events.items()}


def imbalance_report(bars, events=None, top: int = 5) -> ImbalanceReport:
    """Attach event markers and list the ``top`` largest selling and buying bars."""
    events = dict(events or {})
    for label, ts in events.items():
        if ts % HOUR:
            raise ValueError(f"event {label} at {ts} is not hour-aligned")
    if not bars:
        return ImbalanceReport([], events)
    pos = sorted((b for b in bars if b.imbalance > 0), key=lambda b: (-b.imbalance, b.hour))[:top]
    neg = sorted((b for b in bars if b.imbalance < 0), key=lambda b: (b.imbalance, b.hour))[:top]
    return ImbalanceReport(list(bars), events, pos, neg)


def bars_csv(bars) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hour", "buy_notional", "sell_notional", "imbalance"])
    for b in bars:
        w.writerow([b.hour, f"{b.buy_notional:.10g}", f"{b.sell_notional:.10g}", f"{b.imbalance:.10g}"])
    return buf.getvalue()


def report_text(symbol: str, rep: ImbalanceReport, quote: str = "") -> str:
    unit = f" {quote}" if quote else ""
    lines = [f"{symbol}: {len(rep.bars)} hourly bars (positive = selling pressure){unit}"]
    for title, rows in (("top selling", rep.top_positive), ("top buying", rep.top_negative)):
        lines.append(f"  {title}:")
        lines.extend(f"    {b.hour} {b.imbalance:+.6g}" for b in rows)
    for label, bar in rep.event_bars().items():
        value = "n/a" if bar is None else f"{bar.imbalance:+.6g}"
        lines.append(f"  event ({label}) at {rep.events[label]}: {value}")
    return "\n".join(lines) + "\n"

"""CSV archives for candles and trades.

Floats are written in shortest round-trip positional notation so that an
export followed by an import reproduces every field bit-for-bit.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .types import Candle, TradeRecord

CANDLE_HEADER = ["ts", "open", "high", "low", "close", "volume"]
TRADE_HEADER = ["ts_ms", "price", "amount", "side", "trade_id"]


def fmt_float(x: float) -> str:
    return np.format_float_positional(float(x), trim="-", unique=True)


def candles_to_csv(candles) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CANDLE_HEADER)
    for c in candles:
        w.writerow([c.ts, fmt_float(c.open), fmt_float(c.high), fmt_float(c.low), fmt_float(c.close), fmt_float(c.volume)])
    return buf.getvalue()


def trades_to_csv(trades) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(TRADE_HEADER)
    for t in trades:
        w.writerow([t.ts_ms, fmt_float(t.price), fmt_float(t.amount), t.side, t.trade_id])
    return buf.getvalue()


def _rows(text: str, header: list[str]):
    reader = csv.reader(io.StringIO(text))
    got = next(reader, None)
    if got is None:
        return
    if [h.strip() for h in got] != header:
        raise ValueError(f"expected header {','.join(header)}, got {','.join(got)}")
    for row in reader:
        if row:
            yield row


def candles_from_csv(text: str) -> list[Candle]:
    return [Candle(int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), float(r[5]))
            for r in _rows(text, CANDLE_HEADER)]


def trades_from_csv(text: str) -> list[TradeRecord]:
    return [TradeRecord(int(r[0]), float(r[1]), float(r[2]), r[3], int(r[4]))
            for r in _rows(text, TRADE_HEADER)]


def export_candles(candles, path) -> None:
    Path(path).write_text(candles_to_csv(candles), encoding="utf-8", newline="")


def import_candles(path) -> list[Candle]:
    return candles_from_csv(Path(path).read_text(encoding="utf-8"))


def export_trades(trades, path) -> None:
    Path(path).write_text(trades_to_csv(trades), encoding="utf-8", newline="")


def import_trades(path) -> list[TradeRecord]:
    return trades_from_csv(Path(path).read_text(encoding="utf-8"))

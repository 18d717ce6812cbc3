"""Market-data ingestion: exchange clients, CSV archives and the local store."""
from __future__ import annotations

import logging
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import csvio
from .candles import build_candles_from_trades
from .exchanges import QUOTES, fetch_candles, fetch_trades, make_client
from .store import DataStore, load_panel
from .types import CANDLES, HOUR, KINDS, TRADES, AssetSpec, Candle, StoreManifest, TradeRecord

log = logging.getLogger(__name__)

__all__ = [
    "AssetSpec", "Candle", "DataStore", "StoreManifest", "TradeRecord", "build_candles_from_trades",
    "fetch_candles", "fetch_trades", "import_archive", "load_panel", "make_client", "sync",
]


def _merge_ranges(days):
    out = []
    for s, e in days:
        if out and out[-1][1] == s:
            out[-1] = (out[-1][0], e)
        else:
            out.append((s, e))
    return out


def sync(store: DataStore, client, symbols, start: int, end: int, kinds=(CANDLES, TRADES),
         workers: int = 1) -> dict:
    """Fetch whatever part of [start, end) the store lacks; returns new rows per (symbol, kind).

    Symbols are fetched concurrently when ``workers > 1``; requests still pass
    through the client's per-exchange rate limiter and writes are serialised.
    """
    lock = threading.Lock()
    added = {}

    def one(symbol):
        for kind in kinds:
            with lock:
                todo = _merge_ranges(store.missing_days(client.name, symbol, kind, start, end))
            for s, e in todo:
                fetch = client.fetch_candles if kind == CANDLES else client.fetch_trades
                records = fetch(symbol, s, e)
                with lock:
                    n = store.write(client.name, symbol, kind, client.quote, records, s, e)
                    added[(symbol, kind)] = added.get((symbol, kind), 0) + n
                log.info("%s %s %s [%d, %d): %d new rows", client.name, symbol, kind, s, e, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, symbols))
    else:
        for sym in symbols:
            one(sym)
    return added


_ARCHIVE = re.compile(r"^(?P<symbol>[A-Za-z0-9]+)\.(?P<kind>candles|trades)\.csv$")


def import_archive(store: DataStore, exchange: str, directory, quote: str | None = None) -> dict:
    """Load ``<SYMBOL>.candles.csv`` / ``<SYMBOL>.trades.csv`` files into the store."""
    quote = quote or QUOTES.get(exchange, "USD")
    added = {}
    for path in sorted(Path(directory).iterdir()):
        m = _ARCHIVE.match(path.name)
        if not m:
            continue
        symbol, kind = m["symbol"], m["kind"]
        if kind == CANDLES:
            records = csvio.import_candles(path)
            secs = [c.ts for c in records]
        else:
            records = csvio.import_trades(path)
            secs = [t.ts_ms // 1000 for t in records]
        if not records:
            continue
        start = (min(secs) // HOUR) * HOUR
        end = (max(secs) // HOUR + 1) * HOUR
        added[(symbol, kind)] = store.write(exchange, symbol, kind, quote, records, start, end)
    return added

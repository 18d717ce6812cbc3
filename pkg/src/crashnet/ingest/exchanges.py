"""Public REST clients for Kraken and Binance.

Each client only needs a ``get(url, params) -> json`` callable, so tests can
replay recorded responses without touching the network.
"""
from __future__ import annotations

import logging

from ..errors import HistoryUnavailable, InvalidParameter, NetworkError, SymbolUnknown
from .candles import build_candles_from_trades
from .http import HttpError, RateLimiter, Transport
from .types import BUY, HOUR, SELL, Candle, TradeRecord

log = logging.getLogger(__name__)

DEFAULT_RATES = {"kraken": 1.0, "binance": 10.0}
QUOTES = {"kraken": "USD", "binance": "BUSD"}


def _dedupe_sorted(records, key):
    out, seen = [], set()
    for r in sorted(records, key=key):
        k = key(r)
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out


class KrakenClient:
    name = "kraken"
    quote = QUOTES["kraken"]
    base_url = "https://api.kraken.com/0/public"
    # Kraken's legacy asset codes
    aliases = {"BTC": "XBT", "DOGE": "XDG"}
    ohlc_retention = 720  # candles returned by /OHLC, most recent only

    def __init__(self, get):
        self._get = get

    def pair(self, symbol: str) -> str:
        return self.aliases.get(symbol, symbol) + self.quote

    def _call(self, endpoint, symbol, params):
        try:
            doc = self._get(f"{self.base_url}/{endpoint}", params)
        except HttpError as exc:
            raise NetworkError(str(exc)) from exc
        errors = doc.get("error") or []
        if errors:
            if any("Unknown asset pair" in e for e in errors):
                raise SymbolUnknown(symbol, self.name)
            raise NetworkError(f"kraken {endpoint}: {'; '.join(errors)}")
        result = doc["result"]
        rows = next(v for k, v in result.items() if k != "last")
        return rows, result.get("last")

    def _trades_page(self, symbol, since_ns):
        rows, last = self._call("Trades", symbol, {"pair": self.pair(symbol), "since": str(since_ns)})
        page = []
        for i, row in enumerate(rows):
            price, volume, t, side = row[0], row[1], row[2], row[3]
            trade_id = int(row[6]) if len(row) > 6 else None
            page.append((int(round(float(t) * 1000)), float(price), float(volume),
                         BUY if side == "b" else SELL, trade_id))
        return page, int(last) if last is not None else None

    def fetch_trades(self, symbol, start, end):
        if start >= end:
            return []
        lo_ms, hi_ms = start * 1000, end * 1000
        cursor = start * 1_000_000_000
        raw, first_page = [], True
        while True:
            page, last = self._trades_page(symbol, cursor)
            if first_page and page and page[0][0] > lo_ms + HOUR * 1000:
                earliest, _ = self._trades_page(symbol, 0)
                if earliest and earliest[0][0] > lo_ms:
                    raise HistoryUnavailable(f"kraken {symbol}: trade history starts after {start}")
            first_page = False
            raw.extend(p for p in page if lo_ms <= p[0] < hi_ms)
            if not page or page[-1][0] >= hi_ms or last is None or last <= cursor:
                break
            cursor = last
        records = []
        for ordinal, (ts_ms, price, amount, side, tid) in enumerate(raw):
            records.append(TradeRecord(ts_ms, price, amount, side, tid if tid is not None else ordinal))
        return _dedupe_sorted(records, key=lambda r: (r.ts_ms, r.trade_id))

    def fetch_candles(self, symbol, start, end):
        if start >= end:
            return []
        rows, _ = self._call("OHLC", symbol, {"pair": self.pair(symbol), "interval": 60, "since": start})
        candles = [Candle(int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), float(r[6]))
                   for r in rows]
        if candles and candles[0].ts <= start:
            return [c for c in candles if start <= c.ts < end]
        log.info("kraken %s: OHLC history does not reach %d; rebuilding from trades", symbol, start)
        return build_candles_from_trades(self.fetch_trades(symbol, start, end))


class BinanceClient:
    name = "binance"
    quote = QUOTES["binance"]
    base_url = "https://api.binance.com/api/v3"
    page_limit = 1000

    def __init__(self, get):
        self._get = get

    def pair(self, symbol: str) -> str:
        return symbol + self.quote

    def _call(self, endpoint, symbol, params):
        try:
            return self._get(f"{self.base_url}/{endpoint}", params)
        except HttpError as exc:
            body = exc.body if isinstance(exc.body, dict) else {}
            if body.get("code") == -1121:
                raise SymbolUnknown(symbol, self.name) from exc
            raise NetworkError(str(exc)) from exc

    def fetch_candles(self, symbol, start, end):
        if start >= end:
            return []
        out, cursor = [], start * 1000
        while cursor < end * 1000:
            rows = self._call("klines", symbol, {
                "symbol": self.pair(symbol), "interval": "1h",
                "startTime": cursor, "endTime": end * 1000 - 1, "limit": self.page_limit,
            })
            if not rows:
                break
            if not out and rows[0][0] > start * 1000:
                raise HistoryUnavailable(f"binance {symbol}: candles start at {rows[0][0] // 1000} > {start}")
            out.extend(Candle(int(r[0]) // 1000, float(r[1]), float(r[2]), float(r[3]), float(r[4]), float(r[5]))
                       for r in rows)
            cursor = int(rows[-1][0]) + HOUR * 1000
        out = _dedupe_sorted(out, key=lambda c: c.ts)
        return [c for c in out if start <= c.ts < end]

    def _agg_page(self, symbol, params):
        rows = self._call("aggTrades", symbol, {"symbol": self.pair(symbol), "limit": self.page_limit, **params})
        # "m" is buyer-is-maker: the taker was then the seller
        return [TradeRecord(int(r["T"]), float(r["p"]), float(r["q"]), SELL if r["m"] else BUY, int(r["a"]))
                for r in rows]

    def fetch_trades(self, symbol, start, end):
        if start >= end:
            return []
        out = []
        for chunk in range(start, end, HOUR):
            lo, hi = chunk * 1000, min(chunk + HOUR, end) * 1000
            page = self._agg_page(symbol, {"startTime": lo, "endTime": hi - 1})
            out.extend(page)
            while len(page) == self.page_limit:
                page = [t for t in self._agg_page(symbol, {"fromId": page[-1].trade_id + 1}) if t.ts_ms < hi]
                out.extend(page)
        out = _dedupe_sorted(out, key=lambda r: (r.ts_ms, r.trade_id))
        return [t for t in out if start * 1000 <= t.ts_ms < end * 1000]


CLIENTS = {"kraken": KrakenClient, "binance": BinanceClient}


def make_client(exchange: str, get=None, rate: float | None = None):
    """Client for ``exchange``; ``get`` overrides the rate-limited HTTP transport."""
    if exchange not in CLIENTS:
        raise InvalidParameter(f"unsupported exchange {exchange!r}; choose from {sorted(CLIENTS)}")
    if get is None:
        get = Transport(RateLimiter(rate or DEFAULT_RATES[exchange])).get
    return CLIENTS[exchange](get)


def fetch_candles(exchange, symbol, start, end, client=None):
    return (client or make_client(exchange)).fetch_candles(symbol, start, end)


def fetch_trades(exchange, symbol, start, end, client=None):
    return (client or make_client(exchange)).fetch_trades(symbol, start, end)

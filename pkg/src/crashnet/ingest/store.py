"""Resumable on-disk store.

Layout::

    <root>/manifest.json
    <root>/<exchange>/<symbol>/<kind>/<YYYY-MM-DD>.csv

One CSV per (exchange, symbol, kind, UTC day). The store has a single-writer
contract; readers may run concurrently.
"""
from __future__ import annotations

import json
import logging
import os
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..errors import GapTooLarge, MissingSymbol, MixedQuote
from ..panel import PricePanel
from . import csvio
from .types import CANDLES, HOUR, KINDS, TRADES, StoreManifest

log = logging.getLogger(__name__)

DAY = 86400


def day_of(ts: int) -> int:
    return (ts // DAY) * DAY


def day_name(day: int) -> str:
    return datetime.fromtimestamp(day, tz=timezone.utc).strftime("%Y-%m-%d")


def _key_of(kind):
    return (lambda c: c.ts) if kind == CANDLES else (lambda t: (t.ts_ms, t.trade_id))


def _sec_of(kind):
    return (lambda c: c.ts) if kind == CANDLES else (lambda t: t.ts_ms // 1000)


class DataStore:
    def __init__(self, root):
        self.root = Path(root)
        self._manifest_path = self.root / "manifest.json"
        self.manifests: dict[tuple, StoreManifest] = {}
        if self._manifest_path.exists():
            for d in json.loads(self._manifest_path.read_text(encoding="utf-8")):
                m = StoreManifest.from_dict(d)
                self.manifests[(m.exchange, m.symbol, m.kind)] = m

    def _dir(self, exchange, symbol, kind) -> Path:
        return self.root / exchange / symbol / kind

    def _save_manifest(self):
        self.root.mkdir(parents=True, exist_ok=True)
        docs = [self.manifests[k].to_dict() for k in sorted(self.manifests)]
        tmp = self._manifest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(docs, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self._manifest_path)

    def manifest(self, exchange, symbol, kind) -> StoreManifest | None:
        return self.manifests.get((exchange, symbol, kind))

    def missing_days(self, exchange, symbol, kind, start, end) -> list[tuple[int, int]]:
        """Day-aligned [s, e) sub-ranges of [start, end) not yet covered."""
        m = self.manifest(exchange, symbol, kind)
        out = []
        day = day_of(start)
        while day < end:
            s, e = max(day, start), min(day + DAY, end)
            if m is None or not m.covers(s, e):
                out.append((s, e))
            day += DAY
        return out

    def write(self, exchange, symbol, kind, quote, records, start, end) -> int:
        """Merge ``records`` covering [start, end) into the store; returns the number of new rows."""
        if kind not in KINDS:
            raise ValueError(kind)
        m = self.manifest(exchange, symbol, kind)
        if m is None:
            m = StoreManifest(exchange, symbol, kind, quote)
            self.manifests[(exchange, symbol, kind)] = m
        elif m.quote != quote:
            raise MixedQuote(f"{exchange}/{symbol}/{kind} stored in {m.quote}, refusing {quote}")
        key, sec = _key_of(kind), _sec_of(kind)
        by_day = defaultdict(list)
        for r in records:
            by_day[day_of(sec(r))].append(r)
        added = 0
        d = self._dir(exchange, symbol, kind)
        d.mkdir(parents=True, exist_ok=True)
        for day, rows in sorted(by_day.items()):
            existing = self._read_day(exchange, symbol, kind, day)
            have = {key(r) for r in existing}
            new = [r for r in rows if key(r) not in have]
            if not new:
                continue
            merged = sorted(existing + new, key=key)
            text = csvio.candles_to_csv(merged) if kind == CANDLES else csvio.trades_to_csv(merged)
            (d / f"{day_name(day)}.csv").write_text(text, encoding="utf-8", newline="")
            added += len(new)
        m.add_range(start, end)
        m.row_count += added
        self._save_manifest()
        return added

    def _read_day(self, exchange, symbol, kind, day):
        path = self._dir(exchange, symbol, kind) / f"{day_name(day)}.csv"
        if not path.exists():
            return []
        text = path.read_text(encoding="utf-8")
        return csvio.candles_from_csv(text) if kind == CANDLES else csvio.trades_from_csv(text)

    def read(self, exchange, symbol, kind, start, end) -> list:
        if self.manifest(exchange, symbol, kind) is None:
            raise MissingSymbol(symbol)
        sec = _sec_of(kind)
        out = []
        day = day_of(start)
        while day < end:
            out.extend(r for r in self._read_day(exchange, symbol, kind, day) if start <= sec(r) < end)
            day += DAY
        return out

    def candles(self, exchange, symbol, start, end):
        return self.read(exchange, symbol, CANDLES, start, end)

    def trades(self, exchange, symbol, start, end):
        return self.read(exchange, symbol, TRADES, start, end)

    def summary(self) -> list[str]:
        lines = []
        for k in sorted(self.manifests):
            m = self.manifests[k]
            span = m.covered_range
            lines.append(f"{m.exchange:8s} {m.symbol:6s} {m.kind:7s} {m.quote:4s} rows={m.row_count} "
                         f"range={span[0] if span else '-'}..{span[1] if span else '-'}")
        return lines


def load_panel(store: DataStore, exchange: str, symbols, start: int, end: int, max_gap: int = 6) -> PricePanel:
    """Aligned hourly close grid over [start, end).

    Missing hours are forward-filled from the last close and flagged; a run
    longer than ``max_gap`` hours, or a missing first hour, raises GapTooLarge.
    """
    stamps = np.arange(start, end, HOUR, dtype=np.int64)
    quotes = set()
    close = np.empty((len(symbols), len(stamps)))
    flags = np.zeros((len(symbols), len(stamps)), dtype=bool)
    for i, sym in enumerate(symbols):
        m = store.manifest(exchange, sym, CANDLES)
        if m is None:
            raise MissingSymbol(sym)
        quotes.add(m.quote)
        by_ts = {c.ts: c.close for c in store.candles(exchange, sym, start, end)}
        run_start = None
        for j, ts in enumerate(stamps):
            ts = int(ts)
            if ts in by_ts:
                if run_start is not None and ts - run_start > max_gap * HOUR:
                    raise GapTooLarge(sym, run_start, ts)
                run_start = None
                close[i, j] = by_ts[ts]
            else:
                if j == 0:
                    raise GapTooLarge(sym, ts, ts + HOUR)
                if run_start is None:
                    run_start = ts
                close[i, j] = close[i, j - 1]
                flags[i, j] = True
        if run_start is not None and end - run_start > max_gap * HOUR:
            raise GapTooLarge(sym, run_start, end)
    if len(quotes) > 1:
        raise MixedQuote(f"panel would mix quote currencies {sorted(quotes)}")
    if flags.any():
        log.warning("forward-filled %d missing hourly closes", int(flags.sum()))
    return PricePanel(stamps, list(symbols), close, flags)

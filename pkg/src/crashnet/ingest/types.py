from __future__ import annotations

from dataclasses import dataclass, field

HOUR = 3600
HOUR_MS = HOUR * 1000

BUY = "buy"
SELL = "sell"
SIDES = (BUY, SELL)

CANDLES = "candles"
TRADES = "trades"
KINDS = (CANDLES, TRADES)


@dataclass(frozen=True)
class AssetSpec:
    symbol: str
    name: str
    sector: str

    def __post_init__(self):
        if not self.symbol:
            raise ValueError("asset symbol must be non-empty")


@dataclass(frozen=True)
class Candle:
    """One hourly OHLCV bar; ``ts`` is the opening second of the hour (UTC)."""

    ts: int
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise ValueError(f"non-positive price in candle at {self.ts}")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise ValueError(f"inconsistent OHLC range in candle at {self.ts}")
        if self.volume < 0:
            raise ValueError(f"negative volume in candle at {self.ts}")


@dataclass(frozen=True)
class TradeRecord:
    """A public trade; ``side`` is the taker side."""

    ts_ms: int
    price: float
    amount: float
    side: str
    trade_id: int

    def __post_init__(self):
        if self.price <= 0 or self.amount <= 0:
            raise ValueError(f"trade {self.trade_id}: price and amount must be positive")
        if self.side not in SIDES:
            raise ValueError(f"trade {self.trade_id}: side must be 'buy' or 'sell', got {self.side!r}")

    @property
    def notional(self) -> float:
        return self.price * self.amount

    def flipped(self) -> "TradeRecord":
        return TradeRecord(self.ts_ms, self.price, self.amount, SELL if self.side == BUY else BUY, self.trade_id)


@dataclass
class StoreManifest:
    exchange: str
    symbol: str
    kind: str
    quote: str
    ranges: list = field(default_factory=list)  # merged [start, end) epoch-second intervals
    row_count: int = 0

    @property
    def covered_range(self):
        if not self.ranges:
            return None
        return (self.ranges[0][0], self.ranges[-1][1])

    def covers(self, start: int, end: int) -> bool:
        return any(s <= start and end <= e for s, e in self.ranges)

    def add_range(self, start: int, end: int) -> None:
        if start >= end:
            return
        merged = []
        for s, e in sorted(self.ranges + [[start, end]]):
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        self.ranges = merged

    def to_dict(self) -> dict:
        return {
            "exchange": self.exchange,
            "symbol": self.symbol,
            "kind": self.kind,
            "quote": self.quote,
            "ranges": [list(r) for r in self.ranges],
            "row_count": self.row_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StoreManifest":
        return cls(d["exchange"], d["symbol"], d["kind"], d["quote"], [list(r) for r in d["ranges"]], d["row_count"])

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crashnet.errors import GapTooLarge, MissingSymbol, MixedQuote, NetworkError, SymbolUnknown
from crashnet.ingest import DataStore, build_candles_from_trades, import_archive, load_panel, make_client, sync
from crashnet.ingest import csvio
from crashnet.ingest.http import HttpError, RateLimiter, Transport
from crashnet.ingest.types import BUY, CANDLES, SELL, TRADES, Candle, StoreManifest, TradeRecord

from conftest import T0

H = 3600
BIN_T0 = 1652054400  # 2022-05-09T00:00Z
KRAKEN_T0 = 1651752000  # 2022-05-05T12:00Z


def trade(ts_ms, price, amount=1.0, side=BUY, tid=0):
    return TradeRecord(ts_ms, price, amount, side, tid)


# fetch_candles / fetch_trades against replayed responses

def test_binance_three_candles_ascending(replay):
    client = make_client("binance", get=replay("binance"))
    candles = client.fetch_candles("BTC", BIN_T0, BIN_T0 + 3 * H)
    assert len(candles) == 3
    assert [c.ts for c in candles] == [BIN_T0, BIN_T0 + H, BIN_T0 + 2 * H]
    assert candles[0].open == 34100.5 and candles[1].volume == 1022.9


def test_empty_range_makes_no_request(replay):
    for exchange in ("kraken", "binance"):
        get = replay(exchange)
        client = make_client(exchange, get=get)
        assert client.fetch_candles("BTC", BIN_T0, BIN_T0) == []
        assert client.fetch_trades("BTC", BIN_T0, BIN_T0) == []
        assert get.calls == []


def test_binance_buyer_is_maker_maps_to_sell(replay):
    tape = make_client("binance", get=replay("binance")).fetch_trades("BTC", BIN_T0, BIN_T0 + 2 * H)
    sides = {t.trade_id: t.side for t in tape}
    assert sides == {900001: SELL, 900002: BUY, 900003: SELL, 900004: BUY}
    assert [(t.ts_ms, t.trade_id) for t in tape] == sorted((t.ts_ms, t.trade_id) for t in tape)


def test_kraken_trades_follow_since_cursor(replay):
    get = replay("kraken")
    tape = make_client("kraken", get=get).fetch_trades("LUNA", KRAKEN_T0, KRAKEN_T0 + 2 * H)
    assert [t.trade_id for t in tape] == [5001, 5002, 5003, 5004, 5005]  # 5004 on both pages, 5006 past end
    assert len(get.calls) == 2
    assert get.calls[1][1]["since"] == str(int((KRAKEN_T0 + 1800.1234) * 1e9))
    assert [t.side for t in tape] == [SELL, SELL, BUY, SELL, BUY]
    assert all(a.ts_ms <= b.ts_ms for a, b in zip(tape, tape[1:]))


def test_unknown_symbol_errors(replay):
    with pytest.raises(SymbolUnknown, match="NOPE"):
        make_client("kraken", get=replay("kraken")).fetch_trades("NOPE", KRAKEN_T0, KRAKEN_T0 + H)
    with pytest.raises(SymbolUnknown, match="NOPE"):
        make_client("binance", get=replay("binance")).fetch_candles("NOPE", BIN_T0, BIN_T0 + 3 * H)


def test_kraken_pair_aliases():
    client = make_client("kraken", get=lambda u, p: None)
    assert client.pair("BTC") == "XBTUSD"
    assert client.pair("LUNA") == "LUNAUSD"


# HTTP plumbing

class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.slept = []

    def __call__(self):
        return self.now

    def sleep(self, dt):
        self.slept.append(dt)
        self.now += dt


def test_rate_limiter_spaces_requests():
    clock = FakeClock()
    lim = RateLimiter(2.0, clock=clock, sleep=clock.sleep)
    for _ in range(5):
        lim.acquire()
    assert clock.now == pytest.approx(2.0)  # first free, then 0.5 s apart


class FakeResponse:
    def __init__(self, status, doc):
        self.status_code = status
        self._doc = doc
        self.text = str(doc)

    def json(self):
        return self._doc


class FakeSession:
    def __init__(self, statuses):
        self.statuses = list(statuses)
        self.n = 0

    def get(self, url, params, timeout, proxies):
        self.n += 1
        status = self.statuses.pop(0)
        return FakeResponse(status, {"status": status})


def test_transport_retries_then_succeeds():
    clock = FakeClock()
    session = FakeSession([429, 503, 200])
    tr = Transport(RateLimiter(1e9, clock=clock, sleep=clock.sleep), session=session, sleep=clock.sleep)
    assert tr.get("u", {}) == {"status": 200}
    assert session.n == 3


def test_transport_gives_up():
    clock = FakeClock()
    tr = Transport(RateLimiter(1e9, clock=clock, sleep=clock.sleep), retries=3,
                   session=FakeSession([500] * 3), sleep=clock.sleep)
    with pytest.raises(NetworkError):
        tr.get("u", {})


def test_transport_non_retryable_is_http_error():
    clock = FakeClock()
    session = FakeSession([400])
    tr = Transport(RateLimiter(1e9, clock=clock, sleep=clock.sleep), session=session, sleep=clock.sleep)
    with pytest.raises(HttpError):
        tr.get("u", {})
    assert session.n == 1


# build_candles_from_trades

def test_single_trade_candle():
    (c,) = build_candles_from_trades([trade(T0 * 1000 + 10, 100.0, 2.0)])
    assert (c.ts, c.open, c.high, c.low, c.close, c.volume) == (T0, 100, 100, 100, 100, 2)


def test_ohlc_definition():
    tape = [trade(T0 * 1000 + k, p, tid=k) for k, p in enumerate([100.0, 110.0, 90.0, 105.0])]
    (c,) = build_candles_from_trades(tape)
    assert (c.open, c.high, c.low, c.close) == (100, 110, 90, 105)


def test_empty_tape():
    assert build_candles_from_trades([]) == []


def test_candle_count_matches_brute_force_grouping():
    rng = np.random.default_rng(3)
    per_symbol = {}
    for s in range(61):
        ts = np.sort(rng.integers(T0 * 1000, (T0 + 48 * H) * 1000, rng.integers(0, 40)))
        per_symbol[s] = [trade(int(t), 1.0 + rng.random(), tid=k) for k, t in enumerate(ts)]
    total = sum(len(build_candles_from_trades(tape)) for tape in per_symbol.values())
    pairs = {(s, t.ts_ms // 1000 // H) for s, tape in per_symbol.items() for t in tape}
    assert total == len(pairs)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10 * H * 1000), st.floats(0.01, 1e5), st.floats(1e-6, 1e3)),
                min_size=1, max_size=60))
def test_candle_volume_and_bounds(rows):
    rows.sort(key=lambda r: r[0])
    tape = [trade(T0 * 1000 + ms, p, a, tid=k) for k, (ms, p, a) in enumerate(rows)]
    candles = build_candles_from_trades(tape)
    assert math.isclose(sum(c.volume for c in candles), math.fsum(t.amount for t in tape), rel_tol=1e-12)
    for c in candles:
        assert c.low <= min(c.open, c.close) <= max(c.open, c.close) <= c.high
    assert [c.ts for c in candles] == sorted({c.ts for c in candles})


# CSV archives

def test_csv_round_trip_exact(tmp_path):
    candles = [Candle(T0 + k * H, 0.1 + k, 0.3 + k, 0.1 + k, 0.2 + k, 1 / 3) for k in range(5)]
    tape = [trade(T0 * 1000 + k, 1 / 7 + k, 2 / 3, SELL if k % 2 else BUY, 10 + k) for k in range(5)]
    csvio.export_candles(candles, tmp_path / "c.csv")
    csvio.export_trades(tape, tmp_path / "t.csv")
    assert csvio.import_candles(tmp_path / "c.csv") == candles
    assert csvio.import_trades(tmp_path / "t.csv") == tape
    assert (tmp_path / "c.csv").read_bytes().startswith(b"ts,open,high,low,close,volume\r\n")


def test_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        csvio.candles_from_csv("time,o,h,l,c,v\r\n")


# store and panel assembly

def _candles(n, start=T0, skip=(), price=lambda k: 100.0 + k):
    return [Candle(start + k * H, price(k), price(k), price(k), price(k), 1.0) for k in range(n) if k not in skip]


def test_store_is_idempotent(tmp_path):
    store = DataStore(tmp_path)
    cs = _candles(30)
    assert store.write("x", "BTC", CANDLES, "USD", cs, T0, T0 + 30 * H) == 30
    assert store.write("x", "BTC", CANDLES, "USD", cs, T0, T0 + 30 * H) == 0
    reopened = DataStore(tmp_path)
    assert reopened.candles("x", "BTC", T0, T0 + 30 * H) == cs
    assert reopened.missing_days("x", "BTC", CANDLES, T0, T0 + 24 * H) == []


def test_store_refuses_quote_change(tmp_path):
    store = DataStore(tmp_path)
    store.write("x", "BTC", CANDLES, "USD", _candles(2), T0, T0 + 2 * H)
    with pytest.raises(MixedQuote):
        store.write("x", "BTC", CANDLES, "BUSD", _candles(2), T0, T0 + 2 * H)


def test_manifest_merges_ranges():
    m = StoreManifest("x", "BTC", CANDLES, "USD")
    m.add_range(10, 20)
    m.add_range(30, 40)
    m.add_range(20, 30)
    assert m.ranges == [[10, 40]] and m.covers(15, 35)
    assert StoreManifest.from_dict(m.to_dict()) == m


class CountingClient:
    name = "fake"
    quote = "USD"

    def __init__(self):
        self.requests = []

    def fetch_candles(self, symbol, start, end):
        self.requests.append((symbol, start, end))
        return _candles((end - start) // H, start)

    def fetch_trades(self, symbol, start, end):
        self.requests.append((symbol, start, end))
        return [trade(start * 1000 + 5, 10.0, tid=start)]


def test_sync_resumes_without_refetching(tmp_path):
    store = DataStore(tmp_path)
    client = CountingClient()
    first = sync(store, client, ["A", "B"], T0, T0 + 48 * H, (CANDLES, TRADES), workers=2)
    assert first[("A", CANDLES)] == 48
    n = len(client.requests)
    again = sync(DataStore(tmp_path), client, ["A", "B"], T0, T0 + 48 * H, (CANDLES, TRADES))
    assert again == {} and len(client.requests) == n


def test_full_panel_has_no_fills(tmp_path):
    store = DataStore(tmp_path)
    syms = [f"S{i}" for i in range(61)]
    for s in syms:
        store.write("x", s, CANDLES, "USD", _candles(384), T0, T0 + 384 * H)
    pp = load_panel(store, "x", syms, T0, T0 + 384 * H)
    assert pp.close.shape == (61, 384) and not pp.fill_flags.any()


def test_forward_fill_one_hour(tmp_path):
    store = DataStore(tmp_path)
    store.write("x", "A", CANDLES, "USD", _candles(24, skip={7}), T0, T0 + 24 * H)
    pp = load_panel(store, "x", ["A"], T0, T0 + 24 * H)
    assert pp.close[0, 7] == pp.close[0, 6] == 106.0
    assert pp.fill_flags.sum() == 1 and pp.fill_flags[0, 7]


@pytest.mark.parametrize("gap,raises", [(6, False), (7, True)])
def test_gap_threshold(tmp_path, gap, raises):
    store = DataStore(tmp_path)
    store.write("x", "A", CANDLES, "USD", _candles(24, skip=set(range(5, 5 + gap))), T0, T0 + 24 * H)
    if raises:
        with pytest.raises(GapTooLarge):
            load_panel(store, "x", ["A"], T0, T0 + 24 * H)
    else:
        assert load_panel(store, "x", ["A"], T0, T0 + 24 * H).fill_flags.sum() == gap


def test_panel_errors(tmp_path):
    store = DataStore(tmp_path)
    store.write("x", "A", CANDLES, "USD", _candles(5), T0, T0 + 5 * H)
    store.write("x", "B", CANDLES, "BUSD", _candles(5), T0, T0 + 5 * H)
    with pytest.raises(MissingSymbol):
        load_panel(store, "x", ["A", "C"], T0, T0 + 5 * H)
    with pytest.raises(MixedQuote):
        load_panel(store, "x", ["A", "B"], T0, T0 + 5 * H)
    with pytest.raises(GapTooLarge):
        load_panel(store, "x", ["A"], T0 - H, T0 + 5 * H)


def test_import_archive(tmp_path):
    src = tmp_path / "arch"
    src.mkdir()
    csvio.export_candles(_candles(3), src / "BTC.candles.csv")
    csvio.export_trades([trade(T0 * 1000, 5.0)], src / "BTC.trades.csv")
    store = DataStore(tmp_path / "store")
    import_archive(store, "archive", src, quote="USD")
    assert len(store.candles("archive", "BTC", T0, T0 + 3 * H)) == 3
    assert len(store.trades("archive", "BTC", T0, T0 + H)) == 1


def test_sorted_tape_grouping_matches_itertools():
    tape = [trade(T0 * 1000 + k * 700_000, 1.0 + k, tid=k) for k in range(20)]
    hours = [h for h, _ in itertools.groupby(tape, key=lambda t: t.ts_ms // 3_600_000)]
    assert [c.ts for c in build_candles_from_trades(tape)] == [h * H for h in hours]

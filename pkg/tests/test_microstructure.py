import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crashnet.errors import UnorderedInput
from crashnet.ingest.types import BUY, SELL, TradeRecord
from crashnet.microstructure import bars_csv, hourly_imbalance, imbalance_report, report_text

from conftest import T0

MS = T0 * 1000


def tr(offset_ms, price, amount, side, tid=0):
    return TradeRecord(MS + offset_ms, price, amount, side, tid)


def test_single_buy_is_negative():
    (bar,) = hourly_imbalance([tr(0, 30_000.0, 2.0, BUY)])
    assert bar.imbalance == -60_000.0 and bar.hour == T0


def test_balanced_hour():
    (bar,) = hourly_imbalance([tr(0, 10.0, 3.0, BUY), tr(5, 15.0, 2.0, SELL, 1)])
    assert bar.imbalance == 0.0


def test_mixed_tape_hand_sum():
    (bar,) = hourly_imbalance([tr(0, 100.0, 1.0, BUY), tr(1, 100.0, 2.0, SELL, 1), tr(2, 50.0, 1.0, SELL, 2)])
    assert (bar.sell_notional, bar.buy_notional, bar.imbalance) == (250.0, 100.0, 150.0)


def test_empty_hours_are_zero_bars():
    bars = hourly_imbalance([tr(0, 1.0, 1.0, BUY), tr(3 * 3_600_000 + 1, 1.0, 1.0, SELL, 1)])
    assert [b.hour - T0 for b in bars] == [0, 3600, 7200, 10800]
    assert bars[1].buy_notional == bars[1].sell_notional == 0.0


def test_empty_and_unordered():
    assert hourly_imbalance([]) == []
    with pytest.raises(UnorderedInput):
        hourly_imbalance([tr(10, 1.0, 1.0, BUY), tr(5, 1.0, 1.0, BUY, 1)])


trade_rows = st.lists(st.tuples(st.integers(0, 6 * 3_600_000), st.floats(0.01, 1e5), st.floats(1e-6, 1e3),
                                st.sampled_from([BUY, SELL])), min_size=1, max_size=80)


def _tape(rows):
    rows = sorted(rows, key=lambda r: r[0])
    return [tr(ms, p, a, s, k) for k, (ms, p, a, s) in enumerate(rows)]


@settings(max_examples=80, deadline=None)
@given(trade_rows)
def test_notional_conserved(rows):
    tape = _tape(rows)
    bars = hourly_imbalance(tape)
    total = math.fsum(t.notional for t in tape)
    got = math.fsum(b.buy_notional + b.sell_notional for b in bars)
    assert abs(got - total) <= 1e-9 * total


@settings(max_examples=80, deadline=None)
@given(trade_rows)
def test_one_sided_tapes_and_side_flip(rows):
    tape = _tape(rows)
    buys = hourly_imbalance([TradeRecord(t.ts_ms, t.price, t.amount, BUY, t.trade_id) for t in tape])
    sells = hourly_imbalance([TradeRecord(t.ts_ms, t.price, t.amount, SELL, t.trade_id) for t in tape])
    assert all(b.imbalance < 0 for b in buys if b.buy_notional)
    assert all(b.imbalance > 0 for b in sells if b.sell_notional)
    flipped = hourly_imbalance([t.flipped() for t in tape])
    assert [b.imbalance for b in flipped] == [-b.imbalance for b in hourly_imbalance(tape)]


def test_report_peaks_and_events():
    tape = [tr(h * 3_600_000, 10.0, float(h + 1), SELL, h) for h in range(8)]
    rep = imbalance_report(hourly_imbalance(tape), {"a": T0 + 7200}, top=3)
    bars = hourly_imbalance(tape)
    assert rep.top_positive[0] == max(bars, key=lambda b: b.imbalance)
    assert [b.hour - T0 for b in rep.top_positive] == [7 * 3600, 6 * 3600, 5 * 3600]
    assert rep.top_negative == []
    assert rep.event_bars()["a"].imbalance == 30.0
    assert "event (a)" in report_text("BTC", rep, "USD")


def test_empty_report():
    rep = imbalance_report([])
    assert rep.bars == [] and rep.top_positive == [] and rep.top_negative == []


def test_bars_csv_header():
    assert bars_csv([]).splitlines() == ["hour,buy_notional,sell_notional,imbalance"]

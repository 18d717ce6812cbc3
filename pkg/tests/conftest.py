import json
from pathlib import Path

import numpy as np
import pytest

from crashnet.ingest.http import HttpError
from crashnet.panel import PricePanel, ReturnPanel

FIXTURES = Path(__file__).parent / "fixtures"
T0 = 1651363200  # 2022-05-01T00:00Z


class Replay:
    """``get(url, params)`` that answers from recorded request/response pairs and logs every call."""

    def __init__(self, exchanges):
        self.entries = exchanges
        self.calls = []

    def __call__(self, url, params):
        self.calls.append((url, dict(params)))
        for e in self.entries:
            if e["url"] == url and {k: str(v) for k, v in e["params"].items()} == {k: str(v) for k, v in params.items()}:
                if e.get("status", 200) != 200:
                    raise HttpError(e["status"], e["response"])
                return e["response"]
        raise AssertionError(f"unrecorded request {url} {params}")


@pytest.fixture
def replay():
    doc = json.loads((FIXTURES / "http_replay.json").read_text())
    return lambda exchange: Replay(doc[exchange])


def make_returns(r: np.ndarray, t0: int = T0) -> ReturnPanel:
    r = np.asarray(r, dtype=float)
    ts = t0 + 3600 * np.arange(1, r.shape[1] + 1)
    return ReturnPanel(ts, [f"A{i}" for i in range(r.shape[0])], r)


def make_prices(close: np.ndarray, assets=None, t0: int = T0) -> PricePanel:
    close = np.asarray(close, dtype=float)
    assets = assets or [f"A{i}" for i in range(close.shape[0])]
    return PricePanel(t0 + 3600 * np.arange(close.shape[1]), list(assets), close, None)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.pytest_terminal_summary_lines():
        terminalreporter.write_line(line)

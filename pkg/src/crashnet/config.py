"""Run configuration: a TOML file with sections, every key overridable by a CLI flag of the same name."""
from __future__ import annotations

import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidParameter

log = logging.getLogger(__name__)

DEFAULT_EVENTS = {
    "a": "2022-05-05T12:00Z",
    "b": "2022-05-07T22:00Z",
    "c": "2022-05-09T14:00Z",
    "d": "2022-05-11T10:00Z",
}


def parse_time(value) -> int:
    """Epoch seconds from an int or an ISO-8601 string (``Z`` suffix allowed, UTC assumed)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return int(value)
    text = str(value).strip()
    if text.lstrip("-").isdigit():
        return int(text)
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse time {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _section(name):
    return {"section": name}


@dataclass
class RunConfig:
    # [data]
    exchange: str = field(default="kraken", metadata=_section("data"))
    registry: str = field(default="", metadata=_section("data"))
    assets: list = field(default_factory=list, metadata=_section("data"))
    start: str = field(default="2022-05-01T00:00Z", metadata=_section("data"))
    end: str = field(default="2022-05-17T00:00Z", metadata=_section("data"))
    store: str = field(default="data", metadata=_section("data"))
    max_gap: int = field(default=6, metadata=_section("data"))
    trade_symbols: list = field(default_factory=lambda: ["BTC", "LUNA", "UST"], metadata=_section("data"))
    workers: int = field(default=1, metadata=_section("data"))
    # [stats]
    excess_kurtosis: bool = field(default=False, metadata=_section("stats"))
    # [corr]
    window: int = field(default=24, metadata=_section("corr"))
    step: int = field(default=1, metadata=_section("corr"))
    theta: float = field(default=0.3, metadata=_section("corr"))
    theta_literal: bool = field(default=False, metadata=_section("corr"))
    ema_alpha: float = field(default=0.3, metadata=_section("corr"))
    dump_matrices: bool = field(default=False, metadata=_section("corr"))
    # [tmfg]
    focus: list = field(default_factory=lambda: ["LUNA", "UST", "BTC"], metadata=_section("tmfg"))
    similarity: str = field(default="rho", metadata=_section("tmfg"))
    centrality: str = field(default="weighted", metadata=_section("tmfg"))
    snapshots: list = field(default_factory=lambda: ["b", "c"], metadata=_section("tmfg"))
    # [herding]
    lag: str = field(default="auto", metadata=_section("herding"))
    pvalue: str = field(default="t", metadata=_section("herding"))
    rolling_window: int = field(default=168, metadata=_section("herding"))
    exclude_sector: list = field(default_factory=lambda: ["Stablecoins"], metadata=_section("herding"))
    # [imbalance]
    top_peaks: int = field(default=5, metadata=_section("imbalance"))
    # [events]
    events: dict = field(default_factory=lambda: dict(DEFAULT_EVENTS), metadata=_section("events"))
    # [output]
    out: str = field(default="out", metadata=_section("output"))
    seed: int = field(default=0, metadata=_section("output"))

    @property
    def start_ts(self) -> int:
        return parse_time(self.start)

    @property
    def end_ts(self) -> int:
        return parse_time(self.end)

    @property
    def event_ts(self) -> dict:
        return {k: parse_time(v) for k, v in sorted(self.events.items())}

    @property
    def hac_lag(self):
        return "auto" if str(self.lag).lower() == "auto" else int(self.lag)

    def validate(self) -> "RunConfig":
        if self.start_ts >= self.end_ts:
            raise InvalidParameter(f"start {self.start} must precede end {self.end}")
        if self.window < 2:
            raise InvalidParameter("window must be >= 2")
        if self.step < 1:
            raise InvalidParameter("step must be >= 1")
        if not self.theta > 0:
            raise InvalidParameter("theta must be positive")
        if not 0 < self.ema_alpha <= 1:
            raise InvalidParameter("ema_alpha must be in (0, 1]")
        if self.similarity not in ("rho", "rho2"):
            raise InvalidParameter("similarity must be 'rho' or 'rho2'")
        if self.centrality not in ("weighted", "binary"):
            raise InvalidParameter("centrality must be 'weighted' or 'binary'")
        if self.pvalue not in ("t", "normal"):
            raise InvalidParameter("pvalue must be 't' or 'normal'")
        lag = self.hac_lag
        if lag != "auto" and lag < 0:
            raise InvalidParameter("lag must be 'auto' or a non-negative integer")
        for label, ts in self.event_ts.items():
            if not self.start_ts <= ts < self.end_ts:
                log.warning("event marker (%s) at %s lies outside the date range", label, self.events[label])
        return self


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def coerce(name: str, value):
    """Convert a flag or file value to the type of config key ``name``."""
    f = FIELDS[name]
    default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        text = str(value).lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise InvalidParameter(f"{name}: expected a boolean, got {value!r}")
    if isinstance(default, list):
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return [str(v) for v in value]
    if isinstance(default, dict):
        return {str(k): str(v) for k, v in dict(value).items()}
    try:
        return type(default)(value)
    except (TypeError, ValueError) as exc:
        raise InvalidParameter(f"{name}: cannot convert {value!r}") from exc


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        for section, body in doc.items():
            if section == "events":
                values["events"] = body
                continue
            if not isinstance(body, dict):
                raise InvalidParameter(f"top-level key {section!r} must live in a section")
            for key, value in body.items():
                if key not in FIELDS or FIELDS[key].metadata.get("section") != section:
                    raise InvalidParameter(f"unknown config key [{section}] {key}")
                values[key] = value
    for key, value in (overrides or {}).items():
        if key == "events":
            merged = dict(values.get("events", DEFAULT_EVENTS))
            merged.update(value)
            value = merged
        values[key] = value
    cfg = RunConfig(**{k: coerce(k, v) for k, v in values.items()})
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    """TOML text for ``cfg`` (flat values only, which is all RunConfig holds)."""
    sections: dict[str, list[str]] = {}
    for f in dataclasses.fields(cfg):
        sec = f.metadata["section"]
        value = getattr(cfg, f.name)
        if sec == "events":
            sections.setdefault("events", []).extend(f'{k} = "{v}"' for k, v in sorted(value.items()))
            continue
        sections.setdefault(sec, []).append(f"{f.name} = {_toml_value(value)}")
    return "\n".join(f"[{sec}]\n" + "\n".join(lines) + "\n" for sec, lines in sections.items())


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'

"""Pipeline stages behind the CLI subcommands; each writes CSV and SVG files under ``<out>/<stage>/``."""
from __future__ import annotations

import csv
import io
import logging
import shutil
from pathlib import Path

import numpy as np

from . import corrnet, herding, microstructure, panel, svg, synthetic
from .config import RunConfig, dump_config
from .errors import MissingStageOutput, SymbolUnknown, TooFewAssetsRemain
from .ingest import DataStore, import_archive, load_panel, make_client, sync
from .ingest.types import CANDLES, TRADES
from .registry import load_registry, symbols_in_sectors
from .tmfg import centrality as tmfg_centrality
from .tmfg.layout import spring_positions

log = logging.getLogger(__name__)

STAGES = ("stats", "corr", "tmfg", "herd", "imbalance")
STAGE_MARKERS = {
    "stats": "descriptive.csv",
    "corr": "avg_corr.csv",
    "tmfg": "centrality.csv",
    "herd": "regressions.csv",
    "imbalance": "peaks.txt",
}


def _registry(cfg: RunConfig):
    return load_registry(cfg.registry or None)


def resolve_assets(cfg: RunConfig) -> list[str]:
    reg = _registry(cfg)
    known = {a.symbol for a in reg}
    if cfg.assets:
        assets = list(cfg.assets)
    elif cfg.exchange == synthetic.EXCHANGE:
        assets = list(synthetic.ASSETS)
    else:
        assets = [a.symbol for a in reg]
    for sym in assets:
        if sym not in known:
            raise SymbolUnknown(sym)
    return assets


def _stage_dir(cfg: RunConfig, stage: str) -> Path:
    d = Path(cfg.out) / stage
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(path: Path, text: str, written: list):
    path.write_text(text, encoding="utf-8", newline="")
    written.append(path)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load_returns(cfg: RunConfig):
    store = DataStore(cfg.store)
    pp = load_panel(store, cfg.exchange, resolve_assets(cfg), cfg.start_ts, cfg.end_ts, cfg.max_gap)
    return pp, panel.log_returns(pp)


# fetch

def run_fetch(cfg: RunConfig, synthetic_fixture=None, import_dir=None) -> list[str]:
    """``synthetic_fixture`` is None, True (crash regime) or a regime name from ``synthetic.REGIMES``."""
    store = DataStore(cfg.store)
    if synthetic_fixture:
        hours = (cfg.end_ts - cfg.start_ts) // 3600 if cfg.exchange == synthetic.EXCHANGE else 400
        regime = "crash" if synthetic_fixture is True else synthetic_fixture
        synthetic.write_fixture(store, n_hours=hours, seed=7 + cfg.seed, regime=regime)
    elif import_dir:
        import_archive(store, cfg.exchange, import_dir)
    else:
        assets = resolve_assets(cfg)
        for exchange in cfg.exchange.split(","):
            client = make_client(exchange.strip())
            sync(store, client, assets, cfg.start_ts, cfg.end_ts, (CANDLES,), workers=cfg.workers)
            trade_syms = [s for s in cfg.trade_symbols if s in assets]
            sync(store, client, trade_syms, cfg.start_ts, cfg.end_ts, (TRADES,), workers=cfg.workers)
    return store.summary()


# stats

def run_stats(cfg: RunConfig) -> list[Path]:
    out = _stage_dir(cfg, "stats")
    written = []
    pp, rp = _load_returns(cfg)
    mkt = panel.market_return(rp)
    rows = [(a, panel.describe(rp, a, cfg.excess_kurtosis)) for a in rp.assets]
    rows.append(("MARKET", panel.describe_series(mkt.values, cfg.excess_kurtosis)))
    _write(out / "descriptive.csv", panel.stats_csv(rows), written)
    _write(out / "market.csv", _table(["timestamp", "market_return"],
                                      [[int(t), f"{v:.10g}"] for t, v in zip(mkt.timestamps, mkt.values)]), written)
    scaled = panel.rescale(pp)
    _write(out / "rescaled.csv", _table(["timestamp"] + pp.assets,
                                        [[int(t)] + [f"{x:.10g}" for x in scaled[:, k]]
                                         for k, t in enumerate(pp.timestamps)]), written)
    fills = [[a, int(pp.timestamps[j])] for i, a in enumerate(pp.assets) for j in np.flatnonzero(pp.fill_flags[i])]
    _write(out / "fills.csv", _table(["asset", "timestamp"], fills), written)
    ev = cfg.event_ts
    if "b" in ev and "d" in ev:
        try:
            avg = panel.average_returns(rp, ev["b"], ev["d"])
        except panel.EmptyWindow:
            log.warning("no returns between events (b) and (d); skipping average returns")
        else:
            ranked = panel.rank_returns(avg)
            _write(out / "average_returns.csv", _table(["asset", "average_return"],
                                                       [[a, f"{v:.6g}"] for a, v in ranked]), written)
    focus = [f for f in cfg.focus if f in pp.assets] or pp.assets[:3]
    chart = svg.line_chart(pp.timestamps, {a: scaled[pp.assets.index(a)] for a in focus},
                           title="Rescaled hourly closing prices", ylabel="price / first price", events=ev)
    _write(out / "prices.svg", chart, written)
    return written


# corr

def _rolling(cfg: RunConfig, rp):
    return corrnet.rolling_corr(rp, cfg.window, cfg.step, cfg.theta, cfg.theta_literal)


def run_corr(cfg: RunConfig) -> list[Path]:
    out = _stage_dir(cfg, "corr")
    written = []
    _, rp = _load_returns(cfg)
    rolling = _rolling(cfg, rp)
    focus = [f for f in cfg.focus if f in rp.assets] + [corrnet.MARKET]
    _write(out / "avg_corr.csv", corrnet.avg_corr_csv(rolling, focus), written)
    _write(out / "avg_corr_smoothed.csv", corrnet.avg_corr_csv(rolling, focus, cfg.ema_alpha), written)
    if cfg.dump_matrices:
        _write(out / "matrices.csv", corrnet.matrices_csv(rolling), written)
    series = {f: corrnet.ema(corrnet.average_corr(rolling, f), cfg.ema_alpha) for f in focus}
    chart = svg.line_chart(rolling.window_ends, series, title="Smoothed weighted average correlation",
                           ylabel="average correlation", events=cfg.event_ts)
    _write(out / "avg_corr.svg", chart, written)
    return written


# tmfg

def run_tmfg(cfg: RunConfig) -> list[Path]:
    out = _stage_dir(cfg, "tmfg")
    written = []
    _, rp = _load_returns(cfg)
    rolling = _rolling(cfg, rp)
    focus = [f for f in cfg.focus if f in rp.assets]
    cs = tmfg_centrality.centrality_series(rolling, focus, alpha=cfg.ema_alpha, transform=cfg.similarity,
                                           weighted=cfg.centrality == "weighted")
    _write(out / "edges.csv", tmfg_centrality.edges_csv(cs), written)
    _write(out / "centrality.csv", tmfg_centrality.centrality_csv(cs), written)
    _write(out / "bands.csv", tmfg_centrality.bands_csv(cs), written)
    bands = []
    if cs.bands is not None:
        v = cs.bands.values
        bands = [(v[:, 0], v[:, 5], "#9ecae1", 0.35), (v[:, 1], v[:, 4], "#6baed6", 0.35),
                 (v[:, 2], v[:, 3], "#3182bd", 0.35)]
    chart = svg.line_chart(cs.window_ends, {f: cs.series(f) for f in focus}, title="TMFG eigenvector centrality",
                           ylabel="centrality (smoothed)", events=cfg.event_ts, bands=bands)
    _write(out / "centrality.svg", chart, written)
    ev = cfg.event_ts
    for label in cfg.snapshots:
        if label not in ev:
            continue
        idx = np.flatnonzero(cs.window_ends <= ev[label])
        if idx.size == 0:
            log.warning("no window ends at or before event (%s); snapshot skipped", label)
            continue
        k = int(idx[-1])
        g = cs.graphs[k]
        pos = spring_positions(g, seed=cfg.seed)
        _write(out / f"snapshot_{label}.csv", _table(
            ["asset", "x", "y", "centrality"],
            [[a, f"{pos[i, 0]:.6f}", f"{pos[i, 1]:.6f}", f"{cs.raw[k, i]:.10g}"] for i, a in enumerate(cs.assets)]),
            written)
        edges = [(i, j, w) for (i, j), w in g.edges.items()]
        pic = svg.network_chart(pos, edges, cs.assets, cs.raw[k], highlight=focus,
                                title=f"TMFG at event ({label}), window ending {int(cs.window_ends[k])}")
        _write(out / f"snapshot_{label}.svg", pic, written)
    return written


# herd

def _herd_block(rp, cfg: RunConfig):
    mkt = panel.market_return(rp)
    cs = herding.csad(rp, mkt)
    results = [herding.run_herding(cs, mkt, form, cfg.hac_lag, cfg.pvalue)
               for form in (herding.SYMMETRIC, herding.ASYMMETRIC)]
    return mkt, cs, results


def run_herd(cfg: RunConfig) -> tuple[list[Path], str]:
    out = _stage_dir(cfg, "herd")
    written = []
    _, rp = _load_returns(cfg)
    mkt, cs, results = _herd_block(rp, cfg)
    _write(out / "csad.csv", _table(["timestamp", "csad", "market_return"],
                                    [[int(t), f"{c:.10g}", f"{m:.10g}"]
                                     for t, c, m in zip(cs.timestamps, cs.values, mkt.values)]), written)
    _write(out / "regressions.csv", herding.results_csv(results), written)
    lines = [f"{r.form}: {r.verdict()} (adj R2 {r.adj_r2:.3f}, lag {r.lag}, T {r.T})" for r in results]
    flagged = any(r.herding_terms() for r in results)
    if len(cs.values) >= cfg.rolling_window:
        rolling = herding.rolling_herding(cs, mkt, cfg.rolling_window, 1, herding.ASYMMETRIC, cfg.hac_lag, cfg.pvalue)
        _write(out / "rolling.csv", herding.rolling_csv(rolling), written)
        hits = sum(bool(r.herding_terms()) for r in rolling)
        lines.append(f"rolling {cfg.rolling_window}h asymmetric: {hits} of {len(rolling)} windows "
                     f"with significant herding")
    drop = [s for s in symbols_in_sectors(_registry(cfg), cfg.exclude_sector) if s in rp.assets]
    if drop:
        try:
            reduced = herding.exclude_assets(rp, drop)
        except TooFewAssetsRemain as exc:
            lines.append(f"exclusion of {','.join(drop)} skipped: {exc}")
        else:
            _, _, ex_results = _herd_block(reduced, cfg)
            _write(out / "regressions_excluded.csv", herding.results_csv(ex_results), written)
            flagged = flagged or any(r.herding_terms() for r in ex_results)
            lines += [f"without {','.join(drop)} ({r.form}): {r.verdict()}" for r in ex_results]
    lines.insert(0, "significant herding detected" if flagged else "no significant herding")
    summary = "\n".join(lines) + "\n"
    _write(out / "summary.txt", summary, written)
    chart = svg.line_chart(cs.timestamps, {"CSAD": cs.values, "|r_m|": np.abs(mkt.values)},
                           title="Cross-sectional absolute deviation", ylabel="log-return", events=cfg.event_ts)
    _write(out / "csad.svg", chart, written)
    return written, summary


# imbalance

def run_imbalance(cfg: RunConfig) -> tuple[list[Path], str]:
    out = _stage_dir(cfg, "imbalance")
    written = []
    store = DataStore(cfg.store)
    texts = []
    for sym in cfg.trade_symbols:
        trades = store.trades(cfg.exchange, sym, cfg.start_ts, cfg.end_ts)
        quote = store.manifest(cfg.exchange, sym, TRADES).quote
        bars = microstructure.hourly_imbalance(trades)
        rep = microstructure.imbalance_report(bars, cfg.event_ts, cfg.top_peaks)
        _write(out / f"{sym}.csv", microstructure.bars_csv(bars), written)
        texts.append(microstructure.report_text(sym, rep, quote))
        if bars:
            chart = svg.bar_chart([b.hour for b in bars], [b.imbalance for b in bars],
                                  title=f"{sym} hourly imbalance ({cfg.exchange}, {quote})",
                                  ylabel="sell - buy notional", events=cfg.event_ts)
            _write(out / f"{sym}.svg", chart, written)
    text = "".join(texts)
    _write(out / "peaks.txt", text, written)
    return written, text


# report

def run_report(cfg: RunConfig) -> Path:
    root = Path(cfg.out)
    for stage in STAGES:
        marker = root / stage / STAGE_MARKERS[stage]
        if not marker.exists():
            raise MissingStageOutput(stage, marker)
    dest = root / "report"
    if dest.exists():
        shutil.rmtree(dest)
    dest.mkdir(parents=True)
    tables, plots = [], []
    for stage in STAGES:
        for src in sorted((root / stage).iterdir()):
            if not src.is_file():
                continue
            target = dest / stage / src.name
            target.parent.mkdir(exist_ok=True)
            shutil.copyfile(src, target)
            rel = f"{stage}/{src.name}"
            (plots if src.suffix == ".svg" else tables).append(rel)
    (dest / "config.toml").write_text(dump_config(cfg), encoding="utf-8")
    lines = ["# Crash analysis report", "", f"exchange: {cfg.exchange}", f"range: {cfg.start} .. {cfg.end}", "",
             "## Plots", ""]
    lines += [f"- [{p}]({p})" for p in plots]
    lines += ["", "## Tables", ""]
    lines += [f"- [{t}]({t})" for t in tables]
    (dest / "index.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return dest

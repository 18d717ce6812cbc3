from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .. import _backend
from ..corrnet import RollingCorrSeries, ema
from ..errors import InsufficientData, NoConvergence
from .graph import TmfgGraph, build_tmfg

PERCENTILES = (1, 5, 25, 75, 95, 99)


@dataclass(frozen=True)
class CentralityVector:
    values: np.ndarray
    eigenvalue: float
    iterations: int
    window_end: int | None = None


def eigenvector_centrality(g: TmfgGraph, weighted: bool = True, tol: float = 1e-10,
                           max_iter: int = 10_000, kernels=None) -> CentralityVector:
    """Perron vector of the |weight| (or binary) adjacency by power iteration from a uniform start."""
    k = kernels or _backend.kernels
    a = np.ascontiguousarray(g.adjacency(weighted))
    v, it, delta = k.power_iteration(a, float(tol), int(max_iter))
    if not delta < tol:
        raise NoConvergence(it, delta)
    v = np.abs(np.asarray(v))
    v /= np.linalg.norm(v)
    return CentralityVector(v, float(v @ a @ v), int(it))


def similarity_from_corr(rho: np.ndarray, transform: str = "rho") -> np.ndarray:
    if transform == "rho":
        return rho
    if transform == "rho2":
        return rho * rho
    raise ValueError(f"unknown similarity transform {transform!r}")


@dataclass
class PercentileBands:
    levels: tuple
    values: np.ndarray  # (W, len(levels)); rows are non-decreasing


@dataclass
class CentralitySeries:
    window_ends: np.ndarray
    assets: list
    raw: np.ndarray  # (W, N)
    smoothed: np.ndarray  # (W, N), EMA over windows per asset
    focus: list
    bands: PercentileBands | None  # None when every asset is in focus
    graphs: list

    def series(self, asset: str, smoothed: bool = True) -> np.ndarray:
        i = self.assets.index(asset)
        return (self.smoothed if smoothed else self.raw)[:, i]


def centrality_series(rolling: RollingCorrSeries, focus, alpha: float = 0.3, transform: str = "rho",
                      weighted: bool = True, kernels=None) -> CentralitySeries:
    """TMFG centrality per window, EMA-smoothed, with percentile bands over the non-focus assets."""
    if len(rolling) == 0:
        raise InsufficientData("no correlation windows")
    focus = list(focus)
    for f in focus:
        if f not in rolling.assets:
            raise KeyError(f"focus asset {f!r} not in panel")
    graphs, raw = [], []
    for mat in rolling.matrices:
        g = build_tmfg(similarity_from_corr(mat, transform), kernels=kernels)
        graphs.append(g)
        raw.append(eigenvector_centrality(g, weighted=weighted, kernels=kernels).values)
    raw = np.array(raw)
    smoothed = np.column_stack([ema(raw[:, i], alpha) for i in range(raw.shape[1])])
    rest = [i for i, a in enumerate(rolling.assets) if a not in focus]
    bands = None
    if rest:
        bands = PercentileBands(PERCENTILES, np.percentile(smoothed[:, rest], PERCENTILES, axis=1).T)
    return CentralitySeries(rolling.window_ends.copy(), list(rolling.assets), raw, smoothed, focus, bands, graphs)


def edges_csv(cs: CentralitySeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_end", "source", "target", "weight"])
    for ts, g in zip(cs.window_ends, cs.graphs):
        for (i, j), wt in g.edges.items():
            w.writerow([int(ts), cs.assets[i], cs.assets[j], f"{wt:.10g}"])
    return buf.getvalue()


def centrality_csv(cs: CentralitySeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_end", "asset", "centrality", "smoothed"])
    for k, ts in enumerate(cs.window_ends):
        for i, a in enumerate(cs.assets):
            w.writerow([int(ts), a, f"{cs.raw[k, i]:.10g}", f"{cs.smoothed[k, i]:.10g}"])
    return buf.getvalue()


def bands_csv(cs: CentralitySeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_end"] + [f"p{lvl}" for lvl in PERCENTILES])
    if cs.bands is not None:
        for ts, row in zip(cs.window_ends, cs.bands.values):
            w.writerow([int(ts)] + [f"{x:.10g}" for x in row])
    return buf.getvalue()

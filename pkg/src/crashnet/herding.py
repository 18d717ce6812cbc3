"""CSAD herding regressions with Newey-West (Bartlett kernel) inference."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .errors import (
    InsufficientData,
    LagTooLarge,
    LengthMismatch,
    RankDeficient,
    TooFewAssetsRemain,
    TooFewObservations,
    UnknownAsset,
)
from .panel import MarketReturnSeries, ReturnPanel

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"
AUTO = "auto"

COEF_NAMES = {
    SYMMETRIC: ("alpha", "abs_rm", "rm2"),
    ASYMMETRIC: ("alpha", "up_abs_rm", "down_abs_rm", "up_rm2", "down_rm2"),
}
SQUARED_TERMS = {"rm2", "up_rm2", "down_rm2"}


@dataclass
class CsadSeries:
    timestamps: np.ndarray
    values: np.ndarray


def _values(x):
    return np.asarray(getattr(x, "values", x), dtype=float)


def csad(rp: ReturnPanel, m: MarketReturnSeries | np.ndarray) -> CsadSeries:
    """Mean absolute deviation of asset returns from the market return, per hour."""
    mv = _values(m)
    if mv.shape != (rp.returns.shape[1],):
        raise LengthMismatch(f"market series length {mv.shape} vs {rp.returns.shape[1]} return columns")
    return CsadSeries(rp.timestamps.copy(), np.abs(rp.returns - mv).mean(axis=0))


def design_matrix(rm, form: str = SYMMETRIC) -> np.ndarray:
    r = _values(rm)
    a = np.abs(r)
    r2 = r * r
    one = np.ones_like(r)
    if form == SYMMETRIC:
        return np.column_stack([one, a, r2])
    if form == ASYMMETRIC:
        down = r < 0  # r_m == 0 belongs to the up branch
        up = ~down
        return np.column_stack([one, np.where(up, a, 0.0), np.where(down, a, 0.0),
                                np.where(up, r2, 0.0), np.where(down, r2, 0.0)])
    raise ValueError(f"unknown regression form {form!r}")


@dataclass
class OlsFit:
    coef: np.ndarray
    residuals: np.ndarray
    r2: float
    adj_r2: float
    xtx_inv: np.ndarray


def ols(X, y) -> OlsFit:
    """Least squares through a QR factorisation; X is expected to carry an intercept column."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    T, p = X.shape
    if y.shape != (T,):
        raise LengthMismatch(f"response length {y.shape} vs {T} design rows")
    if T <= p:
        raise TooFewObservations(f"{T} observations for {p} coefficients")
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= max(T, p) * np.finfo(float).eps * diag.max():
        raise RankDeficient("design matrix is not of full column rank")
    coef = solve_triangular(R, Q.T @ y)
    resid = y - X @ coef
    ssr = resid @ resid
    dev = y - y.mean()
    sst = dev @ dev
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * (T - 1) / (T - p)
    rinv = solve_triangular(R, np.eye(p))
    return OlsFit(coef, resid, float(r2), float(adj), rinv @ rinv.T)


def auto_lag(T: int) -> int:
    return int(math.floor(4 * (T / 100) ** (2 / 9)))


@dataclass
class HacCovariance:
    cov: np.ndarray
    se: np.ndarray
    lag: int


def newey_west(X, residuals, lag=AUTO, xtx_inv=None) -> HacCovariance:
    """Bartlett-kernel HAC covariance T (X'X)^-1 S (X'X)^-1 of OLS coefficients."""
    X = np.asarray(X, dtype=float)
    u = np.asarray(residuals, dtype=float)
    T = X.shape[0]
    L = auto_lag(T) if lag == AUTO else int(lag)
    if L < 0:
        raise ValueError("lag must be >= 0")
    if L >= T:
        raise LagTooLarge(f"lag {L} >= sample size {T}")
    xu = X * u[:, None]
    S = xu.T @ xu / T
    for l in range(1, L + 1):
        G = xu[l:].T @ xu[:-l] / T
        S += (1.0 - l / (L + 1)) * (G + G.T)
    if xtx_inv is None:
        xtx_inv = np.linalg.inv(X.T @ X)
    cov = T * xtx_inv @ S @ xtx_inv
    return HacCovariance(cov, np.sqrt(np.diag(cov)), L)


def white_sandwich(X, residuals) -> np.ndarray:
    """Heteroskedasticity-robust (HC0) covariance."""
    X = np.asarray(X, dtype=float)
    u = np.asarray(residuals, dtype=float)
    bread = np.linalg.inv(X.T @ X)
    meat = (X * (u * u)[:, None]).T @ X
    return bread @ meat @ bread


def stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


@dataclass
class HerdingRegressionResult:
    form: str
    names: tuple
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    r2: float
    adj_r2: float
    lag: int
    T: int
    k: int  # slope regressors, intercept excluded
    window_end: int | None = None

    @property
    def stars(self) -> list[str]:
        return [stars(p) for p in self.p]

    def __getitem__(self, name):
        i = self.names.index(name)
        return self.coef[i], self.se[i], self.t[i], self.p[i]

    def herding_terms(self, level: float = 0.05) -> list[str]:
        """Squared-return terms that are significantly negative at ``level``."""
        return [n for n, c, p in zip(self.names, self.coef, self.p)
                if n in SQUARED_TERMS and c < 0 and p < level]

    def verdict(self, level: float = 0.05) -> str:
        terms = self.herding_terms(level)
        if not terms:
            return "no significant herding"
        return "significant herding: " + ", ".join(terms) + " significantly negative"


def run_herding(csad_series, m, form: str = SYMMETRIC, lag=AUTO, pvalue: str = "t") -> HerdingRegressionResult:
    y = _values(csad_series)
    X = design_matrix(m, form)
    if X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"CSAD length {y.shape[0]} vs market length {X.shape[0]}")
    fit = ols(X, y)
    hac = newey_west(X, fit.residuals, lag, xtx_inv=fit.xtx_inv)
    T, p = X.shape
    tstat = fit.coef / hac.se
    if pvalue == "t":
        pv = 2 * stats.t.sf(np.abs(tstat), T - p)
    elif pvalue == "normal":
        pv = 2 * stats.norm.sf(np.abs(tstat))
    else:
        raise ValueError(f"unknown p-value convention {pvalue!r}")
    return HerdingRegressionResult(form, COEF_NAMES[form], fit.coef, hac.se, tstat, pv,
                                   fit.r2, fit.adj_r2, hac.lag, T, p - 1)


def rolling_herding(csad_series, m, window: int = 168, step: int = 1, form: str = ASYMMETRIC,
                    lag=AUTO, pvalue: str = "t") -> list[HerdingRegressionResult]:
    y = _values(csad_series)
    r = _values(m)
    stamps = getattr(csad_series, "timestamps", None)
    T = y.shape[0]
    if T < window:
        raise InsufficientData(f"{T} observations < rolling window {window}")
    out = []
    for end in range(window, T + 1, step):
        res = run_herding(y[end - window:end], r[end - window:end], form, lag, pvalue)
        if stamps is not None:
            res.window_end = int(stamps[end - 1])
        out.append(res)
    return out


def exclude_assets(rp: ReturnPanel, tickers) -> ReturnPanel:
    drop = set(tickers)
    unknown = drop - set(rp.assets)
    if unknown:
        raise UnknownAsset(f"cannot exclude unknown assets {sorted(unknown)}")
    keep = [i for i, a in enumerate(rp.assets) if a not in drop]
    if len(keep) < 2:
        raise TooFewAssetsRemain(f"only {len(keep)} assets left after exclusion")
    return ReturnPanel(rp.timestamps.copy(), [rp.assets[i] for i in keep], rp.returns[keep].copy())


def results_csv(results: list[HerdingRegressionResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["form", "coef_name", "estimate", "nw_se", "t", "p", "stars"])
    for res in results:
        for i, name in enumerate(res.names):
            w.writerow([res.form, name, f"{res.coef[i]:.6g}", f"{res.se[i]:.6g}", f"{res.t[i]:.4f}",
                        f"{res.p[i]:.4g}", res.stars[i]])
        for name, value in (("R2", f"{res.r2:.6g}"), ("adj_R2", f"{res.adj_r2:.6g}"),
                            ("lag", str(res.lag)), ("T", str(res.T))):
            w.writerow([res.form, name, value, "", "", "", ""])
    return buf.getvalue()


def rolling_csv(results: list[HerdingRegressionResult], level: float = 0.05) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not results:
        return ""
    names = results[0].names
    w.writerow(["window_end"] + [f"{n}_{s}" for n in names for s in ("estimate", "p")] + ["herding"])
    for res in results:
        row = [res.window_end if res.window_end is not None else ""]
        for i in range(len(names)):
            row += [f"{res.coef[i]:.6g}", f"{res.p[i]:.4g}"]
        row.append(int(bool(res.herding_terms(level))))
        w.writerow(row)
    return buf.getvalue()

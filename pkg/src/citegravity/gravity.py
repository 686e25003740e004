"""Log-linear gravity model fitted by OLS with HC1 robust standard errors.

The estimated equation is

    ln C_ij = ln k + alpha ln M_i + beta ln M_j + coef_d ln d_ij + e

or, in the band specification, the distance term replaced by one dummy per
distance band above the reference band. Coefficients are stored fully
signed. Reports print distance terms negated (``gamma = -coef_d``, band
magnitudes likewise) so a decaying effect reads as a positive number.
"""

from __future__ import annotations

import bisect
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .flows import FlowEdge, MassTable


class EstimationError(ValueError):
    pass


class MassError(KeyError):
    def __str__(self):
        return f"no mass for territory {self.args[0]!r}"


@dataclass(frozen=True)
class Continuous:
    """Continuous ln-distance regressor; ``floor_km`` replaces exclusion of short pairs."""

    floor_km: float | None = None

    name = "continuous"


@dataclass(frozen=True)
class BandSpec:
    """Distance bands: reference ``[0, b0]`` then ``(b_{k-1}, b_k]``; beyond the last breakpoint is excluded."""

    breakpoints: tuple[float, ...] = (50.0, 400.0, 800.0, 1200.0)

    name = "bands"

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        if len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if any(b <= a for a, b in zip(bp, bp[1:])) or bp[0] <= 0:
            raise ValueError(f"breakpoints must be positive and strictly increasing: {bp}")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def labels(self) -> list[str]:
        return [f"band_{chr(ord('a') + k)}" for k in range(len(self.breakpoints) - 1)]

    def band(self, d: float) -> int | None:
        """0 for the reference band, k for the k-th dummy, None past the last breakpoint."""
        if d < 0:
            raise ValueError(f"negative distance {d}")
        k = bisect.bisect_left(self.breakpoints, d)
        return k if k < len(self.breakpoints) else None

    def dummies(self, d: float) -> tuple[int, ...] | None:
        k = self.band(d)
        if k is None:
            return None
        return tuple(int(k == m + 1) for m in range(len(self.breakpoints) - 1))

    def interval(self, k: int) -> str:
        lo = 0.0 if k == 0 else self.breakpoints[k - 1]
        return f"{lo:g}-{self.breakpoints[k]:g}"


@dataclass(frozen=True)
class DesignRow:
    ln_C: float
    ln_Mi: float
    ln_Mj: float
    ln_d: float | None = None
    band: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Exclusion:
    cited_id: str
    citing_id: str
    reason: str


@dataclass
class Design:
    X: np.ndarray
    y: np.ndarray
    columns: list[str]
    spec: Continuous | BandSpec
    pairs: list[tuple[str, str]]
    exclusions: list[Exclusion] = field(default_factory=list)

    @property
    def rows(self) -> list[DesignRow]:
        out = []
        for xi, yi in zip(self.X, self.y):
            if isinstance(self.spec, BandSpec):
                out.append(DesignRow(yi, xi[1], xi[2], band=tuple(int(v) for v in xi[3:])))
            else:
                out.append(DesignRow(yi, xi[1], xi[2], ln_d=xi[3]))
        return out

    def exclusion_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(e.reason for e in self.exclusions).items()))


def build_design(
    edges: Sequence[FlowEdge],
    cited_masses: MassTable | Mapping[str, float],
    citing_masses: MassTable | Mapping[str, float],
    spec: Continuous | BandSpec | None = None,
) -> Design:
    """Regression rows for the usable edges; the rest go to ``exclusions`` with a reason."""
    spec = spec or Continuous()
    bands = isinstance(spec, BandSpec)
    columns = ["const", "ln_Mi", "ln_Mj"] + (spec.labels if bands else ["ln_d"])
    mi_of = getattr(cited_masses, "counts", cited_masses)
    mj_of = getattr(citing_masses, "counts", citing_masses)
    n = len(edges)
    c = np.empty(n)
    mi = np.empty(n)
    mj = np.empty(n)
    d = np.empty(n)
    for k, e in enumerate(edges):
        try:
            mi[k] = mi_of[e.cited_id]
        except KeyError:
            raise MassError(e.cited_id) from None
        try:
            mj[k] = mj_of[e.citing_id]
        except KeyError:
            raise MassError(e.citing_id) from None
        c[k] = e.citations
        d[k] = e.distance_km

    # first failing check names the exclusion
    reason = np.full(n, "", dtype=object)
    reason[(reason == "") & (c < 1)] = "citations below 1"
    reason[(reason == "") & ((mi < 1) | (mj < 1))] = "mass below 1"
    if bands:
        band = np.searchsorted(np.asarray(spec.breakpoints), d, side="left")
        if np.any(d < 0):
            raise ValueError("negative distance")
        reason[(reason == "") & (band >= len(spec.breakpoints))] = "beyond last band"
    else:
        if spec.floor_km is not None:
            d = np.maximum(d, spec.floor_km)
        reason[(reason == "") & (d <= 0)] = "zero distance"
    keep = reason == ""

    if bands:
        tail = (band[keep, None] == np.arange(1, len(spec.breakpoints))[None, :]).astype(float)
    else:
        tail = np.log(d[keep])[:, None]
    X = np.column_stack([np.ones(int(keep.sum())), np.log(mi[keep]), np.log(mj[keep]), tail])
    X = X.reshape(int(keep.sum()), len(columns))
    y = np.log(c[keep])
    idx = np.flatnonzero(keep).tolist()
    pairs = [(edges[k].cited_id, edges[k].citing_id) for k in idx]
    excl = [Exclusion(edges[k].cited_id, edges[k].citing_id, reason[k]) for k in np.flatnonzero(~keep).tolist()]
    return Design(X, y, columns, spec, pairs, excl)


def robust_covariance(X: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """HC1 sandwich: n/(n-p) (X'X)^-1 X' diag(e^2) X (X'X)^-1."""
    X = np.asarray(X, dtype=float)
    e = np.asarray(residuals, dtype=float)
    n, p = X.shape
    if n <= p:
        raise EstimationError(f"{n} rows for {p} coefficients")
    _, r = np.linalg.qr(X)
    r_inv = np.linalg.solve(r, np.eye(p))
    bread = r_inv @ r_inv.T
    meat = (X * (e**2)[:, None]).T @ X
    cov = n / (n - p) * bread @ meat @ bread
    return (cov + cov.T) / 2.0


def _collinear(X, columns):
    kept, bad = [], []
    for k in range(X.shape[1]):
        trial = kept + [k]
        if np.linalg.matrix_rank(X[:, trial]) == len(trial):
            kept.append(k)
        else:
            bad.append(columns[k])
    return bad


def _stars(coef, se):
    if se == 0.0:
        return "***" if coef != 0.0 else ""
    p = math.erfc(abs(coef / se) / math.sqrt(2.0))
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.1 else ""


@dataclass
class GravityFit:
    columns: list[str]
    coef: np.ndarray
    cov: np.ndarray
    classical_cov: np.ndarray
    r2: float
    n_obs: int
    spec: Continuous | BandSpec
    residuals: np.ndarray = field(repr=False, default=None)
    exclusions: dict[str, int] = field(default_factory=dict)

    @property
    def robust_se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    @property
    def classical_se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.classical_cov), 0.0, None))

    def __getitem__(self, column):
        return float(self.coef[self.columns.index(column)])

    @property
    def ln_k(self):
        return self["const"]

    @property
    def alpha(self):
        return self["ln_Mi"]

    @property
    def beta(self):
        return self["ln_Mj"]

    @property
    def gamma(self):
        """Distance elasticity as a decay magnitude."""
        return -self["ln_d"]

    @property
    def band_magnitudes(self) -> list[float]:
        return [-self[c] for c in self.columns if c.startswith("band_")]

    def reported(self) -> list[tuple[str, float, float, str]]:
        """(name, value, robust se, stars) with distance terms sign-flipped."""
        names = {"const": "ln_k", "ln_Mi": "alpha", "ln_Mj": "beta", "ln_d": "gamma"}
        out = []
        for k, col in enumerate(self.columns):
            value = float(self.coef[k])
            if col == "ln_d" or col.startswith("band_"):
                value = -value
            se = float(self.robust_se[k])
            out.append((names.get(col, col), value + 0.0, se, _stars(value, se)))
        return out


def ols_fit(design: Design) -> GravityFit:
    """Least squares via QR with HC1 covariance; raises EstimationError on degenerate designs."""
    X, y = design.X, design.y
    n, p = X.shape
    if n <= p:
        raise EstimationError(f"too few rows: {n} observations for {p} coefficients")
    bad = _collinear(X, design.columns)
    if bad:
        raise EstimationError(f"rank-deficient design; collinear columns: {', '.join(bad)}")
    q, r = np.linalg.qr(X)
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    r_inv = np.linalg.solve(r, np.eye(p))
    classical = ssr / (n - p) * (r_inv @ r_inv.T)
    return GravityFit(
        columns=list(design.columns),
        coef=coef,
        cov=robust_covariance(X, resid),
        classical_cov=classical,
        r2=r2,
        n_obs=n,
        spec=design.spec,
        residuals=resid,
        exclusions=design.exclusion_counts(),
    )


def predict(fit: GravityFit, m_i: float, m_j: float, d: float) -> float:
    """Expected flow exp(ln k) M_i^alpha M_j^beta d^-gamma (or the band form)."""
    if m_i <= 0 or m_j <= 0 or d < 0:
        raise ValueError("masses must be positive and distance non-negative")
    eta = fit.ln_k + fit.alpha * math.log(m_i) + fit.beta * math.log(m_j)
    if isinstance(fit.spec, BandSpec):
        k = fit.spec.band(d)
        if k is None:
            raise EstimationError(f"unsupported prediction form: {d} km lies beyond the last band")
        if k > 0:
            eta += fit[fit.spec.labels[k - 1]]
    else:
        if d <= 0:
            raise ValueError("continuous prediction needs a positive distance")
        eta += fit["ln_d"] * math.log(d)
    return math.exp(eta)


# -- reporting ---------------------------------------------------------------

_TABLE_NAMES = {"ln_k": "k", "alpha": "M_i", "beta": "M_j", "gamma": "d_ij"}


def fit_to_dict(fit: GravityFit, extra: Mapping | None = None) -> dict:
    rep = fit.reported()
    out = {
        "spec": fit.spec.name,
        "sign_convention": "distance coefficients reported as decay magnitudes (negated)",
        "coefficients": {name: v for name, v, _, _ in rep},
        "robust_se": {name: se for name, _, se, _ in rep},
        "stars": {name: s for name, _, _, s in rep},
        "r2": fit.r2,
        "n_obs": fit.n_obs,
        "exclusions": dict(fit.exclusions),
    }
    if isinstance(fit.spec, BandSpec):
        out["bands"] = {lab: fit.spec.interval(k + 1) for k, lab in enumerate(fit.spec.labels)}
        out["reference_band"] = fit.spec.interval(0)
    elif fit.spec.floor_km is not None:
        out["distance_floor_km"] = fit.spec.floor_km
    if extra:
        out.update(extra)
    return out


def fit_to_json(fit: GravityFit, extra: Mapping | None = None) -> str:
    return json.dumps(fit_to_dict(fit, extra), indent=2, sort_keys=True) + "\n"


def fit_table(fit: GravityFit, title: str | None = None) -> str:
    """Aligned text table: Variable / Coeff. / Robust Std Err., then R² and Obs."""
    rows = []
    rep = fit.reported()
    # constant goes last, as in the published tables
    rep = [r for r in rep if r[0] != "ln_k"] + [r for r in rep if r[0] == "ln_k"]
    for name, value, se, stars in rep:
        rows.append((_TABLE_NAMES.get(name, name.replace("band_", "dummy_")), f"{value:.3f}", stars, f"{se:.3f}"))
    lines = []
    if title:
        lines.append(title)
    lines.append("# distance terms shown as decay magnitudes (sign flipped)")
    lines.append(f"{'Variable':<10}{'Coeff.':>10} {'':<4}{'Robust Std Err.':>16}")
    for name, v, s, se in rows:
        lines.append(f"{name:<10}{v:>10} {s:<4}{se:>16}")
    lines.append(f"{'R²':<10}{fit.r2:>10.3f}")
    lines.append(f"{'Obs':<10}{fit.n_obs:>10d}")
    lines.append("Significance level: *** 0.01, ** 0.05, * 0.1.")
    return "\n".join(lines) + "\n"

"""Synthetic territories and gravity-law flows with known parameters.

All randomness comes from one ``numpy.random.Generator`` seeded explicitly,
with draws taken in a fixed order, so a ``(params, n, seed)`` triple always
reproduces the same world.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from .flows import AnalysisLevel, FlowEdge, MassTable
from .geodesy import haversine_km
from .gravity import Continuous, GravityFit, build_design, ols_fit

# approximate bounding box of Italy
ITALY_BOX = ((35.0, 47.0), (6.0, 19.0))

# national-level estimates reported for the Italian data
TABLE3_PARAMS = dict(ln_k=-1.773, alpha=0.437, beta=0.437, gamma=0.474)


class Counts(str, enum.Enum):
    ROUND = "round"
    EXACT = "exact"
    POISSON = "poisson"


@dataclass(frozen=True)
class GravityParams:
    ln_k: float = TABLE3_PARAMS["ln_k"]
    alpha: float = TABLE3_PARAMS["alpha"]
    beta: float = TABLE3_PARAMS["beta"]
    gamma: float = TABLE3_PARAMS["gamma"]
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("ln_k", "alpha", "beta", "gamma", "noise_sigma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass
class SyntheticWorld:
    params: GravityParams
    ids: list[str]
    lat: np.ndarray
    lon: np.ndarray
    masses: np.ndarray
    distance_km: np.ndarray
    expected: np.ndarray
    edges: list[FlowEdge] = field(repr=False)

    @property
    def cited_masses(self) -> MassTable:
        return MassTable({t: int(m) for t, m in zip(self.ids, self.masses)})

    citing_masses = cited_masses


def expected_flow(params: GravityParams, m_i, m_j, d):
    """k M_i^alpha M_j^beta / d^gamma, elementwise."""
    m_i, m_j, d = (np.asarray(v, dtype=float) for v in (m_i, m_j, d))
    return np.exp(params.ln_k) * m_i**params.alpha * m_j**params.beta / d**params.gamma


def generate_world(
    n_territories: int,
    params: GravityParams,
    seed: int | None = None,
    box: tuple[tuple[float, float], tuple[float, float]] = ITALY_BOX,
    mass_median: float = 2000.0,
    mass_sigma: float = 1.0,
    counts: Counts | str = Counts.ROUND,
) -> SyntheticWorld:
    """Draw territories and realise the flow for every ordered pair.

    Masses are lognormal (rounded, at least 1); coordinates uniform over
    ``box``. Realised counts are ``round(expected * exp(N(0, sigma)))`` by
    default; ``counts="exact"`` keeps the continuous value and ``"poisson"``
    samples instead of rounding. Pairs realising zero are omitted.
    """
    if n_territories < 2:
        raise ValueError("need at least two territories")
    counts = Counts(counts)
    seed = params.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    (lat0, lat1), (lon0, lon1) = box
    lat = rng.uniform(lat0, lat1, n_territories)
    lon = rng.uniform(lon0, lon1, n_territories)
    masses = np.maximum(1.0, np.rint(rng.lognormal(np.log(mass_median), mass_sigma, n_territories)))

    dist = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    off = ~np.eye(n_territories, dtype=bool)
    if not np.any(dist[off] > 0):
        raise ValueError("degenerate region: all territories coincide")

    with np.errstate(divide="ignore"):
        expected = np.where(off, expected_flow(params, masses[:, None], masses[None, :], dist), 0.0)
    expected[off & (dist == 0)] = 0.0
    noise = np.exp(rng.normal(0.0, params.noise_sigma, expected.shape)) if params.noise_sigma > 0 else 1.0
    mean = expected * noise
    if counts is Counts.ROUND:
        realised = np.rint(mean)
    elif counts is Counts.POISSON:
        realised = rng.poisson(mean).astype(float)
    else:
        realised = mean

    ids = [f"S{k:04d}" for k in range(n_territories)]
    ii, jj = np.nonzero(off & (realised > 0))
    integral = counts is not Counts.EXACT
    edges = [
        FlowEdge(ids[i], ids[j], int(c) if integral else float(c), float(d), AnalysisLevel.NATIONAL)
        for i, j, c, d in zip(ii.tolist(), jj.tolist(), realised[ii, jj].tolist(), dist[ii, jj].tolist())
    ]
    return SyntheticWorld(params, ids, lat, lon, masses, dist, expected, edges)


@dataclass
class RecoveryResult:
    true: dict[str, float]
    fit: GravityFit
    deltas: dict[str, float]

    def as_dict(self):
        return {
            "true": self.true,
            "fitted": {k: getattr(self.fit, k) for k in self.true},
            "deltas": self.deltas,
            "r2": self.fit.r2,
            "n_obs": self.fit.n_obs,
        }


def recover(world: SyntheticWorld) -> RecoveryResult:
    """Fit the continuous specification to a world and compare with its parameters."""
    fit = ols_fit(build_design(world.edges, world.cited_masses, world.citing_masses, Continuous()))
    true = {k: v for k, v in asdict(world.params).items() if k in ("ln_k", "alpha", "beta", "gamma")}
    deltas = {k: getattr(fit, k) - v for k, v in true.items()}
    return RecoveryResult(true, fit, deltas)


def recovery_trial(params: GravityParams, n: int, seed: int | None = None, **world_kw) -> RecoveryResult:
    """Generate a world, fit it, and report signed errors fitted - true."""
    return recover(generate_world(n, params, seed, **world_kw))

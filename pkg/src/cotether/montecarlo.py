"""Seeded Monte Carlo oracle for the closed-form SINR statistics.

Samples come from the defining ratio of each distribution (exponential draws
combined structurally), never from the closed form. The sample index space is
cut into fixed-size chunks, and chunk ``c`` draws from a Philox stream keyed
by ``(seed, c)``. Chunks can therefore be generated in any order, by any
number of workers, and concatenate to the same sample set.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dist import SinrDistribution
from .metrics import CapacityParams, ModulationParams

DEFAULT_CHUNK = 1 << 16
DEFAULT_BIN_THRESHOLD = 10_000_000
# geometric bins spanning 1e-15 .. 1e15 for very large runs
_BIN_EDGES = np.concatenate([[0.0], np.logspace(-15, 15, 30 * 400 + 1)])


@dataclass(frozen=True)
class McConfig:
    n_samples: int
    seed: int = 0
    n_workers: int = 1
    topology_replications: int = 1
    chunk_size: int = DEFAULT_CHUNK
    bin_threshold: int = DEFAULT_BIN_THRESHOLD

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.n_workers < 1 or self.chunk_size < 1 or self.topology_replications < 1:
            raise ValueError("n_workers, chunk_size and topology_replications must be positive")


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one chunk of sample indices."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


class EmpiricalDist:
    """Empirical distribution held as sorted samples, or as geometric-bin counts."""

    def __init__(self, samples=None, counts=None, seed: int | None = None, n: int | None = None):
        self.seed = seed
        if samples is not None:
            self.samples = np.sort(np.asarray(samples, dtype=float))
            self.counts = None
            self.n = len(self.samples)
        else:
            self.samples = None
            self.counts = np.asarray(counts, dtype=np.int64)
            self.n = int(self.counts.sum()) if n is None else n
        if self.n < 1:
            raise ValueError("an empirical distribution needs at least one sample")

    @property
    def binned(self) -> bool:
        return self.samples is None

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if not self.binned:
            return np.searchsorted(self.samples, x, side="right") / self.n
        cum = np.concatenate([[0], np.cumsum(self.counts)]) / self.n
        return np.interp(x, _BIN_EDGES, cum)

    def representative(self) -> tuple[np.ndarray, np.ndarray]:
        """(values, weights) for plug-in estimators; bin midpoints when binned."""
        if not self.binned:
            return self.samples, np.full(self.n, 1.0 / self.n)
        mids = 0.5 * (_BIN_EDGES[:-1] + _BIN_EDGES[1:])
        keep = self.counts > 0
        return mids[keep], self.counts[keep] / self.n


def _chunks(n: int, size: int) -> list[tuple[int, int]]:
    return [(c, min(size, n - c * size)) for c in range(math.ceil(n / size))]


def _run_chunks(config: McConfig, fn):
    jobs = _chunks(config.n_samples, config.chunk_size)
    if config.n_workers == 1:
        return [fn(c, m) for c, m in jobs]
    with ThreadPoolExecutor(config.n_workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def simulate_link(config: McConfig, d: SinrDistribution) -> EmpiricalDist:
    """``n_samples`` i.i.d. draws of the SINR ratio that ``d`` describes."""

    def one(c, m):
        return d.sample(m, chunk_rng(config.seed, c))

    if config.n_samples <= config.bin_threshold:
        return EmpiricalDist(np.concatenate(_run_chunks(config, one)), seed=config.seed)

    def binned(c, m):
        x = one(c, m)
        idx = np.clip(np.searchsorted(_BIN_EDGES, x, side="right") - 1, 0, len(_BIN_EDGES) - 2)
        return np.bincount(idx, minlength=len(_BIN_EDGES) - 1)

    counts = np.zeros(len(_BIN_EDGES) - 1, dtype=np.int64)
    for part in _run_chunks(config, binned):
        counts += part
    return EmpiricalDist(counts=counts, seed=config.seed)


def ks_distance(e: EmpiricalDist, d: SinrDistribution) -> float:
    """Two-sided sup-norm between the empirical and analytic CDFs at the sample points."""
    if e.binned:
        F = np.asarray(d.cdf(_BIN_EDGES))
        return float(np.max(np.abs(e.cdf(_BIN_EDGES) - F)))
    F = np.asarray(d.cdf(e.samples))
    i = np.arange(1, e.n + 1)
    return float(max(np.max(i / e.n - F), np.max(F - (i - 1) / e.n)))


@dataclass(frozen=True)
class MetricEstimates:
    abep: float
    abep_se: float
    mean_sinr: float
    mean_sinr_se: float
    capacity: float
    capacity_se: float
    op: float
    op_se: float


def _mean_se(values, weights, n):
    mean = float(np.sum(values * weights))
    var = float(np.sum(weights * (values - mean) ** 2))
    return mean, math.sqrt(var * n / max(n - 1, 1) / n)


def estimate_metrics(
    e: EmpiricalDist, m: ModulationParams, p: CapacityParams, gamma_th: float
) -> MetricEstimates:
    """Sample averages of each metric's defining expectation, with standard errors s/sqrt(n)."""
    x, w = e.representative()
    n = e.n
    abep, abep_se = _mean_se(m.A * np.exp(-m.B * x), w, n)
    mean, mean_se = _mean_se(x, w, n)
    cap, cap_se = _mean_se(np.log2(1.0 + x) / p.NH, w, n)
    op, op_se = _mean_se((x < gamma_th).astype(float), w, n)
    return MetricEstimates(abep, abep_se, mean, mean_se, cap, cap_se, op, op_se)


CDF_COLUMNS = ("gamma", "ecdf", "analytic_cdf", "abs_diff")


def cdf_table(e: EmpiricalDist, d: SinrDistribution, grid) -> list[dict]:
    grid = np.asarray(grid, dtype=float)
    ec = e.cdf(grid)
    an = np.asarray(d.cdf(grid))
    return [
        dict(gamma=float(g), ecdf=float(a), analytic_cdf=float(b), abs_diff=float(abs(a - b)))
        for g, a, b in zip(grid, ec, an)
    ]

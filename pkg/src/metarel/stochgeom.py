"""Exact samplers for the spatial and fading randomness.

Ordered nearest-neighbor distances of a homogeneous PPP are generated by
the radial construction: the squared distances are the arrival times of a
rate-(lambda*pi) one-dimensional Poisson process, so no simulation window
or truncation bias enters.  Bernoulli interferer marks and Rayleigh/Rician
power fading complete the layer samplers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import derive_rng
from .errors import DomainError

__all__ = [
    "PppConfig",
    "Realization",
    "sample_ordered_distances",
    "nearest_distance_cdf",
    "sample_marks",
    "sample_rayleigh_power",
    "sample_rician_power",
    "thinned_ratio_sum_mc",
]

MARK_MODES = ("all", "single_interferer")


@dataclass(frozen=True)
class PppConfig:
    """Homogeneous PPP of the given intensity, realized as the n nearest points."""

    intensity: float  # points per m^2
    n_points: int = 200

    def __post_init__(self) -> None:
        if not (math.isfinite(self.intensity) and self.intensity > 0.0):
            raise DomainError("intensity must be finite and positive")
        if self.n_points < 1:
            raise DomainError("n_points must be >= 1")


@dataclass(frozen=True)
class Realization:
    """Ordered distances plus interferer marks; marks[0] is the serving BS."""

    distances: np.ndarray  # strictly ascending, metres
    marks: np.ndarray  # 0/1, marks[0] == 0

    def __post_init__(self) -> None:
        d = np.asarray(self.distances, dtype=float)
        m = np.asarray(self.marks)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "marks", m)
        if d.ndim != 1 or m.shape != d.shape:
            raise DomainError("distances and marks must be 1-d and equal length")
        if d.size and (d[0] <= 0.0 or np.any(np.diff(d) <= 0.0)):
            raise DomainError("distances must be strictly ascending and positive")
        if not np.isin(m, (0, 1)).all():
            raise DomainError("marks must be 0/1")
        if m.size and m[0] != 0:
            raise DomainError("the serving point (index 0) never interferes")


def sample_ordered_distances(cfg: PppConfig, rng: np.random.Generator) -> np.ndarray:
    """Distances to the n nearest PPP points, ascending.

    R_i^2 are cumulative sums of Exp(lambda*pi) gaps, which is exact for the
    ordered distances from the origin.
    """
    rate = cfg.intensity * math.pi
    gaps = rng.standard_exponential(cfg.n_points) / rate
    return np.sqrt(np.cumsum(gaps))


def nearest_distance_cdf(r, intensity: float):
    """P(R_1 <= r) = 1 - exp(-lambda*pi*r^2) for the nearest-point distance."""
    if not (math.isfinite(intensity) and intensity > 0.0):
        raise DomainError("intensity must be finite and positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise DomainError("r must be >= 0")
    out = -np.expm1(-intensity * math.pi * np.square(r))
    return float(out) if out.ndim == 0 else out


def sample_marks(
    n: int, zeta: float, mode: str, rng: np.random.Generator
) -> np.ndarray:
    """Bernoulli(zeta) interferer marks for n ordered points.

    marks[0] is always 0 (serving point).  In "single_interferer" mode every
    mark after the first 1 is forced to 0.
    """
    if n < 2:
        raise DomainError("need n >= 2 points for an interference model")
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    if mode not in MARK_MODES:
        raise DomainError(f"mode must be one of {MARK_MODES}")
    marks = np.zeros(n, dtype=np.int8)
    marks[1:] = rng.random(n - 1) < zeta
    if mode == "single_interferer":
        nz = np.flatnonzero(marks)
        if nz.size > 1:
            marks[nz[1:]] = 0
    return marks


def sample_rayleigh_power(rng: np.random.Generator, size=None):
    """Unit-mean exponential fading power (Rayleigh amplitude squared)."""
    return rng.standard_exponential(size)


def sample_rician_power(K: float, rng: np.random.Generator, size=None):
    """Unit-mean Rician fading power with shape factor K >= 0.

    H = |sqrt(K/(K+1)) + Z|^2 with Z circularly symmetric complex Gaussian
    of variance 1/(K+1); K = 0 degenerates to Exp(1).
    """
    if not (math.isfinite(K) and K >= 0.0):
        raise DomainError("K must be finite and >= 0")
    mean_amp = math.sqrt(K / (K + 1.0))
    sigma = math.sqrt(0.5 / (K + 1.0))
    re = mean_amp + sigma * rng.standard_normal(size)
    im = sigma * rng.standard_normal(size)
    return re * re + im * im


def thinned_ratio_sum_mc(
    alpha: float,
    zeta: float,
    n_thinned: int = 200,
    n_realizations: int = 100_000,
    seed: int = 0,
    tail_correction: bool = True,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[sum_i (Rt_1/Rt_i)^alpha] over the thinned process.

    Rt_i are the ordered distances of the zeta-thinned non-serving points:
    given the serving distance R_1, they form a PPP of intensity zeta*lambda
    outside R_1, so Rt_i^2 = R_1^2 + cumulative Exp(zeta*lambda*pi) gaps.
    Ratios are scale-free, so unit intensity is used.

    With ``tail_correction`` the expected contribution of points beyond the
    n-th, 2*zeta*(lambda*pi)*Rt_1^alpha * Rt_n^(2-alpha) / (alpha-2) by
    Campbell's theorem, is added per realization; the estimator is then
    unbiased for the infinite sum.  Without it the truncation bias reaches
    several percent for alpha near 2.

    Returns (mean, standard error).
    """
    if alpha <= 2.0:
        raise DomainError("alpha must exceed 2")
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    rng = derive_rng(seed, 0xD157)
    half_alpha = 0.5 * alpha
    total = 0.0
    total_sq = 0.0
    chunk = max(1, min(n_realizations, 20_000_000 // max(n_thinned, 1)))
    remaining = n_realizations
    while remaining > 0:
        m = min(chunk, remaining)
        r1sq = rng.standard_exponential(m)
        gaps = rng.standard_exponential((m, n_thinned)) / zeta
        rsq = r1sq[:, None] + np.cumsum(gaps, axis=1)
        s = ((rsq[:, :1] / rsq) ** half_alpha).sum(axis=1)
        if tail_correction:
            s += (
                2.0
                * zeta
                * rsq[:, 0] ** half_alpha
                * rsq[:, -1] ** (1.0 - half_alpha)
                / (alpha - 2.0)
            )
        total += float(s.sum())
        total_sq += float(np.square(s).sum())
        remaining -= m
    mean = total / n_realizations
    var = max(total_sq / n_realizations - mean * mean, 0.0)
    return mean, math.sqrt(var / n_realizations)

"""Canonical cellular model with slowly varying Bernoulli interferers.

The downlink SIR of the typical user of a homogeneous PPP is evaluated
under Rayleigh fading, with each non-serving base station interfering
with probability zeta (frozen between redraws, i.e. block ALOHA).  The
module provides the second-order MD closed forms for the single- and
multi-interferer scenarios, the interference-ratio expectation they rest
on, nested Monte Carlo bindings, and the required-bandwidth search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ._rng import derive_rng
from .errors import ConfigurationError, DomainError, SearchError
from .mdcore import LayeredModel, MdEstimate, MdQuery, nested_md_estimate
from .stochgeom import PppConfig, Realization, sample_marks, sample_ordered_distances

__all__ = [
    "CanonicalParams",
    "GridEstimate",
    "qos_threshold",
    "p1_hat",
    "sir",
    "conditional_link_success",
    "r2_single_interferer",
    "interference_ratio_expectation",
    "r2_multi_interferer",
    "nprime_pmf",
    "first_order_reliability",
    "zeroth_order_reliability_closed",
    "canonical_layered_model",
    "run_canonical_mc",
    "run_canonical_mc_grid",
    "first_order_md_mc",
    "first_order_md_mc_grid",
    "required_bandwidth",
]

MODES = ("single_interferer", "multi_interferer")
INNER_MODES = ("sampled", "exact_binomial")


@dataclass(frozen=True)
class CanonicalParams:
    """Model parameters; the QoS threshold is either q or (l, W, t_th)."""

    intensity: float  # BS density, 1/m^2
    alpha: float  # path-loss exponent, > 2
    zeta: float  # interferer probability, (0, 1]
    q: Optional[float] = None  # SIR threshold, exclusive with the triple below
    l_bits: Optional[float] = None
    bandwidth_hz: Optional[float] = None
    deadline_s: Optional[float] = None
    mode: str = "single_interferer"
    n_points: int = 200

    def __post_init__(self) -> None:
        if not (math.isfinite(self.intensity) and self.intensity > 0.0):
            raise DomainError("intensity must be finite and positive")
        if not (math.isfinite(self.alpha) and self.alpha > 2.0):
            raise DomainError("alpha must exceed 2")
        if not 0.0 < self.zeta <= 1.0:
            raise DomainError("zeta must lie in (0, 1]")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.n_points < 2:
            raise DomainError("n_points must be >= 2")
        have_q = self.q is not None
        have_triple = all(
            v is not None for v in (self.l_bits, self.bandwidth_hz, self.deadline_s)
        )
        if have_q == have_triple:
            raise ConfigurationError("give exactly one of q or (l, W, t_th)")
        if have_q and self.q <= 0.0:
            raise DomainError("q must be positive")

    def qos(self) -> float:
        if self.q is not None:
            return self.q
        return qos_threshold(self.l_bits, self.bandwidth_hz, self.deadline_s)


@dataclass(frozen=True)
class GridEstimate:
    """MC estimates over a (p1, p2) threshold grid sharing one sample set."""

    p1_grid: tuple[float, ...]
    p2_grid: tuple[float, ...]
    values: np.ndarray  # shape (len(p1_grid), len(p2_grid))
    stderr: np.ndarray
    trials: tuple[int, ...]
    seed: int


def qos_threshold(l_bits: float, bandwidth_hz: float, deadline_s: float) -> float:
    """SIR/SNR threshold equivalent to l bits within t_th at bandwidth W:
    q = 2^(l / (W t_th)) - 1."""
    for name, v in (("l", l_bits), ("W", bandwidth_hz), ("t_th", deadline_s)):
        if not (v is not None and math.isfinite(v) and v > 0.0):
            raise DomainError(f"{name} must be finite and positive")
    return math.expm1(l_bits / (bandwidth_hz * deadline_s) * math.log(2.0))


def p1_hat(p1: float, q: float, alpha: float) -> float:
    """Distance-ratio threshold [p1 q / (1 - p1)]^(1/alpha)."""
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie strictly in (0, 1)")
    if q <= 0.0 or not math.isfinite(q):
        raise DomainError("q must be positive and finite")
    if alpha <= 2.0:
        raise DomainError("alpha must exceed 2")
    return (p1 * q / (1.0 - p1)) ** (1.0 / alpha)


def sir(realization: Realization, fadings: Sequence[float], alpha: float) -> float:
    """SIR of the typical user for one joint fading/mark realization.

    Returns +inf when no mark is active (interference-free); callers treat
    any finite threshold as met in that case.
    """
    if alpha <= 2.0:
        raise DomainError("alpha must exceed 2")
    h = np.asarray(fadings, dtype=float)
    d = realization.distances
    if h.shape != d.shape:
        raise DomainError("fadings must match distances in length")
    active = realization.marks.astype(bool)
    interference = float(np.sum(h[active] * d[active] ** (-alpha)))
    signal = float(h[0] * d[0] ** (-alpha))
    if interference == 0.0:
        return math.inf
    return signal / interference


def conditional_link_success(
    distances: np.ndarray, marks: np.ndarray, q: float, alpha: float
) -> float:
    """Exact P(SIR > q | points, marks) under unit-mean Rayleigh fading.

    The Laplace transform of the active interferers' exponential fadings
    gives prod_i (1 + q (R_1/R_i)^alpha)^-1; an empty active set gives 1.
    """
    d = np.asarray(distances, dtype=float)
    active = np.asarray(marks).astype(bool).copy()
    active[0] = False
    if not active.any():
        return 1.0
    ratios = (d[0] / d[active]) ** alpha
    return float(np.exp(-np.sum(np.log1p(q * ratios))))


def _success_terms(p2: float, zeta: float) -> int:
    """Number of leading N' pmf terms inside the success region, i.e.
    floor(ln p2 / ln(1 - zeta)) + 1, with the zeta = 1 limit taken as 1."""
    if not 0.0 < p2 < 1.0:
        raise DomainError("p2 must lie strictly in (0, 1)")
    if zeta == 1.0:
        return 1
    return int(math.floor(math.log(p2) / math.log1p(-zeta))) + 1


def r2_single_interferer(
    p1: float, p2: float, q: float, alpha: float, zeta: float
) -> float:
    """Second-order MD reliability, single-interferer closed form.

    1 - (1 - phat^-2)^(floor(ln p2 / ln(1-zeta)) + 1) for phat > 1, else 1.
    """
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    phat = p1_hat(p1, q, alpha)
    terms = _success_terms(p2, zeta)
    if phat <= 1.0:
        return 1.0
    return -math.expm1(terms * math.log1p(-1.0 / (phat * phat)))


def interference_ratio_expectation(alpha: float, zeta: float) -> float:
    """(1 + delta*zeta)/(1 - delta) with delta = 2/alpha, the tight
    approximation of E[sum_i (Rt_1/Rt_i)^alpha] over the thinned process."""
    if alpha <= 2.0:
        raise DomainError("alpha must exceed 2")
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    delta = 2.0 / alpha
    return (1.0 + delta * zeta) / (1.0 - delta)


def _multi_p1hat_factor(alpha: float, zeta: float) -> float:
    """Factor ((1+delta*zeta)/(1-delta))^(delta/2) applied to phat in the
    multi-interferer scenario (mean-interference substitution)."""
    delta = 2.0 / alpha
    return interference_ratio_expectation(alpha, zeta) ** (0.5 * delta)


def r2_multi_interferer(
    p1: float, p2: float, q: float, alpha: float, zeta: float
) -> float:
    """Second-order MD reliability, multi-interferer approximation.

    The single-interferer form evaluated at the inflated threshold
    phat * ((1+delta*zeta)/(1-delta))^(delta/2); returns 1 when the inflated
    threshold does not exceed 1.
    """
    if not 0.0 < zeta <= 1.0:
        raise DomainError("zeta must lie in (0, 1]")
    phat_eff = p1_hat(p1, q, alpha) * _multi_p1hat_factor(alpha, zeta)
    terms = _success_terms(p2, zeta)
    if phat_eff <= 1.0:
        return 1.0
    return -math.expm1(terms * math.log1p(-1.0 / (phat_eff * phat_eff)))


def nprime_pmf(n: int, p1_hat_value: float) -> float:
    """P(N' = n) = (1 - phat^-2)^n * phat^-2: the number of non-serving
    points inside radius phat * R_1 is geometric."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if not (math.isfinite(p1_hat_value) and p1_hat_value > 1.0):
        raise DomainError("requires p1_hat > 1")
    x = 1.0 / (p1_hat_value * p1_hat_value)
    return (1.0 - x) ** n * x


def _success_atom(p1: float, q: float, alpha: float, zeta: float, mode: str) -> float:
    """phat_eff^-2 clamped to 1: the per-term success mass x."""
    phat = p1_hat(p1, q, alpha)
    if mode == "multi_interferer":
        phat *= _multi_p1hat_factor(alpha, zeta)
    if phat <= 1.0:
        return 1.0
    return 1.0 / (phat * phat)


def first_order_reliability(
    p1: float, q: float, alpha: float, zeta: float, mode: str = "single_interferer"
) -> float:
    """First-order MD reliability, the exact p2-integral of the second-order
    closed form: x / (1 - (1-zeta)(1-x)) with x = phat_eff^-2 (1 if x = 1)."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    x = _success_atom(p1, q, alpha, zeta, mode)
    if x >= 1.0:
        return 1.0
    return x / (1.0 - (1.0 - zeta) * (1.0 - x))


def zeroth_order_reliability_closed(
    q: float, alpha: float, zeta: float, mode: str = "single_interferer"
) -> float:
    """Conventional reliability P(SIR > q): the p1-integral of the
    first-order closed form, by adaptive quadrature."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    factor = _multi_p1hat_factor(alpha, zeta) if mode == "multi_interferer" else 1.0
    c = factor ** (-alpha)
    p1_break = c / (q + c)  # below this, phat_eff <= 1 and the integrand is 1
    tail, _ = quad(
        lambda p1: first_order_reliability(p1, q, alpha, zeta, mode),
        p1_break,
        1.0,
        epsabs=1e-11,
        epsrel=1e-10,
        limit=200,
    )
    return p1_break + tail


# ---------------------------------------------------------------------------
# Monte Carlo bindings
# ---------------------------------------------------------------------------


def _exact_p1_for_marks(
    dist_sq: np.ndarray, active: np.ndarray, q: float, alpha: float
) -> np.ndarray:
    """Exact conditional success probabilities for a batch of mark rows.

    ``active`` is a boolean (n1, n_points-1) array over non-serving points.
    """
    half_alpha = 0.5 * alpha
    v = np.log1p(q * (dist_sq[0] / dist_sq[1:]) ** half_alpha)
    return np.exp(-(active.astype(float) @ v))


def _single_interferer_p1(
    dist_sq: np.ndarray, offsets: np.ndarray, q: float, alpha: float
) -> np.ndarray:
    """Exact P1 when only the first marked point (1-based offset) interferes;
    offsets beyond the realized window mean an interference-free trial."""
    n = dist_sq.size
    p1 = np.ones(offsets.size)
    valid = offsets <= n - 1
    idx = offsets[valid]
    ratio = (dist_sq[0] / dist_sq[idx]) ** (0.5 * alpha)
    p1[valid] = 1.0 / (1.0 + q * ratio)
    return p1


def _sample_first_offsets(
    n1: int, zeta: float, rng: np.random.Generator
) -> np.ndarray:
    """Geometric index of the first marked non-serving point (1 = nearest)."""
    if zeta == 1.0:
        return np.ones(n1, dtype=np.int64)
    u = rng.random(n1)
    return 1 + np.floor(np.log(u) / math.log1p(-zeta)).astype(np.int64)


def canonical_layered_model(
    params: CanonicalParams, q: float, inner: str = "sampled"
) -> LayeredModel:
    """LayeredModel binding the PPP, mark, and fading samplers to the SIR QoS.

    ``inner="sampled"`` draws fadings and evaluates the SIR per trial
    (vectorized over the inner batch).  ``inner="exact_binomial"`` replaces
    the two innermost loops by sampling Binomial(N0, P1)/N0 with the exact
    conditional success probability; the estimator's law is unchanged.
    """
    if inner not in INNER_MODES:
        raise DomainError(f"inner must be one of {INNER_MODES}")
    cfg = PppConfig(intensity=params.intensity, n_points=params.n_points)
    alpha = params.alpha
    zeta = params.zeta
    single = params.mode == "single_interferer"

    def sample_distances(rng, above):
        return sample_ordered_distances(cfg, rng)

    def sample_mark_row(rng, above):
        return sample_marks(params.n_points, zeta, params.mode, rng)

    def sample_fadings(rng, above):
        return rng.standard_exponential(params.n_points)

    def qos(states):
        distances, marks, fadings = states
        return sir(Realization(distances=distances, marks=marks), fadings, alpha)

    def inner_batch(rng, above, size):
        distances, marks = above
        active = np.asarray(marks).astype(bool)
        signal_w = distances[0] ** (-alpha)
        if not active.any():
            return np.full(size, np.inf)
        weights = distances[active] ** (-alpha)
        h1 = rng.standard_exponential(size)
        h_int = rng.standard_exponential((size, weights.size))
        return h1 * signal_w / (h_int @ weights)

    def p1_batch(rng, above, n1, n0):
        (distances,) = above
        dist_sq = np.square(distances)
        if single:
            offsets = _sample_first_offsets(n1, zeta, rng)
            p1_true = _single_interferer_p1(dist_sq, offsets, q, alpha)
        else:
            active = rng.random((n1, params.n_points - 1)) < zeta
            p1_true = _exact_p1_for_marks(dist_sq, active, q, alpha)
        return rng.binomial(n0, p1_true) / n0

    if inner == "sampled":
        return LayeredModel(
            layers=(sample_fadings, sample_mark_row, sample_distances),
            qos=qos,
            inner_batch=inner_batch,
        )
    return LayeredModel(
        layers=(sample_fadings, sample_mark_row, sample_distances),
        qos=qos,
        p1_batch=p1_batch,
    )


def run_canonical_mc(
    params: CanonicalParams,
    query: MdQuery,
    seed: int,
    inner: str = "sampled",
) -> MdEstimate:
    """Second-order MD reliability of the canonical model by nested MC."""
    if len(query.p) != 2:
        raise ConfigurationError("canonical MC is second order: need two thresholds")
    model = canonical_layered_model(params, query.q, inner=inner)
    return nested_md_estimate(model, query, seed)


def run_canonical_mc_grid(
    params: CanonicalParams,
    q: float,
    p1_grid: Sequence[float],
    p2_grid: Sequence[float],
    trials: tuple[int, int, int],
    seed: int,
) -> GridEstimate:
    """Second-order estimates over a (p1, p2) grid from one shared sample set.

    Statistically each grid cell is a standard nested-MC run at the given
    trial counts (exact-binomial inner layer); cells share outer and middle
    samples, so they are correlated across the grid but individually valid.
    """
    p1g = np.asarray(sorted(float(p) for p in p1_grid))
    p2g = np.asarray(sorted(float(p) for p in p2_grid))
    if np.any((p1g <= 0) | (p1g >= 1)) or np.any((p2g <= 0) | (p2g >= 1)):
        raise DomainError("thresholds must lie strictly in (0, 1)")
    n0, n1, n2 = (int(n) for n in trials)
    if min(n0, n1, n2) < 1:
        raise DomainError("all trial counts must be >= 1")
    cfg = PppConfig(intensity=params.intensity, n_points=params.n_points)
    single = params.mode == "single_interferer"
    counts = np.zeros((p1g.size, p2g.size), dtype=np.int64)
    for i in range(n2):
        rng = derive_rng(seed, 2, i)
        dist_sq = np.square(sample_ordered_distances(cfg, rng))
        if single:
            offsets = _sample_first_offsets(n1, params.zeta, rng)
            p1_true = _single_interferer_p1(dist_sq, offsets, q, params.alpha)
        else:
            active = rng.random((n1, params.n_points - 1)) < params.zeta
            p1_true = _exact_p1_for_marks(dist_sq, active, q, params.alpha)
        p1_est = rng.binomial(n0, p1_true) / n0
        p2_est = (p1_est[None, :] > p1g[:, None]).mean(axis=1)
        counts += p2_est[:, None] > p2g[None, :]
    values = counts / n2
    stderr = np.sqrt(values * (1.0 - values) / n2)
    return GridEstimate(
        p1_grid=tuple(p1g),
        p2_grid=tuple(p2g),
        values=values,
        stderr=stderr,
        trials=(n0, n1, n2),
        seed=seed,
    )


def first_order_md_mc(
    params: CanonicalParams,
    q: float,
    p1: float,
    trials: tuple[int, int],
    seed: int,
    inner: str = "exact_binomial",
) -> MdEstimate:
    """First-order MD with the mark and point layers lumped into one outer
    draw; equivalent to the second-order run with a bypassed middle layer."""
    grid = first_order_md_mc_grid(params, q, (p1,), trials, seed, inner=inner)
    return MdEstimate(
        value=float(grid.values[0, 0]),
        stderr=float(grid.stderr[0, 0]),
        trials=grid.trials,
        seed=seed,
    )


def first_order_md_mc_grid(
    params: CanonicalParams,
    q: float,
    p1_grid: Sequence[float],
    trials: tuple[int, int],
    seed: int,
    inner: str = "exact_binomial",
) -> GridEstimate:
    """First-order estimates over a p1 grid from one shared sample set."""
    if inner not in INNER_MODES:
        raise DomainError(f"inner must be one of {INNER_MODES}")
    p1g = np.asarray(sorted(float(p) for p in p1_grid))
    if np.any((p1g <= 0) | (p1g >= 1)):
        raise DomainError("thresholds must lie strictly in (0, 1)")
    n0, n_outer = (int(n) for n in trials)
    if min(n0, n_outer) < 1:
        raise DomainError("all trial counts must be >= 1")
    cfg = PppConfig(intensity=params.intensity, n_points=params.n_points)
    counts = np.zeros(p1g.size, dtype=np.int64)
    for i in range(n_outer):
        rng = derive_rng(seed, 1, i)
        distances = sample_ordered_distances(cfg, rng)
        marks = sample_marks(params.n_points, params.zeta, params.mode, rng)
        if inner == "exact_binomial":
            p1_true = conditional_link_success(distances, marks, q, params.alpha)
            p1_est = rng.binomial(n0, p1_true) / n0
        else:
            active = marks.astype(bool)
            if active.any():
                weights = distances[active] ** (-params.alpha)
                h1 = rng.standard_exponential(n0)
                h_int = rng.standard_exponential((n0, weights.size))
                sirs = h1 * distances[0] ** (-params.alpha) / (h_int @ weights)
                p1_est = float(np.count_nonzero(sirs > q)) / n0
            else:
                p1_est = 1.0
        counts += p1_est > p1g
    values = (counts / n_outer)[:, None]
    stderr = np.sqrt(values * (1.0 - values) / n_outer)
    return GridEstimate(
        p1_grid=tuple(p1g),
        p2_grid=(),
        values=values,
        stderr=stderr,
        trials=(n0, n_outer),
        seed=seed,
    )


def required_bandwidth(
    target_reliability: float,
    order: int,
    params: CanonicalParams,
    p1: float,
    p2: float,
    w_low: float,
    w_high: float,
    rel_tol: float = 1e-3,
) -> float:
    """Smallest bandwidth whose closed-form reliability reaches the target.

    Bisection on W: q = 2^(l/(W t_th)) - 1 decreases strictly in W, and every
    shipped reliability order is non-increasing in q, so reliability is
    non-decreasing in W.  The endpoints must bracket the target.
    """
    if not 0.0 < target_reliability < 1.0:
        raise DomainError("target reliability must lie strictly in (0, 1)")
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1, or 2")
    if not (0.0 < w_low < w_high and math.isfinite(w_high)):
        raise DomainError("need 0 < w_low < w_high < inf")
    if params.l_bits is None or params.deadline_s is None:
        raise ConfigurationError("params must carry (l, t_th) for a bandwidth search")

    def reliability(w: float) -> float:
        q = qos_threshold(params.l_bits, w, params.deadline_s)
        if order == 2:
            if params.mode == "single_interferer":
                return r2_single_interferer(p1, p2, q, params.alpha, params.zeta)
            return r2_multi_interferer(p1, p2, q, params.alpha, params.zeta)
        if order == 1:
            return first_order_reliability(p1, q, params.alpha, params.zeta, params.mode)
        return zeroth_order_reliability_closed(q, params.alpha, params.zeta, params.mode)

    r_lo = reliability(w_low)
    r_hi = reliability(w_high)
    if r_lo > target_reliability or r_hi < target_reliability:
        raise SearchError(
            f"reliability range [{r_lo:.6g}, {r_hi:.6g}] on the given bandwidth "
            f"interval does not bracket the target {target_reliability:.6g}"
        )
    lo, hi = w_low, w_high
    while hi - lo > rel_tol * hi:
        mid = math.sqrt(lo * hi)  # geometric midpoint: W spans decades
        if reliability(mid) >= target_reliability:
            hi = mid
        else:
            lo = mid
    return hi

"""Generic hierarchical meta-distribution machinery.

An n-layer model is an ordered list of samplers (innermost = fastest
randomness first) plus a deterministic QoS evaluator.  The nested
estimator realizes, for each outer draw, the recursive conditional
probabilities

    P_1 = fraction of inner draws with Q > q
    P_k = fraction of layer-(k-1) draws with P_(k-1) > p_(k-1)

and returns the outermost exceedance fraction.  All comparisons are
strict, matching the defining formulas; thresholds at 0 or 1 are rejected
for that reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._rng import derive_rng
from .errors import ConfigurationError, DomainError

__all__ = [
    "LayeredModel",
    "MdQuery",
    "MdEstimate",
    "nested_md_estimate",
    "zeroth_order_reliability",
    "reduce_order",
]

MAX_LAYERS = 4

# Sampler signature: sampler(rng, above) -> state, where `above` is the tuple
# of already-realized states of the layers above it, outermost first.
LayerSampler = Callable[[np.random.Generator, tuple], object]


@dataclass(frozen=True)
class LayeredModel:
    """Ordered layer samplers plus a QoS evaluator.

    ``layers[0]`` is the innermost (fastest) layer, ``layers[-1]`` the
    outermost (static) one.  ``qos`` maps the fully realized state tuple
    (outermost first) to a real QoS value and must be deterministic.

    Optional vectorized hooks:

    - ``inner_batch(rng, above, size)`` returns ``size`` QoS samples given
      the states of all layers above the innermost; it replaces the scalar
      inner loop.
    - ``p1_batch(rng, above, n1, n0)`` returns ``n1`` inner-probability
      estimates, each statistically identical to an ``n0``-draw inner loop;
      it replaces the two innermost loops.  Implementations must preserve
      the estimator's law exactly (e.g. by sampling Binomial(n0, P1)/n0
      when the conditional success probability is known in closed form).
    """

    layers: tuple
    qos: Optional[Callable[[tuple], float]] = None
    inner_batch: Optional[Callable[[np.random.Generator, tuple, int], np.ndarray]] = None
    p1_batch: Optional[
        Callable[[np.random.Generator, tuple, int, int], np.ndarray]
    ] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        if not 2 <= len(self.layers) <= MAX_LAYERS:
            raise ConfigurationError(
                f"need between 2 and {MAX_LAYERS} layers, got {len(self.layers)}"
            )
        if self.qos is None and self.inner_batch is None and self.p1_batch is None:
            raise ConfigurationError("model needs qos, inner_batch, or p1_batch")

    @property
    def order(self) -> int:
        return len(self.layers) - 1


@dataclass(frozen=True)
class MdQuery:
    """QoS threshold q, per-layer targets (p1..pn), and trial counts (N0..Nn)."""

    q: float
    p: tuple[float, ...]  # innermost first
    trials: tuple[int, ...]  # innermost first, one more entry than p

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "trials", tuple(int(n) for n in self.trials))
        if not math.isfinite(self.q):
            raise DomainError("q must be finite")
        if len(self.trials) != len(self.p) + 1:
            raise ConfigurationError("need len(trials) == len(p) + 1")
        if any(not 0.0 < pk < 1.0 for pk in self.p):
            raise DomainError("all thresholds p_k must lie strictly in (0, 1)")
        if any(n < 1 for n in self.trials):
            raise DomainError("all trial counts must be >= 1")


@dataclass(frozen=True)
class MdEstimate:
    """A Monte Carlo estimate with its outer-layer binomial standard error."""

    value: float
    stderr: float
    trials: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise DomainError("estimate must lie in [0, 1]")
        if self.stderr < 0.0:
            raise DomainError("stderr must be >= 0")


def _binomial_stderr(value: float, n: int) -> float:
    return math.sqrt(max(value * (1.0 - value), 0.0) / n)


def _inner_fraction(
    model: LayeredModel, query: MdQuery, above: tuple, rng: np.random.Generator
) -> float:
    n0 = query.trials[0]
    if model.inner_batch is not None:
        qs = np.asarray(model.inner_batch(rng, above, n0))
        return float(np.count_nonzero(qs > query.q)) / n0
    count = 0
    for _ in range(n0):
        state = model.layers[0](rng, above)
        if model.qos(above + (state,)) > query.q:
            count += 1
    return count / n0


def _p_estimate(
    model: LayeredModel,
    query: MdQuery,
    level: int,
    above: tuple,
    rng: np.random.Generator,
) -> float:
    """Estimate P_level given the realized states of layers level..n."""
    if level == 1:
        return _inner_fraction(model, query, above, rng)
    if level == 2 and model.p1_batch is not None:
        n1, n0 = query.trials[1], query.trials[0]
        p1s = np.asarray(model.p1_batch(rng, above, n1, n0))
        return float(np.count_nonzero(p1s > query.p[0])) / n1
    n_below = query.trials[level - 1]
    threshold = query.p[level - 2]
    count = 0
    for _ in range(n_below):
        state = model.layers[level - 1](rng, above)
        if _p_estimate(model, query, level - 1, above + (state,), rng) > threshold:
            count += 1
    return count / n_below


def nested_md_estimate(model: LayeredModel, query: MdQuery, seed: int) -> MdEstimate:
    """n-th order MD reliability by nested Monte Carlo.

    Per outer realization an independent RNG stream is derived from
    (seed, layer index, realization index), so the result is bit-identical
    for a fixed (seed, query) regardless of evaluation order.
    """
    n = model.order
    if len(query.p) != n:
        raise ConfigurationError(
            f"query has {len(query.p)} thresholds but the model is order {n}"
        )
    n_outer = query.trials[-1]
    p_outer = query.p[-1]
    count = 0
    for i in range(n_outer):
        rng = derive_rng(seed, n, i)
        outer_state = model.layers[-1](rng, ())
        if _p_estimate(model, query, n, (outer_state,), rng) > p_outer:
            count += 1
    value = count / n_outer
    return MdEstimate(
        value=value,
        stderr=_binomial_stderr(value, n_outer),
        trials=query.trials,
        seed=seed,
    )


def zeroth_order_reliability(
    model: LayeredModel, q: float, n_trials: int, seed: int
) -> MdEstimate:
    """Standard ccdf P(Q > q): one joint realization of every layer per trial."""
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    count = 0
    for i in range(n_trials):
        rng = derive_rng(seed, 0, i)
        states: tuple = ()
        for sampler in reversed(model.layers[1:]):
            states = states + (sampler(rng, states),)
        if model.inner_batch is not None:
            qval = float(np.asarray(model.inner_batch(rng, states, 1))[0])
        else:
            inner = model.layers[0](rng, states)
            qval = model.qos(states + (inner,))
        if qval > q:
            count += 1
    value = count / n_trials
    return MdEstimate(
        value=value,
        stderr=_binomial_stderr(value, n_trials),
        trials=(n_trials,),
        seed=seed,
    )


def reduce_order(curve: Sequence[tuple[float, float]]) -> float:
    """Integrate an MD curve over its threshold, dropping one order.

    ``curve`` holds (p_k, value) samples with strictly ascending p_k inside
    [0, 1].  The value is extended as a constant from the smallest sampled
    p_k down to 0 and from the largest up to 1, then integrated by the
    trapezoidal rule.
    """
    pts = [(float(p), float(v)) for p, v in curve]
    if not pts:
        raise DomainError("curve must not be empty")
    ps = np.array([p for p, _ in pts])
    vs = np.array([v for _, v in pts])
    if np.any(ps < 0.0) or np.any(ps > 1.0):
        raise DomainError("thresholds must lie in [0, 1]")
    if np.any(np.diff(ps) <= 0.0):
        raise DomainError("thresholds must be strictly ascending")
    integral = float(np.trapezoid(vs, ps))
    integral += vs[0] * ps[0]  # constant extrapolation to p -> 0
    integral += vs[-1] * (1.0 - ps[-1])  # and to p -> 1
    return integral

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metarel.errors import ConfigurationError, DomainError
from metarel.mdcore import (
    LayeredModel,
    MdEstimate,
    MdQuery,
    nested_md_estimate,
    reduce_order,
    zeroth_order_reliability,
)


def coin_toy_model() -> LayeredModel:
    """Outer fair coin picks an inner success probability of 0.9 or 0.3."""

    def outer(rng, above):
        return 0.9 if rng.random() < 0.5 else 0.3

    def inner(rng, above):
        return 1.0 if rng.random() < above[0] else 0.0

    return LayeredModel(layers=(inner, outer), qos=lambda s: s[-1])


def constant_model(value: float) -> LayeredModel:
    return LayeredModel(
        layers=(lambda rng, above: value, lambda rng, above: None),
        qos=lambda s: s[-1],
    )


class TestValidation:
    def test_query_thresholds_strict(self):
        for p in (0.0, 1.0):
            with pytest.raises(DomainError):
                MdQuery(q=1.0, p=(p,), trials=(10, 10))

    def test_query_arity(self):
        with pytest.raises(ConfigurationError):
            MdQuery(q=1.0, p=(0.5,), trials=(10,))

    def test_trial_positivity(self):
        with pytest.raises(DomainError):
            MdQuery(q=1.0, p=(0.5,), trials=(0, 10))

    def test_layer_count_limits(self):
        f = lambda rng, above: 0.0
        with pytest.raises(ConfigurationError):
            LayeredModel(layers=(f,), qos=lambda s: 0.0)
        with pytest.raises(ConfigurationError):
            LayeredModel(layers=(f,) * 5, qos=lambda s: 0.0)

    def test_model_query_mismatch(self):
        model = coin_toy_model()
        with pytest.raises(ConfigurationError):
            nested_md_estimate(model, MdQuery(q=0.5, p=(0.5, 0.5), trials=(5, 5, 5)), 0)


class TestZerothOrder:
    def test_constant_above_threshold(self):
        est = zeroth_order_reliability(constant_model(2.0), 1.0, 200, seed=1)
        assert est.value == 1.0

    def test_strict_inequality_at_boundary(self):
        est = zeroth_order_reliability(constant_model(2.0), 2.0, 200, seed=1)
        assert est.value == 0.0

    def test_coin_toy(self):
        est = zeroth_order_reliability(coin_toy_model(), 0.5, 20_000, seed=2)
        sigma = 0.5 / math.sqrt(20_000)
        assert abs(est.value - 0.6) <= 3.0 * max(sigma, est.stderr)


class TestNestedEstimate:
    def test_coin_toy_half(self):
        est = nested_md_estimate(
            coin_toy_model(), MdQuery(q=0.5, p=(0.5,), trials=(4000, 4000)), seed=3
        )
        assert abs(est.value - 0.5) <= 3.0 * 0.5 / math.sqrt(4000)

    def test_coin_toy_strict_target(self):
        est = nested_md_estimate(
            coin_toy_model(), MdQuery(q=0.5, p=(0.95,), trials=(4000, 4000)), seed=4
        )
        assert est.value <= 0.01

    def test_degenerate_middle_layer(self):
        # a pass-through middle layer must not change the estimate
        def outer(rng, above):
            return 0.9 if rng.random() < 0.5 else 0.3

        def middle(rng, above):
            return None

        def inner(rng, above):
            return 1.0 if rng.random() < above[0] else 0.0

        model = LayeredModel(layers=(inner, middle, outer), qos=lambda s: s[-1])
        est = nested_md_estimate(
            model, MdQuery(q=0.5, p=(0.5, 0.5), trials=(4000, 1, 4000)), seed=5
        )
        assert abs(est.value - 0.5) <= 3.0 * 0.5 / math.sqrt(4000)

    def test_all_layers_deterministic(self):
        model = LayeredModel(
            layers=(lambda rng, a: 2.0, lambda rng, a: None, lambda rng, a: None),
            qos=lambda s: s[-1],
        )
        est = nested_md_estimate(
            model, MdQuery(q=1.0, p=(0.5, 0.5), trials=(3, 3, 3)), seed=6
        )
        assert est.value == 1.0

    def test_three_level_enumeration(self):
        # outermost coin picks w in {0.9, 0.1}; middle Bernoulli(w) picks the
        # inner success probability from {0.8, 0.2}.  With p1 = 0.5 only the
        # 0.8 branch clears the inner target, so P2 = w; with p2 = 0.5 only
        # w = 0.9 clears the middle target: R = 0.5.
        def outer(rng, above):
            return 0.9 if rng.random() < 0.5 else 0.1

        def middle(rng, above):
            return 0.8 if rng.random() < above[0] else 0.2

        def inner(rng, above):
            return 1.0 if rng.random() < above[1] else 0.0

        model = LayeredModel(layers=(inner, middle, outer), qos=lambda s: s[-1])
        est = nested_md_estimate(
            model, MdQuery(q=0.5, p=(0.5, 0.5), trials=(600, 400, 1500)), seed=7
        )
        assert abs(est.value - 0.5) <= 4.0 * 0.5 / math.sqrt(1500)

    def test_small_thresholds_saturate(self):
        est = nested_md_estimate(
            coin_toy_model(), MdQuery(q=0.5, p=(0.01,), trials=(500, 500)), seed=8
        )
        assert est.value == 1.0

    def test_deterministic_for_fixed_seed(self):
        q = MdQuery(q=0.5, p=(0.5,), trials=(300, 300))
        a = nested_md_estimate(coin_toy_model(), q, seed=9)
        b = nested_md_estimate(coin_toy_model(), q, seed=9)
        assert a == b

    def test_monotone_in_threshold_with_shared_seed(self):
        vals = [
            nested_md_estimate(
                coin_toy_model(), MdQuery(q=0.5, p=(p,), trials=(400, 400)), seed=10
            ).value
            for p in (0.2, 0.4, 0.6, 0.8)
        ]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_inner_batch_hook_equivalent(self):
        def outer(rng, above):
            return 0.9 if rng.random() < 0.5 else 0.3

        def inner_batch(rng, above, size):
            return (rng.random(size) < above[0]).astype(float)

        hooked = LayeredModel(layers=(lambda r, a: 0.0, outer), inner_batch=inner_batch)
        est = nested_md_estimate(
            hooked, MdQuery(q=0.5, p=(0.5,), trials=(2000, 2000)), seed=11
        )
        assert abs(est.value - 0.5) <= 3.0 * 0.5 / math.sqrt(2000)

    def test_p1_batch_hook_equivalent(self):
        def outer(rng, above):
            return 0.9 if rng.random() < 0.5 else 0.3

        def p1_batch(rng, above, n1, n0):
            # exact conditional success probability is the coin bias itself
            return rng.binomial(n0, above[0], size=n1) / n0

        hooked = LayeredModel(
            layers=(lambda r, a: 0.0, lambda r, a: None, outer), p1_batch=p1_batch
        )
        est = nested_md_estimate(
            hooked, MdQuery(q=0.5, p=(0.5, 0.5), trials=(500, 50, 2000)), seed=12
        )
        assert abs(est.value - 0.5) <= 3.0 * 0.5 / math.sqrt(2000)

    def test_stderr_bound(self):
        est = nested_md_estimate(
            coin_toy_model(), MdQuery(q=0.5, p=(0.5,), trials=(200, 150)), seed=13
        )
        assert est.stderr <= 0.5 / math.sqrt(150) + 1e-12


class TestReduceOrder:
    def test_constant_curve(self):
        assert reduce_order([(0.2, 0.7), (0.8, 0.7)]) == pytest.approx(0.7, rel=1e-12)

    def test_step_curve_integral(self):
        # R(p) = 1 for p < 0.3, 0.5 for 0.3 <= p < 0.9, 0 beyond: integral 0.6
        ps = np.linspace(0.0005, 0.9995, 1001)
        vals = np.where(ps < 0.3, 1.0, np.where(ps < 0.9, 0.5, 0.0))
        got = reduce_order(list(zip(ps, vals)))
        assert got == pytest.approx(0.6, abs=1e-3)

    def test_rejects_bad_grids(self):
        with pytest.raises(DomainError):
            reduce_order([(0.5, 1.0), (0.2, 1.0)])
        with pytest.raises(DomainError):
            reduce_order([(-0.1, 1.0), (0.5, 1.0)])
        with pytest.raises(DomainError):
            reduce_order([])

    @given(
        st.lists(
            st.floats(min_value=0.001, max_value=0.999), min_size=2, max_size=20
        ),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_constant_curve_property(self, ps, c):
        grid = sorted(set(ps))
        if len(grid) < 2:
            return
        assert reduce_order([(p, c) for p in grid]) == pytest.approx(c, abs=1e-9)


class TestEstimateType:
    def test_bounds_enforced(self):
        with pytest.raises(DomainError):
            MdEstimate(value=1.2, stderr=0.0, trials=(1,), seed=0)
        with pytest.raises(DomainError):
            MdEstimate(value=0.5, stderr=-0.1, trials=(1,), seed=0)

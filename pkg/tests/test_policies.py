import itertools
import math

import numpy as np
import pytest

import nvregret.policies as policies
from nvregret.model import (
    InfeasibleError,
    MixtureOS,
    OrderStatistic,
    ValidationError,
    WeightedErm,
    erm,
)
from nvregret.policies import (
    TailBracket,
    action_order_statistic,
    action_tabulated,
    action_werm,
    action_werm_batch,
    counting_werm,
    p_policy,
    p_policy_batch,
    poisson_binomial_tail,
    threshold_count,
    weighted_threshold_tail,
    weighted_threshold_tail_capped,
    weighted_threshold_tail_quantized,
)

from _generators import random_spec, random_weights, tabulate_werm


# --- independent oracles -----------------------------------------------------


def enum_threshold_tail(weights, probs, q):
    """Oracle: enumerate all 2**n Bernoulli outcomes directly."""
    n = len(weights)
    total = sum(weights)
    cut = q * total - 1e-12 * max(1.0, total)
    acc = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        pr = 1.0
        for b, p in zip(bits, probs):
            pr *= p if b else 1.0 - p
        if sum(w * b for w, b in zip(weights, bits)) >= cut:
            acc += pr
    return acc


def argmin_weighted_loss(weights, q, y, candidates):
    """Oracle: smallest minimizer of the weighted newsvendor loss."""
    c_o, c_u = 1.0 - q, q
    best_a, best_v = None, None
    for a in candidates:
        v = sum(w * (c_o * max(a - yi, 0.0) + c_u * max(yi - a, 0.0)) for w, yi in zip(weights, y))
        if best_v is None or v < best_v - 1e-15:
            best_a, best_v = a, v
    return best_a


# --- threshold_count ---------------------------------------------------------


def test_threshold_count_basic():
    assert threshold_count(0.9, 2) == 2
    assert threshold_count(0.9, 4) == 4
    assert threshold_count(0.5, 2) == 1
    assert threshold_count(0.9, 10) == 9  # 0.9 * 10 floats to 9.000000000000002


# --- counting_werm -----------------------------------------------------------


def test_counting_examples():
    assert counting_werm((2, 1, 1, 1), 0.5, (1, 1, 0, 0)) == 1  # 3 >= 2.5
    assert counting_werm((1,), 0.5, (0,)) == 0
    assert counting_werm((1, 1, 1, 1), 0.9, (1, 1, 1, 0)) == 0  # 3 < 3.6


def test_counting_equality_counts_as_one():
    assert counting_werm((1, 1), 0.5, (1, 0)) == 1  # 1 >= 1 exactly


def test_counting_all_zero_weights():
    with pytest.raises(ValidationError):
        counting_werm((0.0, 0.0), 0.5, (1, 1))


# --- actions -----------------------------------------------------------------


def test_action_werm_examples():
    assert action_werm((2, 1, 1, 1), 0.5, (0.1, 0.2, 0.3, 0.4)) == 0.2
    assert action_werm((2, 1, 1, 1), 0.5, (0.3, 0.2, 0.1, 0.4)) == 0.3
    assert action_werm((1, 1, 1, 1), 0.9, (0.1, 0.2, 0.3, 0.4)) == 0.4


def test_action_werm_ties_toward_smallest():
    # Both 0.3s are the same candidate; the smaller of the distinct values wins.
    assert action_werm((1, 1), 0.75, (0.3, 0.3)) == 0.3
    assert action_werm((1, 1), 0.5, (0.7, 0.2)) == 0.2


def test_action_werm_outcome_range():
    with pytest.raises(ValidationError):
        action_werm((1,), 0.5, (1.5,))


def test_action_order_statistic_examples():
    y = (0.10, 0.20, 0.30, 0.40, 0.40, 0.50)
    assert action_order_statistic((3, 4, 5, 6), 3, y) == pytest.approx(0.40)
    assert action_order_statistic((1, 2), 0, (0.9, 0.9)) == 0.0
    assert action_order_statistic((1, 2), 3, (0.7, 0.3)) == 1.0


def test_action_werm_matches_loss_minimizer():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        w = random_weights(rng, n)
        q = float(rng.uniform(0.05, 0.95))
        y = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        a = action_werm(w, q, y)
        expected = argmin_weighted_loss(w, q, y, sorted({0.0, *y}))
        assert a == expected


def test_action_werm_matches_dense_grid_minimizer():
    rng = np.random.default_rng(12)
    grid = np.linspace(0, 1, 10001)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        w = random_weights(rng, n)
        q = float(rng.uniform(0.1, 0.9))
        y = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        a = action_werm(w, q, y)
        approx = argmin_weighted_loss(w, q, y, grid.tolist())
        assert abs(a - approx) <= 1e-4 + 1e-12


def test_action_batch_matches_scalar():
    rng = np.random.default_rng(13)
    w = (0.5, 1.5, 1.0)
    Y = rng.uniform(0, 1, size=(40, 3))
    batch = action_werm_batch(w, 0.7, Y)
    for t in range(Y.shape[0]):
        assert batch[t] == action_werm(w, 0.7, Y[t])


# --- poisson binomial --------------------------------------------------------


def test_pb_tail_examples():
    assert poisson_binomial_tail((0.5, 0.5), 2) == pytest.approx(0.25)
    assert poisson_binomial_tail((0.37,), 1) == pytest.approx(0.37)
    assert poisson_binomial_tail((0.1, 0.2, 0.3), 1) == pytest.approx(0.496)


def test_pb_tail_boundaries():
    assert poisson_binomial_tail((0.4, 0.6), 0) == 1.0
    assert poisson_binomial_tail((0.4, 0.6), 3) == 0.0


def test_pb_tail_against_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        p = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        for m in range(0, n + 2):
            brute = sum(
                math.prod(pi if b else 1 - pi for pi, b in zip(p, bits))
                for bits in itertools.product((0, 1), repeat=n)
                if sum(bits) >= m
            )
            assert poisson_binomial_tail(p, m) == pytest.approx(brute, abs=1e-12)


# --- weighted threshold tail -------------------------------------------------


def test_weighted_tail_examples():
    assert weighted_threshold_tail((1, 1), (0.5, 0.5), 0.9) == pytest.approx(0.25)
    assert weighted_threshold_tail((2, 1, 1, 1), (1, 0, 0, 0), 0.5) == 0.0


def test_weighted_tail_equal_weight_reduction():
    rng = np.random.default_rng(31)
    for _ in range(40):
        n = int(rng.integers(1, 10))
        p = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        q = float(rng.uniform(0.05, 0.95))
        assert weighted_threshold_tail((1.0,) * n, p, q) == pytest.approx(
            poisson_binomial_tail(p, threshold_count(q, n)), abs=1e-12
        )


def test_weighted_tail_against_enumeration():
    rng = np.random.default_rng(32)
    for _ in range(80):
        n = int(rng.integers(1, 9))
        w = random_weights(rng, n)
        p = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        q = float(rng.uniform(0.05, 0.95))
        assert weighted_threshold_tail(w, p, q) == pytest.approx(
            enum_threshold_tail(w, p, q), abs=1e-10
        )


def test_weighted_tail_state_budget_error(monkeypatch):
    monkeypatch.setattr(policies, "EXACT_STATES_SCALAR", 1 << 8)
    rng = np.random.default_rng(33)
    w = tuple(float(v) for v in rng.uniform(0.5, 1.5, size=12))
    p = (0.5,) * 12
    with pytest.raises(InfeasibleError):
        weighted_threshold_tail(w, p, 0.5)


def test_capped_bracket_contains_exact():
    rng = np.random.default_rng(34)
    for _ in range(30):
        n = int(rng.integers(2, 13))
        w = tuple(float(v) for v in rng.uniform(0.05, 2.0, size=n))
        p = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        q = float(rng.uniform(0.1, 0.9))
        exact = weighted_threshold_tail(w, p, q)
        br = weighted_threshold_tail_capped(w, p, q, max_states=64)
        assert br.lo - 1e-12 <= exact <= br.hi + 1e-12
        assert br.width >= 0


def test_quantized_bracket_contains_exact():
    rng = np.random.default_rng(35)
    for _ in range(30):
        n = int(rng.integers(2, 13))
        w = tuple(float(v) for v in rng.uniform(0.05, 2.0, size=n))
        p = tuple(float(v) for v in rng.uniform(0, 1, size=n))
        q = float(rng.uniform(0.1, 0.9))
        exact = weighted_threshold_tail(w, p, q)
        br = weighted_threshold_tail_quantized(w, p, q, denominator=97)
        assert br.lo - 1e-12 <= exact <= br.hi + 1e-12
        fine = weighted_threshold_tail_quantized(w, p, q, denominator=10 ** 5)
        assert fine.width <= br.width + 1e-12
        assert fine.lo - 1e-12 <= exact <= fine.hi + 1e-12


def test_bracket_type_validation():
    with pytest.raises(ValidationError):
        TailBracket(0.7, 0.3)


# --- p_policy ----------------------------------------------------------------


def test_p_policy_examples():
    assert p_policy(WeightedErm((1.0,)), (0.3,), 0.5) == pytest.approx(0.3)
    assert p_policy(OrderStatistic(subset=(1, 2), rank=0), (0.4, 0.9), 0.5) == 1.0


def test_p_policy_tabulated_matches_weighted_tail():
    spec = tabulate_werm((2, 1, 1, 1), 0.5)
    h = (0.5, 0.5, 0.5, 0.5)
    assert p_policy(spec, h, 0.5) == pytest.approx(weighted_threshold_tail((2, 1, 1, 1), h, 0.5), abs=1e-12)
    rng = np.random.default_rng(41)
    for _ in range(25):
        h = tuple(float(v) for v in rng.uniform(0, 1, size=4))
        assert p_policy(spec, h, 0.5) == pytest.approx(
            weighted_threshold_tail((2, 1, 1, 1), h, 0.5), abs=1e-12
        )


def test_p_policy_order_statistic_constant_one():
    # rank > |S| is the always-order-1 policy; its action-CDF functional is 0.
    assert p_policy(OrderStatistic(subset=(1, 2), rank=3), (0.9, 0.9), 0.5) == 0.0


def test_p_policy_range_and_monotonicity():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        spec = random_spec(rng, n)
        q = float(rng.uniform(0.1, 0.9))
        h = rng.uniform(0, 1, size=n)
        bump = rng.uniform(0, 1, size=n) * rng.integers(0, 2, size=n)
        h2 = np.minimum(h + bump, 1.0)
        a, b = p_policy(spec, h, q), p_policy(spec, h2, q)
        assert -1e-12 <= a <= 1 + 1e-12
        assert a <= b + 1e-12


def test_p_policy_mixture_closure_exact():
    rng = np.random.default_rng(43)
    for _ in range(40):
        n = int(rng.integers(2, 8))
        mix = random_spec(rng, n, kinds=("mix",))
        q = float(rng.uniform(0.1, 0.9))
        h = rng.uniform(0, 1, size=n)
        combined = p_policy(mix, h, q)
        manual = sum(
            c.weight * p_policy(OrderStatistic(subset=c.subset, rank=c.rank), h, q)
            for c in mix.entries
        )
        assert combined == pytest.approx(manual, abs=1e-14)


def test_p_policy_batch_matches_scalar():
    rng = np.random.default_rng(44)
    for _ in range(25):
        n = int(rng.integers(1, 8))
        spec = random_spec(rng, n)
        q = float(rng.uniform(0.1, 0.9))
        H = rng.uniform(0, 1, size=(n, 7))
        lo, hi = p_policy_batch(spec, H, q)
        assert np.array_equal(lo, hi) or np.all(lo <= hi)
        for g in range(H.shape[1]):
            assert lo[g] == pytest.approx(p_policy(spec, H[:, g], q), abs=1e-12)


def test_counting_consistency():
    # 1{action <= z} must equal the counting function applied to 1{y_i <= z}.
    rng = np.random.default_rng(45)
    for _ in range(300):
        n = int(rng.integers(1, 13))
        y = rng.uniform(0, 1, size=n)
        z = float(rng.uniform(0, 1))
        b = (y <= z).astype(int)
        if rng.integers(0, 2):
            w = random_weights(rng, n)
            q = float(rng.uniform(0.1, 0.9))
            a = action_werm(w, q, y)
            assert int(a <= z) == counting_werm(w, q, b)
        else:
            subset = tuple(sorted(rng.choice(np.arange(1, n + 1), size=int(rng.integers(1, n + 1)), replace=False).tolist()))
            rank = int(rng.integers(0, len(subset) + 2))
            a = action_order_statistic(subset, rank, y)
            kappa = int(sum(b[j - 1] for j in subset) >= rank) if rank <= len(subset) else 0
            if rank == 0:
                kappa = 1
            assert int(a <= z) == kappa


def test_action_tabulated_matches_werm():
    rng = np.random.default_rng(46)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        w = random_weights(rng, n)
        q = float(rng.uniform(0.1, 0.9))
        spec = tabulate_werm(w, q)
        y = rng.uniform(0, 1, size=n)
        assert action_tabulated(spec, q, y) == action_werm(w, q, y)

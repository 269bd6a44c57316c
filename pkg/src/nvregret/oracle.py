"""Brute-force and Monte Carlo cross-checks of the exact engine at small n.

Everything here re-derives quantities the fast modules compute in closed
form, using nothing but enumeration over finite distributions and seeded
sampling. The suites certify the Bernoulli reduction, the worst-history
structure, and the separability of policy CDFs numerically; none of the
engine paths call into this module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .model import (
    DissimilarityProfile,
    InfeasibleError,
    MixtureOS,
    OrderStatistic,
    PolicySpec,
    TabulatedCounting,
    ValidationError,
    WeightedErm,
    validate_policy,
)
from .policies import action_order_statistic, action_tabulated, action_werm_batch

__all__ = [
    "DiscreteDistribution",
    "ENUM_BUDGET",
    "MC_MIN_TRIALS",
    "bruteforce_slack",
    "bruteforce_worst_case",
    "exact_expected_regret",
    "mc_action_cdf",
    "verify_not_order_statistic",
]

# Hard cap on enumerated (sample tuple) x (distribution tuple) evaluations.
ENUM_BUDGET = 2 * 10**6
MC_MIN_TRIALS = 10**4


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution on strictly increasing support points in [0, 1]."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        sup = tuple(float(y) for y in self.support)
        pr = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probs", pr)
        if not sup or len(sup) != len(pr):
            raise ValidationError("support", "support and probs must have equal positive length")
        if any(not 0.0 <= y <= 1.0 for y in sup):
            raise ValidationError("support", "points must lie in [0, 1]")
        if any(b <= a for a, b in zip(sup, sup[1:])):
            raise ValidationError("support", "points must be strictly increasing")
        if any(p < 0.0 for p in pr):
            raise ValidationError("probs", "must be non-negative")
        total = math.fsum(pr)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError("probs", f"must sum to 1, got {total!r}")

    @classmethod
    def bernoulli(cls, mu: float) -> "DiscreteDistribution":
        mu = float(mu)
        if not 0.0 <= mu <= 1.0:
            raise ValidationError("mu", f"must lie in [0, 1], got {mu}")
        if mu == 0.0:
            return cls((0.0,), (1.0,))
        if mu == 1.0:
            return cls((1.0,), (1.0,))
        return cls((0.0, 1.0), (1.0 - mu, mu))

    @classmethod
    def from_cdf(cls, support: Sequence[float], cdf: Sequence[float]) -> "DiscreteDistribution":
        c = [float(v) for v in cdf]
        if len(c) != len(tuple(support)):
            raise ValidationError("cdf", "one value per support point required")
        if abs(c[-1] - 1.0) > 1e-12:
            raise ValidationError("cdf", f"must end at 1, got {c[-1]!r}")
        probs = [c[0]] + [b - a for a, b in zip(c, c[1:])]
        return cls(tuple(support), tuple(probs))

    def cdf(self, a: float) -> float:
        # The 1e-12 normalization tolerance can leave the total a few ulp
        # outside [0, 1]; downstream evaluators require exact range.
        return min(1.0, max(0.0, math.fsum(p for y, p in zip(self.support, self.probs) if y <= a)))

    def mean(self) -> float:
        return math.fsum(y * p for y, p in zip(self.support, self.probs))


def _cost_curve(F: DiscreteDistribution) -> Tuple[np.ndarray, np.ndarray, float]:
    """Knots and values of a -> integral_0^a F, plus the mean, for cost evaluation."""
    sup = np.asarray(F.support)
    cum = np.cumsum(F.probs)
    knots = [0.0]
    integ = [0.0]
    level = 0.0
    for y, c in zip(sup, cum):
        integ.append(integ[-1] + level * (y - knots[-1]))
        knots.append(float(y))
        level = float(c)
    integ.append(integ[-1] + level * (1.0 - knots[-1]))
    knots.append(1.0)
    # Duplicate knots (support containing 0 or 1) are harmless to interp.
    return np.asarray(knots), np.asarray(integ), F.mean()


def _costs(q: float, F: DiscreteDistribution, actions: np.ndarray) -> np.ndarray:
    """Newsvendor cost of each action against demand F, by the integral identity
    L(a, F) = c_u (E[y] - a) + (c_u + c_o) * integral_0^a F with c_u + c_o = 1."""
    knots, integ, mean = _cost_curve(F)
    return q * (mean - actions) + np.interp(actions, knots, integ)


def _oracle_action(q: float, F: DiscreteDistribution) -> float:
    """Smallest minimizer of a -> L(a, F): the lower q-quantile of F."""
    cum = 0.0
    for y, p in zip(F.support, F.probs):
        cum += p
        if cum >= q - 1e-12:
            return float(y)
    return float(F.support[-1])


def _mixture_actions(
    spec: PolicySpec, q: float, ys: np.ndarray
) -> List[Tuple[float, np.ndarray]]:
    """Actions of the policy on each sample row, as (weight, actions) pairs.

    Deterministic specs produce one pair of weight 1; a randomized mixture
    produces one pair per component, so expectations stay exact.
    """
    if isinstance(spec, WeightedErm):
        return [(1.0, action_werm_batch(spec.weights, q, ys))]
    if isinstance(spec, OrderStatistic):
        acts = np.array([action_order_statistic(spec.subset, spec.rank, y) for y in ys])
        return [(1.0, acts)]
    if isinstance(spec, TabulatedCounting):
        acts = np.array([action_tabulated(spec, q, y) for y in ys])
        return [(1.0, acts)]
    if isinstance(spec, MixtureOS):
        out = []
        for comp in spec.entries:
            acts = np.array([action_order_statistic(comp.subset, comp.rank, y) for y in ys])
            out.append((float(comp.weight), acts))
        return out
    raise ValidationError("spec", f"unknown policy spec {type(spec).__name__}")


def exact_expected_regret(
    spec: PolicySpec,
    q: float,
    F0: DiscreteDistribution,
    Hs: Sequence[DiscreteDistribution],
) -> float:
    """Expected regret by full enumeration of the sample space.

    Walks every tuple of support points of the histories with its product
    probability, applies the policy, and accumulates the cost gap to the
    oracle action under F0. Exact up to float summation; no sampling.
    """
    if not 0.0 < q < 1.0:
        raise ValidationError("q", f"must lie in (0, 1), got {q}")
    Hs = list(Hs)
    if not Hs:
        raise ValidationError("Hs", "at least one history is required")
    validate_policy(spec, len(Hs))
    sizes = [len(H.support) for H in Hs]
    if math.prod(sizes) > 10**6:
        raise InfeasibleError(f"enumeration budget exceeded: {math.prod(sizes)} > 1e6 tuples")
    ys = np.array(list(itertools.product(*[H.support for H in Hs])), dtype=float)
    probs = np.ones(len(ys))
    for i, H in enumerate(Hs):
        lookup = dict(zip(H.support, H.probs))
        probs *= np.array([lookup[y] for y in ys[:, i]])
    regret_rows = _regret_rows(spec, q, F0, ys)
    return float(np.dot(probs, regret_rows))


def _regret_rows(
    spec: PolicySpec, q: float, F0: DiscreteDistribution, ys: np.ndarray
) -> np.ndarray:
    """Per-sample-tuple regret of the policy against demand F0."""
    best = _costs(q, F0, np.array([_oracle_action(q, F0)]))[0]
    rows = np.zeros(len(ys))
    for weight, acts in _mixture_actions(spec, q, ys):
        rows += weight * (_costs(q, F0, acts) - best)
    return rows


def _monotone_cdf_vectors(g: int, m: int) -> np.ndarray:
    """All non-decreasing CDF vectors on m points with levels linspace(0,1,g),
    final value pinned to 1."""
    levels = np.linspace(0.0, 1.0, g)
    if m == 1:
        return np.ones((1, 1))
    body = itertools.combinations_with_replacement(levels, m - 1)
    return np.array([row + (1.0,) for row in body])


def bruteforce_slack(n: int, cdf_grid: int) -> float:
    """Discretization allowance for grid-restricted worst cases: each of the
    n + 1 distributions can sit one CDF grid step from the true extremum and
    the regret moves at most one-for-one with each sup-norm CDF perturbation."""
    if cdf_grid < 2:
        raise ValidationError("cdf_grid", f"needs at least 2 levels, got {cdf_grid}")
    return (n + 1) / (cdf_grid - 1)


def bruteforce_worst_case(
    spec: PolicySpec,
    q: float,
    d: DissimilarityProfile,
    support_grid: int = 4,
    cdf_grid: int = 11,
) -> float:
    """Worst-case expected regret by enumerating gridded distributions.

    The target F0 ranges over all CDFs on linspace(0,1,support_grid) with
    values in linspace(0,1,cdf_grid); each history ranges over the grid
    CDFs within its Kolmogorov budget of F0 (a per-point box constraint,
    exact for step CDFs on a common support). Everything the engine claims
    is a supremum over this set plus the `bruteforce_slack` allowance.
    """
    if not 0.0 < q < 1.0:
        raise ValidationError("q", f"must lie in (0, 1), got {q}")
    n = d.n
    if n > 3:
        raise ValidationError("d", f"brute force is limited to n <= 3, got {n}")
    m = int(support_grid)
    g = int(cdf_grid)
    if m < 2:
        raise ValidationError("support_grid", f"needs at least 2 points, got {m}")
    if g < 2:
        raise ValidationError("cdf_grid", f"needs at least 2 levels, got {g}")
    validate_policy(spec, n)
    support = np.linspace(0.0, 1.0, m)
    vectors = _monotone_cdf_vectors(g, m)

    ys = np.array(list(itertools.product(support, repeat=n)), dtype=float)
    shape = (m,) * n
    evals = 0
    best = -math.inf
    for f0 in vectors:
        F0 = DiscreteDistribution.from_cdf(support, f0)
        regret = _regret_rows(spec, q, F0, ys).reshape(shape)
        feasible = []
        for i in range(n):
            mask = np.all(np.abs(vectors - f0) <= d.d[i] + 1e-12, axis=1)
            cand = vectors[mask]
            # Probability vectors for each candidate CDF, rows summing to 1.
            feasible.append(np.diff(cand, prepend=0.0, axis=1))
        count = math.prod(c.shape[0] for c in feasible)
        evals += count
        if evals > ENUM_BUDGET:
            raise InfeasibleError(
                f"enumeration budget exceeded: {evals} > {ENUM_BUDGET} distribution tuples"
            )
        if n == 1:
            vals = feasible[0] @ regret
        elif n == 2:
            vals = feasible[0] @ regret @ feasible[1].T
        else:
            vals = np.einsum("ai,bj,ck,ijk->abc", feasible[0], feasible[1], feasible[2], regret)
        best = max(best, float(vals.max()))
    return best


def mc_action_cdf(
    spec: PolicySpec,
    q: float,
    Hs: Sequence[DiscreteDistribution],
    z_grid: Sequence[float],
    trials: int,
    seed: int,
) -> np.ndarray:
    """Empirical CDF of the policy's action at each level, from seeded sampling.

    Samples each history independently, draws the mixture component per
    trial when the policy is randomized, and reports P(action <= z) for
    every z in the grid. The same seed always reproduces the same output.
    """
    trials = int(trials)
    if trials < MC_MIN_TRIALS:
        raise ValidationError("trials", f"needs at least {MC_MIN_TRIALS}, got {trials}")
    if not 0.0 < q < 1.0:
        raise ValidationError("q", f"must lie in (0, 1), got {q}")
    Hs = list(Hs)
    if not Hs:
        raise ValidationError("Hs", "at least one history is required")
    validate_policy(spec, len(Hs))
    rng = np.random.default_rng(seed)
    ys = np.column_stack(
        [
            np.asarray(H.support)[rng.choice(len(H.support), size=trials, p=H.probs)]
            for H in Hs
        ]
    )
    if isinstance(spec, MixtureOS):
        weights = [c.weight for c in spec.entries]
        picks = rng.choice(len(spec.entries), size=trials, p=weights)
        actions = np.empty(trials)
        for idx, comp in enumerate(spec.entries):
            for row in np.nonzero(picks == idx)[0]:
                actions[row] = action_order_statistic(comp.subset, comp.rank, ys[row])
    else:
        ((_, actions),) = _mixture_actions(spec, q, ys)
    z = np.asarray(z_grid, dtype=float)
    return np.array([float(np.mean(actions <= zj)) for zj in z])


def verify_not_order_statistic() -> bool:
    """Replays the counterexample showing weighted ERM leaves the
    order-statistic class: with weights (2,1,1,1) at q = 1/2 the action
    changes under a permutation of the samples."""
    weights = (2.0, 1.0, 1.0, 1.0)
    a1 = float(action_werm_batch(weights, 0.5, np.array([[0.1, 0.2, 0.3, 0.4]]))[0])
    a2 = float(action_werm_batch(weights, 0.5, np.array([[0.3, 0.2, 0.1, 0.4]]))[0])
    return abs(a1 - 0.2) < 1e-12 and abs(a2 - 0.3) < 1e-12

"""Policy actions and the separable policy-CDF functional.

Every policy here is a counting policy: whether its action stays at or
below a level z depends on the samples only through the indicators
1{y_i <= z}.  Lifting those indicators to probabilities h_i = H_i(z)
turns the action CDF into a function P(h_1..h_n), evaluated exactly via
binomial or Poisson-binomial tails for rank-structured policies and via
a dynamic program over reachable weighted sums for general weights.

General weights make the sum DP grow exponentially, so three regimes are
provided: exact (merging only floating-point-coincident sums), capped
(states merged into intervals of bounded width, returning a certified
[lo, hi] bracket on the probability), and quantized (weights rounded to
integers over a denominator, again with a certified bracket).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import betainc

from .model import (
    InfeasibleError,
    MixtureOS,
    OrderStatistic,
    PolicySpec,
    TabulatedCounting,
    ValidationError,
    WeightedErm,
)

__all__ = [
    "TailBracket",
    "threshold_count",
    "counting_werm",
    "action_werm",
    "action_werm_batch",
    "action_order_statistic",
    "action_tabulated",
    "poisson_binomial_tail",
    "weighted_threshold_tail",
    "weighted_threshold_tail_capped",
    "weighted_threshold_tail_quantized",
    "p_policy",
    "p_policy_batch",
]

# Weighted sums closer than this are treated as equal; separations below
# machine noise carry no meaning for weights like gamma**i.
SUM_MERGE_TOL = 1e-12

# Guard against float fuzz when q * n is an exact integer (0.9 * 10 -> 9.000..2).
THRESHOLD_FUZZ = 1e-9

# State budgets for the exact weighted-sum DP.
EXACT_STATES_SCALAR = 1 << 25
QUANTIZED_STATES_MAX = 1 << 26
BATCH_CELL_BUDGET = 1 << 23
EXACT_STATES_BATCH = 1 << 20

DEFAULT_QUANTIZE_DENOMINATOR = 10 ** 6


def threshold_count(q: float, total: int) -> int:
    """Smallest integer m with m >= q * total."""
    return max(0, math.ceil(q * total - THRESHOLD_FUZZ))


def _threshold_tolerance(weight_sum: float) -> float:
    return SUM_MERGE_TOL * max(1.0, weight_sum)


@dataclass(frozen=True)
class TailBracket:
    """Certified enclosure [lo, hi] of a tail probability."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("bracket", f"must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi + 1e-12:
            raise ValidationError("bracket", f"lo exceeds hi: [{self.lo}, {self.hi}]")

    @property
    def value(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise ValidationError("weights", "must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("weights", "must be finite and >= 0")
    if not np.any(w > 0):
        raise ValidationError("weights", "must not be all zero")
    return w


def counting_werm(weights: Sequence[float], q: float, b: Sequence[int]) -> int:
    """Counting function of a weighted ERM policy.

    Returns 1 iff sum(w_i * b_i) >= q * sum(w_i); equality counts as 1,
    matching the smallest-minimizer convention of the action rule.
    """
    w = _check_weights(weights)
    bv = np.asarray(b, dtype=float)
    if bv.shape != w.shape:
        raise ValidationError("b", f"length {bv.size} does not match weights length {w.size}")
    total = float(w.sum())
    return int(float(w @ bv) >= q * total - _threshold_tolerance(total))


def action_werm_batch(weights: Sequence[float], q: float, ys: np.ndarray) -> np.ndarray:
    """Vectorized weighted ERM actions for a (trials, n) sample array."""
    w = _check_weights(weights)
    Y = np.asarray(ys, dtype=float)
    if Y.ndim != 2 or Y.shape[1] != w.size:
        raise ValidationError("y", f"expected shape (trials, {w.size}), got {Y.shape}")
    if not np.all((Y >= 0) & (Y <= 1)):
        raise ValidationError("y", "outcomes must lie in [0, 1]")
    total = float(w.sum())
    thresh = q * total - _threshold_tolerance(total)
    order = np.argsort(Y, axis=1, kind="stable")
    ys_sorted = np.take_along_axis(Y, order, axis=1)
    cum = np.cumsum(w[order], axis=1)
    # First sorted position whose cumulative weight reaches the threshold.
    # Duplicated sample values need no special casing: positions inside a
    # tie run share the value, and earlier runs close strictly below the
    # threshold whenever the first crossing lies in a later run.
    hit = (cum >= thresh).argmax(axis=1)
    return ys_sorted[np.arange(Y.shape[0]), hit]


def action_werm(weights: Sequence[float], q: float, y: Sequence[float]) -> float:
    """Smallest sample value at which the weighted indicator mass reaches q.

    This is the minimizer of sum(w_i * l(a, y_i)) over a in [0, 1], ties
    broken toward the smallest action.
    """
    return float(action_werm_batch(weights, q, np.asarray(y, dtype=float)[None, :])[0])


def action_order_statistic(subset: Sequence[int], rank: int, y: Sequence[float]) -> float:
    """rank-th smallest sample among the subset; 0 orders 0, rank > |S| orders 1."""
    yv = np.asarray(y, dtype=float)
    if not np.all((yv >= 0) & (yv <= 1)):
        raise ValidationError("y", "outcomes must lie in [0, 1]")
    s = [int(j) for j in subset]
    if any(j < 1 or j > yv.size for j in s):
        raise ValidationError("subset", f"indices must lie in 1..{yv.size}")
    r = int(rank)
    if r < 0 or r > yv.size + 1:
        raise ValidationError("rank", f"must lie in 0..{yv.size + 1}, got {r}")
    if r == 0:
        return 0.0
    if r > len(s):
        return 1.0
    return float(np.sort(yv[[j - 1 for j in s]])[r - 1])


def action_tabulated(spec: TabulatedCounting, q: float, y: Sequence[float]) -> float:
    """Action of a tabulated counting policy: the smallest candidate level
    at which the table accepts the indicator vector, 1.0 if none does."""
    yv = np.asarray(y, dtype=float)
    if yv.size != spec.n:
        raise ValidationError("y", f"length {yv.size} does not match table n = {spec.n}")
    if not np.all((yv >= 0) & (yv <= 1)):
        raise ValidationError("y", "outcomes must lie in [0, 1]")
    for a in sorted({0.0, *yv.tolist()}):
        mask = 0
        for i in range(spec.n):
            if yv[i] <= a:
                mask |= 1 << i
        if spec.table[mask]:
            return float(a)
    return 1.0


# ---------------------------------------------------------------------------
# Poisson-binomial tails.


def poisson_binomial_tail(probs: Sequence[float], m: int) -> float:
    """Pr(sum of independent Bernoulli(probs_i) >= m), exactly.

    O(n * m) convolution dynamic program with an absorbing top state; no
    sampling anywhere.  m = 0 gives 1, m = n + 1 gives 0.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValidationError("probs", "must be a non-empty 1-d sequence")
    if not np.all((p >= 0) & (p <= 1)):
        raise ValidationError("probs", "entries must lie in [0, 1]")
    m = int(m)
    if m < 0 or m > p.size + 1:
        raise ValidationError("m", f"must lie in 0..{p.size + 1}, got {m}")
    if m == 0:
        return 1.0
    if m == p.size + 1:
        return 0.0
    return float(_pb_tail_batch(p[:, None], m)[0])


def _pb_tail_batch(P: np.ndarray, m: int) -> np.ndarray:
    """Columnwise Pr(sum Bernoulli(P[:, g]) >= m) for a (n, G) matrix, 1 <= m <= n."""
    n, G = P.shape
    v = np.zeros((m + 1, G))
    v[0] = 1.0
    for i in range(n):
        p = P[i]
        shifted = v[: m] * p
        v[: m] *= 1.0 - p
        v[1 : m + 1] += shifted
    return v[m]


def _pb_pmf_batch(P: np.ndarray) -> np.ndarray:
    """Columnwise Poisson-binomial pmf: (n + 1, G) counts matrix."""
    n, G = P.shape
    v = np.zeros((n + 1, G))
    v[0] = 1.0
    for i in range(n):
        p = P[i]
        shifted = v[: i + 1] * p
        v[: i + 1] *= 1.0 - p
        v[1 : i + 2] += shifted
    return v


def _binomial_tail_batch(h: np.ndarray, k: int, m: int) -> np.ndarray:
    """Pr(Binomial(k, h) >= m) for a vector of success probabilities h."""
    if m <= 0:
        return np.ones_like(h)
    if m > k:
        return np.zeros_like(h)
    return betainc(m, k - m + 1, h)


# ---------------------------------------------------------------------------
# Weighted-threshold tails: exact, capped, quantized.


def _greedy_group_starts(lo: np.ndarray, hi: np.ndarray, cap: float) -> np.ndarray:
    """Greedy left-to-right grouping of interval states sorted by lo.

    A state joins the current group only while the group's total span
    stays at or below cap, so every merged state is an interval of width
    <= cap regardless of how many steps contributed to it.
    """
    lo_l = lo.tolist()
    hi_l = hi.tolist()
    starts = [0]
    anchor = lo_l[0]
    top = hi_l[0]
    append = starts.append
    for j in range(1, len(lo_l)):
        h = hi_l[j]
        new_top = top if top >= h else h
        if new_top - anchor <= cap:
            top = new_top
        else:
            append(j)
            anchor = lo_l[j]
            top = h
    return np.asarray(starts, dtype=np.intp)


class _MergePlan:
    """Precomputed merge structure for one weight vector and width cap.

    The grouping depends only on the weights, so one plan drives the
    probability DP for arbitrarily many probability columns.
    """

    __slots__ = ("steps", "state_lo", "state_hi", "weights", "cap", "peak")

    def __init__(self, weights: Tuple[float, ...], cap: float, max_states: int):
        lo = np.zeros(1)
        hi = np.zeros(1)
        steps = []
        peak = 1
        for w in weights:
            lo2 = np.concatenate([lo, lo + w])
            hi2 = np.concatenate([hi, hi + w])
            order = np.argsort(lo2, kind="stable")
            lo2 = lo2[order]
            hi2 = hi2[order]
            starts = _greedy_group_starts(lo2, hi2, cap)
            if starts.size > max_states:
                raise InfeasibleError(
                    f"weighted-sum state count {starts.size} exceeds the budget "
                    f"{max_states}; use a capped or quantized evaluation mode"
                )
            peak = max(peak, lo2.size)
            lo = lo2[starts]
            hi = np.maximum.reduceat(hi2, starts)
            steps.append((order, starts))
        self.steps = steps
        self.state_lo = lo
        self.state_hi = hi
        self.weights = weights
        self.cap = cap
        self.peak = peak

    def tail_bracket_batch(self, P: np.ndarray, threshold: float) -> Tuple[np.ndarray, np.ndarray]:
        """Columnwise bracket on Pr(sum w_i B_i >= threshold) for (n, G) probs.

        Columns are processed in chunks so the DP working set stays near
        BATCH_CELL_BUDGET cells regardless of G.
        """
        n, G = P.shape
        chunk = max(1, BATCH_CELL_BUDGET // self.peak)
        lo_mask = self.state_lo >= threshold
        hi_mask = self.state_hi >= threshold
        tail_lo = np.empty(G)
        tail_hi = np.empty(G)
        for s in range(0, G, chunk):
            e = min(s + chunk, G)
            v = np.ones((1, e - s))
            for i, (order, starts) in enumerate(self.steps):
                p = P[i, s:e]
                v = np.concatenate([v * (1.0 - p), v * p], axis=0)[order]
                v = np.add.reduceat(v, starts, axis=0)
            tail_lo[s:e] = v[lo_mask].sum(axis=0)
            tail_hi[s:e] = v[hi_mask].sum(axis=0)
        return np.minimum(tail_lo, 1.0), np.minimum(tail_hi, 1.0)


@lru_cache(maxsize=8)
def _cached_merge_plan(weights: Tuple[float, ...], cap: float, max_states: int) -> _MergePlan:
    return _MergePlan(weights, cap, max_states)


def _capped_cap(weights: np.ndarray, max_states: int) -> float:
    return max(float(weights.sum()) / max_states, SUM_MERGE_TOL)


def _check_probs_matrix(probs, n: int) -> np.ndarray:
    P = np.asarray(probs, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] != n:
        raise ValidationError("probs", f"expected {n} rows, got {P.shape[0]}")
    if not np.all((P >= 0) & (P <= 1)):
        raise ValidationError("probs", "entries must lie in [0, 1]")
    return P


def weighted_threshold_tail(weights: Sequence[float], probs: Sequence[float], q: float) -> float:
    """Exact Pr(sum w_i B_i >= q * sum w_i) for independent Bernoulli(probs_i).

    Dynamic program over the reachable weighted sums, merging sums that
    coincide within 1e-12.  Structured weights keep the state count small;
    fully generic weights cost up to 2**n states, which is feasible only
    for n <= 25 -- beyond the state budget an explicit error suggests the
    capped or quantized mode instead of silently degrading.
    """
    w = _check_weights(weights)
    p = _check_probs_matrix(probs, w.size)[:, 0]
    total = float(w.sum())
    threshold = q * total - _threshold_tolerance(total)
    sums = np.zeros(1)
    v = np.ones(1)
    for wi, pi in zip(w, p):
        if 2 * sums.size > EXACT_STATES_SCALAR:
            # Bail before the doubling sort; merging almost never pulls a
            # generic weight vector back under the cap.
            raise InfeasibleError(
                f"exact evaluation infeasible: {2 * sums.size} weighted sums; "
                "use the capped or quantized mode"
            )
        s2 = np.concatenate([sums, sums + wi])
        order = np.argsort(s2, kind="stable")
        s2 = s2[order]
        v2 = np.concatenate([v * (1.0 - pi), v * pi])[order]
        # Merge runs of coincident sums.
        keep = np.empty(s2.size, dtype=bool)
        keep[0] = True
        np.greater(np.diff(s2), SUM_MERGE_TOL, out=keep[1:])
        starts = np.flatnonzero(keep)
        sums = s2[starts]
        v = np.add.reduceat(v2, starts)
    return float(v[sums >= threshold].sum())


def weighted_threshold_tail_capped(
    weights: Sequence[float], probs: Sequence[float], q: float, max_states: int
) -> TailBracket:
    """Certified bracket on the weighted threshold tail with bounded state count.

    States are intervals of weight-sum values no wider than
    sum(w) / max_states; the bracket is the probability mass of states
    straddling the threshold.
    """
    w = _check_weights(weights)
    if max_states < 2:
        raise ValidationError("max_states", f"must be >= 2, got {max_states}")
    P = _check_probs_matrix(probs, w.size)
    total = float(w.sum())
    threshold = q * total - _threshold_tolerance(total)
    plan = _cached_merge_plan(tuple(w.tolist()), _capped_cap(w, max_states), 8 * max_states)
    lo, hi = plan.tail_bracket_batch(P, threshold)
    return TailBracket(float(lo[0]), float(hi[0]))


def weighted_threshold_tail_quantized(
    weights: Sequence[float],
    probs: Sequence[float],
    q: float,
    denominator: int = DEFAULT_QUANTIZE_DENOMINATOR,
) -> TailBracket:
    """Certified bracket via integer weights u_i = round(w_i * denominator).

    The DP runs over integer sums (O(n * sum u) states); the exact total
    rounding error eps = sum |w_i - u_i / denominator| widens the
    threshold into a window, and the mass inside the window is the
    bracket width.
    """
    w = _check_weights(weights)
    if denominator < 1:
        raise ValidationError("denominator", f"must be >= 1, got {denominator}")
    p = _check_probs_matrix(probs, w.size)[:, 0]
    u = np.rint(w * denominator).astype(np.int64)
    if int(u.sum()) > QUANTIZED_STATES_MAX:
        raise InfeasibleError(
            f"quantized DP needs {int(u.sum())} integer states"
            f" (cap {QUANTIZED_STATES_MAX}); reduce the denominator"
        )
    eps = float(np.abs(w - u / denominator).sum())
    total = float(w.sum())
    threshold = q * total - _threshold_tolerance(total)
    t_definite = math.ceil(denominator * (threshold + eps) - THRESHOLD_FUZZ)
    t_possible = math.ceil(denominator * (threshold - eps) - THRESHOLD_FUZZ)
    cur = int(u.sum())
    v = np.zeros(cur + 1)
    v[0] = 1.0
    top = 0
    for ui, pi in zip(u.tolist(), p.tolist()):
        if ui == 0:
            continue  # zero quantized weight cannot move the sum
        old = v[: top + 1].copy()
        v[: top + 1] *= 1.0 - pi
        v[ui : top + ui + 1] += old * pi
        top += ui
    def tail(t: int) -> float:
        if t <= 0:
            return 1.0
        if t > top:
            return 0.0
        return float(v[t:].sum())
    return TailBracket(min(tail(t_definite), 1.0), min(tail(t_possible), 1.0))


def _quantized_tail_batch(
    w: np.ndarray, H: np.ndarray, q: float, denominator: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Columnwise quantized bracket on the weighted threshold tail.

    Weights are normalized to unit sum before quantization, so the state
    count tracks the denominator itself instead of denominator * sum(w);
    the bracket logic mirrors the single-point evaluator.
    """
    if denominator < 1:
        raise ValidationError("denominator", f"must be >= 1, got {denominator}")
    r = w / float(w.sum())
    u = np.rint(r * denominator).astype(np.int64)
    total = int(u.sum())
    if total > QUANTIZED_STATES_MAX:
        raise InfeasibleError(
            f"quantized DP needs {total} integer states"
            f" (cap {QUANTIZED_STATES_MAX}); reduce the denominator"
        )
    eps = float(np.abs(r - u / denominator).sum())
    threshold = q - _threshold_tolerance(1.0)
    t_definite = math.ceil(denominator * (threshold + eps) - THRESHOLD_FUZZ)
    t_possible = math.ceil(denominator * (threshold - eps) - THRESHOLD_FUZZ)
    n, G = H.shape
    tail_lo = np.empty(G)
    tail_hi = np.empty(G)
    chunk = max(1, BATCH_CELL_BUDGET // (total + 1))
    rows = u.tolist()
    for s in range(0, G, chunk):
        e = min(s + chunk, G)
        v = np.zeros((total + 1, e - s))
        v[0] = 1.0
        top = 0
        for i, ui in enumerate(rows):
            if ui == 0:
                continue  # zero quantized weight cannot move the sum
            p = H[i, s:e]
            seg = v[: top + 1]
            shifted = seg * p
            seg *= 1.0 - p
            v[ui : top + ui + 1] += shifted
            top += ui

        def tail(t: int) -> np.ndarray:
            if t <= 0:
                return np.ones(e - s)
            if t > top:
                return np.zeros(e - s)
            return v[t:].sum(axis=0)

        tail_lo[s:e] = tail(t_definite)
        tail_hi[s:e] = tail(t_possible)
    # Independent suffix sums can invert by float noise when the window
    # holds no mass; the true bracket always has hi >= lo.
    tail_lo = np.minimum(tail_lo, 1.0)
    return tail_lo, np.minimum(np.maximum(tail_hi, tail_lo), 1.0)


# ---------------------------------------------------------------------------
# The separable functional P(h_1..h_n) = Pr(action <= z | H_i(z) = h_i).


def _werm_structure(w: np.ndarray):
    """Classify weights: ("count", m_total) for equal weights, ("subset",
    indices) for two-valued {0, c} weights, ("general", None) otherwise."""
    positive = w[w > 0]
    if positive.size == w.size and np.all(w == w[0]):
        return "count", None
    if np.all((w == 0) | (w == positive[0])):
        return "subset", np.flatnonzero(w > 0)
    return "general", None


def _check_h(h, n: Optional[int] = None) -> np.ndarray:
    hv = np.asarray(h, dtype=float)
    if hv.ndim != 1 or hv.size < 1:
        raise ValidationError("h", "must be a non-empty 1-d sequence")
    if n is not None and hv.size != n:
        raise ValidationError("h", f"length {hv.size} does not match n = {n}")
    if not np.all((hv >= 0) & (hv <= 1)):
        raise ValidationError("h", "coordinates must lie in [0, 1]")
    return hv


def _rows_identical(M: np.ndarray) -> bool:
    return bool(np.all(M == M[0]))


def _tail_over_rows(M: np.ndarray, m: int) -> np.ndarray:
    """Pr(#successes among rows >= m) per column, binomial fast path when
    all rows coincide."""
    k = M.shape[0]
    if m <= 0:
        return np.ones(M.shape[1])
    if m > k:
        return np.zeros(M.shape[1])
    if _rows_identical(M):
        return _binomial_tail_batch(M[0], k, m)
    return _pb_tail_batch(M, m)


def _mixture_tails(spec: MixtureOS, H: np.ndarray) -> np.ndarray:
    """Lambda-combination of order-statistic tails, grouped by subset."""
    G = H.shape[1]
    out = np.zeros(G)
    groups = {}
    for c in spec.entries:
        groups.setdefault(c.subset, []).append((c.rank, c.weight))
    for subset, rank_weights in groups.items():
        rows = H[[j - 1 for j in subset]]
        k = len(subset)
        ranks = sorted({r for r, lam in rank_weights if lam > 0})
        if not ranks:
            continue
        if _rows_identical(rows) or len(ranks) <= 2:
            tails = {r: _tail_over_rows(rows, r) for r in ranks}
        else:
            pmf = _pb_pmf_batch(rows)
            suffix = np.vstack([np.cumsum(pmf[::-1], axis=0)[::-1], np.zeros((1, G))])
            tails = {r: (np.ones(G) if r <= 0 else (np.zeros(G) if r > k else suffix[r])) for r in ranks}
        for r, lam in rank_weights:
            if lam > 0:
                out += lam * tails[r]
    return np.clip(out, 0.0, 1.0)


def _tabulated_batch(spec: TabulatedCounting, H: np.ndarray) -> np.ndarray:
    n, G = H.shape
    table = np.asarray(spec.table, dtype=float)
    out = np.empty(G)
    # Chunk the expansion so the (2**n, chunk) tensor stays small.
    chunk = max(1, (1 << 22) // (1 << n))
    for a in range(0, G, chunk):
        h = H[:, a : a + chunk]
        v = np.ones((1, h.shape[1]))
        for i in range(n):
            v = np.concatenate([v * (1.0 - h[i]), v * h[i]], axis=0)
        out[a : a + chunk] = table @ v
    return out


def p_policy_batch(
    spec: PolicySpec,
    H: np.ndarray,
    q: float,
    *,
    max_states: Optional[int] = None,
    denominator: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Columnwise P(h) for a (n, G) matrix of CDF values.

    Returns (lo, hi) arrays; exact evaluation paths return lo == hi.
    General weighted policies honor `max_states` (capped interval-merge
    DP) or, failing that, `denominator` (integer quantization of the
    unit-normalized weights, so the state count tracks the denominator);
    with neither given they are evaluated exactly while the state budget
    holds, and raise InfeasibleError beyond it.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2:
        raise ValidationError("H", f"expected a (n, G) matrix, got shape {H.shape}")
    n, G = H.shape
    if not np.all((H >= 0) & (H <= 1)):
        raise ValidationError("H", "entries must lie in [0, 1]")

    if isinstance(spec, WeightedErm):
        if spec.n != n:
            raise ValidationError("weights", f"length {spec.n} does not match H rows {n}")
        w = np.asarray(spec.weights)
        kind, aux = _werm_structure(w)
        if kind == "count":
            t = _tail_over_rows(H, threshold_count(q, n))
            return t, t
        if kind == "subset":
            rows = H[aux]
            t = _tail_over_rows(rows, threshold_count(q, aux.size))
            return t, t
        total = float(w.sum())
        threshold = q * total - _threshold_tolerance(total)
        wt = tuple(w.tolist())
        if max_states is not None:
            # Sparse weight sums can cluster into more groups than the
            # range/cap estimate predicts; widening the cap until the plan
            # fits keeps the bracket valid, just looser.
            cap = _capped_cap(w, max_states)
            while True:
                try:
                    plan = _cached_merge_plan(wt, cap, 8 * max_states)
                    break
                except InfeasibleError:
                    cap *= 8.0
        elif denominator is not None:
            return _quantized_tail_batch(w, H, q, denominator)
        else:
            plan = _cached_merge_plan(wt, SUM_MERGE_TOL, EXACT_STATES_BATCH)
        return plan.tail_bracket_batch(H, threshold)

    if isinstance(spec, OrderStatistic):
        if spec.subset[-1] > n:
            raise ValidationError("subset", f"index {spec.subset[-1]} exceeds n = {n}")
        rows = H[[j - 1 for j in spec.subset]]
        t = _tail_over_rows(rows, spec.rank)
        return t, t

    if isinstance(spec, MixtureOS):
        if max(c.subset[-1] for c in spec.entries) > n:
            raise ValidationError("entries", f"a subset index exceeds n = {n}")
        t = _mixture_tails(spec, H)
        return t, t

    if isinstance(spec, TabulatedCounting):
        if spec.n != n:
            raise ValidationError("table", f"table n = {spec.n} does not match H rows {n}")
        t = _tabulated_batch(spec, H)
        return t, t

    raise ValidationError("spec", f"unknown policy spec {type(spec).__name__}")


def p_policy(spec: PolicySpec, h: Sequence[float], q: float) -> float:
    """P(h_1..h_n): probability the action stays at or below the level z
    at which each historical CDF takes the value h_i."""
    hv = _check_h(h)
    if isinstance(spec, WeightedErm) and _werm_structure(np.asarray(spec.weights))[0] == "general":
        # Exact scalar path with the large single-evaluation state budget.
        return weighted_threshold_tail(spec.weights, hv, q)
    lo, _ = p_policy_batch(spec, hv[:, None], q)
    return float(lo[0])

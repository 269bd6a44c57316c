"""Policy selection: learning curves, sample-size search, minimax mixture tuning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .bounds import no_data_regret
from .model import (
    Branch,
    DissimilarityProfile,
    InfeasibleError,
    MixtureComponent,
    MixtureOS,
    OrderStatistic,
    PolicySpec,
    RegretReport,
    ValidationError,
    VerificationError,
    erm,
    ewerm,
    knn,
)
from .regret import _kink_points, branch_regret_grid, limiting_regret_erm, worst_case_regret
from .simplex import solve_zero_sum_game

__all__ = [
    "EwermResult",
    "KnnResult",
    "MixtureSolution",
    "regret_curve",
    "sample_complexity",
    "tune_ewerm",
    "tune_knn",
    "tune_kstar_erm_dagger",
    "tune_mixture_fixed_k",
]

# Every reported mixture must carry a game certificate at least this tight.
GAME_GAP = 1e-8
# Cutting-plane solves stop once the true game value is pinned this tight.
ENCLOSURE_TOL = 1e-10
ROW_GEN_ROUNDS = 60
# A subset matches full-data performance when its certified upper bound
# comes within this margin of the full-data upper bound.
PLATEAU_MARGIN = 1e-10
# Certified value enclosures wider than this abort the exponential-weight tuner.
EWERM_BRACKET_GATE = 1e-4
EWERM_QUANTIZE = 10**6
# Coarse denominators for the gamma scan and the per-candidate search; the
# winner is always re-certified at EWERM_QUANTIZE.
EWERM_SCAN_QUANTIZE = 1 << 12
EWERM_MID_QUANTIZE = 1 << 16


@dataclass(frozen=True)
class MixtureSolution:
    """Tuned mixture of order-statistic policies on the subset {1..k}.

    `lambdas` assigns one probability per rank 0..k+1. `value` is the
    worst-case regret of the mixture (solved to a certified enclosure
    when validation is on), and `certificate` bounds how far that value
    can sit above the true minimax optimum.
    """

    k: int
    lambdas: tuple
    value: float
    certificate: float
    spec: MixtureOS


class EwermResult(NamedTuple):
    gamma: float
    value: float


class KnnResult(NamedTuple):
    k: int
    value: float


def _require_sorted(d: DissimilarityProfile) -> None:
    if any(b < a for a, b in zip(d.d, d.d[1:])):
        raise ValidationError("d", "budgets must be sorted non-decreasing before subset tuning")


def _subset_profile(d: DissimilarityProfile, k: int) -> DissimilarityProfile:
    return d if k == d.n else DissimilarityProfile(d.d[:k])


def _branch_points(q: float, d_arr: np.ndarray, branch: Branch, mu0_grid: int) -> np.ndarray:
    lo, hi = (0.0, 1.0 - q) if branch is Branch.UP else (1.0 - q, 1.0)
    pts = np.linspace(lo, hi, mu0_grid)
    kinks = _kink_points(branch, d_arr)
    kinks = kinks[(kinks > lo) & (kinks < hi)]
    if kinks.size:
        pts = np.unique(np.concatenate([pts, kinks]))
    return pts


def _payoff_at(
    k: int, q: float, d_k: DissimilarityProfile, pts: Dict[Branch, np.ndarray]
) -> np.ndarray:
    """Worst-history regret of each pure rank at the given points, rows maximizing."""
    subset = tuple(range(1, k + 1))
    blocks = []
    for branch in (Branch.UP, Branch.DOWN):
        cols = np.empty((pts[branch].size, k + 2))
        for r in range(k + 2):
            lo, hi = branch_regret_grid(OrderStatistic(subset, r), q, d_k, pts[branch], branch)
            cols[:, r] = 0.5 * (lo + hi)
        blocks.append(cols)
    return np.vstack(blocks)


def _mixture_payoff(k: int, q: float, d_k: DissimilarityProfile, mu0_grid: int) -> np.ndarray:
    d_arr = np.asarray(d_k.d, dtype=float)
    pts = {b: _branch_points(q, d_arr, b, mu0_grid) for b in (Branch.UP, Branch.DOWN)}
    return _payoff_at(k, q, d_k, pts)


def _lambda_spec(k: int, col_strategy: Sequence[float]) -> Tuple[Tuple[float, ...], MixtureOS]:
    lam = np.maximum(np.asarray(col_strategy, dtype=float), 0.0)
    lam /= math.fsum(lam.tolist())
    subset = tuple(range(1, k + 1))
    entries = tuple(
        MixtureComponent(subset, r, float(w)) for r, w in enumerate(lam) if w > 0.0
    )
    return tuple(float(w) for w in lam), MixtureOS(entries)


class _Enclosure(NamedTuple):
    lambdas: Tuple[float, ...]
    spec: MixtureOS
    value: float
    lower: float
    upper: float
    rounds: int
    points: Dict[Branch, np.ndarray]


def _refine_game(
    k: int,
    q: float,
    d_k: DissimilarityProfile,
    base_grid: int,
    *,
    stop: Optional[Callable[[float, float], bool]] = None,
    max_rounds: int = ROW_GEN_ROUNDS,
    seed: Optional[Dict[Branch, np.ndarray]] = None,
) -> _Enclosure:
    """Cutting-plane solve of the continuum game over rank mixtures.

    Alternates a finite game on the current per-branch point sets with a
    continuum re-evaluation of the tuned mixture; the re-evaluation's
    maximizer joins the points for the next round. `lower` and `upper`
    bracket the true game value: the finite game bounds it from below,
    the re-evaluated mixture (bracket widened by the regret slope bound)
    from above. `stop` may end the loop once the bounds say enough.
    `seed` points join the initial sets; any point set is sound, so
    seeding with a related game's cuts just saves rounds.
    """
    d_arr = np.asarray(d_k.d, dtype=float)
    pts = {b: _branch_points(q, d_arr, b, base_grid) for b in (Branch.UP, Branch.DOWN)}
    if seed is not None:
        pts = {b: np.unique(np.append(pts[b], seed[b])) for b in pts}
    best: Optional[Tuple[Tuple[float, ...], MixtureOS, float]] = None
    lower, upper = -math.inf, math.inf
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        game = solve_zero_sum_game(_payoff_at(k, q, d_k, pts))
        lambdas, spec = _lambda_spec(k, game.col_strategy)
        rep = worst_case_regret(spec, q, d_k)
        lower = max(lower, game.value - 0.5 * game.gap)
        inflated = rep.value + (1 + k) * rep.tolerance
        if inflated < upper:
            upper = inflated
            best = (lambdas, spec, float(rep.value))
        if upper - lower <= ENCLOSURE_TOL:
            break
        if stop is not None and stop(lower, upper):
            break
        arr = np.unique(np.append(pts[rep.branch], rep.mu0_star))
        if arr.size == pts[rep.branch].size:
            # Cut already present: sharpen local resolution around it instead.
            i = int(np.searchsorted(arr, rep.mu0_star))
            extra = [0.5 * (arr[j] + arr[j + 1]) for j in (i - 1, i) if 0 <= j < arr.size - 1]
            arr = np.unique(np.append(arr, extra))
        pts[rep.branch] = arr
    assert best is not None
    return _Enclosure(best[0], best[1], best[2], lower, upper, rounds, pts)


def tune_mixture_fixed_k(
    k: int,
    q: float,
    d: DissimilarityProfile,
    mu0_grid: int = 2001,
    *,
    validate: bool = True,
) -> MixtureSolution:
    """Minimax-optimal mixture over order-statistic ranks of the k best samples.

    With validation on, the worst case over out-of-sample means is solved
    by cutting planes: the per-branch point sets grow with each round's
    continuum maximizer until certified bounds on the game value close to
    within ENCLOSURE_TOL. The reported value is the tuned mixture's exact
    worst case, so it carries no discretization optimism. Without
    validation a single finite solve on the base grid is returned and the
    value is that game's (optimistic) value.
    """
    _require_sorted(d)
    k = int(k)
    if not 1 <= k <= d.n:
        raise ValidationError("k", f"must lie in 1..{d.n}, got {k}")
    if mu0_grid < 2:
        raise ValidationError("mu0_grid", f"needs at least 2 points, got {mu0_grid}")
    d_k = _subset_profile(d, k)
    if not validate:
        game = solve_zero_sum_game(_mixture_payoff(k, q, d_k, mu0_grid), require_gap=GAME_GAP)
        lambdas, spec = _lambda_spec(k, game.col_strategy)
        return MixtureSolution(k, lambdas, float(game.value), float(game.gap), spec)
    enc = _refine_game(k, q, d_k, mu0_grid)
    gap = enc.upper - enc.lower
    if gap > GAME_GAP:
        raise VerificationError(
            f"game enclosure {gap!r} at k={k} failed to reach the required gap {GAME_GAP}"
        )
    return MixtureSolution(k, enc.lambdas, enc.value, float(gap), enc.spec)


def tune_kstar_erm_dagger(
    n: int,
    q: float,
    d: DissimilarityProfile,
    *,
    mu0_grid: int = 2001,
) -> MixtureSolution:
    """Best mixture over k, returning the effective sample size k*.

    Growing the subset never hurts: a rank over the k most similar
    samples is distributed as a two-rank mixture over k+1, so the tuned
    value is non-increasing in k and the best value is the full-data
    one. The effective sample size is therefore the smallest k whose
    certified upper bound meets the full-data upper bound within
    PLATEAU_MARGIN (the tie rule: equal value goes to smaller k). The
    search bisects on that predicate; a probe whose bounds stay
    inconclusive, or whose game refuses to certify, pushes the answer
    toward larger k rather than guessing.
    """
    n = int(n)
    if d.n != n:
        raise ValidationError("n", f"profile carries {d.n} budgets, expected {n}")
    _require_sorted(d)

    try:
        full = _refine_game(n, q, d, mu0_grid)
    except VerificationError:
        full = None
    if full is None or full.upper - full.lower > GAME_GAP:
        try:
            full = _refine_game(n, q, d, 4 * mu0_grid + 1)
        except VerificationError as exc:
            raise InfeasibleError(f"full-data game refused to certify: {exc}") from exc
        if full.upper - full.lower > GAME_GAP:
            raise InfeasibleError(
                f"full-data game enclosure stalled at {full.upper - full.lower!r}"
            )
    anchor = MixtureSolution(n, full.lambdas, full.value, float(full.upper - full.lower), full.spec)
    bar = anchor.value + anchor.certificate + PLATEAU_MARGIN
    matches: Dict[int, MixtureSolution] = {n: anchor}

    def at_plateau(k: int) -> bool:
        def stop(lower: float, upper: float) -> bool:
            return lower > bar or upper <= bar

        try:
            enc = _refine_game(k, q, _subset_profile(d, k), mu0_grid, stop=stop, seed=full.points)
        except VerificationError:
            return False
        if enc.upper <= bar:
            matches[k] = MixtureSolution(
                k, enc.lambdas, enc.value, float(enc.upper - enc.lower), enc.spec
            )
            return True
        return False

    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if at_plateau(mid):
            hi = mid
        else:
            lo = mid + 1
    return matches[hi]


def regret_curve(
    family: Callable[[int], PolicySpec],
    q: float,
    d_builder: Callable[[int], DissimilarityProfile],
    n_range: Iterable[int],
    *,
    grid: int = 10001,
    refine_iters: int = 60,
    max_states: Optional[int] = None,
    quantize_denominator: Optional[int] = None,
) -> Tuple[Tuple[int, RegretReport], ...]:
    """Worst-case regret of family(n) under d_builder(n) for each n."""
    ns = [int(n) for n in n_range]
    if not ns:
        raise ValidationError("n_range", "must be non-empty")
    out = []
    for n in ns:
        report = worst_case_regret(
            family(n),
            q,
            d_builder(n),
            grid,
            refine_iters,
            max_states=max_states,
            quantize_denominator=quantize_denominator,
        )
        out.append((n, report))
    return tuple(out)


def sample_complexity(
    q: float,
    zeta: float,
    targets: Sequence[float],
    n_max: int = 50000,
) -> Tuple[Tuple[float, Optional[int]], ...]:
    """First n where equal-weight regret meets each target fraction of q(1-q).

    The worst-case curve is not monotone in n (the decision threshold
    jumps with ceil(q*n) and the curve spikes right after q*n passes an
    integer), so this is a first-entry time: the curve may bounce back
    above the target at isolated later n before settling.

    A target below the limiting regret is unreachable at any n and comes
    back as None without scanning. A reachable target that is still unmet
    at n_max raises instead of masquerading as unreachable.
    """
    zeta = float(zeta)
    if not math.isfinite(zeta) or zeta < 0.0:
        raise ValidationError("zeta", f"must be finite and >= 0, got {zeta}")
    fractions = [float(f) for f in targets]
    if not fractions:
        raise ValidationError("targets", "must be non-empty")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValidationError("targets", f"fractions must lie in (0, 1], got {f}")
    if int(n_max) < 1:
        raise ValidationError("n_max", f"must be >= 1, got {n_max}")

    base = no_data_regret(q)
    limit = limiting_regret_erm(zeta, q)
    thresholds = [f * base for f in fractions]
    results: List[Optional[int]] = [None] * len(fractions)
    open_slots = {i for i, thr in enumerate(thresholds) if limit <= thr}

    n = 0
    while open_slots and n < int(n_max):
        n += 1
        value = worst_case_regret(erm(n), q, DissimilarityProfile.constant(zeta, n)).value
        for i in list(open_slots):
            if value <= thresholds[i] + 1e-12:
                results[i] = n
                open_slots.discard(i)
    if open_slots:
        missing = sorted(fractions[i] for i in open_slots)
        raise InfeasibleError(
            f"targets {missing} lie above the limiting regret but were not met by "
            f"n_max={n_max}; increase n_max"
        )
    return tuple((f, results[i]) for i, f in enumerate(fractions))


def _polish_point(
    spec: PolicySpec,
    q: float,
    d: DissimilarityProfile,
    branch: Branch,
    x0: float,
    value: float,
    half_width: float,
    window: float = 0.02,
    iters: int = 14,
) -> Tuple[float, float]:
    """Short golden pass at the certification denominator around x0.

    The mid-resolution search places the maximizer with bracket-level
    noise; re-searching a small window at full resolution recovers the
    regret lost to that placement. Returns the best certified point seen.
    """
    lo_end, hi_end = (0.0, 1.0 - q) if branch is Branch.UP else (1.0 - q, 1.0)
    ga = max(lo_end, x0 - window)
    gb = min(hi_end, x0 + window)

    def feval(x: float) -> Tuple[float, float]:
        lo, hi = branch_regret_grid(
            spec, q, d, np.array([x]), branch, quantize_denominator=EWERM_QUANTIZE
        )
        return float(0.5 * (lo[0] + hi[0])), float(0.5 * (hi[0] - lo[0]))

    invphi = 0.5 * (math.sqrt(5.0) - 1.0)
    x1 = gb - invphi * (gb - ga)
    x2 = ga + invphi * (gb - ga)
    f1, h1 = feval(x1)
    f2, h2 = feval(x2)
    for f, h in ((f1, h1), (f2, h2)):
        if f > value:
            value, half_width = f, h
    for _ in range(iters):
        if f1 < f2:
            ga, x1, f1, h1 = x1, x2, f2, h2
            x2 = ga + invphi * (gb - ga)
            f2, h2 = feval(x2)
            fx, hx = f2, h2
        else:
            gb, x2, f2, h2 = x2, x1, f1, h1
            x1 = gb - invphi * (gb - ga)
            f1, h1 = feval(x1)
            fx, hx = f1, h1
        if fx > value:
            value, half_width = fx, hx
    return value, half_width


def tune_ewerm(
    n: int,
    q: float,
    delta: float,
    gamma_grid: float = 0.01,
) -> EwermResult:
    """Best geometric-decay weight under linear drift, certified at the winner.

    The decay grid is scanned with a cheap bracketed evaluation; near-ties
    are then re-run with a fine grid and an exact integer-weight check.
    A certified enclosure wider than EWERM_BRACKET_GATE aborts rather than
    reporting a value that may be off at the tuning scale.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    delta = float(delta)
    if not math.isfinite(delta) or delta < 0.0:
        raise ValidationError("delta", f"must be finite and >= 0, got {delta}")
    step = float(gamma_grid)
    if not 0.0 < step <= 1.0:
        raise ValidationError("gamma_grid", f"step must lie in (0, 1], got {step}")

    d = DissimilarityProfile.drift(delta, n)
    count = int(math.floor(1.0 / step + 1e-9))
    gammas = sorted({round(i * step, 12) for i in range(1, count + 1)} | {1.0})

    scan: Dict[float, RegretReport] = {}
    for g in gammas:
        scan[g] = worst_case_regret(
            ewerm(g, n), q, d, 201, 20, quantize_denominator=EWERM_SCAN_QUANTIZE
        )
    best = min(gammas, key=lambda g: (scan[g].value, g))
    margin = 1e-3 + scan[best].value_bracket
    near = [
        g
        for g in gammas
        if scan[g].value - scan[g].value_bracket <= scan[best].value + margin
    ]
    near = sorted(near, key=lambda g: (scan[g].value, g))[:6]

    certified: Dict[float, Tuple[float, float, RegretReport]] = {}
    for g in near:
        spec = ewerm(g, n)
        mid = worst_case_regret(
            spec, q, d, 301, 40, quantize_denominator=EWERM_MID_QUANTIZE
        )
        lo, hi = branch_regret_grid(
            spec, q, d, np.array([mid.mu0_star]), mid.branch,
            quantize_denominator=EWERM_QUANTIZE,
        )
        certified[g] = (float(0.5 * (lo[0] + hi[0])), float(0.5 * (hi[0] - lo[0])), mid)
    winner = min(certified, key=lambda g: (certified[g][0], g))
    value, half_width, mid = certified[winner]
    value, half_width = _polish_point(
        ewerm(winner, n), q, d, mid.branch, mid.mu0_star, value, half_width
    )
    if half_width > EWERM_BRACKET_GATE:
        raise InfeasibleError(
            f"certified value bracket {half_width!r} at gamma={winner} exceeds "
            f"{EWERM_BRACKET_GATE}; raise the quantization denominator"
        )
    return EwermResult(gamma=float(winner), value=float(value))


def tune_knn(n: int, q: float, delta: float) -> KnnResult:
    """Best cut-off k for 0/1 weights under linear drift; ties to smaller k."""
    n = int(n)
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    delta = float(delta)
    if not math.isfinite(delta) or delta < 0.0:
        raise ValidationError("delta", f"must be finite and >= 0, got {delta}")
    d = DissimilarityProfile.drift(delta, n)
    best_k, best_value = 0, math.inf
    for k in range(1, n + 1):
        value = worst_case_regret(knn(k, n), q, d).value
        if value < best_value:
            best_k, best_value = k, value
    return KnnResult(k=best_k, value=float(best_value))

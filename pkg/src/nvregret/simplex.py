"""Self-contained dense-tableau simplex for finite zero-sum matrix games.

The row player maximizes the payoff, the column player minimizes. The
equilibrium is found by solving the row player's covering program

    min 1'x   s.t.   P'x >= 1,  x >= 0

on a shifted payoff P = payoff + c0 >= 1, whose optimum recovers the game
value as 1 / sum(x) - c0. Constraints are indexed by columns, so the
tableau stays small when the payoff matrix is tall (many rows, few
columns), which is the shape the mixture-tuning code produces. The shift
leaves every coefficient at least 1, so the best pure row strategy scales
into a feasible starting vertex and no feasibility phase is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .model import ValidationError, VerificationError

__all__ = ["GameSolution", "solve_zero_sum_game"]

# Entries smaller than this never serve as pivots.
PIVOT_TOL = 1e-11
# Reduced costs above -COST_TOL count as optimal.
COST_TOL = 1e-11
# Consecutive non-improving pivots before switching to Bland's rule for good.
STALL_LIMIT = 50


@dataclass(frozen=True)
class GameSolution:
    """Equilibrium strategies and certified value of a zero-sum game.

    `gap` is the weak-duality slack max_i (P lam)_i - min_j (P' p)_j
    evaluated on the original payoff matrix; it bounds how far `value`
    can sit from the true game value.
    """

    value: float
    row_strategy: tuple
    col_strategy: tuple
    gap: float
    pivots: int


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    piv = tableau[row, col]
    tableau[row] /= piv
    keep = tableau[row].copy()
    tableau -= np.outer(tableau[:, col], keep)
    tableau[row] = keep


class _Tableau:
    """Simplex state for min 1'x s.t. a x >= 1, x >= 0, with a >= 1 entrywise.

    Because every coefficient is at least 1, the pure strategy j* with the
    best worst row is already feasible once scaled to bind its smallest
    coefficient, so the search starts from that vertex directly and no
    artificial variables or feasibility phase are needed. Rows other than
    the binding one are stored sign-flipped, which makes their surplus
    columns the identity; the flips cancel out of the dual readout.
    """

    def __init__(self, a: np.ndarray):
        nc, m = a.shape
        self.nc = nc
        self.m = m
        width = m + nc + 1
        # Rows 0..nc-1: constraints a x - s = 1. Row nc: costs.
        t = np.zeros((nc + 1, width))
        t[:nc, :m] = a
        t[:nc, m : m + nc] = -np.eye(nc)
        # Covering right-hand sides are all 1, which makes ratio-test ties
        # ubiquitous; a tiny graded spread breaks them. The duality-gap
        # check downstream absorbs the bias.
        t[:nc, -1] = 1.0 + 1e-9 * (1.0 + np.arange(nc)) / nc
        t[nc, :m] = 1.0
        j_star = int(np.argmax(a.min(axis=0)))
        r0 = int(np.argmin(a[:, j_star]))
        flip = np.ones(nc)
        flip[r0] = -1.0
        t[:nc] *= -flip[:, None]
        self.t = t
        _pivot(self.t, r0, j_star)
        self.basis = [m + r for r in range(nc)]
        self.basis[r0] = j_star
        self.allowed = np.ones(width - 1, dtype=bool)
        self.pivots = 0
        self.bland = False
        self._stall = 0

    def _enter(self, cost_row: int) -> int:
        rc = self.t[cost_row, :-1]
        eligible = self.allowed & (rc < -COST_TOL)
        if not eligible.any():
            return -1
        if self.bland:
            return int(np.argmax(eligible))
        masked = np.where(eligible, rc, np.inf)
        return int(np.argmin(masked))

    def _leave(self, col: int) -> int:
        body = self.t[: self.nc]
        pos = (body[:, col] > PIVOT_TOL) & np.isfinite(body[:, -1])
        if not pos.any():
            return -1
        rhs = np.maximum(body[:, -1], 0.0)
        ratios = np.where(pos, rhs / np.where(pos, body[:, col], 1.0), np.inf)
        best = ratios.min()
        if not np.isfinite(best):
            return -1
        ties = np.flatnonzero(ratios <= best + 1e-15 * (1.0 + abs(best)))
        if ties.size == 1:
            return int(ties[0])
        if self.bland:
            # Smallest basis index among ties; with Bland entering, this
            # rules out cycling entirely.
            return int(min(ties, key=lambda i: self.basis[i]))
        # Largest pivot element among ties, for numerical stability.
        return int(ties[np.argmax(body[ties, col])])

    def run(self, cost_row: int, max_iter: int) -> None:
        while True:
            col = self._enter(cost_row)
            if col < 0:
                return
            row = self._leave(col)
            if row < 0:
                # The objective is bounded below on the feasible region, so
                # an empty ratio test is column roundoff; retire the column.
                self.allowed[col] = False
                continue
            before = self.t[cost_row, -1]
            _pivot(self.t, row, col)
            self.basis[row] = col
            self.pivots += 1
            if not np.isfinite(self.t[:, -1]).all():
                raise VerificationError("tableau lost finiteness during pivoting")
            if self.pivots > max_iter:
                raise VerificationError(f"simplex exceeded {max_iter} pivots without converging")
            if not self.bland:
                if abs(self.t[cost_row, -1] - before) <= 1e-13 * (1.0 + abs(before)):
                    self._stall += 1
                    if self._stall >= STALL_LIMIT:
                        self.bland = True
                else:
                    self._stall = 0

def _solve_shifted(a: np.ndarray, bland_only: bool, max_iter: int) -> Tuple[np.ndarray, np.ndarray, int]:
    """Optimal (x, surplus duals) of min 1'x s.t. a x >= 1, x >= 0, a >= 1."""
    nc, m = a.shape
    tab = _Tableau(a)
    tab.bland = bland_only
    tab.run(cost_row=nc, max_iter=max_iter)
    # Undo the rhs tie-break spread at the final basis: the surplus block
    # holds the basis inverse up to the row flips, which cancel against
    # the flips on the original all-ones right-hand side. A degenerate
    # basis can be infeasible at the exact rhs; the perturbed vertex is
    # still feasible for the exact program (it over-covers), so keep it.
    exact = -tab.t[:nc, m : m + nc].sum(axis=1)
    if (exact >= -1e-12).all():
        tab.t[:nc, -1] = np.maximum(exact, 0.0)
    x = np.zeros(m)
    for i, b in enumerate(tab.basis):
        if b < m:
            x[b] = tab.t[i, -1]
    duals = tab.t[nc, m : m + nc].copy()
    return x, duals, tab.pivots


def solve_zero_sum_game(
    payoff,
    *,
    max_iter: Optional[int] = None,
    require_gap: Optional[float] = None,
) -> GameSolution:
    """Equilibrium of the matrix game where rows maximize `payoff`.

    Pricing starts with Dantzig's rule and switches permanently to
    Bland's after a run of degenerate pivots. If the first pass breaks
    down or leaves a certificate worse than 1e-6 the game is re-solved
    under pure Bland pricing and the better certificate wins.
    `require_gap`, when given, turns a still-loose certificate into an
    error.
    """
    g = np.asarray(payoff, dtype=float)
    if g.ndim != 2 or g.size == 0:
        raise ValidationError("payoff", f"must be a non-empty 2-d matrix, got shape {g.shape}")
    if not np.isfinite(g).all():
        raise ValidationError("payoff", "entries must be finite")
    rows, cols = g.shape
    if max_iter is None:
        max_iter = 1000 + 40 * cols + rows
    shift = 1.0 - float(g.min())
    a = (g + shift).T  # one covering constraint per column
    solutions = []
    failure: Optional[VerificationError] = None
    for bland_only in (False, True):
        try:
            x, duals, pivots = _solve_shifted(a, bland_only, max_iter)
        except VerificationError as exc:
            failure = exc
            continue
        total = float(x.sum())
        if total <= 0.0:
            failure = VerificationError("covering optimum collapsed to zero mass")
            continue
        p = np.maximum(x, 0.0)
        p /= p.sum()
        lam = np.maximum(duals, 0.0)
        if lam.sum() <= 0.0:
            failure = VerificationError("dual strategy collapsed to zero mass")
            continue
        lam /= lam.sum()
        # The strategies certify value bounds on their own; reporting the
        # midpoint keeps the value honest even if the vertex drifted.
        upper = float((g @ lam).max())
        lower = float((g.T @ p).min())
        solutions.append(GameSolution(0.5 * (upper + lower), tuple(p), tuple(lam), upper - lower, pivots))
        # A cold Bland re-solve rescues breakdowns; it does not tighten an
        # already-reasonable certificate, so only escalate real failures.
        if upper - lower <= 1e-6:
            break
    if not solutions:
        raise failure if failure is not None else VerificationError("game solve failed")
    best = min(solutions, key=lambda s: s.gap)
    if require_gap is not None and best.gap > require_gap:
        raise VerificationError(
            f"game certificate {best.gap!r} exceeds the required gap {require_gap!r}"
        )
    return best

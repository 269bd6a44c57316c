"""Core domain types for worst-case newsvendor regret analysis.

The library works on the single-period newsvendor loss
``l(a, y) = c_o * max(a - y, 0) + c_u * max(y - a, 0)`` with costs
normalized to ``c_o + c_u = 1`` and demand supported on [0, 1].  Policies
map n historical samples to an action; each historical distribution may
deviate from the out-of-sample one by at most ``d_i`` in Kolmogorov
distance.  Everything downstream consumes the types defined here.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ValidationError",
    "InfeasibleError",
    "VerificationError",
    "Branch",
    "LossParams",
    "DissimilarityProfile",
    "WeightedErm",
    "OrderStatistic",
    "MixtureComponent",
    "MixtureOS",
    "TabulatedCounting",
    "PolicySpec",
    "BernoulliProfile",
    "RegretReport",
    "make_loss",
    "validate_policy",
    "erm",
    "ewerm",
    "knn",
    "kernel_weights",
]

# Absolute tolerance for "sums to one" style checks on user input.
SUM_TOL = 1e-12

# Tabulated counting functions are stored as dense 2**n bit tables.
MAX_TABULATED_N = 20


class ValidationError(ValueError):
    """Invalid input; carries the name of the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class InfeasibleError(RuntimeError):
    """Exact evaluation would exceed its computational budget."""


class VerificationError(RuntimeError):
    """A verification suite found a discrepancy."""


class Branch(enum.Enum):
    """Which side of the worst-case line search a value belongs to.

    The worst-case mean mu0 lives in [0, 1-q] on the Up branch (histories
    shifted above mu0) and in [1-q, 1] on the Down branch (histories
    shifted below).
    """

    UP = "up"
    DOWN = "down"


def _require_finite(field_name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(field_name, f"must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class LossParams:
    """Normalized newsvendor costs and the critical quantile q = c_u."""

    c_o: float
    c_u: float
    q: float

    def __post_init__(self):
        for name in ("c_o", "c_u", "q"):
            _require_finite(name, getattr(self, name))
        if not self.c_o > 0:
            raise ValidationError("c_o", f"must be > 0, got {self.c_o}")
        if not self.c_u > 0:
            raise ValidationError("c_u", f"must be > 0, got {self.c_u}")
        if abs(self.c_o + self.c_u - 1.0) > SUM_TOL:
            raise ValidationError("c_o+c_u", f"must equal 1, got {self.c_o + self.c_u}")
        if abs(self.q - self.c_u) > SUM_TOL:
            raise ValidationError("q", f"must equal c_u/(c_o+c_u) = {self.c_u}, got {self.q}")

    def loss(self, a: float, y: float) -> float:
        """Pointwise newsvendor loss of ordering `a` against demand `y`."""
        return self.c_o * max(a - y, 0.0) + self.c_u * max(y - a, 0.0)


def make_loss(q: float) -> LossParams:
    """Build LossParams from the critical quantile alone.

    Under the c_o + c_u = 1 normalization the quantile determines both
    costs: c_u = q, c_o = 1 - q.
    """
    q = _require_finite("q", q)
    if not 0.0 < q < 1.0:
        raise ValidationError("q", f"must lie in (0, 1), got {q}")
    return LossParams(c_o=1.0 - q, c_u=q, q=q)


@dataclass(frozen=True)
class DissimilarityProfile:
    """Per-sample Kolmogorov-distance budgets d_1..d_n.

    d_i bounds how far the i-th historical distribution may deviate from
    the out-of-sample one: |F0(y) - H_i(y)| <= d_i for all y.
    """

    d: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.d)
        if len(values) < 1:
            raise ValidationError("d", "needs at least one entry")
        for i, v in enumerate(values):
            if not math.isfinite(v) or v < 0:
                raise ValidationError("d", f"entry {i + 1} must be finite and >= 0, got {v}")
        object.__setattr__(self, "d", values)

    @property
    def n(self) -> int:
        return len(self.d)

    @classmethod
    def constant(cls, zeta: float, n: int) -> "DissimilarityProfile":
        """All n samples share the same budget zeta."""
        if n < 1:
            raise ValidationError("n", f"must be >= 1, got {n}")
        zeta = _require_finite("zeta", zeta)
        return cls((zeta,) * int(n))

    @classmethod
    def drift(cls, delta: float, n: int) -> "DissimilarityProfile":
        """Linearly aging samples: d_i = i * delta, most recent first."""
        if n < 1:
            raise ValidationError("n", f"must be >= 1, got {n}")
        delta = _require_finite("delta", delta)
        return cls(tuple(i * delta for i in range(1, int(n) + 1)))

    @classmethod
    def from_contexts(
        cls,
        x0: Sequence[float],
        xs: Sequence[Sequence[float]],
        metric: str = "euclidean",
        offset: float = 0.0,
    ) -> "DissimilarityProfile":
        """Derive d_i from raw context vectors.

        Supported metrics: "euclidean" (l2) and "l1".  `offset` is an
        additive constant for settings where contexts are only partially
        observed, so distances understate the true dissimilarity.
        """
        offset = _require_finite("offset", offset)
        if offset < 0:
            raise ValidationError("offset", f"must be >= 0, got {offset}")
        base = [float(v) for v in x0]
        out = []
        for i, x in enumerate(xs):
            vec = [float(v) for v in x]
            if len(vec) != len(base):
                raise ValidationError("xs", f"context {i + 1} has dimension {len(vec)}, expected {len(base)}")
            diffs = [a - b for a, b in zip(base, vec)]
            if metric == "euclidean":
                dist = math.sqrt(sum(t * t for t in diffs))
            elif metric == "l1":
                dist = sum(abs(t) for t in diffs)
            else:
                raise ValidationError("metric", f"unknown metric {metric!r}")
            out.append(dist + offset)
        return cls(tuple(out))


def kernel_weights(profile: DissimilarityProfile, kind: str, bandwidth: float) -> tuple:
    """Turn dissimilarities into kernel weights w_i = K(d_i / bandwidth).

    Provided as a convenience for weighted policies; the library otherwise
    treats weights as given numbers.  "gaussian" uses exp(-t^2 / 2),
    "triangular" uses max(0, 1 - t).
    """
    bandwidth = _require_finite("bandwidth", bandwidth)
    if bandwidth <= 0:
        raise ValidationError("bandwidth", f"must be > 0, got {bandwidth}")
    ts = [v / bandwidth for v in profile.d]
    if kind == "gaussian":
        return tuple(math.exp(-0.5 * t * t) for t in ts)
    if kind == "triangular":
        return tuple(max(0.0, 1.0 - t) for t in ts)
    raise ValidationError("kind", f"unknown kernel {kind!r}")


@dataclass(frozen=True)
class WeightedErm:
    """Policy minimizing the weighted empirical loss sum w_i * l(a, y_i)."""

    weights: tuple

    def __post_init__(self):
        ws = tuple(float(w) for w in self.weights)
        if len(ws) < 1:
            raise ValidationError("weights", "needs at least one entry")
        for i, w in enumerate(ws):
            if not math.isfinite(w) or w < 0:
                raise ValidationError("weights", f"entry {i + 1} must be finite and >= 0, got {w}")
        if not any(w > 0 for w in ws):
            raise ValidationError("weights", "must not be all zero")
        object.__setattr__(self, "weights", ws)

    @property
    def n(self) -> int:
        return len(self.weights)


def erm(n: int) -> WeightedErm:
    """Equal-weight empirical risk minimization over n samples."""
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    return WeightedErm((1.0,) * int(n))


def ewerm(gamma: float, n: int) -> WeightedErm:
    """Exponentially discounted weights w_i = gamma**i, i = 1..n."""
    gamma = _require_finite("gamma", gamma)
    if not 0.0 < gamma <= 1.0:
        raise ValidationError("gamma", f"must lie in (0, 1], got {gamma}")
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    return WeightedErm(tuple(gamma ** i for i in range(1, int(n) + 1)))


def knn(k: int, n: int) -> WeightedErm:
    """0/1 weights selecting the k nearest (first k) samples."""
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValidationError("k", f"must lie in 1..{n}, got {k}")
    return WeightedErm((1.0,) * int(k) + (0.0,) * int(n - k))


def _check_subset(field_name: str, subset) -> tuple:
    out = tuple(int(j) for j in subset)
    if len(out) == 0:
        raise ValidationError(field_name, "must be non-empty")
    if any(j < 1 for j in out):
        raise ValidationError(field_name, f"indices must be >= 1, got {out}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValidationError(field_name, f"indices must be strictly increasing, got {out}")
    return out


@dataclass(frozen=True)
class OrderStatistic:
    """Policy ordering the rank-th smallest sample among a subset.

    rank 0 always orders 0; rank |subset| + 1 always orders 1 (the top of
    the support).
    """

    subset: tuple
    rank: int

    def __post_init__(self):
        subset = _check_subset("subset", self.subset)
        object.__setattr__(self, "subset", subset)
        r = int(self.rank)
        if not 0 <= r <= len(subset) + 1:
            raise ValidationError("rank", f"must lie in 0..{len(subset) + 1}, got {r}")
        object.__setattr__(self, "rank", r)


@dataclass(frozen=True)
class MixtureComponent:
    subset: tuple
    rank: int
    weight: float

    def __post_init__(self):
        subset = _check_subset("subset", self.subset)
        object.__setattr__(self, "subset", subset)
        r = int(self.rank)
        if not 0 <= r <= len(subset) + 1:
            raise ValidationError("rank", f"must lie in 0..{len(subset) + 1}, got {r}")
        object.__setattr__(self, "rank", r)
        w = _require_finite("weight", self.weight)
        if w < 0:
            raise ValidationError("weight", f"must be >= 0, got {w}")
        object.__setattr__(self, "weight", w)


@dataclass(frozen=True)
class MixtureOS:
    """Randomized policy drawing one (subset, rank) entry with probability weight."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) == 0:
            raise ValidationError("entries", "mixture must be non-empty")
        coerced = []
        for e in entries:
            if isinstance(e, MixtureComponent):
                coerced.append(e)
            else:
                subset, rank, weight = e
                coerced.append(MixtureComponent(tuple(subset), rank, weight))
        total = math.fsum(c.weight for c in coerced)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError("entries", f"weights must sum to 1 within {SUM_TOL}, got {total!r}")
        object.__setattr__(self, "entries", tuple(coerced))


@dataclass(frozen=True)
class TabulatedCounting:
    """Counting policy given by a dense bit table over {0,1}**n.

    Index m encodes the indicator vector b via b_i = (m >> (i-1)) & 1.
    The table must be coordinatewise non-decreasing; every policy in the
    counting class satisfies this, so a violation is an input error.
    """

    table: tuple

    def __post_init__(self):
        bits = tuple(int(v) for v in self.table)
        size = len(bits)
        n = size.bit_length() - 1
        if size < 2 or size != 1 << n:
            raise ValidationError("table", f"length must be a power of two >= 2, got {size}")
        if n > MAX_TABULATED_N:
            raise ValidationError("table", f"supports at most n = {MAX_TABULATED_N}, got n = {n}")
        if any(v not in (0, 1) for v in bits):
            raise ValidationError("table", "entries must be 0 or 1")
        # C-order reshape puts coordinate i on axis n - i (bit 0 varies fastest).
        cube = np.asarray(bits, dtype=np.int8).reshape((2,) * n)
        for axis in range(n):
            if np.any(np.diff(cube, axis=axis) < 0):
                raise ValidationError(
                    "table", f"not coordinatewise non-decreasing in coordinate {n - axis}"
                )
        object.__setattr__(self, "table", bits)

    @property
    def n(self) -> int:
        return len(self.table).bit_length() - 1


PolicySpec = Union[WeightedErm, OrderStatistic, MixtureOS, TabulatedCounting]


def validate_policy(spec: PolicySpec, n: int) -> PolicySpec:
    """Check that `spec` is dimensionally consistent with n samples."""
    if n < 1:
        raise ValidationError("n", f"must be >= 1, got {n}")
    n = int(n)
    if isinstance(spec, WeightedErm):
        if spec.n != n:
            raise ValidationError("weights", f"length {spec.n} does not match n = {n}")
    elif isinstance(spec, OrderStatistic):
        if spec.subset[-1] > n:
            raise ValidationError("subset", f"index {spec.subset[-1]} exceeds n = {n}")
        if spec.rank > len(spec.subset) + 1:
            raise ValidationError("rank", f"must lie in 0..{len(spec.subset) + 1}, got {spec.rank}")
    elif isinstance(spec, MixtureOS):
        for idx, c in enumerate(spec.entries):
            if c.subset[-1] > n:
                raise ValidationError("entries", f"entry {idx} subset index {c.subset[-1]} exceeds n = {n}")
    elif isinstance(spec, TabulatedCounting):
        if spec.n != n:
            raise ValidationError("table", f"table is over n = {spec.n} variables, expected {n}")
    else:
        raise ValidationError("spec", f"unknown policy spec {type(spec).__name__}")
    return spec


@dataclass(frozen=True)
class BernoulliProfile:
    """Out-of-sample mean mu0 plus historical means mu_1..mu_n.

    Entries are clamped to [0, 1] on construction: a nominal mean above 1
    stands for the point mass at 1, below 0 for the point mass at 0.
    """

    mu0: float
    mus: tuple

    def __post_init__(self):
        mu0 = _require_finite("mu0", self.mu0)
        object.__setattr__(self, "mu0", min(max(mu0, 0.0), 1.0))
        mus = []
        for i, m in enumerate(self.mus):
            m = _require_finite(f"mus[{i}]", m)
            mus.append(min(max(m, 0.0), 1.0))
        if len(mus) < 1:
            raise ValidationError("mus", "needs at least one entry")
        object.__setattr__(self, "mus", tuple(mus))

    @property
    def n(self) -> int:
        return len(self.mus)


@dataclass(frozen=True)
class RegretReport:
    """Result of a worst-case line search.

    tolerance is the half-width of the final bracket around the maximizer
    in mu0 space.  value_bracket is the half-width of the value's own
    uncertainty interval when the policy was evaluated through a bracketed
    (capped or quantized) dynamic program; it is 0.0 for exact evaluation.
    near_endpoint flags a maximizer within one grid cell of its branch
    interval's boundary, where the supremum may be attained only in the
    limit.
    """

    value: float
    mu0_star: float
    branch: Branch
    grid_points: int
    tolerance: float
    value_bracket: float = 0.0
    near_endpoint: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < -1e-9:
            raise ValidationError("value", f"must be finite and >= 0, got {self.value}")
        if not 0.0 <= self.mu0_star <= 1.0:
            raise ValidationError("mu0_star", f"must lie in [0, 1], got {self.mu0_star}")
        if not isinstance(self.branch, Branch):
            raise ValidationError("branch", f"must be a Branch, got {self.branch!r}")
        if self.grid_points < 1:
            raise ValidationError("grid_points", f"must be >= 1, got {self.grid_points}")
        if self.tolerance < 0 or self.value_bracket < 0:
            raise ValidationError("tolerance", "tolerance and value_bracket must be >= 0")

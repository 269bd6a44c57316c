"""Reference quantities: no-data regret, a universal lower bound, and a
general-purpose expected-regret upper bound for drifting sample
distributions.

Two algebraically different renderings of the same guarantee are
implemented; they share the complexity and drift terms and differ in how
the concentration tail is integrated (a clipped exponential integral
versus a Gaussian-CDF difference). The complexity term can be evaluated
at the overage-cost scale (the literal value of the signed-loss supremum
when every historical demand is zero) or at the loss-envelope scale
max(q, 1-q); the envelope scale is the default, and it is what the
sample-complexity search uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Tuple

from scipy.special import gammaln

from .model import InfeasibleError, ValidationError, VerificationError

EXACT_SIGNED_SUM_MAX = 10 ** 6


class BoundVariant(Enum):
    EXP_INTEGRAL = "integral"
    PHI_DIFFERENCE = "phi"


class Normalization(Enum):
    PER_SAMPLE = "per-sample"
    UNNORMALIZED = "unnormalized"


class ComplexityScale(Enum):
    ENVELOPE = "envelope"
    OVERAGE = "overage"


class CnResult(NamedTuple):
    value: float
    asymptotic: bool


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValidationError("q", f"critical ratio must lie in (0, 1), got {q}")
    return q


def no_data_regret(q: float) -> float:
    """Minimax regret of a decision-maker who knows only the support."""
    q = _check_q(q)
    return q * (1.0 - q)


def universal_lower_bound(zeta: float) -> float:
    """No policy beats zeta/2 when every sample may drift by zeta."""
    zeta = float(zeta)
    if zeta < 0.0:
        raise ValidationError("zeta", f"must be nonnegative, got {zeta}")
    return 0.5 * zeta


def _standard_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def signed_sum_positive_mean(n: int) -> CnResult:
    """E[(sigma_1 + ... + sigma_n)^+] for independent signs.

    Exact closed form n * 2^(-n) * C(n-1, floor((n-1)/2)) evaluated in log
    space; beyond EXACT_SIGNED_SUM_MAX the Gaussian asymptotic
    sqrt(n / (2 pi)) is returned with the `asymptotic` flag set.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n", f"needs a positive integer, got {n!r}")
    if n > EXACT_SIGNED_SUM_MAX:
        return CnResult(math.sqrt(n / (2.0 * math.pi)), True)
    k = (n - 1) // 2
    log_comb = float(gammaln(n) - gammaln(k + 1) - gammaln(n - k))
    return CnResult(math.exp(math.log(n) - n * math.log(2.0) + log_comb), False)


def rademacher_cn(n: int, q: float, normalization: Normalization = Normalization.PER_SAMPLE) -> CnResult:
    """Signed-loss complexity at the all-zero-demand family.

    With every historical demand zero the loss is c_o * a, so the signed
    supremum over actions is c_o * (sum of signs)^+.
    """
    q = _check_q(q)
    if not isinstance(normalization, Normalization):
        raise ValidationError("normalization", f"unknown normalization {normalization!r}")
    e = signed_sum_positive_mean(n)
    value = (1.0 - q) * e.value
    if normalization is Normalization.PER_SAMPLE:
        value /= n
    return CnResult(value, e.asymptotic)


@dataclass(frozen=True)
class BoundConfig:
    """Inputs of the general-purpose bound evaluation."""

    n: int
    q: float
    mean_dissimilarity: float
    variant: BoundVariant = BoundVariant.PHI_DIFFERENCE
    normalization: Normalization = Normalization.PER_SAMPLE
    complexity_scale: ComplexityScale = ComplexityScale.ENVELOPE

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError("n", f"needs a positive integer, got {self.n!r}")
        _check_q(self.q)
        if not 0.0 <= self.mean_dissimilarity <= 1.0:
            raise ValidationError(
                "mean_dissimilarity", f"must lie in [0, 1], got {self.mean_dissimilarity}"
            )
        for field_name, enum_type in (
            ("variant", BoundVariant),
            ("normalization", Normalization),
            ("complexity_scale", ComplexityScale),
        ):
            if not isinstance(getattr(self, field_name), enum_type):
                raise ValidationError(field_name, f"unknown {field_name} {getattr(self, field_name)!r}")


def mohri_expected_bound(cfg: BoundConfig) -> float:
    """General-purpose upper bound on the expected regret of the
    equal-weight empirical policy under per-sample distribution drift.

    Both variants share 4*C_n + 2*max(q,1-q)*mean_dissimilarity and add a
    concentration tail: the EXP_INTEGRAL variant integrates the raw
    exponential tail over [0, 1], the PHI_DIFFERENCE variant uses the
    exact Gaussian-CDF expression of the same integral extended to its
    natural range.
    """
    n, q = cfg.n, cfg.q
    M = max(q, 1.0 - q)
    scale = M if cfg.complexity_scale is ComplexityScale.ENVELOPE else 1.0 - q
    e = signed_sum_positive_mean(n).value
    cn = scale * e
    if cfg.normalization is Normalization.PER_SAMPLE:
        cn /= n
    base = 4.0 * cn + 2.0 * M * cfg.mean_dissimilarity
    if cfg.variant is BoundVariant.PHI_DIFFERENCE:
        tail = M * math.sqrt(math.pi / (2.0 * n)) * (
            _standard_normal_cdf(M / (2.0 * math.sqrt(n))) - 0.5
        )
    else:
        s = M / math.sqrt(n)
        tail = 4.0 * s * math.sqrt(2.0 * math.pi) * (_standard_normal_cdf(1.0 / s) - 0.5)
    return base + tail


def bound_limit(q: float, mean_dissimilarity: float) -> float:
    """Large-n limit of the per-sample bound: the drift term alone survives."""
    q = _check_q(q)
    return 2.0 * max(q, 1.0 - q) * float(mean_dissimilarity)


def bound_sample_complexity(
    q: float,
    zeta: float,
    targets: Sequence[float],
    n_max: int = 50_000,
    *,
    variant: BoundVariant = BoundVariant.PHI_DIFFERENCE,
    complexity_scale: ComplexityScale = ComplexityScale.ENVELOPE,
) -> Tuple[Tuple[float, Optional[int]], ...]:
    """Smallest n whose bound meets each target fraction of the no-data regret.

    Entries are (fraction, N) with N = None when the large-n limit already
    exceeds the target. The per-sample bound decreases in n, so the first
    crossing is found by doubling plus bisection and then verified against
    its left neighbor.
    """
    q = _check_q(q)
    zeta = float(zeta)
    if not 0.0 <= zeta <= 1.0:
        raise ValidationError("zeta", f"must lie in [0, 1], got {zeta}")
    if n_max < 1:
        raise ValidationError("n_max", f"needs a positive integer, got {n_max}")
    base = no_data_regret(q)
    limit = bound_limit(q, zeta)

    def bound_at(n: int) -> float:
        return mohri_expected_bound(
            BoundConfig(
                n=n, q=q, mean_dissimilarity=zeta,
                variant=variant, complexity_scale=complexity_scale,
            )
        )

    out = []
    for f in targets:
        f = float(f)
        if f <= 0.0:
            raise ValidationError("targets", f"fractions must be positive, got {f}")
        target = f * base
        if limit > target:
            out.append((f, None))
            continue
        hi = 1
        while bound_at(hi) > target:
            if hi >= n_max:
                raise InfeasibleError(
                    f"target fraction {f} feasible in the limit but not reached by n_max={n_max}"
                )
            hi = min(2 * hi, n_max)
        lo = max(1, hi // 2)
        while lo < hi:
            mid = (lo + hi) // 2
            if bound_at(mid) <= target:
                hi = mid
            else:
                lo = mid + 1
        if bound_at(hi) > target or (hi > 1 and bound_at(hi - 1) <= target):
            raise VerificationError(
                f"bisection returned n={hi} that fails the first-crossing check"
            )
        out.append((f, hi))
    return tuple(out)

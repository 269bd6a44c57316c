import math

import pytest

import nvregret.tuning
from nvregret.model import (
    Branch,
    DissimilarityProfile,
    InfeasibleError,
    OrderStatistic,
    ValidationError,
    VerificationError,
    erm,
    ewerm,
)
from nvregret.regret import worst_case_regret
from nvregret.tuning import (
    regret_curve,
    sample_complexity,
    tune_ewerm,
    tune_knn,
    tune_kstar_erm_dagger,
    tune_mixture_fixed_k,
)


def _const(zeta, n):
    return DissimilarityProfile.constant(zeta, n)


# --- fixed-k mixture game --------------------------------------------------------


def test_fixed_k_single_sample_median():
    sol = tune_mixture_fixed_k(1, 0.5, _const(0.0, 1))
    assert sol.k == 1
    assert sol.value == pytest.approx(0.0625, abs=1e-12)
    assert sol.certificate <= 1e-10
    assert sol.lambdas == pytest.approx((0.0, 1.0, 0.0), abs=1e-9)


def test_fixed_k_mixture_beats_every_pure_rank():
    d = _const(0.05, 4)
    pures = [
        worst_case_regret(OrderStatistic((1, 2, 3, 4), r), 0.7, d).value
        for r in range(6)
    ]
    sol = tune_mixture_fixed_k(4, 0.7, d)
    assert min(pures) == pytest.approx(0.078954955158, abs=1e-9)
    assert sol.value == pytest.approx(0.053564733915, abs=1e-9)
    assert sol.value < min(pures) - 0.02


def test_fixed_k_solution_is_consistent():
    d = _const(0.05, 4)
    sol = tune_mixture_fixed_k(4, 0.7, d)
    assert len(sol.lambdas) == 6
    assert math.fsum(sol.lambdas) == pytest.approx(1.0, abs=1e-12)
    by_rank = {c.rank: c.weight for c in sol.spec.entries}
    for r, lam in enumerate(sol.lambdas):
        if lam > 0.0:
            assert by_rank[r] == lam
        else:
            assert r not in by_rank
    revalidated = worst_case_regret(sol.spec, 0.7, d).value
    assert sol.value == pytest.approx(revalidated, abs=1e-12)


def test_fixed_k_iid_long_run_target():
    sol = tune_mixture_fixed_k(37, 0.9, _const(0.0, 37))
    assert sol.value == pytest.approx(0.008362553122, abs=1e-9)
    assert sol.value <= 0.009


def test_fixed_k_values_non_increasing_toward_floor():
    values = [tune_mixture_fixed_k(k, 0.9, _const(0.1, k)).value for k in (3, 7, 11, 15)]
    frozen = (0.059129612110, 0.050856017746, 0.050390101412, 0.050000000029)
    assert values == pytest.approx(frozen, abs=1e-9)
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-9
    # No policy escapes half the dissimilarity budget.
    for v in values:
        assert v >= 0.05 - 1e-9


def test_fixed_k_rejects_bad_inputs():
    d = _const(0.1, 3)
    with pytest.raises(ValidationError):
        tune_mixture_fixed_k(0, 0.5, d)
    with pytest.raises(ValidationError):
        tune_mixture_fixed_k(4, 0.5, d)
    with pytest.raises(ValidationError):
        tune_mixture_fixed_k(2, 0.5, d, mu0_grid=1)
    with pytest.raises(ValidationError):
        tune_mixture_fixed_k(2, 0.5, DissimilarityProfile((0.3, 0.1)))


# --- effective sample size -------------------------------------------------------


def test_kstar_representative_instance():
    sol = tune_kstar_erm_dagger(40, 0.9, _const(0.1, 40), mu0_grid=601)
    assert sol.k == 15
    assert 0.05 - 1e-9 <= sol.value <= 0.0502


def test_kstar_uses_all_samples_when_improvement_is_strict():
    for n in (3, 4, 5, 6):
        sol = tune_kstar_erm_dagger(n, 0.9, _const(0.0, n))
        assert sol.k == n


def test_kstar_exact_tie_prefers_fewer_samples():
    # Mixing two adjacent ranks of six samples with the order-statistic
    # recurrence weights reproduces the five-sample median exactly, so
    # the median case ties across k and the cheaper k must win.
    five = tune_mixture_fixed_k(5, 0.5, _const(0.0, 5))
    six = tune_mixture_fixed_k(6, 0.5, _const(0.0, 6))
    assert five.value == pytest.approx(six.value, abs=1e-12)
    sol = tune_kstar_erm_dagger(6, 0.5, _const(0.0, 6))
    assert sol.k == 5
    assert sol.value == pytest.approx(six.value, abs=1e-12)


def test_kstar_bisection_skips_no_interior_point():
    # The bisection must land on the same elbow from any n above it.
    sol = tune_kstar_erm_dagger(50, 0.9, _const(0.1, 50), mu0_grid=601)
    assert sol.k == 15
    assert 0.05 - 1e-9 <= sol.value <= 0.0502


def test_kstar_rejects_profile_mismatch():
    with pytest.raises(ValidationError):
        tune_kstar_erm_dagger(5, 0.9, _const(0.1, 4))


def test_kstar_pushes_past_probes_that_refuse_to_certify(monkeypatch):
    # A probe that cannot certify its game must count as "not yet at the
    # plateau" so the search stays sound and errs toward larger k.
    real = nvregret.tuning._refine_game

    def flaky(k, q, d_k, base_grid, **kwargs):
        if k == 5:
            raise VerificationError("forced")
        return real(k, q, d_k, base_grid, **kwargs)

    six = tune_mixture_fixed_k(6, 0.5, _const(0.0, 6))
    monkeypatch.setattr("nvregret.tuning._refine_game", flaky)
    sol = tune_kstar_erm_dagger(6, 0.5, _const(0.0, 6))
    assert sol.k == 6
    assert sol.value == pytest.approx(six.value, abs=1e-12)


def test_kstar_raises_when_full_data_game_never_certifies(monkeypatch):
    def broken(*args, **kwargs):
        raise VerificationError("forced")

    monkeypatch.setattr("nvregret.tuning._refine_game", broken)
    with pytest.raises(InfeasibleError):
        tune_kstar_erm_dagger(4, 0.9, _const(0.0, 4))


# --- learning curves -------------------------------------------------------------


def test_curve_interior_minimum():
    points = regret_curve(
        erm, 0.9, lambda n: _const(0.1, n), [*range(12, 19), 200], grid=801
    )
    values = {n: rep.value for n, rep in points}
    assert min(values, key=values.get) == 16
    assert values[15] == pytest.approx(0.054918437429, abs=1e-9)
    assert values[16] == pytest.approx(0.051545244349, abs=1e-9)
    assert values[17] == pytest.approx(0.051880270042, abs=1e-9)
    assert values[200] > values[16]
    branches = {n: rep.branch for n, rep in points}
    assert branches[16] is Branch.DOWN
    assert branches[17] is Branch.UP


def test_curve_flat_for_data_blind_policy():
    def family(n):
        return OrderStatistic(tuple(range(1, n + 1)), 0)

    points = regret_curve(family, 0.7, lambda n: _const(0.05, n), (1, 2, 5))
    for _, rep in points:
        assert rep.value == pytest.approx(0.7, abs=1e-9)


def test_curve_deterministic_and_order_preserving():
    args = (erm, 0.6, lambda n: _const(0.2, n), (4, 2, 3))
    a = regret_curve(*args, grid=301, refine_iters=30)
    b = regret_curve(*args, grid=301, refine_iters=30)
    assert a == b
    assert [n for n, _ in a] == [4, 2, 3]


def test_curve_rejects_empty_range():
    with pytest.raises(ValidationError):
        regret_curve(erm, 0.5, lambda n: _const(0.0, n), ())


# --- sample complexity -----------------------------------------------------------


def test_sample_complexity_iid():
    rows = sample_complexity(0.9, 0.0, (1.0, 0.9, 0.75, 0.5, 0.25, 0.1), n_max=60)
    assert [f for f, _ in rows] == [1.0, 0.9, 0.75, 0.5, 0.25, 0.1]
    assert [n for _, n in rows] == [3, 3, 4, 5, 7, 37]


def test_sample_complexity_reports_unreachable_targets():
    fractions = (1.0, 0.9, 0.75, 0.5, 0.25, 0.1)
    rows = sample_complexity(0.9, 0.02, fractions, n_max=60)
    assert [n for _, n in rows] == [3, 3, 4, 5, 16, None]
    rows = sample_complexity(0.9, 0.04, fractions, n_max=60)
    assert [n for _, n in rows] == [3, 4, 4, 6, None, None]


def test_sample_complexity_raises_when_budget_too_small():
    with pytest.raises(InfeasibleError):
        sample_complexity(0.9, 0.0, (0.1,), n_max=5)


def test_sample_complexity_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        sample_complexity(0.9, -0.1, (0.5,))
    with pytest.raises(ValidationError):
        sample_complexity(0.9, 0.1, ())
    with pytest.raises(ValidationError):
        sample_complexity(0.9, 0.1, (0.0,))
    with pytest.raises(ValidationError):
        sample_complexity(0.9, 0.1, (1.5,))
    with pytest.raises(ValidationError):
        sample_complexity(0.9, 0.1, (0.5,), n_max=0)


# --- drift tuners ----------------------------------------------------------------


def test_ewerm_iid_reduces_to_uniform_weights():
    base = worst_case_regret(erm(6), 0.9, _const(0.0, 6)).value
    got = tune_ewerm(6, 0.9, 0.0, 0.05)
    assert got.value == pytest.approx(base, abs=1e-10)
    assert 0.0 < got.gamma <= 1.0


def test_ewerm_drift_beats_uniform_weights():
    got = tune_ewerm(12, 0.9, 0.02, 0.05)
    uniform = worst_case_regret(
        ewerm(1.0, 12), 0.9, DissimilarityProfile.drift(0.02, 12)
    ).value
    assert got.gamma == pytest.approx(0.9, abs=1e-12)
    assert got.value == pytest.approx(0.054154084385, abs=1e-6)
    assert got.value < uniform - 0.02


def test_knn_iid_uses_all_samples():
    base = worst_case_regret(erm(6), 0.9, _const(0.0, 6)).value
    got = tune_knn(6, 0.9, 0.0)
    assert got.k == 6
    assert got.value == pytest.approx(base, abs=1e-12)


def test_knn_drift_truncates():
    got = tune_knn(12, 0.9, 0.02)
    assert got.k == 7
    assert got.value == pytest.approx(0.044583815250, abs=1e-9)
    full = worst_case_regret(erm(12), 0.9, DissimilarityProfile.drift(0.02, 12)).value
    assert got.value < full


def test_drift_tuner_input_validation():
    with pytest.raises(ValidationError):
        tune_ewerm(0, 0.9, 0.0)
    with pytest.raises(ValidationError):
        tune_ewerm(3, 0.9, -0.1)
    with pytest.raises(ValidationError):
        tune_ewerm(3, 0.9, 0.0, 0.0)
    with pytest.raises(ValidationError):
        tune_ewerm(3, 0.9, 0.0, 1.5)
    with pytest.raises(ValidationError):
        tune_knn(0, 0.9, 0.0)
    with pytest.raises(ValidationError):
        tune_knn(3, 0.9, -1.0)
    with pytest.raises(ValidationError):
        tune_knn(3, 0.9, math.inf)

import math
from fractions import Fraction

import numpy as np
import pytest

from jumpga.bitpop import BitString
from jumpga.errors import NoEquilibriumError, UsageError
from jumpga.theory import (
    PlateauParams,
    alpha_as_printed,
    alpha_delta,
    alpha_delta_bound,
    beta_gamma,
    binom,
    c1_c2,
    check_preconditions,
    constructive_search,
    ea_drift,
    equilibrium_s0,
    equilibrium_s0_asymptotic,
    jump_offset_success,
    lambda_min,
    log_binom,
    lower_bound_runtime,
    opt_hit_bound,
    p_ell,
    p_ell_exact,
    p_ell_table,
    plateau_bound_threshold,
    point_mass,
    pr_plateau_lower_bound,
    tau0,
    theory_report,
)
from jumpga.variation import StandardBit, mutation_outcomes


def test_p_ell_fixture():
    P = PlateauParams(4, 2, 2)
    assert p_ell(P, 1) == pytest.approx(9 / 64, rel=1e-14)
    assert p_ell_exact(4, 2, 1, 1) == Fraction(9, 64)


def test_p_ell_matches_mask_enumeration():
    n, k = 6, 2
    x = BitString.from_str("00" + "1" * 4)
    outs = mutation_outcomes(StandardBit(1), x)
    for ell in range(k + 1):
        mass = sum(p for y, p in outs if y.zeros_count == k and (y.value ^ x.value).bit_count() == 2 * ell)
        assert mass == p_ell_exact(n, k, 1, ell)


def test_p_ell_zero_is_stay_put():
    P = PlateauParams(30, 4, 5, chi=1.5)
    assert p_ell(P, 0) == pytest.approx((1 - 1.5 / 30) ** 30, rel=1e-13)
    with pytest.raises(UsageError):
        p_ell(P, 5)


def test_p_ell_sum_matches_monte_carlo(rng):
    n, k, N = 20, 4, 10**6
    P = PlateauParams(n, k, 2)
    x = np.r_[np.zeros(k, bool), np.ones(n - k, bool)]
    stay = 0
    for _ in range(N // 250_000):
        y = x ^ (rng.random((250_000, n)) < 1 / n)
        stay += int(np.count_nonzero(y.sum(axis=1) == n - k))
    p = float(p_ell_table(P).sum())
    assert abs(stay / N - p) <= 3 * math.sqrt(p * (1 - p) / N)


@pytest.mark.parametrize("n,k", [(6, 2), (9, 4), (12, 3)])
def test_probabilities_are_subprobabilities(n, k):
    total = sum(p_ell_exact(n, k, 1, ell) for ell in range(min(k, n - k) + 1))
    assert 0 < total <= 1
    for ell in range(min(k, n - k) + 1):
        assert p_ell(PlateauParams(n, k, 2), ell) == pytest.approx(float(p_ell_exact(n, k, 1, ell)), rel=1e-12)


def test_binomials_cross_validate():
    for n in (10, 40, 64):
        for k in range(0, n + 1, 3):
            assert math.exp(log_binom(n, k)) == pytest.approx(math.comb(n, k), rel=1e-10)
            assert binom(n, k) == float(math.comb(n, k))
    assert binom(1000, 500) == pytest.approx(float(math.comb(1000, 500)), rel=1e-9)
    assert binom(5, 7) == 0.0


def test_ea_drift_pure_stay_put():
    P = PlateauParams(10, 3, 4)
    pl = np.array([0.3, 0, 0, 0])
    assert ea_drift(P, pl, 50.0) == pytest.approx((1 - 2 * 0.3 / 16) * 50)


def test_ea_drift_fixed_ell_formula():
    n, k, mu, ell, S = 20, 5, 6, 2, 300.0
    P = PlateauParams(n, k, mu)
    expect = (1 - 2 / mu**2 - 2 * (mu - 1) * ell * n / (mu**2 * k * (n - k))) * S + 4 * ell * (mu - 1)
    assert ea_drift(P, point_mass(P, ell), S) == pytest.approx(expect, rel=1e-14)


def test_ea_drift_tiny_fixture():
    P = PlateauParams(4, 2, 2)
    assert ea_drift(P, point_mass(P, 1), 4) == pytest.approx(4.0, rel=1e-15)


def test_equilibrium_is_a_fixed_point_and_matches_closed_form(rng):
    for _ in range(100):
        n = int(rng.integers(4, 300))
        k = int(rng.integers(1, n))
        mu = int(rng.integers(2, 200))
        chi = float(rng.uniform(0.2, 3.0))
        if chi > n:
            continue
        P = PlateauParams(n, k, mu, chi)
        pl = p_ell_table(P)
        if not np.any(pl[1:] > 0):
            continue
        s0 = equilibrium_s0(P, pl)
        assert ea_drift(P, pl, s0) == pytest.approx(s0, rel=1e-12)
        ells = np.arange(len(pl))
        closed = 2 * (mu - 1) * mu**2 / (pl.sum() / (ells * pl).sum() + (mu - 1) * n / (k * (n - k)))
        assert s0 == pytest.approx(closed, rel=1e-10)
        assert s0 < 2 * k * mu**2


def test_equilibrium_without_movement():
    P = PlateauParams(10, 3, 4)
    with pytest.raises(NoEquilibriumError):
        equilibrium_s0(P, point_mass(P, 0))
    assert equilibrium_s0(P, point_mass(P, 0), initial_S=17) == 17


def test_equilibrium_degenerate_full_complement():
    P = PlateauParams(10, 5, 4, chi=10.0)
    s0 = equilibrium_s0(P, p_ell_table(P))
    assert math.isfinite(s0) and s0 > 0


def test_equilibrium_asymptotic_form():
    P = PlateauParams(1000, 5, 100)
    exact = equilibrium_s0(P, p_ell_table(P))
    assert abs(equilibrium_s0_asymptotic(P) / exact - 1) <= 2 * P.q / P.n


def test_equilibrium_increases_with_mu():
    values = [equilibrium_s0(PlateauParams(50, 5, mu), p_ell_table(PlateauParams(50, 5, mu))) for mu in range(2, 60)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_c1_c2_estimates():
    P = PlateauParams(2000, 10, 10)
    c1, c2 = c1_c2(P, p_ell_table(P))
    tol = 3 * P.q / P.n
    assert c1 == pytest.approx(math.exp(-1), rel=tol)
    assert c2 == pytest.approx((P.n - P.k) / P.n * math.exp(-1), rel=tol)
    assert c1_c2(P, point_mass(P, 0)) == (1.0, 0.0)
    assert c1_c2(P, point_mass(P, 1))[1] > 0


def test_alpha_delta_reduce_to_ea_at_pc_zero():
    P = PlateauParams(40, 4, 12, 1.0, 0.0)
    pl = p_ell_table(P)
    assert alpha_delta(P, pl) == pytest.approx(beta_gamma(P, pl), rel=1e-14)


def test_alpha_as_printed_uses_mu():
    P = PlateauParams(40, 4, 12, 1.0, 0.1)
    pl = p_ell_table(P)
    ells = np.arange(len(pl))
    assert alpha_as_printed(P, pl) - alpha_delta(P, pl)[0] == pytest.approx(0.9 * 4 * float((ells * pl).sum()))


def test_alpha_negative_for_large_pc():
    P = PlateauParams(20, 4, 3, 1.0, 0.9)
    assert alpha_delta(P, p_ell_table(P))[0] < 0
    assert not check_preconditions(P, 0.1).pc_bound


def test_alpha_over_delta_dominates_closed_form(rng):
    checked = 0
    for _ in range(300):
        n = int(rng.integers(10, 500))
        k = int(rng.integers(1, max(2, n // 4)))
        mu = int(rng.integers(2, 500))
        chi = float(rng.uniform(0.3, 2.0))
        pc = float(rng.uniform(0, 0.2))
        P = PlateauParams(n, k, mu, chi, pc)
        pl = p_ell_table(P)
        a, d = alpha_delta(P, pl)
        assert d > 0
        assert a / d >= alpha_delta_bound(P, pl) - 1e-9 * abs(a / d)
        checked += 1
    assert checked == 300


def test_tau0_examples():
    assert tau0(1 / math.e, 1.0) == 1
    assert tau0(0.01, 0.001) == 4606
    for bad in ((1.0, 0.5), (0.0, 0.5), (0.5, 0.0)):
        with pytest.raises(UsageError):
            tau0(*bad)


def test_pr_plateau_examples():
    b = pr_plateau_lower_bound(1, 1.0, 100)
    assert b.binomial == pytest.approx(0.5 * 0.99**100, rel=1e-14)
    assert b.simplified == pytest.approx(math.exp(-1) / 3, rel=1e-14)
    assert b.holds
    b4 = pr_plateau_lower_bound(4, 1.0, 10**6)
    assert b4.binomial / (1 - 1e-6) ** 10**6 == pytest.approx(70 / 256, rel=1e-12)
    assert abs((1 - 1 / 10**4) ** 10**4 / math.exp(-1) - 1) < 0.01


@pytest.mark.parametrize("k,chi,expected", [(1, 1.0, 2), (1, 2.0, 7), (2, 2.0, 6), (3, 1.0, 6), (9, 1.0, 18)])
def test_plateau_threshold_values(k, chi, expected):
    assert plateau_bound_threshold(k, chi) == expected
    central = Fraction(math.comb(2 * k, k), 4**k)
    lhs = lambda n: float(central) * (1 - chi / n) ** n
    assert lhs(expected) >= math.exp(-chi) / (3 * math.sqrt(k))
    if expected > max(2 * k, math.floor(chi) + 1):
        assert lhs(expected - 1) < math.exp(-chi) / (3 * math.sqrt(k))
    for n in range(expected, expected + 200):
        assert lhs(n) >= math.exp(-chi) / (3 * math.sqrt(k))


def test_opt_hit_bound_examples():
    assert opt_hit_bound(12, 3, 0) == pytest.approx(1 / math.comb(12, 3), rel=1e-15)
    assert opt_hit_bound(8, 2, 1) == pytest.approx(0.25 * (1 / 56 + 2 / 28 + 1 / 8), rel=1e-14)
    assert opt_hit_bound(8, 2, 1) == pytest.approx(0.0535714285714, rel=1e-10)
    assert opt_hit_bound(40, 4, 4) >= 4.0**-4


@pytest.mark.parametrize("n", [16, 36, 64, 100, 400])
def test_opt_hit_bound_peaks_at_full_distance(n):
    for k in range(1, int(math.sqrt(n) / 2) + 1):
        vals = [opt_hit_bound(n, k, d) for d in range(k + 1)]
        assert max(vals) == vals[-1]


def test_opt_hit_bound_big_n_path():
    assert opt_hit_bound(200, 3, 2) == pytest.approx(
        sum(math.comb(4, i) / math.comb(200, 5 - i) for i in range(5)) / 16, rel=1e-10)


def test_lower_bound_runtime_examples():
    assert lower_bound_runtime(20, 3, 0.5, 1.0) == 64
    assert lower_bound_runtime(20, 3, 1 - 1e-12) == pytest.approx(0.5 * 64)
    assert lower_bound_runtime(30, 8, 0.5, 1e9) == 0.5 * math.comb(30, 8) * 2
    with pytest.raises(UsageError):
        lower_bound_runtime(20, 3, 0.0)


def test_jump_offset_success_examples():
    assert jump_offset_success(5, 5).single_term == 4.0**-5
    r = jump_offset_success(3, 1)
    assert r.single_term == 15 / 64
    assert r.full_sum == (15 + 6 + 1) / 64
    assert jump_offset_success(16, 4).single_term == pytest.approx(math.comb(32, 20) / 4**16, rel=1e-15)
    with pytest.raises(UsageError):
        jump_offset_success(3, 0)


def test_precondition_flags():
    P = PlateauParams(30, 3, 100, 1.0, 0.001)
    flags = check_preconditions(P, 0.1, lambda_c=5)
    assert not flags.k_bound
    assert flags.lambda_bound is False
    assert set(flags.violations()) >= {"k_bound", "lambda_bound"}
    assert check_preconditions(P, 0.1).lambda_bound is None
    assert flags.special_eps == 1 / 48
    assert flags.special_floor_8epsk_zero


def test_special_eps_floor_vanishes_for_all_k():
    for k in range(1, 200):
        assert math.floor(8 * k / (16 * k)) == 0
        assert check_preconditions(PlateauParams(10 * k + 10, k, 4), 0.1).special_floor_8epsk_zero


def test_constructive_search_finds_feasible_point():
    r = constructive_search(30, 2, 1.0, 0.22)
    assert r.flags.general_ok and r.flags.violations() == []
    assert r.flags.pc_bound_corollary
    assert r.lambda_c >= lambda_min(2, 1.0, r.mu)
    assert check_preconditions(r.params, 0.22, r.lambda_c).mu_bound


def test_constructive_search_reports_k_bound():
    r = constructive_search(40, 4, 1.0, 1 / 64)
    assert r.flags.violations() == ["k_bound"]


def test_plateau_params_validation():
    for args in ((10, 0, 3), (10, 10, 3), (10, 3, 1), (10, 3, 3, 0.0), (10, 3, 3, 1.0, 1.0)):
        with pytest.raises(UsageError):
            PlateauParams(*args)


def test_theory_report_schema():
    P = PlateauParams(50, 5, 20, 1.0, 0.01)
    rep = theory_report(P, 0.0125).to_dict()
    for key in ("p_ell", "beta", "gamma", "S0", "C1", "C2", "alpha", "delta", "alpha_over_delta",
                "alpha_over_delta_bound", "tau0", "pr_plateau_lb", "lambda_c_default", "precondition_flags",
                "opt_hit_bound", "jump_offset_success", "lower_bound_runtime"):
        assert key in rep
    assert rep["S0"] == equilibrium_s0(P, p_ell_table(P))
    assert all(0 <= p <= 1 for p in rep["p_ell"]) and sum(rep["p_ell"]) <= 1
    assert all(0 <= p <= 1 for p in rep["opt_hit_bound"])

"""Acceptance criteria C1..C11.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion together with the measured values.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from jumpga.algorithms import AlgorithmConfig, default_lambda_c
from jumpga.bitpop import (
    BitString,
    Population,
    hamming,
    pairwise_diversity,
    random_plateau_population,
    write_population,
)
from jumpga.experiments import (
    cluster_population,
    complementary_pair,
    counterexample_drift,
    counterexample_population,
    diversity_threshold,
    equilibrium_run,
    exact_opt_hit,
    hurdle_campaign,
    mc_jump_offset_success,
    mc_opt_hit,
    median_ratios,
    neutrality_defects,
    one_step_drift,
    paired_flip_lemma_defects,
    plateau_pairs,
    runtime_campaign,
)
from jumpga.experiments.drift import enumerate_drift_exact
from jumpga.fitness import FitnessSpec
from jumpga.rng import derive_seed
from jumpga.theory import (
    PlateauParams,
    alpha_delta,
    constructive_search,
    equilibrium_s0,
    jump_offset_success,
    lambda_min,
    opt_hit_bound,
    p_ell_table,
    tau0,
)
from jumpga.variation import PairedFlip

criterion = pytest.mark.criterion


def note(record_property, text: str) -> None:
    record_property("detail", text)


@criterion("C1", "incremental diversity equals recomputation")
def test_c1_bookkeeping(record_property):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    sequences, steps = 10_000, 8
    for _ in range(sequences):
        n = int(rng.integers(1, 65))
        mu = int(rng.integers(1, 33))
        top = 1 << n

        def draw() -> BitString:
            return BitString(n, int.from_bytes(rng.bytes(8), "little") % top)

        P = Population([draw() for _ in range(mu)])
        for _ in range(steps):
            P.replace_inplace(draw(), int(rng.integers(mu)))
        assert P.diversity == pairwise_diversity(P.members)
    elapsed = time.perf_counter() - start
    note(record_property, f"{sequences} sequences x {steps} replaces in {elapsed:.1f}s")
    assert elapsed < 10


@criterion("C2", "paired-flip distance lemma")
def test_c2_paired_flip_lemma(record_property):
    worst = 0.0
    cases = 0
    for k in range(1, 5):
        for n in range(k + 1, 11):
            for ell, h, exact, formula in paired_flip_lemma_defects(n, k):
                cases += 1
                err = abs(exact - formula)
                if err:
                    worst = max(worst, float(err / abs(formula)) if formula else math.inf)
    note(record_property, f"{cases} (pair, ell) cases, max relative error {worst:.1e}")
    assert worst <= 1e-12


@criterion("C2", "paired-flip distance lemma")
def test_c2_worked_fixture():
    x, y = BitString.from_str("0011"), BitString.from_str("0101")
    assert hamming(x, y) == 2
    defects = [(exact, formula) for ell, h, exact, formula in paired_flip_lemma_defects(4, 2) if ell == 1 and h == 2]
    assert defects and all(e == f == Fraction(2) for e, f in defects)
    assert enumerate_drift_exact(Population([x, y]), PairedFlip(1)) == 4


@criterion("C3", "mutation-only one-step drift")
def test_c3_mutation_drift(record_property):
    rng = np.random.default_rng(3)
    P = random_plateau_population(20, 4, 6, rng)
    cfg = AlgorithmConfig(FitnessSpec("jumpprime", 20, k=4), mu=6, algorithm="ea")
    rep = one_step_drift(P, cfg, 10**6, "all", rng)
    note(record_property, f"S={rep.initial_S} mean={rep.mean_next_S:.4f} predicted={rep.predicted:.4f} "
                          f"z={rep.z_score():.2f} stderr/S={rep.stderr / rep.initial_S:.4%}")
    assert rep.within(3)
    assert rep.stderr <= 0.005 * rep.initial_S


@criterion("C4", "equilibrium diversity of the EA")
def test_c4_equilibrium(record_property):
    cfg = AlgorithmConfig(FitnessSpec("jumpprime", 50, k=5), mu=20, algorithm="ea", init="plateau", seed=4)
    rep = equilibrium_run(cfg, burn_in=10**5, horizon=10**6, eps=1 / 8)
    s0 = equilibrium_s0(PlateauParams(50, 5, 20, 1.0, 0.0), p_ell_table(PlateauParams(50, 5, 20, 1.0, 0.0)))
    assert rep.predicted == pytest.approx(s0)
    rel = rep.time_avg_S / s0 - 1
    note(record_property, f"time average {rep.time_avg_S:.1f} vs S0 {s0:.1f} ({rel:+.2%})")
    assert abs(rel) <= 0.05


@criterion("C5", "crossover drift lower bound")
@pytest.mark.parametrize("fixture", ["random", "cluster", "counterexample"])
def test_c5_crossover_bound(fixture, record_property):
    n, k, chi = 200, 9, 1.0
    rng = np.random.default_rng(50 + len(fixture))
    if fixture == "random":
        P = random_plateau_population(n, k, 30, rng)
    elif fixture == "cluster":
        P = cluster_population(n, k, 30, rng)
    else:
        P = counterexample_population(n, k, 28)
    mu = P.mu
    lam = math.ceil(lambda_min(k, chi, mu))
    cfg = AlgorithmConfig(FitnessSpec("jumpprime", n, k=k), mu=mu, algorithm="ga", p_c=0.5, lambda_c=lam)
    rep = one_step_drift(P, cfg, 10**5, "crossover", rng)
    note(record_property, f"{fixture}: mu={mu} lambda_c={lam} S={rep.initial_S} "
                          f"mean={rep.mean_next_S:.1f}+-{rep.stderr:.1f} bound={rep.lower_bound:.1f}")
    assert rep.above_lower_bound(3)


@criterion("C6", "counterexample drift contrast")
def test_c6_counterexample(record_property):
    res = counterexample_drift(5000, 100, 40, 1.0, 0.5, None, 10**5, np.random.default_rng(6))
    single, competing = res.single, res.competing
    note(record_property, f"S={res.diversity} single change {single.mean_change:+.2f}+-{single.stderr:.2f}, "
                          f"lambda_c={res.lambda_c} change {competing.mean_change:+.2f}+-{competing.stderr:.2f}")
    assert res.diversity == res.expected_diversity == 12000
    assert single.mean_change + 3 * single.stderr < 0
    assert competing.above_lower_bound(3)


@criterion("C7", "diversity neutrality of crossover")
@pytest.mark.parametrize("kind", ["uniform", "balanced", "boring"])
def test_c7_neutrality(kind, record_property):
    bad = 0
    odd_only = True
    for n in range(1, 7):
        defects = neutrality_defects(kind, n)
        idx = np.argwhere(defects != 0)
        bad += len(idx)
        odd_only &= all((int(a) ^ int(b)).bit_count() % 2 == 1 for a, b, _ in idx)
    suffix = " (all with odd parent distance)" if bad and odd_only else ""
    note(record_property, f"{kind}: {bad} non-neutral triples{suffix}")
    assert bad == 0


@criterion("C8", "optimum-hit probability bound")
def test_c8_exact_below_bound(record_property):
    checked = 0
    worst = 0.0
    for k in range(1, 5):
        for n in range(k + 1, 15):
            for x1, x2 in plateau_pairs(n, k, canonical=True):
                d = hamming(x1, x2) // 2
                exact = exact_opt_hit(x1, x2, 1)
                bound = opt_hit_bound(n, k, d)
                worst = max(worst, exact / bound)
                checked += 1
                assert exact <= bound * (1 + 1e-12)
    for k in range(1, 4):
        for n in range(k + 1, 8):
            for x1, x2 in plateau_pairs(n, k, canonical=False):
                d = hamming(x1, x2) // 2
                assert exact_opt_hit(x1, x2, 1) <= opt_hit_bound(n, k, d) * (1 + 1e-12)
    note(record_property, f"{checked} canonical pairs, max exact/bound {worst:.3f}")


@criterion("C8", "optimum-hit probability bound")
def test_c8_monte_carlo(record_property):
    x1, x2 = complementary_pair(12, 3)
    exact = exact_opt_hit(x1, x2, 1)
    est, se = mc_opt_hit(x1, x2, 1.0, 10**7, np.random.default_rng(8))
    note(record_property, f"MC {est:.3e}+-{se:.1e} vs exact {exact:.3e}")
    assert abs(est - exact) <= 3 * se


@criterion("C9", "runtime advantage on Jump")
def test_c9_ga_beats_ea(record_property):
    f = FitnessSpec("jump", 40, k=4)
    ea = runtime_campaign(AlgorithmConfig(f, mu=1, algorithm="ea", budget=10**10), 20, 101, threads=None)
    s = constructive_search(40, 4, 1.0, 1 / 64)
    ga_cfg = AlgorithmConfig(f, mu=s.mu, algorithm="ga", p_c=s.p_c, lambda_c=s.lambda_c, budget=10**10)
    ga = runtime_campaign(ga_cfg, 20, 202, threads=None)
    ea_med, ga_med = ea.evaluations().median, ga.evaluations().median
    note(record_property, f"EA median {ea_med:.0f}, GA median {ga_med:.0f} (mu={s.mu}, lambda_c={s.lambda_c}), "
                          f"ratio {ga_med / ea_med:.3f}")
    assert ea.successes == ga.successes == 20
    assert ga_med <= 0.1 * ea_med


@criterion("C9", "runtime advantage on Jump")
def test_c9_post_plateau_ratio(record_property):
    medians = []
    for k in (3, 4, 5):
        cfg = AlgorithmConfig(FitnessSpec("jump", 100, k=k), mu=100, algorithm="ga", p_c=0.5,
                              lambda_c=default_lambda_c(k, 1.0, 100, 0.5), init="plateau", budget=10**9)
        camp = runtime_campaign(cfg, 400, 11, threads=None)
        assert camp.successes == 400
        medians.append(camp.post_plateau().median)
    ratios = median_ratios(medians)
    note(record_property, "post-plateau medians " + ", ".join(f"{m:.0f}" for m in medians)
         + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios))
    assert all(2 <= r <= 6 for r in ratios)


@criterion("C10", "diversity event probability")
def test_c10_diversity_event(tmp_path, record_property):
    n, k, eps, trials, horizon = 30, 3, 1 / 8, 30, 10**4
    s = constructive_search(n, k, 1.0, eps)
    params = s.params
    _, delta = alpha_delta(params, p_ell_table(params))
    burn_in = tau0(eps, delta)
    fixture = tmp_path / "worst.txt"
    write_population(fixture, Population.from_strings(["0" * k + "1" * (n - k)] * s.mu))
    hits = 0
    for i in range(trials):
        cfg = AlgorithmConfig(FitnessSpec("jumpprime", n, k=k), mu=s.mu, algorithm="ga", p_c=s.p_c,
                              lambda_c=s.lambda_c, init="fixture", fixture=str(fixture), seed=derive_seed(10, i))
        rep = equilibrium_run(cfg, burn_in, horizon, eps)
        assert rep.threshold == diversity_threshold(k, s.mu, eps)
        hits += rep.generations_above >= horizon / 4
    p = 1 / 3
    need = p - 2 * math.sqrt(p * (1 - p) / trials)
    note(record_property, f"mu={s.mu} lambda_c={s.lambda_c} burn-in {burn_in}: {hits}/{trials} trials "
                          f"(need >= {need:.3f})")
    assert hits / trials >= need


@criterion("C11", "extensions: jump offset and Hurdle")
@pytest.mark.parametrize("delta", [1, 2, 5])
def test_c11_jump_offset(delta, record_property):
    expected = jump_offset_success(5, delta).full_sum
    est, se = mc_jump_offset_success(5, delta, 10**7, np.random.default_rng(110 + delta))
    note(record_property, f"delta={delta}: MC {est:.5f}+-{se:.5f} vs {expected:.5f}")
    assert abs(est - expected) <= 3 * se


@criterion("C11", "extensions: jump offset and Hurdle")
def test_c11_hurdle(record_property):
    s = constructive_search(30, 4, 1.0, 1 / 8)
    cfg = AlgorithmConfig(FitnessSpec("hurdle", 30, w=4), mu=s.mu, algorithm="ga", p_c=s.p_c,
                          lambda_c=s.lambda_c, budget=10**8)
    camp = hurdle_campaign(30, 4, cfg, 10, "uniform", master_seed=111, threads=None)
    note(record_property, f"Hurdle(30, 4): {camp.successes}/10 within 1e8 evaluations, "
                          f"median {camp.evaluations().median:.0f}")
    assert camp.successes >= 9

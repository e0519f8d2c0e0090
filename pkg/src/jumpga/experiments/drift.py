"""One-step diversity drift: Monte Carlo sampling, exact enumeration and the two-cluster population."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .. import _kernels as K
from ..algorithms import AlgorithmConfig, kernel_inputs
from ..bitpop import BitString, Population, random_with_zeros
from ..errors import UsageError
from ..fitness import JUMP_FAMILIES, FitnessSpec, evaluate
from ..theory import (
    PlateauParams,
    beta_gamma,
    crossover_drift_lower_bound,
    ga_drift_lower_bound,
    lambda_min,
    p_ell_table,
    point_mass,
)
from ..variation import (
    MutationSpec,
    PairedFlip,
    StandardBit,
    crossover_outcomes,
    mutate,
    mutation_outcomes,
)

CONDITIONINGS = ("all", "crossover", "mutation", "accepted")
_BRANCH = {"all": K.BRANCH_ANY, "crossover": K.BRANCH_CROSSOVER, "mutation": K.BRANCH_MUTATION,
           "accepted": K.BRANCH_ANY}


@dataclass
class DriftReport:
    initial_S: int
    samples: int
    mean_next_S: float
    stderr: float
    conditioning: str
    predicted: Optional[float] = None
    lower_bound: Optional[float] = None
    accept_rate: float = float("nan")

    @property
    def mean_change(self) -> float:
        return self.mean_next_S - self.initial_S

    def z_score(self) -> Optional[float]:
        if self.predicted is None:
            return None
        if self.stderr == 0:
            return 0.0 if self.mean_next_S == self.predicted else math.inf
        return (self.mean_next_S - self.predicted) / self.stderr

    def within(self, sigmas: float = 3.0) -> Optional[bool]:
        if self.predicted is None:
            return None
        return abs(self.mean_next_S - self.predicted) <= sigmas * self.stderr

    def above_lower_bound(self, sigmas: float = 3.0) -> Optional[bool]:
        if self.lower_bound is None:
            return None
        return self.mean_next_S >= self.lower_bound - sigmas * self.stderr

    def to_dict(self) -> dict:
        return asdict(self)


def _plateau_k(P: Population, fitness: FitnessSpec) -> int:
    if fitness.family not in JUMP_FAMILIES:
        raise UsageError(f"drift sampling needs a Jump family, not {fitness.family}")
    if P.n != fitness.n:
        raise UsageError(f"population length {P.n} differs from fitness n={fitness.n}")
    off = [i for i, x in enumerate(P) if x.zeros_count != fitness.k]
    if off:
        raise UsageError(f"members {off[:5]} are not on the plateau (need exactly {fitness.k} zeros)")
    return fitness.k


def _predictions(P: Population, cfg: AlgorithmConfig, conditioning: str, ga: bool):
    """(closed-form expectation, lower bound) where the theory supplies one."""
    n, k, mu = P.n, cfg.fitness.k, P.mu
    S = P.diversity
    if mu < 2 or k >= n:
        return None, None
    m = cfg.mutation
    chi = m.chi if isinstance(m, StandardBit) else 1.0
    params = PlateauParams(n, k, mu, chi, cfg.p_c if ga else 0.0)
    if isinstance(m, StandardBit):
        pl = p_ell_table(params)
    elif isinstance(m, PairedFlip) and m.ell <= params.q:
        pl = point_mass(params, m.ell)
    else:
        pl = None
    mutation_only = conditioning == "mutation" or not ga or cfg.p_c == 0
    if conditioning in ("all", "mutation") and mutation_only and pl is not None:
        beta, gamma = beta_gamma(params, pl)
        return (1 - gamma) * S + beta, None
    if conditioning == "accepted" and mutation_only and pl is not None:
        beta, gamma = beta_gamma(params, pl)
        accept = float(np.sum(pl))
        return (S + (beta - gamma * S) / accept if accept > 0 else None), None
    # the crossover bound needs enough competing offspring
    uniform_std = (cfg.crossover == "uniform" and isinstance(m, StandardBit)
                   and cfg.lambda_c >= lambda_min(k, chi, mu))
    if conditioning == "crossover" and uniform_std:
        return None, crossover_drift_lower_bound(n, k, mu, chi, S)
    if conditioning == "all" and ga and uniform_std:
        return None, ga_drift_lower_bound(params, pl, S)
    return None, None


def one_step_drift(P: Population, cfg: AlgorithmConfig, N: int, conditioning: str = "all",
                   rng: Optional[np.random.Generator] = None) -> DriftReport:
    """Average S(P_{t+1}) over N independent generations started from P."""
    if conditioning not in CONDITIONINGS:
        raise UsageError(f"conditioning must be one of {CONDITIONINGS}, got {conditioning!r}")
    if N < 1000:
        raise UsageError(f"need N >= 1000 samples, got {N}")
    if P.mu != cfg.mu:
        raise UsageError(f"population has mu={P.mu}, config says mu={cfg.mu}")
    _plateau_k(P, cfg.fitness)
    ga = cfg.is_ga
    if conditioning == "crossover" and not ga:
        raise UsageError("crossover conditioning needs algorithm=ga")
    rng = np.random.default_rng() if rng is None else rng
    ki = kernel_inputs(cfg)
    mat = P.to_matrix()
    ones = mat.sum(axis=1, dtype=np.int64)
    out_s, accepted, _ = K.drift_kernel(
        mat, ones, ki.rank_of_ones, ki.fit_of_ones, _BRANCH[conditioning], ga, float(cfg.p_c),
        int(cfg.lambda_c if ga else 1), ki.mut_kind, ki.mut_p, ki.mut_cdf, ki.mut_int, ki.xo_kind,
        int(N), rng,
    )
    values = out_s[accepted.astype(bool)] if conditioning == "accepted" else out_s
    m = len(values)
    mean = float(values.mean()) if m else float("nan")
    stderr = float(values.std(ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
    predicted, lower = _predictions(P, cfg, conditioning, ga)
    return DriftReport(
        initial_S=P.diversity,
        samples=m,
        mean_next_S=mean,
        stderr=stderr,
        conditioning=conditioning,
        predicted=predicted,
        lower_bound=lower,
        accept_rate=float(accepted.mean()),
    )


# -- exact enumeration -------------------------------------------------------


@dataclass(frozen=True)
class CrossoverOp:
    """A crossover generation with a single offspring: c(x1, x2), then optional mutation."""

    kind: str = "uniform"
    mutation: Optional[MutationSpec] = None


Operator = Union[MutationSpec, CrossoverOp]


def _infer_fitness(P: Population, fitness: Optional[FitnessSpec]) -> FitnessSpec:
    if fitness is not None:
        return fitness
    zeros = {x.zeros_count for x in P}
    if len(zeros) != 1 or not 1 <= next(iter(zeros)) <= P.n:
        raise UsageError("pass a fitness spec unless all members share the same positive number of zeros")
    return FitnessSpec("jumpprime", P.n, k=zeros.pop())


def offspring_distribution(P: Population, operator: Operator, max_outcomes: int = 10**7) -> dict[BitString, Fraction]:
    mu = P.mu
    dist: dict[BitString, Fraction] = {}
    budget = 0

    def add(items, weight):
        for y, p in items:
            dist[y] = dist.get(y, 0) + weight * p

    if isinstance(operator, CrossoverOp):
        inter: dict[BitString, Fraction] = {}
        for a in P:
            for b in P:
                outs = crossover_outcomes(operator.kind, a, b)
                budget += len(outs)
                for y, p in outs:
                    inter[y] = inter.get(y, 0) + p / (mu * mu)
        if operator.mutation is None:
            return inter
        for y, w in inter.items():
            outs = mutation_outcomes(operator.mutation, y, max_outcomes)
            budget += len(outs)
            if budget > max_outcomes:
                raise UsageError(f"enumeration exceeds {max_outcomes} outcomes")
            add(outs, w)
        return dist
    for x in P:
        outs = mutation_outcomes(operator, x, max_outcomes)
        budget += len(outs)
        if budget > max_outcomes:
            raise UsageError(f"enumeration exceeds {max_outcomes} outcomes")
        add(outs, Fraction(1, mu))
    return dist


def enumerate_drift_exact(P: Population, operator: Operator, fitness: Optional[FitnessSpec] = None,
                          max_outcomes: int = 10**7) -> Fraction:
    """Exact E(S(P_{t+1})) for one generation with the given operator.

    The victim is uniform among minimum-fitness members and the offspring
    replaces it iff its fitness is not smaller.  Without an explicit fitness,
    Jump' with k equal to the members' common number of zeros is used.
    """
    fitness = _infer_fitness(P, fitness)
    S = P.diversity
    fit = [evaluate(fitness, x) for x in P]
    worst = min(fit)
    victims = [i for i, f in enumerate(fit) if f == worst]
    expected = Fraction(0)
    for y, p in offspring_distribution(P, operator, max_outcomes).items():
        if evaluate(fitness, y) < worst:
            expected += p * S
            continue
        sy = P.contribution(y)
        total = 0
        for d in victims:
            xd = P[d]
            total += S - 2 * P.contribution(xd) + 2 * sy - 2 * (y.value ^ xd.value).bit_count()
        expected += p * Fraction(total, len(victims))
    return expected


# -- fixture populations -------------------------------------------------------


def counterexample_population(n: int, k: int, mu: int) -> Population:
    """mu/4 copies of 0^r 1^(n-k) 0^(k-r) and 3mu/4 copies of 1^r 0^r 1^(n-k-r) 0^(k-r), r = sqrt(k)."""
    r = math.isqrt(k)
    if k < 1 or r * r != k:
        raise UsageError(f"k must be a positive perfect square, got {k}")
    if mu < 4 or mu % 4:
        raise UsageError(f"mu must be a positive multiple of 4, got {mu}")
    if not r <= k <= n - k - r:
        raise UsageError(f"layout needs sqrt(k) <= k <= n - k - sqrt(k), got n={n}, k={k}")
    a = BitString.from_str("0" * r + "1" * (n - k) + "0" * (k - r))
    b = BitString.from_str("1" * r + "0" * r + "1" * (n - k - r) + "0" * (k - r))
    return Population([a] * (mu // 4) + [b] * (3 * mu // 4))


def cluster_population(n: int, k: int, mu: int, rng: np.random.Generator, ell: int = 1) -> Population:
    """Low-diversity plateau population: one random centre, each member a copy or a paired-ell-flip of it."""
    centre = random_with_zeros(n, k, rng)
    op = PairedFlip(ell)
    return Population([centre if rng.random() < 0.5 else mutate(op, centre, rng) for _ in range(mu)])


@dataclass
class CounterexampleResult:
    n: int
    k: int
    mu: int
    diversity: int
    expected_diversity: int
    lambda_c: int
    single: DriftReport
    competing: DriftReport
    unconditioned: DriftReport

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("single", "competing", "unconditioned"):
            out[key] = getattr(self, key).to_dict()
        return out


def counterexample_drift(n: int, k: int, mu: int, chi: float, p_c: float, lambda_c: Optional[int], N: int,
                         rng: np.random.Generator) -> CounterexampleResult:
    """Crossover-conditioned drift on the two-cluster population for lambda_c = 1 and a large lambda_c.

    ``unconditioned`` is one ordinary generation at the given p_c with lambda_c = 1;
    at p_c = 0 it carries the mutation-only prediction.
    """
    P = counterexample_population(n, k, mu)
    if lambda_c is None:
        lambda_c = max(1, math.ceil(lambda_min(k, chi, mu)))
    base = AlgorithmConfig(FitnessSpec("jumpprime", n, k=k), mu=mu, algorithm="ga", p_c=p_c,
                           lambda_c=1, mutation=StandardBit(chi))
    single = one_step_drift(P, base, N, "crossover", rng)
    competing = one_step_drift(P, replace(base, lambda_c=lambda_c), N, "crossover", rng)
    unconditioned = one_step_drift(P, base, N, "all", rng)
    return CounterexampleResult(n, k, mu, P.diversity, 3 * math.isqrt(k) * mu * mu // 4, lambda_c,
                                single, competing, unconditioned)

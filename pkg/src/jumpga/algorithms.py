"""Steady-state (mu+1) EA and (mu+1)-lambda_c GA with exact evaluation accounting.

Two engines share one configuration type:

* ``step_ea`` / ``step_ga`` operate on :class:`RunState` with the BitString
  operators and serve as the readable reference;
* ``run`` drives the compiled kernel in :mod:`jumpga._kernels`, which is what
  experiments use.

Evaluation accounting: initialization costs mu evaluations, a mutation
generation costs 1 and a crossover generation costs lambda_c.  The run stops
at the evaluation that produces the optimum, so a crossover batch that hits
the optimum is cut short at that offspring.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _kernels as K
from .bitpop import BitString, Population, read_population
from .errors import UsageError
from .fitness import FitnessSpec, evaluate, fitness_table, optimum_ones, plateau_ones
from .rng import stream
from .variation import (
    CROSSOVERS,
    FixedRadius,
    MutationSpec,
    PairedFlip,
    StandardBit,
    crossover,
    mutate,
    mutation_to_dict,
)

ALGORITHMS = ("ea", "ga")
INITS = ("uniform", "plateau", "zeros", "fixture")
STOPS = ("optimum", "plateau", "never")


@dataclass(frozen=True)
class AlgorithmConfig:
    fitness: FitnessSpec
    mu: int
    algorithm: str = "ga"
    p_c: float = 0.0
    lambda_c: int = 1
    mutation: MutationSpec = field(default_factory=StandardBit)
    crossover: str = "uniform"
    init: str = "uniform"
    init_zeros: Optional[int] = None
    fixture: Optional[str] = None
    seed: int = 0
    budget: int = 10**7
    stop: str = "optimum"
    max_generations: Optional[int] = None
    trajectory_every: int = 0

    def __post_init__(self):
        n = self.fitness.n
        if self.mu < 1:
            raise UsageError(f"mu must be >= 1, got {self.mu}")
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0.0 <= self.p_c < 1.0:
            raise UsageError(f"p_c must lie in [0, 1), got {self.p_c}")
        if self.lambda_c < 1:
            raise UsageError(f"lambda_c must be >= 1, got {self.lambda_c}")
        if self.crossover not in CROSSOVERS:
            raise UsageError(f"crossover must be one of {CROSSOVERS}, got {self.crossover!r}")
        if self.init not in INITS:
            raise UsageError(f"init must be one of {INITS}, got {self.init!r}")
        if self.init == "plateau" and plateau_ones(self.fitness) is None:
            raise UsageError(f"plateau init needs a Jump family, not {self.fitness.family}")
        if self.init == "zeros" and (self.init_zeros is None or not 0 <= self.init_zeros <= n):
            raise UsageError(f"zeros init needs 0 <= init_zeros <= n, got {self.init_zeros}")
        if self.init == "fixture" and not self.fixture:
            raise UsageError("fixture init needs a fixture path")
        if self.stop not in STOPS:
            raise UsageError(f"stop must be one of {STOPS}, got {self.stop!r}")
        if self.stop == "plateau" and plateau_ones(self.fitness) is None:
            raise UsageError(f"stop=plateau needs a Jump family or OneMax, not {self.fitness.family}")
        if self.budget < 1:
            raise UsageError(f"budget must be positive, got {self.budget}")
        if self.seed < 0:
            raise UsageError(f"seed must be non-negative, got {self.seed}")
        if self.trajectory_every < 0:
            raise UsageError("trajectory_every must be >= 0")
        m = self.mutation
        if isinstance(m, StandardBit) and m.chi > n:
            raise UsageError(f"chi={m.chi} exceeds n={n}")
        if isinstance(m, FixedRadius) and m.r > n:
            raise UsageError(f"radius {m.r} exceeds n={n}")

    @property
    def is_ga(self) -> bool:
        return self.algorithm == "ga"

    def with_seed(self, seed: int) -> AlgorithmConfig:
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "fitness":
                out.update({f"fitness_{k}": val for k, val in v.to_dict().items()})
            elif f.name == "mutation":
                out.update(mutation_to_dict(v))
            elif v is not None:
                out[f.name] = v
        return out

    def config_hash(self) -> str:
        """Short digest of everything except the seed."""
        payload = {k: v for k, v in self.to_dict().items() if k != "seed"}
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def default_lambda_c(k: int, chi: float, mu: int, p_c: float) -> int:
    """ceil(max(6 sqrt(k) e^chi ln(mu), 1/p_c))."""
    if k < 1 or mu < 2:
        raise UsageError(f"need k >= 1 and mu >= 2, got k={k}, mu={mu}")
    if not 0 < p_c <= 1:
        raise UsageError(f"p_c must lie in (0, 1], got {p_c}")
    value = max(6 * math.sqrt(k) * math.exp(chi) * math.log(mu), 1 / p_c)
    return max(1, tolerant_ceil(value))


def tolerant_ceil(x: float, rel: float = 1e-12) -> int:
    """Ceiling that ignores rounding noise just above an integer."""
    r = round(x)
    if abs(x - r) <= rel * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


# -- records ---------------------------------------------------------------

CSV_COLUMNS = (
    "config_hash",
    "seed",
    "evaluations",
    "generations",
    "mutation_generations",
    "crossover_generations",
    "found_optimum",
    "timeout",
    "plateau_eval",
    "final_diversity",
    "best_fitness",
)


@dataclass
class TrialRecord:
    config_hash: str
    seed: int
    evaluations: int
    generations: int
    mutation_generations: int
    crossover_generations: int
    found_optimum: bool
    timeout: bool
    plateau_eval: Optional[int]
    final_diversity: int
    best_fitness: Fraction
    trajectory: Optional[list[int]] = None

    def csv_row(self) -> list:
        row = []
        for c in CSV_COLUMNS:
            v = getattr(self, c)
            if v is None:
                v = ""
            elif isinstance(v, bool):
                v = int(v)
            elif isinstance(v, Fraction):
                v = float(v)
            row.append(v)
        return row

    def to_dict(self) -> dict:
        out = {c: getattr(self, c) for c in CSV_COLUMNS}
        out["best_fitness"] = float(self.best_fitness)
        if self.trajectory is not None:
            out["trajectory"] = list(self.trajectory)
        return out


# -- initial populations ---------------------------------------------------


def initial_matrix(cfg: AlgorithmConfig, rng: np.random.Generator) -> np.ndarray:
    n, mu = cfg.fitness.n, cfg.mu
    if cfg.init == "uniform":
        return rng.integers(0, 2, size=(mu, n), dtype=np.uint8)
    if cfg.init == "fixture":
        pop = read_population(cfg.fixture)
        if pop.n != n or pop.mu != mu:
            raise UsageError(f"fixture has mu={pop.mu}, n={pop.n}; config expects mu={mu}, n={n}")
        return pop.to_matrix()
    zeros = n - plateau_ones(cfg.fitness) if cfg.init == "plateau" else cfg.init_zeros
    mat = np.ones((mu, n), dtype=np.uint8)
    if zeros:
        order = np.argsort(rng.random((mu, n)), axis=1)[:, :zeros]
        np.put_along_axis(mat, order, 0, axis=1)
    return mat


def _mutation_code(spec: MutationSpec, n: int) -> tuple[int, float, int]:
    if isinstance(spec, StandardBit):
        return K.MUT_STANDARD, spec.chi / n, 0
    if isinstance(spec, PairedFlip):
        return K.MUT_PAIRED, 0.0, spec.ell
    if isinstance(spec, FixedRadius):
        return K.MUT_RADIUS, 0.0, spec.r
    raise UsageError(f"unknown mutation spec {spec!r}")


_XO_CODES = {"uniform": K.XO_UNIFORM, "balanced": K.XO_BALANCED, "boring": K.XO_BORING}
_STOP_CODES = {"optimum": K.STOP_OPTIMUM, "plateau": K.STOP_PLATEAU, "never": K.STOP_NEVER}


def binomial_cdf(n: int, p: float) -> np.ndarray:
    """CDF of Bin(n, p) on 0..n, built in log space; the last entry is pinned to 1."""
    if p >= 1.0:
        cdf = np.zeros(n + 1)
    else:
        i = np.arange(n + 1)
        lg = np.array([math.lgamma(v + 1) for v in range(n + 1)])
        logpmf = lg[n] - lg - lg[::-1] + i * math.log(p) + (n - i) * math.log1p(-p)
        cdf = np.cumsum(np.exp(logpmf))
    cdf[-1] = 1.0
    return cdf


@dataclass
class KernelInputs:
    fit_of_ones: np.ndarray
    rank_of_ones: np.ndarray
    n_ranks: int
    mut_kind: int
    mut_p: float
    mut_cdf: np.ndarray
    mut_int: int
    xo_kind: int


def kernel_inputs(cfg: AlgorithmConfig) -> KernelInputs:
    fit = fitness_table(cfg.fitness)
    levels, rank = np.unique(fit, return_inverse=True)
    mk, mp, mi = _mutation_code(cfg.mutation, cfg.fitness.n)
    cdf = binomial_cdf(cfg.fitness.n, mp) if mk == K.MUT_STANDARD else np.ones(1)
    return KernelInputs(fit, rank.astype(np.int64), len(levels), mk, mp, cdf, mi, _XO_CODES[cfg.crossover])


@dataclass
class SimulationResult:
    record: TrialRecord
    population: np.ndarray
    window_sum: float
    window_above: int


def simulate(cfg: AlgorithmConfig, burn_in: int = 0, horizon: int = 0, threshold: int = 0,
             trajectory_capacity: int = 100_000) -> SimulationResult:
    """Kernel run returning the record plus window statistics over generations (burn_in, burn_in+horizon]."""
    mat = initial_matrix(cfg, stream(cfg.seed, 0, "init"))
    ones = mat.sum(axis=1, dtype=np.int64)
    ki = kernel_inputs(cfg)
    target = optimum_ones(cfg.fitness)
    plateau = plateau_ones(cfg.fitness)
    traj = np.zeros(trajectory_capacity if cfg.trajectory_every else 0, dtype=np.int64)
    max_gens = cfg.max_generations if cfg.max_generations is not None else np.iinfo(np.int64).max
    out = K.run_kernel(
        mat, ones, ki.rank_of_ones, ki.n_ranks, ki.fit_of_ones,
        cfg.is_ga, float(cfg.p_c), int(cfg.lambda_c if cfg.is_ga else 1),
        ki.mut_kind, ki.mut_p, ki.mut_cdf, ki.mut_int, ki.xo_kind,
        -1 if target is None else target, -1 if plateau is None else plateau,
        _STOP_CODES[cfg.stop], int(cfg.budget), int(max_gens),
        int(cfg.trajectory_every), traj, int(burn_in), int(horizon), int(threshold),
        stream(cfg.seed, 0, "run"),
    )
    evals, gens, mgen, xgen, plat, found, s, best, n_traj, sum_s, above = out
    stopped = bool(found) if cfg.stop == "optimum" else (cfg.stop == "plateau" and plat >= 0)
    record = TrialRecord(
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        evaluations=int(evals),
        generations=int(gens),
        mutation_generations=int(mgen),
        crossover_generations=int(xgen),
        found_optimum=bool(found),
        timeout=not stopped,
        plateau_eval=int(plat) if plat >= 0 else None,
        final_diversity=int(s),
        best_fitness=Fraction(int(best), cfg.fitness.scale),
        trajectory=[int(v) for v in traj[:n_traj]] if cfg.trajectory_every else None,
    )
    return SimulationResult(record, mat, float(sum_s), int(above))


# -- reference engine ------------------------------------------------------


@dataclass
class RunState:
    population: Population
    fitness: list[int]
    generation: int = 0
    evaluations: int = 0
    best_fitness: int = 0
    mutation_generations: int = 0
    crossover_generations: int = 0
    found_optimum: bool = False


def init_state(cfg: AlgorithmConfig, rng: Optional[np.random.Generator] = None) -> RunState:
    rng = stream(cfg.seed, 0, "init") if rng is None else rng
    pop = Population.from_matrix(initial_matrix(cfg, rng))
    fit = [evaluate(cfg.fitness, x) for x in pop]
    target = optimum_ones(cfg.fitness)
    return RunState(
        population=pop,
        fitness=fit,
        evaluations=cfg.mu,
        best_fitness=max(fit),
        found_optimum=target is not None and any(x.ones == target for x in pop),
    )


def _select(state: RunState, y: BitString, fy: int, rng: np.random.Generator) -> None:
    worst = min(state.fitness)
    if fy < worst:
        return
    candidates = [i for i, f in enumerate(state.fitness) if f == worst]
    victim = candidates[int(rng.integers(len(candidates)))]
    state.population.replace_inplace(y, victim)
    state.fitness[victim] = fy
    state.best_fitness = max(state.best_fitness, fy)


def _is_target(cfg: AlgorithmConfig, y: BitString) -> bool:
    target = optimum_ones(cfg.fitness)
    return target is not None and y.ones == target


def step_ea(state: RunState, cfg: AlgorithmConfig, rng: np.random.Generator) -> RunState:
    pop = state.population
    parent = pop[int(rng.integers(pop.mu))]
    y = mutate(cfg.mutation, parent, rng)
    fy = evaluate(cfg.fitness, y)
    state.evaluations += 1
    state.generation += 1
    state.mutation_generations += 1
    state.found_optimum |= _is_target(cfg, y)
    _select(state, y, fy, rng)
    return state


def step_ga(state: RunState, cfg: AlgorithmConfig, rng: np.random.Generator) -> RunState:
    if not rng.random() < cfg.p_c:
        return step_ea(state, cfg, rng)
    pop = state.population
    x1 = pop[int(rng.integers(pop.mu))]
    x2 = pop[int(rng.integers(pop.mu))]
    best, best_f, ties = None, None, 0
    for _ in range(cfg.lambda_c):
        y = mutate(cfg.mutation, crossover(cfg.crossover, x1, x2, rng), rng)
        fy = evaluate(cfg.fitness, y)
        state.evaluations += 1
        if best_f is None or fy > best_f:
            best, best_f, ties = y, fy, 1
        elif fy == best_f:
            ties += 1
            if rng.integers(ties) == 0:
                best = y
        if _is_target(cfg, y):
            state.found_optimum = True
            if cfg.stop == "optimum":
                break
    state.generation += 1
    state.crossover_generations += 1
    _select(state, best, best_f, rng)
    return state


def run_reference(cfg: AlgorithmConfig) -> TrialRecord:
    """Same semantics as :func:`run`, driven by the BitString operators (slow)."""
    state = init_state(cfg)
    rng = stream(cfg.seed, 0, "run")
    step = step_ga if cfg.is_ga else step_ea
    plateau = plateau_ones(cfg.fitness)

    def plateau_full():
        return plateau is not None and all(x.ones == plateau for x in state.population)

    plateau_eval = state.evaluations if plateau_full() else None
    trajectory = [] if cfg.trajectory_every else None
    max_gens = cfg.max_generations if cfg.max_generations is not None else math.inf

    def done():
        if cfg.stop == "optimum":
            return state.found_optimum
        return cfg.stop == "plateau" and plateau_eval is not None

    while not done() and state.evaluations < cfg.budget and state.generation < max_gens:
        step(state, cfg, rng)
        if plateau_eval is None and plateau_full():
            plateau_eval = state.evaluations
        if cfg.trajectory_every and state.generation % cfg.trajectory_every == 0:
            trajectory.append(state.population.diversity)
    stopped = state.found_optimum if cfg.stop == "optimum" else (cfg.stop == "plateau" and plateau_eval is not None)
    return TrialRecord(
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        evaluations=state.evaluations,
        generations=state.generation,
        mutation_generations=state.mutation_generations,
        crossover_generations=state.crossover_generations,
        found_optimum=state.found_optimum,
        timeout=not stopped,
        plateau_eval=plateau_eval,
        final_diversity=state.population.diversity,
        best_fitness=Fraction(state.best_fitness, cfg.fitness.scale),
        trajectory=trajectory,
    )


def run(cfg: AlgorithmConfig) -> TrialRecord:
    return simulate(cfg).record

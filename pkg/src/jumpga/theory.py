"""Closed-form drift, equilibrium and runtime quantities for plateau populations.

Notation: a plateau string has exactly k zeros; ``p_ell`` is the probability
that standard bit mutation (rate chi/n) flips exactly ell ones and ell zeros
of it, i.e. moves it to another plateau point at distance 2*ell.  Most
functions accept the p_ell vector explicitly so that the same formulas can be
evaluated for other operators, e.g. a paired flip with p_ell = 1 at one ell.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .algorithms import default_lambda_c, tolerant_ceil
from .errors import NoEquilibriumError, UsageError

EXACT_BINOM_LIMIT = 64


@dataclass(frozen=True)
class PlateauParams:
    n: int
    k: int
    mu: int
    chi: float = 1.0
    p_c: float = 0.0

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise UsageError(f"need 1 <= k < n, got n={self.n}, k={self.k}")
        if self.mu < 2:
            raise UsageError(f"need mu >= 2, got {self.mu}")
        if not 0 < self.chi <= self.n:
            raise UsageError(f"need 0 < chi <= n, got chi={self.chi}")
        if not 0 <= self.p_c < 1:
            raise UsageError(f"need 0 <= p_c < 1, got {self.p_c}")

    @property
    def q(self) -> int:
        return min(self.k, self.n - self.k)


# -- binomials -------------------------------------------------------------


def log_binom(n: int, k: int) -> float:
    if not 0 <= k <= n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom(n: int, k: int) -> float:
    """C(n, k) as a float: exact big-integer path for n <= 64, log-gamma beyond."""
    if not 0 <= k <= n:
        return 0.0
    if n <= EXACT_BINOM_LIMIT:
        return float(math.comb(n, k))
    return math.exp(log_binom(n, k))


# -- p_ell -----------------------------------------------------------------


def p_ell(params: PlateauParams, ell: int) -> float:
    n, k, chi = params.n, params.k, params.chi
    if not 0 <= ell <= params.q:
        raise UsageError(f"ell must lie in 0..{params.q}, got {ell}")
    p = chi / n
    stay = n - 2 * ell
    if p == 1.0:
        # every bit flips: only the full swap ell = k = n - k survives
        return float(math.comb(k, ell) * math.comb(n - k, ell)) if stay == 0 else 0.0
    log_p = log_binom(k, ell) + log_binom(n - k, ell) + 2 * ell * math.log(p) + stay * math.log1p(-p)
    return math.exp(log_p)


def p_ell_exact(n: int, k: int, chi: Fraction | int, ell: int) -> Fraction:
    p = Fraction(chi) / n
    return math.comb(k, ell) * math.comb(n - k, ell) * p ** (2 * ell) * (1 - p) ** (n - 2 * ell)


def p_ell_table(params: PlateauParams) -> np.ndarray:
    return np.array([p_ell(params, ell) for ell in range(params.q + 1)])


def point_mass(params: PlateauParams, ell: int) -> np.ndarray:
    """p_ell vector of the paired-flip operator that always flips ell ones and ell zeros."""
    if not 0 <= ell <= params.q:
        raise UsageError(f"ell must lie in 0..{params.q}, got {ell}")
    out = np.zeros(params.q + 1)
    out[ell] = 1.0
    return out


def _sums(params: PlateauParams, pl: Sequence[float]) -> tuple[float, float]:
    pl = np.asarray(pl, dtype=float)
    if pl.ndim != 1 or len(pl) > params.q + 1:
        raise UsageError(f"p_ell must have at most q+1 = {params.q + 1} entries")
    ells = np.arange(len(pl))
    return float(pl.sum()), float((ells * pl).sum())


# -- mutation-only drift ---------------------------------------------------


def beta_gamma(params: PlateauParams, pl: Sequence[float]) -> tuple[float, float]:
    n, k, mu = params.n, params.k, params.mu
    pl = np.asarray(pl, dtype=float)
    ells = np.arange(len(pl))
    beta = 4 * (mu - 1) * float((ells * pl).sum())
    gamma = float((pl * (2 / mu**2 + 2 * (mu - 1) * ells * n / (mu**2 * k * (n - k)))).sum())
    return beta, gamma


def ea_drift(params: PlateauParams, pl: Sequence[float], S: float) -> float:
    """Expected S(P_{t+1}) given S(P_t) = S for the (mu+1) EA on a plateau population."""
    if S < 0:
        raise UsageError(f"S must be non-negative, got {S}")
    beta, gamma = beta_gamma(params, pl)
    return (1 - gamma) * S + beta


def equilibrium_s0(params: PlateauParams, pl: Sequence[float], initial_S: Optional[float] = None) -> float:
    """beta/gamma; when no mass sits on ell >= 1 the diversity never moves up and S0 = S(P_0)."""
    pl = np.asarray(pl, dtype=float)
    if not np.any(pl[1:] > 0):
        if initial_S is not None:
            return float(initial_S)
        raise NoEquilibriumError("p_ell vanishes for all ell >= 1; S0 is the initial diversity")
    beta, gamma = beta_gamma(params, pl)
    return beta / gamma


def equilibrium_s0_asymptotic(params: PlateauParams, xi: float = 0.0) -> float:
    n, k, mu, chi = params.n, params.k, params.mu, params.chi
    return 2 * mu**2 * k * (n - k) / n / (n / ((mu - 1) * chi**2) * (1 + xi) + 1)


# -- GA drift --------------------------------------------------------------


def c1_c2(params: PlateauParams, pl: Sequence[float]) -> tuple[float, float]:
    total, weighted = _sums(params, pl)
    return total, params.n / params.k * weighted


def alpha_delta(params: PlateauParams, pl: Sequence[float]) -> tuple[float, float]:
    """Coefficients of the GA drift lower bound E(S') >= (1 - delta) S + alpha.

    alpha mixes the mutation term beta = 4(mu-1) sum ell p_ell with the
    crossover loss 9 k mu chi / n, so that p_c = 0 gives alpha = beta, delta = gamma.
    """
    n, k, mu, chi, pc = params.n, params.k, params.mu, params.chi, params.p_c
    pl = np.asarray(pl, dtype=float)
    ells = np.arange(len(pl))
    beta = 4 * (mu - 1) * float((ells * pl).sum())
    alpha = (1 - pc) * beta - 9 * pc * k * mu * chi / n
    delta = (3 * pc + (2 - 2 * pc) * float((pl * (1 + (mu - 1) * ells * n / (k * (n - k)))).sum())) / mu**2
    return alpha, delta


def alpha_as_printed(params: PlateauParams, pl: Sequence[float]) -> float:
    """Variant of alpha with 4*mu in place of 4*(mu-1) in the mutation term."""
    n, k, mu, chi, pc = params.n, params.k, params.mu, params.chi, params.p_c
    _, weighted = _sums(params, pl)
    return (1 - pc) * 4 * mu * weighted - 9 * pc * k * mu * chi / n


def ga_drift_lower_bound(params: PlateauParams, pl: Sequence[float], S: float) -> float:
    alpha, delta = alpha_delta(params, pl)
    return (1 - delta) * S + alpha


def alpha_delta_bound(params: PlateauParams, pl: Sequence[float]) -> float:
    """Closed-form lower bound on alpha/delta in terms of C1 and C2."""
    n, k, mu, chi, pc = params.n, params.k, params.mu, params.chi, params.p_c
    c1, c2 = c1_c2(params, pl)
    if c2 == 0:
        return -math.inf
    return 2 * k * mu**2 * (
        1 - pc * (c2 + 9 * chi / 4) / c2 - k / (n - k) - n / (mu - 1) * (2 * c1 + 3 * pc) / (2 * c2)
    )


def crossover_drift_lower_bound(n: int, k: int, mu: int, chi: float, S: float) -> float:
    """Lower bound on E(S(P_{t+1})) after a crossover generation with enough competing offspring."""
    return (1 - 3 / mu**2) * S - 9 * k * mu * chi / n


def tau0(eps: float, delta: float) -> int:
    if not 0 < eps < 1:
        raise UsageError(f"eps must lie in (0, 1), got {eps}")
    if not delta > 0:
        raise UsageError(f"delta must be positive, got {delta}")
    return tolerant_ceil(-math.log(eps) / delta)


# -- probabilities used by the runtime bounds -------------------------------


@dataclass(frozen=True)
class PlateauHitBound:
    binomial: float
    simplified: float
    holds: bool
    threshold_n: int


def plateau_bound_threshold(k: int, chi: float) -> int:
    """Smallest n >= 2k (and > chi) from which C(2k,k) 4^-k (1-chi/n)^n >= e^-chi / (3 sqrt k) holds for all larger n.

    (1-chi/n)^n increases with n, so the first n where the inequality holds is
    a threshold for all larger n as well.
    """
    n = max(2 * k, math.floor(chi) + 1)
    central = _central(k)
    target = math.exp(-chi) / (3 * math.sqrt(k))
    while central * (1 - chi / n) ** n < target:
        n += 1
    return n


def _central(k: int) -> float:
    if 2 * k <= EXACT_BINOM_LIMIT:
        return math.comb(2 * k, k) / 4**k
    return math.exp(log_binom(2 * k, k) - k * math.log(4))


def pr_plateau_lower_bound(k: int, chi: float, n: int) -> PlateauHitBound:
    """Probability bound for a crossover of two complementary-zero plateau parents staying on the plateau."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if not 0 < chi <= n:
        raise UsageError(f"need 0 < chi <= n, got chi={chi}, n={n}")
    binomial = _central(k) * (1 - chi / n) ** n
    simplified = math.exp(-chi) / (3 * math.sqrt(k))
    return PlateauHitBound(binomial, simplified, binomial >= simplified, plateau_bound_threshold(k, chi))


def opt_hit_bound(n: int, k: int, d: int) -> float:
    """Upper bound on the probability that crossover+mutation of two plateau parents at distance 2d gives 1^n."""
    if not 0 <= d <= k <= n or k + d > n:
        raise UsageError(f"need 0 <= d <= k <= n and k + d <= n, got n={n}, k={k}, d={d}")
    if n <= EXACT_BINOM_LIMIT:
        total = sum(Fraction(math.comb(2 * d, i), math.comb(n, k + d - i)) for i in range(2 * d + 1))
        return float(total / 4**d)
    terms = [log_binom(2 * d, i) - log_binom(n, k + d - i) for i in range(2 * d + 1)]
    top = max(terms)
    return math.exp(top - d * math.log(4)) * sum(math.exp(t - top) for t in terms)


def lower_bound_runtime(n: int, k: int, p_c: float, C: float = 1.0) -> float:
    if not 0 < p_c < 1:
        raise UsageError(f"p_c must lie in (0, 1), got {p_c}")
    if not C > 0:
        raise UsageError(f"C must be positive, got {C}")
    return 0.5 * min(binom(n, k) / (1 - p_c), C * 4.0**k / p_c)


@dataclass(frozen=True)
class JumpOffsetSuccess:
    single_term: float
    full_sum: float


def jump_offset_success(k: int, delta: int) -> JumpOffsetSuccess:
    """Probability that uniform crossover of parents at distance 2k gains at least delta ones over the plateau."""
    if not 1 <= delta <= k:
        raise UsageError(f"need 1 <= delta <= k, got k={k}, delta={delta}")
    denom = 4**k
    single = Fraction(math.comb(2 * k, k + delta), denom)
    full = Fraction(sum(math.comb(2 * k, k + delta + i) for i in range(k - delta + 1)), denom)
    return JumpOffsetSuccess(float(single), float(full))


# -- hypotheses of the runtime theorems -------------------------------------


@dataclass(frozen=True)
class PreconditionFlags:
    eps: float
    eps_in_range: bool
    pc_bound: bool
    pc_bound_corollary: bool
    mu_bound: bool
    k_bound: bool
    lambda_bound: Optional[bool]
    special_eps: float
    special_pc_bound: bool
    special_mu_bound: bool
    special_k_bound: bool
    special_floor_8epsk_zero: bool
    values: dict = field(default_factory=dict)

    @property
    def general_ok(self) -> bool:
        checks = [self.eps_in_range, self.pc_bound, self.mu_bound, self.k_bound]
        return all(checks) and self.lambda_bound is not False

    @property
    def special_ok(self) -> bool:
        checks = [self.special_pc_bound, self.special_mu_bound, self.special_k_bound]
        return all(checks) and self.lambda_bound is not False

    def violations(self) -> list[str]:
        names = ["eps_in_range", "pc_bound", "mu_bound", "k_bound", "lambda_bound"]
        return [nm for nm in names if getattr(self, nm) is False]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["general_ok"] = self.general_ok
        out["special_ok"] = self.special_ok
        return out


def pc_max(params: PlateauParams, eps: float, pl: Optional[Sequence[float]] = None) -> tuple[float, float]:
    """Largest p_c allowed by the runtime theorem and by the equilibrium corollary at this eps."""
    pl = p_ell_table(params) if pl is None else pl
    _, c2 = c1_c2(params, pl)
    chi = params.chi
    theorem = eps / 3 * 2 * c2 / (2 * c2 + 9 * chi / 4)
    corollary = eps / 3 * c2 / (c2 + 9 * chi / 4)
    return theorem, corollary


def mu_min(params: PlateauParams, eps: float, pl: Optional[Sequence[float]] = None) -> float:
    pl = p_ell_table(params) if pl is None else pl
    c1, c2 = c1_c2(params, pl)
    return 1 + 3 * params.n / eps * (2 * c1 + 3 * params.p_c) / (2 * c2)


def lambda_min(k: int, chi: float, mu: int) -> float:
    return 6 * math.sqrt(k) * math.exp(chi) * math.log(mu)


def check_preconditions(params: PlateauParams, eps: float, lambda_c: Optional[int] = None) -> PreconditionFlags:
    n, k, mu, chi, pc = params.n, params.k, params.mu, params.chi, params.p_c
    if not eps > 0:
        raise UsageError(f"eps must be positive, got {eps}")
    pl = p_ell_table(params)
    c1, c2 = c1_c2(params, pl)
    pc_thm, pc_cor = pc_max(params, eps, pl)
    mu_need = mu_min(params, eps, pl)
    lam_need = lambda_min(k, chi, mu)
    special = 1 / (16 * k)
    pc_special = special / 3 * 2 * c2 / (2 * c2 + 9 * chi / 4)
    mu_special = 1 + 48 * k * n * (2 * c1 + 3 * pc) / (2 * c2)
    return PreconditionFlags(
        eps=eps,
        eps_in_range=0 < eps < 0.25,
        pc_bound=pc <= pc_thm,
        pc_bound_corollary=pc <= pc_cor,
        mu_bound=mu >= mu_need,
        k_bound=k <= (n - k) * eps / 3,
        lambda_bound=None if lambda_c is None else lambda_c >= lam_need,
        special_eps=special,
        special_pc_bound=pc <= pc_special,
        special_mu_bound=mu >= mu_special,
        special_k_bound=k * k <= (n - k) / 48,
        special_floor_8epsk_zero=math.floor(8 * special * k) == 0,
        values={
            "C1": c1,
            "C2": c2,
            "pc_max_theorem": pc_thm,
            "pc_max_corollary": pc_cor,
            "mu_min": mu_need,
            "k_max": (n - k) * eps / 3,
            "lambda_min": lam_need,
            "pc_max_special": pc_special,
            "mu_min_special": mu_special,
        },
    )


@dataclass(frozen=True)
class SearchResult:
    n: int
    k: int
    chi: float
    eps: float
    p_c: float
    mu: int
    lambda_c: int
    flags: PreconditionFlags

    @property
    def params(self) -> PlateauParams:
        return PlateauParams(self.n, self.k, self.mu, self.chi, self.p_c)


def constructive_search(n: int, k: int, chi: float, eps: float) -> SearchResult:
    """Pick p_c at the largest value satisfying both p_c bounds, the smallest admissible mu, and the default lambda_c.

    The flags are returned as computed; in particular k <= (n-k) eps / 3 is a
    property of (n, k, eps) alone and is not forced.
    """
    probe = PlateauParams(n, k, 2, chi, 0.0)
    pl = p_ell_table(probe)
    pc = min(pc_max(probe, eps, pl))
    mu = max(2, math.ceil(mu_min(PlateauParams(n, k, 2, chi, pc), eps, pl)))
    lam = default_lambda_c(k, chi, mu, pc)
    params = PlateauParams(n, k, mu, chi, pc)
    return SearchResult(n, k, chi, eps, pc, mu, lam, check_preconditions(params, eps, lam))


# -- full report -------------------------------------------------------------


@dataclass
class TheoryReport:
    params: dict
    eps: float
    p_ell: list[float]
    beta: float
    gamma: float
    S0: float
    S0_asymptotic: float
    C1: float
    C2: float
    alpha: float
    alpha_as_printed: float
    delta: float
    alpha_over_delta: float
    alpha_over_delta_bound: float
    tau0: int
    pr_plateau_lb: dict
    lambda_c_default: Optional[int]
    precondition_flags: dict
    opt_hit_bound: list[float]
    jump_offset_success: list[dict]
    lower_bound_runtime: Optional[float]
    max_plateau_diversity_bound: int

    def to_dict(self) -> dict:
        return asdict(self)


def theory_report(params: PlateauParams, eps: float, lambda_c: Optional[int] = None, C: float = 1.0) -> TheoryReport:
    n, k, mu, chi, pc = params.n, params.k, params.mu, params.chi, params.p_c
    pl = p_ell_table(params)
    beta, gamma = beta_gamma(params, pl)
    c1, c2 = c1_c2(params, pl)
    alpha, delta = alpha_delta(params, pl)
    lam_default = default_lambda_c(k, chi, mu, pc) if pc > 0 else None
    lam = lambda_c if lambda_c is not None else lam_default
    plb = pr_plateau_lower_bound(k, chi, n)
    return TheoryReport(
        params=asdict(params) | {"q": params.q},
        eps=eps,
        p_ell=[float(v) for v in pl],
        beta=beta,
        gamma=gamma,
        S0=equilibrium_s0(params, pl),
        S0_asymptotic=equilibrium_s0_asymptotic(params),
        C1=c1,
        C2=c2,
        alpha=alpha,
        alpha_as_printed=alpha_as_printed(params, pl),
        delta=delta,
        alpha_over_delta=alpha / delta,
        alpha_over_delta_bound=alpha_delta_bound(params, pl),
        tau0=tau0(eps, delta) if 0 < eps < 1 else -1,
        pr_plateau_lb=asdict(plb),
        lambda_c_default=lam_default,
        precondition_flags=check_preconditions(params, eps, lam).to_dict(),
        opt_hit_bound=[opt_hit_bound(n, k, d) for d in range(params.q + 1) if k + d <= n],
        jump_offset_success=[asdict(jump_offset_success(k, dl)) | {"delta": dl} for dl in range(1, k + 1)],
        lower_bound_runtime=lower_bound_runtime(n, k, pc, C) if pc > 0 else None,
        max_plateau_diversity_bound=2 * k * mu * (mu - 1),
    )

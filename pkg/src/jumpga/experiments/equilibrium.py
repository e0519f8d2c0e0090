"""Long plateau runs on Jump': time-averaged diversity and threshold occupancy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from ..algorithms import AlgorithmConfig, initial_matrix, simulate
from ..errors import UsageError
from ..rng import stream
from ..theory import PlateauParams, alpha_delta, equilibrium_s0, p_ell_table
from ..variation import StandardBit

_NO_LIMIT = np.iinfo(np.int64).max


@dataclass
class EquilibriumReport:
    burn_in: int
    horizon: int
    time_avg_S: float
    fraction_above_threshold: float
    generations_above: int
    threshold: int
    eps: float
    final_S: int
    predicted: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def diversity_threshold(k: int, mu: int, eps: float) -> int:
    """Smallest integer S with S >= (1 - 4 eps) 2 k mu^2."""
    return max(0, math.ceil((1 - 4 * eps) * 2 * k * mu * mu - 1e-9))


def predicted_level(cfg: AlgorithmConfig) -> Optional[float]:
    """beta/gamma for the EA, the alpha/delta lower bound for the GA (standard bit mutation only)."""
    f = cfg.fitness
    if cfg.mu < 2 or not isinstance(cfg.mutation, StandardBit) or f.k >= f.n:
        return None
    params = PlateauParams(f.n, f.k, cfg.mu, cfg.mutation.chi, cfg.p_c if cfg.is_ga else 0.0)
    pl = p_ell_table(params)
    if cfg.is_ga and cfg.p_c > 0:
        alpha, delta = alpha_delta(params, pl)
        return alpha / delta
    return equilibrium_s0(params, pl)


def equilibrium_run(cfg: AlgorithmConfig, burn_in: int, horizon: int, eps: float,
                    threshold: Optional[int] = None) -> EquilibriumReport:
    """Run for burn_in + horizon generations; statistics cover generations burn_in+1 .. burn_in+horizon."""
    f = cfg.fitness
    if f.family != "jumpprime":
        raise UsageError(f"equilibrium runs use Jump', not {f.family}")
    if cfg.init not in ("plateau", "fixture"):
        raise UsageError("equilibrium runs start from a plateau population (init=plateau or a plateau fixture)")
    if cfg.init == "fixture":
        mat = initial_matrix(cfg, stream(cfg.seed, 0, "init"))
        if np.any(mat.shape[1] - mat.sum(axis=1) != f.k):
            raise UsageError("fixture population is not on the plateau")
    if burn_in < 0 or horizon < 1:
        raise UsageError(f"need burn_in >= 0 and horizon >= 1, got {burn_in}, {horizon}")
    if threshold is None:
        threshold = diversity_threshold(f.k, cfg.mu, eps)
    run_cfg = replace(cfg, stop="never", budget=_NO_LIMIT, max_generations=burn_in + horizon)
    res = simulate(run_cfg, burn_in=burn_in, horizon=horizon, threshold=threshold)
    window = min(horizon, max(0, res.record.generations - burn_in))
    return EquilibriumReport(
        burn_in=burn_in,
        horizon=horizon,
        time_avg_S=res.window_sum / window if window else float("nan"),
        fraction_above_threshold=res.window_above / window if window else float("nan"),
        generations_above=res.window_above,
        threshold=threshold,
        eps=eps,
        final_S=res.record.final_diversity,
        predicted=predicted_level(cfg),
    )

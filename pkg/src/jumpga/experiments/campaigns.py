"""Seeded runtime campaigns: repeated runs with summary statistics and CSV output."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..algorithms import CSV_COLUMNS, AlgorithmConfig, TrialRecord, run
from ..errors import UsageError
from ..fitness import FitnessSpec
from ..rng import derive_seed
from .parallel import map_replicates


@dataclass
class Summary:
    count: int
    median: float
    mean: float
    q25: float
    q75: float

    @classmethod
    def of(cls, values: Sequence[float]) -> Optional["Summary"]:
        if len(values) == 0:
            return None
        v = np.asarray(values, dtype=float)
        return cls(len(v), float(np.median(v)), float(v.mean()), float(np.quantile(v, 0.25)),
                   float(np.quantile(v, 0.75)))


@dataclass
class CampaignResult:
    config: AlgorithmConfig
    master_seed: int
    records: list[TrialRecord]

    @property
    def repetitions(self) -> int:
        return len(self.records)

    @property
    def successes(self) -> int:
        return sum(not r.timeout for r in self.records)

    @property
    def success_rate(self) -> float:
        return self.successes / self.repetitions

    def evaluations(self) -> Summary:
        """Over all runs; a timed-out run contributes the evaluations it used, i.e. a censored value."""
        return Summary.of([r.evaluations for r in self.records])

    def plateau(self) -> Optional[Summary]:
        return Summary.of([r.plateau_eval for r in self.records if r.plateau_eval is not None])

    def post_plateau(self) -> Optional[Summary]:
        return Summary.of([r.evaluations - r.plateau_eval for r in self.records
                           if r.plateau_eval is not None and r.found_optimum])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", *CSV_COLUMNS])
            for i, r in enumerate(self.records):
                w.writerow([i, *r.csv_row()])

    def summary(self) -> dict:
        ev, pl, post = self.evaluations(), self.plateau(), self.post_plateau()
        return {
            "config_hash": self.config.config_hash(),
            "master_seed": self.master_seed,
            "repetitions": self.repetitions,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "timeouts": self.repetitions - self.successes,
            "evaluations": asdict(ev) if ev else None,
            "plateau_evaluations": asdict(pl) if pl else None,
            "post_plateau_evaluations": asdict(post) if post else None,
        }


def runtime_campaign(cfg: AlgorithmConfig, repetitions: int, master_seed: Optional[int] = None,
                     threads: Optional[int] = 1) -> CampaignResult:
    """Replicate i runs with seed derive_seed(master_seed, i); master_seed defaults to cfg.seed."""
    if repetitions < 1:
        raise UsageError(f"repetitions must be >= 1, got {repetitions}")
    master = cfg.seed if master_seed is None else master_seed
    records = map_replicates(lambda i: run(cfg.with_seed(derive_seed(master, i))), repetitions, threads)
    return CampaignResult(cfg, master, records)


def hurdle_campaign(n: int, w: int, cfg: AlgorithmConfig, repetitions: int, start: str = "uniform",
                    master_seed: Optional[int] = None, threads: Optional[int] = 1) -> CampaignResult:
    """Runtime campaign on Hurdle(n, w).

    ``start="uniform"`` draws the initial population uniformly at random;
    ``start="few-zeros"`` gives every member exactly floor(sqrt(n)/7) zeros,
    the start condition of the Hurdle runtime theorem.
    """
    if start == "uniform":
        init = {"init": "uniform", "init_zeros": None}
    elif start == "few-zeros":
        init = {"init": "zeros", "init_zeros": math.isqrt(n) // 7}
    else:
        raise UsageError(f"start must be 'uniform' or 'few-zeros', got {start!r}")
    hcfg = replace(cfg, fitness=FitnessSpec("hurdle", n, w=w), stop="optimum", fixture=None, **init)
    return runtime_campaign(hcfg, repetitions, master_seed, threads)


def median_ratios(medians: Sequence[float]) -> list[float]:
    return [b / a for a, b in zip(medians, medians[1:])]

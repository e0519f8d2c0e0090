"""Command-line front end: ``jumpga <subcommand> [--config FILE] [flags]``.

Config files are flat ``key = value`` text.  Keys are flag names without
the leading dashes (``lambda-c`` and ``lambda_c`` are the same key), ``#``
starts a comment, blank lines are ignored and list values are
comma-separated.  Flags given on the command line override file values.
Unknown keys and unknown flags are errors (exit code 2).

Every subcommand logs its fully resolved configuration in the same grammar,
so saving that block and passing it back with ``--config`` reproduces the
run exactly.

Exit codes: 0 success, 1 I/O or internal error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .algorithms import AlgorithmConfig, default_lambda_c
from .bitpop import BitString, Population, random_plateau_population, read_population
from .errors import UsageError
from .experiments import (
    CrossoverOp,
    counterexample_drift,
    counterexample_population,
    cluster_population,
    diversity_threshold,
    enumerate_drift_exact,
    equilibrium_run,
    exact_opt_hit,
    map_replicates,
    mc_jump_offset_success,
    mc_opt_hit,
    one_step_drift,
    runtime_campaign,
)
from .experiments.drift import CONDITIONINGS
from .experiments.parallel import default_threads
from .fitness import FAMILIES, JUMP_FAMILIES, FitnessSpec
from .rng import derive_seed, random_seed, stream
from .theory import (
    PlateauParams,
    check_preconditions,
    constructive_search,
    jump_offset_success,
    opt_hit_bound,
    theory_report,
)
from .variation import CROSSOVERS, FixedRadius, PairedFlip, StandardBit

log = logging.getLogger("jumpga")

MUTATIONS = ("standard", "paired", "radius")


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    """Integers, also written as 1e6 or 10**6."""
    t = str(text).strip()
    if "**" in t:
        base, exp = t.split("**", 1)
        return int(base) ** int(exp)
    try:
        return int(t)
    except ValueError:
        v = float(t)
        if not v.is_integer():
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        return int(v)


def _float(text: str) -> float:
    """Floats, also written as fractions like 1/64."""
    t = str(text).strip()
    try:
        return float(Fraction(t)) if "/" in t else float(t)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")


def _ints(text: str) -> list[int]:
    return [_int(p) for p in str(text).split(",") if p.strip()]


def _strs(text: str) -> list[str]:
    return [p.strip() for p in str(text).split(",") if p.strip()]


@dataclass(frozen=True)
class Opt:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    choices: Optional[Sequence[str]] = None

    @property
    def key(self) -> str:
        return self.name.replace("-", "_")


COMMON = [
    Opt("seed", _int, None, "master seed; a random one is drawn and logged when omitted"),
    Opt("threads", _int, None, "replicate worker threads (default: available CPUs); results do not depend on it"),
    Opt("csv", str, None, "write per-replicate rows to this CSV file"),
    Opt("json", str, None, "also write the JSON summary to this file"),
]

MODEL = [
    Opt("n", _int, None, "string length"),
    Opt("k", _int, None, "jump width / number of zeros on the plateau"),
    Opt("mu", _int, None, "population size"),
    Opt("chi", _float, 1.0, "standard bit mutation rate chi/n"),
    Opt("pc", _float, 0.0, "crossover probability p_c in [0, 1)"),
    Opt("lambda-c", _int, None, "competing crossover offspring (default: ceil(max(6 sqrt(k) e^chi ln mu, 1/p_c)))"),
]

VARIATION = [
    Opt("algorithm", str, "ga", "ea or ga", ("ea", "ga")),
    Opt("mutation", str, "standard", "mutation operator", MUTATIONS),
    Opt("ell", _int, 1, "pairs flipped by paired mutation"),
    Opt("radius", _int, 1, "bits flipped by fixed-radius mutation"),
    Opt("crossover", str, "uniform", "crossover operator", CROSSOVERS),
]

SPECS: dict[str, tuple[str, list[Opt]]] = {
    "predict": ("every closed-form quantity for one parameter set, as JSON", [
        *MODEL,
        Opt("eps", _float, None, "epsilon of the equilibrium bounds (default 1/(16k))"),
        Opt("C", _float, 1.0, "constant of the runtime lower bound"),
        Opt("search", _bool, False, "pick p_c, mu and lambda_c by the constructive search at eps"),
    ]),
    "drift": ("Monte Carlo one-step diversity drift from a plateau population", [
        *MODEL, *VARIATION,
        Opt("samples", _int, 10**5, "independent generations N (>= 1000)"),
        Opt("conditioning", str, "all", "generation type to sample", CONDITIONINGS),
        Opt("population", str, "random", "random, cluster, counterexample, or a population file path"),
        Opt("members", _strs, None, "comma-separated member strings; overrides population"),
        Opt("exact", _bool, False, "also compute the exact expectation by enumeration (tiny instances)"),
    ]),
    "equilibrium": ("long plateau runs on Jump': time-averaged diversity and threshold occupancy", [
        *MODEL, *VARIATION,
        Opt("eps", _float, 0.0125, "threshold (1 - 4 eps) 2 k mu^2"),
        Opt("burn-in", _int, 10**5, "generations before the statistics window"),
        Opt("horizon", _int, 10**6, "generations in the statistics window"),
        Opt("trials", _int, 1, "independent runs"),
        Opt("tolerance", _float, 0.05, "relative band for the time average around the predicted level"),
    ]),
    "runtime": ("seeded runtime campaign", [
        Opt("family", str, "jump", "fitness family", FAMILIES),
        *MODEL,
        Opt("w", _int, None, "Hurdle width"),
        Opt("delta", _int, None, "JumpOffset offset"),
        *VARIATION,
        Opt("init", str, "uniform", "uniform, plateau, zeros or fixture", ("uniform", "plateau", "zeros", "fixture")),
        Opt("init-zeros", _int, None, "zeros per member for init=zeros"),
        Opt("fixture", str, None, "population file for init=fixture"),
        Opt("budget", _int, 10**7, "evaluation budget per run"),
        Opt("stop", str, "optimum", "stop condition", ("optimum", "plateau", "never")),
        Opt("repetitions", _int, 20, "seeded runs"),
        Opt("eps", _float, None, "check the runtime-theorem hypotheses at this eps"),
        Opt("strict", _bool, False, "with eps: refuse to run when a hypothesis is violated"),
    ]),
    "counterexample": ("crossover drift on the two-cluster population for lambda_c = 1 and a large lambda_c", [
        *MODEL,
        Opt("samples", _int, 10**5, "independent generations N per report"),
    ]),
    "hitprob": ("probability that one crossover of two plateau parents reaches the optimum", [
        Opt("n", _int, None, "string length"),
        Opt("k", _int, None, "zeros per parent"),
        Opt("chi", _float, 1.0, "mutation rate chi/n"),
        Opt("d", _ints, None, "half Hamming distances of the parent pairs (default 0..k)"),
        Opt("samples", _int, 10**6, "Monte Carlo samples N"),
        Opt("deltas", _ints, None, "also check the JumpOffset success probability for these offsets"),
    ]),
}

REQUIRED = {
    "predict": ("n", "k", "mu"),
    "drift": ("n", "k", "mu"),
    "equilibrium": ("n", "k", "mu"),
    "runtime": ("n", "mu"),
    "counterexample": ("n", "k", "mu"),
    "hitprob": ("n", "k"),
}


def options(command: str) -> list[Opt]:
    return SPECS[command][1] + COMMON


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumpga",
        description="Diversity and runtime experiments for steady-state EAs and GAs on Jump functions.",
        epilog="Exit codes: 0 success, 1 I/O or internal error, 2 validation failure.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (desc, _) in SPECS.items():
        p = sub.add_parser(name, help=desc, description=desc)
        p.add_argument("--config", help="flat key = value file; flags override its values")
        for o in options(name):
            default = "" if o.default is None else f" (default: {o.default})"
            p.add_argument(f"--{o.name}", dest=o.key, type=o.parse, default=None, choices=o.choices,
                           help=o.help + default)
    return parser


def read_config(path: str | Path, command: str) -> dict[str, Any]:
    """Parse a config file for one subcommand; unknown keys are a UsageError."""
    known = {o.key: o for o in options(command)}
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        opt = known.get(key)
        if opt is None:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r} for {command}")
        try:
            parsed = opt.parse(value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
        if opt.choices and parsed not in opt.choices:
            raise UsageError(f"{path}:{lineno}: {key} must be one of {list(opt.choices)}, got {parsed!r}")
        out[key] = parsed
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    cfg = {o.key: o.default for o in options(command)}
    if ns.config:
        cfg.update(read_config(ns.config, command))
    for o in options(command):
        value = getattr(ns, o.key, None)
        if value is not None:
            cfg[o.key] = value
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{command} needs {', '.join('--' + m for m in missing)}")
    if cfg["seed"] is None:
        cfg["seed"] = random_seed()
        log.warning("no --seed given; using seed=%d", cfg["seed"])
    if cfg["threads"] is None:
        cfg["threads"] = default_threads()
    return cfg


def format_config(command: str, cfg: dict[str, Any]) -> str:
    """The resolved configuration in config-file grammar."""
    lines = [f"# jumpga {command}"]
    for o in options(command):
        v = cfg.get(o.key)
        if v is None or o.key in ("threads", "csv", "json"):
            continue
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        lines.append(f"{o.name} = {v}")
    return "\n".join(lines)


# -- helpers -----------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _clean(v):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def emit_json(payload: dict, cfg: dict[str, Any]) -> None:
    text = json.dumps(_clean(json.loads(json.dumps(payload, default=_jsonable))), indent=2)
    print(text)
    if cfg.get("json"):
        Path(cfg["json"]).write_text(text + "\n", encoding="utf-8")


def emit_csv(header: Sequence[str], rows: Sequence[Sequence], cfg: dict[str, Any]) -> None:
    if not cfg.get("csv"):
        return
    with open(cfg["csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _mutation(cfg):
    kind = cfg.get("mutation", "standard")
    if kind == "paired":
        return PairedFlip(cfg["ell"])
    if kind == "radius":
        return FixedRadius(cfg["radius"])
    return StandardBit(cfg["chi"])


def _lambda_c(cfg) -> int:
    if cfg.get("lambda_c") is not None:
        return cfg["lambda_c"]
    if cfg.get("algorithm", "ga") == "ga" and cfg["pc"] > 0 and cfg["mu"] >= 2 and cfg.get("k"):
        return default_lambda_c(cfg["k"], cfg["chi"], cfg["mu"], cfg["pc"])
    return 1


def _jumpprime_config(cfg, **extra) -> AlgorithmConfig:
    return AlgorithmConfig(
        FitnessSpec("jumpprime", cfg["n"], k=cfg["k"]),
        mu=cfg["mu"],
        algorithm=cfg["algorithm"],
        p_c=cfg["pc"] if cfg["algorithm"] == "ga" else 0.0,
        lambda_c=_lambda_c(cfg),
        mutation=_mutation(cfg),
        crossover=cfg["crossover"],
        seed=cfg["seed"],
        **extra,
    )


# -- subcommands -------------------------------------------------------------


def cmd_predict(cfg) -> int:
    n, k = cfg["n"], cfg["k"]
    eps = cfg["eps"] if cfg["eps"] is not None else 1 / (16 * k)
    search = None
    if cfg["search"]:
        res = constructive_search(n, k, cfg["chi"], eps)
        cfg.update(mu=res.mu, pc=res.p_c, lambda_c=res.lambda_c)
        search = {"p_c": res.p_c, "mu": res.mu, "lambda_c": res.lambda_c, "violations": res.flags.violations()}
    params = PlateauParams(n, k, cfg["mu"], cfg["chi"], cfg["pc"])
    report = theory_report(params, eps, cfg["lambda_c"], cfg["C"]).to_dict()
    report["constructive_search"] = search
    emit_json(report, cfg)
    rows = [[d, v] for d, v in enumerate(report["opt_hit_bound"])]
    emit_csv(["d", "opt_hit_bound"], rows, cfg)
    return 0


DRIFT_COLUMNS = ("label", "initial_S", "samples", "mean_next_S", "stderr", "conditioning", "predicted",
                 "lower_bound", "accept_rate", "z_score", "pass")


def _drift_row(label: str, rep) -> list:
    verdict = rep.within() if rep.predicted is not None else rep.above_lower_bound()
    return [label, rep.initial_S, rep.samples, rep.mean_next_S, rep.stderr, rep.conditioning, rep.predicted,
            rep.lower_bound, rep.accept_rate, rep.z_score(), verdict]


def _drift_population(cfg, rng) -> Population:
    n, k, mu = cfg["n"], cfg["k"], cfg["mu"]
    if cfg["members"]:
        return Population.from_strings(cfg["members"])
    src = cfg["population"]
    if src == "random":
        return random_plateau_population(n, k, mu, rng)
    if src == "cluster":
        return cluster_population(n, k, mu, rng)
    if src == "counterexample":
        return counterexample_population(n, k, mu)
    return read_population(src)


def cmd_drift(cfg) -> int:
    P = _drift_population(cfg, stream(cfg["seed"], 0, "population"))
    if P.n != cfg["n"] or P.mu != cfg["mu"]:
        raise UsageError(f"population is {P.mu} x {P.n}, config says mu={cfg['mu']}, n={cfg['n']}")
    acfg = _jumpprime_config(cfg)
    rep = one_step_drift(P, acfg, cfg["samples"], cfg["conditioning"], stream(cfg["seed"], 0, "drift"))
    out = {"config": format_config("drift", cfg), "population": [str(x) for x in P], "report": rep.to_dict(),
           "z_score": rep.z_score(), "within_3sigma": rep.within(), "above_lower_bound": rep.above_lower_bound()}
    if cfg["exact"]:
        out["exact"] = _exact_drift(P, acfg, cfg["conditioning"])
    emit_json(out, cfg)
    emit_csv(DRIFT_COLUMNS, [_drift_row("drift", rep)], cfg)
    return 0


def _exact_drift(P: Population, acfg: AlgorithmConfig, conditioning: str) -> Optional[float]:
    """Exact E(S') for single-offspring generations of one branch; None where enumeration does not apply."""
    fitness = acfg.fitness
    if conditioning == "accepted" or (acfg.is_ga and acfg.p_c > 0 and conditioning == "all"):
        return None
    if conditioning == "crossover":
        if acfg.lambda_c != 1:
            return None
        op = CrossoverOp(acfg.crossover, acfg.mutation)
    else:
        op = acfg.mutation
    return float(enumerate_drift_exact(P, op, fitness))


EQ_COLUMNS = ("trial", "seed", "time_avg_S", "fraction_above_threshold", "generations_above", "threshold",
              "final_S", "success")


def cmd_equilibrium(cfg) -> int:
    base = _jumpprime_config(cfg, init="plateau")
    burn, horizon, eps = cfg["burn_in"], cfg["horizon"], cfg["eps"]
    reps = map_replicates(
        lambda i: equilibrium_run(base.with_seed(derive_seed(cfg["seed"], i)), burn, horizon, eps),
        cfg["trials"], cfg["threads"])
    rows = []
    for i, r in enumerate(reps):
        rows.append([i, derive_seed(cfg["seed"], i), r.time_avg_S, r.fraction_above_threshold, r.generations_above,
                     r.threshold, r.final_S, r.generations_above >= horizon / 4])
    avg = float(np.mean([r.time_avg_S for r in reps]))
    predicted = reps[0].predicted
    successes = sum(row[-1] for row in rows)
    rel = (avg - predicted) / predicted if predicted else None
    out = {
        "config": format_config("equilibrium", cfg),
        "threshold": diversity_threshold(cfg["k"], cfg["mu"], eps),
        "time_avg_S": avg,
        "predicted": predicted,
        "relative_error": rel,
        "within_tolerance": None if rel is None else abs(rel) <= cfg["tolerance"],
        "trials": len(reps),
        "trials_with_quarter_window_above": successes,
        "success_fraction": successes / len(reps),
    }
    emit_json(out, cfg)
    emit_csv(EQ_COLUMNS, rows, cfg)
    return 0


def cmd_runtime(cfg) -> int:
    fam = FitnessSpec(cfg["family"], cfg["n"], k=cfg["k"], delta=cfg["delta"], w=cfg["w"])
    acfg = AlgorithmConfig(
        fam, mu=cfg["mu"], algorithm=cfg["algorithm"],
        p_c=cfg["pc"] if cfg["algorithm"] == "ga" else 0.0,
        lambda_c=_lambda_c(cfg) if fam.family in JUMP_FAMILIES else (cfg["lambda_c"] or 1),
        mutation=_mutation(cfg), crossover=cfg["crossover"], init=cfg["init"], init_zeros=cfg["init_zeros"],
        fixture=cfg["fixture"], seed=cfg["seed"], budget=cfg["budget"], stop=cfg["stop"],
    )
    flags = None
    if cfg["eps"] is not None and acfg.is_ga and fam.family in JUMP_FAMILIES and acfg.mu >= 2:
        flags = check_preconditions(PlateauParams(fam.n, fam.k, acfg.mu, cfg["chi"], acfg.p_c), cfg["eps"],
                                    acfg.lambda_c)
        if flags.violations():
            msg = "violated hypotheses: " + ", ".join(flags.violations())
            if cfg["strict"]:
                raise UsageError(msg)
            log.warning(msg)
    res = runtime_campaign(acfg, cfg["repetitions"], cfg["seed"], cfg["threads"])
    if cfg["csv"]:
        res.write_csv(cfg["csv"])
    out = {"config": format_config("runtime", cfg), **res.summary()}
    if flags is not None:
        out["precondition_flags"] = flags.to_dict()
    emit_json(out, cfg)
    return 0


def cmd_counterexample(cfg) -> int:
    res = counterexample_drift(cfg["n"], cfg["k"], cfg["mu"], cfg["chi"], cfg["pc"], cfg["lambda_c"],
                               cfg["samples"], stream(cfg["seed"], 0, "counterexample"))
    single, competing = res.single, res.competing
    out = {
        "config": format_config("counterexample", cfg),
        **res.to_dict(),
        "diversity_matches": res.diversity == res.expected_diversity,
        "single_negative_3sigma": single.mean_change + 3 * single.stderr < 0,
        "competing_above_lower_bound": competing.above_lower_bound(),
    }
    emit_json(out, cfg)
    emit_csv(DRIFT_COLUMNS, [_drift_row("lambda_c=1", single), _drift_row(f"lambda_c={res.lambda_c}", competing),
                             _drift_row("unconditioned", res.unconditioned)], cfg)
    return 0


HIT_COLUMNS = ("quantity", "d_or_delta", "exact", "bound", "mc", "stderr", "pass")


def _pair_at(n: int, k: int, d: int) -> tuple[BitString, BitString]:
    """0^k 1^(n-k) and a plateau string sharing k - d of its zeros."""
    if not 0 <= d <= min(k, n - k):
        raise UsageError(f"half distance d must lie in [0, min(k, n-k)], got {d}")
    x1 = BitString.from_str("0" * k + "1" * (n - k))
    x2 = BitString.from_str("1" * d + "0" * k + "1" * (n - k - d))
    return x1, x2


def cmd_hitprob(cfg) -> int:
    n, k, chi, N = cfg["n"], cfg["k"], cfg["chi"], cfg["samples"]
    if not 1 <= k < n:
        raise UsageError(f"need 1 <= k < n, got n={n}, k={k}")
    ds = cfg["d"] if cfg["d"] is not None else list(range(min(k, n - k) + 1))
    rng = stream(cfg["seed"], 0, "hitprob")
    rows, items = [], []
    for d in ds:
        x1, x2 = _pair_at(n, k, d)
        exact = exact_opt_hit(x1, x2, chi) if n <= 64 and 2 * d <= 20 else None
        bound = opt_hit_bound(n, k, d)
        est, se = mc_opt_hit(x1, x2, chi, N, rng)
        ok = (abs(est - exact) <= 3 * se) if exact is not None else (est <= bound + 3 * se)
        if exact is not None:
            ok = ok and exact <= bound * (1 + 1e-12)
        rows.append(["opt_hit", d, exact, bound, est, se, ok])
        items.append({"d": d, "exact": exact, "bound": bound, "mc": est, "stderr": se, "pass": ok})
    offsets = []
    for dl in cfg["deltas"] or []:
        formula = jump_offset_success(k, dl)
        est, se = mc_jump_offset_success(k, dl, N, rng)
        ok = abs(est - formula.full_sum) <= 3 * se
        rows.append(["jump_offset", dl, formula.full_sum, formula.single_term, est, se, ok])
        offsets.append({"delta": dl, "full_sum": formula.full_sum, "single_term": formula.single_term,
                        "mc": est, "stderr": se, "pass": ok})
    emit_json({"config": format_config("hitprob", cfg), "opt_hit": items, "jump_offset": offsets}, cfg)
    emit_csv(HIT_COLUMNS, rows, cfg)
    return 0


COMMANDS = {
    "predict": cmd_predict,
    "drift": cmd_drift,
    "equilibrium": cmd_equilibrium,
    "runtime": cmd_runtime,
    "counterexample": cmd_counterexample,
    "hitprob": cmd_hitprob,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve(ns.command, ns)
        log.info("resolved config:\n%s", format_config(ns.command, cfg))
        return COMMANDS[ns.command](cfg)
    except UsageError as exc:
        print(f"jumpga {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"jumpga {ns.command}: I/O error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"jumpga {ns.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

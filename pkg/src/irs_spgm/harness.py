"""Monte-Carlo sweeps over transmit power or IRS size.

Every trial draws one channel realization from a seed derived from
``(master_seed, trial)`` and all methods are evaluated on that same draw,
so method comparisons are paired.  Trials may run in worker processes;
results are always reduced in trial order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import exhaustive_random_search_powers, random_phases
from .channel import RicianParams, draw_realization, path_loss
from .spgm import SolverOptions, admm_solve, build_quadratic_form
from .system import PhaseVector, SystemConfig, db_to_linear, rate_report

__all__ = [
    "METHODS",
    "ExperimentSpec",
    "TrialRecord",
    "SweepResult",
    "trial_seed",
    "run_sweep",
    "los_asymptote",
    "doubling_deviation",
    "quadratic_growth_check",
    "build_id",
]

METHODS = ("spgm_admm", "random_ps", "exhaustive_random", "no_irs")
SWEEP_VARIABLES = ("power_db", "n_r")

# offsets of the per-trial streams, relative to the trial seed; the channel
# realization itself consumes offsets 0..2
_RANDOM_PS_OFFSET = 3
_EXHAUSTIVE_OFFSET = 4


@dataclass(frozen=True)
class ExperimentSpec:
    sweep_variable: str
    sweep_values: tuple
    trials: int
    base_config: SystemConfig
    rician: RicianParams
    methods: tuple = METHODS
    master_seed: int = 0
    exhaustive_candidates: int = 10_000
    solver: SolverOptions = field(default_factory=SolverOptions)
    keep_trials: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep_variable must be one of {SWEEP_VARIABLES}, got {self.sweep_variable!r}")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise ValueError("sweep_values must be strictly increasing")
        if self.sweep_variable == "n_r" and any(int(n) != n or n < 1 for n in self.sweep_values):
            raise ValueError("n_r sweep values must be positive integers")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if self.exhaustive_candidates < 1:
            raise ValueError("exhaustive_candidates must be >= 1")

    def to_dict(self) -> dict:
        rician = asdict(self.rician)
        if math.isinf(rician["rician_factor_linear"]):
            rician["rician_factor_linear"] = "inf"
        return {
            "sweep_variable": self.sweep_variable,
            "sweep_values": list(self.sweep_values),
            "trials": self.trials,
            "base_config": asdict(self.base_config),
            "rician": rician,
            "methods": list(self.methods),
            "master_seed": self.master_seed,
            "exhaustive_candidates": self.exhaustive_candidates,
            "solver": self.solver.to_dict(),
        }


@dataclass(frozen=True)
class TrialRecord:
    method: str
    sweep_value: float
    trial: int
    rate: float
    iterations: int
    r_hat: float
    r_tilde: float
    n_s: int
    bound_ok: bool
    miso_ok: bool
    converged: bool = True
    error: str | None = None


def trial_seed(master_seed: int, trial: int) -> int:
    """Channel seed of a trial, hashed from ``(master_seed, trial)``."""
    state = np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) | (int(state[1]) >> 1)


def _record(method, value, trial, rep, iterations=0, converged=True):
    miso_ok = True
    if rep.n_s == 1:
        miso_ok = abs(rep.r_hat - rep.r_tilde) <= 1e-9
    return TrialRecord(method, float(value), trial, rep.r_tilde, iterations, rep.r_hat,
                       rep.r_tilde, rep.n_s, rep.bound_chain_ok(1e-9), miso_ok, converged)


def _eval_point(spec: ExperimentSpec, cfg: SystemConfig, real, values, trial, seed):
    """Evaluate every method on one realization at the given sweep values.

    ``values`` share the realization; for a power sweep they are the power
    levels in dB, for an IRS-size sweep a single ``n_r``.
    """
    out = []
    cfgs = []
    for val in values:
        if spec.sweep_variable == "power_db":
            cfgs.append(cfg.with_(power_linear=db_to_linear(val) * cfg.noise_power))
        else:
            cfgs.append(cfg)
    for method in spec.methods:
        try:
            if method == "spgm_admm":
                rep_admm = admm_solve(build_quadratic_form(real, cfg), spec.solver)
                for val, c in zip(values, cfgs):
                    out.append(_record(method, val, trial, rate_report(real, c, rep_admm.v),
                                       rep_admm.iterations, rep_admm.converged))
            elif method == "random_ps":
                v = random_phases(cfg.n_r, seed + _RANDOM_PS_OFFSET)
                for val, c in zip(values, cfgs):
                    out.append(_record(method, val, trial, rate_report(real, c, v)))
            elif method == "exhaustive_random":
                best = exhaustive_random_search_powers(
                    real, cfg, [c.power_linear for c in cfgs], spec.exhaustive_candidates,
                    seed + _EXHAUSTIVE_OFFSET)
                for val, c, (v, _) in zip(values, cfgs, best):
                    out.append(_record(method, val, trial, rate_report(real, c, v)))
            elif method == "no_irs":
                for val, c in zip(values, cfgs):
                    rep = rate_report(real, c.with_(beta=0.0), PhaseVector.zeros(cfg.n_r))
                    out.append(_record(method, val, trial, rep))
        except Exception as exc:  # recorded and excluded from the means
            for val in values:
                out.append(TrialRecord(method, float(val), trial, math.nan, 0, math.nan, math.nan,
                                       0, True, True, False, f"{type(exc).__name__}: {exc}"))
    return out


def _run_trial(args):
    spec, trial = args
    seed = trial_seed(spec.master_seed, trial)
    records = []
    if spec.sweep_variable == "power_db":
        real = draw_realization(spec.base_config, spec.rician, seed)
        records += _eval_point(spec, spec.base_config, real, spec.sweep_values, trial, seed)
    else:
        for n_r in spec.sweep_values:
            cfg = spec.base_config.with_(n_r=int(n_r))
            real = draw_realization(cfg, spec.rician, seed)
            records += _eval_point(spec, cfg, real, [n_r], trial, seed)
    return records


@dataclass
class SweepResult:
    spec: ExperimentSpec
    records: list
    summary: dict

    def mean(self, method: str, value) -> float:
        return self.summary[method][_key(value)]["mean"]

    def means(self, method: str) -> list:
        return [self.mean(method, v) for v in self.spec.sweep_values]

    @property
    def bound_violations(self) -> list:
        return [r for r in self.records if r.error is None and not (r.bound_ok and r.miso_ok)]

    @property
    def failures(self) -> list:
        return [r for r in self.records if r.error is not None]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "sweep_value", "trial", "rate", "iterations"])
        for r in self.records:
            w.writerow([r.method, _key(r.sweep_value), r.trial, repr(r.rate), r.iterations])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "spec": self.spec.to_dict(),
            "summary": self.summary,
            "diagnostics": {
                "bound_chain_violations": len(self.bound_violations),
                "failed_trials": len(self.failures),
            },
            "build": build_id(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _key(value) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _summarize(spec: ExperimentSpec, records: list) -> dict:
    summary = {}
    for method in spec.methods:
        per = {}
        for val in spec.sweep_values:
            rows = [r for r in records if r.method == method and r.sweep_value == float(val)]
            ok = [r for r in rows if r.error is None]
            rates = np.array([r.rate for r in ok])
            n = rates.size
            per[_key(val)] = {
                "mean": float(rates.mean()) if n else math.nan,
                "stderr": float(rates.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                "n": n,
                "excluded": len(rows) - n,
                "mean_iterations": float(np.mean([r.iterations for r in ok])) if n else 0.0,
                "non_converged": sum(1 for r in ok if not r.converged),
            }
        summary[method] = per
    return summary


def run_sweep(spec: ExperimentSpec, workers: int | None = None) -> SweepResult:
    """Run every trial of ``spec`` and aggregate means and standard errors."""
    workers = workers or os.cpu_count() or 1
    jobs = [(spec, t) for t in range(spec.trials)]
    if workers > 1 and spec.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_trial, jobs))
    else:
        chunks = [_run_trial(j) for j in jobs]
    records = [r for chunk in chunks for r in chunk]
    result = SweepResult(spec, records, _summarize(spec, records))
    if not spec.keep_trials:
        result.records = [r for r in records if r.error is not None or not (r.bound_ok and r.miso_ok)]
    return result


def los_asymptote(cfg: SystemConfig, rician: RicianParams, n_r: int) -> float:
    """Pure-LoS reference ``log2(1 + (P/sigma^2) L(d)^2 N_t N_b N_r^2)``."""
    loss = path_loss(rician)
    return math.log2(1.0 + cfg.snr_linear * loss**2 * cfg.n_t * cfg.n_b * n_r**2)


def doubling_deviation(n_values, rates, last: int = 1) -> float:
    """Largest ``|rate(2N) - rate(N) - 2|`` over the final ``last`` doublings.

    Raises
    ------
    ValueError
        If the series does not contain at least three consecutive doublings.
    """
    lookup = {int(n): float(r) for n, r in zip(n_values, rates)}
    pairs = [(n, 2 * n) for n in sorted(lookup) if 2 * n in lookup]
    chains = [n for n, _ in pairs if 4 * n in lookup and 8 * n in lookup]
    if not chains:
        raise ValueError("growth check needs at least three consecutive doublings of n_r")
    if last < 1:
        raise ValueError("last must be >= 1")
    devs = [abs(lookup[b] - lookup[a] - 2.0) for a, b in pairs[-last:]]
    return max(devs)


def quadratic_growth_check(spec_or_result, method: str = "spgm_admm", last: int = 1,
                           workers: int | None = None) -> float:
    """Deviation of the per-doubling rate gain from 2 bits (``N_r^2`` SNR growth)."""
    result = spec_or_result
    if isinstance(spec_or_result, ExperimentSpec):
        if spec_or_result.sweep_variable != "n_r":
            raise ValueError("growth check needs an n_r sweep")
        if method not in spec_or_result.methods:
            raise ValueError(f"method {method!r} not part of the sweep")
        # refuse before paying for the sweep
        doubling_deviation(spec_or_result.sweep_values, [0.0] * len(spec_or_result.sweep_values))
        result = run_sweep(spec_or_result, workers)
    return doubling_deviation(result.spec.sweep_values, result.means(method), last)


_BUILD_ID = None


def build_id() -> str:
    """``git describe`` of the source tree, falling back to the package version."""
    global _BUILD_ID
    if _BUILD_ID is None:
        try:
            out = subprocess.run(
                ["git", "describe", "--always", "--dirty"],
                cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
            )
            desc = out.stdout.strip() if out.returncode == 0 else ""
        except (OSError, subprocess.SubprocessError):
            desc = ""
        _BUILD_ID = f"{__version__}+{desc}" if desc else __version__
    return _BUILD_ID

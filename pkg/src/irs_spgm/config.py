"""Experiment configuration files.

A config is one JSON document.  Decibel quantities carry a ``_db``
suffix; everything else is linear.  Unknown keys are rejected so that
typos surface as errors instead of silently falling back to defaults.

Example::

    {
      "system":  {"n_t": 16, "n_b": 4, "n_r": 16, "power_db": 10},
      "channel": {"rician_factor_db": 10, "distance_m": 30},
      "solver":  {"epsilon": 1e-6, "max_iter": 2000},
      "seed": 7,
      "sweep":   {"variable": "power_db", "values": [0, 5, 10, 15, 20],
                  "trials": 100}
    }

``rician_factor_db`` (or the linear ``rician_factor``) may be the string
``"inf"`` for a pure line-of-sight channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .channel import RicianParams
from .harness import METHODS, ExperimentSpec
from .spgm import SolverOptions
from .system import SystemConfig, db_to_linear

__all__ = ["ConfigError", "RunConfig", "SCHEMA", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(field path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.errors))


_number = {"type": "number"}
_infable = {"anyOf": [{"type": "number"}, {"enum": ["inf", "Infinity"]}]}
_pos_int = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_t", "n_b", "n_r"],
            "properties": {
                "n_t": _pos_int,
                "n_b": _pos_int,
                "n_r": _pos_int,
                "power_db": _number,
                "power": {"type": "number", "exclusiveMinimum": 0},
                "noise_power": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
            },
            "not": {"required": ["power_db", "power"]},
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rician_factor_db": _infable,
                "rician_factor": _infable,
                "pathloss_ref_db": _number,
                "pathloss_exponent": _number,
                "distance_m": {"type": "number", "exclusiveMinimum": 0},
            },
            "not": {"required": ["rician_factor_db", "rician_factor"]},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": _pos_int,
                "rho_override": {"anyOf": [{"type": "null"}, {"type": "number", "exclusiveMinimum": 0}]},
                "init_mode": {"enum": ["ones", "seeded-random"]},
                "init_seed": {"type": "integer", "minimum": 0},
                "normalize_to": {"anyOf": [{"type": "null"}, {"type": "number", "exclusiveMinimum": 0}]},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variable", "values"],
            "properties": {
                "variable": {"enum": ["power_db", "n_r"]},
                "values": {"type": "array", "minItems": 1, "items": _number},
                "trials": _pos_int,
                "methods": {"type": "array", "minItems": 1, "uniqueItems": True,
                            "items": {"enum": list(METHODS)}},
                "exhaustive_candidates": _pos_int,
                "master_seed": {"type": "integer", "minimum": 0},
            },
        },
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "instances": _pos_int,
                "shapes": {"type": "array", "minItems": 1,
                           "items": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3}},
                "grid_levels": {"type": "integer", "minimum": 2, "maximum": 512},
                "identity_samples": _pos_int,
            },
        },
    },
}


@dataclass(frozen=True)
class AuditSettings:
    instances: int = 10
    shapes: tuple = ((2, 1, 3), (2, 2, 3), (4, 2, 8), (16, 4, 16))
    grid_levels: int = 128
    identity_samples: int = 20


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    rician: RicianParams
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    sweep: ExperimentSpec | None = None
    audit: AuditSettings = field(default_factory=AuditSettings)

    def resolved(self) -> dict:
        """Fully resolved settings (linear units, defaults filled in)."""
        rician = asdict(self.rician)
        if math.isinf(rician["rician_factor_linear"]):
            rician["rician_factor_linear"] = "inf"
        doc = {
            "system": asdict(self.system),
            "channel": rician,
            "solver": self.solver.to_dict(),
            "seed": self.seed,
            "audit": {**asdict(self.audit), "shapes": [list(s) for s in self.audit.shapes]},
        }
        if self.sweep is not None:
            doc["sweep"] = self.sweep.to_dict()
        return doc


def _as_float(x) -> float:
    return math.inf if x in ("inf", "Infinity") else float(x)


def parse_config(doc, trials_override: int | None = None,
                 seed_override: int | None = None) -> RunConfig:
    """Validate ``doc`` and build a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        With one entry per offending field.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(
            ("/".join(str(p) for p in e.absolute_path) or "<root>", e.message) for e in errors
        )
    s = doc["system"]
    ch = doc.get("channel", {})
    try:
        if "power" in s:
            power = float(s["power"])
        else:
            power = db_to_linear(float(s.get("power_db", 10.0))) * float(s.get("noise_power", 1.0))
        system = SystemConfig(
            n_t=s["n_t"], n_b=s["n_b"], n_r=s["n_r"], power_linear=power,
            noise_power=float(s.get("noise_power", 1.0)), beta=float(s.get("beta", 1.0)),
        )
        if "rician_factor" in ch:
            kappa = _as_float(ch["rician_factor"])
        else:
            kdb = _as_float(ch.get("rician_factor_db", 10.0))
            kappa = math.inf if math.isinf(kdb) else db_to_linear(kdb)
        rician = RicianParams(
            rician_factor_linear=kappa,
            pathloss_ref_db=float(ch.get("pathloss_ref_db", -30.0)),
            pathloss_exponent=float(ch.get("pathloss_exponent", 2.0)),
            distance_m=float(ch.get("distance_m", 30.0)),
        )
        solver = SolverOptions(**doc.get("solver", {}))
        seed = int(doc.get("seed", 0)) if seed_override is None else int(seed_override)
        sweep = None
        if "sweep" in doc:
            sw = doc["sweep"]
            master = int(sw.get("master_seed", seed)) if seed_override is None else int(seed_override)
            sweep = ExperimentSpec(
                sweep_variable=sw["variable"],
                sweep_values=tuple(sw["values"]),
                trials=int(trials_override or sw.get("trials", 100)),
                base_config=system,
                rician=rician,
                methods=tuple(sw.get("methods", METHODS)),
                master_seed=master,
                exhaustive_candidates=int(sw.get("exhaustive_candidates", 10_000)),
                solver=solver,
            )
        au = doc.get("audit", {})
        defaults = AuditSettings()
        audit = AuditSettings(
            instances=int(au.get("instances", defaults.instances)),
            shapes=tuple(tuple(x) for x in au.get("shapes", defaults.shapes)),
            grid_levels=int(au.get("grid_levels", defaults.grid_levels)),
            identity_samples=int(au.get("identity_samples", defaults.identity_samples)),
        )
    except ValueError as exc:
        raise ConfigError([("<semantic>", str(exc))]) from None
    return RunConfig(system, rician, solver, seed, sweep, audit)


def load_config(path, **overrides) -> RunConfig:
    """Read and validate a JSON config file (``OSError`` propagates)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<file>", f"invalid JSON: {exc}")]) from None
    return parse_config(doc, **overrides)

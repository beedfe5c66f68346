"""System parameters, the effective channel and the rate objectives.

Three rates are reported for a given phase vector ``v``:

* ``r_exact`` -- ``log2 det(I + P/(sigma^2 N_s) H F F^H H^H)`` for the
  water-filled SVD precoder,
* ``r_tilde`` -- the same optimum written as a sum over parallel streams,
* ``r_hat`` -- the sum-path-gain surrogate
  ``log2(1 + P/(sigma^2 N_s) Tr(H_eff^H H_eff))``.

For every ``v`` they satisfy ``r_hat <= r_tilde <= N_s * r_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelRealization
from .numerics import DEFAULT_RANK_TOL, as_complex_matrix, truncated_svd
from .precoding import Precoder, design_precoder

__all__ = [
    "SystemConfig",
    "PhaseVector",
    "RateReport",
    "effective_channel",
    "spectral_efficiency",
    "rate_report",
    "db_to_linear",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    n_t: int
    n_b: int
    n_r: int
    power_linear: float = 10.0
    noise_power: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("n_t", "n_b", "n_r"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val}")
        if not self.power_linear > 0:
            raise ValueError(f"power_linear must be positive, got {self.power_linear}")
        if not self.noise_power > 0:
            raise ValueError(f"noise_power must be positive, got {self.noise_power}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def snr_linear(self) -> float:
        return self.power_linear / self.noise_power

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class PhaseVector:
    """IRS phase shifts; ``unit_modulus`` is always derived from ``phases``."""

    phases: np.ndarray
    unit_modulus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        theta = np.mod(np.asarray(self.phases, dtype=float).ravel(), 2.0 * np.pi)
        object.__setattr__(self, "phases", theta)
        object.__setattr__(self, "unit_modulus", np.exp(1j * theta))

    @classmethod
    def from_complex(cls, z) -> "PhaseVector":
        """Keep only the phase of each entry (``angle(0) := 0``)."""
        return cls(np.angle(np.asarray(z, dtype=np.complex128)))

    @classmethod
    def zeros(cls, n: int) -> "PhaseVector":
        return cls(np.zeros(n))

    def __len__(self) -> int:
        return self.phases.size


def effective_channel(real: ChannelRealization, cfg: SystemConfig, v: PhaseVector) -> np.ndarray:
    """``H_eff^H = beta * H_r^H diag(v*) M + H_d^H`` (shape ``N_b x N_t``)."""
    vv = v.unit_modulus if isinstance(v, PhaseVector) else np.asarray(v)
    if vv.size != real.n_r:
        raise ValueError(f"phase vector has {vv.size} entries, IRS has {real.n_r}")
    cascade = (real.h_r.conj().T * vv.conj()[None, :]) @ real.m
    return cfg.beta * cascade + real.h_d.conj().T


def spectral_efficiency(h_eff_H, f: Precoder, cfg: SystemConfig) -> float:
    """``log2 det(I + P/(sigma^2 N_s) H_eff^H F F^H H_eff)`` in bits/s/Hz.

    Evaluated from the singular values of ``H_eff^H F`` so that high-SNR
    inputs do not overflow a determinant.
    """
    h = as_complex_matrix(h_eff_H, "h_eff_H")
    fm = as_complex_matrix(f.f, "F")
    if f.n_s < 1:
        raise ValueError("precoder must carry at least one stream")
    s = np.linalg.svd(h @ fm, compute_uv=False)
    scale = cfg.power_linear / (cfg.noise_power * f.n_s)
    return float(np.sum(np.log2(1.0 + scale * s**2)))


@dataclass(frozen=True)
class RateReport:
    r_exact: float
    r_tilde: float
    r_hat: float
    singular_values: np.ndarray
    n_s: int
    trace_gain: float
    dead_link: bool = False
    precoder: Precoder | None = None

    def bound_chain_ok(self, slack: float = 1e-9) -> bool:
        return (self.r_hat <= self.r_tilde + slack
                and self.r_tilde <= self.n_s * self.r_hat + slack)

    def to_dict(self) -> dict:
        return {
            "r_exact": self.r_exact,
            "r_tilde": self.r_tilde,
            "r_hat": self.r_hat,
            "singular_values": [float(s) for s in self.singular_values],
            "n_s": self.n_s,
            "trace_gain": self.trace_gain,
            "dead_link": self.dead_link,
        }


def rates_for_channel(h_eff_H, cfg: SystemConfig, rank_tol: float = DEFAULT_RANK_TOL) -> RateReport:
    """All rate figures of a given effective channel."""
    svd = truncated_svd(h_eff_H, rank_tol)
    trace_gain = float(np.sum(svd.all_singular_values**2))
    if svd.is_dead:
        return RateReport(0.0, 0.0, 0.0, np.zeros(0), 0, trace_gain, dead_link=True)
    n_s = svd.rank
    prec = design_precoder(h_eff_H, cfg, rank_tol)
    scale = cfg.power_linear / (cfg.noise_power * n_s)
    lam2 = svd.singular_values**2
    r_tilde = float(np.sum(np.log2(1.0 + scale * prec.allocation.p * lam2)))
    r_hat = math.log2(1.0 + scale * trace_gain)
    r_exact = spectral_efficiency(h_eff_H, prec, cfg)
    return RateReport(r_exact, r_tilde, r_hat, svd.singular_values, n_s, trace_gain, precoder=prec)


def rate_report(real: ChannelRealization, cfg: SystemConfig, v: PhaseVector,
                rank_tol: float = DEFAULT_RANK_TOL) -> RateReport:
    """Rates achieved by phase vector ``v``; ``N_s`` is the numerical rank of ``H_eff``."""
    return rates_for_channel(effective_channel(real, cfg, v), cfg, rank_tol)

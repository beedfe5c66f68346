"""Rician fading channels between uniform linear arrays.

Every link is modelled as

    H = sqrt(L(d)) * ( sqrt(k/(1+k)) * H_los + sqrt(1/(1+k)) * H_nlos )

with ``H_los = sqrt(N_rx*N_tx) * a_rx(phi_r) a_tx(phi_t)^H`` built from
unit-norm ULA steering vectors, so that both components carry the same
average power ``N_rx*N_tx`` and the SNR of a cascaded LoS link grows as
``N_r^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .system import SystemConfig

__all__ = [
    "ArrayGeometry",
    "RicianParams",
    "ChannelRealization",
    "steering_vector",
    "path_loss",
    "draw_channel",
    "draw_realization",
]

REFERENCE_DISTANCE_M = 1.0


@dataclass(frozen=True)
class ArrayGeometry:
    n_elements: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements}")
        if not self.spacing_over_wavelength > 0:
            raise ValueError("spacing_over_wavelength must be positive")


@dataclass(frozen=True)
class RicianParams:
    """Large-scale and fading parameters shared by all three links.

    ``rician_factor_linear = math.inf`` selects a pure line-of-sight channel.
    """

    rician_factor_linear: float = 10.0
    pathloss_ref_db: float = -30.0
    pathloss_exponent: float = 2.0
    distance_m: float = 30.0

    def __post_init__(self):
        if not self.distance_m > 0:
            raise ValueError(f"distance_m must be positive, got {self.distance_m}")
        if not self.rician_factor_linear >= 0:
            raise ValueError("rician_factor_linear must be >= 0")

    @classmethod
    def from_db(cls, rician_factor_db: float, **kwargs) -> "RicianParams":
        kappa = math.inf if math.isinf(rician_factor_db) else 10.0 ** (rician_factor_db / 10.0)
        return cls(rician_factor_linear=kappa, **kwargs)

    @property
    def pure_los(self) -> bool:
        return math.isinf(self.rician_factor_linear)

    def component_weights(self) -> tuple[float, float]:
        """Amplitude weights of the LoS and NLoS parts."""
        if self.pure_los:
            return 1.0, 0.0
        k = self.rician_factor_linear
        return math.sqrt(k / (1.0 + k)), math.sqrt(1.0 / (1.0 + k))


@dataclass(frozen=True)
class ChannelRealization:
    """One Monte-Carlo draw of the three links.

    Attributes
    ----------
    h_d : (N_t, N_b) array
        ``H_d``; Alice -> Bob is ``h_d.conj().T``.
    h_r : (N_r, N_b) array
        ``H_r``; IRS -> Bob is ``h_r.conj().T``.
    m : (N_r, N_t) array
        Alice -> IRS.
    seed : int
    angles : dict
        ``(phi_t, phi_r)`` of the LoS component of every link.
    """

    h_d: np.ndarray
    h_r: np.ndarray
    m: np.ndarray
    seed: int = 0
    angles: dict | None = None

    @property
    def n_t(self) -> int:
        return self.h_d.shape[0]

    @property
    def n_b(self) -> int:
        return self.h_d.shape[1]

    @property
    def n_r(self) -> int:
        return self.h_r.shape[0]

    def check(self) -> None:
        n_t, n_b, n_r = self.n_t, self.n_b, self.n_r
        if self.h_r.shape != (n_r, n_b) or self.m.shape != (n_r, n_t):
            raise ValueError(
                f"inconsistent shapes h_d{self.h_d.shape} h_r{self.h_r.shape} m{self.m.shape}"
            )
        for name in ("h_d", "h_r", "m"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")


def steering_vector(geom: ArrayGeometry, azimuth_rad: float) -> np.ndarray:
    """Unit-norm ULA response ``(1/sqrt(N)) exp(j 2 pi (d_a/lambda) n sin(phi))``."""
    n = np.arange(geom.n_elements)
    phase = 2.0 * np.pi * geom.spacing_over_wavelength * n * np.sin(azimuth_rad)
    return np.exp(1j * phase) / np.sqrt(geom.n_elements)


def path_loss(p: RicianParams) -> float:
    """Linear path-loss factor ``C0 * (d/D0)^-a``."""
    c0 = 10.0 ** (p.pathloss_ref_db / 10.0)
    return c0 * (p.distance_m / REFERENCE_DISTANCE_M) ** (-p.pathloss_exponent)


def _draw(geom_tx, geom_rx, p, rng_seed):
    rng = np.random.default_rng(rng_seed)
    phi_t, phi_r = rng.uniform(0.0, 2.0 * np.pi, size=2)
    n_rx, n_tx = geom_rx.n_elements, geom_tx.n_elements
    nlos = (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))) / np.sqrt(2.0)
    w_los, w_nlos = p.component_weights()
    los = np.sqrt(n_rx * n_tx) * np.outer(
        steering_vector(geom_rx, phi_r), steering_vector(geom_tx, phi_t).conj()
    )
    h = np.sqrt(path_loss(p)) * (w_los * los + w_nlos * nlos)
    return h, (float(phi_t), float(phi_r))


def draw_channel(geom_tx: ArrayGeometry, geom_rx: ArrayGeometry, p: RicianParams,
                 rng_seed: int) -> np.ndarray:
    """Draw an ``N_rx x N_tx`` Rician channel, deterministic in ``rng_seed``."""
    return _draw(geom_tx, geom_rx, p, rng_seed)[0]


def draw_realization(cfg: "SystemConfig", p: RicianParams, rng_seed: int,
                     spacing_over_wavelength: float = 0.5) -> ChannelRealization:
    """Draw Alice->Bob, IRS->Bob and Alice->IRS with seeds ``s, s+1, s+2``.

    Alice, the IRS and Bob sit on an equilateral triangle, so all three
    links share ``p.distance_m``.
    """
    alice = ArrayGeometry(cfg.n_t, spacing_over_wavelength)
    bob = ArrayGeometry(cfg.n_b, spacing_over_wavelength)
    irs = ArrayGeometry(cfg.n_r, spacing_over_wavelength)
    s = int(rng_seed)
    h_d_herm, a_d = _draw(alice, bob, p, s)
    h_r_herm, a_r = _draw(irs, bob, p, s + 1)
    m, a_m = _draw(alice, irs, p, s + 2)
    return ChannelRealization(
        h_d=h_d_herm.conj().T,
        h_r=h_r_herm.conj().T,
        m=m,
        seed=s,
        angles={"alice_bob": a_d, "irs_bob": a_r, "alice_irs": a_m},
    )

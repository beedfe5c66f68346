"""Water-filling power allocation and the SVD precoder ``F = V diag(sqrt(p))``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .numerics import DEFAULT_RANK_TOL, truncated_svd

if TYPE_CHECKING:
    from .system import SystemConfig

__all__ = [
    "DeadLinkError",
    "PowerAllocation",
    "Precoder",
    "water_fill",
    "water_filled_rates",
    "design_precoder",
    "normalize_column_phases",
]


class DeadLinkError(ValueError):
    """The effective channel has numerical rank zero."""


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers ``p`` (summing to ``N_s``) and the water level.

    ``water_level`` is the Lagrange constant ``mu`` of
    ``p_i = (1/(mu ln 2) - sigma^2 N_s / (P lambda_i^2))^+``.
    """

    p: np.ndarray
    water_level: float

    @property
    def fill_height(self) -> float:
        return 1.0 / (self.water_level * math.log(2.0))


def water_fill(lambdas, cfg: "SystemConfig") -> PowerAllocation:
    """Capacity-optimal split of the budget ``N_s`` over parallel streams.

    Parameters
    ----------
    lambdas : array_like
        Strictly positive singular values of the effective channel.
    cfg : SystemConfig
        Supplies the transmit power and noise power.

    Notes
    -----
    Active-set elimination: with the gains sorted in descending order, the
    top ``k`` streams are assumed active, the fill height is solved in
    closed form, and ``k`` shrinks until the weakest active stream has
    nonnegative power.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("need at least one singular value")
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("singular values must be finite and strictly positive; truncate the rank first")
    n_s = lam.size
    # floor of stream i: sigma^2 N_s / (P lambda_i^2)
    floors = cfg.noise_power * n_s / (cfg.power_linear * lam**2)
    order = np.argsort(floors, kind="stable")
    sorted_floors = floors[order]
    csum = np.cumsum(sorted_floors)
    k = n_s
    while k > 1:
        height = (n_s + csum[k - 1]) / k
        if height > sorted_floors[k - 1]:
            break
        k -= 1
    height = (n_s + csum[k - 1]) / k
    p = np.maximum(height - floors, 0.0)
    p[order[k:]] = 0.0
    # renormalize away the rounding residue of the cumulative sum
    p *= n_s / p.sum()
    return PowerAllocation(p=p, water_level=1.0 / (height * math.log(2.0)))


def water_filled_rates(sv2, ranks, power_linear: float, noise_power: float) -> np.ndarray:
    """Vectorized water-filled rate for a batch of squared singular-value profiles.

    Parameters
    ----------
    sv2 : (B, K) array
        Squared singular values, each row sorted descending.
    ranks : (B,) int array
        Number of streams ``N_s`` per row; entries beyond the rank are ignored.
    """
    sv2 = np.atleast_2d(np.asarray(sv2, dtype=float))
    ranks = np.asarray(ranks, dtype=int)
    b, kmax = sv2.shape
    idx = np.arange(kmax)
    active = idx[None, :] < ranks[:, None]
    n_s = np.maximum(ranks, 1).astype(float)
    with np.errstate(divide="ignore"):
        floors = np.where(active, noise_power * n_s[:, None] / (power_linear * np.where(active, sv2, 1.0)), np.inf)
    csum = np.cumsum(np.where(active, floors, 0.0), axis=1)
    counts = idx + 1.0
    heights = (n_s[:, None] + csum) / counts[None, :]
    ok = active & (heights > floors)
    # ok is a prefix in each row; the last True gives the active count
    k = np.maximum(ok.sum(axis=1), 1)
    height = heights[np.arange(b), k - 1]
    p = np.where(active, np.maximum(height[:, None] - floors, 0.0), 0.0)
    snr = power_linear / (noise_power * n_s)
    rates = np.sum(np.log2(1.0 + snr[:, None] * p * np.where(active, sv2, 0.0)), axis=1)
    return np.where(ranks > 0, rates, 0.0)


def normalize_column_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and nonnegative."""
    v = np.array(v, dtype=np.complex128)
    if v.size == 0:
        return v
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    mags = np.abs(pivots)
    rot = np.where(mags > 0, pivots.conj() / np.where(mags > 0, mags, 1.0), 1.0)
    return v * rot[None, :]


@dataclass(frozen=True)
class Precoder:
    """Linear precoder with ``||F||_F^2 = N_s``."""

    f: np.ndarray
    n_s: int
    allocation: PowerAllocation | None = None
    singular_values: np.ndarray | None = None


def design_precoder(h_eff_H, cfg: "SystemConfig", rank_tol: float = DEFAULT_RANK_TOL) -> Precoder:
    """Water-filled SVD precoder for the ``N_b x N_t`` effective channel."""
    svd = truncated_svd(h_eff_H, rank_tol)
    if svd.is_dead:
        raise DeadLinkError("effective channel has rank 0")
    alloc = water_fill(svd.singular_values, cfg)
    v = normalize_column_phases(svd.v)
    f = v * np.sqrt(alloc.p)[None, :]
    return Precoder(f=f, n_s=svd.rank, allocation=alloc, singular_values=svd.singular_values)

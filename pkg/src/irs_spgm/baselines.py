"""Reference phase-shift strategies and a brute-force grid oracle."""

from __future__ import annotations

import itertools

import numpy as np

from .channel import ChannelRealization
from .numerics import DEFAULT_RANK_TOL
from .precoding import water_filled_rates
from .system import PhaseVector, SystemConfig, rates_for_channel

__all__ = [
    "GridTooLargeError",
    "random_phases",
    "exhaustive_random_search",
    "exhaustive_random_search_powers",
    "no_irs_rate",
    "grid_oracle",
    "MAX_GRID_ELEMENTS",
    "MAX_GRID_LEVELS",
]

MAX_GRID_ELEMENTS = 3
MAX_GRID_LEVELS = 512
_CHUNK = 4096


class GridTooLargeError(ValueError):
    """The requested grid search exceeds the supported size."""


def random_phases(n_r: int, rng_seed: int) -> PhaseVector:
    """I.i.d. uniform phases on ``[0, 2 pi)``."""
    rng = np.random.default_rng(rng_seed)
    return PhaseVector(rng.uniform(0.0, 2.0 * np.pi, n_r))


def _candidate_profiles(real, cfg, n_candidates, rng_seed, rank_tol):
    """Yield ``(phases, sv2, ranks)`` chunks for a stream of random candidates.

    The stream is the same one :func:`random_phases` draws from, so the
    first candidate equals ``random_phases(n_r, rng_seed)`` and candidate
    sets for increasing ``n_candidates`` are nested.
    """
    rng = np.random.default_rng(rng_seed)
    h_r_herm = real.h_r.conj().T
    h_d_herm = real.h_d.conj().T
    done = 0
    while done < n_candidates:
        k = min(_CHUNK, n_candidates - done)
        phases = rng.uniform(0.0, 2.0 * np.pi, (k, real.n_r))
        vconj = np.exp(-1j * phases)
        heff = cfg.beta * np.einsum("br,cr,rt->cbt", h_r_herm, vconj, real.m, optimize=True) + h_d_herm
        s = np.linalg.svd(heff, compute_uv=False)
        smax = s[:, :1]
        ranks = np.where(smax[:, 0] > 0, np.sum(s > rank_tol * smax, axis=1), 0)
        yield phases, s**2, ranks
        done += k


def exhaustive_random_search_powers(real: ChannelRealization, cfg: SystemConfig, powers_linear,
                                    n_candidates: int, rng_seed: int,
                                    rank_tol: float = DEFAULT_RANK_TOL):
    """Best-of-``n_candidates`` random phases for each transmit power.

    The candidate stream is drawn once and scored with the water-filled
    rate at every power.  Returns a list of ``(PhaseVector, rate)``.
    """
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    powers = [float(p) for p in powers_linear]
    best_rate = [-np.inf] * len(powers)
    best_phase = [None] * len(powers)
    for phases, sv2, ranks in _candidate_profiles(real, cfg, n_candidates, rng_seed, rank_tol):
        for j, p in enumerate(powers):
            rates = water_filled_rates(sv2, ranks, p, cfg.noise_power)
            i = int(np.argmax(rates))  # first maximum: lowest index wins ties
            if rates[i] > best_rate[j]:
                best_rate[j] = float(rates[i])
                best_phase[j] = phases[i].copy()
    return [(PhaseVector(ph), r) for ph, r in zip(best_phase, best_rate)]


def exhaustive_random_search(real: ChannelRealization, cfg: SystemConfig, n_candidates: int,
                             rng_seed: int, rank_tol: float = DEFAULT_RANK_TOL):
    """Pick the random phase vector with the highest water-filled rate.

    Returns
    -------
    (PhaseVector, float)
        The best candidate and its rate in bits/s/Hz.
    """
    return exhaustive_random_search_powers(real, cfg, [cfg.power_linear], n_candidates,
                                           rng_seed, rank_tol)[0]


def no_irs_rate(real: ChannelRealization, cfg: SystemConfig,
                rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Water-filled rate over the direct link alone."""
    return rates_for_channel(real.h_d.conj().T, cfg, rank_tol).r_tilde


def grid_oracle(real: ChannelRealization, cfg: SystemConfig, levels: int):
    """Exhaustive search of ``Tr(H_eff^H H_eff)`` over a uniform phase grid.

    The trace is evaluated straight from the effective channel, without the
    lifted quadratic form, so it can referee the ADMM solver.

    Returns
    -------
    (PhaseVector, float)
        Best grid point (lowest index on ties) and its trace.

    Raises
    ------
    GridTooLargeError
        For more than three IRS elements or more than 512 levels.
    """
    n_r = real.n_r
    if n_r > MAX_GRID_ELEMENTS or levels > MAX_GRID_LEVELS or levels < 1:
        raise GridTooLargeError(
            f"grid of {levels} levels over {n_r} elements needs {float(levels) ** n_r:.3g} "
            f"evaluations; limits are N_r <= {MAX_GRID_ELEMENTS}, levels <= {MAX_GRID_LEVELS}"
        )
    grid = 2.0 * np.pi * np.arange(levels) / levels
    # H_eff^H = D + sum_r conj(v_r) G_r, flattened
    h_r_herm = real.h_r.conj().T
    d = real.h_d.conj().T.ravel()
    g = np.stack([cfg.beta * np.outer(h_r_herm[:, r], real.m[r, :]).ravel() for r in range(n_r)])
    inner = np.array(list(itertools.product(grid, repeat=n_r - 1))) if n_r > 1 else np.zeros((1, 0))
    inner_v = np.exp(-1j * inner)
    tail = inner_v @ g[1:] if n_r > 1 else np.zeros((1, d.size), dtype=np.complex128)
    best, best_idx = -np.inf, None
    for i0, th0 in enumerate(grid):
        h = d[None, :] + np.exp(-1j * th0) * g[0][None, :] + tail
        tr = np.einsum("ij,ij->i", h.real, h.real) + np.einsum("ij,ij->i", h.imag, h.imag)
        j = int(np.argmax(tr))
        if tr[j] > best:
            best, best_idx = float(tr[j]), (i0, j)
    i0, j = best_idx
    phases = np.concatenate([[grid[i0]], inner[j]])
    return PhaseVector(phases), best

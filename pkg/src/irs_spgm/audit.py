"""Invariant battery run by ``irs-spgm audit``."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .baselines import grid_oracle, random_phases
from .channel import RicianParams, draw_realization
from .design import design
from .harness import trial_seed
from .spgm import QuadraticForm, SolverOptions, build_quadratic_form, lift
from .system import PhaseVector, SystemConfig, effective_channel, rate_report

__all__ = ["Violation", "FAULTS", "audit_instance", "run_audit"]

FAULTS = ("hermitian",)


@dataclass(frozen=True)
class Violation:
    seed: int
    shape: tuple
    invariant: str
    detail: str

    def __str__(self) -> str:
        return f"seed={self.seed} shape={self.shape} invariant={self.invariant}: {self.detail}"


def _corrupt(qf: QuadraticForm, fault: str | None) -> QuadraticForm:
    if fault is None:
        return qf
    if fault == "hermitian":
        t = qf.t_matrix.copy()
        t[0, -1] += 1e-3 * max(np.abs(t).max(), 1.0)
        return replace(qf, t_matrix=t)
    raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")


def audit_instance(cfg: SystemConfig, rician: RicianParams, seed: int,
                   opts: SolverOptions | None = None, grid_levels: int = 128,
                   identity_samples: int = 20, fault: str | None = None) -> list:
    """Check every module invariant on one seeded instance; return the violations."""
    shape = (cfg.n_t, cfg.n_b, cfg.n_r)
    out = []

    def fail(name, detail):
        out.append(Violation(seed, shape, name, detail))

    real = draw_realization(cfg, rician, seed)
    qf = _corrupt(build_quadratic_form(real, cfg), fault)
    try:
        qf.check()
    except ValueError as exc:
        name, _, detail = str(exc).partition(": ")
        fail(name, detail)
        return out

    rng = np.random.default_rng(seed)
    for _ in range(identity_samples):
        v = PhaseVector(rng.uniform(0, 2 * np.pi, cfg.n_r))
        t = np.exp(1j * rng.uniform(0, 2 * np.pi))
        x = lift(v, t)
        q = np.vdot(x, qf.t_matrix @ x)
        h = effective_channel(real, cfg, v)
        direct = float(np.real(np.vdot(h, h)))
        lhs = qf.constant_c - q.real
        if abs(lhs - direct) > 1e-8 * max(abs(direct), 1e-300) or abs(q.imag) > 1e-10 * max(abs(q), 1e-300):
            fail("quadratic_form_identity", f"C - x^H T x = {lhs!r}, trace = {direct!r}")
            break

    res = design(real, cfg, opts)
    rates = res.rates
    if not np.allclose(np.abs(res.v.unit_modulus), 1.0, rtol=0, atol=1e-12):
        fail("unit_modulus", "recovered phase vector is not unit modulus")
    if not rates.dead_link:
        if not rates.bound_chain_ok(1e-9):
            fail("bound_chain", f"r_hat={rates.r_hat!r} r_tilde={rates.r_tilde!r} n_s={rates.n_s}")
        if cfg.n_b == 1 and abs(rates.r_hat - rates.r_tilde) > 1e-9:
            fail("miso_equality", f"r_hat={rates.r_hat!r} r_tilde={rates.r_tilde!r}")
        p = res.allocation.p
        if abs(p.sum() - rates.n_s) > 1e-10 * rates.n_s or np.any(p < 0):
            fail("water_filling_budget", f"sum p = {p.sum()!r}, n_s = {rates.n_s}")
        floors = cfg.noise_power * rates.n_s / (cfg.power_linear * rates.singular_values**2)
        height = res.allocation.fill_height
        act = p > 0
        if np.any(np.abs(height - floors[act] - p[act]) > 1e-10 * max(height, 1.0)) or \
                np.any(height - floors[~act] > 1e-10 * max(height, 1.0)):
            fail("water_filling_kkt", "complementary slackness violated")
        fro = float(np.sum(np.abs(res.precoder.f) ** 2))
        if abs(fro - rates.n_s) > 1e-10 * rates.n_s:
            fail("precoder_power", f"||F||_F^2 = {fro!r}, n_s = {rates.n_s}")
        if abs(rates.r_exact - rates.r_tilde) > 1e-9 * max(1.0, rates.r_tilde):
            fail("diagonalization", f"log-det {rates.r_exact!r} != stream sum {rates.r_tilde!r}")
    rnd = random_phases(cfg.n_r, seed + 3)
    if not rates.dead_link:
        rr = rate_report(real, cfg, rnd)
        if not rr.dead_link and not rr.bound_chain_ok(1e-9):
            fail("bound_chain", f"random phases: r_hat={rr.r_hat!r} r_tilde={rr.r_tilde!r}")
    if cfg.n_r <= 3:
        _, best = grid_oracle(real, cfg, grid_levels)
        if res.admm.trace_gain < 0.99 * best:
            fail("grid_oracle", f"ADMM trace {res.admm.trace_gain!r} < 0.99 x grid optimum {best!r}")
    return out


def run_audit(settings, rician: RicianParams, base: SystemConfig, master_seed: int,
              opts: SolverOptions | None = None, fault: str | None = None) -> list:
    """Run :func:`audit_instance` over every configured shape and instance."""
    violations = []
    for shape in settings.shapes:
        cfg = base.with_(n_t=shape[0], n_b=shape[1], n_r=shape[2])
        for i in range(settings.instances):
            seed = trial_seed(master_seed, i)
            violations += audit_instance(cfg, rician, seed, opts, settings.grid_levels,
                                         settings.identity_samples, fault)
    return violations

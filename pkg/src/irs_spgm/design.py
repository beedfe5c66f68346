"""The complete design pipeline: SPGM phase shifts, then the SVD precoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .precoding import PowerAllocation, Precoder
from .serialize import complex_to_json
from .spgm import AdmmReport, SolverOptions, admm_solve, build_quadratic_form
from .system import PhaseVector, RateReport, SystemConfig, rate_report

__all__ = ["DesignResult", "design"]


@dataclass(frozen=True)
class DesignResult:
    v: PhaseVector
    precoder: Precoder | None
    rates: RateReport
    admm: AdmmReport

    @property
    def allocation(self) -> PowerAllocation | None:
        return self.precoder.allocation if self.precoder is not None else None

    def to_dict(self) -> dict:
        f = self.precoder.f if self.precoder is not None else np.zeros((0, 0))
        p = self.allocation.p if self.allocation is not None else np.zeros(0)
        return {
            "phases": [float(x) for x in self.v.phases],
            "F": complex_to_json(f),
            "power_allocation": [float(x) for x in p],
            "singular_values": [float(x) for x in self.rates.singular_values],
            "n_s": self.rates.n_s,
            "r_hat": self.rates.r_hat,
            "r_tilde": self.rates.r_tilde,
            "r_exact": self.rates.r_exact,
            "trace_gain": self.rates.trace_gain,
            "dead_link": self.rates.dead_link,
            "iterations": self.admm.iterations,
            "converged": self.admm.converged,
            "admm": self.admm.to_dict(),
        }


def design(real: ChannelRealization, cfg: SystemConfig,
           opts: SolverOptions | None = None) -> DesignResult:
    """Phase shifts by ADMM on the sum path gain, then the water-filled precoder."""
    qf = build_quadratic_form(real, cfg)
    rep = admm_solve(qf, opts)
    rates = rate_report(real, cfg, rep.v)
    # rate_report already built the precoder of effective_channel(real, cfg, rep.v)
    return DesignResult(v=rep.v, precoder=rates.precoder, rates=rates, admm=rep)


"""Joint IRS phase-shift and precoder design for point-to-point MIMO links.

The phase shifts maximize the sum of the spatial path gains
``Tr(H_eff^H H_eff)`` with a unit-modulus ADMM solver; the precoder is the
water-filled SVD precoder of the resulting effective channel.
"""

__version__ = "0.1.0"

from .channel import ChannelRealization, RicianParams, draw_realization  # noqa: E402
from .precoding import design_precoder, water_fill  # noqa: E402
from .spgm import SolverOptions, admm_solve, build_quadratic_form  # noqa: E402
from .system import PhaseVector, SystemConfig, effective_channel, rate_report  # noqa: E402
from .design import DesignResult, design  # noqa: E402

__all__ = [
    "ChannelRealization",
    "RicianParams",
    "draw_realization",
    "design_precoder",
    "water_fill",
    "SolverOptions",
    "admm_solve",
    "build_quadratic_form",
    "PhaseVector",
    "SystemConfig",
    "effective_channel",
    "rate_report",
    "DesignResult",
    "design",
]

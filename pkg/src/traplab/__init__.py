"""Trapping of household capital below a poverty line.

Closed-form Gerber-Shiu quantities for a capital process with
exponential growth and Beta(alpha, 1) proportional losses, an exact
simulator to check them, and B1 short-fall fitting for poverty indices.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DegenerateSampleError,
    DivergenceError,
    DomainError,
    ParameterRegimeError,
    TraplabError,
)
from .model import ModelParams, SimConfig, TrappingEvent, monte_carlo, simulate_one  # noqa: E402
from .gerbershiu import (  # noqa: E402
    conditional_expected_trapping_time,
    deficit_cdf_conditional,
    deficit_cdf_discounted,
    deficit_moment,
    deficit_pdf_conditional,
    expected_trapping_time,
    laplace_trapping_time,
    trapping_probability,
)

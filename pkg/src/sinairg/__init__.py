"""Simulation and exact laws for the sign changes of the localization point
of a diffusion in a two-sided Brownian environment."""

from .coarsen import Engine, SignChangeLog, advance_to, chain_at, engine_from_chain, engine_synthetic, run_synthetic_batch
from .envgrid import Path, Slope, SlopeChain, b_value, central_stats, extract_slopes, rescale_path, sample_path
from .errors import (
    DomainError, EmptySample, InsufficientDomain, InsufficientHits, InvalidChain, NonFiniteInput,
    NonMonotoneEvent, SinaiError, TruncationNotConverged, UnsupportedMode, WindowExhausted,
)
from .renewal import count_flips, ldp_tail_estimate, simulate_sign_changes

__version__ = "0.1.0"

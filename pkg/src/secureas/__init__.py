"""
secureas: joint transmit beamforming and antenna selection for secrecy in a
multiuser MIMO downlink with eavesdroppers.

The main entry points are :func:`pdd_solve` (joint design by penalty dual
decomposition), :func:`so_solve` (sequential beamforming then greedy
selection), the reference schemes in :mod:`secureas.benchmarks` and the
Monte Carlo harness :func:`run_scenario`.
"""
__version__ = "0.1.0"

from .benchmarks import energy_scheme, mrt_scheme, random_scheme
from .errors import BracketError, ConfigError, DimensionError, InvariantError, NumericsError, SecureASError
from .model import (
    ChannelSet,
    SecrecyReport,
    SelectionState,
    SystemConfig,
    dbm_to_watts,
    g_bound,
    secrecy_rate,
    watts_to_dbm,
    wssr,
)
from .pdd import PddConfig, PddResult, pdd_solve
from .sim import AggregateResult, ScenarioSpec, desk_profile, full_profile, gen_channels, run_scenario
from .so import SOResult, fp_beamforming, greedy_select, so_solve

__all__ = [
    "SystemConfig", "ChannelSet", "SelectionState", "SecrecyReport",
    "dbm_to_watts", "watts_to_dbm", "wssr", "secrecy_rate", "g_bound",
    "pdd_solve", "PddConfig", "PddResult",
    "so_solve", "SOResult", "fp_beamforming", "greedy_select",
    "random_scheme", "energy_scheme", "mrt_scheme",
    "ScenarioSpec", "AggregateResult", "run_scenario", "gen_channels", "desk_profile", "full_profile",
    "SecureASError", "ConfigError", "DimensionError", "NumericsError", "BracketError", "InvariantError",
]

"""Pseudospectral simulator and estimate checks for the GBBM and BBM-Burgers
equations on a strip of the upper half-plane, periodic in x1 with Dirichlet
walls at x2 = 0 and x2 = L2."""
from .config import ConfigError, RunConfig, parse_config, serialize_config
from .evolve import BlowUpError, NumericalError, PicardError, SimState, rk4_advance, run
from .grid import GridSpec
from .helmholtz import HelmholtzSolver
from .problem import Problem, make_flux, make_gtilde, make_initial, make_signal

__all__ = [
    "ConfigError", "RunConfig", "parse_config", "serialize_config",
    "BlowUpError", "NumericalError", "PicardError", "SimState", "rk4_advance", "run",
    "GridSpec", "HelmholtzSolver", "Problem",
    "make_flux", "make_gtilde", "make_initial", "make_signal",
]
__version__ = "0.1.0"

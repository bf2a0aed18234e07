"""Quantum Fisher information of a noisy H-phi-H phase encoding.

Two routes to the same sensitivity profile: a collision model of a probe
qubit fed by damped ancillas (with its coarse-grained master equation and
closed-form steady state), and a pulse-level simulation of the gate sequence
on a driven, decohering qubit.
"""

from .config import ConfigError, ExperimentConfig, parse_config
from .experiments import SweepResult, run_experiment

__all__ = ["ConfigError", "ExperimentConfig", "SweepResult", "parse_config", "run_experiment"]
__version__ = "0.1.0"

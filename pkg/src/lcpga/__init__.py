"""Genetic-algorithm optimal control of a three-surface diatomic with chirped-pulse fields."""

from .errors import ConfigError, PropagationDiverged, PulseFileError
from .model import (
    Absorber,
    MolecularModel,
    SpatialGrid,
    WavepacketState,
    build_grid,
    initial_wavepacket,
)
from .pulse import LcpParams, PulseEnsemble, field_value, lcp_value
from .propagator import PotentialMatrixCache, PropagatorPlan, build_plan, propagate
from .observables import FitnessConfig, RunObservables, fitness
from .evolver import GaConfig, RunRecord, evolve
from .analysis import PcaResult, TmiChain, assemble_chain, pca, report_processes

__all__ = [
    "Absorber",
    "ConfigError",
    "FitnessConfig",
    "GaConfig",
    "LcpParams",
    "MolecularModel",
    "PcaResult",
    "PotentialMatrixCache",
    "PropagationDiverged",
    "PropagatorPlan",
    "PulseEnsemble",
    "PulseFileError",
    "RunObservables",
    "RunRecord",
    "SpatialGrid",
    "TmiChain",
    "WavepacketState",
    "assemble_chain",
    "build_grid",
    "build_plan",
    "evolve",
    "field_value",
    "fitness",
    "initial_wavepacket",
    "lcp_value",
    "pca",
    "propagate",
    "report_processes",
]

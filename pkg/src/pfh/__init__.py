"""Periodic phase-field toolkit for spatially inhomogeneous double-well energies."""

__version__ = "0.1.0"

from .grid import GridSpec, ScalarField, Spectrum, forward_transform, inverse_transform, read_pfh1, write_pfh1
from .potentials import (
    C0,
    HexWeight,
    Homogeneous,
    HomogenizedPotential,
    PotentialSpec,
    RandomTile,
    Sum,
    Tabulated,
    VaryingExponent,
    VaryingWells,
    c_hom,
    homogenize,
    optimal_profile,
)
from .energy import CellPartition, EnergyBreakdown, EnergyTrace, energy, energy_tv
from .dynamics import FlowConfig, FlowResult, ProximalResult, proximal_step, run_flow, step_semi_implicit, truncate
from .analysis import CounterexampleConfig, DiscrepancyStats, interface_envelope, stochastic_discrepancy, voids_counterexample_energy
from .config import ConfigError, parse_config, preset
from .runner import RunManifest, run

__all__ = [
    "__version__",
    "GridSpec", "ScalarField", "Spectrum", "forward_transform", "inverse_transform", "read_pfh1", "write_pfh1",
    "C0", "PotentialSpec", "Homogeneous", "HexWeight", "RandomTile", "VaryingWells", "VaryingExponent",
    "Tabulated", "Sum", "HomogenizedPotential", "homogenize", "c_hom", "optimal_profile",
    "EnergyBreakdown", "EnergyTrace", "CellPartition", "energy", "energy_tv",
    "FlowConfig", "FlowResult", "ProximalResult", "run_flow", "step_semi_implicit", "truncate", "proximal_step",
    "CounterexampleConfig", "DiscrepancyStats", "voids_counterexample_energy", "stochastic_discrepancy",
    "interface_envelope",
    "ConfigError", "parse_config", "preset", "RunManifest", "run",
]

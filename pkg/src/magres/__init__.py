"""Ferromagnetic thin films as reservoir computers.

Micromagnetic LLG simulation of 5 nm-cell films, a reservoir drive loop,
echo state network baselines, ridge readouts, NARMA / laser benchmarks,
reservoir metrics and a microbial genetic algorithm.
"""

from magres.errors import (
    ConfigError,
    IngestionError,
    InstabilityError,
    NumericalFailure,
    SingularDesignError,
)
from magres.materials import MATERIALS, MaterialParams, get_material

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "IngestionError",
    "InstabilityError",
    "NumericalFailure",
    "SingularDesignError",
    "MATERIALS",
    "MaterialParams",
    "get_material",
]

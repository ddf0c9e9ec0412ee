"""Atomistic material constants for the three ferromagnets (Ni, Co, Fe)."""

from __future__ import annotations

from dataclasses import dataclass, replace

from magres.errors import ConfigError

ANGSTROM = 1e-10

# atoms per conventional cubic unit cell, nearest-neighbour count
CRYSTALS = {
    "fcc": {"atoms_per_unit_cell": 4, "nearest_neighbours": 12},
    "bcc": {"atoms_per_unit_cell": 2, "nearest_neighbours": 8},
}


@dataclass(frozen=True)
class MaterialParams:
    name: str
    crystal: str
    unit_cell_size_a: float  # Angstrom
    atomic_moment_mu_s: float  # Bohr magnetons
    exchange_J_ij: float  # J per link
    anisotropy_k: float  # J per atom
    rescaling_exponent: float
    rescaling_curie_T: float  # K

    def __post_init__(self):
        for field in (
            "unit_cell_size_a",
            "atomic_moment_mu_s",
            "exchange_J_ij",
            "anisotropy_k",
            "rescaling_exponent",
            "rescaling_curie_T",
        ):
            value = getattr(self, field)
            if not value > 0:
                raise ConfigError(f"{self.name}: {field} must be positive, got {value}")

    @property
    def lattice_constant(self) -> float:
        """Unit cell edge in metres."""
        return self.unit_cell_size_a * ANGSTROM

    def with_exchange(self, J_ij: float) -> "MaterialParams":
        # bypasses the positivity check so that J = 0 can be explored
        obj = object.__new__(MaterialParams)
        for k, v in self.__dict__.items():
            object.__setattr__(obj, k, v)
        object.__setattr__(obj, "exchange_J_ij", J_ij)
        return obj

    def replace(self, **changes) -> "MaterialParams":
        return replace(self, **changes)


MATERIALS = {
    "Ni": MaterialParams("Ni", "fcc", 3.524, 0.606, 2.757e-21, 5.47e-26, 2.322, 635.0),
    "Co": MaterialParams("Co", "fcc", 2.507, 1.72, 6.064e-21, 6.69e-24, 2.369, 1395.0),
    "Fe": MaterialParams("Fe", "bcc", 2.866, 2.22, 7.050e-21, 5.65e-25, 2.876, 1049.0),
}


def get_material(name: str) -> MaterialParams:
    try:
        return MATERIALS[name]
    except KeyError:
        raise ConfigError(
            f"unknown material {name!r}; choose one of {sorted(MATERIALS)}"
        ) from None

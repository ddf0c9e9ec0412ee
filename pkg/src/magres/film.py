"""A magnetic film read as a reservoir.

Each input sample sets a z-directed field on every cell, the film is
integrated for one input interval (10 ps by default) and the magnetisation
of every cell is recorded as one state row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from magres.errors import ConfigError, InstabilityError
from magres.materials import MaterialParams, get_material
from magres.spin import (
    CELL_SIZE,
    DEFAULT_THICKNESS,
    DRIVE_NORM_TOL,
    Film,
    FilmState,
    derive_cell_params,
    write_snapshot,
)

log = logging.getLogger(__name__)

INPUT_INTERVAL = 10e-12
DEFAULT_DT = 100e-15
U_BIAS = 1.0

# StateMatrix: float array of shape (time steps, observed components)


@dataclass
class ReservoirGenome:
    w_in: np.ndarray  # (n_cells, 2): input and bias weights, tesla per unit input
    b: float = 1.0
    alpha_damping: float = 0.1
    leak_a: float = 1.0
    material: MaterialParams = field(default_factory=lambda: get_material("Co"))
    side: int = 7
    thickness: float = DEFAULT_THICKNESS
    temperature: float = 0.0
    dt: float = DEFAULT_DT
    thermal_seed: int = 0
    dipole_cutoff: float | None = None
    norm_tol: float = DRIVE_NORM_TOL

    def __post_init__(self):
        self.w_in = np.asarray(self.w_in, dtype=float)
        if self.w_in.shape != (self.side * self.side, 2):
            raise ConfigError(
                f"w_in must have shape ({self.side * self.side}, 2), got {self.w_in.shape}"
            )
        if not np.all(np.isfinite(self.w_in)):
            raise ConfigError("w_in entries must be finite")
        if not 0 < self.b <= 2:
            raise ConfigError(f"b must lie in (0, 2], got {self.b}")
        if not 0 < self.alpha_damping <= 1:
            raise ConfigError(f"alpha_damping must lie in (0, 1], got {self.alpha_damping}")
        if not 0 < self.leak_a <= 1:
            raise ConfigError(f"leak_a must lie in (0, 1], got {self.leak_a}")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.dt <= 0 or self.dt > INPUT_INTERVAL:
            raise ConfigError(f"dt must lie in (0, {INPUT_INTERVAL}], got {self.dt}")

    @property
    def n_cells(self) -> int:
        return self.side * self.side

    @property
    def substeps(self) -> int:
        return int(round(INPUT_INTERVAL / self.dt))

    def replace(self, **changes) -> "ReservoirGenome":
        return replace(self, **changes)


def make_film(genome: ReservoirGenome) -> Film:
    params = derive_cell_params(
        genome.material,
        CELL_SIZE,
        genome.thickness,
        alpha_damping=genome.alpha_damping,
        temperature=genome.temperature,
    )
    return Film(params, genome.side, genome.side, dipole_cutoff=genome.dipole_cutoff)


def applied_field(genome: ReservoirGenome, u: float) -> np.ndarray:
    """Per-cell applied field (n_cells, 3) for one input sample; z component only."""
    out = np.zeros((genome.n_cells, 3))
    out[:, 2] = genome.b * (genome.w_in[:, 0] * u + genome.w_in[:, 1] * U_BIAS)
    return out


def relax_film(
    genome: ReservoirGenome,
    film: Film | None = None,
    tol: float = 1e-7,
    max_steps: int = 200_000,
    chunk: int = 100,
) -> FilmState:
    """Integrate the undriven film from the all +x state until it stops moving.

    Relaxation runs at zero temperature so that every phase of an evaluation
    starts from the same deterministic state. It uses a step of at least
    ``DEFAULT_DT`` so that the per-step ``tol`` means the same thing whatever
    integrator step the drive loop uses.
    """
    film = film or make_film(genome)
    state = film.initial_state()
    zero = np.zeros((film.n_cells, 3))
    dt = max(genome.dt, DEFAULT_DT)
    steps = 0
    while steps < max_steps:
        n = min(chunk, max_steps - steps)
        change = film.run(state, zero, n, dt, norm_tol=genome.norm_tol)
        steps += n
        if change < tol:
            break
    else:
        log.warning("relax_film: step cap %d reached, last change %.3g", max_steps, change)
    state.time = 0.0
    return state


def drive_film(
    genome: ReservoirGenome,
    inputs,
    state: FilmState | None = None,
    rng: np.random.Generator | None = None,
    film: Film | None = None,
    snapshot_dir=None,
    snapshot_components: str = "z",
) -> np.ndarray:
    """Drive the film with ``inputs`` and return the (T, 3 * n_cells) state matrix.

    Rows hold (m_x, m_y, m_z) of every cell sampled at the end of each input
    window. ``state`` defaults to the relaxed film and is advanced in place.
    """
    u = np.asarray(inputs, dtype=float)
    if u.ndim != 1 or not np.all(np.isfinite(u)):
        raise ConfigError("inputs must be a finite 1-d sequence")
    film = film or make_film(genome)
    if state is None:
        state = relax_film(genome, film)
    if genome.temperature > 0 and rng is None:
        rng = np.random.default_rng(genome.thermal_seed)
    if snapshot_dir is not None:
        snapshot_dir = Path(snapshot_dir)
        snapshot_dir.mkdir(parents=True, exist_ok=True)
    n_sub = genome.substeps
    rows = np.empty((len(u), 3 * film.n_cells))
    for t, value in enumerate(u):
        try:
            film.run(
                state, applied_field(genome, value), n_sub, genome.dt,
                T=genome.temperature, rng=rng, norm_tol=genome.norm_tol,
            )
        except InstabilityError as exc:
            raise InstabilityError(f"input {t}: {exc}", input_index=t) from exc
        rows[t] = state.m.reshape(-1)
        if snapshot_dir is not None:
            write_snapshot(snapshot_dir / f"snap_{t:06d}.csv", state, snapshot_components)
    return rows


def leaky_filter(states: np.ndarray, leak_a: float) -> np.ndarray:
    """X_f(t) = (1 - a) X_f(t-1) + a X(t), with X_f(0) = X(0)."""
    if not 0 < leak_a <= 1:
        raise ConfigError(f"leak_a must lie in (0, 1], got {leak_a}")
    x = np.asarray(states, dtype=float)
    out = np.empty_like(x)
    if len(x) == 0:
        return out
    out[0] = x[0]
    keep = 1.0 - leak_a
    for t in range(1, len(x)):
        out[t] = keep * out[t - 1] + leak_a * x[t]
    return out


def washout_converges(
    genome: ReservoirGenome,
    inputs,
    horizon: int = 50,
    tol: float = 1e-3,
    seed: int = 0,
) -> bool:
    """Check that two different initial states forget their origin under the same input.

    Compares the relaxed start with a random unit-vector start; returns True
    when the state-row distance falls below ``tol`` within ``horizon`` steps.
    """
    film = make_film(genome)
    a = relax_film(genome, film)
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((film.n_cells, 3))
    b = FilmState(m / np.linalg.norm(m, axis=1, keepdims=True), film.nx, film.ny)
    ra = drive_film(genome, inputs, a, film=film, rng=np.random.default_rng(genome.thermal_seed))
    rb = drive_film(genome, inputs, b, film=film, rng=np.random.default_rng(genome.thermal_seed))
    dist = np.linalg.norm(ra - rb, axis=1)
    return bool(np.any(dist[:horizon] < tol))

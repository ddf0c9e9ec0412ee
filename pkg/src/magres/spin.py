"""Micromagnetic spin model of a thin ferromagnetic film.

Cell constants are coarse grained from the atomistic material rows, fields
are expressed in tesla and the LLG equation is integrated with a Heun
predictor-corrector. The numpy functions here are the reference path; the
film drive loop goes through :class:`Film`, which calls the compiled kernel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import constants

from magres.errors import ConfigError, InstabilityError, NumericalFailure
from magres.kernels import effective_field_kernel, heun_run
from magres.materials import CRYSTALS, MaterialParams

log = logging.getLogger(__name__)

MU_B = constants.physical_constants["Bohr magneton"][0]
K_B = constants.k
MU_0 = constants.mu_0
GAMMA_E = constants.physical_constants["electron gyromag. ratio"][0]  # rad s^-1 T^-1

CELL_SIZE = 5e-9
DEFAULT_THICKNESS = 0.1e-9
# spin-wave correction to the mean-field Curie temperature (3D Heisenberg)
CURIE_EPSILON = 0.86
NORM_TOL = 1e-6
# drive loops: ~0.25 rad rotation per step, beyond which Heun is not trustworthy
DRIVE_NORM_TOL = 1e-3


@dataclass(frozen=True)
class CellParams:
    Ms: float
    k_u: float
    A_ex: float
    gamma: float
    alpha_damping: float
    cell_size_delta: float
    thickness: float
    m_e: float
    n_atoms_per_cell: float
    rescaling_exponent: float = 1.0
    rescaling_curie_T: float = np.inf

    def __post_init__(self):
        if not (self.Ms > 0 and self.k_u > 0 and self.A_ex > 0):
            raise ConfigError("Ms, k_u and A_ex must be positive")
        # zero damping is allowed here for conservative-dynamics checks
        if not 0 <= self.alpha_damping <= 1:
            raise ConfigError(f"alpha_damping must lie in [0, 1], got {self.alpha_damping}")
        if not 0 < self.m_e <= 1:
            raise ConfigError(f"m_e must lie in (0, 1], got {self.m_e}")

    @property
    def volume(self) -> float:
        return self.cell_size_delta**2 * self.thickness

    @property
    def anisotropy_field(self) -> float:
        """Coefficient of m_z in the uniaxial anisotropy field (T)."""
        return 2.0 * self.k_u / self.Ms

    @property
    def exchange_field(self) -> float:
        """Coefficient multiplying sum_j (m_j - m_i) in the exchange field (T)."""
        return 2.0 * self.A_ex / (self.Ms * self.cell_size_delta**2 * self.m_e**2)

    def with_damping(self, alpha: float) -> "CellParams":
        return replace(self, alpha_damping=alpha)


def mean_field_curie_T(mat: MaterialParams, epsilon: float = CURIE_EPSILON) -> float:
    """Mean-field Curie temperature from the nearest-neighbour exchange.

    For a lattice of identical atoms the double sum over atoms in a cell and
    their ``z`` neighbours reduces to ``N_c * z * J``, so ``N_c`` cancels.
    """
    crystal = _crystal(mat.crystal)
    z = crystal["nearest_neighbours"]
    return epsilon * z * mat.exchange_J_ij / (3.0 * K_B)


def rescaled_temperature(T: float, exponent: float, curie_T: float) -> float:
    """Map an experimental temperature onto the classical simulation scale."""
    if T < 0:
        raise ConfigError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return 0.0
    return curie_T * (T / curie_T) ** exponent


def equilibrium_magnetisation(T: float, mat: MaterialParams) -> float:
    """Reduced magnetisation m_e(T) from a Curie-Bloch law on the rescaled scale."""
    t_int = rescaled_temperature(T, mat.rescaling_exponent, mat.rescaling_curie_T)
    ratio = t_int / mat.rescaling_curie_T
    if ratio >= 1:
        raise ConfigError(
            f"{mat.name}: T={T} K is at or above the Curie temperature; film is paramagnetic"
        )
    return (1.0 - ratio) ** (1.0 / 3.0)


def _crystal(name: str) -> dict:
    try:
        return CRYSTALS[name]
    except KeyError:
        raise ConfigError(
            f"unsupported crystal structure {name!r}; expected one of {sorted(CRYSTALS)}"
        ) from None


def derive_cell_params(
    mat: MaterialParams,
    cell_size: float = CELL_SIZE,
    thickness: float = DEFAULT_THICKNESS,
    alpha_damping: float = 0.1,
    temperature: float = 0.0,
) -> CellParams:
    if cell_size <= 0 or thickness <= 0:
        raise ConfigError("cell size and thickness must be positive")
    crystal = _crystal(mat.crystal)
    a = mat.lattice_constant
    n_uc = crystal["atoms_per_unit_cell"]
    volume = cell_size * cell_size * thickness
    n_atoms = n_uc * volume / a**3
    return CellParams(
        Ms=n_atoms * mat.atomic_moment_mu_s * MU_B / volume,
        k_u=n_atoms * mat.anisotropy_k / volume,
        A_ex=n_uc * mat.exchange_J_ij / (2.0 * a),
        gamma=GAMMA_E,
        alpha_damping=alpha_damping,
        cell_size_delta=cell_size,
        thickness=thickness,
        m_e=equilibrium_magnetisation(temperature, mat),
        n_atoms_per_cell=n_atoms,
        rescaling_exponent=mat.rescaling_exponent,
        rescaling_curie_T=mat.rescaling_curie_T,
    )


@dataclass
class FilmState:
    """Unit magnetisation per cell, stored flat as (nx * ny, 3) in row-major order."""

    m: np.ndarray
    nx: int
    ny: int
    time: float = 0.0

    @classmethod
    def uniform(cls, nx: int, ny: int, direction=(1.0, 0.0, 0.0)) -> "FilmState":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(np.tile(d, (nx * ny, 1)), nx, ny)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def grid(self) -> np.ndarray:
        """View of the spins as (ny, nx, 3)."""
        return self.m.reshape(self.ny, self.nx, 3)

    def copy(self) -> "FilmState":
        return FilmState(self.m.copy(), self.nx, self.ny, self.time)

    def max_norm_error(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.m, axis=1) - 1.0)))


@dataclass
class FieldSample:
    applied: np.ndarray
    anisotropy: np.ndarray
    exchange: np.ndarray
    dipole: np.ndarray
    thermal: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.applied + self.anisotropy + self.exchange + self.dipole + self.thermal


def cell_positions(nx: int, ny: int, cell_size: float) -> np.ndarray:
    y, x = np.divmod(np.arange(nx * ny), nx)
    return np.column_stack([x * cell_size, y * cell_size, np.zeros(nx * ny)])


def neighbour_table(nx: int, ny: int) -> np.ndarray:
    """In-plane 4-neighbour indices with open boundaries, padded with -1."""
    table = np.full((nx * ny, 4), -1, dtype=np.int64)
    for i in range(nx * ny):
        y, x = divmod(i, nx)
        found = [
            yy * nx + xx
            for xx, yy in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1))
            if 0 <= xx < nx and 0 <= yy < ny
        ]
        table[i, : len(found)] = found
    return table


def dipole_matrix(nx: int, ny: int, params: CellParams, cutoff: float | None = None) -> np.ndarray:
    """Dense (3N, 3N) map from unit directions to dipole field in tesla.

    Includes the self-demagnetisation term on the diagonal blocks.
    """
    n = nx * ny
    pos = cell_positions(nx, ny, params.cell_size_delta)
    moment = params.Ms * params.volume
    r = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(r, axis=-1)
    np.fill_diagonal(dist, np.inf)
    rhat = r / dist[..., None]
    eye = np.eye(3)
    blocks = 3.0 * rhat[..., :, None] * rhat[..., None, :] - eye
    blocks *= (MU_0 / (4 * np.pi) * moment / dist**3)[..., None, None]
    if cutoff is not None:
        blocks[dist > cutoff] = 0.0
    idx = np.arange(n)
    blocks[idx, idx] = -MU_0 * params.Ms / 3.0 * eye
    return blocks.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)


def dipole_field_direct(state: FilmState, params: CellParams, cutoff: float | None = None) -> np.ndarray:
    """Pairwise point-dipole sum evaluated cell by cell (reference path)."""
    pos = cell_positions(state.nx, state.ny, params.cell_size_delta)
    moment = params.Ms * params.volume
    out = np.empty_like(state.m)
    for i in range(state.n_cells):
        r = pos[i] - pos
        dist = np.linalg.norm(r, axis=1)
        mask = dist > 0
        if cutoff is not None:
            mask &= dist <= cutoff
        rhat = r[mask] / dist[mask, None]
        mu = moment * state.m[mask]
        proj = np.sum(mu * rhat, axis=1)
        terms = (3 * proj[:, None] * rhat - mu) / dist[mask, None] ** 3
        out[i] = MU_0 / (4 * np.pi) * terms.sum(axis=0)
        out[i] -= MU_0 * moment * state.m[i] / (3 * params.volume)
    return out


def thermal_sigma(params: CellParams, T: float, dt: float) -> float:
    """Per-component standard deviation (T) of the thermal field."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    t_int = rescaled_temperature(T, params.rescaling_exponent, params.rescaling_curie_T)
    if t_int == 0:
        return 0.0
    return float(
        np.sqrt(2 * params.alpha_damping * K_B * t_int / (params.gamma * params.Ms * params.volume * dt))
    )


def thermal_field(params: CellParams, T: float, dt: float, rng: np.random.Generator, n_cells: int) -> np.ndarray:
    sigma = thermal_sigma(params, T, dt)
    if sigma == 0:
        return np.zeros((n_cells, 3))
    return sigma * rng.standard_normal((n_cells, 3))


def _as_applied(applied, n_cells: int) -> np.ndarray:
    if applied is None:
        return np.zeros((n_cells, 3))
    out = np.broadcast_to(np.asarray(applied, dtype=float), (n_cells, 3))
    return np.array(out)


def effective_field(
    state: FilmState,
    params: CellParams,
    applied=None,
    T: float = 0.0,
    dt: float | None = None,
    rng: np.random.Generator | None = None,
    cutoff: float | None = None,
    thermal: np.ndarray | None = None,
) -> FieldSample:
    """Evaluate every field term for each cell.

    ``thermal`` may be passed to reuse a pre-drawn noise sample; otherwise it
    is drawn from ``rng`` when ``T > 0`` (which then also requires ``dt``).
    """
    if T < 0:
        raise ConfigError("temperature must be >= 0")
    m = state.m
    n = state.n_cells
    app = _as_applied(applied, n)
    ani = np.zeros_like(m)
    ani[:, 2] = params.anisotropy_field * m[:, 2]
    exc = np.zeros_like(m)
    nb = neighbour_table(state.nx, state.ny)
    for k in range(4):
        j = nb[:, k]
        ok = j >= 0
        exc[ok] += m[j[ok]] - m[ok]
    exc *= params.exchange_field
    dip = dipole_field_direct(state, params, cutoff)
    if thermal is None:
        if T > 0:
            if dt is None or rng is None:
                raise ConfigError("thermal field needs dt and rng when T > 0")
            thermal = thermal_field(params, T, dt, rng, n)
        else:
            thermal = np.zeros_like(m)
    sample = FieldSample(app, ani, exc, dip, thermal)
    total = sample.total
    bad = ~np.isfinite(total)
    if bad.any():
        cell = int(np.argwhere(bad)[0, 0])
        raise NumericalFailure(f"non-finite effective field at cell {cell}", cell=cell)
    return sample


def llg_rhs(m: np.ndarray, h: np.ndarray, gamma: float, alpha: float) -> np.ndarray:
    mxh = np.cross(m, h)
    return -gamma / (1 + alpha**2) * (mxh + alpha * np.cross(m, mxh))


def llg_step(
    state: FilmState,
    params: CellParams,
    applied=None,
    T: float = 0.0,
    dt: float = 1e-13,
    rng: np.random.Generator | None = None,
    cutoff: float | None = None,
    norm_tol: float = NORM_TOL,
) -> FilmState:
    """One Heun step of the LLG equation (numpy reference implementation)."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    noise = None
    if T > 0:
        if rng is None:
            raise ConfigError("rng is required when T > 0")
        noise = thermal_field(params, T, dt, rng, state.n_cells)
    gamma, alpha = params.gamma, params.alpha_damping
    h1 = effective_field(state, params, applied, T, cutoff=cutoff, thermal=noise).total
    k1 = llg_rhs(state.m, h1, gamma, alpha)
    mp = state.m + dt * k1
    mp /= np.linalg.norm(mp, axis=1, keepdims=True)
    pred = FilmState(mp, state.nx, state.ny, state.time + dt)
    h2 = effective_field(pred, params, applied, T, cutoff=cutoff, thermal=noise).total
    k2 = llg_rhs(mp, h2, gamma, alpha)
    m_new = state.m + 0.5 * dt * (k1 + k2)
    norms = np.linalg.norm(m_new, axis=1, keepdims=True)
    drift = float(np.max(np.abs(norms - 1)))
    if not drift <= norm_tol:
        raise InstabilityError(f"norm drift {drift:.3g} exceeds {norm_tol:g}; reduce dt")
    return FilmState(m_new / norms, state.nx, state.ny, state.time + dt)


def film_energy(state: FilmState, params: CellParams, applied=None, cutoff: float | None = None) -> float:
    """Total magnetic energy (J) consistent with the effective field terms."""
    m = state.m
    mv = params.Ms * params.volume
    app = _as_applied(applied, state.n_cells)
    zeeman = -mv * np.sum(m * app)
    anis = -params.k_u * params.volume * np.sum(m[:, 2] ** 2)
    nb = neighbour_table(state.nx, state.ny)
    exch = 0.0
    for k in range(4):
        j = nb[:, k]
        ok = j > np.arange(state.n_cells)  # each link once
        exch += np.sum((m[j[ok]] - m[ok]) ** 2)
    exch *= params.A_ex * params.volume / (params.cell_size_delta**2 * params.m_e**2)
    dip = -0.5 * mv * np.sum(m * dipole_field_direct(state, params, cutoff))
    return float(zeeman + anis + exch + dip)


@dataclass
class Film:
    """A film geometry with its precomputed couplings, driving the compiled kernel."""

    params: CellParams
    nx: int
    ny: int
    dipole_cutoff: float | None = None
    include_dipole: bool = True
    neighbours: np.ndarray = field(init=False, repr=False)
    dipole: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("film must have at least one cell")
        self.neighbours = neighbour_table(self.nx, self.ny)
        if self.include_dipole:
            self.dipole = dipole_matrix(self.nx, self.ny, self.params, self.dipole_cutoff)
        else:
            self.dipole = np.zeros((0, 0))

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def initial_state(self) -> FilmState:
        return FilmState.uniform(self.nx, self.ny, (1.0, 0.0, 0.0))

    def field(self, state: FilmState, applied=None, thermal=None) -> np.ndarray:
        app = _as_applied(applied, self.n_cells)
        noise = np.zeros_like(app) if thermal is None else np.asarray(thermal, dtype=float)
        return effective_field_kernel(
            state.m, app, noise, self.params.anisotropy_field, self.params.exchange_field,
            self.neighbours, self.dipole,
        )

    def run(
        self,
        state: FilmState,
        applied,
        n_steps: int,
        dt: float,
        T: float = 0.0,
        rng: np.random.Generator | None = None,
        norm_tol: float = NORM_TOL,
    ) -> float:
        """Integrate ``n_steps`` in place under a constant applied field.

        Returns the largest component change seen in the final step.
        """
        app = _as_applied(applied, self.n_cells)
        sigma = thermal_sigma(self.params, T, dt) if T > 0 else 0.0
        if sigma > 0:
            if rng is None:
                raise ConfigError("rng is required when T > 0")
            noise = sigma * rng.standard_normal((n_steps, self.n_cells, 3))
        else:
            noise = np.zeros((0, self.n_cells, 3))
        drift, change = heun_run(
            state.m, n_steps, dt, self.params.gamma, self.params.alpha_damping, app, noise,
            self.params.anisotropy_field, self.params.exchange_field, self.neighbours, self.dipole,
        )
        state.time += n_steps * dt
        if not drift <= norm_tol:
            raise InstabilityError(f"norm drift {drift:.3g} exceeds {norm_tol:g}; reduce dt")
        return change


def write_snapshot(path, state: FilmState, components: str = "z") -> Path:
    """Write one CSV grid per requested component (row-major, ``ny`` rows).

    The first line is ``# t=<seconds> nx=<Nx> ny=<Ny>``; when more than one
    component is written each grid is preceded by ``# component=m<c>``.
    """
    path = Path(path)
    axis = {"x": 0, "y": 1, "z": 2}
    lines = [f"# t={state.time:.6e} nx={state.nx} ny={state.ny}"]
    grid = state.grid
    for c in components:
        if len(components) > 1:
            lines.append(f"# component=m{c}")
        for row in grid[:, :, axis[c]]:
            lines.append(",".join(f"{v:.9e}" for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path) -> tuple[float, dict[str, np.ndarray]]:
    text = Path(path).read_text().splitlines()
    header = dict(tok.split("=") for tok in text[0].lstrip("# ").split())
    t = float(header["t"])
    grids: dict[str, list] = {}
    current = "mz"
    for line in text[1:]:
        if line.startswith("# component="):
            current = line.split("=", 1)[1]
            continue
        grids.setdefault(current, []).append([float(v) for v in line.split(",")])
    return t, {k: np.array(v) for k, v in grids.items()}

"""Genotype encodings and task scoring for film and ESN reservoirs.

Every split (train / validation / test) is driven separately from the same
starting state, its first ``washout`` rows are dropped and a ridge readout
is fitted on the training rows with lambda chosen on validation NMSE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from magres.esn import EsnConfig, drive_esn, make_lattice_esn, make_random_esn
from magres.evolve import GenotypeSpace
from magres.film import ReservoirGenome, drive_film, leaky_filter, make_film, relax_film
from magres.readout import RIDGE_GRID, Score, fit_and_score
from magres.tasks import TaskData

SPLITS = ("train", "val", "test")
MIN_SCALE = 0.01
SEED_SPAN = 2**31


def film_space(n_cells: int) -> GenotypeSpace:
    genes = [(f"w_u{i}", -1.0, 1.0) for i in range(n_cells)]
    genes += [(f"w_bias{i}", -1.0, 1.0) for i in range(n_cells)]
    genes += [("b", MIN_SCALE, 2.0), ("alpha_damping", MIN_SCALE, 1.0), ("leak_a", MIN_SCALE, 1.0)]
    return GenotypeSpace.from_pairs(genes)


def decode_film(vec: np.ndarray, template: ReservoirGenome) -> ReservoirGenome:
    n = template.n_cells
    w_in = np.column_stack([vec[:n], vec[n: 2 * n]])
    return template.replace(
        w_in=w_in, b=float(vec[2 * n]), alpha_damping=float(vec[2 * n + 1]), leak_a=float(vec[2 * n + 2])
    )


def encode_film(genome: ReservoirGenome) -> np.ndarray:
    return np.concatenate(
        [genome.w_in[:, 0], genome.w_in[:, 1], [genome.b, genome.alpha_damping, genome.leak_a]]
    )


def film_states(genome: ReservoirGenome, task: TaskData) -> dict[str, np.ndarray]:
    """Leaky-filtered state matrices for each split of ``task``."""
    film = make_film(genome)
    start = relax_film(genome, film)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(genome.thermal_seed).spawn(3)]
    out = {}
    for name, rng in zip(SPLITS, rngs):
        u, _ = task.split(name)
        raw = drive_film(genome, u, start.copy(), rng=rng, film=film)
        out[name] = leaky_filter(raw, genome.leak_a)
    return out


def evaluate_film(genome: ReservoirGenome, task: TaskData, grid=RIDGE_GRID) -> Score:
    states = film_states(genome, task)
    return fit_and_score(*((states[s], task.split(s)[1]) for s in SPLITS), grid=grid, washout=task.washout)


@dataclass(frozen=True)
class EsnEncoding:
    """Maps a genotype to an ESN.

    By default the genes are (b, c, leak_a, regeneration seed). With
    ``evolve_weights`` the sparsity pattern is fixed by ``base_seed`` and the
    non-zero input and internal weights become genes as well.
    """

    n_nodes: int
    topology: str = "random"
    evolve_weights: bool = False
    base_seed: int = 0
    weight_bound: float = 3.0

    @property
    def side(self) -> int:
        side = int(round(np.sqrt(self.n_nodes)))
        return side

    def build(self, seed: int, b=1.0, c=1.0, leak_a=1.0) -> EsnConfig:
        if self.topology == "lattice":
            return make_lattice_esn(self.side, seed, b, c, leak_a)
        return make_random_esn(self.n_nodes, seed, b, c, leak_a)

    def _template(self) -> EsnConfig:
        return self.build(self.base_seed)

    def space(self) -> GenotypeSpace:
        genes = [("b", MIN_SCALE, 2.0), ("c", MIN_SCALE, 2.0), ("leak_a", MIN_SCALE, 1.0)]
        if self.evolve_weights:
            t = self._template()
            k = np.count_nonzero(t.w_in) + np.count_nonzero(t.w)
            genes += [(f"weight{i}", -self.weight_bound, self.weight_bound) for i in range(k)]
        else:
            genes.append(("seed", 0.0, 1.0))
        return GenotypeSpace.from_pairs(genes)

    def decode(self, vec: np.ndarray) -> EsnConfig:
        b, c, leak = (float(v) for v in vec[:3])
        if not self.evolve_weights:
            seed = int(min(vec[3], np.nextafter(1.0, 0.0)) * SEED_SPAN)
            return self.build(seed, b, c, leak)
        t = self._template()
        w_in, w = t.w_in.copy(), t.w.copy()
        k_in = np.count_nonzero(w_in)
        w_in[w_in != 0] = vec[3: 3 + k_in]
        w[w != 0] = vec[3 + k_in:]
        return t.replace(w_in=w_in, w=w, b=b, c=c, leak_a=leak)


def esn_states(cfg: EsnConfig, task: TaskData) -> dict[str, np.ndarray]:
    return {name: drive_esn(cfg, task.split(name)[0]) for name in SPLITS}


def evaluate_esn(cfg: EsnConfig, task: TaskData, grid=RIDGE_GRID) -> Score:
    states = esn_states(cfg, task)
    return fit_and_score(*((states[s], task.split(s)[1]) for s in SPLITS), grid=grid, washout=task.washout)

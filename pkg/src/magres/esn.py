"""Echo state network baselines: sparse random and Moore-lattice reservoirs."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from magres.errors import ConfigError

SPARSITY = 0.1
U_BIAS = 1.0


@dataclass
class EsnConfig:
    w_in: np.ndarray  # (n, 2)
    w: np.ndarray  # (n, n)
    b: float = 1.0
    c: float = 1.0
    leak_a: float = 1.0
    topology: str = "random"

    def __post_init__(self):
        n = self.w.shape[0]
        if self.w.shape != (n, n) or self.w_in.shape != (n, 2):
            raise ConfigError(f"inconsistent ESN shapes w_in={self.w_in.shape}, w={self.w.shape}")
        if not 0 < self.leak_a <= 1:
            raise ConfigError(f"leak_a must lie in (0, 1], got {self.leak_a}")
        if self.topology not in ("random", "lattice"):
            raise ConfigError(f"unknown topology {self.topology!r}")

    @property
    def n_nodes(self) -> int:
        return self.w.shape[0]

    def replace(self, **changes) -> "EsnConfig":
        return replace(self, **changes)


def esn_update(cfg: EsnConfig, x_prev: np.ndarray, u: float) -> np.ndarray:
    pre = cfg.b * (cfg.w_in[:, 0] * u + cfg.w_in[:, 1] * U_BIAS) + cfg.c * (cfg.w @ x_prev)
    return (1 - cfg.leak_a) * x_prev + cfg.leak_a * np.tanh(pre)


def drive_esn(cfg: EsnConfig, inputs, x0: np.ndarray | None = None) -> np.ndarray:
    """Run the update over ``inputs`` from a zero state; returns (T, n_nodes)."""
    u = np.asarray(inputs, dtype=float)
    x = np.zeros(cfg.n_nodes) if x0 is None else np.asarray(x0, dtype=float).copy()
    w = sparse.csr_matrix(cfg.c * cfg.w)
    drive = cfg.b * (np.outer(u, cfg.w_in[:, 0]) + cfg.w_in[:, 1] * U_BIAS)
    keep = 1 - cfg.leak_a
    out = np.empty((len(u), cfg.n_nodes))
    for t in range(len(u)):
        x = keep * x + cfg.leak_a * np.tanh(drive[t] + w @ x)
        out[t] = x
    return out


def _sparse_normal(rng: np.random.Generator, shape, density: float) -> np.ndarray:
    mask = rng.random(shape) < density
    return np.where(mask, rng.standard_normal(shape), 0.0)


def make_random_esn(n: int, seed: int, b: float = 1.0, c: float = 1.0, leak_a: float = 1.0) -> EsnConfig:
    if n < 1:
        raise ConfigError("n must be >= 1")
    rng = np.random.default_rng(seed)
    w_in = _sparse_normal(rng, (n, 2), SPARSITY)
    w = _sparse_normal(rng, (n, n), SPARSITY)
    return EsnConfig(w_in, w, b, c, leak_a, "random")


def lattice_mask(side: int) -> np.ndarray:
    """Moore-neighbourhood adjacency (with self loops) for a side x side grid."""
    n = side * side
    mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        y, x = divmod(i, side)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                yy, xx = y + dy, x + dx
                if 0 <= yy < side and 0 <= xx < side:
                    mask[i, yy * side + xx] = True
    return mask


def make_lattice_esn(side: int, seed: int, b: float = 1.0, c: float = 1.0, leak_a: float = 1.0) -> EsnConfig:
    if side < 2:
        raise ConfigError("side must be >= 2")
    rng = np.random.default_rng(seed)
    n = side * side
    w_in = _sparse_normal(rng, (n, 2), SPARSITY)
    w = np.where(lattice_mask(side), rng.standard_normal((n, n)), 0.0)
    return EsnConfig(w_in, w, b, c, leak_a, "lattice")

"""Benchmark data: NARMA-n and the Santa Fe laser series (dataset A)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from magres.errors import ConfigError, IngestionError
from magres.readout import WASHOUT

log = logging.getLogger(__name__)

NARMA_COEFFS = {"alpha": 0.3, "beta": 0.05, "gamma": 0.1}
# a 30-term sum with the coefficients above diverges for every draw; the
# thirtieth-order system uses the usual weaker feedback instead
NARMA30_COEFFS = {"alpha": 0.2, "beta": 0.004, "gamma": 0.001}
NARMA_DIVERGENCE = 10.0
LASER_SPLITS = (1200, 400, 400)
NARMA_SPLITS = (3000, 1000, 1000)


@dataclass
class TaskData:
    name: str
    u: np.ndarray
    y: np.ndarray
    splits: dict[str, slice]
    washout: int = WASHOUT
    seed: int | None = None
    notes: list[str] = field(default_factory=list)

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        s = self.splits[name]
        return self.u[s], self.y[s]


def make_splits(n: int, sizes) -> dict[str, slice]:
    if sum(sizes) != n:
        raise ConfigError(f"split sizes {sizes} do not cover {n} samples")
    a, b, _ = sizes
    return {"train": slice(0, a), "val": slice(a, a + b), "test": slice(a + b, n)}


def _proportional_sizes(n: int) -> tuple[int, int, int]:
    if n == sum(NARMA_SPLITS):
        return NARMA_SPLITS
    train = int(round(0.6 * n))
    val = int(round(0.2 * n))
    return train, val, n - train - val


def narma_coeffs(order: int, delta: int) -> dict:
    return NARMA30_COEFFS if order == 30 and delta == 29 else NARMA_COEFFS


def narma_series(u: np.ndarray, order: int, delta: int | None = None, coeffs: dict | None = None) -> np.ndarray:
    """Return y(0..len(u)) for the NARMA recurrence driven by u, zero history."""
    delta = order - 1 if delta is None else delta
    c = coeffs or narma_coeffs(order, delta)
    a, b, g = c["alpha"], c["beta"], c["gamma"]
    n = len(u)
    y = np.zeros(n + 1)
    for t in range(n):
        # accumulate newest first so the result does not depend on numpy's
        # pairwise reduction order
        window = 0.0
        for i in range(min(delta, t) + 1):
            window += y[t - i]
        u_lag = u[t - delta] if t - delta >= 0 else 0.0
        y[t + 1] = a * y[t] + b * y[t] * window + 1.5 * u_lag * u[t] + g
    return y


def narma_generate(
    order: int = 10,
    length: int = 5000,
    seed: int = 0,
    literal_delta: bool = False,
    max_attempts: int = 100,
) -> TaskData:
    """NARMA-n task: input u(t) ~ U[0, 0.5], target y(t + 1).

    The lag defaults to ``order - 1``; ``literal_delta`` uses a lag of 10 and
    the tenth-order coefficients regardless of order. Divergent draws are
    regenerated with the next seed.
    """
    if order not in (10, 30):
        raise ConfigError(f"NARMA order must be 10 or 30, got {order}")
    if length <= order + WASHOUT:
        raise ConfigError(f"length must exceed order + washout ({order + WASHOUT})")
    delta = 10 if literal_delta else order - 1
    notes = []
    for attempt in range(max_attempts):
        s = seed + attempt
        u = np.random.default_rng(s).uniform(0.0, 0.5, length)
        with np.errstate(over="ignore", invalid="ignore"):
            y = narma_series(u, order, delta)
        if np.all(np.isfinite(y)) and np.max(np.abs(y)) <= NARMA_DIVERGENCE:
            break
        msg = f"NARMA-{order} seed {s} diverged; regenerating with seed {s + 1}"
        log.warning(msg)
        notes.append(msg)
    else:
        raise RuntimeError(f"NARMA-{order}: {max_attempts} consecutive divergent draws")
    return TaskData(
        name=f"narma{order}",
        u=u,
        y=y[1:],
        splits=make_splits(length, _proportional_sizes(length)),
        seed=s,
        notes=notes,
    )


def load_laser(path, n_values: int = 2000) -> TaskData:
    """Read the laser series (one integer per line) as a next-step prediction task.

    ``n_values + 1`` samples are consumed so that every one of the
    ``n_values`` inputs has a successor as its target. Values are scaled to
    [0, 1] with the training-split minimum and maximum.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"laser file not found: {path}")
    values = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(int(float(text))))
            except ValueError:
                raise IngestionError(f"{path}:{lineno}: cannot parse {text!r}", line=lineno) from None
            if len(values) > n_values:
                break
    if len(values) < n_values + 1:
        raise IngestionError(
            f"{path}: need {n_values + 1} values, found {len(values)}", line=len(values)
        )
    series = np.asarray(values[: n_values + 1])
    sizes = LASER_SPLITS if n_values == sum(LASER_SPLITS) else _proportional_sizes(n_values)
    splits = make_splits(n_values, sizes)
    train = series[: splits["train"].stop + 1]
    lo, hi = train.min(), train.max()
    if hi == lo:
        raise IngestionError(f"{path}: training values are constant; cannot normalise")
    scaled = (series - lo) / (hi - lo)
    return TaskData(name="laser", u=scaled[:-1], y=scaled[1:], splits=splits)


def synthetic_laser(n: int = 2001, seed: int = 0) -> np.ndarray:
    """Integer intensity series from a Lorenz system, a stand-in for dataset A.

    The far-infrared laser behind dataset A follows Lorenz-Haken dynamics,
    so the squared x-coordinate gives the same spiking, collapsing envelope.
    """
    sigma, rho, beta = 10.0, 28.0, 8.0 / 3.0
    rng = np.random.default_rng(seed)
    s = np.array([1.0, 1.0, 1.0]) + 0.1 * rng.standard_normal(3)

    def f(v):
        x, y, z = v
        return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])

    h, every, burn = 0.01, 8, 2000
    out = np.empty(n)
    k = 0
    for step in range(burn + n * every):
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step >= burn and (step - burn) % every == 0:
            out[k] = s[0] ** 2
            k += 1
    return np.round(255 * out / out.max()).astype(int)


def write_laser_file(path, n: int = 2001, seed: int = 0) -> Path:
    path = Path(path)
    path.write_text("\n".join(str(v) for v in synthetic_laser(n, seed)) + "\n")
    return path


def load_task(name: str, seed: int = 0, laser_path=None, literal_delta: bool = False,
              narma_length: int = 5000) -> TaskData:
    if name == "narma10":
        return narma_generate(10, narma_length, seed, literal_delta)
    if name == "narma30":
        return narma_generate(30, narma_length, seed, literal_delta)
    if name == "laser":
        if laser_path is None:
            raise ConfigError("task 'laser' needs a laser data file (--laser-file)")
        return load_laser(laser_path)
    raise ConfigError(f"unknown task {name!r}")

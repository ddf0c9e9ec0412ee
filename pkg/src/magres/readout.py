"""Ridge-regression readout and NMSE scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from magres.errors import SingularDesignError, UndefinedNormalisation

RIDGE_GRID = (1e-9, 1e-7, 1e-5, 1e-3, 1e-1)
WASHOUT = 50


@dataclass
class Readout:
    w_out: np.ndarray  # (outputs, state dim)
    ridge_lambda: float

    def predict(self, states: np.ndarray) -> np.ndarray:
        y = np.asarray(states) @ self.w_out.T
        return y[:, 0] if y.shape[1] == 1 else y


def train_ridge(states, targets, ridge_lambda: float = 0.0, washout: int = 0) -> Readout:
    """Fit W_out = Y^T X (X^T X + lambda I)^-1 on the rows after ``washout``."""
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be >= 0")
    x = np.asarray(states, dtype=float)[washout:]
    y = np.asarray(targets, dtype=float)[washout:]
    if y.ndim == 1:
        y = y[:, None]
    if len(x) != len(y):
        raise ValueError(f"row mismatch: {len(x)} states vs {len(y)} targets")
    gram = x.T @ x
    if ridge_lambda == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise SingularDesignError("X^T X is rank deficient at lambda = 0; use lambda > 0")
    gram[np.diag_indices_from(gram)] += ridge_lambda
    try:
        w = np.linalg.solve(gram, x.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError(f"ridge system is singular: {exc}; increase lambda") from exc
    if not np.all(np.isfinite(w)):
        raise SingularDesignError("ridge solution is not finite; increase lambda")
    return Readout(w.T, ridge_lambda)


def nmse(pred, target) -> float:
    """Sum of squared errors normalised by the target's total variance."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    if p.shape != t.shape or len(t) < 2:
        raise ValueError("pred and target need equal length >= 2")
    denom = np.sum((t - t.mean()) ** 2)
    if denom == 0:
        raise UndefinedNormalisation("target is constant; NMSE is undefined")
    return float(np.sum((p - t) ** 2) / denom)


def with_bias(states: np.ndarray) -> np.ndarray:
    return np.column_stack([states, np.ones(len(states))])


@dataclass
class Score:
    val_nmse: float
    test_nmse: float
    train_nmse: float = np.nan
    ridge_lambda: float = np.nan


def fit_and_score(train, val, test, grid=RIDGE_GRID, washout: int = WASHOUT) -> Score:
    """Select lambda on validation NMSE and report the test NMSE at that lambda.

    Each of ``train``, ``val``, ``test`` is a (states, targets) pair; the
    first ``washout`` rows of every split are discarded and a constant
    column is appended to the states.
    """
    xs = [with_bias(np.asarray(s)[washout:]) for s, _ in (train, val, test)]
    ys = [np.asarray(t, dtype=float)[washout:] for _, t in (train, val, test)]
    best = None
    for lam in grid:
        try:
            ro = train_ridge(xs[0], ys[0], lam)
        except SingularDesignError:
            continue
        v = nmse(ro.predict(xs[1]), ys[1])
        if not np.isfinite(v):
            continue
        if best is None or v < best[0]:
            best = (v, lam, ro)
    if best is None:
        return Score(np.inf, np.inf)
    v, lam, ro = best
    return Score(
        val_nmse=v,
        test_nmse=nmse(ro.predict(xs[2]), ys[2]),
        train_nmse=nmse(ro.predict(xs[0]), ys[0]),
        ridge_lambda=lam,
    )

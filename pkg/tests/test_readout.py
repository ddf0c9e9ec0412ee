import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magres.errors import SingularDesignError, UndefinedNormalisation
from magres.readout import fit_and_score, nmse, train_ridge


def normal_equations(x, y, lam):
    # dense oracle: explicit inverse of the regularised Gram matrix
    return y @ x @ np.linalg.inv(x.T @ x + lam * np.eye(x.shape[1]))


def test_identity_design_interpolates():
    e1 = np.eye(6)[0]
    ro = train_ridge(np.eye(6), e1, 0.0)
    assert np.allclose(ro.w_out, e1[None, :], atol=1e-15)


@pytest.mark.parametrize("lam", [1e-3, 0.5, 2.0])
def test_identity_design_shrinks(lam):
    e1 = np.eye(6)[0]
    assert np.allclose(train_ridge(np.eye(6), e1, lam).w_out, e1[None, :] / (1 + lam), rtol=1e-14)


def test_normal_equations_oracle():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((50, 5))
    y = rng.standard_normal(50)
    for lam in (0.0, 1e-3, 1.0):
        w = train_ridge(x, y, lam).w_out[0]
        ref = normal_equations(x, y, lam)
        assert np.max(np.abs(w - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_washout_rows_dropped():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((40, 3))
    y = rng.standard_normal(40)
    x_bad = x.copy()
    x_bad[:10] = 1e6
    assert np.array_equal(train_ridge(x_bad, y, 0.1, washout=10).w_out, train_ridge(x[10:], y[10:], 0.1).w_out)


def test_singular_design():
    x = np.ones((20, 3))
    with pytest.raises(SingularDesignError, match="lambda"):
        train_ridge(x, np.arange(20.0), 0.0)
    assert np.all(np.isfinite(train_ridge(x, np.arange(20.0), 1e-3).w_out))


def test_row_mismatch():
    with pytest.raises(ValueError):
        train_ridge(np.ones((5, 2)), np.ones(4), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-6, 10), st.floats(1.01, 100))
def test_ridge_norm_monotone(seed, lam, factor):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((30, 6))
    y = rng.standard_normal(30)
    small = np.linalg.norm(train_ridge(x, y, lam).w_out)
    large = np.linalg.norm(train_ridge(x, y, lam * factor).w_out)
    assert small >= large * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_train_error_nonincreasing_as_lambda_shrinks(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 5))
    y = x @ rng.standard_normal(5) + 0.3 * rng.standard_normal(40)
    errs = [nmse(train_ridge(x, y, lam).predict(x), y) for lam in (10.0, 1.0, 1e-2, 1e-4, 0.0)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))


def test_nmse_examples():
    t = np.array([1.0, 3.0, 2.0, 6.0])
    assert nmse(t, t) == 0.0
    assert nmse(np.full(4, t.mean()), t) == pytest.approx(1.0, rel=1e-15)
    c = 0.5
    var = np.var(t)
    assert nmse(t + c, t) == pytest.approx(c * c * 4 / (var * 4), rel=1e-14)


def test_nmse_errors():
    with pytest.raises(UndefinedNormalisation):
        nmse([1.0, 2.0], [3.0, 3.0])
    with pytest.raises(ValueError):
        nmse([1.0], [1.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 100), st.floats(-100, 100))
def test_nmse_affine_invariance(seed, scale, shift):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal(30)
    p = t + 0.3 * rng.standard_normal(30)
    assert nmse(scale * p + shift, scale * t + shift) == pytest.approx(nmse(p, t), rel=1e-9)


def test_fit_and_score_picks_validation_lambda():
    rng = np.random.default_rng(3)
    w = rng.standard_normal(8)
    splits = []
    for n in (300, 120, 120):
        x = rng.standard_normal((n, 8))
        splits.append((x, x @ w + 0.05 * rng.standard_normal(n)))
    score = fit_and_score(*splits, washout=50)
    assert score.ridge_lambda in (1e-9, 1e-7, 1e-5, 1e-3, 1e-1)
    assert score.val_nmse < 0.01 and score.test_nmse < 0.01

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsar import (
    CoefficientMatrix,
    DeterminantSignError,
    ParamPoint,
    RhoOutOfBoundsError,
    SpatialWeights,
    TruncatedModel,
    ll_gradients,
    log_likelihood,
    ls_grad_b,
    ls_grad_rho,
    ls_objective,
    row_standardize,
    symmetrize,
)

from conftest import make_instance


def tiny_model():
    """n=3, k=1 instance small enough to check against hand arithmetic."""
    w = symmetrize(row_standardize(SpatialWeights(
        np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    )))
    y = np.array([1.0, 2.0, 3.0])
    design = CoefficientMatrix(np.array([[1.0], [0.0], [1.0]]))
    return TruncatedModel(y, design, w)


class TestTruncatedModel:
    def test_attributes(self):
        model = tiny_model()
        assert model.n == 3 and model.k == 1
        assert model.interval.lo < 0 < model.interval.hi
        assert np.allclose(model.residual(np.array([0.5])), [0.5, 2.0, 2.5])

    def test_rejects_asymmetric_weights(self):
        w = SpatialWeights(np.array(
            [[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]
        ))
        design = CoefficientMatrix(np.ones((3, 1)))
        with pytest.raises(ValueError):
            TruncatedModel(np.zeros(3), design, w)

    def test_rejects_size_mismatch_and_small_n(self):
        model = tiny_model()
        with pytest.raises(ValueError):
            TruncatedModel(np.zeros(4), model.design, model.w)
        fat = CoefficientMatrix(np.ones((3, 3)))
        with pytest.raises(ValueError):
            TruncatedModel(np.zeros(3), fat, model.w)

    def test_apply_m(self):
        model = tiny_model()
        v = np.array([1.0, 1.0, 1.0])
        # W v = (0.75, 1.5, 0.75); v - 0.2 W v = (0.85, 0.7, 0.85)
        assert np.allclose(model.apply_m(0.2, v), [0.85, 0.7, 0.85])


class TestParamPoint:
    def test_validation(self):
        ParamPoint(b=np.ones(2), rho=0.1, sigma2=1.0)
        with pytest.raises(ValueError):
            ParamPoint(b=np.array([np.inf, 0.0]), rho=0.1, sigma2=1.0)
        with pytest.raises(ValueError):
            ParamPoint(b=np.ones(2), rho=np.nan, sigma2=1.0)
        with pytest.raises(ValueError):
            ParamPoint(b=np.ones(2), rho=0.1, sigma2=0.0)


class TestLsObjective:
    def test_hand_oracle(self):
        # b = 0.5: r = (0.5, 2, 2.5), Wr = (1.5, 2.25, 1.5),
        # Mr = r - 0.2 Wr = (0.2, 1.55, 2.2), ||Mr||^2 = 7.2825
        model = tiny_model()
        value = ls_objective(model, np.array([0.5]), 0.2)
        assert value == pytest.approx(7.2825, rel=1e-14)

    def test_rho_zero_is_plain_sum_of_squares(self):
        model = tiny_model()
        b = np.array([0.3])
        r = model.residual(b)
        assert ls_objective(model, b, 0.0) == pytest.approx(float(r @ r))

    def test_out_of_range_rho(self):
        model = tiny_model()
        with pytest.raises(RhoOutOfBoundsError):
            ls_objective(model, np.array([0.5]), model.interval.hi + 0.5)

    def test_gradients_match_finite_differences(self, instance20):
        model, *_ = instance20
        rng = np.random.default_rng(7)
        b = rng.standard_normal(model.k)
        rho = 0.25
        gb = ls_grad_b(model, b, rho)
        grho = ls_grad_rho(model, b, rho)
        h = 1e-6
        for j in range(model.k):
            e = np.zeros(model.k)
            e[j] = h
            fd = (ls_objective(model, b + e, rho) - ls_objective(model, b - e, rho)) / (2 * h)
            assert gb[j] == pytest.approx(fd, rel=1e-6, abs=1e-8)
        fd = (ls_objective(model, b, rho + h) - ls_objective(model, b, rho - h)) / (2 * h)
        assert grho == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def test_grad_rho_hand_oracle(self):
        # 2 rho ||Wr||^2 - 2 r'Wr = 0.4 * 9.5625 - 2 * 9 = -14.175
        model = tiny_model()
        assert ls_grad_rho(model, np.array([0.5]), 0.2) == pytest.approx(-14.175)


class TestLogLikelihood:
    def test_matches_direct_formula(self, instance20):
        model, *_ = instance20
        rng = np.random.default_rng(1)
        point = ParamPoint(b=rng.standard_normal(model.k), rho=0.3, sigma2=0.8)
        m = np.eye(model.n) - point.rho * model.w.matrix
        sign, logdet = np.linalg.slogdet(m)
        assert sign == 1.0
        q = ls_objective(model, point.b, point.rho)
        direct = (
            -0.5 * model.n * np.log(point.sigma2) + logdet - q / (2 * point.sigma2)
        )
        assert log_likelihood(model, point) == pytest.approx(direct, rel=1e-12)

    def test_determinant_sign_error_outside_interval(self):
        model = tiny_model()
        bad = ParamPoint(b=np.array([0.5]), rho=model.interval.hi + 0.2, sigma2=1.0)
        with pytest.raises(DeterminantSignError):
            log_likelihood(model, bad)
        with pytest.raises(DeterminantSignError):
            ll_gradients(model, bad)

    def test_gradients_match_finite_differences(self, instance20):
        model, *_ = instance20
        rng = np.random.default_rng(2)
        point = ParamPoint(b=rng.standard_normal(model.k), rho=0.2, sigma2=1.3)
        grads = ll_gradients(model, point)
        h = 1e-6

        def ll(b, rho, s2):
            return log_likelihood(model, ParamPoint(b=b, rho=rho, sigma2=s2))

        for j in range(model.k):
            e = np.zeros(model.k)
            e[j] = h
            fd = (ll(point.b + e, point.rho, point.sigma2)
                  - ll(point.b - e, point.rho, point.sigma2)) / (2 * h)
            assert grads.b[j] == pytest.approx(fd, rel=1e-5, abs=1e-7)
        fd = (ll(point.b, point.rho + h, point.sigma2)
              - ll(point.b, point.rho - h, point.sigma2)) / (2 * h)
        assert grads.rho == pytest.approx(fd, rel=1e-5, abs=1e-7)
        fd = (ll(point.b, point.rho, point.sigma2 + h)
              - ll(point.b, point.rho, point.sigma2 - h)) / (2 * h)
        assert grads.sigma2 == pytest.approx(fd, rel=1e-5, abs=1e-7)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_likelihood_decreases_with_inflated_variance(self, seed):
        # at the profile optimum sigma2 = q/n, any other variance is worse
        model, *_ = make_instance(seed=seed % 1000)
        rng = np.random.default_rng(seed)
        b = rng.standard_normal(model.k)
        q = ls_objective(model, b, 0.1)
        s2_opt = q / model.n
        best = log_likelihood(model, ParamPoint(b=b, rho=0.1, sigma2=s2_opt))
        for factor in (0.5, 2.0, 10.0):
            other = log_likelihood(
                model, ParamPoint(b=b, rho=0.1, sigma2=s2_opt * factor)
            )
            assert other < best
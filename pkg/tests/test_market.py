import numpy as np
import pytest

from rgopkit.errors import (
    DegenerateScale,
    DimensionMismatch,
    HorizonTooShort,
    NonFiniteData,
    NotPositiveDefinite,
    RhoZeroNotOne,
    SymmetryViolation,
    TooFewObservations,
)
from rgopkit.market import (
    AutocorrelationSpec,
    CorrelationKind,
    MarketMoments,
    Portfolio,
    ProjectedMoments,
    aggregate_rho,
    build_moment_matrix,
    estimate_moments,
    modified_covariance,
    project_moments,
    validate,
)


def circulant_spec(*rho):
    return AutocorrelationSpec(np.array(rho), kind=CorrelationKind.CIRCULANT)


def toeplitz_spec(*rho):
    return AutocorrelationSpec(np.array(rho), kind=CorrelationKind.TOEPLITZ)


class TestValidate:
    def test_identity_profile_is_valid(self):
        spec = circulant_spec(1.0, 0.0, 0.0, 0.0)
        assert validate(spec) is spec

    def test_rho_zero_must_be_one(self):
        with pytest.raises(RhoZeroNotOne):
            validate(circulant_spec(0.99, 0.0, 0.0, 0.0))

    def test_circulant_symmetry_enforced(self):
        with pytest.raises(SymmetryViolation):
            validate(circulant_spec(1.0, 0.1, 0.2, 0.3))

    def test_toeplitz_skips_symmetry(self):
        spec = toeplitz_spec(1.0, 0.1, 0.05, 0.01)
        assert validate(spec) is spec

    def test_not_positive_definite_reports_min_eigenvalue(self):
        # circ(1, -0.6, -0.6) has eigenvalue 1 - 1.2 = -0.2 at j=0
        with pytest.raises(NotPositiveDefinite) as exc:
            validate(circulant_spec(1.0, -0.6, -0.6))
        assert exc.value.min_eigenvalue == pytest.approx(-0.2, abs=1e-12)

    def test_toeplitz_pd_checked(self):
        with pytest.raises(NotPositiveDefinite):
            validate(toeplitz_spec(1.0, 0.99, 0.0))

    def test_single_period(self):
        spec = circulant_spec(1.0)
        assert validate(spec) is spec


class TestAggregateRho:
    def test_circulant_is_mean_of_lags(self):
        spec = circulant_spec(1.0, 0.1, 0.2, 0.1)
        assert aggregate_rho(spec) == pytest.approx(0.4 / 3, abs=1e-15)

    def test_toeplitz_weights_by_lag(self):
        spec = toeplitz_spec(1.0, 0.1, 0.2, 0.1)
        expected = (2.0 / 12.0) * (3 * 0.1 + 2 * 0.2 + 1 * 0.1)
        assert aggregate_rho(spec) == pytest.approx(expected, abs=1e-15)

    def test_uncorrelated_gives_zero(self):
        for T in (2, 5, 17):
            assert aggregate_rho(AutocorrelationSpec.uncorrelated(T)) == 0.0

    def test_kinds_agree_on_symmetric_profiles(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            T = int(rng.integers(2, 12))
            tail = rng.uniform(-0.1, 0.1, size=T - 1)
            tail = 0.5 * (tail + tail[::-1])
            rho = np.concatenate([[1.0], tail])
            a = aggregate_rho(AutocorrelationSpec(rho, CorrelationKind.CIRCULANT))
            b = aggregate_rho(AutocorrelationSpec(rho, CorrelationKind.TOEPLITZ))
            assert a == pytest.approx(b, abs=1e-14)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(9)
        T = 9
        half = rng.uniform(0.0, 0.1, size=(T - 1) // 2)
        base = aggregate_rho(circulant_spec(1.0, *half, *half[::-1]))
        for _ in range(10):
            perm = rng.permutation(half)
            spec = circulant_spec(1.0, *perm, *perm[::-1])
            assert aggregate_rho(spec) == pytest.approx(base, abs=1e-15)

    def test_horizon_too_short(self):
        with pytest.raises(HorizonTooShort):
            aggregate_rho(circulant_spec(1.0))


class TestModifiedCovariance:
    def test_scales_by_one_plus_tminus1_rhobar(self):
        out = modified_covariance(np.eye(2), rho_bar=0.1, T=11)
        assert np.allclose(out, 2.0 * np.eye(2), atol=1e-15)

    def test_zero_rho_bar_is_identity_map(self):
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        assert np.array_equal(modified_covariance(sigma, 0.0, 7), sigma)

    def test_negative_boundary(self):
        T = 5
        out = modified_covariance(np.eye(3), rho_bar=-1.0 / T, T=T)
        assert np.allclose(out, np.eye(3) / T, atol=1e-15)

    def test_degenerate_scale_rejected(self):
        with pytest.raises(DegenerateScale):
            modified_covariance(np.eye(2), rho_bar=-0.25, T=5)

    def test_psd_ordering_in_rho_bar(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            A = rng.normal(size=(4, 4))
            sigma = A @ A.T + 1e-6 * np.eye(4)
            r1, r2 = sorted(rng.uniform(-0.05, 0.3, size=2))
            T = int(rng.integers(2, 20))
            diff = modified_covariance(sigma, r2, T) - modified_covariance(
                sigma, r1, T
            )
            assert np.linalg.eigvalsh(diff)[0] >= -1e-12


class TestProjectMoments:
    def test_coordinate_selection(self):
        m = MarketMoments(np.array([0.01, 0.02]), np.eye(2))
        p = project_moments(m, Portfolio(np.array([1.0, 0.0])), circulant_spec(1.0))
        assert p.mean_return == pytest.approx(0.01)
        assert p.variance == pytest.approx(1.0)

    def test_equal_weights(self):
        m = MarketMoments(np.array([0.0, 0.0]), np.eye(2))
        p = project_moments(m, Portfolio(np.array([0.5, 0.5])), circulant_spec(1.0))
        assert p.mean_return == 0.0
        assert p.variance == pytest.approx(0.5)

    def test_single_asset_passthrough(self):
        m = MarketMoments(np.array([0.0085]), np.array([[0.0344**2]]))
        p = project_moments(m, Portfolio(np.array([1.0])), circulant_spec(1.0))
        assert p.mean_return == pytest.approx(0.0085)
        assert p.variance == pytest.approx(0.0344**2)

    def test_dimension_mismatch(self):
        m = MarketMoments(np.array([0.01, 0.02]), np.eye(2))
        with pytest.raises(DimensionMismatch):
            project_moments(m, Portfolio(np.array([1.0])), circulant_spec(1.0))

    def test_variance_is_quadratic_in_weights(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(3, 3))
        m = MarketMoments(rng.normal(size=3) * 0.01, A @ A.T + 0.1 * np.eye(3))
        w = rng.uniform(0.1, 1.0, size=3)
        spec = circulant_spec(1.0)
        p1 = project_moments(m, Portfolio(w), spec)
        p2 = project_moments(m, Portfolio(2.5 * w), spec)
        assert p2.variance == pytest.approx(2.5**2 * p1.variance, rel=1e-12)
        assert p2.mean_return == pytest.approx(2.5 * p1.mean_return, rel=1e-12)


class TestMomentMatrix:
    def test_identity_profile_zero_mean(self):
        p = ProjectedMoments(0.0, 1.0, AutocorrelationSpec.uncorrelated(3))
        omega = build_moment_matrix(p)
        assert np.allclose(omega, np.eye(4), atol=1e-15)

    def test_entrywise_formula(self):
        p = ProjectedMoments(0.1, 0.04, circulant_spec(1.0, 0.5))
        omega = build_moment_matrix(p)
        expected = np.array(
            [[0.05, 0.03, 0.1], [0.03, 0.05, 0.1], [0.1, 0.1, 1.0]]
        )
        assert np.allclose(omega, expected, atol=1e-15)

    def test_zero_variance_rejected_by_type(self):
        with pytest.raises(ValueError):
            ProjectedMoments(1.0, 0.0, circulant_spec(1.0))

    def test_symmetric_and_positive_definite(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            T = int(rng.integers(1, 9))
            tail = rng.uniform(-0.05, 0.1, size=T - 1)
            tail = 0.5 * (tail + tail[::-1])
            spec = validate(circulant_spec(1.0, *tail))
            p = ProjectedMoments(
                rng.uniform(0.0, 0.3), rng.uniform(0.01, 0.09), spec
            )
            omega = build_moment_matrix(p)
            assert np.abs(omega - omega.T).max() == 0.0
            assert np.linalg.eigvalsh(omega)[0] > 0.0


class TestEstimateMoments:
    def test_two_point_sample(self):
        # two observations support at most one asset (K >= N+1)
        with pytest.raises(TooFewObservations):
            estimate_moments(np.array([[0.00, 0.00], [0.02, 0.02]]))
        m = estimate_moments(np.array([[0.00], [0.02]]))
        assert m.mu[0] == pytest.approx(0.01)
        assert m.sigma[0, 0] == pytest.approx(0.0002, rel=1e-12)

    def test_identical_rows_surface_not_pd(self):
        R = np.tile([0.01, 0.02], (5, 1))
        with pytest.raises(NotPositiveDefinite):
            estimate_moments(R)

    def test_matches_numpy_cov(self):
        rng = np.random.default_rng(4)
        R = rng.normal(0.01, 0.05, size=(40, 3))
        m = estimate_moments(R)
        assert np.allclose(m.mu, R.mean(axis=0), atol=1e-15)
        assert np.allclose(m.sigma, np.cov(R, rowvar=False, ddof=1), atol=1e-15)

    def test_too_few_observations(self):
        with pytest.raises(TooFewObservations):
            estimate_moments(np.zeros((3, 3)))

    def test_non_finite_rejected(self):
        R = np.zeros((5, 2))
        R[2, 1] = np.nan
        with pytest.raises(NonFiniteData):
            estimate_moments(R)


class TestTypes:
    def test_market_moments_requires_symmetry(self):
        from rgopkit.errors import NotSymmetric

        sigma = np.array([[1.0, 0.2], [0.1, 1.0]])
        with pytest.raises(NotSymmetric):
            MarketMoments(np.zeros(2), sigma)

    def test_market_moments_requires_pd(self):
        with pytest.raises(NotPositiveDefinite):
            MarketMoments(np.zeros(2), np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_portfolio_rejects_nan(self):
        with pytest.raises(NonFiniteData):
            Portfolio(np.array([0.5, np.nan]))

    def test_spec_matrix_toeplitz(self):
        spec = toeplitz_spec(1.0, 0.3, 0.1)
        P = spec.matrix()
        expected = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.3], [0.1, 0.3, 1.0]])
        assert np.array_equal(P, expected)

    def test_spec_matrix_circulant_wraps(self):
        spec = circulant_spec(1.0, 0.2, 0.1, 0.2)
        P = spec.matrix()
        assert P[0, 3] == 0.2
        assert np.array_equal(P, P.T)

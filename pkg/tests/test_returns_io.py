import numpy as np
import pytest

from rgopkit.errors import (
    EmptyFile,
    InconsistentColumnCount,
    MalformedRow,
    RgopIOError,
)
from rgopkit.fixtures import (
    INDUSTRY_LABELS,
    industry_moments,
    make_synthetic_returns,
    synthetic_returns_path,
)
from rgopkit.market import estimate_moments
from rgopkit.returns_io import parse_returns_csv


def write(tmp_path, text, name="returns.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParse:
    def test_percent_conversion(self, tmp_path):
        p = write(tmp_path, "date,A,B\n200301, 1.23, -0.50\n")
        values, labels = parse_returns_csv(p)
        np.testing.assert_allclose(values, [[0.0123, -0.0050]])
        assert labels == ("A", "B")

    def test_multiple_rows_and_whitespace(self, tmp_path):
        p = write(
            tmp_path,
            "date, A , B\n200301,1.0,2.0\n\n200302, 3.0 ,4.0\n",
        )
        values, labels = parse_returns_csv(p)
        assert values.shape == (2, 2)
        assert labels == ("A", "B")

    def test_comment_lines_skipped(self, tmp_path):
        p = write(
            tmp_path,
            "# synthetic sample\ndate,A\n200301,1.0\n# trailing note\n",
        )
        values, _ = parse_returns_csv(p)
        assert values.shape == (1, 1)

    def test_header_only_is_empty(self, tmp_path):
        with pytest.raises(EmptyFile):
            parse_returns_csv(write(tmp_path, "date,A,B\n"))

    def test_blank_file_is_empty(self, tmp_path):
        with pytest.raises(EmptyFile):
            parse_returns_csv(write(tmp_path, "\n\n"))

    def test_sentinel_row_dropped(self, tmp_path):
        p = write(
            tmp_path,
            "date,A,B\n200301,1.0,2.0\n200302,-99.99,3.0\n200303,2.0,1.0\n",
        )
        values, _ = parse_returns_csv(p)
        assert values.shape == (2, 2)

    def test_all_rows_sentinel_is_empty(self, tmp_path):
        p = write(tmp_path, "date,A\n200301,-99.99\n")
        with pytest.raises(EmptyFile):
            parse_returns_csv(p)

    def test_missing_header_detected(self, tmp_path):
        p = write(tmp_path, "200301,1.0,2.0\n200302,1.0,2.0\n")
        with pytest.raises(MalformedRow):
            parse_returns_csv(p)

    def test_bad_date_token(self, tmp_path):
        p = write(tmp_path, "date,A\n200313,1.0\n")
        with pytest.raises(MalformedRow) as err:
            parse_returns_csv(p)
        assert err.value.line_number == 2

    def test_bad_value(self, tmp_path):
        p = write(tmp_path, "date,A,B\n200301,1.0,oops\n")
        with pytest.raises(MalformedRow) as err:
            parse_returns_csv(p)
        assert err.value.line_number == 2

    def test_column_count_mismatch(self, tmp_path):
        p = write(tmp_path, "date,A,B\n200301,1.0\n")
        with pytest.raises(InconsistentColumnCount):
            parse_returns_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(RgopIOError):
            parse_returns_csv(tmp_path / "nope.csv")


class TestPackagedSample:
    def test_shape_and_labels(self):
        values, labels = parse_returns_csv(synthetic_returns_path())
        assert values.shape == (120, 10)
        assert labels == INDUSTRY_LABELS

    def test_sample_moments_match_calibration(self):
        values, _ = parse_returns_csv(synthetic_returns_path())
        m = estimate_moments(values)
        want = industry_moments()
        np.testing.assert_allclose(m.mu, want.mu, atol=1e-8)
        np.testing.assert_allclose(m.sigma, want.sigma, atol=1e-8)

    def test_file_regenerates_from_seed(self):
        values, _ = parse_returns_csv(synthetic_returns_path())
        np.testing.assert_allclose(
            values, make_synthetic_returns(), atol=1e-8
        )


class TestFixtureMoments:
    def test_four_asset_restriction(self):
        from rgopkit.fixtures import LOW_VARIANCE_ASSETS, four_asset_moments

        full = industry_moments()
        sub = four_asset_moments()
        variances = np.diag(full.sigma)
        assert sorted(LOW_VARIANCE_ASSETS) == sorted(
            np.argsort(variances)[:4].tolist()
        )
        np.testing.assert_allclose(
            sub.mu, full.mu[list(LOW_VARIANCE_ASSETS)]
        )

    def test_covariance_is_positive_definite(self):
        m = industry_moments()
        assert np.linalg.eigvalsh(m.sigma).min() > 0.0

"""Index sets, conservative rows and the trend-correlation identity."""

import numpy as np
import pytest

from energy_matrices import build_family
from errors import DimensionError, NotCorrelatedError, SingularityError, ThresholdWarning
from models import ALL_FAMILIES, FamilyId
from parametrization import (
    analyze,
    analyze_family,
    trend_reproduction_error,
    conservative_row,
    coordinates,
    decompose,
    reconstruct,
)


@pytest.fixture(scope="module")
def analyzed_families():
    return {family: analyze_family(build_family(family, 12)) for family in ALL_FAMILIES}


class TestAnalyze:
    def test_identity(self):
        pm = analyze(np.eye(4))
        assert pm.level == 3
        assert pm.index_set == (0, 1, 2, 3)
        np.testing.assert_array_equal(pm.normalized_rows, np.eye(4))

    def test_uncorrelated_row_is_excluded(self):
        pm = analyze(np.array([[1.0, -1.0], [0.0, 1.0]]))
        assert pm.index_set == (1,)
        with pytest.raises(NotCorrelatedError) as exc:
            conservative_row(pm, 0)
        assert exc.value.row == 0 and exc.value.level == 1

    def test_near_threshold_warns(self):
        theta = np.array([[1.0, -1.0 + 1e-10], [0.0, 1.0]])
        with pytest.warns(ThresholdWarning):
            pm = analyze(theta)
        assert 0 in pm.near_threshold
        assert pm.index_set == (1,)

    def test_singular_theta(self):
        with pytest.raises(SingularityError):
            analyze(np.array([[1.0, -1.0], [2.0, -2.0]]))

    def test_rejects_scalar(self):
        with pytest.raises(DimensionError):
            analyze(np.eye(1))

    def test_index_set_is_never_empty(self):
        for family in ALL_FAMILIES:
            for pm in analyze_family(build_family(family, 20)):
                assert len(pm.index_set) >= 1, (family, pm.level)

    def test_symmetric_inverse_rows(self, analyzed_families):
        pm = analyzed_families[FamilyId.S_INV][0]
        np.testing.assert_allclose(conservative_row(pm, 0).weights, [2.0, -1.0], atol=1e-12)
        np.testing.assert_allclose(conservative_row(pm, 1).weights, [-1.0, 2.0], atol=1e-12)


class TestTrendIdentity:
    def test_every_family_and_level(self, analyzed_families):
        for family, levels in analyzed_families.items():
            for pm in levels:
                assert trend_reproduction_error(pm) <= 1e-8, (family, pm.level)

    def test_conservative_rows_sum_to_one(self, analyzed_families):
        for levels in analyzed_families.values():
            for pm in levels:
                for j in pm.index_set:
                    assert conservative_row(pm, j).total == pytest.approx(1.0, abs=1e-9)

    def test_reconstruction(self, analyzed_families, rng):
        for levels in analyzed_families.values():
            for pm in levels:
                s = rng.normal(size=pm.level + 1)
                np.testing.assert_allclose(reconstruct(pm, s), s, rtol=1e-8, atol=1e-8 * np.abs(s).max())

    def test_decomposition_adds_up(self, analyzed_families, rng):
        pm = analyzed_families[FamilyId.M][7]
        s = rng.normal(size=pm.level + 1)
        bulk, residual = decompose(pm, s)
        np.testing.assert_allclose(bulk + residual, s, atol=1e-8)

    def test_constant_vector_lives_in_the_bulk(self):
        theta = np.array([[1.0, -1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        pm = analyze(theta)
        bulk, residual = decompose(pm, np.ones(3))
        np.testing.assert_allclose(bulk, np.ones(3), atol=1e-12)
        np.testing.assert_allclose(residual, 0.0, atol=1e-12)

    def test_coordinates_shape_checked(self, analyzed_families):
        with pytest.raises(DimensionError):
            coordinates(analyzed_families[FamilyId.S][2], np.ones(5))

"""Backtest cost, candidate table and hyperparameter scans."""

import math

import numpy as np
import pytest

from backtest import (
    build_candidate_table,
    check_lag,
    cost,
    enumerate_criteria,
    optimize_q1_near_uniform,
    optimize_u,
    optimize_uv_fd,
    trace_of,
)
from energy_matrices import build_family
from errors import DimensionError, LagError
from models import CriterionId, CriterionKind, FamilyId, PredictorTrace, SeriesData
from parametrization import analyze_family

RAMP = SeriesData(values=np.arange(5.0))
MEAN_TRACE = PredictorTrace(levels=[2, 3], predictions=[1.0, 1.5], criterion=CriterionId(CriterionKind.MEAN))


class TestCost:
    def test_mean_absolute(self):
        assert cost(MEAN_TRACE, RAMP, 1.0, 2).value == pytest.approx(2.25)

    def test_mean_square_has_no_root(self):
        assert cost(MEAN_TRACE, RAMP, 2.0, 2).value == pytest.approx(5.125)

    def test_max(self):
        assert cost(MEAN_TRACE, RAMP, math.inf, 2).value == pytest.approx(2.5)

    def test_perfect_predictions(self):
        trace = PredictorTrace(levels=[1, 2, 3], predictions=[2.0, 3.0, 4.0], criterion=MEAN_TRACE.criterion)
        for q in (1.0, 2.0, math.inf):
            assert cost(trace, RAMP, q, 1).value == 0.0

    def test_levels_must_cover_range(self):
        with pytest.raises(DimensionError):
            cost(MEAN_TRACE, RAMP, 1.0, 1)

    @pytest.mark.parametrize("lag", [0, 4, 7])
    def test_lag_range(self, lag):
        with pytest.raises(LagError):
            check_lag(lag, 4)


@pytest.fixture(scope="module")
def series():
    rng = np.random.default_rng(7)
    return SeriesData(values=np.cumsum(rng.normal(size=8)) + 5.0, start_year=1990)


@pytest.fixture(scope="module", params=[FamilyId.M_INV, FamilyId.S_INV, FamilyId.M_T])
def family_setup(request, series):
    levels = analyze_family(build_family(request.param, series.n))
    return request.param, levels, build_candidate_table(levels, request.param, series, 2)


class TestCandidateTable:
    def test_matches_row_by_row_evaluation(self, family_setup, series):
        family, levels, table = family_setup
        for kind, criteria in table.criteria.items():
            for index, criterion in enumerate(criteria):
                trace = trace_of(levels, criterion, series, 2, family)
                np.testing.assert_allclose(
                    table.predictions[kind][index], trace.predictions, rtol=1e-10, atol=1e-10,
                    err_msg=criterion.label,
                )

    def test_shapes(self, family_setup, series):
        _, _, table = family_setup
        n = series.n
        np.testing.assert_array_equal(table.levels, np.arange(2, n))
        assert table.predictions[CriterionKind.FD].shape == ((n + 1) ** 2, n - 2)
        assert len(table.criteria[CriterionKind.FD]) == (n + 1) ** 2
        assert table.criteria[CriterionKind.FD][1] == CriterionId(CriterionKind.FD, u=0, v=1)

    def test_candidate_costs_agree_with_cost(self, family_setup, series):
        _, _, table = family_setup
        for q in (1.0, 2.0, math.inf):
            index, candidate = table.best(CriterionKind.TAIL1, q)
            assert candidate.cost.value == pytest.approx(cost(candidate.trace, series, q, 2).value, rel=1e-14)
            assert candidate.criterion == table.criteria[CriterionKind.TAIL1][index]

    def test_predictions_read_only(self, family_setup):
        _, _, table = family_setup
        with pytest.raises(ValueError):
            table.predictions[CriterionKind.U][0, 0] = 0.0

    def test_not_enough_levels(self, series):
        levels = analyze_family(build_family(FamilyId.S, 3))
        with pytest.raises(DimensionError):
            build_candidate_table(levels, FamilyId.S, series, 2)


class TestScans:
    def test_u_scan_takes_first_minimum(self, family_setup):
        _, _, table = family_setup
        for kind in (CriterionKind.U, CriterionKind.TAIL1, CriterionKind.TAIL2, CriterionKind.VAR):
            for q in (1.0, 2.0, math.inf):
                costs = table.costs(kind, q)
                u, candidate = optimize_u(table, kind, q)
                assert costs[u] == costs.min()
                assert np.all(costs[:u] > costs.min())
                assert candidate.criterion.u == u

    def test_u_beyond_last_level_repeats(self, family_setup, series):
        _, _, table = family_setup
        n = series.n
        np.testing.assert_array_equal(table.predictions[CriterionKind.U][n], table.predictions[CriterionKind.U][n - 1])
        fd = table.predictions[CriterionKind.FD].reshape(n + 1, n + 1, -1)
        np.testing.assert_array_equal(fd[n], fd[n - 1])

    def test_fd_grid_is_lexicographic(self, family_setup):
        _, _, table = family_setup
        for q in (1.0, 2.0, math.inf):
            u, v, candidate = optimize_uv_fd(table, q)
            costs = table.costs(CriterionKind.FD, q)
            first = int(np.flatnonzero(costs == costs.min())[0])
            assert table.criteria[CriterionKind.FD][first] == CriterionId(CriterionKind.FD, u=u, v=v)
            assert candidate.cost.value == costs.min()

    def test_q1_scan_order(self, family_setup):
        _, _, table = family_setup
        for q in (1.0, 2.0, math.inf):
            q1, candidate = optimize_q1_near_uniform(table, q)
            costs = table.costs(CriterionKind.NEAR_U, q)
            assert (1.0, 2.0, math.inf)[int(np.argmin(costs))] == q1
            assert candidate.criterion.q1 == q1

    def test_wrong_kind(self, family_setup):
        _, _, table = family_setup
        with pytest.raises(ValueError):
            optimize_u(table, CriterionKind.FD, 1.0)

    def test_enumeration_size(self):
        n = 4
        assert len(enumerate_criteria(n)) == 2 + 4 * (n + 1) + 3 + (n + 1) ** 2

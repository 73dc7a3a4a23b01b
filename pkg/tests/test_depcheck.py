"""
Tourney Lab - 负相依判定测试
"""
import sys
import os
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.config import Budgets
from src.depcheck import (
    Property,
    Verdict,
    check_all,
    check_na,
    check_nlod,
    check_nod,
    check_nuod,
    check_signed_monotone,
    covariance_of,
    indicator_table,
)
from src.errors import DimensionMismatch, OverlappingSubsets, SearchBudgetExceeded, TableIncomplete
from src.exactdist import Orthant, from_atoms, point_mass, product, product_all
from src.models import build_cyclic_counterexample
from src.utils.verifier import verify_witness

F = Fraction
HALF = F(1, 2)
COIN = from_atoms([((0,), HALF), ((1,), HALF)])
COMONOTONE = from_atoms([((0, 0), HALF), ((1, 1), HALF)])
COUNTERMONOTONE = from_atoms([((0, 1), HALF), ((1, 0), HALF)])


class TestOrthantChecks:
    """测试 NLOD / NUOD / NOD。"""

    def test_independent_holds(self):
        d = product_all([COIN, COIN, COIN])
        for r in (check_nlod(d), check_nuod(d), check_nod(d)):
            assert r.verdict is Verdict.HOLDS
            assert r.witness is None

    def test_comonotone_lower_witness(self):
        r = check_nlod(COMONOTONE)
        assert r.property is Property.NLOD
        assert not r.holds
        assert r.witness.thresholds == (0, 0)
        assert (r.witness.lhs, r.witness.rhs) == (HALF, F(1, 4))

    def test_comonotone_upper_witness(self):
        r = check_nuod(COMONOTONE)
        assert r.witness.mode is Orthant.UPPER
        assert r.witness.thresholds == (0, 0)
        assert (r.witness.lhs, r.witness.rhs) == (HALF, F(1, 4))

    def test_upper_grid_includes_threshold_below_minimum(self):
        r = check_nuod(COUNTERMONOTONE)
        assert r.holds
        assert r.work_counters["thresholds"] == 9

    def test_cyclic_counterexample(self):
        d = build_cyclic_counterexample(0)
        r = check_nlod(d)
        assert r.witness.thresholds == (0, 2, 0, 1)
        assert (r.witness.lhs, r.witness.rhs) == (F(1, 3), F(2, 9))
        assert verify_witness(d, r)

    def test_nod_reports_failed_side(self):
        r = check_nod(build_cyclic_counterexample(0))
        assert r.property is Property.NOD
        assert r.verdict is Verdict.VIOLATED
        assert r.context == {"failed": "NLOD"}

    def test_threshold_budget(self):
        with pytest.raises(SearchBudgetExceeded) as info:
            check_nlod(product(COIN, COIN), Budgets(threshold_grid=1))
        assert info.value.budget_name == "threshold-grid budget"


class TestMonotoneChecks:
    """测试 NA 与带符号单调对。"""

    def test_independent_na_holds(self):
        r = check_na(product_all([COIN, COIN, COIN]))
        assert r.holds
        assert r.property is Property.NA

    def test_comonotone_na_witness(self):
        r = check_na(COMONOTONE)
        w = r.witness
        assert (w.a1, w.a2) == ((0,), (1,))
        assert w.u1.minimal_elements == ((1,),)
        assert w.covariance == F(1, 4)
        assert verify_witness(COMONOTONE, r)

    def test_countermonotone(self):
        assert check_na(COUNTERMONOTONE).holds
        assert check_nod(COUNTERMONOTONE).holds

    def test_signed_flips_countermonotone(self):
        r = check_signed_monotone(COUNTERMONOTONE)
        assert r.property is Property.SIGNED_MONOTONE
        assert not r.holds
        assert r.witness.sign_profile_1 == (1,)
        assert r.witness.sign_profile_2 == (-1,)
        assert r.witness.covariance == F(1, 4)
        assert verify_witness(COUNTERMONOTONE, r)

    def test_cyclic_na_violated(self):
        d = build_cyclic_counterexample(0)
        r = check_na(d)
        assert not r.holds
        assert r.witness.covariance > 0
        assert verify_witness(d, r)

    def test_constant_coordinate_dropped(self):
        r = check_na(product_all([COIN, point_mass((5,)), COIN]))
        assert r.holds
        assert r.work_counters["constant_coordinates"] == 1

    def test_single_coordinate_rejected(self):
        with pytest.raises(DimensionMismatch):
            check_na(COIN)

    def test_subset_bound_without_violation(self):
        with pytest.raises(SearchBudgetExceeded) as info:
            check_na(product_all([COIN, COIN, COIN]), max_subset_size=2)
        assert info.value.budget_name == "max subset size"

    def test_subset_bound_with_violation(self):
        r = check_na(product(COMONOTONE, COIN), max_subset_size=2)
        assert not r.holds
        assert (r.witness.a1, r.witness.a2) == ((0,), (1,))

    def test_pair_budget(self):
        with pytest.raises(SearchBudgetExceeded) as info:
            check_na(COMONOTONE, budgets=Budgets(upper_set_pairs=0))
        assert info.value.budget_name == "upper-set pair budget"

    def test_workers_agree(self):
        d = build_cyclic_counterexample(0)
        one = check_na(d, budgets=Budgets(workers=1))
        many = check_na(d, budgets=Budgets(workers=3))
        assert one.witness == many.witness


class TestCovariance:
    """测试函数表协方差。"""

    def test_identity_tables(self):
        d = build_cyclic_counterexample(0)
        cov = covariance_of(d, {0: 0, 1: 1}, (0,), {0: 0, 1: 1, 2: 2}, (2,))
        assert cov == F(1, 3)

    def test_incomplete_table(self):
        with pytest.raises(TableIncomplete):
            covariance_of(COMONOTONE, {0: 0}, (0,), {0: 0, 1: 1}, (1,))

    def test_overlapping_blocks(self):
        with pytest.raises(OverlappingSubsets):
            covariance_of(COMONOTONE, {0: 0, 1: 1}, (0,), {0: 0, 1: 1}, (0,))

    def test_indicator_table_matches_witness(self):
        r = check_na(COMONOTONE)
        t1 = indicator_table(r.witness.u1, COMONOTONE)
        t2 = indicator_table(r.witness.u2, COMONOTONE)
        assert covariance_of(COMONOTONE, t1, (0,), t2, (1,)) == r.witness.covariance


class TestCheckAll:
    """测试批量判定。"""

    def test_order_preserved(self):
        results = check_all(COUNTERMONOTONE, ["na", "nlod", "signed"])
        assert [r.property for r in results] == [Property.NA, Property.NLOD, Property.SIGNED_MONOTONE]

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            check_all(COIN, ["nlod", "bogus"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

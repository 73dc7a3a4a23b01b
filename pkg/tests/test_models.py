"""
Tourney Lab - 赛制模型测试
循环赛、随机和、淘汰赛、不相交单调族与配置构建。
"""
import sys
import os
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.config import Budgets
from src.depcheck import check_na, check_nlod, check_nod
from src.errors import (
    AtomBudgetExceeded,
    ConfigError,
    InvalidProbability,
    InvalidRational,
    NotMonotone,
    OverlappingSubsets,
    PreconditionNAFailed,
)
from src.exactdist import convolve, from_atoms, marginal, orthant_prob, point_mass
from src.models import (
    KnockoutSpec,
    PairRewardLaw,
    RandomSumSpec,
    RoundRobinSpec,
    build_binomial_round_robin,
    build_chess_round_robin,
    build_cyclic_counterexample,
    build_disjoint_monotone_family,
    build_from_config,
    build_knockout,
    build_multinomial_round,
    build_random_permutation,
    build_random_sum,
    build_round_robin,
    canonical_brackets,
    cyclic_spec,
    football_rounds,
    huber_spec,
    pairwise_pads,
    round_robin_as_family,
    top_probability,
)

F = Fraction
HALF = F(1, 2)
COUNTER_COIN = from_atoms([((1, 0), HALF), ((0, 1), HALF)])


class TestPairRewardLaw:
    """测试单场比赛奖励分布。"""

    def test_zero_atoms_dropped(self):
        law = PairRewardLaw(0, 1, 1, ((1, 1), (0, 0)))
        assert law.atoms == ((1, 1),)

    def test_value_outside_range(self):
        with pytest.raises(ConfigError):
            PairRewardLaw(0, 1, 1, ((2, 1),))

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(InvalidProbability):
            PairRewardLaw(0, 1, 1, ((0, HALF),))

    def test_pair_order(self):
        with pytest.raises(ConfigError):
            PairRewardLaw(1, 0, 1, ((0, 1),))

    def test_pad(self):
        law = PairRewardLaw(0, 2, 2, ((0, F(1, 4)), (2, F(3, 4))))
        assert law.pad(3).as_dict() == {(0, 0, 2): F(1, 4), (2, 0, 0): F(3, 4)}

    def test_no_contest(self):
        assert PairRewardLaw.no_contest(0, 1).pad(2) == point_mass((0, 0))


class TestRoundRobin:
    """测试循环赛精确分布。"""

    def test_single_match(self):
        d = build_binomial_round_robin(2, 1, F(1, 3))
        assert d.as_dict() == {(0, 1): F(2, 3), (1, 0): F(1, 3)}

    def test_missing_pair(self):
        with pytest.raises(ConfigError):
            RoundRobinSpec(3, (PairRewardLaw(0, 1, 1, ((0, 1),)),))

    def test_fair_three_players(self):
        d = build_round_robin(huber_spec(3, HALF))
        assert len(d) == 7
        assert d.prob_of((1, 1, 1)) == F(1, 4)
        assert all(sum(o) == 3 for o in d.outcomes)

    def test_binomial_marginal(self):
        d = build_binomial_round_robin(2, 2, HALF)
        assert marginal(d, (0,)).as_dict() == {(0,): F(1, 4), (1,): HALF, (2,): F(1, 4)}

    def test_binomial_constant_sum(self):
        d = build_binomial_round_robin(3, 2, F(1, 3))
        assert {sum(o) for o in d.outcomes} == {6}

    def test_binomial_zero_games(self):
        d = build_binomial_round_robin(3, [[0, 0, 1], [0, 0, 1], [0, 0, 0]], HALF)
        assert {sum(o) for o in d.outcomes} == {2}
        assert check_na(d).holds

    def test_chess_all_draws(self):
        assert build_chess_round_robin(3, 0, 1) == point_mass((1, 1, 1))

    def test_chess_bad_probabilities(self):
        with pytest.raises(InvalidProbability):
            build_chess_round_robin(3, F(2, 3), F(2, 3))

    def test_chess_half_points(self):
        d = build_chess_round_robin(3, F(1, 3), F(1, 3))
        assert {sum(o) for o in d.outcomes} == {3}
        assert HALF in d.support_grid[0]

    def test_equals_convolution_of_pads(self):
        spec = huber_spec(4, F(2, 3))
        assert build_round_robin(spec) == convolve(pairwise_pads(spec))

    def test_monotone_utilities(self):
        spec = RoundRobinSpec(2, (PairRewardLaw(0, 1, 1, ((0, HALF), (1, HALF))),),
                              ({0: 0, 1: 10}, None))
        assert build_round_robin(spec).as_dict() == {(0, 1): HALF, (10, 0): HALF}

    def test_decreasing_utility_rejected(self):
        spec = RoundRobinSpec(2, (PairRewardLaw(0, 1, 1, ((0, HALF), (1, HALF))),),
                              ({0: 1, 1: 0}, None))
        with pytest.raises(NotMonotone):
            build_round_robin(spec)

    def test_atom_budget(self):
        with pytest.raises(AtomBudgetExceeded):
            build_round_robin(huber_spec(4, HALF), Budgets(atoms=3))

    def test_top_probability(self):
        d = build_round_robin(huber_spec(3, HALF))
        assert top_probability(d, 0, "strict") == F(1, 4)
        assert top_probability(d, 0, "split") == F(1, 3)
        assert sum(top_probability(d, i, "split") for i in range(3)) == 1

    def test_top_probability_bad_rule(self):
        with pytest.raises(ConfigError):
            top_probability(point_mass((0, 0)), 0, "random")


class TestRandomSum:
    """测试随机和赛制。"""

    def test_football_points(self):
        d = build_random_sum(RandomSumSpec(tuple(football_rounds(3, (F(1, 3), F(1, 3), F(1, 3))))))
        totals = {sum(o) for o in d.outcomes}
        assert totals <= {6, 7, 8, 9}
        assert d.prob_of((6, 3, 0)) == F(1, 27)

    def test_single_round_is_identity(self):
        assert build_random_sum(RandomSumSpec((COUNTER_COIN,))) == COUNTER_COIN

    def test_precondition_enforced(self):
        bad = from_atoms([((0, 0), HALF), ((1, 1), HALF)])
        with pytest.raises(PreconditionNAFailed) as info:
            build_random_sum(RandomSumSpec((COUNTER_COIN, bad)))
        assert info.value.round_index == 1
        assert not info.value.result.holds

    def test_precondition_waived(self):
        bad = from_atoms([((0, 0), HALF), ((1, 1), HALF)])
        d = build_random_sum(RandomSumSpec((bad, bad)), waive_na=True)
        assert d.as_dict() == {(0, 0): F(1, 4), (1, 1): HALF, (2, 2): F(1, 4)}

    def test_increasing_utility_of_history(self):
        best = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}
        d = build_random_sum(RandomSumSpec((COUNTER_COIN, COUNTER_COIN), (best, None)))
        assert d.as_dict() == {(0, 2): F(1, 4), (1, 1): HALF, (1, 0): F(1, 4)}

    def test_non_monotone_utility(self):
        worst = {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0}
        with pytest.raises(NotMonotone):
            build_random_sum(RandomSumSpec((COUNTER_COIN, COUNTER_COIN), (worst, None)))

    def test_multinomial_round(self):
        d = build_multinomial_round(2, 2, (HALF, HALF))
        assert d.as_dict() == {(0, 2): F(1, 4), (1, 1): HALF, (2, 0): F(1, 4)}

    def test_multinomial_probabilities(self):
        with pytest.raises(InvalidProbability):
            build_multinomial_round(2, 2, (HALF, F(1, 3)))

    def test_random_permutation(self):
        d = build_random_permutation([0, 0, 1])
        assert d.as_dict() == {(0, 0, 1): F(1, 3), (0, 1, 0): F(1, 3), (1, 0, 0): F(1, 3)}


class TestKnockout:
    """测试淘汰赛精确分布。"""

    def test_canonical_bracket_counts(self):
        assert len(list(canonical_brackets(range(4)))) == 3
        assert len(list(canonical_brackets(range(8)))) == 315

    def test_fixed_draw_four(self):
        d = build_knockout(KnockoutSpec.equal_strength(2, (0, 1, 2, 3)))
        assert len(d) == 8
        assert set(d.probs) == {F(1, 8)}
        assert d.prob_of((2, 0, 1, 0)) == F(1, 8)
        assert d.prob_of((2, 1, 0, 0)) == 0

    def test_random_draw_is_random_permutation(self):
        d = build_knockout(KnockoutSpec.equal_strength(2))
        assert len(d) == 12
        assert d == build_random_permutation([0, 0, 1, 2])

    def test_draw_enumerations_agree(self):
        spec = KnockoutSpec.equal_strength(2)
        assert build_knockout(spec, draw_enumeration="quotient") == \
            build_knockout(spec, draw_enumeration="permutations")

    @pytest.mark.parametrize("spec", [
        cyclic_spec(F(1, 100)),
        KnockoutSpec(2, ((0, F(1, 3), F(3, 4), F(1, 2)),
                         (F(2, 3), 0, F(2, 5), F(1, 5)),
                         (F(1, 4), F(3, 5), 0, F(5, 6)),
                         (F(1, 2), F(4, 5), F(1, 6), 0))),
    ])
    def test_draw_enumerations_agree_unequal_strengths(self, spec):
        quotient = build_knockout(spec, draw_enumeration="quotient")
        assert quotient == build_knockout(spec, draw_enumeration="permutations")
        assert sum(quotient.probs) == 1

    def test_unknown_draw_enumeration(self):
        with pytest.raises(ConfigError):
            build_knockout(KnockoutSpec.equal_strength(2), draw_enumeration="sampled")

    def test_fixed_draw_eight(self):
        d = build_knockout(KnockoutSpec.equal_strength(3, range(8)))
        assert len(d) == 128
        assert check_nod(d).holds

    def test_win_matrix_must_be_complementary(self):
        rows = ((0, F(2, 3)), (F(2, 3), 0))
        with pytest.raises(InvalidProbability):
            KnockoutSpec(1, rows)

    def test_bracket_must_be_permutation(self):
        with pytest.raises(ConfigError):
            KnockoutSpec.equal_strength(2, (0, 1, 1, 3))

    def test_prizes(self):
        d = build_knockout(KnockoutSpec.equal_strength(2, prizes={0: 0, 1: 10, 2: 30}))
        assert all(sorted(o) == [0, 0, 10, 30] for o in d.outcomes)

    def test_decreasing_prizes_rejected(self):
        with pytest.raises(NotMonotone):
            build_knockout(KnockoutSpec.equal_strength(2, prizes={0: 5, 1: 1, 2: 9}))


class TestCyclicCounterexample:
    """测试非传递实力下的反例。"""

    def test_law(self):
        d = build_cyclic_counterexample(0)
        third = F(1, 3)
        assert d.as_dict() == {(0, 2, 0, 1): third, (0, 2, 1, 0): third, (1, 0, 2, 0): third}

    def test_orthant_gap(self):
        d = build_cyclic_counterexample(0)
        assert orthant_prob(d, (0, 2, 0, 2)) == F(1, 3)
        assert not check_nlod(d).holds

    def test_perturbed_strengths_still_violate(self):
        assert not check_nlod(build_cyclic_counterexample(F(1, 100))).holds

    def test_epsilon_range(self):
        with pytest.raises(InvalidProbability):
            build_cyclic_counterexample(HALF)


class TestDisjointMonotoneFamily:
    """测试独立变量的不相交单调函数族。"""

    X = {0: F(1, 3), 1: F(1, 3), 2: F(1, 3)}
    IDENTITY = {(0,): 0, (1,): 1, (2,): 2}

    def test_decreasing_image(self):
        d = build_disjoint_monotone_family([self.X], [{0: 2, 1: 1, 2: 0}],
                                           [((0,), ()), ((), (0,))],
                                           [self.IDENTITY, self.IDENTITY])
        assert d.as_dict() == {(0, 2): F(1, 3), (1, 1): F(1, 3), (2, 0): F(1, 3)}
        assert check_na(d).holds

    def test_increasing_g_rejected(self):
        with pytest.raises(NotMonotone):
            build_disjoint_monotone_family([self.X], [{0: 0, 1: 1, 2: 2}],
                                           [((0,), ()), ((), (0,))],
                                           [self.IDENTITY, self.IDENTITY])

    def test_overlapping_a_sets(self):
        with pytest.raises(OverlappingSubsets):
            build_disjoint_monotone_family([self.X], [None], [((0,), ()), ((0,), ())],
                                           [self.IDENTITY, self.IDENTITY])

    def test_constant_functions(self):
        d = build_disjoint_monotone_family([self.X], [None], [((0,), ())],
                                           [{(0,): 5, (1,): 5, (2,): 5}])
        assert d == point_mass((5,))

    def test_round_robin_as_family(self):
        spec = huber_spec(3, F(2, 3))
        assert round_robin_as_family(spec) == build_round_robin(spec)


class TestBuildFromConfig:
    """测试模型配置构建。"""

    def test_cyclic(self):
        d, prov = build_from_config({"model": "cyclic", "epsilon": "0"})
        assert len(d) == 3
        assert prov["model"] == "cyclic"
        assert prov["na_precondition"] == "not_applicable"
        assert len(prov["config_hash"]) == 64

    def test_round_robin_pairs(self):
        config = {"model": "round_robin", "n": 2,
                  "pairs": [{"i": 0, "j": 1, "r": "2", "atoms": [["0", "1/2"], ["2", "1/2"]]}]}
        d, _ = build_from_config(config)
        assert d.as_dict() == {(0, 2): HALF, (2, 0): HALF}

    def test_binomial_pair_object(self):
        config = {"model": "binomial_rr", "n": 2, "r": {"0,1": 1}, "p": {"0,1": "1/4"}}
        d, _ = build_from_config(config)
        assert d.prob_of((1, 0)) == F(1, 4)

    def test_knockout_fixed(self):
        d, _ = build_from_config({"model": "knockout", "level": 2, "bracket": [0, 1, 2, 3]})
        assert len(d) == 8

    def test_football_checked(self):
        d, prov = build_from_config({"model": "football", "n": 2, "match_probs": ["1/2", "0", "1/2"]})
        assert prov["na_precondition"] == "checked"
        assert d.as_dict() == {(0, 3): HALF, (3, 0): HALF}

    def test_random_sum_waived(self):
        bad = {"n": 2, "atoms": [{"outcome": ["0", "0"], "prob": "1/2"},
                                 {"outcome": ["1", "1"], "prob": "1/2"}]}
        d, prov = build_from_config({"model": "random_sum", "rounds": [bad], "waive_na": True})
        assert prov["na_precondition"] == "waived"
        assert len(d) == 2

    def test_permutation(self):
        d, _ = build_from_config({"model": "permutation", "values": [0, 1]})
        assert d == COUNTER_COIN

    def test_multinomial(self):
        d, _ = build_from_config({"model": "multinomial", "n": 2, "trials": 1, "probs": ["1/2", "1/2"]})
        assert d == from_atoms([((0, 1), HALF), ((1, 0), HALF)])

    def test_malformed_rational(self):
        with pytest.raises(InvalidRational):
            build_from_config({"model": "cyclic", "epsilon": "1/0"})

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            build_from_config({"model": "swiss"})

    def test_missing_field(self):
        with pytest.raises(ConfigError):
            build_from_config({"model": "huber", "n": 3})


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

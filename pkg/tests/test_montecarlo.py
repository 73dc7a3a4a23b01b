"""
Tourney Lab - 蒙特卡洛测试
可复现性、抽样支撑与估计精度。
"""
import sys
import os
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import ConfigError, DimensionMismatch
from src.exactdist import Orthant, from_atoms, orthant_prob
from src.models import (
    KnockoutSpec,
    RandomSumSpec,
    build_chess_round_robin,
    build_cyclic_counterexample,
    build_knockout,
    build_round_robin,
    chess_round_robin_spec,
    cyclic_spec,
    huber_spec,
    top_probability,
)
from src.montecarlo import (
    DistSampler,
    Seed,
    _uniform_below,
    estimate_event,
    estimate_orthant_probability,
    estimate_top_probability,
    make_sampler,
    replication_rng,
    sample_model,
    top_credit,
)
from src.staged import knockout_as_staged, sum_staged

F = Fraction
HALF = F(1, 2)
COUNTER_COIN = from_atoms([((1, 0), HALF), ((0, 1), HALF)])


class TestSeeds:
    """测试种子与复现性。"""

    def test_seed_range(self):
        with pytest.raises(ConfigError):
            Seed(-1)
        with pytest.raises(ConfigError):
            Seed(1 << 64)
        with pytest.raises(ConfigError):
            Seed(1, -1)

    def test_replication_streams(self):
        a = replication_rng(42, 0).integers(0, 1 << 62, size=4).tolist()
        b = replication_rng(42, 0).integers(0, 1 << 62, size=4).tolist()
        c = replication_rng(42, 1).integers(0, 1 << 62, size=4).tolist()
        assert a == b
        assert a != c

    def test_sample_is_pure_function_of_seed(self):
        spec = huber_spec(4, HALF)
        for rep in range(10):
            assert sample_model(spec, Seed(7, rep)) == sample_model(spec, Seed(7, rep))

    def test_uniform_below_large_bound(self):
        rng = replication_rng(3, 0)
        bound = (1 << 100) + 7
        for _ in range(20):
            assert 0 <= _uniform_below(rng, bound) < bound


class TestSamplers:
    """测试各模型的抽样器。"""

    def test_certain_winner(self):
        spec = huber_spec(4, 1)
        for rep in range(20):
            assert sample_model(spec, Seed(9, rep))[0] == 3

    def test_all_draws(self):
        spec = chess_round_robin_spec(3, 0, 1)
        assert sample_model(spec, 5) == (1, 1, 1)

    def test_round_robin_support(self):
        spec = chess_round_robin_spec(3, F(1, 3), F(1, 3))
        support = build_chess_round_robin(3, F(1, 3), F(1, 3)).as_dict()
        for rep in range(50):
            assert sample_model(spec, Seed(1, rep)) in support

    def test_dist_sampler_support(self):
        d = build_cyclic_counterexample(0)
        sampler = DistSampler(d)
        for rep in range(50):
            assert sampler.draw(replication_rng(2, rep)) in d.as_dict()

    def test_knockout_support(self):
        for spec in (KnockoutSpec.equal_strength(2), cyclic_spec(0)):
            support = build_knockout(spec).as_dict()
            for rep in range(50):
                assert sample_model(spec, Seed(4, rep)) in support

    def test_staged_support(self):
        m = knockout_as_staged(KnockoutSpec.equal_strength(3, range(8)))
        support = sum_staged(m).as_dict()
        for rep in range(30):
            assert sample_model(m, Seed(6, rep)) in support

    def test_random_sum_utilities(self):
        best = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}
        spec = RandomSumSpec((COUNTER_COIN, COUNTER_COIN), (best, None))
        for rep in range(30):
            assert sample_model(spec, Seed(8, rep)) in {(0, 2), (1, 1), (1, 0)}

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            make_sampler("huber")


class TestEstimates:
    """测试估计量与置信区间。"""

    def test_certain_event_has_zero_se(self):
        est = estimate_top_probability(huber_spec(4, 1), 0, reps=200, seed=1)
        assert est.estimate == 1.0
        assert est.se == 0.0
        assert est.within(F(1), 4)

    def test_interval_is_symmetric(self):
        est = estimate_top_probability(huber_spec(3, HALF), 0, reps=500, seed=2)
        lo, hi = est.ci
        assert lo < est.estimate < hi
        assert hi - est.estimate == pytest.approx(est.estimate - lo)
        assert est.to_dict()["tie_rule"] == "strict"
        assert set(est.to_dict()) == {"estimate", "se", "ci", "level", "reps", "seed", "tie_rule"}

    def test_workers_and_chunks_do_not_change_result(self):
        spec = huber_spec(4, HALF)
        credit = top_credit(0, "split")
        one = estimate_event(spec, credit, reps=300, seed=3, workers=1, chunk_size=300)
        many = estimate_event(spec, credit, reps=300, seed=3, workers=3, chunk_size=50)
        assert one == many

    @pytest.mark.parametrize("tie_rule", ["strict", "split"])
    def test_top_probability_agrees_with_exact(self, tie_rule):
        spec = huber_spec(4, HALF)
        exact = top_probability(build_round_robin(spec), 0, tie_rule)
        est = estimate_top_probability(spec, 0, reps=4000, seed=11, tie_rule=tie_rule)
        assert est.within(exact, 4)

    def test_cyclic_orthant_agrees_with_exact(self):
        exact = orthant_prob(build_cyclic_counterexample(0), (0, 2, 0, 2))
        est = estimate_orthant_probability(cyclic_spec(0), (0, 2, 0, 2), Orthant.LOWER, reps=3000, seed=13)
        assert est.within(exact, 4)

    def test_whole_space(self):
        spec = KnockoutSpec.equal_strength(2, (0, 1, 2, 3))
        est = estimate_orthant_probability(spec, (2, 2, 2, 2), Orthant.LOWER, reps=100, seed=1)
        assert est.estimate == 1.0

    def test_bad_arguments(self):
        spec = huber_spec(3, HALF)
        with pytest.raises(ConfigError):
            estimate_top_probability(spec, 0, reps=0, seed=1)
        with pytest.raises(ConfigError):
            estimate_top_probability(spec, 0, reps=10, seed=1, level=1.5)
        with pytest.raises(DimensionMismatch):
            estimate_top_probability(spec, 3, reps=10, seed=1)
        with pytest.raises(DimensionMismatch):
            estimate_orthant_probability(spec, (0, 0), Orthant.LOWER, reps=10, seed=1)
        with pytest.raises(ConfigError):
            top_credit(0, "coin")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

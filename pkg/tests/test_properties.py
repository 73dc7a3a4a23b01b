"""
Property-based tests for the exact engine and the dependence checks.

Each property compares a fast path against a slow one (brute force, a
bivariate characterization, or a second construction), or asserts a
negative-dependence guarantee over randomly generated tournaments.
"""
import sys
import os
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.depcheck import check_na, check_nlod, check_nuod, check_signed_monotone, covariance_of
from src.exactdist import Orthant, convolve, embed, from_atoms, marginal, orthant_prob
from src.models import (
    PairRewardLaw,
    RoundRobinSpec,
    build_random_permutation,
    build_round_robin,
    round_robin_as_family,
)
from src.staged import random_staged_model, sum_staged, verify_assumption_i, verify_assumption_ii
from src.upper_sets import upper_set_masks
from src.utils.verifier import verify_witness

SETTINGS = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])


# ═══════════════════════════════════════════════════════════════════
# Strategies
# ═══════════════════════════════════════════════════════════════════

@st.composite
def joint_laws(draw, n=2, values=3, max_atoms=6):
    """A law on {0..values-1}^n with integer weights."""
    grid = list(product(range(values), repeat=n))
    points = draw(st.lists(st.sampled_from(grid), min_size=1, max_size=max_atoms, unique=True))
    weights = draw(st.lists(st.integers(1, 5), min_size=len(points), max_size=len(points)))
    total = sum(weights)
    return from_atoms([(p, Fraction(w, total)) for p, w in zip(points, weights)], n)


@st.composite
def pair_laws(draw, i, j):
    r = draw(st.integers(0, 2))
    if r == 0:
        return PairRewardLaw.no_contest(i, j)
    support = draw(st.lists(st.integers(0, r), min_size=1, max_size=r + 1, unique=True))
    weights = draw(st.lists(st.integers(1, 4), min_size=len(support), max_size=len(support)))
    total = sum(weights)
    return PairRewardLaw(i, j, r, tuple((v, Fraction(w, total)) for v, w in zip(support, weights)))


@st.composite
def round_robins(draw, n=3):
    return RoundRobinSpec(n, tuple(draw(pair_laws(i, j)) for i, j in combinations(range(n), 2)))


@st.composite
def point_sets(draw):
    grid = list(product(range(3), repeat=2))
    return sorted(draw(st.lists(st.sampled_from(grid), min_size=1, max_size=7, unique=True)))


def _brute_upper_sets(points):
    count = 0
    for mask in range(1 << len(points)):
        members = [p for k, p in enumerate(points) if mask >> k & 1]
        closed = all(
            q in members
            for p in members for q in points
            if all(a >= b for a, b in zip(q, p))
        )
        count += closed
    return count


def _orthant_oracle(d, mode):
    """Brute force over a grid denser than the support."""
    axes = []
    for col in d.support_grid:
        values = set(col) | {col[0] - 1, col[-1] + 1} | {(a + b) / 2 for a, b in zip(col, col[1:])}
        axes.append(sorted(values))
    marginals = [marginal(d, [i]) for i in range(d.n)]
    for s in product(*axes):
        rhs = Fraction(1)
        for i in range(d.n):
            rhs *= orthant_prob(marginals[i], [s[i]], mode)
        if orthant_prob(d, s, mode) > rhs:
            return False
    return True


def _projection(d, coords):
    return sorted({tuple(o[c] for c in coords) for o in d.outcomes})


def _random_increasing(rng, points):
    """Nonnegative mix of indicators of principal upper sets."""
    gens = [points[int(rng.integers(len(points)))] for _ in range(3)]
    weights = [int(w) for w in rng.integers(0, 4, size=3)]
    return {x: sum(w for w, g in zip(weights, gens) if all(a >= b for a, b in zip(x, g))) for x in points}


# ═══════════════════════════════════════════════════════════════════
# Upper sets
# ═══════════════════════════════════════════════════════════════════

class TestUpperSetProperties:
    """上集枚举与穷举计数一致。"""

    @SETTINGS
    @given(point_sets())
    def test_count_matches_brute_force(self, points):
        assert len(upper_set_masks(points)) == _brute_upper_sets(points)

    @SETTINGS
    @given(point_sets())
    def test_masks_are_distinct(self, points):
        masks = upper_set_masks(points)
        assert len(set(masks)) == len(masks)
        assert masks[0] == (1 << len(points)) - 1
        assert masks[-1] == 0


# ═══════════════════════════════════════════════════════════════════
# Dependence checks
# ═══════════════════════════════════════════════════════════════════

class TestCheckProperties:
    """判定结果与慢速参照一致。"""

    @SETTINGS
    @given(joint_laws(n=2))
    def test_bivariate_characterizations_agree(self, d):
        # for two coordinates NA, NLOD and NUOD coincide
        na = check_na(d).holds
        assert check_nlod(d).holds == na
        assert check_nuod(d).holds == na

    @SETTINGS
    @given(joint_laws(n=3, values=2, max_atoms=8))
    def test_orthant_checks_match_dense_threshold_oracle(self, d):
        # thresholds below, between and above the attained values
        assert check_nlod(d).holds == _orthant_oracle(d, Orthant.LOWER)
        assert check_nuod(d).holds == _orthant_oracle(d, Orthant.UPPER)

    @SETTINGS
    @given(joint_laws(n=3, values=2, max_atoms=8))
    def test_witnesses_reverify(self, d):
        for check in (check_nlod, check_nuod, check_na, check_signed_monotone):
            result = check(d)
            assert verify_witness(d, result)

    @SETTINGS
    @given(joint_laws(n=3, values=2, max_atoms=8))
    def test_na_implies_nod(self, d):
        if check_na(d).holds:
            assert check_nlod(d).holds
            assert check_nuod(d).holds

    @SETTINGS
    @given(joint_laws(n=3, values=2, max_atoms=8))
    def test_signed_implies_na(self, d):
        if check_signed_monotone(d).holds:
            assert check_na(d).holds

    @settings(max_examples=10, deadline=None)
    @given(st.one_of(round_robins().map(build_round_robin),
                     st.lists(st.integers(0, 2), min_size=3, max_size=3).map(build_random_permutation)),
           st.integers(0, 2 ** 32 - 1))
    def test_random_increasing_pairs_have_nonpositive_covariance(self, d, seed):
        assert check_na(d).holds
        rng = np.random.default_rng(seed)
        for _ in range(100):
            order = [int(c) for c in rng.permutation(d.n)]
            cut = int(rng.integers(1, d.n))
            rest = order[cut:]
            a1, a2 = sorted(order[:cut]), sorted(rest[:int(rng.integers(1, len(rest) + 1))])
            f1 = _random_increasing(rng, _projection(d, a1))
            f2 = _random_increasing(rng, _projection(d, a2))
            assert covariance_of(d, f1, a1, f2, a2) <= 0


# ═══════════════════════════════════════════════════════════════════
# Tournament guarantees
# ═══════════════════════════════════════════════════════════════════

class TestTournamentProperties:
    """随机生成的赛制满足负相依保证。"""

    @SETTINGS
    @given(round_robins())
    def test_round_robin_is_na(self, spec):
        d = build_round_robin(spec)
        assert {sum(o) for o in d.outcomes} == {spec.total_reward}
        assert check_na(d).holds

    @SETTINGS
    @given(round_robins())
    def test_family_construction_agrees(self, spec):
        assert round_robin_as_family(spec) == build_round_robin(spec)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.integers(0, 2), min_size=3, max_size=3),
           st.lists(st.integers(0, 2), min_size=3, max_size=3),
           st.sampled_from([(0, 1), (0, 2), (1, 2)]))
    def test_convolution_of_na_laws(self, values_a, values_b, pair):
        a = build_random_permutation(values_a)
        b = build_random_permutation(values_b)
        c = embed(from_atoms([((0, 1), Fraction(1, 2)), ((1, 0), Fraction(1, 2))]), 3, pair)
        assert check_na(convolve([a, b, c])).holds

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_staged_sum_keeps_orthant_dependence(self, seed):
        m = random_staged_model(np.random.default_rng(seed), n=2, stages=3)
        assert verify_assumption_i(m).holds
        assert verify_assumption_ii(m).holds
        total = sum_staged(m)
        assert check_nlod(total).holds
        assert check_nuod(total).holds


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

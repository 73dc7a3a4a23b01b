#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Scenario Catalog - 场景清单
每个场景绑定：模型参数 → 构建 → 判定 → 与已知数值比对；清单由数据驱动。

A claim is one of
    exact     computed value must equal the expected rational or verdict
    mc        Monte Carlo estimate within k standard errors of an exact value
    recorded  value is reported without an expectation (always passes)
A scenario passes iff all of its claims pass.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Any, Callable, Dict, List, Mapping, Optional

from src.config import DEFAULT_BUDGETS, MC_DEFAULT_REPS, MC_DEFAULT_SEED, Budgets
from src.depcheck import (
    CheckResult,
    MonotonePairWitness,
    OrthantWitness,
    check_na,
    check_nlod,
    check_nod,
    check_nuod,
    check_signed_monotone,
    covariance_of,
)
from src.errors import UnknownScenario
from src.exactdist import (
    JointDist,
    Orthant,
    convolve,
    condition_on,
    coordinate_sum_support,
    countermonotone_coupling,
    embed,
    expectation,
    from_atoms,
    marginal,
    orthant_prob,
    point_mass,
)
from src.models import (
    KnockoutSpec,
    PairRewardLaw,
    RandomSumSpec,
    RoundRobinSpec,
    binomial_round_robin_spec,
    build_cyclic_counterexample,
    build_knockout,
    build_multinomial_round,
    build_random_permutation,
    build_random_sum,
    build_round_robin,
    chess_round_robin_spec,
    cyclic_spec,
    football_rounds,
    huber_spec,
    pairwise_pads,
    round_robin_as_family,
    top_probability,
)
from src.montecarlo import Estimate, estimate_orthant_probability, estimate_top_probability, replication_rng
from src.staged import (
    StageKernel,
    StagedModel,
    knockout_as_staged,
    random_staged_model,
    sum_staged,
    verify_assumption_i,
    verify_assumption_ii,
)
from src.utils.verifier import verify_witness

logger = logging.getLogger(__name__)


@dataclass
class Claim:
    name: str
    kind: str
    expected: Any
    computed: Any
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "kind": self.kind, "expected": self.expected,
                "computed": self.computed, "passed": self.passed}


@dataclass
class ScenarioContext:
    """Inputs of one run plus everything it computes."""
    seed: int = MC_DEFAULT_SEED
    reps: int = MC_DEFAULT_REPS
    budgets: Budgets = DEFAULT_BUDGETS
    claims: List[Claim] = field(default_factory=list)
    exact: Dict[str, Any] = field(default_factory=dict)
    checks: List[Dict[str, Any]] = field(default_factory=list)
    estimates: Dict[str, Estimate] = field(default_factory=dict)

    @property
    def workers(self) -> int:
        return self.budgets.workers

    def value(self, name: str, v):
        self.exact[name] = v
        return v

    def expect(self, name: str, computed, expected) -> bool:
        passed = computed == expected
        self.claims.append(Claim(name, "exact", expected, computed, passed))
        if not passed:
            logger.warning(f"claim failed: {name}: expected {expected}, got {computed}")
        return passed

    def record(self, name: str, value):
        self.claims.append(Claim(name, "recorded", None, value, True))

    def check(self, name: str, result: CheckResult, d: Optional[JointDist],
              expect: Optional[str] = None) -> CheckResult:
        """Keep a check result; witnesses found on `d` are re-verified from it."""
        self.checks.append({"name": name, "result": result})
        if expect is None:
            self.record(f"{name}: verdict", result.verdict.value)
        else:
            self.expect(f"{name}: verdict", result.verdict.value, expect)
        if d is not None and isinstance(result.witness, (OrthantWitness, MonotonePairWitness)):
            self.expect(f"{name}: witness re-verified", verify_witness(d, result), True)
        return result

    def mc(self, name: str, estimate: Estimate, exact: Fraction, k: float = 4.0):
        self.estimates[name] = estimate
        passed = estimate.within(exact, k)
        self.claims.append(Claim(name, "mc", {"exact": exact, "within_se": k}, estimate.estimate, passed))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)


@dataclass(frozen=True)
class Scenario:
    id: str
    anchor: str
    runner: Callable[[ScenarioContext, Mapping], None]
    params: Mapping = field(default_factory=dict)


def _laws(pairs) -> tuple:
    return tuple(PairRewardLaw(i, j, r, tuple(atoms.items())) for i, j, r, atoms in pairs)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _fmt(values) -> str:
    return "(" + ", ".join(str(v) for v in values) + ")"


def _orthant_cross_check(ctx: ScenarioContext, tag: str, spec, d: JointDist, count: int):
    """Sampled vs exact orthant probabilities at `count` grid thresholds with moderate mass."""
    candidates = []
    for s in product(*d.support_grid):
        for mode in (Orthant.LOWER, Orthant.UPPER):
            p = orthant_prob(d, s, mode)
            if Fraction(1, 8) <= p <= Fraction(7, 8):
                candidates.append((s, mode, p))
    ctx.expect(f"{tag}: at least {count} orthant points", len(candidates) >= count, True)
    step = max(1, len(candidates) // count)
    for s, mode, p in candidates[::step][:count]:
        op = "<=" if mode is Orthant.LOWER else ">"
        est = estimate_orthant_probability(spec, s, mode, ctx.reps, ctx.seed, workers=ctx.workers)
        ctx.mc(f"{tag}: sampled P(S {op} {_fmt(s)})", est, p)


def _huber_limit(ctx: ScenarioContext, params: Mapping):
    p = params["p"]
    exact = ctx.value("top_probability(n=4)", top_probability(build_round_robin(huber_spec(4, p), ctx.budgets), 0))
    sizes = list(params["sizes"])
    estimates = {}
    for n in sizes:
        est = estimate_top_probability(huber_spec(n, p), 0, ctx.reps, ctx.seed, "strict", workers=ctx.workers)
        ctx.estimates[f"top_probability(n={n})"] = est
        estimates[n] = est
    ctx.mc("estimate(n=4) agrees with exact", estimates[4], exact, k=params["agreement_se"])
    for prev, n in zip(sizes, sizes[1:]):
        ctx.claims.append(Claim(f"estimate increases from n={prev} to n={n}", "mc",
                                {"greater_than": estimates[prev].estimate}, estimates[n].estimate,
                                estimates[n].estimate > estimates[prev].estimate))
    first, last = estimates[sizes[0]], estimates[sizes[-1]]
    margin = params["gap_se"] * math.hypot(first.se, last.se)
    ctx.claims.append(Claim(f"estimate(n={sizes[-1]}) - estimate(n={sizes[0]}) exceeds {params['gap_se']} SE",
                            "mc", {"greater_than": margin}, last.estimate - first.estimate,
                            last.estimate - first.estimate > margin))


def _rr_general(ctx: ScenarioContext, params: Mapping):
    spec = RoundRobinSpec(3, _laws(params["pairs"]))
    d = build_round_robin(spec, ctx.budgets)
    ctx.record("atoms", len(d))
    ctx.expect("coordinate sum support", coordinate_sum_support(d), (spec.total_reward,))
    ctx.check("NA", check_na(d, budgets=ctx.budgets), d, "holds")
    ctx.expect("disjoint monotone family path agrees", round_robin_as_family(spec, ctx.budgets) == d, True)
    ctx.expect("sum of pairwise pads agrees", convolve(pairwise_pads(spec), ctx.budgets.atoms) == d, True)

    with_utilities = RoundRobinSpec(3, spec.pair_laws, tuple(params["utilities"]))
    du = build_round_robin(with_utilities, ctx.budgets)
    ctx.check("NA with increasing utilities", check_na(du, budgets=ctx.budgets), du, "holds")

    idle = RoundRobinSpec(3, _laws(params["no_contest_pairs"]))
    di = build_round_robin(idle, ctx.budgets)
    ctx.expect("no-contest coordinate sum support", coordinate_sum_support(di), (idle.total_reward,))
    ctx.check("NA with a no-contest pair", check_na(di, budgets=ctx.budgets), di, "holds")


def _rr_binomial(ctx: ScenarioContext, params: Mapping):
    two = build_round_robin(binomial_round_robin_spec(2, 2, Fraction(1, 2)), ctx.budgets)
    ctx.expect("n=2 r=2 p=1/2: law of S_0", marginal(two, [0]),
               from_atoms([((0,), Fraction(1, 4)), ((1,), Fraction(1, 2)), ((2,), Fraction(1, 4))]))
    one = build_round_robin(binomial_round_robin_spec(3, 1, Fraction(1, 2)), ctx.budgets)
    ctx.expect("r=1 reduces to the simple round robin", one, build_round_robin(huber_spec(3, Fraction(1, 2))))
    d = build_round_robin(binomial_round_robin_spec(3, 2, Fraction(1, 2)), ctx.budgets)
    ctx.expect("n=3 r=2 coordinate sum support", coordinate_sum_support(d), (Fraction(6),))
    ctx.check("NA (r=2, p=1/2)", check_na(d, budgets=ctx.budgets), d, "holds")
    mixed = build_round_robin(binomial_round_robin_spec(3, params["r"], params["p"]), ctx.budgets)
    ctx.check("NA (unequal r and p)", check_na(mixed, budgets=ctx.budgets), mixed, "holds")


def _rr_chess(ctx: ScenarioContext, params: Mapping):
    third = Fraction(1, 3)
    d = build_round_robin(chess_round_robin_spec(3, third, third), ctx.budgets)
    ctx.expect("coordinate sum support", coordinate_sum_support(d), (Fraction(3),))
    ctx.value("P(S_0 = 1)", marginal(d, [0]).prob_of([1]))
    ctx.record("atoms", len(d))
    ctx.check("NA (equal strength, p_draw=1/3)", check_na(d, budgets=ctx.budgets), d, "holds")
    draws = build_round_robin(chess_round_robin_spec(3, 0, 1), ctx.budgets)
    ctx.expect("p_draw=1 is a point mass", draws, point_mass([1, 1, 1]))
    no_draws = build_round_robin(chess_round_robin_spec(3, Fraction(1, 2), 0), ctx.budgets)
    ctx.expect("p_draw=0 reduces to the simple round robin", no_draws,
               build_round_robin(huber_spec(3, Fraction(1, 2))))
    mixed_spec = chess_round_robin_spec(3, params["p_win"], params["p_draw"])
    mixed = build_round_robin(mixed_spec, ctx.budgets)
    ctx.check("NA (unequal strengths)", check_na(mixed, budgets=ctx.budgets), mixed, "holds")
    _orthant_cross_check(ctx, "unequal strengths", mixed_spec, mixed, params["orthant_points"])


def _random_sum_football(ctx: ScenarioContext, params: Mapping):
    rounds = football_rounds(3, params["match_probs"])
    d = build_random_sum(RandomSumSpec(tuple(rounds)), budgets=ctx.budgets)
    support = coordinate_sum_support(d)
    ctx.value("coordinate sum support", list(support))
    ctx.expect("coordinate sum support within 6..9", set(support) <= {Fraction(v) for v in range(6, 10)}, True)
    ctx.check("NA of league points", check_na(d, budgets=ctx.budgets), d, "holds")
    ctx.expect("single round is unchanged", build_random_sum(RandomSumSpec((rounds[0],)), budgets=ctx.budgets),
               rounds[0])
    spec = RoundRobinSpec(3, _laws(params["pairs"]))
    ctx.expect("round-robin pads as a random sum", build_random_sum(RandomSumSpec(tuple(pairwise_pads(spec))),
                                                                    budgets=ctx.budgets),
               build_round_robin(spec, ctx.budgets))


def _knockout_random(ctx: ScenarioContext, params: Mapping):
    d4 = build_knockout(KnockoutSpec.equal_strength(2), ctx.budgets)
    ctx.expect("n=4 law is a uniform arrangement of (0,0,1,2)", d4, build_random_permutation([0, 0, 1, 2]))
    ctx.expect("n=4 atoms", len(d4), 12)
    ctx.expect("bracket quotient equals all leaf orders",
               build_knockout(KnockoutSpec.equal_strength(2), ctx.budgets, "permutations"), d4)
    exchangeable = all(
        from_atoms([(tuple(o[k] for k in perm), p) for o, p in d4.atoms]) == d4
        for perm in permutations(range(4))
    )
    ctx.expect("n=4 law is exchangeable", exchangeable, True)
    champion = condition_on(d4, lambda o: o[0] == 2)
    ctx.expect("given player 0 wins, the runner-up is uniform over the rest", champion,
               from_atoms([((2,) + tuple(int(k == j) for k in (1, 2, 3)), Fraction(1, 3)) for j in (1, 2, 3)]))
    ctx.check("NA (n=4)", check_na(d4, budgets=ctx.budgets), d4, "holds")
    _orthant_cross_check(ctx, "n=4", KnockoutSpec.equal_strength(2), d4, params["orthant_points"])

    d8 = build_knockout(KnockoutSpec.equal_strength(3), ctx.budgets)
    multiset = tuple(Fraction(v) for v in params["scores_8"])
    ctx.expect("n=8 every outcome arranges (0,0,0,0,1,1,2,3)",
               all(tuple(sorted(o)) == multiset for o in d8.outcomes), True)
    ctx.expect("n=8 law is a uniform arrangement", d8, build_random_permutation(multiset, ctx.budgets))
    ctx.record("n=8 atoms", len(d8))


def _knockout_fixed(ctx: ScenarioContext, params: Mapping):
    spec4 = KnockoutSpec.equal_strength(2, params["bracket_4"])
    d4 = build_knockout(spec4, ctx.budgets)
    ctx.expect("n=4 atoms", len(d4), 8)
    ctx.expect("(0,0,1,2) is unreachable", d4.prob_of([0, 0, 1, 2]), Fraction(0))
    ctx.check("NOD (n=4)", check_nod(d4, ctx.budgets), d4, "holds")
    d8 = build_knockout(KnockoutSpec.equal_strength(3, params["bracket_8"]), ctx.budgets)
    ctx.expect("n=8 atoms", len(d8), 128)
    ctx.check("NOD (n=8)", check_nod(d8, ctx.budgets), d8, "holds")
    _orthant_cross_check(ctx, "n=4", spec4, d4, params["orthant_points"])


def _counterexample_cyclic(ctx: ScenarioContext, params: Mapping):
    d = build_cyclic_counterexample(0, ctx.budgets)
    third = Fraction(1, 3)
    ctx.expect("law", d, from_atoms([((1, 0, 2, 0), third), ((0, 2, 1, 0), third), ((0, 2, 0, 1), third)]))
    e02 = ctx.value("E[S_0 S_2]", expectation(d, lambda o: o[0] * o[2]))
    ctx.expect("E[S_0 S_2]", e02, Fraction(2, 3))
    ctx.expect("E[S_0]", expectation(d, lambda o: o[0]), third)
    ctx.expect("E[S_2]", expectation(d, lambda o: o[2]), Fraction(1))
    ctx.expect("Cov(S_0, S_2)", e02 - expectation(d, lambda o: o[0]) * expectation(d, lambda o: o[2]), third)

    nlod = ctx.check("NLOD", check_nlod(d, ctx.budgets), d, "violated")
    if nlod.witness is not None:
        ctx.expect("NLOD witness lhs", nlod.witness.lhs, third)
        ctx.expect("NLOD witness rhs", nlod.witness.rhs, Fraction(2, 9))
    s = params["thresholds"]
    marginals = [orthant_prob(marginal(d, [i]), [s[i]]) for i in range(4)]
    ctx.expect(f"P(S <= {s})", orthant_prob(d, s), third)
    ctx.expect(f"product of marginals at {s}", math.prod(marginals, start=Fraction(1)), Fraction(2, 9))
    ctx.check("NA", check_na(d, budgets=ctx.budgets), d, "violated")

    eps = params["epsilon"]
    de = build_cyclic_counterexample(eps, ctx.budgets)
    gap = orthant_prob(de, s) - math.prod((orthant_prob(marginal(de, [i]), [s[i]]) for i in range(4)),
                                          start=Fraction(1))
    ctx.value(f"orthant gap at epsilon={eps}", gap)
    ctx.expect(f"violation persists at epsilon={eps}", gap > 0, True)
    ctx.check(f"NLOD (epsilon={eps})", check_nlod(de, ctx.budgets), de, "violated")

    est = estimate_orthant_probability(cyclic_spec(0), s, Orthant.LOWER, ctx.reps, ctx.seed, workers=ctx.workers)
    ctx.mc(f"sampled P(S <= {s})", est, third)


def _counterexample_fixed(ctx: ScenarioContext, params: Mapping):
    d = build_knockout(KnockoutSpec.equal_strength(2, params["bracket"]), ctx.budgets)
    ones_1 = {tuple(Fraction(v) for v in key) for key in params["f1_ones"]}
    ones_2 = {tuple(Fraction(v) for v in key) for key in params["f2_ones"]}
    a1, a2 = tuple(params["a1"]), tuple(params["a2"])
    f1 = lambda o: 1 if tuple(o[c] for c in a1) in ones_1 else 0
    f2 = lambda o: 1 if tuple(o[c] for c in a2) in ones_2 else 0
    ef1f2 = ctx.value("E[f1 f2]", expectation(d, lambda o: f1(o) * f2(o)))
    ef1 = ctx.value("E[f1]", expectation(d, f1))
    ef2 = ctx.value("E[f2]", expectation(d, f2))
    ctx.expect("E[f1 f2]", ef1f2, Fraction(1, 8))
    ctx.expect("E[f1]", ef1, Fraction(2, 8))
    ctx.expect("E[f2]", ef2, Fraction(1, 8))
    table1 = {tuple(o[c] for c in a1): f1(o) for o in d.outcomes}
    table2 = {tuple(o[c] for c in a2): f2(o) for o in d.outcomes}
    ctx.expect("Cov(f1, f2)", covariance_of(d, table1, a1, table2, a2), Fraction(3, 32))
    ctx.check("signed monotone", check_signed_monotone(d, budgets=ctx.budgets), d, "violated")
    ctx.check("NA (increasing pairs only)", check_na(d, budgets=ctx.budgets), d)
    ctx.check("NOD", check_nod(d, ctx.budgets), d, "holds")


def _staged_preservation(ctx: ScenarioContext, params: Mapping):
    for level in params["levels"]:
        spec = KnockoutSpec.equal_strength(level, tuple(range(2 ** level)))
        model = knockout_as_staged(spec)
        tag = f"knockout n={spec.n}"
        ctx.expect(f"{tag}: stages", model.stages, level)
        ctx.check(f"{tag}: assumption (i) lower", verify_assumption_i(model, Orthant.LOWER, ctx.budgets),
                  None, "holds")
        ctx.check(f"{tag}: assumption (i) upper", verify_assumption_i(model, Orthant.UPPER, ctx.budgets),
                  None, "holds")
        ctx.check(f"{tag}: assumption (ii)", verify_assumption_ii(model, ctx.budgets), None, "holds")
        total = sum_staged(model, ctx.budgets)
        ctx.expect(f"{tag}: staged sum equals the knockout law", total, build_knockout(spec, ctx.budgets))
        ctx.check(f"{tag}: NLOD of the sum", check_nlod(total, ctx.budgets), total, "holds")
        ctx.check(f"{tag}: NUOD of the sum", check_nuod(total, ctx.budgets), total, "holds")

    for k in range(params["random_models"]):
        model = random_staged_model(replication_rng(ctx.seed, k), **params["random_shape"])
        tag = f"random model {k}"
        for mode in (Orthant.LOWER, Orthant.UPPER):
            ctx.check(f"{tag}: assumption (i) {mode.value}", verify_assumption_i(model, mode, ctx.budgets),
                      None, "holds")
        ctx.check(f"{tag}: assumption (ii)", verify_assumption_ii(model, ctx.budgets), None, "holds")
        total = sum_staged(model, ctx.budgets)
        ctx.check(f"{tag}: NLOD of the sum", check_nlod(total, ctx.budgets), total, "holds")
        ctx.check(f"{tag}: NUOD of the sum", check_nuod(total, ctx.budgets), total, "holds")

    cyclic = build_cyclic_counterexample(0)
    bad = StagedModel(4, point_mass([0, 0, 0, 0]), (StageKernel(2, {(Fraction(0),) * 4: cyclic}),))
    ctx.check("cyclic conditional: assumption (i) lower", verify_assumption_i(bad, Orthant.LOWER, ctx.budgets),
              cyclic, "violated")

    a, b = football_rounds(3, params["match_probs"])[:2]
    independent = StagedModel(3, a, (StageKernel(2, {prefix: b for prefix in a.outcomes}),))
    ctx.expect("independent stages sum to the convolution", sum_staged(independent, ctx.budgets),
               convolve([a, b], ctx.budgets.atoms))


def _convolution_na(ctx: ScenarioContext, params: Mapping):
    for k in range(params["instances"]):
        rng = replication_rng(ctx.seed, k)
        values = [int(v) for v in rng.integers(0, 3, size=3)]
        weights = [int(w) for w in rng.integers(1, 4, size=3)]
        x = from_atoms([((v,), Fraction(w, sum(weights[:2]))) for v, w in zip((0, 1), weights[:2])])
        y = from_atoms([((v,), Fraction(w, sum(weights))) for v, w in enumerate(weights)])
        i, j = sorted(int(c) for c in rng.choice(3, size=2, replace=False))
        laws = [
            build_random_permutation(values, ctx.budgets),
            build_multinomial_round(3, 2, [Fraction(w, sum(weights)) for w in weights]),
            embed(countermonotone_coupling(x, y), 3, (i, j)),
        ]
        for name, law in zip(("permutation", "multinomial", "countermonotone pair"), laws):
            ctx.check(f"instance {k}: NA of {name}", check_na(law, budgets=ctx.budgets), law, "holds")
        total = convolve(laws, ctx.budgets.atoms)
        ctx.check(f"instance {k}: NA of the sum", check_na(total, budgets=ctx.budgets), total, "holds")


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

_GENERAL_PAIRS = [
    (0, 1, 2, {0: Fraction(1, 4), 1: Fraction(1, 4), 2: Fraction(1, 2)}),
    (0, 2, 1, {0: Fraction(1, 3), 1: Fraction(2, 3)}),
    (1, 2, 3, {0: Fraction(1, 8), 1: Fraction(3, 8), 2: Fraction(3, 8), 3: Fraction(1, 8)}),
]

SCENARIOS: Dict[str, Scenario] = {s.id: s for s in [
    Scenario("huber-limit",
             "simple round robin: the strongest player has the top score with probability tending to 1",
             _huber_limit, {"p": Fraction(3, 4), "sizes": (4, 8, 16, 32, 64),
                            "agreement_se": 3, "gap_se": 5}),
    Scenario("rr-general-na",
             "constant-sum round robin scores, and increasing utilities of them, are NA",
             _rr_general, {
                 "pairs": _GENERAL_PAIRS,
                 "utilities": ({0: 0, 1: 1, 2: 1, 3: 5}, None, {v: v * v for v in range(5)}),
                 "no_contest_pairs": [(0, 1, 1, {0: Fraction(1, 2), 1: Fraction(1, 2)}),
                                      (0, 2, 0, {0: 1}),
                                      (1, 2, 1, {0: Fraction(1, 3), 1: Fraction(2, 3)})],
             }),
    Scenario("rr-binomial-na",
             "binomial repeated games X_ij ~ Binomial(r_ij, p_ij) give NA scores",
             _rr_binomial, {
                 "r": [[0, 1, 2], [1, 0, 3], [2, 3, 0]],
                 "p": {(0, 1): Fraction(1, 3), (0, 2): Fraction(3, 4), (1, 2): Fraction(2, 5)},
             }),
    Scenario("rr-chess-na",
             "chess round robin with draws (scores in {0, 1/2, 1}) is NA for every p",
             _rr_chess, {
                 "p_win": {(0, 1): Fraction(1, 2), (0, 2): Fraction(1, 5), (1, 2): Fraction(0)},
                 "p_draw": {(0, 1): Fraction(1, 4), (0, 2): Fraction(3, 5), (1, 2): Fraction(1)},
                 "orthant_points": 10,
             }),
    Scenario("random-sum-football",
             "football league points (3/1/0 per match) as a random sum of NA rounds are NA",
             _random_sum_football, {
                 "match_probs": (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),
                 "pairs": _GENERAL_PAIRS,
             }),
    Scenario("knockout-random-na",
             "random-draw knockout with equal strengths: S is a uniform arrangement of fixed win counts, NA",
             _knockout_random, {"scores_8": (0, 0, 0, 0, 1, 1, 2, 3), "orthant_points": 10}),
    Scenario("knockout-fixed-nod",
             "fixed-draw knockout with equal strengths: only 8 arrangements of (0,0,1,2); the law is NOD",
             _knockout_fixed, {"bracket_4": (0, 1, 2, 3), "bracket_8": tuple(range(8)),
                               "orthant_points": 10}),
    Scenario("counterexample-3-1",
             "cyclic strengths under a random draw: E f1(S_0) f2(S_2) = 2/3 > 1/3, NLOD fails 1/3 > 2/3 * 1/3",
             _counterexample_cyclic, {"thresholds": (0, 2, 0, 2), "epsilon": Fraction(1, 100)}),
    Scenario("counterexample-3-2",
             "fixed draw (0 v 1, 2 v 3): E[f1(S_0,S_2) f2(S_1,S_3)] = 1/8, E f1 = 2/8, E f2 = 1/8",
             _counterexample_fixed, {"bracket": (0, 1, 2, 3), "a1": (0, 2), "a2": (1, 3),
                                     "f1_ones": [(0, 1), (0, 2)], "f2_ones": [(2, 0)]}),
    Scenario("staged-preservation",
             "staged sums with conditionally NLOD/NUOD stages depending on own coordinates stay NLOD/NUOD",
             _staged_preservation, {"levels": (1, 2, 3), "random_models": 5,
                                    "random_shape": {"n": 3, "stages": 3, "values": 2},
                                    "match_probs": (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))}),
    Scenario("convolution-na",
             "the sum of independent NA vectors is NA",
             _convolution_na, {"instances": 4}),
]}


def run_scenario(scenario_id: str, seed: int = MC_DEFAULT_SEED, reps: int = MC_DEFAULT_REPS,
                 budgets: Budgets = DEFAULT_BUDGETS) -> Dict[str, Any]:
    """Run one catalog entry; returns its report (results, verdict, timings)."""
    from src.report_generator import build_report

    if scenario_id not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {scenario_id!r}; choose from {sorted(SCENARIOS)}")
    scenario = SCENARIOS[scenario_id]
    ctx = ScenarioContext(seed=seed, reps=reps, budgets=budgets)
    logger.info(f"scenario {scenario_id}: {scenario.anchor}")
    started = time.perf_counter()
    scenario.runner(ctx, scenario.params)
    elapsed = time.perf_counter() - started
    logger.info(f"scenario {scenario_id}: {'pass' if ctx.passed else 'fail'} in {elapsed:.2f}s")
    return build_report(
        command={"scenario": scenario_id, "anchor": scenario.anchor},
        inputs={"parameters": scenario.params, "seed": seed, "reps": reps, "budgets": budgets.to_dict()},
        checks=ctx.checks,
        exact=ctx.exact,
        estimates=ctx.estimates,
        claims=ctx.claims,
        verdict="pass" if ctx.passed else "fail",
        timings={"total_seconds": round(elapsed, 3)},
    )


__all__ = ["Claim", "ScenarioContext", "Scenario", "SCENARIOS", "run_scenario"]

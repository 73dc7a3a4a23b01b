"""
Staged Models - 分阶段依赖模型
通过以前缀和为键的条件核组合各阶段向量；机器校验两个假设并精确计算阶段和的分布。

Assumption (i): stage 1 and every conditional stage law are NLOD (or NUOD).
Assumption (ii): the conditional marginal of coordinate i at stage k depends on
the prefix sum only through its i-th coordinate.

Stages are numbered from 1; stage 1 is the unconditional initial law.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Set, Tuple

import numpy as np

from src.config import DEFAULT_BUDGETS, Budgets
from src.depcheck import CheckResult, Property, Verdict, check_nlod, check_nuod
from src.errors import AtomBudgetExceeded, ConfigError, DimensionMismatch, TableIncomplete
from src.exactdist import (
    JointDist,
    Orthant,
    Outcome,
    countermonotone_coupling,
    from_atoms,
    marginal,
    mixture,
    product_all,
    to_outcome,
)
from src.models import KnockoutSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageKernel:
    """Conditional law of X^(stage) given X^(1) + ... + X^(stage-1)."""
    stage: int
    conditions: Mapping[Outcome, JointDist]

    def law_for(self, prefix: Outcome) -> JointDist:
        if prefix not in self.conditions:
            raise TableIncomplete(f"stage {self.stage}: no conditional law for prefix {prefix}")
        return self.conditions[prefix]


@dataclass(frozen=True)
class StagedModel:
    n: int
    initial: JointDist
    kernels: Tuple[StageKernel, ...] = ()

    def __post_init__(self):
        if self.initial.n != self.n:
            raise DimensionMismatch(f"stage 1 law has dimension {self.initial.n}, expected {self.n}")
        for offset, kernel in enumerate(self.kernels):
            if kernel.stage != offset + 2:
                raise ConfigError(f"kernel #{offset} is numbered stage {kernel.stage}, expected {offset + 2}")
            for prefix, law in kernel.conditions.items():
                if len(prefix) != self.n or law.n != self.n:
                    raise DimensionMismatch(f"stage {kernel.stage}, prefix {prefix}: dimension mismatch")
        object.__setattr__(self, "kernels", tuple(self.kernels))

    @property
    def stages(self) -> int:
        return 1 + len(self.kernels)

    def reachable_prefixes(self, budgets: Budgets = DEFAULT_BUDGETS) -> List[List[Outcome]]:
        """Sorted reachable prefix sums feeding each kernel; raises if a kernel misses one."""
        out = []
        current: Set[Outcome] = set(self.initial.outcomes)
        for kernel in self.kernels:
            prefixes = sorted(current)
            out.append(prefixes)
            nxt: Set[Outcome] = set()
            for prefix in prefixes:
                for x in kernel.law_for(prefix).outcomes:
                    nxt.add(tuple(a + b for a, b in zip(prefix, x)))
                if len(nxt) > budgets.atoms:
                    raise AtomBudgetExceeded(budgets.atoms, len(nxt), f"stage {kernel.stage} prefixes")
            current = nxt
        return out


# ---------------------------------------------------------------------------
# Assumption checks
# ---------------------------------------------------------------------------

def verify_assumption_i(m: StagedModel, mode: Orthant = Orthant.LOWER,
                        budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """Orthant check of the stage-1 law and of every reachable conditional law."""
    mode = Orthant(mode)
    check = check_nlod if mode is Orthant.LOWER else check_nuod
    prop = Property.NLOD if mode is Orthant.LOWER else Property.NUOD
    checked = 0
    result = check(m.initial, budgets)
    checked += 1
    if not result.holds:
        return CheckResult(prop, Verdict.VIOLATED, result.witness, {"laws": checked},
                           {"stage": 1, "prefix": None})
    for kernel, prefixes in zip(m.kernels, m.reachable_prefixes(budgets)):
        for prefix in prefixes:
            result = check(kernel.law_for(prefix), budgets)
            checked += 1
            if not result.holds:
                logger.info(f"assumption (i) fails at stage {kernel.stage}, prefix {prefix}")
                return CheckResult(prop, Verdict.VIOLATED, result.witness, {"laws": checked},
                                   {"stage": kernel.stage, "prefix": prefix})
    return CheckResult(prop, Verdict.HOLDS, None, {"laws": checked})


@dataclass(frozen=True)
class LocalityWitness:
    """Two prefixes agreeing on `coordinate` whose conditional marginals differ."""
    stage: int
    coordinate: int
    prefix_a: Outcome
    prefix_b: Outcome
    law_a: JointDist
    law_b: JointDist

    def to_dict(self) -> Dict[str, Any]:
        from src.utils.serialization import dist_to_dict
        return {
            "type": "coordinate_locality",
            "stage": self.stage,
            "coordinate": self.coordinate,
            "prefix_a": list(self.prefix_a),
            "prefix_b": list(self.prefix_b),
            "law_a": dist_to_dict(self.law_a),
            "law_b": dist_to_dict(self.law_b),
        }


def verify_assumption_ii(m: StagedModel, budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """Exact equality of conditional marginals across prefixes sharing coordinate i."""
    comparisons = 0
    for kernel, prefixes in zip(m.kernels, m.reachable_prefixes(budgets)):
        for i in range(m.n):
            reference: Dict[Fraction, Tuple[Outcome, JointDist]] = {}
            for prefix in prefixes:
                law = marginal(kernel.law_for(prefix), [i])
                if prefix[i] not in reference:
                    reference[prefix[i]] = (prefix, law)
                    continue
                comparisons += 1
                first, first_law = reference[prefix[i]]
                if law != first_law:
                    witness = LocalityWitness(kernel.stage, i, first, prefix, first_law, law)
                    logger.info(f"assumption (ii) fails at stage {kernel.stage}, coordinate {i}")
                    return CheckResult(Property.COORDINATE_LOCALITY, Verdict.VIOLATED, witness,
                                       {"comparisons": comparisons})
    return CheckResult(Property.COORDINATE_LOCALITY, Verdict.HOLDS, None, {"comparisons": comparisons})


# ---------------------------------------------------------------------------
# Staged sum
# ---------------------------------------------------------------------------

def sum_staged(m: StagedModel, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Exact law of X^(1) + ... + X^(K) by forward enumeration over prefix sums."""
    state: Dict[Outcome, Fraction] = m.initial.as_dict()
    for kernel in m.kernels:
        nxt: Dict[Outcome, Fraction] = {}
        for prefix, p in sorted(state.items()):
            for x, q in kernel.law_for(prefix).atoms:
                key = tuple(a + b for a, b in zip(prefix, x))
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
            if len(nxt) > budgets.atoms:
                raise AtomBudgetExceeded(budgets.atoms, len(nxt), f"staged sum at stage {kernel.stage}")
        state = nxt
    logger.debug(f"sum_staged: {m.stages} stages -> {len(state)} atoms")
    return from_atoms(state.items(), m.n)


def _round_law(spec: KnockoutSpec, round_no: int, prefix: Outcome) -> JointDist:
    """0-1 win indicators of round `round_no` given the win counts so far."""
    n = spec.n
    block = 2 ** round_no
    half = block // 2
    state: Dict[Outcome, Fraction] = {(Fraction(0),) * n: Fraction(1)}
    for start in range(0, n, block):
        leaves = spec.bracket[start:start + block]
        left = [p for p in leaves[:half] if prefix[p] == round_no - 1]
        right = [p for p in leaves[half:] if prefix[p] == round_no - 1]
        if len(left) != 1 or len(right) != 1:
            raise ConfigError(f"prefix {prefix} is not a reachable state before round {round_no}")
        a, b = left[0], right[0]
        nxt: Dict[Outcome, Fraction] = {}
        for row, p in state.items():
            for winner, q in ((a, spec.win_matrix[a][b]), (b, spec.win_matrix[b][a])):
                if q == 0:
                    continue
                new = list(row)
                new[winner] = Fraction(1)
                nxt[tuple(new)] = nxt.get(tuple(new), Fraction(0)) + p * q
        state = nxt
    return from_atoms(state.items(), n)


def knockout_as_staged(spec: KnockoutSpec) -> StagedModel:
    """Fixed-draw knockout as one 0-1 win vector per round; a player who lost adds 0 afterwards."""
    if spec.is_random_draw:
        raise ConfigError("knockout_as_staged needs a fixed bracket")
    zero = (Fraction(0),) * spec.n
    initial = _round_law(spec, 1, zero)
    kernels = []
    current = set(initial.outcomes)
    for round_no in range(2, spec.level + 1):
        conditions = {prefix: _round_law(spec, round_no, prefix) for prefix in sorted(current)}
        kernels.append(StageKernel(round_no, conditions))
        current = {tuple(a + b for a, b in zip(prefix, x))
                   for prefix, law in conditions.items() for x in law.outcomes}
    return StagedModel(spec.n, initial, tuple(kernels))


# ---------------------------------------------------------------------------
# Random staged models
# ---------------------------------------------------------------------------

def random_staged_model(rng: np.random.Generator, n: int = 2, stages: int = 2,
                        values: int = 2, max_weight: int = 4) -> StagedModel:
    """Random model satisfying assumptions (i) and (ii) in both orthant modes.

    The marginal of coordinate i at each stage is drawn once per value of the
    i-th prefix coordinate. The conditional law mixes the independent product of
    those marginals with the countermonotone coupling of coordinates 0 and 1
    (times the rest); both share the marginals and have orthant probabilities
    at most the product ones. Replaying the same rng state rebuilds the model.
    """
    marginals: Dict[Tuple[int, int, Fraction], JointDist] = {}

    def coordinate_law(stage: int, i: int, level: Fraction) -> JointDist:
        key = (stage, i, level)
        if key not in marginals:
            weights = [int(w) for w in rng.integers(1, max_weight + 1, size=values)]
            total = sum(weights)
            marginals[key] = from_atoms([((v,), Fraction(w, total)) for v, w in enumerate(weights)])
        return marginals[key]

    def stage_law(stage: int, prefix: Outcome) -> JointDist:
        laws = [coordinate_law(stage, i, prefix[i]) for i in range(n)]
        independent = product_all(laws)
        if n < 2:
            return independent
        lam = Fraction(int(rng.integers(0, 4)), 3)
        if lam == 1:
            return independent
        coupled = product_all([countermonotone_coupling(laws[0], laws[1])] + laws[2:])
        if lam == 0:
            return coupled
        return mixture([(lam, independent), (1 - lam, coupled)])

    zero = (Fraction(0),) * n
    initial = stage_law(1, zero)
    kernels = []
    current = set(initial.outcomes)
    for stage in range(2, stages + 1):
        conditions = {prefix: stage_law(stage, prefix) for prefix in sorted(current)}
        kernels.append(StageKernel(stage, conditions))
        current = {tuple(a + b for a, b in zip(prefix, x))
                   for prefix, law in conditions.items() for x in law.outcomes}
    return StagedModel(n, initial, tuple(kernels))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def staged_to_dict(m: StagedModel) -> Dict[str, Any]:
    from src.utils.serialization import dist_to_dict, format_rational
    zero = [format_rational(0)] * m.n
    stages = [{"conditions": [{"prefix": zero, "law": dist_to_dict(m.initial)}]}]
    for kernel in m.kernels:
        stages.append({"conditions": [
            {"prefix": [format_rational(v) for v in prefix], "law": dist_to_dict(law)}
            for prefix, law in sorted(kernel.conditions.items())
        ]})
    return {"n": m.n, "stages": stages}


def staged_from_dict(obj: Mapping) -> StagedModel:
    from src.utils.serialization import dist_from_dict
    try:
        n = int(obj["n"])
        stages = obj["stages"]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"staged model: expected 'n' and 'stages' ({e})") from e
    if not stages:
        raise ConfigError("staged model: 'stages' is empty")
    first = stages[0].get("conditions") or []
    if len(first) != 1:
        raise ConfigError("staged model: stage 1 must hold exactly one unconditional law")
    initial = dist_from_dict(first[0]["law"], "stages[0].law")
    kernels = []
    for k, stage in enumerate(stages[1:], start=1):
        conditions = {}
        for c, cond in enumerate(stage.get("conditions") or []):
            field_name = f"stages[{k}].conditions[{c}]"
            prefix = to_outcome(cond["prefix"], f"{field_name}.prefix")
            if prefix in conditions:
                raise ConfigError(f"{field_name}: duplicate prefix {list(prefix)}")
            conditions[prefix] = dist_from_dict(cond["law"], f"{field_name}.law")
        kernels.append(StageKernel(k + 1, conditions))
    return StagedModel(n, initial, tuple(kernels))


__all__ = [
    "StageKernel", "StagedModel", "LocalityWitness",
    "verify_assumption_i", "verify_assumption_ii", "sum_staged",
    "knockout_as_staged", "random_staged_model", "staged_to_dict", "staged_from_dict",
]

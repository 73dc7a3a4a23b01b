"""
Dependence Checks - 负相依性质判定
NLOD / NUOD / NOD（象限不等式）与 NA（递增函数对协方差）的穷举判定，失败时给出精确见证。

Exactness: probabilities are scaled by their common denominator L so every
comparison is between Python (or int64, when provably safe) integers.

Orthant checks enumerate thresholds on the per-coordinate support grid only;
both sides of the orthant inequality are step functions that change only at
support values. Upper orthants add one threshold below each coordinate minimum.

The NA search works on the marginal of each coordinate subset T and each
two-block partition (A1, A2) of T, and tests Cov(1_U, 1_V) <= 0 for all
nontrivial upper sets U, V of the attained projections. Increasing functions on
a finite poset are nonnegative combinations of upper-set indicators plus a
constant, so bilinearity of covariance reduces every increasing pair to these.

Canonical search order: subset size, then subsets lexicographically, then
partitions (A1 holds the smallest coordinate of T; by |A1|, then
lexicographically), then sign profiles, then upper sets in enumeration order
(U-major). The first violation in this order is the reported witness.
"""

import concurrent.futures
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from itertools import combinations, product as _cartesian
from math import prod
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.config import COVARIANCE_BLOCK_CELLS, DEFAULT_BUDGETS, Budgets
from src.errors import (
    DimensionMismatch,
    EmptySubset,
    IndexOutOfRange,
    OverlappingSubsets,
    SearchBudgetExceeded,
    TableIncomplete,
)
from src.exactdist import JointDist, Orthant, Outcome, marginal, to_outcome, to_rational
from src.upper_sets import UpperSet, masks_to_matrix, minimal_indices, oriented, upper_set_masks

logger = logging.getLogger(__name__)

# int64 is exact for |values| <= L^2 when L stays below this bound
_INT64_SAFE_DENOMINATOR = 1 << 30


class Property(str, Enum):
    NLOD = "NLOD"
    NUOD = "NUOD"
    NOD = "NOD"
    NA = "NA"
    SIGNED_MONOTONE = "SIGNED_MONOTONE"
    COORDINATE_LOCALITY = "COORDINATE_LOCALITY"


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"


@dataclass(frozen=True)
class OrthantWitness:
    """Thresholds where P(orthant) exceeds the product of marginal orthant probabilities."""
    thresholds: Outcome
    mode: Orthant
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class MonotonePairWitness:
    """Two (signed) upper-set indicators on disjoint blocks with positive covariance."""
    a1: Tuple[int, ...]
    a2: Tuple[int, ...]
    u1: UpperSet
    u2: UpperSet
    covariance: Fraction

    @property
    def sign_profile_1(self) -> Tuple[int, ...]:
        return self.u1.signs

    @property
    def sign_profile_2(self) -> Tuple[int, ...]:
        return self.u2.signs


@dataclass
class CheckResult:
    property: Property
    verdict: Verdict
    witness: Optional[object] = None
    work_counters: Dict[str, int] = field(default_factory=dict)
    context: Dict[str, object] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS


def _merge_counters(*counters: Mapping[str, int]) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for c in counters:
        for k, v in c.items():
            out[k] = out.get(k, 0) + v
    return out


# ---------------------------------------------------------------------------
# Orthant dependence
# ---------------------------------------------------------------------------

def _threshold_grid(d: JointDist, mode: Orthant) -> List[Tuple[Fraction, ...]]:
    if mode is Orthant.LOWER:
        return [tuple(col) for col in d.support_grid]
    return [(col[0] - 1,) + tuple(col) for col in d.support_grid]


def _orthant_search(d: JointDist, mode: Orthant, budgets: Budgets) -> CheckResult:
    mode = Orthant(mode)
    prop = Property.NLOD if mode is Orthant.LOWER else Property.NUOD
    grid = _threshold_grid(d, mode)
    size = prod(len(g) for g in grid)
    if size > budgets.threshold_grid:
        raise SearchBudgetExceeded(budgets.threshold_grid, size, f"{prop.value} threshold grid",
                                   budget_name="threshold-grid budget")
    counters = {"thresholds": size, "atoms": len(d)}
    n = d.n
    L, weights = d.integer_weights()
    ranks = [{v: k for k, v in enumerate(col)} for col in d.support_grid]
    shape = tuple(len(col) for col in d.support_grid)

    dense = np.zeros(shape, dtype=object)
    marginals = [[0] * m for m in shape]
    for (outcome, w) in zip(d.outcomes, weights):
        idx = tuple(ranks[i][v] for i, v in enumerate(outcome))
        dense[idx] += w
        for i, k in enumerate(idx):
            marginals[i][k] += w

    if mode is Orthant.LOWER:
        table = dense
        for ax in range(n):
            table = np.cumsum(table, axis=ax)
        cumulative = [np.cumsum(np.array(m, dtype=object)) for m in marginals]
    else:
        tail = dense
        for ax in range(n):
            tail = np.flip(np.cumsum(np.flip(tail, axis=ax), axis=ax), axis=ax)
        table = np.zeros(tuple(m + 1 for m in shape), dtype=object)
        table[tuple(slice(0, m) for m in shape)] = tail
        cumulative = []
        for m in marginals:
            surv = np.zeros(len(m) + 1, dtype=object)
            surv[:-1] = np.flip(np.cumsum(np.flip(np.array(m, dtype=object))))
            cumulative.append(surv)

    rhs = reduce(np.multiply.outer, cumulative) if n > 1 else cumulative[0]
    lhs = table * (L ** (n - 1))
    violated = np.asarray(lhs > rhs, dtype=bool)
    if not violated.any():
        logger.debug(f"{prop.value}: holds over {size} thresholds")
        return CheckResult(prop, Verdict.HOLDS, None, counters)

    idx = tuple(int(k) for k in np.argwhere(violated)[0])
    witness = OrthantWitness(
        thresholds=tuple(grid[i][k] for i, k in enumerate(idx)),
        mode=mode,
        lhs=Fraction(int(table[idx]), L),
        rhs=Fraction(int(rhs[idx]), L ** n),
    )
    logger.info(f"{prop.value} violated at {witness.thresholds}: {witness.lhs} > {witness.rhs}")
    return CheckResult(prop, Verdict.VIOLATED, witness, counters)


def check_nlod(d: JointDist, budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """Negative lower orthant dependence over every real threshold vector."""
    return _orthant_search(d, Orthant.LOWER, budgets)


def check_nuod(d: JointDist, budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """Negative upper orthant dependence over every real threshold vector."""
    return _orthant_search(d, Orthant.UPPER, budgets)


def check_nod(d: JointDist, budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """NLOD and NUOD; lower orthants are checked first and supply the witness."""
    lower = check_nlod(d, budgets)
    if not lower.holds:
        return CheckResult(Property.NOD, Verdict.VIOLATED, lower.witness, lower.work_counters,
                           {"failed": Property.NLOD.value})
    upper = check_nuod(d, budgets)
    counters = _merge_counters(lower.work_counters, upper.work_counters)
    if not upper.holds:
        return CheckResult(Property.NOD, Verdict.VIOLATED, upper.witness, counters,
                           {"failed": Property.NUOD.value})
    return CheckResult(Property.NOD, Verdict.HOLDS, None, counters)


# ---------------------------------------------------------------------------
# Covariance of function tables
# ---------------------------------------------------------------------------

def _validate_blocks(n: int, a1: Sequence[int], a2: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    a1, a2 = tuple(a1), tuple(a2)
    if not a1 or not a2:
        raise EmptySubset("both coordinate blocks must be nonempty")
    for c in a1 + a2:
        if not 0 <= c < n:
            raise IndexOutOfRange(f"coordinate {c} outside 0..{n - 1}")
    if set(a1) & set(a2) or len(set(a1)) != len(a1) or len(set(a2)) != len(a2):
        raise OverlappingSubsets(f"blocks {a1} and {a2} are not disjoint")
    return a1, a2


def _normalize_fn_table(table: Mapping) -> Dict[Outcome, Fraction]:
    out = {}
    for key, value in table.items():
        key = key if isinstance(key, tuple) else (key,)
        out[to_outcome(key, "table key")] = to_rational(value, "table value")
    return out


def covariance_of(d: JointDist, f1: Mapping, a1: Sequence[int], f2: Mapping, a2: Sequence[int]) -> Fraction:
    """Exact Cov(f1(S_A1), f2(S_A2)); tables are keyed by value tuples in block order."""
    a1, a2 = _validate_blocks(d.n, a1, a2)
    t1, t2 = _normalize_fn_table(f1), _normalize_fn_table(f2)
    e1 = e2 = e12 = Fraction(0)
    for outcome, p in d.atoms:
        k1 = tuple(outcome[c] for c in a1)
        k2 = tuple(outcome[c] for c in a2)
        if k1 not in t1:
            raise TableIncomplete(f"f1 has no entry for {k1}")
        if k2 not in t2:
            raise TableIncomplete(f"f2 has no entry for {k2}")
        v1, v2 = t1[k1], t2[k2]
        e1 += p * v1
        e2 += p * v2
        e12 += p * v1 * v2
    return e12 - e1 * e2


def indicator_table(upper: UpperSet, d: JointDist) -> Dict[Outcome, Fraction]:
    """Explicit 0/1 table of a (signed) upper set over the attained projection of d."""
    points = {tuple(o[c] for c in upper.coords) for o in d.outcomes}
    return {p: Fraction(1 if upper.contains(p) else 0) for p in sorted(points)}


# ---------------------------------------------------------------------------
# Monotone pair search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Task:
    order: int
    subset: Tuple[int, ...]
    a1: Tuple[int, ...]       # positions within subset
    a2: Tuple[int, ...]
    signs1: Tuple[int, ...]
    signs2: Tuple[int, ...]


def _partitions(size: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    rest = tuple(range(1, size))
    for k in range(0, size - 1):
        for extra in combinations(rest, k):
            a1 = (0,) + extra
            yield a1, tuple(p for p in range(size) if p not in a1)


def _sign_profiles(width: int, signed: bool, pin_first: bool) -> List[Tuple[int, ...]]:
    if not signed:
        return [(1,) * width]
    if pin_first:
        return [(1,) + tail for tail in _cartesian((1, -1), repeat=width - 1)]
    return list(_cartesian((1, -1), repeat=width))


def _tasks(n: int, max_size: int, signed: bool) -> Iterator[_Task]:
    order = 0
    for size in range(2, max_size + 1):
        for subset in combinations(range(n), size):
            for a1, a2 in _partitions(size):
                for s1 in _sign_profiles(len(a1), signed, pin_first=True):
                    for s2 in _sign_profiles(len(a2), signed, pin_first=False):
                        yield _Task(order, subset, a1, a2, s1, s2)
                        order += 1


class _Block:
    """Attained projection of one block, oriented by a sign profile, with its upper-set basis."""

    def __init__(self, projections: Sequence[Outcome], signs: Tuple[int, ...], budget: int):
        self.signs = signs
        self.points = sorted(set(oriented(projections, signs)))
        self.index = {p: k for k, p in enumerate(self.points)}
        full = (1 << len(self.points)) - 1
        self.masks = [m for m in upper_set_masks(self.points, budget) if m not in (0, full)]

    def key(self, projection: Outcome) -> int:
        return self.index[tuple(s * x for s, x in zip(self.signs, projection))]

    def upper_set(self, mask: int, coords: Tuple[int, ...]) -> UpperSet:
        lows = tuple(tuple(s * x for s, x in zip(self.signs, self.points[i]))
                     for i in minimal_indices(self.points, mask))
        return UpperSet(coords, lows, self.signs)


def _search_partition(dT: JointDist, task: _Task, budgets: Budgets):
    """Return (witness or None, counters) for one partition and sign profile."""
    L, weights = dT.integer_weights()
    proj1 = [tuple(o[p] for p in task.a1) for o in dT.outcomes]
    proj2 = [tuple(o[p] for p in task.a2) for o in dT.outcomes]
    b1 = _Block(proj1, task.signs1, budgets.upper_sets)
    b2 = _Block(proj2, task.signs2, budgets.upper_sets)
    k1, k2 = len(b1.masks), len(b2.masks)
    counters = {"partitions": 1, "upper_sets": k1 + k2, "pairs": 0}
    if k1 * k2 > budgets.upper_set_pairs:
        raise SearchBudgetExceeded(budgets.upper_set_pairs, k1 * k2,
                                   f"subset {task.subset} partition {task.a1}|{task.a2}",
                                   budget_name="upper-set pair budget")
    if k1 == 0 or k2 == 0:
        return None, counters

    dtype = np.int64 if L < _INT64_SAFE_DENOMINATOR else object
    M = np.zeros((len(b1.points), len(b2.points)), dtype=dtype)
    for x, y, w in zip(proj1, proj2, weights):
        M[b1.key(x), b2.key(y)] += w
    U = masks_to_matrix(b1.masks, len(b1.points)).astype(dtype)
    V = masks_to_matrix(b2.masks, len(b2.points)).astype(dtype)
    pu = np.dot(U, M.sum(axis=1))
    qv = np.dot(V, M.sum(axis=0))
    UM = np.dot(U, M)
    Vt = V.T
    rows = max(1, COVARIANCE_BLOCK_CELLS // k2)
    for r0 in range(0, k1, rows):
        r1 = min(k1, r0 + rows)
        scaled = L * np.dot(UM[r0:r1], Vt) - np.outer(pu[r0:r1], qv)
        counters["pairs"] += (r1 - r0) * k2
        positive = np.asarray(scaled > 0, dtype=bool)
        if positive.any():
            i, j = (int(v) for v in np.argwhere(positive)[0])
            coords1 = tuple(task.subset[p] for p in task.a1)
            coords2 = tuple(task.subset[p] for p in task.a2)
            witness = MonotonePairWitness(
                a1=coords1,
                a2=coords2,
                u1=b1.upper_set(b1.masks[r0 + i], coords1),
                u2=b2.upper_set(b2.masks[j], coords2),
                covariance=Fraction(int(scaled[i, j]), L * L),
            )
            return witness, counters
    return None, counters


def _monotone_search(d: JointDist, prop: Property, signed: bool, max_subset_size: Optional[int],
                     budgets: Budgets) -> CheckResult:
    if d.n < 2:
        raise DimensionMismatch(f"{prop.value} needs at least two coordinates, got {d.n}")
    bound = budgets.max_subset_size if max_subset_size is None else max_subset_size
    # constant coordinates are independent of everything and never change a covariance
    active = tuple(i for i, col in enumerate(d.support_grid) if len(col) > 1)
    counters: Dict[str, int] = {"subsets": 0, "constant_coordinates": d.n - len(active)}
    if len(active) < 2:
        return CheckResult(prop, Verdict.HOLDS, None, counters)
    max_size = min(len(active), bound)
    marginals: Dict[Tuple[int, ...], JointDist] = {}

    def run(task: _Task):
        return _search_partition(marginals[task.subset], task, budgets)

    def batches() -> Iterator[List[_Task]]:
        batch: List[_Task] = []
        for task in _tasks(len(active), max_size, signed):
            task = _Task(task.order, tuple(active[p] for p in task.subset),
                         task.a1, task.a2, task.signs1, task.signs2)
            if task.subset not in marginals:
                marginals[task.subset] = marginal(d, task.subset)
                counters["subsets"] += 1
            batch.append(task)
            if len(batch) >= max(1, budgets.workers) * 8:
                yield batch
                batch = []
        if batch:
            yield batch

    workers = max(1, budgets.workers)
    executor = concurrent.futures.ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for batch in batches():
            if executor is None:
                outcomes = [run(t) for t in batch]
            else:
                outcomes = list(executor.map(run, batch))
            for task, (witness, task_counters) in zip(batch, outcomes):
                counters = _merge_counters(counters, task_counters)
                if witness is not None:
                    logger.info(f"{prop.value} violated on {witness.a1}|{witness.a2}: cov {witness.covariance}")
                    return CheckResult(prop, Verdict.VIOLATED, witness, counters)
            for subset in [s for s in marginals if s != batch[-1].subset]:
                del marginals[subset]
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    if max_size < len(active):
        raise SearchBudgetExceeded(bound, len(active),
                                   f"{prop.value} searched subsets up to size {bound} without a violation",
                                   budget_name="max subset size")
    logger.debug(f"{prop.value}: holds ({counters})")
    return CheckResult(prop, Verdict.HOLDS, None, counters)


def check_na(d: JointDist, max_subset_size: Optional[int] = None,
             budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """Negative association: every increasing pair on disjoint blocks has covariance <= 0."""
    return _monotone_search(d, Property.NA, False, max_subset_size, budgets)


def check_signed_monotone(d: JointDist, max_subset_size: Optional[int] = None,
                          budgets: Budgets = DEFAULT_BUDGETS) -> CheckResult:
    """As check_na, with each coordinate of each block oriented up or down independently.

    The first coordinate of A1 is pinned to increasing: reversing every sign
    replaces both upper sets by their complements, which leaves the covariance
    unchanged.
    """
    return _monotone_search(d, Property.SIGNED_MONOTONE, True, max_subset_size, budgets)


CHECKS = {
    "nlod": lambda d, b: check_nlod(d, b),
    "nuod": lambda d, b: check_nuod(d, b),
    "nod": lambda d, b: check_nod(d, b),
    "na": lambda d, b: check_na(d, None, b),
    "signed": lambda d, b: check_signed_monotone(d, None, b),
}


def check_all(d: JointDist, names: Sequence[str], budgets: Budgets = DEFAULT_BUDGETS) -> List[CheckResult]:
    """Run the named checks in the given order."""
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; choose from {sorted(CHECKS)}")
    return [CHECKS[name](d, budgets) for name in names]


__all__ = [
    "Property", "Verdict", "OrthantWitness", "MonotonePairWitness", "CheckResult",
    "check_nlod", "check_nuod", "check_nod", "check_na", "check_signed_monotone",
    "covariance_of", "indicator_table", "check_all", "CHECKS",
]

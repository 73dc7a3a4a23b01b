"""
Exact Dist - 精确联合分布引擎
有限联合分布的构造、独立积、卷积、单调坐标映射、边缘化、条件化与象限概率查询。

All probabilities and values are fractions.Fraction; no float ever enters this
module. A JointDist is immutable: atoms are merged, strictly positive, sorted
lexicographically by outcome, and sum to exactly one.
"""

import logging
import numbers
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.config import ATOM_BUDGET
from src.errors import (
    AtomBudgetExceeded,
    DimensionMismatch,
    EmptyDistribution,
    EmptySubset,
    IndexOutOfRange,
    InvalidRational,
    NotMonotone,
    OverlappingSubsets,
    ProbabilitiesDoNotSumToOne,
    TableIncomplete,
    ZeroOrNegativeProbability,
    ZeroProbabilityEvent,
)

logger = logging.getLogger(__name__)

Rational = Fraction
Outcome = Tuple[Fraction, ...]
ValueTable = Mapping[Fraction, Fraction]


class Orthant(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


def to_rational(value, field: str = None) -> Fraction:
    """Read an exact rational from int, Fraction, or a "num/den" string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidRational(f"{value!r} is not an exact rational", field)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidRational(f"cannot parse {value!r} ({e})", field) from e
    raise InvalidRational(f"unsupported type {type(value).__name__}", field)


def to_outcome(values: Iterable, field: str = None) -> Outcome:
    return tuple(to_rational(v, field) for v in values)


@dataclass(frozen=True)
class JointDist:
    """Finite joint law of an n-dimensional score vector."""
    n: int
    atoms: Tuple[Tuple[Outcome, Fraction], ...]
    support_grid: Tuple[Tuple[Fraction, ...], ...]

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def outcomes(self) -> Tuple[Outcome, ...]:
        return tuple(o for o, _ in self.atoms)

    @property
    def probs(self) -> Tuple[Fraction, ...]:
        return tuple(p for _, p in self.atoms)

    def as_dict(self) -> Dict[Outcome, Fraction]:
        return dict(self.atoms)

    def prob_of(self, outcome: Sequence) -> Fraction:
        return self.as_dict().get(to_outcome(outcome), Fraction(0))

    def integer_weights(self) -> Tuple[int, Tuple[int, ...]]:
        """Common probability denominator L and the integer weights p*L."""
        denom = lcm(*(p.denominator for _, p in self.atoms))
        return denom, tuple(p.numerator * (denom // p.denominator) for _, p in self.atoms)


def _make(n: int, mapping: Mapping[Outcome, Fraction]) -> JointDist:
    """Canonicalize an already-merged, already-normalized mapping."""
    atoms = tuple(sorted(mapping.items()))
    grid = tuple(tuple(sorted({o[i] for o, _ in atoms})) for i in range(n))
    return JointDist(n=n, atoms=atoms, support_grid=grid)


def _check_budget(size: int, atom_budget: int, what: str):
    if size > atom_budget:
        raise AtomBudgetExceeded(atom_budget, size, what)


def from_atoms(atoms: Iterable[Tuple[Sequence, object]], n: Optional[int] = None) -> JointDist:
    """Validate, merge duplicates, and canonicalize a list of (outcome, probability)."""
    merged: Dict[Outcome, Fraction] = {}
    for outcome, prob in atoms:
        key = to_outcome(outcome, "outcome")
        if n is None:
            n = len(key)
        if len(key) != n:
            raise DimensionMismatch(f"outcome {key} has length {len(key)}, expected {n}")
        p = to_rational(prob, "prob")
        if p <= 0:
            raise ZeroOrNegativeProbability(f"probability {p} for outcome {key}")
        merged[key] = merged.get(key, Fraction(0)) + p
    if not merged:
        raise EmptyDistribution("a distribution needs at least one atom")
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise ProbabilitiesDoNotSumToOne(f"probabilities sum to {total}")
    return _make(n, merged)


def point_mass(outcome: Sequence) -> JointDist:
    key = to_outcome(outcome)
    return _make(len(key), {key: Fraction(1)})


def product(d1: JointDist, d2: JointDist, atom_budget: int = ATOM_BUDGET) -> JointDist:
    """Independent join: the (n1+n2)-dimensional law with P(a,b) = P1(a)P2(b)."""
    _check_budget(len(d1) * len(d2), atom_budget, "product")
    mapping = {a + b: p * q for a, p in d1.atoms for b, q in d2.atoms}
    return _make(d1.n + d2.n, mapping)


def product_all(ds: Sequence[JointDist], atom_budget: int = ATOM_BUDGET) -> JointDist:
    if not ds:
        raise EmptyDistribution("product of an empty list")
    acc = ds[0]
    for d in ds[1:]:
        acc = product(acc, d, atom_budget)
    return acc


def convolve(ds: Sequence[JointDist], atom_budget: int = ATOM_BUDGET) -> JointDist:
    """Law of the coordinate-wise sum of independent draws, one per input."""
    if not ds:
        raise EmptyDistribution("convolution of an empty list")
    n = ds[0].n
    for d in ds:
        if d.n != n:
            raise DimensionMismatch(f"cannot convolve dimensions {n} and {d.n}")
    acc: Dict[Outcome, Fraction] = ds[0].as_dict()
    for d in ds[1:]:
        nxt: Dict[Outcome, Fraction] = {}
        for a, p in acc.items():
            for b, q in d.atoms:
                key = tuple(x + y for x, y in zip(a, b))
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
            if len(nxt) > atom_budget:
                raise AtomBudgetExceeded(atom_budget, len(nxt), "convolve")
        acc = nxt
    logger.debug(f"convolve: {len(ds)} laws -> {len(acc)} atoms")
    return _make(n, acc)


def normalize_table(table: Mapping, field: str = "table") -> Dict[Fraction, Fraction]:
    return {to_rational(k, field): to_rational(v, field) for k, v in table.items()}


def check_monotone_table(table: Mapping[Fraction, Fraction], support: Sequence[Fraction],
                         field: str = "table", decreasing: bool = False):
    """Raise TableIncomplete/NotMonotone unless the table covers `support` in order."""
    images = []
    for v in support:
        if v not in table:
            raise TableIncomplete(f"{field}: no entry for value {v}")
        images.append(table[v])
    for lo, hi, a, b in zip(support, support[1:], images, images[1:]):
        if (b > a) if decreasing else (b < a):
            kind = "nonincreasing" if decreasing else "nondecreasing"
            raise NotMonotone(f"{field}: not {kind} between {lo} -> {a} and {hi} -> {b}")
    return images


def map_coordinatewise(d: JointDist, maps: Sequence[Optional[Mapping]],
                       require_monotone: bool = False) -> JointDist:
    """Law of (u_1(S_1),...,u_n(S_n)); None keeps a coordinate unchanged."""
    if len(maps) != d.n:
        raise DimensionMismatch(f"{len(maps)} value tables for {d.n} coordinates")
    tables = []
    for i, table in enumerate(maps):
        if table is None:
            tables.append(None)
            continue
        t = normalize_table(table, f"coordinate {i}")
        if require_monotone:
            check_monotone_table(t, d.support_grid[i], f"coordinate {i}")
        else:
            for v in d.support_grid[i]:
                if v not in t:
                    raise TableIncomplete(f"coordinate {i}: no entry for value {v}")
        tables.append(t)
    mapping: Dict[Outcome, Fraction] = {}
    for outcome, p in d.atoms:
        key = tuple(v if t is None else t[v] for v, t in zip(outcome, tables))
        mapping[key] = mapping.get(key, Fraction(0)) + p
    return _make(d.n, mapping)


def _validate_coords(coords: Sequence[int], n: int) -> Tuple[int, ...]:
    coords = tuple(coords)
    if not coords:
        raise EmptySubset("coordinate subset is empty")
    for c in coords:
        if not 0 <= c < n:
            raise IndexOutOfRange(f"coordinate {c} outside 0..{n - 1}")
    if len(set(coords)) != len(coords):
        raise OverlappingSubsets(f"coordinate repeated in {coords}")
    return coords


def marginal(d: JointDist, coords: Sequence[int]) -> JointDist:
    """Projection onto `coords` (in the given order) with merged probabilities."""
    coords = _validate_coords(coords, d.n)
    if coords == tuple(range(d.n)):
        return d
    mapping: Dict[Outcome, Fraction] = {}
    for outcome, p in d.atoms:
        key = tuple(outcome[c] for c in coords)
        mapping[key] = mapping.get(key, Fraction(0)) + p
    return _make(len(coords), mapping)


def orthant_prob(d: JointDist, thresholds: Sequence, mode: Orthant = Orthant.LOWER) -> Fraction:
    """P(all S_i <= s_i) in lower mode, P(all S_i > s_i) in upper mode."""
    s = to_outcome(thresholds, "thresholds")
    if len(s) != d.n:
        raise DimensionMismatch(f"{len(s)} thresholds for {d.n} coordinates")
    if Orthant(mode) is Orthant.LOWER:
        hit = lambda o: all(x <= t for x, t in zip(o, s))
    else:
        hit = lambda o: all(x > t for x, t in zip(o, s))
    return sum((p for o, p in d.atoms if hit(o)), Fraction(0))


def embed(d: JointDist, n: int, coords: Sequence[int], fill=0) -> JointDist:
    """Pad d into n coordinates: coordinate k of d lands at position coords[k]."""
    coords = _validate_coords(coords, n)
    if len(coords) != d.n:
        raise DimensionMismatch(f"{len(coords)} positions for a {d.n}-dimensional law")
    base = [to_rational(fill)] * n
    mapping = {}
    for outcome, p in d.atoms:
        row = list(base)
        for c, v in zip(coords, outcome):
            row[c] = v
        mapping[tuple(row)] = p
    return _make(n, mapping)


def mixture(components: Sequence[Tuple[object, JointDist]], atom_budget: int = ATOM_BUDGET) -> JointDist:
    """Weighted mixture of same-dimension laws; weights must be positive and sum to 1."""
    if not components:
        raise EmptyDistribution("mixture of an empty list")
    n = components[0][1].n
    total = Fraction(0)
    mapping: Dict[Outcome, Fraction] = {}
    for weight, d in components:
        w = to_rational(weight, "weight")
        if w <= 0:
            raise ZeroOrNegativeProbability(f"mixture weight {w}")
        if d.n != n:
            raise DimensionMismatch(f"cannot mix dimensions {n} and {d.n}")
        total += w
        for o, p in d.atoms:
            mapping[o] = mapping.get(o, Fraction(0)) + w * p
        if len(mapping) > atom_budget:
            raise AtomBudgetExceeded(atom_budget, len(mapping), "mixture")
    if total != 1:
        raise ProbabilitiesDoNotSumToOne(f"mixture weights sum to {total}")
    return _make(n, mapping)


def event_probability(d: JointDist, predicate: Callable[[Outcome], bool]) -> Fraction:
    return sum((p for o, p in d.atoms if predicate(o)), Fraction(0))


def expectation(d: JointDist, fn: Callable[[Outcome], object]) -> Fraction:
    return sum((p * to_rational(fn(o)) for o, p in d.atoms), Fraction(0))


def condition_on(d: JointDist, predicate: Callable[[Outcome], bool]) -> JointDist:
    """Conditional law given an event of positive probability."""
    mass = event_probability(d, predicate)
    if mass == 0:
        raise ZeroProbabilityEvent("conditioning event has probability 0")
    return _make(d.n, {o: p / mass for o, p in d.atoms if predicate(o)})


def coordinate_sum_support(d: JointDist) -> Tuple[Fraction, ...]:
    """Distinct values attained by S_1 + ... + S_n."""
    return tuple(sorted({sum(o, Fraction(0)) for o, _ in d.atoms}))


def countermonotone_coupling(x: JointDist, y: JointDist) -> JointDist:
    """Quantile coupling (F_x^-1(U), F_y^-1(1-U)) of two one-dimensional laws."""
    if x.n != 1 or y.n != 1:
        raise DimensionMismatch("countermonotone coupling needs one-dimensional laws")
    xs: List[List] = [[o[0], p] for o, p in x.atoms]
    ys: List[List] = [[o[0], p] for o, p in reversed(y.atoms)]
    mapping: Dict[Outcome, Fraction] = {}
    i = j = 0
    while i < len(xs) and j < len(ys):
        m = min(xs[i][1], ys[j][1])
        key = (xs[i][0], ys[j][0])
        mapping[key] = mapping.get(key, Fraction(0)) + m
        xs[i][1] -= m
        ys[j][1] -= m
        if xs[i][1] == 0:
            i += 1
        if ys[j][1] == 0:
            j += 1
    return _make(2, mapping)


__all__ = [
    "Rational", "Outcome", "Orthant", "JointDist",
    "to_rational", "to_outcome", "from_atoms", "point_mass",
    "product", "product_all", "convolve", "map_coordinatewise",
    "normalize_table", "check_monotone_table",
    "marginal", "orthant_prob", "embed", "mixture",
    "event_probability", "expectation", "condition_on",
    "coordinate_sum_support", "countermonotone_coupling",
]

"""
Upper Sets - 上集枚举
有限点集（坐标序）上所有上集的确定性枚举，作为递增函数的指示函数基。

Points are processed in decreasing lexicographic order, which is a reverse
linear extension of the coordinate-wise order: when point i is decided, every
point above it has already been decided. Point i may be included only if all
points above it are included; excluding is always allowed. Each upper set is
produced exactly once, included branch first (the full set comes first, the
empty set last).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from src.config import UPPER_SET_BUDGET
from src.errors import EmptySubset, SearchBudgetExceeded

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]


@dataclass(frozen=True)
class UpperSet:
    """Upper set given by its antichain of minimal elements.

    `signs` orients each coordinate (+1 increasing, -1 decreasing); a point
    belongs to the set when it dominates some minimal element in the oriented
    order. With all signs +1 this is an ordinary upper set.
    """
    coords: Tuple[int, ...]
    minimal_elements: Tuple[Point, ...]
    signs: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.signs:
            object.__setattr__(self, "signs", (1,) * len(self.coords))

    def contains(self, point: Sequence) -> bool:
        return any(
            all(s * (x - m) >= 0 for s, x, m in zip(self.signs, point, low))
            for low in self.minimal_elements
        )


def _dominates(a: Point, b: Point) -> bool:
    return all(x >= y for x, y in zip(a, b))


def upper_set_masks(points: Sequence[Point], budget: int = UPPER_SET_BUDGET) -> List[int]:
    """All upper sets of `points` (sorted ascending, distinct) as bitmasks over point indices."""
    m = len(points)
    above = [0] * m
    for i in range(m):
        for j in range(i + 1, m):
            if _dominates(points[j], points[i]):
                above[i] |= 1 << j
    masks: List[int] = []
    stack = [(m - 1, 0)]
    while stack:
        i, mask = stack.pop()
        if i < 0:
            masks.append(mask)
            if len(masks) > budget:
                raise SearchBudgetExceeded(budget, None, f"more than {budget} upper sets on {m} points",
                                           budget_name="upper-set budget")
            continue
        stack.append((i - 1, mask))
        if above[i] & ~mask == 0:
            stack.append((i - 1, mask | (1 << i)))
    return masks


def minimal_indices(points: Sequence[Point], mask: int) -> List[int]:
    members = [i for i in range(len(points)) if mask >> i & 1]
    return [i for i in members
            if not any(j != i and _dominates(points[i], points[j]) for j in members)]


def masks_to_matrix(masks: Sequence[int], m: int) -> np.ndarray:
    """0/1 indicator rows, one per mask, as an int64 matrix of shape (len(masks), m)."""
    if not masks:
        return np.zeros((0, m), dtype=np.int64)
    nbytes = max(1, (m + 7) // 8)
    raw = b"".join(mask.to_bytes(nbytes, "little") for mask in masks)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8).reshape(len(masks), nbytes),
                         axis=1, bitorder="little")
    return bits[:, :m].astype(np.int64)


def oriented(points: Sequence[Point], signs: Sequence[int]) -> List[Point]:
    return [tuple(s * x for s, x in zip(signs, p)) for p in points]


def enumerate_upper_sets(grid: Sequence[Sequence], budget: int = UPPER_SET_BUDGET) -> Iterator[UpperSet]:
    """Every upper set of the product grid, empty and full included, in canonical order."""
    if not grid or any(len(axis) == 0 for axis in grid):
        raise EmptySubset("upper-set enumeration needs a nonempty grid")
    axes = [sorted({Fraction(v) for v in axis}) for axis in grid]
    points = list(_cartesian(*axes))
    masks = upper_set_masks(points, budget)
    logger.debug(f"enumerate_upper_sets: {len(points)} points -> {len(masks)} upper sets")
    coords = tuple(range(len(axes)))
    for mask in masks:
        yield UpperSet(coords, tuple(points[i] for i in minimal_indices(points, mask)))


__all__ = ["UpperSet", "upper_set_masks", "minimal_indices", "masks_to_matrix",
           "oriented", "enumerate_upper_sets"]

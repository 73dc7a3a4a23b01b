#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Tournament Models - 锦标赛模型编译器
把各类锦标赛模型编译为精确的 JointDist：

- 一般常和循环赛及其特例（整数奖励、二项重复对局、Huber 简单循环赛、含和棋的国际象棋循环赛）
- 随机和 n 人博弈（足球联赛 3/1/0 积分）
- 淘汰赛（随机抽签 / 固定签表），含非传递性反例
- 独立变量的不相交单调函数族（X 与递减 g(X)）

Players and coordinates are 0-based. Every parameter is an exact rational.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product as _cartesian
from math import comb, factorial, prod
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from src.config import DEFAULT_BUDGETS, Budgets
from src.depcheck import check_na
from src.errors import (
    AtomBudgetExceeded,
    ConfigError,
    DimensionMismatch,
    InvalidProbability,
    NotMonotone,
    OverlappingSubsets,
    PreconditionNAFailed,
    TableIncomplete,
)
from src.exactdist import (
    JointDist,
    Outcome,
    check_monotone_table,
    convolve,
    coordinate_sum_support,
    embed,
    from_atoms,
    map_coordinatewise,
    normalize_table,
    product_all,
    to_outcome,
    to_rational,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairRewardLaw:
    """Law of X_ij on [0, r] for a pair i < j; X_ji = r - X_ij is implied."""
    i: int
    j: int
    r: Fraction
    atoms: Tuple[Tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ConfigError(f"pair ({self.i}, {self.j}) must satisfy 0 <= i < j")
        r = to_rational(self.r, f"pair ({self.i},{self.j}).r")
        if r < 0:
            raise ConfigError(f"pair ({self.i},{self.j}): reward {r} is negative")
        merged: Dict[Fraction, Fraction] = {}
        for value, prob in self.atoms:
            v = to_rational(value, f"pair ({self.i},{self.j}) value")
            p = to_rational(prob, f"pair ({self.i},{self.j}) prob")
            if not 0 <= v <= r:
                raise ConfigError(f"pair ({self.i},{self.j}): value {v} outside [0, {r}]")
            if p < 0:
                raise InvalidProbability(f"pair ({self.i},{self.j}): probability {p}")
            if p > 0:
                merged[v] = merged.get(v, Fraction(0)) + p
        if sum(merged.values(), Fraction(0)) != 1:
            raise InvalidProbability(f"pair ({self.i},{self.j}): probabilities do not sum to 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))

    @classmethod
    def no_contest(cls, i: int, j: int) -> "PairRewardLaw":
        """r_ij = 0: players i and j do not compete."""
        return cls(i, j, Fraction(0), ((Fraction(0), Fraction(1)),))

    def split_law(self) -> JointDist:
        """Two-dimensional law of (X_ij, r - X_ij)."""
        return from_atoms([((v, self.r - v), p) for v, p in self.atoms])

    def pad(self, n: int) -> JointDist:
        """The n-dimensional pad Y^{ij}: X_ij at i, r - X_ij at j, zeros elsewhere."""
        return embed(self.split_law(), n, (self.i, self.j))


@dataclass(frozen=True)
class RoundRobinSpec:
    n: int
    pair_laws: Tuple[PairRewardLaw, ...]
    utilities: Optional[Tuple[Optional[Mapping], ...]] = None

    def __post_init__(self):
        laws = tuple(sorted(self.pair_laws, key=lambda law: (law.i, law.j)))
        expected = list(combinations(range(self.n), 2))
        if [(law.i, law.j) for law in laws] != expected:
            raise ConfigError(f"round robin on {self.n} players needs exactly one law per pair {expected}")
        if self.utilities is not None and len(self.utilities) != self.n:
            raise DimensionMismatch(f"{len(self.utilities)} utilities for {self.n} players")
        object.__setattr__(self, "pair_laws", laws)

    @property
    def total_reward(self) -> Fraction:
        return sum((law.r for law in self.pair_laws), Fraction(0))


@dataclass(frozen=True)
class KnockoutSpec:
    """Single-elimination bracket on n = 2^level players; bracket None means a random draw."""
    level: int
    win_matrix: Tuple[Tuple[Fraction, ...], ...]
    bracket: Optional[Tuple[int, ...]] = None
    prizes: Optional[Mapping] = None

    def __post_init__(self):
        if self.level < 1:
            raise ConfigError(f"knockout level must be >= 1, got {self.level}")
        n = self.n
        if len(self.win_matrix) != n or any(len(row) != n for row in self.win_matrix):
            raise DimensionMismatch(f"win matrix must be {n}x{n}")
        matrix = tuple(tuple(to_rational(v, f"win_matrix[{a}][{b}]") if a != b else Fraction(0)
                             for b, v in enumerate(row))
                       for a, row in enumerate(self.win_matrix))
        for a in range(n):
            for b in range(a + 1, n):
                if not 0 <= matrix[a][b] <= 1:
                    raise InvalidProbability(f"p[{a}][{b}] = {matrix[a][b]} outside [0, 1]")
                if matrix[a][b] + matrix[b][a] != 1:
                    raise InvalidProbability(f"p[{a}][{b}] + p[{b}][{a}] != 1")
        object.__setattr__(self, "win_matrix", matrix)
        if self.bracket is not None:
            bracket = tuple(int(p) for p in self.bracket)
            if sorted(bracket) != list(range(n)):
                raise ConfigError(f"bracket {bracket} is not a permutation of 0..{n - 1}")
            object.__setattr__(self, "bracket", bracket)

    @property
    def n(self) -> int:
        return 2 ** self.level

    @property
    def is_random_draw(self) -> bool:
        return self.bracket is None

    @classmethod
    def equal_strength(cls, level: int, bracket: Optional[Sequence[int]] = None, prizes=None) -> "KnockoutSpec":
        n = 2 ** level
        return cls(level, tuple(tuple(HALF for _ in range(n)) for _ in range(n)),
                   None if bracket is None else tuple(bracket), prizes)


@dataclass(frozen=True)
class RandomSumSpec:
    """K independent n-dimensional round laws; S_i is the sum (or u_i of the payoff tuple)."""
    rounds: Tuple[JointDist, ...]
    utilities: Optional[Tuple[Optional[Mapping], ...]] = None

    def __post_init__(self):
        if not self.rounds:
            raise ConfigError("a random-sum tournament needs at least one round")
        n = self.rounds[0].n
        if any(r.n != n for r in self.rounds):
            raise DimensionMismatch("all rounds must share the player count")
        if self.utilities is not None and len(self.utilities) != n:
            raise DimensionMismatch(f"{len(self.utilities)} utilities for {n} players")
        object.__setattr__(self, "rounds", tuple(self.rounds))

    @property
    def n(self) -> int:
        return self.rounds[0].n


# ---------------------------------------------------------------------------
# Round robin
# ---------------------------------------------------------------------------

def build_round_robin(spec: RoundRobinSpec, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Exact law of (S_1..S_n), S_i = sum_j X_ij, by folding in one match at a time."""
    n = spec.n
    state: Dict[Outcome, Fraction] = {(Fraction(0),) * n: Fraction(1)}
    for law in spec.pair_laws:
        nxt: Dict[Outcome, Fraction] = {}
        for scores, p in state.items():
            for x, q in law.atoms:
                row = list(scores)
                row[law.i] += x
                row[law.j] += law.r - x
                key = tuple(row)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        if len(nxt) > budgets.atoms:
            raise AtomBudgetExceeded(budgets.atoms, len(nxt), f"round robin after pair ({law.i},{law.j})")
        state = nxt
    d = from_atoms(state.items(), n)
    assert coordinate_sum_support(d) == (spec.total_reward,), "constant-sum invariant broken"
    logger.info(f"round robin n={n}: {len(d)} score vectors")
    if spec.utilities is not None:
        d = map_coordinatewise(d, list(spec.utilities), require_monotone=True)
    return d


def _pair_param(param, i: int, j: int, name: str):
    """Scalar, {(i, j): value} mapping, or n x n matrix (upper triangle used)."""
    if isinstance(param, Mapping):
        if (i, j) not in param:
            raise ConfigError(f"{name}: no entry for pair ({i}, {j})")
        return param[(i, j)]
    if isinstance(param, (list, tuple)):
        return param[i][j]
    return param


def binomial_pair_law(i: int, j: int, r: int, p) -> PairRewardLaw:
    """X_ij ~ Binomial(r, p) with exact integer binomial coefficients."""
    p = to_rational(p, f"p[{i}][{j}]")
    if not 0 <= p <= 1:
        raise InvalidProbability(f"p[{i}][{j}] = {p} outside [0, 1]")
    r = int(r)
    if r < 0:
        raise ConfigError(f"r[{i}][{j}] = {r} is negative")
    if r == 0:
        return PairRewardLaw.no_contest(i, j)
    atoms = tuple((Fraction(k), comb(r, k) * p ** k * (1 - p) ** (r - k)) for k in range(r + 1))
    return PairRewardLaw(i, j, Fraction(r), atoms)


def binomial_round_robin_spec(n: int, r, p, utilities=None) -> RoundRobinSpec:
    laws = tuple(binomial_pair_law(i, j, _pair_param(r, i, j, "r"), _pair_param(p, i, j, "p"))
                 for i, j in combinations(range(n), 2))
    return RoundRobinSpec(n, laws, utilities)


def build_binomial_round_robin(n: int, r, p, utilities=None, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Pairwise repeated games: X_ij ~ Binomial(r_ij, p_ij)."""
    return build_round_robin(binomial_round_robin_spec(n, r, p, utilities), budgets)


def chess_pair_law(i: int, j: int, p_win, p_draw) -> PairRewardLaw:
    p_win = to_rational(p_win, f"p_win[{i}][{j}]")
    p_draw = to_rational(p_draw, f"p_draw[{i}][{j}]")
    if p_win < 0 or p_draw < 0 or p_win + p_draw > 1:
        raise InvalidProbability(f"pair ({i},{j}): p_win={p_win}, p_draw={p_draw}")
    atoms = ((Fraction(1), p_win), (HALF, p_draw), (Fraction(0), 1 - p_win - p_draw))
    return PairRewardLaw(i, j, Fraction(1), atoms)


def chess_round_robin_spec(n: int, p_win, p_draw) -> RoundRobinSpec:
    laws = tuple(chess_pair_law(i, j, _pair_param(p_win, i, j, "p_win"), _pair_param(p_draw, i, j, "p_draw"))
                 for i, j in combinations(range(n), 2))
    return RoundRobinSpec(n, laws)


def build_chess_round_robin(n: int, p_win, p_draw, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Chess round robin: X_ij in {0, 1/2, 1}; any per-pair win/draw probabilities."""
    return build_round_robin(chess_round_robin_spec(n, p_win, p_draw), budgets)


def huber_spec(n: int, p) -> RoundRobinSpec:
    """Player 0 beats everyone with probability p; all other games are fair coin flips."""
    p = to_rational(p, "p")
    laws = []
    for i, j in combinations(range(n), 2):
        q = p if i == 0 else HALF
        laws.append(PairRewardLaw(i, j, Fraction(1), ((Fraction(1), q), (Fraction(0), 1 - q))))
    return RoundRobinSpec(n, tuple(laws))


def pairwise_pads(spec: RoundRobinSpec) -> List[JointDist]:
    """The Y^{ij} vectors whose independent sum is the round-robin score vector."""
    return [law.pad(spec.n) for law in spec.pair_laws]


# ---------------------------------------------------------------------------
# Random-sum games
# ---------------------------------------------------------------------------

def _monotone_multitable(table: Mapping, axes: Sequence[Sequence[Fraction]], field: str,
                         budget: int) -> Dict[Outcome, Fraction]:
    """Normalize a tuple-keyed table and check it is coordinate-wise nondecreasing on the grid."""
    size = prod(len(a) for a in axes)
    if size > budget:
        raise AtomBudgetExceeded(budget, size, f"{field} monotonicity grid")
    normalized = {}
    for key, value in table.items():
        key = key if isinstance(key, tuple) else (key,)
        normalized[to_outcome(key, field)] = to_rational(value, field)
    for point in _cartesian(*axes):
        if point not in normalized:
            raise TableIncomplete(f"{field}: no entry for {point}")
    for point in _cartesian(*axes):
        for k, axis in enumerate(axes):
            pos = axis.index(point[k])
            if pos + 1 < len(axis):
                upper = point[:k] + (axis[pos + 1],) + point[k + 1:]
                if normalized[upper] < normalized[point]:
                    raise NotMonotone(f"{field}: decreases from {point} to {upper}")
    return normalized


def sum_table(axes: Sequence[Sequence]) -> Dict[Outcome, Fraction]:
    """The increasing table (x_1, ..., x_k) -> x_1 + ... + x_k over a product grid."""
    axes = [sorted({to_rational(v) for v in a}) for a in axes]
    return {point: sum(point, Fraction(0)) for point in _cartesian(*axes)}


def build_random_sum(spec: RandomSumSpec, waive_na: bool = False,
                     budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Sum (or per-player increasing utility) of independent NA round payoff vectors."""
    if waive_na:
        logger.warning("random-sum NA precondition waived; the result carries no NA guarantee")
    else:
        for k, law in enumerate(spec.rounds):
            result = check_na(law, budgets=budgets)
            if not result.holds:
                raise PreconditionNAFailed(k, result)
    if spec.utilities is None or all(u is None for u in spec.utilities):
        d = convolve(list(spec.rounds), budgets.atoms)
        logger.info(f"random sum of {len(spec.rounds)} rounds: {len(d)} atoms")
        return d

    n = spec.n
    tables = []
    for i, u in enumerate(spec.utilities):
        if u is None:
            tables.append(None)
            continue
        axes = [list(r.support_grid[i]) for r in spec.rounds]
        tables.append(_monotone_multitable(u, axes, f"utility[{i}]", budgets.atoms))
    # payoff histories: per player, the tuple of round payoffs so far
    state: Dict[Tuple[Outcome, ...], Fraction] = {tuple(() for _ in range(n)): Fraction(1)}
    for law in spec.rounds:
        nxt: Dict[Tuple[Outcome, ...], Fraction] = {}
        for hist, p in state.items():
            for outcome, q in law.atoms:
                key = tuple(h + (x,) for h, x in zip(hist, outcome))
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        if len(nxt) > budgets.atoms:
            raise AtomBudgetExceeded(budgets.atoms, len(nxt), "random-sum utility enumeration")
        state = nxt
    atoms = []
    for hist, p in state.items():
        atoms.append((tuple(sum(h, Fraction(0)) if t is None else t[h] for h, t in zip(hist, tables)), p))
    return from_atoms(atoms, n)


FOOTBALL_POINTS = ((Fraction(3), Fraction(0)), (Fraction(1), Fraction(1)), (Fraction(0), Fraction(3)))


def football_match_law(probs: Sequence) -> JointDist:
    """(3,0), (1,1), (0,3) with probabilities (home win, draw, away win)."""
    p = [to_rational(v, "match probs") for v in probs]
    if len(p) != 3 or any(v < 0 for v in p) or sum(p) != 1:
        raise InvalidProbability(f"football match probabilities {probs}")
    return from_atoms([(pts, q) for pts, q in zip(FOOTBALL_POINTS, p) if q > 0])


def football_rounds(n: int, match_probs) -> List[JointDist]:
    """One padded 3/1/0 points vector per pair i < j."""
    rounds = []
    for i, j in combinations(range(n), 2):
        probs = match_probs[(i, j)] if isinstance(match_probs, Mapping) else match_probs
        rounds.append(embed(football_match_law(probs), n, (i, j)))
    return rounds


def build_multinomial_round(n: int, trials: int, probs: Sequence) -> JointDist:
    """Multinomial(trials, probs) payoff vector: a constant-sum NA round."""
    p = [to_rational(v, "probs") for v in probs]
    if len(p) != n:
        raise DimensionMismatch(f"{len(p)} cell probabilities for {n} players")
    if any(v < 0 for v in p) or sum(p) != 1:
        raise InvalidProbability(f"multinomial probabilities {probs}")
    atoms = []
    for cut in combinations(range(trials + n - 1), n - 1):
        bounds = (-1,) + cut + (trials + n - 1,)
        counts = [bounds[k + 1] - bounds[k] - 1 for k in range(n)]
        weight = Fraction(factorial(trials), prod(factorial(c) for c in counts))
        q = weight * prod((pk ** c for pk, c in zip(p, counts)), start=Fraction(1))
        if q > 0:
            atoms.append((counts, q))
    return from_atoms(atoms, n)


# ---------------------------------------------------------------------------
# Random permutations and knockout tournaments
# ---------------------------------------------------------------------------

def _multiset_permutations(values: List) -> Iterator[Tuple]:
    values = sorted(values)
    if not values:
        yield ()
        return
    for k, v in enumerate(values):
        if k > 0 and values[k - 1] == v:
            continue
        for rest in _multiset_permutations(values[:k] + values[k + 1:]):
            yield (v,) + rest


def build_random_permutation(values: Sequence, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Uniformly random arrangement of a fixed list of values (a negatively associated law)."""
    vals = [to_rational(v, "values") for v in values]
    counts: Dict[Fraction, int] = {}
    for v in vals:
        counts[v] = counts.get(v, 0) + 1
    distinct = factorial(len(vals)) // prod(factorial(c) for c in counts.values())
    if distinct > budgets.atoms:
        raise AtomBudgetExceeded(budgets.atoms, distinct, "random permutation")
    w = Fraction(1, distinct)
    return from_atoms(((arr, w) for arr in _multiset_permutations(vals)), len(vals))


def canonical_brackets(players: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """One leaf order per distinct bracket: each left half holds its smallest player."""
    players = tuple(players)
    if len(players) == 1:
        yield players
        return
    first, rest = players[0], players[1:]
    half = len(players) // 2
    for others in combinations(rest, half - 1):
        left = (first,) + others
        right = tuple(p for p in rest if p not in others)
        for lb in canonical_brackets(left):
            for rb in canonical_brackets(right):
                yield lb + rb


def _bracket_law(win_matrix, leaves: Tuple[int, ...], n: int) -> Dict[Tuple[int, ...], Fraction]:
    """Win-count law for one fixed leaf order, enumerating every match-result sequence."""

    def subtree(block: Tuple[int, ...]) -> Dict[Tuple[int, Tuple[int, ...]], Fraction]:
        if len(block) == 1:
            return {(block[0], (0,) * n): Fraction(1)}
        half = len(block) // 2
        left, right = subtree(block[:half]), subtree(block[half:])
        out: Dict[Tuple[int, Tuple[int, ...]], Fraction] = {}
        for (w1, s1), p1 in left.items():
            for (w2, s2), p2 in right.items():
                base = [a + b for a, b in zip(s1, s2)]
                for winner, q in ((w1, win_matrix[w1][w2]), (w2, win_matrix[w2][w1])):
                    if q == 0:
                        continue
                    row = list(base)
                    row[winner] += 1
                    key = (winner, tuple(row))
                    out[key] = out.get(key, Fraction(0)) + p1 * p2 * q
        return out

    law: Dict[Tuple[int, ...], Fraction] = {}
    for (_, scores), p in subtree(leaves).items():
        law[scores] = law.get(scores, Fraction(0)) + p
    return law


def build_knockout(spec: KnockoutSpec, budgets: Budgets = DEFAULT_BUDGETS,
                   draw_enumeration: str = "quotient") -> JointDist:
    """Exact law of win counts; a random draw is the uniform mixture over leaf assignments.

    draw_enumeration="quotient" mixes the distinct brackets with equal weight;
    "permutations" mixes all n! leaf orders. Both give the same law.
    """
    n = spec.n
    per_bracket = 2 ** (n - 1)
    if spec.is_random_draw:
        if draw_enumeration == "quotient":
            draws = factorial(n) // per_bracket
            brackets = canonical_brackets(range(n))
        elif draw_enumeration == "permutations":
            draws = factorial(n)
            brackets = permutations(range(n))
        else:
            raise ConfigError(f"unknown draw enumeration {draw_enumeration!r}")
    else:
        draws = 1
        brackets = iter([spec.bracket])
    if per_bracket * draws > budgets.atoms:
        raise AtomBudgetExceeded(budgets.atoms, per_bracket * draws, f"knockout n={n}")

    weight = Fraction(1, draws)
    mapping: Dict[Tuple[int, ...], Fraction] = {}
    for leaves in brackets:
        for scores, p in _bracket_law(spec.win_matrix, tuple(leaves), n).items():
            mapping[scores] = mapping.get(scores, Fraction(0)) + weight * p
    d = from_atoms(mapping.items(), n)
    logger.info(f"knockout n={n} ({'random' if spec.is_random_draw else 'fixed'} draw): {len(d)} outcomes")
    if spec.prizes is not None:
        d = map_coordinatewise(d, [spec.prizes] * n, require_monotone=True)
    return d


def cyclic_win_matrix(eps) -> Tuple[Tuple[Fraction, ...], ...]:
    """Non-transitive strengths: 0 beats 1, 1 beats 2 and 3, 2 beats 3 and 0, 3 beats 0."""
    eps = to_rational(eps, "epsilon")
    if not 0 <= eps < HALF:
        raise InvalidProbability(f"epsilon must lie in [0, 1/2), got {eps}")
    upper = {(0, 1): 1 - eps, (0, 2): eps, (0, 3): eps, (1, 2): 1 - eps, (1, 3): 1 - eps, (2, 3): 1 - eps}
    rows = []
    for a in range(4):
        row = []
        for b in range(4):
            if a == b:
                row.append(Fraction(0))
            elif a < b:
                row.append(upper[(a, b)])
            else:
                row.append(1 - upper[(b, a)])
        rows.append(tuple(row))
    return tuple(rows)


def cyclic_spec(eps) -> KnockoutSpec:
    return KnockoutSpec(2, cyclic_win_matrix(eps))


def build_cyclic_counterexample(eps=0, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Four players with cyclic strengths under a random draw."""
    return build_knockout(cyclic_spec(eps), budgets)


# ---------------------------------------------------------------------------
# Disjoint increasing functions of independent X's and decreasing g(X)'s
# ---------------------------------------------------------------------------

def build_disjoint_monotone_family(x_laws: Sequence[Union[JointDist, Mapping]],
                                   g_tables: Sequence[Optional[Mapping]],
                                   assignments: Sequence[Tuple[Sequence[int], Sequence[int]]],
                                   f_tables: Sequence[Mapping],
                                   budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """Law of S_j = f_j({X_i: i in A_j}, {g_i(X_i): i in B_j}).

    f_j is keyed by value tuples: X_i for i in sorted(A_j), then g_i(X_i) for
    i in sorted(B_j). A's are pairwise disjoint, and so are B's.
    """
    laws = [law if isinstance(law, JointDist) else from_atoms([((v,), p) for v, p in law.items()])
            for law in x_laws]
    if any(law.n != 1 for law in laws):
        raise DimensionMismatch("each X law must be one-dimensional")
    if len(g_tables) != len(laws):
        raise DimensionMismatch(f"{len(g_tables)} g tables for {len(laws)} X variables")
    if len(f_tables) != len(assignments):
        raise DimensionMismatch(f"{len(f_tables)} f tables for {len(assignments)} outputs")

    a_sets = [tuple(sorted(a)) for a, _ in assignments]
    b_sets = [tuple(sorted(b)) for _, b in assignments]
    for name, sets in (("A", a_sets), ("B", b_sets)):
        seen = set()
        for s in sets:
            for idx in s:
                if not 0 <= idx < len(laws):
                    raise DimensionMismatch(f"{name} index {idx} outside 0..{len(laws) - 1}")
                if idx in seen:
                    raise OverlappingSubsets(f"{name} sets overlap at index {idx}")
                seen.add(idx)

    supports = [[o[0] for o in law.outcomes] for law in laws]
    gs: List[Optional[Dict[Fraction, Fraction]]] = []
    for i, g in enumerate(g_tables):
        if g is None:
            gs.append(None)
            continue
        t = normalize_table(g, f"g[{i}]")
        check_monotone_table(t, supports[i], f"g[{i}]", decreasing=True)
        gs.append(t)
    for b in b_sets:
        for i in b:
            if gs[i] is None:
                raise TableIncomplete(f"Y_{i} is used but g[{i}] is missing")

    fs = []
    for j, (a, b, f) in enumerate(zip(a_sets, b_sets, f_tables)):
        axes = [supports[i] for i in a] + [sorted({gs[i][x] for x in supports[i]}) for i in b]
        fs.append(_monotone_multitable(f, axes, f"f[{j}]", budgets.atoms))

    joint = product_all(laws, budgets.atoms)
    atoms = []
    for xs, p in joint.atoms:
        row = []
        for a, b, f in zip(a_sets, b_sets, fs):
            key = tuple(xs[i] for i in a) + tuple(gs[i][xs[i]] for i in b)
            row.append(f[key])
        atoms.append((row, p))
    return from_atoms(atoms, len(assignments))


def round_robin_as_family(spec: RoundRobinSpec, budgets: Budgets = DEFAULT_BUDGETS) -> JointDist:
    """The round robin written as a disjoint monotone family: g_ij(x) = r_ij - x, f_i = sums."""
    x_laws = [{v: p for v, p in law.atoms} for law in spec.pair_laws]
    g_tables = [{v: law.r - v for v, _ in law.atoms} for law in spec.pair_laws]
    assignments, f_tables = [], []
    for player in range(spec.n):
        a = [k for k, law in enumerate(spec.pair_laws) if law.i == player]
        b = [k for k, law in enumerate(spec.pair_laws) if law.j == player]
        assignments.append((a, b))
        axes = [[v for v, _ in spec.pair_laws[k].atoms] for k in a] + \
               [[spec.pair_laws[k].r - v for v, _ in spec.pair_laws[k].atoms] for k in b]
        f_tables.append(sum_table(axes) if axes else {(): Fraction(0)})
    return build_disjoint_monotone_family(x_laws, g_tables, assignments, f_tables, budgets)


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

def top_probability(d: JointDist, player: int, tie_rule: str = "strict") -> Fraction:
    """Exact P(S_player > max of the others); "split" credits a k-way tie for the top with 1/k."""
    if tie_rule not in ("strict", "split"):
        raise ConfigError(f"unknown tie rule {tie_rule!r}")
    total = Fraction(0)
    for outcome, p in d.atoms:
        best = max(outcome)
        if outcome[player] != best:
            continue
        ties = sum(1 for v in outcome if v == best)
        if ties == 1:
            total += p
        elif tie_rule == "split":
            total += p / ties
    return total


# ---------------------------------------------------------------------------
# Model configs
# ---------------------------------------------------------------------------

MODEL_NAMES = ("round_robin", "binomial_rr", "chess_rr", "huber", "knockout", "random_sum",
               "cyclic", "football", "permutation", "multinomial")


def _require(config: Mapping, key: str):
    if key not in config:
        raise ConfigError(f"model {config.get('model')!r}: missing field {key!r}")
    return config[key]


def _pair_matrix(value, name: str):
    """Scalar, n x n matrix, or {"i,j": value} object from JSON."""
    if isinstance(value, Mapping):
        out = {}
        for key, v in value.items():
            try:
                i, j = (int(part) for part in str(key).split(","))
            except ValueError as e:
                raise ConfigError(f"{name}: bad pair key {key!r}") from e
            out[(i, j)] = v
        return out
    return value


def _utilities(value, n: int):
    if value is None:
        return None
    if len(value) != n:
        raise DimensionMismatch(f"{len(value)} utility tables for {n} players")
    return tuple(None if u is None else dict(u) for u in value)


def _tuple_tables(value, n: int):
    """Random-sum utilities: per player, a list of [[x_1, ..., x_K], u] entries."""
    if value is None:
        return None
    if len(value) != n:
        raise DimensionMismatch(f"{len(value)} utility tables for {n} players")
    tables = []
    for u in value:
        if u is None:
            tables.append(None)
            continue
        tables.append({to_outcome(key, "utility key"): val for key, val in u})
    return tuple(tables)


def spec_from_config(config: Mapping):
    """Model config -> spec object (RoundRobinSpec, KnockoutSpec, RandomSumSpec) or a JointDist."""
    from src.utils.serialization import dist_from_dict

    if not isinstance(config, Mapping):
        raise ConfigError("model config must be a JSON object")
    model = config.get("model")
    if model not in MODEL_NAMES:
        raise ConfigError(f"unknown model {model!r}; choose from {list(MODEL_NAMES)}")

    if model == "round_robin":
        n = int(_require(config, "n"))
        laws = []
        for k, pair in enumerate(_require(config, "pairs")):
            try:
                laws.append(PairRewardLaw(int(pair["i"]), int(pair["j"]), pair.get("r", "1"),
                                          tuple((v, p) for v, p in pair["atoms"])))
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"pairs[{k}]: malformed pair law ({e})") from e
        return RoundRobinSpec(n, tuple(laws), _utilities(config.get("utilities"), n))
    if model == "binomial_rr":
        n = int(_require(config, "n"))
        return binomial_round_robin_spec(n, _pair_matrix(_require(config, "r"), "r"),
                                         _pair_matrix(_require(config, "p"), "p"),
                                         _utilities(config.get("utilities"), n))
    if model == "chess_rr":
        n = int(_require(config, "n"))
        return chess_round_robin_spec(n, _pair_matrix(_require(config, "p_win"), "p_win"),
                                      _pair_matrix(_require(config, "p_draw"), "p_draw"))
    if model == "huber":
        return huber_spec(int(_require(config, "n")), _require(config, "p"))
    if model == "knockout":
        level = int(_require(config, "level"))
        bracket = config.get("bracket")
        prizes = config.get("prizes")
        if config.get("win_matrix") is None:
            return KnockoutSpec.equal_strength(level, bracket, prizes)
        return KnockoutSpec(level, tuple(tuple(row) for row in config["win_matrix"]),
                            None if bracket is None else tuple(bracket), prizes)
    if model == "cyclic":
        return cyclic_spec(config.get("epsilon", "0"))
    if model == "random_sum":
        rounds = tuple(dist_from_dict(r, f"rounds[{k}]") for k, r in enumerate(_require(config, "rounds")))
        if not rounds:
            raise ConfigError("random_sum: 'rounds' is empty")
        return RandomSumSpec(rounds, _tuple_tables(config.get("utilities"), rounds[0].n))
    if model == "football":
        n = int(_require(config, "n"))
        probs = _pair_matrix(_require(config, "match_probs"), "match_probs")
        return RandomSumSpec(tuple(football_rounds(n, probs)))
    if model == "permutation":
        return build_random_permutation(_require(config, "values"))
    return build_multinomial_round(int(_require(config, "n")), int(_require(config, "trials")),
                                   _require(config, "probs"))


def build_spec(spec, budgets: Budgets = DEFAULT_BUDGETS, waive_na: bool = False,
               draw_enumeration: str = "quotient") -> JointDist:
    """Compile any spec object to its exact law."""
    if isinstance(spec, JointDist):
        return spec
    if isinstance(spec, RoundRobinSpec):
        return build_round_robin(spec, budgets)
    if isinstance(spec, KnockoutSpec):
        return build_knockout(spec, budgets, draw_enumeration)
    if isinstance(spec, RandomSumSpec):
        return build_random_sum(spec, waive_na, budgets)
    raise ConfigError(f"cannot build {type(spec).__name__}")


def build_from_config(config: Mapping, budgets: Budgets = DEFAULT_BUDGETS) -> Tuple[JointDist, Dict]:
    """Build the law described by a model config; returns (law, provenance)."""
    from src.utils.serialization import config_hash

    spec = spec_from_config(config)
    waive = bool(config.get("waive_na", False))
    if isinstance(spec, RandomSumSpec):
        na_precondition = "waived" if waive else "checked"
    else:
        na_precondition = "not_applicable"
    d = build_spec(spec, budgets, waive, config.get("draw_enumeration", "quotient"))
    provenance = {
        "model": config["model"],
        "config_hash": config_hash(config),
        "parameters": dict(config),
        "budgets": budgets.to_dict(),
        "na_precondition": na_precondition,
    }
    return d, provenance


__all__ = [
    "PairRewardLaw", "RoundRobinSpec", "KnockoutSpec", "RandomSumSpec",
    "build_round_robin", "build_binomial_round_robin", "build_chess_round_robin",
    "binomial_pair_law", "binomial_round_robin_spec", "chess_pair_law", "chess_round_robin_spec",
    "huber_spec", "pairwise_pads", "sum_table",
    "build_random_sum", "football_match_law", "football_rounds", "build_multinomial_round",
    "build_random_permutation", "canonical_brackets", "build_knockout",
    "cyclic_win_matrix", "cyclic_spec", "build_cyclic_counterexample",
    "build_disjoint_monotone_family", "round_robin_as_family", "top_probability",
    "MODEL_NAMES", "spec_from_config", "build_spec", "build_from_config",
]

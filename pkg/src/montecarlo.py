"""
Monte Carlo - 可复现的蒙特卡洛抽样
对所有锦标赛模型进行带种子的抽样，估计事件概率并给出标准误与置信区间。

Replication r under seed s draws from
    numpy.random.Generator(numpy.random.Philox(key=s, counter=r << 192))
so each replication owns a disjoint counter stream and the sample is a pure
function of (s, r). Estimates are accumulated exactly and converted to float
once, which keeps them bit-identical for any worker count or chunking.

Sampling is exact: every probability is drawn as an integer below its common
denominator, never through a float comparison.
"""

import concurrent.futures
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from math import lcm
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from src.config import MC_CHUNK_SIZE, MC_CONFIDENCE_LEVEL, DEFAULT_WORKERS
from src.errors import ConfigError, DimensionMismatch
from src.exactdist import JointDist, Orthant, Outcome, normalize_table, to_outcome, to_rational
from src.models import KnockoutSpec, RandomSumSpec, RoundRobinSpec
from src.staged import StagedModel

logger = logging.getLogger(__name__)

_INT64_DRAW_LIMIT = 1 << 62


@dataclass(frozen=True)
class Seed:
    value: int
    replication: int = 0

    def __post_init__(self):
        if not 0 <= self.value < 1 << 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.value}")
        if self.replication < 0:
            raise ConfigError(f"replication index must be >= 0, got {self.replication}")


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Generator for one replication; a stable part of the output contract."""
    return np.random.Generator(np.random.Philox(key=seed, counter=replication << 192))


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound), exact for any bound."""
    if bound <= _INT64_DRAW_LIMIT:
        return int(rng.integers(0, bound))
    nbytes = (bound.bit_length() + 7) // 8
    excess = 8 * nbytes - bound.bit_length()
    while True:
        value = int.from_bytes(rng.bytes(nbytes), "little") >> excess
        if value < bound:
            return value


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

class Sampler:
    """Draws one score vector from a model's law."""
    n: int

    def draw(self, rng: np.random.Generator) -> Outcome:
        raise NotImplementedError


class DistSampler(Sampler):
    """Inverse-CDF sampling over the canonical atom order of a JointDist."""

    def __init__(self, d: JointDist):
        self.n = d.n
        self.outcomes = d.outcomes
        self.total, weights = d.integer_weights()
        self.cumulative = list(accumulate(weights))

    def draw(self, rng: np.random.Generator) -> Outcome:
        return self.outcomes[bisect_right(self.cumulative, _uniform_below(rng, self.total))]


class _UtilityMixin:
    tables: Optional[List[Optional[Dict[Fraction, Fraction]]]] = None

    def _apply(self, scores: Outcome) -> Outcome:
        if self.tables is None:
            return scores
        return tuple(v if t is None else t[v] for v, t in zip(scores, self.tables))


class RoundRobinSampler(_UtilityMixin, Sampler):
    """All matches of a round robin drawn at once as integer arrays."""

    def __init__(self, spec: RoundRobinSpec):
        self.n = spec.n
        self.spec = spec
        laws = spec.pair_laws
        self.value_scale = lcm(1, *(v.denominator for law in laws for v, _ in law.atoms),
                               *(law.r.denominator for law in laws))
        self.first = np.array([law.i for law in laws], dtype=np.int64)
        self.second = np.array([law.j for law in laws], dtype=np.int64)
        width = max((len(law.atoms) for law in laws), default=1)
        self.bounds = []
        cumulative = np.zeros((len(laws), width), dtype=object)
        values = np.zeros((len(laws), width), dtype=object)
        totals = np.zeros(len(laws), dtype=object)
        for k, law in enumerate(laws):
            bound = lcm(*(p.denominator for _, p in law.atoms))
            running = 0
            for a in range(width):
                if a < len(law.atoms):
                    v, p = law.atoms[a]
                    running += p.numerator * (bound // p.denominator)
                    values[k, a] = int(v * self.value_scale)
                cumulative[k, a] = running
            totals[k] = int(law.r * self.value_scale)
            self.bounds.append(bound)
        self.vectorized = bool(laws) and max(self.bounds) <= _INT64_DRAW_LIMIT \
            and max((abs(int(v)) for v in values.flat), default=0) < _INT64_DRAW_LIMIT // max(1, len(laws))
        dtype = np.int64 if self.vectorized else object
        self.cumulative = cumulative.astype(dtype)
        self.values = values.astype(dtype)
        self.totals = totals.astype(dtype)
        self.high = np.array(self.bounds, dtype=dtype)
        if spec.utilities is not None:
            self.tables = [None if u is None else normalize_table(u, f"utility[{i}]")
                           for i, u in enumerate(spec.utilities)]

    def draw(self, rng: np.random.Generator) -> Outcome:
        m = len(self.bounds)
        if m == 0:
            return self._apply((Fraction(0),) * self.n)
        if self.vectorized:
            u = rng.integers(0, self.high)
            idx = (u[:, None] >= self.cumulative).sum(axis=1)
        else:
            u = [_uniform_below(rng, b) for b in self.bounds]
            idx = np.array([bisect_right(list(self.cumulative[k]), u[k]) for k in range(m)])
        x = self.values[np.arange(m), idx]
        scores = np.zeros(self.n, dtype=self.values.dtype)
        np.add.at(scores, self.first, x)
        np.add.at(scores, self.second, self.totals - x)
        return self._apply(tuple(Fraction(int(s), self.value_scale) for s in scores))


class KnockoutSampler(Sampler):
    """Draw (random permutation of leaves unless fixed), then play the rounds."""

    def __init__(self, spec: KnockoutSpec):
        self.n = spec.n
        self.spec = spec
        self.scale = lcm(*(p.denominator for row in spec.win_matrix for p in row))
        if self.scale > _INT64_DRAW_LIMIT:
            raise ConfigError("win matrix denominators are too large to sample")
        self.threshold = np.array([[int(p * self.scale) for p in row] for row in spec.win_matrix],
                                  dtype=np.int64)
        self.prizes = None if spec.prizes is None else normalize_table(spec.prizes, "prizes")

    def draw(self, rng: np.random.Generator) -> Outcome:
        if self.spec.is_random_draw:
            alive = rng.permutation(self.n)
        else:
            alive = np.array(self.spec.bracket, dtype=np.int64)
        wins = np.zeros(self.n, dtype=np.int64)
        while len(alive) > 1:
            a, b = alive[0::2], alive[1::2]
            u = rng.integers(0, self.scale, size=len(a))
            alive = np.where(u < self.threshold[a, b], a, b)
            wins[alive] += 1
        scores = tuple(Fraction(int(w)) for w in wins)
        if self.prizes is not None:
            scores = tuple(self.prizes[v] for v in scores)
        return scores


class RandomSumSampler(Sampler):
    def __init__(self, spec: RandomSumSpec):
        self.n = spec.n
        self.rounds = [DistSampler(r) for r in spec.rounds]
        self.tuple_tables = None
        if spec.utilities is not None:
            self.tuple_tables = [None if u is None else
                                 {to_outcome(k if isinstance(k, tuple) else (k,)): to_rational(v, f"utility[{i}]")
                                  for k, v in u.items()}
                                 for i, u in enumerate(spec.utilities)]

    def draw(self, rng: np.random.Generator) -> Outcome:
        payoffs = [r.draw(rng) for r in self.rounds]
        if self.tuple_tables is None:
            return tuple(sum(col, Fraction(0)) for col in zip(*payoffs))
        out = []
        for i, table in enumerate(self.tuple_tables):
            history = tuple(p[i] for p in payoffs)
            out.append(sum(history, Fraction(0)) if table is None else table[history])
        return tuple(out)


class StagedSampler(Sampler):
    """Stage by stage, drawing each stage from the kernel entry of the current prefix sum."""

    def __init__(self, m: StagedModel):
        self.n = m.n
        self.model = m
        self.initial = DistSampler(m.initial)
        self.cache: Dict[Tuple[int, Outcome], DistSampler] = {}

    def draw(self, rng: np.random.Generator) -> Outcome:
        total = self.initial.draw(rng)
        for kernel in self.model.kernels:
            key = (kernel.stage, total)
            if key not in self.cache:
                self.cache[key] = DistSampler(kernel.law_for(total))
            x = self.cache[key].draw(rng)
            total = tuple(a + b for a, b in zip(total, x))
        return total


def make_sampler(spec) -> Sampler:
    if isinstance(spec, Sampler):
        return spec
    if isinstance(spec, JointDist):
        return DistSampler(spec)
    if isinstance(spec, RoundRobinSpec):
        return RoundRobinSampler(spec)
    if isinstance(spec, KnockoutSpec):
        return KnockoutSampler(spec)
    if isinstance(spec, RandomSumSpec):
        return RandomSumSampler(spec)
    if isinstance(spec, StagedModel):
        return StagedSampler(spec)
    raise ConfigError(f"no sampler for {type(spec).__name__}")


def sample_model(spec, seed: Union[Seed, int]) -> Outcome:
    """One score vector drawn for (seed, replication)."""
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    return make_sampler(spec).draw(replication_rng(seed.value, seed.replication))


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    estimate: float
    se: float
    ci: Tuple[float, float]
    level: float
    reps: int
    seed: int
    tie_rule: Optional[str] = None

    def to_dict(self) -> Dict:
        out = {
            "estimate": self.estimate,
            "se": self.se,
            "ci": list(self.ci),
            "level": self.level,
            "reps": self.reps,
            "seed": self.seed,
        }
        if self.tie_rule is not None:
            out["tie_rule"] = self.tie_rule
        return out

    def within(self, exact: Fraction, k: float) -> bool:
        """|estimate - exact| <= k standard errors (exact match when SE is 0)."""
        return abs(self.estimate - float(exact)) <= k * self.se + 1e-12


def _run_chunk(sampler: Sampler, seed: int, start: int, stop: int,
               credit: Callable[[Outcome], Fraction]) -> Tuple[Fraction, Fraction]:
    total = Fraction(0)
    squares = Fraction(0)
    for rep in range(start, stop):
        c = credit(sampler.draw(replication_rng(seed, rep)))
        total += c
        squares += c * c
    return total, squares


def estimate_event(spec, credit: Callable[[Outcome], Fraction], reps: int, seed: int,
                   level: float = MC_CONFIDENCE_LEVEL, workers: int = DEFAULT_WORKERS,
                   chunk_size: int = MC_CHUNK_SIZE, tie_rule: Optional[str] = None) -> Estimate:
    """Mean credit over replications 0..reps-1 with a normal-approximation interval."""
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    if not 0 < level < 1:
        raise ConfigError(f"confidence level must lie in (0, 1), got {level}")
    seed = Seed(int(seed)).value
    sampler = make_sampler(spec)
    chunks = [(s, min(reps, s + chunk_size)) for s in range(0, reps, max(1, chunk_size))]
    if workers > 1 and len(chunks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(lambda c: _run_chunk(sampler, seed, c[0], c[1], credit), chunks))
    else:
        parts = [_run_chunk(sampler, seed, s, e, credit) for s, e in chunks]
    total = sum((t for t, _ in parts), Fraction(0))
    squares = sum((q for _, q in parts), Fraction(0))
    mean = total / reps
    variance = max(Fraction(0), squares / reps - mean * mean)
    se = math.sqrt(variance / reps)
    z = float(norm.ppf(0.5 + level / 2))
    p = float(mean)
    logger.debug(f"estimate over {reps} reps (seed {seed}): {p} +/- {se}")
    return Estimate(p, se, (p - z * se, p + z * se), level, reps, seed, tie_rule)


def top_credit(player: int, tie_rule: str = "strict") -> Callable[[Outcome], Fraction]:
    if tie_rule not in ("strict", "split"):
        raise ConfigError(f"unknown tie rule {tie_rule!r}")

    def credit(outcome: Outcome) -> Fraction:
        best = max(outcome)
        if outcome[player] != best:
            return Fraction(0)
        ties = sum(1 for v in outcome if v == best)
        if ties == 1:
            return Fraction(1)
        return Fraction(1, ties) if tie_rule == "split" else Fraction(0)

    return credit


def estimate_top_probability(spec, player: int, reps: int, seed: int, tie_rule: str = "strict",
                             level: float = MC_CONFIDENCE_LEVEL, workers: int = DEFAULT_WORKERS) -> Estimate:
    """P(S_player > max of the others); "split" credits a k-way tie for the top with 1/k."""
    n = make_sampler(spec).n
    if not 0 <= player < n:
        raise DimensionMismatch(f"player {player} outside 0..{n - 1}")
    return estimate_event(spec, top_credit(player, tie_rule), reps, seed, level, workers, tie_rule=tie_rule)


def estimate_orthant_probability(spec, thresholds: Sequence, mode: Orthant, reps: int, seed: int,
                                 level: float = MC_CONFIDENCE_LEVEL,
                                 workers: int = DEFAULT_WORKERS) -> Estimate:
    s = to_outcome(thresholds, "thresholds")
    n = make_sampler(spec).n
    if len(s) != n:
        raise DimensionMismatch(f"{len(s)} thresholds for {n} coordinates")
    if Orthant(mode) is Orthant.LOWER:
        hit = lambda o: all(x <= t for x, t in zip(o, s))
    else:
        hit = lambda o: all(x > t for x, t in zip(o, s))
    return estimate_event(spec, lambda o: Fraction(1 if hit(o) else 0), reps, seed, level, workers)


__all__ = [
    "Seed", "replication_rng", "Sampler", "DistSampler", "RoundRobinSampler", "KnockoutSampler",
    "RandomSumSampler", "StagedSampler", "make_sampler", "sample_model",
    "Estimate", "estimate_event", "top_credit", "estimate_top_probability", "estimate_orthant_probability",
]

import logging
from fractions import Fraction
from math import prod

from src.depcheck import CheckResult, MonotonePairWitness, OrthantWitness, covariance_of, indicator_table
from src.exactdist import JointDist, marginal, orthant_prob

logger = logging.getLogger(__name__)


def verify_witness(d: JointDist, result: CheckResult) -> bool:
    """
    Re-derives a violation certificate from the distribution alone.
    A holds verdict verifies iff it carries no witness.
    """
    w = result.witness
    if result.holds:
        return w is None
    if w is None:
        return False

    if isinstance(w, OrthantWitness):
        lhs = orthant_prob(d, w.thresholds, w.mode)
        rhs = prod((orthant_prob(marginal(d, [i]), [s], w.mode) for i, s in enumerate(w.thresholds)),
                   start=Fraction(1))
        ok = lhs == w.lhs and rhs == w.rhs and lhs > rhs
        if not ok:
            logger.warning(f"orthant witness mismatch: stored {w.lhs}/{w.rhs}, recomputed {lhs}/{rhs}")
        return ok

    if isinstance(w, MonotonePairWitness):
        if set(w.a1) & set(w.a2):
            return False
        cov = covariance_of(d, indicator_table(w.u1, d), w.a1, indicator_table(w.u2, d), w.a2)
        ok = cov == w.covariance and cov > 0
        if not ok:
            logger.warning(f"monotone-pair witness mismatch: stored {w.covariance}, recomputed {cov}")
        return ok

    logger.debug(f"no verifier for witness type {type(w).__name__}")
    return False

"""
Verify - Check Hardy--Littlewood inequalities on forms and ensembles

A check compares the coefficient sum (sum_J |a_J|^rho)^{1/rho} against
C * ||T|| for a chosen constant C. Because alternating norms are lower
bounds, a failed comparison is only a violation when the norm is certified:

- HOLDS: lhs <= C * norm + 1e-9 * max(1, lhs)
- INCONCLUSIVE: the comparison failed against an uncertified norm
- CERTIFIED_VIOLATION: the comparison failed against an exact norm
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from errors import BoundInapplicableError, DimensionError, DomainError, UsageError
from exponents import (
    INF,
    BoundSource,
    PLike,
    SubsetMode,
    as_pvector,
    bound_best,
    bound_classical,
    bound_main,
    bound_universal,
    classify_regime,
    critical_exponent,
    khinchine_constant,
    reciprocal,
    RegimeTag,
)
from norms import NormConfig, NormResult, exponent_tuple, sup_norm
from parallel import map_ordered
from tensor import CoeffTensor, Distribution, Field, lp_coeff_norm, mixed_norm, random_tensor

logger = logging.getLogger(__name__)

# Largest sign-vector length for exact Rademacher averages
MAX_RADEMACHER_TERMS = 20


class Verdict(str, Enum):
    HOLDS = "HOLDS"
    INCONCLUSIVE = "INCONCLUSIVE"
    CERTIFIED_VIOLATION = "CERTIFIED_VIOLATION"


class BoundChoice(str, Enum):
    CLASSICAL = "classical"
    UNIVERSAL = "universal"
    MAIN = "main"
    BEST = "best"


class Lhs(NamedTuple):
    lhs: float
    rho: float


def tolerance(lhs: float) -> float:
    """Absolute slack allowed in every comparison"""
    return 1e-9 * max(1.0, lhs)


def judge(lhs: float, constant: float, norm: NormResult) -> Verdict:
    if lhs <= constant * norm.value + tolerance(lhs):
        return Verdict.HOLDS
    return Verdict.CERTIFIED_VIOLATION if norm.certified_exact else Verdict.INCONCLUSIVE


@dataclass(frozen=True, eq=False)
class VerificationRecord:
    """One inequality check"""

    lhs: float
    rho: float
    norm: NormResult
    bound_source: str
    constant: float
    ratio: Optional[float]
    verdict: Verdict
    slack: float
    seed: Optional[int] = None
    tensor_id: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def norm_certified(self) -> bool:
        return self.norm.certified_exact

    def to_dict(self) -> Dict:
        return {
            "lhs": self.lhs,
            "rho": self.rho,
            "norm": self.norm.value,
            "norm_method": self.norm.method.value,
            "certified": self.norm_certified,
            "constant": self.constant,
            "bound_source": self.bound_source,
            "ratio": self.ratio,
            "verdict": self.verdict.value,
            "slack": self.slack,
            "seed": self.seed,
            "tensor_id": self.tensor_id,
        }


def _record(lhs: float, rho: float, norm: NormResult, constant: float, source: str,
            seed: Optional[int], tensor_id: Optional[str]) -> VerificationRecord:
    ratio = lhs / norm.value if norm.value > 0 else None
    return VerificationRecord(
        lhs=lhs,
        rho=rho,
        norm=norm,
        bound_source=source,
        constant=constant,
        ratio=ratio,
        verdict=judge(lhs, constant, norm),
        slack=constant * norm.value - lhs,
        seed=seed,
        tensor_id=tensor_id,
    )


def _check_order(T: CoeffTensor, m: int):
    if T.m != m:
        raise DimensionError(f"tensor of order {T.m} does not match {m} exponents")


def hl_lhs(T: CoeffTensor, p: PLike) -> Lhs:
    """Coefficient norm at the critical exponent rho of p"""
    p = as_pvector(p)
    _check_order(T, p.m)
    rho = critical_exponent(p)
    return Lhs(lp_coeff_norm(T, rho), rho)


def select_constant(
    p: PLike,
    bound_choice: Union[BoundChoice, str] = BoundChoice.BEST,
    mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES,
) -> Tuple[float, str]:
    """
    Constant and its source label for a bound rule

    MAIN falls back to the universal bound when no subset qualifies.

    Raises:
        DomainError: If |1/p| >= 1
        BoundInapplicableError: If the rule needs 1/2 <= |1/p| < 1
    """
    p = as_pvector(p)
    choice = BoundChoice(bound_choice)
    if classify_regime(p).tag is RegimeTag.INVALID:
        # Raises with the admissibility message
        critical_exponent(p)
    if choice is BoundChoice.CLASSICAL:
        return bound_classical(p.m), BoundSource.CLASSICAL.value
    if choice is BoundChoice.UNIVERSAL:
        return bound_universal(p), BoundSource.UNIVERSAL.value
    if choice is BoundChoice.MAIN:
        try:
            return bound_main(p, mode), BoundSource.MAIN_THEOREM.value
        except BoundInapplicableError as e:
            if classify_regime(p).tag is not RegimeTag.DS_RANGE:
                raise
            logger.warning("%s; falling back to the universal bound", e)
            return bound_universal(p), BoundSource.UNIVERSAL.value
    best = bound_best(p, mode)
    return best.value, best.label


def verify_inequality(
    T: CoeffTensor,
    p: PLike,
    bound_choice: Union[BoundChoice, str] = BoundChoice.BEST,
    norm_cfg: Optional[NormConfig] = None,
    mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES,
    seed: Optional[int] = None,
    tensor_id: Optional[str] = None,
) -> VerificationRecord:
    """
    Check (sum_J |a_J|^rho)^{1/rho} <= C ||T|| for one form

    Args:
        T: Coefficient tensor of order m
        p: Exponent tuple of length m
        bound_choice: Which constant C to use
        norm_cfg: Norm settings; certified oracles are preferred when they apply
        mode: Subset mode for the main-theorem constant
        seed: Seed recorded with the result
        tensor_id: Label recorded with the result

    Returns:
        VerificationRecord with a three-valued verdict
    """
    p = as_pvector(p)
    constant, source = select_constant(p, bound_choice, mode)
    lhs, rho = hl_lhs(T, p)
    norm = sup_norm(T, p, norm_cfg)
    record = _record(lhs, rho, norm, constant, source, seed, tensor_id)
    if record.verdict is Verdict.CERTIFIED_VIOLATION:
        logger.error("Certified violation for %s at p = %s: lhs %.17g > %.17g * %.17g",
                     tensor_id or "tensor", p, lhs, constant, norm.value)
    return record


def _partial_exponents(entries: Tuple[float, ...]) -> Tuple[Tuple[float, ...], float]:
    if not entries:
        raise UsageError("the Khinchine step needs at least one exponent")
    sigma = math.fsum(reciprocal(x) for x in entries)
    if not 0.5 <= sigma < 1.0:
        raise DomainError(f"the Khinchine step needs 1/2 <= |1/p|_(<=s) < 1, got {sigma!r}")
    return entries, sigma


def verify_khinchine_step(
    T: CoeffTensor,
    p_first: PLike,
    norm_cfg: Optional[NormConfig] = None,
    field: Union[Field, str, None] = None,
) -> VerificationRecord:
    """
    Mixed-norm estimate obtained by randomizing the last slot

    For T of order s + 1 on l_{p_1} x ... x l_{p_s} x l_inf, with
    sigma = |1/p|_(<=s) in [1/2, 1) and rho = 1/(1 - sigma), checks

        (sum_{j_1..j_s} (sum_{j_{s+1}} |a|^2)^{rho/2})^{1/rho}
            <= 2^{(s-1)(1-sigma)} A_rho^{-1} ||T||

    where the Khinchine constant A_rho is 1 because rho >= 2.

    Args:
        T: Tensor of order s + 1
        p_first: (p_1, ..., p_s); a single exponent is allowed
        norm_cfg: Norm settings
        field: Scalar field for the Khinchine constant (default: T's field)
    """
    entries, sigma = _partial_exponents(exponent_tuple(p_first))
    s = len(entries)
    if T.m != s + 1:
        raise DimensionError(f"the Khinchine step needs a tensor of order {s + 1}, got {T.m}")
    rho = 1.0 / (1.0 - sigma)
    lhs = mixed_norm(T, (rho,) * s + (2.0,))
    constant = 2.0 ** ((s - 1) * (1.0 - sigma)) / khinchine_constant(rho, field or T.field)
    norm = sup_norm(T, entries + (INF,), norm_cfg)
    return _record(lhs, rho, norm, constant, BoundSource.KHINCHINE_STEP.value, None, None)


def verify_induction_step(
    T: CoeffTensor,
    p: PLike,
    norm_cfg: Optional[NormConfig] = None,
) -> VerificationRecord:
    """
    Passing from s to s + 1 slots with the constant of the first s

    For p = (p_1, ..., p_{s+1}) with |1/p|_(<=s) in [1/2, 1) and |1/p| < 1,
    checks (sum |a|^{1/(1-|1/p|)})^{1-|1/p|} <= 2^{(s-1)(1-|1/p|_(<=s))} ||T||.
    """
    p = as_pvector(p)
    _check_order(T, p.m)
    s = p.m - 1
    head = p.head(s)
    total = p.total
    if not 0.5 <= head < 1.0:
        raise DomainError(f"the induction step needs 1/2 <= |1/p|_(<={s}) < 1, got {head!r}")
    if not total < 1.0:
        raise DomainError(f"the induction step needs |1/p| < 1, got {total!r}")
    rho = 1.0 / (1.0 - total)
    lhs = lp_coeff_norm(T, rho)
    constant = 2.0 ** ((s - 1) * (1.0 - head))
    norm = sup_norm(T, p, norm_cfg)
    return _record(lhs, rho, norm, constant, BoundSource.INDUCTION_STEP.value, None, None)


def rademacher_moment(a: Sequence[complex], q: float) -> float:
    """
    Exact q-th Rademacher moment (2^-n sum_eps |sum_j a_j eps_j|^q)^{1/q}

    Every sign pattern is enumerated, so n is limited to 20 terms.
    """
    a = np.asarray(a)
    if a.ndim != 1 or a.shape[0] < 1:
        raise DimensionError("rademacher_moment needs a non-empty vector")
    if a.shape[0] > MAX_RADEMACHER_TERMS:
        raise UsageError(f"at most {MAX_RADEMACHER_TERMS} terms can be enumerated, got {a.shape[0]}")
    if not q > 0:
        raise DomainError(f"moment order must be positive, got {q}")
    signs = np.array(list(product((1.0, -1.0), repeat=a.shape[0])))
    sums = np.abs(signs @ a)
    if not np.any(sums):
        return 0.0
    scale = float(np.max(sums))
    return scale * float(np.mean((sums / scale) ** q)) ** (1.0 / q)


@dataclass(frozen=True)
class EnsembleSpec:
    """Seeded family of random tensors"""

    dist: Distribution = Distribution.GAUSSIAN
    dims: Tuple[int, ...] = (3, 3, 3)
    count: int = 100
    seed: int = 0
    field: Field = Field.REAL

    def tensor_id(self, index: int) -> str:
        return f"{Distribution(self.dist).value}-{self.seed}-{index}"

    def draw(self, index: int) -> CoeffTensor:
        return random_tensor(self.dims, self.field, self.dist, self.seed, stream=(index,))


@dataclass
class BatchSummary:
    """Aggregate of a batch run"""

    count: int
    holds: int
    inconclusive: int
    violations: int
    min_slack: float
    max_ratio: Optional[float]
    argmax_id: Optional[str]
    constant: float
    bound_source: str
    records: List[VerificationRecord] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict:
        return {
            "count": self.count,
            "holds": self.holds,
            "inconclusive": self.inconclusive,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "max_ratio": self.max_ratio,
            "argmax_id": self.argmax_id,
            "constant": self.constant,
            "bound_source": self.bound_source,
        }


def batch_verify(
    ensemble: EnsembleSpec,
    p: PLike,
    bound_choice: Union[BoundChoice, str] = BoundChoice.BEST,
    norm_cfg: Optional[NormConfig] = None,
    mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES,
    threads: Optional[int] = 1,
) -> BatchSummary:
    """
    Run verify_inequality over a seeded ensemble

    Item i is drawn from the (seed, i) stream. Items run concurrently when
    threads > 1; each item's norm runs single-threaded.

    Raises:
        UsageError: If ensemble.count < 1
    """
    if ensemble.count < 1:
        raise UsageError(f"ensemble count must be >= 1, got {ensemble.count}")
    p = as_pvector(p)
    if len(ensemble.dims) != p.m:
        raise DimensionError(f"ensemble dims {ensemble.dims} do not match m = {p.m}")
    # Fail fast on inapplicable rules before drawing anything
    select_constant(p, bound_choice, mode)
    inner_cfg = replace(norm_cfg or NormConfig(), threads=1)

    def check(index: int) -> VerificationRecord:
        T = ensemble.draw(index)
        return verify_inequality(T, p, bound_choice, inner_cfg, mode,
                                 seed=ensemble.seed, tensor_id=ensemble.tensor_id(index))

    records = map_ordered(check, range(ensemble.count), threads)
    ratios = [(r.ratio, i) for i, r in enumerate(records) if r.ratio is not None]
    max_ratio, argmax = (None, None)
    if ratios:
        max_ratio, argmax = max(ratios, key=lambda pair: (pair[0], -pair[1]))
    summary = BatchSummary(
        count=len(records),
        holds=sum(r.verdict is Verdict.HOLDS for r in records),
        inconclusive=sum(r.verdict is Verdict.INCONCLUSIVE for r in records),
        violations=sum(r.verdict is Verdict.CERTIFIED_VIOLATION for r in records),
        min_slack=min(r.slack for r in records),
        max_ratio=max_ratio,
        argmax_id=records[argmax].tensor_id if argmax is not None else None,
        constant=records[0].constant,
        bound_source=records[0].bound_source,
        records=records,
    )
    logger.info("Batch of %d at p = %s: %d hold, %d inconclusive, %d violations",
                summary.count, p, summary.holds, summary.inconclusive, summary.violations)
    return summary

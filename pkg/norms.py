"""
Norms - Sup-norm of a multilinear form over a product of l_p unit balls

||T|| = sup |T(x_1, ..., x_m)| over ||x_k||_{p_k} <= 1. Three estimators
share one interface, in the spirit of an adapter registry:
- RankOneEstimator: exact closed form for detected rank-one tensors
- VertexExactEstimator: exact enumeration of sign vectors (real, all p = inf)
- AlternatingEstimator: multistart alternating maximization (lower bound)

NormManager discovers the estimators in this module and picks the first
certified one that applies, falling back to alternating maximization.
"""

import inspect
import logging
import math
import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from errors import AscentError, DimensionError, OracleUnavailableError, UsageError
from exponents import INF, PVector, conjugate_exponent, parse_exponent
from parallel import map_ordered
from tensor import CoeffTensor, Field, contract_except, evaluate, rank_one, stream_rng

logger = logging.getLogger(__name__)

DEFAULT_VERTEX_BUDGET = 2 ** 24

# Sub-stream keys under the norm seed: (STREAM_TAG, kind, start index)
STREAM_TAG = 0x4E
_START_STREAM = 0
_RESEED_STREAM = 1

# Re-randomizations allowed per slot before accepting a degenerate step
_MAX_RESEEDS = 8

# Relative slack tolerated by the monotone-ascent check
_ASCENT_SLACK = 1e-10


class NormMethod(str, Enum):
    ALTERNATING = "ALTERNATING"
    VERTEX_EXACT = "VERTEX_EXACT"
    RANK_ONE_EXACT = "RANK_ONE_EXACT"


@dataclass(frozen=True)
class NormConfig:
    """Settings for sup-norm estimation"""

    starts: int = 16
    max_iters: int = 10000
    tol: float = 1e-12
    seed: int = 0
    threads: Optional[int] = 1
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    prefer_certified: bool = True


@dataclass(frozen=True, eq=False)
class NormResult:
    """
    Estimated or exact sup-norm

    value is always attained at `witness` (so it is a lower bound on ||T||);
    certified_exact marks values produced by an exact oracle.
    """

    value: float
    witness: Tuple[np.ndarray, ...]
    method: NormMethod
    starts_used: int = 0
    iterations: int = 0
    converged: bool = True
    certified_exact: bool = False
    reseeds: int = 0

    def to_dict(self) -> Dict:
        return {
            "value": self.value,
            "method": self.method.value,
            "certified": self.certified_exact,
            "starts_used": self.starts_used,
            "iterations": self.iterations,
            "converged": self.converged,
            "reseeds": self.reseeds,
        }


class LinearStep(NamedTuple):
    x: np.ndarray
    value: float
    degenerate: bool


def exponent_tuple(p, m: Optional[int] = None) -> Tuple[float, ...]:
    """Accept a PVector or any sequence of exponents in (1, inf]"""
    if isinstance(p, PVector):
        entries = p.entries
    elif isinstance(p, str):
        entries = tuple(parse_exponent(t) for t in p.split(",") if t.strip())
    else:
        entries = tuple(float(x) for x in p)
    if any(math.isnan(x) or not x > 1 for x in entries):
        raise UsageError(f"norm exponents must lie in (1, inf], got {entries}")
    if m is not None and len(entries) != m:
        raise DimensionError(f"tensor of order {m} needs {m} exponents, got {len(entries)}")
    return entries


def _phase_conjugate(c: np.ndarray, zero_value: float) -> np.ndarray:
    magnitude = np.abs(c)
    safe = np.where(magnitude > 0, magnitude, 1.0)
    phase = np.conj(c) / safe
    return np.where(magnitude > 0, phase, zero_value)


def linear_step_maximizer(c, p: float) -> LinearStep:
    """
    Unit vector x in l_p maximizing |<c, x>| = |sum_j c_j x_j|

    For finite p, x_j = conj-phase(c_j) |c_j|^{p*-1} / ||c||_{p*}^{p*-1} and
    the maximum is ||c||_{p*}; for p = inf, x_j = conj-phase(c_j) and the
    maximum is ||c||_1.

    Args:
        c: Coefficient vector
        p: Exponent in (1, inf]

    Returns:
        LinearStep(x, value, degenerate); c = 0 gives (e_1, 0, True)
    """
    c = np.asarray(c)
    dtype = np.complex128 if np.iscomplexobj(c) else np.float64
    c = c.astype(dtype)
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        x = np.zeros(c.shape[0], dtype=dtype)
        x[0] = 1.0
        return LinearStep(x, 0.0, True)

    if p == INF:
        x = _phase_conjugate(c, 1.0).astype(dtype)
        return LinearStep(x, float(np.linalg.norm(c, ord=1)), False)

    q = conjugate_exponent(p)
    scaled = c / scale
    weights = np.abs(scaled) ** (q - 1.0)
    x = (_phase_conjugate(c, 0.0) * weights).astype(dtype)
    x = x / np.linalg.norm(weights, ord=p)
    return LinearStep(x, scale * float(np.linalg.norm(scaled, ord=q)), False)


def _random_unit(rng: np.random.Generator, n: int, p: float, field: Field) -> np.ndarray:
    if field is Field.COMPLEX:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        v = rng.standard_normal(n)
    return v / np.linalg.norm(v, ord=p)


def _canonical_start(T: CoeffTensor) -> List[np.ndarray]:
    """Basis vectors at the largest-magnitude coefficient (first in row-major order)"""
    index = np.unravel_index(int(np.argmax(np.abs(T.coeffs))), T.dims)
    xs = []
    for n, j in zip(T.dims, index):
        e = np.zeros(n, dtype=T.field.dtype)
        e[j] = 1.0
        xs.append(e)
    return xs


@dataclass
class _StartOutcome:
    index: int
    value: float
    witness: List[np.ndarray]
    iterations: int
    converged: bool
    reseeds: int


def _ascend(T: CoeffTensor, p: Tuple[float, ...], xs: List[np.ndarray], cfg: NormConfig,
            index: int) -> _StartOutcome:
    """Cyclic slot-wise maximization from one start"""
    coeffs = T.coeffs
    objective = abs(evaluate(T, *xs))
    reseeds = 0
    reseed_rng = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        previous = objective
        for k in range(T.m):
            step = linear_step_maximizer(contract_except(coeffs, xs, k), p[k])
            if step.degenerate:
                # Every other slot annihilates this one; draw a fresh vector here
                if reseed_rng is None:
                    reseed_rng = stream_rng(cfg.seed, STREAM_TAG, _RESEED_STREAM, index)
                if reseeds < _MAX_RESEEDS * T.m:
                    xs[k] = _random_unit(reseed_rng, T.dims[k], p[k], T.field)
                    reseeds += 1
                objective = abs(evaluate(T, *xs))
                continue
            if step.value < objective * (1.0 - _ASCENT_SLACK):
                raise AscentError(
                    f"objective fell from {objective!r} to {step.value!r} at slot {k + 1}"
                )
            xs[k] = step.x
            objective = step.value
        if objective > 0 and objective - previous <= cfg.tol * objective:
            converged = True
            break
    return _StartOutcome(index, abs(evaluate(T, *xs)), xs, iterations, converged, reseeds)


def sup_norm_alternating(T: CoeffTensor, p, cfg: Optional[NormConfig] = None) -> NormResult:
    """
    Multistart alternating maximization of |T(x_1, ..., x_m)|

    Start 0 uses the basis vectors of the largest coefficient; starts
    1..cfg.starts use random unit vectors from the (seed, start) stream.
    Each start cycles through the slots, replacing x_k by the exact
    maximizer of the linear form left after contracting every other slot,
    until the relative gain of a sweep drops below cfg.tol or cfg.max_iters
    sweeps have run. The best start wins; ties go to the lowest start index.

    Args:
        T: Coefficient tensor
        p: Exponents, one per mode
        cfg: Estimation settings

    Returns:
        NormResult with method ALTERNATING (not certified)
    """
    cfg = cfg or NormConfig()
    p = exponent_tuple(p, T.m)
    if cfg.starts < 1:
        raise UsageError(f"starts must be >= 1, got {cfg.starts}")
    if T.is_zero():
        witness = tuple(_canonical_start(T))
        return NormResult(0.0, witness, NormMethod.ALTERNATING, 0, 0, True, False)

    def run_start(index: int) -> _StartOutcome:
        if index == 0:
            xs = _canonical_start(T)
        else:
            rng = stream_rng(cfg.seed, STREAM_TAG, _START_STREAM, index)
            xs = [_random_unit(rng, n, p_k, T.field) for n, p_k in zip(T.dims, p)]
        return _ascend(T, p, xs, cfg, index)

    outcomes = map_ordered(run_start, range(cfg.starts + 1), cfg.threads)
    best = outcomes[0]
    for outcome in outcomes[1:]:
        if outcome.value > best.value:
            best = outcome
    logger.debug("Alternating norm %.15g from start %d after %d sweeps",
                 best.value, best.index, best.iterations)
    return NormResult(
        value=best.value,
        witness=tuple(best.witness),
        method=NormMethod.ALTERNATING,
        starts_used=len(outcomes),
        iterations=best.iterations,
        converged=best.converged,
        certified_exact=False,
        reseeds=sum(o.reseeds for o in outcomes),
    )


def _sign_matrix(n: int, fix_first: bool) -> np.ndarray:
    """All sign vectors of length n as rows (first sign pinned to +1 if asked)"""
    free = n - 1 if fix_first else n
    codes = np.arange(2 ** free)
    bits = (codes[:, None] >> np.arange(free)) & 1
    signs = 1.0 - 2.0 * bits
    if fix_first:
        signs = np.hstack([np.ones((signs.shape[0], 1)), signs])
    return signs


def sup_norm_vertex_exact(T: CoeffTensor, p=None, budget: int = DEFAULT_VERTEX_BUDGET) -> NormResult:
    """
    Exact sup-norm of a real form on l_inf^{n_1} x ... x l_inf^{n_m}

    The maximum modulus of a multilinear form over a product of cubes is
    attained at sign vectors; the last slot is resolved in closed form
    (its best sign vector gives an l_1 norm), and the first sign of the
    first slot is pinned by the symmetry T(-x, ...) = -T(x, ...).

    Args:
        T: Real coefficient tensor
        p: Optional exponents; every entry must be inf
        budget: Upper limit on prod_k 2^{n_k}

    Raises:
        OracleUnavailableError: Complex field, finite exponent, or budget exceeded
    """
    if T.field is not Field.REAL:
        raise OracleUnavailableError("the vertex oracle needs a real form")
    if p is not None and any(x != INF for x in exponent_tuple(p, T.m)):
        raise OracleUnavailableError("the vertex oracle needs p_k = inf in every slot")
    if sum(T.dims) > math.log2(budget):
        raise OracleUnavailableError(
            f"2^{sum(T.dims)} sign tuples exceed the vertex budget {budget}"
        )
    if T.m == 1:
        step = linear_step_maximizer(T.coeffs, INF)
        return NormResult(step.value, (step.x,), NormMethod.VERTEX_EXACT, 1, 1, True, True)

    sign_tables = [_sign_matrix(n, fix_first=(k == 0)) for k, n in enumerate(T.dims[:-1])]
    partial = T.coeffs[np.newaxis, ...]
    for signs in sign_tables:
        partial = np.einsum("bj...,sj->bs...", partial, signs)
        partial = partial.reshape((-1,) + partial.shape[2:])
    values = np.abs(partial).sum(axis=1)
    best = int(np.argmax(values))
    choice = np.unravel_index(best, tuple(s.shape[0] for s in sign_tables))
    witness = [signs[row].copy() for signs, row in zip(sign_tables, choice)]
    last = np.sign(partial[best])
    witness.append(np.where(last == 0, 1.0, last))
    value = abs(evaluate(T, *witness))
    return NormResult(value, tuple(witness), NormMethod.VERTEX_EXACT,
                      starts_used=1, iterations=len(values), converged=True, certified_exact=True)


def sup_norm_rank_one(factors: Sequence[Sequence[complex]], p) -> NormResult:
    """
    Exact sup-norm of a_1 x ... x a_m, equal to prod_k ||a_k||_{p_k*}

    Args:
        factors: Factor vectors a_1, ..., a_m
        p: Exponents, one per factor (a single factor is allowed)

    Returns:
        Certified NormResult with dual-norming witnesses
    """
    factors = [np.asarray(a) for a in factors]
    if not factors:
        raise DimensionError("sup_norm_rank_one needs at least one factor")
    if any(a.ndim != 1 or a.shape[0] < 1 for a in factors):
        raise DimensionError("rank-one factors must be non-empty vectors")
    p = exponent_tuple(p, len(factors))
    steps = [linear_step_maximizer(a, p_k) for a, p_k in zip(factors, p)]
    value = math.prod(step.value for step in steps)
    return NormResult(value, tuple(step.x for step in steps), NormMethod.RANK_ONE_EXACT,
                      starts_used=1, iterations=1, converged=True, certified_exact=True)


def detect_rank_one(T: CoeffTensor, rel_tol: float = 1e-13) -> Optional[List[np.ndarray]]:
    """
    Factor vectors a_1, ..., a_m with T = a_1 x ... x a_m, or None

    The factors are fibers through the largest coefficient; the candidate is
    accepted when it reproduces T to rel_tol in the l_2 coefficient norm.
    """
    if T.m < 1:
        return None
    coeffs = T.coeffs
    if T.is_zero():
        return [np.zeros(n, dtype=T.field.dtype) if k == 0 else np.ones(n, dtype=T.field.dtype)
                for k, n in enumerate(T.dims)]
    pivot = np.unravel_index(int(np.argmax(np.abs(coeffs))), T.dims)
    pivot_value = coeffs[pivot]
    factors = []
    for k in range(T.m):
        index = list(pivot)
        index[k] = slice(None)
        fiber = np.array(coeffs[tuple(index)])
        factors.append(fiber if k == 0 else fiber / pivot_value)
    rebuilt = rank_one(factors).coeffs
    error = float(np.linalg.norm((rebuilt - coeffs).ravel()))
    if error > rel_tol * float(np.linalg.norm(coeffs.ravel())):
        return None
    return factors


class NormEstimator(ABC):
    """Abstract base class for sup-norm estimators"""

    # Registry key; subclasses without one are not registered
    method_key: Optional[str] = None
    certified: bool = False
    # Lower runs first
    priority: int = 100

    @abstractmethod
    def applies(self, T: CoeffTensor, p: Tuple[float, ...], cfg: NormConfig) -> bool:
        """Whether this estimator can handle the input"""

    @abstractmethod
    def estimate(self, T: CoeffTensor, p: Tuple[float, ...], cfg: NormConfig) -> NormResult:
        """Compute the norm"""


class RankOneEstimator(NormEstimator):
    method_key = "rank_one"
    certified = True
    priority = 10

    def applies(self, T, p, cfg):
        return detect_rank_one(T) is not None

    def estimate(self, T, p, cfg):
        result = sup_norm_rank_one(detect_rank_one(T), p)
        return replace(result, value=abs(evaluate(T, *result.witness)))


class VertexExactEstimator(NormEstimator):
    method_key = "vertex"
    certified = True
    priority = 20

    def applies(self, T, p, cfg):
        return (
            T.field is Field.REAL
            and all(x == INF for x in p)
            and sum(T.dims) <= math.log2(cfg.vertex_budget)
        )

    def estimate(self, T, p, cfg):
        return sup_norm_vertex_exact(T, p, cfg.vertex_budget)


class AlternatingEstimator(NormEstimator):
    method_key = "alternating"
    certified = False
    priority = 90

    def applies(self, T, p, cfg):
        return True

    def estimate(self, T, p, cfg):
        return sup_norm_alternating(T, p, cfg)


class NormManager:
    """Registry of norm estimators discovered in this module"""

    def __init__(self):
        self.estimators: Dict[str, NormEstimator] = {}
        self._initialize_estimators()

    def _initialize_estimators(self):
        current_module = sys.modules[__name__]
        found = []
        for name, obj in inspect.getmembers(current_module, inspect.isclass):
            if issubclass(obj, NormEstimator) and obj is not NormEstimator and obj.method_key:
                if obj.method_key in self.estimators:
                    logger.warning("Duplicate method_key %r in %s; skipping", obj.method_key, name)
                    continue
                self.estimators[obj.method_key] = obj()
                found.append(obj.method_key)
        logger.debug("Registered norm estimators: %s", ", ".join(found))

    def get_estimator(self, method_key: str) -> NormEstimator:
        if method_key not in self.estimators:
            raise KeyError(f"norm estimator '{method_key}' not found")
        return self.estimators[method_key]

    def ordered(self) -> List[NormEstimator]:
        return sorted(self.estimators.values(), key=lambda e: (e.priority, e.method_key))

    def estimate(self, T: CoeffTensor, p, cfg: Optional[NormConfig] = None) -> NormResult:
        """Norm from the first applicable estimator, certified oracles first"""
        cfg = cfg or NormConfig()
        p = exponent_tuple(p, T.m)
        for estimator in self.ordered():
            if estimator.certified and not cfg.prefer_certified:
                continue
            if estimator.applies(T, p, cfg):
                return estimator.estimate(T, p, cfg)
        raise OracleUnavailableError("no norm estimator applies")


norm_manager = NormManager()


def sup_norm(T: CoeffTensor, p, cfg: Optional[NormConfig] = None) -> NormResult:
    """Sup-norm preferring certified oracles when they apply"""
    return norm_manager.estimate(T, p, cfg)

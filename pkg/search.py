"""
Search - Empirical lower bounds on optimal Hardy--Littlewood constants

Maximizes ratio(T) = hl_lhs(T) / ||T|| over coefficient tensors by gradient
ascent on log ratio from a library of extremal seeds plus random restarts.
Only improving steps are accepted; the step size halves otherwise.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from errors import CertifiedViolationError, DimensionError, DomainError, UsageError
from exponents import PLike, PVector, as_pvector, bound_best
from norms import NormConfig, NormResult, sup_norm
from parallel import map_ordered
from records import dump_tensor, write_json
from tensor import (
    CoeffTensor,
    Distribution,
    Field,
    basis_tensor,
    littlewood_matrix,
    random_tensor,
    tensor_product,
)
from verify import Verdict, hl_lhs, judge

logger = logging.getLogger(__name__)

# Sub-stream keys under the search seed: (STREAM_TAG, kind, index)
STREAM_TAG = 0x53
_LIBRARY_STREAM = 0
_RESTART_STREAM = 1

MIN_STEP_SIZE = 1e-12
# Allowed excess of a certified ratio over the best proved constant
VIOLATION_MARGIN = 1e-6


class SeedLabel(str, Enum):
    RANDOM = "RANDOM"
    LITTLEWOOD = "LITTLEWOOD"
    RANK_ONE = "RANK_ONE"
    FILE = "FILE"


@dataclass(frozen=True)
class SearchConfig:
    """Settings for lower_bound_search"""

    restarts: int = 8
    steps: int = 500
    step_size: float = 0.1
    seed: int = 0
    norm_cfg: NormConfig = field(default_factory=NormConfig)
    random_seeds: int = 4
    initial: Tuple[CoeffTensor, ...] = ()
    field: Field = Field.REAL
    threads: Optional[int] = 1


@dataclass(frozen=True, eq=False)
class RatioRecord:
    """Best tensor found by one search, normalized to unit l_2 coefficient norm"""

    ratio: float
    tensor: CoeffTensor
    p: PVector
    iterations: int
    seed_label: SeedLabel
    norm: NormResult
    lhs: float
    bound: float
    bound_source: str
    start_index: int = 0
    # Ratio at the start and after every accepted step
    history: Tuple[float, ...] = ()

    @property
    def verdict(self) -> Verdict:
        return judge(self.lhs, self.bound, self.norm)

    def to_dict(self) -> Dict:
        return {
            "ratio": self.ratio,
            "p": self.p.format(),
            "dims": list(self.tensor.dims),
            "field": self.tensor.field.value,
            "iterations": self.iterations,
            "seed_label": self.seed_label.value,
            "start_index": self.start_index,
            "lhs": self.lhs,
            "norm": self.norm.value,
            "norm_method": self.norm.method.value,
            "certified": self.norm.certified_exact,
            "bound": self.bound,
            "bound_source": self.bound_source,
            "verdict": self.verdict.value,
        }


def _require_nonzero(T: CoeffTensor):
    if T.is_zero():
        raise UsageError("the ratio is undefined for the zero tensor")


def ratio(T: CoeffTensor, p: PLike, norm_cfg: Optional[NormConfig] = None) -> float:
    """hl_lhs(T) / ||T|| with the norm from the default estimator chain"""
    _require_nonzero(T)
    lhs, _ = hl_lhs(T, p)
    return lhs / sup_norm(T, p, norm_cfg).value


def _phase(values: np.ndarray) -> np.ndarray:
    magnitude = np.abs(values)
    return np.where(magnitude > 0, values / np.where(magnitude > 0, magnitude, 1.0), 0.0)


def grad_lhs(T: CoeffTensor, rho: float) -> np.ndarray:
    """
    Gradient of (sum_J |a_J|^rho)^{1/rho} with respect to the coefficients

    Equals S^{1/rho - 1} |a_J|^{rho - 1} phase(a_J) with S = sum |a|^rho;
    complex coefficients get the real-gradient representation
    d/dRe + i d/dIm. Zero coefficients get gradient 0.

    Raises:
        DomainError: If rho <= 1
        UsageError: For the zero tensor
    """
    if not rho > 1:
        raise DomainError(f"the coefficient norm is not smooth for rho = {rho}")
    _require_nonzero(T)
    a = T.coeffs
    scaled = np.abs(a) / float(np.max(np.abs(a)))
    total = float(np.sum(scaled ** rho))
    return total ** (1.0 / rho - 1.0) * scaled ** (rho - 1.0) * _phase(a)


def grad_norm_witness(T: CoeffTensor, norm: NormResult) -> np.ndarray:
    """
    Supergradient of ||T|| at the witness of a norm result

    conj(x_1 x ... x x_m) times the phase of T(x_1, ..., x_m); its real
    inner product with T equals |T(witness)|.

    Raises:
        UsageError: If the witness is degenerate (T vanishes there)
    """
    if len(norm.witness) != T.m:
        raise DimensionError(f"witness has {len(norm.witness)} vectors for a tensor of order {T.m}")
    product = np.asarray(norm.witness[0])
    for x in norm.witness[1:]:
        product = np.multiply.outer(product, np.asarray(x))
    if product.shape != T.dims:
        raise DimensionError(f"witness shape {product.shape} does not match {T.dims}")
    value = complex(np.sum(T.coeffs * product))
    if value == 0:
        raise UsageError("degenerate witness: the form vanishes there")
    phase = value / abs(value)
    gradient = np.conj(product) * phase
    if T.field is Field.REAL:
        return gradient.real
    return gradient


def real_inner(G: np.ndarray, T: CoeffTensor) -> float:
    """Re sum_J conj(G_J) a_J"""
    return float(np.real(np.vdot(G.ravel(), T.coeffs.ravel())))


def labeled_seeds(m: int, n: int, random_seeds: int = 4, seed: int = 0,
                  field: Union[Field, str] = Field.REAL) -> List[Tuple[SeedLabel, CoeffTensor]]:
    """
    Extremal seed library with labels

    - RANK_ONE: e_1 x ... x e_1
    - LITTLEWOOD: floor(m/2)-fold tensor power of [[1, 1], [1, -1]],
      zero-padded to n, times the all-ones vector when m is odd
    - RANDOM: `random_seeds` sign tensors from the library stream
    """
    if m < 2:
        raise UsageError(f"seed forms need m >= 2, got {m}")
    if n < 2:
        raise UsageError(f"seed forms need n >= 2, got {n}")
    field = Field(field)
    dims = (n,) * m
    seeds = [(SeedLabel.RANK_ONE, basis_tensor(dims, (0,) * m, field))]

    power = littlewood_matrix()
    for _ in range(m // 2 - 1):
        power = tensor_product(power, littlewood_matrix())
    power = power.padded((n,) * power.m)
    if m % 2:
        power = tensor_product(power, CoeffTensor(np.ones(n)))
    if field is Field.COMPLEX:
        power = CoeffTensor(power.coeffs, Field.COMPLEX)
    seeds.append((SeedLabel.LITTLEWOOD, power))

    for k in range(random_seeds):
        T = random_tensor(dims, field, Distribution.SIGNS, seed, stream=(STREAM_TAG, _LIBRARY_STREAM, k))
        seeds.append((SeedLabel.RANDOM, T))
    return [(label, T) for label, T in seeds if not T.is_zero()]


def seed_forms(m: int, n: int, random_seeds: int = 4, seed: int = 0,
               field: Union[Field, str] = Field.REAL) -> List[CoeffTensor]:
    """Tensors of the extremal seed library"""
    return [T for _, T in labeled_seeds(m, n, random_seeds, seed, field)]


@dataclass
class _State:
    tensor: CoeffTensor
    lhs: float
    norm: NormResult

    @property
    def ratio(self) -> float:
        return self.lhs / self.norm.value


def _evaluate(T: CoeffTensor, p: PVector, norm_cfg: NormConfig) -> Optional[_State]:
    if T.is_zero():
        return None
    norm = sup_norm(T, p, norm_cfg)
    if norm.value <= 0:
        return None
    return _State(T, hl_lhs(T, p).lhs, norm)


def _ascend(T0: CoeffTensor, p: PVector, cfg: SearchConfig, norm_cfg: NormConfig) -> Tuple[_State, List[float]]:
    state = _evaluate(T0.normalized(), p, norm_cfg)
    history = [state.ratio]
    rho = hl_lhs(T0, p).rho
    eta = cfg.step_size
    for _ in range(cfg.steps):
        if eta < MIN_STEP_SIZE:
            break
        direction = (grad_lhs(state.tensor, rho) / state.lhs
                     - grad_norm_witness(state.tensor, state.norm) / state.norm.value)
        candidate = _evaluate(
            CoeffTensor(state.tensor.coeffs + eta * direction, state.tensor.field).normalized(),
            p, norm_cfg,
        )
        if candidate is not None and candidate.ratio > state.ratio:
            state = candidate
            history.append(state.ratio)
        else:
            eta /= 2.0
    return state, history


def lower_bound_search(p: PLike, n: int, cfg: Optional[SearchConfig] = None) -> RatioRecord:
    """
    Best ratio over seeds and restarts

    Starts are the seed library, cfg.restarts Gaussian restarts and any
    tensors in cfg.initial (labelled FILE); each runs the accept-if-better
    ascent. The best ratio wins, ties to the earliest start.

    Args:
        p: Exponent tuple
        n: Size of every mode
        cfg: Search settings

    Returns:
        RatioRecord of the best tensor

    Raises:
        UsageError: If cfg.restarts < 1
        CertifiedViolationError: If a certified ratio beats the best proved
            constant by more than 1e-6
    """
    cfg = cfg or SearchConfig()
    p = as_pvector(p)
    if cfg.restarts < 1:
        raise UsageError(f"restarts must be >= 1, got {cfg.restarts}")
    best_bound = bound_best(p)
    norm_cfg = replace(cfg.norm_cfg, threads=1)

    starts = labeled_seeds(p.m, n, cfg.random_seeds, cfg.seed, cfg.field)
    for r in range(cfg.restarts):
        T = random_tensor((n,) * p.m, cfg.field, Distribution.GAUSSIAN, cfg.seed,
                          stream=(STREAM_TAG, _RESTART_STREAM, r))
        starts.append((SeedLabel.RANDOM, T))
    for T in cfg.initial:
        if T.m != p.m:
            raise DimensionError(f"initial tensor of order {T.m} does not match m = {p.m}")
        if T.is_zero():
            raise UsageError("initial tensors must be non-zero")
        starts.append((SeedLabel.FILE, T))

    def run(index: int) -> Tuple[_State, List[float]]:
        return _ascend(starts[index][1], p, cfg, norm_cfg)

    outcomes = map_ordered(run, range(len(starts)), cfg.threads)
    best_index = 0
    for index, (state, _) in enumerate(outcomes):
        if state.norm.certified_exact and state.ratio > best_bound.value + VIOLATION_MARGIN:
            raise CertifiedViolationError(
                f"certified ratio {state.ratio!r} exceeds the constant {best_bound.value!r} "
                f"({best_bound.label}) at p = {p}"
            )
        if state.ratio > outcomes[best_index][0].ratio:
            best_index = index

    state, history = outcomes[best_index]
    logger.info("Best ratio %.12g at p = %s, n = %d from %s start %d",
                state.ratio, p, n, starts[best_index][0].value, best_index)
    return RatioRecord(
        ratio=state.ratio,
        tensor=state.tensor,
        p=p,
        iterations=len(history) - 1,
        seed_label=starts[best_index][0],
        norm=state.norm,
        lhs=state.lhs,
        bound=best_bound.value,
        bound_source=best_bound.label,
        start_index=best_index,
        history=tuple(history),
    )


def save_record(record: RatioRecord, path: Union[str, Path]) -> Path:
    """Write the best tensor as tensor JSON plus a <path>.record.json sidecar"""
    path = Path(path)
    dump_tensor(record.tensor, path)
    sidecar = path.with_name(path.name + ".record.json")
    write_json(record.to_dict(), sidecar)
    return sidecar

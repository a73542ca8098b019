"""
Exponents - Reciprocal sums, regimes, critical exponents and constants

Pure calculus on exponent tuples p = (p_1, ..., p_m) in (1, inf]^m:
- |1/p| and its partial sums |1/p|_{<=k}, |1/p|_{>=k}
- regime classification and the critical coefficient exponent rho
- the subset parameter s of the constant bound 2^{(s-1)(1 - sigma_s)}
- every constant bound: classical, universal, subset-based, best-of

Infinite entries are stored as math.inf; their reciprocal is exactly 0.
Reciprocal sums use math.fsum, so they are correctly rounded and do not
depend on summation order. Regime thresholds compare against 1/2 and 1
without an epsilon.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from errors import BoundInapplicableError, DomainError, UsageError
from tensor import Field

INF = math.inf


def reciprocal(p: float) -> float:
    """1/p with 1/inf = 0"""
    return 0.0 if p == INF else 1.0 / p


def conjugate_exponent(p: float) -> float:
    """Hoelder conjugate p* = p/(p-1); inf* = 1 and 1* = inf"""
    if p == INF:
        return 1.0
    if p == 1:
        return INF
    if p < 1:
        raise DomainError(f"conjugate exponent needs p >= 1, got {p}")
    return p / (p - 1.0)


def parse_exponent(token: str) -> float:
    """Parse one entry of a p-list; 'inf', 'infinity' and '∞' map to math.inf"""
    text = token.strip().lower()
    if text in ("inf", "+inf", "infinity", "∞"):
        return INF
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse exponent {token!r}") from None


def format_exponent(p: float) -> str:
    """Inverse of parse_exponent: "inf", "8" for 8.0, "1.3333333333333333" for 4/3"""
    if p == INF:
        return "inf"
    if float(p).is_integer():
        return str(int(p))
    return repr(float(p))


@dataclass(frozen=True)
class PVector:
    """Exponent tuple (p_1, ..., p_m), every entry in (1, inf], m >= 2"""

    entries: Tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(p) for p in self.entries)
        if len(entries) < 2:
            raise UsageError(f"an exponent tuple needs m >= 2 entries, got {len(entries)}")
        for k, p in enumerate(entries, start=1):
            if math.isnan(p) or not p > 1:
                raise DomainError(f"p_{k} = {p} must be strictly greater than 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "PVector":
        """Build from a comma separated list such as 'inf,8,2'"""
        tokens = [t for t in text.split(",") if t.strip()]
        return cls(tuple(parse_exponent(t) for t in tokens))

    @classmethod
    def isotropic(cls, m: int, p: float) -> "PVector":
        return cls((p,) * m)

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def reciprocals(self) -> Tuple[float, ...]:
        return tuple(reciprocal(p) for p in self.entries)

    @property
    def total(self) -> float:
        """|1/p|"""
        return recip_sum(self)

    def head(self, k: int) -> float:
        """|1/p|_{<=k} = 1/p_1 + ... + 1/p_k"""
        return recip_sum(self, 1, k)

    def tail(self, k: int) -> float:
        """|1/p|_{>=k} = 1/p_k + ... + 1/p_m"""
        return recip_sum(self, k, self.m)

    def subset_sum(self, indices: Iterable[int]) -> float:
        """Sum of reciprocals over 1-based indices"""
        return math.fsum(reciprocal(self.entries[i - 1]) for i in sorted(indices))

    def permuted(self, order: Sequence[int]) -> "PVector":
        """Entries reordered by 0-based positions"""
        return PVector(tuple(self.entries[i] for i in order))

    def format(self) -> str:
        return ",".join(format_exponent(p) for p in self.entries)

    def __str__(self) -> str:
        return f"({self.format()})"


PLike = Union[PVector, Sequence[float], str]


def as_pvector(p: PLike) -> PVector:
    if isinstance(p, PVector):
        return p
    if isinstance(p, str):
        return PVector.parse(p)
    return PVector(tuple(p))


def recip_sum(p: PLike, lo: Optional[int] = None, hi: Optional[int] = None) -> float:
    """
    Sum of reciprocals 1/p_lo + ... + 1/p_hi (1-based, inclusive)

    Args:
        p: Exponent tuple
        lo: First index, default 1
        hi: Last index, default m

    Returns:
        The reciprocal sum; the full range gives |1/p|

    Raises:
        UsageError: If the index range is invalid
    """
    p = as_pvector(p)
    lo = 1 if lo is None else lo
    hi = p.m if hi is None else hi
    if not 1 <= lo <= hi <= p.m:
        raise UsageError(f"invalid index range [{lo}, {hi}] for m = {p.m}")
    return math.fsum(reciprocal(x) for x in p.entries[lo - 1:hi])


class RegimeTag(str, Enum):
    BH_RANGE = "BH_RANGE"
    DS_RANGE = "DS_RANGE"
    INVALID = "INVALID"


@dataclass(frozen=True)
class Regime:
    """Regime of an exponent tuple; also_bh marks the shared boundary |1/p| = 1/2"""

    tag: RegimeTag
    recip_sum: float
    also_bh: bool = False


def classify_regime(p: PLike) -> Regime:
    total = recip_sum(p)
    if total >= 1.0:
        return Regime(RegimeTag.INVALID, total)
    if total < 0.5:
        return Regime(RegimeTag.BH_RANGE, total)
    return Regime(RegimeTag.DS_RANGE, total, also_bh=(total == 0.5))


def _require_valid(p: PVector) -> Regime:
    regime = classify_regime(p)
    if regime.tag is RegimeTag.INVALID:
        raise DomainError(
            f"|1/p| = {regime.recip_sum!r} for p = {p}; the inequalities need 0 <= |1/p| < 1"
        )
    return regime


def _require_ds(p: PVector, what: str) -> Regime:
    regime = _require_valid(p)
    if regime.tag is not RegimeTag.DS_RANGE:
        raise BoundInapplicableError(
            f"{what} needs 1/2 <= |1/p| < 1, got |1/p| = {regime.recip_sum!r} for p = {p}"
        )
    return regime


def critical_exponent(p: PLike) -> float:
    """
    Critical coefficient exponent rho of the Hardy--Littlewood inequality

    rho = 2m/(m + 1 - 2|1/p|) when |1/p| <= 1/2 and rho = 1/(1 - |1/p|)
    when 1/2 <= |1/p| < 1; both give 2 at |1/p| = 1/2.

    Raises:
        DomainError: If |1/p| >= 1
    """
    p = as_pvector(p)
    regime = _require_valid(p)
    if regime.tag is RegimeTag.BH_RANGE:
        return 2.0 * p.m / (p.m + 1 - 2.0 * regime.recip_sum)
    return 1.0 / (1.0 - regime.recip_sum)


class SubsetMode(str, Enum):
    """How the entries of a qualifying sub-tuple must differ"""

    DISTINCT_INDICES = "distinct_indices"
    DISTINCT_VALUES = "distinct_values"


class BoundSource(str, Enum):
    CLASSICAL = "CLASSICAL"
    UNIVERSAL = "UNIVERSAL"
    MAIN_THEOREM = "MAIN_THEOREM"
    EXTRAPOLATED = "EXTRAPOLATED"
    INDUCTION_STEP = "INDUCTION_STEP"
    KHINCHINE_STEP = "KHINCHINE_STEP"


@dataclass(frozen=True)
class QualifyingSubset:
    indices: Tuple[int, ...]
    partial_sum: float
    bound: float


@dataclass(frozen=True)
class SubsetReport:
    """
    Outcome of the search for the subset parameter s

    indices are 1-based. s, indices and partial_sum describe the chosen
    minimal subset; they are None / () when no subset qualifies.
    """

    s: Optional[int]
    indices: Tuple[int, ...]
    partial_sum: Optional[float]
    mode: SubsetMode
    all_qualifying: Tuple[QualifyingSubset, ...] = field(default_factory=tuple)


def _exponent_of_two(r: int, sigma: float) -> float:
    return (r - 1) * (1.0 - sigma)


def subset_bound(p: PLike, indices: Iterable[int]) -> float:
    """2^{(r-1)(1 - sigma)} for the sub-tuple at the given 1-based indices"""
    p = as_pvector(p)
    indices = tuple(sorted(indices))
    if not indices or any(not 1 <= i <= p.m for i in indices):
        raise UsageError(f"invalid subset {indices} for m = {p.m}")
    return 2.0 ** _exponent_of_two(len(indices), p.subset_sum(indices))


def subset_parameter_s(p: PLike, mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES) -> SubsetReport:
    """
    Minimal size s of a sub-tuple whose reciprocal sum lies in [1/2, 1)

    Every non-empty index subset is enumerated. In DISTINCT_VALUES mode the
    p-values of a qualifying subset must also be pairwise distinct. Among
    minimal subsets the one with the largest partial sum wins, then the
    lexicographically smallest index tuple.

    Raises:
        BoundInapplicableError: If p is not in the 1/2 <= |1/p| < 1 regime
    """
    p = as_pvector(p)
    mode = SubsetMode(mode)
    _require_ds(p, "the subset parameter")

    qualifying: List[QualifyingSubset] = []
    for r in range(1, p.m + 1):
        for indices in combinations(range(1, p.m + 1), r):
            if mode is SubsetMode.DISTINCT_VALUES:
                values = [p.entries[i - 1] for i in indices]
                if len(set(values)) != len(values):
                    continue
            sigma = p.subset_sum(indices)
            if 0.5 <= sigma < 1.0:
                bound = 2.0 ** _exponent_of_two(r, sigma)
                qualifying.append(QualifyingSubset(indices, sigma, bound))

    if not qualifying:
        return SubsetReport(None, (), None, mode, ())

    s = min(len(q.indices) for q in qualifying)
    minimal = [q for q in qualifying if len(q.indices) == s]
    best = min(minimal, key=lambda q: (-q.partial_sum, q.indices))
    return SubsetReport(s, best.indices, best.partial_sum, mode, tuple(qualifying))


def bound_classical(m: int) -> float:
    """(sqrt 2)^{m-1}, valid for every 0 <= |1/p| < 1"""
    if m < 2:
        raise DomainError(f"the classical bound needs m >= 2, got {m}")
    return 2.0 ** ((m - 1) / 2.0)


def bound_universal(p: PLike) -> float:
    """2^{(m-1)(1 - |1/p|)} for 1/2 <= |1/p| < 1"""
    p = as_pvector(p)
    regime = _require_ds(p, "the universal bound")
    return 2.0 ** _exponent_of_two(p.m, regime.recip_sum)


def isotropic_universal_bound(m: int, p: float) -> float:
    """
    Universal bound for p_1 = ... = p_m = p with m < p <= m + 1

    Equals 2^{(m-1)(1 - m/p)}, which is 2^{(m-1)/(m+1)} at p = m + 1 and
    always < 2.
    """
    if not m < p <= m + 1:
        raise DomainError(f"isotropic universal bound needs m < p <= m + 1, got m={m}, p={p}")
    return bound_universal(PVector.isotropic(m, p))


def bound_main(p: PLike, mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES) -> float:
    """
    2^{(s-1)(1 - sigma_s)} from the minimal qualifying subset

    Raises:
        BoundInapplicableError: If no subset qualifies (DISTINCT_VALUES only);
            callers fall back to bound_universal
    """
    report = subset_parameter_s(p, mode)
    if report.s is None:
        raise BoundInapplicableError(
            f"no sub-tuple of {as_pvector(p)} with pairwise distinct values has "
            "reciprocal sum in [1/2, 1); use the universal bound"
        )
    return 2.0 ** _exponent_of_two(report.s, report.partial_sum)


def constant_one_applies(p: PLike) -> bool:
    """True when some 1 < p_i <= 2 < p_j for all j != i and 1/2 <= |1/p| < 1"""
    p = as_pvector(p)
    if classify_regime(p).tag is not RegimeTag.DS_RANGE:
        return False
    small = [i for i, x in enumerate(p.entries) if x <= 2]
    return len(small) == 1


@dataclass(frozen=True)
class BoundCandidate:
    value: float
    source: BoundSource
    indices: Tuple[int, ...] = ()


@dataclass(frozen=True)
class BestBound:
    """Smallest available constant and every source that attains it"""

    value: float
    sources: Tuple[BoundSource, ...]
    candidates: Tuple[BoundCandidate, ...]

    @property
    def label(self) -> str:
        return "/".join(source.value for source in self.sources)


_SOURCE_ORDER = {
    BoundSource.MAIN_THEOREM: 0,
    BoundSource.UNIVERSAL: 1,
    BoundSource.CLASSICAL: 2,
    BoundSource.EXTRAPOLATED: 3,
    BoundSource.INDUCTION_STEP: 4,
    BoundSource.KHINCHINE_STEP: 5,
}


def bound_candidates(
    p: PLike,
    mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES,
    include_extrapolated: bool = False,
) -> List[BoundCandidate]:
    """All constants that apply to p, each labelled with its source"""
    p = as_pvector(p)
    regime = _require_valid(p)
    candidates = [BoundCandidate(bound_classical(p.m), BoundSource.CLASSICAL)]
    if regime.tag is not RegimeTag.DS_RANGE:
        return candidates
    candidates.append(BoundCandidate(bound_universal(p), BoundSource.UNIVERSAL))
    report = subset_parameter_s(p, mode)
    if report.s is not None:
        candidates.append(BoundCandidate(
            2.0 ** _exponent_of_two(report.s, report.partial_sum),
            BoundSource.MAIN_THEOREM,
            report.indices,
        ))
        if include_extrapolated:
            for q in report.all_qualifying:
                if q.indices != report.indices:
                    candidates.append(BoundCandidate(q.bound, BoundSource.EXTRAPOLATED, q.indices))
    return candidates


def bound_best(
    p: PLike,
    mode: Union[SubsetMode, str] = SubsetMode.DISTINCT_INDICES,
    include_extrapolated: bool = False,
) -> BestBound:
    """
    Minimum over every applicable constant bound

    Below |1/p| = 1/2 only the classical bound applies. Values within
    1e-12 relative of the minimum count as ties and all their sources are
    reported, main-theorem first.
    """
    candidates = bound_candidates(p, mode, include_extrapolated)
    value = min(c.value for c in candidates)
    tied = {c.source for c in candidates if math.isclose(c.value, value, rel_tol=1e-12, abs_tol=0.0)}
    sources = tuple(sorted(tied, key=_SOURCE_ORDER.__getitem__))
    return BestBound(value, sources, tuple(candidates))


def khinchine_constant(q: float, field: Union[Field, str] = Field.REAL) -> float:
    """
    Lower Khinchine constant A_q for Rademacher averages

    Only q >= 2 is supported, where A_q = 1 for both fields.

    Raises:
        DomainError: If q < 2
    """
    Field(field)
    if not q >= 2:
        raise DomainError(f"Khinchine constants are only provided for q >= 2, got {q}")
    return 1.0

"""
Tensor - Dense coefficient tensors of m-linear forms

A form T on l_{p_1}^{n_1} x ... x l_{p_m}^{n_m} is stored through its
coefficients a_{j_1...j_m} = T(e_{j_1}, ..., e_{j_m}) as an immutable
numpy array of shape (n_1, ..., n_m). This module provides:
- evaluation and contraction against vectors
- isotropic and nested (mixed) coefficient norms
- seeded random ensembles and tensor products
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from errors import DimensionError, UsageError


class Field(str, Enum):
    """Scalar field of a form"""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.complex128 if self is Field.COMPLEX else np.float64)


class Distribution(str, Enum):
    """Coefficient distribution for random ensembles"""

    SIGNS = "signs"
    GAUSSIAN = "gaussian"


# Unimodular values used by the complex SIGNS ensemble
FOURTH_ROOTS_OF_UNITY = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=np.complex128)


def stream_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Random generator for one sub-stream of a master seed

    The stream keys are appended to the 64-bit master seed as a SeedSequence
    spawn key, so (seed, keys) -> stream is a fixed hash that does not
    depend on the order in which streams are drawn.

    Args:
        seed: Master seed (non-negative, < 2**64)
        *keys: Non-negative integers identifying the sub-stream

    Returns:
        numpy Generator for that sub-stream
    """
    if seed < 0:
        raise UsageError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


@dataclass(frozen=True, eq=False)
class CoeffTensor:
    """Immutable dense coefficient array with its scalar field"""

    coeffs: np.ndarray
    field: Field = Field.REAL

    def __post_init__(self):
        field = Field(self.field)
        array = np.array(self.coeffs, copy=True)
        if array.dtype.kind not in "biufc":
            raise UsageError(f"coefficients must be numeric, got dtype {array.dtype}")
        if any(n < 1 for n in array.shape):
            raise DimensionError(f"every mode needs at least one index, got shape {array.shape}")
        if field is Field.REAL and np.iscomplexobj(array):
            if np.any(array.imag != 0):
                raise UsageError("field 'real' with non-zero imaginary parts")
            array = array.real
        array = array.astype(field.dtype)
        array.setflags(write=False)
        object.__setattr__(self, "coeffs", array)
        object.__setattr__(self, "field", field)

    @classmethod
    def from_array(cls, values, field: Union[Field, str, None] = None) -> "CoeffTensor":
        """Build a tensor, inferring the field from the dtype when not given"""
        if field is None:
            field = Field.COMPLEX if np.iscomplexobj(np.asarray(values)) else Field.REAL
        return cls(np.asarray(values), Field(field))

    @property
    def m(self) -> int:
        return self.coeffs.ndim

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self.coeffs.shape)

    @property
    def size(self) -> int:
        return int(self.coeffs.size)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def scaled(self, alpha: complex) -> "CoeffTensor":
        """Return alpha * T"""
        return CoeffTensor(self.coeffs * alpha, self.field)

    def normalized(self) -> "CoeffTensor":
        """Return T / ||coeffs||_2; the zero tensor is returned unchanged"""
        norm = float(np.linalg.norm(self.coeffs.ravel()))
        if norm == 0.0:
            return self
        return CoeffTensor(self.coeffs / norm, self.field)

    def padded(self, dims: Sequence[int]) -> "CoeffTensor":
        """Zero-pad every mode up to the given sizes"""
        if len(dims) != self.m or any(n < k for n, k in zip(dims, self.dims)):
            raise DimensionError(f"cannot pad shape {self.dims} to {tuple(dims)}")
        widths = [(0, n - k) for n, k in zip(dims, self.dims)]
        return CoeffTensor(np.pad(self.coeffs, widths), self.field)

    def same_as(self, other: "CoeffTensor") -> bool:
        """Bit-exact equality of field, shape and coefficients"""
        return (
            self.field is other.field
            and self.dims == other.dims
            and self.coeffs.tobytes() == other.coeffs.tobytes()
        )


def zeros(dims: Sequence[int], field: Field = Field.REAL) -> CoeffTensor:
    return CoeffTensor(np.zeros(tuple(dims), dtype=Field(field).dtype), field)


def basis_tensor(dims: Sequence[int], index: Sequence[int], field: Field = Field.REAL) -> CoeffTensor:
    """e_{j_1} x ... x e_{j_m} (0-based index)"""
    array = np.zeros(tuple(dims), dtype=Field(field).dtype)
    array[tuple(index)] = 1.0
    return CoeffTensor(array, field)


def littlewood_matrix() -> CoeffTensor:
    """The 2 x 2 matrix [[1, 1], [1, -1]]"""
    return CoeffTensor(np.array([[1.0, 1.0], [1.0, -1.0]]))


def rank_one(factors: Sequence[Sequence[complex]]) -> CoeffTensor:
    """Outer product a_1 x ... x a_m of the given factor vectors"""
    if not factors:
        raise DimensionError("rank_one needs at least one factor")
    result = CoeffTensor.from_array(np.asarray(factors[0]))
    for factor in factors[1:]:
        result = tensor_product(result, CoeffTensor.from_array(np.asarray(factor)), promote=True)
    return result


def _check_vector(x, size: int, slot: int) -> np.ndarray:
    vector = np.asarray(x)
    if vector.ndim != 1 or vector.shape[0] != size:
        raise DimensionError(f"argument {slot + 1} has shape {vector.shape}, expected ({size},)")
    return vector


def evaluate(T: CoeffTensor, *xs) -> complex:
    """
    Multilinear evaluation sum_J a_J x_1[j_1] ... x_m[j_m]

    Args:
        T: Coefficient tensor of order m
        *xs: m vectors, one per mode

    Returns:
        float for real inputs, complex otherwise
    """
    if len(xs) != T.m:
        raise DimensionError(f"expected {T.m} arguments, got {len(xs)}")
    value = T.coeffs
    for slot in range(T.m - 1, -1, -1):
        value = value @ _check_vector(xs[slot], T.dims[slot], slot)
    value = value[()] if isinstance(value, np.ndarray) else value
    if np.iscomplexobj(value):
        return complex(value)
    return float(value)


def contract_last(T: CoeffTensor, x) -> CoeffTensor:
    """Substitute x into the last slot: b_{j_1...j_{m-1}} = sum_k a_{j_1...j_{m-1} k} x[k]"""
    if T.m < 2:
        raise DimensionError("contract_last needs a tensor of order at least 2")
    vector = _check_vector(x, T.dims[-1], T.m - 1)
    contracted = T.coeffs @ vector
    field = Field.COMPLEX if np.iscomplexobj(contracted) else Field.REAL
    return CoeffTensor(contracted, field)


def contract_except(coeffs: np.ndarray, xs: Sequence[np.ndarray], keep: int) -> np.ndarray:
    """Contract every mode except `keep` against the corresponding vector"""
    result = coeffs
    for slot in range(len(xs) - 1, keep, -1):
        result = result @ xs[slot]
    for slot in range(keep):
        result = np.tensordot(xs[slot], result, axes=(0, 0))
    return result


def lp_coeff_norm(T: CoeffTensor, rho: float) -> float:
    """(sum_J |a_J|^rho)^(1/rho); rho may be inf"""
    if not rho >= 1:
        raise UsageError(f"coefficient norm exponent must be >= 1, got {rho}")
    return float(np.linalg.norm(T.coeffs.ravel(), ord=rho))


def mixed_norm(T: CoeffTensor, exponents: Sequence[float]) -> float:
    """
    Nested norm: the innermost sum runs over j_m with exponent s_m, then
    outward over j_{m-1}, ..., j_1.

    Args:
        T: Coefficient tensor of order m
        exponents: (s_1, ..., s_m), outermost first, each >= 1

    Returns:
        The nested norm; equals lp_coeff_norm when all s_k agree
    """
    exponents = list(exponents)
    if len(exponents) != T.m:
        raise DimensionError(f"expected {T.m} exponents, got {len(exponents)}")
    if any(not s >= 1 for s in exponents):
        raise UsageError(f"mixed-norm exponents must be >= 1, got {exponents}")
    inner = np.abs(T.coeffs)
    for s in reversed(exponents):
        inner = np.linalg.norm(inner, ord=s, axis=-1)
    return float(inner)


def random_tensor(
    dims: Sequence[int],
    field: Union[Field, str] = Field.REAL,
    dist: Union[Distribution, str] = Distribution.SIGNS,
    seed: int = 0,
    stream: Iterable[int] = (),
) -> CoeffTensor:
    """
    Seeded random coefficient tensor

    SIGNS draws i.i.d. uniform +-1 (real) or uniform fourth roots of unity
    (complex). GAUSSIAN draws standard normals; complex entries are
    (X + iY)/sqrt(2).

    Args:
        dims: Per-mode sizes
        field: Scalar field
        dist: Coefficient distribution
        seed: Master seed
        stream: Sub-stream keys appended to the seed

    Returns:
        The tensor, a deterministic function of (dims, field, dist, seed, stream)
    """
    dims = tuple(int(n) for n in dims)
    if not dims:
        raise DimensionError("random_tensor needs at least one mode")
    field, dist = Field(field), Distribution(dist)
    rng = stream_rng(seed, *stream)
    if dist is Distribution.SIGNS:
        if field is Field.REAL:
            values = rng.integers(0, 2, size=dims) * 2.0 - 1.0
        else:
            values = FOURTH_ROOTS_OF_UNITY[rng.integers(0, 4, size=dims)]
    elif field is Field.REAL:
        values = rng.standard_normal(dims)
    else:
        values = (rng.standard_normal(dims) + 1j * rng.standard_normal(dims)) / np.sqrt(2.0)
    return CoeffTensor(values, field)


def tensor_product(T1: CoeffTensor, T2: CoeffTensor, promote: bool = False) -> CoeffTensor:
    """
    c_{J,K} = a_J * b_K, an order m_1 + m_2 tensor

    Args:
        T1, T2: Factors
        promote: Allow REAL x COMPLEX (result COMPLEX) instead of raising

    Returns:
        The tensor product
    """
    if T1.field is not T2.field and not promote:
        raise UsageError(f"field mismatch: {T1.field.value} x {T2.field.value}")
    field = Field.COMPLEX if Field.COMPLEX in (T1.field, T2.field) else Field.REAL
    return CoeffTensor(np.multiply.outer(T1.coeffs, T2.coeffs), field)


def scalar(value: complex = 1.0, field: Field = Field.REAL) -> CoeffTensor:
    """Order-0 tensor; the unit for tensor_product"""
    return CoeffTensor(np.array(value), field)

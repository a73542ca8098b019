"""
Records - Tensor files and result emission

This module provides:
1. The tensor JSON schema (validated with pydantic) and bit-exact load/dump
2. JSON and CSV emission of result records
3. RunContext, which stamps every record with config, seed and version
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, TextIO, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from errors import UsageError
from tensor import CoeffTensor, Field

VERSION = "0.1.0"

Scalar = Union[float, List[float]]


class TensorDocument(BaseModel):
    """On-disk form of a coefficient tensor (row-major, complex as [re, im])"""

    model_config = ConfigDict(extra="forbid")

    m: int
    dims: List[int]
    field: Literal["real", "complex"]
    coeffs: List[Scalar]

    @model_validator(mode="after")
    def check_shape(self) -> "TensorDocument":
        if self.m < 0 or self.m != len(self.dims):
            raise ValueError(f"m = {self.m} does not match {len(self.dims)} dims")
        if any(n < 1 for n in self.dims):
            raise ValueError(f"every entry of dims must be >= 1, got {self.dims}")
        expected = math.prod(self.dims)
        if len(self.coeffs) != expected:
            raise ValueError(f"coeffs has {len(self.coeffs)} entries, dims need {expected}")
        for index, value in enumerate(self.coeffs):
            if isinstance(value, list):
                if self.field == "real":
                    raise ValueError(f"coeffs[{index}] is complex but field is 'real'")
                if len(value) != 2:
                    raise ValueError(f"coeffs[{index}] must be an [re, im] pair")
        return self


def _failing_field(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return "document"
    location = [str(part) for part in details[0].get("loc", ())]
    if location:
        return location[0]
    # Model-level validators report no location; they all concern one field
    message = details[0].get("msg", "")
    for name in ("coeffs", "dims", "m", "field"):
        if name in message:
            return name
    return "document"


def document_from_dict(data: Dict[str, Any]) -> TensorDocument:
    """
    Validate a parsed tensor document

    Raises:
        UsageError: Naming the offending field
    """
    try:
        return TensorDocument.model_validate(data)
    except ValidationError as e:
        field_name = _failing_field(e)
        reason = e.errors()[0].get("msg", str(e)) if e.errors() else str(e)
        raise UsageError(f"invalid tensor document: field '{field_name}': {reason}") from None


def tensor_from_document(doc: TensorDocument) -> CoeffTensor:
    field = Field(doc.field)
    if field is Field.COMPLEX:
        values = [complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in doc.coeffs]
    else:
        values = [float(v) for v in doc.coeffs]
    array = np.array(values, dtype=field.dtype).reshape(tuple(doc.dims))
    return CoeffTensor(array, field)


def tensor_to_dict(T: CoeffTensor) -> Dict[str, Any]:
    flat = T.coeffs.ravel()
    if T.field is Field.COMPLEX:
        coeffs = [[float(z.real), float(z.imag)] for z in flat]
    else:
        coeffs = [float(x) for x in flat]
    return {"m": T.m, "dims": list(T.dims), "field": T.field.value, "coeffs": coeffs}


def load_tensor(path: Union[str, Path]) -> CoeffTensor:
    """
    Read a tensor JSON file

    Raises:
        UsageError: Missing file, malformed JSON or schema violation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read tensor file {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed JSON in {path}: {e.msg} at line {e.lineno}") from None
    if not isinstance(data, dict):
        raise UsageError(f"tensor file {path} must hold a JSON object")
    return tensor_from_document(document_from_dict(data))


def dump_tensor(T: CoeffTensor, path: Union[str, Path]) -> Path:
    """Write T as tensor JSON; float repr keeps the round trip bit-exact"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(tensor_to_dict(T)) + "\n", encoding="utf-8")
    return path


def to_json(record: Dict[str, Any], indent: Optional[int] = None) -> str:
    """Strict JSON: nan and inf become null"""
    return json.dumps(_finite(record), sort_keys=True, indent=indent, default=_default, allow_nan=False)


def _finite(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def _default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(record: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(record, indent=2) + "\n", encoding="utf-8")
    return path


def to_frame(rows: Iterable[Dict[str, Any]], columns: Optional[List[str]] = None) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=columns)


def emit(records: Iterable[Dict[str, Any]], fmt: str, stream: TextIO,
         columns: Optional[List[str]] = None):
    """
    Write records to a stream

    json: one sorted-key object per line. csv: header plus one row per
    record; nested values are flattened to JSON strings.
    """
    records = list(records)
    if fmt == "json":
        for record in records:
            stream.write(to_json(record) + "\n")
    elif fmt == "csv":
        flat = [{k: to_json(v) if isinstance(v, (dict, list)) else v for k, v in r.items()}
                for r in records]
        to_frame(flat, columns).to_csv(stream, index=False)
    else:
        raise UsageError(f"unknown output format {fmt!r}")


class RunContext:
    """Resolved configuration echoed into every output record"""

    def __init__(self, config: Dict[str, Any], seed: int, version: str = VERSION):
        self.config = config
        self.seed = seed
        self.version = version

    def stamp(self, record: Dict[str, Any]) -> Dict[str, Any]:
        stamped = dict(record)
        stamped["config"] = self.config
        stamped["version"] = self.version
        stamped.setdefault("seed", self.seed)
        if stamped["seed"] is None:
            stamped["seed"] = self.seed
        return stamped

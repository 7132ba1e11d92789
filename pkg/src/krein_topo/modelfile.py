"""JSON model files.

A model file is a JSON object::

    {
      "schema": 1,
      "name": "harper(3/7)",
      "L": 1, "p": 7, "q": 3,
      "charge": [1],
      "W1": [[[1.0, 0.0]]], "W2": ..., "W3": ..., "W4": ..., "V": ...,
      "symmetries": {"trs": {"matrix": [[...]], "parity": -1}}
    }

Matrices are lists of rows, each entry a ``[re, im]`` pair.  Symmetry
matrices are real and stored as plain numbers.  ``charge`` and
``symmetries`` are optional.  Floats are written with ``repr`` precision,
so loading and saving reproduces a file byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import BadParams
from .krein import Symmetry
from .tight_binding import HoppingModel, SymmetryMetadata

__all__ = ["SCHEMA_VERSION", "model_to_dict", "model_from_dict", "dumps_model", "loads_model", "save_model", "load_model"]

SCHEMA_VERSION = 1
_MATRICES = ("W1", "W2", "W3", "W4", "V")
_SYMS = ("trs", "phs", "chiral")


def _encode(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def _decode(data, key: str, L: int) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadParams(f"{key}: malformed matrix ({exc})") from None
    if arr.shape != (L, L, 2):
        raise BadParams(f"{key}: expected shape ({L}, {L}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def model_to_dict(model: HoppingModel, metadata: SymmetryMetadata = SymmetryMetadata()) -> dict:
    """Plain-data representation of a model and its symmetries."""
    out = {"schema": SCHEMA_VERSION, "name": model.name, "L": model.L, "p": model.p, "q": model.q,
           "charge": [int(c) for c in model.charge]}
    for key in _MATRICES:
        out[key] = _encode(getattr(model, key))
    syms = {}
    for key in _SYMS:
        s = getattr(metadata, key)
        if s is not None:
            syms[key] = {"matrix": [[float(x) for x in row] for row in s.matrix], "parity": s.eta}
    if syms:
        out["symmetries"] = syms
    return out


def model_from_dict(data: dict) -> Tuple[HoppingModel, SymmetryMetadata]:
    """Inverse of :func:`model_to_dict`.

    Raises
    ------
    BadParams
        On a missing field, a wrong schema version or malformed matrices.
    """
    if not isinstance(data, dict):
        raise BadParams("model file must contain a JSON object")
    if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise BadParams(f"unsupported model schema {data.get('schema')!r}")
    try:
        L, p, q = int(data["L"]), int(data["p"]), int(data["q"])
        mats = {key: _decode(data[key], key, L) for key in ("W1", "W2", "V")}
    except KeyError as exc:
        raise BadParams(f"model file lacks field {exc}") from None
    for key in ("W3", "W4"):
        mats[key] = _decode(data[key], key, L) if key in data else None
    model = HoppingModel(q=q, p=p, charge=data.get("charge"), name=str(data.get("name", "model")), **mats)
    syms = {}
    for key, entry in (data.get("symmetries") or {}).items():
        if key not in _SYMS:
            raise BadParams(f"unknown symmetry block {key!r}")
        flavor = "chiral" if key == "chiral" else "real"
        syms[key] = Symmetry(np.array(entry["matrix"], dtype=float), entry.get("parity"), flavor)
    return model, SymmetryMetadata(**syms)


def dumps_model(model: HoppingModel, metadata: SymmetryMetadata = SymmetryMetadata()) -> str:
    return json.dumps(model_to_dict(model, metadata), indent=1) + "\n"


def loads_model(text: str) -> Tuple[HoppingModel, SymmetryMetadata]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParams(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(data)


def save_model(path: Union[str, Path], model: HoppingModel, metadata: SymmetryMetadata = SymmetryMetadata()) -> None:
    Path(path).write_text(dumps_model(model, metadata))


def load_model(path: Union[str, Path]) -> Tuple[HoppingModel, SymmetryMetadata]:
    return loads_model(Path(path).read_text())

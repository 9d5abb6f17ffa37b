"""JSON encoding of states, subspaces, channels, certificates and bound reports.

Complex numbers are ``{"re": x, "im": y}``. Floats are written with ``repr``
so they round-trip exactly. Exact (rational) entries are written as strings
such as ``"-1/2"``.
"""
from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import numpy as np

from .certify import Certificate
from .channels import Isometry, KrausChannel
from .constructions import ExactSubspace, Subspace
from .measures import BoundReport
from .polysys import GaussianRational, exact_scalar
from .tensor import DensityMatrix, PureState


# ---------------------------------------------------------------- scalars

def encode_complex(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def decode_complex(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    raise ValueError(f"not a complex number: {obj!r}")


def encode_exact(x) -> dict:
    x = exact_scalar(x)
    if isinstance(x, GaussianRational):
        return {"re": str(x.re), "im": str(x.im)}
    return {"re": str(x), "im": "0"}


def decode_exact(obj):
    if isinstance(obj, dict):
        re_, im_ = Fraction(str(obj.get("re", "0"))), Fraction(str(obj.get("im", "0")))
    elif isinstance(obj, (int, str)) and not isinstance(obj, bool):
        re_, im_ = Fraction(str(obj)), Fraction(0)
    else:
        raise ValueError(f"not an exact number: {obj!r}")
    return GaussianRational(re_, im_) if im_ else re_


def _vec(a) -> list:
    return [encode_complex(z) for z in np.asarray(a).reshape(-1)]


def _mat(m) -> list:
    return [_vec(row) for row in np.asarray(m)]


def _unvec(items) -> np.ndarray:
    if not isinstance(items, list):
        raise ValueError("expected a list of complex numbers")
    return np.array([decode_complex(z) for z in items], dtype=complex)


def _unmat(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ValueError("expected a nonempty list of rows")
    return np.stack([_unvec(r) for r in rows])


def _plain(x):
    """JSON-friendly copy of small metadata values."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _dims(obj) -> tuple[int, ...]:
    dims = obj["dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise ValueError("dims must be a list of integers")
    return tuple(dims)


# ---------------------------------------------------------------- objects

def encode(obj) -> dict:
    if isinstance(obj, PureState):
        return {"dims": list(obj.dims), "amplitudes": _vec(obj.amplitudes)}
    if isinstance(obj, DensityMatrix):
        return {"dims": list(obj.dims), "matrix": _mat(obj.matrix)}
    if isinstance(obj, Subspace):
        out = {"dims": list(obj.dims), "basis": [_vec(p.amplitudes) for p in obj.basis]}
        if obj.provenance:
            out["provenance"] = list(obj.provenance)
        return out
    if isinstance(obj, ExactSubspace):
        out = {"dims": list(obj.dims), "exact": True,
               "vectors": [[encode_exact(x) for x in row] for row in obj.vectors]}
        if obj.sibling_of is not None:
            out["sibling_of"] = obj.sibling_of
            out["equivalent"] = _plain(obj.equivalent)
        if obj.provenance:
            out["provenance"] = list(obj.provenance)
        return out
    if isinstance(obj, KrausChannel):
        return {"in_dim": obj.in_dim, "out_dim": obj.out_dim,
                "kraus": [_mat(k) for k in obj.kraus]}
    if isinstance(obj, Isometry):
        return {"in_dim": obj.in_dim, "out_dims": list(obj.out_dims), "matrix": _mat(obj.matrix)}
    if isinstance(obj, Certificate):
        out = {"cut": list(obj.cut.side_a), "mode": obj.mode, "verdict": obj.verdict,
               "lambda1": obj.lambda1, "restarts": obj.restarts, "groebner": obj.groebner,
               "spairs": obj.spairs, "span_sibling": obj.span_sibling}
        if obj.verdict == "product_found" and obj.witness is not None:
            out["witness"] = encode(obj.witness)
        return out
    if isinstance(obj, BoundReport):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def decode_state(obj) -> PureState | DensityMatrix:
    if "amplitudes" in obj:
        return PureState(_dims(obj), _unvec(obj["amplitudes"]))
    if "matrix" in obj:
        return DensityMatrix(_dims(obj), _unmat(obj["matrix"]))
    raise ValueError("state JSON needs 'amplitudes' or 'matrix'")


def decode_density(obj) -> DensityMatrix:
    state = decode_state(obj)
    return state.density() if isinstance(state, PureState) else state


def decode_subspace(obj) -> Subspace | ExactSubspace:
    dims = _dims(obj)
    if obj.get("exact"):
        rows = [[decode_exact(x) for x in row] for row in obj["vectors"]]
        arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, row in enumerate(rows):
            arr[i, :] = row
        return ExactSubspace(dims, arr, obj.get("sibling_of"), obj.get("equivalent", {}),
                             tuple(obj.get("provenance", ())))
    basis = obj["basis"]
    if not isinstance(basis, list) or not basis:
        raise ValueError("subspace JSON needs a nonempty 'basis'")
    cols = np.stack([_unvec(v) for v in basis], axis=1)
    return Subspace.from_columns(dims, cols, tuple(obj.get("provenance", ())))


def decode_channel(obj) -> KrausChannel:
    kraus = tuple(_unmat(k) for k in obj["kraus"])
    return KrausChannel(int(obj["in_dim"]), int(obj["out_dim"]), kraus)


def decode_isometry(obj) -> Isometry:
    return Isometry(int(obj["in_dim"]), tuple(obj["out_dims"]), _unmat(obj["matrix"]))


def dumps(payload) -> str:
    """Stable text form: insertion-ordered keys, two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"

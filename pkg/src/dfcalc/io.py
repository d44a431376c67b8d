"""JSON encoding of measures, tensors, functionals and fields.

Scalars are ``"p/q"`` strings (or integers) in exact mode and plain numbers
in float mode.  Tensor values are nested lists in row-major order; a flat
list of length ``d^n`` is accepted on input.
"""

import json
import os
import tempfile

import numpy as np

from .law import PolyFunctional
from .malliavin import RandomField
from .measure import FiniteMeasure, TensorFn
from .scalar import EXACT, FLOAT, format_scalar


class SchemaError(ValueError):
    pass


def _infer_mode(obj):
    if isinstance(obj, dict):
        return FLOAT if any(_infer_mode(v) == FLOAT for v in obj.values()) else EXACT
    if isinstance(obj, list):
        return FLOAT if any(_infer_mode(v) == FLOAT for v in obj) else EXACT
    return FLOAT if isinstance(obj, float) else EXACT


def _mode_of(data, payload):
    mode = data.get("mode")
    if mode is None:
        return _infer_mode(payload)
    if mode not in (EXACT, FLOAT):
        raise SchemaError(f"unknown mode {mode!r}")
    return mode


def _encode_values(arr, mode):
    arr = np.asarray(arr)
    if arr.ndim == 0:
        return format_scalar(arr[()], mode)
    return [_encode_values(a, mode) for a in arr]


def _decode_values(values, d, order):
    if order == 0:
        if isinstance(values, list):
            if len(values) != 1:
                raise SchemaError("order-0 tensor needs a single value")
            return values[0]
        return values
    arr = np.array(values, dtype=object)
    if arr.shape == (d**order,):
        arr = arr.reshape((d,) * order)
    if arr.shape != (d,) * order:
        raise SchemaError(f"values have shape {arr.shape}, expected {(d,) * order}")
    return arr


# measures


def measure_to_json(rho):
    return {"d": rho.d, "mode": rho.mode, "weights": [format_scalar(w, rho.mode) for w in rho.weights]}


def measure_from_json(data):
    try:
        weights = data["weights"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("measure needs 'weights'") from exc
    mode = _mode_of(data, weights)
    rho = FiniteMeasure(weights, mode)
    if "d" in data and int(data["d"]) != rho.d:
        raise SchemaError(f"'d' is {data['d']} but {rho.d} weights were given")
    return rho


# tensors


def tensor_to_json(f):
    return {"order": f.order, "d": f.d, "mode": f.mode, "values": _encode_values(f.values, f.mode)}


def tensor_from_json(data, mode=None):
    try:
        order, d, values = int(data["order"]), int(data["d"]), data["values"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("tensor needs 'order', 'd' and 'values'") from exc
    mode = mode or _mode_of(data, values)
    return TensorFn(_decode_values(values, d, order), d=d, mode=mode)


# functionals


def poly_to_json(F):
    terms = {str(m): _encode_values(np.asarray(F.term(m).values), F.mode) for m in F.degrees}
    return {"d": F.d, "mode": F.mode, "terms": terms}


def poly_from_json(data, mode=None):
    try:
        d, raw = int(data["d"]), data["terms"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("functional needs 'd' and 'terms'") from exc
    mode = mode or _mode_of(data, raw)
    terms = {}
    for key, values in raw.items():
        m = int(key)
        if m < 0:
            raise SchemaError("degrees must be nonnegative")
        terms[m] = TensorFn(_decode_values(values, d, m), d=d, mode=mode)
    return PolyFunctional(terms, d=d, mode=mode)


# fields


def field_to_json(H):
    terms = {str(n): _encode_values(t.values, H.mode) for n, t in H.terms.items()}
    return {"d": H.d, "mode": H.mode, "terms": terms}


def field_from_json(data, mode=None):
    try:
        d, raw = int(data["d"]), data["terms"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("field needs 'd' and 'terms'") from exc
    mode = mode or _mode_of(data, raw)
    terms = {int(k): TensorFn(_decode_values(v, d, int(k) + 1), d=d, mode=mode) for k, v in raw.items()}
    return RandomField(terms, d, mode)


# files


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

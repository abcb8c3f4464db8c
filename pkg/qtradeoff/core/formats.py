"""
JSON wire formats for matrices, states, POVMs and instruments.

    matrix      {"d": 2, "re": [[...], ...], "im": [[...], ...]}
    state       {"re": [...], "im": [...]}
    povm        {"effects": [matrix, ...]}
    instrument  {"kraus": [[matrix, ...], ...]}   one inner list per outcome

A measurement file for the optimizer holds exactly one of the lists
"observables" (Hermitian matrices), "povms" or "instruments".
"""
import numpy as np

from .qcore import (
    Instrument,
    Povm,
    PureState,
    ValidationError,
    luders_instrument,
    projective_instrument,
    spectral_decompose,
)

IMPLEMENTATIONS = ("luders", "projective", "file")
IDEMPOTENT_TOL = 1e-10


class FormatError(ValidationError):
    """A serialized object is malformed; `field` names the offending path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _real_rows(value, field: str, d: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise FormatError(field, "expected a list of numbers")
    if arr.shape != (d, d):
        raise FormatError(field, f"expected a {d}x{d} array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError(field, "non-finite entries")
    return arr


def _require(data, key: str, field: str):
    if not isinstance(data, dict):
        raise FormatError(field, f"expected an object, got {type(data).__name__}")
    if key not in data:
        raise FormatError(f"{field}.{key}" if field else key, "missing")
    return data[key]


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"d": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(data, field: str = "matrix") -> np.ndarray:
    d = _require(data, "d", field)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise FormatError(f"{field}.d", f"expected a positive integer, got {d!r}")
    re = _real_rows(_require(data, "re", field), f"{field}.re", d)
    im = _real_rows(data.get("im", np.zeros((d, d)).tolist()), f"{field}.im", d)
    return re + 1j * im


def state_to_json(psi: PureState) -> dict:
    return {"re": psi.amplitudes.real.tolist(), "im": psi.amplitudes.imag.tolist()}


def state_from_json(data, field: str = "state") -> PureState:
    try:
        re = np.asarray(_require(data, "re", field), dtype=float)
        im = np.asarray(data.get("im", [0.0] * len(re)), dtype=float)
    except (TypeError, ValueError):
        raise FormatError(field, "amplitudes must be lists of numbers")
    if re.ndim != 1 or re.shape != im.shape:
        raise FormatError(field, "re and im must be equal-length vectors")
    try:
        return PureState.from_vector(re + 1j * im)
    except ValidationError as e:
        raise FormatError(field, str(e))


def povm_to_json(povm: Povm) -> dict:
    return {"effects": [matrix_to_json(e) for e in povm.effects]}


def povm_from_json(data, field: str = "povm") -> Povm:
    effects = _require(data, "effects", field)
    if not isinstance(effects, list) or not effects:
        raise FormatError(f"{field}.effects", "expected a non-empty list")
    mats = [matrix_from_json(e, f"{field}.effects[{i}]") for i, e in enumerate(effects)]
    try:
        return Povm(tuple(mats))
    except ValidationError as e:
        raise FormatError(field, str(e))


def instrument_to_json(instrument: Instrument) -> dict:
    return {"kraus": [[matrix_to_json(k) for k in ops] for ops in instrument.kraus]}


def instrument_from_json(data, field: str = "instrument") -> Instrument:
    outcomes = _require(data, "kraus", field)
    if not isinstance(outcomes, list) or not outcomes:
        raise FormatError(f"{field}.kraus", "expected a non-empty list of outcomes")
    kraus = []
    for i, ops in enumerate(outcomes):
        if not isinstance(ops, list) or not ops:
            raise FormatError(f"{field}.kraus[{i}]", "expected a non-empty list of matrices")
        kraus.append(tuple(matrix_from_json(k, f"{field}.kraus[{i}][{j}]") for j, k in enumerate(ops)))
    try:
        return Instrument(tuple(kraus))
    except ValidationError as e:
        raise FormatError(field, str(e))


def _entries(data, key: str) -> list:
    entries = data[key]
    if not isinstance(entries, list) or not entries:
        raise FormatError(key, "expected a non-empty list")
    return entries


def _projective_from_povm(povm: Povm, field: str) -> Instrument:
    for i, e in enumerate(povm.effects):
        if np.max(np.abs(e @ e - e)) > IDEMPOTENT_TOL:
            raise FormatError(f"{field}.effects[{i}]", "a projective instrument needs projector effects")
    return Instrument(tuple((e,) for e in povm.effects))


def measurements_from_json(data, implementation: str = "luders") -> tuple:
    """
    Decodes a measurement file into instruments and their POVMs.

    Args:
        data (dict): Parsed JSON or YAML with one of the keys observables, povms, instruments.
        implementation (str, optional): "luders" or "projective" for observables and POVMs,
            "file" for explicit instruments. Defaults to "luders".

    Returns:
        tuple: (list of Instrument, list of Povm).

    Raises:
        FormatError: If the file is malformed; the message names the offending field.
    """
    if implementation not in IMPLEMENTATIONS:
        raise ValidationError(f"Unknown instrument '{implementation}'. Expected one of {', '.join(IMPLEMENTATIONS)}")
    if not isinstance(data, dict):
        raise FormatError("file", f"expected an object, got {type(data).__name__}")
    keys = [k for k in ("observables", "povms", "instruments") if k in data]
    if len(keys) != 1:
        raise FormatError("file", "expected exactly one of observables, povms, instruments")
    key = keys[0]
    if (key == "instruments") != (implementation == "file"):
        raise FormatError(key, "explicit instruments go with --instrument file, and only they do")

    if key == "instruments":
        instruments = [instrument_from_json(x, f"instruments[{i}]") for i, x in enumerate(_entries(data, key))]
    elif key == "observables":
        instruments = []
        for i, x in enumerate(_entries(data, key)):
            field = f"observables[{i}]"
            try:
                instruments.append(projective_instrument(spectral_decompose(matrix_from_json(x, field))))
            except FormatError:
                raise
            except ValidationError as e:
                raise FormatError(field, str(e))
    else:
        povms = [povm_from_json(x, f"povms[{i}]") for i, x in enumerate(_entries(data, key))]
        if implementation == "luders":
            instruments = [luders_instrument(p) for p in povms]
        else:
            instruments = [_projective_from_povm(p, f"povms[{i}]") for i, p in enumerate(povms)]
    return instruments, [inst.povm() for inst in instruments]

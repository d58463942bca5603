"""Named gate families, gate-set validation, and JSON file I/O.

A :class:`GateSet` is an ordered list of labelled unitaries together with
prior probabilities.  Constructors build the catalog families; validation
reports unitarity defects, pairs that coincide up to a global phase (such
pairs are statistically indistinguishable by any experiment), and prior
normalization.
"""

from __future__ import annotations

import io
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .numerics import DEFAULT_CONFIG, NumericConfig, as_matrix

__all__ = [
    "GateSet",
    "GateSetFormatError",
    "ValidationReport",
    "FAMILIES",
    "make_named_set",
    "validate_gate_set",
    "load_gate_set",
    "save_gate_set",
    "dumps_gate_set",
    "gate_set_to_jsonable",
]

# Two gates equal up to a global phase satisfy |tr(U^dag V)| = d exactly.
_DUPLICATE_TOL = 1e-9


class GateSetFormatError(ValueError):
    """Raised when a gate-set document violates the schema or its invariants."""


@dataclass
class GateSet:
    """Labelled unitaries with prior probabilities.

    labels: unique gate names, one per matrix.
    matrices: complex array of shape (n, d, d).
    priors: probability vector aligned with the gates (uniform by default).
    """

    labels: tuple
    matrices: np.ndarray
    priors: np.ndarray = None

    def __post_init__(self) -> None:
        self.labels = tuple(str(l) for l in self.labels)
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"matrices must have shape (n, d, d), got {mats.shape}")
        if not np.all(np.isfinite(mats.view(float))):
            raise ValueError("gate entries must be finite")
        self.matrices = mats
        n = mats.shape[0]
        if n < 2:
            raise ValueError(f"a gate set needs at least 2 gates, got {n}")
        if len(self.labels) != n:
            raise ValueError("one label per gate is required")
        if len(set(self.labels)) != n:
            raise ValueError("gate labels must be unique")
        if self.priors is None:
            self.priors = np.full(n, 1.0 / n)
        else:
            p = np.asarray(self.priors, dtype=float)
            if p.shape != (n,):
                raise ValueError(f"priors must have shape ({n},), got {p.shape}")
            if np.any(p < 0.0):
                raise ValueError("priors must be nonnegative")
            if abs(p.sum() - 1.0) > 1e-12:
                raise ValueError(f"priors must sum to 1 within 1e-12, got {p.sum()!r}")
            self.priors = p

    @property
    def dimension(self) -> int:
        return self.matrices.shape[1]

    @property
    def size(self) -> int:
        return self.matrices.shape[0]

    def gates(self) -> Iterator[tuple]:
        return zip(self.labels, self.matrices)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no gate labelled {label!r}") from None

    def uniform_priors(self) -> bool:
        return bool(np.allclose(self.priors, 1.0 / self.size, atol=1e-12, rtol=0.0))


def _shift_matrix(d: int) -> np.ndarray:
    s = np.zeros((d, d), dtype=complex)
    for k in range(d):
        s[(k + 1) % d, k] = 1.0
    return s


def _multiply_matrix(d: int) -> np.ndarray:
    # phases exp(2 pi i k / d) with 1-based k, so the d-th entry is 1
    return np.diag(np.exp(2j * np.pi * (np.arange(d) + 1) / d))


def _phase_point_set(K: int, d: int) -> tuple:
    omega = np.exp(2j * np.pi / K)
    mats, labels = [], []
    for x in range(1, K + 1):
        u = np.eye(d, dtype=complex)
        u[1, 1] = omega**x
        mats.append(u)
        labels.append(f"phase{x}")
    return labels, mats


def _clock_set(d: int, K: int) -> tuple:
    omega = np.exp(2j * np.pi / K)
    mats = [np.diag(omega ** (x * np.arange(d))) for x in range(K)]
    labels = [f"clock{x}" for x in range(K)]
    return labels, mats


def _shift_multiply_set(d: int) -> tuple:
    s, m = _shift_matrix(d), _multiply_matrix(d)
    mats, labels = [], []
    for p in range(d):
        for q in range(d):
            mats.append(np.linalg.matrix_power(s, p) @ np.linalg.matrix_power(m, q))
            labels.append(f"S{p}M{q}")
    return labels, mats


def _permutation_set(d: int) -> tuple:
    mats, labels = [], []
    for perm in itertools.permutations(range(d)):
        u = np.zeros((d, d), dtype=complex)
        for k in range(d):
            u[perm[k], k] = 1.0
        mats.append(u)
        labels.append("perm" + "".join(str(i) for i in perm))
    return labels, mats


def _grover_set(d: int) -> tuple:
    mats, labels = [], []
    for x in range(d):
        u = np.eye(d, dtype=complex)
        u[x, x] = -1.0
        mats.append(u)
        labels.append(f"mark{x + 1}")
    return labels, mats


def _hadamard_xrot_set(K: int) -> tuple:
    # One Hadamard plus K rotations cos(2 pi k/K) I + i sin(2 pi k/K) X.
    # K must be odd: for even K the rotations at k and k + K/2 differ only by
    # a global sign and would be statistically indistinguishable.
    if K % 2 == 0:
        raise ValueError("hadamard_xrot requires odd K (even K duplicates gates up to phase)")
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    mats, labels = [h], ["H"]
    for k in range(1, K + 1):
        a = 2.0 * np.pi * k / K
        mats.append(math.cos(a) * np.eye(2, dtype=complex) + 1j * math.sin(a) * x)
        labels.append(f"xrot{k}")
    return labels, mats


FAMILIES = {
    "phase_point": "K >= 2 diagonal phase gates on one basis state (params K, d)",
    "clock": "K commuting clock gates diag(w^(x y)) (params d, K)",
    "shift_multiply": "all d^2 shift-and-multiply gates S^p M^q (param d)",
    "permutation": "all d! permutation matrices, d <= 6 (param d)",
    "grover": "d reflections I - 2|x><x| (param d)",
    "pauli": "shift_multiply with d = 2; the Pauli set up to phases (no params)",
    "hadamard_xrot": "Hadamard plus K X-axis rotations, odd K (param K)",
}


def make_named_set(family: str, d: int = None, K: int = None, priors=None) -> GateSet:
    """Build one of the catalog families.  Priors are uniform unless given.

    grover(2) is constructed but its two gates coincide up to a global sign,
    so validation flags them and independence fails downstream.
    """
    if family == "phase_point":
        if K is None or d is None or K < 2 or d < 2:
            raise ValueError("phase_point requires K >= 2 and d >= 2")
        labels, mats = _phase_point_set(K, d)
    elif family == "clock":
        if K is None or d is None or K < 2 or d < 2:
            raise ValueError("clock requires d >= 2 and K >= 2")
        labels, mats = _clock_set(d, K)
    elif family == "shift_multiply":
        if d is None or d < 2:
            raise ValueError("shift_multiply requires d >= 2")
        labels, mats = _shift_multiply_set(d)
    elif family == "permutation":
        if d is None or not 2 <= d <= 6:
            raise ValueError("permutation requires 2 <= d <= 6 (full S_d enumeration)")
        labels, mats = _permutation_set(d)
    elif family == "grover":
        if d is None or d < 2:
            raise ValueError("grover requires d >= 2")
        labels, mats = _grover_set(d)
    elif family == "pauli":
        labels, mats = _shift_multiply_set(2)
    elif family == "hadamard_xrot":
        if K is None or K < 3:
            raise ValueError("hadamard_xrot requires odd K >= 3")
        labels, mats = _hadamard_xrot_set(K)
    else:
        raise ValueError(f"unknown family {family!r}; known: {sorted(FAMILIES)}")
    return GateSet(tuple(labels), np.stack(mats), priors)


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_gate_set`; failures are carried, not raised."""

    unitarity_residuals: dict
    duplicate_pairs: list
    prior_sum: float
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_jsonable(self) -> dict:
        return {
            "ok": self.ok,
            "unitarity_residuals": {k: float(v) for k, v in self.unitarity_residuals.items()},
            "duplicate_pairs": [list(p) for p in self.duplicate_pairs],
            "prior_sum": float(self.prior_sum),
            "flags": list(self.flags),
        }


def validate_gate_set(g: GateSet, cfg: NumericConfig = DEFAULT_CONFIG) -> ValidationReport:
    """Report unitarity residuals, phase-duplicate pairs, and prior normalization."""
    d = g.dimension
    eye = np.eye(d)
    residuals, flags, duplicates = {}, [], []
    for label, u in g.gates():
        r = float(np.linalg.norm(u.conj().T @ u - eye))
        residuals[label] = r
        if r > cfg.unitarity_tol:
            flags.append(f"gate {label!r} is not unitary (residual {r:.3e})")
    for i in range(g.size):
        for j in range(i + 1, g.size):
            overlap = abs(np.vdot(g.matrices[i], g.matrices[j])) / d
            if overlap >= 1.0 - _DUPLICATE_TOL:
                pair = (g.labels[i], g.labels[j])
                duplicates.append(pair)
                flags.append(
                    f"gates {pair[0]!r} and {pair[1]!r} are equal up to a global phase"
                )
    prior_sum = float(g.priors.sum())
    if abs(prior_sum - 1.0) > 1e-12:
        flags.append(f"priors sum to {prior_sum!r}, not 1")
    return ValidationReport(residuals, duplicates, prior_sum, flags)


# -- JSON schema ---------------------------------------------------------
#
# {"dimension": d,
#  "gates": [{"label": str, "matrix": [[[re, im], ...], ...]}, ...],
#  "priors": [p, ...]}            # optional, default uniform
#
# Matrices are row-major; every float is written with 17 significant digits,
# which round-trips IEEE doubles bit-exactly.


def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def gate_set_to_jsonable(g: GateSet) -> dict:
    doc = {
        "dimension": g.dimension,
        "gates": [
            {"label": label, "matrix": _matrix_to_pairs(u)} for label, u in g.gates()
        ],
        "priors": [float(p) for p in g.priors],
    }
    return doc


def _emit(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(k))
            out.append(": ")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format(float(obj), ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_gate_set(g: GateSet) -> str:
    parts: list = []
    _emit(gate_set_to_jsonable(g), parts)
    return "".join(parts) + "\n"


def save_gate_set(g: GateSet, destination) -> None:
    text = dumps_gate_set(g)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as f:
            f.write(text)


def _parse_matrix(entry, d: int, label: str) -> np.ndarray:
    rows = entry
    if not isinstance(rows, list) or len(rows) != d:
        raise GateSetFormatError(f"gate {label!r}: matrix must have {d} rows")
    m = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise GateSetFormatError(f"gate {label!r}: row {i} must have {d} entries")
        for j, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)
            ):
                raise GateSetFormatError(
                    f"gate {label!r}: entry ({i},{j}) must be a [re, im] pair"
                )
            m[i, j] = complex(pair[0], pair[1])
    return m


def load_gate_set(source, cfg: NumericConfig = DEFAULT_CONFIG) -> GateSet:
    """Parse and validate a gate-set JSON document from a path, stream, or str."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str, os.PathLike)) and not str(source).lstrip().startswith("{"):
        with open(source, "r", encoding="utf-8") as f:
            text = f.read()
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GateSetFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GateSetFormatError("top-level document must be an object")
    if "dimension" not in doc:
        raise GateSetFormatError('missing required key "dimension"')
    d = doc["dimension"]
    if not isinstance(d, int) or d < 2:
        raise GateSetFormatError(f'"dimension" must be an integer >= 2, got {d!r}')
    gates = doc.get("gates")
    if not isinstance(gates, list) or len(gates) < 2:
        raise GateSetFormatError('"gates" must be a list of at least 2 entries')
    labels, mats = [], []
    for entry in gates:
        if not isinstance(entry, dict) or "label" not in entry or "matrix" not in entry:
            raise GateSetFormatError('each gate needs "label" and "matrix" keys')
        labels.append(str(entry["label"]))
        mats.append(_parse_matrix(entry["matrix"], d, entry["label"]))
    priors = doc.get("priors")
    if priors is not None:
        if not isinstance(priors, list) or not all(
            isinstance(p, (int, float)) for p in priors
        ):
            raise GateSetFormatError('"priors" must be a list of numbers')
    try:
        g = GateSet(tuple(labels), np.stack(mats), priors)
    except ValueError as exc:
        raise GateSetFormatError(str(exc)) from exc
    report = validate_gate_set(g, cfg)
    if not report.ok:
        raise GateSetFormatError("invalid gate set: " + "; ".join(report.flags))
    return g

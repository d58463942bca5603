"""Group structure detection, t-design verification, and representation counting.

Covers four jobs:

* detecting whether a gate set closes under multiplication (up to phase) and
  extracting its multiplication table,
* verifying the twirl identity that defines a generalized t-design against a
  finite reference group or the analytic single-copy Haar average,
* Young-diagram hook arithmetic for the irreps of N-fold tensor powers of the
  full unitary group (exact integers),
* character-orthogonality multiplicity counting for finite (projective)
  group representations.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .gatesets import GateSet
from .numerics import DEFAULT_CONFIG, DimensionCapError, NumericConfig, choi_vector

__all__ = [
    "ClosureError",
    "GroupTable",
    "closure_table",
    "DesignCheckResult",
    "design_check",
    "IrrepRecord",
    "YoungDecomposition",
    "young_decomposition",
    "MultiplicityResult",
    "multiplicity_by_characters",
    "cyclic_characters",
    "abelian_characters",
    "load_character_table",
    "min_extra_block_size",
    "commutes_pairwise",
]

_MATCH_TOL = 1e-8
_DESIGN_TOL = 1e-8


class ClosureError(ValueError):
    """A product of two gates leaves the set; carries the witness pair."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class GroupTable:
    """Multiplication table on gate indices.

    table[i, j] is the index of the product gate_i * gate_j (up to phase when
    the set only closes projectively).  Checked on construction: every row and
    column is a permutation, the table is associative, and an identity exists.
    """

    table: np.ndarray
    identity_index: int
    projective: bool

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=int)
        n = t.shape[0]
        if t.shape != (n, n):
            raise ValueError(f"table must be square, got {t.shape}")
        self.table = t
        ar = np.arange(n)
        for i in range(n):
            if set(t[i]) != set(range(n)) or set(t[:, i]) != set(range(n)):
                raise ValueError(f"row/column {i} is not a permutation")
        e = self.identity_index
        if not (np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)):
            raise ValueError(f"index {e} is not an identity for the table")
        # associativity, chunked over the last index to bound memory
        for k in range(n):
            left = t[t, k]          # (i*j)*k
            right = t[:, t[:, k]]   # i*(j*k)
            if not np.array_equal(left, right):
                raise ValueError("table is not associative")

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def inverse_index(self, i: int) -> int:
        return int(np.nonzero(self.table[i] == self.identity_index)[0][0])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))


def closure_table(
    g: GateSet, up_to_phase: bool = True, cfg: NumericConfig = DEFAULT_CONFIG
) -> GroupTable:
    """Match every product U_x U_y to a set member, or fail with a witness pair.

    With ``up_to_phase`` the match only requires U_x U_y = exp(i phi) U_z; the
    ``projective`` flag on the result records whether any nontrivial phase
    occurred.  Raises :class:`ClosureError` on the first unmatched product.
    """
    n, d = g.size, g.dimension
    choi = np.stack([choi_vector(u) for u in g.matrices])  # (n, d*d)
    table = np.zeros((n, n), dtype=int)
    projective = False
    for x in range(n):
        products = np.einsum("ab,ybc->yac", g.matrices[x], g.matrices)
        overlaps = products.reshape(n, d * d) @ choi.conj().T / d  # (y, z)
        mags = np.abs(overlaps)
        best = np.argmax(mags, axis=1)
        for y in range(n):
            z = best[y]
            o = overlaps[y, z]
            if up_to_phase:
                matched = mags[y, z] >= 1.0 - _MATCH_TOL
            else:
                matched = abs(o - 1.0) <= _MATCH_TOL
            if not matched:
                raise ClosureError(
                    f"product of {g.labels[x]!r} and {g.labels[y]!r} is not in the set",
                    witness=(g.labels[x], g.labels[y]),
                )
            if abs(np.angle(o)) > _MATCH_TOL:
                projective = True
            table[x, y] = z
    ar = np.arange(n)
    identity = None
    for e in range(n):
        if np.array_equal(table[e], ar) and np.array_equal(table[:, e], ar):
            identity = e
            break
    if identity is None:
        raise ClosureError("no identity element found in the matched table")
    return GroupTable(table, identity, projective)


def commutes_pairwise(g: GateSet, tol: float = 1e-12) -> bool:
    """True when every pair of gates commutes within Frobenius tolerance."""
    for i in range(g.size):
        for j in range(i + 1, g.size):
            a, b = g.matrices[i], g.matrices[j]
            if np.linalg.norm(a @ b - b @ a) > tol:
                return False
    return True


@dataclass
class DesignCheckResult:
    t: int
    residual: float
    verdict: bool
    tolerance: float = _DESIGN_TOL

    def to_jsonable(self) -> dict:
        return {
            "t": self.t,
            "residual": float(self.residual),
            "verdict": bool(self.verdict),
            "tolerance": self.tolerance,
        }


def _twirl_average(matrices, weights, t: int, cap: int) -> np.ndarray:
    d2 = matrices[0].shape[0] ** 2
    if d2**t > cap:
        raise DimensionCapError(f"twirl dimension {d2}^{t} exceeds cap {cap}")
    total = None
    for w, u in zip(weights, matrices):
        block = np.kron(u, u.conj())
        term = block
        for _ in range(t - 1):
            term = np.kron(term, block)
        total = w * term if total is None else total + w * term
    return total


def design_check(
    g: GateSet, reference, t: int, cfg: NumericConfig = DEFAULT_CONFIG
) -> DesignCheckResult:
    """Frobenius residual between the weighted t-fold twirl of ``g`` and a reference.

    ``reference`` is a :class:`GateSet` averaged uniformly (a finite group), or
    None for the analytic single-copy Haar average (t must be 1), which is the
    rank-one projector onto the normalized identity Choi direction.
    """
    if t < 1:
        raise ValueError(f"design order t must be >= 1, got {t}")
    d = g.dimension
    lhs = _twirl_average(g.matrices, g.priors, t, cfg.dim_cap)
    if reference is None:
        if t != 1:
            raise ValueError("the analytic Haar reference is available only at t = 1")
        ident = choi_vector(np.eye(d))
        rhs = np.outer(ident, ident.conj()) / d
    else:
        if reference.dimension != d:
            raise ValueError("reference gate set must act on the same dimension")
        w = np.full(reference.size, 1.0 / reference.size)
        rhs = _twirl_average(reference.matrices, w, t, cfg.dim_cap)
    residual = float(np.linalg.norm(lhs - rhs))
    return DesignCheckResult(t, residual, residual <= _DESIGN_TOL)


# -- Young diagrams and hook lengths --------------------------------------


def _partitions(n: int, max_rows: int, max_part: int = None) -> Iterator[tuple]:
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    if max_rows == 0:
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, max_rows - 1, first):
            yield (first,) + rest


def _conjugate(partition: Sequence[int]) -> tuple:
    if not partition:
        return ()
    return tuple(sum(1 for row in partition if row > col) for col in range(partition[0]))


def _hook_lengths(partition: Sequence[int]) -> list:
    conj = _conjugate(partition)
    hooks = []
    for i, row_len in enumerate(partition, start=1):
        for j in range(1, row_len + 1):
            hooks.append(row_len - j + conj[j - 1] - i + 1)
    return hooks


def _unitary_dim(partition: Sequence[int], d: int) -> int:
    num = 1
    for i, row_len in enumerate(partition, start=1):
        for j in range(1, row_len + 1):
            num *= d + j - i
    den = math.prod(_hook_lengths(partition))
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"hook product does not divide content product for {partition}")
    return q


def _symmetric_mult(partition: Sequence[int]) -> int:
    n = sum(partition)
    den = math.prod(_hook_lengths(partition))
    q, r = divmod(math.factorial(n), den)
    if r:
        raise ArithmeticError(f"hook product does not divide {n}! for {partition}")
    return q


@dataclass
class IrrepRecord:
    """One irreducible block: identifier, dimension d_mu, multiplicity m_mu."""

    id: object
    dim: int
    mult: int


@dataclass
class YoungDecomposition:
    records: list
    ancilla_bound: int


def young_decomposition(N: int, d: int) -> YoungDecomposition:
    """Irreps of the N-fold tensor power of the defining U(d) representation.

    Enumerates partitions of N with at most d rows; dimensions and symmetric
    multiplicities come from the hook-length products in exact integer
    arithmetic.  The ancilla bound is max over blocks of ceil(dim/mult).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > 12:
        raise ValueError(f"partition enumeration is bounded at N <= 12, got {N}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    records = []
    bound = 0
    for part in sorted(_partitions(N, d), reverse=True):
        dim = _unitary_dim(part, d)
        mult = _symmetric_mult(part)
        records.append(IrrepRecord(part, dim, mult))
        bound = max(bound, -(-dim // mult))
    return YoungDecomposition(records, bound)


def min_extra_block_size(d: int, d_A: int, l_cap: int = 64) -> tuple:
    """Smallest M = d*l whose d-row rectangular diagram has multiplicity >= d_A.

    Returns (M, l, multiplicity), all exact integers.  Raises ValueError when
    no l <= l_cap suffices.
    """
    if d < 2 or d_A < 1:
        raise ValueError("requires d >= 2 and d_A >= 1")
    for l in range(1, l_cap + 1):
        mult = _symmetric_mult((l,) * d)
        if mult >= d_A:
            return (d * l, l, mult)
    raise ValueError(f"no rectangular diagram with l <= {l_cap} reaches multiplicity {d_A}")


# -- character multiplicities ----------------------------------------------


@dataclass
class MultiplicityResult:
    """Value of the character-orthogonality multiplicity sum, with sanity data.

    ``consistent`` is False when the value has a significant imaginary part or
    is not within 1e-6 of an integer; inconsistent values are never rounded.
    """

    value: float
    imag_part: float
    nearest_integer: int
    distance: float

    @property
    def consistent(self) -> bool:
        return abs(self.imag_part) <= 1e-9 and self.distance <= 1e-6


def multiplicity_by_characters(g: GateSet, character, N: int) -> MultiplicityResult:
    """Multiplicity of the irrep with the given character in the N-fold tensor power.

    Evaluates (1/|G|) sum_g conj(chi(g)) trace(U_g)^N over the gate set, which
    must form a (projective) representation with phase conventions matching
    the supplied character values (aligned with gate order).
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    chi = np.asarray(
        [character[i] for i in range(g.size)]
        if not isinstance(character, (list, tuple, np.ndarray))
        else character,
        dtype=complex,
    )
    if chi.shape != (g.size,):
        raise ValueError(f"character must supply one value per gate ({g.size})")
    traces = np.einsum("gii->g", g.matrices)
    total = np.sum(np.conj(chi) * traces**N) / g.size
    nearest = int(round(total.real))
    return MultiplicityResult(
        float(total.real),
        float(total.imag),
        nearest,
        abs(total.real - nearest),
    )


def cyclic_characters(order: int) -> list:
    """DFT characters chi_k(x) = exp(2 pi i k x / order) of the cyclic group.

    Element index is taken as the exponent of the generator (the convention
    used by the clock family).
    """
    omega = np.exp(2j * np.pi / order)
    return [omega ** (k * np.arange(order)) for k in range(order)]


def abelian_characters(table: GroupTable, seed: int = 0) -> list:
    """All characters of an abelian group table, by simultaneously diagonalizing
    its regular representation.  Deterministic for a fixed seed; characters are
    sorted by their phase vectors."""
    if not table.is_abelian():
        raise ValueError("character auto-generation requires an abelian table")
    n = table.order
    perms = np.zeros((n, n, n))
    for a in range(n):
        perms[a, table.table[a], np.arange(n)] = 1.0
    rng = np.random.default_rng(seed)
    for _ in range(4):
        # a generic complex combination of the commuting regular-representation
        # permutations is normal with distinct eigenvalues, so its eigenvectors
        # are the common eigenvectors carrying the characters
        coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        _, vecs = np.linalg.eig(np.einsum("g,gij->ij", coeffs, perms + 0j))
        chars = []
        ok = True
        for v in vecs.T:
            v = v / np.linalg.norm(v)
            chi = np.einsum("i,gij,j->g", v.conj(), perms, v)
            if np.max(np.abs(np.abs(chi) - 1.0)) > 1e-8:
                ok = False  # degenerate draw; eigenvectors mixed two characters
                break
            chars.append(chi / np.abs(chi))
        if ok:
            keys = [tuple(np.round(np.angle(c), 9)) for c in chars]
            return [c for _, c in sorted(zip(keys, chars), key=lambda kv: kv[0])]
    raise RuntimeError("failed to split the regular representation into characters")


def load_character_table(source) -> list:
    """Load ``{"group_order": n, "characters": [{"id", "values": [[re, im], ...]}]}``.

    Returns a list of (id, complex value array) pairs aligned with gate order.
    """
    if hasattr(source, "read"):
        doc = json.load(source)
    elif isinstance(source, (str, os.PathLike)) and not str(source).lstrip().startswith("{"):
        with open(source, "r", encoding="utf-8") as f:
            doc = json.load(f)
    else:
        doc = json.loads(str(source))
    n = doc.get("group_order")
    if not isinstance(n, int) or n < 1:
        raise ValueError('"group_order" must be a positive integer')
    out = []
    for entry in doc.get("characters", []):
        values = entry.get("values")
        if not isinstance(values, list) or len(values) != n:
            raise ValueError(f'character {entry.get("id")!r} must have {n} values')
        out.append(
            (str(entry.get("id")), np.array([complex(re, im) for re, im in values]))
        )
    return out

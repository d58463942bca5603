"""Core discrimination engine.

Span-dimension tests for unambiguous identifiability, the optimal success
probability via the inverse of the weighted Choi frame operator on its
support, square-root and dual-basis POVM constructions, and strategy
evaluation and sampling.

Only parallel strategies are materialized: whenever unambiguous or error-free
identification is possible at all with N queries, it is possible with the N
queries applied in parallel, so nothing is lost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gatesets import GateSet
from .numerics import (
    DEFAULT_CONFIG,
    DimensionCapError,
    NumericConfig,
    choi_vector,
    numeric_rank,
    psd_inverse_sqrt,
    tensor_power,
)

__all__ = [
    "INCONCLUSIVE",
    "Povm",
    "Strategy",
    "EvalResult",
    "SimulationResult",
    "InfeasibleError",
    "span_dimension",
    "classify_discriminability",
    "min_queries_unambiguous",
    "pmax",
    "design_pmax",
    "output_states",
    "max_entangled_input",
    "pgm_povm",
    "unambiguous_povm",
    "perfect_strategy",
    "evaluate_strategy",
    "simulate_strategy",
    "povm_to_jsonable",
    "strategy_to_jsonable",
    "eval_result_to_jsonable",
]

INCONCLUSIVE = "INCONCLUSIVE"


class InfeasibleError(ValueError):
    """The requested construction is impossible at the given resources."""


@dataclass
class Povm:
    """Measurement: a list of (label, positive operator) outcome pairs.

    Labels are gate labels plus optionally the INCONCLUSIVE sentinel.  The
    operators must be Hermitian PSD and sum to the identity; :meth:`check`
    verifies both within tolerance.
    """

    outcomes: list

    @property
    def dimension(self) -> int:
        return self.outcomes[0][1].shape[0]

    @property
    def labels(self) -> list:
        return [label for label, _ in self.outcomes]

    def operator(self, label: str) -> np.ndarray:
        for l, op in self.outcomes:
            if l == label:
                return op
        raise KeyError(f"no outcome labelled {label!r}")

    def check(self, cfg: NumericConfig = DEFAULT_CONFIG) -> None:
        dim = self.dimension
        total = np.zeros((dim, dim), dtype=complex)
        for label, op in self.outcomes:
            if op.shape != (dim, dim):
                raise ValueError(f"outcome {label!r} has shape {op.shape}, expected {(dim, dim)}")
            if np.linalg.norm(op - op.conj().T) > 1e-9 * max(1.0, np.linalg.norm(op)):
                raise ValueError(f"outcome {label!r} is not Hermitian")
            w = np.linalg.eigvalsh((op + op.conj().T) / 2)
            if w.min() < -max(cfg.psd_tol, 1e-9):
                raise ValueError(f"outcome {label!r} has negative eigenvalue {w.min():.3e}")
            total += op
        defect = np.linalg.norm(total - np.eye(dim))
        if defect > 1e-8:
            raise ValueError(f"outcomes do not sum to the identity (defect {defect:.3e})")


@dataclass
class Strategy:
    """Parallel strategy: N queries on a joint input state, then a POVM.

    The input lives on (system)^N x ancilla, so its length is d^N * ancilla_dim
    and the POVM acts on the same space.
    """

    queries: int
    ancilla_dim: int
    input: np.ndarray
    povm: Povm
    kind: str = "parallel"

    def __post_init__(self) -> None:
        self.input = np.asarray(self.input, dtype=complex).reshape(-1)
        norm = np.linalg.norm(self.input)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"strategy input must be a unit vector, norm {norm!r}")
        if self.povm.dimension != self.input.shape[0]:
            raise ValueError("POVM dimension does not match the input vector")


def _choi_power_matrix(g: GateSet, N: int, cfg: NumericConfig) -> np.ndarray:
    """Rows are the Choi vectors of the N-th tensor powers (via Kronecker powers
    of the single-gate Choi vectors, which is the same frame up to a fixed
    reordering of tensor factors, so Gram-based quantities are unaffected)."""
    d2 = g.dimension**2
    if d2**N > cfg.dim_cap:
        raise DimensionCapError(
            f"joint Choi dimension {d2}^{N} = {d2 ** N} exceeds cap {cfg.dim_cap}"
        )
    base = np.stack([choi_vector(u) for u in g.matrices])
    out = base
    for _ in range(N - 1):
        out = np.einsum("xa,xb->xab", out, base).reshape(g.size, -1)
    return out


def _grouped_choi_matrix(g: GateSet, N: int, cfg: NumericConfig) -> np.ndarray:
    """Rows are vec(U_x^(x)N) with all system factors before all reference
    factors, the arrangement ``output_states`` expects for its input block."""
    d2 = g.dimension**2
    if d2**N > cfg.dim_cap:
        raise DimensionCapError(
            f"joint Choi dimension {d2}^{N} = {d2 ** N} exceeds cap {cfg.dim_cap}"
        )
    return np.stack([choi_vector(tensor_power(u, N, cfg)) for u in g.matrices])


def span_dimension(g: GateSet, N: int, cfg: NumericConfig = DEFAULT_CONFIG) -> int:
    """Number of linearly independent gates among the N-th tensor powers."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return numeric_rank(_choi_power_matrix(g, N, cfg), cfg)


def classify_discriminability(
    g: GateSet, N: int, cfg: NumericConfig = DEFAULT_CONFIG
) -> tuple:
    """(unambiguous?, error-free labels) at N queries.

    Unambiguous identification is possible iff all tensor powers are linearly
    independent; a single gate is detectable error-free iff its tensor power
    lies outside the span of the others (the rank drops when it is removed).
    """
    vectors = _choi_power_matrix(g, N, cfg)
    full_rank = numeric_rank(vectors, cfg)
    unambiguous = full_rank == g.size
    error_free = set()
    for x in range(g.size):
        others = np.delete(vectors, x, axis=0)
        if numeric_rank(others, cfg) < full_rank:
            error_free.add(g.labels[x])
    return unambiguous, error_free


def min_queries_unambiguous(g: GateSet, cfg: NumericConfig = DEFAULT_CONFIG) -> int:
    """Smallest N at which all N-th tensor powers become linearly independent.

    The search is capped at |U| - dim(U) + 1 queries, where success is
    guaranteed because the span grows by at least one per extra query.
    """
    promise = g.size - span_dimension(g, 1, cfg) + 1
    for N in range(1, promise + 1):
        try:
            if span_dimension(g, N, cfg) == g.size:
                return N
        except DimensionCapError as exc:
            raise DimensionCapError(
                f"{exc}; independence is guaranteed by N = {promise} "
                "but the dimension cap was reached first"
            ) from exc
    raise InfeasibleError(
        f"no N <= {promise} reached full span; there is a duplicate-up-to-phase pair"
    )


def pmax(g: GateSet, N: int, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    """Maximum probability of correct identification with N queries.

    Equal to max_x p_x <<U_x|^N R^-1 |U_x>>^N with R the prior-weighted sum of
    N-fold Choi projectors and R^-1 its inverse on the support.  Implemented
    through an SVD of the weighted Choi frame, which is the same spectral
    cutoff convention used for rank decisions.  Always in [max_x p_x, 1].
    """
    vectors = _choi_power_matrix(g, N, cfg)
    weighted = vectors.T * np.sqrt(g.priors)
    u, s, _ = np.linalg.svd(weighted, full_matrices=False)
    keep = s > cfg.rank_tol * s[0]
    basis = u[:, keep]
    inv_s = 1.0 / s[keep]
    coords = (basis.conj().T @ vectors.T) * inv_s[:, None]
    values = np.sum(np.abs(coords) ** 2, axis=0)
    return float(np.max(g.priors * values))


def design_pmax(
    g: GateSet,
    N: int,
    cfg: NumericConfig = DEFAULT_CONFIG,
    allow_nonuniform: bool = False,
) -> float:
    """Success probability dim(span of tensor powers) / |U| for design gate sets.

    Valid when the ensemble is a generalized t-design with t >= N (group
    representations with uniform priors qualify for every t).  Nonuniform
    priors are rejected unless ``allow_nonuniform``, in which case the general
    form dim * max_x p_x is returned.
    """
    dim = span_dimension(g, N, cfg)
    if not g.uniform_priors():
        if not allow_nonuniform:
            raise ValueError(
                "design_pmax requires uniform priors (pass allow_nonuniform=True "
                "for the general dim * max prior form)"
            )
        return float(dim * np.max(g.priors))
    return dim / g.size


def output_states(
    g: GateSet, N: int, input_vector, ancilla_dim: int, cfg: NumericConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Joint output states (U_x^(x)N tensor I_A) |input>, one row per gate."""
    if ancilla_dim < 1:
        raise ValueError("ancilla_dim must be >= 1")
    psi = np.asarray(input_vector, dtype=complex).reshape(-1)
    dn = g.dimension**N
    if psi.shape[0] != dn * ancilla_dim:
        raise ValueError(
            f"input length {psi.shape[0]} != d^N * ancilla_dim = {dn * ancilla_dim}"
        )
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("input must be a unit vector")
    block = psi.reshape(dn, ancilla_dim)
    outs = np.empty((g.size, dn * ancilla_dim), dtype=complex)
    for x in range(g.size):
        power = tensor_power(g.matrices[x], N, cfg)
        outs[x] = (power @ block).reshape(-1)
    return outs


def max_entangled_input(d: int, N: int) -> np.ndarray:
    """Tensor power of the maximally entangled pair, arranged as
    (system)^N x (reference)^N so it feeds ``output_states`` with ancilla d^N."""
    phi = choi_vector(np.eye(d)) / np.sqrt(d)
    out = phi.reshape(d, d)
    for _ in range(N - 1):
        out = np.einsum("ab,cd->acbd", out, phi.reshape(d, d)).reshape(
            out.shape[0] * d, out.shape[1] * d
        )
    return out.reshape(-1)


def pgm_povm(states, priors, labels=None, cfg: NumericConfig = DEFAULT_CONFIG) -> Povm:
    """Square-root measurement for the given pure states and priors.

    P_x = p_x rho^{-1/2} |s_x><s_x| rho^{-1/2} with rho the prior-weighted
    state mixture; the inconclusive element is the projector onto the
    orthocomplement of the span, so completeness always holds.
    """
    mat = np.asarray(states, dtype=complex)
    p = np.asarray(priors, dtype=float)
    n, dim = mat.shape
    if labels is None:
        labels = [str(i) for i in range(n)]
    rho = (mat.T * p) @ mat.conj()
    _, inv_sqrt, _ = psd_inverse_sqrt(rho, cfg)
    outcomes = []
    total = np.zeros((dim, dim), dtype=complex)
    for x in range(n):
        v = inv_sqrt @ mat[x]
        op = p[x] * np.outer(v, v.conj())
        op = (op + op.conj().T) / 2
        outcomes.append((labels[x], op))
        total += op
    inconclusive = np.eye(dim) - total
    outcomes.append((INCONCLUSIVE, (inconclusive + inconclusive.conj().T) / 2))
    return Povm(outcomes)


def unambiguous_povm(
    states, cfg: NumericConfig = DEFAULT_CONFIG, labels=None
) -> Povm:
    """Dual-basis POVM with zero cross-detection probability.

    Builds the dual family <dual_x|s_y> = delta_xy on the span and scales all
    conclusive elements by the single constant 1/lambda_max(sum of dual
    projectors), so the inconclusive element stays PSD.  Requires linearly
    independent states.
    """
    mat = np.asarray(states, dtype=complex)
    n, dim = mat.shape
    if numeric_rank(mat, cfg) < n:
        raise InfeasibleError("states are linearly dependent; no unambiguous POVM exists")
    if labels is None:
        labels = [str(i) for i in range(n)]
    s = mat.T  # columns are states
    gram = s.conj().T @ s
    duals = s @ np.linalg.inv(gram)  # columns: dual vectors inside the span
    frame = duals @ duals.conj().T
    scale = 1.0 / float(np.linalg.eigvalsh((frame + frame.conj().T) / 2).max())
    outcomes = []
    total = np.zeros((dim, dim), dtype=complex)
    for x in range(n):
        op = scale * np.outer(duals[:, x], duals[:, x].conj())
        op = (op + op.conj().T) / 2
        outcomes.append((labels[x], op))
        total += op
    inconclusive = np.eye(dim) - total
    outcomes.append((INCONCLUSIVE, (inconclusive + inconclusive.conj().T) / 2))
    return Povm(outcomes)


def perfect_strategy(g: GateSet, N: int, cfg: NumericConfig = DEFAULT_CONFIG) -> Strategy:
    """Parallel strategy whose outputs are exactly orthonormal for group or
    generalized-design gate sets once the tensor powers are independent.

    The input applies the inverse square root of the Choi frame operator to
    the unnormalized maximally entangled vector on (system)^N x (reference)^N.
    For a design this equals the block state carrying each irreducible
    component with weight proportional to its dimension, so the square-root
    measurement on the outputs is a von Neumann measurement: zero error and
    zero inconclusive probability.  For other sets the returned strategy is
    still valid; its quality is whatever ``evaluate_strategy`` reports.
    """
    vectors = _grouped_choi_matrix(g, N, cfg)
    if numeric_rank(vectors, cfg) < g.size:
        raise InfeasibleError(
            f"tensor powers are dependent at N = {N}; no error-free strategy exists"
        )
    dn = g.dimension**N
    weighted = vectors.T * np.sqrt(g.priors)
    u, s, _ = np.linalg.svd(weighted, full_matrices=False)
    keep = s > cfg.rank_tol * s[0]
    basis, inv_sqrt_s = u[:, keep], 1.0 / np.sqrt(s[keep])
    ident = choi_vector(np.eye(dn))
    psi = basis @ (inv_sqrt_s**2 * (basis.conj().T @ ident))  # R^{-1/2} |I>>
    psi = psi / np.linalg.norm(psi)
    outs = output_states(g, N, psi, dn, cfg)
    povm = pgm_povm(outs, g.priors, list(g.labels), cfg)
    return Strategy(N, dn, psi, povm)


@dataclass
class EvalResult:
    """Conditional success, error and inconclusive probabilities, and the full
    outcome table p(y|x) (rows: true gate, columns: POVM outcome)."""

    gate_labels: list
    outcome_labels: list
    table: np.ndarray
    conditional_success: float
    error_prob: float
    inconclusive_prob: float
    all_inconclusive: bool = False

    @property
    def error_free(self) -> bool:
        return (
            self.conditional_success is not None
            and abs(self.conditional_success - 1.0) <= 1e-9
        )


def evaluate_strategy(
    g: GateSet, strategy: Strategy, cfg: NumericConfig = DEFAULT_CONFIG
) -> EvalResult:
    """Exact outcome probabilities p(y|x) = <out_x| P_y |out_x> and the derived
    success figure: probability of a correct guess conditioned on a conclusive
    outcome.  Flags the degenerate all-inconclusive case instead of dividing
    by zero."""
    outs = output_states(g, strategy.queries, strategy.input, strategy.ancilla_dim, cfg)
    labels = strategy.povm.labels
    table = np.empty((g.size, len(labels)))
    for y, (_, op) in enumerate(strategy.povm.outcomes):
        table[:, y] = np.real(np.einsum("xi,ij,xj->x", outs.conj(), op, outs))
    table[(table < 0) & (table > -cfg.psd_tol)] = 0.0
    conclusive = [y for y, l in enumerate(labels) if l != INCONCLUSIVE]
    correct = 0.0
    for x, gl in enumerate(g.labels):
        if gl in labels:
            correct += g.priors[x] * table[x, labels.index(gl)]
    conclusive_mass = float(np.sum(g.priors[:, None] * table[:, conclusive]))
    inconclusive_prob = float(
        sum(
            np.sum(g.priors * table[:, y])
            for y, l in enumerate(labels)
            if l == INCONCLUSIVE
        )
    )
    if conclusive_mass <= 0.0:
        return EvalResult(
            list(g.labels), labels, table, None, 0.0, inconclusive_prob, True
        )
    success = correct / conclusive_mass
    return EvalResult(
        list(g.labels),
        labels,
        table,
        float(success),
        float(conclusive_mass - correct),
        inconclusive_prob,
    )


@dataclass
class SimulationResult:
    """Outcome counts per (true gate, outcome) from seeded sampling."""

    gate_labels: list
    outcome_labels: list
    counts: np.ndarray
    shots: int
    seed: int


def simulate_strategy(
    g: GateSet,
    strategy: Strategy,
    shots: int,
    seed: int,
    cfg: NumericConfig = DEFAULT_CONFIG,
) -> SimulationResult:
    """Sample (true gate, outcome) pairs from the exact probabilities.

    Reproducible: shot i consumes the i-th row of a (shots, 2) uniform array
    drawn once from ``default_rng(seed)``; the first column picks the gate by
    inverse CDF over the priors, the second picks the outcome by inverse CDF
    over p(y|x).  Any batching that preserves the per-shot rows gives
    identical results.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    result = evaluate_strategy(g, strategy, cfg)
    probs = np.clip(result.table, 0.0, None)
    probs = probs / probs.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    u = rng.random((shots, 2))
    cum_priors = np.cumsum(g.priors)
    cum_priors[-1] = 1.0
    gate_idx = np.searchsorted(cum_priors, u[:, 0], side="right")
    cum_rows = np.cumsum(probs, axis=1)
    cum_rows[:, -1] = 1.0
    picked = cum_rows[gate_idx]
    outcome_idx = (u[:, 1:2] >= picked).sum(axis=1)
    counts = np.zeros((g.size, probs.shape[1]), dtype=np.int64)
    np.add.at(counts, (gate_idx, outcome_idx), 1)
    return SimulationResult(list(g.labels), result.outcome_labels, counts, shots, seed)


# -- JSON views ------------------------------------------------------------


def _matrix_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _vector_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def povm_to_jsonable(povm: Povm) -> dict:
    return {
        "outcomes": [
            {"label": label, "operator": _matrix_pairs(op)} for label, op in povm.outcomes
        ]
    }


def strategy_to_jsonable(strategy: Strategy) -> dict:
    return {
        "kind": strategy.kind,
        "queries": strategy.queries,
        "ancilla_dim": strategy.ancilla_dim,
        "input": _vector_pairs(strategy.input),
        "povm": povm_to_jsonable(strategy.povm),
    }


def eval_result_to_jsonable(result: EvalResult) -> dict:
    return {
        "gate_labels": list(result.gate_labels),
        "outcome_labels": list(result.outcome_labels),
        "table": [[float(v) for v in row] for row in result.table],
        "conditional_success": (
            None if result.conditional_success is None else float(result.conditional_success)
        ),
        "error_prob": float(result.error_prob),
        "inconclusive_prob": float(result.inconclusive_prob),
        "all_inconclusive": bool(result.all_inconclusive),
    }

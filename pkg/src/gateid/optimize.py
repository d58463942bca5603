"""Stochastic/heuristic optimizers for state-extremal quantities.

The minimax fidelity is minimized by projected gradient descent on the unit
sphere with an annealed log-sum-exp smoothing of the pairwise maximum; the
result is the value at an actual state, hence always a sound upper bound on
the true minimax.  Local span dimension and minimum ancilla dimension are
probed at random states: both quantities attain their maximum on a dense open
set, so seeded random trials find them with probability one, and a handful of
trials guards against tolerance artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discriminate import InfeasibleError, output_states, span_dimension
from .gatesets import GateSet
from .numerics import (
    DEFAULT_CONFIG,
    NumericConfig,
    choi_vector,
    numeric_rank,
)

__all__ = [
    "FidelityResult",
    "ProbeResult",
    "minimax_fidelity",
    "local_span_dimension",
    "min_ancilla_probe",
]

# smoothing schedule: log-sum-exp temperatures applied to the [0, 1]-valued
# squared overlaps, from soft to nearly-max, 200 steps each
_TEMPERATURES = (10.0, 30.0, 100.0, 300.0)
_STEPS_PER_STAGE = 200


@dataclass
class FidelityResult:
    """Heuristic minimax fidelity (squared-overlap convention).

    ``value`` is the exact pairwise maximum at ``argmin_state``, so it upper
    bounds the true minimax.  In bipartite mode the evaluation at the
    maximally entangled state is recorded separately as a certified value.
    """

    value: float
    argmin_state: np.ndarray
    mode: str
    restarts_used: int
    converged: bool
    max_entangled_value: Optional[float] = None


@dataclass
class ProbeResult:
    value: int
    trials: int
    seed: int


def _pair_operators(g: GateSet) -> np.ndarray:
    ops = []
    for x in range(g.size):
        for y in range(x + 1, g.size):
            ops.append(g.matrices[x].conj().T @ g.matrices[y])
    return np.stack(ops)


def _overlaps(psi: np.ndarray, ops: np.ndarray, bipartite: bool, d: int) -> np.ndarray:
    if bipartite:
        m = psi.reshape(d, -1)
        return np.einsum("ij,pik,kj->p", m.conj(), ops, m)
    return np.einsum("i,pij,j->p", psi.conj(), ops, psi)


def _objective(psi, ops, bipartite, d) -> float:
    return float(np.max(np.abs(_overlaps(psi, ops, bipartite, d)) ** 2))


def _smooth_value_grad(psi, ops, bipartite, d, tau):
    h = _overlaps(psi, ops, bipartite, d)
    g_terms = np.abs(h) ** 2
    shifted = tau * (g_terms - g_terms.max())
    weights = np.exp(shifted)
    weights /= weights.sum()
    value = g_terms.max() + np.log(np.sum(np.exp(shifted))) / tau
    if bipartite:
        m = psi.reshape(d, -1)
        fwd = np.einsum("pij,jk->pik", ops, m)
        bwd = np.einsum("pji,jk->pik", ops.conj(), m)
        grad = np.einsum("p,p,pik->ik", weights, h.conj(), fwd)
        grad += np.einsum("p,p,pik->ik", weights, h, bwd)
        grad = grad.reshape(-1)
    else:
        fwd = np.einsum("pij,j->pi", ops, psi)
        bwd = np.einsum("pji,j->pi", ops.conj(), psi)
        grad = np.einsum("p,p,pi->i", weights, h.conj(), fwd)
        grad += np.einsum("p,p,pi->i", weights, h, bwd)
    return value, grad


def _descend(psi0, ops, bipartite, d):
    """Annealed projected gradient descent from one start; returns the final
    state, its exact objective, and whether the last stage stalled at a
    stationary point."""
    psi = psi0 / np.linalg.norm(psi0)
    converged = False
    for tau in _TEMPERATURES:
        step = 1.0
        for _ in range(_STEPS_PER_STAGE):
            value, grad = _smooth_value_grad(psi, ops, bipartite, d, tau)
            tangent = grad - np.real(np.vdot(psi, grad)) * psi
            gnorm = float(np.linalg.norm(tangent))
            if gnorm < 1e-12:
                converged = True
                break
            improved = False
            for _ in range(30):
                trial = psi - step * tangent
                trial /= np.linalg.norm(trial)
                t_value, _ = _smooth_value_grad(trial, ops, bipartite, d, tau)
                if t_value < value - 1e-4 * step * gnorm * gnorm:
                    psi = trial
                    step = min(step * 2.0, 1.0)
                    improved = True
                    break
                step *= 0.5
            if not improved:
                converged = True
                break
    return psi, _objective(psi, ops, bipartite, d), converged


def _random_state(dim: int, rng) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def minimax_fidelity(
    g: GateSet,
    mode: str = "bipartite",
    restarts: int = 8,
    seed: int = 0,
    cfg: NumericConfig = DEFAULT_CONFIG,
) -> FidelityResult:
    """Minimize the worst pairwise squared overlap of the gate outputs over
    input states (bipartite: with a same-size reference system; local: bare).

    Bipartite candidates include the maximally entangled state (recorded as a
    certified evaluation) and every local candidate embedded as a product with
    the reference, so the bipartite value never exceeds the local value at
    matched seeds and restarts.  Restart r draws its start from
    default_rng([seed, r]), making any parallel split reproducible.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if mode not in ("bipartite", "local"):
        raise ValueError(f"mode must be 'bipartite' or 'local', got {mode!r}")
    d = g.dimension
    ops = _pair_operators(g)
    bipartite = mode == "bipartite"
    dim = d * d if bipartite else d
    candidates = []
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        candidates.append(_random_state(dim, rng))
    results = [_descend(psi0, ops, bipartite, d) for psi0 in candidates]
    max_ent_value = None
    if bipartite:
        phi = choi_vector(np.eye(d)) / np.sqrt(d)
        max_ent_value = _objective(phi, ops, True, d)
        results.append((phi, max_ent_value, True))
        # embedded local descent: a bare state psi acts like psi (x) e_0
        for r in range(restarts):
            rng = np.random.default_rng([seed, r])
            local_psi, local_value, local_conv = _descend(
                _random_state(d, rng), ops, False, d
            )
            embedded = np.kron(local_psi, np.eye(d)[0].astype(complex))
            results.append((embedded, local_value, local_conv))
    best_state, best_value, best_conv = results[0]
    for state, value, conv in results[1:]:
        if value < best_value:
            best_state, best_value, best_conv = state, value, conv
    return FidelityResult(best_value, best_state, mode, restarts, best_conv, max_ent_value)


def local_span_dimension(
    g: GateSet, trials: int = 16, seed: int = 0, cfg: NumericConfig = DEFAULT_CONFIG
) -> ProbeResult:
    """Largest dimension spanned by the single-query orbit {U_x psi} over
    random probe states."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        psi = _random_state(g.dimension, rng)
        orbit = np.einsum("xij,j->xi", g.matrices, psi)
        best = max(best, numeric_rank(orbit, cfg))
    return ProbeResult(best, trials, seed)


def _structured_probe(g: GateSet, N: int, d_A: int, cfg: NumericConfig) -> np.ndarray:
    """Deterministic probe: the frame-orthogonalizing block state compressed to
    d_A ancilla levels by a truncated SVD.  At d_A = d^N it reproduces the
    input of the exactly-orthogonalizing strategy for group gate sets."""
    from .discriminate import _grouped_choi_matrix

    dn = g.dimension**N
    vectors = _grouped_choi_matrix(g, N, cfg)
    weighted = vectors.T * np.sqrt(g.priors)
    u, s, _ = np.linalg.svd(weighted, full_matrices=False)
    keep = s > cfg.rank_tol * s[0]
    basis, inv_sqrt_s = u[:, keep], 1.0 / np.sqrt(s[keep])
    ident = choi_vector(np.eye(dn))
    psi = basis @ (inv_sqrt_s**2 * (basis.conj().T @ ident))
    block = psi.reshape(dn, dn)
    bu, bs, bvh = np.linalg.svd(block, full_matrices=False)
    r = min(d_A, int(np.count_nonzero(bs > 1e-14 * bs[0])))
    truncated = bu[:, :r] * bs[:r]
    out = np.zeros((dn, d_A), dtype=complex)
    out[:, :r] = truncated
    return (out / np.linalg.norm(out)).reshape(-1)


def min_ancilla_probe(
    g: GateSet,
    N: int,
    d_A_max: int,
    trials: int = 16,
    seed: int = 0,
    cfg: NumericConfig = DEFAULT_CONFIG,
) -> ProbeResult:
    """Smallest ancilla dimension at which some probed input yields linearly
    independent outputs, searching d_A = 1..d_A_max.

    Requires the tensor powers to be independent at N (otherwise no ancilla
    can help and the call raises).  Each d_A tries one structured block state
    plus seeded random states.
    """
    if trials < 1 or d_A_max < 1:
        raise ValueError("requires trials >= 1 and d_A_max >= 1")
    if span_dimension(g, N, cfg) < g.size:
        raise InfeasibleError(
            f"tensor powers are dependent at N = {N}; unambiguous discrimination "
            "is impossible at any ancilla dimension"
        )
    dn = g.dimension**N
    for d_A in range(1, d_A_max + 1):
        states = [_structured_probe(g, N, d_A, cfg)]
        for t in range(trials):
            rng = np.random.default_rng([seed, d_A, t])
            states.append(_random_state(dn * d_A, rng))
        for psi in states:
            outs = output_states(g, N, psi, d_A, cfg)
            if numeric_rank(outs, cfg) == g.size:
                return ProbeResult(d_A, trials, seed)
    raise InfeasibleError(
        f"no ancilla dimension <= {d_A_max} produced independent outputs at N = {N}"
    )

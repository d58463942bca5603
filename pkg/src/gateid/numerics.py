"""Dense complex linear-algebra kernel shared by the analysis modules.

Tensor powers, Choi-style vectorization of operators, tolerance-aware rank
decisions, and spectral functions of positive semidefinite matrices.  All
functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DimensionCapError",
    "NumericConfig",
    "DEFAULT_CONFIG",
    "tensor_power",
    "choi_vector",
    "numeric_rank",
    "psd_inverse_sqrt",
    "PsdSpectral",
]


class DimensionCapError(ValueError):
    """A requested matrix dimension exceeds the configured cap."""


@dataclass(frozen=True)
class NumericConfig:
    """Tolerance and size knobs used by every numerical routine.

    rank_tol: relative singular-value cutoff for rank decisions.  The default
        keeps double-precision Kronecker powers up to dimension 4096 from
        spuriously dropping rank.
    psd_tol: eigenvalue clamp threshold, applied after rescaling the spectrum
        by trace/dimension (the mean eigenvalue).
    unitarity_tol: Frobenius tolerance on ``U^dag U - I`` for gate checks.
    dim_cap: largest matrix dimension tensor powers may reach; larger
        requests fail loudly instead of thrashing.
    """

    rank_tol: float = 1e-8
    psd_tol: float = 1e-10
    unitarity_tol: float = 1e-8
    dim_cap: int = 4096

    def __post_init__(self) -> None:
        for name in ("rank_tol", "psd_tol", "unitarity_tol"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value!r}")
        if self.dim_cap < 1:
            raise ValueError(f"dim_cap must be positive, got {self.dim_cap!r}")


DEFAULT_CONFIG = NumericConfig()


def as_matrix(matrix, square: bool = False) -> np.ndarray:
    """Coerce to a finite 2-D complex array, optionally enforcing squareness."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def tensor_power(matrix, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
    """N-fold Kronecker power of a square matrix.

    Computed as a left fold, so ``tensor_power(M, n + 1)`` is bitwise equal to
    ``np.kron(tensor_power(M, n), M)``.
    """
    m = as_matrix(matrix, square=True)
    if n < 1:
        raise ValueError(f"tensor power requires n >= 1, got {n}")
    dim = m.shape[0] ** n
    if dim > cfg.dim_cap:
        raise DimensionCapError(
            f"tensor power dimension {m.shape[0]}^{n} = {dim} exceeds cap {cfg.dim_cap}"
        )
    out = m
    for _ in range(n - 1):
        out = np.kron(out, m)
    return out


def choi_vector(matrix) -> np.ndarray:
    """Vectorize ``U`` as ``|U>> = sum_ij U_ij |i>|j>``, i.e. ``(U x I) sum_n |n>|n>``.

    Inner products of these vectors reproduce the Hilbert-Schmidt product:
    ``vdot(choi_vector(U), choi_vector(V)) == trace(U^dag V)``.
    """
    m = as_matrix(matrix, square=True)
    return m.reshape(-1).copy()


def numeric_rank(vectors, cfg: NumericConfig = DEFAULT_CONFIG) -> int:
    """Number of singular values above ``rank_tol`` times the largest one.

    ``vectors`` is a nonempty sequence of equal-length 1-D arrays (or a 2-D
    array of row vectors).  All-zero input has rank 0.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        stack = vectors.astype(complex, copy=False)
    else:
        rows = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        if not rows:
            raise ValueError("numeric_rank requires at least one vector")
        lengths = {r.shape[0] for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"vectors must have equal lengths, got {sorted(lengths)}")
        stack = np.vstack(rows)
    if stack.size == 0:
        raise ValueError("numeric_rank requires at least one vector")
    if not np.all(np.isfinite(stack.view(float))):
        raise ValueError("vector entries must be finite")
    s = np.linalg.svd(stack, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > cfg.rank_tol * s[0]))


class PsdSpectral(NamedTuple):
    inverse: np.ndarray
    inverse_sqrt: np.ndarray
    support_rank: int


def psd_inverse_sqrt(matrix, cfg: NumericConfig = DEFAULT_CONFIG) -> PsdSpectral:
    """Inverse and inverse square root of a PSD matrix on its support.

    Eigenvalues below ``psd_tol`` (relative to the mean eigenvalue
    trace/dimension) are treated as exact zeros.  A negative eigenvalue or a
    Hermiticity defect beyond tolerance raises ``ValueError``.
    """
    m = as_matrix(matrix, square=True)
    d = m.shape[0]
    herm_defect = np.linalg.norm(m - m.conj().T)
    scale_f = max(1.0, float(np.linalg.norm(m)))
    if herm_defect > cfg.psd_tol * scale_f:
        raise ValueError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    mean_eig = float(np.trace(m).real) / d
    threshold = cfg.psd_tol * max(mean_eig, 0.0)
    if np.any(w < -max(threshold, cfg.psd_tol * scale_f)):
        raise ValueError(f"matrix has a negative eigenvalue beyond tolerance: {w.min():.3e}")
    support = w > threshold
    inv_w = np.where(support, 1.0, 0.0) / np.where(support, w, 1.0)
    inverse = (v * inv_w) @ v.conj().T
    inverse_sqrt = (v * np.sqrt(inv_w)) @ v.conj().T
    return PsdSpectral(inverse, inverse_sqrt, int(np.count_nonzero(support)))

"""Weighted L2 geometry helpers.

All state-space objects live in a discrete L2 space with inner product
``<u, v>_w = sum_i w_i u_i v_i`` (quadrature weights ``w``).  Adjoints are
always taken in this geometry; the Euclidean transpose is never the adjoint
unless the weights are uniform and equal to one.  Control inputs live in a
plain Euclidean R^m.
"""

from __future__ import annotations

import numpy as np


def inner(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    """Weighted inner product <u, v>_w."""
    return float(np.sum(w * u * v))


def norm(u: np.ndarray, w: np.ndarray) -> float:
    """Weighted L2 norm of a grid function."""
    return float(np.sqrt(np.sum(w * u * u)))


def adjoint(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Adjoint of an operator H -> H, i.e. W^{-1} M^T W."""
    return (M.T * w[None, :]) / w[:, None]


def input_adjoint(B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Adjoint of B: R^m -> H (Euclidean inputs), i.e. B^T W."""
    return B.T * w[None, :]


def is_selfadjoint(M: np.ndarray, w: np.ndarray, rtol: float = 1e-12) -> bool:
    """Check W M = M^T W to relative tolerance."""
    G = w[:, None] * M
    return np.linalg.norm(G - G.T) <= rtol * max(np.linalg.norm(G), 1e-300)


def to_euclidean(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Similarity W^{1/2} M W^{-1/2}; weighted-self-adjoint maps become symmetric."""
    s = np.sqrt(w)
    return M * (s[:, None] / s[None, :])


def input_to_euclidean(B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Transform B: R^m -> H to the W^{1/2}-coordinates."""
    return B * np.sqrt(w)[:, None]


def output_to_euclidean(C: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Transform C: H -> R^m (Euclidean outputs) to the W^{1/2}-coordinates."""
    return C / np.sqrt(w)[None, :]


def eigvalsh(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Eigenvalues of a weighted-self-adjoint operator (real, ascending)."""
    S = to_euclidean(M, w)
    return np.linalg.eigvalsh(0.5 * (S + S.T))


def operator_norm(M: np.ndarray, w: np.ndarray) -> float:
    """Weighted L2 -> L2 operator norm (largest singular value after similarity)."""
    return float(np.linalg.norm(to_euclidean(M, w), 2))

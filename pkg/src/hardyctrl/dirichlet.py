"""Dirichlet maps and the boundary-control operator.

The boundary datum enters the dynamics through lifted extensions:

* ``d0_map`` extends a boundary value harmonically (plain diffusion);
* ``d_map`` extends it through the singular operator ``laplacian + lam/x^2``,
  obtained as the harmonic extension plus an interior correction solve;
* ``build_b2_boundary`` turns the singular extensions into control columns
  ``-A0 @ (extension)``, which collapse onto the stencil row next to the
  controlled boundary;
* ``b2_adjoint_boundary`` is the exact weighted-transpose adjoint, together
  with a one-sided normal-derivative estimate that the adjoint must reproduce
  up to O(h).

On the interval the datum is (0 at the singular end, u at x = 1); on the ball
it is a constant per control channel on the outer sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import weighted
from .grids import Grid, INTERVAL, dirichlet_load, singular_potential
from .system import assemble_operator


def d0_map(grid: Grid, alpha: float) -> np.ndarray:
    """Harmonic extension of the boundary value ``alpha`` at the outer boundary.

    Interval: exactly ``alpha * x`` (the discrete second difference of a linear
    function vanishes).  Ball: exactly the constant ``alpha`` (constants are
    harmonic and match the datum).
    """
    A = assemble_operator(grid, 0.0, 0.0)
    return np.linalg.solve(A, -dirichlet_load(grid, alpha))


def d_map(grid: Grid, lam: float, alpha: float) -> np.ndarray:
    """Extension of ``alpha`` through the singular operator at coupling ``lam``.

    Solves the interior correction problem
    ``(laplacian + lam/x^2) phi = -lam * d0/x^2`` with zero boundary values
    and returns ``d0 + phi``.  The solve is coercive for ``lam`` below the
    critical coupling; too-close couplings surface as a near-singular solve.
    """
    d0 = d0_map(grid, alpha)
    if lam == 0.0:
        return d0
    A = assemble_operator(grid, lam, 0.0)
    rhs = -lam * singular_potential(grid) * d0
    try:
        phi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular extension solve failed at lam={lam}: {exc}") from exc
    return d0 + phi


def extension_residual(grid: Grid, lam: float, alpha: float, ext: np.ndarray) -> float:
    """Interior residual of the singular extension equation, relative and
    excluding the stencil row that carries the boundary datum."""
    A = assemble_operator(grid, lam, 0.0)
    r = A @ ext + dirichlet_load(grid, alpha)
    w = grid.weights
    scale = weighted.norm(ext, w) * np.linalg.norm(A, np.inf)
    interior = slice(0, grid.n - 1)
    return float(weighted.norm(r[interior], w[interior]) / max(scale, 1e-300))


@dataclass
class DirichletMapSet:
    """Extensions, control columns and hypothesis diagnostics per channel."""

    d0_cols: np.ndarray          # harmonic extensions, one column per channel
    d_cols: np.ndarray           # singular extensions
    b2: np.ndarray               # control columns -A0 @ d_cols
    alpha: List[float]           # constant boundary amplitudes
    hardy_ratio_check: np.ndarray  # weighted norms of d0/x (must be finite)
    residuals: np.ndarray        # interior residuals of the extension equation


def build_dirichlet_maps(grid: Grid, lam: float, alphas: Sequence[float]) -> DirichletMapSet:
    """Assemble all maps and diagnostics for the given boundary amplitudes."""
    n, m = grid.n, len(alphas)
    d0 = np.zeros((n, m))
    dc = np.zeros((n, m))
    for j, a in enumerate(alphas):
        d0[:, j] = d0_map(grid, float(a))
        dc[:, j] = d_map(grid, lam, float(a))
    A0 = assemble_operator(grid, lam, 0.0)
    b2 = -A0 @ dc
    ratios = np.array([weighted.norm(d0[:, j] / (grid.nodes - grid.singularity), grid.weights)
                       for j in range(m)])
    res = np.array([extension_residual(grid, lam, float(alphas[j]), dc[:, j]) for j in range(m)])
    return DirichletMapSet(d0_cols=d0, d_cols=dc, b2=b2, alpha=list(map(float, alphas)),
                           hardy_ratio_check=ratios, residuals=res)


def build_b2_boundary(grid: Grid, lam: float, a0: float, core_mask, alphas: Sequence[float]) -> np.ndarray:
    """Boundary-control columns ``-A0 @ (singular extension)`` per channel.

    The reaction term drops out of the construction (it cancels against the
    lifting), so ``a0`` and the core mask only document the system the columns
    are destined for.
    """
    del a0, core_mask
    return build_dirichlet_maps(grid, lam, alphas).b2


def normal_derivative(grid: Grid, v: np.ndarray) -> float:
    """One-sided second-order estimate of dv/dnu at the outer boundary.

    Uses the two interior nodes nearest the boundary plus the homogeneous
    boundary value; the outward normal points in the +x direction.
    """
    xb = grid.R if grid.kind != INTERVAL else 1.0
    x1, x2 = grid.nodes[-1], grid.nodes[-2]
    v1, v2 = v[-1], v[-2]
    s1, s2 = xb - x1, xb - x2
    # quadratic through (xb, 0), (x1, v1), (x2, v2), differentiated at xb
    return float(-(v1 * s2**2 - v2 * s1**2) / (s1 * s2 * (s2 - s1)))


def b2_adjoint_boundary(grid: Grid, b2: np.ndarray, v: np.ndarray,
                        alphas: Sequence[float] | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Adjoint action of the boundary-control columns on a state ``v``.

    Returns ``(exact, estimate)`` where ``exact = B2^T W v`` is the weighted
    transpose (the adjoint used throughout the synthesis) and ``estimate`` is
    the boundary-trace form ``-alpha_j * |boundary| * dv/dnu`` computed with a
    one-sided difference; the two agree up to O(h) on smooth states.
    """
    exact = weighted.input_adjoint(b2, grid.weights) @ v
    if alphas is None:
        alphas = [1.0] * b2.shape[1]
    dv = normal_derivative(grid, v)
    est = np.array([-float(a) * grid.boundary_area * dv for a in alphas])
    return exact, est

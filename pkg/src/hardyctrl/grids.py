"""Spatial meshes for the singular diffusion operators.

Two grid families are supported:

* ``interval_1d`` -- the unit interval (0, 1), interior nodes ``x_i = i h``
  with ``h = 1/(n+1)``; homogeneous Dirichlet conditions at both endpoints,
  the inverse-square singularity sits at the left endpoint ``x = 0``.
* ``radial_ball`` -- radially symmetric functions on a ball of radius R in
  dimension N > 3, cell-centered radii ``r_i = (i - 1/2) h`` with ``h = R/n``
  (no node touches the singularity at the center); Dirichlet condition at
  ``r = R``, natural zero-flux closure at the origin.

Quadrature weights turn nodal vectors into L2 functions: ``h`` per node on
the interval, ``sigma_N r^{N-1} h`` on the ball (``sigma_N`` the unit-sphere
area), so that sums of weights approximate the measure of the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INTERVAL = "interval_1d"
RADIAL = "radial_ball"


def hardy_constant(kind: str, dim_N: int) -> float:
    """Critical inverse-square coupling: 1/4 on the interval, (N-2)^2/4 on the ball."""
    if kind == INTERVAL:
        return 0.25
    return (dim_N - 2) ** 2 / 4.0


def sphere_area(dim_N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2.0 * math.pi ** (dim_N / 2.0) / math.gamma(dim_N / 2.0)


@dataclass(frozen=True)
class Grid:
    """Spatial mesh with quadrature weights and singularity bookkeeping.

    Attributes
    ----------
    kind : str
        ``interval_1d`` or ``radial_ball``.
    n : int
        Number of interior (degree-of-freedom) nodes.
    h : float
        Mesh width.
    nodes : ndarray
        Node coordinates (radii for the ball), strictly increasing.
    weights : ndarray
        Positive quadrature weights of the discrete L2 inner product.
    dim_N : int
        Spatial dimension (1 for the interval, > 3 for the ball).
    R : float
        Outer radius / interval length.
    singularity : float
        Coordinate of the inverse-square singularity (0 in both cases).
    """

    kind: str
    n: int
    h: float
    nodes: np.ndarray
    weights: np.ndarray
    dim_N: int
    R: float
    singularity: float = 0.0

    # which ends carry a Dirichlet condition (left/right in node order)
    dirichlet_left: bool = field(default=True)
    dirichlet_right: bool = field(default=True)

    @property
    def hardy_limit(self) -> float:
        return hardy_constant(self.kind, self.dim_N)

    @property
    def boundary_area(self) -> float:
        """Measure of the Dirichlet boundary carrying the control datum."""
        if self.kind == INTERVAL:
            return 1.0
        return sphere_area(self.dim_N) * self.R ** (self.dim_N - 1)


def build_grid(kind: str, n: int, dim_N: int = 1, R: float = 1.0) -> Grid:
    """Construct a mesh of the requested family.

    Parameters
    ----------
    kind : str
        ``interval_1d`` (dim_N must be 1, R fixed to 1) or ``radial_ball``
        (dim_N must exceed 3).
    n : int
        Interior node count, at least 4.
    """
    if n < 4:
        raise ValueError(f"need at least 4 nodes, got n={n}")
    if kind == INTERVAL:
        if dim_N != 1:
            raise ValueError("interval grids are one-dimensional")
        h = 1.0 / (n + 1)
        nodes = h * np.arange(1, n + 1)
        weights = np.full(n, h)
        return Grid(kind, n, h, nodes, weights, 1, R=1.0,
                    dirichlet_left=True, dirichlet_right=True)
    if kind == RADIAL:
        if dim_N <= 3:
            raise ValueError(f"radial grids require dimension N > 3, got N={dim_N}")
        if R <= 0:
            raise ValueError("outer radius must be positive")
        h = R / n
        nodes = (np.arange(1, n + 1) - 0.5) * h
        weights = sphere_area(dim_N) * nodes ** (dim_N - 1) * h
        return Grid(kind, n, h, nodes, weights, dim_N, R=R,
                    dirichlet_left=False, dirichlet_right=True)
    raise ValueError(f"unknown grid kind {kind!r}")


def laplacian(grid: Grid) -> np.ndarray:
    """Second-order diffusion matrix with homogeneous Dirichlet rows eliminated.

    Interval: the standard (1, -2, 1)/h^2 stencil.  Ball: conservative flux
    form ``(r^{N-1} Y')' / r^{N-1}`` with face radii at cell boundaries, which
    is self-adjoint in the weighted inner product by construction.
    """
    n, h = grid.n, grid.h
    A = np.zeros((n, n))
    if grid.kind == INTERVAL:
        idx = np.arange(n)
        A[idx, idx] = -2.0 / h**2
        A[idx[:-1], idx[:-1] + 1] = 1.0 / h**2
        A[idx[1:], idx[1:] - 1] = 1.0 / h**2
        return A
    N = grid.dim_N
    r = grid.nodes
    r_face_up = np.arange(1, n + 1) * h       # r_{i+1/2}
    r_face_dn = np.arange(0, n) * h           # r_{i-1/2}; zero face at origin
    cup = r_face_up ** (N - 1) / (r ** (N - 1) * h * h)
    cdn = r_face_dn ** (N - 1) / (r ** (N - 1) * h * h)
    for i in range(n):
        if i + 1 < n:
            A[i, i + 1] = cup[i]
            A[i, i] -= cup[i]
        else:
            # Dirichlet value at r = R lives on the face: ghost = -Y_n
            A[i, i] -= 2.0 * cup[i]
        if i > 0:
            A[i, i - 1] = cdn[i]
            A[i, i] -= cdn[i]
    return A


def dirichlet_load(grid: Grid, value: float) -> np.ndarray:
    """Stencil contribution of an inhomogeneous Dirichlet datum at the outer end.

    Returns the vector ``g`` such that the discrete solution of a problem with
    boundary value ``v`` at the outer boundary satisfies ``L y + g = rhs`` where
    ``L`` is the homogeneous-Dirichlet matrix from :func:`laplacian`.
    """
    n, h = grid.n, grid.h
    g = np.zeros(n)
    if grid.kind == INTERVAL:
        g[-1] = value / h**2
    else:
        N = grid.dim_N
        r_face = (n * h) ** (N - 1)
        g[-1] = 2.0 * value * r_face / (grid.nodes[-1] ** (N - 1) * h * h)
    return g


def singular_potential(grid: Grid, epsilon: float = 0.0) -> np.ndarray:
    """Nodal values of the inverse-square density 1/(x^2 + eps)."""
    d = grid.nodes - grid.singularity
    return 1.0 / (d * d + epsilon)


def hardy_rayleigh_min(grid: Grid) -> float:
    """Discrete optimal Hardy constant on the given mesh.

    Smallest generalized eigenvalue of the (weighted) Dirichlet energy against
    the weighted mass with density 1/x^2, i.e. the largest ``lam`` such that
    ``-laplacian - lam/x^2`` stays positive semidefinite on this mesh.  The
    value decreases toward :func:`hardy_constant` under refinement, but only
    logarithmically: the continuum constant is not attained and minimizers
    concentrate at the singularity.
    """
    import scipy.linalg as sla

    L = laplacian(grid)
    w = grid.weights
    K = -(w[:, None] * L)
    K = 0.5 * (K + K.T)
    M = np.diag(w * singular_potential(grid))
    vals = sla.eigh(K, M, eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])

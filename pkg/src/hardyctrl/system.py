"""Finite-dimensional realizations of the singular control systems.

A realization bundles the generator ``A = laplacian + lam/x^2 + a0*chi_{core}``
with the disturbance, control and observation operators of one of three
scenarios:

* ``distributed`` -- interior control through a fixed profile b(x) on a ball,
* ``boundary_radial`` -- Dirichlet boundary control on a ball (the control
  column is produced by the singular Dirichlet maps and installed here),
* ``boundary_1d`` -- Dirichlet control at x = 1 on the interval with the
  singularity sitting at the other endpoint.

Disturbances act as multiplication by the indicator of the disturbance
region; the observation is the indicator of the observed region; the control
penalty columns d_j are supported away from the observed region and are
orthonormal in the weighted inner product, which makes the running cost of
the underlying game exactly ``|C1 y|^2 + |u|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import weighted
from .grids import Grid, hardy_constant, laplacian, singular_potential

DISTRIBUTED = "distributed"
BOUNDARY_RADIAL = "boundary_radial"
BOUNDARY_1D = "boundary_1d"
SCENARIOS = (DISTRIBUTED, BOUNDARY_RADIAL, BOUNDARY_1D)


@dataclass
class SystemRealization:
    """State-space data (A, B1, B2, C1, D1) in weighted-L2 geometry."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    D1: np.ndarray
    weights: np.ndarray
    lam: float = 0.0
    a0: float = 0.0
    masks: dict = field(default_factory=dict)
    grid: Optional[Grid] = None
    scenario: str = ""
    boundary_amplitudes: Optional[list] = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B2.shape[1]

    @property
    def n_w(self) -> int:
        return self.B1.shape[1]

    def a_adjoint(self) -> np.ndarray:
        return weighted.adjoint(self.A, self.weights)

    def b1_adjoint(self) -> np.ndarray:
        return weighted.adjoint(self.B1, self.weights) if self.B1.shape[0] == self.B1.shape[1] \
            else weighted.input_adjoint(self.B1, self.weights)

    def b2_adjoint(self) -> np.ndarray:
        return weighted.input_adjoint(self.B2, self.weights)

    def c1_adjoint(self) -> np.ndarray:
        return weighted.adjoint(self.C1, self.weights)

    def d1_adjoint(self) -> np.ndarray:
        return weighted.input_adjoint(self.D1, self.weights)

    def validate(self, rtol: float = 1e-12) -> None:
        """Raise if a structural invariant is violated."""
        w = self.weights
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        if not weighted.is_selfadjoint(self.A, w, rtol):
            raise ValueError("A is not self-adjoint in the weighted inner product")
        m = self.m
        dd = self.d1_adjoint() @ self.D1
        if np.linalg.norm(dd - np.eye(m)) > 1e-10 * max(1.0, np.linalg.norm(dd)):
            raise ValueError("control penalty columns are not weighted-orthonormal")
        dc = self.d1_adjoint() @ self.C1
        if np.linalg.norm(dc) > 1e-10 * max(1.0, np.linalg.norm(self.C1)):
            raise ValueError("control penalty columns overlap the observed region")
        if "core" in self.masks and "observed" in self.masks:
            if np.any(self.masks["core"] & ~self.masks["observed"]):
                raise ValueError("reaction core must be contained in the observed region")


def assemble_operator(grid: Grid, lam: float, a0: float,
                      core_mask: Optional[np.ndarray] = None,
                      epsilon: float = 0.0) -> np.ndarray:
    """Generator matrix ``laplacian + lam/(x^2+eps) + a0*chi_{core}``.

    Requires ``lam`` strictly below the critical Hardy coupling of the grid;
    the result is self-adjoint in the weighted inner product because every
    added term is a diagonal.
    """
    crit = hardy_constant(grid.kind, grid.dim_N)
    if lam >= crit:
        raise ValueError(f"lam={lam} must stay below the critical coupling {crit}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    A = laplacian(grid) + np.diag(lam * singular_potential(grid, epsilon))
    if a0 != 0.0:
        if core_mask is None:
            raise ValueError("a0 != 0 needs a core mask")
        A = A + a0 * np.diag(core_mask.astype(float))
    return A


def mask_from_interval(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """Boolean node mask of the coordinate band (lo, hi]."""
    if not (0.0 <= lo < hi <= grid.R + grid.h):
        raise ValueError(f"mask interval ({lo}, {hi}] outside the domain")
    return (grid.nodes > lo) & (grid.nodes <= hi)


def _as_mask(grid: Grid, selector) -> np.ndarray:
    if isinstance(selector, np.ndarray) and selector.dtype == bool:
        if selector.shape != (grid.n,):
            raise ValueError("mask length does not match the grid")
        return selector
    lo, hi = selector
    return mask_from_interval(grid, float(lo), float(hi))


def _profile(grid: Grid, selector) -> np.ndarray:
    if isinstance(selector, np.ndarray) and selector.dtype != bool:
        if selector.shape != (grid.n,):
            raise ValueError("profile length does not match the grid")
        return selector.astype(float)
    return _as_mask(grid, selector).astype(float)


def _orthonormal_columns(cols: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted modified Gram-Schmidt; raises on (near-)dependent columns."""
    Q = cols.astype(float).copy()
    for j in range(Q.shape[1]):
        for i in range(j):
            Q[:, j] -= weighted.inner(Q[:, i], Q[:, j], w) * Q[:, i]
        nrm = weighted.norm(Q[:, j], w)
        if nrm < 1e-12:
            raise ValueError(f"control penalty column {j} is degenerate")
        Q[:, j] /= nrm
    return Q


def assemble_scenario(grid: Grid, scenario: str, *,
                      lam: float, a0: float,
                      disturbance, core, observed,
                      b=None, d=None,
                      alphas: Optional[Sequence[float]] = None,
                      epsilon: float = 0.0) -> SystemRealization:
    """Build the full realization for one of the three scenarios.

    ``disturbance``/``core``/``observed`` are boolean masks or coordinate intervals
    for the disturbance support, the reaction core and the observed region.
    ``b`` is the interior control profile (distributed scenario only), ``d``
    one column or a list of columns of the control penalty, defaulted to
    indicators of the complement of the observed region, and ``alphas`` the
    constant boundary amplitudes of boundary control.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    w = grid.weights
    m1 = _as_mask(grid, disturbance)
    m0 = _as_mask(grid, core)
    mc = _as_mask(grid, observed)
    if np.any(m0 & ~mc):
        raise ValueError("reaction core must be contained in the observed region")
    A = assemble_operator(grid, lam, a0, m0, epsilon)
    B1 = np.diag(m1.astype(float))
    C1 = np.diag(mc.astype(float))

    # control penalty columns, supported away from the observed region
    if d is None:
        free = ~mc
        if not np.any(free):
            raise ValueError("no room left for the control penalty support")
        m = 1 if scenario != BOUNDARY_RADIAL or alphas is None else len(alphas)
        idx = np.flatnonzero(free)
        parts = np.array_split(idx, m)
        cols = np.zeros((grid.n, m))
        for j, part in enumerate(parts):
            if len(part) == 0:
                raise ValueError("not enough nodes to support the penalty columns")
            cols[part, j] = 1.0
    else:
        if isinstance(d, tuple) and len(d) == 2 and all(isinstance(v, (int, float)) for v in d):
            dspecs = [d]          # one (lo, hi) interval column
        elif isinstance(d, (list, tuple)):
            dspecs = list(d)
        else:
            dspecs = [d]
        cols = np.column_stack([_profile(grid, dj) for dj in dspecs])
    if np.any((np.abs(cols).sum(axis=1) > 0) & mc):
        raise ValueError("control penalty support intersects the observed region")
    D1 = _orthonormal_columns(cols, w)

    if scenario == DISTRIBUTED:
        if b is None:
            raise ValueError("distributed control needs a profile b")
        B2 = _profile(grid, b).reshape(-1, 1)
        if D1.shape[1] != 1:
            raise ValueError("distributed control is scalar: exactly one penalty column")
    else:
        from .dirichlet import build_b2_boundary
        if alphas is None:
            alphas = [1.0]
        B2 = build_b2_boundary(grid, lam, a0, m0, list(alphas))
        if D1.shape[1] != B2.shape[1]:
            raise ValueError("one penalty column per boundary control channel required")

    sys = SystemRealization(A=A, B1=B1, B2=B2, C1=C1, D1=D1, weights=w,
                            lam=lam, a0=a0,
                            masks={"disturbance": m1, "core": m0, "observed": mc},
                            grid=grid, scenario=scenario,
                            boundary_amplitudes=None if scenario == DISTRIBUTED
                            else list(map(float, alphas if alphas is not None else [1.0])))
    sys.validate()
    return sys


def accretivity_margin(sys: SystemRealization, omega: float) -> float:
    """Smallest eigenvalue of the symmetric form of (omega*I - A).

    A positive value certifies that ``-A`` shifted by ``omega`` is accretive
    in the weighted inner product; the underlying coercivity estimate
    guarantees this for every ``omega > a0`` when ``lam`` stays below the
    critical coupling.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    M = omega * np.eye(sys.n) - sys.A
    return float(weighted.eigvalsh(M, sys.weights)[0])


def detectability_gain(sys: SystemRealization, k: float) -> np.ndarray:
    """Output-injected generator ``A - k * chi_obs`` for the detectability check.

    ``k >= a0`` is required; the spectral abscissa of the result is negative
    for every such gain whenever the reaction core sits inside the observed
    region (checked by the caller through the spectral abscissa).
    """
    if k < sys.a0:
        raise ValueError(f"injection gain k={k} must be at least a0={sys.a0}")
    mc = sys.masks["observed"].astype(float)
    return sys.A - k * np.diag(mc)

"""Game-type algebraic Riccati solver with stability certificates.

For a fixed attenuation level ``gamma`` the synthesis solves

    A* P + P A - P (B2 B2* - gamma^-2 B1 B1*) P + C1* C1 = 0

for a weighted-self-adjoint, positive-semidefinite ``P`` such that both
closed-loop generators

    full loop     A - B2 B2* P + gamma^-2 B1 B1* P
    control loop  A - B2 B2* P

are exponentially stable; then ``F = -B2* P`` is the suboptimal state
feedback.  The solver is a Newton iteration whose linear steps are weighted
Lyapunov solves over the full loop, warm-started from the large-gamma
(quadratic-regulator) solution, with terminal mixed-precision refinement to
push the residual to the float64 representation floor.  Every failure mode is
reported as a status rather than an exception: a diverging or destabilized
iteration is evidence that ``gamma`` is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg as sla

from . import weighted
from .system import SystemRealization

#: relative residual below which a solution counts as converged
DEFAULT_TOL = 1e-10
#: slack for positive semidefiniteness, relative to ||P||
PSD_SLACK = 1e-10
#: a loop is certified stable when its abscissa < -ABSCISSA_MARGIN * ||A||
ABSCISSA_MARGIN = 1e-8

STATUS_CONVERGED = "converged"
STATUS_INFEASIBLE = "infeasible"
STATUS_INCONCLUSIVE = "inconclusive"


def spectral_abscissa(M: np.ndarray) -> float:
    """Largest real part of the spectrum; negative certifies exponential decay."""
    return float(np.max(np.linalg.eigvals(M).real))


def lyapunov_solve(Acl: np.ndarray, Q: np.ndarray, w: np.ndarray,
                   abscissa: Optional[float] = None) -> np.ndarray:
    """Solve the weighted Lyapunov identity ``Acl* X + X Acl + Q = 0``.

    ``Q`` must be weighted-self-adjoint and ``Acl`` stable (checked through
    its spectral abscissa unless one is supplied).  Internally the Gram form
    ``M = W X`` turns the identity into a plain Lyapunov equation solved by
    the dense Schur (Bartels-Stewart) routine; the result is re-symmetrized
    so the weighted self-adjointness of ``X`` is exact.
    """
    if abscissa is None:
        abscissa = spectral_abscissa(Acl)
    if abscissa >= 0:
        raise ValueError(f"closed loop is not stable (abscissa {abscissa:.3e}); "
                         "the Lyapunov solution would not be unique")
    M = sla.solve_continuous_lyapunov(Acl.T, -(w[:, None] * Q))
    M = 0.5 * (M + M.T)
    return M / w[:, None]


def _game_term(sys: SystemRealization, gamma: float) -> np.ndarray:
    """Quadratic coefficient B2 B2* - gamma^-2 B1 B1* (indefinite for finite gamma)."""
    E = sys.B2 @ sys.b2_adjoint()
    if np.isfinite(gamma):
        E = E - (1.0 / gamma**2) * (sys.B1 @ sys.b1_adjoint())
    return E


def riccati_residual(sys: SystemRealization, P: np.ndarray, gamma: float,
                     dtype=np.float64) -> float:
    """Relative weighted Frobenius residual of the Riccati equation at ``P``.

    Computed on the Gram form ``A^T (WP) + (WP) A - (WP) E P + C1^T W C1``
    and normalized by ``||W P||``; ``dtype`` may be raised to long double to
    measure residuals near the float64 floor.
    """
    w = sys.weights.astype(dtype)
    A = sys.A.astype(dtype)
    Pd = P.astype(dtype)
    E = _game_term(sys, gamma).astype(dtype)
    CC = (sys.c1_adjoint() @ sys.C1).astype(dtype)
    R = weighted.adjoint(sys.A, sys.weights).astype(dtype) @ Pd + Pd @ A - Pd @ E @ Pd + CC
    G = w[:, None] * R
    GP = w[:, None] * Pd
    scale = float(np.linalg.norm(GP))
    if scale == 0.0:
        return float(np.linalg.norm(G))   # raw residual: the observation term alone
    return float(np.linalg.norm(G) / scale)


def _min_eig(sys: SystemRealization, P: np.ndarray) -> tuple[float, float]:
    ev = weighted.eigvalsh(P, sys.weights)
    return float(ev[0]), float(ev[-1])


@dataclass
class RiccatiSolution:
    """Stabilizing solution candidate with its certificates."""

    P: np.ndarray
    gamma: float
    residual_norm: float
    abscissa_full_loop: float      # A - B2 B2* P + gamma^-2 B1 B1* P
    abscissa_control_loop: float   # A - B2 B2* P
    feedback: np.ndarray           # -B2* P
    iterations: int
    min_eig_P: float
    norm_P: float
    status: str
    history: List[float]

    def certified(self, sys: SystemRealization, tol: float = DEFAULT_TOL) -> bool:
        """All of: converged residual, PSD up to slack, both loops stable."""
        margin = ABSCISSA_MARGIN * weighted.operator_norm(sys.A, sys.weights)
        return (self.status == STATUS_CONVERGED
                and self.residual_norm <= tol
                and self.min_eig_P >= -PSD_SLACK * max(self.norm_P, 1e-300)
                and self.abscissa_full_loop < -margin
                and self.abscissa_control_loop < -margin)


def closed_loops(sys: SystemRealization, P: np.ndarray, gamma: float):
    """Both closed-loop generators induced by a candidate ``P``."""
    full = sys.A - _game_term(sys, gamma) @ P
    control = sys.A - sys.B2 @ (sys.b2_adjoint() @ P)
    return full, control


def _newton_core(sys: SystemRealization, E: np.ndarray, P0: np.ndarray,
                 tol: float, max_iter: int):
    """Newton iteration on ``A*P + PA - PEP + C1*C1 = 0`` from ``P0``.

    Each step solves a weighted Lyapunov equation over the loop ``A - E P_k``;
    the iteration stops on the tolerance, on a round-off stall (residual no
    longer decreasing) or on loss of loop stability.  Returns
    ``(P, residuals, status_flag)`` with flag one of ok/unstable/diverged/
    maxiter.
    """
    w = sys.weights
    CC = sys.c1_adjoint() @ sys.C1
    Astar = weighted.adjoint(sys.A, w)
    P = P0
    residuals: List[float] = []
    prev = np.inf
    for k in range(max_iter):
        Acl = sys.A - E @ P
        ab = spectral_abscissa(Acl)
        if ab >= 0:
            return P, residuals, "unstable"
        P = lyapunov_solve(Acl, P @ E @ P + CC, w, abscissa=ab)
        res = float(np.linalg.norm(w[:, None] * (Astar @ P + P @ sys.A - P @ E @ P + CC))
                    / max(np.linalg.norm(w[:, None] * P), 1e-300))
        residuals.append(res)
        if not np.isfinite(res) or res > 1e3 * max(prev, 1.0):
            return P, residuals, "diverged"
        if res <= tol or res > 0.5 * prev:
            return P, residuals, "ok"
        prev = res
    return P, residuals, "maxiter"


def _refine(sys: SystemRealization, P: np.ndarray, E: np.ndarray, steps: int = 2) -> np.ndarray:
    """Mixed-precision Newton refinement: long-double residual, float64 correction."""
    ld = np.longdouble
    w = sys.weights
    Astar_ld = weighted.adjoint(sys.A, w).astype(ld)
    A_ld, E_ld = sys.A.astype(ld), E.astype(ld)
    CC_ld = (sys.c1_adjoint() @ sys.C1).astype(ld)
    for _ in range(steps):
        P_ld = P.astype(ld)
        R = Astar_ld @ P_ld + P_ld @ A_ld - P_ld @ E_ld @ P_ld + CC_ld
        Acl = sys.A - E @ P
        ab = spectral_abscissa(Acl)
        if ab >= 0:
            break
        P = P + lyapunov_solve(Acl, R.astype(np.float64), w, abscissa=ab)
    return P


def lqr_initialize(sys: SystemRealization, tol: float = 1e-12,
                   max_iter: int = 60) -> np.ndarray:
    """Stabilizing feedback seed from the disturbance-free Riccati equation.

    Solves the quadratic-regulator limit (the Riccati equation with the
    ``gamma^-2`` term deleted) by the same Newton iteration, starting from
    F = 0 when the open loop is already stable, otherwise from ``-c B2*``
    with escalating ``c`` and, failing that, from a regulator on the unstable
    modal block.  Raises when the pair (A, B2) has an unstabilizable mode.
    """
    w = sys.weights
    B2s = sys.b2_adjoint()
    # modal stabilizability test: A is weighted-self-adjoint, so unstable
    # modes are honest eigenvectors and must be visible to B2*
    Asym = weighted.to_euclidean(sys.A, w)
    Asym = 0.5 * (Asym + Asym.T)
    evals, V = np.linalg.eigh(Asym)
    Vw = V / np.sqrt(w)[:, None]          # weighted-orthonormal eigenvectors
    scale = np.linalg.norm(Asym, 2)
    unstable = evals > -1e-12 * max(scale, 1.0)
    for i in np.flatnonzero(unstable):
        if np.linalg.norm(B2s @ Vw[:, i]) <= 1e-10 * max(np.linalg.norm(B2s), 1e-300):
            raise ValueError(
                f"pair (A, B2) not stabilizable: mode at eigenvalue {evals[i]:.6g} "
                "is orthogonal to the control range")

    F = np.zeros((sys.m, sys.n))
    if spectral_abscissa(sys.A) >= 0:
        F = None
        for c in 2.0 ** np.arange(0, 25):
            cand = -c * B2s
            if spectral_abscissa(sys.A + sys.B2 @ cand) < 0:
                F = cand
                break
        if F is None:
            # regulator on the unstable modal block; feedback through the
            # modal projector leaves the stable complement untouched
            idx = np.flatnonzero(unstable)
            Au = np.diag(evals[idx])
            Bu = (B2s @ Vw[:, idx]).T
            X = sla.solve_continuous_are(Au, Bu, np.eye(len(idx)), np.eye(sys.m))
            F = -(Bu.T @ X) @ (Vw[:, idx].T * w[None, :])
            if spectral_abscissa(sys.A + sys.B2 @ F) >= 0:
                raise ValueError("failed to find a stabilizing seed for (A, B2)")

    # cost-to-go of the seed feedback, then Newton to the regulator solution;
    # F targets Euclidean R^m, so its weighted-self-adjoint cost form is W^-1 F^T F
    Acl = sys.A + sys.B2 @ F
    Q = sys.c1_adjoint() @ sys.C1 + (F.T @ F) / w[:, None]
    P = lyapunov_solve(Acl, Q, w)
    E = sys.B2 @ B2s
    P, _, flag = _newton_core(sys, E, P, tol, max_iter)
    if flag in ("unstable", "diverged"):
        raise ValueError(f"regulator Newton failed ({flag}); (A, B2) may be borderline")
    P = _refine(sys, P, E)
    return -(B2s @ P)


def newton_kleinman(sys: SystemRealization, gamma: float,
                    F0: Optional[np.ndarray] = None,
                    tol: float = DEFAULT_TOL,
                    max_iter: int = 60,
                    P0: Optional[np.ndarray] = None) -> RiccatiSolution:
    """Solve the game Riccati equation at attenuation level ``gamma``.

    ``F0`` must stabilize ``A + B2 F0`` (it is computed by
    :func:`lqr_initialize` when omitted); the default start is the cost-to-go
    of playing ``u = F0 y`` against zero disturbance, and an explicit ``P0``
    (e.g. the solution at a nearby larger ``gamma``) overrides it.  Newton
    then iterates Lyapunov solves over the full loop.  Divergence, loss of
    loop stability or an indefinite limit are reported as ``infeasible``;
    running out of iterations without divergence evidence is
    ``inconclusive``.  Near the feasibility boundary the default start may
    fall outside the Newton basin, so an ``infeasible`` verdict from a cold
    start is evidence, not proof; level searches re-probe with warm starts.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = sys.weights
    if P0 is not None:
        P = P0
    else:
        if F0 is None:
            F0 = lqr_initialize(sys)
        Acl0 = sys.A + sys.B2 @ F0
        ab0 = spectral_abscissa(Acl0)
        if ab0 >= 0:
            raise ValueError(f"F0 does not stabilize A + B2 F0 (abscissa {ab0:.3e})")
        Q0 = sys.c1_adjoint() @ sys.C1 + (F0.T @ F0) / w[:, None]
        P = lyapunov_solve(Acl0, Q0, w, abscissa=ab0)

    E = _game_term(sys, gamma)
    P, residuals, flag = _newton_core(sys, E, P, tol, max_iter)
    if flag == "ok":
        P = _refine(sys, P, E)
        status = STATUS_CONVERGED
    elif flag == "maxiter":
        status = STATUS_INCONCLUSIVE
    else:
        status = STATUS_INFEASIBLE

    res = riccati_residual(sys, P, gamma, dtype=np.longdouble)
    if status == STATUS_CONVERGED and res > tol:
        status = STATUS_INCONCLUSIVE
    mn, mx = _min_eig(sys, P)
    if status == STATUS_CONVERGED and mn < -PSD_SLACK * max(mx, 1e-300):
        status = STATUS_INFEASIBLE
    full, control = closed_loops(sys, P, gamma)
    sol = RiccatiSolution(
        P=P, gamma=gamma, residual_norm=res,
        abscissa_full_loop=spectral_abscissa(full),
        abscissa_control_loop=spectral_abscissa(control),
        feedback=-(sys.b2_adjoint() @ P),
        iterations=len(residuals), min_eig_P=mn, norm_P=mx,
        status=status, history=residuals)
    if status == STATUS_CONVERGED and not sol.certified(sys, tol):
        sol.status = STATUS_INFEASIBLE
    return sol

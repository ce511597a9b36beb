"""Minimal attenuation search by bisection over Riccati feasibility.

A level ``gamma`` is feasible when the game Riccati equation has a certified
solution (converged residual, PSD, both loops stable) AND the synthesized
closed loop passes the independent Hamiltonian gain test at the same level.
The two oracles guard each other; when they disagree the probe is recorded as
an anomaly instead of being silently resolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import hinf
from .riccati import (RiccatiSolution, STATUS_CONVERGED, lqr_initialize,
                      newton_kleinman)
from .system import SystemRealization

PROBE_FLOOR = 1e-6
ESCALATION_CAP = 2.0 ** 15


@dataclass
class ProbeResult:
    """Outcome of one feasibility probe."""

    gamma: float
    feasible: bool
    status: str                       # riccati solver status
    residual: float
    abscissa_full_loop: float
    abscissa_control_loop: float
    hamiltonian_ok: Optional[bool]    # None when there was no loop to test
    anomaly: Optional[str] = None
    solution: Optional[RiccatiSolution] = None
    continuation_stages: int = 0      # extra level-marching solves needed


@dataclass
class GammaSearchResult:
    """Bracket, probe log and the certified level the search stopped at."""

    gamma_star: float
    bracket: tuple                    # (infeasible low, feasible high); low 0.0 if never infeasible
    probes: List[ProbeResult] = field(default_factory=list)
    tolerance: float = 0.0
    anomalies: List[str] = field(default_factory=list)

    @property
    def best(self) -> Optional[RiccatiSolution]:
        feas = [p for p in self.probes if p.feasible and p.solution is not None]
        if not feas:
            return None
        return min(feas, key=lambda p: p.gamma).solution


def _march_down(sys: SystemRealization, gamma: float, tol: float,
                max_iter: int, F0: Optional[np.ndarray],
                warm: Optional[np.ndarray] = None,
                warm_gamma: float = np.inf) -> tuple[Optional[np.ndarray], int]:
    """Level continuation: walk a warm start down to ``gamma`` from above.

    The Newton basin shrinks near the feasibility boundary, so a cold start
    can fail at levels that are in fact feasible.  This helper finds a level
    where a solve works (a supplied warm start, else doubling upward until the
    cold start succeeds), then steps the level toward the target,
    warm-starting each lightweight solve from the previous one and halving
    the step on failure.  Returns a warm start for the target (or None when
    the march gets stuck above it, the infeasibility signature) together with
    the number of stages used.
    """
    from .riccati import _game_term, _newton_core

    stages = 0
    P = None
    if warm is not None and np.isfinite(warm_gamma) and warm_gamma > gamma:
        g, P = warm_gamma, warm
    else:
        g = gamma
        for _ in range(12):
            g *= 2.0
            stages += 1
            try:
                cand = newton_kleinman(sys, g, F0=F0, tol=max(tol, 1e-8), max_iter=max_iter)
            except ValueError:
                return None, stages
            if cand.status == STATUS_CONVERGED:
                P = cand.P
                break
        if P is None:
            return None, stages
    eta = 1.0
    for _ in range(80):
        if g <= gamma:
            return P, stages
        g_next = max(gamma, g - eta * (g - gamma))
        P_next, _, flag = _newton_core(sys, _game_term(sys, g_next), P,
                                       max(tol, 1e-8), max_iter)
        stages += 1
        if flag == "ok":
            g, P = g_next, P_next
            eta = min(2.0 * eta, 1.0)
        else:
            eta *= 0.5
            if eta * (g - gamma) < 1e-9 * gamma:
                return None, stages   # stuck above the target: infeasible evidence
    return (P, stages) if g <= gamma else (None, stages)


def feasibility_probe(sys: SystemRealization, gamma: float,
                      F0: Optional[np.ndarray] = None,
                      tol: float = 1e-10, max_iter: int = 60,
                      warm: Optional[np.ndarray] = None,
                      warm_gamma: float = np.inf) -> ProbeResult:
    """Certify or refute attenuation level ``gamma`` on this realization.

    Runs the Riccati solver (optionally warm-started); a failed cold start is
    retried through level continuation from above before the level is
    declared infeasible.  On a certified solution, the achieved closed-loop
    gain is cross-checked with the Hamiltonian imaginary-axis test at the
    same level.  ``inconclusive`` solver outcomes (iteration budget exhausted
    without divergence evidence) propagate as infeasible-with-anomaly so a
    bisection never silently treats them as certificates.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    stages = 0
    sol = newton_kleinman(sys, gamma, F0=F0, tol=tol, max_iter=max_iter, P0=warm)
    if sol.status != STATUS_CONVERGED and warm is not None:
        sol = newton_kleinman(sys, gamma, F0=F0, tol=tol, max_iter=max_iter)
    if sol.status != STATUS_CONVERGED:
        warm_start, stages = _march_down(sys, gamma, tol, max_iter, F0,
                                         warm=warm, warm_gamma=warm_gamma)
        if warm_start is not None:
            sol = newton_kleinman(sys, gamma, F0=F0, tol=tol, max_iter=max_iter,
                                  P0=warm_start)
    certified = sol.status == STATUS_CONVERGED and sol.certified(sys, tol)
    ham_ok: Optional[bool] = None
    anomaly = None
    if certified:
        ham_ok = hinf.hamiltonian_test(sys, sol.feedback, gamma)
        if not ham_ok:
            anomaly = (f"riccati certificate at gamma={gamma:.6g} contradicted by "
                       "the Hamiltonian gain test")
    elif sol.status == "inconclusive":
        anomaly = f"probe at gamma={gamma:.6g} inconclusive after {sol.iterations} iterations"
    feasible = bool(certified and ham_ok)
    return ProbeResult(gamma=gamma, feasible=feasible, status=sol.status,
                       residual=sol.residual_norm,
                       abscissa_full_loop=sol.abscissa_full_loop,
                       abscissa_control_loop=sol.abscissa_control_loop,
                       hamiltonian_ok=ham_ok, anomaly=anomaly, solution=sol,
                       continuation_stages=stages)


def bisect_gamma(sys: SystemRealization, gamma_hi0: float = 1.0,
                 rel_tol: float = 1e-3, tol: float = 1e-10,
                 max_iter: int = 60) -> GammaSearchResult:
    """Bracket and bisect the minimal certified attenuation level.

    Escalates ``gamma_hi0`` by doubling until a feasible level is found (cap
    ``2^15 * gamma_hi0``), halves downward to find an infeasible level (floor
    ``1e-6``), then bisects to relative width ``rel_tol``.  ``gamma_star`` is
    the feasible upper end of the final bracket.  All probes are logged and
    checked afterwards for verdict monotonicity; violations are reported as
    anomalies, never hidden.
    """
    F0 = lqr_initialize(sys)
    probes: List[ProbeResult] = []
    warm_state = {"P": None, "gamma": np.inf}

    def probe(g: float) -> ProbeResult:
        warm = warm_state["P"] if warm_state["gamma"] >= g else None
        p = feasibility_probe(sys, g, F0=F0, tol=tol, max_iter=max_iter,
                              warm=warm, warm_gamma=warm_state["gamma"])
        probes.append(p)
        if p.feasible and g < warm_state["gamma"]:
            warm_state["P"], warm_state["gamma"] = p.solution.P, g
        return p

    hi = float(gamma_hi0)
    p = probe(hi)
    while not p.feasible:
        hi *= 2.0
        if hi > ESCALATION_CAP * gamma_hi0:
            raise ValueError(
                "no feasible attenuation level found up to the escalation cap; "
                "the pair may be unstabilizable or the output undetectable")
        p = probe(hi)

    lo = hi / 2.0
    while lo > PROBE_FLOOR:
        p = probe(lo)
        if not p.feasible:
            break
        hi = lo
        lo = lo / 2.0
    else:
        # feasible all the way down to the probe floor
        result = GammaSearchResult(gamma_star=hi, bracket=(0.0, hi), probes=probes,
                                   tolerance=rel_tol)
        result.anomalies = _collect_anomalies(probes)
        return result

    while (hi - lo) / hi > rel_tol:
        mid = 0.5 * (lo + hi)
        if probe(mid).feasible:
            hi = mid
        else:
            lo = mid
    result = GammaSearchResult(gamma_star=hi, bracket=(lo, hi), probes=probes,
                               tolerance=rel_tol)
    result.anomalies = _collect_anomalies(probes)
    return result


def _collect_anomalies(probes: List[ProbeResult]) -> List[str]:
    notes = [p.anomaly for p in probes if p.anomaly]
    ordered = sorted(probes, key=lambda p: p.gamma)
    worst_feasible_below = None
    for p in ordered:
        if p.feasible:
            worst_feasible_below = p.gamma
        elif worst_feasible_below is not None:
            notes.append(
                f"verdict monotonicity violated: infeasible at gamma={p.gamma:.6g} "
                f"above feasible gamma={worst_feasible_below:.6g}")
    return notes

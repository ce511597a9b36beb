"""Closed-loop time integration and time-domain gain measurements.

The semi-discrete loops are stiff (the inverse-square potential puts
eigenvalues at the mesh scale), so integration is implicit trapezoidal with a
pre-factored step matrix: unconditionally stable and second order.  The
module also produces the three disturbance families used to probe the
attenuation bound: seeded white noise, a sinusoid at the frequency-response
peak aligned with the worst input direction, and the saddle-point disturbance
``w = gamma^-2 B1* P y`` under which the loop follows the autonomous
full-loop flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg as sla

from .system import SystemRealization


@dataclass
class Trajectory:
    """Time grid, states, outputs, disturbances and running energies."""

    times: np.ndarray          # (steps+1,)
    states: np.ndarray         # (n, steps+1)
    outputs: np.ndarray        # (n_z, steps+1), z = C1 y + D1 F y
    disturbances: np.ndarray   # (n_w, steps+1)
    energy_z: np.ndarray       # running integral of |z|_w^2
    energy_w: np.ndarray       # running integral of |w|_w^2
    energy_y: np.ndarray       # running integral of |y|_w^2
    space_weights: np.ndarray  # quadrature weights of the state space


class FeedbackDisturbance:
    """Disturbance generated by a state feedback ``w = K y`` inside the step."""

    def __init__(self, K: np.ndarray):
        self.K = np.asarray(K, dtype=float)


DisturbanceLike = Union[None, np.ndarray, Callable[[float], np.ndarray], FeedbackDisturbance]


def _space_norm2(V: np.ndarray, w_space: np.ndarray) -> np.ndarray:
    """Pointwise-in-time squared weighted norms of the columns of V."""
    return np.einsum("it,i,it->t", V, w_space, V)


def _running_trapezoid(f: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * dt * (f[1:] + f[:-1]))
    return out


def integrate_closed_loop(sys: SystemRealization, F: np.ndarray,
                          w_source: DisturbanceLike,
                          y0: np.ndarray, T: float, dt: float) -> Trajectory:
    """Trapezoidal integration of ``y' = (A + B2 F) y + B1 w``.

    ``w_source`` may be None (no disturbance), an array sampled on the step
    grid (shape ``(n_w, steps+1)``), a callable ``t -> w(t)``, or a
    :class:`FeedbackDisturbance` whose gain is folded into the implicit step
    so the generated loop is integrated exactly as an autonomous system.
    Unstable loops are allowed (open-loop diagnostics need them); integration
    aborts on a nonfinite state.
    """
    if dt <= 0 or T <= dt:
        raise ValueError("need 0 < dt < T")
    n = sys.n
    steps = int(round(T / dt))
    times = dt * np.arange(steps + 1)
    Acl = sys.A + sys.B2 @ F

    n_w = sys.B1.shape[1]
    if isinstance(w_source, FeedbackDisturbance):
        Acl = Acl + sys.B1 @ w_source.K
        W_sig = None
    elif w_source is None:
        W_sig = np.zeros((n_w, steps + 1))
    elif callable(w_source):
        W_sig = np.column_stack([np.asarray(w_source(t), dtype=float) for t in times])
    else:
        W_sig = np.asarray(w_source, dtype=float)
        if W_sig.shape != (n_w, steps + 1):
            raise ValueError(f"disturbance samples must have shape ({n_w}, {steps + 1})")

    I = np.eye(n)
    lu = sla.lu_factor(I - 0.5 * dt * Acl)
    Mplus = I + 0.5 * dt * Acl

    Y = np.empty((n, steps + 1))
    Y[:, 0] = y0
    for k in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            rhs = Mplus @ Y[:, k]
            if W_sig is not None:
                rhs = rhs + 0.5 * dt * (sys.B1 @ (W_sig[:, k] + W_sig[:, k + 1]))
        if not np.all(np.isfinite(rhs)):
            raise FloatingPointError(f"state became nonfinite at t={times[k + 1]:.4g}")
        Y[:, k + 1] = sla.lu_solve(lu, rhs)
        if not np.all(np.isfinite(Y[:, k + 1])):
            raise FloatingPointError(f"state became nonfinite at t={times[k + 1]:.4g}")

    if isinstance(w_source, FeedbackDisturbance):
        W_sig = w_source.K @ Y

    Z = (sys.C1 + sys.D1 @ F) @ Y
    w = sys.weights
    wz = w if Z.shape[0] == sys.n else np.ones(Z.shape[0])
    ww = w if W_sig.shape[0] == sys.n else np.ones(W_sig.shape[0])
    return Trajectory(
        times=times, states=Y, outputs=Z, disturbances=W_sig,
        energy_z=_running_trapezoid(_space_norm2(Z, wz), dt),
        energy_w=_running_trapezoid(_space_norm2(W_sig, ww), dt),
        energy_y=_running_trapezoid(_space_norm2(Y, w), dt),
        space_weights=w)


def integrate_autonomous(M: np.ndarray, y0: np.ndarray, T: float, dt: float,
                         space_weights: np.ndarray) -> Trajectory:
    """Trapezoidal integration of the autonomous system ``y' = M y``.

    Used as the independent reference for the saddle-point closure check: the
    loop driven by the saddle disturbance must reproduce this flow for the
    full-loop generator.
    """
    n = M.shape[0]
    steps = int(round(T / dt))
    times = dt * np.arange(steps + 1)
    lu = sla.lu_factor(np.eye(n) - 0.5 * dt * M)
    Mplus = np.eye(n) + 0.5 * dt * M
    Y = np.empty((n, steps + 1))
    Y[:, 0] = y0
    for k in range(steps):
        Y[:, k + 1] = sla.lu_solve(lu, Mplus @ Y[:, k])
    zero = np.zeros((1, steps + 1))
    e_y = _running_trapezoid(_space_norm2(Y, space_weights), dt)
    return Trajectory(times=times, states=Y, outputs=zero, disturbances=zero,
                      energy_z=np.zeros(steps + 1), energy_w=np.zeros(steps + 1),
                      energy_y=e_y, space_weights=space_weights)


def worst_case_disturbance(sys: SystemRealization, P: np.ndarray, gamma: float,
                           y: np.ndarray) -> np.ndarray:
    """Saddle-point disturbance ``gamma^-2 B1* P y`` for the current state."""
    return (sys.b1_adjoint() @ (P @ y)) / gamma**2


def worst_case_gain(sys: SystemRealization, P: np.ndarray, gamma: float) -> FeedbackDisturbance:
    """The feedback form of the saddle-point disturbance."""
    return FeedbackDisturbance((sys.b1_adjoint() @ P) / gamma**2)


def worst_case_signal(sys: SystemRealization, P: np.ndarray, gamma: float,
                      y0_seed: np.ndarray, F: np.ndarray,
                      T: float, dt: float) -> tuple[np.ndarray, Trajectory]:
    """Tabulated saddle disturbance along the autonomous full-loop flow.

    Integrates the loop from ``y0_seed`` with the saddle disturbance folded
    in (the autonomous full-loop dynamics) and returns the disturbance signal
    sampled on the step grid together with the reference trajectory.
    """
    ref = integrate_closed_loop(sys, F, worst_case_gain(sys, P, gamma), y0_seed, T, dt)
    return ref.disturbances, ref


def white_noise(sys: SystemRealization, T: float, dt: float, seed: int,
                amplitude: float = 1.0) -> np.ndarray:
    """Seeded white-noise disturbance samples on the step grid."""
    steps = int(round(T / dt))
    rng = np.random.default_rng(seed)
    return amplitude * rng.standard_normal((sys.B1.shape[1], steps + 1))


def peak_sinusoid(sys: SystemRealization, F: np.ndarray, omega: float,
                  T: float, dt: float, amplitude: float = 1.0) -> np.ndarray:
    """Sinusoid at ``omega`` aligned with the worst input direction.

    The direction is the leading right singular vector of the transfer matrix
    at ``omega`` (computed in the symmetric coordinates, mapped back to the
    weighted ones); driving with it approaches the transfer gain at that
    frequency for long horizons.
    """
    from .hinf import _euclidean_loop
    Acl, B1, Ccl = _euclidean_loop(sys, F)
    n = Acl.shape[0]
    X = np.linalg.solve(1j * omega * np.eye(n) - Acl, B1)
    _, _, Vh = np.linalg.svd(Ccl @ X)
    v = Vh[0].conj()
    if sys.B1.shape[0] == sys.B1.shape[1]:
        v = v / np.sqrt(sys.weights)     # back to weighted coordinates
    steps = int(round(T / dt))
    t = dt * np.arange(steps + 1)
    signal = np.real(np.outer(v, np.exp(1j * omega * t)))
    return amplitude * signal


def gain_ratio(traj: Trajectory, washout: float = 0.0) -> float:
    """Energy gain ``sqrt(int |z|^2 / int |w|^2)`` over [washout, T].

    Defined for trajectories started at zero state; a zero-disturbance run
    has no gain and raises.
    """
    t = traj.times
    if washout < 0 or washout >= t[-1]:
        raise ValueError("washout must lie in [0, T)")
    k0 = int(np.searchsorted(t, washout))
    ez = traj.energy_z[-1] - traj.energy_z[k0]
    ew = traj.energy_w[-1] - traj.energy_w[k0]
    if ew <= 0.0:
        raise ValueError("zero-disturbance trajectory: gain ratio undefined")
    return float(np.sqrt(ez / ew))


def decay_rate(traj: Trajectory) -> float:
    """Least-squares slope of ``log |y(t)|_w`` over the final half of the run.

    Samples that have fallen to the round-off floor (1e-14 of the peak norm)
    are dropped so the fit covers the pre-floor window only.
    """
    Y = traj.states
    norms = np.sqrt(np.einsum("it,i,it->t", Y, traj.space_weights, Y))
    t = traj.times
    floor = 1e-14 * max(norms.max(), 1e-300)
    valid = np.flatnonzero(norms > floor)
    if len(valid) < 2:
        raise ValueError("state on the round-off floor over the whole run")
    k_last = valid[-1]
    lo = (k_last + 1) // 2
    keep = valid[valid >= lo]
    if len(keep) < 2:
        keep = valid[-max(2, len(valid) // 2):]
    coef = np.polyfit(t[keep], np.log(norms[keep]), 1)
    return float(coef[0])

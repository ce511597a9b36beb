"""Closed-loop transfer gains: frequency sweep and Hamiltonian certificates.

The disturbance-to-output map of a loop ``A + B2 F`` with output
``(C1 + D1 F) y`` is evaluated on the imaginary axis in the weighted
geometry: all gains are singular values after the symmetric similarity with
``W^{1/2}``, so they coincide with weighted-L2 operator norms.  Two
independent routes to the supremum are provided: a log-spaced sweep with
local refinement (a certified lower bound) and bisection on the Hamiltonian
imaginary-axis eigenvalue test (the bounded-real characterization, accurate
to the requested tolerance).  The disturbance feeds through ``B1`` only, so
the loop is strictly proper and the sweep decays at high frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import weighted
from .system import SystemRealization


def _euclidean_loop(sys: SystemRealization, F: np.ndarray):
    """Closed-loop (A_cl, B1, C_cl) in W^{1/2}-coordinates."""
    w = sys.weights
    Acl = weighted.to_euclidean(sys.A + sys.B2 @ F, w)
    Ccl = weighted.to_euclidean(sys.C1, w) + weighted.input_to_euclidean(sys.D1, w) @ weighted.output_to_euclidean(F, w)
    if sys.B1.shape[0] == sys.B1.shape[1]:
        B1 = weighted.to_euclidean(sys.B1, w)
    else:
        B1 = weighted.input_to_euclidean(sys.B1, w)
    return Acl, B1, Ccl


def transfer_value(sys: SystemRealization, F: np.ndarray, omega: float) -> float:
    """Largest weighted singular value of the loop transfer at frequency ``omega``.

    The resolvent convention is ``(i omega I - A_cl)^{-1}``, matching the
    Laplace transform of the semigroup; the loop must be stable so the
    imaginary axis lies in the resolvent set.
    """
    Acl, B1, Ccl = _euclidean_loop(sys, F)
    n = Acl.shape[0]
    X = np.linalg.solve(1j * omega * np.eye(n) - Acl, B1)
    return float(np.linalg.svd(Ccl @ X, compute_uv=False)[0])


@dataclass
class FrequencyResponse:
    """Gain curve over frequency with the refined peak."""

    omegas: np.ndarray
    gains: np.ndarray
    peak_omega: float
    peak_gain: float


def frequency_sweep(sys: SystemRealization, F: np.ndarray,
                    omega_range: Tuple[float, float] = (1e-3, 1e4),
                    n_points: int = 400,
                    refine_rel_tol: float = 1e-4) -> FrequencyResponse:
    """Log-spaced gain sweep plus golden-section refinement of the peak.

    Zero frequency is always probed as well (the response of these loops is
    often monotone decreasing).  The returned peak is a lower bound on the
    true supremum, stationary to ``refine_rel_tol`` on the local grid.
    """
    if spectral_abscissa_of_loop(sys, F) >= 0:
        raise ValueError("frequency sweep requires a stable loop")
    omegas = np.logspace(np.log10(omega_range[0]), np.log10(omega_range[1]), n_points)
    omegas = np.concatenate(([0.0], omegas))
    gains = np.array([transfer_value(sys, F, om) for om in omegas])
    k = int(np.argmax(gains))
    lo = omegas[max(k - 1, 0)]
    hi = omegas[min(k + 1, len(omegas) - 1)]
    peak_omega, peak_gain = _golden_refine(
        lambda om: transfer_value(sys, F, om), lo, hi, omegas[k], gains[k], refine_rel_tol)
    return FrequencyResponse(omegas=omegas, gains=gains,
                             peak_omega=peak_omega, peak_gain=peak_gain)


def _golden_refine(f, lo, hi, om0, g0, rel_tol, max_iter=80):
    """Golden-section maximum of ``f`` on [lo, hi]; returns (argmax, max)."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best_om, best_g = om0, g0
    for _ in range(max_iter):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if max(fc, fd) > best_g:
            best_g = max(fc, fd)
            best_om = c if fc > fd else d
        if abs(fc - fd) <= 0.01 * rel_tol * max(best_g, 1e-300):
            break
    return float(best_om), float(best_g)


def spectral_abscissa_of_loop(sys: SystemRealization, F: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(sys.A + sys.B2 @ F).real))


def hamiltonian_test(sys: SystemRealization, F: np.ndarray, gamma: float) -> bool:
    """Bounded-real certificate: True iff the closed-loop gain is below ``gamma``.

    Builds the 2n x 2n Hamiltonian of the loop in the symmetric coordinates
    and requires every eigenvalue to stay farther than ``1e-8 ||A||`` from the
    imaginary axis; for a stable, strictly proper loop this is equivalent to
    the strict gain bound.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    Acl, B1, Ccl = _euclidean_loop(sys, F)
    if np.max(np.linalg.eigvals(Acl).real) >= 0:
        raise ValueError("the Hamiltonian gain test requires a stable loop")
    n = Acl.shape[0]
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = Acl
    H[:n, n:] = (B1 @ B1.T) / gamma**2
    H[n:, :n] = -(Ccl.T @ Ccl)
    H[n:, n:] = -Acl.T
    ev = np.linalg.eigvals(H)
    margin = 1e-8 * max(np.linalg.norm(Acl, 2), 1e-300)
    return bool(np.min(np.abs(ev.real)) > margin)


def hamiltonian_bisection(sys: SystemRealization, F: np.ndarray,
                          rel_tol: float = 1e-4,
                          bracket: Optional[Tuple[float, float]] = None) -> float:
    """Closed-loop gain via bisection on the Hamiltonian test.

    The initial bracket is grown geometrically from a one-point gain sample;
    bisection then narrows it to relative width ``rel_tol`` and returns the
    upper (certified) end.  Agreement with the sweep peak is a cross-method
    consistency check exercised by the test-suite, not enforced here.
    """
    Acl, B1, Ccl = _euclidean_loop(sys, F)
    if np.max(np.linalg.eigvals(Acl).real) >= 0:
        raise ValueError("gain bisection requires a stable loop")
    if np.linalg.norm(B1) == 0.0 or np.linalg.norm(Ccl) == 0.0:
        return 0.0
    if bracket is None:
        g0 = max(transfer_value(sys, F, 0.0), 1e-12)
        lo, hi = g0, 2.0 * g0
        while not hamiltonian_test(sys, F, hi):
            lo = hi
            hi *= 2.0
            if hi > 1e12 * g0:
                raise ValueError("failed to bracket the closed-loop gain")
        while hamiltonian_test(sys, F, lo):
            hi = lo
            lo *= 0.5
            if lo < 1e-12 * g0:
                return 0.0
    else:
        lo, hi = bracket
    while (hi - lo) / hi > rel_tol:
        mid = 0.5 * (lo + hi)
        if hamiltonian_test(sys, F, mid):
            hi = mid
        else:
            lo = mid
    return float(hi)

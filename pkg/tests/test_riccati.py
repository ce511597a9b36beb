import numpy as np
import pytest

import hardyctrl as hc
import hardyctrl.weighted as weighted
from hardyctrl.riccati import closed_loops

from _oracles import game_riccati_care, lyapunov_kron
from conftest import make_scalar, small_instance


def test_lyapunov_scalar_identity():
    X = hc.lyapunov_solve(np.array([[-1.0]]), np.array([[1.0]]), np.array([1.0]))
    assert X[0, 0] == pytest.approx(0.5)


def test_lyapunov_decoupled_modes():
    Acl = np.diag([-1.0, -2.0])
    X = hc.lyapunov_solve(Acl, np.eye(2), np.ones(2))
    np.testing.assert_allclose(X, np.diag([0.5, 0.25]), atol=1e-14)


def test_lyapunov_random_vs_kron_oracle():
    rng = np.random.default_rng(7)
    for trial in range(4):
        n = 5
        w = rng.uniform(0.5, 2.0, n)
        M = rng.standard_normal((n, n))
        Acl = M - (1.0 + np.abs(np.linalg.eigvals(M).real).max()) * np.eye(n)
        Qs = rng.standard_normal((n, n))
        Q = (Qs + (Qs.T * w[None, :]) / w[:, None]) / 2   # weighted-symmetric
        X = hc.lyapunov_solve(Acl, Q, w)
        X_oracle = lyapunov_kron(Acl, Q, w)
        np.testing.assert_allclose(X, X_oracle, rtol=1e-9, atol=1e-12)
        # residual of the weighted identity
        Astar = weighted.adjoint(Acl, w)
        R = Astar @ X + X @ Acl + Q
        assert np.linalg.norm(w[:, None] * R) <= 1e-12 * np.linalg.norm(w[:, None] * Q) * 50


def test_lyapunov_refuses_unstable_loop():
    with pytest.raises(ValueError):
        hc.lyapunov_solve(np.array([[0.5]]), np.array([[1.0]]), np.array([1.0]))


def test_spectral_abscissa_basics():
    assert hc.spectral_abscissa(-np.eye(3)) == pytest.approx(-1.0)
    assert hc.spectral_abscissa(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0, abs=1e-12)


def test_spectral_abscissa_dirichlet_laplacian():
    g = hc.build_grid("interval_1d", 200)
    A = hc.assemble_operator(g, 0.0, 0.0)
    assert hc.spectral_abscissa(A) == pytest.approx(-np.pi**2, rel=1e-2)


def test_lqr_initialize_scalar_closed_form():
    s = make_scalar()
    F0 = hc.lqr_initialize(s)
    assert F0[0, 0] == pytest.approx(-(1.0 + np.sqrt(2.0)), abs=1e-10)


def test_lqr_initialize_stable_system_accepts_zero_seed():
    s = make_scalar(a=-1.0)
    F0 = hc.lqr_initialize(s)
    assert hc.spectral_abscissa(s.A + s.B2 @ F0) < 0


def test_lqr_initialize_reports_unstabilizable():
    # two modes, control sees only the stable one
    s = make_scalar()
    s.A = np.diag([1.0, -1.0])
    s.B1 = np.eye(2)
    s.B2 = np.array([[0.0], [1.0]])
    s.C1 = np.eye(2)
    s.D1 = np.array([[0.0], [1.0]])
    s.weights = np.ones(2)
    with pytest.raises(ValueError, match="not stabilizable"):
        hc.lqr_initialize(s)


def test_newton_scalar_lqr_limit():
    s = make_scalar()
    sol = hc.newton_kleinman(s, np.inf)
    assert sol.P[0, 0] == pytest.approx(1.0 + np.sqrt(2.0), abs=1e-10)
    assert sol.status == "converged"


def test_newton_scalar_game_closed_form():
    s = make_scalar()
    sol = hc.newton_kleinman(s, 2.0)
    p = (2.0 + np.sqrt(7.0)) / 1.5
    assert sol.P[0, 0] == pytest.approx(p, abs=1e-10)
    assert sol.abscissa_control_loop == pytest.approx(1.0 - p, abs=1e-9)
    assert sol.abscissa_full_loop == pytest.approx(1.0 - 0.75 * p, abs=1e-9)
    assert sol.abscissa_full_loop < 0 and sol.abscissa_control_loop < 0
    assert hc.riccati_residual(s, sol.P, 2.0) <= 1e-12


def test_newton_b1_zero_equals_lqr(sys_1d):
    sys0 = hc.SystemRealization(
        A=sys_1d.A.copy(), B1=np.zeros_like(sys_1d.B1), B2=sys_1d.B2.copy(),
        C1=sys_1d.C1.copy(), D1=sys_1d.D1.copy(), weights=sys_1d.weights.copy(),
        masks=sys_1d.masks, grid=sys_1d.grid)
    sol_g = hc.newton_kleinman(sys0, 2.0)
    sol_inf = hc.newton_kleinman(sys0, np.inf)
    gap = np.linalg.norm(sol_g.P - sol_inf.P) / np.linalg.norm(sol_inf.P)
    assert gap <= 1e-10


def test_newton_large_gamma_approaches_lqr():
    s = make_scalar()
    sol_lqr = hc.newton_kleinman(s, np.inf)
    sol_big = hc.newton_kleinman(s, 1e6)
    assert abs(sol_big.P[0, 0] - sol_lqr.P[0, 0]) <= 1e-6 * abs(sol_lqr.P[0, 0])


def test_riccati_residual_zero_p_gives_observation_scale():
    s = make_scalar()
    r = hc.riccati_residual(s, np.zeros((1, 1)), 2.0)
    assert r == pytest.approx(1.0)   # raw norm of C1* C1 when P = 0


def test_riccati_residual_matches_manual(sys_1d, sol_1d):
    r = hc.riccati_residual(sys_1d, sol_1d.P, 0.15)
    assert r == pytest.approx(sol_1d.residual_norm, rel=1e-3)


def test_solution_symmetry_and_psd(sol_1d, sys_1d):
    G = sys_1d.weights[:, None] * sol_1d.P
    assert np.linalg.norm(G - G.T) <= 1e-12 * np.linalg.norm(G)
    assert sol_1d.min_eig_P >= -1e-10 * sol_1d.norm_P


def test_newton_quadratic_convergence(sys_1d):
    sol = hc.newton_kleinman(sys_1d, 0.15)
    hist = sol.history
    # monotone decrease up to the round-off stall
    for r0, r1 in zip(hist, hist[1:-1]):
        assert r1 <= r0
    # once inside the quadratic regime, residual roughly squares each step
    # (pairs ending below 1e-8 sit on the round-off floor and are skipped)
    inside = [r for r in hist if r < 1e-2]
    for r0, r1 in zip(inside, inside[1:]):
        if r1 > 1e-8:
            assert r1 <= 100.0 * r0**2


def test_against_dense_care_oracle(sys_1d, sol_1d):
    P_oracle = game_riccati_care(sys_1d, 0.15)
    gap = np.linalg.norm(sol_1d.P - P_oracle) / np.linalg.norm(P_oracle)
    assert gap <= 1e-8


def test_gamma_monotonicity_of_solutions():
    for seed in (0, 1):
        sys = small_instance(seed)
        F0 = hc.lqr_initialize(sys)
        g_hi = 5.0
        sol_hi = hc.newton_kleinman(sys, g_hi, F0=F0)
        from hardyctrl.gammasearch import feasibility_probe
        p_lo = feasibility_probe(sys, 0.4 * g_hi, F0=F0)
        if not p_lo.feasible:
            continue
        sol_lo = p_lo.solution
        diff = sol_lo.P - sol_hi.P
        ev = weighted.eigvalsh(diff, sys.weights)
        assert ev[0] >= -1e-8 * max(sol_lo.norm_P, sol_hi.norm_P)


def test_feedback_consistency(sol_1d, sys_1d):
    np.testing.assert_allclose(sol_1d.feedback,
                               -(sys_1d.b2_adjoint() @ sol_1d.P), atol=0)


def test_closed_loops_definitions(sys_1d, sol_1d):
    full, control = closed_loops(sys_1d, sol_1d.P, 0.15)
    B2B2P = sys_1d.B2 @ (sys_1d.b2_adjoint() @ sol_1d.P)
    B1B1P = sys_1d.B1 @ (sys_1d.b1_adjoint() @ sol_1d.P)
    np.testing.assert_allclose(full, sys_1d.A - B2B2P + B1B1P / 0.15**2, rtol=1e-12)
    np.testing.assert_allclose(control, sys_1d.A - B2B2P, rtol=1e-12)


def test_infeasible_gamma_reports_not_raises():
    s = make_scalar()
    sol = hc.newton_kleinman(s, 0.5)   # below gamma* = 1
    assert sol.status in ("infeasible", "inconclusive")

import numpy as np
import pytest
import scipy.integrate

from hyco import kernels
from hyco.coefficients import (
    DarcyParams,
    GrayScottParams,
    HeatParams,
    HelmholtzParams,
    heat_initial,
)
from hyco.grid import Domain2D, sample_spacetime
from hyco.solvers import (
    DivergenceError,
    SolverConfig,
    SolverFailure,
    apply_static_operator,
    assemble_static_matrix,
    physical_predict,
    simulate_grayscott,
    simulate_heat,
    simulate_heat_batch,
    solve_darcy,
    solve_helmholtz,
    solve_static,
)

HELM_TRUTH = HelmholtzParams(4.0, (-1.0, -1.0), 1.0, (2.0, 1.0))
HEAT_TRUTH = HeatParams(3.0, (-2.0, -2.0), 2.5, (1.0, 1.0))
DARCY_TRUTH = DarcyParams(0.5, np.array([[1.0, 2.0, 3.0], [4.0, -1.0, -2.0], [-3.0, -4.0, 5.0]]))
GS_TRUTH = GrayScottParams(2e-6, 0.8e-6, 0.018, 0.051)


def manufactured_problem(n):
    """kappa = 4 + x, eta^2 = 2 + y, exact solution sin(x)sin(y) on [-pi,pi]^2.

    f = -d/dx((4+x) u_x) - d/dy((4+x) u_y) + (2+y) u
      = -cos(x)sin(y) + 2(4+x)sin(x)sin(y) + (2+y)sin(x)sin(y)
    """
    d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, n, n)
    X, Y = d.node_mesh()
    kappa = 4.0 + X
    eta2 = 2.0 + Y
    exact = np.sin(X) * np.sin(Y)
    f = -np.cos(X) * np.sin(Y) + 2.0 * (4.0 + X) * exact + eta2 * exact
    return d, kappa, eta2, f, exact


def rel_l2(u, ref):
    return np.linalg.norm(u - ref) / np.linalg.norm(ref)


class TestStaticOrder:
    @pytest.mark.parametrize("method", ["cg", "direct"])
    def test_second_order_convergence(self, method):
        errs = []
        for n in (17, 33, 65):
            d, kappa, eta2, f, exact = manufactured_problem(n)
            cfg = SolverConfig(d)
            u = solve_static(kappa, eta2, f, cfg, method=method)
            errs.append(rel_l2(u, exact))
        for coarse, fine in zip(errs, errs[1:]):
            assert 3.0 < coarse / fine < 5.0

    def test_cg_matches_direct(self):
        d, kappa, eta2, f, _ = manufactured_problem(33)
        cfg = SolverConfig(d)
        u_cg = solve_static(kappa, eta2, f, cfg)
        u_dir = solve_static(kappa, eta2, f, cfg, method="direct")
        assert np.abs(u_cg - u_dir).max() < 1e-8

    def test_operator_matches_matrix(self):
        d, kappa, eta2, _, _ = manufactured_problem(17)
        rng = np.random.default_rng(5)
        u = np.zeros((17, 17))
        u[1:-1, 1:-1] = rng.normal(size=(15, 15))
        A = assemble_static_matrix(kappa, eta2, d)
        ref = A @ u[1:-1, 1:-1].ravel()
        got = apply_static_operator(kappa[None], eta2[None], u[None], d)[0]
        assert np.allclose(got[1:-1, 1:-1].ravel(), ref, atol=1e-10)

    def test_zero_rhs_gives_zero(self):
        d, kappa, eta2, _, _ = manufactured_problem(17)
        u = solve_static(kappa, eta2, np.zeros((17, 17)), SolverConfig(d))
        assert np.all(u == 0.0)

    def test_cg_rejects_indefinite_field(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 17, 17)
        X, Y = d.node_mesh()
        kappa = np.sin(X) * np.sin(Y) * 3.0  # strongly sign-changing
        f = np.ones_like(kappa)
        with pytest.raises(SolverFailure):
            solve_static(kappa, None, f, SolverConfig(d))


class TestBenchmarkStatic:
    def test_helmholtz_truth_close_to_reference(self):
        # at the true bump parameters the continuum solution is sin(x)sin(y)
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        u = solve_helmholtz(HELM_TRUTH, SolverConfig(d))
        X, Y = d.node_mesh()
        err = rel_l2(u.values[..., 0], np.sin(X) * np.sin(Y))
        assert err < 0.05

    def test_helmholtz_error_shrinks_with_resolution(self):
        errs = []
        for n in (18, 36, 72):
            d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, n, n)
            u = solve_helmholtz(HELM_TRUTH, SolverConfig(d))
            X, Y = d.node_mesh()
            errs.append(rel_l2(u.values[..., 0], np.sin(X) * np.sin(Y)))
        assert errs[2] < errs[1] < errs[0]

    def test_darcy_truth_solves_linear_system(self):
        # sign-changing conductivity goes through the direct path; verify the
        # discrete equations are satisfied
        from hyco.coefficients import darcy_kappa

        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        u = solve_darcy(DARCY_TRUTH, SolverConfig(d))
        X, Y = d.node_mesh()
        kappa = darcy_kappa(X, Y, DARCY_TRUTH)
        A = assemble_static_matrix(kappa, None, d)
        res = A @ u.values[1:-1, 1:-1, 0].ravel() - 1.0
        assert np.abs(res).max() < 1e-8
        assert np.all(u.values[0, :, 0] == 0.0)
        assert np.all(u.values[:, -1, 0] == 0.0)


class TestHeat:
    def test_single_mode_decay(self):
        # u0 = sin(x)sin(y) on [0,pi]^2 with kappa = 1 decays as e^{-2t}
        n = 64
        d = Domain2D(0.0, np.pi, 0.0, np.pi, n, n)
        X, Y = d.node_mesh()
        u0 = np.sin(X) * np.sin(Y)
        kappa = np.ones((1, n, n))
        t_end, nt = 0.1, 400
        out = np.zeros((1, nt + 1, n, n))
        status = np.zeros(1, dtype=np.int64)
        kernels.heat_rk4(kappa, u0, t_end / nt, nt, d.hx, d.hy, out, status)
        assert status[0] == 0
        ref = np.exp(-2.0 * t_end) * u0
        assert rel_l2(out[0, -1], ref) < 1e-3

    def test_numba_matches_numpy(self):
        n = 12
        d = Domain2D(-1.0, 1.0, -1.0, 1.0, n, n)
        rng = np.random.default_rng(2)
        kappa = 1.0 + rng.uniform(0, 1, size=(3, n, n))
        X, Y = d.node_mesh()
        u0 = np.sin(np.pi * X) * np.sin(np.pi * Y)
        a = np.zeros((3, 51, n, n))
        b = np.zeros((3, 51, n, n))
        sa = np.zeros(3, dtype=np.int64)
        sb = np.zeros(3, dtype=np.int64)
        kernels._heat_rk4_nb(kappa, u0, 1e-3, 50, d.hx, d.hy, a, sa)
        kernels.heat_rk4_numpy(kappa, u0, 1e-3, 50, d.hx, d.hy, b, sb)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_benchmark_frames(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        cfg = SolverConfig(d, nt=50, t_end=0.05)
        series = simulate_heat(HEAT_TRUTH, cfg)
        X, Y = d.node_mesh()
        # first frame reproduces the initial data exactly, including its
        # (tiny) nonzero boundary trace
        assert np.array_equal(series.values[0, :, :, 0], heat_initial(X, Y))
        # later frames honor the homogeneous boundary condition
        assert np.all(series.values[1:, 0, :, 0] == 0.0)
        assert np.all(series.values[1:, :, -1, 0] == 0.0)
        # diffusion shrinks the peak amplitude
        assert np.abs(series.values[-1]).max() < np.abs(series.values[0]).max()

    def test_divergence_guard(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        cfg = SolverConfig(d, nt=100, t_end=1.0)
        huge = HeatParams(1e5, (-2.0, -2.0), 2.5, (1.0, 1.0))
        with pytest.raises(DivergenceError):
            simulate_heat(huge, cfg)

    def test_batch_matches_single(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 14, 14)
        cfg = SolverConfig(d, nt=40, t_end=0.04)
        other = HeatParams(2.0, (-1.0, -1.0), 1.0, (0.5, 0.5))
        batch = simulate_heat_batch([HEAT_TRUTH, other], cfg)
        single = simulate_heat(other, cfg)
        assert np.array_equal(batch.values[1], single.values)


class TestGrayScott:
    def test_uniform_state_follows_reaction_ode(self):
        # spatially uniform fields kill diffusion; forward Euler must track
        # the pointwise reaction ODE
        n, nsteps, dt = 8, 400, 0.5
        u0 = np.full((n, n), 0.5)
        v0 = np.full((n, n), 0.25)
        out = np.zeros((1, nsteps + 1, n + 1, n + 1, 2))
        status = np.zeros(1, dtype=np.int64)
        kernels.gs_euler(
            np.array([GS_TRUTH.Du]), np.array([GS_TRUTH.Dv]), GS_TRUTH.F, GS_TRUTH.k,
            u0, v0, dt, nsteps, 1.0 / n, out, status,
        )
        F, k = GS_TRUTH.F, GS_TRUTH.k

        def rhs(t, y):
            u, v = y
            return [-u * v * v + F * (1 - u), u * v * v - (F + k) * v]

        sol = scipy.integrate.solve_ivp(
            rhs, (0, nsteps * dt), [0.5, 0.25], rtol=1e-10, atol=1e-12
        )
        field = np.unique(out[0, -1, :, :, 0])
        assert field.size == 1  # stays uniform
        assert out[0, -1, 0, 0, 0] == pytest.approx(sol.y[0, -1], abs=2e-3)
        assert out[0, -1, 0, 0, 1] == pytest.approx(sol.y[1, -1], abs=2e-3)

    def test_translation_equivariance(self):
        # integer-cell shifts commute with the periodic operator
        n, nsteps, dt = 16, 150, 0.4
        rng = np.random.default_rng(9)
        u0 = rng.uniform(0.2, 1.0, size=(n, n))
        v0 = rng.uniform(0.0, 0.6, size=(n, n))
        Du, Dv = np.array([2e-4]), np.array([1e-4])

        def run(a, b):
            out = np.zeros((1, nsteps + 1, n + 1, n + 1, 2))
            status = np.zeros(1, dtype=np.int64)
            kernels.gs_euler(Du, Dv, 0.018, 0.051, a, b, dt, nsteps, 1.0 / n, out, status)
            assert status[0] == 0
            return out[0, -1, :n, :n, :]

        base = run(u0, v0)
        shifted = run(np.roll(u0, (3, 5), axis=(0, 1)), np.roll(v0, (3, 5), axis=(0, 1)))
        assert np.allclose(np.roll(base, (3, 5), axis=(0, 1)), shifted, atol=1e-12)

    def test_numba_matches_numpy(self):
        n = 12
        rng = np.random.default_rng(4)
        u0 = rng.uniform(0, 1, size=(n, n))
        v0 = rng.uniform(0, 1, size=(n, n))
        Du = np.array([2e-4, 1e-4])
        Dv = np.array([1e-4, 3e-4])
        a = np.zeros((2, 81, n + 1, n + 1, 2))
        b = np.zeros((2, 81, n + 1, n + 1, 2))
        sa = np.zeros(2, dtype=np.int64)
        sb = np.zeros(2, dtype=np.int64)
        kernels._gs_euler_nb(Du, Dv, 0.018, 0.051, u0, v0, 0.3, 80, 1.0 / n, a, sa)
        kernels.gs_euler_numpy(Du, Dv, 0.018, 0.051, u0, v0, 0.3, 80, 1.0 / n, b, sb)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_stability_precheck(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 65, 65)
        cfg = SolverConfig(d, nt=10, t_end=2000.0)  # dt = 200, way past the limit
        fast = GrayScottParams(2e-3, 1e-3, 0.018, 0.051)
        with pytest.raises(ValueError):
            simulate_grayscott(fast, cfg)

    def test_wrapped_frames_close_the_square(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 17, 17)
        cfg = SolverConfig(d, nt=20, t_end=10.0)
        series = simulate_grayscott(GS_TRUTH, cfg)
        assert np.array_equal(series.values[:, -1, :, :], series.values[:, 0, :, :])
        assert np.array_equal(series.values[:, :, -1, :], series.values[:, :, 0, :])
        # interpolation across the seam works
        got = sample_spacetime(series, 0.999, 0.5, 5.0)
        assert got.shape == (2,)


class TestPhysicalPredict:
    def test_static_shapes(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        pts = np.array([[0.0, 0.0], [1.0, -1.0]])
        out = physical_predict("helmholtz", HELM_TRUTH, SolverConfig(d), pts)
        assert out.shape == (2, 1)

    def test_dynamic_shapes(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 17, 17)
        cfg = SolverConfig(d, nt=10, t_end=5.0)
        pts = np.array([[0.5, 0.5, 0.0], [0.25, 0.75, 5.0]])
        out = physical_predict("grayscott", GS_TRUTH, cfg, pts)
        assert out.shape == (2, 2)

    def test_unknown_kind(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 5, 5)
        with pytest.raises(ValueError):
            physical_predict("wave", None, SolverConfig(d), np.zeros((1, 2)))

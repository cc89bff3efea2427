import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyco.grid import (
    Domain2D,
    GridField2D,
    OutOfDomainError,
    SpaceTimeField,
    sample_space,
    sample_space_batch,
    sample_spacetime,
    sample_spacetime_batch,
)


def unit_domain(n=3):
    return Domain2D(0.0, 1.0, 0.0, 1.0, n, n)


class TestDomain:
    def test_spacing(self):
        d = Domain2D(-np.pi, np.pi, -np.pi, np.pi, 18, 18)
        assert d.hx == pytest.approx(2 * np.pi / 17)
        assert d.hy == pytest.approx(2 * np.pi / 17)

    def test_node_mesh_shapes(self):
        d = Domain2D(0.0, 2.0, 0.0, 1.0, 5, 3)
        X, Y = d.node_mesh()
        assert X.shape == (5, 3)
        # axis 0 is x: X varies along rows, Y along columns
        assert np.allclose(X[:, 0], np.linspace(0, 2, 5))
        assert np.allclose(Y[0, :], np.linspace(0, 1, 3))

    def test_node_points_order(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 3, 3)
        pts = d.node_points()
        assert pts.shape == (9, 2)
        # row-major over (i, j): y varies fastest
        assert np.allclose(pts[0], [0.0, 0.0])
        assert np.allclose(pts[1], [0.0, 0.5])
        assert np.allclose(pts[3], [0.5, 0.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            Domain2D(1.0, 0.0, 0.0, 1.0, 4, 4)
        with pytest.raises(ValueError):
            Domain2D(0.0, 1.0, 0.0, 1.0, 2, 4)

    def test_contains_edge_tolerance(self):
        d = unit_domain()
        assert d.contains(1.0 + 1e-12, 0.5)
        assert not d.contains(1.1, 0.5)


class TestBilinear:
    def test_product_surface_oracle(self):
        # values = x * y on a 3x3 grid of [0,1]^2; bilinear interp of a bilinear
        # function on one cell is exact: at (0.25, 0.25) it must give 0.0625
        d = unit_domain(3)
        X, Y = d.node_mesh()
        f = GridField2D(d, X * Y)
        out = sample_space(f, 0.25, 0.25)
        assert out.shape == (1,)
        assert out[0] == pytest.approx(0.0625, abs=1e-15)

    def test_nodes_exact(self):
        d = Domain2D(-1.0, 2.0, 0.5, 3.5, 7, 5)
        rng = np.random.default_rng(0)
        vals = rng.normal(size=(7, 5))
        f = GridField2D(d, vals)
        X, Y = d.node_mesh()
        got = sample_space(f, X.ravel(), Y.ravel())
        assert np.allclose(got[:, 0], vals.ravel(), atol=1e-13)

    def test_out_of_domain_raises(self):
        d = unit_domain()
        f = GridField2D(d, np.zeros((3, 3)))
        with pytest.raises(OutOfDomainError):
            sample_space(f, 1.5, 0.5)
        with pytest.raises(OutOfDomainError):
            sample_space(f, 0.5, -0.5)

    @settings(deadline=None, max_examples=40)
    @given(
        a=st.floats(-2, 2),
        b=st.floats(-2, 2),
        c=st.floats(-2, 2),
        x=st.floats(0, 1),
        y=st.floats(0, 1),
    )
    def test_linear_functions_reproduced(self, a, b, c, x, y):
        # bilinear interpolation is exact on a + b*x + c*y
        d = unit_domain(4)
        X, Y = d.node_mesh()
        f = GridField2D(d, a + b * X + c * Y)
        got = sample_space(f, x, y)[0]
        assert got == pytest.approx(a + b * x + c * y, abs=1e-9)

    def test_batch_matches_loop(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 6, 5)
        rng = np.random.default_rng(3)
        batch = rng.normal(size=(4, 6, 5, 2))
        xs = rng.uniform(0, 1, size=11)
        ys = rng.uniform(0, 1, size=11)
        got = sample_space_batch(batch, d, xs, ys)
        assert got.shape == (4, 11, 2)
        for b in range(4):
            ref = sample_space(GridField2D(d, batch[b]), xs, ys)
            assert np.allclose(got[b], ref, atol=1e-13)


class TestSpaceTime:
    def make_series(self):
        # values = t * x + y, linear in every axis so trilinear interp is exact
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 4, 4)
        X, Y = d.node_mesh()
        ts = np.linspace(0.0, 2.0, 5)
        frames = np.stack([t * X + Y for t in ts])[..., None]
        return SpaceTimeField(d, 0.0, 2.0, frames)

    def test_exact_on_separable_linear(self):
        s = self.make_series()
        rng = np.random.default_rng(7)
        xs = rng.uniform(0, 1, 20)
        ys = rng.uniform(0, 1, 20)
        ts = rng.uniform(0, 2, 20)
        got = sample_spacetime(s, xs, ys, ts)
        assert np.allclose(got[:, 0], ts * xs + ys, atol=1e-12)

    def test_endpoints(self):
        s = self.make_series()
        assert sample_spacetime(s, 0.5, 0.25, 0.0)[0] == pytest.approx(0.25)
        assert sample_spacetime(s, 0.5, 0.25, 2.0)[0] == pytest.approx(1.25)

    def test_time_out_of_range(self):
        s = self.make_series()
        with pytest.raises(OutOfDomainError):
            sample_spacetime(s, 0.5, 0.5, 2.5)

    def test_batch_matches_loop(self):
        d = Domain2D(0.0, 1.0, 0.0, 1.0, 5, 4)
        rng = np.random.default_rng(11)
        batch = rng.normal(size=(3, 6, 5, 4, 2))
        xs = rng.uniform(0, 1, 9)
        ys = rng.uniform(0, 1, 9)
        ts = rng.uniform(0, 1, 9)
        got = sample_spacetime_batch(batch, d, 0.0, 1.0, xs, ys, ts)
        assert got.shape == (3, 9, 2)
        for b in range(3):
            s = SpaceTimeField(d, 0.0, 1.0, batch[b])
            ref = sample_spacetime(s, xs, ys, ts)
            assert np.allclose(got[b], ref, atol=1e-13)

    def test_from_frames_and_dt(self):
        d = unit_domain(3)
        f0 = GridField2D(d, np.zeros((3, 3)))
        f1 = GridField2D(d, np.ones((3, 3)))
        s = SpaceTimeField.from_frames([f0, f1], 0.0, 0.5)
        assert s.nt == 2
        assert s.dt == pytest.approx(0.5)
        assert np.allclose(s.times(), [0.0, 0.5])


class TestImmutability:
    def test_field_values_read_only(self):
        d = unit_domain()
        f = GridField2D(d, np.zeros((3, 3)))
        with pytest.raises(ValueError):
            f.values[0, 0, 0] = 1.0

    def test_nonfinite_rejected(self):
        d = unit_domain()
        vals = np.zeros((3, 3))
        vals[1, 1] = np.nan
        with pytest.raises(ValueError):
            GridField2D(d, vals)

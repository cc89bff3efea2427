import numpy as np
import pytest

from hyco.nn import (
    AdamState,
    MlpArch,
    adam_step,
    gd_step,
    load_checkpoint,
    mlp_backward,
    mlp_forward,
    mlp_init,
    save_checkpoint,
)


def scalar_loss(params, arch, X, G):
    return float(np.sum(mlp_forward(params, arch, X) * G))


def numeric_grads(params, arch, X, G, coords, e):
    out = []
    for li, flat in coords:
        pp = [p.copy() for p in params]
        pp[li].ravel()[flat] += e
        jp = scalar_loss(pp, arch, X, G)
        pp[li].ravel()[flat] -= 2 * e
        jm = scalar_loss(pp, arch, X, G)
        out.append((jp - jm) / (2 * e))
    return np.array(out)


def sample_coords(params, n, rng):
    sizes = np.array([p.size for p in params])
    total = sizes.sum()
    flats = rng.choice(total, size=min(n, total), replace=False)
    coords = []
    bounds = np.cumsum(sizes)
    for f in flats:
        li = int(np.searchsorted(bounds, f, side="right"))
        off = f - (bounds[li - 1] if li > 0 else 0)
        coords.append((li, int(off)))
    return coords


def relu_masks(params, arch, X):
    _, (zs, _) = mlp_forward(params, arch, X, return_cache=True)
    return [z > 0 for z in zs]


class TestForward:
    def test_hand_computed_plain(self):
        # 1 -> 1 -> 1 relu chain: y = W * relu(A x + b)
        arch = MlpArch(1, 1, (1,), "relu")
        params = [np.array([[2.0]]), np.array([-1.0]), np.array([[3.0]])]
        y = mlp_forward(params, arch, np.array([[1.0]]))
        assert y[0, 0] == pytest.approx(3.0)  # relu(2*1 - 1) * 3
        y = mlp_forward(params, arch, np.array([[0.0]]))
        assert y[0, 0] == pytest.approx(0.0)  # relu(-1) = 0

    def test_hand_computed_backward_plain(self):
        arch = MlpArch(1, 1, (1,), "relu")
        params = [np.array([[2.0]]), np.array([-1.0]), np.array([[3.0]])]
        g = mlp_backward(params, arch, np.array([[1.0]]), np.array([[1.0]]))
        assert g[2][0, 0] == pytest.approx(1.0)  # d/dW = relu(z) = 1
        assert g[1][0] == pytest.approx(3.0)  # d/db = W * relu'(z)
        assert g[0][0, 0] == pytest.approx(3.0)  # d/dA = W * relu'(z) * x

    def test_residual_blocks_reduce_to_head_when_w_zero(self):
        arch = MlpArch(2, 1, (8, 8), "tanh", residual=True)
        params = mlp_init(arch, 0)
        for i in range(2):
            params[3 * i + 2] = np.zeros_like(params[3 * i + 2])
        X = np.random.default_rng(1).normal(size=(5, 2))
        y = mlp_forward(params, arch, X)
        assert np.allclose(y, X @ params[-1].T)

    def test_shapes(self):
        arch = MlpArch(3, 2, (16, 16, 16), "relu")
        params = mlp_init(arch, 7)
        assert [p.shape for p in params] == arch.param_shapes()
        y = mlp_forward(params, arch, np.zeros((4, 3)))
        assert y.shape == (4, 2)

    def test_residual_needs_uniform_width(self):
        with pytest.raises(ValueError):
            MlpArch(2, 1, (16, 32), "relu", residual=True)


class TestInit:
    def test_deterministic(self):
        arch = MlpArch(2, 1, (32, 32), "relu", residual=True)
        a = mlp_init(arch, 42)
        b = mlp_init(arch, 42)
        c = mlp_init(arch, 43)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_biases_zero_and_scale(self):
        arch = MlpArch(2, 1, (512,), "relu")
        params = mlp_init(arch, 0)
        assert np.all(params[1] == 0.0)
        # He scaling: std ~ sqrt(2 / fan_in)
        assert params[0].std() == pytest.approx(np.sqrt(2.0 / 2.0), rel=0.15)
        assert params[2].std() == pytest.approx(np.sqrt(2.0 / 512.0), rel=0.15)


class TestGradientCheck:
    @pytest.mark.parametrize("residual", [False, True])
    def test_tanh_matches_central_differences(self, residual):
        hidden = (64, 64) if not residual else (64, 64)
        arch = MlpArch(2, 1, hidden, "tanh", residual=residual)
        rng = np.random.default_rng(10)
        params = mlp_init(arch, 11)
        X = rng.normal(size=(7, 2))
        G = rng.normal(size=(7, 1))
        an = mlp_backward(params, arch, X, G)
        coords = sample_coords(params, 100, rng)
        fd = numeric_grads(params, arch, X, G, coords, 1e-5)
        an_sel = np.array([an[li].ravel()[f] for li, f in coords])
        rel = np.linalg.norm(fd - an_sel) / np.linalg.norm(an_sel)
        assert rel < 1e-5

    @pytest.mark.parametrize("residual", [False, True])
    def test_relu_matches_central_differences_kink_filtered(self, residual):
        arch = MlpArch(2, 1, (64, 64), "relu", residual=residual)
        rng = np.random.default_rng(20)
        params = mlp_init(arch, 21)
        X = rng.normal(size=(7, 2))
        G = rng.normal(size=(7, 1))
        an = mlp_backward(params, arch, X, G)
        coords = sample_coords(params, 150, rng)
        e = 1e-5
        base_masks = relu_masks(params, arch, X)
        keep, fd_vals = [], []
        for li, f in coords:
            ok = True
            for s in (+e, -e):
                pp = [p.copy() for p in params]
                pp[li].ravel()[f] += s
                masks = relu_masks(pp, arch, X)
                if any(not np.array_equal(a, b) for a, b in zip(masks, base_masks)):
                    ok = False
                    break
            if ok:
                keep.append((li, f))
        assert len(keep) > 50  # kinks are rare; most coordinates survive
        fd = numeric_grads(params, arch, X, G, keep, e)
        an_sel = np.array([an[li].ravel()[f] for li, f in keep])
        rel = np.linalg.norm(fd - an_sel) / np.linalg.norm(an_sel)
        assert rel < 1e-4

    def test_batch_gradient_is_sum_of_per_sample(self):
        arch = MlpArch(2, 2, (8,), "tanh")
        rng = np.random.default_rng(3)
        params = mlp_init(arch, 3)
        X = rng.normal(size=(4, 2))
        G = rng.normal(size=(4, 2))
        full = mlp_backward(params, arch, X, G)
        acc = [np.zeros_like(p) for p in params]
        for i in range(4):
            gi = mlp_backward(params, arch, X[i : i + 1], G[i : i + 1])
            acc = [a + b for a, b in zip(acc, gi)]
        assert all(np.allclose(a, b, atol=1e-12) for a, b in zip(full, acc))


class TestOptimizers:
    def test_adam_first_step_is_signed_lr(self):
        params = [np.array([1.0])]
        state = AdamState.for_params(params)
        out = adam_step(params, [np.array([4.0])], state, lr=0.1)
        # bias correction makes the first step lr * sign(g) up to eps
        assert out[0][0] == pytest.approx(0.9, abs=1e-6)
        assert state.step == 1

    def test_adam_against_reference_loop(self):
        # scalar quadratic J = p^2 / 2, grad = p
        p = np.array([1.0])
        state = AdamState.for_params([p])
        m = v = 0.0
        ref = 1.0
        lr, b1, b2, eps = 0.05, 0.9, 0.999, 1e-8
        for t in range(1, 6):
            g = ref
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            ref = ref - lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
            [p] = adam_step([p], [p.copy()], state, lr=lr)
        assert p[0] == pytest.approx(ref, rel=1e-12)

    def test_gd_step(self):
        out = gd_step([np.array([2.0, -1.0])], [np.array([1.0, 1.0])], lr=0.5)
        assert np.allclose(out[0], [1.5, -1.5])

    def test_nonfinite_gradient_raises(self):
        state = AdamState.for_params([np.zeros(2)])
        with pytest.raises(FloatingPointError):
            adam_step([np.zeros(2)], [np.array([np.nan, 0.0])], state, lr=0.1)
        with pytest.raises(FloatingPointError):
            gd_step([np.zeros(2)], [np.array([np.inf, 0.0])], lr=0.1)


class TestCheckpoint:
    def test_round_trip_exact(self, tmp_path):
        arch = MlpArch(3, 2, (16, 16), "relu", residual=False)
        params = mlp_init(arch, 5)
        path = tmp_path / "net.json"
        save_checkpoint(path, arch, params)
        arch2, params2 = load_checkpoint(path)
        assert arch2 == arch
        assert all(np.array_equal(a, b) for a, b in zip(params, params2))
        X = np.random.default_rng(0).normal(size=(6, 3))
        assert np.array_equal(mlp_forward(params, arch, X), mlp_forward(params2, arch2, X))

    def test_shape_mismatch_detected(self, tmp_path):
        arch = MlpArch(2, 1, (4,), "tanh")
        params = mlp_init(arch, 1)
        path = tmp_path / "net.json"
        save_checkpoint(path, arch, params)
        import json

        doc = json.loads(path.read_text())
        doc["params"][0] = [[0.0, 0.0]]
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError):
            load_checkpoint(path)

"""Time-stepping inner loops for the dynamic problems.

Each integrator exists twice: a plain numpy version (reference, and fallback
when numba is unavailable) and a numba-compiled version used by default.  Both
fill a caller-allocated trajectory array and a per-batch status vector
(0 = ok, 1 = diverged past the amplitude guard).
"""

from __future__ import annotations

import numpy as np

DIVERGENCE_LIMIT = 1e6

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


def heat_rk4_numpy(kappa, u0, dt, nsteps, hx, hy, out, status):
    """RK4 for u_t = div(kappa grad u), zero Dirichlet boundary.

    kappa: (B, nx, ny), u0: (nx, ny) shared across the batch,
    out: (B, nsteps+1, nx, ny), status: (B,) int64.
    """
    B, nx, ny = kappa.shape
    kxf = 0.5 * (kappa[:, :-1, :] + kappa[:, 1:, :])
    kyf = 0.5 * (kappa[:, :, :-1] + kappa[:, :, 1:])
    ihx2 = 1.0 / hx**2
    ihy2 = 1.0 / hy**2

    def L(w):
        fx = kxf * (w[:, 1:, :] - w[:, :-1, :])
        fy = kyf * (w[:, :, 1:] - w[:, :, :-1])
        r = np.zeros_like(w)
        r[:, 1:-1, 1:-1] = (fx[:, 1:, 1:-1] - fx[:, :-1, 1:-1]) * ihx2 + (
            fy[:, 1:-1, 1:] - fy[:, 1:-1, :-1]
        ) * ihy2
        return r

    out[:, 0] = u0
    u = np.broadcast_to(u0, (B, nx, ny)).copy()
    u[:, 0, :] = 0.0
    u[:, -1, :] = 0.0
    u[:, :, 0] = 0.0
    u[:, :, -1] = 0.0
    status[:] = 0
    for s in range(nsteps):
        k1 = L(u)
        k2 = L(u + (0.5 * dt) * k1)
        k3 = L(u + (0.5 * dt) * k2)
        k4 = L(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[:, s + 1] = u
        with np.errstate(invalid="ignore"):
            bad = ~(np.abs(u).max(axis=(1, 2)) <= DIVERGENCE_LIMIT)
        if bad.any():
            status[bad] = 1
            u = np.where(bad[:, None, None], 0.0, u)


@njit(cache=True)
def _heat_rk4_nb(kappa, u0, dt, nsteps, hx, hy, out, status):
    B, nx, ny = kappa.shape
    ihx2 = 1.0 / (hx * hx)
    ihy2 = 1.0 / (hy * hy)
    u = np.empty((nx, ny))
    k1 = np.zeros((nx, ny))
    k2 = np.zeros((nx, ny))
    k3 = np.zeros((nx, ny))
    k4 = np.zeros((nx, ny))
    for b in range(B):
        status[b] = 0
        for i in range(nx):
            for j in range(ny):
                out[b, 0, i, j] = u0[i, j]
                edge = i == 0 or i == nx - 1 or j == 0 or j == ny - 1
                u[i, j] = 0.0 if edge else u0[i, j]
        kb = kappa[b]
        for s in range(nsteps):
            _heat_apply(kb, u, ihx2, ihy2, k1)
            _heat_stage(kb, u, k1, 0.5 * dt, ihx2, ihy2, k2)
            _heat_stage(kb, u, k2, 0.5 * dt, ihx2, ihy2, k3)
            _heat_stage(kb, u, k3, dt, ihx2, ihy2, k4)
            big = False
            for i in range(1, nx - 1):
                for j in range(1, ny - 1):
                    u[i, j] += (dt / 6.0) * (
                        k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                    )
                    if not (abs(u[i, j]) <= DIVERGENCE_LIMIT):
                        big = True
            for i in range(nx):
                for j in range(ny):
                    out[b, s + 1, i, j] = u[i, j]
            if big:
                status[b] = 1
                break


@njit(cache=True, inline="always")
def _heat_apply(kb, w, ihx2, ihy2, r):
    nx, ny = w.shape
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            kxp = 0.5 * (kb[i, j] + kb[i + 1, j])
            kxm = 0.5 * (kb[i - 1, j] + kb[i, j])
            kyp = 0.5 * (kb[i, j] + kb[i, j + 1])
            kym = 0.5 * (kb[i, j - 1] + kb[i, j])
            r[i, j] = (
                kxp * (w[i + 1, j] - w[i, j]) - kxm * (w[i, j] - w[i - 1, j])
            ) * ihx2 + (
                kyp * (w[i, j + 1] - w[i, j]) - kym * (w[i, j] - w[i, j - 1])
            ) * ihy2


@njit(cache=True, inline="always")
def _heat_stage(kb, u, kprev, c, ihx2, ihy2, r):
    nx, ny = u.shape
    w = np.zeros((nx, ny))
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            w[i, j] = u[i, j] + c * kprev[i, j]
    _heat_apply(kb, w, ihx2, ihy2, r)


def heat_rk4(kappa, u0, dt, nsteps, hx, hy, out, status):
    if HAVE_NUMBA:
        _heat_rk4_nb(kappa, u0, float(dt), int(nsteps), float(hx), float(hy), out, status)
    else:  # pragma: no cover
        heat_rk4_numpy(kappa, u0, dt, nsteps, hx, hy, out, status)


def _wrap_periodic(frame_u, frame_v, out_frame):
    n = frame_u.shape[0]
    out_frame[:n, :n, 0] = frame_u
    out_frame[:n, :n, 1] = frame_v
    out_frame[n, :n, 0] = frame_u[0, :]
    out_frame[n, :n, 1] = frame_v[0, :]
    out_frame[:n, n, 0] = frame_u[:, 0]
    out_frame[:n, n, 1] = frame_v[:, 0]
    out_frame[n, n, 0] = frame_u[0, 0]
    out_frame[n, n, 1] = frame_v[0, 0]


def gs_euler_numpy(Du, Dv, F, k, u0, v0, dt, nsteps, h, out, status):
    """Forward Euler for the two-species reaction-diffusion system on a
    periodic grid of n unique nodes; trajectories are stored with the first
    row and column repeated so frames cover the closed unit square.

    Du, Dv: (B,), u0, v0: (n, n), out: (B, nsteps+1, n+1, n+1, 2).
    """
    B = Du.shape[0]
    n = u0.shape[0]
    ih2 = 1.0 / h**2

    def lap(w):
        return (
            np.roll(w, 1, axis=1)
            + np.roll(w, -1, axis=1)
            + np.roll(w, 1, axis=2)
            + np.roll(w, -1, axis=2)
            - 4.0 * w
        ) * ih2

    u = np.broadcast_to(u0, (B, n, n)).copy()
    v = np.broadcast_to(v0, (B, n, n)).copy()
    status[:] = 0
    for b in range(B):
        _wrap_periodic(u0, v0, out[b, 0])
    Dub = Du[:, None, None]
    Dvb = Dv[:, None, None]
    for s in range(nsteps):
        uvv = u * v * v
        un = u + dt * (Dub * lap(u) - uvv + F * (1.0 - u))
        vn = v + dt * (Dvb * lap(v) + uvv - (F + k) * v)
        u, v = un, vn
        for b in range(B):
            _wrap_periodic(u[b], v[b], out[b, s + 1])
        with np.errstate(invalid="ignore"):
            mu = np.abs(u).max(axis=(1, 2))
            mv = np.abs(v).max(axis=(1, 2))
            bad = ~((mu <= DIVERGENCE_LIMIT) & (mv <= DIVERGENCE_LIMIT))
        if bad.any():
            status[bad] = 1
            u = np.where(bad[:, None, None], 0.0, u)
            v = np.where(bad[:, None, None], 0.0, v)


@njit(cache=True)
def _gs_euler_nb(Du, Dv, F, k, u0, v0, dt, nsteps, h, out, status):
    B = Du.shape[0]
    n = u0.shape[0]
    ih2 = 1.0 / (h * h)
    u = np.empty((n, n))
    v = np.empty((n, n))
    un = np.empty((n, n))
    vn = np.empty((n, n))
    for b in range(B):
        status[b] = 0
        for i in range(n):
            for j in range(n):
                u[i, j] = u0[i, j]
                v[i, j] = v0[i, j]
        _gs_wrap_nb(u, v, out[b, 0])
        du = Du[b]
        dv = Dv[b]
        for s in range(nsteps):
            big = False
            for i in range(n):
                im = i - 1 if i > 0 else n - 1
                ip = i + 1 if i < n - 1 else 0
                for j in range(n):
                    jm = j - 1 if j > 0 else n - 1
                    jp = j + 1 if j < n - 1 else 0
                    lu = (u[im, j] + u[ip, j] + u[i, jm] + u[i, jp] - 4.0 * u[i, j]) * ih2
                    lv = (v[im, j] + v[ip, j] + v[i, jm] + v[i, jp] - 4.0 * v[i, j]) * ih2
                    uvv = u[i, j] * v[i, j] * v[i, j]
                    un[i, j] = u[i, j] + dt * (du * lu - uvv + F * (1.0 - u[i, j]))
                    vn[i, j] = v[i, j] + dt * (dv * lv + uvv - (F + k) * v[i, j])
                    if not (abs(un[i, j]) <= DIVERGENCE_LIMIT and abs(vn[i, j]) <= DIVERGENCE_LIMIT):
                        big = True
            for i in range(n):
                for j in range(n):
                    u[i, j] = un[i, j]
                    v[i, j] = vn[i, j]
            _gs_wrap_nb(u, v, out[b, s + 1])
            if big:
                status[b] = 1
                break


@njit(cache=True, inline="always")
def _gs_wrap_nb(u, v, out_frame):
    n = u.shape[0]
    for i in range(n):
        for j in range(n):
            out_frame[i, j, 0] = u[i, j]
            out_frame[i, j, 1] = v[i, j]
    for j in range(n):
        out_frame[n, j, 0] = u[0, j]
        out_frame[n, j, 1] = v[0, j]
    for i in range(n):
        out_frame[i, n, 0] = u[i, 0]
        out_frame[i, n, 1] = v[i, 0]
    out_frame[n, n, 0] = u[0, 0]
    out_frame[n, n, 1] = v[0, 0]


def gs_euler(Du, Dv, F, k, u0, v0, dt, nsteps, h, out, status):
    if HAVE_NUMBA:
        _gs_euler_nb(
            Du, Dv, float(F), float(k), u0, v0, float(dt), int(nsteps), float(h), out, status
        )
    else:  # pragma: no cover
        gs_euler_numpy(Du, Dv, F, k, u0, v0, dt, nsteps, h, out, status)

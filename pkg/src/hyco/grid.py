"""Uniform rectangular grids, field storage, and interpolation.

Fields live on the nodes of an axis-aligned box, x along axis 0 and y along
axis 1, so that flattening a value array row-major enumerates nodes in a fixed
order and serialized fields are bit-stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OutOfDomainError(ValueError):
    """Query point outside the domain closure (or time range)."""


# relative slack for points that land on the boundary up to roundoff
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Domain2D:
    """Axis-aligned box with nx * ny grid nodes, boundary included."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate box: need x_min < x_max and y_min < y_max")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("need nx >= 3 and ny >= 3 grid nodes")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    def node_mesh(self):
        """Coordinate arrays of shape (nx, ny)."""
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def node_points(self) -> np.ndarray:
        """All node coordinates as an (nx*ny, 2) array, row-major order."""
        X, Y = self.node_mesh()
        return np.column_stack([X.ravel(), Y.ravel()])

    def with_resolution(self, nx: int, ny: int) -> "Domain2D":
        return Domain2D(self.x_min, self.x_max, self.y_min, self.y_max, nx, ny)

    def contains(self, x, y) -> np.ndarray:
        tol_x = _EDGE_TOL * (self.x_max - self.x_min)
        tol_y = _EDGE_TOL * (self.y_max - self.y_min)
        x = np.asarray(x)
        y = np.asarray(y)
        return (
            (x >= self.x_min - tol_x)
            & (x <= self.x_max + tol_x)
            & (y >= self.y_min - tol_y)
            & (y <= self.y_max + tol_y)
        )


@dataclass(frozen=True)
class GridField2D:
    """Scalar or vector field on the nodes of a Domain2D.

    values has shape (nx, ny, k); a 2D array is accepted and treated as k=1.
    The array is made read-only so fields can be shared freely.
    """

    domain: Domain2D
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[:2] != (self.domain.nx, self.domain.ny):
            raise ValueError(
                f"values shape {v.shape} does not match grid "
                f"({self.domain.nx}, {self.domain.ny}, k)"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class SpaceTimeField:
    """A time series of fields on one spatial grid, frames equispaced in time.

    values has shape (nt, nx, ny, k) with frame f at time t0 + f*dt; nt here
    counts stored frames (at least 2).
    """

    domain: Domain2D
    t0: float
    t1: float
    values: np.ndarray

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ValueError("need t0 < t1")
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if v.ndim == 3:
            v = v[:, :, :, None]
        if v.ndim != 4 or v.shape[1:3] != (self.domain.nx, self.domain.ny):
            raise ValueError(
                f"values shape {v.shape} does not match (nt, {self.domain.nx}, "
                f"{self.domain.ny}, k)"
            )
        if v.shape[0] < 2:
            raise ValueError("need at least 2 frames")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_frames(cls, frames, t0: float, t1: float) -> "SpaceTimeField":
        frames = list(frames)
        if not frames:
            raise ValueError("need at least one frame")
        dom = frames[0].domain
        if any(f.domain != dom or f.k != frames[0].k for f in frames):
            raise ValueError("all frames must share one domain and component count")
        return cls(dom, t0, t1, np.stack([f.values for f in frames]))

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[3]

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.nt - 1)

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt)

    def frame(self, i: int) -> GridField2D:
        return GridField2D(self.domain, self.values[i])

    @property
    def frames(self):
        return tuple(self.frame(i) for i in range(self.nt))


def _fractional_index(lo, hi, n, q, what):
    """Map coordinates to (cell index, local weight) with an edge tolerance."""
    q = np.asarray(q, dtype=float)
    span = hi - lo
    f = (q - lo) / span * (n - 1)
    tol = _EDGE_TOL * (n - 1)
    if np.any(f < -tol) or np.any(f > (n - 1) + tol):
        bad = q.ravel()[np.argmax((f < -tol) | (f > (n - 1) + tol))]
        raise OutOfDomainError(f"{what}={bad} outside [{lo}, {hi}]")
    f = np.clip(f, 0.0, n - 1)
    i0 = np.minimum(f.astype(np.int64), n - 2)
    return i0, f - i0


def bilinear_weights(domain: Domain2D, x, y):
    """Cell indices and local coordinates for bilinear interpolation.

    Returns (i0, j0, tx, ty), each shaped like the broadcast of x and y.
    """
    i0, tx = _fractional_index(domain.x_min, domain.x_max, domain.nx, x, "x")
    j0, ty = _fractional_index(domain.y_min, domain.y_max, domain.ny, y, "y")
    return i0, j0, tx, ty


def _gather_bilinear(values, i0, j0, tx, ty):
    # values: (..., nx, ny, k); leading axes broadcast against the point axes
    w00 = (1 - tx) * (1 - ty)
    w10 = tx * (1 - ty)
    w01 = (1 - tx) * ty
    w11 = tx * ty
    v00 = values[..., i0, j0, :]
    v10 = values[..., i0 + 1, j0, :]
    v01 = values[..., i0, j0 + 1, :]
    v11 = values[..., i0 + 1, j0 + 1, :]
    return (
        w00[..., None] * v00
        + w10[..., None] * v10
        + w01[..., None] * v01
        + w11[..., None] * v11
    )


def sample_space(field: GridField2D, x, y) -> np.ndarray:
    """Bilinear interpolation of a grid field; exact at the nodes.

    Scalar x, y give a (k,) vector; array input gives (n, k).
    """
    scalar = np.isscalar(x) and np.isscalar(y)
    i0, j0, tx, ty = bilinear_weights(field.domain, x, y)
    out = _gather_bilinear(field.values, i0, j0, tx, ty)
    return out[0] if scalar and out.ndim == 2 else out


def sample_space_batch(values_batch: np.ndarray, domain: Domain2D, x, y) -> np.ndarray:
    """sample_space over a (B, nx, ny, k) stack of value arrays; returns (B, n, k)."""
    i0, j0, tx, ty = bilinear_weights(domain, x, y)
    return _gather_bilinear(values_batch, i0, j0, tx, ty)


def sample_spacetime(series: SpaceTimeField, x, y, t) -> np.ndarray:
    """Linear interpolation in time between frames, bilinear in space."""
    scalar = np.isscalar(x) and np.isscalar(y) and np.isscalar(t)
    out = sample_spacetime_batch(
        series.values[None], series.domain, series.t0, series.t1, x, y, t
    )[0]
    return out[0] if scalar and out.ndim == 2 else out


def sample_spacetime_batch(values_batch, domain, t0, t1, x, y, t) -> np.ndarray:
    """sample_spacetime over a (B, nt, nx, ny, k) stack; returns (B, n, k).

    Frame index and spatial cell are paired per query point.
    """
    nt = values_batch.shape[1]
    f0, tt = _fractional_index(t0, t1, nt, t, "t")
    i0, j0, tx, ty = bilinear_weights(domain, x, y)
    w00 = (1 - tx) * (1 - ty)
    w10 = tx * (1 - ty)
    w01 = (1 - tx) * ty
    w11 = tx * ty

    def frame_gather(f):
        return (
            w00[..., None] * values_batch[:, f, i0, j0, :]
            + w10[..., None] * values_batch[:, f, i0 + 1, j0, :]
            + w01[..., None] * values_batch[:, f, i0, j0 + 1, :]
            + w11[..., None] * values_batch[:, f, i0 + 1, j0 + 1, :]
        )

    lo = frame_gather(f0)
    hi = frame_gather(np.minimum(f0 + 1, nt - 1))
    return lo * (1 - tt)[..., None] + hi * tt[..., None]

"""Closed-form coefficient fields, forcings, and initial data for the four
benchmark scenarios, with the parameter containers they depend on.

All evaluation functions are vectorized over numpy arrays of coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_finite(name, *vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name}: parameters must be finite")


@dataclass(frozen=True)
class GaussianBumpParams:
    amplitude: float
    center: tuple[float, float]

    def __post_init__(self):
        _check_finite("GaussianBumpParams", self.amplitude, self.center)


def gaussian_bump(x, y, p: GaussianBumpParams):
    """amplitude * exp(-(x - cx)^2 - (y - cy)^2)."""
    cx, cy = p.center
    return p.amplitude * np.exp(-((x - cx) ** 2) - (y - cy) ** 2)


@dataclass(frozen=True)
class HelmholtzParams:
    """Two Gaussian bumps: one shapes the diffusion kappa, one the wave number eta."""

    alpha1: float
    c1: tuple[float, float]
    alpha2: float
    c2: tuple[float, float]

    names = ("alpha1", "c1x", "c1y", "alpha2", "c2x", "c2y")

    def __post_init__(self):
        _check_finite("HelmholtzParams", self.alpha1, self.c1, self.alpha2, self.c2)

    def to_vector(self) -> np.ndarray:
        return np.array([self.alpha1, *self.c1, self.alpha2, *self.c2], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "HelmholtzParams":
        v = np.asarray(v, dtype=float)
        return cls(v[0], (v[1], v[2]), v[3], (v[4], v[5]))


def helmholtz_coeffs(x, y, lam: HelmholtzParams):
    """Diffusion and wave-number fields: each is a Gaussian bump plus 1."""
    kappa = gaussian_bump(x, y, GaussianBumpParams(lam.alpha1, lam.c1)) + 1.0
    eta = gaussian_bump(x, y, GaussianBumpParams(lam.alpha2, lam.c2)) + 1.0
    return kappa, eta


# the bump parameters that generated the reference solution sin(x)sin(y)
HELMHOLTZ_TRUTH = HelmholtzParams(4.0, (-1.0, -1.0), 1.0, (2.0, 1.0))


def helmholtz_forcing(x, y):
    """Source term manufactured so that sin(x)sin(y) solves the problem at the
    reference bump parameters."""
    phi1 = gaussian_bump(x, y, GaussianBumpParams(HELMHOLTZ_TRUTH.alpha1, HELMHOLTZ_TRUTH.c1))
    phi2 = gaussian_bump(x, y, GaussianBumpParams(HELMHOLTZ_TRUTH.alpha2, HELMHOLTZ_TRUTH.c2))
    sx, cx = np.sin(x), np.cos(x)
    sy, cy = np.sin(y), np.cos(y)
    return (
        2.0 * (x + 1.0) * phi1 * cx * sy
        + 2.0 * (y + 1.0) * phi1 * sx * cy
        + ((phi2 + 1.0) ** 2 + 2.0 * (phi1 + 1.0)) * sx * sy
    )


@dataclass(frozen=True)
class HeatParams:
    """Two Gaussian bumps shaping the heat diffusion coefficient."""

    alpha1: float
    c1: tuple[float, float]
    alpha2: float
    c2: tuple[float, float]

    names = ("alpha1", "c1x", "c1y", "alpha2", "c2x", "c2y")

    def __post_init__(self):
        _check_finite("HeatParams", self.alpha1, self.c1, self.alpha2, self.c2)

    def to_vector(self) -> np.ndarray:
        return np.array([self.alpha1, *self.c1, self.alpha2, *self.c2], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "HeatParams":
        v = np.asarray(v, dtype=float)
        return cls(v[0], (v[1], v[2]), v[3], (v[4], v[5]))


def heat_kappa(x, y, lam: HeatParams):
    """Sum of two Gaussian bumps plus a 0.1 background."""
    b1 = gaussian_bump(x, y, GaussianBumpParams(lam.alpha1, lam.c1))
    b2 = gaussian_bump(x, y, GaussianBumpParams(lam.alpha2, lam.c2))
    return b1 + b2 + 0.1


def heat_initial(x, y):
    """Antisymmetric pair of Gaussian bumps at (1,1) and (-1,-1)."""
    return np.exp(-((x - 1.0) ** 2) - (y - 1.0) ** 2) - np.exp(
        -((x + 1.0) ** 2) - (y + 1.0) ** 2
    )


@dataclass(frozen=True)
class GrayScottParams:
    """Diffusivities of the two species plus the known feed and decay rates."""

    Du: float
    Dv: float
    F: float
    k: float

    names = ("Du", "Dv")

    def __post_init__(self):
        _check_finite("GrayScottParams", self.Du, self.Dv, self.F, self.k)
        if self.Du <= 0 or self.Dv <= 0:
            raise ValueError("GrayScottParams: diffusivities must be positive")

    def to_vector(self) -> np.ndarray:
        # F and k are known constants, not trainable
        return np.array([self.Du, self.Dv], dtype=float)

    def with_vector(self, v) -> "GrayScottParams":
        v = np.asarray(v, dtype=float)
        return GrayScottParams(v[0], v[1], self.F, self.k)


def grayscott_initial(x, y):
    """u = 1 on the closed ball of radius 0.1 around (1/2, 1/2), else 0; v = 1 - u."""
    inside = (np.asarray(x) - 0.5) ** 2 + (np.asarray(y) - 0.5) ** 2 <= 0.1**2
    u0 = np.where(inside, 1.0, 0.0)
    return u0, 1.0 - u0


@dataclass(frozen=True)
class DarcyParams:
    """Constant background C^2 plus a 3x3 bank of sine-product modes."""

    C: float
    A: np.ndarray

    names = ("C", "A11", "A12", "A13", "A21", "A22", "A23", "A31", "A32", "A33")

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.shape != (3, 3):
            raise ValueError("DarcyParams: A must be a 3x3 matrix")
        _check_finite("DarcyParams", self.C, A)
        A = A.copy()
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.C], self.A.ravel()])

    @classmethod
    def from_vector(cls, v) -> "DarcyParams":
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1:10].reshape(3, 3))


def darcy_kappa(x, y, lam: DarcyParams):
    """C^2 + sum_ij A_ij sin(pi (i+1) x / 4) sin(pi (j+1) y / 4), i, j = 1..3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(np.broadcast(x, y).shape, lam.C**2)
    for i in range(3):
        sx = np.sin(np.pi * (i + 2) * x / 4.0)
        for j in range(3):
            out = out + lam.A[i, j] * sx * np.sin(np.pi * (j + 2) * y / 4.0)
    return out

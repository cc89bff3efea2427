"""Hybrid collaborative inverse-problem toolkit: physical solvers, a synthetic
network surrogate, and the alternating trainer that couples them."""

__version__ = "0.1.0"

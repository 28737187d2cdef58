"""Projection of sampled maps onto the kink basis psi_y(x) = |x - y| / 2.

The basis gradients are step functions sign(x - y)/2, so the Gram matrix
of gradient inner products over the unit interval has the closed form
G_ij = (1 - 2 |y_i - y_j|) / 4.  Solving G a = <S, grad psi_i> recovers the
coefficients of the potential whose gradient best matches the samples.

A direct antiderivative of the samples (cumulative midpoint rule) gives the
same potential up to a constant in one dimension and is much cheaper; the
solver uses it by default and keeps the Gram route behind a flag.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import SamplingGrid, _frozen, make_grid


def basis_value(y_center, x):
    """psi centered at y_center evaluated at x: |x - y| / 2."""
    return 0.5 * np.abs(np.asarray(x, dtype=float) - y_center)


def basis_gradient(y_center, x):
    """Gradient of psi: sign(x - y) / 2, zero at the kink itself."""
    return 0.5 * np.sign(np.asarray(x, dtype=float) - y_center)


def gram_matrix(grid: SamplingGrid) -> np.ndarray:
    """Closed-form gradient Gram matrix G_ij = (1 - 2 |y_i - y_j|) / 4."""
    pts = grid.points
    return 0.25 * (1.0 - 2.0 * np.abs(pts[:, None] - pts[None, :]))


@lru_cache(maxsize=8)
def _gram_cholesky(n):
    # the matrix depends only on the grid size, so the factor is shared
    return cho_factor(gram_matrix(make_grid(n)))


@dataclass(frozen=True)
class PotentialCoefficients:
    """Coefficients a_n of a potential sum(a_n psi_{y_n}) on a grid."""

    grid: SamplingGrid
    alphas: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alphas", _frozen(self.alphas))
        if self.alphas.shape != (self.grid.n,):
            raise ValueError("alphas must match the grid size")


def project(grid: SamplingGrid, s_values) -> PotentialCoefficients:
    """Galerkin projection of map samples onto the basis gradients.

    Solves G a = b with b_i the midpoint-rule approximation of
    <S, grad psi_{y_i}>; the n = i term drops out automatically because the
    gradient vanishes at its own kink.  The reported residual is the sup
    distance between the reconstructed gradient and the samples at the
    grid points.
    """
    s = np.asarray(s_values, dtype=float)
    if s.shape != (grid.n,):
        raise ValueError("s_values must match the grid size")
    pts = grid.points
    down = 0.5 * np.sign(pts[None, :] - pts[:, None])  # grad psi_{y_i} at y_n
    b = down @ s / grid.n
    alphas = cho_solve(_gram_cholesky(grid.n), b)
    recon = -down @ alphas
    residual = float(np.max(np.abs(recon - s)))
    return PotentialCoefficients(grid=grid, alphas=alphas, residual=residual)


def reconstruct_potential(coeffs: PotentialCoefficients, x):
    """Evaluate sum(a_n psi_{y_n}) at x (scalar or array)."""
    pts = coeffs.grid.points
    x_arr = np.asarray(x, dtype=float)
    vals = 0.5 * np.abs(x_arr[..., None] - pts) @ coeffs.alphas
    return float(vals) if np.isscalar(x) else vals


def reconstruct_gradient(coeffs: PotentialCoefficients, x):
    """Evaluate sum(a_n grad psi_{y_n}) at x (scalar or array)."""
    pts = coeffs.grid.points
    x_arr = np.asarray(x, dtype=float)
    vals = 0.5 * np.sign(x_arr[..., None] - pts) @ coeffs.alphas
    return float(vals) if np.isscalar(x) else vals


def cumulative_potential(grid: SamplingGrid, s_values) -> np.ndarray:
    """Antiderivative of the samples at the grid points, midpoint rule.

    Fast 1D path: h(y_i) = integral of S from -1/2 to y_i with each sample
    owning its cell.  Agrees with the Gram projection up to a constant.
    """
    s = np.asarray(s_values, dtype=float)
    if s.shape != (grid.n,):
        raise ValueError("s_values must match the grid size")
    h = np.empty(grid.n)
    h[0] = 0.5 * s[0] / grid.n
    if grid.n > 1:
        h[1:] = h[0] + np.cumsum(0.5 * (s[:-1] + s[1:]) / grid.n)
    return h

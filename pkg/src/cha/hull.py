"""Lower convex hull of a sampled potential and the transformed gradient.

The hull flattens the potential exactly where characteristics have crossed;
the flat slope is the common position that the absorbed parcels share, i.e.
the shock location.  Contact points (hull touches the input) keep their own
gradient value, clipped into the hull subdifferential so the output stays
monotone; everywhere else the segment slope applies.
"""

from dataclasses import dataclass

import numpy as np

from .core import SamplingGrid, _frozen
from .hodge import PotentialCoefficients, project, reconstruct_gradient, reconstruct_potential


@dataclass(frozen=True)
class HullResult:
    """Hull values h_plus, hull gradient s_plus, and per-point contact flags."""

    grid: SamplingGrid
    h_plus: np.ndarray
    s_plus: np.ndarray
    contact: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_plus", _frozen(self.h_plus))
        object.__setattr__(self, "s_plus", _frozen(self.s_plus))
        flags = np.array(self.contact, dtype=bool)
        flags.setflags(write=False)
        object.__setattr__(self, "contact", flags)


def _lower_hull_vertices(x, h):
    """Monotone-chain lower hull indices; collinear points are kept."""
    stack = [0]
    for j in range(1, len(x)):
        while len(stack) >= 2:
            i0, i1 = stack[-2], stack[-1]
            cross = (x[i1] - x[i0]) * (h[j] - h[i0]) - (x[j] - x[i0]) * (h[i1] - h[i0])
            if cross < 0.0:  # middle point strictly above the chord
                stack.pop()
            else:
                break
        stack.append(j)
    return np.array(stack, dtype=int)


def lower_convex_hull(grid: SamplingGrid, h_values, gradients=None) -> HullResult:
    """Greatest convex minorant of the sampled potential at the grid points.

    When the sampled gradient of the input potential is supplied, contact
    points keep it (clipped into the hull subdifferential, which leaves the
    value untouched wherever the hull is locally identical to the input);
    otherwise vertices take the left-segment slope.
    """
    x = grid.points
    h = np.asarray(h_values, dtype=float)
    if h.shape != (grid.n,):
        raise ValueError("h_values must match the grid size")

    verts = _lower_hull_vertices(x, h)
    contact = np.zeros(grid.n, dtype=bool)
    contact[verts] = True

    h_plus = np.interp(x, x[verts], h[verts])
    h_plus[verts] = h[verts]

    seg = np.diff(h_plus) / np.diff(x)  # hull slope on each grid interval
    if gradients is None:
        s_plus = np.concatenate([[seg[0]], seg])
    else:
        g = np.asarray(gradients, dtype=float)
        if g.shape != (grid.n,):
            raise ValueError("gradients must match the grid size")
        lo = np.concatenate([[-np.inf], seg])
        hi = np.concatenate([seg, [np.inf]])
        s_plus = np.clip(g, lo, hi)

    return HullResult(grid=grid, h_plus=h_plus, s_plus=s_plus, contact=contact)


def hull_transform(coeffs: PotentialCoefficients) -> PotentialCoefficients:
    """Convex hull transform in coefficient space.

    Evaluates the potential and its gradient at the grid points, takes the
    lower hull, and projects the hull gradient back onto the basis.  The
    Gram Cholesky factor is cached per grid size, so the back projection
    reuses it.
    """
    pts = coeffs.grid.points
    h = reconstruct_potential(coeffs, pts)
    g = reconstruct_gradient(coeffs, pts)
    hulled = lower_convex_hull(coeffs.grid, h, gradients=g)
    return project(coeffs.grid, hulled.s_plus)

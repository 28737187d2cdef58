"""Monotone transport of the uniform parameter measure onto |du0|/TV(u0).

For smooth data the map is the quantile function of the derivative
measure, computed by trapezoid quadrature and bisection.  For atomic data
(jumps) each Dirac mass receives a block of consecutive parameter points,
all mapped to the jump location, with the carried values traversing the
jump linearly.
"""

from dataclasses import dataclass

import numpy as np

from .core import DegenerateDataError, InitialData, SamplingGrid, _frozen

# interior zero-density runs wider than this fraction of the domain are
# treated as genuine flat parts and rejected
_FLAT_FRACTION = 0.05

_QUADRATURE_START = 4097
_QUADRATURE_MAX = 2**18 + 1


@dataclass(frozen=True)
class InitialParametrization:
    """Sampled initial map s0 = S0(y_i) and carried values v0 = u0(s0)."""

    grid: SamplingGrid
    s0: np.ndarray
    v0: np.ndarray
    tv: float

    def __post_init__(self):
        object.__setattr__(self, "s0", _frozen(self.s0))
        object.__setattr__(self, "v0", _frozen(self.v0))
        if self.s0.shape != (self.grid.n,) or self.v0.shape != (self.grid.n,):
            raise ValueError("s0 and v0 must match the grid size")
        if not np.isfinite(self.tv) or self.tv <= 0.0:
            raise DegenerateDataError("total variation must be finite and positive")
        if np.any(np.diff(self.s0) < 0.0):
            raise ValueError("s0 must be non-decreasing")


def initial_map(data: InitialData, grid: SamplingGrid) -> InitialParametrization:
    """Build the parametrization of the given initial data on the grid."""
    if data.is_atomic:
        return _atomic_parametrization(data.jumps(), grid)
    if data.kind == "tabulated":
        return _tabulated_parametrization(data, grid)
    return _smooth_parametrization(data, grid)


def riemann_parametrization(ul, ur, x0, grid: SamplingGrid) -> InitialParametrization:
    """Single-jump parametrization: all mass at x0, values spread linearly.

    v0_i = ul + (y_i + 1/2) (ur - ul), so the block traverses the jump
    from ul to ur as the parameter crosses its interval.
    """
    if ul == ur:
        raise DegenerateDataError("riemann data needs distinct left/right states")
    q = grid.points + 0.5
    v0 = ul + q * (ur - ul)
    s0 = np.full(grid.n, float(x0))
    return InitialParametrization(grid=grid, s0=s0, v0=v0, tv=abs(ur - ul))


def _block_counts(weights, n):
    """Largest-remainder split of n points proportional to weights."""
    raw = np.asarray(weights, dtype=float) * n
    counts = np.floor(raw).astype(int)
    short = n - int(counts.sum())
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _atomic_parametrization(jumps, grid):
    if len(jumps) == 1:
        x0, ul, ur = jumps[0]
        return riemann_parametrization(ul, ur, x0, grid)
    sizes = np.array([abs(ur - ul) for _, ul, ur in jumps])
    tv = float(sizes.sum())
    if tv <= 0.0:
        raise DegenerateDataError("atomic data has zero total variation")
    counts = _block_counts(sizes / tv, grid.n)
    s0 = np.empty(grid.n)
    v0 = np.empty(grid.n)
    start = 0
    for (x0, ul, ur), nk in zip(jumps, counts):
        if nk == 0:
            continue
        frac = (np.arange(nk) + 0.5) / nk
        s0[start : start + nk] = x0
        v0[start : start + nk] = ul + frac * (ur - ul)
        start += nk
    return InitialParametrization(grid=grid, s0=s0, v0=v0, tv=tv)


def _check_interior_flats(node_x, node_g, domain):
    """Reject zero-density runs that are interior and wide."""
    tol = 1e-12 * max(float(np.max(node_g)), 1e-300)
    dead = node_g <= tol
    if not dead.any():
        return
    width_limit = _FLAT_FRACTION * (domain[1] - domain[0])
    # run-length scan; boundary tails are tolerated
    i = 0
    m = len(dead)
    while i < m:
        if not dead[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and dead[j + 1]:
            j += 1
        if i > 0 and j < m - 1 and node_x[j] - node_x[i] > width_limit:
            raise DegenerateDataError(
                "initial data has a flat part of width "
                f"{node_x[j] - node_x[i]:.3g}; perturb the data to remove it"
            )
        i = j + 1


def _smooth_parametrization(data, grid):
    a, b = data.domain
    m = _QUADRATURE_START
    tv_prev = None
    while True:
        xs = np.linspace(a, b, m)
        g = np.abs(data.derivative(xs))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(xs))])
        tv = float(cum[-1])
        if not np.isfinite(tv) or tv <= 0.0:
            raise DegenerateDataError("total variation is zero on the domain")
        if tv_prev is not None and abs(tv - tv_prev) <= 1e-11 * max(tv, 1.0):
            break
        if m >= _QUADRATURE_MAX:
            break
        tv_prev = tv
        m = 2 * m - 1
    _check_interior_flats(xs, g, data.domain)

    targets = (grid.points + 0.5) * tv
    # strictly interior targets: clamp away from the exact endpoints
    targets = np.clip(targets, cum[1] * 1e-15, tv * (1.0 - 1e-15))
    cell = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, m - 2)

    lo = xs[cell]
    hi = xs[cell + 1]
    g_lo = g[cell]
    slope = (g[cell + 1] - g[cell]) / (hi - lo)
    base = cum[cell]

    def partial(x):
        # trapezoid mass from the cell start to x under the linear density model
        d = x - lo
        return base + d * (g_lo + 0.5 * slope * d)

    lo_w = lo.copy()
    hi_w = hi.copy()
    for _ in range(60):
        mid = 0.5 * (lo_w + hi_w)
        below = partial(mid) < targets
        lo_w = np.where(below, mid, lo_w)
        hi_w = np.where(below, hi_w, mid)
    s0 = 0.5 * (lo_w + hi_w)
    s0 = np.maximum.accumulate(s0)
    v0 = data.evaluate(s0)
    return InitialParametrization(grid=grid, s0=s0, v0=v0, tv=tv)


def _tabulated_parametrization(data, grid):
    xs = np.asarray(data.locations, dtype=float)
    us = np.asarray(data.values, dtype=float)
    w = np.abs(np.diff(us))
    tv = float(w.sum())
    if tv <= 0.0:
        raise DegenerateDataError("total variation is zero on the domain")
    _check_interior_flats(xs[:-1], w / np.diff(xs), (xs[0], xs[-1]))
    cum = np.concatenate([[0.0], np.cumsum(w)])
    targets = np.clip((grid.points + 0.5) * tv, 0.0, tv * (1.0 - 1e-15))
    # first segment whose cumulative mass strictly exceeds the target has w > 0
    seg = np.clip(np.searchsorted(cum[1:], targets, side="right"), 0, len(w) - 1)
    frac = (targets - cum[seg]) / w[seg]
    s0 = xs[seg] + frac * (xs[seg + 1] - xs[seg])
    s0 = np.maximum.accumulate(s0)
    v0 = np.interp(s0, xs, us)
    return InitialParametrization(grid=grid, s0=s0, v0=v0, tv=tv)

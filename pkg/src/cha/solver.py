"""Entropy dissipative and conservative solutions from the characteristic map.

The characteristic map S(t) = S0 + t f'(v0) is exact at every time, so no
time stepping occurs anywhere in this module.  The dissipative solution
flattens the antiderivative of S(t) by its lower convex hull (parcels caught
inside a flat share the shock position); the conservative solution is the
monotone rearrangement of S(t), which keeps every parcel value alive.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import FluxModel, OutOfDomainError, SolutionCloud, _frozen
from .hodge import cumulative_potential, project, reconstruct_potential
from .hull import lower_convex_hull
from .parametrization import InitialParametrization


@dataclass(frozen=True)
class CharacteristicField:
    """Raw characteristic positions s_t[i] = s0[i] + t f'(v0[i])."""

    parametrization: InitialParametrization
    time: float
    s_t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s_t", _frozen(self.s_t))


class Jump(NamedTuple):
    position: float
    u_left: float
    u_right: float
    speed: float


@dataclass(frozen=True)
class ScalarTransportField:
    """Passive scalar cloud (xs, ws) and its clamped density rho = dw/dx."""

    time: float
    xs: np.ndarray
    ws: np.ndarray
    rhos: np.ndarray
    rho_max: float

    def __post_init__(self):
        object.__setattr__(self, "xs", _frozen(self.xs))
        object.__setattr__(self, "ws", _frozen(self.ws))
        object.__setattr__(self, "rhos", _frozen(self.rhos))


def characteristic_map(parametrization, flux: FluxModel, t) -> CharacteristicField:
    """Transport every parcel at its constant speed f'(v0) for time t."""
    if t < 0.0:
        raise ValueError("backward evolution is not supported; t must be >= 0")
    s_t = parametrization.s0 + t * np.asarray(flux.fprime(parametrization.v0), dtype=float)
    return CharacteristicField(parametrization=parametrization, time=float(t), s_t=s_t)


def _potential_values(grid, s_t, method):
    if method == "fast":
        return cumulative_potential(grid, s_t)
    if method == "gram":
        return reconstruct_potential(project(grid, s_t), grid.points)
    raise ValueError(f"unknown projection method {method!r}; use 'fast' or 'gram'")


def solve_dissipative(
    parametrization, flux: FluxModel, t, method="fast", spike_filter=False
) -> SolutionCloud:
    """Entropy dissipative cloud (S+(t, y_i), v0_i).

    Pipeline: characteristic map, antiderivative (fast cumulative rule or
    Gram projection), lower convex hull, hull gradient.  With spike_filter
    the parcels protruding beyond a jump's flanking states are dropped.
    """
    field = characteristic_map(parametrization, flux, t)
    grid = parametrization.grid
    h = _potential_values(grid, field.s_t, method)
    hulled = lower_convex_hull(grid, h, gradients=field.s_t)
    cloud = SolutionCloud(
        time=float(t), xs=hulled.s_plus, us=parametrization.v0, mode="dissipative"
    )
    if spike_filter:
        cloud = _filter_spikes(cloud)
    return cloud


def solve_conservative(parametrization, flux: FluxModel, t) -> SolutionCloud:
    """Entropy conservative cloud: monotone rearrangement of the raw map.

    Stable-sorting the pairs (s_t, v0) by position realizes the polar
    factorization in one dimension; the permutation is the measure
    preserving part, so the value multiset never changes.
    """
    field = characteristic_map(parametrization, flux, t)
    order = np.argsort(field.s_t, kind="stable")
    return SolutionCloud(
        time=float(t),
        xs=field.s_t[order],
        us=parametrization.v0[order],
        mode="conservative",
    )


def _position_tolerance(xs):
    scale = max(float(xs[-1] - xs[0]), float(np.max(np.abs(xs))), 1.0)
    return 1e-9 * scale


def _coincident_runs(xs):
    """Maximal index runs [i0, i1] of near-equal positions, length >= 2."""
    tol = _position_tolerance(xs)
    runs = []
    i = 0
    n = len(xs)
    while i < n:
        j = i
        while j + 1 < n and xs[j + 1] - xs[j] <= tol:
            j += 1
        if j > i:
            runs.append((i, j))
        i = j + 1
    return runs


def _runs_with_flanks(cloud, min_strength):
    """Qualifying runs as (i0, i1, u_left, u_right) with flanking values."""
    xs, us = cloud.xs, cloud.us
    n = len(xs)
    if min_strength is None:
        span = float(us.max() - us.min())
        min_strength = 1e-3 * max(span, 1e-12)
    out = []
    for i0, i1 in _coincident_runs(xs):
        lo = max(i0 - 1, 0)
        hi = min(i1 + 1, n - 1)
        strength = float(us[lo : hi + 1].max() - us[lo : hi + 1].min())
        if strength <= min_strength:
            continue
        u_left = float(us[i0 - 1]) if i0 > 0 else float(us[i0])
        u_right = float(us[i1 + 1]) if i1 + 1 < n else float(us[i1])
        if u_left == u_right:
            continue
        out.append((i0, i1, u_left, u_right))
    return out


def jump_set(cloud: SolutionCloud, flux: FluxModel, min_strength=None):
    """Shock table of a dissipative cloud.

    Each maximal run of coincident positions whose value range exceeds
    min_strength (default: 1e-3 of the cloud value span) yields one entry;
    u_left/u_right are the values flanking the run and the speed estimate
    is the Rankine-Hugoniot quotient (f(u_r) - f(u_l)) / (u_r - u_l).
    """
    if cloud.mode != "dissipative":
        raise ValueError("jump detection needs a dissipative cloud")
    xs = cloud.xs
    jumps = []
    for i0, i1, u_left, u_right in _runs_with_flanks(cloud, min_strength):
        speed = float((flux.f(u_right) - flux.f(u_left)) / (u_right - u_left))
        jumps.append(
            Jump(
                position=float(np.mean(xs[i0 : i1 + 1])),
                u_left=u_left,
                u_right=u_right,
                speed=speed,
            )
        )
    return jumps


def _filter_spikes(cloud):
    """Drop run parcels whose value protrudes beyond the flanking states."""
    keep = np.ones(len(cloud), dtype=bool)
    us = cloud.us
    for i0, i1, u_left, u_right in _runs_with_flanks(cloud, None):
        lo, hi = min(u_left, u_right), max(u_left, u_right)
        run = slice(i0, i1 + 1)
        keep[run] &= (us[run] >= lo) & (us[run] <= hi)
    return SolutionCloud(
        time=cloud.time, xs=cloud.xs[keep], us=cloud.us[keep], mode=cloud.mode
    )


def evaluate(cloud: SolutionCloud, x) -> float:
    """Generalized-inverse evaluation of a dissipative cloud at one point.

    Linear interpolation in smooth regions; at a shock (a run of equal
    positions) the left-limit value is returned.
    """
    if cloud.mode != "dissipative":
        raise ValueError("pointwise evaluation needs a dissipative cloud")
    xs, us = cloud.xs, cloud.us
    if x < xs[0] or x > xs[-1]:
        raise OutOfDomainError(f"x={x} outside cloud range [{xs[0]}, {xs[-1]}]")
    j = int(np.searchsorted(xs, x, side="left"))
    if j < len(xs) and xs[j] == x:
        return float(us[j])
    w = (x - xs[j - 1]) / (xs[j] - xs[j - 1])
    return float(us[j - 1] + w * (us[j] - us[j - 1]))


def evaluate_many(cloud: SolutionCloud, xs_query) -> np.ndarray:
    """Vectorized evaluate() with the same conventions."""
    if cloud.mode != "dissipative":
        raise ValueError("pointwise evaluation needs a dissipative cloud")
    xs, us = cloud.xs, cloud.us
    q = np.asarray(xs_query, dtype=float)
    if np.any(q < xs[0]) or np.any(q > xs[-1]):
        raise OutOfDomainError("query points outside cloud range")
    j = np.searchsorted(xs, q, side="left")
    j = np.clip(j, 0, len(xs) - 1)
    exact = xs[j] == q
    jl = np.clip(j - 1, 0, len(xs) - 1)
    denom = np.where(exact, 1.0, xs[j] - xs[jl])
    w = np.where(exact, 0.0, (q - xs[jl]) / denom)
    return np.where(exact, us[j], us[jl] + w * (us[j] - us[jl]))


def cloud_integral(cloud: SolutionCloud, transform=None, window=None,
                   left_state=None, right_state=None) -> float:
    """Trapezoid integral of u (or transform(u)) over the cloud positions.

    With a window (a, b) enclosing the cloud, the flat tails are extended
    by the boundary states (defaulting to the edge cloud values).
    """
    xs, us = cloud.xs, cloud.us
    vals = us if transform is None else np.asarray(transform(us), dtype=float)
    total = float(np.trapezoid(vals, xs))
    if window is not None:
        a, b = window
        if a > xs[0] or b < xs[-1]:
            raise ValueError("window must enclose the cloud")
        ul = float(vals[0]) if left_state is None else float(
            left_state if transform is None else transform(left_state)
        )
        ur = float(vals[-1]) if right_state is None else float(
            right_state if transform is None else transform(right_state)
        )
        total += ul * (xs[0] - a) + ur * (b - xs[-1])
    return total


def passive_scalar(parametrization, flux: FluxModel, w0, t, rho_max=10.0
                   ) -> ScalarTransportField:
    """Transport a passive scalar w along the dissipative flow.

    w is constant along characteristics, so the cloud carries w0(s0_i) at
    the transformed positions.  The density rho = dw/dx comes from centered
    divided differences, clamped to rho_max where positions coincide (the
    density is genuinely singular at shocks).
    """
    if rho_max <= 0.0:
        raise ValueError("rho_max must be positive")
    cloud = solve_dissipative(parametrization, flux, t)
    xs = cloud.xs
    ws = np.asarray(w0(parametrization.s0), dtype=float)
    n = len(xs)
    dw = np.empty(n)
    dx = np.empty(n)
    dw[1:-1] = ws[2:] - ws[:-2]
    dx[1:-1] = xs[2:] - xs[:-2]
    dw[0], dx[0] = ws[1] - ws[0], xs[1] - xs[0]
    dw[-1], dx[-1] = ws[-1] - ws[-2], xs[-1] - xs[-2]
    rhos = np.empty(n)
    open_cell = dx > 0.0
    rhos[open_cell] = dw[open_cell] / dx[open_cell]
    rhos[~open_cell] = np.sign(dw[~open_cell]) * rho_max
    np.clip(rhos, -rho_max, rho_max, out=rhos)
    return ScalarTransportField(
        time=float(t), xs=xs, ws=ws, rhos=rhos, rho_max=float(rho_max)
    )


def hamilton_jacobi_solve(parametrization, hamiltonian: FluxModel, t, w0=None):
    """Hamilton-Jacobi solve: gradient cloud plus the potential on it.

    The gradient u = dw/dx follows the conservation-law pipeline with the
    Hamiltonian derivative as the transport speed.  The potential is the
    cumulative trapezoid integral of the cloud, anchored at w0 evaluated at
    the leftmost parcel foot (zero if no w0 is given).
    """
    cloud = solve_dissipative(parametrization, hamiltonian, t)
    anchor = float(w0(parametrization.s0[0])) if w0 is not None else 0.0
    xs, us = cloud.xs, cloud.us
    w = np.empty(len(xs))
    w[0] = anchor
    w[1:] = anchor + np.cumsum(0.5 * (us[1:] + us[:-1]) * np.diff(xs))
    return cloud, w

"""Independent reference solutions used only for verification.

Nothing here shares code with the hull pipeline: the exact Riemann solver
builds wave fans from the flux hull over the state interval, Hopf-Lax
minimizes the variational formula directly, and the Godunov scheme is a
plain first-order finite volume method.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, fsolve, minimize_scalar

from .core import FluxModel, InitialData


class Shock(NamedTuple):
    u_left: float
    u_right: float
    speed: float


class Rarefaction(NamedTuple):
    u_left: float
    u_right: float
    speed_left: float
    speed_right: float


def _wave_speed_range(wave):
    if isinstance(wave, Shock):
        return wave.speed, wave.speed
    return wave.speed_left, wave.speed_right


@dataclass(frozen=True)
class RiemannSolution:
    """Self-similar entropy solution of a scalar Riemann problem."""

    flux: FluxModel
    ul: float
    ur: float
    waves: tuple

    def sample(self, xi):
        """Solution value at the similarity coordinate xi = x / t."""
        state = self.ul
        for wave in self.waves:
            s_lo, s_hi = _wave_speed_range(wave)
            if xi < s_lo:
                return state
            if isinstance(wave, Shock):
                state = wave.u_right
            else:
                if xi <= s_hi:
                    return self._rarefaction_state(wave, xi)
                state = wave.u_right
        return state

    def sample_many(self, xis):
        return np.array([self.sample(float(xi)) for xi in np.atleast_1d(xis)])

    def _rarefaction_state(self, wave, xi):
        a, b = sorted((wave.u_left, wave.u_right))
        ga = self.flux.fprime(a) - xi
        gb = self.flux.fprime(b) - xi
        if ga == 0.0:
            return a
        if gb == 0.0:
            return b
        return brentq(lambda u: self.flux.fprime(u) - xi, a, b, xtol=1e-13)


def _reflected_flux(flux):
    # u -> -u turns u_t + f(u)_x = 0 into v_t + g(v)_x = 0 with g(v) = -f(-v)
    return FluxModel(
        f=lambda v: -np.asarray(flux.f(-np.asarray(v, dtype=float))),
        fprime=lambda v: np.asarray(flux.fprime(-np.asarray(v, dtype=float))),
        label=flux.label,
        critical_points=tuple(sorted(-c for c in flux.critical_points)),
    )


def _reflect_wave(wave):
    if isinstance(wave, Shock):
        return Shock(-wave.u_left, -wave.u_right, wave.speed)
    return Rarefaction(-wave.u_left, -wave.u_right, wave.speed_left, wave.speed_right)


_HULL_SAMPLES = 10001


def _lower_hull_indices(u, f):
    stack = [0]
    for j in range(1, len(u)):
        while len(stack) >= 2:
            i0, i1 = stack[-2], stack[-1]
            cross = (u[i1] - u[i0]) * (f[j] - f[i0]) - (u[j] - u[i0]) * (f[i1] - f[i0])
            if cross <= 0.0:  # prune: keep strictly convex turns only
                stack.pop()
            else:
                break
        stack.append(j)
    return stack


def _polish_shock(flux, a, b, a_free, b_free, lo, hi):
    """Newton-polish chord tangency conditions; returns refined (a, b)."""
    f = flux.f
    df = flux.fprime

    def chord_gap_at(u_fixed):
        def g(u):
            return df(u) * (u - u_fixed) - (f(u) - f(u_fixed))
        return g

    if a_free and b_free:
        def system(ab):
            aa, bb = ab
            chord = f(bb) - f(aa)
            return [df(aa) * (bb - aa) - chord, df(bb) * (bb - aa) - chord]

        sol, info, ok, _ = fsolve(system, [a, b], full_output=True, xtol=1e-13)
        if ok == 1 and lo <= sol[0] < sol[1] <= hi:
            return float(sol[0]), float(sol[1])
        return a, b
    if b_free:
        g = chord_gap_at(a)
        root = _bracketed_root(g, b, lo=max(a, lo), hi=hi)
        return a, (root if root is not None else b)
    if a_free:
        g = chord_gap_at(b)
        root = _bracketed_root(g, a, lo=lo, hi=min(b, hi))
        return (root if root is not None else a), b
    return a, b


def _bracketed_root(g, guess, lo, hi, width=1e-3):
    """Expanding-bracket brentq around a discrete tangency estimate."""
    for k in range(1, 14):
        w = width * 2.0**k
        left = max(lo, guess - w)
        right = min(hi, guess + w)
        if right <= left:
            return None
        gl, gr = g(left), g(right)
        if gl == 0.0:
            return left
        if gr == 0.0:
            return right
        if gl * gr < 0.0:
            return brentq(g, left, right, xtol=1e-14)
        if left == lo and right == hi:
            return None
    return None


def riemann_exact(flux: FluxModel, ul, ur) -> RiemannSolution:
    """Exact wave fan of the Riemann problem for a general smooth flux.

    For ul < ur the lower convex hull of the flux over [ul, ur] decides the
    structure: chord pieces skipping samples become shocks, arcs where the
    hull rides the flux become rarefactions.  Tangency states are Newton
    polished well below cloud resolution.  The ul > ur case reduces to the
    reflected flux -f(-u).
    """
    if ul == ur:
        raise ValueError("riemann problem needs distinct states")
    if ul > ur:
        mirrored = riemann_exact(_reflected_flux(flux), -ul, -ur)
        return RiemannSolution(
            flux=flux,
            ul=float(ul),
            ur=float(ur),
            waves=tuple(_reflect_wave(w) for w in mirrored.waves),
        )

    us = np.linspace(ul, ur, _HULL_SAMPLES)
    fs = np.asarray(flux.f(us), dtype=float)
    verts = _lower_hull_indices(us, fs)

    # classify hull edges: sample-adjacent runs are rarefaction arcs,
    # longer chords are shocks
    pieces = []  # ("raref", a, b) or ("shock", a, b)
    for k in range(len(verts) - 1):
        i, j = verts[k], verts[k + 1]
        kind = "raref" if j - i == 1 else "shock"
        if pieces and pieces[-1][0] == kind == "raref":
            pieces[-1] = ("raref", pieces[-1][1], float(us[j]))
        else:
            pieces.append((kind, float(us[i]), float(us[j])))

    # polish shock endpoints: ends attached to ul/ur stay fixed, interior
    # tangencies solve f'(end) = chord slope
    polished = []
    for idx, (kind, a, b) in enumerate(pieces):
        if kind != "shock":
            polished.append([kind, a, b])
            continue
        a_free = a != ul
        b_free = b != ur
        a2, b2 = _polish_shock(flux, a, b, a_free, b_free, ul, ur)
        polished.append([kind, a2, b2])
    # re-attach neighbouring rarefaction ends to the polished tangencies
    for idx, piece in enumerate(polished):
        if piece[0] != "shock":
            continue
        if idx > 0 and polished[idx - 1][0] == "raref":
            polished[idx - 1][2] = piece[1]
        if idx + 1 < len(polished) and polished[idx + 1][0] == "raref":
            polished[idx + 1][1] = piece[2]

    waves = []
    for kind, a, b in polished:
        if abs(b - a) < 1e-12:
            continue
        if kind == "shock":
            speed = float((flux.f(b) - flux.f(a)) / (b - a))
            waves.append(Shock(u_left=a, u_right=b, speed=speed))
        else:
            waves.append(
                Rarefaction(
                    u_left=a,
                    u_right=b,
                    speed_left=float(flux.fprime(a)),
                    speed_right=float(flux.fprime(b)),
                )
            )
    return RiemannSolution(flux=flux, ul=float(ul), ur=float(ur), waves=tuple(waves))


def legendre_transform(flux: FluxModel, z, u_range) -> float:
    """Legendre-Fenchel transform f*(z) = sup_y (z y - f(y)) over u_range."""
    lo, hi = float(u_range[0]), float(u_range[1])
    ys = np.linspace(lo, hi, 2001)
    vals = z * ys - np.asarray(flux.f(ys), dtype=float)
    k = int(np.argmax(vals))
    yl = ys[max(k - 1, 0)]
    yr = ys[min(k + 1, len(ys) - 1)]
    best = float(vals[k])
    if yr > yl:
        res = minimize_scalar(
            lambda y: -(z * y - float(flux.f(y))),
            bounds=(yl, yr),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, float(-res.fun))
    return best


def _check_convex(flux, u_range, samples=256):
    us = np.linspace(u_range[0], u_range[1], samples)
    h = max(1e-6, 1e-6 * (u_range[1] - u_range[0]))
    second = (np.asarray(flux.fprime(us + h)) - np.asarray(flux.fprime(us - h))) / (2 * h)
    if np.min(second) < -1e-8:
        raise ValueError(
            f"flux {flux.label!r} is not convex on {u_range}; Hopf-Lax needs a convex flux"
        )


def hopf_lax(flux: FluxModel, w0, t, x, u_range=(-5.0, 5.0), coarse=600) -> float:
    """Hopf-Lax potential w(t, x) = inf_z (w0(z) + t f*((x - z) / t)).

    Valid for convex flux only (checked by sampled second differences).
    The minimizer z = x - t f'(u) stays inside the bracket spanned by the
    flux slopes over u_range, so the scan plus golden refinement is safe
    as long as u_range covers the data values.
    """
    if t <= 0.0:
        raise ValueError("Hopf-Lax evaluation needs t > 0")
    _check_convex(flux, u_range)
    slopes = np.asarray(flux.fprime(np.linspace(u_range[0], u_range[1], 512)))
    z_lo = x - t * float(np.max(slopes))
    z_hi = x - t * float(np.min(slopes))
    pad = 0.05 * max(z_hi - z_lo, 1e-6)
    z_lo -= pad
    z_hi += pad

    def objective(z):
        return float(w0(z)) + t * legendre_transform(flux, (x - z) / t, u_range)

    zs = np.linspace(z_lo, z_hi, coarse)
    vals = np.array([objective(z) for z in zs])
    k = int(np.argmin(vals))
    if 0 < k < coarse - 1:
        res = minimize_scalar(
            objective,
            bracket=(zs[k - 1], zs[k], zs[k + 1]),
            method="golden",
            options={"xtol": 1e-11},
        )
        return min(float(res.fun), float(vals[k]))
    return float(vals[k])


def godunov_flux(flux: FluxModel, a, b):
    """Exact scalar Godunov flux: min of f over [a, b] if a <= b, else max.

    Interval extrema are taken over the endpoints and the flux's interior
    critical points, so FluxModel.critical_points must be complete.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    fa = np.asarray(flux.f(a), dtype=float)
    fb = np.asarray(flux.f(b), dtype=float)
    fmin = np.minimum(fa, fb)
    fmax = np.maximum(fa, fb)
    for c in flux.critical_points:
        inside = (lo < c) & (c < hi)
        if not np.any(inside):
            continue
        fc = float(flux.f(c))
        fmin = np.where(inside, np.minimum(fmin, fc), fmin)
        fmax = np.where(inside, np.maximum(fmax, fc), fmax)
    return np.where(a <= b, fmin, fmax)


def godunov_solve(flux: FluxModel, data: InitialData, t, cells, cfl=0.9):
    """First-order Godunov reference solution on a uniform grid.

    Explicit Euler with dt = cfl dx / max|f'|, outflow boundaries; returns
    (cell centers, cell values) at time t.
    """
    if cells < 10:
        raise ValueError("godunov_solve needs at least 10 cells")
    if not 0.0 < cfl <= 0.9:
        raise ValueError("cfl must lie in (0, 0.9]")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    a, b = data.domain
    dx = (b - a) / cells
    xc = a + (np.arange(cells) + 0.5) * dx
    u = np.asarray(data.evaluate(xc), dtype=float).copy()
    time = 0.0
    while time < t:
        smax = float(np.max(np.abs(np.asarray(flux.fprime(u)))))
        if smax <= 1e-300:
            break  # nothing moves; the state is already final
        dt = min(cfl * dx / smax, t - time)
        ug = np.concatenate([u[:1], u, u[-1:]])
        fluxes = godunov_flux(flux, ug[:-1], ug[1:])
        u -= (dt / dx) * (fluxes[1:] - fluxes[:-1])
        time += dt
    return xc, u


def characteristics_solution(flux: FluxModel, u0, t, xs, foot_bracket):
    """Pre-shock exact solution by inverting x = xi + t f'(u0(xi)).

    Valid while the characteristic map is monotone (no crossing yet); each
    query solves for the foot xi by bisection-safe brentq over foot_bracket.
    """
    lo, hi = float(foot_bracket[0]), float(foot_bracket[1])
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if t == 0.0:
        return np.asarray(u0(xs), dtype=float)

    def g(xi, x):
        return xi + t * float(flux.fprime(float(u0(xi)))) - x

    out = np.empty(len(xs))
    for k, x in enumerate(xs):
        root = brentq(g, lo, hi, args=(x,), xtol=1e-12)
        out[k] = float(u0(root))
    return out

"""Shared domain types: sampling grid, flux models, initial data, solution clouds."""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

SQRT_2PI = math.sqrt(2.0 * math.pi)

LAMBDA = (-0.5, 0.5)  # parameter domain, unit Lebesgue measure


class DegenerateDataError(ValueError):
    """Initial data whose derivative measure cannot be normalized."""


class OutOfDomainError(ValueError):
    """Query point outside the range covered by a solution cloud."""


def _frozen(a):
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SamplingGrid:
    """Cell midpoints y_i = (i + 1/2)/n - 1/2 of the unit parameter interval.

    Points are strictly increasing with spacing 1/n and exactly symmetric
    about 0 (y_{n-1-i} == -y_i bit for bit).
    """

    n: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs an integer n >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        pts = (2.0 * np.arange(self.n) + 1.0 - self.n) / (2.0 * self.n)
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def spacing(self):
        return 1.0 / self.n


def make_grid(n) -> SamplingGrid:
    """Uniform midpoint sampling of (-1/2, 1/2) with n points."""
    return SamplingGrid(n)


@dataclass(frozen=True)
class FluxModel:
    """Flux f with its analytic derivative fprime.

    critical_points lists the real stationary points of f; they let the
    Godunov flux take interval extrema exactly.
    """

    f: object
    fprime: object
    label: str
    critical_points: tuple = ()


def _real_roots(poly, tol=1e-9):
    roots = poly.roots()
    reals = roots.real[np.abs(roots.imag) < tol]
    return tuple(float(r) for r in np.sort(reals))


def polynomial_flux(coeffs, label="poly") -> FluxModel:
    """Flux from polynomial coefficients in ascending degree order."""
    p = Polynomial(np.asarray(coeffs, dtype=float))
    dp = p.deriv()
    return FluxModel(f=p, fprime=dp, label=label, critical_points=_real_roots(dp))


_QUINTIC = Polynomial.fromroots([0.0, 1.0, 2.0, 3.0, 5.0]) * (-1.0 / 200.0)

_BUILTIN_FLUXES = {
    "burgers": lambda: FluxModel(
        f=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
        fprime=lambda u: np.asarray(u, dtype=float) + 0.0,
        label="burgers",
        critical_points=(0.0,),
    ),
    "cubic": lambda: FluxModel(
        f=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0 - np.asarray(u, dtype=float),
        fprime=lambda u: np.asarray(u, dtype=float) ** 2 - 1.0,
        label="cubic",
        critical_points=(-1.0, 1.0),
    ),
    "quintic": lambda: FluxModel(
        f=_QUINTIC,
        fprime=_QUINTIC.deriv(),
        label="quintic",
        critical_points=_real_roots(_QUINTIC.deriv()),
    ),
}


def builtin_flux(label) -> FluxModel:
    """One of the built-in fluxes: burgers, cubic, or quintic."""
    try:
        return _BUILTIN_FLUXES[label]()
    except KeyError:
        raise ValueError(
            f"unknown flux {label!r}; expected one of {sorted(_BUILTIN_FLUXES)}"
        ) from None


@dataclass(frozen=True)
class InitialData:
    """Initial condition u0 on a real interval.

    kind is one of gaussian, riemann, piecewise-constant, tabulated.
    For riemann: values = (ul, ur), locations = (x0,).
    For piecewise-constant: values holds k+1 states, locations the k jumps.
    For tabulated: values/locations are the u/x sample tables.
    """

    kind: str
    domain: tuple
    values: tuple = ()
    locations: tuple = ()

    @property
    def is_atomic(self):
        return self.kind in ("riemann", "piecewise-constant")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * x**2) / SQRT_2PI
        if self.kind == "riemann":
            ul, ur = self.values
            return np.where(x < self.locations[0], ul, ur)
        if self.kind == "piecewise-constant":
            idx = np.searchsorted(np.asarray(self.locations), x, side="right")
            return np.asarray(self.values, dtype=float)[idx]
        if self.kind == "tabulated":
            return np.interp(x, self.locations, self.values)
        raise ValueError(f"unknown initial data kind {self.kind!r}")

    def derivative(self, x):
        """du0/dx for the smooth kinds; atomic kinds have no density part."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return -x * np.exp(-0.5 * x**2) / SQRT_2PI
        if self.kind == "tabulated":
            xs = np.asarray(self.locations)
            us = np.asarray(self.values)
            slopes = np.diff(us) / np.diff(xs)
            idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
            return slopes[idx]
        raise ValueError(f"data of kind {self.kind!r} has an atomic derivative")

    def total_variation(self):
        if self.kind == "gaussian":
            return 2.0 / SQRT_2PI
        if self.kind in ("riemann", "piecewise-constant", "tabulated"):
            return float(np.sum(np.abs(np.diff(self.values))))
        raise ValueError(f"unknown initial data kind {self.kind!r}")

    def jumps(self):
        """(location, left state, right state) triples of the atomic part."""
        if self.kind == "riemann":
            return [(self.locations[0], self.values[0], self.values[1])]
        if self.kind == "piecewise-constant":
            return [
                (x, self.values[k], self.values[k + 1])
                for k, x in enumerate(self.locations)
            ]
        return []


def gaussian_data(domain=(-8.0, 8.0)) -> InitialData:
    """The unit-mass Gaussian bump exp(-x^2/2)/sqrt(2 pi)."""
    return InitialData(kind="gaussian", domain=(float(domain[0]), float(domain[1])))


def riemann_data(ul, ur, x0=0.0, domain=None) -> InitialData:
    if ul == ur:
        raise DegenerateDataError("riemann data needs distinct left/right states")
    if domain is None:
        domain = (x0 - 12.0, x0 + 12.0)
    return InitialData(
        kind="riemann",
        domain=(float(domain[0]), float(domain[1])),
        values=(float(ul), float(ur)),
        locations=(float(x0),),
    )


def piecewise_constant_data(values, jump_locations, domain=None) -> InitialData:
    values = tuple(float(v) for v in values)
    locs = tuple(float(x) for x in jump_locations)
    if len(values) != len(locs) + 1:
        raise ValueError("piecewise-constant data needs one more state than jumps")
    if len(locs) == 0:
        raise DegenerateDataError("constant data has zero total variation")
    if any(locs[k] >= locs[k + 1] for k in range(len(locs) - 1)):
        raise ValueError("jump locations must be strictly increasing")
    if any(values[k] == values[k + 1] for k in range(len(locs))):
        raise DegenerateDataError("adjacent states must differ at every jump")
    if domain is None:
        domain = (locs[0] - 12.0, locs[-1] + 12.0)
    return InitialData(
        kind="piecewise-constant",
        domain=(float(domain[0]), float(domain[1])),
        values=values,
        locations=locs,
    )


def tabulated_data(xs, us, domain=None) -> InitialData:
    xs = tuple(float(x) for x in xs)
    us = tuple(float(u) for u in us)
    if len(xs) != len(us) or len(xs) < 2:
        raise ValueError("tabulated data needs matching x/u tables of length >= 2")
    if any(xs[k] >= xs[k + 1] for k in range(len(xs) - 1)):
        raise ValueError("tabulated x samples must be strictly increasing")
    if sum(abs(us[k + 1] - us[k]) for k in range(len(us) - 1)) <= 0.0:
        raise DegenerateDataError("tabulated data has zero total variation")
    if domain is None:
        domain = (xs[0], xs[-1])
    return InitialData(
        kind="tabulated",
        domain=(float(domain[0]), float(domain[1])),
        values=us,
        locations=xs,
    )


_CLOUD_MODES = ("dissipative", "conservative")


@dataclass(frozen=True)
class SolutionCloud:
    """Cloud of points (x_i, u_i) representing u(t, .) at one time.

    Positions move with the transformed characteristic map while the
    values stay frozen at their parametrized initial values, so both
    modes carry exactly the same multiset of u values.
    """

    time: float
    xs: np.ndarray
    us: np.ndarray
    mode: str

    def __post_init__(self):
        if self.time < 0.0:
            raise ValueError("cloud time must be nonnegative")
        if self.mode not in _CLOUD_MODES:
            raise ValueError(f"mode must be one of {_CLOUD_MODES}")
        xs = _frozen(self.xs)
        us = _frozen(self.us)
        if xs.shape != us.shape or xs.ndim != 1:
            raise ValueError("xs and us must be 1d arrays of equal length")
        if np.any(np.diff(xs) < 0.0):
            raise ValueError("cloud positions must be non-decreasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)

    def __len__(self):
        return self.xs.shape[0]

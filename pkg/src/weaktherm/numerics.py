"""Shared numerical kernels.

Bracketed root finding, Gauss-Legendre x trapezoid quadrature over the unit
sphere, the principal branch of the complex inverse hyperbolic tangent, and
plain central differences.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BracketError, ConvergenceError, EvaluationError, SingularityError

__all__ = [
    "Bracket",
    "SphereQuadrature",
    "find_root",
    "sphere_average",
    "complex_arctanh",
    "central_difference",
]


@dataclass(frozen=True)
class Bracket:
    """A sign-changing interval [lo, hi] with the function values at its ends.

    Invariants: ``lo < hi`` and ``f_lo * f_hi <= 0``.
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket endpoints must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0.0:
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: f values {self.f_lo}, {self.f_hi}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, float(f(lo)), float(f(hi)))


def find_root(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol_x: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Locate the root of ``f`` inside a sign-changing bracket.

    Bisection with secant acceleration: a secant step is taken whenever it
    lands strictly inside the current bracket, otherwise the step falls back
    to the midpoint.  Every second iteration bisects unconditionally so the
    bracket width shrinks geometrically regardless of the secant behaviour.
    Deterministic for fixed inputs.

    Parameters
    ----------
    f : callable
        Continuous scalar function changing sign on the bracket.
    bracket : Bracket or (lo, hi)
        Search interval.  A bare tuple is evaluated at both ends first.
    tol_x : float
        Terminate once the bracket width is at or below this value.
    max_iter : int
        Iteration budget; exceeding it raises ConvergenceError carrying the
        best estimate so far.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket.from_function(f, *bracket)
    lo, hi, f_lo, f_hi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi

    for iteration in range(max_iter):
        if hi - lo <= tol_x:
            return lo + 0.5 * (hi - lo)
        mid = lo + 0.5 * (hi - lo)
        x = mid
        if iteration % 2 == 0 and f_hi != f_lo:
            secant = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if lo < secant < hi:
                x = secant
        fx = float(f(x))
        if fx == 0.0:
            return x
        if f_lo * fx < 0.0:
            hi, f_hi = x, fx
        else:
            lo, f_lo = x, fx
    raise ConvergenceError(
        f"root not located to width {tol_x} in {max_iter} iterations",
        best_estimate=lo + 0.5 * (hi - lo),
    )


def _sphere_nodes(n_polar: int, n_azimuth: int):
    # Gauss-Legendre in cos(theta) (weights sum to 2), uniform periodic grid in phi.
    x, w = np.polynomial.legendre.leggauss(n_polar)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    weights = w / (2.0 * n_azimuth)  # normalized surface average
    return theta, phi, weights


@dataclass(frozen=True)
class SphereQuadrature:
    """Quadrature nodes for the normalized average over the unit sphere.

    The measure sin(theta) dtheta dphi / (4 pi) is absorbed into the weights,
    which sum to one.  Polar nodes are Gauss-Legendre in cos(theta); azimuthal
    nodes are a uniform trapezoid rule (exact for trigonometric polynomials of
    degree below ``n_azimuth``).
    """

    n_polar: int = 64
    n_azimuth: int = 128
    theta: np.ndarray = field(repr=False, default=None)
    phi: np.ndarray = field(repr=False, default=None)
    polar_weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.n_polar < 1 or self.n_azimuth < 1:
            raise ValueError("node counts must be positive")
        theta, phi, weights = _sphere_nodes(self.n_polar, self.n_azimuth)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "polar_weights", weights)

    @property
    def nodes(self):
        """Flat list of (theta, phi, weight) triples."""
        out = []
        for t, w in zip(self.theta, self.polar_weights):
            for p in self.phi:
                out.append((float(t), float(p), float(w)))
        return out

    def grids(self):
        """Meshgrid views (theta, phi, weight) suitable for vectorized integrands."""
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        wt = np.broadcast_to(self.polar_weights[:, None], th.shape)
        return th, ph, wt


def sphere_average(f: Callable, quad: SphereQuadrature) -> float:
    """Average ``f(theta, phi)`` over the unit sphere with quadrature ``quad``.

    ``f`` must accept numpy array arguments and broadcast over them.  A
    non-finite value at any node raises EvaluationError naming the offending
    nodes.
    """
    th, ph, wt = quad.grids()
    values = np.asarray(f(th, ph), dtype=float)
    if values.shape != th.shape:
        values = np.broadcast_to(values, th.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argwhere(bad)
        nodes = [(float(th[i, j]), float(ph[i, j])) for i, j in idx[:8]]
        raise EvaluationError(
            f"integrand non-finite at {idx.shape[0]} node(s), first few (theta, phi): {nodes}",
            nodes=nodes,
        )
    return float(np.sum(values * wt))


def complex_arctanh(z: complex) -> complex:
    """Principal branch of arctanh for complex arguments.

    The imaginary part lies in (-pi/2, pi/2]; tanh(arctanh(z)) == z away from
    the poles.  Arguments within 1e-15 of +-1 raise SingularityError.
    """
    z = complex(z)
    if abs(z - 1.0) <= 1e-15 or abs(z + 1.0) <= 1e-15:
        raise SingularityError(f"arctanh singular at z = {z}")
    return complex(np.arctanh(z))


def central_difference(f: Callable[[float], complex], x: float, h: float):
    """Symmetric difference quotient (f(x+h) - f(x-h)) / (2h), O(h^2) accurate."""
    if h <= 0:
        raise ValueError("step h must be positive")
    return (f(x + h) - f(x - h)) / (2.0 * h)

"""Error models for the thermometry protocol and their optimal windows.

Two perturbations are analyzed for the canonical qubit configuration
(off-diagonal observable in the energy basis, energy gap ``gap``):

* imperfect thermalization: the probe is (1-delta) rho_beta + delta |chi><chi|
  for a random contaminant |chi>.  The temperature read off through the ideal
  inversion acquires an apparent shift; its root-mean-square relative size,
  averaged uniformly over contaminant orientations, defines the error N(beta).
* unsharp post-selection: the projector is mixed with white noise of weight
  epsilon, perturbing the weak value and hence the inferred temperature.

Both models admit closed forms whose reciprocal is the precision of the
scheme; golden-section minimization and bracketed root finding locate the
temperature window where that precision peaks.

Normalization note: the closed-form thermalization error implemented here is
the exact uniform average of the first-order squared shift over the Bloch
sphere, i.e. N^2 = E_chi |beta_apparent - beta|^2 / (beta^2 delta^2).  Both
independent oracles in this package (deterministic spherical quadrature and
Haar Monte Carlo over the full nonlinear shift) converge to this
normalization as delta -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import (
    BracketError,
    DegeneratePostselectionError,
    EvaluationError,
    SingularityError,
    WeakThermError,
)
from .numerics import Bracket, SphereQuadrature, find_root
from .qcore import PureState
from .weakproto import ThermometrySetup, WeakValue, weak_value

__all__ = [
    "ImperfectThermalization",
    "UnsharpPostSelection",
    "MonteCarloRule",
    "MonteCarloEstimate",
    "PrecisionCurve",
    "OptimalWindow",
    "UnsharpWeakValues",
    "apparent_beta_imperfect",
    "first_order_error_integrand",
    "rms_error_thermalization_closed",
    "rms_error_plus",
    "rms_error_thermalization_numeric",
    "optimal_temperature_thermalization",
    "perturbed_weak_value_unsharp",
    "unsharp_weak_value_trace_defect_form",
    "rms_error_postselection",
    "postselection_window_implied_cosine",
    "optimal_temperature_postselection",
    "strong_scheme_reference",
    "build_precision_curve",
]


@dataclass(frozen=True)
class ImperfectThermalization:
    """Contamination model: (1-delta) rho_beta + delta |chi><chi|."""

    delta: float
    chi: PureState

    def __post_init__(self):
        if not 0.0 <= self.delta <= 0.2:
            raise ValueError(f"delta = {self.delta} outside the supported band [0, 0.2]")
        if self.chi.dim != 2:
            raise ValueError("contaminant must be a qubit state")


@dataclass(frozen=True)
class UnsharpPostSelection:
    """Noisy post-selection effect: (1-epsilon)|psi_f><psi_f| + epsilon/2 * I."""

    epsilon: float
    psi_f: PureState

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError(f"epsilon = {self.epsilon} outside the supported band [0, 0.5]")

    def effective_matrix(self) -> np.ndarray:
        d = self.psi_f.dim
        return (1.0 - self.epsilon) * self.psi_f.projector() + (self.epsilon / 2.0) * np.eye(d)


@dataclass(frozen=True)
class MonteCarloRule:
    """Haar sampling rule for contaminant averages."""

    n_samples: int
    seed: int


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte-Carlo value with its one-sigma standard error."""

    value: float
    stderr: float
    n_samples: int


def _postselection_overlap(setup: ThermometrySetup, beta: float) -> float:
    p = setup.postselection_probability(beta)
    if p <= 1e-12:
        raise DegeneratePostselectionError(f"post-selection probability {p:.3e} is numerically zero")
    return p


def _contaminant_coefficients(setup: ThermometrySetup, beta: float, delta: float, chi_vectors: np.ndarray):
    """c1, c2 arrays for contaminant vectors given as columns of shape (2, M).

    c1 = 1 - delta |<f|chi>|^2 / p,  c2 = delta <f|A|chi><chi|f> / p,
    with p the post-selection probability on the unperturbed thermal state.
    """
    f = setup.post_selection.amplitudes
    p = _postselection_overlap(setup, beta)
    u = f.conj() @ chi_vectors
    w = (f.conj() @ setup.observable.matrix) @ chi_vectors
    c1 = 1.0 - delta * np.abs(u) ** 2 / p
    c2 = delta * w * u.conj() / p
    return c1, c2


def apparent_beta_imperfect(beta: float, model: ImperfectThermalization, setup: ThermometrySetup) -> complex:
    """Apparent (complex) inverse temperature under imperfect thermalization.

    beta_apparent = (2/gap) arctanh(c1 tanh(beta gap / 2) - i c2), where c1
    and c2 carry the contaminant overlap with the post-selection state.  At
    delta = 0 this returns beta exactly.
    """
    if setup.dim != 2:
        raise ValueError("imperfect-thermalization model is qubit-specific")
    gap = setup.spec.gap
    chi = model.chi.amplitudes[:, None]
    chi = setup.spec.eigenbasis @ chi  # contaminant angles refer to the energy basis
    c1, c2 = _contaminant_coefficients(setup, beta, model.delta, chi)
    arg = complex(c1[0] * np.tanh(0.5 * beta * gap) - 1j * c2[0])
    if abs(arg - 1.0) <= 1e-12 or abs(arg + 1.0) <= 1e-12:
        raise SingularityError("apparent inverse temperature diverges (arctanh argument at +-1)")
    return complex(2.0 / gap * np.arctanh(arg))


def first_order_error_integrand(beta: float, xi: float, nu: float, gap: float = 1.0) -> Callable:
    """Vectorized integrand of the delta -> 0 squared relative error.

    For a contaminant at Bloch angles (theta, phi) the first-order shift is
    -(2 delta / gap) (v1 t + i v2) / (1 - t^2) with t = tanh(beta gap / 2);
    the returned callable evaluates |shift|^2 / (beta^2 delta^2), i.e.
    4 |v1 t + i v2|^2 / (x^2 (1 - t^2)^2) with x = beta gap.
    """
    x = beta * gap
    t = math.tanh(0.5 * x)
    p = 0.5 * (1.0 + math.cos(xi) * t)

    def integrand(theta, phi):
        ct, st = np.cos(theta / 2.0), np.sin(theta / 2.0)
        u = math.cos(xi / 2.0) * ct + np.exp(1j * (phi - nu)) * math.sin(xi / 2.0) * st
        w = 1j * (np.exp(-1j * nu) * math.sin(xi / 2.0) * ct - np.exp(1j * phi) * math.cos(xi / 2.0) * st)
        v1 = np.abs(u) ** 2 / p
        v2 = w * np.conj(u) / p
        return 4.0 * np.abs(v1 * t + 1j * v2) ** 2 / (x**2 * (1.0 - t * t) ** 2)

    return integrand


def _postselection_weight(x: float, cos_xi: float) -> float:
    # cosh(x/2) + cos(xi) sinh(x/2), written to avoid cancellation at cos(xi) = -1
    return 0.5 * ((1.0 + cos_xi) * math.exp(0.5 * x) + (1.0 - cos_xi) * math.exp(-0.5 * x))


def _thermalization_bracket(x: float, xi: float, nu: float) -> float:
    return (
        (13.0 - math.cos(2.0 * nu)) * math.cosh(x)
        - 4.0 * math.cos(2.0 * xi) * math.sin(nu) ** 2 * math.cosh(0.5 * x) ** 2
        - (3.0 + math.cos(2.0 * nu))
    )


def rms_error_thermalization_closed(beta: float, xi: float, nu: float, *, gap: float = 1.0) -> float:
    """Closed-form RMS relative temperature error under imperfect thermalization.

    Post-selection cos(xi/2)|psi_1> + e^{i nu} sin(xi/2)|psi_2>.  With
    x = beta * gap and t = tanh(x/2):

        N = sqrt(B/3) / ( x [cosh(x/2) + cos(xi) sinh(x/2)] (1 - t^2) ),
        B = (13 - cos 2nu) cosh x - 4 cos 2xi sin^2(nu) cosh^2(x/2) - (3 + cos 2nu).

    This is the exact Bloch-sphere average of the first-order squared shift
    (see the module normalization note); it diverges at both temperature
    extremes, leaving a finite-precision window in between.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = beta * gap
    b = _thermalization_bracket(x, xi, nu)
    # 1/(1 - tanh^2) = cosh^2 keeps the expression finite where tanh rounds to 1
    ch = math.cosh(0.5 * x)
    return math.sqrt(b / 3.0) * ch * ch / (x * _postselection_weight(x, math.cos(xi)))


def rms_error_plus(beta: float, *, gap: float = 1.0) -> float:
    """Thermalization error for balanced post-selection (xi = pi/2, nu = 0).

    N = sqrt((1 + 4 cosh x + 3 cosh 2x) / (3 x^2)) with x = beta * gap;
    equal to the general closed form at those angles, and N*x -> sqrt(8/3)
    as beta -> 0.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = beta * gap
    return math.sqrt((1.0 + 4.0 * math.cosh(x) + 3.0 * math.cosh(2.0 * x)) / (3.0 * x * x))


def rms_error_thermalization_numeric(
    beta: float,
    setup: ThermometrySetup,
    delta: float,
    rule: Union[SphereQuadrature, MonteCarloRule],
) -> Union[float, MonteCarloEstimate]:
    """Orientation-averaged RMS relative error from the full nonlinear shift.

    Unlike the closed form, the apparent inverse temperature here keeps the
    complete arctanh dependence on delta, so this is an independent oracle
    that approaches the closed form at rate O(delta).  A SphereQuadrature
    rule returns a float; a MonteCarloRule returns a MonteCarloEstimate with
    the standard error of the mean propagated to N.

    Nodes where the apparent temperature diverges are collected and raised
    as an EvaluationError listing the offending (theta, phi) pairs.
    """
    if setup.dim != 2:
        raise ValueError("thermalization error model is qubit-specific")
    if not 0.0 < delta <= 0.05:
        raise ValueError("delta must lie in (0, 0.05] for a meaningful comparison")
    gap = setup.spec.gap
    t = math.tanh(0.5 * beta * gap)

    def squared_error(chi_vectors: np.ndarray) -> np.ndarray:
        chi_comp = setup.spec.eigenbasis @ chi_vectors
        c1, c2 = _contaminant_coefficients(setup, beta, delta, chi_comp)
        arg = c1 * t - 1j * c2
        bad = (np.abs(arg - 1.0) <= 1e-12) | (np.abs(arg + 1.0) <= 1e-12)
        if bad.any():
            raise EvaluationError(
                f"apparent temperature diverges at {int(bad.sum())} contaminant node(s)",
                nodes=np.argwhere(bad).ravel().tolist(),
            )
        apparent = 2.0 / gap * np.arctanh(arg)
        return np.abs(apparent - beta) ** 2 / (beta**2 * delta**2)

    if isinstance(rule, SphereQuadrature):
        th, ph, wt = rule.grids()
        chi = np.stack([np.cos(th.ravel() / 2.0), np.exp(1j * ph.ravel()) * np.sin(th.ravel() / 2.0)])
        values = squared_error(chi).reshape(th.shape)
        return float(np.sqrt(np.sum(values * wt)))
    if isinstance(rule, MonteCarloRule):
        rng = np.random.default_rng(rule.seed)
        z = rng.normal(size=(2, rule.n_samples)) + 1j * rng.normal(size=(2, rule.n_samples))
        chi = z / np.linalg.norm(z, axis=0, keepdims=True)
        values = squared_error(chi)
        mean = float(values.mean())
        sem = float(values.std(ddof=1) / np.sqrt(rule.n_samples))
        return MonteCarloEstimate(math.sqrt(mean), sem / (2.0 * math.sqrt(mean)), rule.n_samples)
    raise TypeError(f"unsupported averaging rule {type(rule).__name__}")


def _golden_minimize(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimum of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class OptimalWindow:
    """Location and height of a precision peak.

    ``interior`` is False when the scan found the optimum pinned at a bracket
    boundary (no genuine interior extremum).
    """

    T_opt: float
    error_min: float
    peak_precision: float
    interior: bool


def optimal_temperature_thermalization(xi: float, nu: float, *, gap: float = 1.0) -> OptimalWindow:
    """Temperature of minimal closed-form thermalization error.

    Grid scan over beta*gap in [0.01, 50] followed by golden-section
    refinement.  Boundary optima are flagged rather than raised.
    """
    xs = np.geomspace(0.01, 50.0, 400)
    vals = [rms_error_thermalization_closed(x, xi, nu) for x in xs]
    k = int(np.argmin(vals))
    interior = 0 < k < len(xs) - 1
    if interior:
        x_opt = _golden_minimize(lambda x: rms_error_thermalization_closed(x, xi, nu), xs[k - 1], xs[k + 1])
    else:
        x_opt = float(xs[k])
    n_min = rms_error_thermalization_closed(x_opt, xi, nu)
    return OptimalWindow(gap / x_opt, n_min, 1.0 / n_min, interior)


@dataclass(frozen=True)
class UnsharpWeakValues:
    """Perturbed weak value under unsharp post-selection, two ways.

    ``first_order`` is the exact derivative truncation
    A_w + eps (Tr(A rho) - A_w) / (2 p); ``exact`` is the full ratio
    Tr(rho_f A rho) / Tr(rho_f rho).  Their difference is O(eps^2).
    """

    first_order: complex
    exact: WeakValue


def perturbed_weak_value_unsharp(setup: ThermometrySetup, beta: float, eps: float) -> UnsharpWeakValues:
    """Weak value when the post-selection effect is (1-eps) P_f + eps/2 I."""
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 0.5]")
    rho = setup.thermal_state(beta).matrix
    a = setup.observable.matrix
    p = _postselection_overlap(setup, beta)
    proj = setup.post_selection.projector()
    eye = np.eye(setup.dim)
    rho_f = (1.0 - eps) * proj + 0.5 * eps * eye
    denom = complex(np.trace(rho_f @ rho)).real
    if denom <= 1e-12:
        raise DegeneratePostselectionError("unsharp post-selection denominator vanishes")
    exact = complex(np.trace(rho_f @ a @ rho)) / denom
    aw0 = weak_value(setup, beta).value
    tr_arho = complex(np.trace(a @ rho))
    first = aw0 + eps * (tr_arho - aw0) / (2.0 * p)
    return UnsharpWeakValues(first, WeakValue(exact, "exact"))


def unsharp_weak_value_trace_defect_form(setup: ThermometrySetup, beta: float, eps: float) -> complex:
    """Variant linearization A_w + eps (Tr(A rho) - 1) / p.

    Kept for comparison: its offset term subtracts the unit trace of the
    noise contribution instead of the weak value itself, so it deviates from
    the exact ratio at first order in eps.  The `unsharp-linearization` audit
    quantifies that divergence; use UnsharpWeakValues.first_order for an
    actual O(eps^2) approximation.
    """
    rho = setup.thermal_state(beta).matrix
    p = _postselection_overlap(setup, beta)
    aw0 = weak_value(setup, beta).value
    tr_arho = complex(np.trace(setup.observable.matrix @ rho))
    return aw0 + eps * (tr_arho - 1.0) / p


def rms_error_postselection(beta: float, xi: float, *, gap: float = 1.0) -> float:
    """RMS relative temperature error under unsharp post-selection.

    N = 4 / ( x (1 - t^2) (1 + cos(xi) t) ) with x = beta*gap, t = tanh(x/2);
    xi is the polar angle of the post-selection state.  Precision is 1/N.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = beta * gap
    ch = math.cosh(0.5 * x)
    return 4.0 * ch**3 / (x * _postselection_weight(x, math.cos(xi)))


def postselection_window_implied_cosine(T: float) -> float:
    """cos(xi) implied by stationarity of the post-selection precision at T.

    In gap = 1 units:  [sinh(1/T) - T (1 + cosh(1/T))]
                       / [T sinh(1/T) - cosh(1/T) + 2].
    The expression has a pole near T ~ 0.5; the physical branch lies above it.
    """
    b = 1.0 / T
    return (math.sinh(b) - T * (1.0 + math.cosh(b))) / (T * math.sinh(b) - math.cosh(b) + 2.0)


def optimal_temperature_postselection(xi: float, *, gap: float = 1.0) -> float:
    """Temperature of peak precision for unsharp post-selection at angle xi.

    Solves the stationarity condition cos(xi) = implied_cosine(T) by scanning
    T in [0.1, 5] (gap = 1 units) for sign changes and root-solving each
    bracket; pole crossings are rejected by a residual check.  The accepted
    root is cross-validated against direct golden-section maximization of the
    precision and must agree within 1e-4, which also selects the physical
    branch.
    """
    if not 0.0 <= xi <= math.pi:
        raise ValueError("xi must lie in [0, pi]")
    c = math.cos(xi)

    def objective(T):
        return postselection_window_implied_cosine(T) - c

    # direct maximizer of 1/N over beta (gap = 1 units)
    def neg_precision(b):
        t = math.tanh(0.5 * b)
        return -b * (1.0 - t * t) * (1.0 + c * t)

    b_opt = _golden_minimize(neg_precision, 0.02, 50.0)
    t_direct = 1.0 / b_opt

    grid = np.linspace(0.1, 5.0, 2001)
    vals = np.array([objective(T) for T in grid])
    roots = []
    for i in range(grid.size - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            try:
                r = find_root(objective, Bracket(grid[i], grid[i + 1], vals[i], vals[i + 1]), tol_x=1e-13)
            except WeakThermError:
                continue
            if abs(objective(r)) <= 1e-8:  # rejects the pole crossing
                roots.append(r)
    if not roots:
        raise BracketError("stationarity condition has no root in the search window [0.1, 5]")
    best = min(roots, key=lambda r: abs(r - t_direct))
    if abs(best - t_direct) > 1e-4:
        raise WeakThermError(
            f"stationarity root {best} and direct maximizer {t_direct} disagree beyond 1e-4"
        )
    return gap * best


def strong_scheme_reference() -> float:
    """Optimal temperature of the strong projective reference scheme.

    Root of exp(1/T) = (1 + 2T)/(1 - 2T) on (0.25, 0.49) for a unit-gap
    probe; this is where the relative-error precision of energy-basis
    measurement peaks, the baseline the weak windows are compared against.
    """
    def f(T):
        return math.exp(1.0 / T) - (1.0 + 2.0 * T) / (1.0 - 2.0 * T)

    return find_root(f, (0.25, 0.49), tol_x=1e-13)


@dataclass(frozen=True)
class PrecisionCurve:
    """Sampled error/precision curve for one model and post-selection.

    ``polar``/``azimuth`` are (xi, nu) for the perturbative models and
    (theta, phi) for the Fisher-information model.  ``degenerate`` marks
    configurations with identically zero precision (no interior peak).
    """

    model: str
    polar: float
    azimuth: float
    temperatures: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    precisions: np.ndarray = field(repr=False)
    T_opt: float
    peak_precision: float
    degenerate: bool = False


def build_precision_curve(model: str, polar: float, azimuth: float, temperatures, *, gap: float = 1.0) -> PrecisionCurve:
    """Evaluate one precision curve on a temperature grid.

    ``model`` is 'thermalization', 'postselection', or 'qfi'.  The grid must
    be strictly increasing and positive.  Deterministic: the peak location
    comes from the dedicated window solvers, not from the grid resolution.
    """
    T = np.asarray(temperatures, dtype=float)
    if T.ndim != 1 or T.size == 0:
        raise ValueError("temperature grid must be a non-empty 1-D array")
    if np.any(T <= 0) or np.any(np.diff(T) <= 0):
        raise ValueError("temperature grid must be positive and strictly increasing")

    if model == "thermalization":
        err = np.array([rms_error_thermalization_closed(1.0 / t, polar, azimuth, gap=gap) for t in T])
        window = optimal_temperature_thermalization(polar, azimuth, gap=gap)
        t_opt, peak = window.T_opt, window.peak_precision
    elif model == "postselection":
        err = np.array([rms_error_postselection(1.0 / t, polar, gap=gap) for t in T])
        t_opt = optimal_temperature_postselection(polar, gap=gap)
        peak = 1.0 / rms_error_postselection(1.0 / t_opt, polar, gap=gap)
    elif model == "qfi":
        from .fisher import PostSelectionAngles, scaled_precision

        angles = PostSelectionAngles(polar, azimuth)
        prec = np.array([scaled_precision(t, angles, gap=gap) for t in T])
        if np.all(prec == 0.0):
            err = np.full_like(prec, np.inf)
            return PrecisionCurve(model, polar, azimuth, T, err, prec, float("nan"), 0.0, True)
        k = int(np.argmax(prec))
        lo = T[max(k - 1, 0)]
        hi = T[min(k + 1, T.size - 1)]
        t_opt = _golden_minimize(lambda t: -scaled_precision(t, angles, gap=gap), lo, hi)
        peak = scaled_precision(t_opt, angles, gap=gap)
        with np.errstate(divide="ignore"):
            err = np.where(prec > 0, 1.0 / np.where(prec > 0, prec, 1.0), np.inf)
        return PrecisionCurve(model, polar, azimuth, T, err, prec, t_opt, peak, False)
    else:
        raise ValueError(f"unknown model {model!r}")

    with np.errstate(divide="ignore"):
        prec = np.where(err > 0, 1.0 / err, np.inf)
    degenerate = bool(np.all(prec == 0.0))
    return PrecisionCurve(model, polar, azimuth, T, err, prec, t_opt, peak, degenerate)

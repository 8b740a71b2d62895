"""Weak values on thermal probes and their inversion to temperature.

The protocol: a probe thermalized at inverse temperature beta is weakly
coupled to a pointer through an observable A, then post-selected on a pure
state.  The resulting complex weak value

    A_w = <f| A rho_beta |f> / <f| rho_beta |f>

carries temperature information whenever A fails to commute with the probe
Hamiltonian.  This module computes A_w exactly and to first order in beta,
inverts both forms, and evaluates the covariance-based identities and the
temperature lower bound that follow from the orthogonal decomposition of A.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    BoundUndefinedError,
    DegeneratePostselectionError,
    InformativenessWarning,
    SingularityError,
    UninformativeConfigurationError,
)
from .numerics import complex_arctanh
from .qcore import (
    DensityMatrix,
    EnergySpectrum,
    HermitianOperator,
    PureState,
    covariance,
    expectation,
    gibbs_state,
    haar_random_state,
    vaidman_decompose,
)

__all__ = [
    "WeakValue",
    "ThermometrySetup",
    "HighTemperatureInversion",
    "TemperatureBound",
    "weak_value",
    "weak_value_qubit_closed_form",
    "weak_value_high_temperature",
    "invert_beta_high_temperature",
    "invert_beta_exact_qubit",
    "temperature_lower_bound",
    "qubit_beta_identity_residual",
    "bound_audit_table",
]

DENOMINATOR_TOL = 1e-12
ANOMALY_TOL = 1e-12

WEAK_VALUE_METHODS = ("exact", "high_temperature", "readout_estimate")


@dataclass(frozen=True)
class WeakValue:
    """A complex weak value together with how it was obtained."""

    value: complex
    method: str = "exact"

    def __post_init__(self):
        if self.method not in WEAK_VALUE_METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {WEAK_VALUE_METHODS}")
        if not np.isfinite(self.value.real) or not np.isfinite(self.value.imag):
            raise ValueError("weak value must be finite")


class ThermometrySetup:
    """Probe spectrum, coupling observable, and post-selection state.

    Construction warns (never raises) when the observable commutes with the
    Hamiltonian, since such a configuration is deliberately expressible for
    negative tests even though its weak value carries no temperature signal.
    """

    def __init__(self, spec: EnergySpectrum, observable: HermitianOperator, post_selection: PureState):
        if not (spec.dim == observable.dim == post_selection.dim):
            raise ValueError(
                f"dimension mismatch: spectrum {spec.dim}, observable {observable.dim}, "
                f"post-selection {post_selection.dim}"
            )
        self.spec = spec
        self.observable = observable
        self.post_selection = post_selection
        self._hamiltonian = spec.hamiltonian()
        comm = observable.matrix @ self._hamiltonian.matrix - self._hamiltonian.matrix @ observable.matrix
        if np.max(np.abs(comm)) <= 1e-10:
            warnings.warn(
                "observable commutes with the Hamiltonian; the weak value carries "
                "no temperature information",
                InformativenessWarning,
                stacklevel=2,
            )

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def hamiltonian(self) -> HermitianOperator:
        return self._hamiltonian

    def thermal_state(self, beta: float) -> DensityMatrix:
        return gibbs_state(self.spec, beta)

    def postselection_probability(self, beta: float) -> float:
        f = self.post_selection.amplitudes
        rho = self.thermal_state(beta).matrix
        return float(np.vdot(f, rho @ f).real)

    @classmethod
    def canonical_qubit(cls, e1: float = 0.0, e2: float = 1.0) -> "ThermometrySetup":
        """The reference configuration: sigma_y-type observable in the energy
        basis with balanced post-selection (|psi_1> + |psi_2>)/sqrt(2)."""
        spec = EnergySpectrum([e1, e2])
        obs = HermitianOperator([[0, -1j], [1j, 0]])
        post = PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))
        return cls(spec, obs, post)


def weak_value(setup: ThermometrySetup, beta: float) -> WeakValue:
    """Exact complex weak value of the observable on the thermal probe."""
    f = setup.post_selection.amplitudes
    rho = setup.thermal_state(beta).matrix
    denom = float(np.vdot(f, rho @ f).real)
    if denom <= DENOMINATOR_TOL:
        raise DegeneratePostselectionError(
            f"post-selection probability {denom:.3e} is numerically zero"
        )
    num = complex(np.vdot(f, setup.observable.matrix @ (rho @ f)))
    return WeakValue(num / denom, "exact")


def weak_value_qubit_closed_form(beta: float, e1: float, e2: float) -> WeakValue:
    """Closed form for the canonical qubit configuration: i tanh(beta (E2-E1)/2)."""
    return WeakValue(1j * np.tanh(0.5 * beta * (e2 - e1)), "exact")


def weak_value_high_temperature(setup: ThermometrySetup, beta: float) -> WeakValue:
    """First-order-in-beta weak value <A>_f + beta (<A>_f <H>_f - <AH>_f).

    All expectations are taken in the post-selection state.  Accuracy degrades
    as O(beta^2); the regime beta * max|E| << 1 is advisory, not enforced.
    """
    f = setup.post_selection
    a_mean = expectation(setup.observable, f)
    h_mean = expectation(setup.hamiltonian, f)
    v = f.amplitudes
    ah = complex(np.vdot(v, setup.observable.matrix @ (setup.hamiltonian.matrix @ v)))
    return WeakValue(a_mean + beta * (a_mean * h_mean - ah), "high_temperature")


@dataclass(frozen=True)
class HighTemperatureInversion:
    """Real inverse temperature recovered from the first-order expansion,
    together with the magnitude of the imaginary residue that was dropped."""

    beta: float
    imaginary_residual: float


def invert_beta_high_temperature(
    aw: Union[WeakValue, complex], setup: ThermometrySetup
) -> HighTemperatureInversion:
    """Invert the first-order weak value: beta ~ (A_w - <A>_f) / (<A>_f<H>_f - <AH>_f).

    The quotient is complex in general; the real part is returned and the
    imaginary part is reported as a residual rather than silently discarded.
    """
    value = aw.value if isinstance(aw, WeakValue) else complex(aw)
    f = setup.post_selection
    a_mean = expectation(setup.observable, f)
    h_mean = expectation(setup.hamiltonian, f)
    v = f.amplitudes
    ah = complex(np.vdot(v, setup.observable.matrix @ (setup.hamiltonian.matrix @ v)))
    denom = a_mean * h_mean - ah
    if abs(denom) <= DENOMINATOR_TOL:
        raise UninformativeConfigurationError(
            "high-temperature inversion denominator <A><H> - <AH> vanishes"
        )
    q = (value - a_mean) / denom
    return HighTemperatureInversion(float(q.real), abs(q.imag))


def invert_beta_exact_qubit(aw: Union[WeakValue, complex], gap: float) -> float:
    """Exact inversion of the canonical qubit closed form.

    beta = (2/gap) arctanh(-i A_w); purely imaginary weak values give a real
    result, otherwise the real part of the principal branch is returned.
    """
    value = aw.value if isinstance(aw, WeakValue) else complex(aw)
    z = -1j * value
    if abs(z - 1.0) <= DENOMINATOR_TOL or abs(z + 1.0) <= DENOMINATOR_TOL:
        raise SingularityError("apparent inverse temperature diverges: arctanh argument at +-1")
    return float((2.0 / gap) * complex_arctanh(z).real)


@dataclass(frozen=True)
class TemperatureBound:
    """Result of the covariance-based temperature lower bound.

    ``applicable`` is False when the bound's denominator is non-positive
    (the underlying expansion presumes beta <H> < 1); in that case ``bound``
    is NaN and ``satisfied`` is None.
    """

    bound: float
    satisfied: Union[bool, None]
    applicable: bool
    anomalous_value: float
    covariance_magnitude: float


def temperature_lower_bound(setup: ThermometrySetup, beta_true: float) -> TemperatureBound:
    """Evaluate T >= <H> / (1 - |Cov(A, rho)| / (Z * deltaA)) in the
    post-selection state.

    deltaA = |Re(A_w) - <A>_f| is the anomalous part of the weak value; a
    value below 1e-12 makes the bound undefined and raises.  All expectations
    (including <H>) are taken in the post-selection state.
    """
    f = setup.post_selection
    aw = weak_value(setup, beta_true)
    a_mean = expectation(setup.observable, f)
    delta_a = abs(aw.value.real - a_mean)
    if delta_a <= ANOMALY_TOL:
        raise BoundUndefinedError(
            "anomalous weak value |Re(A_w) - <A>| is numerically zero; bound undefined"
        )
    rho = setup.thermal_state(beta_true)
    cov = abs(covariance(setup.observable, rho, f))
    z = setup.spec.partition_function(beta_true)
    denom = 1.0 - cov / (z * delta_a)
    h_mean = expectation(setup.hamiltonian, f)
    if denom <= 0.0:
        return TemperatureBound(float("nan"), None, False, delta_a, cov)
    bound = h_mean / denom
    t_true = np.inf if beta_true == 0 else 1.0 / beta_true
    return TemperatureBound(bound, bool(t_true >= bound - 1e-9), True, delta_a, cov)


def qubit_beta_identity_residual(setup: ThermometrySetup, beta: float) -> float:
    """Diagnostic residual |RHS - beta| for the qubit covariance identity
    beta ~ -dA * drho / (Cov(A, H) <f|rho|f>).

    The right-hand side is assembled from the orthogonal decompositions of
    the observable and of the thermal state; the residual is reported, not
    asserted small (the identity holds only in the high-temperature limit,
    and only up to the relative phase of the two orthogonal states).
    """
    if setup.dim != 2:
        raise ValueError("identity is specific to qubit probes")
    f = setup.post_selection
    cov_ah = covariance(setup.observable, setup.hamiltonian, f)
    if abs(cov_ah) <= DENOMINATOR_TOL:
        raise UninformativeConfigurationError("Cov(A, H) vanishes; identity inapplicable")
    rho = setup.thermal_state(beta)
    dev_a = vaidman_decompose(setup.observable, f).deviation
    dev_rho = vaidman_decompose(rho, f).deviation
    p = setup.postselection_probability(beta)
    rhs = -dev_a * dev_rho / (cov_ah * p)
    return float(abs(rhs - beta))


def bound_audit_table(n_setups: int, betas, seed: int):
    """Monte-Carlo audit of the temperature bound over random qubit setups.

    For each beta, draws ``n_setups`` random (observable axis, post-selection)
    pairs, evaluates the bound where defined, and tabulates how often it is
    applicable and how often an applicable bound actually holds.

    Returns a list of dict rows: beta, n, undefined, inapplicable, applicable,
    satisfied, satisfied_fraction.
    """
    rng = np.random.default_rng(seed)
    spec = EnergySpectrum([0.0, 1.0])
    rows = []
    for beta in betas:
        undefined = inapplicable = satisfied = applicable = 0
        for _ in range(n_setups):
            angle = rng.uniform(0.0, 2.0 * np.pi)
            obs = HermitianOperator(
                np.cos(angle) * np.array([[0, 1], [1, 0]], dtype=complex)
                + np.sin(angle) * np.array([[0, -1j], [1j, 0]])
            )
            post = haar_random_state(2, rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", InformativenessWarning)
                setup = ThermometrySetup(spec, obs, post)
            try:
                res = temperature_lower_bound(setup, beta)
            except (BoundUndefinedError, DegeneratePostselectionError):
                undefined += 1
                continue
            if not res.applicable:
                inapplicable += 1
            else:
                applicable += 1
                if res.satisfied:
                    satisfied += 1
        rows.append(
            {
                "beta": float(beta),
                "n": n_setups,
                "undefined": undefined,
                "inapplicable": inapplicable,
                "applicable": applicable,
                "satisfied": satisfied,
                "satisfied_fraction": satisfied / applicable if applicable else float("nan"),
            }
        )
    return rows

"""Discretized continuous-variable apparatus and the full protocol oracle.

The pointer lives on a periodic position grid; its momentum operator is
diagonal after a discrete Fourier transform, so every exponential of the
coupling Hamiltonian A (x) P becomes a bank of phase multiplications.  That
makes the *exact* joint evolution and post-selection cheap, providing a
ground truth against which the first-order collapsed pointer state and the
moment-based readout formulas are checked, order by order in the coupling.

Conventions: hbar = 1; wavefunctions are normalized as sum |phi(x_j)|^2 dx = 1;
a mixed pointer state is kept in factored form (weights + component vectors)
and only materialized into an N x N matrix on demand.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    AmplificationError,
    DegeneratePostselectionError,
    GridMismatchError,
    UnsupportedReadoutError,
    WeakRegimeWarning,
)
from .qcore import DensityMatrix
from .weakproto import ThermometrySetup, WeakValue, invert_beta_exact_qubit

__all__ = [
    "PointerGrid",
    "PointerWavefunction",
    "PointerMixture",
    "CouplingParams",
    "JointState",
    "gaussian_pointer",
    "evolve_and_postselect",
    "joint_evolved_state",
    "first_order_pointer_state",
    "jozsa_readout",
    "sample_pointer_measurements",
    "estimate_temperature_end_to_end",
    "trace_distance",
    "TemperatureEstimate",
]


@dataclass(frozen=True)
class PointerGrid:
    """Periodic position grid on [-L, L) with a power-of-two point count."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        n = self.n_points
        if n < 64 or (n & (n - 1)) != 0:
            raise ValueError("n_points must be a power of two, at least 64")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def dp(self) -> float:
        return math.pi / self.half_width

    @property
    def positions(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_points)

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


class PointerWavefunction:
    """A pure pointer state phi(x_j) on a PointerGrid."""

    def __init__(self, grid: PointerGrid, amplitudes):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if v.size != grid.n_points:
            raise ValueError("amplitude count does not match the grid")
        norm2 = float(np.sum(np.abs(v) ** 2) * grid.dx)
        if abs(norm2 - 1.0) > 1e-10:
            raise ValueError(f"wavefunction norm^2 = {norm2} is not 1 on the grid")
        self.grid = grid
        self.amplitudes = v

    def position_density(self) -> np.ndarray:
        """Probability per grid point (sums to 1)."""
        return np.abs(self.amplitudes) ** 2 * self.grid.dx

    def momentum_amplitudes(self) -> np.ndarray:
        """Momentum-space wavefunction on grid.momenta (fft ordering)."""
        return np.fft.fft(self.amplitudes) * self.grid.dx / math.sqrt(2.0 * math.pi)

    def momentum_density(self) -> np.ndarray:
        return np.abs(self.momentum_amplitudes()) ** 2 * self.grid.dp

    def position_moments(self):
        d = self.position_density()
        x = self.grid.positions
        mean = float(np.sum(d * x))
        var = float(np.sum(d * (x - mean) ** 2))
        return mean, var

    def momentum_moments(self):
        d = self.momentum_density()
        p = self.grid.momenta
        mean = float(np.sum(d * p))
        var = float(np.sum(d * (p - mean) ** 2))
        return mean, var

    def as_mixture(self) -> "PointerMixture":
        return PointerMixture(self.grid, np.array([1.0]), self.amplitudes[None, :])


class PointerMixture:
    """A mixed pointer state sum_k w_k |v_k><v_k| kept in factored form.

    Weights are probabilities times component norms; the constructor
    normalizes the total trace to one.
    """

    def __init__(self, grid: PointerGrid, weights, components):
        w = np.asarray(weights, dtype=float).reshape(-1)
        c = np.asarray(components, dtype=complex)
        if c.ndim != 2 or c.shape[0] != w.size or c.shape[1] != grid.n_points:
            raise ValueError("components must have shape (n_components, n_points)")
        if np.any(w < 0):
            raise ValueError("mixture weights must be non-negative")
        norms = np.sum(np.abs(c) ** 2, axis=1) * grid.dx
        total = float(np.sum(w * norms))
        if total <= 0:
            raise ValueError("mixture has zero trace")
        self.grid = grid
        self.weights = w / total
        self.components = c

    def position_density(self) -> np.ndarray:
        dens = np.einsum("k,kj->j", self.weights, np.abs(self.components) ** 2) * self.grid.dx
        return dens

    def momentum_density(self) -> np.ndarray:
        ck = np.fft.fft(self.components, axis=1) * self.grid.dx / math.sqrt(2.0 * math.pi)
        return np.einsum("k,kj->j", self.weights, np.abs(ck) ** 2) * self.grid.dp

    def position_moments(self):
        d = self.position_density()
        d = d / d.sum()
        x = self.grid.positions
        mean = float(np.sum(d * x))
        return mean, float(np.sum(d * (x - mean) ** 2))

    def momentum_moments(self):
        d = self.momentum_density()
        d = d / d.sum()
        p = self.grid.momenta
        mean = float(np.sum(d * p))
        return mean, float(np.sum(d * (p - mean) ** 2))

    def density_matrix(self) -> np.ndarray:
        """Materialized N x N matrix with unit trace (counting measure)."""
        m = np.einsum("k,ki,kj->ij", self.weights, self.components, self.components.conj())
        return m * self.grid.dx

    def purity(self) -> float:
        m = self.density_matrix()
        return float(np.trace(m @ m).real)


def _to_mixture(state: Union[PointerWavefunction, PointerMixture]) -> PointerMixture:
    return state.as_mixture() if isinstance(state, PointerWavefunction) else state


def trace_distance(
    a: Union[PointerWavefunction, PointerMixture], b: Union[PointerWavefunction, PointerMixture]
) -> float:
    """(1/2) || a - b ||_1 between two pointer states on the same grid."""
    ma, mb = _to_mixture(a), _to_mixture(b)
    if ma.grid != mb.grid:
        raise ValueError("states live on different grids")
    ev = np.linalg.eigvalsh(ma.density_matrix() - mb.density_matrix())
    return float(0.5 * np.sum(np.abs(ev)))


@dataclass(frozen=True)
class CouplingParams:
    """Impulsive coupling strength g and duration tau; only g*tau matters.

    The weak-measurement relations used downstream assume g*tau <= 0.1;
    construction outside that band warns but does not fail.
    """

    g: float
    tau: float

    def __post_init__(self):
        if self.g <= 0 or self.tau <= 0:
            raise ValueError("coupling strength and duration must be positive")
        if self.gtau > 0.1:
            warnings.warn(
                f"g*tau = {self.gtau} exceeds the weak-interaction advisory band (<= 0.1)",
                WeakRegimeWarning,
                stacklevel=2,
            )

    @property
    def gtau(self) -> float:
        return self.g * self.tau


def gaussian_pointer(grid: PointerGrid, sigma: float) -> PointerWavefunction:
    """Gaussian pointer exp(-x^2 / 4 sigma^2), normalized on the grid.

    Position variance sigma^2, momentum variance 1/(4 sigma^2).  The width
    must be resolvable (sigma >= 4 dx) and untruncated (sigma <= L/4).
    """
    if sigma < 4.0 * grid.dx or sigma > grid.half_width / 4.0:
        raise GridMismatchError(
            f"sigma = {sigma} outside the resolvable band [{4.0 * grid.dx}, {grid.half_width / 4.0}]"
        )
    x = grid.positions
    phi = np.exp(-(x**2) / (4.0 * sigma**2)).astype(complex)
    phi /= math.sqrt(float(np.sum(np.abs(phi) ** 2) * grid.dx))
    return PointerWavefunction(grid, phi)


def _postselected_components(rho: DensityMatrix, setup: ThermometrySetup, pointer: PointerWavefunction, gtau: float):
    """Component vectors <f| U (|n> tensor |phi>) for each probe eigenvector |n>.

    U = exp(-i gtau A tensor P) acts as a translation bank over the
    eigenbasis of the observable; everything reduces to FFTs of the input
    pointer.
    """
    evals, evecs = np.linalg.eigh(setup.observable.matrix)
    f = setup.post_selection.amplitudes
    lam, sysvecs = np.linalg.eigh(rho.matrix)
    phik = np.fft.fft(pointer.amplitudes)
    p = pointer.grid.momenta
    translated = np.fft.ifft(phik[None, :] * np.exp(-1j * gtau * evals[:, None] * p[None, :]), axis=1)
    comps = []
    weights = []
    for n in range(rho.dim):
        if lam[n] <= 1e-15:
            continue
        coeff = (f.conj() @ evecs) * (evecs.conj().T @ sysvecs[:, n])
        comps.append(coeff @ translated)
        weights.append(float(lam[n]))
    return np.array(weights), np.array(comps)


def evolve_and_postselect(
    rho: DensityMatrix,
    setup: ThermometrySetup,
    pointer: PointerWavefunction,
    cp: CouplingParams,
):
    """Exact coupling unitary followed by post-selection on the probe.

    Returns (pointer_state, success_probability) where the pointer state is
    a PointerMixture (the probe is mixed, so the conditioned pointer is too)
    and the success probability is exact to all orders in g*tau.
    """
    if rho.dim != setup.dim:
        raise ValueError("probe state dimension does not match the setup")
    if rho.dim * pointer.grid.n_points > 4096:
        raise ValueError("joint dimension d*N exceeds the practical cap 4096")
    weights, comps = _postselected_components(rho, setup, pointer, cp.gtau)
    norms = np.sum(np.abs(comps) ** 2, axis=1) * pointer.grid.dx
    prob = float(np.sum(weights * norms))
    if prob <= 1e-12:
        raise DegeneratePostselectionError(f"post-selection probability {prob:.3e} is numerically zero")
    return PointerMixture(pointer.grid, weights, comps), prob


class JointState:
    """Materialized probe + pointer density matrix after the coupling.

    Heavy: (d N)^2 entries.  Intended for invariant checks on reduced grids,
    not for production evolution (the factored path in evolve_and_postselect
    is exact and cheap).
    """

    def __init__(self, system_dim: int, grid: PointerGrid, matrix: np.ndarray):
        n = system_dim * grid.n_points
        if matrix.shape != (n, n):
            raise ValueError("joint matrix shape does not match d*N")
        self.system_dim = system_dim
        self.grid = grid
        self.matrix = matrix

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


def joint_evolved_state(
    rho: DensityMatrix, setup: ThermometrySetup, pointer: PointerWavefunction, cp: CouplingParams
) -> JointState:
    """Build exp(-i gtau A x P) (rho x |phi><phi|) exp(+i gtau A x P) explicitly."""
    d, n = rho.dim, pointer.grid.n_points
    if d * n > 4096:
        raise ValueError("joint dimension d*N exceeds the practical cap 4096")
    evals, evecs = np.linalg.eigh(setup.observable.matrix)
    p = pointer.grid.momenta
    fwd = np.fft.fft(np.eye(n), axis=0)
    inv = np.fft.ifft(np.eye(n), axis=0)
    u = np.zeros((d * n, d * n), dtype=complex)
    for k in range(d):
        proj = np.outer(evecs[:, k], evecs[:, k].conj())
        tk = inv @ (np.exp(-1j * cp.gtau * evals[k] * p)[:, None] * fwd)
        u += np.kron(proj, tk)
    phi = pointer.amplitudes
    rho_ptr = np.outer(phi, phi.conj()) * pointer.grid.dx
    joint = np.kron(rho.matrix, rho_ptr)
    return JointState(d, pointer.grid, u @ joint @ u.conj().T)


def first_order_pointer_state(
    aw: Union[WeakValue, complex], pointer: PointerWavefunction, cp: CouplingParams
) -> PointerWavefunction:
    """Collapsed pointer state to first order in the coupling.

    Applies exp(-i gtau A_w P) in momentum space and renormalizes; for
    complex A_w the operation is non-unitary (the imaginary part tilts the
    momentum distribution instead of translating position).
    """
    value = aw.value if isinstance(aw, WeakValue) else complex(aw)
    phik = np.fft.fft(pointer.amplitudes)
    phik = phik * np.exp(-1j * cp.gtau * value * pointer.grid.momenta)
    out = np.fft.ifft(phik)
    norm2 = float(np.sum(np.abs(out) ** 2) * pointer.grid.dx)
    if norm2 <= 1e-12:
        raise AmplificationError(f"pointer norm collapsed to {norm2:.3e} after the non-unitary update")
    return PointerWavefunction(pointer.grid, out / math.sqrt(norm2))


def _require_gaussian(pointer: PointerWavefunction):
    xm, xv = pointer.position_moments()
    pm, pv = pointer.momentum_moments()
    d = pointer.position_density()
    x = pointer.grid.positions
    kurt = float(np.sum(d * (x - xm) ** 4) / xv**2 - 3.0)
    if abs(xv * pv - 0.25) > 1e-3 or abs(kurt) > 1e-2:
        raise UnsupportedReadoutError(
            "readout formulas assume a minimum-uncertainty Gaussian input pointer"
        )


def jozsa_readout(
    pointer_out: Union[PointerWavefunction, PointerMixture],
    pointer_in: PointerWavefunction,
    cp: CouplingParams,
) -> WeakValue:
    """Recover the complex weak value from pointer moment shifts.

    Re(A_w) = (<X>_out - <X>_in) / gtau;
    Im(A_w) = (<P>_out - <P>_in) / (2 gtau Var_in(P)).
    Requires the weak regime (gtau <= 0.1) and a Gaussian input pointer.
    """
    if cp.gtau > 0.1:
        raise UnsupportedReadoutError("moment readout requires the weak regime g*tau <= 0.1")
    _require_gaussian(pointer_in)
    x_in, _ = pointer_in.position_moments()
    p_in, p_var = pointer_in.momentum_moments()
    out = _to_mixture(pointer_out)
    x_out, _ = out.position_moments()
    p_out, _ = out.momentum_moments()
    re = (x_out - x_in) / cp.gtau
    im = (p_out - p_in) / (2.0 * cp.gtau * p_var)
    return WeakValue(re + 1j * im, "readout_estimate")


def sample_pointer_measurements(
    state: Union[PointerWavefunction, PointerMixture],
    basis: str,
    n_shots: int,
    seed,
) -> np.ndarray:
    """Draw i.i.d. grid-valued measurement outcomes from the Born distribution.

    ``basis`` is 'position' or 'momentum'.  Deterministic for a fixed seed;
    passing a Generator draws from it without reseeding.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be at least 1")
    mix = _to_mixture(state)
    if basis == "position":
        values = mix.grid.positions
        probs = mix.position_density()
    elif basis == "momentum":
        order = np.argsort(mix.grid.momenta)
        values = mix.grid.momenta[order]
        probs = mix.momentum_density()[order]
    else:
        raise ValueError(f"unknown basis {basis!r}")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.choice(values, size=n_shots, p=probs)


@dataclass(frozen=True)
class TemperatureEstimate:
    """End-to-end shot-based temperature estimate.

    ``n_shots`` counts probe preparations (protocol runs); post-selection
    survivors are split between the two readout bases.  ``stderr`` is the
    bootstrap standard error over 200 moment resamples: the standard
    deviation of the resampled temperatures under the signed continuation
    1/beta (resamples with a non-positive inverse temperature enter with
    their negative temperature, so the quoted spread honestly covers the
    inversion's divergent tail; an exactly singular resample makes it
    infinite).  ``failure_fraction`` records the fraction of resamples with
    a non-positive inverse temperature.  ``failed`` marks a non-positive
    point estimate, whose raw value is kept in ``beta_hat``.
    """

    T_hat: float
    stderr: float
    beta_hat: float
    aw_estimate: WeakValue
    n_shots: int
    n_postselected: int
    n_position: int
    n_momentum: int
    postselection_fraction: float
    failed: bool
    failure_fraction: float = 0.0


_BOOTSTRAP_RESAMPLES = 200


def estimate_temperature_end_to_end(
    T_true: float,
    setup: ThermometrySetup,
    pointer: PointerWavefunction,
    cp: CouplingParams,
    n_shots: int,
    seed: Optional[int],
) -> TemperatureEstimate:
    """Simulate the full protocol and invert the readout to a temperature.

    With ``n_shots`` = 0 the moment-exact path is taken: grid moments of the
    exactly evolved pointer feed the readout with no sampling noise (stderr
    0).  Otherwise ``n_shots`` probe preparations are simulated: a binomial
    post-selection filter, alternating position/momentum readout of the
    survivors, moment estimation, weak-value readout against the known input
    pointer, and exact inversion of the canonical qubit closed form.
    """
    if T_true <= 0:
        raise ValueError("true temperature must be positive")
    if setup.dim != 2:
        raise ValueError("end-to-end estimation requires the invertible qubit configuration")
    gap = setup.spec.gap
    beta = 1.0 / T_true
    rho = setup.thermal_state(beta)
    out, prob = evolve_and_postselect(rho, setup, pointer, cp)
    _, p_var_in = pointer.momentum_moments()
    x_in, _ = pointer.position_moments()
    p_in, _ = pointer.momentum_moments()

    def invert(mean_x: float, mean_p: float):
        aw = (mean_x - x_in) / cp.gtau + 1j * (mean_p - p_in) / (2.0 * cp.gtau * p_var_in)
        b = invert_beta_exact_qubit(aw, gap)
        return aw, b

    if n_shots == 0:
        x_out, _ = out.position_moments()
        p_out, _ = out.momentum_moments()
        aw, b_hat = invert(x_out, p_out)
        return TemperatureEstimate(
            T_hat=1.0 / b_hat if b_hat > 0 else float("nan"),
            stderr=0.0,
            beta_hat=b_hat,
            aw_estimate=WeakValue(aw, "readout_estimate"),
            n_shots=0,
            n_postselected=0,
            n_position=0,
            n_momentum=0,
            postselection_fraction=prob,
            failed=not b_hat > 0,
        )

    rng = np.random.default_rng(seed)
    n_succ = int(rng.binomial(n_shots, prob))
    n_x = n_succ // 2
    n_p = n_succ - n_x
    if n_x < 1 or n_p < 1:
        raise ValueError("too few post-selected shots to estimate both moments")
    xs = sample_pointer_measurements(out, "position", n_x, rng)
    ps = sample_pointer_measurements(out, "momentum", n_p, rng)
    aw, b_hat = invert(float(xs.mean()), float(ps.mean()))

    boot = np.empty(_BOOTSTRAP_RESAMPLES)
    failures = 0
    for i in range(_BOOTSTRAP_RESAMPLES):
        bx = float(xs[rng.integers(0, n_x, n_x)].mean())
        bp = float(ps[rng.integers(0, n_p, n_p)].mean())
        try:
            _, b = invert(bx, bp)
        except WeakThermError:
            b = 0.0
        if b <= 0:
            failures += 1
        # signed continuation keeps the resample spread honest on both sides
        boot[i] = 1.0 / b if b != 0.0 else math.inf
    stderr = float(np.std(boot, ddof=1)) if np.all(np.isfinite(boot)) else math.inf

    return TemperatureEstimate(
        T_hat=1.0 / b_hat if b_hat > 0 else float("nan"),
        stderr=stderr,
        beta_hat=b_hat,
        aw_estimate=WeakValue(aw, "readout_estimate"),
        n_shots=n_shots,
        n_postselected=n_succ,
        n_position=n_x,
        n_momentum=n_p,
        postselection_fraction=n_succ / n_shots,
        failed=not b_hat > 0,
        failure_fraction=failures / _BOOTSTRAP_RESAMPLES,
    )

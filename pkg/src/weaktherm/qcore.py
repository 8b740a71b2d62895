"""Dense complex linear algebra for small quantum systems.

Operators, pure states, density matrices, energy spectra with their Gibbs
states, expectation values, covariances, and the orthogonal (mean/deviation)
decomposition of an operator acting on a state.  Dimensions are unbounded in
principle but everything is tuned for the few-level probes used elsewhere in
the package.  Units: energies with k_B = 1, hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "HermitianOperator",
    "PureState",
    "DensityMatrix",
    "EnergySpectrum",
    "VaidmanDecomposition",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "identity",
    "gibbs_state",
    "expectation",
    "covariance",
    "vaidman_decompose",
    "bloch_to_state",
    "haar_random_state",
]

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


class HermitianOperator:
    """A dense Hermitian matrix with its dimension.

    Hermiticity is validated to 1e-12 at construction; the stored matrix is a
    defensive copy.
    """

    def __init__(self, entries):
        m = _as_complex_matrix(entries)
        defect = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if defect > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (defect {defect:.2e})")
        self.matrix = m
        self.dim = m.shape[0]

    def eig(self):
        """Eigenvalues (ascending) and eigenvector columns."""
        return np.linalg.eigh(self.matrix)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class PureState:
    """A normalized complex amplitude vector."""

    def __init__(self, amplitudes):
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > 1e-10:
            raise ValueError(f"state norm^2 = {norm2} is not 1")
        # snap tiny residuals so downstream trace checks stay inside 1e-12
        self.amplitudes = v / np.sqrt(norm2)
        self.dim = v.size

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / n)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite matrix.

    The PSD tolerance is -1e-10 on eigenvalues: perturbed states assembled
    from floating arithmetic may dip slightly below zero.
    """

    def __init__(self, entries):
        m = _as_complex_matrix(entries)
        defect = np.max(np.abs(m - m.conj().T))
        if defect > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian (defect {defect:.2e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.2e}")
        self.matrix = m
        self.dim = m.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class EnergySpectrum:
    """Probe Hamiltonian data: ordered energy levels and their eigenbasis.

    ``eigenbasis`` columns are the energy eigenstates expressed in the
    computational basis (defaults to the identity, i.e. the energy basis *is*
    the computational basis).  Levels must be non-decreasing.
    """

    def __init__(self, levels, eigenbasis=None):
        e = np.array(levels, dtype=float).reshape(-1)
        if e.size < 2:
            raise ValueError("need at least two energy levels")
        if np.any(np.diff(e) < 0):
            raise ValueError("levels must be sorted in non-decreasing order")
        d = e.size
        if eigenbasis is None:
            b = np.eye(d, dtype=complex)
        else:
            b = _as_complex_matrix(eigenbasis)
            if b.shape[0] != d:
                raise ValueError("eigenbasis dimension does not match levels")
            if np.max(np.abs(b.conj().T @ b - np.eye(d))) > 1e-12:
                raise ValueError("eigenbasis is not unitary")
        self.levels = e
        self.eigenbasis = b
        self.dim = d

    @property
    def gap(self) -> float:
        """E_2 - E_1 for a qubit spectrum; must be positive."""
        if self.dim != 2:
            raise ValueError("gap is defined for qubit spectra only")
        g = self.levels[1] - self.levels[0]
        if g <= 0:
            raise ValueError("qubit gap must be positive")
        return float(g)

    def hamiltonian(self) -> HermitianOperator:
        b = self.eigenbasis
        return HermitianOperator(b @ np.diag(self.levels) @ b.conj().T)

    def eigenstate(self, n: int) -> PureState:
        return PureState(self.eigenbasis[:, n])

    def boltzmann_weights(self, beta: float) -> np.ndarray:
        """Normalized populations e^{-beta E_n} / Z, computed stably.

        Exponentials are shifted by min(E) before exponentiation so beta up
        to ~1e3 stays finite.
        """
        if beta < 0:
            raise ValueError("negative inverse temperature is out of scope")
        w = np.exp(-beta * (self.levels - self.levels.min()))
        return w / w.sum()

    def partition_function(self, beta: float) -> float:
        """Z = sum_n e^{-beta E_n} (unshifted; intended for moderate beta*E)."""
        if beta < 0:
            raise ValueError("negative inverse temperature is out of scope")
        return float(np.sum(np.exp(-beta * self.levels)))

    def __repr__(self):
        return f"EnergySpectrum(levels={self.levels.tolist()})"


def sigma_x() -> HermitianOperator:
    return HermitianOperator([[0, 1], [1, 0]])


def sigma_y() -> HermitianOperator:
    return HermitianOperator([[0, -1j], [1j, 0]])


def sigma_z() -> HermitianOperator:
    return HermitianOperator([[1, 0], [0, -1]])


def identity(dim: int) -> HermitianOperator:
    return HermitianOperator(np.eye(dim))


def gibbs_state(spec: EnergySpectrum, beta: float) -> DensityMatrix:
    """Thermal equilibrium state of the probe at inverse temperature ``beta``.

    beta = 0 is the infinite-temperature (maximally mixed) limit; negative
    beta raises ValueError.
    """
    w = spec.boltzmann_weights(beta)
    b = spec.eigenbasis
    return DensityMatrix(b @ np.diag(w.astype(complex)) @ b.conj().T)


def _state_matrix(state: Union[PureState, DensityMatrix]) -> np.ndarray:
    if isinstance(state, PureState):
        return state.projector()
    if isinstance(state, DensityMatrix):
        return state.matrix
    raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def expectation(A: HermitianOperator, state: Union[PureState, DensityMatrix]) -> float:
    """<A> in a pure or mixed state.  The O(1e-12) imaginary residue is dropped."""
    if isinstance(state, PureState):
        if A.dim != state.dim:
            raise ValueError(f"dimension mismatch: operator {A.dim}, state {state.dim}")
        v = state.amplitudes
        return float(np.vdot(v, A.matrix @ v).real)
    if A.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {A.dim}, state {state.dim}")
    return float(np.trace(A.matrix @ _state_matrix(state)).real)


def covariance(
    A: HermitianOperator,
    B: Union[HermitianOperator, DensityMatrix],
    psi: PureState,
) -> complex:
    """<psi|AB|psi> - <psi|A|psi><psi|B|psi>.

    Complex in general: AB need not be Hermitian even when A and B are.
    B may be a density matrix treated as an ordinary Hermitian operator.
    """
    bm = B.matrix
    if A.dim != psi.dim or bm.shape[0] != psi.dim:
        raise ValueError("dimension mismatch between operators and state")
    v = psi.amplitudes
    ab = complex(np.vdot(v, A.matrix @ (bm @ v)))
    a = complex(np.vdot(v, A.matrix @ v))
    b = complex(np.vdot(v, bm @ v))
    return ab - a * b


@dataclass(frozen=True)
class VaidmanDecomposition:
    """A|psi> = mean |psi> + deviation |orthogonal>.

    ``orthogonal`` is None when psi is an eigenstate of A (deviation <= 1e-10).
    """

    mean: float
    deviation: float
    orthogonal: Optional[PureState]


def vaidman_decompose(
    A: Union[HermitianOperator, DensityMatrix], psi: PureState
) -> VaidmanDecomposition:
    """Split the action of a Hermitian operator on a state into parallel and
    orthogonal parts.

    Returns the mean <A>, the standard deviation sqrt(<A^2> - <A>^2), and the
    unit vector along (A - <A>)|psi> when the deviation exceeds 1e-10.
    """
    m = A.matrix
    if m.shape[0] != psi.dim:
        raise ValueError("dimension mismatch")
    v = psi.amplitudes
    av = m @ v
    mean = float(np.vdot(v, av).real)
    var = float(np.vdot(av, av).real) - mean * mean
    dev = float(np.sqrt(max(var, 0.0)))
    if dev <= 1e-10:
        return VaidmanDecomposition(mean, dev, None)
    residual = av - mean * v
    return VaidmanDecomposition(mean, dev, PureState(residual / dev))


def bloch_to_state(theta: float, phi: float, basis: Optional[np.ndarray] = None) -> PureState:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> in the given two-state basis.

    Out-of-range angles are wrapped onto theta in [0, pi], phi in [0, 2 pi),
    never rejected.
    """
    theta = float(theta) % (2.0 * np.pi)
    if theta > np.pi:
        theta = 2.0 * np.pi - theta
        phi = phi + np.pi
    phi = float(phi) % (2.0 * np.pi)
    amps = np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])
    if basis is not None:
        b = np.asarray(basis, dtype=complex)
        amps = b[:, 0] * amps[0] + b[:, 1] * amps[1]
    return PureState(amps)


def haar_random_state(dim: int, seed) -> PureState:
    """Haar-distributed pure state, deterministic for a fixed seed.

    ``seed`` may be an int or a numpy Generator (drawn from, not reset).
    """
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(z / np.linalg.norm(z))

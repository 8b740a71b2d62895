"""Exception and warning types shared across the package.

The command line tool maps these onto process exit codes, so raising the
right class matters more than usual: anything derived from ``WeakThermError``
is a numerical/domain failure (exit 2), while argparse-level problems are
usage errors (exit 1).
"""


class WeakThermError(Exception):
    """Base class for numerical and domain failures raised by this package."""


class BracketError(WeakThermError):
    """A root bracket is invalid (no sign change, or an empty search window)."""


class ConvergenceError(WeakThermError):
    """An iteration exhausted its budget; carries the best estimate found."""

    def __init__(self, message, best_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate


class SingularityError(WeakThermError):
    """An input sits on a pole of the requested map (e.g. arctanh at +-1)."""


class EvaluationError(WeakThermError):
    """A user-supplied function returned a non-finite value at specific nodes."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class DegeneratePostselectionError(WeakThermError):
    """Post-selection overlap with the probe state is numerically zero."""


class UninformativeConfigurationError(WeakThermError):
    """The chosen observable/post-selection carries no temperature signal."""


class BoundUndefinedError(WeakThermError):
    """The anomalous weak value vanishes, so the temperature bound is undefined."""


class GridMismatchError(WeakThermError):
    """A pointer wavefunction cannot be resolved on the requested grid."""


class AmplificationError(WeakThermError):
    """A non-unitary pointer update collapsed the state norm below tolerance."""


class UnsupportedReadoutError(WeakThermError):
    """Moment-based readout preconditions (Gaussian input, weak coupling) fail."""


class InformativenessWarning(UserWarning):
    """Observable commutes with the Hamiltonian: weak value is temperature-blind."""


class WeakRegimeWarning(UserWarning):
    """Coupling strength leaves the weak-interaction regime (g*tau > 0.1)."""


class StepSizeWarning(UserWarning):
    """A finite-difference step is too coarse: halving it changes the result >1%."""


class UnboundedVarianceWarning(UserWarning):
    """Fisher information is non-positive; the precision bound is infinite."""

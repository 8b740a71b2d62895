"""weaktherm: weak-measurement thermometry with finite-dimensional probes.

A simulation and analysis toolkit for temperature estimation through weak
values: thermal-probe weak values and their inversion, precision windows
under imperfect thermalization and unsharp post-selection, a discretized
pointer-apparatus oracle for the full protocol, and the Fisher-information
view of the same precision limits.  The `weaktherm` command line drives
parameter sweeps, end-to-end shot simulations, and numerical audits, all
emitting reproducible CSV.
"""

from . import errors
from .numerics import (
    Bracket,
    SphereQuadrature,
    central_difference,
    complex_arctanh,
    find_root,
    sphere_average,
)
from .qcore import (
    DensityMatrix,
    EnergySpectrum,
    HermitianOperator,
    PureState,
    VaidmanDecomposition,
    bloch_to_state,
    covariance,
    expectation,
    gibbs_state,
    haar_random_state,
    identity,
    sigma_x,
    sigma_y,
    sigma_z,
    vaidman_decompose,
)
from .weakproto import (
    HighTemperatureInversion,
    TemperatureBound,
    ThermometrySetup,
    WeakValue,
    bound_audit_table,
    invert_beta_exact_qubit,
    invert_beta_high_temperature,
    qubit_beta_identity_residual,
    temperature_lower_bound,
    weak_value,
    weak_value_high_temperature,
    weak_value_qubit_closed_form,
)
from .pointer import (
    CouplingParams,
    JointState,
    PointerGrid,
    PointerMixture,
    PointerWavefunction,
    TemperatureEstimate,
    estimate_temperature_end_to_end,
    evolve_and_postselect,
    first_order_pointer_state,
    gaussian_pointer,
    joint_evolved_state,
    jozsa_readout,
    sample_pointer_measurements,
    trace_distance,
)
from .precision import (
    ImperfectThermalization,
    MonteCarloEstimate,
    MonteCarloRule,
    OptimalWindow,
    PrecisionCurve,
    UnsharpPostSelection,
    UnsharpWeakValues,
    apparent_beta_imperfect,
    build_precision_curve,
    first_order_error_integrand,
    optimal_temperature_postselection,
    optimal_temperature_thermalization,
    perturbed_weak_value_unsharp,
    postselection_window_implied_cosine,
    rms_error_plus,
    rms_error_postselection,
    rms_error_thermalization_closed,
    rms_error_thermalization_numeric,
    strong_scheme_reference,
    unsharp_weak_value_trace_defect_form,
)
from .fisher import (
    PostSelectionAngles,
    QfiResult,
    dAw_dT_analytic,
    qcrb,
    qfi_pure_numeric,
    qfi_report,
    qfi_temperature,
    scaled_precision,
    weak_value_derivative_residual,
)

__version__ = "0.1.0"

"""quarteig: fourth-order operators on the line with an embedded eigenvalue.

Three constructions are provided, each with a numerical realization and an
independent spectral verification path:

* a singular potential made of delta/delta-prime interactions at +-3pi/4
  whose odd eigenfunction sits at lambda = 1 inside [0, infinity),
* even piecewise-constant potentials built by parameter continuation so that
  exp(k0 x) extends to an even, exponentially decaying eigenfunction at
  lambda = k0^4,
* squares of Schrodinger operators, whose bound states square into embedded
  eigenvalues of the fourth-order operator.
"""

from .construct import (
    EigenfunctionSample,
    EmbeddedPotentialSpec,
    PointInteraction,
    SchrodingerSquareSpec,
    SignPatternError,
    SingularExample,
    SpecInconsistencyError,
    build_embedded_potential,
    even_variant,
    fit_decay_rate,
    sech_well,
    singular_example,
    synthesize_eigenfunction,
)
from .kernels import (
    KrylovValues,
    PiecewisePotential,
    SaturationError,
    SensitivityState,
    StateVector4,
    TransferMatrix4,
    krylov_eval,
    propagate,
    propagate_grid,
    stiffness_sensitivity,
    transfer_matrix,
)
from .verify import (
    EigenSolution,
    GridOperator,
    SpectralReport,
    Verdict,
    detect_embedded,
    discretize_quartic,
    discretize_schrodinger,
    discretize_schrodinger_and_square,
    eigensolve_symmetric,
    inverse_participation_ratio,
    shoot_piecewise,
    shoot_singular,
    shoot_singular_details,
)
from .zeros import (
    BracketError,
    ContinuationBracket,
    DegenerateZeroError,
    HorizonError,
    OrderingError,
    RaceVerdict,
    ZeroOrdering,
    ZeroShiftRates,
    first_zero,
    ordered_first_zeros,
    race_brackets,
    race_zeros,
    solve_race_tie,
    zero_race,
    zero_shift_rates,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ContinuationBracket",
    "DegenerateZeroError",
    "EigenSolution",
    "EigenfunctionSample",
    "EmbeddedPotentialSpec",
    "GridOperator",
    "HorizonError",
    "KrylovValues",
    "OrderingError",
    "PiecewisePotential",
    "PointInteraction",
    "RaceVerdict",
    "SaturationError",
    "SchrodingerSquareSpec",
    "SensitivityState",
    "SignPatternError",
    "SingularExample",
    "SpecInconsistencyError",
    "SpectralReport",
    "StateVector4",
    "TransferMatrix4",
    "Verdict",
    "ZeroOrdering",
    "ZeroShiftRates",
    "build_embedded_potential",
    "detect_embedded",
    "discretize_quartic",
    "discretize_schrodinger",
    "discretize_schrodinger_and_square",
    "eigensolve_symmetric",
    "even_variant",
    "first_zero",
    "fit_decay_rate",
    "inverse_participation_ratio",
    "krylov_eval",
    "ordered_first_zeros",
    "propagate",
    "propagate_grid",
    "race_brackets",
    "race_zeros",
    "sech_well",
    "shoot_piecewise",
    "shoot_singular",
    "shoot_singular_details",
    "singular_example",
    "solve_race_tie",
    "stiffness_sensitivity",
    "synthesize_eigenfunction",
    "transfer_matrix",
    "zero_race",
    "zero_shift_rates",
    "__version__",
]

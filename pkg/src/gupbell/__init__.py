"""Two-qubit CHSH laboratory with minimal-length (GUP) corrections."""

from .errors import (
    AmbiguousBranchError, DegeneracyError, DimensionError, GupBellError,
    HermiticityError, NotDichotomicError, NumericError, ValidationError,
)
from .gup import (
    ChshResult, GupModel, GupObservable, PerturbedState, default_hamiltonian,
    default_perturbation, gup_correct_observable, perturb_state, qm_chsh,
    scenario1_chsh, scenario2_chsh, scenario3_chsh,
)
from .lab import (
    BatchEvaluator, Optimum, ScanGrid, ScenarioConfig, SweepCurve, beta_sweep,
    classify, evaluate_point, grid_scan, optimize_angles,
    superclassical_components,
)
from .quantum import (
    ChshSettings, DensityMatrix, Direction, PureState, bell_operator,
    bell_state, canonical_settings, chsh_value, spin_observable,
)
from .security import (
    SecurityReport, build_report, eavesdrop_test, minentropy_bound,
    violation_margin,
)
from .shots import (
    ChshEstimate, CountsTable, ShotPlan, depolarize, estimate_chsh, lhv_max,
    measure_pair,
)
from .tensor import EigenSystem, eig_hermitian, expect, kron

__version__ = "0.1.0"

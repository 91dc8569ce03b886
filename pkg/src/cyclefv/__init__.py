"""Fleming-Viot particle systems on the cycle Z/KZ with uniform killing.

Closed-form stationary covariances, the circulant spectral theory of the
walk, exact small-instance solvers, a compiled simulator and the moment
dynamics with their finite-time bounds.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CycleFVError,
    DomainError,
    EmptySite,
    InsufficientData,
    SolveError,
    StepSizeUnderflow,
    TooLarge,
)
from .model import Configuration, ModelParams, dirac, empirical_measure, move_particle, rotate, uniform  # noqa: E402
from .circulant import (  # noqa: E402
    CirculantMatrix,
    build_Q,
    circ_eigenvalues,
    cloez_lambda,
    exp_action,
    q_spectrum_closed_form,
    spectral_constants,
)
from .conditioned import conditioned_law, l2_sandwich, qsd, tv_sandwich  # noqa: E402
from .chebyshev import PolyFamily, evaluate  # noqa: E402
from .covariance import (  # noqa: E402
    StationaryMomentSet,
    cov_asymptotic,
    sk_closed_form,
    solve_sk_linear,
    stationary_covariances,
    stationary_moments,
)
from .particles import (  # noqa: E402
    enumerate_states,
    full_generator,
    generator_moments,
    reversibility_report,
    stationary_distribution_exact,
)
from .simulation import TrajectoryEnsemble, estimate_moments, simulate, simulate_ensemble  # noqa: E402
from .dynamics import (  # noqa: E402
    bound_constants,
    drift_term,
    empirical_distance_bound,
    g_infinity,
    integrate_g,
    mean_dynamics,
    q2_operator,
    uniform_variance_bound,
    variance_bound,
)

"""Social learning on financial networks: seeded Monte Carlo simulation,
analytic belief machinery, and endogenous network formation."""

__version__ = "0.1.0"

from .signals import (  # noqa: F401
    SignalStructure,
    belief_inverse,
    belief_pdf,
    private_belief,
    sample_signal,
    state_match_prob,
)
from .graph import Graph, er_random, is_pairwise_stable  # noqa: F401
from .formation import (  # noqa: F401
    AgentProfile,
    UtilityModel,
    expected_utility,
    form_network,
    social_belief_distribution,
)
from .learning import (  # noqa: F401
    PopulationState,
    Trajectory,
    convergence_time,
    decide,
    init_actions,
    run,
    social_belief,
    step,
    weight,
)
from .meanfield import FixedPoint, fixed_points, iterate_map, residual  # noqa: F401
from .config import ConfigError, SimulationConfig, parse_config  # noqa: F401
from .harness import RunRecord, compare_ensembles, derive_seed, run_sweep  # noqa: F401

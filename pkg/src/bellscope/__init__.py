"""Numerical toolkit for EPR-Bohm correlations, local hidden-variable models,
bivector-valued generalized models, and the CHSH inequality."""

from bellscope.chsh import (
    ChshReport,
    ChshSettings,
    SearchConfig,
    chsh_statistic,
    maximize_chsh,
    verify_bound,
)
from bellscope.hvm import (
    CorrelationEstimate,
    HiddenVariableModel,
    TrialRecord,
    exact_expectations,
    make_sign_model,
    monte_carlo_expectations,
    simulate_trials,
)
from bellscope.projection import (
    GeneralizedHVM,
    in_domain_set,
    project,
    projected_product_expectation,
    projected_single_expectation,
    reduce_to_hvm,
    weatherall_ghvm,
)
from bellscope.quantum import (
    make_spin_observable,
    qm_joint_distribution,
    qm_product_expectation,
    qm_single_expectation,
    singlet_state,
)
from bellscope.tensor import (
    Bivector3,
    LeviCivita,
    UnitVector3,
    Vector3,
    bivector_inner,
    eps_contract_vector,
    hodge_dual,
    lie_bracket,
    wedge,
)
from bellscope.weatherall import (
    WeatherallModel,
    tensor_product_expectation,
    tensor_single_expectation,
)

__version__ = "0.1.0"

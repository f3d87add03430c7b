"""Ground states of a nonlocal field equation on integer lattice boxes.

The library computes minimizers of the energy

    J(u) = (1/p) ||u||^p - (1/2) sum (R_alpha * F(u)) F(u)

over the constraint manifold {u != 0 : <J'(u), u> = 0}, where the norm
couples a graph p-Laplacian with a positive potential and R_alpha is a
Riesz-type lattice kernel.  Modules: `lattice` (box geometry and difference
operators), `kernel` (singular quadrature and convolution), `model`
(potentials, nonlinearities, admissibility), `energy` (functionals and
gradients), `nehari` (fiber maps and manifold projection), `solver`
(multi-start descent), `verify` (sampling harness and brute-force oracle),
`cli` (command-line front end).
"""

from .lattice import (
    DomainError,
    Field,
    LatticeSpec,
    gradient_form,
    grad_norm,
    ibp_check,
    lp_norm,
    neighbors,
    p_laplacian,
    random_field,
    read_field_csv,
    write_field_csv,
)
from .kernel import (
    KernelTable,
    build_table,
    canonical_representatives,
    convolve,
    dense_operator,
    fractional_degree,
    mu,
    riesz_kernel,
)
from .model import (
    CoercivePotential,
    ConstantPotential,
    HypothesisReport,
    HypothesisVerdict,
    ModelRejectedError,
    ModelSpec,
    ModelViolationError,
    PeriodicPotential,
    SumOfPowers,
    check_hypotheses,
    eval_F,
    eval_f,
    eval_potential,
    exponent_margins,
    potential_floor,
    potential_grid,
    potential_period,
    validate_model,
)
from .energy import (
    EnergyContext,
    energy_J,
    grad_J,
    h_norm,
    h_norm_pow,
    interaction_energy,
    make_context,
    nehari_functional,
    pairing,
    pairing_field,
    pointwise_residual,
)
from .nehari import (
    FiberCoefficients,
    FiberProbe,
    fiber_coefficients,
    fiber_max_golden,
    fiber_phi,
    fiber_probe,
    golden_max,
    m_inverse,
    project_su,
    psi,
    psi_grad_pairing,
)
from .solver import (
    GeometryProbe,
    MountainPassLevel,
    NonconvergenceError,
    SolveReport,
    SolverConfig,
    StartDiagnostics,
    center_normalize,
    minimize_ground_state,
    mountain_pass_geometry_probe,
    mountain_pass_level,
)
from .verify import (
    CheckReport,
    ar_condition_check,
    fiber_growth_check,
    ground_state_oracle,
    hls_sampler,
    nehari_floor_check,
    run_all_checks,
    su_uniqueness_scan,
    write_checks_json,
)
from .cli import ConfigError, RunConfig, main, parse_config, run

__version__ = "0.1.0"

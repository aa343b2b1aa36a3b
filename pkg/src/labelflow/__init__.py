"""Graph-based semi-supervised label propagation.

Two coupled solvers: consensus label dynamics on a weighted point-cloud
graph with double-well regularization and frozen anchor labels, and the
matching anisotropic diffusion-reaction PDE on grid densities, plus
entropic optimal-transport weights for image data, dataset generators,
and a micro/macro consistency harness.
"""

from .core import (
    DoubleWell,
    LabelState,
    PointCloud,
    RunConfig,
    SolverError,
    ValidationError,
    anchor_state,
    double_well,
    eval_double_well,
    init_labels,
    load_state_csv,
    save_state_csv,
)
from .graph import (
    KernelProfile,
    WeightGraph,
    build_weights,
    check_connected,
    gaussian,
    indicator,
    inverse_distance,
    sigma_eta,
)
from .micro import (
    EnergyTrace,
    MicroRunResult,
    MicroSystem,
    classify,
    discrete_energy,
    micro_step,
    run_micro,
)
from .macro import (
    BoundarySpec,
    DensityField,
    Grid,
    MacroField,
    MacroRunResult,
    boundary_from_cloud,
    continuum_energy,
    gamma_diagnostics,
    grid_1d,
    grid_2d,
    kde_density,
    macro_step_1d,
    macro_step_2d,
    nonlocal_energy,
    run_macro,
    sigma_w,
    structure_check,
    weighted_tv,
)
from .transport import (
    ImageMeasure,
    pairwise_w2,
    pixel_cost_matrix,
    sinkhorn_w2,
    wasserstein_weights,
)
from .data import (
    extremes_anchor_map,
    gen_two_gaussians,
    gen_two_moons,
    hull_anchor_map,
    load_digits_csv,
    place_labels,
)
from .compare import CompareReport, compare_micro_macro, interpolate_micro

__version__ = "0.1.0"

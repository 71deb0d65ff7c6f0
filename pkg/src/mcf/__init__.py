"""Additive multidimensional continued fraction algorithms, their
natural extensions, invariant densities and dual-domain experiments."""

from .algorithms import (
    AlgorithmSpec,
    Branch,
    Cone,
    classify,
    get_algorithm,
    inverse_branches,
    registry_names,
    step_linear,
    step_projective,
)
from .brun_highdim import (
    PolytopeSpec,
    brun_density_d,
    density_polytope,
    polytope_volume_oracle,
    polytope_volume_recursive,
)
from .densities import (
    DensityModel,
    HistogramComparison,
    MassResult,
    density,
    density_model,
    dilog,
    dilog_identity_check,
    empirical_density,
    total_mass,
    transfer_residual,
    triangle_area,
    triangle_area_vertices,
)
from .errors import BoundaryError, DomainError, UnsupportedError
from .experiments import (
    OrbitSample,
    RasterGrid,
    SymmetryReport,
    orbit_cloud,
    render_fractal,
    render_panels,
    simplex_embed,
    symmetry_probe,
)
from .linalg import (
    SquareMatrix,
    apply,
    cone_vector,
    normalize_l1,
    scalar_product,
    seeded_rng,
)
from .natext import (
    AuditReport,
    NatExtState,
    SectionPoint,
    absorption_survey,
    absorption_time,
    bijectivity_audit,
    dual_membership,
    from_section,
    in_domain,
    natext_inverse,
    natext_state,
    natext_step,
    natext_step_renormalized,
    to_section,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

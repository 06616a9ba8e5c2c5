//! A constrained integral functional on `W^{1,p}` at desk scale: the matrix
//! constraint set `S_eps = { eps + det > tr^2 }`, integrands with `p`-growth,
//! P1 fields on the unit square and the energy `J(u) = ∫ L(∇u)`.

mod checks;
mod constraint;
mod integrand;
mod matrix;
mod mesh;

pub use checks::{
    check_quasiconvexity_necessary, check_s_epsilon_properties, nonconvexity_witness, scaled_admissibility,
    verify_j_ruusc, verify_radial_equals_j, JRuUscOptions, PropertyCheck, QuasiconvexityReport, SEpsilonOptions,
    SEpsilonReport, CLOSURE_BANNER,
};
pub use constraint::{s_epsilon_contains, ConstraintSet};
pub use integrand::{check_growth_and_lipschitz, GrowthReport, Integrand, IntegrandExpr};
pub use matrix::Matrix2x2;
pub use mesh::{energy_j, sample_constrained_fields, sample_perturbations, Mesh, MeshField};

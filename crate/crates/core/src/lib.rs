//! Numerical tools for radially uniformly upper semicontinuous (ru-usc)
//! functions on `R^n`: the radial modulus, strongly star-shaped regions, lower
//! semicontinuous envelopes, radial extensions, a calculus of ru-usc
//! operations, and a gradient-constrained energy on finite element meshes.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod catalog;
pub mod envelope;
pub mod error;
pub mod ext;
pub mod modulus;
pub mod oracle;
pub mod radial;
pub mod relaxation;
pub mod report;
pub mod sampling;
pub mod starshape;
pub mod tabulated;

pub use algebra::{
    add, add_holder_perturbation, check_holder_perturbation, check_infconv_ruusc, inf_convolution, multiply, scale,
    translate, CertContext, CertifiedFunction, DeltaProfile, HolderParams, HolderReport, InfConvRoute, SumRoute,
};
pub use catalog::FunctionExpr;
pub use envelope::{check_lsc_in_d, lsc_envelope, lsc_envelope_in_d, EnvelopeEstimate, EnvelopeParams};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use modulus::{certify_ru_usc, convex_bound_check, modulus_profile, CertifyOptions, ModulusProfile, RuUscCertificate, Verdict};
pub use oracle::{FunctionOracle, Properties};
pub use radial::{
    check_center_independence, check_inf_equality, radial_extension, verify_envelope_representation,
    verify_limit_exists_on_closure, verify_radial_representation, InfOptions, RadialLimitResult, RadialOptions,
    RepresentationOptions,
};
pub use report::{ReportRow, ReportVerdict, TheoremReport};
pub use sampling::{make_samples, Point, Provenance, SampleSet, TSchedule};
pub use starshape::{check_strong_star_shape, indicator, union_of_convex, Region, Shape, StarShapeReport};
pub use tabulated::TabulatedFunction;

//! One parameter schema and one runner per statement id.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ruusc::algebra::{self, CertContext, CertifiedFunction, HolderParams, InfConvRoute, SumRoute};
use ruusc::modulus::{certify_ru_usc, convex_bound_check, CertifyOptions};
use ruusc::radial::{
    check_center_independence, check_inf_equality, verify_envelope_representation, verify_limit_exists_on_closure,
    verify_radial_representation, InfOptions, RadialOptions, RepresentationOptions,
};
use ruusc::relaxation::{
    check_growth_and_lipschitz, check_quasiconvexity_necessary, check_s_epsilon_properties, energy_j,
    sample_constrained_fields, sample_perturbations, verify_j_ruusc, verify_radial_equals_j, ConstraintSet, Integrand,
    JRuUscOptions, Mesh, SEpsilonOptions,
};
use ruusc::report::{ReportRow, TheoremReport};
use ruusc::sampling::{unit_ball_points, Provenance, SampleSet};
use ruusc::starshape::{check_strong_star_shape, closure_samples};
use ruusc::{ExtReal, FunctionExpr, Region};

use crate::spec::{parse_params, Ctx, Keep, SamplingSpec, ScheduleSpec, SpecError};

/// Every statement id accepted in `statement`.
pub const STATEMENTS: &[&str] = &[
    "convex_bound_check",
    "certify_ru_usc",
    "strong_star_shape",
    "limit_exists",
    "radial_representation",
    "envelope_representation",
    "center_independence",
    "inf_equality",
    "translate",
    "scale",
    "add",
    "multiply",
    "holder_perturbation",
    "inf_convolution",
    "inf_convolution_oracle",
    "s_epsilon_properties",
    "growth_and_lipschitz",
    "quasiconvexity_necessary",
    "j_ruusc",
    "radial_equals_j",
];

fn geometric20() -> ScheduleSpec {
    ScheduleSpec::geometric(20)
}

fn geometric40() -> ScheduleSpec {
    ScheduleSpec::geometric(40)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexBoundParams {
    pub function: FunctionExpr,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default = "geometric20")]
    pub t_schedule: ScheduleSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    pub function: FunctionExpr,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

fn two_hundred() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarShapeParams {
    pub region: Region,
    #[serde(default = "two_hundred")]
    pub boundary: usize,
    #[serde(default = "two_hundred")]
    pub interior: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "geometric20")]
    pub t_schedule: ScheduleSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitParams {
    pub function: FunctionExpr,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub radial: RadialOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationParams {
    pub function: FunctionExpr,
    pub region: Region,
    #[serde(default)]
    pub options: RepresentationOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeRepresentationParams {
    pub function: FunctionExpr,
    /// Candidate lsc envelope of `function`.
    pub envelope: FunctionExpr,
    pub region: Region,
    #[serde(default)]
    pub options: RepresentationOptions,
}

fn small_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterParams {
    pub function: FunctionExpr,
    pub region: Region,
    pub sampling: SamplingSpec,
    pub centers: Vec<Vec<f64>>,
    #[serde(default)]
    pub radial: RadialOptions,
    #[serde(default = "small_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfEqualityParams {
    pub function: FunctionExpr,
    pub region: Region,
    #[serde(default)]
    pub options: InfOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateParams {
    pub function: FunctionExpr,
    pub c: f64,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleParams {
    pub function: FunctionExpr,
    pub lambda: f64,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddParams {
    pub f: FunctionExpr,
    pub g: FunctionExpr,
    #[serde(default)]
    pub route: Option<SumRoute>,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplyParams {
    pub f: FunctionExpr,
    pub g: FunctionExpr,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSumParams {
    pub f: FunctionExpr,
    pub g: FunctionExpr,
    pub holder: HolderParams,
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: usize,
}

impl GridSpec {
    fn build(&self, ctx: &Ctx) -> Result<SampleSet, ruusc::Error> {
        ruusc::make_samples(&Provenance::UniformGrid {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            resolution: (self.resolution.max(2) - 1) * ctx.scale as usize + 1,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfConvParams {
    pub f: FunctionExpr,
    /// Where `f` is certified (relative to the output center).
    pub f_region: Region,
    pub f_sampling: SamplingSpec,
    pub g: FunctionExpr,
    /// Where `g` is certified; its center must be the origin.
    pub g_region: Region,
    pub g_sampling: SamplingSpec,
    pub grid: GridSpec,
    pub route: InfConvRoute,
    /// Where the inf-convolution is certified.
    pub region: Region,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub certify: CertifyOptions,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfConvOracleParams {
    pub f: FunctionExpr,
    pub g: FunctionExpr,
    pub grid: GridSpec,
    /// Closed form compared at the grid nodes.
    pub expected: FunctionExpr,
    /// Defaults to the grid spacing.
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SEpsilonParams {
    pub eps: f64,
    #[serde(default = "ten_thousand")]
    pub closure_samples: usize,
    #[serde(default = "ten_thousand")]
    pub rank_one_segments: usize,
    #[serde(default = "eleven")]
    pub points_per_segment: usize,
    #[serde(default = "twenty")]
    pub k_max: u32,
    #[serde(default = "three")]
    pub spread: f64,
    #[serde(default)]
    pub seed: u64,
}

fn ten_thousand() -> usize {
    10_000
}

fn eleven() -> usize {
    11
}

fn twenty() -> u32 {
    20
}

fn three() -> f64 {
    3.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    pub integrand: Integrand,
    /// Flattened gradient length (1 or 4).
    pub len: usize,
    pub count: usize,
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiconvexityParams {
    pub integrand: Integrand,
    pub mesh: Mesh,
    pub xi_count: usize,
    pub xi_radius: f64,
    pub perturbations: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub count: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JParams {
    pub integrand: Integrand,
    pub constraint: ConstraintSet,
    pub mesh: Mesh,
    pub fields: FieldSpec,
    pub t_schedule: ScheduleSpec,
}

fn eight() -> usize {
    8
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialJParams {
    pub integrand: Integrand,
    pub constraint: ConstraintSet,
    pub mesh: Mesh,
    pub fields: FieldSpec,
    #[serde(default = "geometric40")]
    pub t_schedule: ScheduleSpec,
    #[serde(default = "eight")]
    pub window: usize,
    #[serde(default = "small_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Params {
    ConvexBound(ConvexBoundParams),
    Certify(CertifyParams),
    StarShape(StarShapeParams),
    Limit(LimitParams),
    Representation(RepresentationParams),
    EnvelopeRepresentation(EnvelopeRepresentationParams),
    Center(CenterParams),
    InfEquality(InfEqualityParams),
    Translate(TranslateParams),
    Scale(ScaleParams),
    Add(AddParams),
    Multiply(MultiplyParams),
    Holder(HolderSumParams),
    InfConv(InfConvParams),
    InfConvOracle(InfConvOracleParams),
    SEpsilon(SEpsilonParams),
    Growth(GrowthParams),
    Quasiconvexity(QuasiconvexityParams),
    J(JParams),
    RadialJ(RadialJParams),
}

impl Params {
    pub fn parse(statement: &str, value: Value) -> Result<Params, SpecError> {
        Ok(match statement {
            "convex_bound_check" => Params::ConvexBound(parse_params(value)?),
            "certify_ru_usc" => Params::Certify(parse_params(value)?),
            "strong_star_shape" => Params::StarShape(parse_params(value)?),
            "limit_exists" => Params::Limit(parse_params(value)?),
            "radial_representation" => Params::Representation(parse_params(value)?),
            "envelope_representation" => Params::EnvelopeRepresentation(parse_params(value)?),
            "center_independence" => Params::Center(parse_params(value)?),
            "inf_equality" => Params::InfEquality(parse_params(value)?),
            "translate" => Params::Translate(parse_params(value)?),
            "scale" => Params::Scale(parse_params(value)?),
            "add" => Params::Add(parse_params(value)?),
            "multiply" => Params::Multiply(parse_params(value)?),
            "holder_perturbation" => Params::Holder(parse_params(value)?),
            "inf_convolution" => Params::InfConv(parse_params(value)?),
            "inf_convolution_oracle" => Params::InfConvOracle(parse_params(value)?),
            "s_epsilon_properties" => Params::SEpsilon(parse_params(value)?),
            "growth_and_lipschitz" => Params::Growth(parse_params(value)?),
            "quasiconvexity_necessary" => Params::Quasiconvexity(parse_params(value)?),
            "j_ruusc" => Params::J(parse_params(value)?),
            "radial_equals_j" => Params::RadialJ(parse_params(value)?),
            other => {
                return Err(SpecError(format!(
                    "field `statement`: unknown statement {other:?}, expected one of {}",
                    STATEMENTS.join(", ")
                )))
            }
        })
    }
}

/// What a statement produced.
#[derive(Clone, Debug)]
pub enum Outcome {
    Report { report: TheoremReport, details: Value },
    Refused(String),
    Error(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Report { report, .. } if report.passed() => 0,
            Outcome::Report { .. } => 1,
            Outcome::Refused(_) => 2,
            Outcome::Error(_) => 3,
        }
    }
}

type Run = Result<(TheoremReport, Value), ruusc::Error>;

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn build(expr: &FunctionExpr, region: &Region) -> Result<ruusc::FunctionOracle, ruusc::Error> {
    expr.build(region.dim())
}

fn excess(lhs: ExtReal, bound: f64) -> ExtReal {
    match lhs {
        ExtReal::Finite(v) => ExtReal::Finite((v - bound).max(0.0)),
        ExtReal::PosInf => ExtReal::PosInf,
    }
}

fn row(point: Vec<f64>, kind: &str, lhs: ExtReal, rhs: ExtReal, gap: ExtReal) -> ReportRow {
    ReportRow { point, kind: kind.into(), lhs, rhs, gap }
}

pub fn run(params: &Params, ctx: &Ctx) -> Outcome {
    let result = match params {
        Params::ConvexBound(p) => convex_bound(p, ctx),
        Params::Certify(p) => certify(p, ctx),
        Params::StarShape(p) => star_shape(p, ctx),
        Params::Limit(p) => limit(p, ctx),
        Params::Representation(p) => representation(p, ctx),
        Params::EnvelopeRepresentation(p) => envelope_representation(p, ctx),
        Params::Center(p) => center(p, ctx),
        Params::InfEquality(p) => inf_equality(p, ctx),
        Params::Translate(p) => translate(p, ctx),
        Params::Scale(p) => scale(p, ctx),
        Params::Add(p) => add(p, ctx),
        Params::Multiply(p) => multiply(p, ctx),
        Params::Holder(p) => holder(p, ctx),
        Params::InfConv(p) => inf_conv(p, ctx),
        Params::InfConvOracle(p) => inf_conv_oracle(p, ctx),
        Params::SEpsilon(p) => s_epsilon(p, ctx),
        Params::Growth(p) => growth(p, ctx),
        Params::Quasiconvexity(p) => quasiconvexity(p, ctx),
        Params::J(p) => j_ruusc(p, ctx),
        Params::RadialJ(p) => radial_j(p, ctx),
    };
    match result {
        Ok((report, details)) => Outcome::Report { report, details },
        Err(e) if e.is_refusal() => Outcome::Refused(e.to_string()),
        Err(e) => Outcome::Error(e.to_string()),
    }
}

fn convex_bound(p: &ConvexBoundParams, ctx: &Ctx) -> Run {
    let (function, region, sampling) = (&p.function, &p.region, &p.sampling);
    let f = build(function, region)?;
    let samples = sampling.build(region, ctx, Keep::InRegion)?;
    let ts = p.t_schedule.build()?;
    let r = convex_bound_check(&f, region, &ts, &samples)?;
    let rows = ts
        .values()
        .iter()
        .zip(&r.profile.delta)
        .map(|(&t, &d)| row(vec![t], "t", d, ExtReal::Finite(1.0 - t), excess(d, 1.0 - t)))
        .collect();
    let details = json!({ "a": r.a, "holds": r.holds, "witness": r.witness, "samples": samples.len() });
    Ok((TheoremReport::new("convex_bound_check", 1e-12, rows), details))
}

fn certificate_rows(cert: &ruusc::RuUscCertificate) -> Vec<ReportRow> {
    let eps = cert.eps_cert;
    cert.per_a
        .iter()
        .filter(|(a, _)| !cert.supported() || Some(*a) == cert.a_used)
        .map(|&(a, tail)| row(vec![a], "a", tail, ExtReal::Finite(eps), excess(tail, eps)))
        .collect()
}

fn certify(p: &CertifyParams, ctx: &Ctx) -> Run {
    let (function, region, sampling) = (&p.function, &p.region, &p.sampling);
    let f = build(function, region)?;
    let samples = sampling.build(region, ctx, Keep::InRegion)?;
    let cert = certify_ru_usc(&f, region, &samples, &p.certify)?;
    let report = TheoremReport::new("certify_ru_usc", 0.0, certificate_rows(&cert));
    Ok((report, json!({ "certificate": cert })))
}

fn star_shape(p: &StarShapeParams, ctx: &Ctx) -> Run {
    let samples = closure_samples(&p.region, ctx.count(p.boundary), ctx.count(p.interior), ctx.seed(p.seed))?;
    let r = check_strong_star_shape(&p.region, &p.t_schedule.build()?, &samples)?;
    let rows = r
        .violations
        .iter()
        .map(|(t, u)| row(u.clone(), "violation", ExtReal::Finite(*t), ExtReal::Finite(1.0), ExtReal::Finite(1.0)))
        .collect();
    let details = json!({ "tested_pairs": r.tested_pairs, "violation_count": r.violation_count });
    Ok((TheoremReport::new("strong_star_shape", 0.0, rows), details))
}

fn limit(p: &LimitParams, ctx: &Ctx) -> Run {
    let (function, region, sampling) = (&p.function, &p.region, &p.sampling);
    let f = build(function, region)?;
    let samples = sampling.build(region, ctx, Keep::InClosure)?;
    let report = verify_limit_exists_on_closure(&f, region, &samples, &p.radial)?;
    Ok((report, json!({ "samples": samples.len() })))
}

fn scaled_representation(opts: &RepresentationOptions, ctx: &Ctx) -> RepresentationOptions {
    RepresentationOptions {
        seed: ctx.seed(opts.seed),
        resolution_scale: opts.resolution_scale.max(1) * ctx.scale,
        ..opts.clone()
    }
}

fn representation(p: &RepresentationParams, ctx: &Ctx) -> Run {
    let f = build(&p.function, &p.region)?;
    let report = verify_radial_representation(&f, &p.region, &scaled_representation(&p.options, ctx))?;
    Ok((report, Value::Null))
}

fn envelope_representation(p: &EnvelopeRepresentationParams, ctx: &Ctx) -> Run {
    let f = build(&p.function, &p.region)?;
    let g = build(&p.envelope, &p.region)?;
    let report = verify_envelope_representation(&f, &g, &p.region, &scaled_representation(&p.options, ctx))?;
    Ok((report, Value::Null))
}

fn center(p: &CenterParams, ctx: &Ctx) -> Run {
    let (function, region, sampling) = (&p.function, &p.region, &p.sampling);
    let g = build(function, region)?;
    let samples = sampling.build(region, ctx, Keep::InClosure)?;
    let report = check_center_independence(&g, region, &p.centers, &samples, &p.radial, p.tol)?;
    Ok((report, Value::Null))
}

fn inf_equality(p: &InfEqualityParams, ctx: &Ctx) -> Run {
    let f = build(&p.function, &p.region)?;
    let opts = InfOptions {
        seed: ctx.seed(p.options.seed),
        boundary_count: ctx.count(p.options.boundary_count),
        interior_count: ctx.count(p.options.interior_count),
        ..p.options.clone()
    };
    Ok((check_inf_equality(&f, &p.region, &opts)?, Value::Null))
}

fn cert_ctx(
    region: &Region,
    sampling: &SamplingSpec,
    certify: &CertifyOptions,
    ctx: &Ctx,
) -> Result<CertContext, ruusc::Error> {
    let samples = sampling.build(region, ctx, Keep::InRegion)?;
    Ok(CertContext::new(region.clone(), samples).with_options(certify.clone()))
}

/// Recertifies `result` from its construction tree, independently of the
/// certificate the operation attached.
fn recertified(statement: &str, result: &CertifiedFunction, cctx: &CertContext) -> Run {
    let fresh = certify_ru_usc(&result.rebuild()?, &cctx.region, &cctx.samples, &cctx.options)?;
    let mut report = TheoremReport::new(statement, 0.0, certificate_rows(&fresh));
    for step in result.history() {
        report = report.note(format!("{}: {}", step.operation, step.detail));
    }
    let details = json!({
        "expr": result.expr(),
        "propagated": result.history(),
        "attached_certificate": result.certificate(),
        "fresh_certificate": fresh,
    });
    Ok((report, details))
}

fn certified(expr: &FunctionExpr, cctx: &CertContext) -> Result<CertifiedFunction, ruusc::Error> {
    CertifiedFunction::certify(expr.clone(), cctx.region.dim(), cctx)
}

fn translate(p: &TranslateParams, ctx: &Ctx) -> Run {
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    let out = algebra::translate(&certified(&p.function, &cctx)?, p.c, &cctx)?;
    recertified("translate", &out, &cctx)
}

fn scale(p: &ScaleParams, ctx: &Ctx) -> Run {
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    if !(p.lambda >= 0.0) {
        return Err(ruusc::Error::refused(format!("scale: lambda = {} is negative", p.lambda)));
    }
    let out = algebra::scale(&certified(&p.function, &cctx)?, p.lambda, &cctx)?;
    recertified("scale", &out, &cctx)
}

fn add(p: &AddParams, ctx: &Ctx) -> Run {
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    let out = algebra::add(&certified(&p.f, &cctx)?, &certified(&p.g, &cctx)?, p.route, &cctx)?;
    recertified("add", &out, &cctx)
}

fn multiply(p: &MultiplyParams, ctx: &Ctx) -> Run {
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    let out = algebra::multiply(&certified(&p.f, &cctx)?, &certified(&p.g, &cctx)?, &cctx)?;
    recertified("multiply", &out, &cctx)
}

fn holder(p: &HolderSumParams, ctx: &Ctx) -> Run {
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    let (out, check) = algebra::add_holder_perturbation(&certified(&p.f, &cctx)?, p.g.clone(), &p.holder, &cctx)?;
    let (report, mut details) = recertified("holder_perturbation", &out, &cctx)?;
    details["holder_check"] = to_json(&check);
    Ok((report, details))
}

fn inf_conv(p: &InfConvParams, ctx: &Ctx) -> Run {
    let f = certified(&p.f, &cert_ctx(&p.f_region, &p.f_sampling, &p.certify, ctx)?)?;
    let g = certified(&p.g, &cert_ctx(&p.g_region, &p.g_sampling, &p.certify, ctx)?)?;
    let grid = p.grid.build(ctx)?;
    let cctx = cert_ctx(&p.region, &p.sampling, &p.certify, ctx)?;
    let out = algebra::check_infconv_ruusc(&f, &g, p.route, &grid, &cctx)?;
    recertified("inf_convolution", &out, &cctx)
}

fn inf_conv_oracle(p: &InfConvOracleParams, ctx: &Ctx) -> Run {
    let dim = p.grid.lower.len();
    let (f, g, want) = (p.f.build(dim)?, p.g.build(dim)?, p.expected.build(dim)?);
    let grid = p.grid.build(ctx)?;
    let table = algebra::tabulate_inf_convolution(&f, &g, &grid)?;
    let h = table.axes().iter().map(|a| a[1] - a[0]).fold(0.0, f64::max);
    let rows = table
        .nodes()
        .into_iter()
        .zip(table.values())
        .map(|(x, &v)| {
            let w = want.eval(&x)?;
            Ok(ReportRow::compare(x, "node", v, w))
        })
        .collect::<Result<Vec<_>, ruusc::Error>>()?;
    let report = TheoremReport::new("inf_convolution_oracle", p.tol.unwrap_or(h), rows);
    Ok((report, json!({ "spacing": h, "nodes": grid.len() })))
}

fn s_epsilon(p: &SEpsilonParams, ctx: &Ctx) -> Run {
    let opts = SEpsilonOptions {
        closure_samples: ctx.count(p.closure_samples),
        t_schedule: ruusc::TSchedule::geometric(p.k_max),
        rank_one_segments: ctx.count(p.rank_one_segments),
        points_per_segment: p.points_per_segment,
        spread: p.spread,
        seed: ctx.seed(p.seed),
    };
    let r = check_s_epsilon_properties(p.eps, &opts)?;
    let flag = |ok: bool| ExtReal::Finite(if ok { 0.0 } else { 1.0 });
    let count = |n: usize| ExtReal::Finite(n as f64);
    let [xi, zeta, mid] = r.nonconvex_witness;
    let member = |m: &ruusc::relaxation::Matrix2x2| ruusc::relaxation::s_epsilon_contains(m, p.eps);
    let (xi_in, zeta_in, mid_in) = (member(&xi)?, member(&zeta)?, member(&mid)?);
    let rows = vec![
        row(vec![], "zero_in_set", flag(!r.contains_zero), count(0), flag(r.contains_zero)),
        row(vec![], "xi_in_set", flag(!xi_in), count(0), flag(xi_in)),
        row(vec![], "zeta_in_set", flag(!zeta_in), count(0), flag(zeta_in)),
        row(vec![], "midpoint_not_in_set", flag(!mid_in), count(0), flag(!mid_in)),
        row(vec![], "radial_violations", count(r.radial.violations), count(0), count(r.radial.violations)),
        row(vec![], "unbounded_ray", flag(!r.unbounded), count(0), flag(r.unbounded)),
        row(vec![], "rank_one_violations", count(r.rank_one_convex.violations), count(0), count(r.rank_one_convex.violations)),
    ];
    let report = TheoremReport::new("s_epsilon_properties", 0.0, rows)
        .note(format!("radial pairs checked: {}", r.radial.checked))
        .note(format!("rank-one points checked: {}", r.rank_one_convex.checked));
    Ok((report, to_json(&r)))
}

fn growth(p: &GrowthParams, ctx: &Ctx) -> Run {
    let r = check_growth_and_lipschitz(&p.integrand, p.len, ctx.count(p.count), p.radius, ctx.seed(p.seed))?;
    let l = &p.integrand;
    let f = ExtReal::Finite;
    let rows = vec![
        row(vec![], "c", f(l.c), f(r.c_est), f((l.c - r.c_est).max(0.0))),
        row(vec![], "C", f(r.c_upper_est), f(l.c_upper), f((r.c_upper_est - l.c_upper).max(0.0))),
        row(vec![], "C_lip", f(r.c_lip_est), f(l.c_lip), f((r.c_lip_est - l.c_lip).max(0.0))),
    ];
    let mut report = TheoremReport::new("growth_and_lipschitz", 1e-12, rows);
    if !r.pass {
        report.verdict = ruusc::ReportVerdict::Fail;
    }
    Ok((report, to_json(&r)))
}

fn quasiconvexity(p: &QuasiconvexityParams, ctx: &Ctx) -> Run {
    let len = p.mesh.gradient_len();
    let xis: Vec<Vec<f64>> = unit_ball_points(len, ctx.count(p.xi_count), ctx.seed(p.seed), 0)
        .into_iter()
        .map(|x| x.into_iter().map(|v| v * p.xi_radius).collect())
        .collect();
    let phis = sample_perturbations(p.mesh, ctx.count(p.perturbations), p.amplitude, ctx.seed(p.seed));
    let r = check_quasiconvexity_necessary(&p.integrand, &xis, &phis)?;
    let rows = vec![row(
        vec![],
        "violations",
        ExtReal::Finite(r.violations as f64),
        ExtReal::ZERO,
        ExtReal::Finite(r.violations as f64),
    )];
    let report = TheoremReport::new("quasiconvexity_necessary", 0.0, rows)
        .note(format!("{} over {} pairs; a necessary condition only", r.verdict, r.checked));
    Ok((report, to_json(&r)))
}

fn j_ruusc(p: &JParams, ctx: &Ctx) -> Run {
    let fields = sample_constrained_fields(
        &p.constraint,
        p.mesh,
        ctx.count(p.fields.count),
        p.fields.amplitude,
        ctx.seed(p.fields.seed),
    )?;
    let opts = JRuUscOptions { seed: ctx.seed(0), ..Default::default() };
    let report = verify_j_ruusc(&p.integrand, &p.constraint, &fields, &p.t_schedule.build()?, &opts)?;
    Ok((report, json!({ "fields": fields.len() })))
}

fn radial_j(p: &RadialJParams, ctx: &Ctx) -> Run {
    let fields = sample_constrained_fields(
        &p.constraint,
        p.mesh,
        ctx.count(p.fields.count),
        p.fields.amplitude,
        ctx.seed(p.fields.seed),
    )?;
    let ts = p.t_schedule.build()?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut failed = Vec::new();
    for (k, u) in fields.iter().enumerate() {
        let r = verify_radial_equals_j(u, &p.integrand, &p.constraint, &ts, p.window, p.tol)?;
        if !r.passed() {
            failed.push(k);
        }
        if notes.is_empty() {
            notes = r.notes.clone();
        }
        rows.extend(r.rows.into_iter().map(|mut row| {
            row.point.insert(0, k as f64);
            row
        }));
    }
    let energies: Vec<f64> = fields.iter().map(|u| energy_j(u, &p.integrand)).collect();
    let mut report = TheoremReport::new("radial_equals_j", p.tol, rows);
    report.notes = notes;
    if !failed.is_empty() {
        report.verdict = ruusc::ReportVerdict::Fail;
        report = report.note(format!("fields failing: {failed:?}"));
    }
    Ok((report, json!({ "fields": fields.len(), "energies": energies })))
}

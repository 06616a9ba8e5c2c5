//! Operations that preserve radial upper semicontinuity: translation,
//! nonnegative scaling, sums, products, growth-controlled perturbations and
//! inf-convolution.
//!
//! Each operation checks its hypotheses on samples, records the constant its
//! proof produces, and then recertifies the result numerically. The recorded
//! constant only orders the candidate list; the certificate is always the
//! numerical one.

use serde::{Deserialize, Serialize};

use crate::catalog::FunctionExpr;
use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::modulus::{certify_ru_usc, modulus_profile, CertifyOptions, RuUscCertificate};
use crate::oracle::FunctionOracle;
use crate::sampling::{linspace, norm, segment_point, Point, Provenance, SampleSet};
use crate::starshape::Region;
use crate::tabulated::{min_plus, TabulatedFunction};

/// Boundary points added to the samples when a bound is justified by
/// continuity on a compact closure.
const CLOSURE_PROBES: usize = 64;
/// Relative slack for comparing sampled values against declared bounds.
const BOUND_SLACK: f64 = 1e-9;
/// Absolute slack for the growth inequalities.
const GROWTH_SLACK: f64 = 1e-12;

/// Where certification happens: a region (whose center is `u0`), the sample
/// set inside it and the certification options.
#[derive(Clone, Debug)]
pub struct CertContext {
    pub region: Region,
    pub samples: SampleSet,
    pub options: CertifyOptions,
}

impl CertContext {
    pub fn new(region: Region, samples: SampleSet) -> Self {
        CertContext { region, samples, options: CertifyOptions::default() }
    }

    pub fn with_options(mut self, options: CertifyOptions) -> Self {
        self.options = options;
        self
    }

    pub fn center(&self) -> &[f64] {
        self.region.center()
    }
}

/// One applied operation and the constant its proof gives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub operation: String,
    pub constant: Option<f64>,
    pub detail: String,
}

/// A function together with its construction tree and, when certified, the
/// certificate relative to `center`.
#[derive(Clone, Debug)]
pub struct CertifiedFunction {
    expr: FunctionExpr,
    dim: usize,
    oracle: FunctionOracle,
    certificate: Option<RuUscCertificate>,
    center: Option<Point>,
    history: Vec<Propagation>,
}

impl CertifiedFunction {
    pub fn uncertified(expr: FunctionExpr, dim: usize) -> Result<Self> {
        let oracle = expr.build(dim)?;
        Ok(CertifiedFunction { expr, dim, oracle, certificate: None, center: None, history: Vec::new() })
    }

    /// Builds `expr` and certifies it in `ctx`.
    pub fn certify(expr: FunctionExpr, dim: usize, ctx: &CertContext) -> Result<Self> {
        let mut f = Self::uncertified(expr, dim)?;
        f.recertify(ctx, None)?;
        Ok(f)
    }

    fn recertify(&mut self, ctx: &CertContext, preferred: Option<f64>) -> Result<()> {
        check_dim(self.dim, ctx.region.dim())?;
        let opts = match preferred {
            Some(a) if a.is_finite() && a > 0.0 => ctx.options.clone().preferring(a, &self.oracle, &ctx.region)?,
            _ => ctx.options.clone(),
        };
        self.certificate = Some(certify_ru_usc(&self.oracle, &ctx.region, &ctx.samples, &opts)?);
        self.center = Some(ctx.center().to_vec());
        Ok(())
    }

    fn derived(expr: FunctionExpr, dim: usize, mut history: Vec<Propagation>, step: Propagation) -> Result<Self> {
        let oracle = expr.build(dim)?;
        history.push(step);
        Ok(CertifiedFunction { expr, dim, oracle, certificate: None, center: None, history })
    }

    pub fn expr(&self) -> &FunctionExpr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn oracle(&self) -> &FunctionOracle {
        &self.oracle
    }

    pub fn certificate(&self) -> Option<&RuUscCertificate> {
        self.certificate.as_ref()
    }

    pub fn center(&self) -> Option<&[f64]> {
        self.center.as_deref()
    }

    pub fn history(&self) -> &[Propagation] {
        &self.history
    }

    pub fn supported(&self) -> bool {
        self.certificate.as_ref().is_some_and(RuUscCertificate::supported)
    }

    /// Rebuilds the oracle from the construction tree.
    pub fn rebuild(&self) -> Result<FunctionOracle> {
        self.expr.build(self.dim)
    }

    /// The certified constant, refusing when there is no supporting
    /// certificate relative to `u0`.
    fn require(&self, u0: &[f64], what: &str) -> Result<f64> {
        match (&self.certificate, &self.center) {
            (Some(c), Some(center)) if c.supported() && center.as_slice() == u0 => {
                Ok(c.a_used.expect("supported certificates carry a constant"))
            }
            (Some(_), Some(center)) if center.as_slice() != u0 => Err(Error::refused(format!(
                "{what}: certificate of {} is relative to {center:?}, not {u0:?}",
                self.oracle.name()
            ))),
            _ => Err(Error::refused(format!("{what}: {} has no supporting certificate", self.oracle.name()))),
        }
    }
}

/// `f + c`. The proof gives the constant `a + |c|`.
pub fn translate(f: &CertifiedFunction, c: f64, ctx: &CertContext) -> Result<CertifiedFunction> {
    let a = f.require(ctx.center(), "translate")?;
    if !c.is_finite() {
        return Err(Error::invalid(format!("translation by {c}")));
    }
    if c == 0.0 {
        return Ok(f.clone());
    }
    let a_new = a + c.abs();
    let step = Propagation {
        operation: "translate".into(),
        constant: Some(a_new),
        detail: format!("a = {a}, c = {c}"),
    };
    let mut out = CertifiedFunction::derived(f.expr.clone().shifted(c), f.dim, f.history.clone(), step)?;
    out.recertify(ctx, Some(a_new))?;
    Ok(out)
}

/// `lambda f` for `lambda >= 0`. The proof certifies with constant 1 and
/// scales the bound by `max{lambda a, 1}`.
pub fn scale(f: &CertifiedFunction, lambda: f64, ctx: &CertContext) -> Result<CertifiedFunction> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("scaling factor {lambda} is not a nonnegative real")));
    }
    let a = f.require(ctx.center(), "scale")?;
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let step = Propagation {
        operation: "scale".into(),
        constant: Some(1.0),
        detail: format!("bound factor max(lambda a, 1) = {}", (lambda * a).max(1.0)),
    };
    let mut out = CertifiedFunction::derived(f.expr.clone().scaled(lambda), f.dim, f.history.clone(), step)?;
    out.recertify(ctx, Some(1.0))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumRoute {
    /// Both summands bounded below on `D`.
    BothBoundedBelow,
    /// The second summand bounded on `D`.
    GBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBasis {
    /// A declared bound, consistent with every sample.
    Declared,
    /// Declared continuity, bounded `D`, and finite values on the closure.
    CompactContinuity,
}

/// A bound on `D` together with its justification and the sampled extreme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledBound {
    pub value: f64,
    pub basis: BoundBasis,
    pub sampled: f64,
}

fn sampled_values(f: &FunctionOracle, points: &[Point]) -> Result<Vec<ExtReal>> {
    points.iter().map(|p| f.eval(p)).collect()
}

fn closure_values(f: &FunctionOracle, ctx: &CertContext) -> Result<Option<Vec<f64>>> {
    if !f.properties().continuous || !ctx.region.bounded() {
        return Ok(None);
    }
    let boundary = ctx.region.sample_boundary(CLOSURE_PROBES, ctx.samples.seed().unwrap_or(0))?;
    let vals = sampled_values(f, boundary.points())?
        .into_iter()
        .chain(sampled_values(f, ctx.samples.points())?)
        .map(ExtReal::as_finite)
        .collect();
    Ok(vals)
}

fn within(declared: f64, sampled: f64, below: bool) -> bool {
    let slack = BOUND_SLACK * declared.abs().max(1.0);
    if below {
        sampled >= declared - slack
    } else {
        sampled <= declared + slack
    }
}

/// `inf_D f > -inf`, from a declared bound or from continuity on a compact
/// closure. `None` when neither justification holds.
pub fn lower_bound_on(f: &FunctionOracle, ctx: &CertContext) -> Result<Option<SampledBound>> {
    let vals = sampled_values(f, ctx.samples.points())?;
    let sampled = vals.iter().filter_map(|v| v.as_finite()).fold(f64::INFINITY, f64::min);
    if let Some(m) = f.properties().lower_bound {
        return Ok(within(m, sampled, true).then_some(SampledBound { value: m, basis: BoundBasis::Declared, sampled }));
    }
    Ok(closure_values(f, ctx)?.map(|v| {
        let m = v.into_iter().fold(f64::INFINITY, f64::min);
        SampledBound { value: m.min(sampled), basis: BoundBasis::CompactContinuity, sampled }
    }))
}

/// `sup_D |f| < inf`, justified like [`lower_bound_on`].
pub fn abs_bound_on(f: &FunctionOracle, ctx: &CertContext) -> Result<Option<SampledBound>> {
    let vals = sampled_values(f, ctx.samples.points())?;
    if vals.iter().any(|v| v.is_inf()) {
        return Ok(None);
    }
    let sampled = vals.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    if let Some(m) = f.properties().abs_bound() {
        return Ok(within(m, sampled, false).then_some(SampledBound { value: m, basis: BoundBasis::Declared, sampled }));
    }
    Ok(closure_values(f, ctx)?.map(|v| {
        let m = v.into_iter().map(f64::abs).fold(0.0, f64::max);
        SampledBound { value: m.max(sampled), basis: BoundBasis::CompactContinuity, sampled }
    }))
}

/// `f + g`. With `route = None` the first route whose hypotheses hold is used.
pub fn add(
    f: &CertifiedFunction,
    g: &CertifiedFunction,
    route: Option<SumRoute>,
    ctx: &CertContext,
) -> Result<CertifiedFunction> {
    check_dim(f.dim, g.dim)?;
    let a = f.require(ctx.center(), "add")?;
    let b = g.require(ctx.center(), "add")?;
    let below = match (lower_bound_on(&f.oracle, ctx)?, lower_bound_on(&g.oracle, ctx)?) {
        (Some(x), Some(y)) => Some((x, y)),
        _ => None,
    };
    let bounded = abs_bound_on(&g.oracle, ctx)?;
    let chosen = match route {
        Some(SumRoute::BothBoundedBelow) if below.is_none() => {
            return Err(Error::refused("add: a summand is not bounded below on the region"));
        }
        Some(SumRoute::GBounded) if bounded.is_none() => {
            return Err(Error::refused("add: the second summand is not bounded on the region"));
        }
        Some(r) => r,
        None if below.is_some() => SumRoute::BothBoundedBelow,
        None if bounded.is_some() => SumRoute::GBounded,
        None => {
            return Err(Error::refused(
                "add: neither both summands bounded below nor the second summand bounded on the region",
            ))
        }
    };
    let detail = match chosen {
        SumRoute::BothBoundedBelow => {
            let (x, y) = below.expect("checked above");
            format!(
                "both bounded below ({:?} {}, {:?} {}); a = {a}, b = {b}, delta(eps) = eps * {}",
                x.basis,
                x.value,
                y.basis,
                y.value,
                (a + b).max(1.0)
            )
        }
        SumRoute::GBounded => {
            let m = bounded.expect("checked above");
            format!("g bounded ({:?}, sup |g| = {}); factor {}", m.basis, m.value, (2.0 * m.value).max(1.0))
        }
    };
    let step = Propagation { operation: format!("add/{chosen:?}"), constant: Some(1.0), detail };
    let mut history = f.history.clone();
    history.extend(g.history.iter().cloned());
    let expr = FunctionExpr::sum(vec![f.expr.clone(), g.expr.clone()]);
    let mut out = CertifiedFunction::derived(expr, f.dim, history, step)?;
    out.recertify(ctx, Some(1.0))?;
    Ok(out)
}

/// `f g` for factors with positive sampled infima on `D`.
pub fn multiply(f: &CertifiedFunction, g: &CertifiedFunction, ctx: &CertContext) -> Result<CertifiedFunction> {
    check_dim(f.dim, g.dim)?;
    let a = f.require(ctx.center(), "multiply")?;
    let b = g.require(ctx.center(), "multiply")?;
    let inf_of = |o: &FunctionOracle| -> Result<f64> {
        Ok(sampled_values(o, ctx.samples.points())?.iter().map(|v| v.to_f64()).fold(f64::INFINITY, f64::min))
    };
    let (mf, mg) = (inf_of(&f.oracle)?, inf_of(&g.oracle)?);
    if !(mf > 0.0 && mg > 0.0) {
        return Err(Error::refused(format!(
            "multiply: sampled infima {mf} and {mg} must both be positive"
        )));
    }
    let step = Propagation {
        operation: "multiply".into(),
        constant: None,
        detail: format!(
            "sampled inf f = {mf}, inf g = {mg}; factor 1 + 1/inf f + 1/inf g = {}; delta(eps) = max(eps, eps^2) * {}",
            1.0 + 1.0 / mf + 1.0 / mg,
            (a * b).max(2.0 * a).max(2.0 * b).max(3.0)
        ),
    };
    let mut history = f.history.clone();
    history.extend(g.history.iter().cloned());
    let expr = FunctionExpr::product(vec![f.expr.clone(), g.expr.clone()]);
    let mut out = CertifiedFunction::derived(expr, f.dim, history, step)?;
    out.recertify(ctx, None)?;
    Ok(out)
}

/// `delta(t) = coeff (1 - t)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaProfile {
    pub coeff: f64,
    pub exponent: f64,
}

impl DeltaProfile {
    pub fn zero() -> Self {
        DeltaProfile { coeff: 0.0, exponent: 1.0 }
    }

    pub fn linear(coeff: f64) -> Self {
        DeltaProfile { coeff, exponent: 1.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * (1.0 - t).powf(self.exponent)
        }
    }
}

/// Growth parameters of a perturbation `g`:
///
/// * `|g(t u + (1-t) u0) - g(u)| <= delta(t) (1 + |u|^alpha + |u0|^alpha)`,
/// * `c |u|^beta - c' <= g(u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub c_prime: f64,
    pub delta: DeltaProfile,
}

impl HolderParams {
    /// `c' + c (2 + |u0|^alpha)`.
    pub fn derived_a(&self, u0: &[f64]) -> f64 {
        self.c_prime + self.c * (2.0 + norm(u0).powf(self.alpha))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub params: HolderParams,
    /// Set when `beta >= alpha` or `c > 0` fails; nothing is sampled then.
    pub precondition: Option<String>,
    pub continuity_holds: bool,
    pub growth_holds: bool,
    pub holds: bool,
    /// Largest `lhs - rhs` of the continuity inequality.
    pub continuity_excess: f64,
    /// Largest `c |u|^beta - c' - g(u)`.
    pub growth_excess: f64,
    pub witness: Option<(f64, Point)>,
    /// `c' + c (2 + |u0|^alpha)`.
    pub a: f64,
    /// Whether the sampled modulus at `a` stays below `delta(t) / c`.
    pub modulus_bound_holds: Option<bool>,
    pub checked_pairs: usize,
}

/// Samples both growth inequalities on the context samples and schedule.
pub fn check_holder_perturbation(g: &FunctionOracle, params: &HolderParams, ctx: &CertContext) -> Result<HolderReport> {
    let u0 = ctx.center();
    check_dim(g.dim(), u0.len())?;
    let mut report = HolderReport {
        params: *params,
        precondition: None,
        continuity_holds: false,
        growth_holds: false,
        holds: false,
        continuity_excess: f64::NAN,
        growth_excess: f64::NAN,
        witness: None,
        a: params.derived_a(u0),
        modulus_bound_holds: None,
        checked_pairs: 0,
    };
    if !(params.beta >= params.alpha) {
        report.precondition = Some(format!("beta = {} < alpha = {}", params.beta, params.alpha));
        return Ok(report);
    }
    if !(params.c > 0.0) {
        report.precondition = Some(format!("c = {} is not positive", params.c));
        return Ok(report);
    }
    let u0_term = norm(u0).powf(params.alpha);
    let ts = ctx.options.t_schedule.values();
    let mut cont = f64::NEG_INFINITY;
    let mut growth = f64::NEG_INFINITY;
    let mut witness = None;
    for u in ctx.samples.points() {
        let gu = g.eval(u)?.to_f64();
        let nu = norm(u);
        let e = params.c * nu.powf(params.beta) - params.c_prime - gu;
        if e > growth {
            growth = e;
        }
        for &t in ts {
            let gt = g.eval(&segment_point(t, u, u0))?.to_f64();
            let lhs = (gt - gu).abs();
            let rhs = params.delta.at(t) * (1.0 + nu.powf(params.alpha) + u0_term);
            let excess = if lhs.is_finite() { lhs - rhs } else { f64::INFINITY };
            if excess > cont {
                cont = excess;
                witness = Some((t, u.clone()));
            }
            report.checked_pairs += 1;
        }
    }
    report.continuity_excess = cont;
    report.growth_excess = growth;
    report.continuity_holds = cont <= GROWTH_SLACK;
    report.growth_holds = growth <= GROWTH_SLACK;
    report.holds = report.continuity_holds && report.growth_holds;
    report.witness = if report.continuity_holds { None } else { witness };
    if report.holds {
        let profile = modulus_profile(g, &ctx.region, report.a, &ctx.options.t_schedule, &ctx.samples, false)?;
        let ok = profile.t_schedule.values().iter().zip(&profile.delta).all(|(&t, d)| {
            let bound = params.delta.at(t) / params.c;
            d.as_finite().is_some_and(|d| d <= bound + GROWTH_SLACK * bound.abs().max(1.0))
        });
        report.modulus_bound_holds = Some(ok);
    }
    Ok(report)
}

/// `f + g` for certified `f` bounded below on `D` and `g` satisfying the
/// growth inequalities of `params`.
pub fn add_holder_perturbation(
    f: &CertifiedFunction,
    g: FunctionExpr,
    params: &HolderParams,
    ctx: &CertContext,
) -> Result<(CertifiedFunction, HolderReport)> {
    f.require(ctx.center(), "add_holder_perturbation")?;
    let lower = lower_bound_on(&f.oracle, ctx)?
        .ok_or_else(|| Error::refused("add_holder_perturbation: f is not bounded below on the region"))?;
    let go = g.build(f.dim)?;
    let report = check_holder_perturbation(&go, params, ctx)?;
    if !report.holds {
        return Err(Error::refused(match &report.precondition {
            Some(p) => format!("add_holder_perturbation: {p}"),
            None => format!(
                "add_holder_perturbation: growth inequalities fail (continuity excess {}, growth excess {})",
                report.continuity_excess, report.growth_excess
            ),
        }));
    }
    let step = Propagation {
        operation: "add_holder_perturbation".into(),
        constant: Some(report.a),
        detail: format!("inf f >= {} ({:?}); g constant a = {}", lower.value, lower.basis, report.a),
    };
    let expr = FunctionExpr::sum(vec![f.expr.clone(), g]);
    let mut out = CertifiedFunction::derived(expr, f.dim, f.history.clone(), step)?;
    out.recertify(ctx, None)?;
    Ok((out, report))
}

/// Axes of a uniform grid sample set in one or two dimensions.
pub fn grid_axes(grid: &SampleSet) -> Result<Vec<Vec<f64>>> {
    match grid.provenance() {
        Provenance::UniformGrid { lower, upper, resolution } if (1..=2).contains(&lower.len()) => {
            Ok(lower.iter().zip(upper).map(|(&l, &u)| linspace(l, u, *resolution)).collect())
        }
        Provenance::UniformGrid { lower, .. } => {
            Err(Error::invalid(format!("inf-convolution grids are 1-D or 2-D, got {}-D", lower.len())))
        }
        _ => Err(Error::invalid("inf-convolution needs a uniform grid sample set")),
    }
}

/// The tabulated inf-convolution over the nodes of `grid` (uncertified).
pub fn inf_convolution(f: &CertifiedFunction, g: &CertifiedFunction, grid: &SampleSet) -> Result<CertifiedFunction> {
    check_dim(f.dim, g.dim)?;
    let axes = grid_axes(grid)?;
    check_dim(f.dim, axes.len())?;
    let expr = FunctionExpr::InfConvolution { f: Box::new(f.expr.clone()), g: Box::new(g.expr.clone()), axes };
    let step = Propagation {
        operation: "inf_convolution".into(),
        constant: None,
        detail: format!("{} grid nodes", grid.len()),
    };
    let mut history = f.history.clone();
    history.extend(g.history.iter().cloned());
    CertifiedFunction::derived(expr, f.dim, history, step)
}

/// The grid values themselves, with per-query interpolation flags.
pub fn tabulate_inf_convolution(f: &FunctionOracle, g: &FunctionOracle, grid: &SampleSet) -> Result<TabulatedFunction> {
    min_plus(f, g, grid_axes(grid)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfConvRoute {
    /// `inf f > -inf` and `inf g > -inf` on the whole space.
    BothBoundedBelow,
    /// `sup |g| < inf` on `dom g`.
    GBounded,
}

fn spot_check(o: &FunctionOracle, nodes: &[Point], bound: f64, below: bool) -> Result<bool> {
    for p in nodes {
        if let ExtReal::Finite(v) = o.eval(p)? {
            let v = if below { v } else { v.abs() };
            if !within(bound, v, below) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Certifies the inf-convolution of `f` (certified relative to `u0`, the
/// center of `ctx`) and `g` (certified relative to the origin) after checking
/// the requested route's hypothesis. Bounds on the whole space come from
/// declared properties, spot-checked on the grid nodes.
pub fn check_infconv_ruusc(
    f: &CertifiedFunction,
    g: &CertifiedFunction,
    route: InfConvRoute,
    grid: &SampleSet,
    ctx: &CertContext,
) -> Result<CertifiedFunction> {
    f.require(ctx.center(), "check_infconv_ruusc")?;
    let origin = vec![0.0; g.dim];
    g.require(&origin, "check_infconv_ruusc")?;
    if g.oracle.eval(&origin)?.is_inf() {
        return Err(Error::refused("check_infconv_ruusc: 0 is not in dom g"));
    }
    let nodes = grid.points();
    let detail = match route {
        InfConvRoute::BothBoundedBelow => {
            let (pf, pg) = (f.oracle.properties(), g.oracle.properties());
            match (pf.lower_bound, pg.lower_bound) {
                (Some(mf), Some(mg))
                    if spot_check(&f.oracle, nodes, mf, true)? && spot_check(&g.oracle, nodes, mg, true)? =>
                {
                    format!("inf f >= {mf}, inf g >= {mg}")
                }
                _ => return Err(Error::refused("check_infconv_ruusc: f or g is not bounded below")),
            }
        }
        InfConvRoute::GBounded => match g.oracle.properties().abs_bound() {
            Some(m) if spot_check(&g.oracle, nodes, m, false)? => format!("sup |g| on dom g <= {m}"),
            _ => return Err(Error::refused("check_infconv_ruusc: g is not bounded on its domain")),
        },
    };
    let mut out = inf_convolution(f, g, grid)?;
    out.history.push(Propagation { operation: format!("infconv/{route:?}"), constant: None, detail });
    out.recertify(ctx, None)?;
    Ok(out)
}

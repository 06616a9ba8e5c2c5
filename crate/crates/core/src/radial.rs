//! Radial extensions `hat f_{u0}(u) = liminf_{t -> 1} f(t u + (1 - t) u0)`
//! and the verifiers built on them: existence of the radial limit on the
//! closure, the boundary representation of the restricted envelope, the
//! envelope representation by a radial extension, independence of the
//! center, and equality of infima over `D` and its closure.
//!
//! Each verifier checks its hypotheses first and returns
//! [`Error::Refused`] when one fails, so a `Fail` verdict always means a
//! numerical counterexample candidate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{check_lsc_in_d, lsc_envelope, lsc_envelope_in_d, EnvelopeParams};
use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::modulus::{certify_ru_usc, CertifyOptions};
use crate::oracle::FunctionOracle;
use crate::report::{max_gap, ReportRow, Resolution, TheoremReport};
use crate::sampling::{segment_point, Point, SampleSet, TSchedule};
use crate::starshape::{check_strong_star_shape, closure_samples, Region};

pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_RADIAL_K_MAX: u32 = 40;
pub const DEFAULT_STAR_K_MAX: u32 = 20;
/// A strictly increasing tail whose increments shrink by no more than this
/// factor per step is read as divergence to `+inf`.
pub const DIVERGENCE_RATIO: f64 = 0.9;
/// Exterior test points are `u0 + EXTERIOR_FACTOR (u - u0)` for boundary `u`.
pub const EXTERIOR_FACTOR: f64 = 1.05;
/// Step halvings of the infimum search (from the sample spacing down to
/// roughly `spacing * 2^-60`).
const INF_SEARCH_ROUNDS: usize = 60;
const INF_SEARCH_MOVES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialOptions {
    pub t_schedule: TSchedule,
    pub window: usize,
    /// Oscillation tolerance for `limit_exists`.
    pub tol: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { t_schedule: TSchedule::geometric(DEFAULT_RADIAL_K_MAX), window: DEFAULT_WINDOW, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialLimitResult {
    pub u: Point,
    pub u0: Point,
    pub t_schedule: TSchedule,
    /// `f(t u + (1 - t) u0)` for every scheduled `t`.
    pub values: Vec<ExtReal>,
    pub window: usize,
    pub liminf: ExtReal,
    pub limsup: ExtReal,
    pub oscillation: ExtReal,
    pub limit_exists: bool,
    /// The tail was classified as divergent to `+inf`.
    pub diverges: bool,
}

impl RadialLimitResult {
    /// The radial extension value `hat f_{u0}(u)`.
    pub fn value(&self) -> ExtReal {
        self.liminf
    }
}

/// Tail statistics of a sequence of values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSummary {
    pub liminf: ExtReal,
    pub limsup: ExtReal,
    pub oscillation: ExtReal,
    pub limit_exists: bool,
    pub diverges: bool,
}

pub fn summarize_tail(tail: &[ExtReal], tol: f64) -> TailSummary {
    if tail.iter().all(|v| v.is_inf()) {
        return TailSummary {
            liminf: ExtReal::PosInf,
            limsup: ExtReal::PosInf,
            oscillation: ExtReal::ZERO,
            limit_exists: true,
            diverges: true,
        };
    }
    let finite: Vec<f64> = tail.iter().filter_map(|v| v.as_finite()).collect();
    if finite.len() < tail.len() {
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        return TailSummary {
            liminf: ExtReal::Finite(lo),
            limsup: ExtReal::PosInf,
            oscillation: ExtReal::PosInf,
            limit_exists: false,
            diverges: false,
        };
    }
    if diverging(&finite) {
        return TailSummary {
            liminf: ExtReal::PosInf,
            limsup: ExtReal::PosInf,
            oscillation: ExtReal::ZERO,
            limit_exists: true,
            diverges: true,
        };
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let osc = hi - lo;
    TailSummary {
        liminf: ExtReal::Finite(lo),
        limsup: ExtReal::Finite(hi),
        oscillation: ExtReal::Finite(osc),
        limit_exists: osc <= tol,
        diverges: false,
    }
}

fn diverging(x: &[f64]) -> bool {
    if x.len() < 3 {
        return false;
    }
    let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    d.iter().all(|&v| v > 0.0) && d.windows(2).all(|w| w[1] >= DIVERGENCE_RATIO * w[0])
}

/// Aitken's delta-squared extrapolation from the last three terms.
pub fn aitken(x: &[f64]) -> Option<f64> {
    let [a, b, c] = x.get(x.len().checked_sub(3)?..)? else { return None };
    let denom = (c - b) - (b - a);
    if denom == 0.0 {
        return Some(*c);
    }
    let v = c - (c - b) * (c - b) / denom;
    v.is_finite().then_some(v)
}

/// Values of `f` along the segment from `u0` to `u` and their tail summary.
pub fn radial_extension(f: &FunctionOracle, u0: &[f64], u: &[f64], opts: &RadialOptions) -> Result<RadialLimitResult> {
    check_dim(f.dim(), u0.len())?;
    check_dim(f.dim(), u.len())?;
    if !f.eval(u0)?.is_finite() {
        return Err(Error::OutsideDomain { point: u0.to_vec(), context: "radial center not in dom f".into() });
    }
    let values: Vec<ExtReal> = opts
        .t_schedule
        .values()
        .iter()
        .map(|&t| f.eval(&segment_point(t, u, u0)))
        .collect::<Result<_>>()?;
    let window = opts.window.max(1);
    let tail = &values[opts.t_schedule.tail_start(window)..];
    let s = summarize_tail(tail, opts.tol);
    Ok(RadialLimitResult {
        u: u.to_vec(),
        u0: u0.to_vec(),
        t_schedule: opts.t_schedule.clone(),
        values,
        window,
        liminf: s.liminf,
        limsup: s.limsup,
        oscillation: s.oscillation,
        limit_exists: s.limit_exists,
        diverges: s.diverges,
    })
}

/// Existence of `lim_{t -> 1} f(t u + (1 - t) u0)` at every sample of the
/// closure. Rows hold `(liminf, limsup, oscillation)`.
///
/// No hypotheses are enforced here, so that functions without the ru-usc
/// property can demonstrate that the conclusion then fails.
pub fn verify_limit_exists_on_closure(
    f: &FunctionOracle,
    region: &Region,
    samples: &SampleSet,
    opts: &RadialOptions,
) -> Result<TheoremReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples("closure samples".into()));
    }
    let u0 = region.center();
    let rows: Vec<ReportRow> = samples
        .points()
        .par_iter()
        .map(|u| {
            if !region.contains_closure(u) {
                return Err(Error::OutsideDomain { point: u.clone(), context: "sample not in the closure".into() });
            }
            let r = radial_extension(f, u0, u, opts)?;
            let kind = if region.contains(u) { "closure" } else { "boundary" };
            Ok(ReportRow { point: u.clone(), kind: kind.into(), lhs: r.liminf, rhs: r.limsup, gap: r.oscillation })
        })
        .collect::<Result<_>>()?;
    let diverging = rows.iter().filter(|r| r.lhs.is_inf() && r.rhs.is_inf()).count();
    Ok(TheoremReport::new("limit_exists", opts.tol, rows)
        .note(format!("t-schedule of {} values, tail window {}", opts.t_schedule.len(), opts.window))
        .note(format!("{diverging} points with radial limit +inf")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationOptions {
    pub boundary_count: usize,
    pub interior_count: usize,
    pub seed: u64,
    pub envelope: EnvelopeParams,
    pub radial: RadialOptions,
    /// Gap tolerance for the representation itself.
    pub tol: f64,
    /// Tolerance of the lower semicontinuity precondition.
    pub lsc_tol: f64,
    pub certify: CertifyOptions,
    pub star_k_max: u32,
    /// Base resolution scale; the verifier also runs at twice this scale.
    pub resolution_scale: u32,
    /// Also test `+inf` agreement at points pushed outward from the boundary.
    pub exterior: bool,
}

impl Default for RepresentationOptions {
    fn default() -> Self {
        RepresentationOptions {
            boundary_count: 50,
            interior_count: 64,
            seed: 0,
            envelope: EnvelopeParams::default(),
            radial: RadialOptions::default(),
            tol: 1e-3,
            lsc_tol: 1e-3,
            certify: CertifyOptions::default(),
            star_k_max: DEFAULT_STAR_K_MAX,
            resolution_scale: 1,
            exterior: true,
        }
    }
}

/// The hypotheses shared by the boundary verifiers: strong star shape of
/// `D`, lower semicontinuity of `f` in `D`, and an ru-usc certificate.
/// Returns notes describing what was checked.
fn representation_preconditions(
    f: &FunctionOracle,
    region: &Region,
    opts: &RepresentationOptions,
) -> Result<Vec<String>> {
    let closure = closure_samples(region, opts.boundary_count, opts.interior_count, opts.seed)?;
    let star = check_strong_star_shape(region, &TSchedule::geometric(opts.star_k_max), &closure)?;
    if !star.pass {
        return Err(Error::refused(format!(
            "region is not strongly star-shaped relative to {:?}: {} violations, first {:?}",
            region.center(),
            star.violation_count,
            star.violations.first()
        )));
    }
    let interior = region.sample_interiorish(opts.interior_count, opts.seed)?;
    let lsc = check_lsc_in_d(f, region, &interior, opts.lsc_tol, &opts.envelope)?;
    if !lsc.pass {
        return Err(Error::refused(format!(
            "f is not lower semicontinuous in D: gap {} at {:?}",
            lsc.max_gap, lsc.witness
        )));
    }
    let cert = certify_ru_usc(f, region, &interior, &opts.certify)?;
    if !cert.supported() {
        return Err(Error::refused(format!(
            "no ru-usc certificate ({:?}, tail limsup {} over a in {:?})",
            cert.verdict,
            cert.limsup_estimate,
            cert.per_a.iter().map(|p| p.0).collect::<Vec<_>>()
        )));
    }
    Ok(vec![
        format!("star shape: {} pairs, no violation found", star.tested_pairs),
        format!("lsc in D: max gap {} over {} points", lsc.max_gap, lsc.checked),
        format!("ru-usc: supported with a = {}, tail limsup {}", cert.a_used.unwrap_or(f64::NAN), cert.limsup_estimate),
    ])
}

fn exterior_point(u0: &[f64], u: &[f64]) -> Point {
    u0.iter().zip(u).map(|(c, x)| c + EXTERIOR_FACTOR * (x - c)).collect()
}

/// Test points: boundary samples, then (optionally) their outward pushes.
fn boundary_and_exterior(region: &Region, opts: &RepresentationOptions) -> Result<Vec<(Point, &'static str)>> {
    let boundary = region.sample_boundary(opts.boundary_count, opts.seed)?;
    let mut pts: Vec<(Point, &'static str)> = boundary.points().iter().map(|u| (u.clone(), "boundary")).collect();
    if opts.exterior {
        for u in boundary.points() {
            let w = exterior_point(region.center(), u);
            let kind = if region.contains_closure(&w) { "closure" } else { "exterior" };
            pts.push((w, kind));
        }
    }
    Ok(pts)
}

/// `hat f_{u0} + chi_{closure D}` at `u`.
fn radial_plus_closure_indicator(
    f: &FunctionOracle,
    region: &Region,
    u: &[f64],
    opts: &RadialOptions,
) -> Result<ExtReal> {
    if region.contains_closure(u) {
        Ok(radial_extension(f, region.center(), u, opts)?.value())
    } else {
        Ok(ExtReal::PosInf)
    }
}

/// Boundary representation: the envelope of `f + chi_D` equals
/// `hat f_{u0} + chi_{closure D}` at boundary samples (and at exterior
/// points, where both sides are `+inf`). Runs at the base resolution scale
/// and at twice that scale; the verdict uses the finer one.
pub fn verify_radial_representation(
    f: &FunctionOracle,
    region: &Region,
    opts: &RepresentationOptions,
) -> Result<TheoremReport> {
    check_dim(f.dim(), region.dim())?;
    let notes = representation_preconditions(f, region, opts)?;
    let pts = boundary_and_exterior(region, opts)?;
    let rhs: Vec<ExtReal> = pts
        .par_iter()
        .map(|(u, _)| radial_plus_closure_indicator(f, region, u, &opts.radial))
        .collect::<Result<_>>()?;
    let base = opts.resolution_scale.max(1);
    let mut resolutions = Vec::new();
    let mut rows = Vec::new();
    let mut inconclusive = 0;
    for scale in [base, 2 * base] {
        let params = opts.envelope.scaled(scale);
        let est: Vec<(ExtReal, bool)> = pts
            .par_iter()
            .map(|(u, _)| lsc_envelope_in_d(f, region, u, &params).map(|e| (e.estimate, e.inconclusive)))
            .collect::<Result<_>>()?;
        inconclusive = est.iter().filter(|e| e.1).count();
        rows = pts
            .iter()
            .zip(&est)
            .zip(&rhs)
            .map(|(((u, kind), (lhs, _)), rhs)| ReportRow::compare(u.clone(), *kind, *lhs, *rhs))
            .collect();
        resolutions.push(Resolution { scale, max_gap: max_gap(&rows) });
    }
    let mut report = TheoremReport::new("radial_representation", opts.tol, rows).with_resolutions(resolutions);
    for n in notes {
        report = report.note(n);
    }
    if inconclusive > 0 {
        report = report.note(format!("{inconclusive} points had no D-sample in the smallest ball"));
    }
    Ok(report)
}

/// Envelope representation: `lsc f = hat g_{u0} + chi_{dom lsc f}` where
/// `g` agrees with `lsc f` on `dom f`. `region` describes `dom f` and
/// carries `u0`; the closure of `region` stands in for `dom lsc f`.
pub fn verify_envelope_representation(
    f: &FunctionOracle,
    g: &FunctionOracle,
    region: &Region,
    opts: &RepresentationOptions,
) -> Result<TheoremReport> {
    check_dim(f.dim(), region.dim())?;
    check_dim(g.dim(), region.dim())?;
    let interior = region.sample_interiorish(opts.interior_count, opts.seed)?;
    let boundary_pts = boundary_and_exterior(region, opts)?;
    // The region must describe dom f.
    for u in interior.points() {
        if !f.eval(u)?.is_finite() {
            return Err(Error::refused(format!("f is +inf at {u:?}, inside the declared domain")));
        }
    }
    for (u, kind) in &boundary_pts {
        if *kind == "exterior" && f.eval(u)?.is_finite() {
            return Err(Error::refused(format!("f is finite at {u:?}, outside the declared domain")));
        }
    }
    let closure = closure_samples(region, opts.boundary_count, opts.interior_count, opts.seed)?;
    let star = check_strong_star_shape(region, &TSchedule::geometric(opts.star_k_max), &closure)?;
    if !star.pass {
        return Err(Error::refused("dom f is not strongly star-shaped relative to u0"));
    }
    let mut agree_gap = ExtReal::ZERO;
    for u in interior.points() {
        let e = lsc_envelope(f, u, &opts.envelope)?.estimate;
        agree_gap = agree_gap.max(e.gap(g.eval(u)?));
    }
    if !(agree_gap <= opts.lsc_tol) {
        return Err(Error::refused(format!("g differs from the envelope of f on dom f by {agree_gap}")));
    }
    let cert = certify_ru_usc(g, region, &interior, &opts.certify)?;
    if !cert.supported() {
        return Err(Error::refused(format!("no ru-usc certificate for the envelope ({:?})", cert.verdict)));
    }
    let mut pts: Vec<(Point, &'static str)> = interior.points().iter().map(|u| (u.clone(), "interior")).collect();
    pts.extend(boundary_pts);
    let rhs: Vec<ExtReal> = pts
        .par_iter()
        .map(|(u, _)| radial_plus_closure_indicator(g, region, u, &opts.radial))
        .collect::<Result<_>>()?;
    let base = opts.resolution_scale.max(1);
    let mut resolutions = Vec::new();
    let mut rows = Vec::new();
    for scale in [base, 2 * base] {
        let params = opts.envelope.scaled(scale);
        let lhs: Vec<ExtReal> = pts
            .par_iter()
            .map(|(u, _)| lsc_envelope(f, u, &params).map(|e| e.estimate))
            .collect::<Result<_>>()?;
        rows = pts
            .iter()
            .zip(lhs.iter().zip(&rhs))
            .map(|((u, kind), (l, r))| ReportRow::compare(u.clone(), *kind, *l, *r))
            .collect();
        resolutions.push(Resolution { scale, max_gap: max_gap(&rows) });
    }
    Ok(TheoremReport::new("envelope_representation", opts.tol, rows)
        .with_resolutions(resolutions)
        .note(format!("g agrees with the envelope of f on dom f within {agree_gap}"))
        .note(format!("ru-usc of the envelope: supported with a = {}", cert.a_used.unwrap_or(f64::NAN))))
}

/// `hat g_{u0}(u) = hat g_v(u)` for each alternative center `v`.
pub fn check_center_independence(
    g: &FunctionOracle,
    region: &Region,
    centers: &[Point],
    samples: &SampleSet,
    opts: &RadialOptions,
    tol: f64,
) -> Result<TheoremReport> {
    let u0 = region.center();
    let mut rows = Vec::new();
    for v in centers {
        if !region.contains_interior(v) {
            return Err(Error::refused(format!("alternative center {v:?} is not interior")));
        }
        let block: Vec<ReportRow> = samples
            .points()
            .par_iter()
            .map(|u| {
                let a = radial_extension(g, u0, u, opts)?.value();
                let b = radial_extension(g, v, u, opts)?.value();
                Ok(ReportRow::compare(u.clone(), "center", a, b))
            })
            .collect::<Result<_>>()?;
        rows.extend(block);
    }
    Ok(TheoremReport::new("center_independence", tol, rows).note(format!("{} alternative centers", centers.len())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfOptions {
    pub boundary_count: usize,
    pub interior_count: usize,
    pub seed: u64,
    pub tol: f64,
    pub lsc_tol: f64,
    pub envelope: EnvelopeParams,
    pub certify: CertifyOptions,
}

impl Default for InfOptions {
    fn default() -> Self {
        InfOptions {
            boundary_count: 200,
            interior_count: 1000,
            seed: 0,
            tol: 1e-6,
            lsc_tol: 1e-3,
            envelope: EnvelopeParams::default(),
            certify: CertifyOptions::default(),
        }
    }
}

/// Sampled minimum over the admissible candidates, improved by a pattern
/// search that stays admissible: repeated moves along each coordinate while
/// they improve, with the step halved each round.
fn sampled_inf(
    f: &FunctionOracle,
    candidates: &SampleSet,
    admissible: impl Fn(&[f64]) -> bool,
) -> Result<(ExtReal, Option<Point>)> {
    let mut best = ExtReal::PosInf;
    let mut arg: Option<Point> = None;
    for u in candidates.points().iter().filter(|u| admissible(u)) {
        let v = f.eval(u)?;
        if arg.is_none() || v < best {
            best = v;
            arg = Some(u.clone());
        }
    }
    let Some(mut x) = arg else { return Ok((best, None)) };
    let mut h = candidates.spacing();
    for _ in 0..INF_SEARCH_ROUNDS {
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                for _ in 0..INF_SEARCH_MOVES {
                    let mut c = x.clone();
                    c[i] += sign * h;
                    if !admissible(&c) {
                        break;
                    }
                    let v = f.eval(&c)?;
                    if !(v < best) {
                        break;
                    }
                    best = v;
                    x = c;
                }
            }
        }
        h *= 0.5;
    }
    Ok((best, Some(x)))
}

/// `inf_D f = inf_{closure D} f`, both sides estimated from the same
/// closure samples.
pub fn check_inf_equality(f: &FunctionOracle, region: &Region, opts: &InfOptions) -> Result<TheoremReport> {
    check_dim(f.dim(), region.dim())?;
    let samples = closure_samples(region, opts.boundary_count, opts.interior_count, opts.seed)?;
    if let Some(u) = samples.points().iter().find(|u| !matches!(f.eval(u), Ok(ExtReal::Finite(_)))) {
        return Err(Error::refused(format!("closure of D is not inside dom f: f({u:?}) is not finite")));
    }
    let closed = region.closure();
    let cert = certify_ru_usc(f, &closed, &samples, &opts.certify)?;
    if !cert.supported() {
        return Err(Error::refused(format!("no ru-usc certificate on the closure ({:?})", cert.verdict)));
    }
    let interior = region.sample_interiorish(opts.interior_count.min(200), opts.seed)?;
    let lsc = check_lsc_in_d(f, region, &interior, opts.lsc_tol, &opts.envelope)?;
    if !lsc.pass {
        return Err(Error::refused(format!("f is not lower semicontinuous in D (gap {})", lsc.max_gap)));
    }
    let (inf_d, arg_d) = sampled_inf(f, &samples, |u| region.contains(u))?;
    let (inf_cl, arg_cl) = sampled_inf(f, &samples, |u| closed.contains(u))?;
    let row = ReportRow::compare(arg_d.clone().unwrap_or_default(), "inf", inf_d, inf_cl);
    Ok(TheoremReport::new("inf_equality", opts.tol, vec![row])
        .note(format!("inf over D attained at {arg_d:?}"))
        .note(format!("inf over closure attained at {arg_cl:?}"))
        .note(format!("{} candidate points", samples.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::FunctionExpr;
    use crate::starshape::{indicator, union_of_convex, Shape};

    fn union_region(open: bool) -> Region {
        let d1 = Region::centered(Shape::Box { lower: vec![-1.0, -1.0], upper: vec![1.0, 0.5], open }).unwrap();
        let d2 = Region::centered(Shape::Box { lower: vec![-0.5, -1.0], upper: vec![0.5, 1.0], open }).unwrap();
        union_of_convex(&d1, &d2, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn squared_norm_along_axis() {
        let f = FunctionExpr::norm_power(2.0).build(2).unwrap();
        let r = radial_extension(&f, &[0.0, 0.0], &[1.0, 0.0], &RadialOptions::default()).unwrap();
        assert!(r.limit_exists);
        assert!((r.liminf.to_f64() - 1.0).abs() < 1e-9 && (r.limsup.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn indicator_of_half_open_square_at_corner() {
        let d = Region::new(Shape::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0], open: false }, vec![0.0, 0.0])
            .unwrap();
        // [0,1[^2 as the polytope x >= 0, y >= 0, x < 1, y < 1 is awkward; the
        // segment from the origin to (1,1) stays in [0,1[^2 for t < 1 anyway.
        let half_open = FunctionExpr::indicator(d).build(2).unwrap();
        let r = radial_extension(&half_open, &[0.0, 0.0], &[1.0, 1.0], &RadialOptions::default()).unwrap();
        assert_eq!(r.value(), ExtReal::ZERO);
        assert!(r.limit_exists);
    }

    #[test]
    fn barrier_diverges_at_the_sphere() {
        let f = FunctionExpr::Barrier.build(2).unwrap();
        let r = radial_extension(&f, &[0.0, 0.0], &[0.6, 0.8], &RadialOptions::default()).unwrap();
        assert!(r.diverges && r.limit_exists);
        assert_eq!(r.value(), ExtReal::PosInf);
    }

    #[test]
    fn tail_rules() {
        let inf = ExtReal::PosInf;
        let s = summarize_tail(&[inf, inf, inf], 1e-6);
        assert!(s.limit_exists && s.liminf == inf);
        let s = summarize_tail(&[ExtReal::Finite(1.0), inf], 1e-6);
        assert!(!s.limit_exists && s.limsup == inf);
        let geometric: Vec<ExtReal> = (0..8).map(|k| ExtReal::Finite(1.0 - 0.5f64.powi(k))).collect();
        let s = summarize_tail(&geometric, 1.0);
        assert!(!s.diverges && s.limit_exists);
    }

    #[test]
    fn aitken_recovers_geometric_limit() {
        let x: Vec<f64> = (0..6).map(|k| 3.0 + 0.5f64.powi(k)).collect();
        assert!((aitken(&x).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(aitken(&[1.0, 2.0]), None);
    }

    #[test]
    fn oscillating_profile_has_no_limit() {
        let d = Region::ball(vec![0.0, 0.0], 1.0, true).unwrap();
        let f = FunctionExpr::SinRadial.build(2).unwrap();
        let s = d.sample_boundary(8, 1).unwrap();
        let report = verify_limit_exists_on_closure(&f, &d, &s, &RadialOptions::default()).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn continuous_function_limits_exist_on_union() {
        let d = union_region(true);
        let f = FunctionExpr::NonconvexTest.build(2).unwrap();
        let s = closure_samples(&d, 30, 30, 4).unwrap();
        let report = verify_limit_exists_on_closure(&f, &d, &s, &RadialOptions::default()).unwrap();
        assert!(report.passed(), "{}", report.max_gap);
    }

    #[test]
    fn representation_for_indicator_and_convex_quadratic() {
        let d = union_region(true);
        let opts = RepresentationOptions { boundary_count: 12, interior_count: 24, ..Default::default() };
        let r = verify_radial_representation(&indicator(&d), &d, &opts).unwrap();
        assert!(r.passed(), "{:?}", r.max_gap);
        assert!(r.rows.iter().any(|row| row.kind == "exterior" && row.lhs.is_inf() && row.rhs.is_inf()));
        let b = Region::closed_box(vec![-1.0, -2.0], vec![2.0, 1.0]).unwrap();
        let q = FunctionExpr::Quadratic { matrix: vec![vec![2.0, 0.5], vec![0.5, 1.0]], linear: None, constant: 1.0 }
            .build(2)
            .unwrap();
        let r = verify_radial_representation(&q, &b, &opts).unwrap();
        assert!(r.passed(), "{:?}", r.max_gap);
    }

    #[test]
    fn representation_refuses_without_lower_semicontinuity() {
        let d = Region::closed_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let f = FunctionExpr::Spike { at: vec![0.0, 0.0], value: 1.0, base: 0.0 }.build(2).unwrap();
        let opts = RepresentationOptions { boundary_count: 8, interior_count: 200, ..Default::default() };
        assert!(verify_radial_representation(&f, &d, &opts).unwrap_err().is_refusal());
    }

    #[test]
    fn representation_refuses_on_sphere() {
        let d = Region::new(Shape::Shell { center: vec![0.0, 0.0], inner: 1.0, outer: 1.0 }, vec![1.0, 0.0]).unwrap();
        let f = FunctionExpr::norm_power(2.0).build(2).unwrap();
        let opts = RepresentationOptions { boundary_count: 8, interior_count: 8, ..Default::default() };
        assert!(verify_radial_representation(&f, &d, &opts).unwrap_err().is_refusal());
    }

    #[test]
    fn envelope_representation_open_interval() {
        let d = Region::new(Shape::Box { lower: vec![0.0], upper: vec![1.0], open: true }, vec![0.5]).unwrap();
        let f = indicator(&d);
        let g = FunctionExpr::constant(0.0).build(1).unwrap();
        let opts = RepresentationOptions { boundary_count: 2, interior_count: 16, ..Default::default() };
        let r = verify_envelope_representation(&f, &g, &d, &opts).unwrap();
        assert!(r.passed(), "{:?}", r.rows);
        assert!(r.rows.iter().any(|row| row.kind == "exterior"));
    }

    #[test]
    fn center_independence_for_convex_function() {
        let d = Region::ball(vec![0.0, 0.0], 1.0, false).unwrap();
        let f = FunctionExpr::norm_power(2.0).build(2).unwrap();
        let s = d.sample_boundary(10, 2).unwrap();
        let r = check_center_independence(&f, &d, &[vec![0.3, -0.2], vec![-0.5, 0.1]], &s, &RadialOptions::default(), 1e-9)
            .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn inf_equality_for_identity_on_half_open_interval() {
        let d = Region::new(Shape::Box { lower: vec![0.0], upper: vec![1.0], open: true }, vec![0.5]).unwrap();
        let f = FunctionExpr::Affine { weights: vec![1.0], offset: 0.0 }.build(1).unwrap();
        let opts = InfOptions { boundary_count: 2, interior_count: 200, ..Default::default() };
        let r = check_inf_equality(&f, &d, &opts).unwrap();
        assert!(r.passed(), "{:?}", r.rows);
        assert_eq!(r.rows[0].rhs, ExtReal::ZERO);
    }
}

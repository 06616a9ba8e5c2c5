use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constraint::{s_epsilon_margin, ConstraintSet};
use super::integrand::{check_growth_and_lipschitz, Integrand};
use super::matrix::Matrix2x2;
use super::mesh::{energy_j, MeshField};
use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::report::{ReportRow, TheoremReport};
use crate::sampling::{linspace, norm, TSchedule};

/// Stated on every relaxation report.
pub const CLOSURE_BANNER: &str =
    "cellwise membership in the closure of S stands in for the sequential weak closure of the admissible set";

const J_TOL: f64 = 1e-9;
const QC_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub pass: bool,
    pub checked: usize,
    pub violations: usize,
    pub witness: Option<Vec<f64>>,
}

impl PropertyCheck {
    fn tally(results: impl Iterator<Item = (bool, Vec<f64>)>) -> Self {
        let mut out = PropertyCheck { pass: true, checked: 0, violations: 0, witness: None };
        for (ok, x) in results {
            out.checked += 1;
            if !ok {
                out.violations += 1;
                out.pass = false;
                out.witness.get_or_insert(x);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SEpsilonOptions {
    /// Closure matrices tested under scaling (half interior, half on the
    /// boundary `eps + det = tr^2`).
    pub closure_samples: usize,
    pub t_schedule: TSchedule,
    pub rank_one_segments: usize,
    pub points_per_segment: usize,
    /// Entries are drawn from `[-spread sqrt(eps), spread sqrt(eps)]`.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SEpsilonOptions {
    fn default() -> Self {
        SEpsilonOptions {
            closure_samples: 10_000,
            t_schedule: TSchedule::geometric(30),
            rank_one_segments: 10_000,
            points_per_segment: 11,
            spread: 3.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SEpsilonReport {
    pub eps: f64,
    pub contains_zero: bool,
    /// `t xi` in `S_eps` for closure matrices `xi` and scheduled `t < 1`.
    pub radial: PropertyCheck,
    /// The witness pair and whether their midpoint leaves the set.
    pub nonconvex: bool,
    pub nonconvex_witness: [Matrix2x2; 3],
    /// `[[0, s], [-s, 0]]` stays inside for `s = 10^k`, `k = 0..=6`.
    pub unbounded: bool,
    pub rank_one_convex: PropertyCheck,
    pub all_pass: bool,
}

fn random_matrix(rng: &mut ChaCha8Rng, r: f64) -> Matrix2x2 {
    Matrix2x2::new(
        rng.random_range(-r..=r),
        rng.random_range(-r..=r),
        rng.random_range(-r..=r),
        rng.random_range(-r..=r),
    )
}

/// A matrix with `eps + det = tr^2` up to rounding.
fn boundary_matrix(rng: &mut ChaCha8Rng, eps: f64, r: f64) -> Matrix2x2 {
    loop {
        let tau = rng.random_range(-r..=r);
        let (b, c) = (rng.random_range(-r..=r), rng.random_range(-r..=r));
        let disc = 4.0 * eps - 3.0 * tau * tau - 4.0 * b * c;
        if disc >= 0.0 {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let x = (tau + sign * disc.sqrt()) / 2.0;
            return Matrix2x2::new(x, b, c, tau - x);
        }
    }
}

fn member(rng: &mut ChaCha8Rng, eps: f64, r: f64) -> Matrix2x2 {
    loop {
        let m = random_matrix(rng, r);
        if s_epsilon_margin(&m, eps) > 0.0 {
            return m;
        }
    }
}

/// The two members whose midpoint is not a member.
pub fn nonconvexity_witness(eps: f64) -> [Matrix2x2; 3] {
    let (a, b) = ((1.5 * eps).sqrt(), eps.sqrt());
    let xi = Matrix2x2::new(a, -b, b, 0.0);
    let zeta = Matrix2x2::new(0.0, b, -b, a);
    [xi, zeta, xi.add(&zeta).scale(0.5)]
}

pub fn check_s_epsilon_properties(eps: f64, opts: &SEpsilonOptions) -> Result<SEpsilonReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps = {eps} must be positive")));
    }
    let r = opts.spread * eps.sqrt();
    let ts = opts.t_schedule.values();
    if ts.iter().any(|&t| t >= 1.0) {
        return Err(Error::invalid("the radial check needs t < 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut closure = Vec::with_capacity(opts.closure_samples);
    while closure.len() < opts.closure_samples / 2 {
        let m = random_matrix(&mut rng, r);
        if s_epsilon_margin(&m, eps) >= 0.0 {
            closure.push(m);
        }
    }
    while closure.len() < opts.closure_samples {
        closure.push(boundary_matrix(&mut rng, eps, r));
    }
    let radial = PropertyCheck::tally(
        closure
            .iter()
            .flat_map(|m| [0.0].iter().chain(ts).map(move |&t| (s_epsilon_margin(&m.scale(t), eps) > 0.0, m.entries().to_vec()))),
    );

    let w = nonconvexity_witness(eps);
    let nonconvex = s_epsilon_margin(&w[0], eps) > 0.0 && s_epsilon_margin(&w[1], eps) > 0.0 && s_epsilon_margin(&w[2], eps) <= 0.0;

    let unbounded = (0..=6).all(|k| {
        let s = 10f64.powi(k);
        s_epsilon_margin(&Matrix2x2::new(0.0, s, -s, 0.0), eps) > 0.0
    });

    let lambdas = linspace(0.0, 1.0, opts.points_per_segment.max(2));
    let mut segments = Vec::with_capacity(opts.rank_one_segments);
    while segments.len() < opts.rank_one_segments {
        let start = member(&mut rng, eps, r);
        let (a, b) = (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU));
        let dir = Matrix2x2::rank_one([a.cos(), a.sin()], [b.cos(), b.sin()]);
        let s = rng.random_range(-2.0 * r..=2.0 * r);
        let end = start.add(&dir.scale(s));
        if s_epsilon_margin(&end, eps) > 0.0 {
            segments.push((start, dir.scale(s)));
        }
    }
    let rank_one_convex = PropertyCheck::tally(segments.iter().flat_map(|(start, step)| {
        lambdas.iter().map(move |&l| {
            let m = start.add(&step.scale(l));
            (s_epsilon_margin(&m, eps) > 0.0, m.entries().to_vec())
        })
    }));

    let contains_zero = s_epsilon_margin(&Matrix2x2::ZERO, eps) > 0.0;
    let all_pass = contains_zero && radial.pass && nonconvex && unbounded && rank_one_convex.pass;
    Ok(SEpsilonReport {
        eps,
        contains_zero,
        radial,
        nonconvex,
        nonconvex_witness: w,
        unbounded,
        rank_one_convex,
        all_pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiconvexityReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest `L(xi) - mean L(xi + grad phi)`.
    pub worst_excess: f64,
    /// `(xi, perturbation index)` of the worst violation.
    pub witness: Option<(Vec<f64>, usize)>,
    pub verdict: String,
}

/// Compares `L(xi)` with the cell average of `L(xi + grad phi)` for every
/// pair. Finding no violation does not establish quasiconvexity.
pub fn check_quasiconvexity_necessary(
    l: &Integrand,
    xis: &[Vec<f64>],
    perturbations: &[MeshField],
) -> Result<QuasiconvexityReport> {
    if xis.is_empty() || perturbations.is_empty() {
        return Err(Error::EmptySamples("quasiconvexity check".into()));
    }
    for phi in perturbations {
        if !phi.vanishes_on_boundary() {
            return Err(Error::invalid("perturbation fields must vanish on the boundary"));
        }
    }
    for xi in xis {
        check_dim(perturbations[0].mesh.gradient_len(), xi.len())?;
    }
    let results: Vec<(f64, Vec<f64>, usize)> = xis
        .par_iter()
        .flat_map_iter(|xi| {
            let lxi = l.eval(xi);
            perturbations.iter().enumerate().map(move |(k, phi)| {
                let m = phi.mesh.cell_measure();
                let avg: f64 = phi
                    .cell_gradients()
                    .iter()
                    .map(|g| l.eval(&xi.iter().zip(g).map(|(a, b)| a + b).collect::<Vec<_>>()) * m)
                    .sum();
                (lxi - avg, xi.clone(), k)
            })
        })
        .collect();
    let mut report = QuasiconvexityReport {
        checked: results.len(),
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        witness: None,
        verdict: String::new(),
    };
    for (excess, xi, k) in results {
        let lxi = l.eval(&xi);
        if excess > QC_SLACK * lxi.abs().max(1.0) {
            report.violations += 1;
        }
        if excess > report.worst_excess {
            report.worst_excess = excess;
            report.witness = Some((xi, k));
        }
    }
    if report.violations == 0 {
        report.witness = None;
        report.verdict = "no violation found".into();
    } else {
        report.verdict = "violation found".into();
    }
    Ok(report)
}

/// `(checked, violations)` of "`t u` is admissible" over fields and `t`.
pub fn scaled_admissibility(s: &ConstraintSet, fields: &[MeshField], ts: &TSchedule) -> Result<(usize, usize)> {
    let mut checked = 0;
    let mut bad = 0;
    for u in fields {
        for &t in ts.values() {
            checked += 1;
            if !u.scaled(t).admissible(s)? {
                bad += 1;
            }
        }
    }
    Ok((checked, bad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JRuUscOptions {
    pub growth_samples: usize,
    pub seed: u64,
}

impl Default for JRuUscOptions {
    fn default() -> Self {
        JRuUscOptions { growth_samples: 2000, seed: 0 }
    }
}

/// Compares the sampled modulus of `J` (relative to the zero field, with
/// `a = |Omega| = 1`) against `4 C' max{1, 1/c} (1 - t)`.
///
/// Rows have `point = [field index, t]`, `lhs` the ratio and `rhs` the bound;
/// the gap is the excess of the ratio over the bound.
pub fn verify_j_ruusc(
    l: &Integrand,
    s: &ConstraintSet,
    fields: &[MeshField],
    ts: &TSchedule,
    opts: &JRuUscOptions,
) -> Result<TheoremReport> {
    let first = fields.first().ok_or_else(|| Error::EmptySamples("constrained fields".into()))?;
    let len = first.mesh.gradient_len();
    if !s.contains(&vec![0.0; len])? {
        return Err(Error::refused(format!("0 is not in {}", s.label())));
    }
    let mut radius: f64 = 1.0;
    for (k, u) in fields.iter().enumerate() {
        check_dim(len, u.mesh.gradient_len())?;
        if !u.admissible(s)? {
            return Err(Error::invalid(format!("field {k} has a cell gradient outside {}", s.label())));
        }
        radius = u.cell_gradients().iter().map(|g| norm(g)).fold(radius, f64::max);
    }
    let growth = check_growth_and_lipschitz(l, len, opts.growth_samples, radius, opts.seed)?;
    if !growth.pass {
        let (what, x) = growth.witness.unwrap_or_default();
        return Err(Error::refused(format!("integrand constants fail ({what}) at {x:?}")));
    }
    let rows: Vec<ReportRow> = fields
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, u)| {
            let ju = energy_j(u, l);
            ts.values().iter().map(move |&t| {
                let ratio = (energy_j(&u.scaled(t), l) - ju) / (1.0 + ju);
                let bound = l.modulus_bound(t);
                ReportRow {
                    point: vec![k as f64, t],
                    kind: "field".into(),
                    lhs: ExtReal::Finite(ratio),
                    rhs: ExtReal::Finite(bound),
                    gap: ExtReal::Finite((ratio - bound).max(0.0)),
                }
            })
        })
        .collect();
    let (checked, bad) = scaled_admissibility(s, fields, ts)?;
    Ok(TheoremReport::new("j_ruusc", J_TOL, rows)
        .note(CLOSURE_BANNER)
        .note(format!(
            "growth estimates on radius {radius}: c >= {}, C <= {}, C' <= {}",
            growth.c_est, growth.c_upper_est, growth.c_lip_est
        ))
        .note(format!("scaled fields admissible in {} of {checked} cases", checked - bad)))
}

/// Largest ratio of consecutive gaps `|J(t_{k+1} u) - J(u)| / |J(t_k u) - J(u)|`
/// accepted as geometric decrease.
pub const GEOMETRIC_RATIO: f64 = 0.9;

/// Checks `J(t u) -> J(u)` along the schedule: the gaps over the last
/// `window` values must be within `tol`, the gaps must shrink geometrically
/// until they reach rounding level, and the Aitken extrapolation of the tail
/// (an `extrapolated` row) must match `J(u)` within `tol`.
pub fn verify_radial_equals_j(
    u: &MeshField,
    l: &Integrand,
    s: &ConstraintSet,
    ts: &TSchedule,
    window: usize,
    tol: f64,
) -> Result<TheoremReport> {
    if !u.closure_admissible(s, 0.0)? {
        return Err(Error::refused(format!("a cell gradient is outside the closure of {}", s.label())));
    }
    let ju = energy_j(u, l);
    let values: Vec<f64> = ts.values().iter().map(|&t| energy_j(&u.scaled(t), l)).collect();
    let gaps: Vec<f64> = values.iter().map(|v| (v - ju).abs()).collect();
    let floor = 1e3 * f64::EPSILON * ju.abs().max(1.0);
    let geometric = gaps.windows(2).all(|w| w[0] <= floor || w[1] <= GEOMETRIC_RATIO * w[0]);
    let start = ts.tail_start(window.max(1));
    let mut rows: Vec<ReportRow> = ts.values()[start..]
        .iter()
        .zip(&values[start..])
        .map(|(&t, &v)| ReportRow::compare(vec![t], "t", ExtReal::Finite(v), ExtReal::Finite(ju)))
        .collect();
    let extrapolated = crate::radial::aitken(&values[start..]).unwrap_or(values[values.len() - 1]);
    rows.push(ReportRow::compare(vec![1.0], "extrapolated", ExtReal::Finite(extrapolated), ExtReal::Finite(ju)));
    let mut report = TheoremReport::new("radial_equals_j", tol, rows)
        .note(CLOSURE_BANNER)
        .note(format!("gaps decrease geometrically (ratio <= {GEOMETRIC_RATIO}): {geometric}"));
    if !geometric {
        report.verdict = crate::report::ReportVerdict::Fail;
    }
    Ok(report)
}

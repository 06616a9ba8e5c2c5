//! Sampled lower semicontinuous envelopes.
//!
//! `lsc f(u) = sup_r inf_{|v - u| < r} f(v)` is estimated on the radius
//! schedule `r_k = r0 2^-k`. Each ball contributes the minimum of `f` over
//! low-discrepancy points in it. A sampled minimum only bounds the true
//! infimum from above, and every point of a smaller ball also lies in the
//! larger ones, so `inf B_k <= min_{j >= k} raw_j`; this backward running
//! minimum is the monotone correction, and its last entry is the estimate.
//!
//! On `R^n` the sequential relaxation coincides with this envelope, so the
//! same estimator serves both.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::oracle::FunctionOracle;
use crate::sampling::{unit_ball_points, Point, SampleSet};
use crate::starshape::Region;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeParams {
    pub r0: f64,
    /// Number of radii `r0 2^-k`, `k = 0..levels`.
    pub levels: u32,
    pub samples_per_shell: usize,
    pub seed: u64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams { r0: 1.0, levels: 16, samples_per_shell: 64, seed: 0 }
    }
}

impl EnvelopeParams {
    /// Resolution scale `s`: `s` times the points per ball and `4 log2 s`
    /// extra radius levels.
    pub fn scaled(&self, s: u32) -> Self {
        let s = s.max(1);
        EnvelopeParams {
            r0: self.r0,
            levels: self.levels + 4 * s.ilog2(),
            samples_per_shell: self.samples_per_shell * s as usize,
            seed: self.seed,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.levels as i32).map(|k| self.r0 * 2f64.powi(-k)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) || self.levels == 0 || self.samples_per_shell == 0 {
            return Err(Error::invalid("envelope needs r0 > 0, levels >= 1 and samples_per_shell >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeEstimate {
    pub point: Point,
    pub radii: Vec<f64>,
    /// Minimum over the sampled points of each ball.
    pub raw_infima: Vec<ExtReal>,
    /// Backward running minimum of `raw_infima`: nondecreasing as the
    /// balls shrink.
    pub infima: Vec<ExtReal>,
    pub estimate: ExtReal,
    pub samples_per_shell: usize,
    pub seed: u64,
    /// The smallest ball held no admissible point.
    pub inconclusive: bool,
}

fn ball_points(u: &[f64], r: f64, level: usize, params: &EnvelopeParams) -> Vec<Point> {
    unit_ball_points(u.len(), params.samples_per_shell, params.seed, level as u64)
        .into_iter()
        .map(|d| u.iter().zip(&d).map(|(x, e)| x + r * e).collect())
        .collect()
}

fn estimate(
    f: &FunctionOracle,
    u: &[f64],
    params: &EnvelopeParams,
    admissible: impl Fn(&[f64]) -> bool,
) -> Result<EnvelopeEstimate> {
    params.validate()?;
    check_dim(f.dim(), u.len())?;
    let radii = params.radii();
    let center = if admissible(u) { f.eval(u)? } else { ExtReal::PosInf };
    let mut raw = Vec::with_capacity(radii.len());
    let mut last_hit = false;
    for (k, &r) in radii.iter().enumerate() {
        let mut m = center;
        let mut hit = admissible(u);
        for v in ball_points(u, r, k, params) {
            if admissible(&v) {
                hit = true;
                m = m.min(f.eval(&v)?);
            }
        }
        raw.push(m);
        last_hit = hit;
    }
    let mut infima = raw.clone();
    for k in (0..infima.len().saturating_sub(1)).rev() {
        infima[k] = infima[k].min(infima[k + 1]);
    }
    let estimate = *infima.last().expect("at least one level");
    Ok(EnvelopeEstimate {
        point: u.to_vec(),
        radii,
        raw_infima: raw,
        estimate,
        infima,
        samples_per_shell: params.samples_per_shell,
        seed: params.seed,
        inconclusive: !last_hit,
    })
}

/// Estimate of `lsc f(u)`; the point `u` itself is always in every ball.
pub fn lsc_envelope(f: &FunctionOracle, u: &[f64], params: &EnvelopeParams) -> Result<EnvelopeEstimate> {
    estimate(f, u, params, |_| true)
}

/// Estimate of `liminf_{D ∋ v -> u} f(v)`, the envelope of `f + chi_D`.
/// Points outside the closure of `D` get `+inf` directly.
pub fn lsc_envelope_in_d(
    f: &FunctionOracle,
    region: &Region,
    u: &[f64],
    params: &EnvelopeParams,
) -> Result<EnvelopeEstimate> {
    check_dim(region.dim(), u.len())?;
    if !region.contains_closure(u) {
        params.validate()?;
        let radii = params.radii();
        let n = radii.len();
        return Ok(EnvelopeEstimate {
            point: u.to_vec(),
            radii,
            raw_infima: vec![ExtReal::PosInf; n],
            infima: vec![ExtReal::PosInf; n],
            estimate: ExtReal::PosInf,
            samples_per_shell: params.samples_per_shell,
            seed: params.seed,
            inconclusive: false,
        });
    }
    estimate(f, u, params, |v| region.contains(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscReport {
    pub pass: bool,
    pub tol: f64,
    pub checked: usize,
    pub max_gap: ExtReal,
    /// The sample with the largest gap, when the check fails.
    pub witness: Option<Point>,
    pub inconclusive_count: usize,
}

/// Lower semicontinuity of `f` in `D`: the restricted envelope matches `f`
/// within `tol` at every sample (with `inf = inf` allowed).
pub fn check_lsc_in_d(
    f: &FunctionOracle,
    region: &Region,
    samples: &SampleSet,
    tol: f64,
    params: &EnvelopeParams,
) -> Result<LscReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples("lsc check samples".into()));
    }
    if let Some(bad) = samples.points().iter().find(|p| !region.contains(p)) {
        return Err(Error::OutsideDomain { point: bad.clone(), context: "lsc check sample not in D".into() });
    }
    let rows: Vec<(ExtReal, bool)> = samples
        .points()
        .par_iter()
        .map(|u| {
            let e = lsc_envelope_in_d(f, region, u, params)?;
            Ok((e.estimate.gap(f.eval(u)?), e.inconclusive))
        })
        .collect::<Result<_>>()?;
    let mut max_gap = ExtReal::ZERO;
    let mut worst = 0;
    for (i, (g, _)) in rows.iter().enumerate() {
        if *g > max_gap {
            max_gap = *g;
            worst = i;
        }
    }
    let pass = max_gap <= tol;
    Ok(LscReport {
        pass,
        tol,
        checked: samples.len(),
        max_gap,
        witness: (!pass).then(|| samples.points()[worst].clone()),
        inconclusive_count: rows.iter().filter(|r| r.1).count(),
    })
}

//! The radial modulus
//!
//! `Delta^a(t) = sup_{u in D} (f(t u + (1 - t) u0) - f(u)) / (a + |f(u)|)`
//!
//! estimated on a finite sample of `D`, and the ru-usc certificate
//! `limsup_{t -> 1} Delta^a(t) <= 0` read off the tail of a t-schedule.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::oracle::FunctionOracle;
use crate::sampling::{segment_point, Point, SampleSet, TSchedule};
use crate::starshape::Region;

pub const DEFAULT_EPS_CERT: f64 = 1e-6;
pub const DEFAULT_TAIL: usize = 5;
pub const DEFAULT_CERT_K_MAX: u32 = 40;
pub const REFINE_ROUNDS: usize = 3;
/// Slack on the convex bound `Delta <= 1 - t`.
pub const CONVEX_SLACK: f64 = 1e-12;

const MAX_STORED_VIOLATIONS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusProfile {
    pub a: f64,
    pub t_schedule: TSchedule,
    /// Per-t maximum ratio over the samples (and refinement points).
    pub delta: Vec<ExtReal>,
    /// The sample attaining each maximum.
    pub argmax: Vec<Point>,
    /// Segment points `t u + (1 - t) u0` outside `dom f`, as `(t, u)`.
    pub violations: Vec<(f64, Point)>,
    pub violation_count: usize,
    pub sample_count: usize,
    pub seed: Option<u64>,
    pub refined: bool,
}

impl ModulusProfile {
    /// `max` of the last `tail` entries.
    pub fn tail_max(&self, tail: usize) -> ExtReal {
        let start = self.t_schedule.tail_start(tail);
        self.delta[start..].iter().copied().fold(ExtReal::Finite(f64::NEG_INFINITY), ExtReal::max)
    }

    /// Index of the tail entry with the largest ratio.
    pub fn tail_argmax(&self, tail: usize) -> usize {
        let start = self.t_schedule.tail_start(tail);
        let mut best = start;
        for i in start..self.delta.len() {
            if self.delta[i] > self.delta[best] {
                best = i;
            }
        }
        best
    }

    /// CSV columns `t, delta, argmax_0, ..., argmax_{n-1}`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.argmax.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string(), "delta".to_string()];
        header.extend((0..dim).map(|i| format!("argmax_{i}")));
        out.write_record(&header).map_err(csv_err)?;
        for ((t, d), u) in self.t_schedule.values().iter().zip(&self.delta).zip(&self.argmax) {
            let mut row = vec![fmt_f64(*t), d.to_string()];
            row.extend(u.iter().map(|v| fmt_f64(*v)));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// One ratio of the modulus, given `f(u)` already evaluated.
pub fn modulus_ratio(f: &FunctionOracle, u0: &[f64], a: f64, t: f64, u: &[f64], fu: f64) -> Result<ExtReal> {
    match f.eval(&segment_point(t, u, u0))? {
        ExtReal::PosInf => Ok(ExtReal::PosInf),
        ExtReal::Finite(fw) => ExtReal::finite((fw - fu) / (a + fu.abs())),
    }
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("modulus constant a must be positive and finite, got {a}")))
    }
}

/// `f(u)` at every sample; each sample must lie in `D` and in `dom f`.
fn sample_values(f: &FunctionOracle, region: &Region, samples: &SampleSet) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples("modulus samples".into()));
    }
    check_dim(f.dim(), samples.dim())?;
    check_dim(region.dim(), samples.dim())?;
    samples
        .points()
        .par_iter()
        .map(|u| {
            if !region.contains(u) {
                return Err(Error::OutsideDomain { point: u.clone(), context: "modulus sample not in D".into() });
            }
            f.eval_finite(u)
        })
        .collect()
}

struct TRow {
    delta: ExtReal,
    argmax: Point,
    violations: Vec<(f64, Point)>,
}

fn profile_row(
    f: &FunctionOracle,
    region: &Region,
    a: f64,
    t: f64,
    samples: &SampleSet,
    values: &[f64],
    refine_step: Option<f64>,
) -> Result<TRow> {
    let u0 = region.center();
    let mut best = ExtReal::Finite(f64::NEG_INFINITY);
    let mut best_i = 0;
    let mut violations = Vec::new();
    for (i, (u, &fu)) in samples.points().iter().zip(values).enumerate() {
        let r = modulus_ratio(f, u0, a, t, u, fu)?;
        if r.is_inf() {
            violations.push((t, u.clone()));
        }
        if r > best {
            best = r;
            best_i = i;
        }
    }
    let mut argmax = samples.points()[best_i].clone();
    if let (Some(step), true) = (refine_step, best.is_finite()) {
        // Greedy coordinate search around the maximizer, staying in D and dom f.
        let mut h = step;
        for _ in 0..REFINE_ROUNDS {
            for i in 0..argmax.len() {
                for sign in [1.0, -1.0] {
                    let mut cand = argmax.clone();
                    cand[i] += sign * h;
                    if !region.contains(&cand) {
                        continue;
                    }
                    let Some(fu) = f.eval(&cand)?.as_finite() else { continue };
                    let r = modulus_ratio(f, u0, a, t, &cand, fu)?;
                    if r.is_inf() {
                        violations.push((t, cand.clone()));
                    }
                    if r > best {
                        best = r;
                        argmax = cand;
                    }
                }
            }
            h *= 0.5;
        }
    }
    Ok(TRow { delta: best, argmax, violations })
}

/// The sampled modulus `Delta^a_{f,D,u0}(t)` for every scheduled `t`, with
/// `u0` the center of `region`. With `refine`, each maximizer is improved by
/// a short coordinate search.
pub fn modulus_profile(
    f: &FunctionOracle,
    region: &Region,
    a: f64,
    t_schedule: &TSchedule,
    samples: &SampleSet,
    refine: bool,
) -> Result<ModulusProfile> {
    check_a(a)?;
    let values = sample_values(f, region, samples)?;
    let step = refine.then(|| samples.spacing());
    let rows: Vec<TRow> = t_schedule
        .values()
        .par_iter()
        .map(|&t| profile_row(f, region, a, t, samples, &values, step))
        .collect::<Result<_>>()?;
    let violation_count = rows.iter().map(|r| r.violations.len()).sum();
    let mut delta = Vec::with_capacity(rows.len());
    let mut argmax = Vec::with_capacity(rows.len());
    let mut violations = Vec::new();
    for row in rows {
        delta.push(row.delta);
        argmax.push(row.argmax);
        violations.extend(row.violations.into_iter().take(MAX_STORED_VIOLATIONS - violations.len().min(MAX_STORED_VIOLATIONS)));
    }
    Ok(ModulusProfile {
        a,
        t_schedule: t_schedule.clone(),
        delta,
        argmax,
        violations,
        violation_count,
        sample_count: samples.len(),
        seed: samples.seed(),
        refined: refine,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Supported,
    Inconclusive,
    Refuted,
}

/// A sample and parameter at which the ratio exceeds the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: f64,
    pub t: f64,
    pub u: Point,
    pub ratio: ExtReal,
}

impl Witness {
    /// Recomputes the ratio at `(t, u)` from scratch.
    pub fn replay(&self, f: &FunctionOracle, region: &Region) -> Result<ExtReal> {
        let fu = f.eval_finite(&self.u)?;
        modulus_ratio(f, region.center(), self.a, self.t, &self.u, fu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyOptions {
    /// Defaults to `{1, 1 + |f(u0)|, 10, 100}`.
    pub a_candidates: Option<Vec<f64>>,
    pub t_schedule: TSchedule,
    pub eps_cert: f64,
    pub tail: usize,
    pub refine: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            a_candidates: None,
            t_schedule: TSchedule::geometric(DEFAULT_CERT_K_MAX),
            eps_cert: DEFAULT_EPS_CERT,
            tail: DEFAULT_TAIL,
            refine: true,
        }
    }
}

impl CertifyOptions {
    pub fn with_candidates(mut self, a: Vec<f64>) -> Self {
        self.a_candidates = Some(a);
        self
    }

    /// Puts `a` in front of the candidate list (used for propagated constants).
    pub fn preferring(mut self, a: f64, f: &FunctionOracle, region: &Region) -> Result<Self> {
        let mut list = match self.a_candidates.take() {
            Some(l) => l,
            None => default_candidates(f, region)?,
        };
        list.retain(|&b| b != a);
        list.insert(0, a);
        self.a_candidates = Some(list);
        Ok(self)
    }
}

pub fn default_candidates(f: &FunctionOracle, region: &Region) -> Result<Vec<f64>> {
    let f0 = f.eval_finite(region.center())?;
    let mut out: Vec<f64> = Vec::new();
    for a in [1.0, 1.0 + f0.abs(), 10.0, 100.0] {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuUscCertificate {
    /// The first candidate whose tail estimate is within tolerance.
    pub a_used: Option<f64>,
    /// Tail maximum for `a_used`, or for the last candidate when none supports.
    pub limsup_estimate: ExtReal,
    pub tail_length: usize,
    pub eps_cert: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// `(a, tail maximum)` for every candidate tried.
    pub per_a: Vec<(f64, ExtReal)>,
    pub sample_count: usize,
    pub seed: Option<u64>,
}

impl RuUscCertificate {
    pub fn supported(&self) -> bool {
        self.verdict == Verdict::Supported
    }
}

/// Tries each candidate `a` in order and reports the first whose sampled
/// tail limsup is `<= eps_cert`.
///
/// When no candidate supports, the largest-`a` profile is recomputed on a
/// denser sample set; the result is `Refuted` only if the excess persists.
pub fn certify_ru_usc(
    f: &FunctionOracle,
    region: &Region,
    samples: &SampleSet,
    opts: &CertifyOptions,
) -> Result<RuUscCertificate> {
    let candidates = match &opts.a_candidates {
        Some(c) if c.is_empty() => return Err(Error::invalid("a_candidates is empty")),
        Some(c) => c.clone(),
        None => default_candidates(f, region)?,
    };
    let tail = opts.tail.max(1);
    let mut per_a = Vec::with_capacity(candidates.len());
    let mut last = None;
    for &a in &candidates {
        let profile = modulus_profile(f, region, a, &opts.t_schedule, samples, opts.refine)?;
        let lim = profile.tail_max(tail);
        per_a.push((a, lim));
        if lim <= opts.eps_cert {
            return Ok(RuUscCertificate {
                a_used: Some(a),
                limsup_estimate: lim,
                tail_length: tail,
                eps_cert: opts.eps_cert,
                verdict: Verdict::Supported,
                witness: None,
                per_a,
                sample_count: samples.len(),
                seed: samples.seed(),
            });
        }
        last = Some(profile);
    }
    let profile = last.expect("at least one candidate");
    let a_max = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let profile = if profile.a == a_max {
        profile
    } else {
        modulus_profile(f, region, a_max, &opts.t_schedule, samples, opts.refine)?
    };
    let denser = match samples.refined() {
        Some(s) => s?,
        None => samples.merged(&region.sample_interiorish(samples.len(), samples.seed().unwrap_or(0).wrapping_add(1))?)?,
    };
    let check = modulus_profile(f, region, a_max, &opts.t_schedule, &denser, opts.refine)?;
    let refined_lim = check.tail_max(tail);
    let (verdict, witness) = if refined_lim > opts.eps_cert {
        let i = check.tail_argmax(tail);
        let w = Witness { a: a_max, t: check.t_schedule.values()[i], u: check.argmax[i].clone(), ratio: check.delta[i] };
        (Verdict::Refuted, Some(w))
    } else {
        (Verdict::Inconclusive, None)
    };
    Ok(RuUscCertificate {
        a_used: None,
        limsup_estimate: profile.tail_max(tail),
        tail_length: tail,
        eps_cert: opts.eps_cert,
        verdict,
        witness,
        per_a,
        sample_count: samples.len(),
        seed: samples.seed(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBoundReport {
    pub holds: bool,
    pub a: f64,
    /// `max_t (Delta(t) - (1 - t))`.
    pub worst_excess: ExtReal,
    pub witness: Option<Witness>,
    pub profile: ModulusProfile,
}

/// For `f` declared convex: every sampled ratio with `a = 1 + |f(u0)|` is at
/// most `(1 - t) + 1e-12`.
pub fn convex_bound_check(
    f: &FunctionOracle,
    region: &Region,
    t_schedule: &TSchedule,
    samples: &SampleSet,
) -> Result<ConvexBoundReport> {
    if !f.properties().convex {
        return Err(Error::refused(format!("{} is not declared convex", f.name())));
    }
    let a = 1.0 + f.eval_finite(region.center())?.abs();
    let profile = modulus_profile(f, region, a, t_schedule, samples, false)?;
    let mut worst = ExtReal::Finite(f64::NEG_INFINITY);
    let mut worst_i = 0;
    for (i, (&t, &d)) in t_schedule.values().iter().zip(&profile.delta).enumerate() {
        let excess = match d {
            ExtReal::Finite(v) => ExtReal::Finite(v - (1.0 - t)),
            ExtReal::PosInf => ExtReal::PosInf,
        };
        if excess > worst {
            worst = excess;
            worst_i = i;
        }
    }
    let holds = worst <= CONVEX_SLACK;
    let witness = (!holds).then(|| Witness {
        a,
        t: t_schedule.values()[worst_i],
        u: profile.argmax[worst_i].clone(),
        ratio: profile.delta[worst_i],
    });
    Ok(ConvexBoundReport { holds, a, worst_excess: worst, witness, profile })
}

//! The JSON problem format.
//!
//! A problem is `{"id", "statement", "seed", "expect", "params"}`. Parsing is
//! two-step: the envelope first, then `params` against the statement's own
//! schema, so errors name the offending field (`params.function`, ...).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ruusc::sampling::{make_samples, Provenance, SampleSet, TSchedule};
use ruusc::Region;

use crate::statements::Params;

/// A malformed or unusable spec: exit code 3.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
    Refused,
}

impl Expect {
    pub fn exit_code(self) -> i32 {
        match self {
            Expect::Pass => 0,
            Expect::Fail => 1,
            Expect::Refused => 2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    #[serde(default)]
    id: Option<String>,
    statement: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    expect: Expect,
    #[serde(default)]
    description: Option<String>,
    params: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub id: String,
    pub statement: String,
    pub seed: u64,
    pub expect: Expect,
    pub description: Option<String>,
    pub params: Params,
}

fn path_error<E: std::fmt::Display>(prefix: &str, err: serde_path_to_error::Error<E>) -> SpecError {
    let path = err.path().to_string();
    let field = match (prefix, path.as_str()) {
        ("", p) => p.to_string(),
        (pre, ".") => pre.to_string(),
        (pre, p) => format!("{pre}.{p}"),
    };
    SpecError(format!("field `{field}`: {}", err.inner()))
}

pub(crate) fn parse_params<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, SpecError> {
    serde_path_to_error::deserialize(value).map_err(|e| path_error("params", e))
}

impl ProblemSpec {
    /// Parses a spec; `fallback_id` is used when the spec has no `id`.
    pub fn from_value(value: serde_json::Value, fallback_id: &str) -> Result<Self, SpecError> {
        let env: Envelope = serde_path_to_error::deserialize(value).map_err(|e| path_error("", e))?;
        let params = Params::parse(&env.statement, env.params)?;
        let id = env.id.unwrap_or_else(|| fallback_id.to_string());
        if id.is_empty() || id.contains(['/', '\\']) {
            return Err(SpecError(format!("field `id`: {id:?} is not usable as a file name")));
        }
        Ok(ProblemSpec { id, statement: env.statement, seed: env.seed, expect: env.expect, description: env.description, params })
    }

    pub fn from_str(text: &str, fallback_id: &str) -> Result<Self, SpecError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SpecError(format!("invalid JSON: {e}")))?;
        Self::from_value(value, fallback_id)
    }

    pub fn from_path(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpecError(format!("{}: {e}", path.display())))?;
        Self::from_str(&text, &stem(path))
    }
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "spec".into())
}

/// Run-wide settings from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSettings {
    /// Added to every seed in a spec.
    pub seed: u64,
    /// Multiplies sample counts (grids refine to `(n - 1) k + 1` nodes).
    pub resolution_scale: u32,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { seed: 0, resolution_scale: 1 }
    }
}

/// Seeds and scale after combining the spec with the run settings.
#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    pub seed: u64,
    pub scale: u32,
}

impl Ctx {
    pub fn seed(&self, local: u64) -> u64 {
        self.seed.wrapping_add(local)
    }

    pub fn count(&self, n: usize) -> usize {
        n * self.scale as usize
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingSpec {
    UniformGrid {
        lower: Vec<f64>,
        upper: Vec<f64>,
        resolution: usize,
    },
    LowDiscrepancy {
        lower: Vec<f64>,
        upper: Vec<f64>,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Points of the region itself, its center first.
    Region {
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Points on the boundary of the region.
    Boundary {
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Boundary points of the closure plus region points.
    Closure {
        boundary: usize,
        interior: usize,
        #[serde(default)]
        seed: u64,
    },
    User {
        points: Vec<Vec<f64>>,
    },
}

/// Which points of a sample set are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    InRegion,
    InClosure,
}

impl SamplingSpec {
    pub fn build(&self, region: &Region, ctx: &Ctx, keep: Keep) -> Result<SampleSet, ruusc::Error> {
        let set = match self {
            SamplingSpec::UniformGrid { lower, upper, resolution } => make_samples(&Provenance::UniformGrid {
                lower: lower.clone(),
                upper: upper.clone(),
                resolution: (resolution.max(&2) - 1) * ctx.scale as usize + 1,
            })?,
            SamplingSpec::LowDiscrepancy { lower, upper, count, seed } => make_samples(&Provenance::LowDiscrepancy {
                lower: lower.clone(),
                upper: upper.clone(),
                count: ctx.count(*count),
                seed: ctx.seed(*seed),
            })?,
            SamplingSpec::Region { count, seed } => region.sample_interiorish(ctx.count(*count), ctx.seed(*seed))?,
            SamplingSpec::Boundary { count, seed } => region.sample_boundary(ctx.count(*count), ctx.seed(*seed))?,
            SamplingSpec::Closure { boundary, interior, seed } => ruusc::starshape::closure_samples(
                region,
                ctx.count(*boundary),
                ctx.count(*interior),
                ctx.seed(*seed),
            )?,
            SamplingSpec::User { points } => SampleSet::user(points.clone())?,
        };
        let ok = |p: &[f64]| match keep {
            Keep::InRegion => region.contains(p),
            Keep::InClosure => region.contains_closure(p),
        };
        if set.points().iter().all(|p| ok(p)) {
            return Ok(set);
        }
        let kept: Vec<_> = set.into_points().into_iter().filter(|p| ok(p)).collect();
        if kept.is_empty() {
            return Err(ruusc::Error::EmptySamples("no sample lies in the region".into()));
        }
        SampleSet::user(kept)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// `t_k = 1 - 2^-k`, `k = 1..=k_max`.
    Geometric { k_max: u32 },
    Values { values: Vec<f64> },
}

impl ScheduleSpec {
    pub fn geometric(k_max: u32) -> Self {
        ScheduleSpec::Geometric { k_max }
    }

    pub fn build(&self) -> Result<TSchedule, ruusc::Error> {
        match self {
            ScheduleSpec::Geometric { k_max } => Ok(TSchedule::geometric(*k_max)),
            ScheduleSpec::Values { values } => TSchedule::new(values.clone()),
        }
    }
}

//! Runs specs and suites and writes their outputs.
//!
//! For each spec `<out>/<id>.json` is written, plus `<out>/<id>.csv` when the
//! statement produced a report. A suite also writes `<out>/summary.csv`; its
//! last column, `runtime_ms`, is the only output that varies between runs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use ruusc::ExtReal;

use crate::spec::{stem, Ctx, Expect, ProblemSpec, RunSettings, SpecError};
use crate::statements::{run, Outcome};

/// One line of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecResult {
    pub id: String,
    pub statement: String,
    pub expect: Expect,
    /// 0 pass, 1 fail, 2 refused, 3 spec error.
    pub exit_code: i32,
    pub max_gap: Option<ExtReal>,
    /// Rows whose gap exceeds the tolerance.
    pub flagged: usize,
    pub runtime_ms: u128,
}

impl SpecResult {
    pub fn verdict(&self) -> &'static str {
        match self.exit_code {
            0 => "pass",
            1 => "fail",
            2 => "refused",
            _ => "spec_error",
        }
    }

    /// The code a suite reports for this spec: 0 when the outcome matches
    /// `expect`, the raw code otherwise.
    pub fn effective_code(&self) -> i32 {
        if self.exit_code == self.expect.exit_code() {
            0
        } else if self.exit_code == 0 {
            1
        } else {
            self.exit_code
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub results: Vec<SpecResult>,
    pub exit_code: i32,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn gap_text(g: ExtReal) -> String {
    match g {
        ExtReal::Finite(v) => format!("{v:e}"),
        ExtReal::PosInf => "inf".into(),
    }
}

fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).with_context(|| format!("writing {}", path.display()))
}

/// Runs a parsed spec and writes its outputs to `out`.
pub fn run_problem(spec: &ProblemSpec, settings: RunSettings, out: &Path) -> anyhow::Result<SpecResult> {
    let ctx = Ctx { seed: settings.seed.wrapping_add(spec.seed), scale: settings.resolution_scale.max(1) };
    let start = Instant::now();
    let outcome = run(&spec.params, &ctx);
    let runtime_ms = start.elapsed().as_millis();
    let exit_code = outcome.exit_code();
    let (report, details, refusal, error) = match &outcome {
        Outcome::Report { report, details } => (Some(report), details.clone(), None, None),
        Outcome::Refused(msg) => (None, Value::Null, Some(msg.clone()), None),
        Outcome::Error(msg) => (None, Value::Null, None, Some(msg.clone())),
    };
    let doc = json!({
        "header": { "generated_unix_ms": unix_ms() as u64, "runtime_ms": runtime_ms as u64 },
        "id": spec.id,
        "statement": spec.statement,
        "description": spec.description,
        "seed": ctx.seed,
        "resolution_scale": ctx.scale,
        "expect": spec.expect,
        "exit_code": exit_code,
        "refusal": refusal,
        "error": error,
        "report": report,
        "details": details,
    });
    write_json(&out.join(format!("{}.json", spec.id)), &doc)?;
    if let Some(r) = report {
        let path = out.join(format!("{}.csv", spec.id));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        r.write_csv(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(SpecResult {
        id: spec.id.clone(),
        statement: spec.statement.clone(),
        expect: spec.expect,
        exit_code,
        max_gap: report.map(|r| r.max_gap),
        flagged: report.map_or(0, |r| r.rows.iter().filter(|row| !(row.gap <= r.tolerance)).count()),
        runtime_ms,
    })
}

/// Writes the record of a spec that could not be parsed.
fn spec_error(id: &str, err: &SpecError, out: &Path) -> anyhow::Result<SpecResult> {
    let doc = json!({
        "header": { "generated_unix_ms": unix_ms() as u64, "runtime_ms": 0 },
        "id": id,
        "exit_code": 3,
        "error": err.0,
    });
    write_json(&out.join(format!("{id}.json")), &doc)?;
    Ok(SpecResult {
        id: id.to_string(),
        statement: String::new(),
        expect: Expect::Pass,
        exit_code: 3,
        max_gap: None,
        flagged: 0,
        runtime_ms: 0,
    })
}

fn run_value(value: Value, fallback_id: &str, settings: RunSettings, out: &Path) -> anyhow::Result<SpecResult> {
    match ProblemSpec::from_value(value, fallback_id) {
        Ok(spec) => run_problem(&spec, settings, out),
        Err(e) => spec_error(fallback_id, &e, out),
    }
}

fn read_json(path: &Path) -> Result<Value, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| SpecError(format!("{}: invalid JSON: {e}", path.display())))
}

/// Runs one spec file. The error message of a malformed spec is returned in
/// the written JSON and as `SpecResult::exit_code == 3`.
pub fn run_spec(path: &Path, settings: RunSettings, out: &Path) -> anyhow::Result<(SpecResult, Option<String>)> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let id = stem(path);
    let parsed = read_json(path).and_then(|v| ProblemSpec::from_value(v, &id));
    match parsed {
        Ok(spec) => Ok((run_problem(&spec, settings, out)?, None)),
        Err(e) => Ok((spec_error(&id, &e, out)?, Some(e.0))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    specs: Vec<SuiteEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SuiteEntry {
    Path(PathBuf),
    Inline(Value),
}

pub fn write_summary(results: &[SpecResult], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["id", "statement", "expect", "exit_code", "verdict", "max_gap", "flagged", "runtime_ms"])?;
    for r in results {
        let expect = match r.expect {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
            Expect::Refused => "refused",
        };
        w.write_record([
            r.id.clone(),
            r.statement.clone(),
            expect.to_string(),
            r.exit_code.to_string(),
            r.verdict().to_string(),
            r.max_gap.map(gap_text).unwrap_or_default(),
            r.flagged.to_string(),
            r.runtime_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every spec of a suite in parallel and writes `summary.csv`.
///
/// The suite exit code is the largest effective code; an empty or malformed
/// suite gives 3.
pub fn run_suite(path: &Path, settings: RunSettings, out: &Path) -> anyhow::Result<(SuiteResult, Option<String>)> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let suite: SuiteFile = match read_json(path).and_then(|v| {
        serde_path_to_error::deserialize(v).map_err(|e| SpecError(format!("field `{}`: {}", e.path(), e.inner())))
    }) {
        Ok(s) => s,
        Err(e) => {
            write_summary(&[], &out.join("summary.csv"))?;
            return Ok((SuiteResult { results: Vec::new(), exit_code: 3 }, Some(e.0)));
        }
    };
    if suite.specs.is_empty() {
        write_summary(&[], &out.join("summary.csv"))?;
        return Ok((SuiteResult { results: Vec::new(), exit_code: 3 }, Some("the suite has no specs".into())));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let results = suite
        .specs
        .into_par_iter()
        .enumerate()
        .map(|(i, entry)| match entry {
            SuiteEntry::Path(p) => {
                let p = base.join(p);
                let id = stem(&p);
                match read_json(&p) {
                    Ok(v) => run_value(v, &id, settings, out),
                    Err(e) => spec_error(&id, &e, out),
                }
            }
            SuiteEntry::Inline(v) => run_value(v, &format!("spec{i}"), settings, out),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = results.iter().find(|r| !seen.insert(r.id.as_str())) {
        anyhow::bail!("two specs share the id {:?}", dup.id);
    }
    write_summary(&results, &out.join("summary.csv"))?;
    let exit_code = results.iter().map(SpecResult::effective_code).max().unwrap_or(3);
    Ok((SuiteResult { results, exit_code }, None))
}

//! Per-point comparison tables produced by the verifiers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::modulus::{csv_err, fmt_f64};
use crate::sampling::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: Point,
    /// What the point is (e.g. `boundary`, `exterior`, `field`).
    pub kind: String,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    /// `|lhs - rhs|`, or a statement-specific excess; `inf = inf` is gap 0.
    pub gap: ExtReal,
}

impl ReportRow {
    pub fn compare(point: Point, kind: impl Into<String>, lhs: ExtReal, rhs: ExtReal) -> Self {
        ReportRow { point, kind: kind.into(), lhs, rhs, gap: lhs.gap(rhs) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub scale: u32,
    pub max_gap: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub statement: String,
    pub verdict: ReportVerdict,
    pub tolerance: f64,
    pub max_gap: ExtReal,
    /// Rows at the finest resolution.
    pub rows: Vec<ReportRow>,
    pub resolutions: Vec<Resolution>,
    /// The max gap did not grow from the coarser to the finer resolution.
    pub converged: Option<bool>,
    pub notes: Vec<String>,
}

/// Pass iff every gap is within `tolerance`.
pub fn max_gap(rows: &[ReportRow]) -> ExtReal {
    rows.iter().map(|r| r.gap).fold(ExtReal::ZERO, ExtReal::max)
}

impl TheoremReport {
    pub fn new(statement: impl Into<String>, tolerance: f64, rows: Vec<ReportRow>) -> Self {
        let max_gap = max_gap(&rows);
        TheoremReport {
            statement: statement.into(),
            verdict: if max_gap <= tolerance { ReportVerdict::Pass } else { ReportVerdict::Fail },
            tolerance,
            max_gap,
            rows,
            resolutions: Vec::new(),
            converged: None,
            notes: Vec::new(),
        }
    }

    /// Records the coarse and fine max gaps; the rows stay the fine ones.
    pub fn with_resolutions(mut self, resolutions: Vec<Resolution>) -> Self {
        if let [.., coarse, fine] = resolutions.as_slice() {
            self.converged = Some(fine.max_gap <= coarse.max_gap);
        }
        self.resolutions = resolutions;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == ReportVerdict::Pass
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    /// CSV columns `kind, x0, ..., x{n-1}, lhs, rhs, gap`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.rows.iter().map(|r| r.point.len()).max().unwrap_or(0);
        let mut header = vec!["kind".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.extend(["lhs", "rhs", "gap"].map(String::from));
        out.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut row = vec![r.kind.clone()];
            row.extend((0..dim).map(|i| r.point.get(i).map_or(String::new(), |v| fmt_f64(*v))));
            row.extend([r.lhs, r.rhs, r.gap].map(|v| match v {
                ExtReal::Finite(x) => fmt_f64(x),
                ExtReal::PosInf => "inf".to_string(),
            }));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_gaps() {
        let rows = vec![
            ReportRow::compare(vec![0.0], "a", ExtReal::Finite(1.0), ExtReal::Finite(1.0005)),
            ReportRow::compare(vec![1.0], "b", ExtReal::PosInf, ExtReal::PosInf),
        ];
        let r = TheoremReport::new("x", 1e-3, rows.clone());
        assert!(r.passed());
        let r = TheoremReport::new("x", 1e-4, rows);
        assert!(!r.passed());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![ReportRow::compare(vec![0.5, 1.0], "boundary", ExtReal::Finite(2.0), ExtReal::PosInf)];
        let mut buf = Vec::new();
        TheoremReport::new("x", 0.0, rows).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "kind,x0,x1,lhs,rhs,gap\nboundary,5e-1,1e0,2e0,inf,inf\n");
    }
}

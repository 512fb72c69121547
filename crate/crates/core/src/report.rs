//! Machine-readable output: JSON reports and plot-ready CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{ProbeConfig, Verdict};
use crate::engine::SweepRow;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::GridSpec;
use crate::set::SetDesc;

pub const SCHEMA_VERSION: &str = "1";

/// Settings the numbers depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_sharp: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_sharp: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_a: Option<SetDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_b: Option<SetDesc>,
    /// The arg-set was read off a divergent search rather than located.
    #[serde(default)]
    pub extrapolated: bool,
}

impl From<&SweepRow> for Row {
    fn from(r: &SweepRow) -> Self {
        Row {
            x: r.x,
            v_sharp: Some(r.v_sharp),
            status: Some(r.status.as_str().to_string()),
            solution_a: Some(r.solution_a.clone()),
            extrapolated: r.extrapolated,
            ..Row::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub summary: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub problem_id: String,
    pub command: String,
    pub config: ConfigEcho,
    pub rows: Vec<Row>,
    pub verdicts: Vec<VerdictEntry>,
    /// Wall-clock seconds; only present when asked for, so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_seconds: Option<f64>,
}

impl Report {
    pub fn new(problem_id: impl Into<String>, command: impl Into<String>, config: ConfigEcho) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.into(),
            problem_id: problem_id.into(),
            command: command.into(),
            config,
            rows: Vec::new(),
            verdicts: Vec::new(),
            timing_seconds: None,
        }
    }

    pub fn push_verdict(&mut self, v: Verdict) {
        self.verdicts.push(VerdictEntry { summary: v.summary(), verdict: v });
    }

    /// Orders rows by `x`, then `a`.
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.a.unwrap_or(f64::NEG_INFINITY).total_cmp(&q.a.unwrap_or(f64::NEG_INFINITY))));
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Report> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// `x,v_sharp,solA_lo,solA_hi,status`; the arg-set columns hold its bounding interval.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(["x", "v_sharp", "solA_lo", "solA_hi", "status"]).map_err(ser)?;
        for r in &self.rows {
            let (lo, hi) = match r.solution_a.as_ref().and_then(SetDesc::bounds) {
                Some((lo, hi)) => (fmt_f64(lo), fmt_f64(hi)),
                None => (String::new(), String::new()),
            };
            let v = r.v_sharp.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([fmt_f64(r.x), v, lo, hi, r.status.clone().unwrap_or_default()]).map_err(ser)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn fmt_f64(v: f64) -> String {
    ExtReal::from_f64(v).map(|e| e.to_string()).unwrap_or_else(|_| "nan".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Status;

    fn sample() -> Report {
        let mut r = Report::new("p", "sweep", ConfigEcho { grid: GridSpec::default(), eps: Some(1e-3), probes: None, tol: None });
        for (x, v) in [(0.5, 0.0), (-0.5, 1.0)] {
            r.rows.push(Row::from(&SweepRow {
                x,
                v_sharp: ExtReal::Finite(v),
                status: Status::Attained,
                solution_a: SetDesc::closed(0.25, 0.5),
                extrapolated: false,
            }));
        }
        r.sort_rows();
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert!(!r.to_json().unwrap().contains("timing"));
    }

    #[test]
    fn csv_rows_are_sorted() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(csv, "x,v_sharp,solA_lo,solA_hi,status\n-0.5,1,0.25,0.5,attained\n0.5,0,0.25,0.5,attained\n");
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("p", "sweep", ConfigEcho { grid: GridSpec::default(), eps: None, probes: None, tol: None });
        assert_eq!(r.to_csv().unwrap(), "x,v_sharp,solA_lo,solA_hi,status\n");
    }
}

//! Run, sweep, and spectrum reports with their CSV and JSON encodings.
//!
//! CSV output uses LF line endings and prints floats with 17 significant
//! digits so every value parses back to the identical `f64`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::johnson::GraphParams;
use crate::spectral::{Schedule, SpectralTable};

pub const SCHEMA_VERSION: u32 = 1;

pub const RUN_CSV_HEADER: &str = "t,p_succ,p_alt,norm";
pub const SWEEP_CSV_HEADER: &str = "n,t_run,p_succ,abs_dev,t_opt,p_max";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub t: u64,
    pub p_succ: f64,
    /// Tail-or-head mass, full engine only.
    pub p_alt: Option<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub params: GraphParams,
    /// Marked vertex as a 1-based element list.
    pub marked: Vec<usize>,
    pub engine: Engine,
    pub t_run: u64,
    pub stride: u64,
    pub rows: Vec<RunRow>,
}

impl RunReport {
    pub fn new(
        params: GraphParams,
        marked: Vec<usize>,
        engine: Engine,
        t_run: u64,
        stride: u64,
        rows: Vec<RunRow>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            params,
            marked,
            engine,
            t_run,
            stride,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(RUN_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let alt = r.p_alt.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", r.t, fmt_f64(r.p_succ), alt, fmt_f64(r.norm));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Parses the rows of a CSV file produced by [`to_csv`](Self::to_csv).
    pub fn rows_from_csv(text: &str) -> Result<Vec<RunRow>> {
        let mut lines = text.lines();
        if lines.next() != Some(RUN_CSV_HEADER) {
            return Err(WalkError::Parse(format!("expected header {RUN_CSV_HEADER:?}")));
        }
        lines
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 4 {
                    return Err(WalkError::Parse(format!("malformed row {line:?}")));
                }
                Ok(RunRow {
                    t: parse(f[0])?,
                    p_succ: parse(f[1])?,
                    p_alt: if f[2].is_empty() { None } else { Some(parse(f[2])?) },
                    norm: parse(f[3])?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub t_run: u64,
    pub p_succ: f64,
    /// `|p_succ - 1/2|`.
    pub abs_dev: f64,
    pub t_opt: u64,
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub k: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                r.t_run,
                fmt_f64(r.p_succ),
                fmt_f64(r.abs_dev),
                r.t_opt,
                fmt_f64(r.p_max)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Spectral table plus schedule, as emitted by `spectrum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub table: SpectralTable,
    pub schedule: Schedule,
}

impl SpectrumReport {
    pub fn new(table: SpectralTable, schedule: Schedule) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            table,
            schedule,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,lambda,multiplicity,p_sq,omega,shell_size,a,b,c,t_run,target_phase\n");
        for r in &self.table.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.ell,
                r.lambda,
                r.multiplicity,
                fmt_f64(r.p_sq),
                r.omega.map(fmt_f64).unwrap_or_default(),
                r.shell_size,
                r.intersection.a,
                r.intersection.b,
                r.intersection.c,
                self.schedule.t_run,
                fmt_f64(self.schedule.target_phase)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| WalkError::Parse(format!("invalid number {s:?}")))
}

/// Writes `contents` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| WalkError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(rows: Vec<RunRow>) -> RunReport {
        RunReport::new(GraphParams::new(8, 2).unwrap(), vec![1, 2], Engine::Full, 6, 1, rows)
    }

    #[test]
    fn csv_layout() {
        let r = report(vec![
            RunRow { t: 0, p_succ: 1.0 / 28.0, p_alt: Some(2.0 / 28.0), norm: 1.0 },
            RunRow { t: 1, p_succ: 0.25, p_alt: None, norm: 1.0 },
        ]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,p_succ,p_alt,norm");
        assert_eq!(lines[1], "0,3.5714285714285712e-2,7.1428571428571425e-2,1.0000000000000000e0");
        assert_eq!(lines[2], "1,2.5000000000000000e-1,,1.0000000000000000e0");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_has_schema_version() {
        let r = report(vec![]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["engine"], "full");
    }

    #[test]
    fn bad_csv_rejected() {
        assert!(RunReport::rows_from_csv("x,y\n").is_err());
        assert!(RunReport::rows_from_csv("t,p_succ,p_alt,norm\n1,2\n").is_err());
        assert!(RunReport::rows_from_csv("t,p_succ,p_alt,norm\n1,a,,1\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(values in prop::collection::vec((any::<f64>(), prop::option::of(any::<f64>()), any::<f64>()), 0..40)) {
            let rows: Vec<RunRow> = values
                .into_iter()
                .enumerate()
                .filter(|(_, (p, a, n))| p.is_finite() && a.is_none_or(f64::is_finite) && n.is_finite())
                .map(|(t, (p_succ, p_alt, norm))| RunRow { t: t as u64, p_succ, p_alt, norm })
                .collect();
            let r = report(rows.clone());
            let back = RunReport::rows_from_csv(&r.to_csv()).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in back.iter().zip(&rows) {
                prop_assert_eq!(a.t, b.t);
                prop_assert_eq!(a.p_succ.to_bits(), b.p_succ.to_bits());
                prop_assert_eq!(a.p_alt.map(f64::to_bits), b.p_alt.map(f64::to_bits));
                prop_assert_eq!(a.norm.to_bits(), b.norm.to_bits());
            }
        }
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
    }
}

//! Implementations behind the `spectrum`, `simulate`, `sweep`, and
//! `validate` subcommands.

use crate::arc_engine::{ArcWalk, SearchConfig, DEFAULT_ARC_CAPACITY};
use crate::error::{Result, WalkError};
use crate::johnson::{parse_subset, GraphParams, JohnsonGraph};
use crate::oracle::{certify, Certificate};
use crate::reduced::{build_reduced, evolve, find_peak, success_probability};
use crate::reports::{Engine, RunReport, SpectrumReport, SweepReport, SweepRow, SCHEMA_VERSION};
use crate::spectral::{run_time, SpectralTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Process exit code for an error: 1 certification, 2 usage, 3 capacity.
pub fn exit_code(err: &WalkError) -> i32 {
    match err {
        WalkError::Capacity { .. } => 3,
        WalkError::Precondition(_)
        | WalkError::Degenerate { .. }
        | WalkError::Domain(_)
        | WalkError::Parse(_) => 2,
        _ => 1,
    }
}

pub fn cmd_spectrum(n: usize, k: usize, format: Format) -> Result<String> {
    let params = GraphParams::new(n, k)?;
    let report = SpectrumReport::new(SpectralTable::new(&params)?, run_time(&params));
    match format {
        Format::Csv => Ok(report.to_csv()),
        Format::Json => report.to_json(),
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub n: usize,
    pub k: usize,
    pub engine: Engine,
    /// Defaults to `2 t_run`.
    pub steps: Option<u64>,
    /// Comma-separated 1-based elements; defaults to `{1..k}`.
    pub marked: Option<String>,
    pub stride: u64,
    pub force_capacity: bool,
}

pub fn cmd_simulate(opts: &SimulateOptions) -> Result<RunReport> {
    let params = GraphParams::new(opts.n, opts.k)?;
    let steps = opts.steps.unwrap_or(2 * run_time(&params).t_run);
    match opts.engine {
        Engine::Reduced => crate::reduced::evolve_and_record(&params, steps, opts.stride),
        Engine::Full => {
            let capacity = if opts.force_capacity { u128::MAX } else { DEFAULT_ARC_CAPACITY };
            let mut walk = ArcWalk::with_capacity(params, capacity)?;
            let marked = match &opts.marked {
                Some(text) => walk.graph().rank(&parse_subset(text, &params)?)?,
                None => 0,
            };
            walk.evolve_and_record(&SearchConfig {
                params,
                marked,
                steps,
                stride: opts.stride,
            })
        }
    }
}

/// Marked-vertex validation for the reduced engine, which ignores it.
pub fn check_marked(n: usize, k: usize, marked: &str) -> Result<()> {
    let params = GraphParams::new(n, k)?;
    let subset = parse_subset(marked, &params)?;
    if params.vertex_count <= usize::MAX as u128 {
        JohnsonGraph::new(params).and_then(|g| g.rank(&subset))?;
    }
    Ok(())
}

/// Reduced-engine success probability at `t_run` for every `n`, plus the
/// empirical optimum over `[0, 2 t_run]`.
pub fn cmd_sweep(k: usize, n_list: &[usize]) -> Result<SweepReport> {
    if n_list.is_empty() {
        return Err(WalkError::Domain("sweep needs at least one n".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let rows = ns
        .into_iter()
        .map(|n| {
            let params = GraphParams::new(n, k)?;
            let t_run = run_time(&params).t_run;
            let (op, target, init) = build_reduced(&params)?;
            let p_succ = success_probability(&target, &evolve(&op, &init, t_run));
            let (t_opt, p_max) = find_peak(&op, &target, 2 * t_run);
            Ok(SweepRow {
                n,
                t_run,
                p_succ,
                abs_dev: (p_succ - 0.5).abs(),
                t_opt,
                p_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        k,
        rows,
    })
}

pub fn cmd_validate(n: usize, k: usize, tol: f64) -> Result<Certificate> {
    certify(&GraphParams::new(n, k)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_j62() {
        let json = cmd_spectrum(6, 2, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = v["table"]["rows"].as_array().unwrap();
        let lam: Vec<i64> = rows.iter().map(|r| r["lambda"].as_i64().unwrap()).collect();
        let mult: Vec<u64> = rows.iter().map(|r| r["multiplicity"].as_u64().unwrap()).collect();
        assert_eq!(lam, vec![8, 2, -2]);
        assert_eq!(mult, vec![1, 5, 9]);
        assert_eq!(v["schedule"]["t_run"], 4);
        let csv = cmd_spectrum(6, 2, Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn spectrum_rejections() {
        let e = cmd_spectrum(2, 1, Format::Csv).unwrap_err();
        assert!(e.to_string().contains("degenerate instance"));
        assert_eq!(exit_code(&e), 2);
        let e = cmd_spectrum(5, 3, Format::Csv).unwrap_err();
        assert!(e.to_string().contains("requires n ≥ 2k"));
    }

    #[test]
    fn simulate_engines_agree() {
        let base = SimulateOptions {
            n: 8,
            k: 2,
            engine: Engine::Full,
            steps: Some(50),
            marked: None,
            stride: 1,
            force_capacity: false,
        };
        let full = cmd_simulate(&base).unwrap();
        let reduced = cmd_simulate(&SimulateOptions { engine: Engine::Reduced, ..base.clone() }).unwrap();
        assert_eq!(full.rows.len(), 51);
        for (a, b) in full.rows.iter().zip(&reduced.rows) {
            assert!((a.p_succ - b.p_succ).abs() < 1e-10);
        }
    }

    #[test]
    fn simulate_capacity() {
        let opts = SimulateOptions {
            n: 40,
            k: 4,
            engine: Engine::Full,
            steps: Some(1),
            marked: None,
            stride: 1,
            force_capacity: false,
        };
        let e = cmd_simulate(&opts).unwrap_err();
        assert_eq!(exit_code(&e), 3);
    }

    #[test]
    fn sweep_k2() {
        let r = cmd_sweep(2, &[1600, 100, 400]).unwrap();
        let t: Vec<u64> = r.rows.iter().map(|x| x.t_run).collect();
        assert_eq!(t, vec![78, 314, 1256]);
        assert!(r.rows.windows(2).all(|w| w[1].abs_dev < w[0].abs_dev));
        assert!(cmd_sweep(2, &[]).is_err());
        assert!(cmd_sweep(3, &[5]).is_err());
    }

    #[test]
    fn validate_exit_paths() {
        assert!(cmd_validate(4, 2, 1e-10).unwrap().passed);
        assert!(!cmd_validate(6, 2, 1e-30).unwrap().passed);
        assert_eq!(exit_code(&cmd_validate(30, 3, 1e-10).unwrap_err()), 3);
    }
}

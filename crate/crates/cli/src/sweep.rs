//! Parameter sweeps over (γ, p) with a fixed datum per point.

use crate::config::{SweepFile, SweepTarget};
use gfl_core::memsolver::{run, OutcomeKind, SimConfig};
use gfl_core::testfn::critical_exponents;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub p: f64,
    pub outcome: OutcomeKind,
    /// Blow-up time, or the horizon for the other outcomes.
    pub t_end: f64,
    pub config_hash: String,
}

/// First 16 hex digits of the SHA-256 of the point's JSON config.
pub fn config_hash(config: &SimConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

pub fn point_config(base: &SimConfig, target: SweepTarget, gamma: f64, p: f64) -> SimConfig {
    let mut cfg = base.clone();
    cfg.gamma = gamma;
    match target {
        SweepTarget::P1 => cfg.p1 = p,
        SweepTarget::P2 => cfg.p2 = p,
        SweepTarget::Both => {
            cfg.p1 = p;
            cfg.p2 = p;
        }
    }
    cfg
}

fn classify(cfg: &SimConfig) -> OutcomeKind {
    match catch_unwind(AssertUnwindSafe(|| run(cfg.clone()))) {
        Ok(Ok(outcome)) => outcome.kind,
        Ok(Err(e)) => OutcomeKind::Undecided { reason: e.to_string() },
        Err(_) => OutcomeKind::Undecided { reason: "worker panicked".into() },
    }
}

/// Runs every grid point on a pool of `workers` threads. Rows come back in
/// grid order (γ outer, p inner) whatever the completion order.
pub fn run_sweep(file: &SweepFile, workers: usize) -> anyhow::Result<Vec<SweepRow>> {
    file.sweep.validate()?;
    let points: Vec<(f64, f64)> = file
        .sweep
        .gamma_values()
        .into_iter()
        .flat_map(|g| file.sweep.p_values().into_iter().map(move |p| (g, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(gamma, p)| {
                let cfg = point_config(&file.base, file.sweep.target, gamma, p);
                let outcome = classify(&cfg);
                let t_end = outcome.t_star().unwrap_or(cfg.horizon);
                SweepRow { gamma, p, outcome, t_end, config_hash: config_hash(&cfg) }
            })
            .collect()
    });
    Ok(rows)
}

fn csv_field(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

pub fn write_sweep_csv<W: Write>(file: &SweepFile, rows: &[SweepRow], mut w: W) -> io::Result<()> {
    let b = &file.base;
    writeln!(w, "# gfl sweep, schema_version {}", file.schema_version)?;
    writeln!(
        w,
        "# target {}, dims N={} k={}, kappa1 {}, kappa2 {}, datum {}",
        serde_json::to_string(&file.sweep.target).expect("serializes"),
        b.dims.n(),
        b.dims.k(),
        b.kappa1,
        b.kappa2,
        serde_json::to_string(&b.initial).expect("serializes")
    )?;
    writeln!(w, "# one fixed datum per point: BlownUp rows are evidence of blow-up, GlobalToHorizon rows are not counterexamples")?;
    writeln!(w, "gamma,p,outcome,t_end,config_hash,p_c1,p_0,inv_gamma,detail")?;
    for r in rows {
        let (p_c1, p_0, inv_gamma) = match critical_exponents(b.dims, r.gamma) {
            Ok(c) => (c.p_c1, c.p_0, c.inv_gamma),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        let detail = match &r.outcome {
            OutcomeKind::Undecided { reason } => csv_field(reason),
            _ => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.gamma,
            r.p,
            r.outcome.label(),
            r.t_end,
            r.config_hash,
            p_c1,
            p_0,
            inv_gamma,
            detail
        )?;
    }
    Ok(())
}

//! Batch experiments on top of `gfl-core`: verification suites, single
//! simulations, parameter sweeps and decay fits.

pub mod config;
pub mod sweep;
pub mod verify;

use anyhow::Context;
use config::{OdeFile, SimulateFile, SweepFile};
use gfl_core::grushin::GrushinDims;
use gfl_core::memsolver::{diffusion_decay, run, write_field_csv, DecayFit, DecaySetup};
use gfl_core::odereduce::run_ode;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// `OUTCOME <kind> <t_star>`; `-` stands in for a missing blow-up time.
pub fn outcome_line(label: &str, t_star: Option<f64>) -> String {
    match t_star {
        Some(t) => format!("OUTCOME {label} {t}"),
        None => format!("OUTCOME {label} -"),
    }
}

/// Runs a PDE config file; writes `series.csv` and `final.csv`.
pub fn simulate(path: &Path) -> anyhow::Result<String> {
    let file: SimulateFile = config::load(path)?;
    let outcome = run(file.config)?;
    let mut series = create(&file.output_dir, "series.csv")?;
    outcome.write_series_csv(&mut series)?;
    series.flush()?;
    let mut last = create(&file.output_dir, "final.csv")?;
    match &outcome.final_field {
        Some(field) => write_field_csv(field, &mut last)?,
        None => writeln!(last, "r,s,u")?,
    }
    last.flush()?;
    Ok(outcome_line(outcome.kind.label(), outcome.kind.t_star()))
}

/// Runs a scalar reduction config file; `final.csv` holds the last state.
pub fn simulate_ode(path: &Path) -> anyhow::Result<String> {
    let file: OdeFile = config::load(path)?;
    let outcome = run_ode(&file.config)?;
    let mut series = create(&file.output_dir, "series.csv")?;
    outcome.write_csv(&mut series)?;
    series.flush()?;
    let mut last = create(&file.output_dir, "final.csv")?;
    let end = outcome.series.last().expect("series starts with the datum");
    writeln!(last, "t,f")?;
    writeln!(last, "{},{}", end.t, end.f)?;
    last.flush()?;
    Ok(outcome_line(outcome.kind.label(), outcome.kind.t_star()))
}

/// Runs a sweep file; returns the path of the written `sweep.csv`.
pub fn sweep(path: &Path) -> anyhow::Result<PathBuf> {
    let file: SweepFile = config::load(path)?;
    let workers = config::worker_count(file.workers)?;
    let rows = sweep::run_sweep(&file, workers)?;
    let mut out = create(&file.output_dir, "sweep.csv")?;
    sweep::write_sweep_csv(&file, &rows, &mut out)?;
    out.flush()?;
    Ok(file.output_dir.join("sweep.csv"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub dims: GrushinDims,
    pub fit: DecayFit,
    /// Slope on the grid with both resolutions doubled, when requested.
    pub refined_slope: Option<f64>,
}

impl DecayReport {
    pub fn relative_deviation(&self) -> f64 {
        ((self.fit.slope - self.fit.expected) / self.fit.expected).abs()
    }
}

pub fn decay(dims: GrushinDims, refine: bool) -> anyhow::Result<DecayReport> {
    let setup = DecaySetup::standard(dims);
    let fit = diffusion_decay(&setup)?;
    let refined_slope = if refine {
        let mut fine = setup;
        fine.grid.n_r *= 2;
        fine.grid.n_s *= 2;
        Some(diffusion_decay(&fine)?.slope)
    } else {
        None
    };
    Ok(DecayReport { dims, fit, refined_slope })
}

pub fn write_decay_csv<W: Write>(report: &DecayReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,sup_norm")?;
    for (t, s) in &report.fit.samples {
        writeln!(w, "{t},{s}")?;
    }
    Ok(())
}

/// Runs [`decay`] and writes `decay_N{n}k{k}.csv` into `out`.
pub fn decay_to(dims: GrushinDims, refine: bool, out: &Path) -> anyhow::Result<DecayReport> {
    let report = decay(dims, refine)?;
    let mut w = create(out, &format!("decay_N{}k{}.csv", dims.n(), dims.k()))?;
    write_decay_csv(&report, &mut w)?;
    w.flush()?;
    Ok(report)
}

/// Runs the verification suites and writes `verify_report.txt` into `out`.
pub fn verify_to(only: Option<verify::Module>, tol_scale: f64, out: &Path) -> anyhow::Result<verify::Report> {
    let report = verify::run(only, tol_scale);
    let mut w = create(out, "verify_report.txt")?;
    report.write(&mut w)?;
    w.flush()?;
    Ok(report)
}

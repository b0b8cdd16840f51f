use anyhow::bail;
use clap::{Parser, Subcommand};
use gfl_cli::verify::Module;
use gfl_core::grushin::GrushinDims;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gfl", version, about = "Blow-up experiments for the Grushin heat equation with memory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the self-check suites and write verify_report.txt.
    Verify {
        #[arg(long, value_enum)]
        only: Option<Module>,
        /// Multiplies every error tolerance (lower bounds are left alone).
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one simulation from a JSON config.
    Simulate {
        config: PathBuf,
        /// Treat the config as a scalar reduction instead of a PDE.
        #[arg(long)]
        ode: bool,
    },
    /// Classify a (γ, p) grid from a JSON sweep file.
    Sweep { config: PathBuf },
    /// Fit the pure-diffusion sup-norm decay slope.
    Decay {
        #[arg(long, value_parser = parse_dims, default_value = "1,1")]
        dims: GrushinDims,
        /// Repeat on a grid with doubled resolution and report the change.
        #[arg(long)]
        refine: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_dims(text: &str) -> anyhow::Result<GrushinDims> {
    let Some((n, k)) = text.split_once(',') else {
        bail!("expected N,k");
    };
    Ok(GrushinDims::new(n.trim().parse()?, k.trim().parse()?)?)
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Verify { only, tol_scale, out } => {
            if tol_scale.is_nan() || tol_scale <= 0.0 {
                bail!("--tol-scale must be positive");
            }
            let report = gfl_cli::verify_to(only, tol_scale, &out)?;
            report.write(std::io::stdout().lock())?;
            let failed = report.checks.iter().filter(|c| !c.passed()).count();
            println!("{} checks, {failed} failed", report.checks.len());
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Simulate { config, ode } => {
            let line = if ode { gfl_cli::simulate_ode(&config)? } else { gfl_cli::simulate(&config)? };
            println!("{line}");
        }
        Command::Sweep { config } => {
            let path = gfl_cli::sweep(&config)?;
            println!("wrote {}", path.display());
        }
        Command::Decay { dims, refine, out } => {
            let r = gfl_cli::decay_to(dims, refine, &out)?;
            println!(
                "SLOPE N={} k={} slope={:.4} expected={:.4} rel_dev={:.4}",
                dims.n(),
                dims.k(),
                r.fit.slope,
                r.fit.expected,
                r.relative_deviation()
            );
            if let Some(fine) = r.refined_slope {
                println!("REFINED slope={fine:.4} rel_change={:.4}", ((fine - r.fit.slope) / r.fit.slope).abs());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

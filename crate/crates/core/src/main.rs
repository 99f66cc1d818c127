use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pspec_core::eigen::{solve_first_eigen, SolveOptions};
use pspec_core::runner::{self, RunConfig};
use pspec_core::{rasterize_shape, Result};

#[derive(Parser)]
#[command(
    name = "pspec",
    version,
    about = "Principal frequencies of the p-Laplacian and their geometric bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the bound suite and write report files.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exponents, overriding the config.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long)]
        h: Option<f64>,
        /// Built-in shape names, overriding the config catalog.
        #[arg(long, value_delimiter = ',')]
        shape: Option<Vec<String>>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// First eigenvalue of one shape.
    Eigen {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = runner::DEFAULT_H)]
        h: f64,
        #[arg(long, default_value_t = SolveOptions::default().tol)]
        tol: f64,
    },
    /// Capacity radius and matching Lieb radius of one shape.
    Capacity {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = runner::DEFAULT_H)]
        h: f64,
    },
    /// Nodal-length scaling fit on a symmetric shape.
    Nodal {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        scales: Vec<f64>,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        h: f64,
    },
    /// List the built-in shapes.
    Catalog,
}

fn configure_threads() {
    if let Some(n) = std::env::var("PSPEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Verify {
            config,
            p,
            h,
            shape,
            output_dir,
        } => {
            let mut cfg = match config {
                Some(path) => RunConfig::load(&path)?,
                None => RunConfig::default(),
            };
            if let Some(ps) = p {
                cfg.ps = ps;
            }
            if let Some(h) = h {
                cfg.h = h;
            }
            if let Some(names) = shape {
                cfg.catalog = names
                    .iter()
                    .map(|n| runner::shape_by_name(n))
                    .collect::<Result<_>>()?;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let (report, files) = runner::run(&cfg)?;
            let held = report
                .reports
                .iter()
                .filter(|r| !r.skipped && r.satisfied)
                .count();
            let skipped = report.reports.iter().filter(|r| r.skipped).count();
            let violated: Vec<_> = report
                .reports
                .iter()
                .filter(|r| !r.skipped && !r.satisfied)
                .collect();
            println!(
                "{held} satisfied, {} violated, {skipped} skipped, {} errors",
                violated.len(),
                report.errors.len()
            );
            for r in violated {
                println!(
                    "VIOLATED {} {} p={} lhs={} rhs={} slack={}",
                    r.id, r.domain_label, r.p, r.lhs, r.rhs, r.slack
                );
            }
            for e in &report.errors {
                println!("ERROR {} p={} {}", e.domain, e.p, e.message);
            }
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(report.exit_code())
        }
        Command::Eigen { shape, p, h, tol } => {
            let d = rasterize_shape(&runner::shape_by_name(&shape)?.spec, h)?;
            let opts = SolveOptions {
                tol,
                ..SolveOptions::default()
            };
            let r = solve_first_eigen(&d, p, &opts)?;
            print!("{}", runner::to_canonical_json(&r.record())?);
            Ok(0)
        }
        Command::Capacity { shape, gamma, p, h } => {
            let r = runner::capacity_study(&shape, p, gamma, h)?;
            print!("{}", runner::to_canonical_json(&r)?);
            Ok(0)
        }
        Command::Nodal {
            shape,
            p,
            scales,
            h,
        } => {
            let r = runner::nodal_study(&shape, p, &scales, h)?;
            print!("{}", runner::to_canonical_json(&r)?);
            Ok(if r.vanishing { 0 } else { 1 })
        }
        Command::Catalog => {
            print!("{}", runner::describe_catalog());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! `darcyup`: generate, solve, upscale and survey tensor-permeability models.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use darcy_upscale::model_gen::{generate_model_detailed, ChannelSpec, ModelParams, XyMode};
use darcy_upscale::solver::{DarcyProblem, Scheme};
use darcy_upscale::spectral::{verify_low_mode_exactness, SpectralOperator};
use darcy_upscale::survey::{emit_report, rebuild, run_survey, SurveyConfig, SurveyReport};
use darcy_upscale::upscale::{run_plan, KkVariant, Method, UpscalePlan};
use darcy_upscale::{io, Error};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "darcyup", version, about = "Darcy flow, permeability upscaling and error surveys")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random percolating channel model.
    Generate {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "zero")]
        xy_mode: XyMode,
        /// Channel generator settings as JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for the pressure and flow rate.
    Solve {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "galerkin")]
        scheme: SchemeArg,
    },
    /// Decimate a field to a coarser grid.
    Upscale {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long, default_value_t = 2)]
        n_block: usize,
        #[arg(long, default_value_t = 32)]
        n_target: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timing: Option<PathBuf>,
        /// Use the KK formula exactly as historically printed.
        #[arg(long)]
        kk_as_printed: bool,
    },
    /// Compare reduced and full spectral solutions on a small periodic field.
    Oracle {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 2)]
        kc: i64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run an ensemble survey and write its artifacts.
    Survey {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate survey artifacts from a stored report.json.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SchemeArg {
    Galerkin,
    Expanded,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Galerkin => Scheme::Galerkin,
            SchemeArg::Expanded => Scheme::Expanded,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_ABORTED: u8 = 3;

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(n: usize, seed: u64, xy_mode: XyMode, spec: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let channel: ChannelSpec = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ChannelSpec::default(),
    };
    let model = generate_model_detailed(&ModelParams::new(n, seed, channel.with_xy_mode(xy_mode))?)?;
    io::write_field(&model.field, &out)?;
    eprintln!(
        "{}: {n}x{n}, {} pieces, {} attempt(s)",
        out.display(),
        model.pieces.len(),
        model.attempts
    );
    Ok(())
}

fn solve(field: PathBuf, out: Option<PathBuf>, report: Option<PathBuf>, scheme: Scheme) -> Result<()> {
    let f = io::read_field(&field)?;
    let r = DarcyProblem::with_scheme(scheme).solve(&f)?;
    if let Some(p) = out {
        io::write_pressure(r.phi(), p)?;
    }
    if let Some(p) = report {
        write_json(&p, &r)?;
    }
    println!("f = {:.12e}  validation_ratio = {:.6}", r.f, r.validation_ratio);
    Ok(())
}

#[derive(Serialize)]
struct Timing<'a> {
    method: Method,
    n_block: usize,
    n_target: usize,
    sweeps: &'a [darcy_upscale::upscale::SweepTiming],
    total_s: f64,
    max_asymmetry: f64,
    notes: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn upscale(
    field: PathBuf,
    method: Method,
    n_block: usize,
    n_target: usize,
    out: PathBuf,
    timing: Option<PathBuf>,
    kk_as_printed: bool,
) -> Result<()> {
    let f = io::read_field(&field)?;
    let variant = if kk_as_printed {
        KkVariant::AsPrinted
    } else {
        KkVariant::Corrected
    };
    let plan = UpscalePlan::new(method, n_block, n_target)?.with_kk_variant(variant);
    let up = run_plan(&f, &plan)?;
    let notes = plan.notes();
    for n in &notes {
        eprintln!("note: {n}");
    }
    if let Some(p) = timing {
        write_json(
            &p,
            &Timing {
                method,
                n_block,
                n_target,
                sweeps: &up.timings,
                total_s: up.timings.iter().map(|t| t.wall_time_s).sum(),
                max_asymmetry: up.max_asymmetry,
                notes,
            },
        )?;
    }
    let sweeps = up.timings.len();
    io::write_field(up.field(), &out)?;
    eprintln!("{}: {} sweep(s) to {n_target}x{n_target}", out.display(), sweeps);
    Ok(())
}

fn oracle(field: PathBuf, kc: i64, report: Option<PathBuf>) -> Result<()> {
    let f = io::read_field(&field)?;
    // Unit source on every retained mode except the mean.
    let source: Vec<_> = (-kc..=kc)
        .flat_map(|q| (-kc..=kc).map(move |p| (p, q)))
        .filter(|&m| m != (0, 0) && SpectralOperator::is_low(m, kc))
        .map(|m| (m, Complex64::new(1.0, 0.0)))
        .collect();
    let r = verify_low_mode_exactness(&f, kc, &source)?;
    match report {
        Some(p) => write_json(&p, &r)?,
        None => println!("{}", serde_json::to_string_pretty(&r)?),
    }
    eprintln!("relative deviation {:.3e}", r.relative_deviation);
    Ok(())
}

fn survey(config: PathBuf, out: PathBuf) -> Result<ExitCode> {
    let cfg = match SurveyConfig::from_json_file(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let report = match run_survey(&cfg) {
        Ok(r) => r,
        Err(e @ Error::Inadmissible { .. }) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_ABORTED));
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
        Err(e) => return Err(e.into()),
    };
    for p in emit_report(&report, &out)? {
        eprintln!("wrote {}", p.display());
    }
    println!(
        "{} models, {} admissible",
        report.summary.models, report.summary.admissible
    );
    for p in &report.summary.panels {
        println!(
            "{:>4} {:>4}: median eps {:+8.3}  median |eps| {:7.3}",
            p.method.name(),
            p.resolution,
            p.median_epsilon,
            p.median_abs_epsilon
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report(input: PathBuf, out: PathBuf) -> Result<()> {
    let stored = SurveyReport::from_json_file(&input)?;
    for p in emit_report(&rebuild(&stored)?, &out)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Generate {
            n,
            seed,
            xy_mode,
            spec,
            out,
        } => generate(n, seed, xy_mode, spec, out)?,
        Cmd::Solve {
            field,
            out,
            report,
            scheme,
        } => solve(field, out, report, scheme.into())?,
        Cmd::Upscale {
            field,
            method,
            n_block,
            n_target,
            out,
            timing,
            kk_as_printed,
        } => upscale(field, method, n_block, n_target, out, timing, kk_as_printed)?,
        Cmd::Oracle { field, kc, report } => oracle(field, kc, report)?,
        Cmd::Survey { config, out } => return survey(config, out),
        Cmd::Report { input, out } => report(input, out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

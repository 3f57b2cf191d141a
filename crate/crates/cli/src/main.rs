use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use iscs::experiment::{mean_std, run_experiment, ExperimentConfig};
use iscs::io::{read_volume, write_volume};
use iscs::metrics::{evaluate, Axis};
use iscs::noise::{angle_concentration_test, annulus_violation_fraction};
use iscs::phantom::{generate_phantom, PhantomKind, PhantomSpec};
use iscs::rng::RngState;
use iscs::Dims;

#[derive(Parser)]
#[command(name = "iscs", version, about = "Slice-wise diffusion reconstruction of 3D volumes with consistent noise")]
struct Cli {
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic phantom as an IVF1 volume.
    Phantom(PhantomArgs),
    /// Run an experiment configuration.
    Run(RunArgs),
    /// Run the Gaussian annulus and angle concentration checks.
    NoiseCheck(NoiseCheckArgs),
    /// Compute metrics of a reconstruction against a reference volume.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct PhantomArgs {
    /// Phantom spec as JSON; overrides the shape flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
    /// File name inside the output directory.
    #[arg(long, default_value = "phantom.ivf")]
    name: String,
    #[arg(long, default_value = "varying_ellipses", value_parser = parse_kind)]
    kind: PhantomKind,
    #[arg(long, default_value_t = 48)]
    slices: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 64)]
    width: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `outdir`.
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Comma-separated seeds; overrides the config's `seeds`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Args)]
struct NoiseCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4096)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    draws: usize,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    recon: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    data_range: f64,
}

fn parse_kind(s: &str) -> std::result::Result<PhantomKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown phantom kind '{s}'"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Phantom(a) => phantom(a, cli.quiet),
        Command::Run(a) => run(a, cli.quiet),
        Command::NoiseCheck(a) => noise_check(a, cli.quiet),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn phantom(a: PhantomArgs, quiet: bool) -> Result<ExitCode> {
    let spec = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<PhantomSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => PhantomSpec::new(a.kind, Dims::new(a.slices, a.height, a.width)),
    };
    let volume = generate_phantom(&spec)?;
    std::fs::create_dir_all(&a.outdir)?;
    let path = a.outdir.join(&a.name);
    write_volume(&volume, &path)?;
    if !quiet {
        println!("wrote {} ({})", path.display(), volume.dims());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(a: RunArgs, quiet: bool) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    if let Some(seeds) = a.seeds {
        cfg.seeds = seeds;
    }
    resolve_prior_paths(&mut cfg, &a.config);
    cfg.validate()?;
    let outdir = match a.outdir.or_else(|| cfg.outdir.clone()) {
        Some(d) => d,
        None => bail!("no output directory: pass --outdir or set `outdir` in the config"),
    };
    let outcome = run_experiment(&cfg, &outdir)?;
    if !quiet {
        println!("{} runs written to {}", outcome.runs.len(), outdir.display());
        for v in cfg.variants() {
            let runs: Vec<_> = outcome.runs.iter().filter(|r| r.variant == v).collect();
            let psnr: Vec<f64> = runs.iter().map(|r| r.report.axis(Axis::Axial).map_or(f64::NAN, |m| m.psnr)).collect();
            let gap: Vec<f64> = runs.iter().map(|r| r.report.abs_delta).collect();
            let (pm, ps) = mean_std(&psnr);
            let (gm, gs) = mean_std(&gap);
            println!("{:<24} psnr {pm:.2} ± {ps:.2} dB  |Δ| {gm:.6} ± {gs:.6}", v.label);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Relative prior paths are taken relative to the config file.
fn resolve_prior_paths(cfg: &mut ExperimentConfig, config_path: &Path) {
    let base = config_path.parent().unwrap_or(Path::new("."));
    for p in [&mut cfg.prior.mu, &mut cfg.prior.var].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

fn noise_check(a: NoiseCheckArgs, quiet: bool) -> Result<ExitCode> {
    let rng = RngState::new(a.seed, 0);
    let beta = 4.0;
    let frac = annulus_violation_fraction(rng.substream(0), a.dim, a.draws, beta)?;
    let stats = angle_concentration_test(rng.substream(1), a.dim, a.trials)?;
    let annulus_ok = frac <= 0.05;
    // the angle spread shrinks like 1/√d; 1.2° is the bound at d = 4096
    let std_bound = 1.2 * (4096.0 / a.dim as f64).sqrt();
    let angle_ok = (stats.mean_deg() - 90.0).abs() <= 0.2 && stats.std_deg() <= std_bound;
    if !quiet {
        let tag = |ok: bool| if ok { "PASS" } else { "FAIL" };
        println!("{} annulus: {:.3} of {} draws off by >= {beta} (<= 0.05)", tag(annulus_ok), frac, a.draws);
        println!(
            "{} angles: mean {:.3}° std {:.3}° over {} trials (|mean-90| <= 0.2, std <= {std_bound:.3})",
            tag(angle_ok),
            stats.mean_deg(),
            stats.std_deg(),
            a.trials
        );
    }
    Ok(if annulus_ok && angle_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn metrics(a: MetricsArgs) -> Result<ExitCode> {
    let recon = read_volume(&a.recon).with_context(|| format!("reading {}", a.recon.display()))?;
    let reference = read_volume(&a.reference).with_context(|| format!("reading {}", a.reference.display()))?;
    let r = evaluate(&recon, &reference, a.data_range)?;
    println!("axis,psnr,ssim,sdiff_recon,sdiff_gt,delta,abs_delta");
    for m in &r.axes {
        println!("{},{},{},{},{},{},{}", m.axis, m.psnr, m.ssim, r.sdiff_recon, r.sdiff_gt, r.delta, r.abs_delta);
    }
    Ok(ExitCode::SUCCESS)
}

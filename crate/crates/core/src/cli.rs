//! Command-line front end.
//!
//! ```text
//! typicality sweep spin-half --family half --n-min 5 --n-max 13 --out runs/
//! typicality sweep spin-one --n-min 6 --n-max 9 --samples 21 --seed 7 --out runs/
//! typicality sweep goe --labels 8:4,10:5,12:6,14:7 --samples 50 --seed 7 --out runs/
//! typicality fit --in runs/spin_one_random_interactions.jsonl --exclude-first --out fit.json
//! typicality report --in runs/
//! typicality dump-matrix --n 6 --charge 3 --out h6
//! ```
//!
//! Every flag may also come from a JSON file given with `--config`; flags on
//! the command line win.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::basis::{LocalDimension, SectorBasis};
use crate::experiments::{
    aggregate, fit_summary, parse_label, read_jsonl, run_plan, write_jsonl, write_summary_csv,
    ExperimentPlan, GridPoint, SpinHalfSector, DEFAULT_FIXED_M, DEFAULT_GOE_SAMPLES,
    DEFAULT_SPIN_ONE_SAMPLES,
};
use crate::hamiltonian::{build_sector_hamiltonian, ChainSpec, InteractionSpec, DEFAULT_THETA};

#[derive(Debug, Parser)]
#[command(
    name = "typicality",
    version,
    about = "Eigenstate typicality of spin-chain sectors"
)]
pub struct Cli {
    /// JSON file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment family and write its records as JSONL.
    Sweep {
        #[command(subcommand)]
        target: SweepTarget,
    },
    /// Fit delta ~ D^-alpha to the per-dimension means of a results file.
    Fit(FitArgs),
    /// Per-dimension summary CSV of every results file in a directory.
    Report(ReportArgs),
    /// Write a sector block as raw little-endian f64 plus a JSON header.
    DumpMatrix(DumpArgs),
}

#[derive(Debug, Subcommand)]
pub enum SweepTarget {
    SpinHalf(SpinHalfArgs),
    SpinOne(SpinOneArgs),
    Goe(GoeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum SectorFamily {
    #[value(name = "half")]
    #[serde(rename = "half")]
    Half,
    #[value(name = "half-1")]
    #[serde(rename = "half-1")]
    HalfMinusOne,
    #[value(name = "half-2")]
    #[serde(rename = "half-2")]
    HalfMinusTwo,
    #[value(name = "fixed-m")]
    #[serde(rename = "fixed-m")]
    FixedM,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run grid points one at a time instead of on the thread pool.
    #[arg(long)]
    pub serial: bool,
    /// Also write each sector's spectrum as CSV under <out>/spectra.
    #[arg(long)]
    pub dump_spectra: bool,
}

#[derive(Debug, Args)]
pub struct SpinHalfArgs {
    #[arg(long, value_enum)]
    pub family: Option<SectorFamily>,
    /// Up-spin count for `--family fixed-m`.
    #[arg(long)]
    pub fixed_m: Option<usize>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Interaction angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpinOneArgs {
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GoeArgs {
    /// Sector labels `N:M`, comma separated; each sets D = C(N, M).
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Leave the smallest dimension out of the fit.
    #[arg(long)]
    pub exclude_first: bool,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub n: usize,
    /// Up-spin count (spin-1/2) or magnetization (spin-1).
    #[arg(long, allow_negative_numbers = true)]
    pub charge: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Spin-1 couplings `a12,a13,a23`; selects a spin-1 chain.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub spin_one: Option<Vec<f64>>,
    /// Output prefix; writes `<out>.bin` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Values read from `--config`. Field names follow the long flags with `_`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<SectorFamily>,
    pub fixed_m: Option<usize>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub theta: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub labels: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub serial: Option<bool>,
    pub dump_spectra: Option<bool>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub exclude_first: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file)
        .with_context(|| format!("--{name} is required"))
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Sweep { target } => sweep(target, cfg),
        Command::Fit(args) => fit(args, cfg),
        Command::Report(args) => report(args, cfg),
        Command::DumpMatrix(args) => dump_matrix(args),
    }
}

fn sweep(target: SweepTarget, cfg: FileConfig) -> Result<()> {
    let (mut plan, common) = match target {
        SweepTarget::SpinHalf(a) => {
            let family = required(a.family, cfg.family, "family")?;
            let sector = match family {
                SectorFamily::Half => SpinHalfSector::Half,
                SectorFamily::HalfMinusOne => SpinHalfSector::HalfMinusOne,
                SectorFamily::HalfMinusTwo => SpinHalfSector::HalfMinusTwo,
                SectorFamily::FixedM => {
                    SpinHalfSector::Fixed(a.fixed_m.or(cfg.fixed_m).unwrap_or(DEFAULT_FIXED_M))
                }
            };
            let n_min = required(a.n_min, cfg.n_min, "n-min")?;
            let n_max = required(a.n_max, cfg.n_max, "n-max")?;
            let theta = a.theta.or(cfg.theta).unwrap_or(DEFAULT_THETA);
            (
                ExperimentPlan::spin_half(sector, n_min, n_max, theta),
                a.common,
            )
        }
        SweepTarget::SpinOne(a) => {
            let n_min = required(a.n_min, cfg.n_min, "n-min")?;
            let n_max = required(a.n_max, cfg.n_max, "n-max")?;
            let samples = a
                .samples
                .or(cfg.samples)
                .unwrap_or(DEFAULT_SPIN_ONE_SAMPLES);
            let seed = required(a.seed, cfg.seed, "seed")?;
            (
                ExperimentPlan::spin_one(n_min, n_max, samples, seed),
                a.common,
            )
        }
        SweepTarget::Goe(a) => {
            let labels = if a.labels.is_empty() {
                cfg.labels.clone().unwrap_or_default()
            } else {
                a.labels
            };
            let grid = labels
                .iter()
                .map(|l| parse_label(l))
                .collect::<Result<Vec<GridPoint>, _>>()?;
            let samples = a.samples.or(cfg.samples).unwrap_or(DEFAULT_GOE_SAMPLES);
            let seed = required(a.seed, cfg.seed, "seed")?;
            (ExperimentPlan::goe(&grid, samples, seed), a.common)
        }
    };
    let out = required(common.out, cfg.out, "out")?;
    plan.parallel = !(common.serial || cfg.serial.unwrap_or(false));
    if common.dump_spectra || cfg.dump_spectra.unwrap_or(false) {
        plan.spectrum_dir = Some(out.join("spectra"));
    }
    let path = out.join(format!("{}.jsonl", plan.family.name()));
    plan.output = Some(path.clone());
    plan.validate()?;

    let run = run_plan(&plan)?;
    write_jsonl(&path, &run.records).with_context(|| format!("writing {}", path.display()))?;
    let failed = run.records.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "wrote {} records to {} ({} failed)",
        run.records.len(),
        path.display(),
        failed
    );
    for r in run.records.iter().filter(|r| !r.is_ok()) {
        eprintln!(
            "  N={} charge={} sample={}: {}",
            r.chain_length,
            r.charge,
            r.sample,
            r.error.as_deref().unwrap_or("no result")
        );
    }
    Ok(())
}

fn fit(args: FitArgs, cfg: FileConfig) -> Result<()> {
    let input = required(args.input, cfg.input, "in")?;
    let records = read_jsonl(&input).with_context(|| format!("reading {}", input.display()))?;
    let rows = aggregate(&records)?;
    let exclude_first = args.exclude_first || cfg.exclude_first.unwrap_or(false);
    let fit = fit_summary(&rows, exclude_first)?;
    let text = serde_json::to_string_pretty(&fit)?;
    match args.out.or(cfg.out) {
        Some(path) => {
            fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn report(args: ReportArgs, cfg: FileConfig) -> Result<()> {
    let dir = required(args.input, cfg.input, "in")?;
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .jsonl files in {}", dir.display());
    }
    let mut records = Vec::new();
    for f in &files {
        records.extend(read_jsonl(f).with_context(|| format!("reading {}", f.display()))?);
    }
    let rows = aggregate(&records)?;
    match args.out {
        Some(path) => {
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_summary_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_summary_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn dump_matrix(args: DumpArgs) -> Result<()> {
    let spec = match &args.spin_one {
        Some(a) if a.len() != 3 => bail!("--spin-one takes exactly 3 values, got {}", a.len()),
        Some(a) => ChainSpec::spin_one(
            args.n,
            InteractionSpec::SpinOneMatrix {
                a12: a[0],
                a13: a[1],
                a23: a[2],
            },
        ),
        None => ChainSpec::spin_half(args.n, args.theta.unwrap_or(DEFAULT_THETA)),
    };
    let local: LocalDimension = spec.local_dimension();
    let basis = Arc::new(SectorBasis::new(args.n, local, args.charge)?);
    let h = build_sector_hamiltonian(&spec, basis)?;
    let dim = h.matrix.dim();

    let bin = args.out.with_extension("bin");
    let mut w = BufWriter::new(
        fs::File::create(&bin).with_context(|| format!("creating {}", bin.display()))?,
    );
    for x in h.matrix.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    let header = json!({
        "N": args.n,
        "local_dim": local.value(),
        "charge": args.charge,
        "D": dim,
        "layout": "row-major f64 little-endian",
        "interaction": spec.interaction,
    });
    let head = args.out.with_extension("json");
    fs::write(&head, serde_json::to_string_pretty(&header)? + "\n")?;
    eprintln!("wrote {}x{} block to {}", dim, dim, bin.display());
    Ok(())
}

//! Experiment orchestration and the `paclab` command line.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{build_curve, kl_divergence, CurvePoint, KL_FLOOR};
use crate::empirics::{histogram, run_trials_with, ExperimentConfig, Task};
use crate::error::Error;
use crate::theory::{BoundKind, BoundSpec, DiscreteDistribution, LogCardinality};
use config::{resolve_layers, ExperimentSettings, SEED_ENV};
use output::{
    curve_csv, distributions_csv, ensure_dir, fmt_real, generic_csv, q_distributions_csv,
    select_distribution, write_atomic, DistSelector, RunManifest, RunSpec, BOUND_CURVES_FILE,
    BOUND_SUMMARY_FILE, CURVE_FILE, DISTRIBUTIONS_FILE, MANIFEST_FILE,
};

/// Number of `eps` samples per `m` in the bound tables.
pub const BOUND_GRID_POINTS: usize = 1000;
/// Bound tables sample `eps` on `[0, BOUND_GRID_MAX]`.
pub const BOUND_GRID_MAX: f64 = 1.1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for invalid configuration or input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Results at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub p: DiscreteDistribution,
    pub q: DiscreteDistribution,
    pub point: CurvePoint,
}

/// Theoretical bound paired with an experiment's task: `|H| = 3^n` for
/// conjunctions, VC dimension `vc_dim` for thresholds.
pub fn theoretical_bound(config: &ExperimentConfig, m: u64) -> crate::error::Result<BoundSpec> {
    match config.task {
        Task::Conjunction { n } => {
            let n = u32::try_from(n).map_err(|_| Error::InvalidConfig(format!("n = {n} too large")))?;
            BoundSpec::finite_h(LogCardinality::conjunctions(n), m)
        }
        Task::Threshold => BoundSpec::finite_vc(config.vc_dim, m),
    }
}

/// Runs the whole schedule without touching the filesystem.
pub fn run_experiment(config: &ExperimentConfig) -> crate::error::Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let mut triples = Vec::new();
    for m in config.schedule.values() {
        let batch = run_trials_with(config.task, m, config.trials, config.master_seed, config.gt_mode)?;
        let p = histogram(&batch.losses, config.num_slots)?;
        let q = theoretical_bound(config, m)?.discretize(config.num_slots)?;
        triples.push((m, p, q));
    }
    let curve = build_curve(&triples)?;
    Ok(triples
        .into_iter()
        .zip(curve)
        .map(|((_, p, q), point)| ExperimentRecord { p, q, point })
        .collect())
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub manifest: RunManifest,
    pub files: Vec<PathBuf>,
}

/// Runs the experiment and writes `distributions.csv`, `curve.csv` and
/// `manifest.json` into `out_dir`.
pub fn cmd_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput, CliError> {
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let records = run_experiment(config)?;
    let points: Vec<CurvePoint> = records.iter().map(|r| r.point).collect();
    let manifest = RunManifest::new(
        RunSpec::Experiment(config.clone()),
        &[DISTRIBUTIONS_FILE, CURVE_FILE, MANIFEST_FILE],
    );
    ensure_dir(out_dir)?;
    let files = vec![
        (DISTRIBUTIONS_FILE, distributions_csv(&records)),
        (CURVE_FILE, curve_csv(&points)),
        (MANIFEST_FILE, manifest.to_json()),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out_dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(ExperimentOutput { records, manifest, files: written })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundClass {
    FiniteH { ln_h_size: f64 },
    Vc { dim: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub class: BoundClass,
    pub ms: Vec<u64>,
    pub num_slots: usize,
}

impl BoundRequest {
    pub fn spec(&self, m: u64) -> crate::error::Result<BoundSpec> {
        let kind = match self.class {
            BoundClass::FiniteH { ln_h_size } => BoundKind::FiniteH(LogCardinality::from_ln(ln_h_size)?),
            BoundClass::Vc { dim } => BoundKind::FiniteVc { dim },
        };
        BoundSpec::new(kind, m)
    }

    fn validate(&self) -> crate::error::Result<()> {
        if self.ms.is_empty() {
            return Err(Error::InvalidConfig("no sample sizes given".into()));
        }
        if self.num_slots < 2 {
            return Err(Error::InvalidConfig(format!("slots must be >= 2, got {}", self.num_slots)));
        }
        for &m in &self.ms {
            self.spec(m)?;
        }
        Ok(())
    }
}

pub fn bound_grid() -> impl Iterator<Item = f64> {
    (0..BOUND_GRID_POINTS).map(|i| BOUND_GRID_MAX * i as f64 / (BOUND_GRID_POINTS - 1) as f64)
}

#[derive(Debug)]
pub struct BoundOutput {
    pub specs: Vec<BoundSpec>,
    pub qs: Vec<(u64, DiscreteDistribution)>,
    pub files: Vec<PathBuf>,
}

/// Tabulates CDF, density, cutoff, atom and `Q_m` for each requested `m`.
pub fn cmd_bound(request: &BoundRequest, out_dir: &Path) -> Result<BoundOutput, CliError> {
    request.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let specs = request
        .ms
        .iter()
        .map(|&m| request.spec(m))
        .collect::<crate::error::Result<Vec<_>>>()?;

    let mut curve_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut qs = Vec::new();
    for spec in &specs {
        let m = spec.m().to_string();
        for eps in bound_grid() {
            let density = spec.density(eps).map(fmt_real).unwrap_or_default();
            curve_rows.push(vec![m.clone(), fmt_real(eps), fmt_real(spec.cdf(eps)), density]);
        }
        summary_rows.push(vec![
            m,
            fmt_real(spec.log_weight()),
            fmt_real(spec.cutoff()),
            fmt_real(spec.point_mass()),
        ]);
        qs.push((spec.m(), spec.discretize(request.num_slots)?));
    }

    let manifest = RunManifest::new(
        RunSpec::Bound(request.clone()),
        &[BOUND_CURVES_FILE, BOUND_SUMMARY_FILE, DISTRIBUTIONS_FILE, MANIFEST_FILE],
    );
    ensure_dir(out_dir)?;
    let files = vec![
        (BOUND_CURVES_FILE, generic_csv(&["m", "eps", "cdf", "density"], curve_rows)),
        (
            BOUND_SUMMARY_FILE,
            generic_csv(&["m", "log_weight", "cutoff", "point_mass"], summary_rows),
        ),
        (DISTRIBUTIONS_FILE, q_distributions_csv(&qs)),
        (MANIFEST_FILE, manifest.to_json()),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out_dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(BoundOutput { specs, qs, files: written })
}

/// KL divergence between one distribution picked from each of two tables.
pub fn cmd_kl(
    p_path: &Path,
    p_select: &DistSelector,
    q_path: &Path,
    q_select: &DistSelector,
    floor: f64,
) -> Result<f64, CliError> {
    if !(floor > 0.0) {
        return Err(CliError::Config(format!("floor must be > 0, got {floor}")));
    }
    let p = select_distribution(p_path, p_select)?;
    let q = select_distribution(q_path, q_select)?;
    Ok(kl_divergence(&p, &q, floor)?)
}

#[derive(Debug, Parser)]
#[command(name = "paclab", version, about = "PAC lower-bound risk distributions and ERM learning-curve experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials over an m schedule and compare P_m against the bound Q_m.
    Experiment(ExperimentArgs),
    /// Tabulate a theoretical bound for a list of sample sizes.
    Bound(BoundArgs),
    /// KL divergence between two distributions stored as CSV.
    Kl(KlArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Flat `key = value` settings file, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: ExperimentSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKindName {
    FiniteH,
    Vc,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum, default_value = "finite-h")]
    pub kind: BoundKindName,
    /// |H| for the finite case (default 1e9 unless --n is given).
    #[arg(long = "h-size", conflicts_with = "n")]
    pub h_size: Option<f64>,
    /// Use |H| = 3^n, the conjunction class over n variables.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "vc-dim", default_value_t = 1)]
    pub vc_dim: u32,
    /// Comma-separated sample sizes.
    #[arg(long = "m", value_delimiter = ',', default_value = "22,35,100")]
    pub ms: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub slots: usize,
    #[arg(long = "out-dir", default_value = "paclab-bound")]
    pub out_dir: PathBuf,
}

impl BoundArgs {
    pub fn request(&self) -> Result<BoundRequest, CliError> {
        let class = match self.kind {
            BoundKindName::FiniteH => {
                let ln_h = match (self.n, self.h_size) {
                    (Some(n), _) => LogCardinality::conjunctions(n),
                    (None, size) => LogCardinality::from_count(size.unwrap_or(1e9))
                        .map_err(|e| CliError::Config(e.to_string()))?,
                };
                BoundClass::FiniteH { ln_h_size: ln_h.ln() }
            }
            BoundKindName::Vc => BoundClass::Vc { dim: self.vc_dim },
        };
        Ok(BoundRequest { class, ms: self.ms.clone(), num_slots: self.slots })
    }
}

#[derive(Debug, Args)]
pub struct KlArgs {
    /// Table holding the empirical distribution P.
    pub p: PathBuf,
    /// Table holding the reference distribution Q.
    pub q: PathBuf,
    /// Restrict both tables to this sample size.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long = "p-source")]
    pub p_source: Option<String>,
    #[arg(long = "q-source")]
    pub q_source: Option<String>,
    #[arg(long, default_value_t = KL_FLOOR)]
    pub floor: f64,
}

/// Executes a parsed command line, printing results to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Experiment(args) => {
            let file = args.config.as_deref().map(ExperimentSettings::load).transpose()?;
            let (config, out_dir) = resolve_layers(file, std::env::var(SEED_ENV).ok(), args.settings)?;
            let out = cmd_experiment(&config, &out_dir)?;
            println!("{:>6} {:>10} {:>10} {:>10}", "m", "mean_p", "mean_q", "kl");
            for r in &out.records {
                let p = r.point;
                println!("{:>6} {:>10.6} {:>10.6} {:>10.4}", p.m, p.mean_p, p.mean_q, p.kl);
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Bound(args) => {
            let out = cmd_bound(&args.request()?, &args.out_dir)?;
            for s in &out.specs {
                println!("m={} cutoff={:.6} point_mass={:.8e}", s.m(), s.cutoff(), s.point_mass());
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Kl(args) => {
            let p_sel = DistSelector { m: args.m, source: args.p_source };
            let q_sel = DistSelector { m: args.m, source: args.q_source };
            println!("{}", fmt_real(cmd_kl(&args.p, &p_sel, &args.q, &q_sel, args.floor)?));
        }
    }
    Ok(())
}

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use smi_core::dataset;
use smi_core::normalize::NormalizedMatrix;
use smi_core::pca::{self, Basis, LoadingConvention, LoadingMatrix, PcaSettings};
use smi_core::pipeline::{self, RunConfig, ScoreSettings};
use smi_core::scoring::PercentileMethod;
use smi_core::SmiError;

/// Composite mobility index: normalize, weight by PCA, score, rank and
/// cross-tabulate against inequality.
#[derive(Debug, Parser)]
#[command(name = "smi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the whole pipeline and write every dump plus report.json.
    Run(RunArgs),
    /// Load, validate and normalize; writes normalized.csv.
    Normalize(NormalizeArgs),
    /// PCA of a normalized.csv; writes correlation.csv, spectrum.csv, loadings.csv.
    Pca(PcaArgs),
    /// Weights, index, ranks, categories and analysis from stage dumps.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Observations CSV (`state,<id1>,<id2>,...`).
    #[arg(long)]
    data: PathBuf,
    /// Indicator metadata CSV (`indicator_id,name,pillar,direction`).
    #[arg(long)]
    meta: PathBuf,
    /// Optional Gini CSV (`state,gini`).
    #[arg(long)]
    gini: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pca: PcaFlags,
    #[command(flatten)]
    score: ScoreFlags,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PcaArgs {
    /// A normalized.csv dump.
    #[arg(long)]
    normalized: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pca: PcaFlags,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    normalized: PathBuf,
    /// loadings.csv (`indicator,Comp1,...`).
    #[arg(long)]
    loadings: PathBuf,
    /// spectrum.csv; rows flagged `selected` supply the eigenvalues.
    #[arg(long)]
    spectrum: PathBuf,
    /// Indicator metadata; enables pillars.csv.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    gini: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    score: ScoreFlags,
}

#[derive(Debug, Args)]
struct PcaFlags {
    /// Keep components with eigenvalue strictly above this.
    #[arg(long, default_value_t = 1.0)]
    eigen_threshold: f64,
    /// Extend the selection until this share of variance is explained.
    #[arg(long, default_value_t = 0.85)]
    variance_target: f64,
    /// correlation | covariance
    #[arg(long, default_value = "correlation")]
    pca_basis: Basis,
    /// unit | scaled (eigenvector entries times sqrt(eigenvalue))
    #[arg(long, default_value = "unit")]
    loading_convention: LoadingConvention,
}

#[derive(Debug, Args)]
struct ScoreFlags {
    /// exclusive | inclusive | nearest-rank
    #[arg(long, default_value = "exclusive")]
    percentile_method: PercentileMethod,
    #[arg(long, default_value_t = 25.0)]
    low_percentile: f64,
    #[arg(long, default_value_t = 75.0)]
    high_percentile: f64,
    /// Gini values strictly below this count as low inequality.
    #[arg(long, default_value_t = 0.30)]
    gini_threshold: f64,
}

impl PcaFlags {
    fn settings(&self) -> PcaSettings {
        PcaSettings {
            basis: self.pca_basis,
            convention: self.loading_convention,
            eigen_threshold: self.eigen_threshold,
            variance_target: self.variance_target,
            ..PcaSettings::default()
        }
    }
}

impl ScoreFlags {
    fn settings(&self) -> ScoreSettings {
        ScoreSettings {
            percentile_method: self.percentile_method,
            low_percentile: self.low_percentile,
            high_percentile: self.high_percentile,
            gini_threshold: self.gini_threshold,
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        let color = std::env::var_os("SMI_NO_COLOR").is_none() && std::io::stderr().is_terminal();
        Self { color }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    fn warn(&self, msg: &str) {
        eprintln!("{} {msg}", self.paint("33", "warning:"));
    }

    fn error(&self, msg: &str) {
        eprintln!("{} {msg}", self.paint("31", "error:"));
    }

    fn done(&self, msg: &str) {
        eprintln!("{} {msg}", self.paint("32", "done:"));
    }
}

fn main() -> ExitCode {
    let style = Style::detect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command, &style) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match e.downcast_ref::<SmiError>() {
                Some(err) if err.is_numerical() => 2,
                _ => 1,
            };
            style.error(&format!("{e:#}"));
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command, style: &Style) -> anyhow::Result<()> {
    match command {
        Command::Run(args) => run(args, style),
        Command::Normalize(args) => {
            let outcome = pipeline::stage_normalize(&args.data, &args.meta, &args.out)?;
            style.done(&format!(
                "normalized {} states x {} indicators into {}",
                outcome.normalized.nrows(),
                outcome.normalized.ncols(),
                args.out.join("normalized.csv").display()
            ));
            Ok(())
        }
        Command::Pca(args) => {
            let norm = NormalizedMatrix::read_csv(&args.normalized)?;
            let outcome = pipeline::stage_pca(&norm, &args.pca.settings(), &args.out)?;
            let sel = &outcome.selection;
            if sel.criteria_conflict() {
                style.warn("eigenvalue threshold and variance target disagree; see spectrum.csv");
            }
            style.done(&format!(
                "{} of {} components selected ({:.1}% of variance) in {}",
                sel.len(),
                outcome.spectrum.dim(),
                100.0 * sel.explained_variance_ratio,
                args.out.display()
            ));
            Ok(())
        }
        Command::Score(args) => score(args, style),
    }
}

fn run(args: RunArgs, style: &Style) -> anyhow::Result<()> {
    let config = RunConfig {
        gini: args.gini,
        eigen_threshold: args.pca.eigen_threshold,
        variance_target: args.pca.variance_target,
        pca_basis: args.pca.pca_basis,
        loading_convention: args.pca.loading_convention,
        percentile_method: args.score.percentile_method,
        low_percentile: args.score.low_percentile,
        high_percentile: args.score.high_percentile,
        gini_threshold: args.score.gini_threshold,
        ..RunConfig::new(args.data, args.meta, args.out)
    };
    let report = pipeline::run(&config)?;
    for w in &report.warnings {
        style.warn(w);
    }
    println!(
        "components: {:?} ({:.1}% of variance)",
        report.selection.selected,
        100.0 * report.selection.explained_variance_ratio
    );
    println!(
        "thresholds: low {:.3}, high {:.3}",
        report.thresholds.t_low, report.thresholds.t_high
    );
    for s in &report.scores.states {
        println!(
            "{:>3}  {:<28} {:.3}  {}",
            s.rank, s.state, s.smi, s.category
        );
    }
    style.done(&format!(
        "wrote {}",
        config.out_dir.join("report.json").display()
    ));
    Ok(())
}

fn score(args: ScoreArgs, style: &Style) -> anyhow::Result<()> {
    let norm = NormalizedMatrix::read_csv(&args.normalized)?;
    let (ids, loadings) = LoadingMatrix::read_csv(&args.loadings, LoadingConvention::default())?;
    if ids != norm.indicators() {
        anyhow::bail!(
            "{} lists indicators in a different order than {}",
            args.loadings.display(),
            args.normalized.display()
        );
    }
    let eigenvalues = pca::read_selected_eigenvalues(&args.spectrum)?;
    let registry = args
        .meta
        .as_deref()
        .map(load_registry_for(&norm))
        .transpose()?;
    let gini = args.gini.as_deref().map(dataset::load_gini).transpose()?;
    let outcome = pipeline::stage_score(
        &norm,
        &loadings,
        &eigenvalues,
        registry.as_deref(),
        gini.as_ref(),
        &args.score.settings(),
        &args.out,
    )?;
    for w in &outcome.warnings {
        style.warn(w);
    }
    style.done(&format!(
        "scored {} states into {}",
        outcome.scores.len(),
        args.out.display()
    ));
    Ok(())
}

fn load_registry_for(
    norm: &NormalizedMatrix,
) -> impl Fn(&Path) -> anyhow::Result<Arc<dataset::IndicatorRegistry>> + '_ {
    move |path| {
        let registry = dataset::load_indicator_metadata(path)?;
        if !registry
            .ids()
            .eq(norm.indicators().iter().map(String::as_str))
        {
            anyhow::bail!(
                "{} does not list the normalized columns in the same order",
                path.display()
            );
        }
        Ok(Arc::new(registry))
    }
}

//! Command-line pipeline: ingest CSV, build or load the relation, validate,
//! solve and write results.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use granulate::io::{self, ResultRecord};
use granulate::relation::triangular_similarity;
use granulate::{
    Bijection, Dataset, Error, Family, FuzzyRelation, FuzzySet, GranularApproximation, GranularProblem,
    LossSpec, ResidualTriplet, SolveOptions,
};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TNorm {
    Lukasiewicz,
    Product,
}

impl From<TNorm> for Family {
    fn from(t: TNorm) -> Self {
        match t {
            TNorm::Lukasiewicz => Family::LukasiewiczIso,
            TNorm::Product => Family::ProductIso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Loss {
    Quantile,
    Mse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Compute granular approximations of a fuzzy decision.
#[derive(Debug, Clone, Parser)]
#[command(name = "granulate", version)]
pub struct Cli {
    /// CSV of instances. Without --relation-matrix every column but the last is
    /// an attribute; the last column is always the decision.
    #[arg(long)]
    pub input: PathBuf,

    /// Precomputed relation matrix (CSV, or JSON by extension).
    #[arg(long)]
    pub relation_matrix: Option<PathBuf>,

    /// Attribute ranges, comma separated. Default: max − min of each column.
    #[arg(long, value_delimiter = ',', conflicts_with = "relation_matrix")]
    pub ranges: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value = "lukasiewicz")]
    pub tnorm: TNorm,

    /// `identity`, `power:<γ>` or `pwl:<x>:<y>;...`.
    #[arg(long, default_value = "identity")]
    pub phi: String,

    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub p: Vec<f64>,

    /// One or more losses, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "quantile")]
    pub loss: Vec<Loss>,

    /// Rescale the decision column between its q_low and q_high quantiles.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub fuzzify: Option<Vec<f64>>,

    /// Emit the band [smallest optimum at p − eps, largest at p + eps] per p.
    #[arg(long)]
    pub band: Option<f64>,

    /// Output file. Default: standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Solve flows in exact rational arithmetic.
    #[arg(long)]
    pub exact_rational: bool,

    /// Slack allowed when validating transitivity; the published matrices are
    /// rounded to 3 decimals.
    #[arg(long, default_value_t = 0.002)]
    pub transitivity_tol: f64,

    /// Stopping threshold of the squared-loss solver.
    #[arg(long, default_value_t = 1e-10)]
    pub mse_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelationSource {
    Attributes { ranges: Option<Vec<f64>> },
    Matrix(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub relation: RelationSource,
    pub triplet: ResidualTriplet,
    pub ps: Vec<f64>,
    pub mse: bool,
    pub fuzzify: Option<(f64, f64)>,
    pub band: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub options: SolveOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Io(_) => 3,
                Error::Parse(_) => 4,
                Error::NegativeCycle { .. }
                | Error::IterationCap { .. }
                | Error::Convergence { .. }
                | Error::Infeasible(_)
                | Error::NonPositiveMultiplier { .. }
                | Error::ParallelEdge { .. }
                | Error::TooLarge { .. } => 6,
                _ => 5,
            },
        }
    }

    /// Machine-readable report for validation failures.
    pub fn report(&self) -> Option<String> {
        let Self::Core(e) = self else { return None };
        let v = match e {
            Error::NotTransitive { violations } => json!({
                "error": "not_transitive",
                "violations": violations,
            }),
            Error::NotReflexive { instance } => json!({ "error": "not_reflexive", "instance": instance }),
            Error::InvalidDegree { value } => json!({ "error": "invalid_degree", "value": value }),
            Error::DimensionMismatch { expected, found } => {
                json!({ "error": "dimension_mismatch", "expected": expected, "found": found })
            }
            Error::ZeroRange { attribute } => json!({ "error": "zero_range", "attribute": attribute }),
            _ if self.exit_code() == 5 => json!({ "error": "invalid", "message": e.to_string() }),
            _ => return None,
        };
        Some(v.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let phi: Bijection = cli.phi.parse()?;
        let mut ps = cli.p.clone();
        if let Some(bad) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(CliError::Config(format!("p = {bad} lies outside [0, 1]")));
        }
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let quantile = cli.loss.contains(&Loss::Quantile);
        if !quantile {
            ps.clear();
        }
        let fuzzify = match cli.fuzzify.as_deref() {
            None => None,
            Some(&[lo, hi]) if 0.0 <= lo && lo < hi && hi <= 1.0 => Some((lo, hi)),
            Some(other) => {
                return Err(CliError::Config(format!(
                    "--fuzzify needs q_low,q_high with 0 <= q_low < q_high <= 1, got {other:?}"
                )))
            }
        };
        let relation = match cli.relation_matrix {
            Some(path) => RelationSource::Matrix(path),
            None => RelationSource::Attributes { ranges: cli.ranges },
        };
        let format = cli.format.unwrap_or_else(|| match &cli.output {
            Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
            _ => Format::Csv,
        });
        Ok(RunConfig {
            input: cli.input,
            relation,
            triplet: ResidualTriplet::new(cli.tnorm.into(), phi),
            ps,
            mse: cli.loss.contains(&Loss::Mse),
            fuzzify,
            band: cli.band,
            output: cli.output,
            format,
            options: SolveOptions {
                transitivity_tolerance: cli.transitivity_tol,
                exact_rational: cli.exact_rational,
                mse_tolerance: cli.mse_tol,
                ..SolveOptions::default()
            },
        })
    }
}

/// Empirical quantile with lower interpolation: the smallest sample `y`
/// with `F̂(y) ≥ q`.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let k = (q * sorted.len() as f64).ceil() as usize;
    sorted[k.saturating_sub(1).min(sorted.len() - 1)]
}

/// `clamp((x − Q(q_low)) / (Q(q_high) − Q(q_low)), 0, 1)`.
pub fn fuzzify_decision(values: &[f64], q_low: f64, q_high: f64) -> granulate::Result<FuzzySet> {
    if !(0.0 <= q_low && q_low < q_high && q_high <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile levels must satisfy 0 <= q_low < q_high <= 1, got {q_low}, {q_high}"
        )));
    }
    if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("non-finite decision value {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.first() == sorted.last() {
        return Err(Error::InvalidParameter(
            "decision needs at least two distinct values".into(),
        ));
    }
    let lo = empirical_quantile(&sorted, q_low);
    let hi = empirical_quantile(&sorted, q_high);
    if hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "degenerate quantile spread: Q({q_high}) = {hi} <= Q({q_low}) = {lo}"
        )));
    }
    FuzzySet::new(values.iter().map(|&x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect())
}

fn load(config: &RunConfig) -> Result<GranularProblem> {
    let table = io::read_table_file(&config.input)?;
    let width = table.width();
    if table.rows.is_empty() || width == 0 {
        return Err(Error::Parse(format!("{} holds no data rows", config.input.display())).into());
    }
    let decision = table.column(width - 1);
    let observed = match config.fuzzify {
        Some((lo, hi)) => fuzzify_decision(&decision, lo, hi)?,
        None => FuzzySet::new(decision.clone())?,
    };
    let relation: FuzzyRelation = match &config.relation {
        RelationSource::Matrix(path) => io::read_relation(path)?,
        RelationSource::Attributes { ranges } => {
            if width < 2 {
                return Err(CliError::Config(
                    "input needs attribute columns before the decision, or --relation-matrix".into(),
                ));
            }
            let attributes = table.rows.iter().map(|r| r[..width - 1].to_vec()).collect();
            triangular_similarity(&Dataset::new(attributes, observed.memberships().to_vec(), ranges.clone())?)?
        }
    };
    Ok(GranularProblem::new(
        relation,
        observed,
        config.triplet.clone(),
        config.options.clone(),
    )?)
}

fn solve(problem: &GranularProblem, config: &RunConfig) -> Result<Vec<ResultRecord>> {
    let mut records = Vec::new();
    let point = |ga: &GranularApproximation| ResultRecord::from_approximation(ga, None);
    match config.band {
        Some(eps) => {
            for &p in &config.ps {
                let (lower, upper) = problem.band(p, eps)?;
                records.push(ResultRecord::from_approximation(&lower, Some("lower")));
                records.push(ResultRecord::from_approximation(&upper, Some("upper")));
            }
        }
        None if !config.ps.is_empty() => {
            records.extend(problem.quantile_sweep(&config.ps)?.iter().map(point));
        }
        None => {}
    }
    if config.mse {
        records.push(point(&problem.solve(LossSpec::SquaredError)?));
    }
    Ok(records)
}

/// Renders the results without touching the output path.
pub fn render(config: &RunConfig) -> Result<String> {
    let problem = load(config)?;
    let records = solve(&problem, config)?;
    Ok(match config.format {
        Format::Json => io::results_to_json(&records),
        Format::Csv => io::results_to_csv(problem.observed().memberships(), &records)?,
    })
}

/// Runs the pipeline; the output file is written only on success.
pub fn run(config: &RunConfig) -> Result<()> {
    let text = render(config)?;
    match &config.output {
        Some(path) => write_atomically(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_atomically(path: &Path, text: &str) -> granulate::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

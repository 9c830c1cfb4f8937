//! Command-line front end: CSV ingestion, solver/oracle/generator/match/
//! verify subcommands, JSON reporting.

pub mod csv;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::balance::{
    imbalance, index_levels, intersection_counts, kappa_expand, materialize, selection_from_ids,
    Dataset,
};
use crate::balance2::{solve_maxflow2, solve_mcnf2, SolveError};
use crate::matchbal::assign_controls;
use crate::oracle::{exact_min_imbalance, gen_3dm_dataset, random_instance, random_planted_3dm};
use report::{ErrorReport, MatchReport, Report};

/// Exit codes: 0 success, 1 input/validation error, 2 internal certificate
/// failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "covbal",
    about = "Minimum-imbalance control-group selection via network flows",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input dataset CSV (columns: id, group, covariates...).
    #[arg(long)]
    pub input: PathBuf,
    /// Covariate column names, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub covariates: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve min-imbalance and report the selection.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        /// Selection size; defaults to the (kappa-expanded) treatment size.
        #[arg(long)]
        q: Option<i64>,
        /// Replicate each treatment sample kappa times before solving.
        #[arg(long, default_value_t = 1)]
        kappa: i64,
        /// Solver route: mcnf, maxflow, or oracle.
        #[arg(long, default_value = "maxflow")]
        method: String,
        /// Seed for materializing selected ids.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here as well as to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive optimum and uniqueness count (tiny instances only).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        q: Option<i64>,
        #[arg(long, default_value_t = 1)]
        kappa: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate an instance CSV.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Second-stage assignment: distance-minimal controls per treatment.
    Match {
        #[command(flatten)]
        input: InputArgs,
        /// A `solve` JSON report supplying the stage-1 selection.
        #[arg(long)]
        selection: PathBuf,
        /// Distance CSV: header row of control ids, one row per treatment id.
        #[arg(long)]
        distances: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recheck a solve report: recompute its imbalance and rerun both
    /// solvers with their flow certificates.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// A `solve` JSON report to verify.
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Uniform i.i.d. labels.
    Random {
        /// Treatment group size.
        #[arg(long)]
        n: usize,
        /// Control group size.
        #[arg(long = "n-prime")]
        n_prime: usize,
        /// Levels per covariate, comma separated (also sets P).
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Three-covariate instance from a planted 3-dimensional matching.
    #[command(name = "3dm")]
    ThreeDm {
        /// Element count |X|.
        #[arg(long = "x-size")]
        x_size: usize,
        /// Distractor triples beyond the planted matching.
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("column {name:?} missing from header")]
    MissingColumn { name: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    WrongFieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: group must be \"treatment\" or \"control\", found {value:?}")]
    BadGroupValue { row: usize, value: String },
    #[error("no treatment rows in input")]
    EmptyTreatment,
    #[error("row {row}: {message}")]
    BadValue { row: usize, message: String },
    #[error("distance matrix: {0}")]
    BadDistanceMatrix(String),
    #[error("selection report: {0}")]
    BadSelectionReport(String),
    #[error("selection has {found} id(s) but the report says q={expected}")]
    WrongSelectionSize { expected: i64, found: i64 },
    #[error("reported objective {reported} but the selection scores {recomputed}")]
    ObjectiveMismatch { reported: i64, recomputed: i64 },
    #[error("internal recheck failed: solver reported {reported} but the materialized ids score {recomputed}")]
    SelfCheckFailed { reported: i64, recomputed: i64 },
    #[error("unknown method {0:?}: expected mcnf, maxflow, or oracle")]
    UnknownMethod(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Balance(#[from] crate::balance::BalanceError),
    #[error(transparent)]
    Solve(#[from] crate::balance2::SolveError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
    #[error(transparent)]
    Match(#[from] crate::matchbal::MatchError),
}

impl CliError {
    /// Stable machine-readable code for the JSON error object.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::MissingColumn { .. } => "MissingColumn",
            CliError::WrongFieldCount { .. } => "WrongFieldCount",
            CliError::DuplicateId { .. } => "DuplicateId",
            CliError::BadGroupValue { .. } => "BadGroupValue",
            CliError::EmptyTreatment => "EmptyTreatment",
            CliError::BadValue { .. } => "BadValue",
            CliError::BadDistanceMatrix(_) => "BadDistanceMatrix",
            CliError::BadSelectionReport(_) => "BadSelectionReport",
            CliError::WrongSelectionSize { .. } => "WrongSelectionSize",
            CliError::ObjectiveMismatch { .. } => "ObjectiveMismatch",
            CliError::SelfCheckFailed { .. } => "SelfCheckFailed",
            CliError::UnknownMethod(_) => "UnknownMethod",
            CliError::Io { .. } => "Io",
            CliError::Balance(e) => match e {
                crate::balance::BalanceError::EmptyTreatment => "EmptyTreatment",
                crate::balance::BalanceError::CellOverflow { .. } => "CellOverflow",
                crate::balance::BalanceError::KappaOutOfRange { .. } => "KappaOutOfRange",
                crate::balance::BalanceError::UnknownControlId { .. } => "UnknownControlId",
                crate::balance::BalanceError::RepeatedControlId { .. } => "RepeatedControlId",
                _ => "BadDataset",
            },
            CliError::Solve(e) => match e {
                SolveError::NotTwoCovariates { .. } => "NotTwoCovariates",
                SolveError::QTooLarge { .. } => "QTooLarge",
                SolveError::WrongSelectionSize { .. } => "WrongSelectionSize",
                SolveError::CertificateFailure(_) => "CertificateFailure",
                _ => "SolveError",
            },
            CliError::Oracle(e) => match e {
                crate::oracle::OracleError::TooLarge { .. } => "TooLarge",
                crate::oracle::OracleError::QOutOfRange { .. } => "QTooLarge",
                _ => "OracleError",
            },
            CliError::Match(e) => match e {
                crate::matchbal::MatchError::InfeasibleSizes(_) => "InfeasibleSizes",
                crate::matchbal::MatchError::CertificateFailure(_) => "CertificateFailure",
                _ => "MatchError",
            },
        }
    }

    fn exit_code(&self) -> i32 {
        let certificate = matches!(
            self,
            CliError::SelfCheckFailed { .. }
                | CliError::Solve(SolveError::CertificateFailure(_))
                | CliError::Match(crate::matchbal::MatchError::CertificateFailure(_))
        );
        if certificate {
            EXIT_CERTIFICATE
        } else {
            EXIT_INPUT
        }
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    println!("{text}");
    if let Some(path) = output {
        std::fs::write(path, format!("{text}\n")).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn load_dataset(input: &InputArgs) -> Result<Dataset, CliError> {
    csv::ingest_csv(&input.input, &input.covariates)
}

fn effective_dataset(dataset: Dataset, kappa: i64) -> Result<Dataset, CliError> {
    if kappa == 1 {
        Ok(dataset)
    } else {
        Ok(kappa_expand(&dataset, kappa)?)
    }
}

fn run_solve(
    input: &InputArgs,
    q: Option<i64>,
    kappa: i64,
    method: &str,
    seed: u64,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let dataset = effective_dataset(load_dataset(input)?, kappa)?;
    let q = q.unwrap_or_else(|| dataset.n());
    log::info!(
        "solve: method={method} q={q} kappa={kappa} n={} n'={}",
        dataset.n(),
        dataset.n_prime()
    );
    let report = match method {
        "mcnf" | "maxflow" => {
            let result = if method == "mcnf" {
                solve_mcnf2(&dataset, q)?
            } else {
                solve_maxflow2(&dataset, q)?
            };
            let ids = materialize(&dataset, &result.selection, seed)?;
            verify_ids_against_objective(&dataset, &ids, result.objective)?;
            Report::from_solution(&dataset, &input.covariates, q, kappa, &result, ids)?
        }
        "oracle" => {
            let result = exact_min_imbalance(&dataset, q)?;
            let ids = materialize(&dataset, &result.argmin, seed)?;
            verify_ids_against_objective(&dataset, &ids, result.objective)?;
            Report::from_oracle(&dataset, &input.covariates, q, kappa, &result, ids)?
        }
        other => return Err(CliError::UnknownMethod(other.to_string())),
    };
    emit(&report.to_json(), output)
}

/// The report's objective must equal a fresh imbalance recomputation of the
/// materialized ids; a mismatch is an internal failure, not an input error.
fn verify_ids_against_objective(
    dataset: &Dataset,
    ids: &[String],
    objective: i64,
) -> Result<(), CliError> {
    let index = index_levels(dataset)?;
    let counts = intersection_counts(dataset, &index);
    let selection = selection_from_ids(dataset, &index, ids)?;
    let recomputed = imbalance(&index, &counts, &selection)?.total;
    if recomputed != objective {
        return Err(CliError::SelfCheckFailed {
            reported: objective,
            recomputed,
        });
    }
    Ok(())
}

fn run_oracle(
    input: &InputArgs,
    q: Option<i64>,
    kappa: i64,
    seed: u64,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    run_solve(input, q, kappa, "oracle", seed, output)
}

fn run_gen(what: &GenCommand) -> Result<(), CliError> {
    match what {
        GenCommand::Random {
            n,
            n_prime,
            k,
            seed,
            output,
        } => {
            let dataset = random_instance(k.len(), *n, *n_prime, k, *seed)?;
            csv::write_dataset_csv(output, &dataset)?;
            log::info!("wrote {} ({} rows)", output.display(), n + n_prime);
            Ok(())
        }
        GenCommand::ThreeDm {
            x_size,
            extra,
            seed,
            output,
        } => {
            if *x_size == 0 {
                return Err(CliError::BadValue {
                    row: 0,
                    message: "x-size must be positive".to_string(),
                });
            }
            let instance = random_planted_3dm(*x_size, *extra, *seed);
            let dataset = gen_3dm_dataset(&instance);
            csv::write_dataset_csv(output, &dataset)?;
            log::info!(
                "wrote {} (|X|={x_size}, {} triples)",
                output.display(),
                instance.triples().len()
            );
            Ok(())
        }
    }
}

fn run_match(
    input: &InputArgs,
    selection_path: &PathBuf,
    distances_path: &PathBuf,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let dataset = load_dataset(input)?;
    let stage1 = report::read_report(selection_path)?;
    let kappa = stage1.kappa;
    let index = index_levels(&dataset)?;
    let cell_sizes = selection_from_ids(&dataset, &index, &stage1.selected_ids)?;
    let distances = csv::read_distance_csv(distances_path, &dataset)?;
    let assignment = assign_controls(&dataset, &cell_sizes, kappa, &distances)?;

    // Uniqueness of the stage-1 optimum decides whether this assignment is
    // exact for the two-stage problem; report it when the oracle can tell.
    let expanded = effective_dataset(dataset.clone(), kappa)?;
    let unique_count = exact_min_imbalance(&expanded, stage1.q).ok().map(|r| r.optima_count);
    let report = MatchReport::new(&dataset, kappa, stage1.q, &assignment, unique_count);
    emit(&report.to_json(), output)
}

fn run_verify(
    input: &InputArgs,
    selection_path: &PathBuf,
    output: Option<&PathBuf>,
) -> Result<(), CliError> {
    let dataset = load_dataset(input)?;
    let stage1 = report::read_report(selection_path)?;
    let dataset = effective_dataset(dataset, stage1.kappa)?;
    if stage1.selected_ids.len() as i64 != stage1.q {
        return Err(CliError::WrongSelectionSize {
            expected: stage1.q,
            found: stage1.selected_ids.len() as i64,
        });
    }
    let index = index_levels(&dataset)?;
    let counts = intersection_counts(&dataset, &index);
    let selection = selection_from_ids(&dataset, &index, &stage1.selected_ids)?;
    let recomputed = imbalance(&index, &counts, &selection)?.total;
    if recomputed != stage1.objective {
        return Err(CliError::ObjectiveMismatch {
            reported: stage1.objective,
            recomputed,
        });
    }
    // Fresh solves run their flow certificates internally; a failure there
    // surfaces as CertificateFailure and exit code 2.
    let mcnf = solve_mcnf2(&dataset, stage1.q)?;
    let maxflow = solve_maxflow2(&dataset, stage1.q)?;
    if mcnf.objective != maxflow.objective {
        return Err(CliError::Solve(SolveError::CertificateFailure(format!(
            "solver routes disagree: mcnf {} vs maxflow {}",
            mcnf.objective, maxflow.objective
        ))));
    }
    log::info!(
        "verified: objective {recomputed}, optimum {}, certificates ok",
        mcnf.objective
    );
    let report = Report::from_verify(
        &dataset,
        &input.covariates,
        &stage1,
        recomputed,
        &selection,
        &index,
        &counts,
    )?;
    emit(&report.to_json(), output)
}

/// Runs a parsed command line, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve {
            input,
            q,
            kappa,
            method,
            seed,
            output,
        } => run_solve(input, *q, *kappa, method, *seed, output.as_ref()),
        Command::Oracle {
            input,
            q,
            kappa,
            seed,
            output,
        } => run_oracle(input, *q, *kappa, *seed, output.as_ref()),
        Command::Gen { what } => run_gen(what),
        Command::Match {
            input,
            selection,
            distances,
            output,
        } => run_match(input, selection, distances, output.as_ref()),
        Command::Verify {
            input,
            selection,
            output,
        } => run_verify(input, selection, output.as_ref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            println!("{}", ErrorReport::new(err.code(), &err.to_string()).to_json());
            err.exit_code()
        }
    }
}

//! Command-line entry point.
//!
//! Six subcommands wire datasets to the library: `analyze` (landscape
//! metrics), `sensitivity` (option RSD ranking), `tune` (tuner
//! trajectories), `compare` (verdict table between two trajectory files),
//! `dynamic` (transfer vs restart across workload sequences), and
//! `agreement` (Cohen's kappa over label files).
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 undefined-metric
//! degeneracy under `--strict`. The same argv and input files always
//! produce byte-identical outputs; `--jobs` only caps worker threads and
//! never changes results.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::landscape::{analyze, AnalysisSettings, DEFAULT_BASIN_THRESHOLD};
use crate::report::{
    self, AgreementReport, ComparisonRow, ComparisonTable, Format, Payload, Provenance,
    ReportBundle,
};
use crate::seeding::derive_seed_indexed;
use crate::sensitivity::{sensitivity_report, SensitivitySettings};
use crate::stats::{cohens_kappa, overall_agreement, sample_std, verdict, Orientation};
use crate::tuners::{
    run_dynamic, run_tuner, DynamicMode, Trajectory, TunerKind, TunerSpec, DEFAULT_BUDGET,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_STRICT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "landscope",
    version,
    about = "Fitness-landscape analysis and tuner experiments for configuration-performance datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Characterize each dataset: fitness-distance correlation, local
    /// optima, basins of attraction, random-walk ruggedness
    Analyze(AnalyzeArgs),
    /// Rank options by how much fixing each value changes walk ruggedness
    Sensitivity(SensitivityArgs),
    /// Run tuner trajectories on one dataset
    Tune(TuneArgs),
    /// Verdict table between two trajectory CSV files, by final regret per
    /// workload
    Compare(CompareArgs),
    /// Genetic tuning across a workload sequence, transferring or
    /// restarting the population
    Dynamic(DynamicArgs),
    /// Inter-rater agreement (Cohen's kappa) over option label files
    Agreement(AgreementArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Data CSV; repeat to analyze several datasets, pairing each with
    /// --meta
    #[arg(long = "dataset", value_name = "CSV", required = true)]
    datasets: Vec<PathBuf>,
    /// Metadata TOML for the matching --dataset, in the same order
    #[arg(long = "meta", value_name = "TOML", required = true)]
    metas: Vec<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Vec<Dataset>> {
        if self.datasets.len() != self.metas.len() {
            return Err(Error::usage(format!(
                "got {} --dataset but {} --meta; each dataset needs exactly one metadata file",
                self.datasets.len(),
                self.metas.len()
            )));
        }
        self.datasets
            .iter()
            .zip(&self.metas)
            .map(|(data, meta)| {
                Dataset::load(data, meta).map_err(|e| {
                    Error::data(format!(
                        "dataset {} with metadata {}: {e}",
                        data.display(),
                        meta.display()
                    ))
                })
            })
            .collect()
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output file, or directory when several reports are emitted
    /// (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// json, csv, or markdown (default: inferred from --out, else json)
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
}

#[derive(Args)]
struct SeedArg {
    /// Base RNG seed; LANDSCOPE_SEED applies only when this flag is absent
    #[arg(long, env = "LANDSCOPE_SEED", default_value_t = 0, value_name = "N")]
    seed: u64,
}

#[derive(Args)]
struct JobsArg {
    /// Worker-thread cap for parallel sections; results do not depend on it
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
}

impl JobsArg {
    fn init(&self) -> Result<()> {
        if self.jobs == 0 {
            return Err(Error::usage("--jobs must be at least 1"));
        }
        // Ignore the error when a pool already exists (possible only when
        // run() is called twice in one process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build_global();
        Ok(())
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    jobs: JobsArg,
    /// Average-degree target for the adaptive neighborhood [default: the
    /// option count n]
    #[arg(long, value_name = "DEG")]
    avg_degree_target: Option<f64>,
    /// Global-basin share above which the landscape counts as easy
    #[arg(long, default_value_t = DEFAULT_BASIN_THRESHOLD, value_name = "P")]
    basin_threshold: f64,
    /// Exit 3 when any metric is undefined on some dataset
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// RSD percentage at or above which an option counts as significant
    #[arg(long, default_value_t = 5.0, value_name = "PCT")]
    rsd_threshold: f64,
    /// Split numeric options at the median instead of one partition per
    /// value
    #[arg(long)]
    bin_numeric: bool,
    /// Exit 3 when any option record is degraded (skipped partitions,
    /// unstable or undefined RSD)
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    jobs: JobsArg,
    /// Tuner to run (repeatable): rs, hc, ga, tpe, priority-hc,
    /// priority-ga
    #[arg(long = "tuner", value_name = "T", required = true)]
    tuners: Vec<String>,
    /// Evaluation budget per run
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_name = "N")]
    budget: usize,
    /// Independent runs per tuner
    #[arg(long, default_value_t = 30, value_name = "N")]
    repeats: usize,
    /// Comma-separated option names the priority tuners mutate first
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    priority_options: Vec<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Trajectory CSV for side A
    #[arg(value_name = "A_CSV")]
    a: PathBuf,
    /// Trajectory CSV for side B
    #[arg(value_name = "B_CSV")]
    b: PathBuf,
    /// System label for the verdict table rows
    #[arg(long, default_value = "-", value_name = "NAME")]
    system: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DynamicArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    jobs: JobsArg,
    /// restart: fresh population per workload; transfer: carry the final
    /// population over
    #[arg(long, value_name = "MODE")]
    mode: String,
    /// Evaluation budget per workload
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_name = "N")]
    budget: usize,
    /// Independent dynamic runs
    #[arg(long, default_value_t = 30, value_name = "N")]
    repeats: usize,
    /// Comma-separated option names a priority genetic tuner mutates first
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    priority_options: Vec<String>,
}

#[derive(Args)]
struct AgreementArgs {
    /// CSV with columns option,label: first human rater
    #[arg(long, value_name = "CSV")]
    human_a: PathBuf,
    /// CSV with columns option,label: second human rater
    #[arg(long, value_name = "CSV")]
    human_b: PathBuf,
    /// CSV with columns option,label: consensus that model raters are
    /// scored against
    #[arg(long, value_name = "CSV")]
    consensus: Option<PathBuf>,
    /// CSV with columns option,label: one model rater (repeatable;
    /// requires --consensus)
    #[arg(long = "llm", value_name = "CSV", requires = "consensus")]
    llm: Vec<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Binary entry point; returns the process exit code.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            let _ = e.print();
            return if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    let outcome = match command {
        Command::Analyze(args) => cmd_analyze(args)?,
        Command::Sensitivity(args) => cmd_sensitivity(args)?,
        Command::Tune(args) => cmd_tune(args)?,
        Command::Compare(args) => cmd_compare(args)?,
        Command::Dynamic(args) => cmd_dynamic(args)?,
        Command::Agreement(args) => cmd_agreement(args)?,
    };
    emit_all(&outcome.bundles, outcome.out.as_deref(), outcome.format.as_deref())?;
    Ok(if outcome.strict_degenerate {
        ExitCode::from(EXIT_STRICT_DEGENERATE)
    } else {
        ExitCode::SUCCESS
    })
}

struct Outcome {
    bundles: Vec<ReportBundle>,
    out: Option<PathBuf>,
    format: Option<String>,
    /// True when --strict was set and the results carry degeneracy markers.
    strict_degenerate: bool,
}

fn resolve_format(flag: Option<&str>, inferred: Option<Format>) -> Result<Format> {
    match flag {
        Some(name) => Format::parse(name),
        None => Ok(inferred.unwrap_or(Format::Json)),
    }
}

/// Writes every bundle to stdout, a single file, or a directory, plus a
/// manifest next to file outputs.
fn emit_all(bundles: &[ReportBundle], out: Option<&Path>, format_flag: Option<&str>) -> Result<()> {
    let Some(out) = out else {
        let format = resolve_format(format_flag, None)?;
        for bundle in bundles {
            print!("{}", report::render(bundle, format));
        }
        return Ok(());
    };

    if bundles.len() > 1 || out.is_dir() {
        let format = resolve_format(format_flag, None)?;
        fs::create_dir_all(out)?;
        let mut used = BTreeSet::new();
        let mut entries = Vec::new();
        for bundle in bundles {
            let base = format!(
                "{}-{}-{}",
                bundle.provenance.system,
                bundle.provenance.workloads.join("+"),
                bundle.kind()
            );
            let mut name = format!("{base}.{}", format.extension());
            let mut counter = 2;
            while !used.insert(name.clone()) {
                name = format!("{base}-{counter}.{}", format.extension());
                counter += 1;
            }
            entries.push(report::emit(bundle, format, &out.join(&name))?);
        }
        let manifest = report::manifest_json(&entries);
        report::write_atomic(&out.join("manifest.json"), manifest.as_bytes())
    } else {
        let format = resolve_format(format_flag, Format::from_path(out))?;
        let entry = report::emit(&bundles[0], format, out)?;
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".to_string());
        let manifest_path = out.with_file_name(format!("{stem}.manifest.json"));
        let manifest = report::manifest_json(&[entry]);
        report::write_atomic(&manifest_path, manifest.as_bytes())
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<Outcome> {
    args.jobs.init()?;
    let datasets = args.input.load()?;
    let reports: Vec<_> = datasets
        .par_iter()
        .map(|ds| {
            let settings = AnalysisSettings {
                target_degree: args.avg_degree_target,
                max_radius: None,
                walk_seed: args.seed.seed,
                basin_seed: args.seed.seed,
                lag: 1,
                basin_threshold: args.basin_threshold,
            };
            analyze(ds, &settings)
        })
        .collect();
    let degenerate = reports.iter().any(|r| r.is_degenerate());
    let bundles = reports
        .into_iter()
        .map(|r| {
            let provenance = Provenance::new(r.system.clone(), vec![r.workload.clone()], args.seed.seed)
                .setting("target_degree", r.target_degree)
                .setting("basin_threshold", args.basin_threshold)
                .setting("lag", r.lag);
            ReportBundle::new(Payload::Landscape(Box::new(r)), provenance)
        })
        .collect();
    Ok(Outcome {
        bundles,
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: args.strict && degenerate,
    })
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<Outcome> {
    let datasets = args.input.load()?;
    let settings = SensitivitySettings {
        rsd_threshold: args.rsd_threshold,
        bin_numeric: args.bin_numeric,
        seed: args.seed.seed,
        ..SensitivitySettings::default()
    };
    let report = sensitivity_report(&datasets, &settings)?;
    let degenerate = report
        .records
        .iter()
        .any(|r| r.rsd.is_none() || r.unstable || !r.skipped.is_empty());
    let provenance = Provenance::new(report.system.clone(), report.workloads.clone(), args.seed.seed)
        .setting("rsd_threshold", args.rsd_threshold)
        .setting("bin_numeric", args.bin_numeric)
        .setting("min_rows", settings.min_rows)
        .setting("lag", settings.lag);
    Ok(Outcome {
        bundles: vec![ReportBundle::new(Payload::Sensitivity(report), provenance)],
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: args.strict && degenerate,
    })
}

/// Maps a CLI tuner token to a spec, attaching the priority set where the
/// token asks for it.
fn tuner_spec(token: &str, priority: &[String]) -> Result<TunerSpec> {
    let (kind, wants_priority) = match token {
        "rs" => (TunerKind::RandomSearch, false),
        "hc" => (TunerKind::HillClimbing, false),
        "ga" => (TunerKind::Genetic, false),
        "tpe" => (TunerKind::Tpe, false),
        "priority-hc" => (TunerKind::HillClimbing, true),
        "priority-ga" => (TunerKind::Genetic, true),
        other => {
            return Err(Error::usage(format!(
                "unknown tuner {other:?}; expected rs, hc, ga, tpe, priority-hc, or priority-ga"
            )))
        }
    };
    if wants_priority {
        if priority.is_empty() {
            return Err(Error::usage(format!(
                "--tuner {token} needs --priority-options"
            )));
        }
        Ok(TunerSpec::with_priority(kind, priority.to_vec()))
    } else {
        Ok(TunerSpec::new(kind))
    }
}

fn cmd_tune(args: TuneArgs) -> Result<Outcome> {
    args.jobs.init()?;
    let datasets = args.input.load()?;
    if datasets.len() != 1 {
        return Err(Error::usage("tune takes exactly one --dataset"));
    }
    let ds = &datasets[0];
    let specs: Vec<TunerSpec> = args
        .tuners
        .iter()
        .map(|t| tuner_spec(t, &args.priority_options))
        .collect::<Result<_>>()?;

    // Seed each run from (base seed, tuner token, repeat index) so adding a
    // tuner or more repeats never perturbs existing trajectories.
    let mut runs: Vec<(TunerSpec, u64)> = Vec::new();
    for spec in &specs {
        let token = spec.token();
        for k in 0..args.repeats {
            runs.push((
                spec.clone(),
                derive_seed_indexed(args.seed.seed, &[token.as_str()], k as u64),
            ));
        }
    }
    let trajectories: Vec<Trajectory> = runs
        .par_iter()
        .map(|(spec, seed)| run_tuner(spec, ds, args.budget, *seed))
        .collect::<Result<_>>()?;

    let provenance = Provenance::new(ds.system.clone(), vec![ds.workload.clone()], args.seed.seed)
        .setting("tuners", args.tuners.join(","))
        .setting("budget", args.budget)
        .setting("repeats", args.repeats)
        .setting("priority_options", args.priority_options.join(","));
    Ok(Outcome {
        bundles: vec![ReportBundle::new(Payload::Trajectories(trajectories), provenance)],
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: false,
    })
}

fn cmd_dynamic(args: DynamicArgs) -> Result<Outcome> {
    args.jobs.init()?;
    let datasets = args.input.load()?;
    let mode = DynamicMode::parse(&args.mode)?;
    let spec = if args.priority_options.is_empty() {
        TunerSpec::new(TunerKind::Genetic)
    } else {
        TunerSpec::with_priority(TunerKind::Genetic, args.priority_options.clone())
    };

    // The repeat seed is shared by both modes, so restart and transfer runs
    // of the same repeat index are paired experiments.
    let runs = (0..args.repeats)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed_indexed(args.seed.seed, &["dynamic"], k as u64);
            run_dynamic(&spec, &datasets, mode, args.budget, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let workloads: Vec<String> = datasets.iter().map(|d| d.workload.clone()).collect();
    let provenance = Provenance::new(datasets[0].system.clone(), workloads, args.seed.seed)
        .setting("mode", mode.label())
        .setting("budget", args.budget)
        .setting("repeats", args.repeats)
        .setting("priority_options", args.priority_options.join(","));
    Ok(Outcome {
        bundles: vec![ReportBundle::new(Payload::Dynamic(runs), provenance)],
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: false,
    })
}

/// Final regret per (workload, run seed) plus the single tuner identity of
/// one trajectory CSV file.
#[derive(Debug)]
struct TrajectorySet {
    identity: String,
    final_regret: BTreeMap<String, BTreeMap<u64, f64>>,
}

fn read_trajectories(path: &Path) -> Result<TrajectorySet> {
    let blame = |message: String| Error::data(format!("{}: {message}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| blame(e.to_string()))?;
    let headers = reader.headers().map_err(|e| blame(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| blame(format!("missing column {name}")))
    };
    let seed_col = column("run_seed")?;
    let tuner_col = column("tuner")?;
    let workload_col = column("workload")?;
    let eval_col = column("eval_index")?;
    let regret_col = column("regret")?;
    let mode_col = headers.iter().position(|h| h == "mode");

    let mut tuners = BTreeSet::new();
    let mut modes = BTreeSet::new();
    // (workload, seed) -> (highest eval_index, its regret)
    let mut last: BTreeMap<(String, u64), (u64, f64)> = BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| blame(e.to_string()))?;
        let line = index + 2;
        let field = |col: usize| {
            record
                .get(col)
                .ok_or_else(|| blame(format!("line {line}: too few fields")))
        };
        let seed: u64 = field(seed_col)?
            .parse()
            .map_err(|_| blame(format!("line {line}: run_seed is not an integer")))?;
        let eval: u64 = field(eval_col)?
            .parse()
            .map_err(|_| blame(format!("line {line}: eval_index is not an integer")))?;
        let regret: f64 = field(regret_col)?
            .parse()
            .map_err(|_| blame(format!("line {line}: regret is not a number")))?;
        tuners.insert(field(tuner_col)?.to_string());
        if let Some(col) = mode_col {
            modes.insert(field(col)?.to_string());
        }
        let key = (field(workload_col)?.to_string(), seed);
        let entry = last.entry(key).or_insert((eval, regret));
        if eval >= entry.0 {
            *entry = (eval, regret);
        }
    }
    if last.is_empty() {
        return Err(blame("no trajectory rows".to_string()));
    }
    if tuners.len() > 1 {
        return Err(blame(format!(
            "mixes tuners {:?}; compare wants one identity per file",
            tuners.iter().collect::<Vec<_>>()
        )));
    }
    if modes.len() > 1 {
        return Err(blame(format!(
            "mixes modes {:?}; compare wants one identity per file",
            modes.iter().collect::<Vec<_>>()
        )));
    }
    let mut identity = tuners.into_iter().next().expect("one tuner");
    if let Some(mode) = modes.into_iter().next() {
        identity = format!("{identity}-{mode}");
    }

    let mut final_regret: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for ((workload, seed), (_, regret)) in last {
        final_regret.entry(workload).or_default().insert(seed, regret);
    }
    Ok(TrajectorySet {
        identity,
        final_regret,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn cmd_compare(args: CompareArgs) -> Result<Outcome> {
    let set_a = read_trajectories(&args.a)?;
    let set_b = read_trajectories(&args.b)?;
    let workloads_a: BTreeSet<&String> = set_a.final_regret.keys().collect();
    let workloads_b: BTreeSet<&String> = set_b.final_regret.keys().collect();
    if workloads_a != workloads_b {
        return Err(Error::data(format!(
            "trajectory files cover different workloads: {:?} vs {:?}",
            workloads_a, workloads_b
        )));
    }

    let mut rows = Vec::new();
    for (workload, by_seed_a) in &set_a.final_regret {
        let by_seed_b = &set_b.final_regret[workload];
        let sample_a: Vec<f64> = by_seed_a.values().copied().collect();
        let sample_b: Vec<f64> = by_seed_b.values().copied().collect();
        // Final regret: lower is better on both sides.
        let verdict = verdict(&sample_a, &sample_b, Orientation::LowerBetter)?;
        rows.push(ComparisonRow {
            system: args.system.clone(),
            workload: workload.clone(),
            mean_a: mean(&sample_a),
            std_a: sample_std(&sample_a),
            mean_b: mean(&sample_b),
            std_b: sample_std(&sample_b),
            verdict,
        });
    }

    let workloads: Vec<String> = set_a.final_regret.keys().cloned().collect();
    let table = ComparisonTable {
        name_a: set_a.identity,
        name_b: set_b.identity,
        rows,
    };
    let provenance = Provenance::new(args.system.clone(), workloads, 0)
        .setting("input_a", args.a.display())
        .setting("input_b", args.b.display());
    Ok(Outcome {
        bundles: vec![ReportBundle::new(Payload::Comparison(table), provenance)],
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: false,
    })
}

/// Reads an option,label CSV into a map keyed by option name.
fn read_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let blame = |message: String| Error::data(format!("{}: {message}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| blame(e.to_string()))?;
    let headers = reader.headers().map_err(|e| blame(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| blame(format!("missing column {name}")))
    };
    let option_col = column("option")?;
    let label_col = column("label")?;
    let mut labels = BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| blame(e.to_string()))?;
        let line = index + 2;
        let option = record
            .get(option_col)
            .ok_or_else(|| blame(format!("line {line}: too few fields")))?
            .to_string();
        let label = record
            .get(label_col)
            .ok_or_else(|| blame(format!("line {line}: too few fields")))?
            .to_string();
        if labels.insert(option.clone(), label).is_some() {
            return Err(blame(format!("duplicate option {option:?}")));
        }
    }
    if labels.is_empty() {
        return Err(blame("no label rows".to_string()));
    }
    Ok(labels)
}

/// Aligns two label maps on their (identical) option sets, in option order.
fn aligned_labels(
    a: &BTreeMap<String, String>,
    b: &BTreeMap<String, String>,
    path_a: &Path,
    path_b: &Path,
) -> Result<(Vec<String>, Vec<String>)> {
    if !a.keys().eq(b.keys()) {
        return Err(Error::data(format!(
            "label files {} and {} disagree on the option set",
            path_a.display(),
            path_b.display()
        )));
    }
    Ok((a.values().cloned().collect(), b.values().cloned().collect()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_agreement(args: AgreementArgs) -> Result<Outcome> {
    let human_a = read_labels(&args.human_a)?;
    let human_b = read_labels(&args.human_b)?;
    let (labels_a, labels_b) = aligned_labels(&human_a, &human_b, &args.human_a, &args.human_b)?;
    let human_kappa = cohens_kappa(&labels_a, &labels_b)?.value;

    let mut llm_names = Vec::new();
    let mut llm_kappas = Vec::new();
    if let Some(consensus_path) = &args.consensus {
        let consensus = read_labels(consensus_path)?;
        for llm_path in &args.llm {
            let llm = read_labels(llm_path)?;
            let (labels_llm, labels_consensus) =
                aligned_labels(&llm, &consensus, llm_path, consensus_path)?;
            llm_names.push(file_stem(llm_path));
            llm_kappas.push(cohens_kappa(&labels_llm, &labels_consensus)?.value);
        }
    }

    let summary = overall_agreement(human_kappa, &llm_kappas);
    let report = AgreementReport::new(&summary, &llm_names);
    let mut provenance = Provenance::new("labels", vec![], 0)
        .setting("human_a", args.human_a.display())
        .setting("human_b", args.human_b.display());
    if let Some(consensus) = &args.consensus {
        provenance = provenance.setting("consensus", consensus.display());
    }
    if !args.llm.is_empty() {
        let names: Vec<String> = args.llm.iter().map(|p| p.display().to_string()).collect();
        provenance = provenance.setting("llm", names.join(","));
    }
    Ok(Outcome {
        bundles: vec![ReportBundle::new(Payload::Agreement(report), provenance)],
        out: args.output.out,
        format: args.output.format,
        strict_degenerate: false,
    })
}

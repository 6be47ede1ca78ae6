//! Deterministic report emission.
//!
//! Every analysis result is wrapped in a [`ReportBundle`] carrying its
//! provenance (dataset identity, settings, seeds, tool version) and rendered
//! to JSON, CSV, or markdown. Rendering is a pure function of (bundle,
//! format): the same bundle always produces byte-identical output, keys are
//! sorted, and JSON floats use the shortest representation that round-trips.
//! Markdown rounds reals to six significant digits for readability.
//!
//! Files are written atomically (temp file + rename) and each write yields a
//! [`ManifestEntry`] so a run can close with a manifest listing every
//! artifact together with its content hash.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::landscape::LandscapeReport;
use crate::sensitivity::SensitivityReport;
use crate::stats::{AgreementSummary, Verdict};
use crate::tuners::{DynamicRun, Trajectory};

/// Tool name recorded in provenance blocks.
pub const TOOL_NAME: &str = "landscope";

/// Output format of [`render`] and [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::usage(format!(
                "unknown format {other:?}; expected json, csv, or markdown"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "markdown",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }

    /// Infers the format from a sink path's extension, if recognizable.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Some(Format::Json),
            Some("csv") => Some(Format::Csv),
            Some("md") | Some("markdown") => Some(Format::Markdown),
            _ => None,
        }
    }
}

/// One row of a two-sided comparison: summary statistics per side plus the
/// rank-sum verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub system: String,
    pub workload: String,
    pub mean_a: f64,
    pub std_a: f64,
    pub mean_b: f64,
    pub std_b: f64,
    pub verdict: Verdict,
}

/// Named comparison between two tuners or strategies, one row per workload.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub name_a: String,
    pub name_b: String,
    pub rows: Vec<ComparisonRow>,
}

/// Agreement summary with rater names attached for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub human_kappa: f64,
    /// (rater name, kappa vs consensus) in input order.
    pub llm: Vec<(String, f64)>,
    pub overall: f64,
    pub reliable: bool,
}

impl AgreementReport {
    /// Pairs an [`AgreementSummary`] with the rater names it was computed
    /// from. Names and kappas must correspond positionally.
    pub fn new(summary: &AgreementSummary, llm_names: &[String]) -> Self {
        assert_eq!(
            summary.per_llm_kappa.len(),
            llm_names.len(),
            "one name per rater kappa"
        );
        AgreementReport {
            human_kappa: summary.human_kappa,
            llm: llm_names
                .iter()
                .cloned()
                .zip(summary.per_llm_kappa.iter().copied())
                .collect(),
            overall: summary.overall,
            reliable: summary.reliable,
        }
    }
}

/// Typed result carried by a bundle. The landscape variant is boxed: it
/// dwarfs the others and would bloat every bundle otherwise.
#[derive(Debug, Clone)]
pub enum Payload {
    Landscape(Box<LandscapeReport>),
    Sensitivity(SensitivityReport),
    Trajectories(Vec<Trajectory>),
    Dynamic(Vec<DynamicRun>),
    Comparison(ComparisonTable),
    Agreement(AgreementReport),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Landscape(_) => "landscape",
            Payload::Sensitivity(_) => "sensitivity",
            Payload::Trajectories(_) | Payload::Dynamic(_) => "trajectories",
            Payload::Comparison(_) => "comparison",
            Payload::Agreement(_) => "agreement",
        }
    }
}

/// Everything needed to regenerate the payload: which inputs, which
/// settings, which seeds, which tool version.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub system: String,
    pub workloads: Vec<String>,
    pub seed: u64,
    /// Remaining knobs as sorted key/value text (budget, repeats, lag, ...).
    pub settings: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(system: impl Into<String>, workloads: Vec<String>, seed: u64) -> Self {
        Provenance {
            tool: TOOL_NAME.to_string(),
            version: crate::VERSION.to_string(),
            system: system.into(),
            workloads,
            seed,
            settings: BTreeMap::new(),
        }
    }

    pub fn setting(mut self, key: &str, value: impl ToString) -> Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }
}

/// A payload plus its provenance; the unit of emission.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub payload: Payload,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn new(payload: Payload, provenance: Provenance) -> Self {
        ReportBundle { payload, provenance }
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }
}

/// Record of one emitted artifact, suitable for a run manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// File name relative to the manifest location.
    pub path: String,
    /// Lowercase hex SHA-256 of the file contents.
    pub sha256: String,
    pub kind: String,
    pub format: String,
    pub provenance: Provenance,
}

/// Renders `x` with six significant digits, fixed-point.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

/// Shortest f64 text that parses back to the same value.
fn full(x: f64) -> String {
    format!("{x}")
}

fn opt_full(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// --- JSON ---------------------------------------------------------------

fn object(pairs: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (key, value) in pairs {
        map.insert(key.to_string(), value);
    }
    Value::Object(map)
}

fn opt<T: Into<Value>>(x: Option<T>) -> Value {
    x.map(Into::into).unwrap_or(Value::Null)
}

fn string_map(map: &BTreeMap<String, String>) -> Value {
    Value::Object(map.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect())
}

fn landscape_value(r: &LandscapeReport) -> Value {
    let local_optima = r.local_optima.as_ref().map(|l| {
        object(vec![
            ("members", Value::from(l.members.clone())),
            ("proportion", Value::from(l.proportion)),
            ("quality", Value::from(l.quality)),
            ("quality_degenerate", Value::from(l.quality_degenerate)),
            ("isolated", Value::from(l.isolated.clone())),
        ])
    });
    let basins = r.basins.as_ref().map(|b| {
        let proportions: Map<String, Value> = b
            .basin_proportion
            .iter()
            .map(|(&row, &p)| (row.to_string(), Value::from(p)))
            .collect();
        object(vec![
            ("assignment", Value::from(b.assignment.clone())),
            ("proportion_by_attractor", Value::Object(proportions)),
            ("plateau_attractors", Value::from(b.plateau_attractors.clone())),
        ])
    });
    let basin_labels = r.basin_labels.as_ref().map(|labels| {
        Value::Object(labels.iter().map(|(k, &v)| (k.clone(), Value::from(v))).collect())
    });
    object(vec![
        ("system", Value::from(r.system.as_str())),
        ("workload", Value::from(r.workload.as_str())),
        ("objective", Value::from(r.objective.to_string())),
        ("rows", Value::from(r.rows)),
        ("options", Value::from(r.options)),
        ("radius", opt(r.radius)),
        ("target_degree", Value::from(r.target_degree)),
        ("average_degree", opt(r.average_degree)),
        ("fdc", opt(r.fdc)),
        ("fdc_tier", opt(r.fdc_tier.map(|t| t.label()))),
        ("local_optima", local_optima.unwrap_or(Value::Null)),
        ("quality_tier", opt(r.quality_tier.map(|t| t.label()))),
        ("basins", basins.unwrap_or(Value::Null)),
        ("basin_labels", basin_labels.unwrap_or(Value::Null)),
        ("global_basin_proportion", opt(r.global_basin_proportion)),
        ("global_basin_easy", opt(r.global_basin_easy)),
        ("basin_threshold", Value::from(r.basin_threshold)),
        ("walk_length", opt(r.walk_length)),
        ("autocorrelation", opt(r.autocorrelation)),
        ("ruggedness_tier", opt(r.ruggedness_tier.map(|t| t.label()))),
        ("lag", Value::from(r.lag)),
        ("walk_seed", Value::from(r.walk_seed)),
        ("basin_seed", Value::from(r.basin_seed)),
        (
            "errors",
            Value::Object(r.errors.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect()),
        ),
    ])
}

fn sensitivity_value(r: &SensitivityReport) -> Value {
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|rec| {
            let skipped: Vec<Value> = rec
                .skipped
                .iter()
                .map(|s| {
                    object(vec![
                        ("value", Value::from(s.value.as_str())),
                        ("reason", Value::from(s.reason.as_str())),
                    ])
                })
                .collect();
            object(vec![
                ("option", Value::from(rec.option.as_str())),
                ("taxonomy", opt(rec.taxonomy.as_deref())),
                ("partition_values", Value::from(rec.partition_values.clone())),
                (
                    "partition_autocorrelations",
                    Value::from(rec.partition_autocorrelations.clone()),
                ),
                ("skipped", Value::Array(skipped)),
                ("rsd_percent", opt(rec.rsd)),
                ("unstable", Value::from(rec.unstable)),
                ("significant", Value::from(rec.significant)),
            ])
        })
        .collect();
    object(vec![
        ("system", Value::from(r.system.as_str())),
        ("workloads", Value::from(r.workloads.clone())),
        ("records", Value::Array(records)),
    ])
}

fn trajectory_value(t: &Trajectory) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            object(vec![
                ("eval_index", Value::from(s.eval_index)),
                ("row", Value::from(s.row)),
                ("configuration", Value::from(s.configuration.as_str())),
                ("performance", Value::from(s.performance)),
                ("best_so_far", Value::from(s.best_so_far)),
                ("regret", Value::from(s.regret)),
            ])
        })
        .collect();
    object(vec![
        ("tuner", Value::from(t.tuner.as_str())),
        ("seed", Value::from(t.seed)),
        ("workload", Value::from(t.workload.as_str())),
        ("steps", Value::Array(steps)),
        ("final_regret", Value::from(t.final_regret)),
    ])
}

fn dynamic_value(d: &DynamicRun) -> Value {
    let per_workload: Vec<Value> = d
        .per_workload
        .iter()
        .map(|w| {
            object(vec![
                ("workload", Value::from(w.workload.as_str())),
                ("position", Value::from(w.position)),
                ("trajectory", trajectory_value(&w.trajectory)),
            ])
        })
        .collect();
    object(vec![
        ("mode", Value::from(d.mode.label())),
        ("seed", Value::from(d.seed)),
        ("workload_order", Value::from(d.workload_order.clone())),
        ("per_workload", Value::Array(per_workload)),
    ])
}

fn comparison_value(t: &ComparisonTable) -> Value {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|row| {
            object(vec![
                ("system", Value::from(row.system.as_str())),
                ("workload", Value::from(row.workload.as_str())),
                ("mean_a", Value::from(row.mean_a)),
                ("std_a", Value::from(row.std_a)),
                ("mean_b", Value::from(row.mean_b)),
                ("std_b", Value::from(row.std_b)),
                ("p", Value::from(row.verdict.p_value)),
                ("a12", Value::from(row.verdict.a12)),
                ("label", Value::from(row.verdict.label.label())),
            ])
        })
        .collect();
    object(vec![
        ("name_a", Value::from(t.name_a.as_str())),
        ("name_b", Value::from(t.name_b.as_str())),
        ("rows", Value::Array(rows)),
    ])
}

fn agreement_value(a: &AgreementReport) -> Value {
    let llm: Vec<Value> = a
        .llm
        .iter()
        .map(|(name, kappa)| {
            object(vec![
                ("name", Value::from(name.as_str())),
                ("kappa", Value::from(*kappa)),
            ])
        })
        .collect();
    object(vec![
        ("human_kappa", Value::from(a.human_kappa)),
        ("llm", Value::Array(llm)),
        ("overall", Value::from(a.overall)),
        ("reliable", Value::from(a.reliable)),
    ])
}

fn provenance_value(p: &Provenance) -> Value {
    object(vec![
        ("tool", Value::from(p.tool.as_str())),
        ("version", Value::from(p.version.as_str())),
        ("system", Value::from(p.system.as_str())),
        ("workloads", Value::from(p.workloads.clone())),
        ("seed", Value::from(p.seed)),
        ("settings", string_map(&p.settings)),
    ])
}

/// The bundle as a JSON value; [`render`] with [`Format::Json`] is the
/// pretty-printed form of exactly this value.
pub fn json_value(bundle: &ReportBundle) -> Value {
    let payload = match &bundle.payload {
        Payload::Landscape(r) => landscape_value(r),
        Payload::Sensitivity(r) => sensitivity_value(r),
        Payload::Trajectories(ts) => Value::Array(ts.iter().map(trajectory_value).collect()),
        Payload::Dynamic(ds) => Value::Array(ds.iter().map(dynamic_value).collect()),
        Payload::Comparison(t) => comparison_value(t),
        Payload::Agreement(a) => agreement_value(a),
    };
    object(vec![
        ("kind", Value::from(bundle.kind())),
        ("payload", payload),
        ("provenance", provenance_value(&bundle.provenance)),
    ])
}

// --- CSV ----------------------------------------------------------------

/// In-memory CSV writer; writing to a Vec cannot fail.
fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>)) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer);
    let bytes = writer.into_inner().expect("flush to Vec");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn landscape_csv(r: &LandscapeReport) -> String {
    csv_string(|w| {
        w.write_record(["metric", "value"]).unwrap();
        let mut row = |metric: &str, value: String| {
            w.write_record([metric, value.as_str()]).unwrap();
        };
        row("system", r.system.clone());
        row("workload", r.workload.clone());
        row("objective", r.objective.to_string());
        row("rows", r.rows.to_string());
        row("options", r.options.to_string());
        row("radius", r.radius.map(|x| x.to_string()).unwrap_or_default());
        row("target_degree", full(r.target_degree));
        row("average_degree", opt_full(r.average_degree));
        row("fdc", opt_full(r.fdc));
        row(
            "fdc_tier",
            r.fdc_tier.map(|t| t.label().to_string()).unwrap_or_default(),
        );
        let optima = r.local_optima.as_ref();
        row(
            "local_optima_count",
            optima.map(|l| l.members.len().to_string()).unwrap_or_default(),
        );
        row("local_optima_proportion", opt_full(optima.map(|l| l.proportion)));
        row("local_optima_quality", opt_full(optima.map(|l| l.quality)));
        row(
            "quality_degenerate",
            optima.map(|l| l.quality_degenerate.to_string()).unwrap_or_default(),
        );
        row(
            "quality_tier",
            r.quality_tier.map(|t| t.label().to_string()).unwrap_or_default(),
        );
        row(
            "isolated_count",
            optima.map(|l| l.isolated.len().to_string()).unwrap_or_default(),
        );
        if let Some(labels) = &r.basin_labels {
            for (config, proportion) in labels {
                row(&format!("basin:{config}"), full(*proportion));
            }
        }
        row("global_basin_proportion", opt_full(r.global_basin_proportion));
        row(
            "global_basin_easy",
            r.global_basin_easy.map(|b| b.to_string()).unwrap_or_default(),
        );
        row("basin_threshold", full(r.basin_threshold));
        row(
            "walk_length",
            r.walk_length.map(|x| x.to_string()).unwrap_or_default(),
        );
        row("autocorrelation", opt_full(r.autocorrelation));
        row(
            "ruggedness_tier",
            r.ruggedness_tier.map(|t| t.label().to_string()).unwrap_or_default(),
        );
        row("lag", r.lag.to_string());
        row("walk_seed", r.walk_seed.to_string());
        row("basin_seed", r.basin_seed.to_string());
        for (metric, reason) in &r.errors {
            row(&format!("error:{metric}"), reason.clone());
        }
        if r.basins.is_some() {
            row(
                "note",
                "per-row basin assignment omitted; use the json format for full detail".to_string(),
            );
        }
    })
}

fn sensitivity_csv(r: &SensitivityReport) -> String {
    csv_string(|w| {
        w.write_record(["option", "taxonomy", "rsd_percent", "significant", "skipped"])
            .unwrap();
        for rec in &r.records {
            let rsd = if rec.unstable {
                "unstable".to_string()
            } else {
                opt_full(rec.rsd)
            };
            w.write_record([
                rec.option.as_str(),
                rec.taxonomy.as_deref().unwrap_or(""),
                rsd.as_str(),
                yes_no(rec.significant),
                rec.skipped.len().to_string().as_str(),
            ])
            .unwrap();
        }
    })
}

const TRAJECTORY_HEADER: [&str; 8] = [
    "run_seed",
    "tuner",
    "workload",
    "eval_index",
    "configuration",
    "performance",
    "best_so_far",
    "regret",
];

fn trajectory_rows(w: &mut csv::Writer<Vec<u8>>, t: &Trajectory, extra: Option<(usize, &str)>) {
    for step in &t.steps {
        let mut record = vec![
            t.seed.to_string(),
            t.tuner.clone(),
            t.workload.clone(),
            step.eval_index.to_string(),
            step.configuration.clone(),
            full(step.performance),
            full(step.best_so_far),
            full(step.regret),
        ];
        if let Some((position, mode)) = extra {
            record.push(position.to_string());
            record.push(mode.to_string());
        }
        w.write_record(&record).unwrap();
    }
}

fn trajectories_csv(ts: &[Trajectory]) -> String {
    csv_string(|w| {
        w.write_record(TRAJECTORY_HEADER).unwrap();
        for t in ts {
            trajectory_rows(w, t, None);
        }
    })
}

fn dynamic_csv(ds: &[DynamicRun]) -> String {
    csv_string(|w| {
        let mut header: Vec<&str> = TRAJECTORY_HEADER.to_vec();
        header.push("workload_position");
        header.push("mode");
        w.write_record(&header).unwrap();
        for d in ds {
            for wl in &d.per_workload {
                trajectory_rows(w, &wl.trajectory, Some((wl.position, d.mode.label())));
            }
        }
    })
}

fn comparison_csv(t: &ComparisonTable) -> String {
    csv_string(|w| {
        w.write_record([
            "system", "workload", "mean_a", "std_a", "mean_b", "std_b", "p", "a12", "label",
        ])
        .unwrap();
        for row in &t.rows {
            w.write_record([
                row.system.as_str(),
                row.workload.as_str(),
                full(row.mean_a).as_str(),
                full(row.std_a).as_str(),
                full(row.mean_b).as_str(),
                full(row.std_b).as_str(),
                full(row.verdict.p_value).as_str(),
                full(row.verdict.a12).as_str(),
                row.verdict.label.label(),
            ])
            .unwrap();
        }
    })
}

fn agreement_csv(a: &AgreementReport) -> String {
    csv_string(|w| {
        w.write_record(["measure", "value"]).unwrap();
        w.write_record(["human_kappa", full(a.human_kappa).as_str()]).unwrap();
        for (name, kappa) in &a.llm {
            w.write_record([format!("llm:{name}").as_str(), full(*kappa).as_str()])
                .unwrap();
        }
        w.write_record(["overall", full(a.overall).as_str()]).unwrap();
        w.write_record(["reliable", yes_no(a.reliable)]).unwrap();
    })
}

// --- Markdown -----------------------------------------------------------

fn landscape_markdown(r: &LandscapeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Landscape report: {} / {}\n\n", r.system, r.workload));
    out.push_str(&format!(
        "- objective: {}\n- rows: {}\n- options: {}\n",
        r.objective, r.rows, r.options
    ));
    match (r.radius, r.average_degree) {
        (Some(radius), Some(degree)) => out.push_str(&format!(
            "- neighborhood radius: {radius} (target average degree {}, achieved {})\n",
            sig6(r.target_degree),
            sig6(degree)
        )),
        _ => out.push_str(&format!(
            "- neighborhood radius: undefined (target average degree {})\n",
            sig6(r.target_degree)
        )),
    }
    out.push_str(&format!(
        "- seeds: walk {}, basins {} (lag {})\n\n",
        r.walk_seed, r.basin_seed, r.lag
    ));

    out.push_str("| metric | value | tier |\n| --- | --- | --- |\n");
    let tier = |label: Option<&str>| label.unwrap_or("").to_string();
    out.push_str(&format!(
        "| fitness-distance correlation | {} | {} |\n",
        opt_sig6(r.fdc),
        tier(r.fdc_tier.map(|t| t.label()))
    ));
    if let Some(optima) = &r.local_optima {
        out.push_str(&format!(
            "| local optima proportion | {} |  |\n",
            sig6(optima.proportion)
        ));
        let quality = if optima.quality_degenerate {
            format!("{} (no local optima)", sig6(optima.quality))
        } else {
            sig6(optima.quality)
        };
        out.push_str(&format!(
            "| local optima quality | {} | {} |\n",
            quality,
            tier(r.quality_tier.map(|t| t.label()))
        ));
    }
    if let Some(global) = r.global_basin_proportion {
        let easy = match r.global_basin_easy {
            Some(true) => "easy",
            Some(false) => "hard",
            None => "",
        };
        out.push_str(&format!(
            "| global basin proportion | {} | {easy} |\n",
            sig6(global)
        ));
    }
    out.push_str(&format!(
        "| autocorrelation (lag {}) | {} | {} |\n",
        r.lag,
        opt_sig6(r.autocorrelation),
        tier(r.ruggedness_tier.map(|t| t.label()))
    ));

    if let Some(labels) = &r.basin_labels {
        out.push_str("\n## Basins\n\n| attractor | proportion |\n| --- | --- |\n");
        for (config, proportion) in labels {
            out.push_str(&format!("| {config} | {} |\n", sig6(*proportion)));
        }
    }
    if !r.errors.is_empty() {
        out.push_str("\n## Undefined metrics\n\n| metric | reason |\n| --- | --- |\n");
        for (metric, reason) in &r.errors {
            out.push_str(&format!("| {metric} | {reason} |\n"));
        }
    }
    out
}

fn sensitivity_markdown(r: &SensitivityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# Option sensitivity: {} ({})\n\n",
        r.system,
        r.workloads.join(", ")
    ));
    out.push_str("| option | taxonomy | rsd % | significant | skipped |\n");
    out.push_str("| --- | --- | --- | --- | --- |\n");
    for rec in &r.records {
        let rsd = if rec.unstable {
            "unstable".to_string()
        } else {
            rec.rsd.map(sig6).unwrap_or_else(|| "n/a".to_string())
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            rec.option,
            rec.taxonomy.as_deref().unwrap_or(""),
            rsd,
            yes_no(rec.significant),
            rec.skipped.len()
        ));
    }
    out
}

fn trajectory_summary_row(t: &Trajectory, prefix: &str) -> String {
    let evaluations = t.steps.len();
    let best = t.steps.last().map(|s| sig6(s.best_so_far)).unwrap_or_default();
    format!(
        "{prefix}| {} | {} | {} | {evaluations} | {best} | {} |\n",
        t.seed,
        t.tuner,
        t.workload,
        sig6(t.final_regret)
    )
}

fn trajectories_markdown(ts: &[Trajectory]) -> String {
    let mut out = String::new();
    out.push_str("# Tuning trajectories\n\n");
    out.push_str("Per-evaluation detail is available in the json and csv formats.\n\n");
    out.push_str("| run seed | tuner | workload | evaluations | best performance | final regret |\n");
    out.push_str("| --- | --- | --- | --- | --- | --- |\n");
    for t in ts {
        out.push_str(&trajectory_summary_row(t, ""));
    }
    out
}

fn dynamic_markdown(ds: &[DynamicRun]) -> String {
    let mut out = String::new();
    out.push_str("# Dynamic tuning runs\n\n");
    out.push_str("Per-evaluation detail is available in the json and csv formats.\n\n");
    out.push_str(
        "| mode | position | run seed | tuner | workload | evaluations | best performance | final regret |\n",
    );
    out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- |\n");
    for d in ds {
        for wl in &d.per_workload {
            let prefix = format!("| {} | {} ", d.mode.label(), wl.position);
            out.push_str(&trajectory_summary_row(&wl.trajectory, &prefix));
        }
    }
    out
}

fn comparison_markdown(t: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Comparison: {} vs {}\n\n", t.name_a, t.name_b));
    out.push_str(&format!(
        "| system | workload | {} (mean ± std) | {} (mean ± std) | p | a12 | verdict |\n",
        t.name_a, t.name_b
    ));
    out.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
    for row in &t.rows {
        out.push_str(&format!(
            "| {} | {} | {} ± {} | {} ± {} | {} | {} | {} |\n",
            row.system,
            row.workload,
            sig6(row.mean_a),
            sig6(row.std_a),
            sig6(row.mean_b),
            sig6(row.std_b),
            sig6(row.verdict.p_value),
            sig6(row.verdict.a12),
            row.verdict.label.label()
        ));
    }
    out
}

fn agreement_markdown(a: &AgreementReport) -> String {
    let mut out = String::new();
    out.push_str("# Label agreement\n\n");
    out.push_str("| pair | kappa |\n| --- | --- |\n");
    out.push_str(&format!("| human vs human | {} |\n", sig6(a.human_kappa)));
    for (name, kappa) in &a.llm {
        out.push_str(&format!("| {name} vs consensus | {} |\n", sig6(*kappa)));
    }
    out.push_str(&format!("\nOverall: {} ({})\n", sig6(a.overall), if a.reliable { "reliable" } else { "not reliable" }));
    out
}

// --- Entry points -------------------------------------------------------

/// Renders the bundle to text. Pure: equal inputs give byte-identical
/// output.
pub fn render(bundle: &ReportBundle, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&json_value(bundle))
                .expect("report values contain no non-serializable data");
            text.push('\n');
            text
        }
        Format::Csv => match &bundle.payload {
            Payload::Landscape(r) => landscape_csv(r),
            Payload::Sensitivity(r) => sensitivity_csv(r),
            Payload::Trajectories(ts) => trajectories_csv(ts),
            Payload::Dynamic(ds) => dynamic_csv(ds),
            Payload::Comparison(t) => comparison_csv(t),
            Payload::Agreement(a) => agreement_csv(a),
        },
        Format::Markdown => match &bundle.payload {
            Payload::Landscape(r) => landscape_markdown(r),
            Payload::Sensitivity(r) => sensitivity_markdown(r),
            Payload::Trajectories(ts) => trajectories_markdown(ts),
            Payload::Dynamic(ds) => dynamic_markdown(ds),
            Payload::Comparison(t) => comparison_markdown(t),
            Payload::Agreement(a) => agreement_markdown(a),
        },
    }
}

/// Lowercase hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Writes bytes atomically: temp file in the sink's directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Renders and writes the bundle, returning its manifest record.
pub fn emit(bundle: &ReportBundle, format: Format, sink: &Path) -> Result<ManifestEntry> {
    let rendered = render(bundle, format);
    write_atomic(sink, rendered.as_bytes())?;
    let path = sink
        .file_name()
        .map(|name| name.to_string_lossy().into_owned())
        .unwrap_or_else(|| sink.display().to_string());
    Ok(ManifestEntry {
        path,
        sha256: sha256_hex(rendered.as_bytes()),
        kind: bundle.kind().to_string(),
        format: format.name().to_string(),
        provenance: bundle.provenance.clone(),
    })
}

/// Manifest JSON over all artifacts of a run, sorted by file name.
pub fn manifest_json(entries: &[ManifestEntry]) -> String {
    let mut sorted: Vec<&ManifestEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let artifacts: Vec<Value> = sorted
        .iter()
        .map(|e| {
            object(vec![
                ("path", Value::from(e.path.as_str())),
                ("sha256", Value::from(e.sha256.as_str())),
                ("kind", Value::from(e.kind.as_str())),
                ("format", Value::from(e.format.as_str())),
                ("provenance", provenance_value(&e.provenance)),
            ])
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&object(vec![(
        "artifacts",
        Value::Array(artifacts),
    )]))
    .expect("manifest values are serializable");
    text.push('\n');
    text
}

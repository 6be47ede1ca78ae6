//! Measured configuration-performance datasets.
//!
//! A dataset is a CSV of measurements (one row per configuration, a final
//! `performance` column) plus a small TOML metadata file declaring the
//! system, workload, optimization objective, and per-option kinds. Option
//! domains may be declared in the metadata or inferred from the observed
//! values; either way they are stored sorted by a deterministic value
//! comparison, and configurations are stored as indices into them.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization direction for the performance column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minimize,
    Maximize,
}

impl Objective {
    /// True when `a` is strictly preferable to `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::Minimize => a < b,
            Objective::Maximize => a > b,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "minimize" => Ok(Objective::Minimize),
            "maximize" => Ok(Objective::Maximize),
            other => Err(Error::data(format!(
                "objective must be \"minimize\" or \"maximize\", got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Minimize => write!(f, "minimize"),
            Objective::Maximize => write!(f, "maximize"),
        }
    }
}

/// Value kind shared by all values of one option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Boolean,
    Integer,
    Real,
    Enumerated,
}

impl OptionKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "boolean" => Ok(OptionKind::Boolean),
            "integer" => Ok(OptionKind::Integer),
            "real" => Ok(OptionKind::Real),
            "enumerated" => Ok(OptionKind::Enumerated),
            other => Err(Error::data(format!("unknown option kind {other:?}"))),
        }
    }

    /// Numeric kinds get endpoint-jump boundary mutation; the rest resample.
    pub fn is_numeric(self) -> bool {
        matches!(self, OptionKind::Integer | OptionKind::Real)
    }
}

/// One admissible value of an option.
#[derive(Debug, Clone, PartialEq)]
pub enum OptionValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Enum(String),
}

impl OptionValue {
    pub fn kind(&self) -> OptionKind {
        match self {
            OptionValue::Bool(_) => OptionKind::Boolean,
            OptionValue::Int(_) => OptionKind::Integer,
            OptionValue::Real(_) => OptionKind::Real,
            OptionValue::Enum(_) => OptionKind::Enumerated,
        }
    }

    /// Deterministic total order used to canonicalize domains.
    pub fn cmp_values(&self, other: &Self) -> Ordering {
        use OptionValue::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Enum(a), Enum(b)) => a.cmp(b),
            // Mixed kinds never share a domain; order by kind tag so the
            // comparison is still total.
            (a, b) => (a.tag()).cmp(&b.tag()),
        }
    }

    fn tag(&self) -> u8 {
        match self {
            OptionValue::Bool(_) => 0,
            OptionValue::Int(_) => 1,
            OptionValue::Real(_) => 2,
            OptionValue::Enum(_) => 3,
        }
    }

    /// Parses a CSV cell under the declared kind.
    pub fn parse(kind: OptionKind, cell: &str) -> Result<Self> {
        match kind {
            OptionKind::Boolean => match cell.trim() {
                "true" | "1" => Ok(OptionValue::Bool(true)),
                "false" | "0" => Ok(OptionValue::Bool(false)),
                other => Err(Error::data(format!("cannot parse {other:?} as boolean"))),
            },
            OptionKind::Integer => cell
                .trim()
                .parse::<i64>()
                .map(OptionValue::Int)
                .map_err(|_| Error::data(format!("cannot parse {cell:?} as integer"))),
            OptionKind::Real => {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::data(format!("cannot parse {cell:?} as real")))?;
                if !v.is_finite() {
                    return Err(Error::data(format!("non-finite option value {cell:?}")));
                }
                Ok(OptionValue::Real(v))
            }
            OptionKind::Enumerated => Ok(OptionValue::Enum(cell.to_string())),
        }
    }

    /// Canonical text form; reparsing under the same kind round-trips.
    pub fn render(&self) -> String {
        match self {
            OptionValue::Bool(b) => b.to_string(),
            OptionValue::Int(i) => i.to_string(),
            OptionValue::Real(r) => format!("{r}"),
            OptionValue::Enum(s) => s.clone(),
        }
    }
}

/// Schema entry for one configuration option.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    pub name: String,
    pub kind: OptionKind,
    /// Sorted, duplicate-free admissible values.
    pub domain: Vec<OptionValue>,
    pub taxonomy: Option<String>,
}

impl OptionSpec {
    pub fn value(&self, index: u16) -> &OptionValue {
        &self.domain[index as usize]
    }

    fn index_of(&self, value: &OptionValue) -> Option<u16> {
        self.domain
            .binary_search_by(|probe| probe.cmp_values(value))
            .ok()
            .map(|i| i as u16)
    }
}

/// A configuration as per-option indices into the option domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub values: Vec<u16>,
}

impl Configuration {
    pub fn new(values: Vec<u16>) -> Self {
        Configuration { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One measured row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub configuration: Configuration,
    pub performance: f64,
}

/// The tie set of rows attaining the dataset's best performance.
///
/// On sampled data the true global optimum is usually unmeasured, so the
/// best measured rows stand in for it.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalOptimumProxy {
    /// Row indices, ascending.
    pub rows: Vec<usize>,
    pub performance: f64,
}

/// A validated, deduplicated dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub system: String,
    pub workload: String,
    pub objective: Objective,
    options: Vec<OptionSpec>,
    rows: Vec<Row>,
    by_config: HashMap<Vec<u16>, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.system == other.system
            && self.workload == other.workload
            && self.objective == other.objective
            && self.options == other.options
            && self.rows == other.rows
    }
}

/// Raw per-option declaration before domains are resolved.
#[derive(Debug, Clone)]
pub struct OptionDecl {
    pub name: String,
    pub kind: OptionKind,
    pub declared_domain: Option<Vec<OptionValue>>,
    pub taxonomy: Option<String>,
}

impl Dataset {
    /// Builds a dataset from raw values, inferring or validating domains,
    /// deduplicating identical rows, and rejecting conflicting duplicates.
    pub fn from_values(
        system: impl Into<String>,
        workload: impl Into<String>,
        objective: Objective,
        decls: Vec<OptionDecl>,
        raw_rows: Vec<(Vec<OptionValue>, f64)>,
    ) -> Result<Self> {
        let system = system.into();
        let workload = workload.into();
        if decls.is_empty() {
            return Err(Error::data("dataset declares no options"));
        }
        let mut seen_names = BTreeSet::new();
        for d in &decls {
            if d.name == "performance" {
                return Err(Error::data(
                    "option name \"performance\" collides with the performance column",
                ));
            }
            if !seen_names.insert(d.name.clone()) {
                return Err(Error::data(format!("duplicate option name {:?}", d.name)));
            }
        }

        // Resolve domains: declared ones are canonicalized and must cover the
        // observed values; otherwise the sorted distinct observed values.
        let n = decls.len();
        let mut observed: Vec<Vec<OptionValue>> = vec![Vec::new(); n];
        for (values, _) in &raw_rows {
            if values.len() != n {
                return Err(Error::data(format!(
                    "row has {} values, expected {}",
                    values.len(),
                    n
                )));
            }
            for (i, v) in values.iter().enumerate() {
                if v.kind() != decls[i].kind {
                    return Err(Error::data(format!(
                        "option {:?} declared {:?} but a row holds {:?}",
                        decls[i].name,
                        decls[i].kind,
                        v.kind()
                    )));
                }
                observed[i].push(v.clone());
            }
        }

        let mut options = Vec::with_capacity(n);
        for (decl, mut obs) in decls.into_iter().zip(observed) {
            obs.sort_by(|a, b| a.cmp_values(b));
            obs.dedup_by(|a, b| a.cmp_values(b) == Ordering::Equal);
            let domain = match decl.declared_domain {
                Some(mut declared) => {
                    for v in &declared {
                        if v.kind() != decl.kind {
                            return Err(Error::data(format!(
                                "domain of option {:?} holds a {:?} value",
                                decl.name,
                                v.kind()
                            )));
                        }
                    }
                    declared.sort_by(|a, b| a.cmp_values(b));
                    let before = declared.len();
                    declared.dedup_by(|a, b| a.cmp_values(b) == Ordering::Equal);
                    if declared.len() != before {
                        return Err(Error::data(format!(
                            "domain of option {:?} contains duplicates",
                            decl.name
                        )));
                    }
                    for v in &obs {
                        if declared
                            .binary_search_by(|probe| probe.cmp_values(v))
                            .is_err()
                        {
                            return Err(Error::data(format!(
                                "value {:?} of option {:?} is outside the declared domain",
                                v.render(),
                                decl.name
                            )));
                        }
                    }
                    declared
                }
                None => obs,
            };
            if domain.is_empty() {
                return Err(Error::data(format!(
                    "option {:?} has an empty domain",
                    decl.name
                )));
            }
            if domain.len() > usize::from(u16::MAX) {
                return Err(Error::data(format!(
                    "domain of option {:?} exceeds {} values",
                    decl.name,
                    u16::MAX
                )));
            }
            options.push(OptionSpec {
                name: decl.name,
                kind: decl.kind,
                domain,
                taxonomy: decl.taxonomy,
            });
        }

        // Index rows, deduplicating exact duplicates and rejecting rows that
        // repeat a configuration with a different performance.
        let mut rows: Vec<Row> = Vec::with_capacity(raw_rows.len());
        let mut by_config: HashMap<Vec<u16>, usize> = HashMap::new();
        for (values, performance) in raw_rows {
            if !performance.is_finite() {
                return Err(Error::data(format!(
                    "non-finite performance {performance:?}"
                )));
            }
            let mut indices = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                // Observed values are in the domain by construction above.
                indices.push(options[i].index_of(v).expect("observed value in domain"));
            }
            match by_config.get(&indices) {
                Some(&at) => {
                    if rows[at].performance != performance {
                        return Err(Error::data(format!(
                            "conflicting duplicate: configuration {} measured as {} and {}",
                            render_values(&options, &rows[at].configuration),
                            rows[at].performance,
                            performance
                        )));
                    }
                    // Identical duplicate: keep the first occurrence.
                }
                None => {
                    by_config.insert(indices.clone(), rows.len());
                    rows.push(Row {
                        configuration: Configuration::new(indices),
                        performance,
                    });
                }
            }
        }

        if rows.len() < 2 {
            return Err(Error::data(format!(
                "dataset needs at least 2 distinct rows, got {}",
                rows.len()
            )));
        }

        Ok(Dataset {
            system,
            workload,
            objective,
            options,
            rows,
            by_config,
        })
    }

    /// Loads a dataset from a measurements CSV and a TOML metadata file.
    pub fn load(csv_path: &Path, meta_path: &Path) -> Result<Self> {
        let meta_text = std::fs::read_to_string(meta_path)
            .map_err(|e| Error::data(format!("cannot read {}: {e}", meta_path.display())))?;
        let meta: MetaFile = toml::from_str(&meta_text)
            .map_err(|e| Error::data(format!("invalid metadata {}: {e}", meta_path.display())))?;
        let objective = Objective::parse(&meta.objective)?;

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(csv_path)
            .map_err(|e| Error::data(format!("cannot read {}: {e}", csv_path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::data(format!("invalid CSV header: {e}")))?
            .clone();
        let cols: Vec<String> = headers.iter().map(str::to_string).collect();
        if cols.last().map(String::as_str) != Some("performance") {
            return Err(Error::data(
                "CSV must end with a \"performance\" column after the option columns",
            ));
        }
        let option_names = &cols[..cols.len() - 1];
        if option_names.is_empty() {
            return Err(Error::data("CSV declares no option columns"));
        }

        // The CSV header order is the canonical option order; metadata is
        // keyed by name and must cover every column.
        let mut decls = Vec::with_capacity(option_names.len());
        for name in option_names {
            let m = meta.options.get(name).ok_or_else(|| {
                Error::data(format!("missing metadata for option column {name:?}"))
            })?;
            let kind = OptionKind::parse(&m.kind)?;
            let declared_domain = match &m.domain {
                Some(values) => {
                    let mut domain = Vec::with_capacity(values.len());
                    for v in values {
                        domain.push(meta_value(kind, v)?);
                    }
                    Some(domain)
                }
                None => None,
            };
            decls.push(OptionDecl {
                name: name.clone(),
                kind,
                declared_domain,
                taxonomy: m.taxonomy.clone(),
            });
        }
        for name in meta.options.keys() {
            if !option_names.iter().any(|c| c == name) {
                return Err(Error::data(format!(
                    "metadata declares option {name:?} missing from the CSV"
                )));
            }
        }

        let mut raw_rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::data(format!("CSV row {}: {e}", line + 2)))?;
            if record.len() != cols.len() {
                return Err(Error::data(format!(
                    "CSV row {} has {} fields, expected {}",
                    line + 2,
                    record.len(),
                    cols.len()
                )));
            }
            let mut values = Vec::with_capacity(decls.len());
            for (i, decl) in decls.iter().enumerate() {
                values.push(OptionValue::parse(decl.kind, &record[i]).map_err(|e| {
                    Error::data(format!("CSV row {}, column {:?}: {e}", line + 2, decl.name))
                })?);
            }
            let perf_cell = record[cols.len() - 1].trim();
            let performance: f64 = perf_cell.parse().map_err(|_| {
                Error::data(format!(
                    "CSV row {}: cannot parse performance {perf_cell:?}",
                    line + 2
                ))
            })?;
            raw_rows.push((values, performance));
        }

        Dataset::from_values(meta.system, meta.workload, objective, decls, raw_rows)
    }

    /// Writes the dataset back as CSV + metadata; reloading reproduces it.
    pub fn save(&self, csv_path: &Path, meta_path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(csv_path)
            .map_err(|e| Error::data(format!("cannot write {}: {e}", csv_path.display())))?;
        let mut header: Vec<&str> = self.options.iter().map(|o| o.name.as_str()).collect();
        header.push("performance");
        writer
            .write_record(&header)
            .and_then(|()| {
                for row in &self.rows {
                    let mut record: Vec<String> = row
                        .configuration
                        .values
                        .iter()
                        .zip(&self.options)
                        .map(|(&idx, opt)| opt.value(idx).render())
                        .collect();
                    record.push(format!("{}", row.performance));
                    writer.write_record(&record)?;
                }
                writer.flush().map_err(csv::Error::from)
            })
            .map_err(|e| Error::data(format!("cannot write {}: {e}", csv_path.display())))?;

        let mut meta = String::new();
        meta.push_str(&format!("system = {:?}\n", self.system));
        meta.push_str(&format!("workload = {:?}\n", self.workload));
        meta.push_str(&format!("objective = \"{}\"\n", self.objective));
        for opt in &self.options {
            meta.push_str(&format!("\n[options.{:?}]\n", opt.name));
            let kind = match opt.kind {
                OptionKind::Boolean => "boolean",
                OptionKind::Integer => "integer",
                OptionKind::Real => "real",
                OptionKind::Enumerated => "enumerated",
            };
            meta.push_str(&format!("kind = \"{kind}\"\n"));
            let rendered: Vec<String> = opt
                .domain
                .iter()
                .map(|v| match v {
                    OptionValue::Bool(b) => b.to_string(),
                    OptionValue::Int(i) => i.to_string(),
                    OptionValue::Real(r) => {
                        let s = format!("{r}");
                        // TOML floats need a decimal point or exponent.
                        if s.contains('.') || s.contains('e') || s.contains('E') {
                            s
                        } else {
                            format!("{s}.0")
                        }
                    }
                    OptionValue::Enum(s) => format!("{s:?}"),
                })
                .collect();
            meta.push_str(&format!("domain = [{}]\n", rendered.join(", ")));
            if let Some(t) = &opt.taxonomy {
                meta.push_str(&format!("taxonomy = {t:?}\n"));
            }
        }
        std::fs::write(meta_path, meta)
            .map_err(|e| Error::data(format!("cannot write {}: {e}", meta_path.display())))?;
        Ok(())
    }

    /// The tie set of rows attaining the best measured performance.
    pub fn best_configuration(&self) -> GlobalOptimumProxy {
        let mut best = self.rows[0].performance;
        for row in &self.rows[1..] {
            if self.objective.better(row.performance, best) {
                best = row.performance;
            }
        }
        let rows: Vec<usize> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.performance == best)
            .map(|(i, _)| i)
            .collect();
        GlobalOptimumProxy {
            rows,
            performance: best,
        }
    }

    pub fn n_options(&self) -> usize {
        self.options.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn options(&self) -> &[OptionSpec] {
        &self.options
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &Row {
        &self.rows[index]
    }

    pub fn performance(&self, index: usize) -> f64 {
        self.rows[index].performance
    }

    /// Exact-match row lookup by configuration.
    pub fn row_of_config(&self, configuration: &Configuration) -> Option<usize> {
        self.by_config.get(&configuration.values).copied()
    }

    pub fn option_named(&self, name: &str) -> Option<usize> {
        self.options.iter().position(|o| o.name == name)
    }

    /// Renders a configuration as comma-joined option values.
    pub fn render_config(&self, configuration: &Configuration) -> String {
        render_values(&self.options, configuration)
    }

    /// Worst and best performance under the objective, as (worst, best).
    pub fn performance_span(&self) -> (f64, f64) {
        let mut worst = self.rows[0].performance;
        let mut best = self.rows[0].performance;
        for row in &self.rows[1..] {
            if self.objective.better(row.performance, best) {
                best = row.performance;
            }
            if self.objective.better(worst, row.performance) {
                worst = row.performance;
            }
        }
        (worst, best)
    }

    /// True when both datasets declare the same option schema.
    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.options == other.options
    }
}

fn render_values(options: &[OptionSpec], configuration: &Configuration) -> String {
    configuration
        .values
        .iter()
        .zip(options)
        .map(|(&idx, opt)| opt.value(idx).render())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Deserialize)]
struct MetaFile {
    system: String,
    workload: String,
    objective: String,
    #[serde(default)]
    options: std::collections::BTreeMap<String, MetaOption>,
}

#[derive(Debug, Deserialize)]
struct MetaOption {
    kind: String,
    #[serde(default)]
    domain: Option<Vec<toml::Value>>,
    #[serde(default)]
    taxonomy: Option<String>,
}

fn meta_value(kind: OptionKind, v: &toml::Value) -> Result<OptionValue> {
    match (kind, v) {
        (OptionKind::Boolean, toml::Value::Boolean(b)) => Ok(OptionValue::Bool(*b)),
        (OptionKind::Integer, toml::Value::Integer(i)) => Ok(OptionValue::Int(*i)),
        (OptionKind::Real, toml::Value::Float(f)) if f.is_finite() => Ok(OptionValue::Real(*f)),
        (OptionKind::Real, toml::Value::Integer(i)) => Ok(OptionValue::Real(*i as f64)),
        (OptionKind::Enumerated, toml::Value::String(s)) => Ok(OptionValue::Enum(s.clone())),
        _ => Err(Error::data(format!(
            "domain value {v} does not match option kind {kind:?}"
        ))),
    }
}

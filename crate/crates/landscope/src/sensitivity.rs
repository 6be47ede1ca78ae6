//! Per-option ruggedness sensitivity: hold one option at each of its values,
//! run the seeded random-walk autocorrelation inside every such subset, and
//! measure how much r varies across subsets as a relative standard deviation
//! (RSD). Options whose RSD clears a threshold shape the landscape; options
//! the landscape ignores come out near zero.

use std::collections::BTreeMap;

use crate::dataset::{Dataset, OptionDecl, OptionValue};
use crate::error::{Error, Result};
use crate::landscape::{autocorrelation, random_walk};
use crate::seeding::derive_seed;
use crate::stats::{median, sample_std};

/// |mean r| below this marks the RSD unstable instead of reporting an
/// astronomically large percentage.
const UNSTABLE_MEAN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivitySettings {
    /// RSD percentage at or above which an option counts as significant.
    pub rsd_threshold: f64,
    /// Partitions holding fewer rows are skipped rather than analyzed.
    pub min_rows: usize,
    /// Autocorrelation lag along each subset walk.
    pub lag: usize,
    /// Split many-valued numeric options into low/high halves about the
    /// median instead of one partition per value.
    pub bin_numeric: bool,
    /// Base seed. Subset walks derive their seed from this, the workload, and
    /// the option name, so every partition of one option walks with the same
    /// seed; structurally identical partitions then yield rsd = 0 exactly.
    pub seed: u64,
}

impl Default for SensitivitySettings {
    fn default() -> Self {
        SensitivitySettings {
            rsd_threshold: 5.0,
            min_rows: 8,
            lag: 1,
            bin_numeric: false,
            seed: 0,
        }
    }
}

/// One subset of rows sharing a value (or bin) of the studied option.
#[derive(Debug, Clone)]
pub struct Partition {
    /// Rendered option value, or "low"/"high" for binned numeric options.
    pub value: String,
    /// Parent row indices, in parent order.
    pub rows: Vec<usize>,
    /// Sub-dataset to analyze; None when the partition is skipped.
    pub dataset: Option<Dataset>,
    /// Why the partition is excluded from analysis, when it is.
    pub skipped: Option<String>,
}

fn numeric(v: &OptionValue) -> f64 {
    match v {
        OptionValue::Int(i) => *i as f64,
        OptionValue::Real(r) => *r,
        _ => unreachable!("binning is gated on numeric kinds"),
    }
}

/// Sub-dataset over the given parent rows, optionally dropping one option
/// column. Partitions hold the studied option fixed, so dropping it keeps the
/// remaining configurations distinct.
fn sub_dataset(ds: &Dataset, rows: &[usize], drop: Option<usize>) -> Dataset {
    let decls: Vec<OptionDecl> = ds
        .options()
        .iter()
        .enumerate()
        .filter(|(o, _)| Some(*o) != drop)
        .map(|(_, spec)| OptionDecl {
            name: spec.name.clone(),
            kind: spec.kind,
            declared_domain: Some(spec.domain.clone()),
            taxonomy: spec.taxonomy.clone(),
        })
        .collect();
    let raw: Vec<(Vec<OptionValue>, f64)> = rows
        .iter()
        .map(|&i| {
            let row = ds.row(i);
            let values = ds
                .options()
                .iter()
                .enumerate()
                .filter(|(o, _)| Some(*o) != drop)
                .map(|(o, spec)| spec.value(row.configuration.values[o]).clone())
                .collect();
            (values, row.performance)
        })
        .collect();
    Dataset::from_values(&ds.system, &ds.workload, ds.objective, decls, raw)
        .expect("partition of a valid dataset is well-formed")
}

/// Splits the dataset into one subset per observed value of `option` (or two
/// median bins for many-valued numeric options when enabled). Each usable
/// subset drops the studied column, holding it fixed while everything else
/// varies; binned subsets keep the column because it still varies inside a
/// bin. Subsets below the minimum row count are marked skipped.
pub fn partition_by_option(
    ds: &Dataset,
    option: &str,
    settings: &SensitivitySettings,
) -> Result<Vec<Partition>> {
    let idx = ds
        .option_named(option)
        .ok_or_else(|| Error::data(format!("no option named {option:?}")))?;
    let spec = &ds.options()[idx];

    let mut by_value: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (i, row) in ds.rows().iter().enumerate() {
        by_value.entry(row.configuration.values[idx]).or_default().push(i);
    }
    if by_value.len() < 2 {
        return Err(Error::data(format!(
            "nothing to partition: option {option:?} is constant in the dataset"
        )));
    }

    let bin = settings.bin_numeric && spec.kind.is_numeric() && by_value.len() > 2;
    let groups: Vec<(String, Vec<usize>, Option<usize>)> = if bin {
        let nums: Vec<f64> = ds
            .rows()
            .iter()
            .map(|r| numeric(spec.value(r.configuration.values[idx])))
            .collect();
        let mut cut = median(&nums);
        let low_count = nums.iter().filter(|&&v| v <= cut).count();
        if low_count == 0 || low_count == nums.len() {
            // The median coincides with an extreme; fall back to the range
            // midpoint, which always separates min from max.
            let lo = nums.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            cut = (lo + hi) / 2.0;
        }
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for (i, &v) in nums.iter().enumerate() {
            if v <= cut {
                low.push(i);
            } else {
                high.push(i);
            }
        }
        vec![("low".to_string(), low, None), ("high".to_string(), high, None)]
    } else {
        by_value
            .into_iter()
            .map(|(v, rows)| (spec.value(v).render(), rows, Some(idx)))
            .collect()
    };

    // A dataset needs two distinct rows, so the floor is 2 regardless of the
    // configured minimum.
    let min_rows = settings.min_rows.max(2);
    Ok(groups
        .into_iter()
        .map(|(value, rows, drop)| {
            if rows.len() < min_rows {
                Partition {
                    value,
                    skipped: Some(format!("insufficient rows ({} < {min_rows})", rows.len())),
                    dataset: None,
                    rows,
                }
            } else {
                Partition {
                    value,
                    dataset: Some(sub_dataset(ds, &rows, drop)),
                    skipped: None,
                    rows,
                }
            }
        })
        .collect())
}

/// Relative standard deviation as a percentage: 100 * sample std / |mean|.
/// None when |mean| < 1e-6, where the ratio loses numerical meaning.
pub fn rsd_percent(values: &[f64]) -> Option<f64> {
    debug_assert!(values.len() >= 2, "rsd needs at least two values");
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean.abs() < UNSTABLE_MEAN {
        return None;
    }
    Some(100.0 * sample_std(values) / mean.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPartition {
    pub value: String,
    pub reason: String,
}

/// Sensitivity verdict for one option.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRecord {
    pub option: String,
    pub taxonomy: Option<String>,
    /// One label per partition, in domain (or bin) order.
    pub partition_values: Vec<String>,
    /// r per usable partition: `partition_values` minus the skipped ones, in
    /// the same order.
    pub partition_autocorrelations: Vec<f64>,
    pub skipped: Vec<SkippedPartition>,
    /// RSD percentage across the usable autocorrelations; None when fewer
    /// than two partitions were usable or the mean is unstably close to zero.
    pub rsd: Option<f64>,
    /// The RSD denominator |mean r| fell below 1e-6.
    pub unstable: bool,
    pub significant: bool,
}

struct SubsetOutcome {
    value: String,
    r: Option<f64>,
    skip_reason: Option<String>,
}

/// Walks every usable partition of one option with the option's shared seed.
fn subset_outcomes(
    ds: &Dataset,
    option: &str,
    settings: &SensitivitySettings,
) -> Result<Vec<SubsetOutcome>> {
    let seed = derive_seed(settings.seed, &["sensitivity", &ds.workload, option]);
    let parts = partition_by_option(ds, option, settings)?;
    Ok(parts
        .into_iter()
        .map(|p| match p.dataset {
            Some(sub) => {
                let walk = random_walk(&sub, seed);
                match autocorrelation(&walk, &sub, settings.lag) {
                    Ok(r) => SubsetOutcome {
                        value: p.value,
                        r: Some(r),
                        skip_reason: None,
                    },
                    // Flat or too-small fitness sequences are a property of
                    // the subset, not of the request: skip, don't fail.
                    Err(e) => SubsetOutcome {
                        value: p.value,
                        r: None,
                        skip_reason: Some(e.to_string()),
                    },
                }
            }
            None => SubsetOutcome {
                value: p.value,
                r: None,
                skip_reason: p.skipped,
            },
        })
        .collect())
}

fn finish_record(
    option: &str,
    taxonomy: Option<String>,
    outcomes: Vec<SubsetOutcome>,
    settings: &SensitivitySettings,
) -> SensitivityRecord {
    let partition_values: Vec<String> = outcomes.iter().map(|o| o.value.clone()).collect();
    let mut rs = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o.r {
            Some(r) => rs.push(r),
            None => skipped.push(SkippedPartition {
                value: o.value,
                reason: o.skip_reason.unwrap_or_else(|| "skipped".to_string()),
            }),
        }
    }
    let (rsd, unstable) = if rs.len() < 2 {
        (None, false)
    } else {
        match rsd_percent(&rs) {
            Some(v) => (Some(v), false),
            None => (None, true),
        }
    };
    let significant = rsd.is_some_and(|v| v >= settings.rsd_threshold);
    SensitivityRecord {
        option: option.to_string(),
        taxonomy,
        partition_values,
        partition_autocorrelations: rs,
        skipped,
        rsd,
        unstable,
        significant,
    }
}

/// Sensitivity of one option in one dataset. Errors when fewer than two
/// partitions survive skipping, since dispersion needs two points.
pub fn option_sensitivity(
    ds: &Dataset,
    option: &str,
    settings: &SensitivitySettings,
) -> Result<SensitivityRecord> {
    if settings.lag == 0 {
        return Err(Error::usage("autocorrelation lag must be at least 1"));
    }
    let outcomes = subset_outcomes(ds, option, settings)?;
    let idx = ds.option_named(option).expect("partitioning checked the name");
    let record = finish_record(option, ds.options()[idx].taxonomy.clone(), outcomes, settings);
    if record.partition_autocorrelations.len() < 2 {
        return Err(Error::data(format!(
            "insufficient partitions: option {option:?} has {} usable subsets, need 2",
            record.partition_autocorrelations.len()
        )));
    }
    Ok(record)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub system: String,
    /// Workloads aggregated into the records, in input order.
    pub workloads: Vec<String>,
    /// One record per schema option, in schema order.
    pub records: Vec<SensitivityRecord>,
}

/// Sensitivity across one or more workloads of the same system: per option
/// value, the subset autocorrelations are medianed across workloads first,
/// then the RSD and significance are computed on those medians. Unlike
/// [`option_sensitivity`], a record whose partitions were all skipped is kept
/// (rsd None, not significant) so the report always carries one record per
/// option; an option constant in any workload still fails the report.
pub fn sensitivity_report(
    datasets: &[Dataset],
    settings: &SensitivitySettings,
) -> Result<SensitivityReport> {
    if settings.lag == 0 {
        return Err(Error::usage("autocorrelation lag must be at least 1"));
    }
    let first = datasets
        .first()
        .ok_or_else(|| Error::usage("sensitivity needs at least one dataset"))?;
    for ds in &datasets[1..] {
        if !first.same_schema(ds) {
            return Err(Error::data(format!(
                "schema mismatch: {}/{} and {}/{} declare different options",
                first.system, first.workload, ds.system, ds.workload
            )));
        }
    }

    let mut records = Vec::with_capacity(first.n_options());
    for spec in first.options() {
        let mut per_workload = Vec::with_capacity(datasets.len());
        for ds in datasets {
            per_workload.push(subset_outcomes(ds, &spec.name, settings)?);
        }

        // Merge partition labels in first-seen order; every workload lists
        // its partitions in domain order, so shared labels keep that order.
        let mut labels: Vec<String> = Vec::new();
        for outcomes in &per_workload {
            for o in outcomes {
                if !labels.contains(&o.value) {
                    labels.push(o.value.clone());
                }
            }
        }

        let merged: Vec<SubsetOutcome> = labels
            .into_iter()
            .map(|label| {
                let rs: Vec<f64> = per_workload
                    .iter()
                    .flat_map(|outcomes| outcomes.iter())
                    .filter(|o| o.value == label)
                    .filter_map(|o| o.r)
                    .collect();
                if rs.is_empty() {
                    let reason = per_workload
                        .iter()
                        .flat_map(|outcomes| outcomes.iter())
                        .find_map(|o| {
                            (o.value == label).then(|| o.skip_reason.clone()).flatten()
                        })
                        .unwrap_or_else(|| "missing in every workload".to_string());
                    SubsetOutcome {
                        value: label,
                        r: None,
                        skip_reason: Some(reason),
                    }
                } else {
                    SubsetOutcome {
                        value: label,
                        r: Some(median(&rs)),
                        skip_reason: None,
                    }
                }
            })
            .collect();
        records.push(finish_record(&spec.name, spec.taxonomy.clone(), merged, settings));
    }

    Ok(SensitivityReport {
        system: first.system.clone(),
        workloads: datasets.iter().map(|d| d.workload.clone()).collect(),
        records,
    })
}

//! Dataset-backed tuner suite: random search, first-improvement hill
//! climbing, a generational GA, TPE, priority-biased HC/GA variants, and a
//! dynamic-workload harness that either restarts or transfers populations
//! between workloads. Every tuner runs against an [`Evaluator`] that snaps
//! queries onto measured rows and enforces a fixed evaluation budget, and
//! emits a normalized-regret [`Trajectory`].

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Configuration, Dataset};
use crate::error::{Error, Result};
use crate::landscape::hamming_distance;
use crate::seeding::{derive_seed_indexed, rng_from_seed};

pub const DEFAULT_BUDGET: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TunerKind {
    RandomSearch,
    HillClimbing,
    Genetic,
    Tpe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub population_size: usize,
    pub crossover_probability: f64,
    /// Per-gene boundary-mutation probability.
    pub mutation_probability: f64,
    /// Per-gene swap probability under uniform crossover.
    pub gene_swap_probability: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 20,
            crossover_probability: 0.9,
            mutation_probability: 0.1,
            gene_swap_probability: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpeParams {
    /// Fraction of history treated as the "good" set.
    pub good_fraction: f64,
    /// Candidates drawn from the good density per proposal.
    pub candidate_count: usize,
}

impl Default for TpeParams {
    fn default() -> Self {
        TpeParams {
            good_fraction: 0.25,
            candidate_count: 24,
        }
    }
}

/// Options a priority variant biases its genetic operators toward.
#[derive(Debug, Clone, PartialEq)]
pub struct PrioritySpec {
    pub options: Vec<String>,
    /// Probability mass steered to the prioritized options.
    pub bias: f64,
}

impl PrioritySpec {
    pub fn new(options: Vec<String>) -> Self {
        PrioritySpec { options, bias: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunerSpec {
    pub kind: TunerKind,
    pub priority: Option<PrioritySpec>,
    pub ga: GaParams,
    pub tpe: TpeParams,
}

impl TunerSpec {
    pub fn new(kind: TunerKind) -> Self {
        TunerSpec {
            kind,
            priority: None,
            ga: GaParams::default(),
            tpe: TpeParams::default(),
        }
    }

    pub fn with_priority(kind: TunerKind, options: Vec<String>) -> Self {
        TunerSpec {
            priority: Some(PrioritySpec::new(options)),
            ..TunerSpec::new(kind)
        }
    }

    /// Short identity used in trajectory output and CLI flags.
    pub fn token(&self) -> String {
        let base = match self.kind {
            TunerKind::RandomSearch => "rs",
            TunerKind::HillClimbing => "hc",
            TunerKind::Genetic => "ga",
            TunerKind::Tpe => "tpe",
        };
        if self.priority.is_some() {
            format!("priority-{base}")
        } else {
            base.to_string()
        }
    }

    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.ga.crossover_probability)
            || !unit(self.ga.mutation_probability)
            || !unit(self.ga.gene_swap_probability)
            || !unit(self.tpe.good_fraction)
        {
            return Err(Error::usage("tuner probabilities must lie in [0, 1]"));
        }
        if self.ga.population_size < 2 {
            return Err(Error::usage("population size must be at least 2"));
        }
        if self.tpe.candidate_count < 1 {
            return Err(Error::usage("candidate count must be at least 1"));
        }
        if let Some(priority) = &self.priority {
            if !matches!(self.kind, TunerKind::HillClimbing | TunerKind::Genetic) {
                return Err(Error::usage(
                    "priority variants exist for hill climbing and genetic only",
                ));
            }
            if priority.options.is_empty() {
                return Err(Error::usage("priority set must name at least one option"));
            }
            if !unit(priority.bias) {
                return Err(Error::usage("priority bias must lie in [0, 1]"));
            }
            for name in &priority.options {
                if ds.option_named(name).is_none() {
                    return Err(Error::data(format!(
                        "priority option {name:?} is not in the dataset schema"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Nearest dataset row by Hamming distance; exact matches short-circuit and
/// ties break toward the lowest row index.
pub fn snap_to_row(ds: &Dataset, c: &Configuration) -> usize {
    debug_assert_eq!(c.len(), ds.n_options());
    if let Some(i) = ds.row_of_config(c) {
        return i;
    }
    let mut best = 0;
    let mut best_d = u32::MAX;
    for (i, row) in ds.rows().iter().enumerate() {
        let d = hamming_distance(&row.configuration, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub row: usize,
    pub performance: f64,
    /// Whether this query consumed budget (first measurement of the row, or
    /// any draw on the with-replacement path).
    pub consumed: bool,
}

/// Budgeted oracle over a measured dataset. Re-queries of an already-measured
/// row are free; only new measurements (and with-replacement draws) consume.
#[derive(Debug)]
pub struct Evaluator<'a> {
    ds: &'a Dataset,
    budget: usize,
    used: usize,
    measured: Vec<bool>,
    measured_count: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(ds: &'a Dataset, budget: usize) -> Self {
        Evaluator {
            ds,
            budget,
            used: 0,
            measured: vec![false; ds.len()],
            measured_count: 0,
        }
    }

    pub fn evaluations_used(&self) -> usize {
        self.used
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn is_measured(&self, row: usize) -> bool {
        self.measured[row]
    }

    pub fn all_measured(&self) -> bool {
        self.measured_count == self.ds.len()
    }

    /// Snaps to the nearest row and measures it.
    pub fn evaluate(&mut self, c: &Configuration) -> Result<Measurement> {
        let row = snap_to_row(self.ds, c);
        self.evaluate_row(row)
    }

    /// Measures a row, consuming budget only the first time.
    pub fn evaluate_row(&mut self, row: usize) -> Result<Measurement> {
        let consumed = if self.measured[row] {
            false
        } else {
            if self.exhausted() {
                return Err(Error::BudgetExhausted);
            }
            self.used += 1;
            self.measured[row] = true;
            self.measured_count += 1;
            true
        };
        Ok(Measurement {
            row,
            performance: self.ds.performance(row),
            consumed,
        })
    }

    /// Measures a row and always consumes budget: sampling with replacement
    /// pays for every draw, duplicate or not.
    pub fn measure_with_replacement(&mut self, row: usize) -> Result<Measurement> {
        if self.exhausted() {
            return Err(Error::BudgetExhausted);
        }
        self.used += 1;
        if !self.measured[row] {
            self.measured[row] = true;
            self.measured_count += 1;
        }
        Ok(Measurement {
            row,
            performance: self.ds.performance(row),
            consumed: true,
        })
    }

    fn unmeasured_rows(&self) -> Vec<usize> {
        self.measured
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    /// 1-based index among budget-consuming evaluations.
    pub eval_index: usize,
    pub row: usize,
    /// Rendered configuration, comma-joined option values.
    pub configuration: String,
    pub performance: f64,
    pub best_so_far: f64,
    /// Normalized gap of best_so_far to the best measured performance, over
    /// the dataset's worst-best span; 0 exactly when the proxy is found.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Tuner token, e.g. "rs" or "priority-hc".
    pub tuner: String,
    pub seed: u64,
    pub workload: String,
    pub steps: Vec<TrajectoryStep>,
    pub final_regret: f64,
}

/// Accumulates trajectory steps for budget-consuming measurements.
struct Recorder<'a> {
    ds: &'a Dataset,
    proxy_perf: f64,
    span: f64,
    best: Option<f64>,
    steps: Vec<TrajectoryStep>,
}

impl<'a> Recorder<'a> {
    fn new(ds: &'a Dataset) -> Self {
        let (worst, best) = ds.performance_span();
        Recorder {
            ds,
            proxy_perf: best,
            span: (worst - best).abs(),
            best: None,
            steps: Vec::new(),
        }
    }

    fn record(&mut self, m: &Measurement) {
        if !m.consumed {
            return;
        }
        let best = match self.best {
            Some(b) if !self.ds.objective.better(m.performance, b) => b,
            _ => m.performance,
        };
        self.best = Some(best);
        let regret = if self.span == 0.0 {
            0.0
        } else {
            (best - self.proxy_perf).abs() / self.span
        };
        self.steps.push(TrajectoryStep {
            eval_index: self.steps.len() + 1,
            row: m.row,
            configuration: self.ds.render_config(&self.ds.row(m.row).configuration),
            performance: m.performance,
            best_so_far: best,
            regret,
        });
    }

    fn finish(self, tuner: String, seed: u64) -> Trajectory {
        let final_regret = self
            .steps
            .last()
            .map(|s| s.regret)
            .expect("a positive budget records at least one step");
        Trajectory {
            tuner,
            seed,
            workload: self.ds.workload.clone(),
            steps: self.steps,
            final_regret,
        }
    }
}

/// Runs one tuner against one dataset with a fixed budget and seed.
pub fn run_tuner(spec: &TunerSpec, ds: &Dataset, budget: usize, seed: u64) -> Result<Trajectory> {
    if let TunerKind::Genetic = spec.kind {
        return run_genetic(spec, ds, budget, seed, None).map(|g| g.trajectory);
    }
    spec.validate(ds)?;
    if budget == 0 {
        return Err(Error::usage("budget must be at least 1"));
    }
    let mut ev = Evaluator::new(ds, budget);
    let mut rec = Recorder::new(ds);
    let mut rng = rng_from_seed(seed);
    match spec.kind {
        TunerKind::RandomSearch => run_random_search(ds, &mut ev, &mut rec, &mut rng)?,
        TunerKind::HillClimbing => run_hill_climbing(spec, ds, &mut ev, &mut rec, &mut rng)?,
        TunerKind::Tpe => run_tpe(spec, ds, &mut ev, &mut rec, &mut rng)?,
        TunerKind::Genetic => unreachable!("dispatched above"),
    }
    Ok(rec.finish(spec.token(), seed))
}

fn run_random_search(
    ds: &Dataset,
    ev: &mut Evaluator,
    rec: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    while !ev.exhausted() {
        let row = rng.gen_range(0..ds.len());
        let m = ev.measure_with_replacement(row)?;
        rec.record(&m);
    }
    Ok(())
}

/// Options with more than one admissible value, the only ones worth mutating.
fn mutable_options(ds: &Dataset) -> Vec<usize> {
    (0..ds.n_options())
        .filter(|&o| ds.options()[o].domain.len() > 1)
        .collect()
}

/// Splits the mutable options into (prioritized, rest) when a priority set is
/// configured.
fn priority_pools(ds: &Dataset, spec: &TunerSpec, pool: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
    let priority = spec.priority.as_ref()?;
    let flagged: Vec<usize> = priority
        .options
        .iter()
        .filter_map(|name| ds.option_named(name))
        .collect();
    let hot: Vec<usize> = pool.iter().copied().filter(|o| flagged.contains(o)).collect();
    let cold: Vec<usize> = pool.iter().copied().filter(|o| !flagged.contains(o)).collect();
    Some((hot, cold))
}

/// Picks the option to mutate: uniform for vanilla, biased between the
/// prioritized and remaining pools for priority variants (falling back to the
/// non-empty pool when the other has no mutable member).
fn pick_option(
    rng: &mut ChaCha8Rng,
    pool: &[usize],
    pools: &Option<(Vec<usize>, Vec<usize>)>,
    bias: f64,
) -> usize {
    if let Some((hot, cold)) = pools {
        let use_hot = if hot.is_empty() {
            false
        } else if cold.is_empty() {
            true
        } else {
            rng.gen::<f64>() < bias
        };
        let side = if use_hot { hot } else { cold };
        return side[rng.gen_range(0..side.len())];
    }
    pool[rng.gen_range(0..pool.len())]
}

/// Uniform draw over the option's domain minus the current value.
fn mutate_value(rng: &mut ChaCha8Rng, domain_len: usize, current: u16) -> u16 {
    let mut v = rng.gen_range(0..domain_len - 1) as u16;
    if v >= current {
        v += 1;
    }
    v
}

/// All rows reachable from a row by snapping one single-option mutation,
/// excluding the row itself. Empty means every mutation snaps back home.
fn candidates_for(ds: &Dataset, row: usize) -> Vec<usize> {
    let base = &ds.row(row).configuration;
    let mut out: Vec<usize> = Vec::new();
    for (o, spec) in ds.options().iter().enumerate() {
        for v in 0..spec.domain.len() as u16 {
            if v == base.values[o] {
                continue;
            }
            let mut c = base.clone();
            c.values[o] = v;
            let r = snap_to_row(ds, &c);
            if r != row && !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

fn run_hill_climbing(
    spec: &TunerSpec,
    ds: &Dataset,
    ev: &mut Evaluator,
    rec: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let pool = mutable_options(ds);
    debug_assert!(!pool.is_empty(), "two distinct rows imply a mutable option");
    let pools = priority_pools(ds, spec, &pool);
    let bias = spec.priority.as_ref().map_or(0.0, |p| p.bias);
    let mut neighbors: HashMap<usize, Vec<usize>> = HashMap::new();

    while !(ev.exhausted() || ev.all_measured()) {
        // Fresh start (also how entrapment is escaped).
        let start = rng.gen_range(0..ds.len());
        let m = ev.evaluate_row(start)?;
        rec.record(&m);
        let mut current = start;
        let mut current_perf = m.performance;

        loop {
            if ev.exhausted() || ev.all_measured() {
                return Ok(());
            }
            let cands = neighbors
                .entry(current)
                .or_insert_with(|| candidates_for(ds, current));
            // Trapped: every reachable row is already measured and none
            // improves, so no proposal can help; restart somewhere fresh.
            let trapped = cands.iter().all(|&r| {
                ev.is_measured(r) && !ds.objective.better(ds.performance(r), current_perf)
            });
            if trapped {
                break;
            }

            let o = pick_option(rng, &pool, &pools, bias);
            let mut proposal = ds.row(current).configuration.clone();
            proposal.values[o] =
                mutate_value(rng, ds.options()[o].domain.len(), proposal.values[o]);
            let row = snap_to_row(ds, &proposal);
            if row == current {
                continue;
            }
            let m = ev.evaluate_row(row)?;
            rec.record(&m);
            // First improvement: accept immediately on strict gain.
            if ds.objective.better(m.performance, current_perf) {
                current = row;
                current_perf = m.performance;
            }
        }
    }
    Ok(())
}

/// A genetic run also reports its last fully evaluated population, which the
/// dynamic harness transfers into the next workload.
#[derive(Debug, Clone, PartialEq)]
pub struct GaRun {
    pub trajectory: Trajectory,
    pub final_population: Vec<Configuration>,
}

/// Generational GA (no elitism): binary tournament selection, uniform
/// crossover, boundary mutation, offspring snapped onto rows. When a whole
/// generation comes out of the cache (a converged population), one
/// seeded-uniform unmeasured row is measured instead so the budget cannot
/// stall below its limit.
pub fn run_genetic(
    spec: &TunerSpec,
    ds: &Dataset,
    budget: usize,
    seed: u64,
    initial: Option<&[Configuration]>,
) -> Result<GaRun> {
    spec.validate(ds)?;
    if budget == 0 {
        return Err(Error::usage("budget must be at least 1"));
    }
    let pop_size = spec.ga.population_size;
    if budget < pop_size {
        return Err(Error::usage(format!(
            "budget below one generation: {budget} evaluations cannot cover a population of {pop_size}"
        )));
    }
    let mut ev = Evaluator::new(ds, budget);
    let mut rec = Recorder::new(ds);
    let mut rng = rng_from_seed(seed);

    let priority_swap: Option<Vec<f64>> = spec.priority.as_ref().map(|p| {
        let flagged: Vec<usize> = p.options.iter().filter_map(|n| ds.option_named(n)).collect();
        (0..ds.n_options())
            .map(|o| if flagged.contains(&o) { p.bias } else { 1.0 - p.bias })
            .collect()
    });

    let mut population: Vec<usize> = match initial {
        Some(members) => members.iter().map(|c| snap_to_row(ds, c)).collect(),
        None => (0..pop_size).map(|_| rng.gen_range(0..ds.len())).collect(),
    };
    let mut final_pop: Vec<usize> = Vec::new();

    'generations: loop {
        if ev.all_measured() {
            break;
        }
        let used_before = ev.evaluations_used();
        for &row in &population {
            match ev.evaluate_row(row) {
                Ok(m) => rec.record(&m),
                // Mid-generation exhaustion: the partial generation still
                // counts its evaluations, but not as a final population.
                Err(Error::BudgetExhausted) => break 'generations,
                Err(e) => return Err(e),
            }
        }
        final_pop = population.clone();
        if ev.exhausted() {
            break;
        }
        if ev.evaluations_used() == used_before {
            let unmeasured = ev.unmeasured_rows();
            let row = unmeasured[rng.gen_range(0..unmeasured.len())];
            let m = ev.evaluate_row(row)?;
            rec.record(&m);
            if ev.exhausted() {
                break;
            }
        }

        // Breed the next generation from the one just evaluated.
        let parents = &final_pop;
        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let a = parents[rng.gen_range(0..parents.len())];
            let b = parents[rng.gen_range(0..parents.len())];
            if ds.objective.better(ds.performance(b), ds.performance(a)) {
                b
            } else {
                a
            }
        };
        population = (0..pop_size)
            .map(|_| {
                let p1 = tournament(&mut rng);
                let p2 = tournament(&mut rng);
                let mut child = ds.row(p1).configuration.clone();
                if rng.gen::<f64>() < spec.ga.crossover_probability {
                    let other = &ds.row(p2).configuration;
                    for g in 0..ds.n_options() {
                        let p_swap = priority_swap
                            .as_ref()
                            .map_or(spec.ga.gene_swap_probability, |ps| ps[g]);
                        if rng.gen::<f64>() < p_swap {
                            child.values[g] = other.values[g];
                        }
                    }
                }
                for g in 0..ds.n_options() {
                    if rng.gen::<f64>() < spec.ga.mutation_probability {
                        let opt = &ds.options()[g];
                        let len = opt.domain.len() as u16;
                        child.values[g] = if opt.kind.is_numeric() {
                            // Boundary mutation: jump to a domain endpoint.
                            if rng.gen::<bool>() {
                                len - 1
                            } else {
                                0
                            }
                        } else {
                            rng.gen_range(0..len)
                        };
                    }
                }
                snap_to_row(ds, &child)
            })
            .collect();
    }

    let final_population = final_pop
        .iter()
        .map(|&r| ds.row(r).configuration.clone())
        .collect();
    Ok(GaRun {
        trajectory: rec.finish(spec.token(), seed),
        final_population,
    })
}

/// Consecutive cache-only proposals after which TPE falls back to a
/// seeded-uniform unmeasured row. The density argmax can settle on rows it
/// has already measured; without a valve the run would stall under budget.
const TPE_STALL_LIMIT: usize = 1000;

fn run_tpe(
    spec: &TunerSpec,
    ds: &Dataset,
    ev: &mut Evaluator,
    rec: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let n = ds.n_options();
    // Observed values per option, the categorical support.
    let support: Vec<Vec<u16>> = (0..n)
        .map(|o| {
            let mut seen: Vec<u16> = ds.rows().iter().map(|r| r.configuration.values[o]).collect();
            seen.sort_unstable();
            seen.dedup();
            seen
        })
        .collect();

    // history holds measured rows only.
    let mut history: Vec<usize> = Vec::new();
    let mut stall = 0usize;

    while !(ev.exhausted() || ev.all_measured()) {
        let row = if history.is_empty() {
            rng.gen_range(0..ds.len())
        } else if stall >= TPE_STALL_LIMIT {
            stall = 0;
            let unmeasured = ev.unmeasured_rows();
            unmeasured[rng.gen_range(0..unmeasured.len())]
        } else {
            propose_tpe(spec, ds, &support, &history, rng)
        };
        let m = ev.evaluate_row(row)?;
        if m.consumed {
            rec.record(&m);
            history.push(row);
            stall = 0;
        } else {
            stall += 1;
        }
    }
    Ok(())
}

/// One TPE proposal: split history at the good-fraction quantile, fit add-one
/// smoothed categorical densities per option for the good and bad sets, draw
/// candidates from the good density, and keep the candidate with the highest
/// good/bad density ratio (first wins ties), snapped onto a row.
fn propose_tpe(
    spec: &TunerSpec,
    ds: &Dataset,
    support: &[Vec<u16>],
    history: &[usize],
    rng: &mut ChaCha8Rng,
) -> usize {
    let n = ds.n_options();
    let mut ranked: Vec<usize> = history.to_vec();
    ranked.sort_by(|&a, &b| {
        let (pa, pb) = (ds.performance(a), ds.performance(b));
        if ds.objective.better(pa, pb) {
            std::cmp::Ordering::Less
        } else if ds.objective.better(pb, pa) {
            std::cmp::Ordering::Greater
        } else {
            a.cmp(&b)
        }
    });
    let n_good = ((spec.tpe.good_fraction * ranked.len() as f64).ceil() as usize).max(1);
    let (good, bad) = ranked.split_at(n_good.min(ranked.len()));

    // densities[o][k]: add-one smoothed probability of support[o][k].
    let density = |set: &[usize]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|o| {
                let mut counts = vec![1.0f64; support[o].len()];
                for &row in set {
                    let v = ds.row(row).configuration.values[o];
                    let k = support[o].binary_search(&v).expect("value observed in dataset");
                    counts[k] += 1.0;
                }
                let total: f64 = counts.iter().sum();
                counts.iter().map(|c| c / total).collect()
            })
            .collect()
    };
    let good_density = density(good);
    let bad_density = density(bad);

    let mut best_row = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for _ in 0..spec.tpe.candidate_count {
        let mut values = Vec::with_capacity(n);
        let mut score = 0.0f64;
        for o in 0..n {
            let k = weighted_index(rng, &good_density[o]);
            values.push(support[o][k]);
            score += good_density[o][k].ln() - bad_density[o][k].ln();
        }
        let row = snap_to_row(ds, &Configuration::new(values));
        if score > best_score {
            best_score = score;
            best_row = row;
        }
    }
    best_row
}

/// Samples an index proportional to the given weights (they sum to 1).
fn weighted_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let mut t = rng.gen::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            return i;
        }
        t -= w;
    }
    weights.len() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicMode {
    Restart,
    Transfer,
}

impl DynamicMode {
    pub fn label(self) -> &'static str {
        match self {
            DynamicMode::Restart => "restart",
            DynamicMode::Transfer => "transfer",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "restart" => Ok(DynamicMode::Restart),
            "transfer" => Ok(DynamicMode::Transfer),
            other => Err(Error::usage(format!(
                "unknown mode {other:?}, expected \"restart\" or \"transfer\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadRun {
    pub workload: String,
    /// 0-based position in the shuffled order.
    pub position: usize,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRun {
    pub mode: DynamicMode,
    pub seed: u64,
    /// Workload names in the seeded shuffled visit order.
    pub workload_order: Vec<String>,
    pub per_workload: Vec<WorkloadRun>,
}

/// Dynamic-workload GA harness: visits the workloads in a seeded shuffled
/// order; transfer mode seeds each workload's initial population with the
/// previous workload's final population (snapped into the new dataset), while
/// restart mode initializes uniformly every time. Per-workload GA seeds
/// depend on the run seed, workload name, and position only, so restart and
/// transfer runs of the same seed are paired.
pub fn run_dynamic(
    spec: &TunerSpec,
    workloads: &[Dataset],
    mode: DynamicMode,
    budget_per_workload: usize,
    seed: u64,
) -> Result<DynamicRun> {
    if !matches!(spec.kind, TunerKind::Genetic) {
        return Err(Error::usage("dynamic runs drive the genetic tuner"));
    }
    if workloads.len() < 2 {
        return Err(Error::usage("≥ 2 workloads required"));
    }
    let first = &workloads[0];
    for ds in &workloads[1..] {
        if !first.same_schema(ds) {
            return Err(Error::data(format!(
                "schema mismatch: {}/{} and {}/{} declare different options",
                first.system, first.workload, ds.system, ds.workload
            )));
        }
    }

    let mut order: Vec<usize> = (0..workloads.len()).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let mut per_workload = Vec::with_capacity(workloads.len());
    let mut carried: Option<Vec<Configuration>> = None;
    for (position, &w) in order.iter().enumerate() {
        let ds = &workloads[w];
        let ga_seed = derive_seed_indexed(seed, &["dynamic-ga", &ds.workload], position as u64);
        let initial = match (mode, &carried) {
            (DynamicMode::Transfer, Some(pop)) => Some(pop.as_slice()),
            _ => None,
        };
        let run = run_genetic(spec, ds, budget_per_workload, ga_seed, initial)?;
        carried = Some(run.final_population);
        per_workload.push(WorkloadRun {
            workload: ds.workload.clone(),
            position,
            trajectory: run.trajectory,
        });
    }

    Ok(DynamicRun {
        mode,
        seed,
        workload_order: order.iter().map(|&w| workloads[w].workload.clone()).collect(),
        per_workload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Objective, OptionDecl, OptionKind, OptionValue};
    use crate::stats::median;
    use crate::synthetic::{d3, iid_uniform_cube, offset_pair, unimodal_cube};

    fn spec(kind: TunerKind) -> TunerSpec {
        TunerSpec::new(kind)
    }

    #[test]
    fn snap_prefers_lower_row_index_on_ties() {
        let decls: Vec<OptionDecl> = ["a", "b", "c"]
            .iter()
            .map(|n| OptionDecl {
                name: n.to_string(),
                kind: OptionKind::Boolean,
                declared_domain: Some(vec![OptionValue::Bool(false), OptionValue::Bool(true)]),
                taxonomy: None,
            })
            .collect();
        let rows = vec![
            (
                vec![OptionValue::Bool(true), OptionValue::Bool(false), OptionValue::Bool(false)],
                1.0,
            ),
            (
                vec![OptionValue::Bool(true), OptionValue::Bool(true), OptionValue::Bool(true)],
                2.0,
            ),
        ];
        let ds = Dataset::from_values("bench", "tie", Objective::Minimize, decls, rows).unwrap();
        // (1,0,1) sits at distance 1 from both rows; the first one wins.
        let q = Configuration::new(vec![1, 0, 1]);
        assert_eq!(snap_to_row(&ds, &q), 0);
        // Exact matches snap to themselves.
        assert_eq!(snap_to_row(&ds, &ds.row(1).configuration.clone()), 1);
    }

    #[test]
    fn cached_requeries_are_free_and_replacement_draws_are_not() {
        let ds = d3();
        let mut ev = Evaluator::new(&ds, 2);
        let first = ev.evaluate_row(3).unwrap();
        assert!(first.consumed);
        let again = ev.evaluate_row(3).unwrap();
        assert!(!again.consumed);
        assert_eq!(again.performance, first.performance);
        assert_eq!(ev.evaluations_used(), 1);
        assert!(ev.evaluate_row(0).unwrap().consumed);
        assert!(matches!(ev.evaluate_row(1), Err(Error::BudgetExhausted)));
        // Re-queries stay free even at zero remaining budget.
        assert!(!ev.evaluate_row(3).unwrap().consumed);

        let mut ev = Evaluator::new(&ds, 2);
        assert!(ev.measure_with_replacement(5).unwrap().consumed);
        assert!(ev.measure_with_replacement(5).unwrap().consumed);
        assert_eq!(ev.evaluations_used(), 2);
        assert!(matches!(
            ev.measure_with_replacement(5),
            Err(Error::BudgetExhausted)
        ));
    }

    #[test]
    fn random_search_spends_exactly_its_budget() {
        let ds = d3();
        let mut hit_with_zero = 0;
        let mut missed_with_positive = 0;
        for seed in 0..30 {
            let t = run_tuner(&spec(TunerKind::RandomSearch), &ds, 8, seed).unwrap();
            assert_eq!(t.steps.len(), 8, "with replacement every draw consumes");
            let hit = t.steps.iter().any(|s| s.performance == 0.0);
            assert_eq!(hit, t.final_regret == 0.0);
            if hit {
                hit_with_zero += 1;
            } else {
                missed_with_positive += 1;
            }
        }
        // Sampling with replacement leaves both outcomes possible at budget
        // |rows|; both occur across 30 seeds.
        assert!(hit_with_zero > 0);
        assert!(missed_with_positive > 0);
    }

    #[test]
    fn random_search_hit_rate_matches_the_replacement_law() {
        let ds = d3();
        let budget = 8;
        let runs = 1000;
        let hits = (0..runs)
            .filter(|&seed| {
                run_tuner(&spec(TunerKind::RandomSearch), &ds, budget, seed)
                    .unwrap()
                    .final_regret
                    == 0.0
            })
            .count();
        let p = 1.0 - (1.0 - 1.0 / ds.len() as f64).powi(budget as i32);
        let se = (p * (1.0 - p) / runs as f64).sqrt();
        let observed = hits as f64 / runs as f64;
        assert!(
            (observed - p).abs() <= 3.0 * se,
            "observed {observed}, expected {p} ± {}",
            3.0 * se
        );
    }

    #[test]
    fn hill_climbing_always_bottoms_out_on_a_unimodal_ramp() {
        // Descent cannot stall on d3, and at budget = |rows| a forced stop
        // means everything (including the optimum) was measured.
        let ds = d3();
        for seed in 0..30 {
            let t = run_tuner(&spec(TunerKind::HillClimbing), &ds, 8, seed).unwrap();
            assert_eq!(t.final_regret, 0.0, "seed {seed}");
            assert!(t.steps.len() <= 8);
        }
    }

    #[test]
    fn hill_climbing_finds_the_optimum_faster_than_random_search() {
        let ds = unimodal_cube(6);
        let censor = 31usize;
        let evals_to_zero = |t: &Trajectory| {
            t.steps
                .iter()
                .find(|s| s.regret == 0.0)
                .map(|s| s.eval_index)
                .unwrap_or(censor)
        };
        let mut hc = Vec::new();
        let mut rs = Vec::new();
        for seed in 0..30 {
            hc.push(evals_to_zero(
                &run_tuner(&spec(TunerKind::HillClimbing), &ds, 30, seed).unwrap(),
            ) as f64);
            rs.push(evals_to_zero(
                &run_tuner(&spec(TunerKind::RandomSearch), &ds, 30, seed).unwrap(),
            ) as f64);
        }
        assert!(
            median(&hc) < median(&rs),
            "hc median {} vs rs median {}",
            median(&hc),
            median(&rs)
        );
    }

    #[test]
    fn trajectories_are_monotone_and_bounded() {
        let ds = iid_uniform_cube(7, 11);
        for kind in [
            TunerKind::RandomSearch,
            TunerKind::HillClimbing,
            TunerKind::Genetic,
            TunerKind::Tpe,
        ] {
            let t = run_tuner(&spec(kind), &ds, 60, 5).unwrap();
            assert!(!t.steps.is_empty());
            assert!(t.steps.len() <= 60);
            for w in t.steps.windows(2) {
                assert!(w[1].regret <= w[0].regret);
                assert!(!ds.objective.better(w[0].best_so_far, w[1].best_so_far));
            }
            for s in &t.steps {
                assert!((0.0..=1.0).contains(&s.regret));
            }
            assert_eq!(t.final_regret, t.steps.last().unwrap().regret);
            let indices: Vec<usize> = t.steps.iter().map(|s| s.eval_index).collect();
            assert_eq!(indices, (1..=t.steps.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn identical_seeds_reproduce_trajectories_exactly() {
        let ds = iid_uniform_cube(6, 2);
        for kind in [
            TunerKind::RandomSearch,
            TunerKind::HillClimbing,
            TunerKind::Genetic,
            TunerKind::Tpe,
        ] {
            let a = run_tuner(&spec(kind), &ds, 40, 9).unwrap();
            let b = run_tuner(&spec(kind), &ds, 40, 9).unwrap();
            assert_eq!(a, b);
        }
        let a = run_tuner(&spec(TunerKind::RandomSearch), &ds, 40, 9).unwrap();
        let c = run_tuner(&spec(TunerKind::RandomSearch), &ds, 40, 10).unwrap();
        assert_ne!(a.steps, c.steps);
    }

    #[test]
    fn genetic_needs_a_full_first_generation() {
        let err = run_tuner(&spec(TunerKind::Genetic), &d3(), 8, 0).unwrap_err();
        assert!(err.to_string().contains("budget below one generation"));
    }

    #[test]
    fn genetic_consumes_the_whole_budget_on_large_datasets() {
        // Converged populations re-query the cache; the fallback draw keeps
        // the run moving until the budget is spent.
        let ds = iid_uniform_cube(8, 4);
        for seed in 0..5 {
            let t = run_tuner(&spec(TunerKind::Genetic), &ds, 80, seed).unwrap();
            assert_eq!(t.steps.len(), 80, "seed {seed}");
        }
    }

    #[test]
    fn tpe_consumes_the_whole_budget_on_large_datasets() {
        let ds = iid_uniform_cube(8, 4);
        let t = run_tuner(&spec(TunerKind::Tpe), &ds, 60, 3).unwrap();
        assert_eq!(t.steps.len(), 60);
    }

    #[test]
    fn tuners_stop_once_everything_is_measured() {
        let ds = d3();
        // Budget far beyond the table: HC and TPE stop at 8 measurements.
        for kind in [TunerKind::HillClimbing, TunerKind::Tpe] {
            let t = run_tuner(&spec(kind), &ds, 50, 1).unwrap();
            assert_eq!(t.steps.len(), 8);
            assert_eq!(t.final_regret, 0.0);
        }
        // RS keeps drawing with replacement: exactly the budget.
        let t = run_tuner(&spec(TunerKind::RandomSearch), &ds, 50, 1).unwrap();
        assert_eq!(t.steps.len(), 50);
    }

    #[test]
    fn priority_specs_are_validated() {
        let ds = d3();
        let empty = TunerSpec::with_priority(TunerKind::HillClimbing, vec![]);
        let err = empty.validate(&ds).unwrap_err();
        assert!(err.to_string().contains("at least one option"));

        let unknown = TunerSpec::with_priority(TunerKind::HillClimbing, vec!["zz".into()]);
        assert!(unknown.validate(&ds).is_err());

        let wrong_kind = TunerSpec::with_priority(TunerKind::RandomSearch, vec!["a".into()]);
        assert!(wrong_kind.validate(&ds).is_err());

        let ok = TunerSpec::with_priority(TunerKind::Genetic, vec!["a".into()]);
        assert!(ok.validate(&ds).is_ok());
        assert_eq!(ok.token(), "priority-ga");
        assert_eq!(spec(TunerKind::Tpe).token(), "tpe");
    }

    #[test]
    fn priority_hill_climbing_runs_and_differs_from_vanilla() {
        let ds = iid_uniform_cube(6, 8);
        let vanilla = run_tuner(&spec(TunerKind::HillClimbing), &ds, 30, 4).unwrap();
        let biased = run_tuner(
            &TunerSpec::with_priority(TunerKind::HillClimbing, vec!["x1".into(), "x2".into()]),
            &ds,
            30,
            4,
        )
        .unwrap();
        assert_eq!(biased.tuner, "priority-hc");
        assert_ne!(vanilla.steps, biased.steps);
    }

    #[test]
    fn dynamic_needs_two_workloads() {
        let (w1, _) = offset_pair(5, 1, 5.0);
        let err = run_dynamic(
            &spec(TunerKind::Genetic),
            std::slice::from_ref(&w1),
            DynamicMode::Restart,
            40,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("2 workloads required"));

        let err = run_dynamic(
            &spec(TunerKind::RandomSearch),
            &[w1.clone(), w1],
            DynamicMode::Restart,
            40,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("genetic"));
    }

    #[test]
    fn dynamic_rejects_mismatched_schemas() {
        let (w1, _) = offset_pair(5, 1, 5.0);
        let other = iid_uniform_cube(4, 0);
        let err = run_dynamic(
            &spec(TunerKind::Genetic),
            &[w1, other],
            DynamicMode::Restart,
            40,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("schema mismatch"));
    }

    #[test]
    fn dynamic_modes_are_paired_runs() {
        let (w1, w2) = offset_pair(6, 7, 3.0);
        let workloads = vec![w1, w2];
        let restart = run_dynamic(&spec(TunerKind::Genetic), &workloads, DynamicMode::Restart, 40, 5).unwrap();
        let transfer = run_dynamic(&spec(TunerKind::Genetic), &workloads, DynamicMode::Transfer, 40, 5).unwrap();
        // Same seed, same visit order; and the first workload has no
        // predecessor, so both modes open identically.
        assert_eq!(restart.workload_order, transfer.workload_order);
        assert_eq!(
            restart.per_workload[0].trajectory,
            transfer.per_workload[0].trajectory
        );
        assert_eq!(restart.per_workload.len(), 2);
        assert_eq!(restart.per_workload[1].position, 1);
    }

    #[test]
    fn transfer_seeds_the_next_population_with_the_previous_one() {
        // Two identical workloads: the transferred population snaps onto the
        // same rows, so workload 2's first generation re-measures exactly the
        // members of workload 1's final population.
        let base = iid_uniform_cube(6, 3);
        let mut twin = base.clone();
        twin.workload = "iid-b".to_string();
        let workloads = vec![base.clone(), twin];
        let run = run_dynamic(&spec(TunerKind::Genetic), &workloads, DynamicMode::Transfer, 40, 2).unwrap();

        let first = &run.per_workload[0];
        let second = &run.per_workload[1];
        // Reconstruct the first visited workload's final population via a
        // paired direct run (the visit order is shuffled, so look it up).
        let first_ds = workloads
            .iter()
            .find(|d| d.workload == first.workload)
            .unwrap();
        let ga_seed = derive_seed_indexed(2, &["dynamic-ga", &first.workload], 0);
        let solo = run_genetic(&spec(TunerKind::Genetic), first_ds, 40, ga_seed, None).unwrap();
        assert_eq!(solo.trajectory, first.trajectory);

        let carried: Vec<usize> = solo
            .final_population
            .iter()
            .map(|c| snap_to_row(&base, c))
            .collect();
        let expected_best = carried
            .iter()
            .map(|&r| base.performance(r))
            .fold(f64::INFINITY, f64::min);
        let mut distinct = carried.clone();
        distinct.sort_unstable();
        distinct.dedup();
        // The first |distinct| evaluations of workload 2 measure exactly the
        // transferred members, so best_so_far at that point is their best.
        let at = &second.trajectory.steps[distinct.len() - 1];
        assert_eq!(at.best_so_far, expected_best);
        let mut early_rows: Vec<usize> = second.trajectory.steps[..distinct.len()]
            .iter()
            .map(|s| s.row)
            .collect();
        early_rows.sort_unstable();
        assert_eq!(early_rows, distinct);
    }

    #[test]
    fn transfer_keeps_identical_workloads_at_least_as_good() {
        let base = iid_uniform_cube(6, 12);
        let mut twin = base.clone();
        twin.workload = "iid-b".to_string();
        let workloads = vec![base, twin];
        let mut transfer_final = Vec::new();
        let mut restart_final = Vec::new();
        for seed in 0..10u64 {
            let t = run_dynamic(&spec(TunerKind::Genetic), &workloads, DynamicMode::Transfer, 40, seed).unwrap();
            let r = run_dynamic(&spec(TunerKind::Genetic), &workloads, DynamicMode::Restart, 40, seed).unwrap();
            transfer_final.push(t.per_workload[1].trajectory.final_regret);
            restart_final.push(r.per_workload[1].trajectory.final_regret);
        }
        assert!(median(&transfer_final) <= median(&restart_final));
    }
}

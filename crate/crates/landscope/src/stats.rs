//! Nonparametric statistics: Spearman rank correlation, the Wilcoxon
//! rank-sum test (exact for small tie-free samples, normal approximation with
//! tie correction otherwise), the Vargha-Delaney A12 effect size, the
//! combined better/similar/worse verdict, Cohen's kappa, and multi-annotator
//! agreement averaging.

use crate::error::{Error, Result};

/// Mid-ranks (1-based), averaging over ties.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Tied block spans ranks i+1 ..= j+1; everyone gets the average.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationTier {
    Weak,
    Moderate,
    Strong,
}

impl CorrelationTier {
    pub fn from_value(rho: f64) -> Self {
        if rho > 0.69 {
            CorrelationTier::Strong
        } else if rho > 0.39 {
            CorrelationTier::Moderate
        } else {
            CorrelationTier::Weak
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CorrelationTier::Weak => "weak",
            CorrelationTier::Moderate => "moderate",
            CorrelationTier::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    pub tier: CorrelationTier,
}

/// Spearman rank correlation: Pearson correlation of mid-ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Spearman> {
    if xs.len() != ys.len() {
        return Err(Error::usage("rank correlation needs equally long samples"));
    }
    if xs.len() < 2 {
        return Err(Error::usage("rank correlation needs at least two points"));
    }
    let rx = midranks(xs);
    let ry = midranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let vx = rx.iter().map(|r| (r - mx).powi(2)).sum::<f64>();
    let vy = ry.iter().map(|r| (r - my).powi(2)).sum::<f64>();
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::degenerate(
            "rank correlation",
            "an input has zero rank variance",
        ));
    }
    let cov = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>();
    let rho = cov / (vx.sqrt() * vy.sqrt());
    Ok(Spearman {
        rho,
        tier: CorrelationTier::from_value(rho),
    })
}

/// Abramowitz-Stegun 7.1.26 rational approximation of erf (|error| < 1.5e-7).
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn has_ties(pooled: &[f64]) -> bool {
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Number of ways to pick `take` ranks out of 1..=n with each rank sum, via
/// the classic subset-sum recursion. counts[k][w] after processing rank r =
/// subsets of {1..r} of size k summing to w.
fn rank_sum_counts(n: usize, take: usize) -> Vec<Vec<f64>> {
    let max_sum = take * (2 * n - take + 1) / 2;
    let mut counts = vec![vec![0.0f64; max_sum + 1]; take + 1];
    counts[0][0] = 1.0;
    for rank in 1..=n {
        for k in (1..=take.min(rank)).rev() {
            for w in (rank..=max_sum).rev() {
                counts[k][w] += counts[k - 1][w - rank];
            }
        }
    }
    counts
}

/// Two-sided Wilcoxon rank-sum p-value. Exact when the pooled sample is
/// tie-free with at most 20 values; otherwise a normal approximation with
/// tie-corrected variance and 0.5 continuity correction. Identical multisets
/// and all-tied inputs come out at p = 1.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("rank-sum test needs two non-empty samples"));
    }
    let n_a = a.len();
    let n_b = b.len();
    let n = n_a + n_b;
    let mut pooled: Vec<f64> = a.to_vec();
    pooled.extend_from_slice(b);
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n_a].iter().sum();

    if n <= 20 && !has_ties(&pooled) {
        let counts = rank_sum_counts(n, n_a);
        let dist = &counts[n_a];
        let total: f64 = dist.iter().sum();
        let w = rank_sum_a.round() as usize;
        let p_le: f64 = dist[..=w.min(dist.len() - 1)].iter().sum::<f64>() / total;
        let p_ge: f64 = dist[w.min(dist.len() - 1)..].iter().sum::<f64>() / total;
        return Ok((2.0 * p_le.min(p_ge)).min(1.0));
    }

    let u_a = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let mean = (n_a * n_b) as f64 / 2.0;
    // Tie correction over pooled value multiplicities.
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let variance = (n_a * n_b) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if variance <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u_a - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    if z == 0.0 {
        // Below the continuity correction there is no displacement at all;
        // report exact unity rather than the erf approximation's 1 - 1e-9.
        return Ok(1.0);
    }
    Ok((2.0 * (1.0 - phi(z))).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

/// Vargha-Delaney A12: probability that a value drawn from `a` is preferable
/// to one drawn from `b`, counting ties as half.
pub fn a12(a: &[f64], b: &[f64], orientation: Orientation) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("effect size needs two non-empty samples"));
    }
    let mut score = 0.0;
    for &x in a {
        for &y in b {
            let preferable = match orientation {
                Orientation::HigherBetter => x > y,
                Orientation::LowerBetter => x < y,
            };
            if preferable {
                score += 1.0;
            } else if x == y {
                score += 0.5;
            }
        }
    }
    Ok(score / (a.len() * b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictLabel {
    Better,
    Similar,
    Worse,
}

impl VerdictLabel {
    pub fn label(self) -> &'static str {
        match self {
            VerdictLabel::Better => "better",
            VerdictLabel::Similar => "similar",
            VerdictLabel::Worse => "worse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub p_value: f64,
    pub a12: f64,
    pub label: VerdictLabel,
}

/// Combined significance rule: the first sample is better iff p < 0.05 and
/// A12 > 0.56, worse iff p < 0.05 and A12 < 0.44, otherwise similar.
pub fn verdict(a: &[f64], b: &[f64], orientation: Orientation) -> Result<Verdict> {
    let p_value = wilcoxon_rank_sum(a, b)?;
    let effect = a12(a, b, orientation)?;
    let label = if p_value < 0.05 && effect > 0.56 {
        VerdictLabel::Better
    } else if p_value < 0.05 && effect < 0.44 {
        VerdictLabel::Worse
    } else {
        VerdictLabel::Similar
    };
    Ok(Verdict {
        p_value,
        a12: effect,
        label,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    /// Both raters constant and equal: chance agreement is 1, kappa is
    /// defined as 1.
    pub degenerate: bool,
}

/// Cohen's kappa over two equally long label sequences.
pub fn cohens_kappa<T: Ord>(la: &[T], lb: &[T]) -> Result<Kappa> {
    if la.len() != lb.len() {
        return Err(Error::usage("kappa needs equally long label sequences"));
    }
    if la.is_empty() {
        return Err(Error::usage("kappa needs at least one label pair"));
    }
    let n = la.len() as f64;
    let observed = la.iter().zip(lb).filter(|(a, b)| a == b).count() as f64 / n;

    let mut labels: Vec<&T> = la.iter().chain(lb).collect();
    labels.sort();
    labels.dedup();
    let expected: f64 = labels
        .iter()
        .map(|label| {
            let pa = la.iter().filter(|x| x == label).count() as f64 / n;
            let pb = lb.iter().filter(|x| x == label).count() as f64 / n;
            pa * pb
        })
        .sum();

    if expected >= 1.0 {
        return Ok(Kappa {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Kappa {
        value: (observed - expected) / (1.0 - expected),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementSummary {
    pub human_kappa: f64,
    pub per_llm_kappa: Vec<f64>,
    pub overall: f64,
    pub reliable: bool,
}

/// Arithmetic mean of the human-human kappa and each human-LLM kappa;
/// reliable iff the mean reaches 0.7.
pub fn overall_agreement(human_kappa: f64, llm_kappas: &[f64]) -> AgreementSummary {
    let total: f64 = human_kappa + llm_kappas.iter().sum::<f64>();
    let overall = total / (1 + llm_kappas.len()) as f64;
    AgreementSummary {
        human_kappa,
        per_llm_kappa: llm_kappas.to_vec(),
        overall,
        reliable: overall >= 0.7,
    }
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Median of a sample (average of the middle two for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

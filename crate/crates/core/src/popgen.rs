//! Synthetic stratified populations.
//!
//! A population is built from `K` sets of log-normal draws, set `i` using
//! `mu = 0` and `sigma = ln(1 + i)`. Each set is cut into strata at geometric
//! boundaries `min * r^j` with `r = (max / min)^(1 / L)`; strata with fewer than
//! two values are merged into their right neighbour (the last one into its left
//! neighbour) so every stratum has a standard deviation.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, one stream per set
//! (`set_stream(i)`), so sets are independent of each other and of `K`.

use std::collections::HashSet;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{AllocError, Result};
use crate::problem::BoxProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub label: String,
    /// Number of population units `N_h`.
    pub size: u64,
    /// Standard deviation `S_h` with divisor `N_h - 1`.
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrataPopulation {
    strata: Vec<Stratum>,
}

impl StrataPopulation {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(AllocError::Empty);
        }
        let mut seen = HashSet::new();
        for s in &strata {
            if !seen.insert(s.label.as_str()) {
                return Err(AllocError::DuplicateLabel(s.label.clone()));
            }
            if s.size == 0 {
                return Err(AllocError::InvalidStratum {
                    label: s.label.clone(),
                    reason: "stratum size must be at least 1".into(),
                });
            }
            if !(s.std_dev >= 0.0 && s.std_dev.is_finite()) {
                return Err(AllocError::InvalidStratum {
                    label: s.label.clone(),
                    reason: format!("standard deviation must be non-negative, got {}", s.std_dev),
                });
            }
        }
        Ok(Self { strata })
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Population size `N`.
    pub fn total_size(&self) -> u64 {
        self.strata.iter().map(|s| s.size).sum()
    }

    pub fn labels(&self) -> Vec<String> {
        self.strata.iter().map(|s| s.label.clone()).collect()
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.strata.iter().map(|s| s.size as f64).collect()
    }
}

/// Coefficients `A_h = N_h S_h` and constant `B = sum_h N_h S_h^2` of the
/// variance under simple random sampling without replacement in strata.
pub fn stsi_coefficients(pop: &StrataPopulation) -> Result<(Vec<f64>, f64)> {
    let mut coefficients = Vec::with_capacity(pop.len());
    let mut b = 0.0;
    for s in pop.strata() {
        if s.std_dev == 0.0 {
            return Err(AllocError::ZeroVariance(s.label.clone()));
        }
        let n = s.size as f64;
        coefficients.push(n * s.std_dev);
        b += n * s.std_dev * s.std_dev;
    }
    Ok((coefficients, b))
}

/// `K` sets of `set_size` log-normal draws; set `i` (1-based) uses `sigma = ln(1 + i)`.
pub fn generate_lognormal_sets(sets: usize, set_size: usize, seed: u64) -> Vec<Vec<f64>> {
    (1..=sets)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let sigma = (1.0 + i as f64).ln();
            let dist = LogNormal::new(0.0, sigma).expect("sigma is positive and finite");
            (0..set_size).map(|_| dist.sample(&mut rng)).collect()
        })
        .collect()
}

/// Interior boundaries `min * r^j`, `j = 1..strata`, with `r = (max/min)^(1/strata)`.
pub fn geometric_boundaries(min: f64, max: f64, strata: usize) -> Result<Vec<f64>> {
    if strata < 2 {
        return Err(AllocError::InvalidArgument(format!(
            "need at least 2 strata, got {strata}"
        )));
    }
    if min.is_nan() || min <= 0.0 {
        return Err(AllocError::InvalidArgument(format!(
            "values must be positive, got minimum {min}"
        )));
    }
    if min >= max {
        return Err(AllocError::DegenerateRange(min));
    }
    let ratio = (max / min).powf(1.0 / strata as f64);
    Ok((1..strata).map(|j| min * ratio.powi(j as i32)).collect())
}

/// Strata of a sorted set of values: interior boundaries and the index range
/// of each stratum. Stratum `j` holds the values in `[k_{j-1}, k_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratification {
    pub boundaries: Vec<f64>,
    pub ranges: Vec<Range<usize>>,
}

/// Geometric stratification of ascending `values` into at most `strata` strata.
///
/// Strata holding fewer than `min_size` values are merged into their right
/// neighbour; a short last stratum is merged into its left neighbour.
pub fn geometric_stratify(
    values: &[f64],
    strata: usize,
    min_size: usize,
) -> Result<Stratification> {
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(AllocError::InvalidArgument(
            "values must be sorted ascending".into(),
        ));
    }
    let (min, max) = match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(AllocError::Empty),
    };
    let cuts = geometric_boundaries(min, max, strata)?;

    let mut edges: Vec<(f64, usize)> = cuts
        .iter()
        .map(|&k| (k, values.partition_point(|&v| v < k)))
        .collect();

    let mut starts = vec![0];
    starts.extend(edges.iter().map(|&(_, idx)| idx));
    starts.push(values.len());

    // drop edges that leave a short stratum on their left
    let mut j = 0;
    while j < edges.len() {
        let start = if j == 0 { 0 } else { edges[j - 1].1 };
        if edges[j].1 - start < min_size {
            edges.remove(j);
        } else {
            j += 1;
        }
    }
    // a short last stratum merges left
    while let Some(&(_, last)) = edges.last() {
        if values.len() - last < min_size {
            edges.pop();
        } else {
            break;
        }
    }

    let mut ranges = Vec::with_capacity(edges.len() + 1);
    let mut start = 0;
    for &(_, idx) in &edges {
        ranges.push(start..idx);
        start = idx;
    }
    ranges.push(start..values.len());
    Ok(Stratification {
        boundaries: edges.iter().map(|&(k, _)| k).collect(),
        ranges,
    })
}

/// Sample standard deviation with divisor `n - 1` (Welford's update).
fn std_dev(values: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    (m2 / (values.len() - 1) as f64).sqrt()
}

/// Parameters of a synthetic population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSpec {
    /// Number of log-normal sets `K`.
    pub sets: usize,
    pub set_size: usize,
    /// Strata per set before merging.
    pub strata_per_set: usize,
    pub seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            sets: 10,
            set_size: 10_000,
            strata_per_set: 10,
            seed: 1,
        }
    }
}

/// Draws the sets, stratifies each one and collects the strata. Labels are
/// `"{set}-{stratum}"`, both 1-based.
pub fn build_population(spec: &PopulationSpec) -> Result<StrataPopulation> {
    if spec.sets == 0 || spec.set_size < 2 {
        return Err(AllocError::InvalidArgument(
            "need at least one set with at least two values".into(),
        ));
    }
    let mut strata = Vec::new();
    for (i, mut values) in generate_lognormal_sets(spec.sets, spec.set_size, spec.seed)
        .into_iter()
        .enumerate()
    {
        values.sort_by(f64::total_cmp);
        let cut = geometric_stratify(&values, spec.strata_per_set, 2)?;
        for (j, range) in cut.ranges.into_iter().enumerate() {
            let members = &values[range];
            strata.push(Stratum {
                label: format!("{}-{}", i + 1, j + 1),
                size: members.len() as u64,
                std_dev: std_dev(members),
            });
        }
    }
    StrataPopulation::new(strata)
}

/// How the total sample size is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSize {
    Total(f64),
    /// `n = round(f * N)`.
    Fraction(f64),
}

/// Rule turning a stratum size `N_h` into a sample-size bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundPolicy {
    Constant(f64),
    /// `c * N_h`
    Proportional(f64),
    /// `min(c, N_h / 2)`
    ConstantOrHalf(f64),
    /// `N_h`
    StratumSize,
}

impl BoundPolicy {
    pub fn apply(self, size: u64) -> f64 {
        let n = size as f64;
        match self {
            BoundPolicy::Constant(c) => c,
            BoundPolicy::Proportional(c) => c * n,
            BoundPolicy::ConstantOrHalf(c) => c.min(0.5 * n),
            BoundPolicy::StratumSize => n,
        }
    }
}

/// Box-constrained allocation problem for a population under simple random
/// sampling in strata.
pub fn population_to_problem(
    pop: &StrataPopulation,
    size: SampleSize,
    lower: BoundPolicy,
    upper: BoundPolicy,
) -> Result<BoxProblem> {
    let (coefficients, _) = stsi_coefficients(pop)?;
    let total = match size {
        SampleSize::Total(n) => n,
        SampleSize::Fraction(f) => (f * pop.total_size() as f64).round(),
    };
    let lower: Vec<f64> = pop.strata().iter().map(|s| lower.apply(s.size)).collect();
    let upper: Vec<f64> = pop.strata().iter().map(|s| upper.apply(s.size)).collect();
    BoxProblem::with_labels(pop.labels(), coefficients, lower, upper, total)
}

/// Random feasible problem with `strata` strata, for tests and benchmarks.
///
/// Coefficients span four orders of magnitude; the total is placed uniformly
/// between the bound sums.
pub fn random_box_problem<R: Rng + ?Sized>(rng: &mut R, strata: usize) -> BoxProblem {
    let coefficients: Vec<f64> = (0..strata)
        .map(|_| 10f64.powf(rng.random_range(0.0..4.0)))
        .collect();
    let lower: Vec<f64> = (0..strata).map(|_| rng.random_range(1.0..100.0)).collect();
    let upper: Vec<f64> = lower
        .iter()
        .map(|m| m + rng.random_range(1.0..500.0))
        .collect();
    let lo: f64 = lower.iter().sum();
    let hi: f64 = upper.iter().sum();
    let total = lo + rng.random_range(0.0..1.0) * (hi - lo);
    BoxProblem::new(coefficients, lower, upper, total.clamp(lo, hi))
        .expect("generated data is feasible")
}

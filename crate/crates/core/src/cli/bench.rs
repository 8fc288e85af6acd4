//! Timing harness over a synthetic population and a grid of sampling fractions.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::input::DEFAULT_LOWER;
use super::Algorithm;
use crate::error::Result;
use crate::fpia::{
    bisection_solve, default_lambda0, fpia_solve, FpiaStatus, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::popgen::{
    build_population, population_to_problem, BoundPolicy, PopulationSpec, SampleSize,
};
use crate::problem::{objective, BoxProblem};
use crate::recursive::{rnabox, rnabox_twin};

/// Relative objective gap above which a row fails the bisection cross-check.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub population: PopulationSpec,
    pub fractions: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    /// Run the (algorithm, fraction) cells on the rayon pool.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            population: PopulationSpec::default(),
            fractions: (1..=9).map(|k| k as f64 / 10.0).collect(),
            algorithms: vec![
                Algorithm::Rnabox,
                Algorithm::RnaboxTwin,
                Algorithm::Bisection,
                Algorithm::Fpia,
            ],
            repeats: 5,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationSummary {
    pub sets: usize,
    pub set_size: usize,
    pub strata_per_set: usize,
    pub seed: u64,
    pub strata: usize,
    pub population_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub fraction: f64,
    pub n: f64,
    pub status: String,
    pub median_seconds: f64,
    /// Inner one-sided iteration counts per outer iteration for the box
    /// recursions, the number of fixed-point updates for FPIA, empty otherwise.
    pub iterations: Vec<usize>,
    pub objective: Option<f64>,
    pub take_min: usize,
    pub take_neyman: usize,
    pub take_max: usize,
    /// `|objective - objective_bisection| / objective_bisection`.
    pub bisection_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub population: PopulationSummary,
    pub repeats: usize,
    pub parallel: bool,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Rows whose objective differs from bisection by more than [`CROSS_CHECK_TOL`].
    pub fn cross_check_failures(&self) -> Vec<&BenchRow> {
        self.rows
            .iter()
            .filter(|r| r.bisection_gap.is_some_and(|g| g > CROSS_CHECK_TOL))
            .collect()
    }

    pub fn rows_for(&self, algorithm: Algorithm) -> Vec<&BenchRow> {
        self.rows
            .iter()
            .filter(|r| r.algorithm == algorithm.as_str())
            .collect()
    }
}

struct RunOutcome {
    status: &'static str,
    iterations: Vec<usize>,
    x: Option<Vec<f64>>,
}

fn run_once(p: &BoxProblem, algorithm: Algorithm) -> Result<RunOutcome> {
    let done = |iterations, x| RunOutcome {
        status: "converged",
        iterations,
        x: Some(x),
    };
    Ok(match algorithm {
        Algorithm::Rnabox => {
            let (alloc, trace) = rnabox(p, true);
            done(
                trace.map(|t| t.inner_iterations()).unwrap_or_default(),
                alloc.x,
            )
        }
        Algorithm::RnaboxTwin => done(Vec::new(), rnabox_twin(p).x),
        Algorithm::Bisection => done(Vec::new(), bisection_solve(p, 0.0)?),
        Algorithm::Fpia => {
            let out = fpia_solve(p, default_lambda0(p), DEFAULT_MAX_ITER, DEFAULT_TOL)?;
            RunOutcome {
                status: out.status.as_str(),
                iterations: vec![out.iterations()],
                x: if out.status == FpiaStatus::Converged {
                    out.allocation
                } else {
                    None
                },
            }
        }
        other => {
            return Err(crate::error::AllocError::InvalidArgument(format!(
                "`{}` does not solve the two-sided problem and cannot be benchmarked",
                other.as_str()
            )))
        }
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// (take-min, take-Neyman, take-max) counts, read off by equality with the bounds.
fn roles(p: &BoxProblem, x: &[f64]) -> (usize, usize, usize) {
    let min = (0..p.len()).filter(|&h| x[h] == p.lower()[h]).count();
    let max = (0..p.len()).filter(|&h| x[h] == p.upper()[h]).count();
    (min, p.len() - min - max, max)
}

fn cell(
    p: &BoxProblem,
    fraction: f64,
    algorithm: Algorithm,
    repeats: usize,
    reference: f64,
) -> Result<BenchRow> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = run_once(p, algorithm)?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    let out = last.expect("at least one repeat");
    let objective = out
        .x
        .as_deref()
        .map(|x| objective(p.coefficients(), x))
        .transpose()?;
    let (take_min, take_neyman, take_max) =
        out.x.as_deref().map(|x| roles(p, x)).unwrap_or((0, 0, 0));
    Ok(BenchRow {
        algorithm: algorithm.as_str().to_string(),
        fraction,
        n: p.total(),
        status: out.status.to_string(),
        median_seconds: median(times),
        iterations: out.iterations,
        objective,
        take_min,
        take_neyman,
        take_max,
        bisection_gap: objective.map(|v| (v - reference).abs() / reference),
    })
}

/// Builds the population once, then times every (algorithm, fraction) cell.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    let pop = build_population(&config.population)?;
    let problems = config
        .fractions
        .iter()
        .map(|&f| {
            let p = population_to_problem(
                &pop,
                SampleSize::Fraction(f),
                DEFAULT_LOWER,
                BoundPolicy::StratumSize,
            )?;
            let reference = objective(p.coefficients(), &bisection_solve(&p, 0.0)?)?;
            Ok((f, p, reference))
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(Algorithm, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&a| (0..problems.len()).map(move |i| (a, i)))
        .collect();
    let eval = |&(a, i): &(Algorithm, usize)| {
        let (f, p, reference) = &problems[i];
        cell(p, *f, a, config.repeats, *reference)
    };
    let rows = if config.parallel {
        cells.par_iter().map(eval).collect::<Result<Vec<_>>>()?
    } else {
        cells.iter().map(eval).collect::<Result<Vec<_>>>()?
    };

    Ok(BenchReport {
        population: PopulationSummary {
            sets: config.population.sets,
            set_size: config.population.set_size,
            strata_per_set: config.population.strata_per_set,
            seed: config.population.seed,
            strata: pop.len(),
            population_size: pop.total_size(),
        },
        repeats: config.repeats,
        parallel: config.parallel,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(vec![7.0]), 7.0);
    }

    #[test]
    fn small_bench_has_one_row_per_cell() {
        let config = BenchConfig {
            population: PopulationSpec {
                sets: 2,
                set_size: 500,
                strata_per_set: 5,
                seed: 3,
            },
            fractions: vec![0.2, 0.5],
            algorithms: vec![Algorithm::Rnabox, Algorithm::Bisection],
            repeats: 1,
            parallel: true,
        };
        let report = run_bench(&config).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.cross_check_failures().is_empty());
        assert!(!report.rows_for(Algorithm::Rnabox)[0].iterations.is_empty());
    }
}

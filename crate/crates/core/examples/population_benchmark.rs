// Builds a small synthetic population and times the solvers over a grid of
// sampling fractions.

use rnabox::cli::bench::{run_bench, BenchConfig};
use rnabox::cli::Algorithm;
use rnabox::PopulationSpec;

pub fn run() {
    let config = BenchConfig {
        population: PopulationSpec {
            sets: 4,
            set_size: 2_000,
            strata_per_set: 10,
            seed: 11,
        },
        fractions: vec![0.1, 0.3, 0.5, 0.7, 0.9],
        algorithms: vec![Algorithm::Rnabox, Algorithm::Bisection],
        repeats: 3,
        parallel: false,
    };
    let report = run_bench(&config).expect("feasible fractions");
    println!(
        "{} strata, N = {}",
        report.population.strata, report.population.population_size
    );
    println!(
        "{:<10} {:>5} {:>9} {:>5} {:>6} {:>5}  inner iterations",
        "algorithm", "f", "median us", "min", "neyman", "max"
    );
    for r in &report.rows {
        println!(
            "{:<10} {:>5.1} {:>9.1} {:>5} {:>6} {:>5}  {:?}",
            r.algorithm,
            r.fraction,
            r.median_seconds * 1e6,
            r.take_min,
            r.take_neyman,
            r.take_max,
            r.iterations
        );
    }
    assert!(report.cross_check_failures().is_empty());
}

#[allow(dead_code)]
fn main() {
    run();
}

// Checks candidate allocations against the optimality conditions and
// reconstructs the KKT multipliers of an optimum.

use rnabox::{check_box_optimality, oracle_enumerate, rnabox, Allocation, BoxProblem, Partition};

pub fn run() {
    let p =
        BoxProblem::new(vec![2000., 3000.], vec![30., 40.], vec![50., 200.], 160.).expect("valid");

    let (best, _) = rnabox(&p, false);
    let report = check_box_optimality(&p, &best, 1e-9).expect("well formed");
    println!("rnabox {:?}: optimal = {}", best.x, report.is_optimal);
    if let Some(m) = &report.multipliers {
        println!("  lambda = {:.4}, mu_upper = {:.4?}", m.lambda, m.mu_upper);
    }

    let part = Partition::from_indices(&[0], &[]).expect("disjoint");
    let guess = Allocation::new(p.coefficients(), vec![30., 130.], part).expect("valid");
    let report = check_box_optimality(&p, &guess, 1e-9).expect("well formed");
    println!("guess {:?}: optimal = {}", guess.x, report.is_optimal);
    for v in &report.violations {
        let (a, b) = v.reciprocal();
        println!("  {} : {:.2} vs {:.2}", v.condition.as_str(), a, b);
    }

    let oracle = oracle_enumerate(&p).expect("two strata");
    println!("enumeration agrees: {}", oracle.x == best.x);
}

#[allow(dead_code)]
fn main() {
    run();
}

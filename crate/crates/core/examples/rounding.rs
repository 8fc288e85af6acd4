// Integer allocations with the same total and the variance they cost.

use rnabox::{rnabox, round_allocation, rounding_penalty, BoxProblem};

pub fn run() {
    let p = BoxProblem::new(vec![4160., 240., 530., 40.], vec![5.; 4], vec![50.; 4], 60.)
        .expect("valid");
    let (alloc, _) = rnabox(&p, false);
    let rounded = round_allocation(&p, &alloc.x).expect("integer total");
    let penalty = rounding_penalty(p.coefficients(), &alloc.x, &rounded.x).expect("positive");
    println!("continuous {:.2?}", alloc.x);
    println!("rounded    {:?}  penalty {:.6}", rounded.x, penalty);
    for w in &rounded.warnings {
        println!(
            "  stratum {} left [{}, {}] at {}",
            p.labels()[w.stratum],
            w.lower,
            w.upper,
            w.value
        );
    }
}

#[allow(dead_code)]
fn main() {
    run();
}

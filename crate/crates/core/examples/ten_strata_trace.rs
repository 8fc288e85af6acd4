// Solves the ten-stratum example with n = 5110 and prints every outer
// iteration of the box recursion.

use rnabox::{audit_trace, rnabox, BoxProblem};

pub fn run() {
    let p = BoxProblem::new(
        vec![
            2700., 2000., 4200., 4400., 3200., 6000., 8400., 1900., 5400., 2000.,
        ],
        vec![750., 450., 250., 350., 150., 550., 650., 50., 850., 950.],
        vec![900., 500., 300., 400., 200., 600., 700., 100., 900., 1000.],
        5110.,
    )
    .expect("valid problem");
    let (alloc, trace) = rnabox(&p, true);
    let trace = trace.expect("trace requested");

    println!("{:>3}  {:<24} {:<24} {:>8}", "r", "L", "U", "s");
    for rec in &trace.iterations {
        println!(
            "{:>3}  {:<24} {:<24} {:>8.4}",
            rec.r,
            p.labels_of(&rec.take_min).join(","),
            p.labels_of(&rec.take_max).join(","),
            rec.s.unwrap_or(f64::NAN)
        );
    }
    for (h, x) in alloc.x.iter().enumerate() {
        println!("x[{}] = {:.2} ({})", p.labels()[h], x, alloc.role(h));
    }
    println!("objective = {:.1}", alloc.objective);
    assert!(audit_trace(&trace).is_empty());
}

#[allow(dead_code)]
fn main() {
    run();
}

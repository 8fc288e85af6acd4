// The fixed-point iteration can get stuck or cycle on small problems that the
// recursion solves directly.

use rnabox::fpia::{bisection_solve, DEFAULT_MAX_ITER, DEFAULT_TOL};
use rnabox::{fpia_solve, rnabox, set_function_s, BoxProblem};

fn report(name: &str, p: &BoxProblem, lambda0: f64) {
    let out = fpia_solve(p, lambda0, DEFAULT_MAX_ITER, DEFAULT_TOL).expect("valid start");
    let history: Vec<String> = out
        .lambda_history
        .iter()
        .take(6)
        .map(|l| format!("{l:.2}"))
        .collect();
    println!(
        "{name}: {} after {} updates, lambda = {} ...",
        out.status.as_str(),
        out.iterations(),
        history.join(", ")
    );

    let (alloc, _) = rnabox(p, false);
    let s = set_function_s(p, &alloc.partition).expect("regular optimum");
    println!(
        "  rnabox x = {:.2?}, lambda* = 1/s^2 = {:.2}",
        alloc.x,
        1.0 / (s * s)
    );
    println!(
        "  bisection x = {:.2?}",
        bisection_solve(p, 0.0).expect("bracketed")
    );
}

pub fn run() {
    let blocked = BoxProblem::new(vec![4160., 240., 530., 40.], vec![5.; 4], vec![50.; 4], 60.)
        .expect("valid");
    report("blocked", &blocked, 6861.36);
    let cycling = BoxProblem::new(
        vec![380., 140., 230., 1360.],
        vec![10.; 4],
        vec![50.; 4],
        80.,
    )
    .expect("valid");
    report("oscillating", &cycling, 695.64);
}

#[allow(dead_code)]
fn main() {
    run();
}

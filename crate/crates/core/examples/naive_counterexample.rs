// Adding strata to both bound sets at once can stop at a feasible but
// suboptimal point. The verifier shows which condition breaks.

use rnabox::{check_box_optimality, naive_rna_box, rnabox, Allocation, BoxProblem};

pub fn run() {
    let p = BoxProblem::new(
        vec![420., 352., 2689., 308., 130.],
        vec![24., 15., 1344., 8., 3.],
        vec![420., 88., 2689., 308., 5.],
        1489.,
    )
    .expect("valid problem");

    let naive = naive_rna_box(&p).expect("naive recursion terminates here");
    let naive =
        Allocation::new(p.coefficients(), naive.x, naive.partition).expect("valid allocation");
    let report = check_box_optimality(&p, &naive, 1e-9).expect("well formed");
    println!("naive:  {:?}  objective {:.1}", naive.x, naive.objective);
    for v in &report.violations {
        let label = v.stratum.map(|h| p.labels()[h].as_str()).unwrap_or("-");
        println!(
            "  stratum {label}: {} ({:.4} vs {:.4})",
            v.condition.as_str(),
            v.lhs,
            v.rhs
        );
    }

    let (best, _) = rnabox(&p, false);
    let rounded: Vec<String> = best.x.iter().map(|x| format!("{x:.2}")).collect();
    println!(
        "rnabox: [{}]  objective {:.1}",
        rounded.join(", "),
        best.objective
    );
    assert!(best.objective < naive.objective);
}

#[allow(dead_code)]
fn main() {
    run();
}

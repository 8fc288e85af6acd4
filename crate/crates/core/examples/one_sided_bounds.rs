// Upper bounds only, lower bounds only, and the mirrored box recursion.

use rnabox::verify::check_upper_optimality;
use rnabox::{lrna, rna, rnabox, rnabox_twin, BoxProblem, LowerProblem, UpperProblem};

pub fn run() {
    let upper = UpperProblem::new(
        vec![2700., 2000., 4200., 4400.],
        vec![900., 500., 300., 400.],
        1500.,
    )
    .expect("valid");
    let res = rna(&upper);
    println!(
        "rna x = {:.2?}, take-max {:?}, {} scans",
        res.x, res.take_max, res.iterations
    );
    assert!(
        check_upper_optimality(&upper, &res, 1e-9)
            .expect("well formed")
            .is_optimal
    );

    let lower = LowerProblem::new(
        vec![420., 352., 2689., 308.],
        vec![24., 15., 1344., 8.],
        1489.,
    )
    .expect("valid");
    let res = lrna(&lower);
    println!("lrna x = {:.2?}, take-min {:?}", res.x, res.take_min);

    let p = BoxProblem::new(
        vec![380., 140., 230., 1360.],
        vec![10.; 4],
        vec![50.; 4],
        80.,
    )
    .expect("valid");
    let (a, _) = rnabox(&p, false);
    let b = rnabox_twin(&p);
    println!("rnabox {:.3?} / twin {:.3?}", a.x, b.x);
}

#[allow(dead_code)]
fn main() {
    run();
}

#![allow(dead_code)]

use rnabox::BoxProblem;

pub fn ten_strata() -> BoxProblem {
    BoxProblem::new(
        vec![
            2700., 2000., 4200., 4400., 3200., 6000., 8400., 1900., 5400., 2000.,
        ],
        vec![750., 450., 250., 350., 150., 550., 650., 50., 850., 950.],
        vec![900., 500., 300., 400., 200., 600., 700., 100., 900., 1000.],
        5110.,
    )
    .unwrap()
}

pub fn naive_trap() -> BoxProblem {
    BoxProblem::new(
        vec![420., 352., 2689., 308., 130.],
        vec![24., 15., 1344., 8., 3.],
        vec![420., 88., 2689., 308., 5.],
        1489.,
    )
    .unwrap()
}

pub fn two_strata() -> BoxProblem {
    BoxProblem::new(vec![2000., 3000.], vec![30., 40.], vec![50., 200.], 160.).unwrap()
}

pub fn fpia_blocked() -> BoxProblem {
    BoxProblem::new(vec![4160., 240., 530., 40.], vec![5.; 4], vec![50.; 4], 60.).unwrap()
}

pub fn fpia_cycling() -> BoxProblem {
    BoxProblem::new(
        vec![380., 140., 230., 1360.],
        vec![10.; 4],
        vec![50.; 4],
        80.,
    )
    .unwrap()
}

/// Labels are 1-based stratum numbers.
pub fn set(labels: &[usize]) -> rnabox::StratumSet {
    labels.iter().map(|l| l - 1).collect()
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

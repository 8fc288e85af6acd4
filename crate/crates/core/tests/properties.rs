#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnabox::fpia::{bisection_solve, default_lambda0, DEFAULT_MAX_ITER, DEFAULT_TOL};
use rnabox::popgen::random_box_problem;
use rnabox::verify::DEFAULT_TOL as CHECK_TOL;
use rnabox::{
    candidate, check_box_optimality, check_upper_optimality, fpia_solve, g_tilde, lrna,
    naive_rna_box, objective, oracle_enumerate, phi, rna, rnabox, rnabox_twin, round_preserve_sum,
    set_function_s, x_of_lambda, Allocation, AllocationKind, BoxProblem, LowerProblem, Partition,
    StratumSet, UpperProblem,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Random disjoint `(L, U)` leaving at least one stratum free.
fn random_partition(rng: &mut ChaCha8Rng, len: usize) -> Partition {
    let free = rng.random_range(0..len);
    let mut part = Partition::empty();
    for h in (0..len).filter(|&h| h != free) {
        match rng.random_range(0..3) {
            0 => {
                part.take_min.insert(h);
            }
            1 => {
                part.take_max.insert(h);
            }
            _ => {}
        }
    }
    part
}

#[test]
fn candidate_sums_to_total() {
    let mut rng = rng(1);
    for case in 0..10_000 {
        let len = rng.random_range(1..=30);
        let p = random_box_problem(&mut rng, len);
        let part = random_partition(&mut rng, len);
        let x = candidate(&p, &part).unwrap();
        let sum: f64 = x.iter().sum();
        assert!(
            rel(sum, p.total()) <= 1e-9,
            "case {case}: {sum} vs {}",
            p.total()
        );
    }
}

fn sum_over(values: &[f64], set: &StratumSet) -> f64 {
    set.iter().map(|&h| values[h]).sum()
}

fn diff(a: &StratumSet, b: &StratumSet) -> StratumSet {
    a.difference(b).copied().collect()
}

fn s_of(p: &BoxProblem, l: &StratumSet, u: &StratumSet) -> f64 {
    set_function_s(p, &Partition::new(l.clone(), u.clone()).unwrap()).unwrap()
}

/// Compares both sides of an equivalence, skipping near-ties on either side.
fn equivalent(lhs: (f64, f64), rhs: (f64, f64)) -> Option<bool> {
    let tie = |(a, b): (f64, f64)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    if tie(lhs) || tie(rhs) {
        return None;
    }
    Some((lhs.0 >= lhs.1) == (rhs.0 <= rhs.1))
}

#[test]
fn s_monotonicity_lemma() {
    let mut rng = rng(2);
    let (mut first, mut second) = (0, 0);
    for case in 0..10_000 {
        let len = rng.random_range(2..=12);
        let p = random_box_problem(&mut rng, len);
        let (a, m, big_m) = (p.coefficients(), p.lower(), p.upper());
        // roles: 0 none, 1 A (and B), 2 B only, 3 C (and D), 4 D only, 5 B and D
        let free = rng.random_range(0..len);
        let roles: Vec<u8> = (0..len)
            .map(|h| if h == free { 0 } else { rng.random_range(0..6) })
            .collect();
        let pick = |keep: &[u8]| -> StratumSet {
            (0..len).filter(|&h| keep.contains(&roles[h])).collect()
        };
        let (sa, sb, sc, sd) = (pick(&[1]), pick(&[1, 2, 5]), pick(&[3]), pick(&[3, 4, 5]));
        let (b_a, d_c) = (diff(&sb, &sa), diff(&sd, &sc));

        if sb.is_disjoint(&sd) {
            let s_ac = s_of(&p, &sa, &sc);
            let s_bd = s_of(&p, &sb, &sd);
            let lhs = (s_ac, s_bd);
            let rhs = (
                s_ac * (sum_over(a, &b_a) + sum_over(a, &d_c)),
                sum_over(m, &b_a) + sum_over(big_m, &d_c),
            );
            if let Some(ok) = equivalent(lhs, rhs) {
                assert!(ok, "case {case}: first equivalence fails");
                first += 1;
            }
        }

        let s_ad = s_of(&p, &sa, &sd);
        let s_bc = s_of(&p, &sb, &sc);
        let lhs = (s_ad, s_bc);
        let rhs = (
            s_ad * (sum_over(a, &b_a) - sum_over(a, &d_c)),
            sum_over(m, &b_a) - sum_over(big_m, &d_c),
        );
        if let Some(ok) = equivalent(lhs, rhs) {
            assert!(ok, "case {case}: second equivalence fails");
            second += 1;
        }
    }
    assert!(
        first > 1000 && second > 1000,
        "too few informative cases: {first}, {second}"
    );
}

proptest! {
    #[test]
    fn objective_is_strictly_convex(
        data in prop::collection::vec((1.0f64..1e4, 1.0f64..1e3, 1.0f64..1e3), 1..20),
    ) {
        let a: Vec<f64> = data.iter().map(|d| d.0).collect();
        let x: Vec<f64> = data.iter().map(|d| d.1).collect();
        let y: Vec<f64> = data.iter().map(|d| d.2).collect();
        prop_assume!(x.iter().zip(&y).any(|(u, v)| (u - v).abs() > 1e-3 * u.max(*v)));
        let mid: Vec<f64> = x.iter().zip(&y).map(|(u, v)| 0.5 * (u + v)).collect();
        let (fx, fy, fm) = (objective(&a, &x).unwrap(), objective(&a, &y).unwrap(), objective(&a, &mid).unwrap());
        let avg = 0.5 * (fx + fy);
        prop_assert!(fm < avg - 1e-12 * avg, "{fm} vs {avg}");
    }

    #[test]
    fn x_of_lambda_is_non_increasing(seed in any::<u64>(), l1 in 1e-6f64..1e6, l2 in 1e-6f64..1e6) {
        let mut rng = rng(seed);
        let len = rng.random_range(1..=20);
        let p = random_box_problem(&mut rng, len);
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let (x_lo, x_hi) = (x_of_lambda(&p, lo).unwrap(), x_of_lambda(&p, hi).unwrap());
        for h in 0..len {
            prop_assert!(x_hi[h] <= x_lo[h]);
            prop_assert!(p.lower()[h] <= x_hi[h] && x_hi[h] <= p.upper()[h]);
        }
    }

    #[test]
    fn rounding_commutes_with_permutation(
        parts in prop::collection::vec(0.01f64..1000.0, 1..30),
        seed in any::<u64>(),
    ) {
        let raw: f64 = parts.iter().sum();
        let n = raw.ceil() as u64;
        let x: Vec<f64> = parts.iter().map(|v| v * n as f64 / raw).collect();
        let fractions: Vec<f64> = x.iter().map(|v| v - v.floor()).collect();
        let distinct: BTreeSet<u64> = fractions.iter().map(|f| f.to_bits()).collect();
        prop_assume!(distinct.len() == fractions.len());

        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = rng(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let direct = round_preserve_sum(&x, n).unwrap();
        let via = round_preserve_sum(&permuted, n).unwrap();
        let mut back = vec![0; x.len()];
        for (k, &i) in order.iter().enumerate() {
            back[i] = via[k];
        }
        prop_assert_eq!(direct, back);
    }
}

#[test]
fn g_tilde_is_non_increasing_on_a_grid() {
    let mut rng = rng(3);
    for _ in 0..500 {
        let len = rng.random_range(1..=20);
        let p = random_box_problem(&mut rng, len);
        let (lo, hi) = rnabox::fpia::bisection_bracket(&p);
        let grid: Vec<f64> = (0..=200)
            .map(|k| lo * (hi / lo).powf(k as f64 / 200.0))
            .collect();
        let g: Vec<f64> = grid.iter().map(|&l| g_tilde(&p, l).unwrap()).collect();
        assert!(g[0] > 0.0 || g[0].abs() < 1e-9);
        assert!(*g.last().unwrap() < 0.0 || g.last().unwrap().abs() < 1e-9);
        for w in g.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        }
    }
}

#[test]
fn optimum_lambda_is_a_fixed_point() {
    let mut rng = rng(4);
    let mut regular = 0;
    for case in 0..5_000 {
        let len = rng.random_range(1..=30);
        let p = random_box_problem(&mut rng, len);
        let (alloc, _) = rnabox(&p, false);
        if alloc.kind != AllocationKind::Regular {
            continue;
        }
        let s = set_function_s(&p, &alloc.partition).unwrap();
        let lambda = 1.0 / (s * s);
        // the bound sets at lambda* can differ from (L*, U*) only by ties
        if let Some(next) = phi(&p, lambda).unwrap() {
            assert!(
                (next - lambda).abs() <= 1e-9 * lambda,
                "case {case}: {next} vs {lambda}"
            );
            regular += 1;
        }
    }
    assert!(regular > 1000);
}

#[test]
fn converged_fpia_is_feasible() {
    let mut rng = rng(5);
    let mut converged = 0;
    for case in 0..5_000 {
        let len = rng.random_range(1..=30);
        let p = random_box_problem(&mut rng, len);
        let out = fpia_solve(&p, default_lambda0(&p), DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        if let Some(x) = out.allocation {
            converged += 1;
            let sum: f64 = x.iter().sum();
            assert!(rel(sum, p.total()) <= 1e-9, "case {case}: sum {sum}");
            for h in 0..len {
                assert!(
                    p.lower()[h] <= x[h] && x[h] <= p.upper()[h],
                    "case {case}: stratum {h}"
                );
            }
        }
    }
    assert!(converged > 0);
}

#[test]
fn rnabox_passes_check_with_consistent_multipliers() {
    let mut rng = rng(6);
    for case in 0..10_000 {
        let len = rng.random_range(1..=50);
        let p = random_box_problem(&mut rng, len);
        let (alloc, _) = rnabox(&p, false);
        let report = check_box_optimality(&p, &alloc, CHECK_TOL).unwrap();
        assert!(report.is_optimal, "case {case}: {:?}", report.violations);
        let m = report.multipliers.expect("optimal reports multipliers");
        assert!(m.lambda > 0.0);
        let a = p.coefficients();
        for h in 0..len {
            let residual =
                -a[h] * a[h] / (alloc.x[h] * alloc.x[h]) + m.lambda - m.mu_lower[h] + m.mu_upper[h];
            assert!(
                residual.abs() <= 1e-6 * m.lambda,
                "case {case}: stratum {h} residual {residual}"
            );
            assert!(m.mu_lower[h] >= -1e-6 * m.lambda && m.mu_upper[h] >= -1e-6 * m.lambda);
        }
    }
}

#[test]
fn twin_recursion_finds_the_same_partition() {
    let mut rng = rng(7);
    for case in 0..10_000 {
        let len = rng.random_range(1..=50);
        let p = random_box_problem(&mut rng, len);
        let (a, _) = rnabox(&p, false);
        let b = rnabox_twin(&p);
        assert_eq!(a.partition, b.partition, "case {case}");
        for h in 0..len {
            assert!(rel(a.x[h], b.x[h]) <= 1e-12, "case {case}");
        }
    }
}

#[test]
fn one_sided_solvers_match_box_solver_with_slack_bounds() {
    let mut rng = rng(8);
    for case in 0..5_000 {
        let len = rng.random_range(1..=30);
        let base = random_box_problem(&mut rng, len);
        let a = base.coefficients().to_vec();
        let n = base.total();

        // lower bounds far below any Neyman share
        let up = UpperProblem::new(a.clone(), base.upper().to_vec(), n).unwrap();
        let res = rna(&up);
        assert!(
            check_upper_optimality(&up, &res, CHECK_TOL)
                .unwrap()
                .is_optimal,
            "case {case}"
        );
        let boxed = BoxProblem::new(a.clone(), vec![1e-9; len], base.upper().to_vec(), n).unwrap();
        let x = bisection_solve(&boxed, 0.0).unwrap();
        for h in 0..len {
            assert!(
                rel(res.x[h], x[h]) <= 1e-8,
                "case {case}: rna vs bisection at {h}"
            );
        }

        // upper bounds that can never bind
        let lo = LowerProblem::new(a.clone(), base.lower().to_vec(), n).unwrap();
        let res = lrna(&lo);
        let boxed =
            BoxProblem::new(a.clone(), base.lower().to_vec(), vec![2.0 * n; len], n).unwrap();
        let x = bisection_solve(&boxed, 0.0).unwrap();
        for h in 0..len {
            assert!(
                rel(res.x[h], x[h]) <= 1e-8,
                "case {case}: lrna vs bisection at {h}"
            );
        }
    }
}

#[test]
fn checker_agrees_with_naive_recursion_outcomes() {
    let mut rng = rng(9);
    let (mut optimal, mut caught) = (0, 0);
    for case in 0..10_000 {
        let len = rng.random_range(2..=12);
        let p = random_box_problem(&mut rng, len);
        let Ok(out) = naive_rna_box(&p) else { continue };
        if !out.feasible {
            continue;
        }
        let naive = Allocation::new(p.coefficients(), out.x, out.partition).unwrap();
        let report = check_box_optimality(&p, &naive, CHECK_TOL).unwrap();
        let (best, _) = rnabox(&p, false);
        let same = (0..len).all(|h| rel(naive.x[h], best.x[h]) <= 1e-9);
        assert_eq!(report.is_optimal, same, "case {case}");
        if same {
            optimal += 1;
        } else {
            caught += 1;
        }
    }
    assert!(
        optimal > 0 && caught > 0,
        "{optimal} optimal, {caught} caught"
    );
}

/// All feasible candidates `x(L, U)` with their objective values.
fn all_candidates(p: &BoxProblem) -> Vec<(Partition, f64)> {
    let len = p.len();
    let mut out = Vec::new();
    for code in 0..3usize.pow(len as u32) {
        let mut part = Partition::empty();
        let mut c = code;
        for h in 0..len {
            match c % 3 {
                1 => {
                    part.take_min.insert(h);
                }
                2 => {
                    part.take_max.insert(h);
                }
                _ => {}
            }
            c /= 3;
        }
        let x = if part.covers(len) {
            let x: Vec<f64> = (0..len)
                .map(|h| {
                    if part.take_min.contains(&h) {
                        p.lower()[h]
                    } else {
                        p.upper()[h]
                    }
                })
                .collect();
            if rel(x.iter().sum(), p.total()) > 1e-12 {
                continue;
            }
            x
        } else {
            candidate(p, &part).unwrap()
        };
        if (0..len).all(|h| p.lower()[h] <= x[h] && x[h] <= p.upper()[h]) {
            out.push((part, objective(p.coefficients(), &x).unwrap()));
        }
    }
    out
}

/// Coefficients within one order of magnitude, so that objective gaps between
/// distinct candidates stay well above rounding error.
fn moderate_problem(rng: &mut ChaCha8Rng, len: usize) -> BoxProblem {
    let a: Vec<f64> = (0..len).map(|_| rng.random_range(10.0..100.0)).collect();
    let m: Vec<f64> = (0..len).map(|_| rng.random_range(1.0..20.0)).collect();
    let big_m: Vec<f64> = m.iter().map(|v| v + rng.random_range(1.0..40.0)).collect();
    let (lo, hi): (f64, f64) = (m.iter().sum(), big_m.iter().sum());
    BoxProblem::new(a, m, big_m, lo + rng.random_range(0.0..1.0) * (hi - lo)).unwrap()
}

#[test]
fn enumeration_minimum_is_unique() {
    let mut rng = rng(10);
    for case in 0..2_000 {
        let len = rng.random_range(1..=7);
        let p = moderate_problem(&mut rng, len);
        let cands = all_candidates(&p);
        let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let near: Vec<&Partition> = cands
            .iter()
            .filter(|c| c.1 - best <= 1e-12 * best)
            .map(|c| &c.0)
            .collect();
        assert!(
            near.windows(2).all(|w| w[0] == w[1]),
            "case {case}: {near:?}"
        );
        let oracle = oracle_enumerate(&p).unwrap();
        assert_eq!(&oracle.partition, near[0], "case {case}");
    }
}

//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{close, fpia_blocked, fpia_cycling, naive_trap, set, ten_strata, two_strata};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnabox::cli::bench::{run_bench, BenchConfig};
use rnabox::cli::Algorithm;
use rnabox::fpia::{bisection_solve, DEFAULT_MAX_ITER, DEFAULT_TOL};
use rnabox::popgen::random_box_problem;
use rnabox::verify::{Condition, DEFAULT_TOL as CHECK_TOL};
use rnabox::{
    audit_trace, build_population, check_box_optimality, fpia_solve, naive_rna_box, objective,
    oracle_enumerate, population_to_problem, rnabox, rnabox_twin, round_preserve_sum,
    rounding_penalty, set_function_s, Allocation, BoundPolicy, FpiaStatus, Partition,
    PopulationSpec, SampleSize,
};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn sig3(v: f64) -> f64 {
    let digits = 3 - 1 - v.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits);
    (v * scale).round() / scale
}

fn criterion_1() -> Outcome {
    let p = ten_strata();
    let expected = [
        750., 450., 261.08, 350., 198.92, 550., 650., 100., 850., 950.,
    ];
    let (alloc, trace) = rnabox(&p, true);
    let trace = trace.ok_or("no trace")?;
    ensure!(close(&alloc.x, &expected, 0.005), "x* = {:?}", alloc.x);
    ensure!(
        (alloc.objective - 441591.5).abs() <= 0.5,
        "objective {}",
        alloc.objective
    );
    ensure!(
        alloc.partition.take_min == set(&[1, 2, 4, 6, 7, 9, 10]),
        "L* = {:?}",
        alloc.partition.take_min
    );
    ensure!(
        alloc.partition.take_max == set(&[8]),
        "U* = {:?}",
        alloc.partition.take_max
    );
    ensure!(
        trace.iterations.len() == 6,
        "r* = {}",
        trace.iterations.len()
    );

    let columns: [(&[usize], &[usize]); 6] = [
        (&[], &[2, 3, 4, 5, 6, 7, 8, 9]),
        (&[10], &[3, 4, 5, 6, 7, 8, 9]),
        (&[1, 2, 10], &[3, 4, 5, 6, 7, 8]),
        (&[1, 2, 9, 10], &[3, 5, 8]),
        (&[1, 2, 6, 9, 10], &[3, 5, 8]),
        (&[1, 2, 4, 6, 7, 9, 10], &[8]),
    ];
    for (rec, (l, u)) in trace.iterations.iter().zip(columns) {
        ensure!(
            rec.take_min == set(l) && rec.take_max == set(u),
            "sets differ at r = {}",
            rec.r
        );
    }
    let s: Vec<f64> = trace
        .s_sequence()
        .into_iter()
        .map(|s| sig3(s.unwrap_or(f64::NAN)))
        .collect();
    ensure!(
        s == [0.3, 0.204, 0.122, 0.0803, 0.075, 0.0622],
        "s sequence {s:?}"
    );

    let mut times: Vec<Duration> = (0..201)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(rnabox(std::hint::black_box(&p), true));
            start.elapsed()
        })
        .collect();
    times.sort();
    ensure!(
        times[100] < Duration::from_millis(1),
        "median runtime {:?}",
        times[100]
    );
    Ok(())
}

fn criterion_2() -> Outcome {
    let p = naive_trap();
    let naive = naive_rna_box(&p).map_err(|e| e.to_string())?;
    ensure!(
        naive.x == [30., 88., 1344., 22., 5.],
        "naive x = {:?}",
        naive.x
    );
    let naive =
        Allocation::new(p.coefficients(), naive.x, naive.partition).map_err(|e| e.to_string())?;
    ensure!(
        (naive.objective - 20360.0).abs() <= 0.5,
        "naive objective {}",
        naive.objective
    );
    let report = check_box_optimality(&p, &naive, CHECK_TOL).map_err(|e| e.to_string())?;
    ensure!(!report.is_optimal, "naive allocation passed the check");
    ensure!(
        report.violations.iter().any(|v| v.stratum == Some(1)),
        "no violation on stratum 2: {:?}",
        report.violations
    );

    let (best, _) = rnabox(&p, false);
    ensure!(
        close(&best.x, &[54.44, 45.63, 1344., 39.93, 5.], 0.005),
        "rnabox x = {:?}",
        best.x
    );
    ensure!(
        (best.objective - 17091.0).abs() <= 1.0,
        "rnabox objective {}",
        best.objective
    );
    Ok(())
}

fn criterion_3() -> Outcome {
    let p = two_strata();
    let (best, _) = rnabox(&p, false);
    ensure!(best.x == [50., 110.], "rnabox x = {:?}", best.x);

    let part = Partition::from_indices(&[0], &[]).map_err(|e| e.to_string())?;
    let point =
        Allocation::new(p.coefficients(), vec![30., 130.], part).map_err(|e| e.to_string())?;
    let report = check_box_optimality(&p, &point, CHECK_TOL).map_err(|e| e.to_string())?;
    ensure!(!report.is_optimal, "(30, 130) passed the check");
    let hit = report.violations.iter().any(|v| {
        let (a, b) = v.reciprocal();
        v.condition == Condition::TakeMinAboveLower
            && (a - 66.67).abs() <= 0.005
            && (b - 23.08).abs() <= 0.005
    });
    ensure!(
        hit,
        "66.67 vs 23.08 violation missing: {:?}",
        report.violations
    );
    Ok(())
}

fn criterion_4() -> Outcome {
    let p = fpia_blocked();
    let out = fpia_solve(&p, 6861.36, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure!(out.status == FpiaStatus::Blocked, "status {:?}", out.status);
    let (best, _) = rnabox(&p, false);
    ensure!(
        close(&best.x, &[44.35, 5., 5.65, 5.], 0.005),
        "rnabox x = {:?}",
        best.x
    );
    let s = set_function_s(&p, &best.partition).map_err(|e| e.to_string())?;
    ensure!(
        (1.0 / (s * s) - 8798.44).abs() <= 0.05,
        "1/s^2 = {}",
        1.0 / (s * s)
    );
    Ok(())
}

fn criterion_5() -> Outcome {
    let p = fpia_cycling();
    let out = fpia_solve(&p, 695.64, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure!(
        out.status == FpiaStatus::Oscillating,
        "status {:?}",
        out.status
    );
    let tail = &out.lambda_history[1..];
    ensure!(tail.len() >= 3, "history {:?}", out.lambda_history);
    for (k, lambda) in tail.iter().enumerate() {
        let want = if k % 2 == 0 { 1444.0 } else { 739.84 };
        ensure!(
            (lambda - want).abs() <= 0.005,
            "lambda_{} = {lambda}",
            k + 1
        );
    }
    let (best, _) = rnabox(&p, false);
    ensure!(
        close(&best.x, &[13.1, 10., 10., 46.9], 0.05),
        "rnabox x = {:?}",
        best.x
    );
    let s = set_function_s(&p, &best.partition).map_err(|e| e.to_string())?;
    ensure!(
        (1.0 / (s * s) - 841.0).abs() <= 0.01,
        "lambda* = {}",
        1.0 / (s * s)
    );
    Ok(())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..10_000 {
        let strata = rng.random_range(1..=8);
        let p = random_box_problem(&mut rng, strata);
        let (a, _) = rnabox(&p, false);
        let twin = rnabox_twin(&p);
        let bis = bisection_solve(&p, 0.0).map_err(|e| e.to_string())?;
        let oracle = oracle_enumerate(&p).map_err(|e| e.to_string())?;
        for (name, other) in [
            ("twin", &twin.x),
            ("bisection", &bis),
            ("oracle", &oracle.x),
        ] {
            ensure!(
                close(&a.x, other, 1e-8),
                "case {case}: rnabox {:?} vs {name} {:?}",
                a.x,
                other
            );
        }
        let report = check_box_optimality(&p, &a, CHECK_TOL).map_err(|e| e.to_string())?;
        ensure!(report.is_optimal, "case {case}: {:?}", report.violations);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..10_000 {
        let strata = rng.random_range(1..=50);
        let p = random_box_problem(&mut rng, strata);
        let (_, trace) = rnabox(&p, true);
        let trace = trace.ok_or("no trace")?;
        let issues = audit_trace(&trace);
        ensure!(issues.is_empty(), "case {case}: {issues:?}");
        ensure!(
            trace.iterations.len() <= strata + 1,
            "case {case}: r* = {}",
            trace.iterations.len()
        );
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..10_000 {
        let len = rng.random_range(1..=60);
        let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1000.0)).collect();
        let n = rng.random_range(len as u64..100_000);
        let sum: f64 = raw.iter().sum();
        let x: Vec<f64> = raw.iter().map(|v| v * n as f64 / sum).collect();
        let out = round_preserve_sum(&x, n).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(
            out.iter().sum::<u64>() == n,
            "case {case}: sum {}",
            out.iter().sum::<u64>()
        );
    }

    let p = ten_strata();
    let (best, _) = rnabox(&p, false);
    let ratio = rounding_penalty(
        p.coefficients(),
        &best.x,
        &round_preserve_sum(&best.x, 5110).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(ratio <= 1.0 + 1e-4, "table 1 ratio {ratio}");

    let pop = build_population(&PopulationSpec::default()).map_err(|e| e.to_string())?;
    for k in 1..=9 {
        let f = k as f64 / 10.0;
        let p = population_to_problem(
            &pop,
            SampleSize::Fraction(f),
            BoundPolicy::ConstantOrHalf(2.0),
            BoundPolicy::StratumSize,
        )
        .map_err(|e| e.to_string())?;
        let (best, _) = rnabox(&p, false);
        let rounded = round_preserve_sum(&best.x, p.total() as u64).map_err(|e| e.to_string())?;
        let ratio =
            rounding_penalty(p.coefficients(), &best.x, &rounded).map_err(|e| e.to_string())?;
        ensure!(ratio <= 1.0 + 1e-4, "f = {f}: ratio {ratio}");
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let config = BenchConfig {
        algorithms: vec![Algorithm::Rnabox, Algorithm::Bisection],
        repeats: 1,
        ..BenchConfig::default()
    };
    let report = run_bench(&config).map_err(|e| e.to_string())?;
    ensure!(
        report.cross_check_failures().is_empty(),
        "objective cross-check failed"
    );
    let rows = report.rows_for(Algorithm::Rnabox);
    ensure!(rows.len() == 9, "{} rnabox rows", rows.len());
    for r in &rows {
        ensure!(
            !r.iterations.is_empty(),
            "f = {}: no inner iteration vector",
            r.fraction
        );
        ensure!(
            r.take_min + r.take_neyman + r.take_max == report.population.strata,
            "f = {}: counts",
            r.fraction
        );
    }
    for w in rows.windows(2) {
        ensure!(
            w[1].take_min <= w[0].take_min,
            "take-min grew between f = {} and {}",
            w[0].fraction,
            w[1].fraction
        );
        ensure!(
            w[1].take_max >= w[0].take_max,
            "take-max shrank between f = {} and {}",
            w[0].fraction,
            w[1].fraction
        );
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("1 ten-stratum golden trace", criterion_1),
        ("2 naive recursion counterexample", criterion_2),
        ("3 two-stratum non-optimal point", criterion_3),
        ("4 fixed-point iteration blocked", criterion_4),
        ("5 fixed-point iteration oscillates", criterion_5),
        ("6 oracle equivalence", criterion_6),
        ("7 trace audit", criterion_7),
        ("8 rounding", criterion_8),
        ("9 benchmark harness shape", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS criterion {name} ({:.2?})", start.elapsed()),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn desk_population_objective_matches_bisection() {
    let pop = build_population(&PopulationSpec::default()).unwrap();
    let p = population_to_problem(
        &pop,
        SampleSize::Fraction(0.1),
        BoundPolicy::ConstantOrHalf(2.0),
        BoundPolicy::StratumSize,
    )
    .unwrap();
    let (best, _) = rnabox(&p, false);
    assert!(
        check_box_optimality(&p, &best, CHECK_TOL)
            .unwrap()
            .is_optimal
    );
    let reference = objective(p.coefficients(), &bisection_solve(&p, 0.0).unwrap()).unwrap();
    assert!((best.objective - reference).abs() <= 1e-8 * reference);
}

//! Optimality checks, multiplier reconstruction, brute-force oracle and trace audit.
//!
//! A regular optimum `x = x(L, U)` with `s = s(L, U)` is characterised by
//!
//! ```text
//! L = { h : s <= m_h / A_h }      U = { h : s >= M_h / A_h }
//! ```
//!
//! and a vertex optimum (every stratum at a bound) by
//! `max_{h in U} M_h / A_h <= min_{h in L} m_h / A_h` together with the bound
//! values summing to `n`. The checks below test these conditions with a
//! caller-chosen relative tolerance; the solvers themselves use none.

use crate::error::{AllocError, Result};
use crate::problem::{
    Allocation, BoxProblem, Partition, Role, SolveTrace, StratumSet, UpperProblem,
};
use crate::recursive::RnaResult;

/// Default relative tolerance for the checks in this module.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest problem accepted by [`oracle_enumerate`].
pub const MAX_ENUMERATED_STRATA: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalityCase {
    /// Some stratum strictly between its bounds.
    RegularCaseI,
    /// Every stratum at a bound.
    VertexCaseII,
}

impl OptimalityCase {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimalityCase::RegularCaseI => "regular",
            OptimalityCase::VertexCaseII => "vertex",
        }
    }
}

/// Condition that a stratum (or the allocation as a whole) fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Take-min stratum with `s > m_h / A_h`. `lhs = s`, `rhs = m_h / A_h`.
    TakeMinAboveLower,
    /// Stratum outside the take-min set with `s < m_h / A_h`.
    MissingTakeMin,
    /// Take-max stratum with `s < M_h / A_h`. `lhs = s`, `rhs = M_h / A_h`.
    TakeMaxBelowUpper,
    /// Stratum outside the take-max set with `s > M_h / A_h`.
    MissingTakeMax,
    /// Take-Neyman stratum whose value is not `A_h * s`. `lhs = x_h`, `rhs = A_h * s`.
    NeymanShare,
    /// Vertex allocation with `max_U M/A > min_L m/A`. `lhs` is the max, `rhs` the min.
    VertexOrder,
    /// Values do not sum to `n`. `lhs` is the sum, `rhs = n`.
    TotalMismatch,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::TakeMinAboveLower => "take_min_above_lower",
            Condition::MissingTakeMin => "missing_take_min",
            Condition::TakeMaxBelowUpper => "take_max_below_upper",
            Condition::MissingTakeMax => "missing_take_max",
            Condition::NeymanShare => "neyman_share",
            Condition::VertexOrder => "vertex_order",
            Condition::TotalMismatch => "total_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Offending stratum, absent for whole-allocation conditions.
    pub stratum: Option<usize>,
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
}

impl Violation {
    /// The comparison with both sides inverted, e.g. `A_h / m_h` against `1 / s`
    /// for [`Condition::TakeMinAboveLower`].
    pub fn reciprocal(&self) -> (f64, f64) {
        (1.0 / self.rhs, 1.0 / self.lhs)
    }
}

/// KKT multipliers of the allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// Multiplier of the total-size constraint.
    pub lambda: f64,
    pub mu_lower: Vec<f64>,
    pub mu_upper: Vec<f64>,
    /// `-A_h^2 / x_h^2 + lambda - mu_lower_h + mu_upper_h` per stratum.
    pub stationarity: Vec<f64>,
    /// Largest `|mu_lower_h (m_h - x_h)|` or `|mu_upper_h (x_h - M_h)|`.
    pub complementarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub is_optimal: bool,
    pub case: OptimalityCase,
    pub violations: Vec<Violation>,
    /// Reconstructed multipliers; present only for optimal allocations.
    pub multipliers: Option<Multipliers>,
}

fn scale(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs())
}

/// `a > b` by more than the tolerance.
fn exceeds(a: f64, b: f64, tol: f64) -> bool {
    a - b > tol * scale(a, b)
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale(a, b).max(f64::MIN_POSITIVE)
}

fn malformed(msg: String) -> AllocError {
    AllocError::MalformedAllocation(msg)
}

/// Bound strata must sit exactly (up to `tol`) on their bound.
fn check_structure(
    labels: &[String],
    x: &[f64],
    partition: &Partition,
    lower: Option<&[f64]>,
    upper: &[f64],
    tol: f64,
) -> Result<()> {
    if x.len() != labels.len() {
        return Err(malformed(format!(
            "{} values for {} strata",
            x.len(),
            labels.len()
        )));
    }
    partition
        .validate(x.len())
        .map_err(|e| malformed(e.to_string()))?;
    for h in 0..x.len() {
        let target = match partition.role(h) {
            Role::Min => match lower {
                Some(lower) => lower[h],
                None => {
                    return Err(malformed(format!(
                        "stratum `{}` marked take-min",
                        labels[h]
                    )))
                }
            },
            Role::Max => upper[h],
            Role::Neyman => continue,
        };
        if !near(x[h], target, tol) {
            return Err(malformed(format!(
                "stratum `{}` is marked at bound {target} but has value {}",
                labels[h], x[h]
            )));
        }
    }
    Ok(())
}

fn check_total(x: &[f64], total: f64, tol: f64, out: &mut Vec<Violation>) {
    let sum: f64 = x.iter().sum();
    if !near(sum, total, tol) {
        out.push(Violation {
            stratum: None,
            condition: Condition::TotalMismatch,
            lhs: sum,
            rhs: total,
        });
    }
}

fn push(out: &mut Vec<Violation>, h: usize, condition: Condition, lhs: f64, rhs: f64) {
    out.push(Violation {
        stratum: Some(h),
        condition,
        lhs,
        rhs,
    });
}

fn multipliers(p: &BoxProblem, x: &[f64], partition: &Partition, s: f64) -> Multipliers {
    let lambda = 1.0 / (s * s);
    let len = p.len();
    let (a, lower, upper) = (p.coefficients(), p.lower(), p.upper());
    let mut mu_lower = vec![0.0; len];
    let mut mu_upper = vec![0.0; len];
    for h in 0..len {
        match partition.role(h) {
            Role::Min => mu_lower[h] = lambda - a[h] * a[h] / (lower[h] * lower[h]),
            Role::Max => mu_upper[h] = a[h] * a[h] / (upper[h] * upper[h]) - lambda,
            Role::Neyman => {}
        }
    }
    let stationarity = (0..len)
        .map(|h| -a[h] * a[h] / (x[h] * x[h]) + lambda - mu_lower[h] + mu_upper[h])
        .collect();
    let complementarity = (0..len)
        .map(|h| {
            (mu_lower[h] * (lower[h] - x[h]))
                .abs()
                .max((mu_upper[h] * (x[h] - upper[h])).abs())
        })
        .fold(0.0, f64::max);
    Multipliers {
        lambda,
        mu_lower,
        mu_upper,
        stationarity,
        complementarity,
    }
}

/// Tests whether `alloc` is the optimum of `p`.
///
/// For a regular allocation the take-min and take-max sets must equal the sets
/// implied by `s(L, U)` and every take-Neyman value must equal `A_h * s`. For a
/// vertex allocation any certifying split of the bound strata is accepted. On
/// success the KKT multipliers are reconstructed and reported.
pub fn check_box_optimality(
    p: &BoxProblem,
    alloc: &Allocation,
    tol: f64,
) -> Result<OptimalityReport> {
    let x = &alloc.x;
    let part = &alloc.partition;
    check_structure(p.labels(), x, part, Some(p.lower()), p.upper(), tol)?;
    let (a, lower, upper) = (p.coefficients(), p.lower(), p.upper());
    let mut violations = Vec::new();

    let (case, s_hat) = if part.covers(p.len()) {
        let max_upper = part.take_max.iter().map(|&h| (h, upper[h] / a[h])).fold(
            None,
            |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            },
        );
        let min_lower = part.take_min.iter().map(|&h| (h, lower[h] / a[h])).fold(
            None,
            |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            },
        );
        let s_hat = match (max_upper, min_lower) {
            (Some((h, hi)), Some((_, lo))) => {
                if exceeds(hi, lo, tol) {
                    push(&mut violations, h, Condition::VertexOrder, hi, lo);
                }
                0.5 * (hi + lo)
            }
            (Some((_, hi)), None) => hi,
            (None, Some((_, lo))) => lo,
            (None, None) => unreachable!("problems have at least one stratum"),
        };
        check_total(x, p.total(), tol, &mut violations);
        (OptimalityCase::VertexCaseII, s_hat)
    } else {
        let s = p.s(part).map_err(|e| malformed(e.to_string()))?;
        for h in 0..p.len() {
            let lo = lower[h] / a[h];
            let hi = upper[h] / a[h];
            match part.role(h) {
                Role::Min if exceeds(s, lo, tol) => {
                    push(&mut violations, h, Condition::TakeMinAboveLower, s, lo)
                }
                Role::Max if exceeds(hi, s, tol) => {
                    push(&mut violations, h, Condition::TakeMaxBelowUpper, s, hi)
                }
                Role::Min | Role::Max => {}
                Role::Neyman => {
                    if exceeds(lo, s, tol) {
                        push(&mut violations, h, Condition::MissingTakeMin, s, lo);
                    }
                    if exceeds(s, hi, tol) {
                        push(&mut violations, h, Condition::MissingTakeMax, s, hi);
                    }
                    if !near(x[h], a[h] * s, tol) {
                        push(&mut violations, h, Condition::NeymanShare, x[h], a[h] * s);
                    }
                }
            }
            // the complementary membership tests for bound strata
            match part.role(h) {
                Role::Min if exceeds(s, hi, tol) => {
                    push(&mut violations, h, Condition::MissingTakeMax, s, hi)
                }
                Role::Max if exceeds(lo, s, tol) => {
                    push(&mut violations, h, Condition::MissingTakeMin, s, lo)
                }
                _ => {}
            }
        }
        check_total(x, p.total(), tol, &mut violations);
        (OptimalityCase::RegularCaseI, s)
    };

    let is_optimal = violations.is_empty();
    Ok(OptimalityReport {
        is_optimal,
        case,
        multipliers: is_optimal.then(|| multipliers(p, x, part, s_hat)),
        violations,
    })
}

/// Tests whether `result` is the optimum of the upper-bound-only problem `p`.
pub fn check_upper_optimality(
    p: &UpperProblem,
    result: &RnaResult,
    tol: f64,
) -> Result<OptimalityReport> {
    let part = Partition {
        take_min: StratumSet::new(),
        take_max: result.take_max.clone(),
    };
    check_structure(p.labels(), &result.x, &part, None, p.upper(), tol)?;
    let (a, upper, x) = (p.coefficients(), p.upper(), &result.x);
    let mut violations = Vec::new();

    if result.take_max.len() == p.len() {
        check_total(x, p.total(), tol, &mut violations);
        let is_optimal = violations.is_empty();
        return Ok(OptimalityReport {
            is_optimal,
            case: OptimalityCase::VertexCaseII,
            violations,
            multipliers: None,
        });
    }

    let s = p
        .s(&result.take_max)
        .map_err(|e| malformed(e.to_string()))?;
    for h in 0..p.len() {
        let hi = upper[h] / a[h];
        if result.take_max.contains(&h) {
            if exceeds(hi, s, tol) {
                push(&mut violations, h, Condition::TakeMaxBelowUpper, s, hi);
            }
        } else {
            if exceeds(s, hi, tol) {
                push(&mut violations, h, Condition::MissingTakeMax, s, hi);
            }
            if !near(x[h], a[h] * s, tol) {
                push(&mut violations, h, Condition::NeymanShare, x[h], a[h] * s);
            }
        }
    }
    check_total(x, p.total(), tol, &mut violations);
    Ok(OptimalityReport {
        is_optimal: violations.is_empty(),
        case: OptimalityCase::RegularCaseI,
        violations,
        multipliers: None,
    })
}

/// Brute-force optimum: evaluates the candidate vector of every assignment of
/// strata to {take-min, take-max, take-Neyman}, keeps the feasible ones
/// (relative tolerance `1e-9`), and returns the one with the smallest
/// objective. Ties keep the first assignment in enumeration order.
pub fn oracle_enumerate(p: &BoxProblem) -> Result<Allocation> {
    const FEAS_TOL: f64 = 1e-9;
    let len = p.len();
    if len > MAX_ENUMERATED_STRATA {
        return Err(AllocError::TooManyStrata {
            max: MAX_ENUMERATED_STRATA,
            got: len,
        });
    }
    let (a, lower, upper, n) = (p.coefficients(), p.lower(), p.upper(), p.total());
    let count = 3usize.pow(len as u32);
    let mut roles = vec![0u8; len];
    let mut x = vec![0.0; len];
    let mut best: Option<(f64, Vec<u8>, Vec<f64>)> = None;

    'codes: for code in 0..count {
        let mut c = code;
        for role in roles.iter_mut() {
            *role = (c % 3) as u8;
            c /= 3;
        }
        let mut numer = n;
        let mut denom = 0.0;
        for h in 0..len {
            match roles[h] {
                1 => numer -= lower[h],
                2 => numer -= upper[h],
                _ => denom += a[h],
            }
        }
        let covering = denom == 0.0;
        let s = numer / denom;
        let mut sum = 0.0;
        let mut value = 0.0;
        for h in 0..len {
            x[h] = match roles[h] {
                1 => lower[h],
                2 => upper[h],
                _ => {
                    let xh = a[h] * s;
                    if xh < lower[h] * (1.0 - FEAS_TOL) || xh > upper[h] * (1.0 + FEAS_TOL) {
                        continue 'codes;
                    }
                    xh
                }
            };
            sum += x[h];
            value += a[h] * a[h] / x[h];
        }
        if covering && (sum - n).abs() > FEAS_TOL * n {
            continue;
        }
        if best.as_ref().is_none_or(|(f, _, _)| value < *f) {
            best = Some((value, roles.clone(), x.clone()));
        }
    }

    let (_, roles, x) = best.expect("a feasible problem has a feasible candidate");
    let mut partition = Partition::empty();
    for (h, role) in roles.iter().enumerate() {
        match role {
            1 => partition.take_min.insert(h),
            2 => partition.take_max.insert(h),
            _ => false,
        };
    }
    Allocation::new(a, x, partition)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceViolation {
    /// Iteration indices are not `1, 2, ...`.
    BadIndex { position: usize, r: usize },
    /// `L_r` is not a strict subset of `L_{r+1}`.
    TakeMinNotGrowing { r: usize },
    /// `U_{r+1}` is not a subset of `U_r`.
    TakeMaxGrew { r: usize },
    /// `s(L_{r+1}, U_{r+1}) > s(L_r, U_r)`.
    SIncreased { r: usize, before: f64, after: f64 },
    /// More than `strata + 1` iterations.
    TooManyIterations { iterations: usize, strata: usize },
}

/// Checks the monotonicity properties every box-constrained recursion trace
/// satisfies. Increases of `s` below a relative `1e-12` are treated as ties.
pub fn audit_trace(trace: &SolveTrace) -> Vec<TraceViolation> {
    const S_SLACK: f64 = 1e-12;
    let mut out = Vec::new();
    let its = &trace.iterations;
    if its.len() > trace.strata + 1 {
        out.push(TraceViolation::TooManyIterations {
            iterations: its.len(),
            strata: trace.strata,
        });
    }
    for (position, rec) in its.iter().enumerate() {
        if rec.r != position + 1 {
            out.push(TraceViolation::BadIndex { position, r: rec.r });
        }
    }
    for pair in its.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let r = cur.r;
        if !(cur.take_min.is_subset(&next.take_min) && cur.take_min.len() < next.take_min.len()) {
            out.push(TraceViolation::TakeMinNotGrowing { r });
        }
        if !next.take_max.is_subset(&cur.take_max) {
            out.push(TraceViolation::TakeMaxGrew { r });
        }
        if let (Some(before), Some(after)) = (cur.s, next.s) {
            if after - before > S_SLACK * scale(before, after) {
                out.push(TraceViolation::SIncreased { r, before, after });
            }
        }
    }
    out
}

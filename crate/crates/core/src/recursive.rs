//! Recursive Neyman-type solvers.
//!
//! [`rna`] handles upper bounds only and [`lrna`] lower bounds only. [`rnabox`]
//! solves the two-sided problem by running the upper-bound recursion on a
//! shrinking set of strata, moving strata to their lower bound between rounds.
//! [`rnabox_twin`] swaps the roles of the two bounds.
//!
//! All comparisons are exact. Strata whose Neyman share equals a bound are moved
//! to that bound.

use crate::error::Result;
use crate::problem::{
    set_function_s, Allocation, AllocationKind, BoxProblem, LowerProblem, Partition, Role,
    SolveTrace, StratumSet, TraceRecord, UpperProblem,
};

/// Output of the upper-bound recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RnaResult {
    pub x: Vec<f64>,
    pub take_max: StratumSet,
    /// Number of bound scans (evaluations of `s`) performed.
    pub iterations: usize,
}

/// Output of the lower-bound recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct LrnaResult {
    pub x: Vec<f64>,
    pub take_min: StratumSet,
    pub iterations: usize,
}

/// Options for [`rnabox_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RnaboxOptions {
    /// Record one [`TraceRecord`] per outer iteration.
    pub trace: bool,
    /// From the second outer iteration on, only scan the previous take-max set
    /// for new take-max strata. The final allocation is unchanged.
    pub shrink_domain: bool,
}

/// Output of the naive simultaneous recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveOutcome {
    pub x: Vec<f64>,
    pub partition: Partition,
    /// Whether every entry of `x` lies within its bounds.
    pub feasible: bool,
}

/// Which bound a one-sided recursion works against.
#[derive(Clone, Copy)]
enum Side {
    Upper,
    Lower,
}

/// One-sided recursion restricted to the strata flagged in `active`.
///
/// Writes the solution for active strata into `x` and returns the strata set at
/// their bound (as a mask) and the number of scans. Bound entries are assigned,
/// never computed, so `x[h] == bound[h]` identifies them exactly.
fn one_sided(
    coefficients: &[f64],
    bound: &[f64],
    side: Side,
    active: &[bool],
    total: f64,
    domain: Option<&StratumSet>,
    x: &mut [f64],
) -> (Vec<bool>, usize) {
    let len = coefficients.len();
    let active_count = active.iter().filter(|&&a| a).count();
    let mut at_bound = vec![false; len];
    let mut bound_count = 0;
    let mut iterations = 0;
    let mut s = f64::NAN;
    let mut fresh = Vec::new();

    while bound_count < active_count {
        iterations += 1;
        let mut numer = total;
        let mut denom = 0.0;
        for h in (0..len).filter(|&h| active[h]) {
            if at_bound[h] {
                numer -= bound[h];
            } else {
                denom += coefficients[h];
            }
        }
        s = numer / denom;

        fresh.clear();
        let scan = |h: usize| active[h] && !at_bound[h];
        let hits = |h: usize| {
            let share = coefficients[h] * s;
            match side {
                Side::Upper => share >= bound[h],
                Side::Lower => share <= bound[h],
            }
        };
        match domain {
            Some(dom) => fresh.extend(dom.iter().copied().filter(|&h| scan(h) && hits(h))),
            None => fresh.extend((0..len).filter(|&h| scan(h) && hits(h))),
        }
        if fresh.is_empty() {
            break;
        }
        for &h in &fresh {
            at_bound[h] = true;
        }
        bound_count += fresh.len();
    }

    for h in (0..len).filter(|&h| active[h]) {
        x[h] = if at_bound[h] {
            bound[h]
        } else {
            coefficients[h] * s
        };
    }
    (at_bound, iterations)
}

fn mask_to_set(mask: &[bool]) -> StratumSet {
    mask.iter()
        .enumerate()
        .filter_map(|(h, &b)| b.then_some(h))
        .collect()
}

/// Recursive Neyman allocation under upper bounds.
///
/// Terminates after at most `len` scans. When `n` equals the sum of upper bounds
/// every stratum ends at its bound.
pub fn rna(p: &UpperProblem) -> RnaResult {
    rna_impl(p, None)
}

/// [`rna`] with the scan for new take-max strata limited to `domain`.
///
/// The caller must guarantee that the optimal take-max set lies within
/// `domain`; otherwise the output is unspecified.
pub fn rna_with_domain(p: &UpperProblem, domain: &StratumSet) -> RnaResult {
    rna_impl(p, Some(domain))
}

fn rna_impl(p: &UpperProblem, domain: Option<&StratumSet>) -> RnaResult {
    let len = p.len();
    let mut x = vec![0.0; len];
    let active = vec![true; len];
    let (mask, iterations) = one_sided(
        p.coefficients(),
        p.upper(),
        Side::Upper,
        &active,
        p.total(),
        domain,
        &mut x,
    );
    RnaResult {
        x,
        take_max: mask_to_set(&mask),
        iterations,
    }
}

/// Recursive Neyman allocation under lower bounds.
pub fn lrna(p: &LowerProblem) -> LrnaResult {
    let len = p.len();
    let mut x = vec![0.0; len];
    let active = vec![true; len];
    let (mask, iterations) = one_sided(
        p.coefficients(),
        p.lower(),
        Side::Lower,
        &active,
        p.total(),
        None,
        &mut x,
    );
    LrnaResult {
        x,
        take_min: mask_to_set(&mask),
        iterations,
    }
}

fn finish(p: &BoxProblem, x: Vec<f64>, partition: Partition) -> Allocation {
    let objective = p
        .coefficients()
        .iter()
        .zip(&x)
        .map(|(a, xh)| a * a / xh)
        .sum();
    let kind = if partition.covers(p.len()) {
        AllocationKind::Vertex
    } else {
        AllocationKind::Regular
    };
    Allocation {
        x,
        partition,
        kind,
        objective,
    }
}

/// Optimum allocation under lower and upper bounds.
///
/// Returns the unique optimum; with `want_trace` also the per-iteration sets.
pub fn rnabox(p: &BoxProblem, want_trace: bool) -> (Allocation, Option<SolveTrace>) {
    rnabox_with(
        p,
        RnaboxOptions {
            trace: want_trace,
            shrink_domain: false,
        },
    )
}

pub fn rnabox_with(p: &BoxProblem, opts: RnaboxOptions) -> (Allocation, Option<SolveTrace>) {
    let len = p.len();
    let (coef, lower, upper) = (p.coefficients(), p.lower(), p.upper());
    let mut x = vec![0.0; len];
    let mut active = vec![true; len];
    let mut take_min = StratumSet::new();
    let mut total = p.total();
    let mut trace = opts.trace.then(|| SolveTrace {
        strata: len,
        iterations: Vec::new(),
    });
    let mut previous_max: Option<StratumSet> = None;
    let mut r = 0;

    let take_max = loop {
        r += 1;
        let domain = if opts.shrink_domain {
            previous_max.as_ref()
        } else {
            None
        };
        let (_, inner) = one_sided(coef, upper, Side::Upper, &active, total, domain, &mut x);
        let take_max: StratumSet = (0..len)
            .filter(|&h| active[h] && x[h] == upper[h])
            .collect();
        let fresh_min: Vec<usize> = (0..len)
            .filter(|&h| active[h] && !take_max.contains(&h) && x[h] <= lower[h])
            .collect();

        if let Some(trace) = trace.as_mut() {
            let part = Partition {
                take_min: take_min.clone(),
                take_max: take_max.clone(),
            };
            trace.iterations.push(TraceRecord {
                r,
                s: set_function_s(p, &part).ok(),
                take_min: part.take_min,
                take_max: part.take_max,
                inner_iterations: inner,
            });
        }

        if fresh_min.is_empty() {
            break take_max;
        }
        total -= fresh_min.iter().map(|&h| lower[h]).sum::<f64>();
        for &h in &fresh_min {
            active[h] = false;
            take_min.insert(h);
        }
        previous_max = Some(take_max);
    };

    for &h in &take_min {
        x[h] = lower[h];
    }
    let partition = Partition { take_min, take_max };
    (finish(p, x, partition), trace)
}

/// Two-sided solver running the lower-bound recursion inside and accumulating
/// take-max strata between rounds. Produces the same optimum as [`rnabox`].
pub fn rnabox_twin(p: &BoxProblem) -> Allocation {
    let len = p.len();
    let (coef, lower, upper) = (p.coefficients(), p.lower(), p.upper());
    let mut x = vec![0.0; len];
    let mut active = vec![true; len];
    let mut take_max = StratumSet::new();
    let mut total = p.total();

    let take_min = loop {
        one_sided(coef, lower, Side::Lower, &active, total, None, &mut x);
        let take_min: StratumSet = (0..len)
            .filter(|&h| active[h] && x[h] == lower[h])
            .collect();
        let fresh_max: Vec<usize> = (0..len)
            .filter(|&h| active[h] && !take_min.contains(&h) && x[h] >= upper[h])
            .collect();
        if fresh_max.is_empty() {
            break take_min;
        }
        total -= fresh_max.iter().map(|&h| upper[h]).sum::<f64>();
        for &h in &fresh_max {
            active[h] = false;
            take_max.insert(h);
        }
    };

    for &h in &take_max {
        x[h] = upper[h];
    }
    finish(p, x, Partition { take_min, take_max })
}

/// Simultaneous take-min/take-max recursion without backtracking.
///
/// Known to be incorrect: it can stop at a feasible but suboptimal allocation,
/// or at an infeasible one. Kept as a reference point for tests and teaching.
/// Fails with [`crate::AllocError::PartitionCoversAll`] if every stratum
/// reaches a bound before the recursion settles.
pub fn naive_rna_box(p: &BoxProblem) -> Result<NaiveOutcome> {
    let len = p.len();
    let mut part = Partition::empty();
    loop {
        let s = set_function_s(p, &part)?;
        let free = || (0..len).filter(|&h| part.role(h) == Role::Neyman);
        let fresh_max: Vec<usize> = free()
            .filter(|&h| p.coefficients()[h] * s >= p.upper()[h])
            .collect();
        let fresh_min: Vec<usize> = free()
            .filter(|&h| p.coefficients()[h] * s <= p.lower()[h])
            .collect();
        if fresh_max.is_empty() && fresh_min.is_empty() {
            break;
        }
        part.take_max.extend(fresh_max);
        part.take_min.extend(fresh_min);
    }
    let x = p.candidate(&part)?;
    let feasible = (0..len).all(|h| p.lower()[h] <= x[h] && x[h] <= p.upper()[h]);
    Ok(NaiveOutcome {
        x,
        partition: part,
        feasible,
    })
}

//! Allocation as a function of a Lagrange-type parameter `lambda`, the
//! fixed-point iteration built on it, and a bisection root finder.
//!
//! For `lambda > 0` every stratum takes `M_h` when `lambda <= A_h^2 / M_h^2`,
//! `m_h` when `lambda >= A_h^2 / m_h^2`, and `A_h / sqrt(lambda)` otherwise.
//! The optimum is the allocation at the root of `g(lambda) = sum_h x_h(lambda) - n`.
//!
//! The fixed-point iteration is implemented as stated, including the cases
//! where it stalls ([`FpiaStatus::Blocked`]) or cycles
//! ([`FpiaStatus::Oscillating`]). Bisection on `g` always converges and serves
//! as the reference solver in tests.

use crate::error::{AllocError, Result};
use crate::problem::{set_function_s, BoxProblem, Partition, StratumSet};

/// Default iteration cap for [`fpia_solve`].
pub const DEFAULT_MAX_ITER: usize = 200;
/// Default relative tolerance for [`fpia_solve`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative distance under which two iterates count as the same value when
/// looking for cycles.
const CYCLE_TOL: f64 = 1e-12;

/// Strata grouped by their regime at a given `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPartition {
    pub lambda: f64,
    /// `lambda <= A_h^2 / M_h^2`
    pub at_upper: StratumSet,
    /// `lambda >= A_h^2 / m_h^2`
    pub at_lower: StratumSet,
    pub interior: StratumSet,
}

impl LambdaPartition {
    pub fn new(p: &BoxProblem, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let mut out = Self {
            lambda,
            at_upper: StratumSet::new(),
            at_lower: StratumSet::new(),
            interior: StratumSet::new(),
        };
        for h in 0..p.len() {
            match regime(p, h, lambda) {
                Regime::Upper => out.at_upper.insert(h),
                Regime::Lower => out.at_lower.insert(h),
                Regime::Interior => out.interior.insert(h),
            };
        }
        Ok(out)
    }

    pub fn as_partition(&self) -> Partition {
        Partition {
            take_min: self.at_lower.clone(),
            take_max: self.at_upper.clone(),
        }
    }
}

enum Regime {
    Upper,
    Lower,
    Interior,
}

fn regime(p: &BoxProblem, h: usize, lambda: f64) -> Regime {
    let a2 = p.coefficients()[h] * p.coefficients()[h];
    let (m, big_m) = (p.lower()[h], p.upper()[h]);
    if lambda <= a2 / (big_m * big_m) {
        Regime::Upper
    } else if lambda >= a2 / (m * m) {
        Regime::Lower
    } else {
        Regime::Interior
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(AllocError::NonPositiveLambda(lambda))
    }
}

/// Allocation at parameter `lambda`. Non-increasing in `lambda` componentwise.
pub fn x_of_lambda(p: &BoxProblem, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let root = lambda.sqrt();
    Ok((0..p.len())
        .map(|h| match regime(p, h, lambda) {
            Regime::Upper => p.upper()[h],
            Regime::Lower => p.lower()[h],
            Regime::Interior => p.coefficients()[h] / root,
        })
        .collect())
}

/// `sum_h x_h(lambda) - n`; continuous and non-increasing.
pub fn g_tilde(p: &BoxProblem, lambda: f64) -> Result<f64> {
    Ok(x_of_lambda(p, lambda)?.iter().sum::<f64>() - p.total())
}

/// `s(J_m, J_M)` at `lambda`, or `None` when the bound sets cover every stratum.
fn s_at(p: &BoxProblem, lambda: f64) -> Result<Option<f64>> {
    let groups = LambdaPartition::new(p, lambda)?;
    if groups.interior.is_empty() {
        return Ok(None);
    }
    set_function_s(p, &groups.as_partition()).map(Some)
}

/// `1 / s^2(J_m, J_M)` at `lambda`, or `None` when it is undefined (the
/// bound sets cover every stratum, or `s` is zero).
pub fn phi(p: &BoxProblem, lambda: f64) -> Result<Option<f64>> {
    Ok(s_at(p, lambda)?
        .filter(|&s| s != 0.0)
        .map(|s| 1.0 / (s * s)))
}

/// Starting point `1 / s^2(∅, ∅)`.
pub fn default_lambda0(p: &BoxProblem) -> f64 {
    let sum_a: f64 = p.coefficients().iter().sum();
    let s = p.total() / sum_a;
    1.0 / (s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpiaStatus {
    Converged,
    /// The next iterate is undefined: `s(J_m, J_M) = 0` or the bound sets cover
    /// every stratum.
    Blocked,
    /// An earlier iterate recurred.
    Oscillating,
    /// `phi(lambda) = lambda` with `s(J_m, J_M) < 0`. Squaring hides the sign,
    /// so this fixed point does not solve `g(lambda) = 0`.
    SpuriousFixedPoint,
    MaxIterations,
}

impl FpiaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FpiaStatus::Converged => "converged",
            FpiaStatus::Blocked => "blocked",
            FpiaStatus::Oscillating => "oscillating",
            FpiaStatus::SpuriousFixedPoint => "spurious_fixed_point",
            FpiaStatus::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpiaOutcome {
    pub status: FpiaStatus,
    /// `lambda_0, lambda_1, ...`. The last entry is the value at which the
    /// iteration stopped.
    pub lambda_history: Vec<f64>,
    /// Present only on convergence.
    pub allocation: Option<Vec<f64>>,
}

impl FpiaOutcome {
    /// Number of fixed-point updates performed.
    pub fn iterations(&self) -> usize {
        self.lambda_history.len().saturating_sub(1)
    }
}

/// Fixed-point iteration `lambda <- 1 / s^2(J_m(lambda), J_M(lambda))`.
///
/// Stops with `Converged` once an update moves `lambda` by at most
/// `tol * lambda`, with `Blocked` when the update is undefined, and with
/// `Oscillating` when a new iterate matches one at least two steps back. A
/// fixed point with negative `s` is reported as `SpuriousFixedPoint`.
pub fn fpia_solve(p: &BoxProblem, lambda0: f64, max_iter: usize, tol: f64) -> Result<FpiaOutcome> {
    check_lambda(lambda0)?;
    let mut history = vec![lambda0];
    for _ in 0..max_iter {
        let current = *history.last().expect("history is never empty");
        let s = match s_at(p, current)? {
            Some(s) if s != 0.0 => s,
            _ => {
                return Ok(FpiaOutcome {
                    status: FpiaStatus::Blocked,
                    lambda_history: history,
                    allocation: None,
                })
            }
        };
        let next = 1.0 / (s * s);
        history.push(next);
        if (next - current).abs() <= tol * current {
            if s < 0.0 {
                return Ok(FpiaOutcome {
                    status: FpiaStatus::SpuriousFixedPoint,
                    lambda_history: history,
                    allocation: None,
                });
            }
            return Ok(FpiaOutcome {
                status: FpiaStatus::Converged,
                allocation: Some(x_of_lambda(p, next)?),
                lambda_history: history,
            });
        }
        let earlier = &history[..history.len() - 2];
        if earlier
            .iter()
            .any(|&old| (old - next).abs() <= CYCLE_TOL * old.abs().max(next.abs()))
        {
            return Ok(FpiaOutcome {
                status: FpiaStatus::Oscillating,
                lambda_history: history,
                allocation: None,
            });
        }
    }
    Ok(FpiaOutcome {
        status: FpiaStatus::MaxIterations,
        lambda_history: history,
        allocation: None,
    })
}

/// Bracket `[lo, hi]` on which `g` changes sign for every feasible problem.
pub fn bisection_bracket(p: &BoxProblem) -> (f64, f64) {
    const WIDEN: f64 = 1e-3;
    let ratios = (0..p.len()).map(|h| {
        let a = p.coefficients()[h];
        (
            a * a / (p.upper()[h] * p.upper()[h]),
            a * a / (p.lower()[h] * p.lower()[h]),
        )
    });
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), (u, l)| {
        (lo.min(u), hi.max(l))
    });
    ((1.0 - WIDEN) * lo, (1.0 + WIDEN) * hi)
}

/// Solves `g(lambda) = 0` by bisection and returns `x(lambda)`.
///
/// Stops as soon as `|g| <= tol` or the bracket cannot be halved any further,
/// so `tol = 0` runs to full floating-point resolution.
pub fn bisection_solve(p: &BoxProblem, tol: f64) -> Result<Vec<f64>> {
    let (mut lo, mut hi) = bisection_bracket(p);
    let g_lo = g_tilde(p, lo)?;
    let g_hi = g_tilde(p, hi)?;
    if g_lo.abs() <= tol || g_lo == 0.0 {
        return x_of_lambda(p, lo);
    }
    if g_hi.abs() <= tol || g_hi == 0.0 {
        return x_of_lambda(p, hi);
    }
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(AllocError::BracketFailure { lo: g_lo, hi: g_hi });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = g_tilde(p, mid)?;
        if g.abs() <= tol || g == 0.0 {
            return x_of_lambda(p, mid);
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the closer endpoint
    let (g_lo, g_hi) = (g_tilde(p, lo)?, g_tilde(p, hi)?);
    x_of_lambda(p, if g_lo.abs() <= g_hi.abs() { lo } else { hi })
}

//! Sum-preserving rounding of continuous allocations.
//!
//! Largest-remainder rounding: floor every entry, then hand the missing units
//! to the entries with the largest fractional parts, earlier strata first on
//! ties. The result sums exactly to `n` and moves no entry by a full unit.

use crate::error::{AllocError, Result};
use crate::problem::{objective, BoxProblem};

/// Relative tolerance on `sum(x) == n` accepted by [`round_preserve_sum`].
pub const SUM_TOL: f64 = 1e-6;

/// Rounds `x` to non-negative integers summing to `n`.
pub fn round_preserve_sum(x: &[f64], n: u64) -> Result<Vec<u64>> {
    if let Some(h) = x.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(AllocError::NonPositiveAllocation(h));
    }
    let sum: f64 = x.iter().sum();
    if (sum - n as f64).abs() > SUM_TOL * (n as f64).max(1.0) {
        return Err(AllocError::SumMismatch { sum, expected: n });
    }

    let mut out: Vec<u64> = x.iter().map(|v| v.floor() as u64).collect();
    let floored: u64 = out.iter().sum();
    let residual = n
        .checked_sub(floored)
        .ok_or(AllocError::SumMismatch { sum, expected: n })? as usize;
    if residual > x.len() {
        return Err(AllocError::SumMismatch { sum, expected: n });
    }

    let mut order: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps label order among equal remainders
    order.sort_by(|&i, &j| {
        let (fi, fj) = (x[i] - x[i].floor(), x[j] - x[j].floor());
        fj.partial_cmp(&fi).expect("finite values")
    });
    for &h in order.iter().take(residual) {
        out[h] += 1;
    }
    Ok(out)
}

/// `objective(x_int) / objective(x_cont)`: the relative variance cost of rounding.
pub fn rounding_penalty(coefficients: &[f64], x_cont: &[f64], x_int: &[u64]) -> Result<f64> {
    let as_float: Vec<f64> = x_int.iter().map(|&v| v as f64).collect();
    Ok(objective(coefficients, &as_float)? / objective(coefficients, x_cont)?)
}

/// A rounded value that left its stratum's bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundWarning {
    pub stratum: usize,
    pub value: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedAllocation {
    pub x: Vec<u64>,
    /// Strata pushed outside `[m_h, M_h]`. Reported, not repaired.
    pub warnings: Vec<BoundWarning>,
}

/// Rounds an allocation of `p` and reports strata that leave their bounds.
/// The total of `p` must be an integer.
pub fn round_allocation(p: &BoxProblem, x: &[f64]) -> Result<RoundedAllocation> {
    let n = p.total();
    if n.fract() != 0.0 {
        return Err(AllocError::InvalidArgument(format!(
            "total sample size {n} is not an integer"
        )));
    }
    let rounded = round_preserve_sum(x, n as u64)?;
    Ok(RoundedAllocation {
        warnings: bound_warnings(p.lower(), p.upper(), &rounded),
        x: rounded,
    })
}

pub fn bound_warnings(lower: &[f64], upper: &[f64], x: &[u64]) -> Vec<BoundWarning> {
    x.iter()
        .enumerate()
        .filter(|&(h, &v)| (v as f64) < lower[h] || (v as f64) > upper[h])
        .map(|(h, &v)| BoundWarning {
            stratum: h,
            value: v,
            lower: lower[h],
            upper: upper[h],
        })
        .collect()
}

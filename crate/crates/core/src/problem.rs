//! Problem data, stratum partitions and the quantities every solver is built from.
//!
//! Strata are identified by their position in the problem they belong to. A
//! [`StratumSet`] holds such positions; labels are carried alongside purely for
//! presentation and I/O, so no solver ever reorders strata.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{AllocError, Result};

/// A set of strata, given by their positions in the owning problem.
pub type StratumSet = BTreeSet<usize>;

fn default_labels(len: usize) -> Vec<String> {
    (1..=len).map(|h| h.to_string()).collect()
}

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(AllocError::Empty);
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(AllocError::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(AllocError::LengthMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

fn invalid(label: &str, reason: impl Into<String>) -> AllocError {
    AllocError::InvalidStratum {
        label: label.to_string(),
        reason: reason.into(),
    }
}

fn check_coefficients(labels: &[String], coefficients: &[f64]) -> Result<()> {
    for (label, &a) in labels.iter().zip(coefficients) {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(
                label,
                format!("coefficient must be positive, got {a}"),
            ));
        }
    }
    Ok(())
}

fn find_label(labels: &[String], label: &str) -> Option<usize> {
    labels.iter().position(|l| l == label)
}

/// Allocation problem with a lower and an upper bound on every stratum sample size.
///
/// Minimizes `sum_h a_h^2 / x_h` subject to `sum_h x_h = n` and
/// `m_h <= x_h <= M_h`. Construction rejects infeasible data, so solvers never
/// re-check feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxProblem {
    labels: Vec<String>,
    coefficients: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    total: f64,
}

impl BoxProblem {
    /// Builds a problem with labels `"1"`, `"2"`, ... in input order.
    pub fn new(
        coefficients: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        total: f64,
    ) -> Result<Self> {
        Self::with_labels(
            default_labels(coefficients.len()),
            coefficients,
            lower,
            upper,
            total,
        )
    }

    pub fn with_labels(
        labels: Vec<String>,
        coefficients: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        total: f64,
    ) -> Result<Self> {
        check_labels(&labels)?;
        let len = labels.len();
        check_len("coefficients", len, coefficients.len())?;
        check_len("lower bounds", len, lower.len())?;
        check_len("upper bounds", len, upper.len())?;
        check_coefficients(&labels, &coefficients)?;
        for h in 0..len {
            let (m, big_m) = (lower[h], upper[h]);
            if !(m.is_finite() && big_m.is_finite() && m > 0.0 && m < big_m) {
                return Err(invalid(
                    &labels[h],
                    format!("bounds must satisfy 0 < m < M, got m = {m}, M = {big_m}"),
                ));
            }
        }
        let lower_sum: f64 = lower.iter().sum();
        let upper_sum: f64 = upper.iter().sum();
        if !total.is_finite() || total < lower_sum || total > upper_sum {
            return Err(AllocError::InfeasibleProblem(format!(
                "total sample size {total} is outside [{lower_sum}, {upper_sum}]"
            )));
        }
        Ok(Self {
            labels,
            coefficients,
            lower,
            upper,
            total,
        })
    }

    /// Same strata with a different total sample size.
    pub fn with_total(&self, total: f64) -> Result<Self> {
        Self::with_labels(
            self.labels.clone(),
            self.coefficients.clone(),
            self.lower.clone(),
            self.upper.clone(),
            total,
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        find_label(&self.labels, label)
    }

    /// Resolves labels into a stratum set.
    pub fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<StratumSet> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref()).ok_or_else(|| {
                    AllocError::InvalidArgument(format!("unknown label `{}`", l.as_ref()))
                })
            })
            .collect()
    }

    /// Labels of the strata in `set`, in problem order.
    pub fn labels_of(&self, set: &StratumSet) -> Vec<&str> {
        set.iter().map(|&h| self.labels[h].as_str()).collect()
    }

    /// Relaxation keeping only the upper bounds.
    pub fn upper_problem(&self) -> UpperProblem {
        UpperProblem {
            labels: self.labels.clone(),
            coefficients: self.coefficients.clone(),
            upper: self.upper.clone(),
            total: self.total,
        }
    }

    /// Relaxation keeping only the lower bounds.
    pub fn lower_problem(&self) -> LowerProblem {
        LowerProblem {
            labels: self.labels.clone(),
            coefficients: self.coefficients.clone(),
            lower: self.lower.clone(),
            total: self.total,
        }
    }

    pub fn s(&self, part: &Partition) -> Result<f64> {
        set_function_s(self, part)
    }

    pub fn candidate(&self, part: &Partition) -> Result<Vec<f64>> {
        candidate(self, part)
    }
}

/// Allocation problem with upper bounds only.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperProblem {
    labels: Vec<String>,
    coefficients: Vec<f64>,
    upper: Vec<f64>,
    total: f64,
}

impl UpperProblem {
    pub fn new(coefficients: Vec<f64>, upper: Vec<f64>, total: f64) -> Result<Self> {
        Self::with_labels(
            default_labels(coefficients.len()),
            coefficients,
            upper,
            total,
        )
    }

    pub fn with_labels(
        labels: Vec<String>,
        coefficients: Vec<f64>,
        upper: Vec<f64>,
        total: f64,
    ) -> Result<Self> {
        check_labels(&labels)?;
        check_len("coefficients", labels.len(), coefficients.len())?;
        check_len("upper bounds", labels.len(), upper.len())?;
        check_coefficients(&labels, &coefficients)?;
        for (label, &big_m) in labels.iter().zip(&upper) {
            if !(big_m.is_finite() && big_m > 0.0) {
                return Err(invalid(
                    label,
                    format!("upper bound must be positive, got {big_m}"),
                ));
            }
        }
        let upper_sum: f64 = upper.iter().sum();
        if !(total.is_finite() && total > 0.0 && total <= upper_sum) {
            return Err(AllocError::InfeasibleProblem(format!(
                "total sample size {total} is outside (0, {upper_sum}]"
            )));
        }
        Ok(Self {
            labels,
            coefficients,
            upper,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        find_label(&self.labels, label)
    }

    /// `s(∅, take_max)`: remaining sample per unit of remaining coefficient.
    pub fn s(&self, take_max: &StratumSet) -> Result<f64> {
        let mut numer = self.total;
        let mut denom = 0.0;
        for h in 0..self.len() {
            if take_max.contains(&h) {
                numer -= self.upper[h];
            } else {
                denom += self.coefficients[h];
            }
        }
        if let Some(&bad) = take_max.iter().find(|&&h| h >= self.len()) {
            return Err(AllocError::UnknownStratum(bad));
        }
        if take_max.len() == self.len() {
            return Err(AllocError::PartitionCoversAll);
        }
        Ok(numer / denom)
    }
}

/// Allocation problem with lower bounds only.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerProblem {
    labels: Vec<String>,
    coefficients: Vec<f64>,
    lower: Vec<f64>,
    total: f64,
}

impl LowerProblem {
    pub fn new(coefficients: Vec<f64>, lower: Vec<f64>, total: f64) -> Result<Self> {
        Self::with_labels(
            default_labels(coefficients.len()),
            coefficients,
            lower,
            total,
        )
    }

    pub fn with_labels(
        labels: Vec<String>,
        coefficients: Vec<f64>,
        lower: Vec<f64>,
        total: f64,
    ) -> Result<Self> {
        check_labels(&labels)?;
        check_len("coefficients", labels.len(), coefficients.len())?;
        check_len("lower bounds", labels.len(), lower.len())?;
        check_coefficients(&labels, &coefficients)?;
        for (label, &m) in labels.iter().zip(&lower) {
            if !(m.is_finite() && m > 0.0) {
                return Err(invalid(
                    label,
                    format!("lower bound must be positive, got {m}"),
                ));
            }
        }
        let lower_sum: f64 = lower.iter().sum();
        if !(total.is_finite() && total >= lower_sum) {
            return Err(AllocError::InfeasibleProblem(format!(
                "total sample size {total} is below the lower-bound sum {lower_sum}"
            )));
        }
        Ok(Self {
            labels,
            coefficients,
            lower,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Disjoint take-min and take-max sets. Every other stratum is take-Neyman.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Partition {
    pub take_min: StratumSet,
    pub take_max: StratumSet,
}

impl Partition {
    pub fn new(take_min: StratumSet, take_max: StratumSet) -> Result<Self> {
        if let Some(&h) = take_min.intersection(&take_max).next() {
            return Err(AllocError::OverlappingSets(h));
        }
        Ok(Self { take_min, take_max })
    }

    /// Convenience constructor from index slices.
    pub fn from_indices(take_min: &[usize], take_max: &[usize]) -> Result<Self> {
        Self::new(
            take_min.iter().copied().collect(),
            take_max.iter().copied().collect(),
        )
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Checks disjointness and that every index is below `len`.
    pub fn validate(&self, len: usize) -> Result<()> {
        if let Some(&h) = self.take_min.intersection(&self.take_max).next() {
            return Err(AllocError::OverlappingSets(h));
        }
        if let Some(&h) = self
            .take_min
            .iter()
            .chain(&self.take_max)
            .find(|&&h| h >= len)
        {
            return Err(AllocError::UnknownStratum(h));
        }
        Ok(())
    }

    /// True when every one of `len` strata is at a bound.
    pub fn covers(&self, len: usize) -> bool {
        self.take_min.len() + self.take_max.len() == len
    }

    pub fn neyman(&self, len: usize) -> StratumSet {
        (0..len).filter(|h| self.role(*h) == Role::Neyman).collect()
    }

    pub fn role(&self, h: usize) -> Role {
        if self.take_min.contains(&h) {
            Role::Min
        } else if self.take_max.contains(&h) {
            Role::Max
        } else {
            Role::Neyman
        }
    }
}

/// How a stratum is allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Min,
    Neyman,
    Max,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Min => "min",
            Role::Neyman => "neyman",
            Role::Max => "max",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regular allocations keep at least one stratum strictly inside its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationKind {
    Regular,
    Vertex,
}

impl AllocationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationKind::Regular => "regular",
            AllocationKind::Vertex => "vertex",
        }
    }
}

/// Solver output: sample sizes together with the partition that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x: Vec<f64>,
    pub partition: Partition,
    pub kind: AllocationKind,
    pub objective: f64,
}

impl Allocation {
    /// Wraps a vector and partition, deriving the kind and objective value.
    pub fn new(coefficients: &[f64], x: Vec<f64>, partition: Partition) -> Result<Self> {
        partition.validate(x.len())?;
        let objective = objective(coefficients, &x)?;
        let kind = if partition.covers(x.len()) {
            AllocationKind::Vertex
        } else {
            AllocationKind::Regular
        };
        Ok(Self {
            x,
            partition,
            kind,
            objective,
        })
    }

    /// The candidate vector of `part` as an allocation.
    pub fn from_partition(p: &BoxProblem, part: Partition) -> Result<Self> {
        let x = candidate(p, &part)?;
        Self::new(p.coefficients(), x, part)
    }

    pub fn role(&self, h: usize) -> Role {
        self.partition.role(h)
    }

    /// Counts of take-min, take-Neyman and take-max strata.
    pub fn role_counts(&self) -> (usize, usize, usize) {
        let min = self.partition.take_min.len();
        let max = self.partition.take_max.len();
        (min, self.x.len() - min - max, max)
    }
}

/// One outer iteration of the box-constrained recursion, recorded after the
/// take-min candidates are determined and before they are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub r: usize,
    pub take_min: StratumSet,
    pub take_max: StratumSet,
    /// `s(L_r, U_r)`, absent when the two sets cover every stratum.
    pub s: Option<f64>,
    /// Number of bound scans performed by the inner one-sided solver.
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    /// Number of strata of the traced problem.
    pub strata: usize,
    pub iterations: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn s_sequence(&self) -> Vec<Option<f64>> {
        self.iterations.iter().map(|rec| rec.s).collect()
    }

    pub fn inner_iterations(&self) -> Vec<usize> {
        self.iterations
            .iter()
            .map(|rec| rec.inner_iterations)
            .collect()
    }
}

/// `s(L, U) = (n - sum_L m - sum_U M) / sum_{H \ (L ∪ U)} A`.
///
/// The result may be zero or negative for partitions no optimum would use.
pub fn set_function_s(p: &BoxProblem, part: &Partition) -> Result<f64> {
    part.validate(p.len())?;
    if part.covers(p.len()) {
        return Err(AllocError::PartitionCoversAll);
    }
    let mut numer = p.total;
    let mut denom = 0.0;
    for h in 0..p.len() {
        match part.role(h) {
            Role::Min => numer -= p.lower[h],
            Role::Max => numer -= p.upper[h],
            Role::Neyman => denom += p.coefficients[h],
        }
    }
    Ok(numer / denom)
}

/// Vector taking `m_h` on the take-min set, `M_h` on the take-max set and
/// `A_h * s(L, U)` elsewhere.
pub fn candidate(p: &BoxProblem, part: &Partition) -> Result<Vec<f64>> {
    part.validate(p.len())?;
    let s = if part.covers(p.len()) {
        f64::NAN
    } else {
        set_function_s(p, part)?
    };
    Ok((0..p.len())
        .map(|h| match part.role(h) {
            Role::Min => p.lower[h],
            Role::Max => p.upper[h],
            Role::Neyman => p.coefficients[h] * s,
        })
        .collect())
}

/// `sum_h A_h^2 / x_h`.
pub fn objective(coefficients: &[f64], x: &[f64]) -> Result<f64> {
    check_len("allocation", coefficients.len(), x.len())?;
    let mut total = 0.0;
    for (h, (&a, &xh)) in coefficients.iter().zip(x).enumerate() {
        if xh.is_nan() || xh <= 0.0 {
            return Err(AllocError::NonPositiveAllocation(h));
        }
        total += a * a / xh;
    }
    Ok(total)
}

/// Variance of the stratified estimator of a total, `sum_h A_h^2 / x_h - B`.
pub fn variance_of_estimator(coefficients: &[f64], b: f64, x: &[f64]) -> Result<f64> {
    Ok(objective(coefficients, x)? - b)
}

//! Optimum sample allocation in stratified sampling under lower and upper
//! bounds on the stratum sample sizes.
//!
//! The central problem is
//!
//! ```text
//! minimize   sum_h A_h^2 / x_h
//! subject to sum_h x_h = n,   m_h <= x_h <= M_h
//! ```
//!
//! which is the variance of the stratified estimator up to a constant.
//! [`rnabox`] solves it exactly in a finite number of steps. Also included:
//!
//! * one-sided solvers [`rna`] and [`lrna`], and the mirrored [`rnabox_twin`];
//! * [`naive_rna_box`], which looks plausible and is not optimal in general;
//! * the fixed-point iteration [`fpia_solve`] with its failure modes, and a
//!   bisection reference solver;
//! * [`check_box_optimality`], an exhaustive [`oracle_enumerate`] and a trace
//!   auditor;
//! * sum-preserving rounding and a synthetic population generator.
//!
//! ```
//! use rnabox::{check_box_optimality, rnabox, BoxProblem};
//!
//! let p = BoxProblem::new(vec![3000.0, 1000.0], vec![10.0, 10.0], vec![120.0, 120.0], 160.0).unwrap();
//! let (alloc, _) = rnabox(&p, false);
//! assert_eq!(alloc.x, vec![120.0, 40.0]);
//! assert!(check_box_optimality(&p, &alloc, 1e-9).unwrap().is_optimal);
//! ```

pub mod cli;
pub mod error;
pub mod fpia;
pub mod popgen;
pub mod problem;
pub mod recursive;
pub mod rounding;
pub mod verify;

pub use error::{AllocError, Result};
pub use fpia::{
    bisection_solve, fpia_solve, g_tilde, phi, x_of_lambda, FpiaOutcome, FpiaStatus,
    LambdaPartition,
};
pub use popgen::{
    build_population, geometric_stratify, population_to_problem, stsi_coefficients, BoundPolicy,
    PopulationSpec, SampleSize, StrataPopulation, Stratum,
};
pub use problem::{
    candidate, objective, set_function_s, Allocation, AllocationKind, BoxProblem, LowerProblem,
    Partition, Role, SolveTrace, StratumSet, TraceRecord, UpperProblem,
};
pub use recursive::{
    lrna, naive_rna_box, rna, rna_with_domain, rnabox, rnabox_twin, rnabox_with, LrnaResult,
    NaiveOutcome, RnaResult, RnaboxOptions,
};
pub use rounding::{round_allocation, round_preserve_sum, rounding_penalty, RoundedAllocation};
pub use verify::{
    audit_trace, check_box_optimality, check_upper_optimality, oracle_enumerate, OptimalityCase,
    OptimalityReport, TraceViolation, Violation,
};

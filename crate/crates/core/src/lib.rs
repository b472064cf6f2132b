//! Classical capacity of discrete memoryless classical-quantum channels.
//!
//! A channel maps each input letter `x` to a density matrix `rho_x`. Its
//! capacity is the maximum of the Holevo quantity over input distributions,
//! optionally subject to an expected-cost budget `s^T p <= S`. The crate
//! computes it with a Blahut-Arimoto iteration that certifies a lower and an
//! upper bound at every step.
//!
//! - [`hermitian`]: density matrices, entropies, relative entropy.
//! - [`channel`]: the channel model, Holevo quantity, random channels.
//! - [`channel_file`]: the JSON channel file format.
//! - [`solver`]: the fixed-multiplier iteration and its diagnostics.
//! - [`cost`]: capacity with and without a cost budget.
//! - [`oracle`]: brute-force references for testing.

pub mod channel;
pub mod channel_file;
pub mod cost;
pub mod error;
pub mod hermitian;
pub mod oracle;
pub mod solver;

pub use channel::{
    holevo_quantity, independence_check, output_state, random_channel, random_costs, CqChannel,
    EnsembleKind, IndependenceReport, InputDistribution,
};
pub use cost::{constrained_capacity, unconstrained_capacity, CapacityOptions, CapacityResult};
pub use error::{Error, Result};
pub use hermitian::{ComplexMatrix, DensityMatrix, Tolerances};
pub use solver::{
    rate_diagnostics, solve_fixed_lambda, FixedLambdaResult, IterationTrace, SolverConfig,
    Termination,
};

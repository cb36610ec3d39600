//! Adaptive Douglas–Rachford splitting for two-operator inclusions
//! `0 ∈ Ax + Bx`, with resolvent calculus, sampling certifiers for
//! monotonicity-type properties, weighted product-space projections and
//! residual diagnostics for multi-operator demiclosedness premises.
//!
//! ```
//! use adrkit::{AdrOperator, AdrParams, Flavor, OperatorSpec, ProblemParams, StopRule, Vector};
//!
//! // A = Id, B = Id − 2; the zero of A + B is 1.
//! let a = OperatorSpec::scaled_identity(1.0, Vector::zeros(1))?;
//! let b = OperatorSpec::scaled_identity(1.0, Vector::from_element(1, -2.0))?;
//! let problem = ProblemParams::new(1.0, 1.0, 1.0, 1.0, Flavor::Monotone);
//! let op = AdrOperator::new(AdrParams::new(problem, Some(0.5))?, a, b)?;
//! let trace = op.run(&Vector::zeros(1), StopRule::new(1000, 1e-12))?;
//! assert!((trace.final_shadow[0] - 1.0).abs() < 1e-8);
//! # Ok::<(), adrkit::Error>(())
//! ```

pub mod adr;
pub mod demiclosedness;
pub mod error;
pub mod operators;
pub mod resolvents;
pub mod vecspace;

pub use adr::{
    derive_relaxations, inclusion_residual, kappa_bound, validate, AdrOperator, AdrParams,
    IterationRecord, IterationTrace, ProblemParams, Regime, RunStatus, StopRule, ValidationReport,
};
pub use demiclosedness::{
    balance_averaged, balance_cocoercive, check_averaged_premises, check_cocoercive_premises,
    AveragedVariant, BalanceReport, CocoerciveMode, ConditionDiagnostics, SequenceWindow,
    TrendTolerance,
};
pub use error::{Error, Result};
pub use operators::{
    Certificate, Flavor, ModulusClaim, OperatorKind, OperatorSpec, PointMap, Property,
    SamplingConfig, Verdict,
};
pub use resolvents::ResolventHandle;
pub use vecspace::{ProductVector, ScaledDiagonal, Vector, WeightedSpace};

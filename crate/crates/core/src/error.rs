//! Error type shared by every module.

use num_complex::Complex64;

/// Failures reported by series construction, factor solving, constrained
/// solving and diagnostics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },

    #[error("series has a zero constant term")]
    ZeroConstantTerm,

    #[error("series is not normalized (a_0 = {0})")]
    NotNormalized(Complex64),

    #[error("coefficient a_{order} is not fixed by the equation; supply it as a free parameter")]
    UnderDetermined { order: usize },

    #[error("equation is not solvable order by order at a_{order}")]
    UnsupportedProblem { order: usize },

    #[error("series in x^{power} expected but coefficient a_{index} = {value:e} is not zero")]
    NotInPower { power: u32, index: usize, value: f64 },

    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),

    #[error("factor equations have no solution (residual {residual:e})")]
    NoSolution { residual: f64 },

    #[error("branch cut crossed at x = {x}")]
    BranchCut { x: f64 },

    #[error("conjugate symmetry broken at x = {x} (imaginary residue {residue:e})")]
    ConjugationBroken { x: f64, residue: f64 },

    #[error("exponential factor present; large-variable condition needs power factors only")]
    ExponentialAtInfinity,

    #[error("number of imposed conditions ({conditions}) does not match free parameters ({parameters})")]
    ParameterImbalance { conditions: usize, parameters: usize },

    #[error("no root of the condition residual in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("{roots} root(s) of the condition residual found, none admissible on the domain")]
    NoAdmissibleRoot { roots: usize },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order {order} is not available for {problem} (allowed: {allowed})")]
    UnsupportedOrder { problem: String, order: usize, allowed: String },

    #[error("reference solution unavailable: {0}")]
    Reference(String),
}

pub type Result<T> = std::result::Result<T, Error>;

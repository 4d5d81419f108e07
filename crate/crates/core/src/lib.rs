//! Self-similar factor approximants.
pub mod constraints;
pub mod diagnostics;
pub mod error;
pub mod factor;
mod linalg;
pub mod moments;
pub mod problems;
pub mod rootapprox;
pub mod tables;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/factors.md")]
    mod factors {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/root-approximants.md")]
    mod root_approximants {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
}

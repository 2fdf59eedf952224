//! Compositional distributional entailment.
//!
//! Words get vectors or density matrices built from corpus statistics,
//! phrases get meanings by contracting word tensors along a pregroup
//! reduction, and entailment between phrases is graded by KL divergence or
//! quantum relative entropy.

pub mod composition;
pub mod error;
pub mod harness;
pub mod measures;
pub mod model_build;
pub mod pregroup;
pub mod tensor;

pub use error::{Error, Result};

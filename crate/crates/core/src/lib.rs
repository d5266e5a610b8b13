//! Refinement checking for a bounded subset of Z.
//!
//! Specifications in LaTeX markup are parsed ([`zparse`]), compiled to finite
//! guarded-command models ([`translate`]), combined with a retrieve relation
//! into three check systems ([`refine`]) and model checked ([`mc`]). The
//! [`emit`] module prints any model in SAL syntax.

pub mod cli;
pub mod emit;
pub mod error;
pub mod ir;
pub mod mc;
pub mod refine;
pub mod toolkit;
pub mod translate;
pub mod zparse;

pub use error::{Error, Result};

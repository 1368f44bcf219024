//! Chow rings of moduli spaces of genus-zero prestable curves.
//!
//! The crate enumerates prestable graphs and decorated strata, generates
//! the relations among them, and computes ranks of the graded pieces with
//! exact sparse linear algebra over the rationals.

pub mod cache;
pub mod engine;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod rational;
pub mod relations;
pub mod series;
pub mod strata;

pub use error::{Error, Result};

//! Theoretical PAC lower-bound loss distributions, toy ERM learners, and the
//! experiments that compare the two.
//!
//! - [`theory`]: bound CDFs, densities, atoms, sample complexities, `Q_m`.
//! - [`learners`]: boolean conjunctions and thresholds on `[0, 1]`.
//! - [`empirics`]: seeded trial batches and histograms (`P_m`).
//! - [`analysis`]: KL divergence, moments, monotonicity, learning curves.
//! - [`cli`]: orchestration and CSV / manifest output.

pub mod analysis;
pub mod cli;
pub mod empirics;
pub mod error;
pub mod learners;
pub mod theory;

pub use error::{Error, Result};

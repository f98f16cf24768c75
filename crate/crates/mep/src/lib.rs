//! Main effect plans for asymmetrical factorial experiments: construction
//! of inter-class orthogonal plans by factor replacement and block
//! juxtaposition, exact verification of (partial) orthogonality, an embedded
//! catalog of small plans, and reduced-normal-equation ANOVA for data from
//! any connected plan, orthogonal or not.
//!
//! The universal object is the [`plan::MainEffectPlan`]: an `m x n` array
//! whose rows are factors and columns are runs. Everything in [`ortho`]
//! decides orthogonality questions in exact integer arithmetic; the
//! [`analysis`] module carries the floating-point linear-model machinery.
//!
//! ```
//! use mep::{analysis, catalog, ortho};
//!
//! let plan = &catalog::get("A_8(1)")?.plan;
//! let graph = ortho::orthogonality_graph(plan)?;
//! assert_eq!(graph.max_class_size, 2);
//!
//! let y = vec![9.7, 11.2, 10.1, 13.4, 10.8, 12.0, 9.9, 12.6];
//! let table = analysis::anova(plan, &y)?;
//! assert!(table.saturated);
//! # Ok::<(), mep::Error>(())
//! ```

// index-based loops are the clearer idiom for the matrix code in here
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod catalog;
pub mod construct;
pub mod error;
pub mod oa;
pub mod ortho;
pub mod plan;

pub use error::{Error, Result};
pub use plan::{ClassPartition, Factor, IncidenceSummary, MainEffectPlan};

//! Yang–Baxter equation checks and Baxterization of braid group
//! representations, in vertex-model conventions.
//!
//! Everything is complex double precision. Identities are checked by
//! residuals under the relative max-entry norm of [`linalg::residual`],
//! sampled on a [`SampleGrid`] of spectral parameters.

pub mod algebra;
pub mod baxterize;
pub mod error;
pub mod exprfn;
pub mod linalg;
pub mod properties;
pub mod report;
pub mod rmatrix;
pub mod transfer;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use report::{CheckReport, ClashPolicy, SampleGrid, DEFAULT_TOL};
pub use rmatrix::{OperatorForm, ScalarFn, SpectralOperator, VertexWeights};

//! Numerical laboratory for conformally flat metrics and hypersurface
//! immersions: curvature tensors and the Pfaffian contraction, Q-curvature
//! and the Paneitz operator in dimension four, log-kernel normal metrics,
//! deterministic singular-kernel quadrature, and the quantization checks
//! that tie them together.

pub mod constants;
pub mod curvature;
pub mod error;
pub mod field;
pub mod hypersurface;
pub mod jet;
mod linalg;
pub mod normal;
pub mod parallel;
pub mod quadrature;
pub mod quantization;
pub mod tensor;

pub use error::{QflatError, Result};
pub use field::{ConformalMetric, MultiIndex, Provenance, ScalarField};
pub use quadrature::{Estimate, QuadratureSpec, Region};
pub use tensor::{Riemann4, SymTensor2};

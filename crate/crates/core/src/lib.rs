//! Naturally reductive structures on Lie groups and homogeneous spaces:
//! characteristic torsion, curvature, holonomy and spinor checks.

pub mod clifford;
pub mod error;
pub mod forms;
pub mod lie;
pub mod linalg;
pub mod pipeline;
pub mod presets;
pub mod product;
pub mod report;
pub mod spinor;
pub mod tangent;
pub mod tensor;
pub mod tol;
pub mod ts7;

pub use error::{Error, Result};
pub use forms::{KForm, SkewEndomorphism};
pub use lie::StructureTable;
pub use tol::Tolerance;

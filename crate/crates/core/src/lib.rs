//! Quasi-geostrophic flow in the half space `𝕋² × ℝ⁺`, truncated at `Z_max`.
//!
//! Pseudo-spectral in the horizontal, second-order finite volumes in the
//! vertical. The evolved unknown is the weighted gradient `G = ∇_λ Ψ` of the
//! stream function.

pub mod calculus;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod grid;
pub mod hodge;
mod par;
pub mod random;
pub mod snapshot;
pub mod sqg;

pub use error::{QgError, Result};
pub use field::{ScalarField3D, SurfaceField2D, VectorField3D};
pub use grid::{Grid, C64};

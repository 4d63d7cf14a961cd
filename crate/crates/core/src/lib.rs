//! Numerical toolkit for the linear and Monge–Ampère analysis on model
//! ALG ends ℂ × Tᵈ: spectral Poisson solvers with an asymptotic decay
//! taxonomy, screened kernels and product Green's functions, weighted
//! Sobolev checks, a non-product Kähler background builder, and a damped
//! Newton Monge–Ampère solver with a holomorphic-splitting verification.

pub mod decay;
pub mod error;
pub mod field;
pub mod forms;
pub mod geometry;
pub mod grid;
pub mod heat;
pub mod io;
pub mod ma;
pub mod operators;
pub mod plane;
pub mod product;
pub mod screened;
pub mod sobolev;
pub mod special;
pub mod split;

pub use decay::{decay_fit, DecayClass, DecayReport};
pub use error::{CoreError, Result};
pub use field::{to_grid, to_spectral, GridField, ModeProfile, SpectralField};
pub use grid::{CutoffProfile, FiberLattice, RadialGrid};

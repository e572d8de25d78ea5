//! Matrix-valued Rieffel deformations on grids.
//!
//! The coefficient algebra is `M_k(C)`. Symbols come in two backends: exact
//! finite plane-wave sums and periodic grid samples. On top of them sit the
//! deformed product, Kohn–Nirenberg operators on a grid model of the Hilbert
//! module `E_n`, and the Heisenberg smoothness machinery (generators,
//! differential norms, the symbol map `S`).

pub mod coeff_algebra;
pub mod deformation;
pub mod error;
pub mod heisenberg;
pub mod pseudodiff;
pub mod quad;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

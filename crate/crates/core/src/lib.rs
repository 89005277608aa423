//! Commuting families of Gaudin Hamiltonians on tensor products of
//! Lie-algebra representations, their joint spectra, the associated
//! second-order differential operators for sl2, degenerations indexed by
//! trees of point collisions, and eigenline tracking over families of
//! marked points.

pub mod covering;
pub mod error;
pub mod gaudin;
pub mod lie;
pub mod limits;
pub mod linalg_exact;
pub mod matrix;
pub mod oper;
pub mod parallel;
pub mod scalar;
pub mod spectral;

pub use error::{GaudinError, Result};
pub use matrix::SparseMat;
pub use parallel::Strategy;
pub use scalar::{Gaussian, Rat, C64};

//! Liouvillian spectra of `L` collective `N`-level atoms with collective decay and dephasing.
//!
//! Three routes to the same eigenvalues: exact diagonalization in weak-symmetry sectors
//! ([`ed`]), the trigonometric su(N) Richardson-Gaudin equations ([`rg`], [`bethe`]) and the
//! Schwinger-boson mean field of the thermodynamic limit ([`meanfield`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

pub mod bethe;
pub mod ed;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod rg;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{enumerate_basis, enumerate_sectors, LiouvParams, MemoryBudget, SectorBasis, SectorLabel};
pub use scalar::{Cplx, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type Params = model::LiouvParams<f64>;
pub type Sector = ed::SectorMatrix<f64>;
pub type Spectrum = ed::SpectrumResult<f64>;
pub type Solution = rg::SpectralSolution<f64>;
pub type Bethe = bethe::BetheVector<f64>;
pub type Prediction = meanfield::TLPrediction<f64>;

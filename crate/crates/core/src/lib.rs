//! Reconstruction of the convolution kernel `M` of the operator
//! `-y'' + (M * y')(x)` on `(0, pi)` with Dirichlet boundary conditions,
//! from its eigenvalue sequence.
//!
//! The library covers both directions of the problem:
//!
//! * inverse: spectrum -> sine-series trace `w` -> nonlinear Volterra
//!   equation for the auxiliary kernel `N` -> kernel `M`,
//! * forward: kernel `M` -> characteristic function via a Cauchy solve ->
//!   eigenvalues by Newton search in the `rho = sqrt(lambda)` plane,
//!
//! plus a stability laboratory that measures how spectral perturbations
//! propagate through the reconstruction.
//!
//! All numerics are generic over the real scalar type (`f32`/`f64`) through
//! [`scalar::Scalar`]; samples are complex. Concrete aliases for the common
//! instantiations live at the crate root.

pub mod charfn;
pub mod config;
pub mod error;
pub mod grid;
pub mod main_eq;
pub mod oracle;
pub mod pipeline;
pub mod recovery;
pub mod rootfind;
pub mod scalar;
pub mod spectra;
pub mod stability;

pub use charfn::CharProduct;
pub use config::SolverConfig;
pub use error::Error;
pub use grid::GridFunction;
pub use main_eq::MainEqConfig;
pub use pipeline::Reconstruction;
pub use scalar::Scalar;
pub use spectra::Spectrum;
pub use stability::StabilityReport;

/// `f64` instantiations, the default working precision.
pub type GridFunction64 = grid::GridFunction<f64>;
pub type Spectrum64 = spectra::Spectrum<f64>;
pub type CharProduct64 = charfn::CharProduct<f64>;
pub type SolverConfig64 = config::SolverConfig<f64>;
pub type StabilityReport64 = stability::StabilityReport<f64>;
pub type Reconstruction64 = pipeline::Reconstruction<f64>;

/// `f32` instantiations; useful for quick low-precision sweeps.
pub type GridFunction32 = grid::GridFunction<f32>;
pub type Spectrum32 = spectra::Spectrum<f32>;
pub type CharProduct32 = charfn::CharProduct<f32>;
pub type SolverConfig32 = config::SolverConfig<f32>;

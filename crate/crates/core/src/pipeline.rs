//! Full inverse pass: spectrum to kernel.
//!
//! Stage order is fixed: sine-series trace `w` from the eigenvalue product,
//! nonlinear Volterra solve for the auxiliary kernel `N`, then the closed
//! recovery map to `M`. Failures carry the stage that produced them.

use crate::charfn::CharProduct;
use crate::config::SolverConfig;
use crate::error::{Error, Stage};
use crate::grid::GridFunction;
use crate::recovery::n_to_m;
use crate::scalar::Scalar;
use crate::spectra::Spectrum;

/// Everything a reconstruction run produces, intermediates included.
#[derive(Debug, Clone)]
pub struct Reconstruction<T: Scalar> {
    /// Sine-series trace of the characteristic function.
    pub w: GridFunction<T>,
    /// Auxiliary kernel from the nonlinear solve.
    pub n_fn: GridFunction<T>,
    /// Recovered operator kernel.
    pub m: GridFunction<T>,
    pub iterations: usize,
    pub final_step: T,
    pub residual_l2: T,
    /// Whether the solve needed the damped fallback.
    pub damped: bool,
}

/// Runs the three reconstruction stages on one spectrum.
pub fn reconstruct_kernel<T: Scalar>(
    s: &Spectrum<T>,
    cfg: &SolverConfig<T>,
) -> Result<Reconstruction<T>, Error> {
    s.validate()?;
    cfg.validate()?;
    let product = CharProduct::new(s.clone());
    // Head modes carry all nonzero coefficients, so this truncation is exact.
    let series = product
        .build_w(cfg.grid_points, s.head_len())
        .map_err(|e| e.at_stage(Stage::BuildW))?;
    let sol = crate::main_eq::solve_main_equation(&series.w, &cfg.main_eq())
        .map_err(|e| e.at_stage(Stage::MainEquation))?;
    let m = n_to_m(&sol.n_fn).map_err(|e| e.at_stage(Stage::Recovery))?;
    Ok(Reconstruction {
        w: series.w,
        n_fn: sol.n_fn,
        m,
        iterations: sol.iterations,
        final_step: sol.final_step,
        residual_l2: sol.residual_l2,
        damped: sol.damped,
    })
}

//! Final assembly step between the auxiliary kernel `N` and the operator
//! kernel `M`:
//!
//! `M(x) = 2 N(x) - int_0^x N^{*2}(t) dt`.
//!
//! The forward map is explicit; the reverse map solves the same relation
//! for `N` by fixed point, `N <- (M + int_0^x N^{*2}) / 2`, starting from
//! `N = M / 2`.

use num_complex::Complex;

use crate::error::Error;
use crate::grid::GridFunction;
use crate::scalar::{lit, Scalar};

/// `M` from `N`.
pub fn n_to_m<T: Scalar>(n_fn: &GridFunction<T>) -> Result<GridFunction<T>, Error> {
    let sq = n_fn.conv_power(2)?.cumulative_integral();
    n_fn.scale(Complex::new(lit::<T>(2.0), T::zero())).sub(&sq)
}

#[derive(Debug, Clone)]
pub struct AuxKernel<T: Scalar> {
    pub n_fn: GridFunction<T>,
    pub iterations: usize,
    pub final_step: T,
}

/// `N` from `M`; converges when the weighted L2 step drops below `tol`.
pub fn m_to_n<T: Scalar>(
    m: &GridFunction<T>,
    tol: T,
    max_iter: usize,
) -> Result<AuxKernel<T>, Error> {
    let half = Complex::new(lit::<T>(0.5), T::zero());
    let mut n_fn = m.scale(half);
    let mut history: Vec<f64> = Vec::new();
    for iter in 1..=max_iter {
        let sq = n_fn.conv_power(2)?.cumulative_integral();
        let next = m.add(&sq)?.scale(half);
        let step = next.sub(&n_fn)?.norm_weighted_l2();
        n_fn = next;
        history.push(step.to_f64().unwrap_or(f64::NAN));
        if history.len() > 16 {
            history.remove(0);
        }
        if !step.is_finite() {
            return Err(Error::Diverged {
                iterations: iter,
                history,
            });
        }
        if step < tol {
            return Ok(AuxKernel {
                n_fn,
                iterations: iter,
                final_step: step,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        history,
    })
}

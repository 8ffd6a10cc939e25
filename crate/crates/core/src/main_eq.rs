//! The nonlinear equation connecting the trace `w` to the auxiliary kernel
//! `N`:
//!
//! `w(pi - x) = sum_{nu >= 1} ((pi - x)^nu / nu!) N^{*nu}(x)`.
//!
//! The forward direction evaluates the series; the inverse direction solves
//! for `N` by fixed point in the substituted unknown `h(x) = (pi - x) N(x)`
//! (the `nu = 1` term), which stays bounded even where `N` grows like
//! `1/(pi - x)`:
//!
//! `h = w(pi - .) - sum_{nu >= 2} ((pi - x)^nu / nu!) N^{*nu}`.

use num_complex::Complex;

use crate::error::Error;
use crate::grid::GridFunction;
use crate::scalar::{lit, num, Scalar};

#[derive(Debug, Clone)]
pub struct MainEqConfig<T: Scalar> {
    /// Hard cap on the series order.
    pub nu_max: usize,
    /// Fixed-point convergence threshold on `||h_next - h||_2`; the series
    /// is truncated two decades below it.
    pub fp_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for MainEqConfig<T> {
    fn default() -> Self {
        MainEqConfig {
            nu_max: 30,
            fp_tol: lit(1e-10),
            max_iter: 200,
        }
    }
}

/// Converged solve outcome.
#[derive(Debug, Clone)]
pub struct MainEqSolution<T: Scalar> {
    pub n_fn: GridFunction<T>,
    pub iterations: usize,
    /// Last fixed-point step norm.
    pub final_step: T,
    /// `|| forward_series(N) - w ||_2` of the returned solution.
    pub residual_l2: T,
    /// Whether the damped fallback was engaged.
    pub damped: bool,
}

/// Sums `sum_{nu >= start_nu} ((pi - x)^nu / nu!) N^{*nu}(x)` (unreflected).
///
/// Convolution powers are built incrementally; the series stops once a
/// term's weighted L2 norm falls below `fp_tol / 100`, and errors out if
/// the terms are not decreasing by `nu_max`.
fn weighted_series<T: Scalar>(
    n_fn: &GridFunction<T>,
    start_nu: usize,
    cfg: &MainEqConfig<T>,
) -> Result<GridFunction<T>, Error> {
    debug_assert!(start_nu >= 1);
    let n = n_fn.len();
    let threshold = cfg.fp_tol * lit::<T>(1e-2);

    let mut sum = GridFunction::zeros(n)?;
    // (pi - x)^nu / nu! per node, updated multiplicatively.
    let mut poly: Vec<T> = vec![T::one(); n];
    let mut power = GridFunction::constant(n, Complex::new(T::one(), T::zero()))?;
    let mut last_norm = T::infinity();

    let mut nu = 0usize;
    loop {
        nu += 1;
        if nu > cfg.nu_max {
            return Err(Error::TruncationFailure {
                last_term_norm: last_norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        // power: N^{*nu}, poly: (pi - x)^nu / nu!
        power = if nu == 1 {
            n_fn.clone()
        } else {
            n_fn.convolve(&power)?
        };
        for (i, p) in poly.iter_mut().enumerate() {
            *p = *p * (T::PI() - sum.x(i)) / num::<T>(nu);
        }
        if nu < start_nu {
            continue;
        }
        let mut term_norm_sq = T::zero();
        {
            let h = sum.step();
            let half = lit::<T>(0.5);
            let values = sum.values_mut();
            for i in 0..n {
                let term = power.values()[i] * Complex::new(poly[i], T::zero());
                values[i] = values[i] + term;
                let weight = T::PI() - power.x(i);
                let wq = if i == 0 || i == n - 1 { half } else { T::one() };
                term_norm_sq = term_norm_sq + wq * weight * weight * term.norm_sqr();
            }
            term_norm_sq = term_norm_sq * h;
        }
        let term_norm = term_norm_sq.sqrt();
        if !term_norm.is_finite() {
            return Err(Error::Diverged {
                iterations: nu,
                history: vec![term_norm.to_f64().unwrap_or(f64::NAN)],
            });
        }
        if term_norm < threshold {
            return Ok(sum);
        }
        last_norm = term_norm;
    }
}

/// Evaluates the series and reports it as the trace:
/// the returned grid function is `w`, where `w(pi - x) = series(x)`.
pub fn forward_series<T: Scalar>(
    n_fn: &GridFunction<T>,
    cfg: &MainEqConfig<T>,
) -> Result<GridFunction<T>, Error> {
    Ok(weighted_series(n_fn, 1, cfg)?.reflect())
}

/// Recovers `N` on the grid from the trace `w` by fixed-point iteration in
/// `h = (pi - x) N`.
///
/// Starts undamped from `h0 = w(pi - .)`; if the step norms grow five times
/// in a row, restarts the update with relaxation factor 1/2. A second
/// divergence aborts.
pub fn solve_main_equation<T: Scalar>(
    w: &GridFunction<T>,
    cfg: &MainEqConfig<T>,
) -> Result<MainEqSolution<T>, Error> {
    let n = w.len();
    if n < 8 {
        return Err(Error::GridTooSmall { needed: 8, got: n });
    }
    let w_reflected = w.reflect();
    let mut h = w_reflected.clone();
    let mut damped = false;
    let mut growths = 0usize;
    let mut prev_step = T::infinity();
    let mut history: Vec<f64> = Vec::new();
    let half = Complex::new(lit::<T>(0.5), T::zero());

    for iter in 1..=cfg.max_iter {
        let n_fn = n_from_h(&h);
        // A transient iterate can overshoot hard enough that the series
        // stops decreasing; treat that like divergence once.
        let tail = match weighted_series(&n_fn, 2, cfg) {
            Ok(t) => t,
            Err(e @ (Error::TruncationFailure { .. } | Error::Diverged { .. })) => {
                if damped {
                    return Err(e);
                }
                damped = true;
                growths = 0;
                h = w_reflected.clone();
                prev_step = T::infinity();
                continue;
            }
            Err(e) => return Err(e),
        };
        // Undamped: h <- w~ - tail; damped: average with the current h.
        let mut target = w_reflected.sub(&tail)?;
        if damped {
            target = target.add(&h)?.scale(half);
        }
        let step = target.sub(&h)?.norm_l2();
        h = target;
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
        if step < cfg.fp_tol {
            let n_fn = n_from_h(&h);
            let reproduced = forward_series(&n_fn, cfg)?;
            let residual = reproduced.sub(w)?.norm_l2();
            return Ok(MainEqSolution {
                n_fn,
                iterations: iter,
                final_step: step,
                residual_l2: residual,
                damped,
            });
        }

        if step > prev_step {
            growths += 1;
            if growths >= 5 {
                if damped {
                    return Err(Error::Diverged {
                        iterations: iter,
                        history,
                    });
                }
                damped = true;
                growths = 0;
            }
        } else {
            growths = 0;
        }
        prev_step = step;
    }

    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        history,
    })
}

/// `N = h / (pi - x)`, with the endpoint value (weight zero there) set by
/// one-sided quadratic extrapolation so downstream convolutions stay finite.
fn n_from_h<T: Scalar>(h: &GridFunction<T>) -> GridFunction<T> {
    let n = h.len();
    let mut values: Vec<Complex<T>> = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let weight = T::PI() - h.x(i);
        values.push(h.values()[i] / Complex::new(weight, T::zero()));
    }
    let three = Complex::new(lit::<T>(3.0), T::zero());
    let tail = values[n - 2] * three - values[n - 3] * three + values[n - 4];
    values.push(tail);
    GridFunction::new(values).expect("same grid size")
}

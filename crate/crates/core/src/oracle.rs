//! Direct solver for the operator's Cauchy problem, used as an independent
//! reference against the product representation of the characteristic
//! function.
//!
//! The stepped equation is `y'' = -lambda y + g(x)` with the memory term
//! `g(x) = int_0^x M(x - t) y'(t) dt`. Each step applies the exact
//! variation-of-constants propagator of the free oscillator,
//!
//! `y_{i+1} = cos(rho h) y_i + h sinc(rho h) (z_i + (h/2) g_i)`
//! `z_{i+1} = -lambda h sinc(rho h) y_i + cos(rho h) z_i
//!            + (h/2)(cos(rho h) g_i + g_{i+1})`,
//!
//! with `rho = sqrt(lambda)` and the inhomogeneity handled by trapezoid on
//! the step. The memory integral is a trapezoid over the stored derivative
//! history; since `g_{i+1}` contains `z_{i+1}`, the update is solved
//! implicitly (one scalar division per step). For `M = 0` the scheme is
//! exact up to rounding, and the memory quadrature contributes `O(h^2)`.

use num_complex::Complex;

use crate::error::Error;
use crate::grid::GridFunction;
use crate::rootfind::{find_spectrum_roots, NewtonOptions, SpectrumSearch};
use crate::scalar::{lit, sinc, Scalar};

/// Solution of the Cauchy problem `y(0) = 0`, `y'(0) = 1` on the kernel's
/// grid, together with its derivative trace.
#[derive(Debug, Clone)]
pub struct CauchySolution<T: Scalar> {
    pub y: GridFunction<T>,
    pub z: GridFunction<T>,
}

fn validate_kernel<T: Scalar>(m: &GridFunction<T>) -> Result<(), Error> {
    for v in m.values() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Validation(
                "kernel samples must be finite".to_string(),
            ));
        }
    }
    Ok(())
}

/// Propagates both traces; the final node of `y` is the characteristic
/// function value.
fn propagate<T: Scalar>(
    m: &[Complex<T>],
    h: T,
    lambda: Complex<T>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let n = m.len();
    let one = Complex::new(T::one(), T::zero());
    let half = lit::<T>(0.5);
    let rho = lambda.sqrt();
    let rho_h = rho.scale(h);
    let c = rho_h.cos();
    let s_over = sinc(rho_h).scale(h);
    let m0 = m[0];
    // 1 - (h/2)^2 M(0), from the implicit derivative endpoint.
    let denom = one - m0.scale(h * h * half * half);

    let mut y = vec![Complex::new(T::zero(), T::zero()); n];
    let mut z = vec![Complex::new(T::zero(), T::zero()); n];
    z[0] = one;
    let mut g = Complex::new(T::zero(), T::zero());

    for i in 0..n - 1 {
        // Known part of the next memory integral: trapezoid over z[0..=i].
        let mut acc = m[i + 1] * z[0].scale(half);
        for j in 1..=i {
            acc = acc + m[i + 1 - j] * z[j];
        }
        let i_part = acc.scale(h);

        let a = -(lambda * s_over * y[i]) + c * z[i] + c * g.scale(h * half);
        let z_next = (a + i_part.scale(h * half)) / denom;
        let g_next = i_part + m0 * z_next.scale(h * half);

        y[i + 1] = c * y[i] + s_over * (z[i] + g.scale(h * half));
        z[i + 1] = z_next;
        g = g_next;
    }
    (y, z)
}

/// Solves the Cauchy problem on the grid carrying `m`.
pub fn solve_cauchy<T: Scalar>(
    m: &GridFunction<T>,
    lambda: Complex<T>,
) -> Result<CauchySolution<T>, Error> {
    validate_kernel(m)?;
    let (y, z) = propagate(m.values(), m.step(), lambda);
    Ok(CauchySolution {
        y: GridFunction::new(y)?,
        z: GridFunction::new(z)?,
    })
}

/// Characteristic function by direct integration: the boundary trace `y(pi)`
/// of the normalized solution.
pub fn oracle_delta<T: Scalar>(
    m: &GridFunction<T>,
    lambda: Complex<T>,
) -> Result<Complex<T>, Error> {
    validate_kernel(m)?;
    let (y, _) = propagate(m.values(), m.step(), lambda);
    Ok(*y.last().expect("grid has at least two nodes"))
}

/// Eigenvalues of the operator with kernel `m`, one per mode disc, found by
/// Newton iteration on the integrated characteristic function.
pub fn oracle_spectrum<T: Scalar>(
    m: &GridFunction<T>,
    k_max: usize,
    opts: &NewtonOptions<T>,
) -> Result<SpectrumSearch<T>, Error> {
    validate_kernel(m)?;
    let h = m.step();
    let values = m.values().to_vec();
    Ok(find_spectrum_roots(
        |rho| {
            let (y, _) = propagate(&values, h, rho * rho);
            *y.last().expect("grid has at least two nodes")
        },
        k_max,
        opts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type G = GridFunction<f64>;
    const PI: f64 = std::f64::consts::PI;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn free_equation_is_exact() {
        let m = G::zeros(513).unwrap();
        let sol = solve_cauchy(&m, re(4.0)).unwrap();
        for (i, v) in sol.y.values().iter().enumerate() {
            let x = sol.y.x(i);
            assert!((v - re((2.0 * x).sin() / 2.0)).norm() < 1e-12);
        }
        for (i, v) in sol.z.values().iter().enumerate() {
            let x = sol.z.x(i);
            assert!((v - re((2.0 * x).cos())).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_zero_gives_linear_solution() {
        let m = G::zeros(257).unwrap();
        let sol = solve_cauchy(&m, re(0.0)).unwrap();
        for (i, v) in sol.y.values().iter().enumerate() {
            assert!((v - re(sol.y.x(i))).norm() < 1e-13);
        }
    }

    #[test]
    fn free_boundary_trace_matches_closed_form() {
        let m = G::zeros(257).unwrap();
        assert!((oracle_delta(&m, re(0.25)).unwrap() - re(2.0)).norm() < 1e-12);
        assert!((oracle_delta(&m, re(0.0)).unwrap() - re(PI)).norm() < 1e-12);
        // Complex argument goes through the same path.
        let lambda = Complex64::new(2.0, 3.0);
        let rho = lambda.sqrt();
        let exact = (rho * PI).sin() / rho;
        assert!((oracle_delta(&m, lambda).unwrap() - exact).norm() < 1e-11);
    }

    #[test]
    fn free_eigenvalues_are_squares() {
        let m = G::zeros(513).unwrap();
        let search = oracle_spectrum(&m, 6, &NewtonOptions::default()).unwrap();
        assert!(search.failed_indices().is_empty());
        assert!(search.collisions.is_empty());
        for out in &search.outcomes {
            let k2 = (out.k * out.k) as f64;
            assert!(
                (out.lambda - re(k2)).norm() < 1e-10,
                "mode {} lambda {}",
                out.k,
                out.lambda
            );
        }
    }

    #[test]
    fn memory_term_converges_at_second_order() {
        let delta_at = |n: usize| {
            let m = G::from_fn(n, |x| re(0.3 + 0.1 * x)).unwrap();
            oracle_delta(&m, re(2.0)).unwrap()
        };
        let d1 = delta_at(129);
        let d2 = delta_at(257);
        let d3 = delta_at(513);
        let ratio = (d1 - d2).norm() / (d2 - d3).norm();
        assert!(
            ratio > 2.5 && ratio < 6.5,
            "refinement ratio {} not second order",
            ratio
        );
    }

    #[test]
    fn kernel_shifts_the_spectrum() {
        // A nonzero kernel must move some eigenvalue visibly.
        let m = G::from_fn(513, |x| re(0.4 * (1.0 - x / PI))).unwrap();
        let search = oracle_spectrum(&m, 4, &NewtonOptions::default()).unwrap();
        assert!(search.failed_indices().is_empty());
        let moved = search
            .outcomes
            .iter()
            .any(|o| (o.lambda - re((o.k * o.k) as f64)).norm() > 1e-4);
        assert!(moved);
    }

    #[test]
    fn non_finite_kernel_is_rejected() {
        let mut m = G::zeros(65).unwrap();
        m.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            oracle_delta(&m, re(1.0)),
            Err(Error::Validation(_))
        ));
    }
}

//! Characteristic function of a spectrum and the sine-series trace `w`.
//!
//! The entire function with zeros exactly at the eigenvalues is
//! `Delta(lambda) = pi prod_k (lambda_k - lambda) / k^2`. Under the tail
//! rule the infinite product collapses against `sin(rho pi)/(rho pi) =
//! prod_k (k^2 - lambda)/k^2` (`rho^2 = lambda`), leaving the closed form
//!
//! `Delta(lambda) = sin(rho pi)/rho * prod_{k <= K} (lambda_k - lambda)/(k^2 - lambda)`
//!
//! with only the head in the product. Near `lambda = j^2` (`j <= K`) the
//! vanishing pair `sin(rho pi) / (j^2 - lambda)` is replaced by its exact
//! analytic continuation, so the singular factor never divides by zero.

use num_complex::Complex;

use crate::error::Error;
use crate::grid::GridFunction;
use crate::scalar::{lit, num, sinc, Scalar};
use crate::spectra::Spectrum;

/// Eigenvalue product form of the characteristic function.
#[derive(Debug, Clone)]
pub struct CharProduct<T: Scalar> {
    spectrum: Spectrum<T>,
}

/// `build_w` output; `dropped_modes > 0` means the requested series length
/// cut off head modes whose coefficients need not vanish.
#[derive(Debug, Clone)]
pub struct WSeries<T: Scalar> {
    pub w: GridFunction<T>,
    pub dropped_modes: usize,
}

/// Switch radius in `lambda` around each `j^2`; discs for distinct `j`
/// never overlap since adjacent squares differ by at least 3. Both branches
/// are the same analytic function, so they agree at the boundary to
/// rounding accuracy.
const LIMIT_RADIUS: f64 = 0.5;

impl<T: Scalar> CharProduct<T> {
    pub fn new(spectrum: Spectrum<T>) -> Self {
        CharProduct { spectrum }
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    /// Evaluates `Delta(lambda)` anywhere in the complex plane.
    pub fn eval(&self, lambda: Complex<T>) -> Complex<T> {
        let k_head = self.spectrum.head_len();
        let rho = lambda.sqrt();

        // Head factor index whose denominator could vanish, if any.
        let mut singular: Option<usize> = None;
        for j in 1..=k_head {
            let jj = num::<T>(j * j);
            if (lambda - Complex::new(jj, T::zero())).norm() < lit::<T>(LIMIT_RADIUS) {
                singular = Some(j);
                break;
            }
        }

        let mut prod = Complex::new(T::one(), T::zero());
        for k in 1..=k_head {
            if Some(k) == singular {
                continue;
            }
            let kk = Complex::new(num::<T>(k * k), T::zero());
            prod = prod * (self.spectrum.eigenvalue(k) - lambda) / (kk - lambda);
        }

        match singular {
            None => sin_rho_pi_over_rho(lambda, rho) * prod,
            Some(j) => {
                // sin(rho pi) = (-1)^j sin((rho - j) pi) turns the vanishing
                // pair into (-1)^{j+1} pi sinc((rho-j) pi) / (rho (rho + j)).
                let jt = Complex::new(num::<T>(j), T::zero());
                let z = (rho - jt) * Complex::new(T::PI(), T::zero());
                let sign = if j % 2 == 0 { -T::one() } else { T::one() };
                let limit_factor =
                    sinc(z) * Complex::new(sign * T::PI(), T::zero()) / (rho * (rho + jt));
                limit_factor * (self.spectrum.eigenvalue(j) - lambda) * prod
            }
        }
    }

    /// Sine-series coefficients `c_k = (2/pi) k Delta(k^2)`, `k = 1..=k_terms`.
    ///
    /// Past the head `lambda_k = k^2` exactly, so `Delta(k^2) = 0` with no
    /// rounding residue to propagate.
    pub fn sine_coefficients(&self, k_terms: usize) -> Vec<Complex<T>> {
        (1..=k_terms)
            .map(|k| {
                if k > self.spectrum.head_len() {
                    return Complex::new(T::zero(), T::zero());
                }
                let kk = Complex::new(num::<T>(k * k), T::zero());
                self.eval(kk) * Complex::new(num::<T>(k) * lit::<T>(2.0) / T::PI(), T::zero())
            })
            .collect()
    }

    /// Assembles `w(x) = (2/pi) sum_k k Delta(k^2) sin(k x)` on the grid.
    ///
    /// Coefficients vanish for `k` past the head, so `k_terms >=
    /// head_len()` captures the series exactly; a shorter request returns
    /// the truncated sum with the number of dropped head modes flagged.
    pub fn build_w(&self, n_points: usize, k_terms: usize) -> Result<WSeries<T>, Error> {
        let coeffs = self.sine_coefficients(k_terms);
        let w = GridFunction::from_fn(n_points, |x| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, c) in coeffs.iter().enumerate() {
                let k = num::<T>(i + 1);
                acc = acc + c * Complex::new((k * x).sin(), T::zero());
            }
            acc
        })?;
        let dropped_modes = self.spectrum.head_len().saturating_sub(k_terms);
        Ok(WSeries { w, dropped_modes })
    }
}

/// `sin(rho pi) / rho` continued through `rho = 0`
/// (`= pi sinc(rho pi)`, an entire function of `lambda`).
fn sin_rho_pi_over_rho<T: Scalar>(_lambda: Complex<T>, rho: Complex<T>) -> Complex<T> {
    sinc(rho * Complex::new(T::PI(), T::zero())) * Complex::new(T::PI(), T::zero())
}

/// Integral form of the characteristic function from a trace `w`:
/// `Delta(lambda) = sin(rho pi)/rho + int_0^pi w(x) sin(rho x)/rho dx`
/// with the integral by trapezoid.
pub fn delta_from_w<T: Scalar>(w: &GridFunction<T>, lambda: Complex<T>) -> Complex<T> {
    let rho = lambda.sqrt();
    let pi_c = Complex::new(T::PI(), T::zero());
    let mut acc = Complex::new(T::zero(), T::zero());
    let n = w.len();
    let h = w.step();
    let half = lit::<T>(0.5);
    for i in 0..n {
        let x = Complex::new(w.x(i), T::zero());
        // sin(rho x)/rho = x sinc(rho x)
        let kernel = x * sinc(rho * x);
        let wq = if i == 0 || i == n - 1 { half } else { T::one() };
        acc = acc + w.values()[i] * kernel * Complex::new(wq, T::zero());
    }
    sinc(rho * pi_c) * pi_c + acc * Complex::new(h, T::zero())
}

/// Newton eigenvalue search on an arbitrary `Delta` evaluator.
pub fn find_eigenvalues<T: Scalar>(
    delta: impl Fn(Complex<T>) -> Complex<T>,
    k_max: usize,
    opts: &crate::rootfind::NewtonOptions<T>,
) -> crate::rootfind::SpectrumSearch<T> {
    crate::rootfind::find_spectrum_roots(move |rho| delta(rho * rho), k_max, opts)
}

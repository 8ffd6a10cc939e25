//! Newton search for eigenvalues in the `rho = sqrt(lambda)` plane.
//!
//! Mode `k` starts at `rho = k` and is confined to `|rho - k| < 1/2`; the
//! open half-width keeps the search discs disjoint, so every converged root
//! keeps its mode index. Derivatives are taken by central differences,
//! which is exact enough for quadratic convergence of the outer iteration.

use num_complex::Complex;

use crate::error::Error;
use crate::scalar::{lit, num, Scalar};
use crate::spectra::Spectrum;

#[derive(Debug, Clone)]
pub struct NewtonOptions<T: Scalar> {
    /// Stop once the Newton step is below `tol * max(1, |rho|)`.
    pub tol: T,
    pub max_iter: usize,
    /// Half-width of the search disc around the starting integer.
    pub search_radius: T,
    /// Residuals above this after convergence mark the index as failed.
    pub residual_cap: T,
}

impl<T: Scalar> Default for NewtonOptions<T> {
    fn default() -> Self {
        NewtonOptions {
            tol: lit(1e-12),
            max_iter: 60,
            search_radius: lit(0.5),
            residual_cap: lit(1e-6),
        }
    }
}

/// Outcome of the Newton search for one mode index.
#[derive(Debug, Clone)]
pub struct RootOutcome<T: Scalar> {
    pub k: usize,
    pub rho: Complex<T>,
    pub lambda: Complex<T>,
    /// `|Delta(lambda)|` at the accepted point.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Search report over modes `1..=k_max`.
#[derive(Debug, Clone)]
pub struct SpectrumSearch<T: Scalar> {
    pub outcomes: Vec<RootOutcome<T>>,
    /// Pairs of mode indices whose roots landed within collision distance.
    pub collisions: Vec<(usize, usize)>,
}

impl<T: Scalar> SpectrumSearch<T> {
    pub fn failed_indices(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .filter(|o| !o.converged)
            .map(|o| o.k)
            .collect()
    }

    /// The found head as a spectrum; errors if any index failed.
    pub fn spectrum(&self) -> Result<Spectrum<T>, Error> {
        let failed = self.failed_indices();
        if !failed.is_empty() {
            return Err(Error::RootSearchFailed { indices: failed });
        }
        Spectrum::complete_tail(self.outcomes.iter().map(|o| o.lambda).collect())
    }
}

/// Finds one root of `f(rho)` per mode index, `f` analytic in `rho`.
pub fn find_spectrum_roots<T: Scalar>(
    f: impl Fn(Complex<T>) -> Complex<T>,
    k_max: usize,
    opts: &NewtonOptions<T>,
) -> SpectrumSearch<T> {
    let outcomes: Vec<RootOutcome<T>> = (1..=k_max).map(|k| newton_mode(&f, k, opts)).collect();
    let collisions = detect_collisions(&outcomes, lit::<T>(1e-8));
    SpectrumSearch {
        outcomes,
        collisions,
    }
}

fn newton_mode<T: Scalar>(
    f: &impl Fn(Complex<T>) -> Complex<T>,
    k: usize,
    opts: &NewtonOptions<T>,
) -> RootOutcome<T> {
    let center = Complex::new(num::<T>(k), T::zero());
    let mut rho = center;
    let max_step = opts.search_radius * lit::<T>(0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let scale = T::one().max(rho.norm());
        let fd = lit::<T>(1e-5) * scale;
        let fv = f(rho);
        let fp = (f(rho + Complex::new(fd, T::zero())) - f(rho - Complex::new(fd, T::zero())))
            / Complex::new(fd + fd, T::zero());
        let finite = |c: Complex<T>| c.re.is_finite() && c.im.is_finite();
        if fp.norm() == T::zero() || !finite(fp) || !finite(fv) {
            break;
        }
        let mut step = -fv / fp;
        // Damp long steps so the iterate cannot vault across the disc.
        if step.norm() > max_step {
            step = step * Complex::new(max_step / step.norm(), T::zero());
        }
        let mut next = rho + step;
        let mut halvings = 0;
        while (next - center).norm() >= opts.search_radius && halvings < 40 {
            step = step * Complex::new(lit::<T>(0.5), T::zero());
            next = rho + step;
            halvings += 1;
        }
        if halvings == 40 {
            break;
        }
        rho = next;
        if step.norm() <= opts.tol * T::one().max(rho.norm()) {
            converged = true;
            break;
        }
    }

    let residual = f(rho).norm();
    if residual > opts.residual_cap || !residual.is_finite() {
        converged = false;
    }
    RootOutcome {
        k,
        rho,
        lambda: rho * rho,
        residual,
        iterations,
        converged,
    }
}

/// Marks pairs of converged roots closer than `tol` in the `rho` plane.
/// With disjoint search discs this flags boundary-touching near-collisions.
pub fn detect_collisions<T: Scalar>(outcomes: &[RootOutcome<T>], tol: T) -> Vec<(usize, usize)> {
    let mut hits = Vec::new();
    for i in 0..outcomes.len() {
        for j in (i + 1)..outcomes.len() {
            if outcomes[i].converged
                && outcomes[j].converged
                && (outcomes[i].rho - outcomes[j].rho).norm() < tol
            {
                hits.push((outcomes[i].k, outcomes[j].k));
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn finds_integer_roots_of_sine() {
        // f(rho) = sin(pi rho) / rho has roots at every positive integer.
        let f = |rho: Complex64| (rho * std::f64::consts::PI).sin() / rho;
        let search = find_spectrum_roots(f, 5, &NewtonOptions::default());
        for o in &search.outcomes {
            assert!(o.converged, "mode {} failed", o.k);
            assert!((o.rho - Complex64::new(o.k as f64, 0.0)).norm() < 1e-12);
        }
        assert!(search.collisions.is_empty());
    }

    #[test]
    fn shifted_root_is_tracked_within_the_disc() {
        let f = |rho: Complex64| rho - Complex64::new(2.3, 0.1);
        let search = find_spectrum_roots(f, 3, &NewtonOptions::default());
        let o = &search.outcomes[1];
        assert!(o.converged);
        assert!((o.rho - Complex64::new(2.3, 0.1)).norm() < 1e-12);
        // Modes 1 and 3 have no root inside their discs.
        assert!(!search.outcomes[0].converged);
        assert!(!search.outcomes[2].converged);
        assert_eq!(search.failed_indices(), vec![1, 3]);
        assert!(search.spectrum().is_err());
    }

    #[test]
    fn collision_detector_flags_coincident_roots() {
        let mk = |k: usize, rho: Complex64| RootOutcome {
            k,
            rho,
            lambda: rho * rho,
            residual: 0.0,
            iterations: 1,
            converged: true,
        };
        let outcomes = vec![
            mk(1, Complex64::new(1.4999999999, 0.0)),
            mk(2, Complex64::new(1.5000000000, 0.0)),
            mk(3, Complex64::new(3.0, 0.0)),
        ];
        let hits = detect_collisions(&outcomes, 1e-8);
        assert_eq!(hits, vec![(1, 2)]);
    }
}

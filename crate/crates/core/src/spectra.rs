//! Eigenvalue sequences and the distances between them.
//!
//! A spectrum is stored as a finite head `lambda_1 .. lambda_K`; beyond the
//! head every eigenvalue is exactly `k^2` (the tail rule). This makes all
//! infinite-sequence formulas finite: differences of two spectra vanish
//! beyond `max(K, K~)`, so the distances below are evaluated exactly rather
//! than by arbitrary truncation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::Error;
use crate::scalar::{num, Scalar};

/// Eigenvalue sequence under the `lambda_k = k^2 for k > K` tail rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Scalar> {
    head: Vec<Complex<T>>,
}

/// On-disk schema: `{"K": usize, "lambda": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    #[serde(rename = "K")]
    k: usize,
    lambda: Vec<[f64; 2]>,
}

impl<T: Scalar> Spectrum<T> {
    /// Canonical embedding of finitely many measured eigenvalues into the
    /// infinite-sequence setting.
    pub fn complete_tail(head: Vec<Complex<T>>) -> Result<Self, Error> {
        if head.is_empty() {
            return Err(Error::EmptySpectrumHead);
        }
        Ok(Spectrum { head })
    }

    /// The unperturbed sequence `k^2` represented with a head of length `k`.
    pub fn tail_only(k: usize) -> Result<Self, Error> {
        if k == 0 {
            return Err(Error::EmptySpectrumHead);
        }
        let head = (1..=k)
            .map(|i| Complex::new(num::<T>(i * i), T::zero()))
            .collect();
        Ok(Spectrum { head })
    }

    pub fn head(&self) -> &[Complex<T>] {
        &self.head
    }

    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    /// `lambda_k` for any `k >= 1`, applying the tail rule past the head.
    pub fn eigenvalue(&self, k: usize) -> Complex<T> {
        debug_assert!(k >= 1);
        if k <= self.head.len() {
            self.head[k - 1]
        } else {
            Complex::new(num::<T>(k * k), T::zero())
        }
    }

    /// Rejects non-finite data; run before feeding a spectrum to a solver.
    pub fn validate(&self) -> Result<(), Error> {
        for (i, v) in self.head.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Validation(format!(
                    "eigenvalue {} is not finite",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Normalized eigenvalue offsets `eps_k = (lambda_k - k^2) / k`.
    pub fn epsilons(&self) -> Vec<Complex<T>> {
        self.head
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let k = num::<T>(i + 1);
                (l - Complex::new(k * k, T::zero())) / k
            })
            .collect()
    }

    /// Square-root residuals `kappa_k = rho_k - k` where `rho_k^2 = lambda_k`
    /// and the branch has `Re rho_k >= 0` (ties toward `Im >= 0`).
    ///
    /// Computed as `k (sqrt(1 + eps_k / k) - 1)`, which keeps full precision
    /// when `lambda_k` is close to `k^2`; satisfies `|kappa_k| <= |eps_k|`.
    pub fn sqrt_residuals(&self) -> Vec<Complex<T>> {
        let one = Complex::new(T::one(), T::zero());
        self.epsilons()
            .into_iter()
            .enumerate()
            .map(|(i, eps)| {
                let k = num::<T>(i + 1);
                // Principal sqrt already selects Re >= 0 with Im >= 0 on the cut.
                ((one + eps / k).sqrt() - one) * k
            })
            .collect()
    }

    /// `rho_k = k + kappa_k` for the head.
    pub fn rhos(&self) -> Vec<Complex<T>> {
        self.sqrt_residuals()
            .into_iter()
            .enumerate()
            .map(|(i, kap)| kap + Complex::new(num::<T>(i + 1), T::zero()))
            .collect()
    }

    /// Quadratic spectral distance
    /// `Lambda = sqrt( sum_k |lambda_k - mu_k|^2 / k^2 )`.
    ///
    /// Finite by construction: beyond both heads the terms vanish.
    pub fn lambda_distance(&self, other: &Self) -> T {
        let kmax = self.head_len().max(other.head_len());
        let mut acc = T::zero();
        for k in 1..=kmax {
            let d = (self.eigenvalue(k) - other.eigenvalue(k)).norm();
            let kk = num::<T>(k);
            acc = acc + (d / kk) * (d / kk);
        }
        acc.sqrt()
    }

    /// First-order spectral distance `Lambda_1 = sum_k |lambda_k - mu_k| / k`.
    pub fn lambda1_distance(&self, other: &Self) -> T {
        let kmax = self.head_len().max(other.head_len());
        let mut acc = T::zero();
        for k in 1..=kmax {
            let d = (self.eigenvalue(k) - other.eigenvalue(k)).norm();
            acc = acc + d / num::<T>(k);
        }
        acc
    }

    /// Distance to the unperturbed sequence; the radius of the smallest
    /// ball (in `lambda_distance`) around `{k^2}` containing this spectrum.
    pub fn ball_radius(&self) -> T {
        let mut acc = T::zero();
        for (i, l) in self.head.iter().enumerate() {
            let k = num::<T>(i + 1);
            let d = (l - Complex::new(k * k, T::zero())).norm();
            acc = acc + (d / k) * (d / k);
        }
        acc.sqrt()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), Error> {
        let file = SpectrumFile {
            k: self.head.len(),
            lambda: self
                .head
                .iter()
                .map(|c| {
                    [
                        c.re.to_f64().unwrap_or(f64::NAN),
                        c.im.to_f64().unwrap_or(f64::NAN),
                    ]
                })
                .collect(),
        };
        serde_json::to_writer_pretty(out, &file)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, Error> {
        let file: SpectrumFile = serde_json::from_reader(input)?;
        if file.k != file.lambda.len() {
            return Err(Error::Validation(format!(
                "declared K = {} but {} eigenvalues present",
                file.k,
                file.lambda.len()
            )));
        }
        let head = file
            .lambda
            .iter()
            .map(|&[re, im]| {
                Ok(Complex::new(
                    T::from_f64(re).ok_or_else(|| Error::Parse("re out of range".into()))?,
                    T::from_f64(im).ok_or_else(|| Error::Parse("im out of range".into()))?,
                ))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Spectrum::complete_tail(head)
    }
}

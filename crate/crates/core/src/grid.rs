//! Complex-valued functions sampled on the uniform grid over `[0, pi]`,
//! with the causal (Volterra) convolution algebra built on top of them.
//!
//! Quadrature. Convolutions use the end-corrected trapezoid rule (Gregory
//! weights `3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8`), which keeps the
//! lower-triangular marching structure and the weight symmetry `w_j =
//! w_{i-j}` (so `f * g == g * f` node-by-node) while integrating cubics
//! exactly; short prefixes fall back to the closed Newton-Cotes rule of the
//! matching length. Global error is O(step^4) for smooth inputs. Plain
//! trapezoid sums are used for the scalar integrals (norms, cumulative
//! integral) where second order is sufficient.

use num_complex::Complex;
use std::io::{BufRead, Write};

use crate::error::Error;
use crate::scalar::{lit, num, Scalar};

/// Function values on the uniform grid `x_i = i * pi / (n - 1)`.
///
/// Invariants: at least two nodes; the last node is exactly `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Scalar> {
    values: Vec<Complex<T>>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(values: Vec<Complex<T>>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::GridTooSmall {
                needed: 2,
                got: values.len(),
            });
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(n: usize) -> Result<Self, Error> {
        Self::new(vec![Complex::new(T::zero(), T::zero()); n])
    }

    pub fn constant(n: usize, c: Complex<T>) -> Result<Self, Error> {
        Self::new(vec![c; n])
    }

    /// Samples `f` at every node.
    pub fn from_fn(n: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::GridTooSmall { needed: 2, got: n });
        }
        let step = T::PI() / num::<T>(n - 1);
        let values = (0..n)
            .map(|i| {
                let x = if i == n - 1 {
                    T::PI()
                } else {
                    num::<T>(i) * step
                };
                f(x)
            })
            .collect();
        Ok(GridFunction { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> T {
        T::PI() / num::<T>(self.len() - 1)
    }

    /// Node abscissa; the final node is pinned to `pi` exactly so weighted
    /// quantities vanish there without rounding residue.
    pub fn x(&self, i: usize) -> T {
        if i == self.len() - 1 {
            T::PI()
        } else {
            num::<T>(i) * self.step()
        }
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    fn check_same_grid(&self, other: &Self) -> Result<(), Error> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(GridFunction { values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction { values })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        GridFunction {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Values reversed: the sample of `x -> f(pi - x)`.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        GridFunction { values }
    }

    /// Causal convolution `(f * g)(x) = int_0^x f(x-t) g(t) dt`.
    pub fn convolve(&self, other: &Self) -> Result<Self, Error> {
        self.check_same_grid(other)?;
        let n = self.len();
        let h = self.step();
        let f = &self.values;
        let g = &other.values;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for i in 1..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..=i {
                acc = acc + f[i - j] * g[j] * quad_weight::<T>(i, j);
            }
            out[i] = acc * h;
        }
        GridFunction::new(out)
    }

    /// Iterated convolution power: `f^{*1} = f`, `f^{*(nu+1)} = f * f^{*nu}`.
    pub fn conv_power(&self, nu: usize) -> Result<Self, Error> {
        if nu == 0 {
            return Err(Error::InvalidConvOrder);
        }
        let mut acc = self.clone();
        for _ in 1..nu {
            acc = self.convolve(&acc)?;
        }
        Ok(acc)
    }

    /// Running integral `x -> int_0^x f(t) dt` by cumulative trapezoid.
    pub fn cumulative_integral(&self) -> Self {
        let h = self.step();
        let half = lit::<T>(0.5);
        let mut values = Vec::with_capacity(self.len());
        let mut acc = Complex::new(T::zero(), T::zero());
        values.push(acc);
        for i in 1..self.len() {
            acc = acc + (self.values[i - 1] + self.values[i]) * half * h;
            values.push(acc);
        }
        GridFunction { values }
    }

    /// Trapezoid `L_2(0, pi)` norm.
    pub fn norm_l2(&self) -> T {
        let h = self.step();
        let half = lit::<T>(0.5);
        let n = self.len();
        let mut acc = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { half } else { T::one() };
            acc = acc + w * v.norm_sqr();
        }
        (acc * h).sqrt()
    }

    /// Weighted norm `|| (pi - x) f ||_{L_2}`.
    pub fn norm_weighted_l2(&self) -> T {
        let h = self.step();
        let half = lit::<T>(0.5);
        let n = self.len();
        let mut acc = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let wq = if i == 0 || i == n - 1 { half } else { T::one() };
            let weight = T::PI() - self.x(i);
            acc = acc + wq * weight * weight * v.norm_sqr();
        }
        (acc * h).sqrt()
    }

    /// Weighted sup norm `max_i |(pi - x_i) f(x_i)|`.
    pub fn norm_weighted_inf(&self) -> T {
        let mut best = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let weight = T::PI() - self.x(i);
            let m = weight * v.norm();
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Plain sup norm over the nodes.
    pub fn norm_inf(&self) -> T {
        let mut best = T::zero();
        for v in &self.values {
            let m = v.norm();
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Largest node-wise difference, for test comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T, Error> {
        self.check_same_grid(other)?;
        let mut best = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            let m = (a - b).norm();
            if m > best {
                best = m;
            }
        }
        Ok(best)
    }

    /// Writes `x,re,im` rows with a header; floats in shortest round-trip
    /// form so identical data always produces identical bytes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), Error> {
        writeln!(out, "x,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.x(i).to_f64().unwrap_or(f64::NAN);
            let re = v.re.to_f64().unwrap_or(f64::NAN);
            let im = v.im.to_f64().unwrap_or(f64::NAN);
            writeln!(out, "{x},{re},{im}")?;
        }
        Ok(())
    }

    /// Reads the CSV form produced by [`GridFunction::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, Error> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        if header.trim() != "x,re,im" {
            return Err(Error::Parse(format!(
                "expected header 'x,re,im', got '{}'",
                header.trim()
            )));
        }
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut take = || -> Result<f64, Error> {
                fields
                    .next()
                    .ok_or_else(|| Error::Parse(format!("row {}: missing field", row + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {}", row + 2, e)))
            };
            let _x = take()?;
            let re = take()?;
            let im = take()?;
            if fields.next().is_some() {
                return Err(Error::Parse(format!("row {}: too many fields", row + 2)));
            }
            values.push(Complex::new(
                T::from_f64(re).ok_or_else(|| Error::Parse("value out of range".into()))?,
                T::from_f64(im).ok_or_else(|| Error::Parse("value out of range".into()))?,
            ));
        }
        let f = GridFunction::new(values)?;
        Ok(f)
    }
}

/// Composite quadrature weight for target index `i`, node `j`.
///
/// `i >= 5` uses Gregory end corrections; shorter prefixes use the closed
/// Newton-Cotes rule with exactly `i + 1` nodes. Every row is symmetric.
fn quad_weight<T: Scalar>(i: usize, j: usize) -> T {
    debug_assert!(j <= i);
    match i {
        0 => T::zero(),
        1 => lit(0.5),
        2 => {
            if j == 1 {
                lit(4.0 / 3.0)
            } else {
                lit(1.0 / 3.0)
            }
        }
        3 => {
            if j == 0 || j == 3 {
                lit(3.0 / 8.0)
            } else {
                lit(9.0 / 8.0)
            }
        }
        4 => match j {
            0 | 4 => lit(14.0 / 45.0),
            1 | 3 => lit(64.0 / 45.0),
            _ => lit(24.0 / 45.0),
        },
        _ => {
            let edge = j.min(i - j);
            match edge {
                0 => lit(3.0 / 8.0),
                1 => lit(7.0 / 6.0),
                2 => lit(23.0 / 24.0),
                _ => T::one(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type G = GridFunction<f64>;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn construction_rejects_tiny_grids() {
        assert!(G::new(vec![re(1.0)]).is_err());
        assert!(G::from_fn(1, |_| re(0.0)).is_err());
    }

    #[test]
    fn last_node_is_exactly_pi() {
        for n in [2, 5, 257, 1025] {
            let f = G::zeros(n).unwrap();
            assert_eq!(f.x(n - 1), std::f64::consts::PI);
            assert!((f.step() * (n - 1) as f64 - std::f64::consts::PI).abs() < 1e-15);
        }
    }

    #[test]
    fn convolution_of_ones_is_x() {
        let f = G::constant(257, re(1.0)).unwrap();
        let c = f.convolve(&f).unwrap();
        for i in 0..f.len() {
            assert!((c.values()[i] - re(f.x(i))).norm() < 1e-13);
        }
    }

    #[test]
    fn convolution_of_sines_matches_closed_form() {
        // int_0^x sin(x-t) sin(t) dt = (sin x - x cos x) / 2
        let f = G::from_fn(513, |x| re(x.sin())).unwrap();
        let c = f.convolve(&f).unwrap();
        let exact = G::from_fn(513, |x| re((x.sin() - x * x.cos()) / 2.0)).unwrap();
        // Short starting rows are one order lower than the corrected
        // interior, so the two regions get separate budgets.
        for i in 0..f.len() {
            let e = (c.values()[i] - exact.values()[i]).norm();
            let budget = if i < 5 { 1e-7 } else { 2e-9 };
            assert!(e < budget, "i={i} error={e}");
        }
    }

    #[test]
    fn convolution_error_decays_at_fourth_order() {
        // Max error over the end-corrected region only; the handful of
        // starting rows decay one order slower.
        let err_at = |n: usize| -> f64 {
            let f = G::from_fn(n, |x| re(x.sin())).unwrap();
            let c = f.convolve(&f).unwrap();
            let exact = G::from_fn(n, |x| re((x.sin() - x * x.cos()) / 2.0)).unwrap();
            (5..n)
                .map(|i| (c.values()[i] - exact.values()[i]).norm())
                .fold(0.0, f64::max)
        };
        let e1 = err_at(129);
        let e2 = err_at(257);
        let ratio = e1 / e2;
        assert!(
            (10.0..24.0).contains(&ratio),
            "convergence ratio {ratio} outside fourth-order band"
        );
    }

    #[test]
    fn conv_power_one_is_identity() {
        let f = G::from_fn(65, |x| Complex64::new(x.cos(), 0.3 * x)).unwrap();
        let p = f.conv_power(1).unwrap();
        assert_eq!(p, f);
    }

    #[test]
    fn conv_power_zero_is_rejected() {
        let f = G::zeros(16).unwrap();
        assert!(matches!(f.conv_power(0), Err(Error::InvalidConvOrder)));
    }

    #[test]
    fn conv_power_of_ones_gives_monomials() {
        let f = G::constant(257, re(1.0)).unwrap();
        let p3 = f.conv_power(3).unwrap();
        for i in 0..f.len() {
            let x = f.x(i);
            assert!((p3.values()[i] - re(x * x / 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn conv_power_of_constant_matches_factorial_formula() {
        // a^nu x^{nu-1} / (nu-1)!; cubic-exact weights make nu <= 3 exact,
        // higher powers pick up quadrature error.
        let a = 0.7;
        let f = G::constant(257, re(a)).unwrap();
        for nu in 1..=7usize {
            let p = f.conv_power(nu).unwrap();
            let fact: f64 = (1..nu).map(|m| m as f64).product();
            let budget = if nu <= 3 { 1e-13 } else { 1e-7 };
            for i in 0..f.len() {
                let x = f.x(i);
                let exact = a.powi(nu as i32) * x.powi(nu as i32 - 1) / fact;
                assert!((p.values()[i] - re(exact)).norm() < budget, "nu={nu} i={i}");
            }
        }
    }

    #[test]
    fn convolution_is_commutative_at_every_node() {
        let f = G::from_fn(129, |x| Complex64::new(x.sin(), x.cos())).unwrap();
        let g = G::from_fn(129, |x| Complex64::new(1.0 / (1.0 + x), -0.2 * x)).unwrap();
        let fg = f.convolve(&g).unwrap();
        let gf = g.convolve(&f).unwrap();
        // Same weighted terms in reverse summation order.
        assert!(fg.max_abs_diff(&gf).unwrap() < 1e-14);
    }

    #[test]
    fn convolution_is_associative_up_to_quadrature() {
        let f = G::from_fn(129, |x| re((2.0 * x).cos())).unwrap();
        let g = G::from_fn(129, |x| re(x.sin())).unwrap();
        let k = G::from_fn(129, |x| re(1.0 + 0.5 * x)).unwrap();
        let left = f.convolve(&g).unwrap().convolve(&k).unwrap();
        let right = f.convolve(&g.convolve(&k).unwrap()).unwrap();
        let step = f.step();
        assert!(left.max_abs_diff(&right).unwrap() <= 10.0 * step * step);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let f = G::zeros(16).unwrap();
        let g = G::zeros(17).unwrap();
        assert!(matches!(
            f.convolve(&g),
            Err(Error::GridMismatch {
                left: 16,
                right: 17
            })
        ));
        assert!(f.add(&g).is_err());
    }

    #[test]
    fn weighted_l2_norm_of_one() {
        // int_0^pi (pi - x)^2 dx = pi^3 / 3
        let f = G::constant(513, re(1.0)).unwrap();
        let exact = (std::f64::consts::PI.powi(3) / 3.0).sqrt();
        assert!((f.norm_weighted_l2() - exact).abs() < 1e-5);
    }

    #[test]
    fn weighted_inf_norm_of_one_is_pi() {
        let f = G::constant(129, re(1.0)).unwrap();
        assert_eq!(f.norm_weighted_inf(), std::f64::consts::PI);
    }

    #[test]
    fn norms_of_zero_vanish() {
        let f = G::zeros(65).unwrap();
        assert_eq!(f.norm_l2(), 0.0);
        assert_eq!(f.norm_weighted_l2(), 0.0);
        assert_eq!(f.norm_weighted_inf(), 0.0);
    }

    #[test]
    fn weighted_quantities_ignore_the_endpoint() {
        let mut f = G::zeros(65).unwrap();
        let n = f.len();
        f.values_mut()[n - 1] = re(1e12);
        assert_eq!(f.norm_weighted_inf(), 0.0);
        assert_eq!(f.norm_weighted_l2(), 0.0);
    }

    #[test]
    fn cumulative_integral_of_linear_is_exact() {
        let f = G::from_fn(129, |x| re(3.0 * x)).unwrap();
        let c = f.cumulative_integral();
        for i in 0..f.len() {
            let x = f.x(i);
            assert!((c.values()[i] - re(1.5 * x * x)).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = G::from_fn(33, |x| Complex64::new(x.sin(), -x / 7.0)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = G::read_csv(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_rejects_bad_header_and_bad_rows() {
        let bad_header = "a,b,c\n0,0,0\n";
        assert!(G::read_csv(bad_header.as_bytes()).is_err());
        let bad_row = "x,re,im\n0,0,zebra\n0.1,0,0\n";
        assert!(G::read_csv(bad_row.as_bytes()).is_err());
        let short_row = "x,re,im\n0,0\n";
        assert!(G::read_csv(short_row.as_bytes()).is_err());
    }

    #[test]
    fn reflect_reverses_nodes() {
        let f = G::from_fn(65, re).unwrap();
        let r = f.reflect();
        for i in 0..f.len() {
            assert!((r.values()[i] - re(std::f64::consts::PI - f.x(i))).norm() < 1e-14);
        }
    }
}

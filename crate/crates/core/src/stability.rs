//! Empirical stability laboratory.
//!
//! Perturbation experiments around the reconstruction pipeline: run a pair
//! of spectra through the full inversion and record how far every
//! intermediate object moves, relative to the spectral distances. The
//! module also houses the diagnostic sequences that control those bounds
//! (far-mode sums `theta_k`, eigenvalue products `a_k`) and a smoothness
//! probe based on the square-root asymptotics of the spectrum.
//!
//! Constants measured here are reported, not asserted; callers compare
//! ratios across scales instead of against theoretical values.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

use crate::config::SolverConfig;
use crate::error::Error;
use crate::grid::GridFunction;
use crate::pipeline::{reconstruct_kernel, Reconstruction};
use crate::scalar::{lit, num, Scalar};
use crate::spectra::Spectrum;

/// Deviations and diagnostics for one pair of spectra.
///
/// `dw_*` are plain norms of the trace difference; `dn_*` and `dm_*` are
/// weighted norms, matching the spaces the kernels live in. Ratio fields
/// are present only when their denominator is positive.
#[derive(Debug, Clone)]
pub struct StabilityReport<T: Scalar> {
    pub lambda_dist: T,
    pub lambda1_dist: T,
    pub dw_l2: T,
    pub dw_inf: T,
    pub dn_l2w: T,
    pub dn_infw: T,
    pub dm_l2w: T,
    pub dm_infw: T,
    pub ratio_dm_l2w_lambda: Option<T>,
    pub ratio_dm_infw_lambda1: Option<T>,
    pub ratio_dw_l2_lambda: Option<T>,
    pub ratio_dw_inf_lambda1: Option<T>,
    /// Larger of the two distances to the unperturbed sequence.
    pub r_ball: T,
    /// Far-mode interaction sums at separation 1.
    pub theta: Vec<T>,
    /// Eigenvalue products over the head.
    pub a_head: Vec<Complex<T>>,
}

#[derive(Serialize)]
struct ReportFile {
    lambda_dist: f64,
    lambda1_dist: f64,
    dw_l2: f64,
    dw_inf: f64,
    dn_l2w: f64,
    dn_infw: f64,
    dm_l2w: f64,
    dm_infw: f64,
    ratio_dm_l2w_lambda: Option<f64>,
    ratio_dm_infw_lambda1: Option<f64>,
    ratio_dw_l2_lambda: Option<f64>,
    ratio_dw_inf_lambda1: Option<f64>,
    r_ball: f64,
    theta: Vec<f64>,
    a_head: Vec<[f64; 2]>,
}

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

impl<T: Scalar> StabilityReport<T> {
    /// Pretty JSON with a fixed field order. Non-finite values serialize
    /// as null, per JSON's number model.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), Error> {
        let file = ReportFile {
            lambda_dist: to_f64(self.lambda_dist),
            lambda1_dist: to_f64(self.lambda1_dist),
            dw_l2: to_f64(self.dw_l2),
            dw_inf: to_f64(self.dw_inf),
            dn_l2w: to_f64(self.dn_l2w),
            dn_infw: to_f64(self.dn_infw),
            dm_l2w: to_f64(self.dm_l2w),
            dm_infw: to_f64(self.dm_infw),
            ratio_dm_l2w_lambda: self.ratio_dm_l2w_lambda.map(to_f64),
            ratio_dm_infw_lambda1: self.ratio_dm_infw_lambda1.map(to_f64),
            ratio_dw_l2_lambda: self.ratio_dw_l2_lambda.map(to_f64),
            ratio_dw_inf_lambda1: self.ratio_dw_inf_lambda1.map(to_f64),
            r_ball: to_f64(self.r_ball),
            theta: self.theta.iter().map(|v| to_f64(*v)).collect(),
            a_head: self
                .a_head
                .iter()
                .map(|c| [to_f64(c.re), to_f64(c.im)])
                .collect(),
        };
        serde_json::to_writer_pretty(&mut out, &file)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

fn ratio<T: Scalar>(numer: T, denom: T) -> Option<T> {
    if denom > T::zero() {
        Some(numer / denom)
    } else {
        None
    }
}

fn report_from<T: Scalar>(
    s: &Spectrum<T>,
    s_tilde: &Spectrum<T>,
    rec_a: &Reconstruction<T>,
    rec_b: &Reconstruction<T>,
) -> Result<StabilityReport<T>, Error> {
    let lambda_dist = s.lambda_distance(s_tilde);
    let lambda1_dist = s.lambda1_distance(s_tilde);
    let dw = rec_a.w.sub(&rec_b.w)?;
    let dn = rec_a.n_fn.sub(&rec_b.n_fn)?;
    let dm = rec_a.m.sub(&rec_b.m)?;
    let dw_l2 = dw.norm_l2();
    let dw_inf = dw.norm_inf();
    let dn_l2w = dn.norm_weighted_l2();
    let dn_infw = dn.norm_weighted_inf();
    let dm_l2w = dm.norm_weighted_l2();
    let dm_infw = dm.norm_weighted_inf();
    let k_bound = s.head_len().max(s_tilde.head_len());
    let theta = theta_sequence(s, s_tilde, 1, k_bound)?;
    let a_head = a_coefficients(s, k_bound, k_bound + 1)?;
    Ok(StabilityReport {
        lambda_dist,
        lambda1_dist,
        dw_l2,
        dw_inf,
        dn_l2w,
        dn_infw,
        dm_l2w,
        dm_infw,
        ratio_dm_l2w_lambda: ratio(dm_l2w, lambda_dist),
        ratio_dm_infw_lambda1: ratio(dm_infw, lambda1_dist),
        ratio_dw_l2_lambda: ratio(dw_l2, lambda_dist),
        ratio_dw_inf_lambda1: ratio(dw_inf, lambda1_dist),
        r_ball: s.ball_radius().max(s_tilde.ball_radius()),
        theta,
        a_head,
    })
}

/// Reconstructs both spectra and measures every step's deviation.
pub fn run_pair<T: Scalar>(
    s: &Spectrum<T>,
    s_tilde: &Spectrum<T>,
    cfg: &SolverConfig<T>,
) -> Result<StabilityReport<T>, Error> {
    let rec_a = reconstruct_kernel(s, cfg)?;
    let rec_b = reconstruct_kernel(s_tilde, cfg)?;
    report_from(s, s_tilde, &rec_a, &rec_b)
}

/// Far-mode interaction sums
/// `theta_k = sum_{|j-k| >= 6r} |lambda_j - mu_j| / |lambda_j - k^2|`
/// for `k = 1..=k_max`; only head modes contribute under the tail rule.
///
/// A head eigenvalue landing exactly on `k^2` while the spectra differ
/// there makes `theta_k` infinite.
pub fn theta_sequence<T: Scalar>(
    s: &Spectrum<T>,
    s_tilde: &Spectrum<T>,
    r: usize,
    k_max: usize,
) -> Result<Vec<T>, Error> {
    if r < 1 {
        return Err(Error::Validation(
            "separation radius r must be at least 1".to_string(),
        ));
    }
    let j_max = s.head_len().max(s_tilde.head_len());
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let k2 = Complex::new(num::<T>(k * k), T::zero());
        let mut acc = T::zero();
        for j in 1..=j_max {
            if j.abs_diff(k) < 6 * r {
                continue;
            }
            let numer = (s.eigenvalue(j) - s_tilde.eigenvalue(j)).norm();
            if numer == T::zero() {
                continue;
            }
            let denom = (s.eigenvalue(j) - k2).norm();
            if denom == T::zero() {
                acc = T::infinity();
                break;
            }
            acc = acc + numer / denom;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Eigenvalue products `a_k = prod_{j <= J, j != k} (lambda_j - k^2) / (j^2 - k^2)`
/// for `k = 1..=k_max`. Factors past the head equal 1 under the tail rule,
/// so any `J` at or beyond the head length gives the exact value.
pub fn a_coefficients<T: Scalar>(
    s: &Spectrum<T>,
    k_max: usize,
    j_cap: usize,
) -> Result<Vec<Complex<T>>, Error> {
    if j_cap < k_max + 1 {
        return Err(Error::Validation(format!(
            "product cap J = {} must be at least k_max + 1 = {}",
            j_cap,
            k_max + 1
        )));
    }
    let j_top = j_cap.min(s.head_len());
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let k2 = num::<T>(k * k);
        let mut prod = Complex::new(T::one(), T::zero());
        for j in 1..=j_top {
            if j == k {
                continue;
            }
            // j^2 - k^2 never vanishes for distinct positive integers.
            let denom = num::<T>(j * j) - k2;
            prod = prod * (s.eigenvalue(j) - Complex::new(k2, T::zero()))
                / Complex::new(denom, T::zero());
        }
        out.push(prod);
    }
    Ok(out)
}

/// Smoothness probe: fit of the square-root asymptotics plus an endpoint
/// comparison against the kernel when one is supplied.
#[derive(Debug, Clone)]
pub struct SmoothnessDiagnostic<T: Scalar> {
    /// Least-squares coefficient in `rho_k ~ k + A/k`, fit on the
    /// equivalent relation `k (rho_k - k) ~ A`. The rescaling keeps the
    /// low modes, where the asymptotics are weakest, from dominating the
    /// normal equation.
    pub a_est: Complex<T>,
    /// Fit residual `sqrt(sum_k |k (rho_k - k) - A|^2)` over the head.
    pub residual_l2: T,
    /// Kernel value at 0, extrapolated from the first interior nodes.
    pub m0: Option<Complex<T>>,
    /// `|m0 - 2 a_est|`; small for kernels with a square-summable derivative.
    pub discrepancy: Option<T>,
}

pub fn smoothness_diagnostic<T: Scalar>(
    s: &Spectrum<T>,
    m: Option<&GridFunction<T>>,
) -> Result<SmoothnessDiagnostic<T>, Error> {
    let k_len = s.head_len();
    if k_len < 4 {
        return Err(Error::InsufficientHead {
            needed: 4,
            got: k_len,
        });
    }
    let rhos = s.rhos();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, rho) in rhos.iter().enumerate() {
        let k = num::<T>(i + 1);
        acc = acc + (rho - Complex::new(k, T::zero())).scale(k);
    }
    let a_est = acc.scale(T::one() / num::<T>(k_len));
    let mut res = T::zero();
    for (i, rho) in rhos.iter().enumerate() {
        let k = num::<T>(i + 1);
        let dev = ((rho - Complex::new(k, T::zero())).scale(k) - a_est).norm();
        res = res + dev * dev;
    }
    let residual_l2 = res.sqrt();
    let m0 = match m {
        Some(g) => {
            if g.len() < 4 {
                return Err(Error::GridTooSmall {
                    needed: 4,
                    got: g.len(),
                });
            }
            // Quadratic through nodes 1..3 evaluated at 0; skips the node
            // at 0 itself so reconstructed kernels are probed the same way
            // as measured ones.
            let v = g.values();
            let three = Complex::new(lit::<T>(3.0), T::zero());
            Some(three * v[1] - three * v[2] + v[3])
        }
        None => None,
    };
    let discrepancy = m0.map(|v| (v - a_est.scale(lit::<T>(2.0))).norm());
    Ok(SmoothnessDiagnostic {
        a_est,
        residual_l2,
        m0,
        discrepancy,
    })
}

/// Draws `xi` uniformly in the square, then scales so the spectrum lands
/// uniformly inside the radius-`r` ball around `{k^2}`.
fn draw_in_ball<T: Scalar>(rng: &mut ChaCha8Rng, k_len: usize, r: T) -> Result<Spectrum<T>, Error> {
    let xi: Vec<(f64, f64)> = (0..k_len)
        .map(|_| (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let norm = xi
        .iter()
        .map(|(re, im)| re * re + im * im)
        .sum::<f64>()
        .sqrt();
    let u: f64 = rng.gen();
    let scale = if norm > 0.0 {
        r.to_f64().unwrap_or(0.0) * u / norm
    } else {
        0.0
    };
    let head = xi
        .iter()
        .enumerate()
        .map(|(i, (re, im))| {
            let k = (i + 1) as f64;
            Complex::new(lit::<T>(k * k + k * scale * re), lit::<T>(k * scale * im))
        })
        .collect();
    Spectrum::complete_tail(head)
}

/// Deterministic spectrum in the radius-`r` ball; equal seeds give equal
/// spectra.
pub fn random_spectrum<T: Scalar>(seed: u64, k_len: usize, r: T) -> Result<Spectrum<T>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_in_ball(&mut rng, k_len, r)
}

/// Two independent draws from one seeded stream.
pub fn random_pair<T: Scalar>(
    seed: u64,
    k_len: usize,
    r: T,
) -> Result<(Spectrum<T>, Spectrum<T>), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = draw_in_ball(&mut rng, k_len, r)?;
    let b = draw_in_ball(&mut rng, k_len, r)?;
    Ok((a, b))
}

/// Perturbation direction normalized so that pushing a spectrum by
/// `delta * d` moves it exactly `delta` in the quadratic distance.
pub fn random_direction<T: Scalar>(seed: u64, k_len: usize) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, f64)> = (0..k_len)
        .map(|_| (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let wnorm = raw
        .iter()
        .enumerate()
        .map(|(i, (re, im))| {
            let k = (i + 1) as f64;
            (re * re + im * im) / (k * k)
        })
        .sum::<f64>()
        .sqrt();
    raw.iter()
        .map(|(re, im)| {
            if wnorm > 0.0 {
                Complex::new(lit::<T>(re / wnorm), lit::<T>(im / wnorm))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect()
}

/// Shifts the head by `delta * d`; the direction must cover the head.
pub fn perturb<T: Scalar>(
    s: &Spectrum<T>,
    direction: &[Complex<T>],
    delta: T,
) -> Result<Spectrum<T>, Error> {
    if direction.len() != s.head_len() {
        return Err(Error::Validation(format!(
            "direction has {} entries, head has {}",
            direction.len(),
            s.head_len()
        )));
    }
    let head = s
        .head()
        .iter()
        .zip(direction)
        .map(|(l, d)| l + d.scale(delta))
        .collect();
    Spectrum::complete_tail(head)
}

/// One point of a shrinking-perturbation sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint<T: Scalar> {
    pub delta: T,
    pub report: StabilityReport<T>,
}

/// Reconstructs `s` once, then measures deviations against `s + delta d`
/// for every requested `delta`.
pub fn sweep_pair<T: Scalar>(
    s: &Spectrum<T>,
    direction: &[Complex<T>],
    deltas: &[T],
    cfg: &SolverConfig<T>,
) -> Result<Vec<SweepPoint<T>>, Error> {
    let rec_a = reconstruct_kernel(s, cfg)?;
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let s_tilde = perturb(s, direction, delta)?;
        let rec_b = reconstruct_kernel(&s_tilde, cfg)?;
        out.push(SweepPoint {
            delta,
            report: report_from(s, &s_tilde, &rec_a, &rec_b)?,
        });
    }
    Ok(out)
}

/// One ensemble member: the seed and its pair report.
#[derive(Debug, Clone)]
pub struct EnsembleRow<T: Scalar> {
    pub seed: u64,
    pub report: StabilityReport<T>,
}

/// Runs `count` seeded random pairs in the radius-`r` ball; rows come out
/// in seed order regardless of scheduling.
pub fn run_ensemble<T: Scalar>(
    seed0: u64,
    count: usize,
    k_len: usize,
    r: T,
    cfg: &SolverConfig<T>,
) -> Result<Vec<EnsembleRow<T>>, Error> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let seed = seed0.wrapping_add(i as u64);
        let (a, b) = random_pair(seed, k_len, r)?;
        let report = run_pair(&a, &b, cfg)?;
        out.push(EnsembleRow { seed, report });
    }
    Ok(out)
}

//! Run configuration shared by the solver pipeline and the CLI.
//!
//! The on-disk format is plain `key = value` text with `#` comments, so a
//! run manifest can quote it verbatim.

use std::fmt::Write as _;

use crate::error::Error;
use crate::main_eq::MainEqConfig;
use crate::rootfind::NewtonOptions;
use crate::scalar::{lit, Scalar};

/// Knobs for one reconstruction run. `Default` gives the documented
/// defaults; files only need to list the keys they override.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T: Scalar> {
    /// Grid resolution for all sampled functions.
    pub grid_points: usize,
    /// Series order cap in the nonlinear equation.
    pub nu_max: usize,
    /// Fixed-point step tolerance.
    pub fp_tol: T,
    /// Fixed-point iteration cap.
    pub max_iter: usize,
    /// Newton convergence tolerance in the `rho` plane.
    pub newton_tol: T,
    /// Head length used when a command needs to pick one.
    pub k_default: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            grid_points: 1025,
            nu_max: 30,
            fp_tol: lit(1e-10),
            max_iter: 200,
            newton_tol: lit(1e-12),
            k_default: 16,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown keys are rejected. Unlisted keys keep defaults.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut cfg = SolverConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "grid_points" => cfg.grid_points = parse_usize(key, value)?,
                "nu_max" => cfg.nu_max = parse_usize(key, value)?,
                "fp_tol" => cfg.fp_tol = parse_real(key, value)?,
                "max_iter" => cfg.max_iter = parse_usize(key, value)?,
                "newton_tol" => cfg.newton_tol = parse_real(key, value)?,
                "K_default" => cfg.k_default = parse_usize(key, value)?,
                other => return Err(Error::Validation(format!("unknown config key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.grid_points < 8 {
            return Err(Error::Validation(
                "grid_points must be at least 8".to_string(),
            ));
        }
        if self.nu_max < 2 {
            return Err(Error::Validation("nu_max must be at least 2".to_string()));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be positive".to_string()));
        }
        if self.k_default == 0 {
            return Err(Error::Validation("K_default must be positive".to_string()));
        }
        let fp = self.fp_tol.to_f64().unwrap_or(f64::NAN);
        let nt = self.newton_tol.to_f64().unwrap_or(f64::NAN);
        let bad = |v: f64| !v.is_finite() || v <= 0.0;
        if bad(fp) || bad(nt) {
            return Err(Error::Validation(
                "tolerances must be positive and finite".to_string(),
            ));
        }
        Ok(())
    }

    /// Serializes every key in documented order; `parse(dump())` round-trips.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "grid_points = {}", self.grid_points);
        let _ = writeln!(out, "nu_max = {}", self.nu_max);
        let _ = writeln!(out, "fp_tol = {}", self.fp_tol.to_f64().unwrap_or(f64::NAN));
        let _ = writeln!(out, "max_iter = {}", self.max_iter);
        let _ = writeln!(
            out,
            "newton_tol = {}",
            self.newton_tol.to_f64().unwrap_or(f64::NAN)
        );
        let _ = writeln!(out, "K_default = {}", self.k_default);
        out
    }

    pub fn main_eq(&self) -> MainEqConfig<T> {
        MainEqConfig {
            nu_max: self.nu_max,
            fp_tol: self.fp_tol,
            max_iter: self.max_iter,
        }
    }

    pub fn newton(&self) -> NewtonOptions<T> {
        NewtonOptions {
            tol: self.newton_tol,
            ..NewtonOptions::default()
        }
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize, Error> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("key `{key}`: `{value}` is not a positive integer")))
}

fn parse_real<T: Scalar>(key: &str, value: &str) -> Result<T, Error> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Parse(format!("key `{key}`: `{value}` is not a number")))?;
    Ok(lit(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_dump() {
        let cfg = SolverConfig::<f64>::default();
        let parsed = SolverConfig::<f64>::parse(&cfg.dump()).unwrap();
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = SolverConfig::<f64>::parse("grid_points = 257\nfp_tol = 1e-8\n").unwrap();
        assert_eq!(cfg.grid_points, 257);
        assert_eq!(cfg.fp_tol, 1e-8);
        assert_eq!(cfg.nu_max, 30);
        assert_eq!(cfg.k_default, 16);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# full-resolution run\n\ngrid_points = 2049 # dense\n";
        let cfg = SolverConfig::<f64>::parse(text).unwrap();
        assert_eq!(cfg.grid_points, 2049);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(
            SolverConfig::<f64>::parse("grid_pts = 10"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        assert!(matches!(
            SolverConfig::<f64>::parse("grid_points 257"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            SolverConfig::<f64>::parse("fp_tol = fast"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn nonsense_values_fail_validation() {
        assert!(SolverConfig::<f64>::parse("grid_points = 4").is_err());
        assert!(SolverConfig::<f64>::parse("fp_tol = -1e-10").is_err());
        assert!(SolverConfig::<f64>::parse("max_iter = 0").is_err());
    }

    #[test]
    fn adapters_copy_the_relevant_fields() {
        let cfg = SolverConfig::<f64>::parse("nu_max = 12\nnewton_tol = 1e-9\n").unwrap();
        assert_eq!(cfg.main_eq().nu_max, 12);
        assert_eq!(cfg.newton().tol, 1e-9);
    }
}

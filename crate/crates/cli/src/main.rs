//! Command-line driver for the kernel reconstruction library.
//!
//! Subcommands cover both problem directions (`forward`, `invert`,
//! `roundtrip`), the perturbation laboratory (`stability`, `ensemble`,
//! `diagnose`), and configuration inspection (`config`). All file outputs
//! are byte-identical across runs with the same inputs, configuration, and
//! seed: serialized field order is fixed, floats print in shortest
//! round-trip form, and nothing time- or host-dependent is written.
//!
//! Exit codes: 1 for I/O and parse failures, 2 for solver failures
//! (non-convergence, divergence, failed root searches), 3 for validation
//! failures. Progress notes go to stderr; only requested data goes to
//! stdout.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use specrec_core::error::Error;
use specrec_core::oracle::oracle_spectrum;
use specrec_core::pipeline::reconstruct_kernel;
use specrec_core::stability::{
    a_coefficients, run_ensemble, run_pair, smoothness_diagnostic, theta_sequence,
};
use specrec_core::{GridFunction64, SolverConfig64, Spectrum64};

#[derive(Parser)]
#[command(
    name = "specrec",
    version,
    about = "Spectral reconstruction of convolution kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a kernel's eigenvalues by direct integration
    Forward(ForwardArgs),
    /// Reconstruct a kernel from a spectrum file
    Invert(InvertArgs),
    /// Forward then invert one kernel, measuring the round-trip deviation
    Roundtrip(RoundtripArgs),
    /// Compare the reconstructions of two spectra
    Stability(StabilityArgs),
    /// Run seeded random spectrum pairs inside a perturbation ball
    Ensemble(EnsembleArgs),
    /// Report spectral diagnostics for one spectrum
    Diagnose(DiagnoseArgs),
    /// Print the solver configuration
    Config(ConfigArgs),
}

#[derive(Args)]
struct ForwardArgs {
    /// Kernel samples, CSV with header x,re,im on a uniform grid over [0, pi]
    #[arg(long)]
    kernel: PathBuf,
    /// Number of eigenvalues to locate (default: K_default from the config)
    #[arg(long)]
    modes: Option<usize>,
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output spectrum JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    /// Spectrum JSON ({"K": n, "lambda": [[re, im], ...]})
    #[arg(long)]
    spectrum: PathBuf,
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output kernel CSV
    #[arg(long)]
    out: PathBuf,
    /// Run manifest path (default: output path with extension manifest.json)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct RoundtripArgs {
    /// Kernel samples, CSV with header x,re,im on a uniform grid over [0, pi]
    #[arg(long)]
    kernel: PathBuf,
    /// Number of eigenvalues to carry through (default: K_default)
    #[arg(long)]
    modes: Option<usize>,
    /// Configuration file; the grid is taken from the kernel file instead
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where to write the reconstructed kernel CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the deviation report JSON (default: stdout)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    /// First spectrum JSON
    #[arg(long)]
    spectrum_a: PathBuf,
    /// Second spectrum JSON
    #[arg(long)]
    spectrum_b: PathBuf,
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where to write the report JSON (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Seed of the first pair; pair i uses seed + i
    #[arg(long)]
    seed: u64,
    /// Number of spectrum pairs to run
    #[arg(long)]
    count: usize,
    /// Radius of the perturbation ball around the unperturbed eigenvalues
    #[arg(long)]
    radius: f64,
    /// Head length of the drawn spectra (default: K_default)
    #[arg(long)]
    modes: Option<usize>,
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where to write the per-pair CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Spectrum JSON to examine
    #[arg(long)]
    spectrum: PathBuf,
    /// Kernel CSV for the endpoint comparison (optional)
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Where to write the diagnostics JSON (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Print the built-in defaults and exit
    #[arg(long)]
    dump: bool,
    /// Configuration file to load before printing the effective values
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Configuration block quoted in manifests.
#[derive(Serialize)]
struct ConfigInfo {
    grid_points: usize,
    nu_max: usize,
    fp_tol: f64,
    max_iter: usize,
    newton_tol: f64,
    k_default: usize,
}

impl From<&SolverConfig64> for ConfigInfo {
    fn from(cfg: &SolverConfig64) -> Self {
        ConfigInfo {
            grid_points: cfg.grid_points,
            nu_max: cfg.nu_max,
            fp_tol: cfg.fp_tol,
            max_iter: cfg.max_iter,
            newton_tol: cfg.newton_tol,
            k_default: cfg.k_default,
        }
    }
}

#[derive(Serialize)]
struct SpectrumInfo {
    head_len: usize,
    ball_radius: f64,
}

#[derive(Serialize)]
struct SolveInfo {
    iterations: usize,
    final_step: f64,
    residual_l2: f64,
    damped: bool,
}

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    config: ConfigInfo,
    spectrum: SpectrumInfo,
    result: SolveInfo,
}

#[derive(Serialize)]
struct RoundTripReport {
    modes: usize,
    grid_points: usize,
    ball_radius: f64,
    kernel_norm_l2w: f64,
    dm_l2w: f64,
    dm_rel_l2w: Option<f64>,
    dm_infw: f64,
    result: SolveInfo,
}

#[derive(Serialize)]
struct SmoothnessInfo {
    a_est: [f64; 2],
    residual_l2: f64,
    m0: Option<[f64; 2]>,
    discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct DiagnoseReport {
    head_len: usize,
    ball_radius: f64,
    theta: Vec<f64>,
    a_head: Vec<[f64; 2]>,
    smoothness: Option<SmoothnessInfo>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Forward(args) => cmd_forward(&args),
        Command::Invert(args) => cmd_invert(&args),
        Command::Roundtrip(args) => cmd_roundtrip(&args),
        Command::Stability(args) => cmd_stability(&args),
        Command::Ensemble(args) => cmd_ensemble(&args),
        Command::Diagnose(args) => cmd_diagnose(&args),
        Command::Config(args) => cmd_config(&args),
    }
}

/// 1 = I/O or parse, 2 = solver, 3 = validation. Stage wrappers defer to
/// the failure they carry. The match is exhaustive on purpose: a new error
/// variant must pick its exit class here.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Stage { source, .. } => exit_code_for(source),
        Error::Io(_) | Error::Parse(_) | Error::Json(_) => 1,
        Error::NonConvergence { .. }
        | Error::Diverged { .. }
        | Error::TruncationFailure { .. }
        | Error::RootSearchFailed { .. } => 2,
        Error::Validation(_)
        | Error::EmptySpectrumHead
        | Error::InsufficientHead { .. }
        | Error::GridMismatch { .. }
        | Error::GridTooSmall { .. }
        | Error::InvalidConvOrder => 3,
    }
}

fn io_with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {}", path.display(), e),
    ))
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig64, Error> {
    match path {
        None => Ok(SolverConfig64::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_with_path(p, e))?;
            SolverConfig64::parse(&text)
        }
    }
}

fn read_kernel(path: &Path) -> Result<GridFunction64, Error> {
    let file = File::open(path).map_err(|e| io_with_path(path, e))?;
    GridFunction64::read_csv(BufReader::new(file))
}

fn read_spectrum(path: &Path) -> Result<Spectrum64, Error> {
    let file = File::open(path).map_err(|e| io_with_path(path, e))?;
    let s = Spectrum64::read_json(BufReader::new(file))?;
    s.validate()?;
    Ok(s)
}

/// Writes fully assembled bytes in one shot; stdout when no path is given.
fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_with_path(p, e)),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn pretty_json<S: Serialize>(value: &S) -> Result<Vec<u8>, Error> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn pick_modes(requested: Option<usize>, cfg: &SolverConfig64) -> Result<usize, Error> {
    let modes = requested.unwrap_or(cfg.k_default);
    if modes == 0 {
        return Err(Error::Validation("modes must be positive".to_string()));
    }
    Ok(modes)
}

fn cmd_forward(args: &ForwardArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_deref())?;
    let kernel = read_kernel(&args.kernel)?;
    let modes = pick_modes(args.modes, &cfg)?;
    let search = oracle_spectrum(&kernel, modes, &cfg.newton())?;
    for o in &search.outcomes {
        eprintln!(
            "mode {}: lambda = {} + {}i, residual = {:.3e}, iterations = {}{}",
            o.k,
            o.lambda.re,
            o.lambda.im,
            o.residual,
            o.iterations,
            if o.converged { "" } else { " (failed)" }
        );
    }
    for (i, j) in &search.collisions {
        eprintln!("warning: roots {i} and {j} nearly coincide");
    }
    let s = search.spectrum()?;
    let mut bytes = Vec::new();
    s.write_json(&mut bytes)?;
    bytes.push(b'\n');
    write_out(Some(&args.out), &bytes)
}

fn cmd_invert(args: &InvertArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_deref())?;
    let s = read_spectrum(&args.spectrum)?;
    let rec = reconstruct_kernel(&s, &cfg)?;
    let mut bytes = Vec::new();
    rec.m.write_csv(&mut bytes)?;
    write_out(Some(&args.out), &bytes)?;
    let manifest = RunManifest {
        command: "invert",
        config: ConfigInfo::from(&cfg),
        spectrum: SpectrumInfo {
            head_len: s.head_len(),
            ball_radius: s.ball_radius(),
        },
        result: SolveInfo {
            iterations: rec.iterations,
            final_step: rec.final_step,
            residual_l2: rec.residual_l2,
            damped: rec.damped,
        },
    };
    let manifest_path = match &args.manifest {
        Some(p) => p.clone(),
        None => args.out.with_extension("manifest.json"),
    };
    write_out(Some(&manifest_path), &pretty_json(&manifest)?)?;
    eprintln!(
        "invert: {} nodes, {} iterations, final step {:.3e}, equation residual {:.3e}",
        rec.m.len(),
        rec.iterations,
        rec.final_step,
        rec.residual_l2
    );
    Ok(())
}

fn cmd_roundtrip(args: &RoundtripArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_deref())?;
    let kernel = read_kernel(&args.kernel)?;
    let modes = pick_modes(args.modes, &cfg)?;
    let search = oracle_spectrum(&kernel, modes, &cfg.newton())?;
    let s = search.spectrum()?;
    // Reconstruct on the kernel's own grid so the two sample sets align
    // node by node.
    let cfg = SolverConfig64 {
        grid_points: kernel.len(),
        ..cfg
    };
    let rec = reconstruct_kernel(&s, &cfg)?;
    let diff = kernel.sub(&rec.m)?;
    let kernel_norm = kernel.norm_weighted_l2();
    let dm = diff.norm_weighted_l2();
    let report = RoundTripReport {
        modes,
        grid_points: kernel.len(),
        ball_radius: s.ball_radius(),
        kernel_norm_l2w: kernel_norm,
        dm_l2w: dm,
        dm_rel_l2w: if kernel_norm > 0.0 {
            Some(dm / kernel_norm)
        } else {
            None
        },
        dm_infw: diff.norm_weighted_inf(),
        result: SolveInfo {
            iterations: rec.iterations,
            final_step: rec.final_step,
            residual_l2: rec.residual_l2,
            damped: rec.damped,
        },
    };
    if let Some(out) = &args.out {
        let mut bytes = Vec::new();
        rec.m.write_csv(&mut bytes)?;
        write_out(Some(out), &bytes)?;
    }
    write_out(args.report.as_deref(), &pretty_json(&report)?)
}

fn cmd_stability(args: &StabilityArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_deref())?;
    let a = read_spectrum(&args.spectrum_a)?;
    let b = read_spectrum(&args.spectrum_b)?;
    let report = run_pair(&a, &b, &cfg)?;
    let mut bytes = Vec::new();
    report.write_json(&mut bytes)?;
    write_out(args.out.as_deref(), &bytes)
}

const ENSEMBLE_HEADER: &str = "seed,lambda_dist,lambda1_dist,dw_l2,dw_inf,dn_l2w,dn_infw,\
                               dm_l2w,dm_infw,ratio_dm_l2w_lambda,ratio_dm_infw_lambda1,\
                               ratio_dw_l2_lambda,ratio_dw_inf_lambda1\n";

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_ensemble(args: &EnsembleArgs) -> Result<(), Error> {
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        return Err(Error::Validation(
            "radius must be positive and finite".to_string(),
        ));
    }
    let cfg = load_config(args.config.as_deref())?;
    let modes = pick_modes(args.modes, &cfg)?;
    let rows = run_ensemble(args.seed, args.count, modes, args.radius, &cfg)?;
    let mut out = String::new();
    out.push_str(ENSEMBLE_HEADER);
    for row in &rows {
        let r = &row.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.seed,
            r.lambda_dist,
            r.lambda1_dist,
            r.dw_l2,
            r.dw_inf,
            r.dn_l2w,
            r.dn_infw,
            r.dm_l2w,
            r.dm_infw,
            csv_opt(r.ratio_dm_l2w_lambda),
            csv_opt(r.ratio_dm_infw_lambda1),
            csv_opt(r.ratio_dw_l2_lambda),
            csv_opt(r.ratio_dw_inf_lambda1),
        ));
    }
    write_out(args.out.as_deref(), out.as_bytes())?;
    eprintln!(
        "ensemble: {} pairs, head length {}, radius {}",
        rows.len(),
        modes,
        args.radius
    );
    Ok(())
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), Error> {
    let s = read_spectrum(&args.spectrum)?;
    let k = s.head_len();
    // Far-mode sums measure the deviation from the unperturbed sequence.
    let reference = Spectrum64::tail_only(k)?;
    let theta = theta_sequence(&s, &reference, 1, k)?;
    let a_head = a_coefficients(&s, k, k + 1)?;
    let kernel = match &args.kernel {
        Some(p) => Some(read_kernel(p)?),
        None => None,
    };
    // Short heads cannot support the asymptotic fit; report null unless a
    // kernel was supplied, in which case the error is worth surfacing.
    let smoothness = if k >= 4 || kernel.is_some() {
        let d = smoothness_diagnostic(&s, kernel.as_ref())?;
        Some(SmoothnessInfo {
            a_est: [d.a_est.re, d.a_est.im],
            residual_l2: d.residual_l2,
            m0: d.m0.map(|v| [v.re, v.im]),
            discrepancy: d.discrepancy,
        })
    } else {
        None
    };
    let report = DiagnoseReport {
        head_len: k,
        ball_radius: s.ball_radius(),
        theta,
        a_head: a_head.iter().map(|c| [c.re, c.im]).collect(),
        smoothness,
    };
    write_out(args.out.as_deref(), &pretty_json(&report)?)
}

fn cmd_config(args: &ConfigArgs) -> Result<(), Error> {
    let cfg = if args.dump {
        SolverConfig64::default()
    } else {
        load_config(args.config.as_deref())?
    };
    write_out(None, cfg.dump().as_bytes())
}

//! The `shapewave` command line.
//!
//! Exit codes: 0 on success, 1 when the pipeline reports an error, 2 for
//! usage errors (bad flags, missing input files).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::datasets::{
    example1_shape, gen_duffing, gen_example1, gen_morphing_shape, load_phase_csv,
    load_signal_csv, write_columns_csv, write_phase_csv, write_signal_csv, DuffingParams,
    NoiseSpec,
};
use crate::error::{Error, Result};
use crate::extract::{extract_shape, resolve_sizes, ExtractOptions};
use crate::local::{default_centers, extract_shape_track};
use crate::phase::{estimate_raw_phase, trim_to_whole_periods, PhaseEstimateConfig};
use crate::signal::{tau_node, validate_phase, PhaseFunction, Signal, SHAPE_GRID};
use crate::theta::DEFAULT_LAMBDA;

const SEED_VAR: &str = "SHAPEWAVE_SEED";

#[derive(Debug, Parser)]
#[command(name = "shapewave", version, about = "Shape-function extraction for oscillatory signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic signal with its exact phase and shape.
    Gen(GenArgs),
    /// Extract one shape function, envelope and residual.
    Extract(ExtractArgs),
    /// Track the shape function along the record with sliding windows.
    ExtractLocal(LocalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    Example1,
    Duffing,
    Morph,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    /// Number of samples (default 4096; 8192 for duffing).
    #[arg(long)]
    n: Option<usize>,
    /// Standard deviation of added Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Noise seed; falls back to $SHAPEWAVE_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Duffing nonlinearity sign/strength ε.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Periods in the morphing fixture.
    #[arg(long, default_value_t = 20)]
    l_theta: usize,
    /// Signal CSV path; `.phase.csv` and `.shape.csv` siblings are written too.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "phase_source", required = true, multiple = false, args = ["phase", "estimate_phase"])]
struct PhaseSource {
    /// Phase CSV with header `t,theta`.
    #[arg(long)]
    phase: Option<PathBuf>,
    /// Estimate the phase from the fundamental band.
    #[arg(long)]
    estimate_phase: bool,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Signal CSV with header `t,f`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    source: PhaseSource,
    /// Band limit of the shape function.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Phase-grid size (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Envelope cutoff as a fraction of l_theta.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// Force c0 = 0.
    #[arg(long)]
    zero_dc: bool,
    /// Output prefix.
    #[arg(long)]
    out: PathBuf,
}

fn parse_mu(s: &str) -> std::result::Result<f64, String> {
    let mu: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if mu >= 1.0 && mu.is_finite() {
        Ok(mu)
    } else {
        Err(format!("mu must be >= 1, got {mu}"))
    }
}

#[derive(Debug, Args)]
struct LocalArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    source: PhaseSource,
    /// Window half-width in periods (floored).
    #[arg(long, default_value = "3", value_parser = parse_mu)]
    mu: f64,
    /// Comma-separated center times; each maps to the nearest sample.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    centers: Option<Vec<f64>>,
    #[arg(long = "K")]
    k: Option<usize>,
    /// Track CSV path.
    #[arg(long)]
    out: PathBuf,
}

/// Structured output of `extract`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub band_limit: usize,
    pub l_theta: usize,
    pub n: usize,
    pub lambda: f64,
    pub zero_dc: bool,
    pub samples: usize,
    pub phase_origin: f64,
    /// `[re, im]` for k = 0..=K.
    pub coefficients: Vec<[f64; 2]>,
    pub singular_values: Vec<f64>,
    pub rank1_energy_fraction: f64,
    pub objective_value: f64,
    pub residual_norm: f64,
    pub relative_residual: f64,
}

enum Failure {
    Usage(String),
    Pipeline(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Extract(a) => cmd_extract(&a),
        Command::ExtractLocal(a) => cmd_extract_local(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {}: {e}", e.name());
            1
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> std::result::Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_VAR}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// `dir/stem.csv` -> `dir/stem.<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn write_shape_csv(path: &Path, headers: &[&str], shapes: &[&dyn Fn(f64) -> f64]) -> Result<()> {
    let taus: Vec<f64> = (0..SHAPE_GRID).map(|i| tau_node(i, SHAPE_GRID)).collect();
    let cols: Vec<Vec<f64>> = shapes
        .iter()
        .map(|s| taus.iter().map(|&t| s(t)).collect())
        .collect();
    let mut refs: Vec<&[f64]> = vec![&taus];
    refs.extend(cols.iter().map(|c| c.as_slice()));
    write_columns_csv(path, headers, &refs)
}

fn cmd_gen(a: &GenArgs) -> std::result::Result<(), Failure> {
    let seed = resolve_seed(a.seed)?;
    let noise = NoiseSpec::new(a.sigma, seed).map_err(|e| Failure::Usage(e.to_string()))?;
    match a.generator {
        Generator::Example1 => {
            let ex = gen_example1(a.n.unwrap_or(4096), noise)?;
            write_signal_csv(&a.out, &ex.signal)?;
            write_phase_csv(sibling(&a.out, "phase"), ex.signal.times(), &ex.phases)?;
            write_shape_csv(&sibling(&a.out, "shape"), &["tau", "s"], &[&example1_shape])?;
        }
        Generator::Duffing => {
            let mut params = DuffingParams {
                samples: a.n.unwrap_or(8192),
                ..Default::default()
            };
            if let Some(eps) = a.epsilon {
                params.epsilon = eps;
            }
            let sig = gen_duffing(&params, noise)?;
            write_signal_csv(&a.out, &sig)?;
        }
        Generator::Morph => {
            let (mut sig, phases) =
                gen_morphing_shape(a.n.unwrap_or(4096), f64::cos, morph_target, a.l_theta)?;
            if a.sigma > 0.0 {
                let mut v = sig.values().to_vec();
                noise.apply(&mut v);
                sig = Signal::new(sig.times().to_vec(), v)?;
            }
            write_signal_csv(&a.out, &sig)?;
            write_phase_csv(sibling(&a.out, "phase"), sig.times(), &phases)?;
            write_shape_csv(
                &sibling(&a.out, "shape"),
                &["tau", "start", "end"],
                &[&f64::cos, &morph_target],
            )?;
        }
    }
    Ok(())
}

/// End shape of the morphing fixture.
pub fn morph_target(x: f64) -> f64 {
    0.6 * x.cos() + 0.5 * (2.0 * x).sin() + 0.3 * (3.0 * x).cos()
}

fn require_file(path: &Path) -> std::result::Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input file {} not found", path.display())))
    }
}

/// Loads the signal and its phase, trimming to whole periods when the phase
/// is estimated.
fn load_inputs(input: &Path, source: &PhaseSource) -> std::result::Result<(Signal, PhaseFunction), Failure> {
    require_file(input)?;
    if let Some(p) = &source.phase {
        require_file(p)?;
    }
    let signal = load_signal_csv(input)?;
    match &source.phase {
        Some(path) => {
            let (t, theta) = load_phase_csv(path)?;
            if t.len() != signal.len() {
                return Err(Error::LengthMismatch {
                    left: signal.len(),
                    right: t.len(),
                }
                .into());
            }
            let tol = 1e-9 * (1.0 + signal.times()[signal.len() - 1].abs());
            if let Some(i) = t.iter().zip(signal.times()).position(|(a, b)| (a - b).abs() > tol) {
                return Err(Error::InvalidParameter(format!(
                    "phase time {} at row {} does not match the signal",
                    t[i],
                    i + 1
                ))
                .into());
            }
            let phase = validate_phase(&signal, theta)?;
            Ok((signal, phase))
        }
        None => {
            let raw = estimate_raw_phase(&signal, &PhaseEstimateConfig::default())?;
            let (signal, raw) = trim_to_whole_periods(&signal, &raw)?;
            let phase = validate_phase(&signal, raw)?;
            Ok((signal, phase))
        }
    }
}

fn cmd_extract(a: &ExtractArgs) -> std::result::Result<(), Failure> {
    if !(a.lambda > 0.0 && a.lambda <= 0.5) {
        return Err(Failure::Usage(format!("lambda must lie in (0, 0.5], got {}", a.lambda)));
    }
    let (signal, phase) = load_inputs(&a.input, &a.source)?;
    let opts = ExtractOptions {
        band_limit: a.k,
        grid_size: a.n,
        zero_dc: a.zero_dc,
        envelope_cutoff: a.lambda,
    };
    let (_, k) = resolve_sizes(signal.len(), phase.l_theta(), &opts)?;
    let res = extract_shape(&signal, &phase, &opts)?;
    let rel = res.relative_residual(&signal);
    let json = ResultJson {
        band_limit: k,
        l_theta: res.l_theta,
        n: res.n,
        lambda: a.lambda,
        zero_dc: a.zero_dc,
        samples: signal.len(),
        phase_origin: res.shape.phase_origin(),
        coefficients: res.shape.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        singular_values: res.fit.singular_values.clone(),
        rank1_energy_fraction: res.fit.rank1_energy_fraction,
        objective_value: res.fit.objective_value,
        residual_norm: crate::signal::norm(&res.residual),
        relative_residual: rel,
    };

    let prefix = a.out.to_string_lossy().into_owned();
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(format!("{prefix}.result.json"), text + "\n").map_err(Error::from)?;
    write_shape_csv(
        Path::new(&format!("{prefix}.shape.csv")),
        &["tau", "s"],
        &[&|t| res.shape.eval(t)],
    )?;
    write_columns_csv(
        format!("{prefix}.envelope.csv"),
        &["t", "a"],
        &[signal.times(), &res.envelope.values_time],
    )?;
    write_columns_csv(
        format!("{prefix}.residual.csv"),
        &["t", "r"],
        &[signal.times(), &res.residual],
    )?;
    println!(
        "K={k} l_theta={} rank1={:.6} resid={:.6} n={} lambda={}",
        res.l_theta, res.fit.rank1_energy_fraction, rel, res.n, a.lambda
    );
    Ok(())
}

fn nearest_sample(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        0
    } else if i == times.len() || (t - times[i - 1]) <= (times[i] - t) {
        i - 1
    } else {
        i
    }
}

fn cmd_extract_local(a: &LocalArgs) -> std::result::Result<(), Failure> {
    if a.k == Some(0) {
        return Err(Failure::Usage("K must be at least 1".into()));
    }
    let (signal, phase) = load_inputs(&a.input, &a.source)?;
    let centers = match &a.centers {
        Some(times) => {
            let mut idx: Vec<usize> = times
                .iter()
                .map(|&t| nearest_sample(signal.times(), t))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            idx
        }
        None => default_centers(&signal, &phase, a.mu)?,
    };
    let track = extract_shape_track(&signal, &phase, &centers, a.mu, a.k)?;

    let width = track
        .shapes()
        .iter()
        .flatten()
        .map(|s| s.band_limit() + 1)
        .max()
        .unwrap_or(0);
    let mut header = vec!["center_time".to_string(), "drift".into(), "phase_origin".into()];
    for k in 0..width {
        header.push(format!("c{k}_re"));
        header.push(format!("c{k}_im"));
    }
    header.push("error".into());

    let file = fs::File::create(&a.out).map_err(|e| Error::Io(format!("{}: {e}", a.out.display())))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| Failure::Pipeline(Error::Io(e.to_string()));
    w.write_record(&header).map_err(io)?;
    for (entry, drift) in track.entries.iter().zip(&track.drift) {
        let mut row = vec![
            entry.time.to_string(),
            drift.map(|d| d.to_string()).unwrap_or_default(),
        ];
        match &entry.outcome {
            Ok(local) => {
                row.push(local.shape.phase_origin().to_string());
                for k in 0..width {
                    match local.shape.coeffs().get(k) {
                        Some(c) => {
                            row.push(c.re.to_string());
                            row.push(c.im.to_string());
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 1 + 2 * width));
                row.push(e.name().to_string());
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(Error::from)?;

    let failed = track.entries.iter().filter(|e| e.outcome.is_err()).count();
    let max_drift = track.drift.iter().flatten().cloned().fold(0.0, f64::max);
    println!(
        "centers={} failed={failed} mu={} l_theta={} max_drift={max_drift:.6} cumulative={}",
        track.entries.len(),
        a.mu,
        phase.l_theta(),
        track
            .cumulative_drift()
            .map_or("nan".to_string(), |d| format!("{d:.6}"))
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("a/ex1.csv"), "phase"), PathBuf::from("a/ex1.phase.csv"));
        assert_eq!(sibling(Path::new("duf"), "shape"), PathBuf::from("duf.shape.csv"));
    }

    #[test]
    fn nearest() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(nearest_sample(&t, -3.0), 0);
        assert_eq!(nearest_sample(&t, 0.4), 0);
        assert_eq!(nearest_sample(&t, 0.6), 1);
        assert_eq!(nearest_sample(&t, 9.0), 2);
    }

    #[test]
    fn mu_parser() {
        assert!(parse_mu("0.5").is_err());
        assert_eq!(parse_mu("3"), Ok(3.0));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["shapewave", "gen", "sine", "--out", "x.csv"]), 2);
        assert_eq!(run(["shapewave", "extract", "--input", "x.csv", "--out", "y"]), 2);
        assert_eq!(
            run(["shapewave", "extract", "--input", "/nonexistent.csv", "--estimate-phase", "--out", "y"]),
            2
        );
    }
}

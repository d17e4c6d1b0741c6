//! Command-line front door.
//!
//! Subcommands: `symmetrize`, `image`, `witness`, `collapse`, `ensemble`,
//! `oracle`. Every randomized command takes an explicit `--seed`; identical
//! arguments produce byte-identical stdout and output files. Machine output
//! goes to `-o PATH` (JSON, or CSV for `ensemble` when the path ends in
//! `.csv`). Exit codes: 0 success, 2 validation error, 1 runtime error.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::collapse_walk::{run_collapse, LatticeWalkState, SimplexPoint, WalkConfig};
use crate::detector_imaging::{
    antisymmetrize_fermion, born_weights, build_sea, decompose_exchange, extract_image,
    form_bound_state, hole_reduce, no_cloning_witness, symmetrize_boson,
};
use crate::ensemble::{export, run_ensemble, EnsembleConfig, ExportFormat};
use crate::error::{Error, Result};
use crate::rng::run_rng;
use crate::state_algebra::{BasisLabel, PureState, Slot};

/// Complex amplitude in `re+imi` rectangular form, e.g. `0.6+0.0i`.
#[derive(Debug, Clone, Copy)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_complex(s)
            .map(ComplexArg)
            .map_err(|e| e.to_string())
    }
}

/// Parse `re`, `re+imi`, `re-imi`, or a pure-imaginary `imi` literal.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = |why: &str| Error::MalformedInput {
        reason: format!("complex literal `{s}`: {why} (expected re+imi, e.g. 0.6+0.0i)"),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad("empty"));
    }
    let Some(body) = t.strip_suffix('i') else {
        let re: f64 = t.parse().map_err(|_| bad("bad real part"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    // split the imaginary part at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_str, im_str) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let re: f64 = re_str.parse().map_err(|_| bad("bad real part"))?;
    let im: f64 = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse().map_err(|_| bad("bad imaginary part"))?,
    };
    Ok(Complex64::new(re, im))
}

fn fmt_complex(z: Complex64) -> String {
    if z.im >= 0.0 || z.im.is_nan() {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qcollapse",
    version,
    about = "Symmetrized detector states, conjugate images, and collapse walks on the probability simplex"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsKind {
    Bose,
    Fermi,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// (Anti)symmetrize incoming detector-basis state i against a sea of N
    /// states and report the exchange structure.
    Symmetrize {
        /// Detector sea size.
        #[arg(long)]
        n: usize,
        /// Incoming basis index.
        #[arg(long)]
        i: usize,
        /// Exchange statistics.
        #[arg(long, value_enum)]
        stats: StatsKind,
        /// Machine-readable output path (JSON).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Conjugate detector image and diagonal bound-state weights of a state.
    Image {
        /// Comma-separated amplitudes, `re+imi` each.
        #[arg(long, value_delimiter = ',', required = true)]
        amps: Vec<ComplexArg>,
        /// Rescale the amplitudes to unit norm instead of rejecting them.
        #[arg(long)]
        normalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// No-cloning witness |<a|b> - <a|b>^2| for two states.
    Witness {
        #[arg(long, value_delimiter = ',', required = true)]
        amps_a: Vec<ComplexArg>,
        #[arg(long, value_delimiter = ',', required = true)]
        amps_b: Vec<ComplexArg>,
        #[arg(long)]
        normalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// One collapse walk from the Born weights of the given amplitudes.
    Collapse {
        #[arg(long, value_delimiter = ',', required = true)]
        amps: Vec<ComplexArg>,
        /// Lattice resolution M.
        #[arg(long, default_value_t = 100)]
        m: u64,
        /// Master seed; required for reproducibility.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        normalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Many independent collapse walks with absorption statistics.
    Ensemble {
        #[arg(long, value_delimiter = ',', required = true)]
        amps: Vec<ComplexArg>,
        #[arg(long, default_value_t = 100)]
        m: u64,
        #[arg(long)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        /// Detection efficiency in (0, 1]: registration probability per run.
        #[arg(long, default_value_t = 1.0)]
        efficiency: f64,
        #[arg(long)]
        normalize: bool,
        /// Output path; `.csv` selects CSV, anything else JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact absorption probabilities for a lattice configuration.
    Oracle {
        /// Comma-separated occupation counts.
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parse argv and dispatch; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Symmetrize { n, i, stats, output } => cmd_symmetrize(n, i, stats, output),
        Command::Image {
            amps,
            normalize,
            output,
        } => cmd_image(&amps, normalize, output),
        Command::Witness {
            amps_a,
            amps_b,
            normalize,
            output,
        } => cmd_witness(&amps_a, &amps_b, normalize, output),
        Command::Collapse {
            amps,
            m,
            seed,
            normalize,
            output,
        } => cmd_collapse(&amps, m, seed, normalize, output),
        Command::Ensemble {
            amps,
            m,
            runs,
            seed,
            efficiency,
            normalize,
            output,
        } => cmd_ensemble(&amps, m, runs, seed, efficiency, normalize, output),
        Command::Oracle { counts, output } => cmd_oracle(counts, output),
    }
}

/// Build a system state over labels `e0..` from CLI amplitudes.
fn state_from_amps(amps: &[ComplexArg], normalize: bool) -> Result<PureState> {
    let width = amps.len().saturating_sub(1).to_string().len();
    let labeled = amps
        .iter()
        .enumerate()
        .map(|(k, a)| (BasisLabel::new(format!("e{k:0width$}")), a.0))
        .collect();
    let state = PureState::new(Slot::System, labeled)?;
    if normalize {
        return state.normalized();
    }
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::MalformedInput {
            reason: format!(
                "amplitudes have squared norm {norm_sq}; pass --normalize to rescale"
            ),
        });
    }
    Ok(state)
}

fn write_output(path: &Path, mut body: String) -> Result<()> {
    if !body.ends_with('\n') {
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_symmetrize(n: usize, i: usize, stats: StatsKind, output: Option<PathBuf>) -> Result<()> {
    let sea = build_sea(n)?;
    match stats {
        StatsKind::Bose => {
            let composite = symmetrize_boson(i, &sea)?;
            let decomp = decompose_exchange(i, &sea)?;
            let residual = decomp.residual_against(&composite)?;
            println!("bosonic composite, N = {n}, i = {i}, norm = {}", composite.norm());
            print!("{}", composite.dump());
            println!("exchange coefficient: {}", fmt_complex(decomp.exchange_coefficient));
            println!("reassembly residual: {residual:e}");
            if let Some(path) = output {
                let json = serde_json::json!({
                    "exchange_coefficient": [
                        decomp.exchange_coefficient.re,
                        decomp.exchange_coefficient.im,
                    ],
                    "residual": residual,
                });
                write_output(&path, serde_json::to_string_pretty(&json)?)?;
            }
        }
        StatsKind::Fermi => {
            let composite = antisymmetrize_fermion(i, &sea)?;
            let reduction = hole_reduce(i, &sea)?;
            println!(
                "fermionic composite, N = {n}, i = {i}, norm = {}",
                composite.norm()
            );
            print!("{}", composite.dump());
            println!("hole-form proportionality: {}", reduction.proportionality);
            println!("hole-form residual: {:e}", reduction.residual);
            if let Some(path) = output {
                let json = serde_json::json!({
                    "proportionality": reduction.proportionality,
                    "residual": reduction.residual,
                });
                write_output(&path, serde_json::to_string_pretty(&json)?)?;
            }
        }
    }
    Ok(())
}

fn cmd_image(amps: &[ComplexArg], normalize: bool, output: Option<PathBuf>) -> Result<()> {
    let state = state_from_amps(amps, normalize)?;
    let image = extract_image(&state);
    let bound = form_bound_state(&state, &image)?;
    println!("conjugate image (slot D*):");
    for (label, amp) in image.state().amplitudes() {
        println!("  {label}: {}", fmt_complex(*amp));
    }
    println!("bound-state weights:");
    for ((label, _), w) in state.amplitudes().iter().zip(bound.weights()) {
        println!("  {label}: {w}");
    }
    println!("off-diagonal weight discarded: {}", bound.discarded_weight());
    if let Some(path) = output {
        let json = serde_json::json!({ "weights": bound.weights() });
        write_output(&path, serde_json::to_string_pretty(&json)?)?;
    }
    Ok(())
}

fn cmd_witness(
    amps_a: &[ComplexArg],
    amps_b: &[ComplexArg],
    normalize: bool,
    output: Option<PathBuf>,
) -> Result<()> {
    let a = state_from_amps(amps_a, normalize)?;
    let b = state_from_amps(amps_b, normalize)?;
    let overlap = a.inner(&b)?;
    let witness = no_cloning_witness(&a, &b)?;
    println!("overlap <a|b>: {}", fmt_complex(overlap));
    println!("no-cloning witness |<a|b> - <a|b>^2|: {witness}");
    if let Some(path) = output {
        let json = serde_json::json!({
            "overlap": [overlap.re, overlap.im],
            "witness": witness,
        });
        write_output(&path, serde_json::to_string_pretty(&json)?)?;
    }
    Ok(())
}

fn born_point(amps: &[ComplexArg], normalize: bool) -> Result<SimplexPoint> {
    let state = state_from_amps(amps, normalize)?;
    let image = extract_image(&state);
    let bound = form_bound_state(&state, &image)?;
    born_weights(&bound)
}

fn cmd_collapse(
    amps: &[ComplexArg],
    m: u64,
    seed: u64,
    normalize: bool,
    output: Option<PathBuf>,
) -> Result<()> {
    let p = born_point(amps, normalize)?;
    let config = WalkConfig::new(m)?;
    let outcome = run_collapse(&p, &config, &mut run_rng(seed, 0))?;
    println!("vertex: {}", outcome.vertex);
    println!("steps: {}", outcome.steps);
    println!("reductions:");
    for (step, index) in &outcome.reductions {
        println!("  step {step}: coordinate {index} frozen");
    }
    if let Some(path) = output {
        write_output(&path, serde_json::to_string_pretty(&outcome)?)?;
    }
    Ok(())
}

fn cmd_ensemble(
    amps: &[ComplexArg],
    m: u64,
    runs: u64,
    seed: u64,
    efficiency: f64,
    normalize: bool,
    output: Option<PathBuf>,
) -> Result<()> {
    let p = born_point(amps, normalize)?;
    let config = EnsembleConfig::new(runs, seed, WalkConfig::new(m)?)?.with_efficiency(efficiency)?;
    let stats = run_ensemble(&p, &config)?;
    println!(
        "registered {} of {} runs (efficiency {efficiency})",
        stats.registered, stats.runs
    );
    println!("vertex  count  frequency  expected");
    for (vertex, (&count, &freq)) in stats.counts.iter().zip(&stats.frequencies).enumerate() {
        let expected = stats.registered as f64 * p.coords()[vertex];
        println!("{vertex}  {count}  {freq}  {expected}");
    }
    match &stats.chi_square {
        Some(chi) => println!(
            "chi-square: statistic {}, dof {}, p_value {}",
            chi.statistic, chi.dof, chi.p_value
        ),
        None => println!("chi-square: skipped (an expected count is below 5)"),
    }
    if let Some(path) = output {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ExportFormat::Csv,
            _ => ExportFormat::Json,
        };
        export(&stats, format, &path)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct OracleReport {
    counts: Vec<u64>,
    #[serde(rename = "M")]
    resolution: u64,
    absorption: Vec<f64>,
}

fn cmd_oracle(counts: Vec<u64>, output: Option<PathBuf>) -> Result<()> {
    let state = LatticeWalkState::from_counts(counts)?;
    let absorption = crate::collapse_walk::absorption_oracle(&state)?;
    println!("M = {}", state.resolution());
    println!("vertex  count  absorption");
    for (vertex, (&count, &prob)) in state.counts().iter().zip(&absorption).enumerate() {
        println!("{vertex}  {count}  {prob}");
    }
    if let Some(path) = output {
        let report = OracleReport {
            counts: state.counts().to_vec(),
            resolution: state.resolution(),
            absorption,
        };
        write_output(&path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_parse() {
        let cases = [
            ("0.6+0.0i", Complex64::new(0.6, 0.0)),
            ("1+0i", Complex64::new(1.0, 0.0)),
            ("-0.5-0.3i", Complex64::new(-0.5, -0.3)),
            ("0.25", Complex64::new(0.25, 0.0)),
            ("0.5i", Complex64::new(0.0, 0.5)),
            ("-1.5e-2+2e-3i", Complex64::new(-0.015, 0.002)),
            ("1e3", Complex64::new(1000.0, 0.0)),
        ];
        for (text, expected) in cases {
            let got = parse_complex(text).unwrap();
            assert_eq!(got, expected, "literal {text}");
        }
    }

    #[test]
    fn malformed_complex_literals_are_rejected() {
        for text in ["", "abc", "1+2", "1++2i", "i2+3", "0.6 0.8i"] {
            assert!(parse_complex(text).is_err(), "literal {text} should fail");
        }
    }

    #[test]
    fn unnormalized_amps_are_rejected_without_the_flag() {
        let amps = [
            ComplexArg(Complex64::new(0.6, 0.0)),
            ComplexArg(Complex64::new(0.9, 0.0)),
        ];
        assert!(state_from_amps(&amps, false).is_err());
        let state = state_from_amps(&amps, true).unwrap();
        assert!(state.is_normalized(1e-12));
    }

    #[test]
    fn born_point_squares_the_moduli() {
        let amps = [
            ComplexArg(Complex64::new(0.6, 0.0)),
            ComplexArg(Complex64::new(0.0, 0.8)),
        ];
        let p = born_point(&amps, false).unwrap();
        assert!((p.coords()[0] - 0.36).abs() < 1e-12);
        assert!((p.coords()[1] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn cli_parses_the_documented_invocations() {
        for argv in [
            vec!["qcollapse", "symmetrize", "--n", "8", "--i", "2", "--stats", "bose"],
            vec!["qcollapse", "image", "--amps", "0.6+0.0i,0.8+0.0i"],
            vec![
                "qcollapse", "witness", "--amps-a", "1+0i,0+0i", "--amps-b", "0.5+0i,0.866+0i",
                "--normalize",
            ],
            vec!["qcollapse", "collapse", "--amps", "1+0i,0+0i", "--m", "100", "--seed", "7"],
            vec![
                "qcollapse", "ensemble", "--amps", "0.6+0i,0.8+0i", "--m", "100", "--runs",
                "1000", "--seed", "42", "-o", "out.json",
            ],
            vec!["qcollapse", "oracle", "--counts", "5,3,2"],
        ] {
            Cli::try_parse_from(&argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
        }
    }

    #[test]
    fn seed_is_mandatory_for_randomized_commands() {
        assert!(Cli::try_parse_from(["qcollapse", "collapse", "--amps", "1+0i,0+0i"]).is_err());
        assert!(Cli::try_parse_from([
            "qcollapse", "ensemble", "--amps", "1+0i,0+0i", "--runs", "10"
        ])
        .is_err());
    }
}

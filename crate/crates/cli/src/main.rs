//! `tubal`: batch front end for tubal-core.
//!
//! Every subcommand prints one JSON object on stdout. Exit codes:
//! 0 ok, 1 a check failed, 2 bad input (parse, I/O, shapes), 3 transform class
//! unsuitable for the request, 4 SVD did not converge, 5 any other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use tubal_core::io;
use tubal_core::scalar::{self, TubalScalar};
use tubal_core::tsvd::{self, DEFAULT_RANK_TOL};
use tubal_core::verify::{self, Suite};
use tubal_core::{Transform, TubalError};

const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "tubal", version, about = "Tubal-matrix algebra: transforms, T-SVD, truncations, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct TransformArgs {
    /// Builtin name (dft, ndft, dct, orth, identity, dct-orth, ndft-orth) or a transform JSON file.
    #[arg(long, short = 't', default_value = "ndft")]
    transform: String,
    /// Seed for the random orthogonal builtins.
    #[arg(long, default_value_t = 0)]
    transform_seed: u64,
}

impl TransformArgs {
    fn resolve(&self, p: usize) -> tubal_core::Result<Transform> {
        resolve_transform(&self.transform, p, self.transform_seed)
    }
}

fn resolve_transform(spec: &str, p: usize, seed: u64) -> tubal_core::Result<Transform> {
    if Transform::BUILTINS.contains(&spec) {
        return Transform::builtin(spec, p, seed);
    }
    let l = io::read_transform(spec)?;
    if l.p() != p {
        return Err(TubalError::DimensionMismatch { context: "transform size vs tube length", expected: p, found: l.p() });
    }
    Ok(l)
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarOp {
    Tprod,
    Unit,
    Invert,
    Transpose,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Mode {
    Tubal,
    Brank,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load a transform and print its classification.
    Transform {
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        builtin: Option<String>,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        file: Option<PathBuf>,
        /// Write the transform as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tubal scalar arithmetic. Tubes are comma- or space-separated lists.
    Scalar {
        op: ScalarOp,
        #[command(flatten)]
        transform: TransformArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Tube length, needed by `unit` when no tube is given.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Factorize a tensor file into U, S, V plus a spectrum sidecar.
    Tsvd {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        transform: TransformArgs,
        /// Writes PREFIX.U.txt, PREFIX.S.txt, PREFIX.V.txt and PREFIX.spectrum.json.
        #[arg(long)]
        out_prefix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Relative reconstruction tolerance for the exit status.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write factors in the binary format (.tubl).
        #[arg(long)]
        binary: bool,
    },
    /// Best tubal-rank or B-rank approximation.
    Truncate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        transform: TransformArgs,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        out: PathBuf,
        /// Allowed `|achieved² − predicted²|` relative to `‖A‖²_F`.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// T- and B-singular spectra, tail energies and ranks.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        transform: TransformArgs,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Run property suites, or check stored factors against a tensor.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Tensor whose factors are checked (with --factors).
        #[arg(long, requires = "factors")]
        input: Option<PathBuf>,
        /// Prefix of factor files written by `tsvd`.
        #[arg(long, requires = "input")]
        factors: Option<PathBuf>,
        #[command(flatten)]
        transform: TransformArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &TubalError) -> u8 {
    match e {
        TubalError::Parse(_) | TubalError::Io(_) | TubalError::InvalidDimension(_) | TubalError::DimensionMismatch { .. } => 2,
        TubalError::SingularTransform { .. }
        | TubalError::NotRealPreserving
        | TubalError::NotDoublyRealPreserving
        | TubalError::NotUnitary
        | TubalError::RealnessViolation { .. } => 3,
        TubalError::NoConvergence { .. } => 4,
        _ => 5,
    }
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("plain data serializes"));
}

fn parse_tube(s: &str) -> tubal_core::Result<TubalScalar> {
    let v: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| TubalError::Parse(format!("bad tube entry {t:?}"))))
        .collect::<tubal_core::Result<_>>()?;
    if v.is_empty() {
        return Err(TubalError::Parse("empty tube".into()));
    }
    Ok(TubalScalar::from(v))
}

fn classification(l: &Transform) -> serde_json::Value {
    let c = l.class();
    json!({
        "name": l.name(),
        "p": l.p(),
        "real_preserving": c.is_real_preserving,
        "doubly_real_preserving": c.is_doubly_real_preserving,
        "unitary": c.is_unitary,
        "conj_structure": c.conj_structure.label(),
    })
}

fn factor_paths(prefix: &Path, binary: bool) -> [PathBuf; 3] {
    let ext = if binary { "tubl" } else { "txt" };
    ["U", "S", "V"].map(|f| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(format!(".{f}.{ext}"));
        PathBuf::from(s)
    })
}

fn sidecar_path(prefix: &Path) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".spectrum.json");
    PathBuf::from(s)
}

fn run(cli: Cli) -> tubal_core::Result<u8> {
    match cli.command {
        Command::Transform { builtin, p, seed, file, out } => {
            let l = match (builtin, file) {
                (Some(name), _) => Transform::builtin(&name, p, seed)?,
                (None, Some(path)) => io::read_transform(path)?,
                (None, None) => unreachable!("clap requires one of --builtin/--file"),
            };
            if let Some(out) = out {
                io::write_transform(out, &l)?;
            }
            print_json(&classification(&l));
            Ok(0)
        }

        Command::Scalar { op, transform, a, b, p } => {
            let a = a.as_deref().map(parse_tube).transpose()?;
            let b = b.as_deref().map(parse_tube).transpose()?;
            let need = |x: Option<TubalScalar>, flag: &str| x.ok_or_else(|| TubalError::Parse(format!("{flag} is required")));
            let p = p.or(a.as_ref().map(TubalScalar::len)).ok_or_else(|| TubalError::Parse("--p or --a is required".into()))?;
            let l = transform.resolve(p)?;
            let result = match op {
                ScalarOp::Tprod => scalar::tprod(&l, &need(a, "--a")?, &need(b, "--b")?),
                ScalarOp::Unit => scalar::unit(&l),
                ScalarOp::Invert => scalar::invert(&l, &need(a, "--a")?),
                ScalarOp::Transpose => scalar::transpose_scalar(&l, &need(a, "--a")?),
            };
            match result {
                Ok(r) => {
                    print_json(&json!({ "transform": l.name(), "result": r }));
                    Ok(0)
                }
                Err(TubalError::RealnessViolation { residual, value: Some(v), .. }) => {
                    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
                    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
                    print_json(&json!({
                        "transform": l.name(),
                        "error": "product is not real",
                        "imaginary_residual": residual,
                        "complex_result": { "re": re, "im": im },
                    }));
                    Ok(3)
                }
                Err(e) => Err(e),
            }
        }

        Command::Tsvd { input, transform, out_prefix, rank_tol, tol, binary } => {
            let a = io::read_tensor(&input)?;
            let l = transform.resolve(a.tube_len())?;
            let f = tsvd::tsvd(&l, &a)?;
            let back = f.reconstruct()?;
            let norm = a.frobenius();
            let residual = if norm > 0.0 { a.distance(&back)? / norm } else { back.frobenius() };
            let [pu, ps, pv] = factor_paths(&out_prefix, binary);
            io::write_tensor(&pu, &f.u)?;
            io::write_tensor(&ps, &f.s.to_matrix())?;
            io::write_tensor(&pv, &f.v)?;
            let sp = f.spectrum(rank_tol)?;
            let (m, n, p) = a.shape();
            let report = json!({
                "transform": classification(&l),
                "shape": [m, n, p],
                "reconstruction_residual": residual,
                "reconstruction_tol": tol,
                "orthogonality_defect": {
                    "u": tubal_core::linalg::orthogonality_defect(&l, &f.u)?,
                    "v": tubal_core::linalg::orthogonality_defect(&l, &f.v)?,
                },
                "realness_residuals": f.realness_residuals,
                "slice_svd_backward_errors": f.slice_svd_backward_errors,
                "tail_energies_are_errors": l.is_unitary(),
                "spectrum": sp,
                "files": { "u": pu, "s": ps, "v": pv },
            });
            std::fs::write(sidecar_path(&out_prefix), serde_json::to_string_pretty(&report).expect("serializes") + "\n")?;
            print_json(&json!({
                "reconstruction_residual": residual,
                "rank_t": sp.rank_t,
                "rank_b": sp.rank_b,
                "sigma": sp.sigma,
                "sidecar": sidecar_path(&out_prefix),
            }));
            Ok(if residual <= tol { 0 } else { EXIT_CHECK_FAILED })
        }

        Command::Truncate { input, transform, mode, rank, out, tol } => {
            let a = io::read_tensor(&input)?;
            let l = transform.resolve(a.tube_len())?;
            // The predicted errors are exact only for unitary transforms.
            if !l.is_unitary() {
                return Err(TubalError::NotUnitary);
            }
            let f = tsvd::tsvd(&l, &a)?;
            let sp = f.spectrum(DEFAULT_RANK_TOL)?;
            let (approx, predicted) = match mode {
                Mode::Tubal => (tsvd::truncate_tubal(&f, rank)?, sp.tau[rank]),
                Mode::Brank => (tsvd::truncate_brank(&f, rank)?, sp.nu[rank]),
            };
            io::write_tensor(&out, &approx)?;
            let achieved = a.distance(&approx)?;
            let norm2 = a.frobenius().powi(2);
            let gap = (achieved * achieved - predicted * predicted).abs();
            let passed = gap <= tol * norm2;
            print_json(&json!({
                "mode": if mode == Mode::Tubal { "tubal" } else { "brank" },
                "rank": rank,
                "achieved_error": achieved,
                "predicted_error": predicted,
                "squared_gap": gap,
                "allowed_squared_gap": tol * norm2,
                "passed": passed,
                "out": out,
            }));
            Ok(if passed { 0 } else { EXIT_CHECK_FAILED })
        }

        Command::Spectrum { input, transform, rank_tol } => {
            let a = io::read_tensor(&input)?;
            let l = transform.resolve(a.tube_len())?;
            print_json(&tsvd::spectrum(&l, &a, rank_tol)?);
            Ok(0)
        }

        Command::Verify { suite, seed, input, factors, transform, tol, out } => {
            let report = match (input, factors) {
                (Some(input), Some(prefix)) => {
                    let a = io::read_tensor(&input)?;
                    let l = transform.resolve(a.tube_len())?;
                    let paths = factor_paths(&prefix, false);
                    let paths = if paths[0].exists() { paths } else { factor_paths(&prefix, true) };
                    let [u, s, v] = [&paths[0], &paths[1], &paths[2]].map(io::read_tensor);
                    verify::check_factors(&l, &a, &u?, &s?, &v?, tol)
                }
                _ => verify::run_suite(suite.parse::<Suite>()?, seed),
            };
            let text = report.to_json();
            if let Some(out) = out {
                std::fs::write(out, text.clone() + "\n")?;
            }
            println!("{text}");
            Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("TUBAL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}


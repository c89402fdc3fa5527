//! Command-line front door: parse fixtures, run decisions and syntheses,
//! emit machine-readable JSON and CSV.
//!
//! Exit codes: 0 success, 2 input error (missing or malformed files,
//! unnormalised data), 3 contract violation (e.g. a protocol was requested
//! for a non-convertible pair).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use locc_core::algebra::{AlgElement, Algebra, StdVector};
use locc_core::json as schema;
use locc_core::spectral;
use locc_core::{convert, examples, monotone, rand_gen};

#[derive(Parser)]
#[command(
    name = "locc",
    about = "State convertibility and LOCC protocol synthesis for finite von Neumann algebras in standard form",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance override for report-style comparisons.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for any randomised check (reproducible byte-identical output).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Singular value function of a positive element, as CSV breakpoints.
    Sv(SvArgs),
    /// Majorisation test x ≺ y between positive elements.
    Majorize(MajorizeArgs),
    /// Decide convertibility of two states; optionally synthesize the
    /// one-way protocol realising it.
    Convert(ConvertArgs),
    /// Entropy of the singular value distribution relative to the trace.
    Entropy(EntropyArgs),
    /// Generate an example fixture (spin-chain, weyl, car).
    Example(ExampleArgs),
    /// Run the trace-vector test on a fixture.
    TraceVector(TraceVectorArgs),
    /// Run the transfer primitive on a state and a commutant operator.
    LoPopescu(LoPopescuArgs),
}

#[derive(Args)]
struct SvArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    element: PathBuf,
}

#[derive(Args)]
struct MajorizeArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    #[arg(long)]
    phi: PathBuf,
    /// Only decide (default).
    #[arg(long, conflicts_with = "protocol")]
    decide: bool,
    /// Synthesize and verify the protocol; exit 3 when not convertible.
    #[arg(long)]
    protocol: bool,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    state: PathBuf,
}

#[derive(Args)]
struct ExampleArgs {
    #[command(subcommand)]
    kind: ExampleKind,
}

#[derive(Subcommand)]
enum ExampleKind {
    /// Half-chain truncation with n entangled pairs.
    SpinChain {
        #[arg(long)]
        pairs: usize,
    },
    /// Clock-and-shift pair with UV = e^{2πip/q}VU.
    Weyl {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        p: usize,
    },
    /// Anti-symmetric Fock space with field generators.
    Car {
        #[arg(long)]
        modes: usize,
    },
}

#[derive(Args)]
struct TraceVectorArgs {
    #[arg(long)]
    fixture: PathBuf,
    /// Word-span depth cap for saturation detection.
    #[arg(long, default_value_t = 12)]
    depth: usize,
}

#[derive(Args)]
struct LoPopescuArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    /// Commutant operator (stored J-conjugate); a seeded random contraction
    /// when omitted.
    #[arg(long)]
    b: Option<PathBuf>,
}

enum AppError {
    /// Exit code 2.
    Input(String),
    /// Exit code 3.
    Contract(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Input(_) => 2,
            AppError::Contract(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Contract(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> AppError {
    AppError::Input(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<Algebra, AppError> {
    let j: schema::AlgebraJson = read_json(path)?;
    schema::algebra_from_json(&j).map_err(input_err)
}

fn load_element(alg: &Algebra, path: &Path) -> Result<AlgElement, AppError> {
    let data: schema::BlocksData = read_json(path)?;
    schema::element_from_data(alg, &data).map_err(input_err)
}

fn load_vector(alg: &Algebra, path: &Path) -> Result<StdVector, AppError> {
    let data: schema::BlocksData = read_json(path)?;
    schema::vector_from_data(alg, &data).map_err(input_err)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<String, AppError> {
    let tol = cli.tol.unwrap_or(locc_core::TOL_EQ);
    match &cli.command {
        Command::Sv(args) => {
            let alg = load_algebra(&args.algebra)?;
            let x = load_element(&alg, &args.element)?;
            let mu = spectral::singular_value_function(&alg, &x).map_err(input_err)?;
            Ok(mu.to_csv())
        }
        Command::Majorize(args) => {
            let alg = load_algebra(&args.algebra)?;
            let x = load_element(&alg, &args.x)?;
            let y = load_element(&alg, &args.y)?;
            let mx = spectral::singular_value_function(&alg, &x).map_err(input_err)?;
            let my = spectral::singular_value_function(&alg, &y).map_err(input_err)?;
            let rep = spectral::majorises_report(&mx, &my);
            let holds = rep.trace_gap <= tol && rep.worst_gap <= tol;
            let out = serde_json::json!({
                "majorises": holds,
                "trace_gap": rep.trace_gap,
                "worst_gap": rep.worst_gap,
                "worst_at": rep.worst_at,
            });
            Ok(format!("{out}\n"))
        }
        Command::Convert(args) => {
            let alg = load_algebra(&args.algebra)?;
            let psi = load_vector(&alg, &args.psi)?;
            let phi = load_vector(&alg, &args.phi)?;
            let decision = convert::decide_convertible(&alg, &psi, &phi).map_err(input_err)?;
            if !args.protocol {
                let out = serde_json::json!({ "decision": decision });
                return Ok(format!("{out}\n"));
            }
            if !decision {
                return Err(AppError::Contract(
                    "protocol requested but the states are not convertible".into(),
                ));
            }
            let protocol = convert::synthesize_protocol(&alg, &psi, &phi).map_err(input_err)?;
            let residual = convert::verify_protocol(&protocol, &psi, &phi).map_err(input_err)?;
            let out = serde_json::json!({
                "decision": true,
                "residual": residual,
                "protocol": schema::protocol_to_json(&protocol),
            });
            Ok(format!("{out}\n"))
        }
        Command::Entropy(args) => {
            let alg = load_algebra(&args.algebra)?;
            let state = load_element(&alg, &args.state)?;
            let rho = locc_core::algebra::Density::new(
                &alg,
                locc_core::Side::Left,
                state.data().to_vec(),
            )
            .map_err(input_err)?;
            let rep = monotone::entropy_relative_to_trace(&alg, &rho).map_err(input_err)?;
            let out = serde_json::json!({
                "H": rep.value,
                "mu": rep.density.to_csv(),
            });
            Ok(format!("{out}\n"))
        }
        Command::Example(args) => {
            let fixture = match args.kind {
                ExampleKind::SpinChain { pairs } => schema::fixture_spin_chain(pairs),
                ExampleKind::Weyl { q, p } => schema::fixture_weyl(q, p),
                ExampleKind::Car { modes } => schema::fixture_car(modes),
            }
            .map_err(input_err)?;
            let text = serde_json::to_string(&fixture).map_err(input_err)?;
            Ok(format!("{text}\n"))
        }
        Command::TraceVector(args) => {
            let fixture: schema::FixtureJson = read_json(&args.fixture)?;
            let v = schema::validate_fixture(&fixture).map_err(input_err)?;
            let rep = examples::is_trace_vector(&v.check_generators, &v.check_vector, args.depth)
                .map_err(input_err)?;
            let threshold = cli.tol.unwrap_or(1e-8);
            let out = serde_json::json!({
                "kind": v.kind,
                "saturated": rep.saturated,
                "span_dim": rep.span_dim,
                "defect": rep.defect,
                "is_trace_vector": rep.saturated && rep.defect <= threshold,
                "inconclusive": !rep.saturated,
            });
            Ok(format!("{out}\n"))
        }
        Command::LoPopescu(args) => {
            let alg = load_algebra(&args.algebra)?;
            let psi = load_vector(&alg, &args.psi)?;
            let b = match &args.b {
                Some(path) => load_element(&alg, path)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    rand_gen::random_contraction(&mut rng, &alg, 1.0)
                }
            };
            let t = locc_core::lo_popescu_transfer(&psi, &b).map_err(input_err)?;
            let b_psi = psi.act(locc_core::Side::Right, &b).map_err(input_err)?;
            let z_psi = psi.act(locc_core::Side::Left, &t.z).map_err(input_err)?;
            let rec = t.reconstruct(&psi).map_err(input_err)?;
            let residual = rec.sub(&b_psi).map_err(input_err)?.norm();
            let out = serde_json::json!({
                "norm_b_psi": b_psi.norm(),
                "norm_z_psi": z_psi.norm(),
                "norm_gap": (b_psi.norm() - z_psi.norm()).abs(),
                "residual": residual,
            });
            Ok(format!("{out}\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match emit(&cli.out, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}", e.message());
                ExitCode::from(e.code())
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cohere_core::analysis::{
    fig4_data, fig5_data, log_grid, surfaces_to_csv, sweep_variable, default_variable, visibility_surface, Quantity,
    SurfaceKind, FIG4_SETS,
};
use cohere_core::circuit::Experiment;
use cohere_core::dsl::{parse_bytes, parse_with_warnings, CircuitConfig, SweepDecl};
use cohere_core::sampler::{consistency_report, run_experiment};
use cohere_core::verify::run_verification;
use cohere_core::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "cohere", version, about = "Two-particle coherence-transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the detection distribution of a circuit as JSON.
    Simulate { file: PathBuf },
    /// Sweep the circuit's phase variable and write a CSV pattern.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value = "-")]
        out: String,
        /// Overrides the point count from the file.
        #[arg(long)]
        points: Option<usize>,
        /// Comma-separated quantity names; all by default.
        #[arg(long, value_delimiter = ',')]
        quantities: Vec<String>,
    },
    /// Closed-form visibility surface over an (eps, eta) grid.
    Surface {
        #[arg(long, value_enum)]
        kind: Kind,
        /// `lo:hi:n`, log-spaced
        #[arg(long)]
        eps: String,
        /// `lo:hi:n`, log-spaced
        #[arg(long)]
        eta: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Monte Carlo run; prints counts and z-scores as JSON.
    Sample {
        file: PathBuf,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Randomized oracle-equivalence and invariant suite.
    Verify {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Interference patterns for the three reference parameter sets.
    Fig4 {
        #[arg(long, default_value = "-")]
        out: String,
        #[arg(long, default_value_t = SweepDecl::DEFAULT_POINTS)]
        points: usize,
    },
    /// Photon V+ and V- surfaces on a 41x41 log grid over [1e-2, 1e2].
    Fig5 {
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    PhotonPlus,
    PhotonMinus,
    FermionPlus,
    FermionMinus,
}

impl From<Kind> for SurfaceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::PhotonPlus => SurfaceKind::PhotonPlus,
            Kind::PhotonMinus => SurfaceKind::PhotonMinus,
            Kind::FermionPlus => SurfaceKind::FermionPlus,
            Kind::FermionMinus => SurfaceKind::FermionMinus,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TotalAbsorption | Error::UndefinedVisibility(_) | Error::NotNormalized { .. } => EXIT_DEGENERATE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn load(path: &PathBuf) -> Result<CircuitConfig, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let name = path.display();
    let result = match std::str::from_utf8(&bytes) {
        Ok(text) => parse_with_warnings(text),
        Err(_) => parse_bytes(&bytes).map(|c| (c, Vec::new())),
    };
    match result {
        Ok((config, warnings)) => {
            for w in warnings {
                eprintln!("{name}:{w}");
            }
            Ok(config)
        }
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("{name}:{d}")).collect();
            Err(Failure::usage(lines.join("\n")))
        }
    }
}

fn emit(out: &str, text: &str) -> CliResult {
    if out == "-" {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}")))
    } else {
        fs::write(out, text).map_err(|e| Failure::usage(format!("{out}: {e}")))
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("expected lo:hi:n, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(log_grid(lo, hi, n)?)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Simulate { file } => {
            let config = load(&file)?;
            let dist = Experiment::from_config(&config)?.distribution()?;
            emit("-", &json(&dist))
        }
        Command::Sweep {
            file,
            out,
            points,
            quantities,
        } => {
            let config = load(&file)?;
            let quantities = if quantities.is_empty() {
                Quantity::ALL.to_vec()
            } else {
                quantities
                    .iter()
                    .map(|q| Quantity::from_name(q))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let n = points
                .or(config.sweep.map(|s| s.points))
                .unwrap_or(SweepDecl::DEFAULT_POINTS);
            let pattern = sweep_variable(&config, default_variable(&config), &quantities, n)?;
            emit(&out, &pattern.to_csv())
        }
        Command::Surface { kind, eps, eta, out } => {
            let surface = visibility_surface(kind.into(), &parse_range(&eps)?, &parse_range(&eta)?)?;
            emit(&out, &surface.to_csv())
        }
        Command::Sample { file, n, seed } => {
            let config = load(&file)?;
            let n = n
                .or(config.sampler.map(|s| s.n))
                .ok_or_else(|| Failure::usage("no sample size: pass --n or add a `sample` line"))?;
            let seed = seed.or(config.sampler.map(|s| s.seed)).unwrap_or(0);
            let exact = Experiment::from_config(&config)?.distribution()?;
            let counts = run_experiment(&config, n, seed)?;
            let report = consistency_report(&counts, &exact).ok();
            let doc = serde_json::json!({
                "counts": counts.to_json_value(),
                "exact": exact,
                "consistency": report,
            });
            emit("-", &json(&doc))
        }
        Command::Verify { cases, seed } => {
            let report = run_verification(cases, seed)?;
            eprintln!(
                "verify: {} cases, seed {}, max deviation {:.3e} (tolerance {:.0e})",
                report.cases,
                report.seed,
                report.max_deviation(),
                report.tolerance
            );
            emit("-", &json(&report))?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_VERIFY,
                    message: "verification failed".into(),
                })
            }
        }
        Command::Fig4 { out, points } => {
            eprintln!(
                "fig4: parameter sets {}",
                FIG4_SETS.map(|(e, h)| format!("eps={e} eta={h}")).join(", ")
            );
            emit(&out, &fig4_data(points)?.to_csv())
        }
        Command::Fig5 { out } => emit(&out, &surfaces_to_csv(&fig5_data()?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
